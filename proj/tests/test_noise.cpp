#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <numbers>
#include <vector>

#include "smr/errors.hpp"
#include "smr/field.hpp"
#include "smr/grid.hpp"
#include "smr/modes.hpp"
#include "smr/noise.hpp"
#include "smr/rng.hpp"

using Catch::Approx;
using Catch::Matchers::WithinAbs;
using namespace smr;

namespace {

QWienerSpec diagonal_spec(const Grid1D& grid, std::vector<double> amplitudes) {
  QWienerSpec spec;
  spec.modes = basis_modes(grid, amplitudes.size());
  spec.amplitudes = std::move(amplitudes);
  validate_spec(spec);
  return spec;
}

}  // namespace

TEST_CASE("zero amplitudes produce the zero increment") {
  const Grid1D grid(0.0, 1.0, 64, BoundaryCondition::dirichlet);
  const auto spec = diagonal_spec(grid, {0.0, 0.0, 0.0});
  NoiseStream stream(1, 0);
  const auto inc = sample_increment(spec, 0.01, stream);
  for (double c : inc.coefficients) REQUIRE(c == 0.0);
  REQUIRE(l2_norm(inc.as_field) == 0.0);
}

TEST_CASE("increment coefficient variance matches amplitude^2 dt") {
  const Grid1D grid(0.0, 1.0, 64, BoundaryCondition::dirichlet);
  const auto spec = diagonal_spec(grid, {1.0});
  const double dt = 0.01;
  const std::size_t n = 100000;

  NoiseStream stream(7, 0);
  double mean = 0.0, m2 = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double c = sample_increment(spec, dt, stream).coefficients[0];
    const double d = c - mean;
    mean += d / static_cast<double>(i);
    m2 += d * (c - mean);
  }
  const double var = m2 / static_cast<double>(n - 1);
  const double se = dt * std::sqrt(2.0 / static_cast<double>(n - 1));
  REQUIRE_THAT(var, WithinAbs(dt, 3.0 * se));
  REQUIRE_THAT(mean, WithinAbs(0.0, 4.0 * std::sqrt(dt / static_cast<double>(n))));
}

TEST_CASE("same seed replays the identical increment sequence") {
  const Grid1D grid(0.0, 1.0, 64, BoundaryCondition::dirichlet);
  const auto spec = diagonal_spec(grid, {1.0, 0.5, 0.25});
  NoiseStream a(42, 3), b(42, 3);
  for (int step = 0; step < 50; ++step) {
    const auto ia = sample_increment(spec, 0.05, a);
    const auto ib = sample_increment(spec, 0.05, b);
    for (std::size_t k = 0; k < spec.dim(); ++k)
      REQUIRE(ia.coefficients[k] == ib.coefficients[k]);
  }
  REQUIRE(a.position() == b.position());
}

TEST_CASE("apply_Q scales modes by squared amplitudes and kills the complement") {
  const Grid1D grid(0.0, 1.0, 64, BoundaryCondition::dirichlet);
  const auto spec = diagonal_spec(grid, {0.7, 0.3});

  const Field qe1 = apply_Q(spec, spec.modes[0]);
  const Field expected = spec.modes[0].scaled(0.49);
  for (std::size_t i = 0; i < grid.size(); ++i)
    REQUIRE_THAT(qe1[i] - expected[i], WithinAbs(0.0, 1e-10));

  const auto all_modes = basis_modes(grid, 8);
  const Field orthogonal = all_modes[5];
  REQUIRE(l2_norm(apply_Q(spec, orthogonal)) < 1e-10);
}

TEST_CASE("identity amplitudes reproduce the carrier pairing") {
  const Grid1D grid(0.0, 1.0, 64, BoundaryCondition::dirichlet);
  const auto spec = diagonal_spec(grid, std::vector<double>(32, 1.0));
  const Field f = Field::from_function(
      grid, [](double x) { return std::sqrt(2.0) * std::sin(std::numbers::pi * x); });
  REQUIRE_THAT(q_pairing(spec, f, f), WithinAbs(1.0, 1e-6));
}

TEST_CASE("apply_Q is linear, symmetric and positive semidefinite") {
  const Grid1D grid(0.0, 2.0, 96, BoundaryCondition::neumann);
  const auto spec = diagonal_spec(grid, {1.0, 0.6, 0.2, 0.1});
  NoiseStream stream(9, 1);
  auto rand_field = [&] {
    std::vector<double> v(grid.size());
    for (auto& x : v) x = stream.normal();
    return Field(grid, std::move(v));
  };
  for (int trial = 0; trial < 5; ++trial) {
    const Field f = rand_field();
    const Field g = rand_field();
    REQUIRE_THAT(q_pairing(spec, f, g) - q_pairing(spec, g, f), WithinAbs(0.0, 1e-12));
    const Field lhs = apply_Q(spec, f + g.scaled(1.5));
    const Field rhs = apply_Q(spec, f) + apply_Q(spec, g).scaled(1.5);
    for (std::size_t i = 0; i < grid.size(); ++i)
      REQUIRE_THAT(lhs[i] - rhs[i], WithinAbs(0.0, 1e-12));
    REQUIRE(q_pairing(spec, f, f) >= -1e-12);
  }
}

TEST_CASE("empirical covariance matches the Q pairing") {
  const Grid1D grid(0.0, 1.0, 64, BoundaryCondition::dirichlet);
  const auto spec = diagonal_spec(grid, {0.5, 0.25});
  const std::size_t n = 100000;

  SECTION("diagonal entry") {
    NoiseStream stream(11, 0);
    const auto r = covariance_check(spec, spec.modes[0], spec.modes[0], n, 0.01, stream);
    REQUIRE_THAT(r.exact, WithinAbs(0.25, 1e-9));
    REQUIRE(std::abs(r.empirical - r.exact) <= 4.0 * r.stderr_est);
  }
  SECTION("off-diagonal entry vanishes") {
    NoiseStream stream(12, 0);
    const auto r = covariance_check(spec, spec.modes[0], spec.modes[1], n, 0.01, stream);
    REQUIRE_THAT(r.exact, WithinAbs(0.0, 1e-9));
    REQUIRE(std::abs(r.empirical) <= 4.0 * r.stderr_est + 1e-12);
  }
  SECTION("field orthogonal to the span") {
    const auto all_modes = basis_modes(grid, 8);
    NoiseStream stream(13, 0);
    const auto r = covariance_check(spec, all_modes[6], all_modes[6], 1000, 0.01, stream);
    REQUIRE_THAT(r.exact, WithinAbs(0.0, 1e-12));
    REQUIRE(std::abs(r.empirical) <= 4.0 * r.stderr_est + 1e-12);
  }
}

TEST_CASE("increment coefficients scale as sqrt(dt)") {
  const Grid1D grid(0.0, 1.0, 64, BoundaryCondition::dirichlet);
  const auto spec = diagonal_spec(grid, {1.0});
  const std::size_t n = 20000;

  auto sample_var = [&](double dt, std::uint64_t stream_id) {
    NoiseStream stream(21, stream_id);
    double mean = 0.0, m2 = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      const double c = sample_increment(spec, dt, stream).coefficients[0];
      const double d = c - mean;
      mean += d / static_cast<double>(i);
      m2 += d * (c - mean);
    }
    return m2 / static_cast<double>(n - 1);
  };

  const double ratio = sample_var(0.04, 1) / sample_var(0.01, 2);
  const double se_ratio = 4.0 * std::sqrt(2.0 / static_cast<double>(n - 1)) * std::sqrt(2.0);
  REQUIRE_THAT(ratio, WithinAbs(4.0, 5.0 * se_ratio));
}

TEST_CASE("spec validation rejects malformed inputs") {
  const Grid1D grid(0.0, 1.0, 64, BoundaryCondition::dirichlet);
  const auto modes = basis_modes(grid, 2);

  QWienerSpec empty;
  REQUIRE_THROWS_AS(validate_spec(empty), ConfigError);

  QWienerSpec mismatched;
  mismatched.modes = modes;
  mismatched.amplitudes = {1.0};
  REQUIRE_THROWS_AS(validate_spec(mismatched), ConfigError);

  QWienerSpec negative;
  negative.modes = modes;
  negative.amplitudes = {1.0, -0.5};
  REQUIRE_THROWS_AS(validate_spec(negative), ConfigError);

  QWienerSpec duplicated;
  duplicated.modes = {modes[0], modes[0]};
  duplicated.amplitudes = {1.0, 1.0};
  REQUIRE_THROWS_AS(validate_spec(duplicated), ConfigError);
}

TEST_CASE("white noise truncation is orthonormal and increments reconstruct") {
  const Grid1D grid(0.0, 1.0, 128, BoundaryCondition::dirichlet);
  const auto spec = white_noise_truncation(grid, 8);
  REQUIRE(spec.dim() == 8);
  REQUIRE(mode_orthonormality_defect(spec) < 1e-8);

  NoiseStream stream(5, 0);
  const auto inc = sample_increment(spec, 0.02, stream);
  Field rebuilt = Field::zero(grid);
  for (std::size_t k = 0; k < spec.dim(); ++k)
    rebuilt = rebuilt.add_scaled(inc.coefficients[k], spec.modes[k]);
  const Field direct = inc.as_field;
  for (std::size_t i = 0; i < grid.size(); ++i)
    REQUIRE_THAT(direct[i] - rebuilt[i], WithinAbs(0.0, 1e-12));

  // Pairing against an increment is the coefficient-weighted mode pairing.
  const Field probe = spec.modes[2] + spec.modes[4].scaled(0.5);
  double expected = inc.coefficients[2] + 0.5 * inc.coefficients[4];
  REQUIRE_THAT(pair_with_increment(spec, probe, inc), WithinAbs(expected, 1e-10));
}
