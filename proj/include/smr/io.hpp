#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "smr/ensemble.hpp"
#include "smr/errors.hpp"

namespace smr {

/// Shortest decimal representation that round-trips to the same double.
/// Reproducibility contract: all numeric output goes through this.
inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (res.ec != std::errc())
    throw ConfigError("format_double: value does not fit the buffer");
  return std::string(buf.data(), res.ptr);
}

inline std::string format_u64(std::uint64_t v) {
  std::array<char, 24> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

/// FNV-1a over bytes; used to fingerprint canonical config text.
inline std::uint64_t fnv1a_64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex_u64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

namespace detail {

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // "\n" endings on every platform
  if (!out) throw ConfigError("cannot open output file: " + path);
  return out;
}

inline void write_provenance_header(std::ofstream& out, const std::string& config_hash,
                                    std::uint64_t seed) {
  out << "# config_hash=" << config_hash << "\n";
  out << "# seed=" << format_u64(seed) << "\n";
}

}  // namespace detail

/// t, mean, variance and the 5/25/50/75/95 percent quantiles per time slice.
inline void write_series_csv(const std::string& path, const EnsembleStats& stats,
                             const std::string& config_hash, std::uint64_t seed) {
  auto out = detail::open_output(path);
  detail::write_provenance_header(out, config_hash, seed);
  out << "t,mean,variance,q05,q25,q50,q75,q95\n";
  for (std::size_t i = 0; i < stats.times.size(); ++i) {
    out << format_double(stats.times[i]) << ',' << format_double(stats.mean[i]) << ','
        << format_double(stats.variance[i]);
    for (double q : stats.quantiles[i]) out << ',' << format_double(q);
    out << "\n";
  }
}

inline void write_histogram_csv(const std::string& path, const Histogram& hist,
                                const std::string& config_hash, std::uint64_t seed) {
  auto out = detail::open_output(path);
  detail::write_provenance_header(out, config_hash, seed);
  out << "bin_left,bin_right,count\n";
  for (std::size_t i = 0; i + 1 < hist.edges.size(); ++i)
    out << format_double(hist.edges[i]) << ',' << format_double(hist.edges[i + 1]) << ','
        << format_u64(hist.counts[i]) << "\n";
}

/// Stored paths in long form: path_id, t, h. Slice times are shared.
inline void write_paths_csv(const std::string& path, const EnsembleStats& stats,
                            const std::string& config_hash, std::uint64_t seed) {
  auto out = detail::open_output(path);
  detail::write_provenance_header(out, config_hash, seed);
  out << "path,t,h\n";
  for (const auto& p : stats.stored_paths)
    for (std::size_t i = 0; i < p.states.size() && i < stats.times.size(); ++i)
      out << format_u64(p.path_index) << ',' << format_double(stats.times[i]) << ','
          << format_double(p.states[i]) << "\n";
}

/// Generic two-column-plus table writer for small reports.
inline void write_table_csv(const std::string& path, const std::string& header,
                            const std::vector<std::vector<double>>& rows,
                            const std::string& config_hash, std::uint64_t seed) {
  auto out = detail::open_output(path);
  detail::write_provenance_header(out, config_hash, seed);
  out << header << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << format_double(row[i]);
    }
    out << "\n";
  }
}

}  // namespace smr
