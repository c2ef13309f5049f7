#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "rcast/error.hpp"
#include "rcast/numerics.hpp"

namespace rcast {

struct LocationRecord {
  std::int64_t id = 0;
  double x = 0.0;
  double y = 0.0;

  bool operator==(const LocationRecord&) const = default;
};

/// Dense time-by-location field on an equally spaced integer time grid.
class FieldSeries {
 public:
  FieldSeries() = default;

  FieldSeries(Matrix values, std::vector<std::int64_t> times, std::vector<LocationRecord> locations)
      : values_(std::move(values)), times_(std::move(times)), locations_(std::move(locations)) {
    validate();
  }

  /// Series with times 0..T-1 and locations on a unit-spaced line.
  static FieldSeries from_matrix(Matrix values) {
    std::vector<std::int64_t> times(static_cast<std::size_t>(values.rows()));
    for (std::size_t t = 0; t < times.size(); ++t) times[t] = static_cast<std::int64_t>(t);
    std::vector<LocationRecord> locs(static_cast<std::size_t>(values.cols()));
    for (std::size_t i = 0; i < locs.size(); ++i)
      locs[i] = {static_cast<std::int64_t>(i), static_cast<double>(i), 0.0};
    return FieldSeries(std::move(values), std::move(times), std::move(locs));
  }

  const Matrix& values() const { return values_; }
  const std::vector<std::int64_t>& times() const { return times_; }
  const std::vector<LocationRecord>& locations() const { return locations_; }

  Eigen::Index n_times() const { return values_.rows(); }
  Eigen::Index n_locations() const { return values_.cols(); }

  std::int64_t time_step() const { return times_.size() > 1 ? times_[1] - times_[0] : 1; }

  /// Rows [begin, end) as a new series sharing the location table.
  FieldSeries slice(Eigen::Index begin, Eigen::Index end) const {
    require(begin >= 0 && end <= n_times() && begin < end, ErrorKind::dimension,
            "FieldSeries::slice: bad range");
    return FieldSeries(values_.middleRows(begin, end - begin),
                       std::vector<std::int64_t>(times_.begin() + begin, times_.begin() + end),
                       locations_);
  }

 private:
  void validate() const {
    require(values_.rows() >= 1 && values_.cols() >= 1, ErrorKind::format,
            "FieldSeries: need T >= 1 and n_y >= 1");
    require(static_cast<Eigen::Index>(times_.size()) == values_.rows(), ErrorKind::format,
            "FieldSeries: time vector length does not match rows");
    require(static_cast<Eigen::Index>(locations_.size()) == values_.cols(), ErrorKind::format,
            "FieldSeries: location table does not match columns");
    require(values_.allFinite(), ErrorKind::format, "FieldSeries: non-finite value");
    if (times_.size() > 1) {
      const auto step = times_[1] - times_[0];
      require(step > 0, ErrorKind::format, "FieldSeries: times must be strictly increasing");
      for (std::size_t t = 2; t < times_.size(); ++t)
        require(times_[t] - times_[t - 1] == step, ErrorKind::format,
                "FieldSeries: time grid is not equally spaced at t=" + std::to_string(times_[t]));
    }
    for (std::size_t i = 0; i < locations_.size(); ++i)
      require(locations_[i].id == static_cast<std::int64_t>(i), ErrorKind::format,
              "FieldSeries: location ids must be contiguous from 0");
  }

  Matrix values_;
  std::vector<std::int64_t> times_;
  std::vector<LocationRecord> locations_;
};

// ---------------------------------------------------------------------------
// text helpers

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  for (auto& f : out) {
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r'))
      f.remove_suffix(1);
  }
  return out;
}

template <typename T>
T parse_number(std::string_view field, const std::string& where) {
  T v{};
  auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  require(res.ec == std::errc() && res.ptr == field.data() + field.size(), ErrorKind::format,
          where + ": cannot parse '" + std::string(field) + "'");
  return v;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes through a temporary sibling file and renames it into place.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::io, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    require(static_cast<bool>(out), ErrorKind::io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  require(!ec, ErrorKind::io, "cannot rename " + tmp.string() + ": " + ec.message());
}

namespace detail {

template <typename Fn>
void for_each_data_row(const std::string& text, std::string_view expected_header,
                       const std::string& what, Fn&& fn) {
  std::istringstream in(text);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::format, what + ": empty file");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // BOM
  {
    auto fields = split_csv_line(line);
    std::string header;
    for (std::size_t i = 0; i < fields.size(); ++i)
      header += (i ? "," : "") + std::string(fields[i]);
    require(header == expected_header, ErrorKind::format,
            what + ": expected header '" + std::string(expected_header) + "', got '" + header + "'");
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    fn(split_csv_line(line), what + " line " + std::to_string(lineno));
  }
}

}  // namespace detail

inline std::vector<LocationRecord> read_locations_csv(const std::filesystem::path& path) {
  std::map<std::int64_t, LocationRecord> by_id;
  detail::for_each_data_row(read_text_file(path), "loc,x,y", path.string(),
                            [&](const auto& f, const std::string& where) {
                              require(f.size() == 3, ErrorKind::format, where + ": expected 3 fields");
                              LocationRecord r{parse_number<std::int64_t>(f[0], where),
                                               parse_number<double>(f[1], where),
                                               parse_number<double>(f[2], where)};
                              require(by_id.emplace(r.id, r).second, ErrorKind::format,
                                      where + ": duplicate location id " + std::to_string(r.id));
                            });
  require(!by_id.empty(), ErrorKind::format, path.string() + ": no locations");
  std::vector<LocationRecord> out;
  for (const auto& [id, rec] : by_id) {
    require(id == static_cast<std::int64_t>(out.size()), ErrorKind::format,
            path.string() + ": location ids must be contiguous from 0");
    out.push_back(rec);
  }
  return out;
}

inline FieldSeries read_field_csv(const std::filesystem::path& path,
                                  const std::filesystem::path& locations_path) {
  auto locations = read_locations_csv(locations_path);
  struct Row {
    std::int64_t time, loc;
    double value;
  };
  std::vector<Row> rows;
  detail::for_each_data_row(read_text_file(path), "time,loc,value", path.string(),
                            [&](const auto& f, const std::string& where) {
                              require(f.size() == 3, ErrorKind::format, where + ": expected 3 fields");
                              rows.push_back({parse_number<std::int64_t>(f[0], where),
                                              parse_number<std::int64_t>(f[1], where),
                                              parse_number<double>(f[2], where)});
                            });
  require(!rows.empty(), ErrorKind::format, path.string() + ": no observations");

  std::set<std::int64_t> time_set;
  for (const auto& r : rows) {
    require(r.loc >= 0 && r.loc < static_cast<std::int64_t>(locations.size()), ErrorKind::format,
            path.string() + ": unknown location id " + std::to_string(r.loc));
    time_set.insert(r.time);
  }
  std::vector<std::int64_t> times(time_set.begin(), time_set.end());
  if (times.size() > 1) {
    const auto step = times[1] - times[0];
    for (std::size_t i = 2; i < times.size(); ++i)
      require(times[i] - times[i - 1] == step, ErrorKind::format,
              path.string() + ": gap in time grid before time " + std::to_string(times[i]));
  }
  std::map<std::int64_t, Eigen::Index> time_index;
  for (std::size_t i = 0; i < times.size(); ++i) time_index[times[i]] = static_cast<Eigen::Index>(i);

  const auto n_t = static_cast<Eigen::Index>(times.size());
  const auto n_y = static_cast<Eigen::Index>(locations.size());
  Matrix values(n_t, n_y);
  std::vector<char> seen(static_cast<std::size_t>(n_t * n_y), 0);
  for (const auto& r : rows) {
    const auto t = time_index.at(r.time);
    auto& flag = seen[static_cast<std::size_t>(t * n_y + r.loc)];
    require(!flag, ErrorKind::format,
            path.string() + ": duplicate entry for time " + std::to_string(r.time) + ", loc " +
                std::to_string(r.loc));
    flag = 1;
    values(t, r.loc) = r.value;
  }
  for (Eigen::Index t = 0; t < n_t; ++t)
    for (Eigen::Index i = 0; i < n_y; ++i)
      require(seen[static_cast<std::size_t>(t * n_y + i)], ErrorKind::format,
              path.string() + ": missing entry for time " + std::to_string(times[t]) + ", loc " +
                  std::to_string(i));
  return FieldSeries(std::move(values), std::move(times), std::move(locations));
}

inline std::string field_csv_text(const FieldSeries& series) {
  std::string out = "time,loc,value\n";
  out.reserve(out.size() + static_cast<std::size_t>(series.values().size()) * 28);
  for (Eigen::Index t = 0; t < series.n_times(); ++t)
    for (Eigen::Index i = 0; i < series.n_locations(); ++i) {
      out += std::to_string(series.times()[t]);
      out += ',';
      out += std::to_string(series.locations()[i].id);
      out += ',';
      out += format_double(series.values()(t, i));
      out += '\n';
    }
  return out;
}

inline std::string locations_csv_text(const std::vector<LocationRecord>& locations) {
  std::string out = "loc,x,y\n";
  for (const auto& l : locations)
    out += std::to_string(l.id) + "," + format_double(l.x) + "," + format_double(l.y) + "\n";
  return out;
}

inline void write_field_csv(const FieldSeries& series, const std::filesystem::path& path) {
  write_file_atomic(path, field_csv_text(series));
}

inline void write_locations_csv(const std::vector<LocationRecord>& locations,
                                const std::filesystem::path& path) {
  write_file_atomic(path, locations_csv_text(locations));
}

/// FNV-1a over raw bytes; used for data fingerprints in manifests.
inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fingerprint(const FieldSeries& series) { return fnv1a(field_csv_text(series)); }

}  // namespace rcast
