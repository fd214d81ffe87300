#include "scusum/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace scusum::io {

using nlohmann::json;

namespace {

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string_view rest(line);
  for (;;) {
    const auto comma = rest.find(',');
    out.push_back(trim(rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return out;
}

double parse_double(const std::string& field, std::size_t line) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || field.empty()) {
    throw FormatError(line, "not a number: '" + field + "'");
  }
  return value;
}

GraphSnapshot parse_snapshot(const std::string& text, std::size_t line) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(line, std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("t") || !j.contains("n")) {
    throw FormatError(line, "snapshot needs \"t\" and \"n\"");
  }
  for (const auto& [key, value] : j.items()) {
    if (key != "t" && key != "n" && key != "tri" && key != "full") {
      throw FormatError(line, "unknown key \"" + key + "\"");
    }
  }
  if (!j["t"].is_number_integer() || !j["n"].is_number_integer()) {
    throw FormatError(line, "\"t\" and \"n\" must be integers");
  }
  const auto n = j["n"].get<std::int64_t>();
  if (n < 1) throw FormatError(line, "\"n\" must be >= 1");
  const bool tri = j.contains("tri");
  if (tri == j.contains("full")) {
    throw FormatError(line, "exactly one of \"tri\" and \"full\" is required");
  }
  const json& values = tri ? j["tri"] : j["full"];
  const auto expected = static_cast<std::size_t>(tri ? n * (n + 1) / 2 : n * n);
  if (!values.is_array() || values.size() != expected) {
    throw FormatError(line, "expected " + std::to_string(expected) + " weights");
  }
  GraphSnapshot g;
  g.t = j["t"].get<std::int64_t>();
  g.convention = tri ? Convention::kSymmetric : Convention::kIidFull;
  g.weights.resize(n, n);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = tri ? r : 0; c < n; ++c, ++k) {
      if (!values[k].is_number()) throw FormatError(line, "weights must be numbers");
      const double x = values[k].get<double>();
      g.weights(r, c) = x;
      if (tri) g.weights(c, r) = x;
    }
  }
  return g;
}

}  // namespace

FormatError::FormatError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

void write_stream(std::span<const GraphSnapshot> stream, std::ostream& out) {
  for (const auto& g : stream) {
    const Eigen::Index n = g.weights.rows();
    json values = json::array();
    for (Eigen::Index r = 0; r < n; ++r) {
      const Eigen::Index start = g.convention == Convention::kSymmetric ? r : 0;
      for (Eigen::Index c = start; c < n; ++c) values.push_back(g.weights(r, c));
    }
    json j;
    j["t"] = g.t;
    j["n"] = n;
    j[g.convention == Convention::kSymmetric ? "tri" : "full"] = std::move(values);
    out << j.dump() << '\n';
  }
}

void write_stream(std::span<const GraphSnapshot> stream,
                  const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_stream(stream, out);
}

std::vector<GraphSnapshot> read_stream(std::istream& in) {
  std::vector<GraphSnapshot> stream;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    GraphSnapshot g = parse_snapshot(line, lineno);
    if (!stream.empty() && g.n() != stream.front().n()) {
      throw FormatError(lineno, "node count " + std::to_string(g.n()) +
                                    " differs from " + std::to_string(stream.front().n()));
    }
    stream.push_back(std::move(g));
  }
  return stream;
}

std::vector<GraphSnapshot> read_stream(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_stream(in);
}

void write_trace_csv(std::span<const TracePoint> trajectory, std::ostream& out) {
  out << "t,statistic,alarmed\n";
  std::ostringstream row;
  row.precision(17);
  for (const auto& p : trajectory) {
    row.str({});
    row << p.t << ',' << p.statistic << ',' << (p.alarmed ? 1 : 0) << '\n';
    out << row.str();
  }
}

void write_oc_csv(std::span<const OcRow> rows, std::ostream& out) {
  out << "gamma,b,edd,se\n";
  std::ostringstream row;
  row.precision(17);
  for (const auto& r : rows) {
    row.str({});
    row << r.gamma << ',' << r.b << ',' << r.edd << ',' << r.se << '\n';
    out << row.str();
  }
}

MultichannelSeries read_sensor_csv(std::istream& in) {
  MultichannelSeries series;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    auto fields = split_csv(line);
    if (series.names.empty()) {
      series.names = std::move(fields);
      series.channels.resize(series.names.size());
      continue;
    }
    if (fields.size() != series.names.size()) {
      throw FormatError(lineno, "expected " + std::to_string(series.names.size()) +
                                    " columns, found " + std::to_string(fields.size()));
    }
    for (std::size_t i = 0; i < fields.size(); ++i) {
      series.channels[i].push_back(parse_double(fields[i], lineno));
    }
  }
  if (series.names.empty()) throw FormatError(lineno, "missing header row");
  return series;
}

XcorrResult xcorr_stream(const MultichannelSeries& series, int segment_length) {
  const int n = series.n();
  if (n < 2) throw std::invalid_argument("cross-correlation needs at least 2 channels");
  if (segment_length < 2) throw std::invalid_argument("segment length must be >= 2");
  const std::size_t T = series.length();
  for (const auto& ch : series.channels) {
    if (ch.size() != T) throw std::invalid_argument("channels differ in length");
  }
  const auto L = static_cast<std::size_t>(segment_length);
  if (T < L) throw std::invalid_argument("series shorter than one segment");

  XcorrResult result;
  const std::size_t segments = T / L;
  Matrix centered(n, static_cast<Eigen::Index>(L));
  std::vector<double> norm(static_cast<std::size_t>(n));
  for (std::size_t s = 0; s < segments; ++s) {
    for (int i = 0; i < n; ++i) {
      const auto& ch = series.channels[static_cast<std::size_t>(i)];
      double mean = 0.0, peak = 0.0;
      for (std::size_t k = 0; k < L; ++k) {
        mean += ch[s * L + k];
        peak = std::max(peak, std::abs(ch[s * L + k]));
      }
      mean /= static_cast<double>(L);
      double ss = 0.0;
      for (std::size_t k = 0; k < L; ++k) {
        const double c = ch[s * L + k] - mean;
        centered(i, static_cast<Eigen::Index>(k)) = c;
        ss += c * c;
      }
      // Rounding in the mean leaves tiny residuals on constant channels.
      const double floor = 1e-12 * peak;
      norm[static_cast<std::size_t>(i)] =
          ss <= floor * floor * static_cast<double>(L) ? 0.0 : std::sqrt(ss);
      if (norm[static_cast<std::size_t>(i)] == 0.0) ++result.zero_variance_channels;
    }
    GraphSnapshot g;
    g.t = static_cast<std::int64_t>(s + 1);
    g.weights = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      const double ni = norm[static_cast<std::size_t>(i)];
      if (ni == 0.0) continue;
      g.weights(i, i) = 1.0;
      for (int j = i + 1; j < n; ++j) {
        const double nj = norm[static_cast<std::size_t>(j)];
        if (nj == 0.0) continue;
        const double r = centered.row(i).dot(centered.row(j)) / (ni * nj);
        g.weights(i, j) = g.weights(j, i) = std::clamp(r, -1.0, 1.0);
      }
    }
    result.stream.push_back(std::move(g));
  }
  return result;
}

}  // namespace scusum::io
