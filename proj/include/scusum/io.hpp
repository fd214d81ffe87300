#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "scusum/detect.hpp"
#include "scusum/graph_model.hpp"
#include "scusum/montecarlo.hpp"

namespace scusum::io {

/// Malformed input, with the 1-based line it was found on.
class FormatError : public std::runtime_error {
 public:
  FormatError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// NDJSON, one snapshot per line. Symmetric snapshots are written as
//   {"t": 1, "n": 3, "tri": [upper triangle incl. diagonal, row-major]}
// and iid-full ones as {"t": 1, "n": 3, "full": [n^2 entries, row-major]}.
// Doubles use the shortest round-trip representation.
void write_stream(std::span<const GraphSnapshot> stream, std::ostream& out);
void write_stream(std::span<const GraphSnapshot> stream,
                  const std::filesystem::path& path);

// Blank lines are skipped; an empty file is an empty stream.
std::vector<GraphSnapshot> read_stream(std::istream& in);
std::vector<GraphSnapshot> read_stream(const std::filesystem::path& path);

// "t,statistic,alarmed", one row per scored step; t is the scored index.
void write_trace_csv(std::span<const TracePoint> trajectory, std::ostream& out);

// "gamma,b,edd,se".
void write_oc_csv(std::span<const OcRow> rows, std::ostream& out);

struct MultichannelSeries {
  std::vector<std::string> names;
  std::vector<std::vector<double>> channels;  // channels[i][tick]

  int n() const { return static_cast<int>(channels.size()); }
  std::size_t length() const { return channels.empty() ? 0 : channels.front().size(); }
};

// Header row of channel names, then one comma-separated row per tick.
MultichannelSeries read_sensor_csv(std::istream& in);

struct XcorrResult {
  std::vector<GraphSnapshot> stream;
  std::size_t zero_variance_channels = 0;  // (segment, channel) pairs
};

/// Pearson correlation graph of each non-overlapping segment of
/// `segment_length` ticks; a trailing partial segment is dropped. A channel
/// with zero variance in a segment gets 0 on its whole row and column,
/// diagonal included, and is counted in zero_variance_channels.
XcorrResult xcorr_stream(const MultichannelSeries& series, int segment_length);

}  // namespace scusum::io
