#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace geneft {

/// Raised when a computation produces NaN or infinity.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// SplitMix64 finalizer. Used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x);

/// Seed for a sub-computation identified by a path of indices below `base`.
/// A pure function of its arguments, so a cell re-run in isolation sees the
/// same stream as it does inside a full sweep.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path);

/// Runs `body(i)` for i in [0, count) on up to `workers` threads. Exceptions
/// thrown by the body are rethrown on the calling thread (first one wins).
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& body);

/// Number of workers to use when the caller passes 0.
std::size_t default_workers();

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);

/// Minimal CSV line writer. Fields are written verbatim; callers keep them
/// free of commas.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void header(std::initializer_list<std::string_view> columns);
  CsvWriter& field(std::string_view text);
  CsvWriter& field(double value);
  CsvWriter& field(std::int64_t value);
  CsvWriter& field(std::size_t value) { return field(static_cast<std::int64_t>(value)); }
  CsvWriter& field(int value) { return field(static_cast<std::int64_t>(value)); }
  void end_row();

 private:
  std::ostream& out_;
  bool first_ = true;
};

/// Splits on `sep`, trimming whitespace around each piece. Empty input yields
/// an empty vector.
std::vector<std::string> split_trimmed(std::string_view text, char sep);
std::string trim(std::string_view text);

/// Log-spaced grid of `count` points from `lo` to `hi` inclusive.
std::vector<double> log_grid(double lo, double hi, std::size_t count);

}  // namespace geneft
