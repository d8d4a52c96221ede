#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace specdist::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitDomain = 3;

inline constexpr const char *kLibraryVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

/// Malformed or unreadable input.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Samples read from CSV as a p x n matrix (rows of the file are columns).
using SampleMatrix = std::variant<Eigen::MatrixXd, Eigen::MatrixXcd>;

SampleMatrix parse_samples(std::istream &in, const std::string &label = "input");
SampleMatrix read_samples(const std::string &path);

/// Shortest text that reads back to the same double.
std::string format_double(double v);

/// Runs one command line; output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace specdist::cli
