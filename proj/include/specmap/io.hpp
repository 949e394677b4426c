#pragma once

// File plumbing for the command-line tool: CSV matrices, whole-file reads
// and atomic writes.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "specmap/tensor.hpp"

namespace specmap {

/// A required input is missing or malformed.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary and renames it into place.
void write_file(const std::filesystem::path& path, std::string_view content);

/// One row per line, comma separated, shortest round-trip doubles.
std::string matrix_csv(const Matrix& m);
Matrix parse_matrix_csv(std::string_view text, const std::string& name);
Matrix load_matrix_csv(const std::filesystem::path& path);

Tensor3 load_tensor_file(const std::filesystem::path& path);

/// Concatenated single-slot tensor blocks, one N x F x 1 block per slot.
std::string slice_stream(const Tensor3& y);
std::vector<Matrix> parse_slice_stream(std::string_view text, const std::string& name);

/// Joins values with `sep`.
template <class Range, class Fmt>
std::string join(const Range& r, std::string_view sep, Fmt fmt) {
  std::string out;
  bool first = true;
  for (const auto& v : r) {
    if (!first) out += sep;
    out += fmt(v);
    first = false;
  }
  return out;
}

}  // namespace specmap
