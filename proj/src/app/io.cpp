#include "specmap/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace specmap {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string matrix_csv(const Matrix& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

Matrix parse_matrix_csv(std::string_view text, const std::string& name) {
  std::vector<std::vector<double>> rows;
  std::size_t pos = 0;
  int line = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view row = text.substr(pos, end - pos);
    pos = end + 1;
    ++line;
    if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
    if (row.empty()) continue;
    std::vector<double> vals;
    std::size_t p = 0;
    while (p <= row.size()) {
      std::size_t q = row.find(',', p);
      if (q == std::string_view::npos) q = row.size();
      std::string_view cell = row.substr(p, q - p);
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || res.ec != std::errc{} || res.ptr != cell.data() + cell.size()) {
        throw InputError(name + ":" + std::to_string(line) + ": bad number '" + std::string(cell) + "'");
      }
      vals.push_back(v);
      p = q + 1;
    }
    if (!rows.empty() && vals.size() != rows.front().size()) {
      throw InputError(name + ":" + std::to_string(line) + ": ragged row");
    }
    rows.push_back(std::move(vals));
  }
  Matrix m(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

Matrix load_matrix_csv(const std::filesystem::path& path) {
  return parse_matrix_csv(read_file(path), path.filename().string());
}

Tensor3 load_tensor_file(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  try {
    return read_tensor(in);
  } catch (const std::exception& e) {
    throw InputError(path.filename().string() + ": " + e.what());
  }
}

std::string slice_stream(const Tensor3& y) {
  std::ostringstream out;
  const Dims d = y.dims();
  for (std::size_t t = 0; t < d.d3; ++t) {
    const Matrix s = y.frontal_slice(t);
    Tensor3 block({d.d1, d.d2, 1});
    block.set_frontal_slice(0, s);
    write_tensor(out, block);
  }
  return out.str();
}

std::vector<Matrix> parse_slice_stream(std::string_view text, const std::string& name) {
  std::istringstream in{std::string(text)};
  std::vector<Matrix> out;
  for (;;) {
    in >> std::ws;
    if (in.eof()) break;
    Tensor3 block;
    try {
      block = read_tensor(in);
    } catch (const std::exception& e) {
      throw InputError(name + ": slice " + std::to_string(out.size() + 1) + ": " + e.what());
    }
    const Dims d = block.dims();
    for (std::size_t k = 0; k < d.d3; ++k) {
      if (!out.empty() && (static_cast<std::size_t>(out.front().rows()) != d.d1 ||
                           static_cast<std::size_t>(out.front().cols()) != d.d2)) {
        throw InputError(name + ": slice " + std::to_string(out.size() + 1) + " changes shape");
      }
      out.push_back(block.frontal_slice(k));
    }
  }
  return out;
}

}  // namespace specmap
