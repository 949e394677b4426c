#include "specmap/tensor.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "specmap/kernels.hpp"

namespace specmap {
namespace {

void check_mode(int mode) {
  if (mode < 1 || mode > 3) {
    throw std::invalid_argument("tensor mode must be 1, 2 or 3, got " + std::to_string(mode));
  }
}

void check_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + ": non-finite entry");
  }
}

}  // namespace

std::size_t Dims::operator[](int mode) const {
  check_mode(mode);
  return mode == 1 ? d1 : (mode == 2 ? d2 : d3);
}

Tensor3::Tensor3(Dims dims) : dims_(dims), data_(dims.size(), 0.0) {}

Tensor3::Tensor3(Dims dims, std::vector<double> data) : dims_(dims), data_(std::move(data)) {
  if (data_.size() != dims_.size()) {
    throw std::invalid_argument("tensor data length does not match dimensions");
  }
  check_finite(data_, "tensor");
}

Matrix Tensor3::frontal_slice(std::size_t k) const {
  if (k >= dims_.d3) throw std::out_of_range("frontal slice index out of range");
  const auto n = static_cast<Eigen::Index>(dims_.d1 * dims_.d2);
  return Eigen::Map<const Matrix>(data_.data() + n * static_cast<Eigen::Index>(k),
                                  static_cast<Eigen::Index>(dims_.d1),
                                  static_cast<Eigen::Index>(dims_.d2));
}

void Tensor3::set_frontal_slice(std::size_t k, const Eigen::Ref<const Matrix>& slice) {
  if (k >= dims_.d3) throw std::out_of_range("frontal slice index out of range");
  if (static_cast<std::size_t>(slice.rows()) != dims_.d1 ||
      static_cast<std::size_t>(slice.cols()) != dims_.d2) {
    throw std::invalid_argument("frontal slice shape mismatch");
  }
  const auto n = static_cast<Eigen::Index>(dims_.d1 * dims_.d2);
  Eigen::Map<Matrix>(data_.data() + n * static_cast<Eigen::Index>(k), slice.rows(), slice.cols()) =
      slice;
}

Dims FactorSet::dims() const {
  return {static_cast<std::size_t>(A.rows()), static_cast<std::size_t>(B.rows()),
          static_cast<std::size_t>(C.rows())};
}

void FactorSet::validate() const {
  if (A.cols() != B.cols() || A.cols() != C.cols()) {
    throw std::invalid_argument("factor matrices must have equal column counts");
  }
}

Matrix unfold(const Tensor3& t, int mode) {
  check_mode(mode);
  const auto [d1, d2, d3] = t.dims();
  switch (mode) {
    case 1:
      return Eigen::Map<const Matrix>(t.data().data(), static_cast<Eigen::Index>(d1),
                                      static_cast<Eigen::Index>(d2 * d3));
    case 2: {
      Matrix m(static_cast<Eigen::Index>(d2), static_cast<Eigen::Index>(d1 * d3));
      for (std::size_t k = 0; k < d3; ++k)
        for (std::size_t j = 0; j < d2; ++j)
          for (std::size_t i = 0; i < d1; ++i)
            m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i + d1 * k)) = t(i, j, k);
      return m;
    }
    default: {
      Matrix m(static_cast<Eigen::Index>(d3), static_cast<Eigen::Index>(d1 * d2));
      for (std::size_t k = 0; k < d3; ++k)
        for (std::size_t j = 0; j < d2; ++j)
          for (std::size_t i = 0; i < d1; ++i)
            m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i + d1 * j)) = t(i, j, k);
      return m;
    }
  }
}

Tensor3 fold(const Matrix& m, int mode, Dims dims) {
  check_mode(mode);
  const auto [d1, d2, d3] = dims;
  const std::size_t rows = dims[mode];
  if (static_cast<std::size_t>(m.rows()) != rows ||
      static_cast<std::size_t>(m.rows() * m.cols()) != dims.size()) {
    throw std::invalid_argument("fold: matrix shape inconsistent with dims and mode");
  }
  Tensor3 t(dims);
  switch (mode) {
    case 1:
      std::copy(m.data(), m.data() + m.size(), t.data().begin());
      break;
    case 2:
      for (std::size_t k = 0; k < d3; ++k)
        for (std::size_t j = 0; j < d2; ++j)
          for (std::size_t i = 0; i < d1; ++i)
            t(i, j, k) = m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i + d1 * k));
      break;
    default:
      for (std::size_t k = 0; k < d3; ++k)
        for (std::size_t j = 0; j < d2; ++j)
          for (std::size_t i = 0; i < d1; ++i)
            t(i, j, k) = m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i + d1 * j));
      break;
  }
  check_finite(t.data(), "fold");
  return t;
}

Matrix khatri_rao(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw std::invalid_argument("khatri_rao: column counts differ");
  }
  const Eigen::Index rows_b = b.rows();
  Matrix out(a.rows() * rows_b, a.cols());
  for (Eigen::Index r = 0; r < a.cols(); ++r) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      out.col(r).segment(i * rows_b, rows_b) = a(i, r) * b.col(r);
    }
  }
  return out;
}

Tensor3 mode1_product(const Tensor3& x, const Matrix& u) {
  const auto [d1, d2, d3] = x.dims();
  if (static_cast<std::size_t>(u.cols()) != d1) {
    throw std::invalid_argument("mode1_product: U column count must equal tensor d1");
  }
  const auto rows = static_cast<std::size_t>(u.rows());
  Tensor3 out({rows, d2, d3});
  const auto& k = kernels::active();
  const double* in = x.data().data();
  double* dst = out.data().data();
  for (std::size_t col = 0; col < d2 * d3; ++col) {
    const double* fiber = in + col * d1;
    double* target = dst + col * rows;
    for (std::size_t p = 0; p < d1; ++p) {
      if (fiber[p] != 0.0) k.axpy(fiber[p], u.col(static_cast<Eigen::Index>(p)).data(), target, rows);
    }
  }
  return out;
}

Tensor3 cp_reconstruct(const FactorSet& f) {
  f.validate();
  const Dims dims = f.dims();
  Tensor3 out(dims);
  const auto& k = kernels::active();
  double* dst = out.data().data();
  const auto rank = f.rank();
  for (std::size_t t = 0; t < dims.d3; ++t) {
    for (std::size_t j = 0; j < dims.d2; ++j) {
      double* fiber = dst + dims.d1 * (j + dims.d2 * t);
      for (Eigen::Index r = 0; r < rank; ++r) {
        const double w = f.B(static_cast<Eigen::Index>(j), r) * f.C(static_cast<Eigen::Index>(t), r);
        if (w != 0.0) k.axpy(w, f.A.col(r).data(), fiber, dims.d1);
      }
    }
  }
  return out;
}

double frob_norm(const Tensor3& t) { return std::sqrt(kernels::sum_squares(t.data())); }

double squared_frob_distance(const Tensor3& a, const Tensor3& b) {
  if (!(a.dims() == b.dims())) throw std::invalid_argument("tensor shape mismatch");
  return kernels::squared_distance(a.data(), b.data());
}

Tensor3 operator-(const Tensor3& a, const Tensor3& b) {
  if (!(a.dims() == b.dims())) throw std::invalid_argument("tensor shape mismatch");
  Tensor3 out = a;
  kernels::axpy(-1.0, b.data(), out.data());
  return out;
}

Tensor3 operator+(const Tensor3& a, const Tensor3& b) {
  if (!(a.dims() == b.dims())) throw std::invalid_argument("tensor shape mismatch");
  Tensor3 out = a;
  kernels::axpy(1.0, b.data(), out.data());
  return out;
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

void write_tensor(std::ostream& os, const Tensor3& t) {
  const auto [d1, d2, d3] = t.dims();
  os << "T3 " << d1 << ' ' << d2 << ' ' << d3 << '\n';
  for (double v : t.data()) os << format_double(v) << '\n';
}

Tensor3 read_tensor(std::istream& is) {
  std::string tag;
  Dims dims;
  if (!(is >> tag >> dims.d1 >> dims.d2 >> dims.d3) || tag != "T3") {
    throw std::runtime_error("tensor text: expected header 'T3 d1 d2 d3'");
  }
  std::vector<double> data(dims.size());
  std::string token;
  for (std::size_t n = 0; n < data.size(); ++n) {
    if (!(is >> token)) throw std::runtime_error("tensor text: truncated data");
    const auto res = std::from_chars(token.data(), token.data() + token.size(), data[n]);
    if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
      throw std::runtime_error("tensor text: bad number '" + token + "'");
    }
  }
  return Tensor3(dims, std::move(data));
}

void save_tensor(const std::string& path, const Tensor3& t) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  write_tensor(os, t);
}

Tensor3 load_tensor(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  return read_tensor(is);
}

}  // namespace specmap
