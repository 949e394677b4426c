#pragma once

// Dense third-order tensors and the multilinear primitives built on them.
//
// Storage is one contiguous buffer with the first index fastest:
//   offset(i, j, k) = i + d1 * (j + d2 * k)
// so every mode-1 fiber is contiguous and the mode-1 unfolding is the
// buffer itself viewed as a column-major d1 x (d2*d3) matrix.
//
// Unfoldings follow the usual CP convention: in the mode-n unfolding the
// remaining indices vary fastest-first in ascending mode order, i.e.
//   mode 1: column j + d2*k
//   mode 2: column i + d1*k
//   mode 3: column i + d1*j
// With this choice X_(1) = A (C kr B)^T, X_(2) = B (C kr A)^T and
// X_(3) = C (B kr A)^T, where kr is `khatri_rao`.

#include <Eigen/Dense>

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace specmap {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Dims {
  std::size_t d1 = 0;
  std::size_t d2 = 0;
  std::size_t d3 = 0;

  std::size_t size() const { return d1 * d2 * d3; }
  std::size_t operator[](int mode) const;  // mode in {1,2,3}
  friend bool operator==(const Dims&, const Dims&) = default;
};

class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(Dims dims);
  Tensor3(Dims dims, std::vector<double> data);

  const Dims& dims() const { return dims_; }
  std::size_t size() const { return data_.size(); }

  double operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[i + dims_.d1 * (j + dims_.d2 * k)];
  }
  double& operator()(std::size_t i, std::size_t j, std::size_t k) {
    return data_[i + dims_.d1 * (j + dims_.d2 * k)];
  }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  /// Frontal slice k as a d1 x d2 matrix.
  Matrix frontal_slice(std::size_t k) const;
  void set_frontal_slice(std::size_t k, const Eigen::Ref<const Matrix>& slice);

  friend bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  Dims dims_{};
  std::vector<double> data_;
};

/// CP factor matrices; X = sum_r a_r o b_r o c_r.
struct FactorSet {
  Matrix A;  // d1 x R
  Matrix B;  // d2 x R
  Matrix C;  // d3 x R

  Eigen::Index rank() const { return A.cols(); }
  Dims dims() const;
  /// Throws std::invalid_argument unless A, B, C share a column count.
  void validate() const;
};

Matrix unfold(const Tensor3& t, int mode);
Tensor3 fold(const Matrix& m, int mode, Dims dims);

/// Column-wise Kronecker product; row i*J + j of column r is A(i,r)*B(j,r).
Matrix khatri_rao(const Matrix& a, const Matrix& b);

/// X x_1 U: every mode-1 fiber multiplied by U.
Tensor3 mode1_product(const Tensor3& x, const Matrix& u);

Tensor3 cp_reconstruct(const FactorSet& f);

double frob_norm(const Tensor3& t);
double squared_frob_distance(const Tensor3& a, const Tensor3& b);

Tensor3 operator-(const Tensor3& a, const Tensor3& b);
Tensor3 operator+(const Tensor3& a, const Tensor3& b);

// Text format: header line "T3 d1 d2 d3", then one entry per line in
// storage order, printed in shortest round-trip decimal form.
void write_tensor(std::ostream& os, const Tensor3& t);
Tensor3 read_tensor(std::istream& is);
void save_tensor(const std::string& path, const Tensor3& t);
Tensor3 load_tensor(const std::string& path);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

}  // namespace specmap
