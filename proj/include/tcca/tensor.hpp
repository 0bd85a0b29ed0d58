#pragma once

#include <span>
#include <vector>

#include "tcca/types.hpp"

namespace tcca {

/// Dense m-mode tensor with 64-bit real entries.
///
/// Entries are linearized with the FIRST index fastest (the column-major
/// generalization); this is the only supported order. Under it,
/// vectorize(outer_product(U1, ..., Um)) == kronecker(Um, ..., U1).
/// Modes are 0-based throughout the API.
class DenseTensor {
 public:
  DenseTensor() = default;
  explicit DenseTensor(std::vector<Index> dims);
  DenseTensor(std::vector<Index> dims, std::vector<double> values);

  Index order() const { return static_cast<Index>(dims_.size()); }
  const std::vector<Index>& dims() const { return dims_; }
  Index dim(Index mode) const;
  Index size() const { return static_cast<Index>(values_.size()); }

  double operator[](Index linear) const { return values_[linear]; }
  double& operator[](Index linear) { return values_[linear]; }

  double at(std::span<const Index> idx) const { return values_[linear_index(idx)]; }
  double& at(std::span<const Index> idx) { return values_[linear_index(idx)]; }
  double at(std::initializer_list<Index> idx) const {
    return at(std::span<const Index>(idx.begin(), idx.size()));
  }

  Index linear_index(std::span<const Index> idx) const;

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  bool operator==(const DenseTensor&) const = default;

 private:
  std::vector<Index> dims_;
  std::vector<double> values_;
};

/// Sample-stacked tensor: mode 0 indexes samples, each sample has
/// dims (d_1, ..., d_m).
class DataTensor {
 public:
  explicit DataTensor(DenseTensor body);
  static DataTensor from_samples(const std::vector<DenseTensor>& samples);

  Index num_samples() const { return body_.dim(0); }
  std::vector<Index> sample_dims() const;
  Index sample_order() const { return body_.order() - 1; }
  Index sample_size() const;

  DenseTensor sample(Index t) const;

  /// n x (d_1*...*d_m) matrix whose row t is vectorize(sample(t)).
  Matrix stacked() const;

  const DenseTensor& body() const { return body_; }

 private:
  DenseTensor body_;
};

/// Mode-a unfolding: fibers along `mode` become columns. The column holding
/// multi-index (i_1,...,i_m) is sum_{k != a} i_k * prod_{q<k, q != a} d_q.
Matrix matricize(const DenseTensor& x, Index mode);

/// Inverse of matricize for the given mode and target dims. Exact round trip.
DenseTensor fold(const Matrix& m, Index mode, std::vector<Index> dims);

/// Contraction of mode `mode` with the rows of `a` (a has d_mode columns);
/// matricize(mode_product(x, a), mode) == a * matricize(x, mode).
DenseTensor mode_product(const DenseTensor& x, Index mode, const Matrix& a);

Vector vectorize(const DenseTensor& x);
DenseTensor unvectorize(const Vector& v, std::vector<Index> dims);

DenseTensor outer_product(const std::vector<Vector>& factors);

Matrix kronecker(const Matrix& a, const Matrix& b);

double inner_product(const DenseTensor& x, const DenseTensor& y);
double frobenius_norm(const DenseTensor& x);

}  // namespace tcca
