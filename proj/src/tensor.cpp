#include "tcca/tensor.hpp"

#include <numeric>
#include <string>

#include "tcca/errors.hpp"

namespace tcca {

namespace {

Index checked_size(const std::vector<Index>& dims) {
  Index total = 1;
  for (Index d : dims) {
    if (d < 1) throw InputError("tensor dims must all be >= 1");
    total *= d;
  }
  return total;
}

void check_mode(const DenseTensor& x, Index mode) {
  if (mode < 0 || mode >= x.order())
    throw InputError("mode " + std::to_string(mode) + " out of range for order " +
                     std::to_string(x.order()) + " tensor");
}

// Strides for the first-index-fastest linearization.
std::vector<Index> strides_of(const std::vector<Index>& dims) {
  std::vector<Index> s(dims.size());
  Index acc = 1;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    s[k] = acc;
    acc *= dims[k];
  }
  return s;
}

// Advances a multi-index odometer-style, first position fastest.
bool advance(std::vector<Index>& idx, const std::vector<Index>& dims) {
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (++idx[k] < dims[k]) return true;
    idx[k] = 0;
  }
  return false;
}

}  // namespace

DenseTensor::DenseTensor(std::vector<Index> dims)
    : dims_(std::move(dims)), values_(static_cast<std::size_t>(checked_size(dims_)), 0.0) {}

DenseTensor::DenseTensor(std::vector<Index> dims, std::vector<double> values)
    : dims_(std::move(dims)), values_(std::move(values)) {
  if (checked_size(dims_) != static_cast<Index>(values_.size()))
    throw InputError("tensor data length does not match product of dims");
}

Index DenseTensor::dim(Index mode) const {
  check_mode(*this, mode);
  return dims_[static_cast<std::size_t>(mode)];
}

Index DenseTensor::linear_index(std::span<const Index> idx) const {
  if (static_cast<Index>(idx.size()) != order())
    throw InputError("multi-index length does not match tensor order");
  Index linear = 0;
  Index stride = 1;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] < 0 || idx[k] >= dims_[k]) throw InputError("tensor index out of range");
    linear += idx[k] * stride;
    stride *= dims_[k];
  }
  return linear;
}

DataTensor::DataTensor(DenseTensor body) : body_(std::move(body)) {
  if (body_.order() < 1) throw InputError("data tensor needs a sample mode");
}

DataTensor DataTensor::from_samples(const std::vector<DenseTensor>& samples) {
  if (samples.empty()) throw InputError("cannot build a data tensor from zero samples");
  const auto& sdims = samples.front().dims();
  const Index n = static_cast<Index>(samples.size());
  std::vector<Index> dims;
  dims.reserve(sdims.size() + 1);
  dims.push_back(n);
  dims.insert(dims.end(), sdims.begin(), sdims.end());
  DenseTensor body(dims);
  const Index per = samples.front().size();
  for (Index t = 0; t < n; ++t) {
    if (samples[static_cast<std::size_t>(t)].dims() != sdims)
      throw InputError("all samples must share the same dims");
    for (Index i = 0; i < per; ++i) body[t + n * i] = samples[static_cast<std::size_t>(t)][i];
  }
  return DataTensor(std::move(body));
}

std::vector<Index> DataTensor::sample_dims() const {
  return {body_.dims().begin() + 1, body_.dims().end()};
}

Index DataTensor::sample_size() const { return body_.size() / num_samples(); }

DenseTensor DataTensor::sample(Index t) const {
  const Index n = num_samples();
  if (t < 0 || t >= n) throw InputError("sample index out of range");
  DenseTensor out(sample_dims());
  const Index per = out.size();
  for (Index i = 0; i < per; ++i) out[i] = body_[t + n * i];
  return out;
}

Matrix DataTensor::stacked() const { return matricize(body_, 0); }

Matrix matricize(const DenseTensor& x, Index mode) {
  check_mode(x, mode);
  const auto& dims = x.dims();
  const Index rows = dims[static_cast<std::size_t>(mode)];
  const Index cols = x.size() / rows;
  Matrix out(rows, cols);
  // Column strides skip the unfolded mode; remaining modes keep their order,
  // earlier ones fastest.
  std::vector<Index> col_stride(dims.size(), 0);
  Index acc = 1;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (static_cast<Index>(k) == mode) continue;
    col_stride[k] = acc;
    acc *= dims[k];
  }
  std::vector<Index> idx(dims.size(), 0);
  Index linear = 0;
  do {
    Index col = 0;
    for (std::size_t k = 0; k < dims.size(); ++k) col += idx[k] * col_stride[k];
    out(idx[static_cast<std::size_t>(mode)], col) = x[linear];
    ++linear;
  } while (advance(idx, dims));
  return out;
}

DenseTensor fold(const Matrix& m, Index mode, std::vector<Index> dims) {
  DenseTensor out(std::move(dims));
  check_mode(out, mode);
  const auto& d = out.dims();
  if (m.rows() != d[static_cast<std::size_t>(mode)] || m.size() != out.size())
    throw InputError("matrix shape does not match fold target dims");
  std::vector<Index> col_stride(d.size(), 0);
  Index acc = 1;
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (static_cast<Index>(k) == mode) continue;
    col_stride[k] = acc;
    acc *= d[k];
  }
  std::vector<Index> idx(d.size(), 0);
  Index linear = 0;
  do {
    Index col = 0;
    for (std::size_t k = 0; k < d.size(); ++k) col += idx[k] * col_stride[k];
    out[linear] = m(idx[static_cast<std::size_t>(mode)], col);
    ++linear;
  } while (advance(idx, d));
  return out;
}

DenseTensor mode_product(const DenseTensor& x, Index mode, const Matrix& a) {
  check_mode(x, mode);
  if (a.cols() != x.dim(mode))
    throw InputError("mode_product: matrix has " + std::to_string(a.cols()) +
                     " columns, mode extent is " + std::to_string(x.dim(mode)));
  std::vector<Index> out_dims = x.dims();
  out_dims[static_cast<std::size_t>(mode)] = a.rows();
  return fold(a * matricize(x, mode), mode, std::move(out_dims));
}

Vector vectorize(const DenseTensor& x) {
  return Eigen::Map<const Vector>(x.values().data(), x.size());
}

DenseTensor unvectorize(const Vector& v, std::vector<Index> dims) {
  DenseTensor out(std::move(dims));
  if (out.size() != v.size()) throw InputError("unvectorize: length does not match dims");
  Eigen::Map<Vector>(out.values().data(), out.size()) = v;
  return out;
}

DenseTensor outer_product(const std::vector<Vector>& factors) {
  if (factors.empty()) throw InputError("outer_product needs at least one factor");
  std::vector<Index> dims;
  dims.reserve(factors.size());
  for (const auto& f : factors) {
    if (f.size() == 0) throw InputError("outer_product: empty factor");
    dims.push_back(f.size());
  }
  DenseTensor out(dims);
  std::vector<Index> idx(dims.size(), 0);
  Index linear = 0;
  do {
    double prod = 1.0;
    for (std::size_t k = 0; k < factors.size(); ++k) prod *= factors[k][idx[k]];
    out[linear++] = prod;
  } while (advance(idx, dims));
  return out;
}

Matrix kronecker(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

double inner_product(const DenseTensor& x, const DenseTensor& y) {
  if (x.dims() != y.dims()) throw InputError("inner_product: shape mismatch");
  return Eigen::Map<const Vector>(x.values().data(), x.size())
      .dot(Eigen::Map<const Vector>(y.values().data(), y.size()));
}

double frobenius_norm(const DenseTensor& x) {
  return Eigen::Map<const Vector>(x.values().data(), x.size()).norm();
}

}  // namespace tcca
