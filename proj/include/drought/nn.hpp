#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace drought::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

template <typename Derived>
auto sigmoid(const Eigen::MatrixBase<Derived>& z) {
  return (1.0 / (1.0 + (-z.array()).exp())).matrix();
}

template <typename Derived>
auto relu(const Eigen::MatrixBase<Derived>& z) {
  return z.array().max(typename Derived::Scalar(0)).matrix();
}

// Exact GELU: x * Phi(x).
inline double gelu_scalar(double x) {
  return 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2));
}

// d/dx GELU = Phi(x) + x * phi(x).
inline double gelu_grad_scalar(double x) {
  const double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
  return 0.5 * (1.0 + std::erf(x * M_SQRT1_2)) + x * phi;
}

template <typename Derived>
Matrix gelu(const Eigen::MatrixBase<Derived>& z) {
  return z.derived().unaryExpr([](double x) { return gelu_scalar(x); });
}

template <typename Derived>
Matrix gelu_grad(const Eigen::MatrixBase<Derived>& z) {
  return z.derived().unaryExpr([](double x) { return gelu_grad_scalar(x); });
}

// Row-wise softmax, numerically shifted by the row max.
template <typename Derived>
Matrix softmax_rows(const Eigen::MatrixBase<Derived>& s) {
  Matrix out(s.rows(), s.cols());
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    const double m = s.row(r).maxCoeff();
    Eigen::ArrayXd e = (s.row(r).array() - m).exp();
    out.row(r) = (e / e.sum()).matrix();
  }
  return out;
}

// Row-wise softmax Jacobian applied to upstream gradient:
// dS = A .* (dA - rowsum(dA .* A)).
inline Matrix softmax_rows_backward(const Matrix& a, const Matrix& da) {
  Matrix ds = da;
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    const double dot = a.row(r).dot(da.row(r));
    ds.row(r) = (a.row(r).array() * (da.row(r).array() - dot)).matrix();
  }
  return ds;
}

// Row-wise layer normalization with scale/shift.
struct LayerNormCache {
  Matrix xhat;      // normalized input
  Vector inv_std;   // 1/sqrt(var + eps) per row
};

inline constexpr double kLayerNormEps = 1e-5;

inline Matrix layer_norm(const Matrix& x, const RowVector& gamma, const RowVector& beta,
                         LayerNormCache& cache) {
  const auto d = static_cast<double>(x.cols());
  cache.xhat.resize(x.rows(), x.cols());
  cache.inv_std.resize(x.rows());
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mu = x.row(r).mean();
    const double var = (x.row(r).array() - mu).square().sum() / d;
    const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
    cache.inv_std(r) = inv;
    cache.xhat.row(r) = ((x.row(r).array() - mu) * inv).matrix();
    out.row(r) = (cache.xhat.row(r).array() * gamma.array() + beta.array()).matrix();
  }
  return out;
}

// Returns dx; accumulates dgamma/dbeta.
inline Matrix layer_norm_backward(const Matrix& dy, const LayerNormCache& cache,
                                  const RowVector& gamma, RowVector& dgamma,
                                  RowVector& dbeta) {
  using RowArray = Eigen::Array<double, 1, Eigen::Dynamic>;
  Matrix dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const RowArray xhat = cache.xhat.row(r).array();
    const RowArray dxhat = dy.row(r).array() * gamma.array();
    const double mean_dxhat = dxhat.mean();
    const double mean_dxhat_xhat = (dxhat * xhat).mean();
    dx.row(r) =
        (cache.inv_std(r) * (dxhat - mean_dxhat - xhat * mean_dxhat_xhat)).matrix();
    dgamma.array() += dy.row(r).array() * xhat;
    dbeta.array() += dy.row(r).array();
  }
  return dx;
}

}  // namespace drought::nn
