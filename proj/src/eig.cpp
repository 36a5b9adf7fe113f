#include "ncheat/eig.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ncheat {

std::vector<double> jacobi_eigenvalues(std::vector<double> a, std::size_t n,
                                       std::vector<std::vector<double>>* vectors) {
  if (a.size() != n * n) throw std::invalid_argument("jacobi: matrix size mismatch");
  if (n > 1024) throw std::invalid_argument("jacobi: matrix too large (n > 1024)");
  std::vector<double> v;
  if (vectors) {
    v.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  }
  if (n == 0) return {};

  double scale = 0.0;
  for (std::size_t i = 0; i < n * n; ++i) scale = std::max(scale, std::abs(a[i]));
  const double stop = std::max(scale, 1.0) * 1e-15;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off = std::max(off, std::abs(a[p * n + q]));
    if (off <= stop * 1e-2) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double apq = a[p * n + q];
        if (std::abs(apq) <= stop * 1e-6) continue;
        double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          double akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double apk = a[p * n + k], aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        if (vectors) {
          for (std::size_t k = 0; k < n; ++k) {
            double vpk = v[p * n + k], vqk = v[q * n + k];
            v[p * n + k] = c * vpk - s * vqk;
            v[q * n + k] = s * vpk + c * vqk;
          }
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return a[i * n + i] < a[j * n + j]; });
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = a[order[i] * n + order[i]];
  if (vectors) {
    vectors->assign(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) (*vectors)[i][k] = v[order[i] * n + k];
  }
  return values;
}

EigenPair symmetric_lambda_max(const std::vector<double>& a, std::size_t n) {
  std::vector<std::vector<double>> vecs;
  auto vals = jacobi_eigenvalues(a, n, &vecs);
  EigenPair out;
  out.value = vals.back();
  out.vector = vecs.back();
  return out;
}

EigenPair symmetric_lambda_min(const std::vector<double>& a, std::size_t n) {
  std::vector<std::vector<double>> vecs;
  auto vals = jacobi_eigenvalues(a, n, &vecs);
  EigenPair out;
  out.value = vals.front();
  out.vector = vecs.front();
  return out;
}

static std::vector<double> embed_hermitian(const std::vector<std::complex<double>>& h,
                                           std::size_t n) {
  std::vector<double> m(4 * n * n, 0.0);
  const std::size_t N = 2 * n;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double re = h[i * n + j].real(), im = h[i * n + j].imag();
      m[i * N + j] = re;
      m[(i + n) * N + (j + n)] = re;
      m[i * N + (j + n)] = -im;
      m[(i + n) * N + j] = im;
    }
  }
  return m;
}

double hermitian_lambda_min(const std::vector<std::complex<double>>& h, std::size_t n) {
  auto vals = jacobi_eigenvalues(embed_hermitian(h, n), 2 * n);
  return vals.front();
}

double hermitian_lambda_max(const std::vector<std::complex<double>>& h, std::size_t n) {
  auto vals = jacobi_eigenvalues(embed_hermitian(h, n), 2 * n);
  return vals.back();
}

}  // namespace ncheat
