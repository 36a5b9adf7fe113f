#pragma once

#include <complex>
#include <vector>

namespace ncheat {

// Dense symmetric eigensolves via cyclic Jacobi. Intended for the small
// matrices that arise from finite samples (n <= 512 by contract); all
// certification paths in this project go through these routines so results
// are reproducible without external linear algebra dependencies.

struct EigenPair {
  double value = 0.0;
  std::vector<double> vector;
};

// Eigenvalues (ascending) of a symmetric matrix given row-major.
// If `vectors` is non-null it receives the matching eigenvectors as rows.
std::vector<double> jacobi_eigenvalues(std::vector<double> a, std::size_t n,
                                       std::vector<std::vector<double>>* vectors = nullptr);

EigenPair symmetric_lambda_max(const std::vector<double>& a, std::size_t n);
EigenPair symmetric_lambda_min(const std::vector<double>& a, std::size_t n);

// Extreme eigenvalues of a Hermitian matrix, via the standard real 2n x 2n
// embedding [[Re, -Im], [Im, Re]] (its spectrum is that of H, doubled).
double hermitian_lambda_min(const std::vector<std::complex<double>>& h, std::size_t n);
double hermitian_lambda_max(const std::vector<std::complex<double>>& h, std::size_t n);

}  // namespace ncheat
