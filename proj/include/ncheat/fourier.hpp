#pragma once

#include <complex>
#include <vector>

#include "ncheat/group.hpp"

namespace ncheat {

using cplx = std::complex<double>;

// Normalized T-valued 2-cocycle. Either trivial, or the bicharacter
// sigma(m, m') = exp(i m^T Theta m') on FreeAbelian(n) with Theta skew
// modulo 2 pi.
class Cocycle {
 public:
  static Cocycle trivial(const GroupDescriptor& g);
  // theta given row-major, n x n; entries in [0, 2 pi)
  static Cocycle theta(const GroupDescriptor& g, std::vector<double> theta);

  const GroupDescriptor& group() const { return group_; }
  bool is_trivial() const { return trivial_; }
  const std::vector<double>& theta_matrix() const { return theta_; }
  std::string name() const;

  cplx eval(const GroupElement& a, const GroupElement& b) const;
  cplx eval_span(std::span<const std::int32_t> a, std::span<const std::int32_t> b) const;
  // phase exponent m^T Theta m' (0 when trivial); exact for integer inputs
  double phase(const GroupElement& a, const GroupElement& b) const;

  friend bool operator==(const Cocycle& a, const Cocycle& b);

 private:
  GroupDescriptor group_;
  bool trivial_ = true;
  std::vector<double> theta_;
};

// Finitely supported Fourier coefficient map, i.e. the element
// sum_g coeff(g) Lambda_sigma(g) of the twisted group algebra. Terms are kept
// sorted by normal form and exact zeros are pruned.
class FourierElement {
 public:
  FourierElement(GroupDescriptor g, Cocycle sigma);
  static FourierElement zero(const GroupDescriptor& g, const Cocycle& sigma);
  static FourierElement lambda(const GroupDescriptor& g, const Cocycle& sigma,
                               const GroupElement& e, cplx c = 1.0);
  static FourierElement from_terms(const GroupDescriptor& g, const Cocycle& sigma,
                                   std::vector<std::pair<GroupElement, cplx>> terms);

  const GroupDescriptor& group() const { return group_; }
  const Cocycle& cocycle() const { return cocycle_; }
  const std::vector<std::pair<GroupElement, cplx>>& terms() const { return terms_; }
  std::size_t support_size() const { return terms_.size(); }
  cplx coeff(const GroupElement& e) const;

  FourierElement& add_term(const GroupElement& e, cplx c);  // accumulate, then normalize()
  void normalize();                                         // sort, merge, prune zeros

  bool real_coefficients() const;

 private:
  GroupDescriptor group_;
  Cocycle cocycle_;
  std::vector<std::pair<GroupElement, cplx>> terms_;
  bool dirty_ = false;
};

FourierElement multiply_elements(const FourierElement& x, const FourierElement& y);
FourierElement adjoint(const FourierElement& x);
FourierElement add(const FourierElement& x, const FourierElement& y);
FourierElement scale(const FourierElement& x, cplx c);

cplx trace_tau(const FourierElement& x);
double l1_norm(const FourierElement& x);
double l2_norm(const FourierElement& x);

// max |sigma(g,h) sigma(gh,k) - sigma(g,hk) sigma(h,k)| over random triples
double cocycle_identity_residual(const Cocycle& sigma, int trials, std::uint64_t seed,
                                 int ball_radius = 3);

}  // namespace ncheat
