#pragma once

#include <functional>
#include <memory>
#include <span>

#include "ncheat/fourier.hpp"

namespace ncheat {

// Ball-truncated convolution action of a FourierElement, exposed as mat-vecs
// over ball index maps. Two shapes are used:
//   compression(y, B)        P_B Lambda(y) P_B : span(B) -> span(B)
//   map(x, B, C)             Lambda(x)|span(B) : span(B) -> span(C), where C
//                            contains supp(x) * B so nothing is truncated
// Mat-vecs are gathers over precomputed index stencils; no dense matrix is
// formed (dense assembly below is kept as a cross-check oracle).
class BallOperator {
 public:
  static BallOperator compression(const FourierElement& y, std::shared_ptr<const Ball> ball);
  static BallOperator map(const FourierElement& x, std::shared_ptr<const Ball> domain,
                          std::shared_ptr<const Ball> codomain);

  std::size_t domain_size() const { return domain_->size(); }
  std::size_t codomain_size() const { return codomain_->size(); }
  const Ball& domain() const { return *domain_; }
  const Ball& codomain() const { return *codomain_; }
  std::size_t term_count() const { return terms_.size(); }

  // trivial phases and real coefficients: mat-vec preserves real vectors
  bool real_only() const { return real_only_; }

  void apply(std::span<const cplx> in, std::span<cplx> out) const;
  void apply_adjoint(std::span<const cplx> in, std::span<cplx> out) const;
  void apply_real(std::span<const double> in, std::span<double> out) const;
  void apply_adjoint_real(std::span<const double> in, std::span<double> out) const;

  // same mat-vecs with the stored coefficients replaced by per-term weights;
  // lets one stencil set serve a whole family of elements on a fixed support
  void apply_weighted(std::span<const cplx> weights, std::span<const cplx> in,
                      std::span<cplx> out) const;
  void apply_adjoint_weighted(std::span<const cplx> weights, std::span<const cplx> in,
                              std::span<cplx> out) const;

  // <eta, Lambda(g_k) xi> for the k-th support element; used by the content ascent
  cplx term_pairing(std::size_t k, std::span<const cplx> domain_vec,
                    std::span<const cplx> codomain_vec) const;
  const GroupElement& term_element(std::size_t k) const { return terms_[k].w; }

 private:
  struct Term {
    GroupElement w;
    cplx coeff;
    std::vector<std::uint32_t> fwd;  // domain j -> index of w u_j in codomain (or kNoIndex)
    std::vector<std::uint32_t> inv;  // codomain i -> index of w^-1 u_i in domain
    std::vector<cplx> fwd_phase;     // sigma(w, u_j); empty when trivial
    std::vector<cplx> inv_phase;     // sigma(w, w^-1 u_i); empty when trivial
  };

  void build_terms(const FourierElement& x, bool need_fwd, bool need_inv);

  std::shared_ptr<const Ball> domain_, codomain_;
  std::vector<Term> terms_;
  bool real_only_ = false;
};

// dense matrix of P_B Lambda(x) P_B, column-major ball indexing; small balls only
std::vector<cplx> dense_truncated_matrix(const FourierElement& x, const Ball& ball);

struct NormEstimate {
  double nu = 0.0;      // certified lower bound sqrt(lambda)
  double lambda = 0.0;  // Rayleigh estimate of the top eigenvalue of A*A
  double l1_upper = 0.0;
  int radius = 0;
  int iterations = 0;
  bool converged = false;
  std::uint64_t seed = 0;
};

// Lower bound for the operator norm: power iteration on A*A with
// A = Lambda_sigma(x) restricted to span(B_R). The estimate never exceeds the
// true norm (up to rounding) and is nondecreasing in R; l1_norm(x) is the
// matching upper bound. Non-convergence is reported, never silent.
// Prebuilt balls may be supplied to share across calls; the codomain only
// needs radius >= R + support radius and may be larger.
NormEstimate norm_estimate(const FourierElement& x, int R, std::uint64_t seed,
                           double tol = 1e-10, int max_iters = 10000,
                           std::size_t cap = kDefaultBallCap,
                           std::shared_ptr<const Ball> domain = nullptr,
                           std::shared_ptr<const Ball> codomain = nullptr);

// norm_estimate of the restriction of x to {g : keep(g)}
NormEstimate partial_sum_norm(const FourierElement& x,
                              const std::function<bool(const GroupElement&)>& keep, int R,
                              std::uint64_t seed, double tol = 1e-10, int max_iters = 10000,
                              std::size_t cap = kDefaultBallCap,
                              std::shared_ptr<const Ball> domain = nullptr,
                              std::shared_ptr<const Ball> codomain = nullptr);

// max |g|_S over the support (BFS word length; grows a ball for Heisenberg3)
int support_radius(const FourierElement& x);

}  // namespace ncheat
