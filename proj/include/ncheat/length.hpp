#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ncheat/group.hpp"

namespace ncheat {

enum class LengthKind {
  Word,       // word length w.r.t. the canonical generators
  L1,         // FreeAbelian
  L2,         // FreeAbelian
  L2Squared,  // FreeAbelian
  Block,      // syllable count (free products, free groups)
  Log,        // log(1 + word length)
  Pullback,   // inner length of one projected coordinate
  PowerLaw,   // (word length)^alpha; deliberate non-examples for alpha > 1
  Indicator,  // 1 off the identity; bounded negative control
  Sqrt,       // pointwise square root of an inner spec
};

// An evaluable candidate for a normalized negative definite function.
// Construction verifies d(e) = 0, symmetry d(g^-1) = d(g) and finiteness on a
// small deterministic probe sample.
class LengthSpec {
 public:
  static LengthSpec word(const GroupDescriptor& g);
  static LengthSpec l1(const GroupDescriptor& g);
  static LengthSpec l2(const GroupDescriptor& g);
  static LengthSpec l2_squared(const GroupDescriptor& g);
  static LengthSpec block(const GroupDescriptor& g);
  static LengthSpec log_length(const GroupDescriptor& g);
  static LengthSpec pullback(LengthSpec inner, int coordinate, const GroupDescriptor& g);
  static LengthSpec power_law(const GroupDescriptor& g, double alpha);
  static LengthSpec indicator(const GroupDescriptor& g);

  LengthKind kind() const { return kind_; }
  const GroupDescriptor& group() const { return group_; }
  double alpha() const { return alpha_; }
  std::string name() const;

  double evaluate(const GroupElement& g) const;

  friend LengthSpec sqrt_transform(const LengthSpec& d);

 private:
  LengthSpec(LengthKind k, GroupDescriptor g);
  void validate_probe() const;
  double word_length(const GroupElement& g) const;

  LengthKind kind_;
  GroupDescriptor group_;
  std::shared_ptr<const Group> grp_;
  double alpha_ = 1.0;
  int coordinate_ = 0;
  std::shared_ptr<const LengthSpec> inner_;
  // operational word length for Heisenberg3 (BFS depth), grown on demand
  struct BfsCache;
  std::shared_ptr<BfsCache> bfs_;
};

// pointwise square root; preserves membership in the negative definite cone
LengthSpec sqrt_transform(const LengthSpec& d);

double evaluate(const LengthSpec& d, const GroupElement& g);

struct GramWitness {
  bool pass = false;
  double lambda_max = 0.0;
  std::vector<double> eigenvector;  // extremal direction in the mean-zero subspace
  std::size_t sample_size = 0;
};

// Mean-zero projected Gram test of negative definiteness on a finite sample:
// builds D_ij = d(g_i^-1 g_j), projects by P = I - J/n and passes iff
// lambda_max(PDP) <= tol. The extremal pair is always reported.
GramWitness gram_nd_check(const LengthSpec& d, const std::vector<GroupElement>& sample,
                          double tol);

// Same test against an arbitrary kernel; rejects kernels that are not
// symmetric on the sample before any eigensolve.
GramWitness gram_nd_check_kernel(const Group& g,
                                 const std::function<double(const GroupElement&)>& d,
                                 const std::vector<GroupElement>& sample, double tol);

struct SchoenbergRow {
  double t = 0.0;
  double lambda_min = 0.0;
  bool pass = false;
};

// Positive definiteness of e^{-t d} on the sample, for each t in the grid.
std::vector<SchoenbergRow> schoenberg_psd_check(const LengthSpec& d,
                                                const std::vector<GroupElement>& sample,
                                                const std::vector<double>& t_grid, double tol);

struct PoincareEstimate {
  double lower = 0.0;
  double upper = 0.0;
  bool infinite = false;           // no convergent-looking s found
  bool degenerate = false;         // d vanishes on the whole ball
  bool insufficient_data = false;  // r_max too small for the tail detectors
  std::string note;
};

// Brackets the abscissa where sum_g e^{-s d(g)} stops looking divergent,
// judged from sphere data up to r_max. Detection combines a geometric-decay
// test on the last sphere sums with a dyadic condensation test for
// polynomially decaying terms; both use margin 1e-3.
PoincareEstimate poincare_estimate(const LengthSpec& d, const Group& g, int r_max,
                                   double s_tolerance);

// per-sphere multiset of d values; the reusable input of poincare_estimate
using SphereProfile = std::vector<std::vector<std::pair<double, std::uint64_t>>>;
SphereProfile sphere_profile(const LengthSpec& d, const Group& g, int r_max);
PoincareEstimate poincare_from_profile(const SphereProfile& profile, double s_tolerance);

struct L2Threshold {
  double delta_half = 0.0;                    // upper bound for the multiplier threshold
  std::optional<double> exact_free_threshold;  // ln(2k-1)/2 for free word length
  PoincareEstimate base;
};

L2Threshold l2_threshold(const LengthSpec& d, const Group& g, int r_max,
                         double s_tolerance = 5e-3);

struct DominanceFit {
  double a = 0.0;
  double b = 0.0;
  double residual = 0.0;  // max_g (c(g) - a c'(g) - b); <= 0 when the line dominates
  bool line_dominates = false;
};

// Least-squares fit of c against c' over a ball, with the worst violation of
// the fitted line. `dominance_violation` checks an explicit pair (a, b).
DominanceFit dominance_fit(const LengthSpec& c, const LengthSpec& cprime, const Ball& ball,
                           double tol = 1e-9);
double dominance_violation(const LengthSpec& c, const LengthSpec& cprime, double a, double b,
                           const Ball& ball);

}  // namespace ncheat
