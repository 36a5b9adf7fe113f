#pragma once

#include "ncheat/heat.hpp"

namespace ncheat {

struct ContentEstimate {
  double c_est = 0.0;   // certified lower bound for the content of E
  double lower = 1.0;   // a-priori bracket
  double upper = 0.0;   // sqrt|E|
  int restarts_used = 0;
  int ascent_radius = 0;
  int certify_radius = 0;
  bool converged = true;  // every inner norm estimate converged
  std::vector<cplx> witness;  // unit l2 vector aligned with E
};

struct ContentOptions {
  double tol = 1e-8;        // inner power-iteration tolerance
  int max_iters = 10000;
  int ascent_steps = 40;
  // the alternating ascent runs on a ball of this radius (0: same as R);
  // the best witness is then re-certified at R itself
  int ascent_radius = 0;
  std::size_t cap = kDefaultBallCap;
  // |E| above which the ascent is replaced by fixed candidate witnesses
  // (uniform, delta, a few random draws); sup over a large support is out of
  // reach for the alternating scheme at desk scale
  std::size_t ascent_support_limit = 96;
};

// Lower bound for the Haagerup content of E: sup over unit l2 coefficient
// vectors supported on E of the truncated operator norm. Alternating ascent
// between the top singular pair of Lambda(f) and the matched coefficient
// update, multi-started; outputs are lower bounds up to truncation.
ContentEstimate haagerup_content_estimate(const std::vector<GroupElement>& E,
                                          const GroupDescriptor& g, const Cocycle& sigma,
                                          int R, int restarts, std::uint64_t seed,
                                          const ContentOptions& opts = {});

struct KappaWeight {
  enum class Kind { OnePlusLengthPow, ExpLength, One };
  Kind kind = Kind::One;
  double parameter = 0.0;  // p for (1+L)^p, t for e^{tL}
  LengthSpec base;

  double eval(const GroupElement& e) const;
  static KappaWeight one_plus_length_pow(LengthSpec base, double p);
  static KappaWeight exp_length(LengthSpec base, double t);
  static KappaWeight one(LengthSpec base);
};

struct KappaSample {
  std::string kind;  // "ball", "sphere", "sparse"
  double ratio = 0.0;
  double nu = 0.0;
  double weighted_l2 = 0.0;
};

struct KappaReport {
  double max_ratio = 0.0;  // certified lower bound for the best decay constant
  bool converged = true;
  std::vector<KappaSample> samples;
};

// max over random finitely supported x of norm_estimate(x) / ||x kappa||_2,
// sampled over ball-supported, sphere-supported and sparse coefficients.
KappaReport kappa_decay_ratio(const Group& g, const Cocycle& sigma, const KappaWeight& kappa,
                              int support_radius, int samples_per_kind, int R,
                              std::uint64_t seed, double tol = 1e-8, int max_iters = 10000,
                              std::size_t cap = kDefaultBallCap);

struct HGrowthRow {
  int r = 0;
  std::size_t ball_size = 0;  // |{g : d(g) <= r}|
  double c_lower = 0.0;
  double c_upper = 0.0;  // sqrt of the sublevel-set size
};

struct HGrowthProfile {
  std::vector<HGrowthRow> rows;
  double poly_exponent = 0.0;  // fit log c = p log(1+r) + const
  double poly_residual = 0.0;
  double exp_rate = 0.0;  // fit log c = rate * r + const
  double exp_residual = 0.0;
  std::string label;  // "polynomial-consistent", "exponential-consistent" or "inconclusive"
};

// Content-growth profile over the sublevel sets {g : d(g) <= r}, r = 0..r_max.
// d must be proper (sublevel sets of the bounded indicator are infinite).
HGrowthProfile h_growth_profile(const Group& g, const LengthSpec& d, const Cocycle& sigma,
                                int r_max, int radius_margin, int restarts,
                                std::uint64_t seed, const ContentOptions& opts = {});

// the sublevel sets themselves, enumerated through a covering word ball
std::vector<std::vector<GroupElement>> sublevel_sets(const Group& g, const LengthSpec& d,
                                                     int r_max,
                                                     std::size_t cap = kDefaultBallCap);

struct SphereBoundRow {
  int r = 0;
  double measured = 0.0;
  double bound = 0.0;  // (r+1) e^{-t r} ||x chi_{S_r}||_2
  bool pass = false;
  bool converged = true;
};

// Free-group check that heat-damped sphere restrictions stay under the sphere
// decay bound (r+1) e^{-t r} times the sphere l2 mass.
std::vector<SphereBoundRow> sphere_multiplier_bound_check(
    const FourierElement& x, double t, int r_max, int norm_R, std::uint64_t seed,
    double tol = 1e-8, int max_iters = 10000, std::size_t cap = kDefaultBallCap,
    std::shared_ptr<const Ball> norm_ball = nullptr,
    std::shared_ptr<const Ball> codomain = nullptr);

}  // namespace ncheat
