#pragma once

#include "ncheat/length.hpp"
#include "ncheat/truncated.hpp"

namespace ncheat {

// Heat flow on Fourier coefficients: coefficient at g is damped by
// e^{-t d(g)}. Everything here is exact coefficient arithmetic; operator-norm
// statements are probed through ball truncations.

FourierElement heat_evolve(const FourierElement& x0, const LengthSpec& d, double t);

// H_d(x) = -sum_g d(g) coeff(g) Lambda(g)
FourierElement generator_apply(const FourierElement& x, const LengthSpec& d);

// max_g |(M_s M_t x0 - M_{s+t} x0)^(g)|
double semigroup_check(const FourierElement& x0, const LengthSpec& d, double s, double t);

struct ResidualRow {
  double h = 0.0;
  double residual = 0.0;  // || (u(t+h)-u(t-h))/2h - H_d u(t) ||_tau
};

// Central-difference residuals of the coefficient ODE at time t; residuals
// scale like h^2, so successive halvings of h shrink them by about 4.
std::vector<ResidualRow> heat_residual_check(const FourierElement& x0, const LengthSpec& d,
                                             double t, const std::vector<double>& h_list);

// Coefficientwise check that w_g(t) = e^{-t d(g)} x0^(g) solves
// w' = -d(g) w: max relative deviation of the central difference from the
// exact right-hand side over the support and the t grid.
double uniqueness_ode_check(const FourierElement& x0, const LengthSpec& d,
                            const std::vector<double>& t_grid, double h = 1e-3);

struct TailRow {
  int r = 0;
  double sphere_norm = 0.0;    // measured truncated norm of the damped sphere part
  double hgrowth_bound = 0.0;  // c_bound(r) e^{-t min_{S_r} d} ||x0 chi_{S_r}||_2
  double sphere_mass = 0.0;    // ||x0 chi_{S_r}||_2
  double c_bound = 0.0;        // (r+1) for free kernels, sqrt|S_r| otherwise
  bool converged = true;
};

struct TailProfile {
  double t = 0.0;
  std::uint64_t seed = 0;
  std::vector<TailRow> rows;
};

// Per-sphere norms T(r) of the heat-damped element, with the decay bound they
// must stay under. norm_R sets the truncation radius of the norm estimates.
TailProfile tail_profile(const FourierElement& x0, const LengthSpec& d, double t, int norm_R,
                         std::uint64_t seed, double tol = 1e-8, int max_iters = 10000,
                         std::size_t cap = kDefaultBallCap);

// lambda_min over the dense ball truncations B_0..B_r of x (positivity echo)
double min_truncated_eigenvalue(const FourierElement& x, int r_max,
                                std::size_t cap = kDefaultBallCap);

struct EpsilonReport {
  L2Threshold threshold;   // delta(d)/2 estimate, plus the exact free-group value
  struct TFlag {
    double t = 0.0;
    bool summable_looking = false;  // tail ratios of T(r) decay geometrically
    double worst_tail_ratio = 0.0;
    TailProfile profile;
  };
  std::vector<TFlag> flags;
};

// Collects the l2 threshold estimate and tail summability flags for a grid of
// t values, probed on a random equal-sphere-mass datum supported on B_{r_max}.
// No claim of computing the true multiplier threshold is made.
EpsilonReport epsilon_diagnostics(const LengthSpec& d, const Group& g, const Cocycle& sigma,
                                  int r_max, const std::vector<double>& t_grid,
                                  std::uint64_t seed, int norm_R = -1, double tol = 1e-6,
                                  int max_iters = 4000);

// random datum with equal l2 mass on every sphere of B_r (unit total mass)
FourierElement random_equal_sphere_mass(const Group& g, const Cocycle& sigma, int r,
                                        std::uint64_t seed, std::size_t cap = kDefaultBallCap);

}  // namespace ncheat
