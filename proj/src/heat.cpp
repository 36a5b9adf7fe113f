#include "ncheat/heat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ncheat/eig.hpp"
#include "ncheat/rng.hpp"

namespace ncheat {

static void require_same_group(const FourierElement& x, const LengthSpec& d) {
  if (!(x.group() == d.group()))
    throw std::invalid_argument("length spec and element live on different groups");
}

FourierElement heat_evolve(const FourierElement& x0, const LengthSpec& d, double t) {
  require_same_group(x0, d);
  if (t < 0.0) throw std::invalid_argument("heat evolution requires t >= 0");
  std::vector<std::pair<GroupElement, cplx>> terms;
  terms.reserve(x0.terms().size());
  for (auto& [g, c] : x0.terms()) terms.emplace_back(g, c * std::exp(-t * d.evaluate(g)));
  return FourierElement::from_terms(x0.group(), x0.cocycle(), std::move(terms));
}

FourierElement generator_apply(const FourierElement& x, const LengthSpec& d) {
  require_same_group(x, d);
  std::vector<std::pair<GroupElement, cplx>> terms;
  terms.reserve(x.terms().size());
  for (auto& [g, c] : x.terms()) terms.emplace_back(g, -d.evaluate(g) * c);
  return FourierElement::from_terms(x.group(), x.cocycle(), std::move(terms));
}

double semigroup_check(const FourierElement& x0, const LengthSpec& d, double s, double t) {
  require_same_group(x0, d);
  if (s < 0.0 || t < 0.0) throw std::invalid_argument("semigroup check requires s, t >= 0");
  FourierElement two_step = heat_evolve(heat_evolve(x0, d, s), d, t);
  FourierElement one_step = heat_evolve(x0, d, s + t);
  double worst = 0.0;
  for (auto& [g, c] : x0.terms())
    worst = std::max(worst, std::abs(two_step.coeff(g) - one_step.coeff(g)));
  return worst;
}

std::vector<ResidualRow> heat_residual_check(const FourierElement& x0, const LengthSpec& d,
                                             double t, const std::vector<double>& h_list) {
  require_same_group(x0, d);
  if (!(t > 0.0)) throw std::invalid_argument("residual check requires t > 0");
  std::vector<ResidualRow> rows;
  rows.reserve(h_list.size());
  for (double h : h_list) {
    if (!(h > 0.0) || t - h <= 0.0)
      throw std::invalid_argument("residual check requires 0 < h < t");
    double acc = 0.0;
    for (auto& [g, c] : x0.terms()) {
      double a = d.evaluate(g);
      double diff = (std::exp(-(t + h) * a) - std::exp(-(t - h) * a)) / (2.0 * h);
      double exact = -a * std::exp(-t * a);
      acc += std::norm(c) * (diff - exact) * (diff - exact);
    }
    rows.push_back({h, std::sqrt(acc)});
  }
  return rows;
}

double uniqueness_ode_check(const FourierElement& x0, const LengthSpec& d,
                            const std::vector<double>& t_grid, double h) {
  require_same_group(x0, d);
  if (t_grid.empty()) throw std::invalid_argument("ode check requires a nonempty t grid");
  double worst = 0.0;
  for (double t : t_grid) {
    if (!(t - h > 0.0)) throw std::invalid_argument("ode check requires t > h > 0");
    for (auto& [g, c] : x0.terms()) {
      if (c == cplx(0.0)) continue;
      double a = d.evaluate(g);
      double w_plus = std::exp(-(t + h) * a), w_minus = std::exp(-(t - h) * a);
      double slope = (w_plus - w_minus) / (2.0 * h);
      double rhs = -a * std::exp(-t * a);
      double scale = std::max(std::abs(rhs), 1e-300);
      if (a == 0.0) {
        worst = std::max(worst, std::abs(slope));
      } else {
        worst = std::max(worst, std::abs(slope - rhs) / scale);
      }
    }
  }
  return worst;
}

TailProfile tail_profile(const FourierElement& x0, const LengthSpec& d, double t, int norm_R,
                         std::uint64_t seed, double tol, int max_iters, std::size_t cap) {
  require_same_group(x0, d);
  if (t < 0.0) throw std::invalid_argument("tail profile requires t >= 0");
  Group grp(x0.group());
  int r_support = support_radius(x0);
  Ball support_ball = Ball::build(grp, r_support, cap);

  FourierElement damped = heat_evolve(x0, d, t);

  // group the support by sphere
  std::vector<std::vector<std::pair<GroupElement, cplx>>> damped_spheres(r_support + 1);
  std::vector<double> mass(r_support + 1, 0.0);
  for (auto& [g, c] : x0.terms()) {
    std::uint32_t idx = support_ball.find(g);
    int r = support_ball.length_of(idx);
    damped_spheres[r].emplace_back(g, damped.coeff(g));
    mass[r] += std::norm(c);
  }
  // min of d over each full sphere
  std::vector<double> dmin(r_support + 1, std::numeric_limits<double>::infinity());
  GroupElement scratch;
  stream_spheres(grp, r_support, [&](int r, std::span<const std::int32_t> e) {
    scratch.data.assign(e.begin(), e.end());
    dmin[r] = std::min(dmin[r], d.evaluate(scratch));
  });

  bool free_kernel = grp.descriptor().family == Family::Free;
  std::shared_ptr<const Ball> norm_ball =
      std::make_shared<Ball>(Ball::build(grp, norm_R, cap));
  // one codomain covers every sphere restriction
  std::shared_ptr<const Ball> codomain;
  for (int r = 0; r <= r_support; ++r)
    if (damped_spheres[r].size() > 64 && !codomain)
      codomain = std::make_shared<Ball>(Ball::build(grp, norm_R + r_support, cap));

  TailProfile out;
  out.t = t;
  out.seed = seed;
  for (int r = 0; r <= r_support; ++r) {
    TailRow row;
    row.r = r;
    row.sphere_mass = std::sqrt(mass[r]);
    row.c_bound = free_kernel ? (double)(r + 1)
                              : std::sqrt((double)support_ball.sphere_size(r));
    row.hgrowth_bound = row.c_bound * std::exp(-t * dmin[r]) * row.sphere_mass;
    if (!damped_spheres[r].empty()) {
      FourierElement part = FourierElement::from_terms(x0.group(), x0.cocycle(),
                                                       std::move(damped_spheres[r]));
      NormEstimate est = norm_estimate(part, norm_R, seed + (std::uint64_t)r, tol, max_iters,
                                       cap, norm_ball, codomain);
      row.sphere_norm = est.nu;
      row.converged = est.converged;
    }
    out.rows.push_back(row);
  }
  return out;
}

double min_truncated_eigenvalue(const FourierElement& x, int r_max, std::size_t cap) {
  Group grp(x.group());
  double worst = std::numeric_limits<double>::infinity();
  for (int r = 0; r <= r_max; ++r) {
    Ball ball = Ball::build(grp, r, cap);
    auto m = dense_truncated_matrix(x, ball);
    worst = std::min(worst, hermitian_lambda_min(m, ball.size()));
  }
  return worst;
}

FourierElement random_equal_sphere_mass(const Group& g, const Cocycle& sigma, int r,
                                        std::uint64_t seed, std::size_t cap) {
  Ball ball = Ball::build(g, r, cap);
  Rng rng(seed);
  int spheres = 0;
  for (int k = 0; k <= r; ++k)
    if (ball.sphere_size(k) > 0) ++spheres;
  std::vector<std::pair<GroupElement, cplx>> terms;
  terms.reserve(ball.size());
  for (int k = 0; k <= r; ++k) {
    std::size_t sz = ball.sphere_size(k);
    if (sz == 0) continue;
    std::vector<cplx> coeffs(sz);
    double m2 = 0.0;
    for (auto& c : coeffs) {
      c = rng.normal_complex();
      m2 += std::norm(c);
    }
    double scale = 1.0 / std::sqrt(m2 * (double)spheres);
    for (std::size_t i = 0; i < sz; ++i)
      terms.emplace_back(ball.element((std::uint32_t)(ball.sphere_begin(k) + i)),
                         coeffs[i] * scale);
  }
  return FourierElement::from_terms(g.descriptor(), sigma, std::move(terms));
}

EpsilonReport epsilon_diagnostics(const LengthSpec& d, const Group& g, const Cocycle& sigma,
                                  int r_max, const std::vector<double>& t_grid,
                                  std::uint64_t seed, int norm_R, double tol, int max_iters) {
  EpsilonReport rep;
  rep.threshold = l2_threshold(d, g, r_max);
  if (norm_R < 0) norm_R = std::min(r_max, 6);
  FourierElement x0 = random_equal_sphere_mass(g, sigma, r_max, seed);
  for (double t : t_grid) {
    if (!(t > 0.0)) throw std::invalid_argument("epsilon diagnostics: t grid must be positive");
    EpsilonReport::TFlag flag;
    flag.t = t;
    flag.profile = tail_profile(x0, d, t, norm_R, seed + 1, tol, max_iters);
    double worst = 0.0;
    bool all_decay = true;
    const auto& rows = flag.profile.rows;
    for (std::size_t r = 2; r + 1 < rows.size(); ++r) {
      if (rows[r].sphere_norm <= 0.0) continue;
      double ratio = rows[r + 1].sphere_norm / rows[r].sphere_norm;
      worst = std::max(worst, ratio);
      if (ratio > 1.0 - 1e-3) all_decay = false;
    }
    flag.summable_looking = all_decay;
    flag.worst_tail_ratio = worst;
    rep.flags.push_back(std::move(flag));
  }
  return rep;
}

}  // namespace ncheat
