#include "ncheat/content.hpp"

#include <algorithm>
#include <cmath>

#include "ncheat/rng.hpp"

namespace ncheat {

// ---------------------------------------------------------------- content

namespace {

FourierElement element_from_witness(const GroupDescriptor& g, const Cocycle& sigma,
                                    const std::vector<GroupElement>& E,
                                    const std::vector<cplx>& f) {
  std::vector<std::pair<GroupElement, cplx>> terms;
  terms.reserve(E.size());
  for (std::size_t i = 0; i < E.size(); ++i) terms.emplace_back(E[i], f[i]);
  return FourierElement::from_terms(g, sigma, std::move(terms));
}

void normalize_witness(std::vector<cplx>& f) {
  double n2 = 0.0;
  for (auto& c : f) n2 += std::norm(c);
  if (n2 == 0.0) {
    f.assign(f.size(), cplx(0.0));
    if (!f.empty()) f[0] = 1.0;
    return;
  }
  double inv = 1.0 / std::sqrt(n2);
  for (auto& c : f) c *= inv;
}

// one alternating-ascent run from a given start, on a fixed probe operator
// whose k-th term is Lambda(E_k) (weights supply the candidate coefficients)
struct AscentResult {
  double nu = 0.0;
  std::vector<cplx> f;
  bool converged = true;
};

AscentResult run_ascent(const BallOperator& probe, std::vector<cplx> f, std::uint64_t seed,
                        const ContentOptions& opts) {
  const std::size_t m = probe.term_count();
  normalize_witness(f);
  AscentResult best;
  best.f = f;
  Rng rng(seed);
  std::vector<cplx> xi(probe.domain_size()), work(probe.domain_size()),
      eta(probe.codomain_size());
  for (int step = 0; step < opts.ascent_steps; ++step) {
    // top right singular vector of A_f by power iteration on A_f* A_f
    for (auto& v : xi) v = rng.normal_complex();
    double lambda = 0.0, prev = -1.0;
    bool conv = false;
    for (int it = 0; it < opts.max_iters; ++it) {
      double n2 = 0.0;
      for (auto& v : xi) n2 += std::norm(v);
      double inv = 1.0 / std::sqrt(n2);
      for (auto& v : xi) v *= inv;
      probe.apply_weighted(f, xi, eta);
      probe.apply_adjoint_weighted(f, eta, work);
      lambda = 0.0;
      for (std::size_t i = 0; i < xi.size(); ++i)
        lambda += (std::conj(xi[i]) * work[i]).real();
      if (prev >= 0.0 && std::abs(lambda - prev) <= opts.tol * std::max(lambda, 1e-300)) {
        conv = true;
        break;
      }
      prev = lambda;
      std::swap(xi, work);
    }
    double n2 = 0.0;
    for (auto& v : xi) n2 += std::norm(v);
    double inv = 1.0 / std::sqrt(n2);
    for (auto& v : xi) v *= inv;
    probe.apply_weighted(f, xi, eta);
    double eta_norm = 0.0;
    for (auto& v : eta) eta_norm += std::norm(v);
    eta_norm = std::sqrt(eta_norm);
    double nu = eta_norm;  // ||A_f xi|| with unit xi
    if (nu > best.nu) {
      best.nu = nu;
      best.f = f;
      best.converged = conv;
    }
    if (eta_norm == 0.0) break;
    for (auto& v : eta) v /= eta_norm;
    // coefficient update f(g) <- <eta, Lambda(g) xi>, then renormalize
    std::vector<cplx> next(m);
    for (std::size_t k = 0; k < m; ++k) next[k] = probe.term_pairing(k, xi, eta);
    normalize_witness(next);
    // phase-align against the previous iterate to measure stagnation
    cplx overlap(0.0);
    for (std::size_t k = 0; k < m; ++k) overlap += std::conj(f[k]) * next[k];
    double delta = 0.0;
    cplx phase = std::abs(overlap) > 0 ? overlap / std::abs(overlap) : cplx(1.0);
    for (std::size_t k = 0; k < m; ++k) delta = std::max(delta, std::abs(next[k] - phase * f[k]));
    f = std::move(next);
    if (delta < 1e-10) break;
  }
  return best;
}

}  // namespace

ContentEstimate haagerup_content_estimate(const std::vector<GroupElement>& E,
                                          const GroupDescriptor& gd, const Cocycle& sigma,
                                          int R, int restarts, std::uint64_t seed,
                                          const ContentOptions& opts) {
  if (E.empty()) throw std::invalid_argument("content estimate: empty subset");
  Group grp(gd);
  for (auto& e : E) grp.check_element(e);
  for (std::size_t i = 0; i < E.size(); ++i)
    for (std::size_t j = i + 1; j < E.size(); ++j)
      if (E[i] == E[j]) throw std::invalid_argument("content estimate: repeated element");

  ContentEstimate out;
  out.upper = std::sqrt((double)E.size());
  out.certify_radius = R;

  if (E.size() == 1) {
    // a single projective unitary has norm exactly 1
    out.c_est = 1.0;
    out.witness = {cplx(1.0)};
    out.ascent_radius = 0;
    return out;
  }

  // work in sorted support order (the probe operator's term order); the
  // witness is permuted back to the caller's ordering at the end
  std::vector<GroupElement> Es = E;
  std::sort(Es.begin(), Es.end());

  FourierElement probe_elt =
      element_from_witness(gd, sigma, Es, std::vector<cplx>(Es.size(), 1.0));
  int r0 = support_radius(probe_elt);
  int ascent_R = opts.ascent_radius > 0 ? std::min(opts.ascent_radius, R) : R;
  // keep the ascent ball affordable; the final certification runs at R
  while (ascent_R > r0 + 2) {
    try {
      Ball::build(grp, ascent_R, std::min<std::size_t>(opts.cap, 300000));
      break;
    } catch (const BallCapacityError&) {
      ascent_R = (ascent_R + r0) / 2;
    }
  }
  out.ascent_radius = ascent_R;

  auto domain = std::make_shared<Ball>(Ball::build(grp, ascent_R, opts.cap));

  std::vector<cplx> bestf;
  double best_nu = -1.0;
  bool all_converged = true;

  std::vector<std::vector<cplx>> starts;
  starts.emplace_back(Es.size(), cplx(1.0));        // uniform
  {
    std::vector<cplx> delta(Es.size(), cplx(0.0));  // single unitary
    delta[0] = 1.0;
    starts.push_back(std::move(delta));
  }
  Rng rng(seed);
  while ((int)starts.size() < std::max(restarts, 1)) {
    std::vector<cplx> f(Es.size());
    for (auto& c : f) c = rng.normal_complex();
    starts.push_back(std::move(f));
  }
  out.restarts_used = (int)starts.size();

  if (Es.size() > opts.ascent_support_limit) {
    // candidate witnesses only; the ascent update is too expensive here
    for (std::size_t s = 0; s < starts.size(); ++s) {
      std::vector<cplx> f = starts[s];
      normalize_witness(f);
      FourierElement x = element_from_witness(gd, sigma, Es, f);
      NormEstimate est = norm_estimate(x, ascent_R, seed + 100 + s, opts.tol, opts.max_iters,
                                       opts.cap, domain);
      all_converged = all_converged && est.converged;
      if (est.nu > best_nu) {
        best_nu = est.nu;
        bestf = std::move(f);
      }
    }
  } else {
    auto codomain = std::make_shared<Ball>(Ball::build(grp, ascent_R + r0, opts.cap));
    BallOperator probe = BallOperator::map(probe_elt, domain, codomain);
    for (std::size_t s = 0; s < starts.size(); ++s) {
      AscentResult res = run_ascent(probe, starts[s], seed + 200 + s, opts);
      all_converged = all_converged && res.converged;
      if (res.nu > best_nu) {
        best_nu = res.nu;
        bestf = res.f;
      }
    }
  }

  normalize_witness(bestf);
  // certify the winning witness at the requested radius; both the ascent value
  // and the certification are truncated norms of unit witnesses, hence valid
  // lower bounds for the content
  FourierElement xbest = element_from_witness(gd, sigma, Es, bestf);
  NormEstimate cert = norm_estimate(xbest, R, seed + 17, opts.tol, opts.max_iters, opts.cap);
  all_converged = all_converged && cert.converged;
  out.c_est = std::max(cert.nu, best_nu);
  out.converged = all_converged;
  // witness back in the caller's order
  out.witness.assign(E.size(), cplx(0.0));
  for (std::size_t k = 0; k < E.size(); ++k) {
    auto it = std::lower_bound(Es.begin(), Es.end(), E[k]);
    out.witness[k] = bestf[(std::size_t)(it - Es.begin())];
  }
  return out;
}

// ---------------------------------------------------------------- kappa

double KappaWeight::eval(const GroupElement& e) const {
  switch (kind) {
    case Kind::OnePlusLengthPow: return std::pow(1.0 + base.evaluate(e), parameter);
    case Kind::ExpLength: return std::exp(parameter * base.evaluate(e));
    case Kind::One: return 1.0;
  }
  return 1.0;
}

KappaWeight KappaWeight::one_plus_length_pow(LengthSpec b, double p) {
  if (!(p >= 0.0)) throw std::invalid_argument("kappa exponent must be >= 0");
  return KappaWeight{Kind::OnePlusLengthPow, p, std::move(b)};
}

KappaWeight KappaWeight::exp_length(LengthSpec b, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("kappa rate must be >= 0");
  return KappaWeight{Kind::ExpLength, t, std::move(b)};
}

KappaWeight KappaWeight::one(LengthSpec b) { return KappaWeight{Kind::One, 0.0, std::move(b)}; }

KappaReport kappa_decay_ratio(const Group& g, const Cocycle& sigma, const KappaWeight& kappa,
                              int support_radius, int samples_per_kind, int R,
                              std::uint64_t seed, double tol, int max_iters, std::size_t cap) {
  Ball support_ball = Ball::build(g, support_radius, cap);
  auto norm_ball = std::make_shared<Ball>(Ball::build(g, R, cap));
  Rng rng(seed);
  KappaReport rep;

  auto weighted_l2 = [&](const FourierElement& x) {
    double s = 0.0;
    for (auto& [e, c] : x.terms()) {
      double k = kappa.eval(e);
      if (k < 1.0)
        throw std::invalid_argument("kappa weight must be >= 1 on the sampled support");
      s += std::norm(c) * k * k;
    }
    return std::sqrt(s);
  };

  auto record = [&](const char* kind, const FourierElement& x, std::uint64_t s) {
    if (x.terms().empty()) return;
    NormEstimate est = norm_estimate(x, R, s, tol, max_iters, cap, norm_ball);
    rep.converged = rep.converged && est.converged;
    KappaSample ks;
    ks.kind = kind;
    ks.nu = est.nu;
    ks.weighted_l2 = weighted_l2(x);
    ks.ratio = ks.weighted_l2 > 0 ? ks.nu / ks.weighted_l2 : 0.0;
    rep.max_ratio = std::max(rep.max_ratio, ks.ratio);
    rep.samples.push_back(std::move(ks));
  };

  for (int s = 0; s < samples_per_kind; ++s) {
    // ball-supported
    std::vector<std::pair<GroupElement, cplx>> terms;
    for (std::uint32_t i = 0; i < support_ball.size(); ++i)
      terms.emplace_back(support_ball.element(i), rng.normal_complex());
    record("ball", FourierElement::from_terms(g.descriptor(), sigma, std::move(terms)),
           seed + 1000 + (std::uint64_t)s);

    // sphere-supported (outermost sphere)
    terms.clear();
    int r = support_ball.radius();
    for (std::size_t i = support_ball.sphere_begin(r); i < support_ball.sphere_end(r); ++i)
      terms.emplace_back(support_ball.element((std::uint32_t)i), rng.normal_complex());
    record("sphere", FourierElement::from_terms(g.descriptor(), sigma, std::move(terms)),
           seed + 2000 + (std::uint64_t)s);

    // sparse
    terms.clear();
    std::size_t picks = std::max<std::size_t>(2, support_ball.size() / 16);
    picks = std::min<std::size_t>(picks, 32);
    for (std::size_t i = 0; i < picks; ++i)
      terms.emplace_back(support_ball.element((std::uint32_t)rng.below(support_ball.size())),
                         rng.normal_complex());
    record("sparse", FourierElement::from_terms(g.descriptor(), sigma, std::move(terms)),
           seed + 3000 + (std::uint64_t)s);
  }
  return rep;
}

// ---------------------------------------------------------------- h-growth

namespace {

struct LineFit {
  double slope = 0.0, intercept = 0.0, residual = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  LineFit f;
  double denom = (double)n * sxx - sx * sx;
  if (std::abs(denom) < 1e-12) {
    f.intercept = n ? sy / (double)n : 0.0;
  } else {
    f.slope = ((double)n * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / (double)n;
  }
  double rss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double e = y[i] - f.slope * x[i] - f.intercept;
    rss += e * e;
  }
  f.residual = n ? std::sqrt(rss / (double)n) : 0.0;
  return f;
}

}  // namespace

std::vector<std::vector<GroupElement>> sublevel_sets(const Group& g, const LengthSpec& d,
                                                     int r_max, std::size_t cap) {
  if (d.kind() == LengthKind::Indicator)
    throw std::invalid_argument("growth profile requires a proper length");
  std::vector<std::vector<GroupElement>> sets(r_max + 1);
  // grow a covering word ball until the newest sphere sits above r_max
  const int scan_limit = 4 * r_max + 64;
  for (int scan = r_max;; scan += std::max(2, r_max / 2)) {
    if (scan > scan_limit)
      throw std::invalid_argument(
          "sublevel sets do not close up inside the scan limit; the length must be proper");
    Ball ball = Ball::build(g, scan, cap);
    for (auto& s : sets) s.clear();
    for (std::uint32_t i = 0; i < ball.size(); ++i) {
      GroupElement e = ball.element(i);
      double v = d.evaluate(e);
      if (v <= (double)r_max) sets[(std::size_t)std::ceil(v - 1e-12)].push_back(std::move(e));
    }
    int r = ball.radius();
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = ball.sphere_begin(r); i < ball.sphere_end(r); ++i)
      dmin = std::min(dmin, d.evaluate(ball.element((std::uint32_t)i)));
    if (dmin > (double)r_max) break;
  }
  // cumulative: the set at radius r contains every smaller level
  for (int r = 1; r <= r_max; ++r)
    sets[r].insert(sets[r].begin(), sets[r - 1].begin(), sets[r - 1].end());
  return sets;
}

HGrowthProfile h_growth_profile(const Group& g, const LengthSpec& d, const Cocycle& sigma,
                                int r_max, int radius_margin, int restarts,
                                std::uint64_t seed, const ContentOptions& opts) {
  HGrowthProfile out;
  std::vector<double> logr, logc, rs;
  auto sets = sublevel_sets(g, d, r_max, opts.cap);
  for (int r = 0; r <= r_max; ++r) {
    const std::vector<GroupElement>& E = sets[r];
    if (E.empty()) throw std::logic_error("empty sublevel set");
    ContentEstimate est = haagerup_content_estimate(E, g.descriptor(), sigma,
                                                    r + radius_margin, restarts,
                                                    seed + (std::uint64_t)r, opts);
    HGrowthRow row;
    row.r = r;
    row.ball_size = E.size();
    row.c_lower = est.c_est;
    row.c_upper = std::sqrt((double)E.size());
    out.rows.push_back(row);
    if (row.c_lower > 0) {
      logr.push_back(std::log1p((double)r));
      rs.push_back((double)r);
      logc.push_back(std::log(row.c_lower));
    }
  }
  LineFit poly = fit_line(logr, logc);
  LineFit expo = fit_line(rs, logc);
  out.poly_exponent = poly.slope;
  out.poly_residual = poly.residual;
  out.exp_rate = expo.slope;
  out.exp_residual = expo.residual;
  const double threshold = 0.1;
  if (poly.residual <= threshold && poly.residual <= expo.residual)
    out.label = "polynomial-consistent";
  else if (expo.residual <= threshold)
    out.label = "exponential-consistent";
  else
    out.label = "inconclusive";
  return out;
}

// ---------------------------------------------------------------- sphere bound

std::vector<SphereBoundRow> sphere_multiplier_bound_check(
    const FourierElement& x, double t, int r_max, int norm_R, std::uint64_t seed, double tol,
    int max_iters, std::size_t cap, std::shared_ptr<const Ball> norm_ball,
    std::shared_ptr<const Ball> codomain) {
  if (x.group().family != Family::Free)
    throw std::invalid_argument("sphere bound check requires a free-group kernel");
  if (!(t >= 0.0)) throw std::invalid_argument("sphere bound check requires t >= 0");
  Group grp(x.group());
  if (!norm_ball) norm_ball = std::make_shared<Ball>(Ball::build(grp, norm_R, cap));

  std::vector<std::vector<std::pair<GroupElement, cplx>>> spheres(r_max + 1);
  std::vector<double> mass(r_max + 1, 0.0);
  for (auto& [g, c] : x.terms()) {
    long r = grp.closed_form_word_length(g);
    if (r > r_max) continue;
    spheres[r].emplace_back(g, c * std::exp(-t * (double)r));
    mass[r] += std::norm(c);
  }
  for (int r = 0; r <= r_max; ++r)
    if (spheres[r].size() > 64 && !codomain)
      codomain = std::make_shared<Ball>(Ball::build(grp, norm_R + r_max, cap));

  std::vector<SphereBoundRow> rows;
  for (int r = 0; r <= r_max; ++r) {
    SphereBoundRow row;
    row.r = r;
    row.bound = (double)(r + 1) * std::exp(-t * (double)r) * std::sqrt(mass[r]);
    if (!spheres[r].empty()) {
      FourierElement part =
          FourierElement::from_terms(x.group(), x.cocycle(), std::move(spheres[r]));
      NormEstimate est = norm_estimate(part, norm_R, seed + (std::uint64_t)r, tol, max_iters,
                                       cap, norm_ball, codomain);
      row.measured = est.nu;
      row.converged = est.converged;
    }
    row.pass = row.measured <= row.bound * (1.0 + 1e-6);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace ncheat
