#include "ncheat/length.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>

#include "ncheat/eig.hpp"

namespace ncheat {

struct LengthSpec::BfsCache {
  std::mutex mu;
  std::optional<Ball> ball;
};

// ---------------------------------------------------------------- factories

static void require_family(const GroupDescriptor& g, std::initializer_list<Family> fams,
                           const char* what) {
  for (Family f : fams)
    if (g.family == f) return;
  throw std::invalid_argument(std::string(what) + " is not defined for group " +
                              g.canonical_name());
}

LengthSpec::LengthSpec(LengthKind k, GroupDescriptor g)
    : kind_(k), group_(std::move(g)), grp_(std::make_shared<Group>(group_)) {}

LengthSpec LengthSpec::word(const GroupDescriptor& g) {
  LengthSpec d(LengthKind::Word, g);
  if (g.family == Family::Heisenberg3) d.bfs_ = std::make_shared<BfsCache>();
  d.validate_probe();
  return d;
}

LengthSpec LengthSpec::l1(const GroupDescriptor& g) {
  require_family(g, {Family::FreeAbelian}, "l1 length");
  LengthSpec d(LengthKind::L1, g);
  d.validate_probe();
  return d;
}

LengthSpec LengthSpec::l2(const GroupDescriptor& g) {
  require_family(g, {Family::FreeAbelian}, "l2 length");
  LengthSpec d(LengthKind::L2, g);
  d.validate_probe();
  return d;
}

LengthSpec LengthSpec::l2_squared(const GroupDescriptor& g) {
  require_family(g, {Family::FreeAbelian}, "squared l2 length");
  LengthSpec d(LengthKind::L2Squared, g);
  d.validate_probe();
  return d;
}

LengthSpec LengthSpec::block(const GroupDescriptor& g) {
  require_family(g, {Family::FreeProductOfFinite, Family::Free}, "block length");
  LengthSpec d(LengthKind::Block, g);
  d.validate_probe();
  return d;
}

LengthSpec LengthSpec::log_length(const GroupDescriptor& g) {
  LengthSpec d(LengthKind::Log, g);
  if (g.family == Family::Heisenberg3) d.bfs_ = std::make_shared<BfsCache>();
  d.validate_probe();
  return d;
}

LengthSpec LengthSpec::pullback(LengthSpec inner, int coordinate, const GroupDescriptor& g) {
  require_family(g, {Family::FreeAbelian, Family::Heisenberg3}, "pullback length");
  if (inner.group().family != Family::FreeAbelian || inner.group().rank != 1)
    throw std::invalid_argument("pullback inner length must live on zn:1");
  int max_coord = g.family == Family::FreeAbelian ? g.rank : 2;
  if (coordinate < 0 || coordinate >= max_coord)
    throw std::invalid_argument("pullback coordinate out of range");
  LengthSpec d(LengthKind::Pullback, g);
  d.coordinate_ = coordinate;
  d.inner_ = std::make_shared<LengthSpec>(std::move(inner));
  d.validate_probe();
  return d;
}

LengthSpec LengthSpec::power_law(const GroupDescriptor& g, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("power law exponent must be positive");
  LengthSpec d(LengthKind::PowerLaw, g);
  d.alpha_ = alpha;
  if (g.family == Family::Heisenberg3) d.bfs_ = std::make_shared<BfsCache>();
  d.validate_probe();
  return d;
}

LengthSpec LengthSpec::indicator(const GroupDescriptor& g) {
  LengthSpec d(LengthKind::Indicator, g);
  d.validate_probe();
  return d;
}

LengthSpec sqrt_transform(const LengthSpec& d) {
  LengthSpec out(LengthKind::Sqrt, d.group());
  out.inner_ = std::make_shared<LengthSpec>(d);
  return out;
}

std::string LengthSpec::name() const {
  switch (kind_) {
    case LengthKind::Word: return "word";
    case LengthKind::L1: return "l1";
    case LengthKind::L2: return "l2";
    case LengthKind::L2Squared: return "l2sq";
    case LengthKind::Block: return "block";
    case LengthKind::Log: return "log";
    case LengthKind::Pullback:
      return "pullback(" + inner_->name() + "," + std::to_string(coordinate_) + ")";
    case LengthKind::PowerLaw: return "power:" + std::to_string(alpha_);
    case LengthKind::Indicator: return "indicator";
    case LengthKind::Sqrt: return "sqrt(" + inner_->name() + ")";
  }
  return "?";
}

// ---------------------------------------------------------------- evaluate

double LengthSpec::word_length(const GroupElement& g) const {
  long closed = grp_->closed_form_word_length(g);
  if (closed >= 0) return (double)closed;
  // Heisenberg3: word length is BFS depth; grow the cached ball until found
  std::lock_guard<std::mutex> lock(bfs_->mu);
  int r = bfs_->ball ? bfs_->ball->radius() : 0;
  while (true) {
    if (bfs_->ball) {
      std::uint32_t idx = bfs_->ball->find(g);
      if (idx != kNoIndex) return (double)bfs_->ball->length_of(idx);
      if (bfs_->ball->sphere_size(bfs_->ball->radius()) == 0) break;
    }
    r += 4;
    if (r > 512) break;
    bfs_->ball = Ball::build(*grp_, r);
  }
  throw std::runtime_error("word length cache exhausted for " + grp_->format(g));
}

double LengthSpec::evaluate(const GroupElement& g) const {
  grp_->check_element(g);
  switch (kind_) {
    case LengthKind::Word: return word_length(g);
    case LengthKind::L1: {
      double s = 0;
      for (auto x : g.data) s += std::abs((double)x);
      return s;
    }
    case LengthKind::L2: {
      double s = 0;
      for (auto x : g.data) s += (double)x * x;
      return std::sqrt(s);
    }
    case LengthKind::L2Squared: {
      double s = 0;
      for (auto x : g.data) s += (double)x * x;
      return s;
    }
    case LengthKind::Block: {
      if (group_.family == Family::FreeProductOfFinite) return (double)(g.data.size() / 2);
      // free group: number of maximal runs of one generator
      long blocks = 0;
      std::int32_t prev = 0;
      for (auto x : g.data) {
        if (std::abs(x) != std::abs(prev)) ++blocks;
        prev = x;
      }
      return (double)blocks;
    }
    case LengthKind::Log: return std::log1p(word_length(g));
    case LengthKind::Pullback: {
      GroupElement proj{{g.data[coordinate_]}};
      return inner_->evaluate(proj);
    }
    case LengthKind::PowerLaw: {
      double w = word_length(g);
      return w == 0.0 ? 0.0 : std::pow(w, alpha_);
    }
    case LengthKind::Indicator: return grp_->is_identity(g) ? 0.0 : 1.0;
    case LengthKind::Sqrt: return std::sqrt(inner_->evaluate(g));
  }
  return 0.0;
}

double evaluate(const LengthSpec& d, const GroupElement& g) { return d.evaluate(g); }

void LengthSpec::validate_probe() const {
  if (evaluate(grp_->identity()) != 0.0)
    throw std::invalid_argument("length spec violates d(e) = 0");
  std::vector<GroupElement> probe;
  for (const auto& s : grp_->generators()) {
    probe.push_back(s);
    for (const auto& t : grp_->generators()) probe.push_back(grp_->multiply(s, t));
    if (probe.size() > 64) break;
  }
  for (const auto& g : probe) {
    double v = evaluate(g);
    double w = evaluate(grp_->invert(g));
    if (!std::isfinite(v) || v < 0.0)
      throw std::invalid_argument("length spec produced a negative or non-finite value");
    if (std::abs(v - w) > 1e-12 * (1.0 + std::abs(v)))
      throw std::invalid_argument("length spec is not symmetric under inversion");
  }
}

// ---------------------------------------------------------------- gram tests

static GramWitness projected_gram(const std::vector<double>& dmat, std::size_t n, double tol) {
  // PDP with P = I - J/n is double centering
  std::vector<double> mean(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) mean[i] += dmat[i * n + j];
    total += mean[i];
    mean[i] /= (double)n;
  }
  total /= (double)(n * n);
  std::vector<double> pdp(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      pdp[i * n + j] = dmat[i * n + j] - mean[i] - mean[j] + total;
  auto top = symmetric_lambda_max(pdp, n);
  GramWitness w;
  w.lambda_max = top.value;
  w.eigenvector = std::move(top.vector);
  w.pass = top.value <= tol;
  w.sample_size = n;
  return w;
}

GramWitness gram_nd_check_kernel(const Group& g,
                                 const std::function<double(const GroupElement&)>& d,
                                 const std::vector<GroupElement>& sample, double tol) {
  std::size_t n = sample.size();
  if (n == 0) throw std::invalid_argument("gram check: empty sample");
  if (n > 512) throw std::invalid_argument("gram check: sample larger than 512");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (sample[i] == sample[j])
        throw std::invalid_argument("gram check: sample elements must be pairwise distinct");
  std::vector<double> dmat(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    GroupElement gi_inv = g.invert(sample[i]);
    for (std::size_t j = 0; j < n; ++j) dmat[i * n + j] = d(g.multiply(gi_inv, sample[j]));
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (std::abs(dmat[i * n + j] - dmat[j * n + i]) >
          1e-10 * (1.0 + std::abs(dmat[i * n + j])))
        throw std::invalid_argument("gram check: kernel is not symmetric on the sample");
  return projected_gram(dmat, n, tol);
}

GramWitness gram_nd_check(const LengthSpec& d, const std::vector<GroupElement>& sample,
                          double tol) {
  Group g(d.group());
  return gram_nd_check_kernel(
      g, [&](const GroupElement& e) { return d.evaluate(e); }, sample, tol);
}

std::vector<SchoenbergRow> schoenberg_psd_check(const LengthSpec& d,
                                                const std::vector<GroupElement>& sample,
                                                const std::vector<double>& t_grid, double tol) {
  Group g(d.group());
  std::size_t n = sample.size();
  if (n == 0) throw std::invalid_argument("schoenberg check: empty sample");
  if (n > 512) throw std::invalid_argument("schoenberg check: sample larger than 512");
  for (double t : t_grid)
    if (!(t > 0.0)) throw std::invalid_argument("schoenberg check: t values must be positive");
  std::vector<double> dmat(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    GroupElement gi_inv = g.invert(sample[i]);
    for (std::size_t j = 0; j < n; ++j)
      dmat[i * n + j] = d.evaluate(g.multiply(gi_inv, sample[j]));
  }
  std::vector<SchoenbergRow> rows;
  rows.reserve(t_grid.size());
  for (double t : t_grid) {
    std::vector<double> m(n * n);
    for (std::size_t i = 0; i < n * n; ++i) m[i] = std::exp(-t * dmat[i]);
    auto bottom = symmetric_lambda_min(m, n);
    rows.push_back({t, bottom.value, bottom.value >= -tol});
  }
  return rows;
}

// ---------------------------------------------------------------- poincare

SphereProfile sphere_profile(const LengthSpec& d, const Group& g, int r_max) {
  SphereProfile profile(r_max + 1);
  GroupElement el;
  stream_spheres(g, r_max, [&](int r, std::span<const std::int32_t> e) {
    el.data.assign(e.begin(), e.end());
    double v = d.evaluate(el);
    auto& row = profile[r];
    for (auto& [val, cnt] : row) {
      if (val == v) {
        ++cnt;
        return;
      }
    }
    row.emplace_back(v, 1);
  });
  for (auto& row : profile) std::sort(row.begin(), row.end());
  return profile;
}

namespace {

constexpr double kDecayMargin = 1e-3;

std::vector<double> sphere_sums(const SphereProfile& profile, double s) {
  std::vector<double> q(profile.size(), 0.0);
  for (std::size_t r = 0; r < profile.size(); ++r)
    for (auto& [val, cnt] : profile[r]) q[r] += (double)cnt * std::exp(-s * val);
  return q;
}

// convergent-looking: geometric decay of the last sphere sums, or dyadic
// condensation decay for polynomially shrinking terms
bool convergent_looking(const SphereProfile& profile, double s) {
  auto q = sphere_sums(profile, s);
  int r_max = (int)q.size() - 1;
  bool geometric = r_max >= 6;
  for (int r = r_max - 5; geometric && r < r_max; ++r) {
    if (!(q[r] > 0.0) || q[r + 1] / q[r] > 1.0 - kDecayMargin) geometric = false;
  }
  if (geometric) {
    // guard against slowly-varying tails that momentarily dip under the
    // margin: true geometric decay keeps the same per-step ratio at every
    // scale, so the window ratio must not beat the full-range average
    double rho = std::pow(q[r_max] / q[r_max - 5], 1.0 / 5.0);
    double gamma = std::pow(q[r_max] / q[1], 1.0 / (double)(r_max - 1));
    if (rho - gamma > 0.25 * (1.0 - rho)) geometric = false;
  }
  if (geometric) return true;
  int kmax = 0;
  while ((2 << kmax) <= r_max) ++kmax;
  int klo = std::max(0, kmax - 3);
  bool condensation = kmax > klo;
  for (int k = klo; condensation && k < kmax; ++k) {
    double a = q[1 << k], b = q[2 << k];
    if (!(a > 0.0) || 2.0 * b / a > 1.0 - kDecayMargin) condensation = false;
  }
  return condensation;
}

}  // namespace

PoincareEstimate poincare_from_profile(const SphereProfile& profile, double s_tolerance) {
  PoincareEstimate out;
  int r_max = (int)profile.size() - 1;
  if (r_max < 1) throw std::invalid_argument("poincare estimate: r_max must be >= 1");
  if (!(s_tolerance > 0.0)) throw std::invalid_argument("poincare estimate: bad tolerance");
  out.insufficient_data = r_max < 8;

  double vmax = 0.0;
  for (auto& row : profile)
    for (auto& [val, cnt] : row) vmax = std::max(vmax, val);
  if (vmax == 0.0) {
    out.degenerate = true;
    out.infinite = true;
    out.lower = out.upper = std::numeric_limits<double>::infinity();
    out.note = "d vanishes on the whole ball; the series diverges for every s";
    return out;
  }

  double lo = 0.0;
  if (convergent_looking(profile, 0.0)) {
    out.lower = out.upper = 0.0;
    out.note = "series already convergent-looking at s = 0";
    return out;
  }
  double hi = 1.0;
  const double s_cap = double(1 << 30);
  while (!convergent_looking(profile, hi)) {
    hi *= 2.0;
    if (hi > s_cap) {
      out.infinite = true;
      out.lower = lo;
      out.upper = std::numeric_limits<double>::infinity();
      out.note = "no convergent-looking s up to the search cap; exponent looks infinite";
      return out;
    }
  }
  while (hi - lo > s_tolerance) {
    double mid = 0.5 * (lo + hi);
    if (convergent_looking(profile, mid))
      hi = mid;
    else
      lo = mid;
  }
  out.lower = lo;
  out.upper = hi;
  return out;
}

PoincareEstimate poincare_estimate(const LengthSpec& d, const Group& g, int r_max,
                                   double s_tolerance) {
  if (!(d.group() == g.descriptor()))
    throw std::invalid_argument("poincare estimate: length spec and group disagree");
  return poincare_from_profile(sphere_profile(d, g, r_max), s_tolerance);
}

L2Threshold l2_threshold(const LengthSpec& d, const Group& g, int r_max, double s_tolerance) {
  L2Threshold out;
  out.base = poincare_estimate(d, g, r_max, s_tolerance);
  out.delta_half = out.base.infinite ? std::numeric_limits<double>::infinity()
                                     : 0.25 * (out.base.lower + out.base.upper);
  if (d.kind() == LengthKind::Word && d.group().family == Family::Free)
    out.exact_free_threshold = 0.5 * std::log(2.0 * d.group().rank - 1.0);
  return out;
}

// ---------------------------------------------------------------- dominance

DominanceFit dominance_fit(const LengthSpec& c, const LengthSpec& cprime, const Ball& ball,
                           double tol) {
  std::size_t n = ball.size();
  if (n == 0) throw std::invalid_argument("dominance fit: empty ball");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<double> xs(n), ys(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    GroupElement e = ball.element(i);
    double x = cprime.evaluate(e), y = c.evaluate(e);
    xs[i] = x;
    ys[i] = y;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double denom = (double)n * sxx - sx * sx;
  DominanceFit fit;
  if (std::abs(denom) < 1e-12 * (1.0 + sxx)) {
    fit.a = 0.0;
    fit.b = sy / (double)n;
  } else {
    fit.a = ((double)n * sxy - sx * sy) / denom;
    fit.b = (sy - fit.a * sx) / (double)n;
  }
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, ys[i] - fit.a * xs[i] - fit.b);
  fit.residual = worst;
  fit.line_dominates = worst <= tol;
  return fit;
}

double dominance_violation(const LengthSpec& c, const LengthSpec& cprime, double a, double b,
                           const Ball& ball) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::uint32_t i = 0; i < ball.size(); ++i) {
    GroupElement e = ball.element(i);
    worst = std::max(worst, c.evaluate(e) - a * cprime.evaluate(e) - b);
  }
  return worst;
}

}  // namespace ncheat
