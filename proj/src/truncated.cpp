#include "ncheat/truncated.hpp"

#include <algorithm>
#include <cmath>

#include "ncheat/rng.hpp"

namespace ncheat {

// ---------------------------------------------------------------- operator

void BallOperator::build_terms(const FourierElement& x, bool need_fwd, bool need_inv) {
  Group grp(x.group());
  const Cocycle& sigma = x.cocycle();
  real_only_ = sigma.is_trivial() && x.real_coefficients();
  terms_.reserve(x.terms().size());
  const std::size_t nd = domain_->size(), nc = codomain_->size();
  GroupElement v;
  for (auto& [w, c] : x.terms()) {
    Term t;
    t.w = w;
    t.coeff = c;
    GroupElement w_inv = grp.invert(w);
    if (need_fwd) {
      t.fwd.resize(nd);
      if (!sigma.is_trivial()) t.fwd_phase.resize(nd);
      for (std::uint32_t j = 0; j < nd; ++j) {
        auto u = domain_->view(j);
        grp.multiply_span(w.data, u, v);
        t.fwd[j] = codomain_->find(std::span<const std::int32_t>(v.data));
        if (!sigma.is_trivial()) t.fwd_phase[j] = sigma.eval_span(w.data, u);
      }
    }
    if (need_inv) {
      t.inv.resize(nc);
      if (!sigma.is_trivial()) t.inv_phase.resize(nc);
      for (std::uint32_t i = 0; i < nc; ++i) {
        grp.multiply_span(w_inv.data, codomain_->view(i), v);
        std::span<const std::int32_t> vs(v.data);
        t.inv[i] = domain_->find(vs);
        if (!sigma.is_trivial())
          t.inv_phase[i] = t.inv[i] == kNoIndex ? cplx(0.0) : sigma.eval_span(w.data, vs);
      }
    }
    terms_.push_back(std::move(t));
  }
}

BallOperator BallOperator::compression(const FourierElement& y,
                                       std::shared_ptr<const Ball> ball) {
  if (!(y.group() == ball->descriptor()))
    throw std::invalid_argument("ball operator: element and ball group disagree");
  BallOperator op;
  op.domain_ = ball;
  op.codomain_ = ball;
  op.build_terms(y, false, true);
  return op;
}

BallOperator BallOperator::map(const FourierElement& x, std::shared_ptr<const Ball> domain,
                               std::shared_ptr<const Ball> codomain) {
  if (!(x.group() == domain->descriptor()) || !(x.group() == codomain->descriptor()))
    throw std::invalid_argument("ball operator: element and ball group disagree");
  BallOperator op;
  op.domain_ = std::move(domain);
  op.codomain_ = std::move(codomain);
  op.build_terms(x, true, false);
  // the codomain must capture the full image of the domain
  for (auto& t : op.terms_)
    for (std::uint32_t j = 0; j < op.domain_->size(); ++j)
      if (t.fwd[j] == kNoIndex)
        throw std::invalid_argument("ball operator: codomain does not contain supp(x) * domain");
  return op;
}

void BallOperator::apply(std::span<const cplx> in, std::span<cplx> out) const {
  std::fill(out.begin(), out.end(), cplx(0.0));
  for (const Term& t : terms_) {
    const cplx c = t.coeff;
    if (!t.inv.empty()) {  // gather over the codomain
      const std::uint32_t* inv = t.inv.data();
      if (t.inv_phase.empty()) {
        for (std::size_t i = 0; i < out.size(); ++i) {
          std::uint32_t j = inv[i];
          if (j != kNoIndex) out[i] += c * in[j];
        }
      } else {
        for (std::size_t i = 0; i < out.size(); ++i) {
          std::uint32_t j = inv[i];
          if (j != kNoIndex) out[i] += c * t.inv_phase[i] * in[j];
        }
      }
    } else {  // scatter from the domain
      const std::uint32_t* fwd = t.fwd.data();
      if (t.fwd_phase.empty()) {
        for (std::size_t j = 0; j < in.size(); ++j) out[fwd[j]] += c * in[j];
      } else {
        for (std::size_t j = 0; j < in.size(); ++j) out[fwd[j]] += c * t.fwd_phase[j] * in[j];
      }
    }
  }
}

void BallOperator::apply_adjoint(std::span<const cplx> in, std::span<cplx> out) const {
  std::fill(out.begin(), out.end(), cplx(0.0));
  for (const Term& t : terms_) {
    if (t.fwd.empty())
      throw std::logic_error("ball operator: adjoint requires forward stencils");
    const std::uint32_t* fwd = t.fwd.data();
    const cplx c = std::conj(t.coeff);
    if (t.fwd_phase.empty()) {
      for (std::size_t j = 0; j < out.size(); ++j) out[j] += c * in[fwd[j]];
    } else {
      for (std::size_t j = 0; j < out.size(); ++j)
        out[j] += c * std::conj(t.fwd_phase[j]) * in[fwd[j]];
    }
  }
}

void BallOperator::apply_real(std::span<const double> in, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (const Term& t : terms_) {
    const double c = t.coeff.real();
    if (!t.inv.empty()) {
      const std::uint32_t* inv = t.inv.data();
      for (std::size_t i = 0; i < out.size(); ++i) {
        std::uint32_t j = inv[i];
        if (j != kNoIndex) out[i] += c * in[j];
      }
    } else {
      const std::uint32_t* fwd = t.fwd.data();
      for (std::size_t j = 0; j < in.size(); ++j) out[fwd[j]] += c * in[j];
    }
  }
}

void BallOperator::apply_adjoint_real(std::span<const double> in, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (const Term& t : terms_) {
    const std::uint32_t* fwd = t.fwd.data();
    const double c = t.coeff.real();
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += c * in[fwd[j]];
  }
}

void BallOperator::apply_weighted(std::span<const cplx> weights, std::span<const cplx> in,
                                  std::span<cplx> out) const {
  std::fill(out.begin(), out.end(), cplx(0.0));
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    const Term& t = terms_[k];
    if (t.fwd.empty())
      throw std::logic_error("ball operator: weighted apply requires forward stencils");
    const cplx c = weights[k];
    if (c == cplx(0.0)) continue;
    const std::uint32_t* fwd = t.fwd.data();
    if (t.fwd_phase.empty()) {
      for (std::size_t j = 0; j < in.size(); ++j) out[fwd[j]] += c * in[j];
    } else {
      for (std::size_t j = 0; j < in.size(); ++j) out[fwd[j]] += c * t.fwd_phase[j] * in[j];
    }
  }
}

void BallOperator::apply_adjoint_weighted(std::span<const cplx> weights,
                                          std::span<const cplx> in,
                                          std::span<cplx> out) const {
  std::fill(out.begin(), out.end(), cplx(0.0));
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    const Term& t = terms_[k];
    const cplx c = std::conj(weights[k]);
    if (c == cplx(0.0)) continue;
    const std::uint32_t* fwd = t.fwd.data();
    if (t.fwd_phase.empty()) {
      for (std::size_t j = 0; j < out.size(); ++j) out[j] += c * in[fwd[j]];
    } else {
      for (std::size_t j = 0; j < out.size(); ++j)
        out[j] += c * std::conj(t.fwd_phase[j]) * in[fwd[j]];
    }
  }
}

cplx BallOperator::term_pairing(std::size_t k, std::span<const cplx> domain_vec,
                                std::span<const cplx> codomain_vec) const {
  const Term& t = terms_[k];
  cplx acc(0.0);
  for (std::size_t j = 0; j < domain_vec.size(); ++j) {
    std::uint32_t i = t.fwd[j];
    if (i == kNoIndex) continue;
    cplx phase = t.fwd_phase.empty() ? cplx(1.0) : t.fwd_phase[j];
    acc += std::conj(codomain_vec[i]) * phase * domain_vec[j];
  }
  return acc;
}

std::vector<cplx> dense_truncated_matrix(const FourierElement& x, const Ball& ball) {
  std::size_t n = ball.size();
  if (n > 4096) throw std::invalid_argument("dense truncated matrix limited to |B| <= 4096");
  Group grp(x.group());
  std::vector<cplx> m(n * n, cplx(0.0));
  for (auto& [w, c] : x.terms()) {
    for (std::uint32_t j = 0; j < n; ++j) {
      GroupElement u = ball.element(j);
      std::uint32_t i = ball.find(grp.multiply(w, u));
      if (i != kNoIndex) m[(std::size_t)i * n + j] += c * x.cocycle().eval(w, u);
    }
  }
  return m;
}

// ---------------------------------------------------------------- norms

int support_radius(const FourierElement& x) {
  Group grp(x.group());
  long best = 0;
  bool need_bfs = false;
  for (auto& [g, c] : x.terms()) {
    long l = grp.closed_form_word_length(g);
    if (l < 0) {
      need_bfs = true;
      break;
    }
    best = std::max(best, l);
  }
  if (!need_bfs) return (int)best;
  for (int r = 4; r <= 512; r += 4) {
    Ball ball = Ball::build(grp, r);
    bool all = true;
    long worst = 0;
    for (auto& [g, c] : x.terms()) {
      std::uint32_t i = ball.find(g);
      if (i == kNoIndex) {
        all = false;
        break;
      }
      worst = std::max(worst, (long)ball.length_of(i));
    }
    if (all) return (int)worst;
  }
  throw std::runtime_error("support radius exceeds ball search limit");
}

namespace {

struct PowerOutcome {
  double lambda = 0.0;
  int iterations = 0;
  bool converged = false;
};

// power iteration for a hermitian PSD operator given as an apply callback;
// lambda is a Rayleigh quotient, hence a certified lower bound
template <class Vec, class Apply, class Dot, class Norm2>
PowerOutcome run_power(Vec& v, Vec& w, Apply&& H, Dot&& dot, Norm2&& nrm2, double tol,
                       int max_iters) {
  PowerOutcome out;
  double n0 = nrm2(v);
  if (n0 == 0.0) return out;
  double prev = -1.0;
  int hits = 0;
  for (int it = 1; it <= max_iters; ++it) {
    double inv = 1.0 / nrm2(v);
    for (auto& x : v) x *= inv;
    H(v, w);
    double lambda = dot(v, w);
    out.lambda = lambda;
    out.iterations = it;
    if (lambda <= 0.0) {
      // PSD up to rounding; a nonpositive Rayleigh quotient means the image
      // collapsed and the estimate is the current quotient
      out.converged = true;
      out.lambda = std::max(lambda, 0.0);
      return out;
    }
    if (prev >= 0.0 && std::abs(lambda - prev) <= tol * std::max(lambda, 1e-300)) {
      if (++hits >= 2) {
        out.converged = true;
        return out;
      }
    } else {
      hits = 0;
    }
    prev = lambda;
    std::swap(v, w);
  }
  return out;
}

PowerOutcome power_top_eigen(const BallOperator& H_or_A, bool two_pass, std::uint64_t seed,
                             double tol, int max_iters) {
  const std::size_t n = H_or_A.domain_size();
  Rng rng(seed);
  if (H_or_A.real_only()) {
    std::vector<double> v(n), w(n), mid;
    if (two_pass) mid.resize(H_or_A.codomain_size());
    for (auto& x : v) x = rng.normal();
    auto apply = [&](const std::vector<double>& a, std::vector<double>& b) {
      if (two_pass) {
        H_or_A.apply_real(a, mid);
        H_or_A.apply_adjoint_real(mid, b);
      } else {
        H_or_A.apply_real(a, b);
      }
    };
    auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
      double s = 0;
      for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
      return s;
    };
    auto nrm2 = [&](const std::vector<double>& a) { return std::sqrt(dot(a, a)); };
    return run_power(v, w, apply, dot, nrm2, tol, max_iters);
  }
  std::vector<cplx> v(n), w(n), mid;
  if (two_pass) mid.resize(H_or_A.codomain_size());
  for (auto& x : v) x = rng.normal_complex();
  auto apply = [&](const std::vector<cplx>& a, std::vector<cplx>& b) {
    if (two_pass) {
      H_or_A.apply(a, mid);
      H_or_A.apply_adjoint(mid, b);
    } else {
      H_or_A.apply(a, b);
    }
  };
  auto dot = [](const std::vector<cplx>& a, const std::vector<cplx>& b) {
    cplx s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s.real();
  };
  auto nrm2 = [](const std::vector<cplx>& a) {
    double s = 0;
    for (auto& x : a) s += std::norm(x);
    return std::sqrt(s);
  };
  return run_power(v, w, apply, dot, nrm2, tol, max_iters);
}

constexpr std::size_t kStencilSupportLimit = 64;

}  // namespace

NormEstimate norm_estimate(const FourierElement& x, int R, std::uint64_t seed, double tol,
                           int max_iters, std::size_t cap, std::shared_ptr<const Ball> domain,
                           std::shared_ptr<const Ball> codomain) {
  if (R < 0) throw std::invalid_argument("norm estimate: negative ball radius");
  NormEstimate est;
  est.radius = R;
  est.seed = seed;
  est.l1_upper = l1_norm(x);
  if (x.terms().empty()) {
    est.converged = true;
    return est;
  }
  Group grp(x.group());
  if (domain && (!(domain->descriptor() == x.group()) || domain->radius() != R))
    throw std::invalid_argument("norm estimate: supplied ball does not match");
  std::shared_ptr<const Ball> ball =
      domain ? domain : std::make_shared<Ball>(Ball::build(grp, R, cap));

  // the compressed x*x route is preferred while its stencil arrays stay small;
  // otherwise apply A and A* through a codomain ball
  constexpr std::size_t kStencilEntryBudget = 60'000'000;
  bool stencil_route = false;
  FourierElement y = FourierElement::zero(x.group(), x.cocycle());
  if (x.support_size() <= kStencilSupportLimit) {
    y = multiply_elements(adjoint(x), x);
    stencil_route = y.support_size() * ball->size() <= kStencilEntryBudget;
  }
  PowerOutcome po;
  if (stencil_route) {
    BallOperator H = BallOperator::compression(y, ball);
    po = power_top_eigen(H, false, seed, tol, max_iters);
  } else {
    int r0 = support_radius(x);
    if (codomain) {
      if (!(codomain->descriptor() == x.group()) || codomain->radius() < R + r0)
        throw std::invalid_argument("norm estimate: supplied codomain is too small");
    } else {
      codomain = std::make_shared<Ball>(Ball::build(grp, R + r0, cap));
    }
    BallOperator A = BallOperator::map(x, ball, codomain);
    po = power_top_eigen(A, true, seed, tol, max_iters);
  }
  est.lambda = po.lambda;
  est.nu = std::sqrt(std::max(po.lambda, 0.0));
  est.iterations = po.iterations;
  est.converged = po.converged;
  return est;
}

NormEstimate partial_sum_norm(const FourierElement& x,
                              const std::function<bool(const GroupElement&)>& keep, int R,
                              std::uint64_t seed, double tol, int max_iters, std::size_t cap,
                              std::shared_ptr<const Ball> domain,
                              std::shared_ptr<const Ball> codomain) {
  std::vector<std::pair<GroupElement, cplx>> kept;
  for (auto& [g, c] : x.terms())
    if (keep(g)) kept.emplace_back(g, c);
  FourierElement restricted =
      FourierElement::from_terms(x.group(), x.cocycle(), std::move(kept));
  return norm_estimate(restricted, R, seed, tol, max_iters, cap, std::move(domain),
                       std::move(codomain));
}

}  // namespace ncheat
