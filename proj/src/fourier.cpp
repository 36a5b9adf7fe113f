#include "ncheat/fourier.hpp"

#include <algorithm>
#include <cmath>

#include "ncheat/rng.hpp"

namespace ncheat {

// ---------------------------------------------------------------- cocycle

Cocycle Cocycle::trivial(const GroupDescriptor& g) {
  Cocycle c;
  c.group_ = g;
  c.trivial_ = true;
  return c;
}

Cocycle Cocycle::theta(const GroupDescriptor& g, std::vector<double> theta) {
  if (g.family != Family::FreeAbelian)
    throw std::invalid_argument("theta cocycles are only defined on zn groups");
  std::size_t n = (std::size_t)g.rank;
  if (theta.size() != n * n)
    throw std::invalid_argument("theta matrix must be rank x rank, row-major");
  const double two_pi = 6.283185307179586476925286766559;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double v = theta[i * n + j];
      if (!(v >= 0.0 && v < two_pi))
        throw std::invalid_argument("theta entries must lie in [0, 2*pi)");
      double sum = std::fmod(theta[i * n + j] + theta[j * n + i], two_pi);
      if (std::min(sum, two_pi - sum) > 1e-9)
        throw std::invalid_argument("theta matrix must be skew-symmetric modulo 2*pi");
    }
  }
  Cocycle c;
  c.group_ = g;
  c.trivial_ = true;
  for (double v : theta)
    if (v != 0.0) c.trivial_ = false;
  c.theta_ = std::move(theta);
  return c;
}

std::string Cocycle::name() const {
  if (trivial_) return "trivial";
  std::string s = "theta:";
  for (std::size_t i = 0; i < theta_.size(); ++i) {
    if (i) s += ",";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", theta_[i]);
    s += buf;
  }
  return s;
}

double Cocycle::phase(const GroupElement& a, const GroupElement& b) const {
  if (trivial_) return 0.0;
  std::size_t n = (std::size_t)group_.rank;
  double p = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (a.data[i] == 0) continue;
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += theta_[i * n + j] * (double)b.data[j];
    p += (double)a.data[i] * row;
  }
  return p;
}

cplx Cocycle::eval(const GroupElement& a, const GroupElement& b) const {
  if (trivial_) return {1.0, 0.0};
  double p = phase(a, b);
  return {std::cos(p), std::sin(p)};
}

cplx Cocycle::eval_span(std::span<const std::int32_t> a, std::span<const std::int32_t> b) const {
  if (trivial_) return {1.0, 0.0};
  std::size_t n = (std::size_t)group_.rank;
  double p = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] == 0) continue;
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += theta_[i * n + j] * (double)b[j];
    p += (double)a[i] * row;
  }
  return {std::cos(p), std::sin(p)};
}

bool operator==(const Cocycle& a, const Cocycle& b) {
  return a.group_ == b.group_ && a.trivial_ == b.trivial_ && a.theta_ == b.theta_;
}

double cocycle_identity_residual(const Cocycle& sigma, int trials, std::uint64_t seed,
                                 int ball_radius) {
  Group grp(sigma.group());
  Ball ball = Ball::build(grp, ball_radius);
  Rng rng(seed);
  double worst = 0.0;
  for (int i = 0; i < trials; ++i) {
    GroupElement g = ball.element((std::uint32_t)rng.below(ball.size()));
    GroupElement h = ball.element((std::uint32_t)rng.below(ball.size()));
    GroupElement k = ball.element((std::uint32_t)rng.below(ball.size()));
    cplx lhs = sigma.eval(g, h) * sigma.eval(grp.multiply(g, h), k);
    cplx rhs = sigma.eval(g, grp.multiply(h, k)) * sigma.eval(h, k);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

// ---------------------------------------------------------------- element

FourierElement::FourierElement(GroupDescriptor g, Cocycle sigma)
    : group_(std::move(g)), cocycle_(std::move(sigma)) {
  if (!(cocycle_.group() == group_))
    throw std::invalid_argument("cocycle lives on a different group");
}

FourierElement FourierElement::zero(const GroupDescriptor& g, const Cocycle& sigma) {
  return FourierElement(g, sigma);
}

FourierElement FourierElement::lambda(const GroupDescriptor& g, const Cocycle& sigma,
                                      const GroupElement& e, cplx c) {
  FourierElement x(g, sigma);
  x.add_term(e, c);
  x.normalize();
  return x;
}

FourierElement FourierElement::from_terms(const GroupDescriptor& g, const Cocycle& sigma,
                                          std::vector<std::pair<GroupElement, cplx>> terms) {
  FourierElement x(g, sigma);
  x.terms_ = std::move(terms);
  x.dirty_ = true;
  x.normalize();
  return x;
}

FourierElement& FourierElement::add_term(const GroupElement& e, cplx c) {
  terms_.emplace_back(e, c);
  dirty_ = true;
  return *this;
}

void FourierElement::normalize() {
  Group grp(group_);
  for (auto& [e, c] : terms_) grp.check_element(e);
  std::sort(terms_.begin(), terms_.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::pair<GroupElement, cplx>> merged;
  merged.reserve(terms_.size());
  for (auto& [e, c] : terms_) {
    if (!merged.empty() && merged.back().first == e)
      merged.back().second += c;
    else
      merged.emplace_back(e, c);
  }
  std::erase_if(merged, [](const auto& t) { return t.second == cplx(0.0, 0.0); });
  terms_ = std::move(merged);
  dirty_ = false;
}

cplx FourierElement::coeff(const GroupElement& e) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), e,
                             [](const auto& t, const GroupElement& key) { return t.first < key; });
  if (it != terms_.end() && it->first == e) return it->second;
  return {0.0, 0.0};
}

bool FourierElement::real_coefficients() const {
  for (auto& [e, c] : terms_)
    if (c.imag() != 0.0) return false;
  return true;
}

static void require_compatible(const FourierElement& x, const FourierElement& y) {
  if (!(x.group() == y.group()))
    throw std::invalid_argument("fourier elements live on different groups");
  if (!(x.cocycle() == y.cocycle()))
    throw std::invalid_argument("fourier elements carry different cocycles");
}

FourierElement multiply_elements(const FourierElement& x, const FourierElement& y) {
  require_compatible(x, y);
  Group grp(x.group());
  FourierElement out(x.group(), x.cocycle());
  for (auto& [g, xc] : x.terms()) {
    for (auto& [h, yc] : y.terms()) {
      // Lambda(g) Lambda(h) = sigma(g, h) Lambda(gh)
      out.add_term(grp.multiply(g, h), xc * yc * x.cocycle().eval(g, h));
    }
  }
  out.normalize();
  return out;
}

FourierElement adjoint(const FourierElement& x) {
  Group grp(x.group());
  FourierElement out(x.group(), x.cocycle());
  for (auto& [g, c] : x.terms()) {
    // Lambda(g)^* = conj(sigma(g, g^-1)) Lambda(g^-1)
    GroupElement gi = grp.invert(g);
    out.add_term(gi, std::conj(c) * std::conj(x.cocycle().eval(g, gi)));
  }
  out.normalize();
  return out;
}

FourierElement add(const FourierElement& x, const FourierElement& y) {
  require_compatible(x, y);
  FourierElement out(x.group(), x.cocycle());
  for (auto& [g, c] : x.terms()) out.add_term(g, c);
  for (auto& [g, c] : y.terms()) out.add_term(g, c);
  out.normalize();
  return out;
}

FourierElement scale(const FourierElement& x, cplx c) {
  FourierElement out(x.group(), x.cocycle());
  for (auto& [g, xc] : x.terms()) out.add_term(g, xc * c);
  out.normalize();
  return out;
}

cplx trace_tau(const FourierElement& x) {
  Group grp(x.group());
  return x.coeff(grp.identity());
}

double l1_norm(const FourierElement& x) {
  double s = 0.0;
  for (auto& [g, c] : x.terms()) s += std::abs(c);
  return s;
}

double l2_norm(const FourierElement& x) {
  double s = 0.0;
  for (auto& [g, c] : x.terms()) s += std::norm(c);
  return std::sqrt(s);
}

}  // namespace ncheat
