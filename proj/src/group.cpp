#include "ncheat/group.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

namespace ncheat {

// ---------------------------------------------------------------- tables

void FiniteGroupTable::validate() const {
  if (order < 1) throw std::invalid_argument("factor table: order must be >= 1");
  if (identity < 0 || identity >= order)
    throw std::invalid_argument("factor table: identity index out of range");
  if ((int)table.size() != order * order)
    throw std::invalid_argument("factor table: size != order^2");
  for (int v : table)
    if (v < 0 || v >= order) throw std::invalid_argument("factor table: entry out of range");
  for (int a = 0; a < order; ++a) {
    if (mul(identity, a) != a || mul(a, identity) != a)
      throw std::invalid_argument("factor table: designated identity is not a unit");
  }
  for (int a = 0; a < order; ++a) {
    bool has_inv = false;
    for (int b = 0; b < order; ++b)
      if (mul(a, b) == identity && mul(b, a) == identity) has_inv = true;
    if (!has_inv) throw std::invalid_argument("factor table: element without inverse");
  }
  for (int a = 0; a < order; ++a)
    for (int b = 0; b < order; ++b)
      for (int c = 0; c < order; ++c)
        if (mul(mul(a, b), c) != mul(a, mul(b, c)))
          throw std::invalid_argument("factor table: not associative");
}

int FiniteGroupTable::inverse(int a) const {
  for (int b = 0; b < order; ++b)
    if (mul(a, b) == identity) return b;
  throw std::logic_error("factor table: inverse not found");
}

// ---------------------------------------------------------------- descriptor

GroupDescriptor GroupDescriptor::free_abelian(int n) {
  if (n < 1) throw std::invalid_argument("FreeAbelian rank must be positive");
  GroupDescriptor d;
  d.family = Family::FreeAbelian;
  d.rank = n;
  return d;
}

GroupDescriptor GroupDescriptor::free_group(int k) {
  if (k < 2) throw std::invalid_argument("Free rank must be >= 2");
  GroupDescriptor d;
  d.family = Family::Free;
  d.rank = k;
  return d;
}

GroupDescriptor GroupDescriptor::free_product(std::vector<FiniteGroupTable> tables) {
  if (tables.size() < 2) throw std::invalid_argument("free product needs >= 2 factors");
  for (auto& t : tables) {
    t.validate();
    if (t.order < 2) throw std::invalid_argument("free product factors must be nontrivial");
  }
  GroupDescriptor d;
  d.family = Family::FreeProductOfFinite;
  d.rank = (int)tables.size();
  d.factors = std::move(tables);
  return d;
}

GroupDescriptor GroupDescriptor::heisenberg3() {
  GroupDescriptor d;
  d.family = Family::Heisenberg3;
  d.rank = 3;
  return d;
}

std::string GroupDescriptor::canonical_name() const {
  std::ostringstream os;
  switch (family) {
    case Family::FreeAbelian: os << "zn:" << rank; break;
    case Family::Free: os << "free:" << rank; break;
    case Family::Heisenberg3: os << "heis3"; break;
    case Family::FreeProductOfFinite: {
      os << "fpf:";
      for (std::size_t i = 0; i < factors.size(); ++i) {
        if (i) os << ",";
        os << factors[i].order << "@" << factors[i].identity;
        os << "[";
        for (std::size_t j = 0; j < factors[i].table.size(); ++j) {
          if (j) os << ".";
          os << factors[i].table[j];
        }
        os << "]";
      }
      break;
    }
  }
  return os.str();
}

bool operator==(const GroupDescriptor& a, const GroupDescriptor& b) {
  if (a.family != b.family || a.rank != b.rank) return false;
  if (a.factors.size() != b.factors.size()) return false;
  for (std::size_t i = 0; i < a.factors.size(); ++i) {
    if (a.factors[i].order != b.factors[i].order ||
        a.factors[i].identity != b.factors[i].identity ||
        a.factors[i].table != b.factors[i].table)
      return false;
  }
  return true;
}

// ---------------------------------------------------------------- group ops

Group::Group(GroupDescriptor desc) : desc_(std::move(desc)) {
  switch (desc_.family) {
    case Family::FreeAbelian:
      for (int i = 0; i < desc_.rank; ++i)
        for (int s : {+1, -1}) {
          GroupElement e;
          e.data.assign(desc_.rank, 0);
          e.data[i] = s;
          generators_.push_back(std::move(e));
        }
      break;
    case Family::Free:
      for (int i = 1; i <= desc_.rank; ++i)
        for (int s : {+1, -1}) generators_.push_back(GroupElement{{s * i}});
      break;
    case Family::FreeProductOfFinite:
      for (int f = 0; f < (int)desc_.factors.size(); ++f)
        for (int e = 0; e < desc_.factors[f].order; ++e)
          if (e != desc_.factors[f].identity)
            generators_.push_back(GroupElement{{f, e}});
      break;
    case Family::Heisenberg3:
      generators_.push_back(GroupElement{{1, 0, 0}});
      generators_.push_back(GroupElement{{-1, 0, 0}});
      generators_.push_back(GroupElement{{0, 1, 0}});
      generators_.push_back(GroupElement{{0, -1, 0}});
      break;
  }
}

GroupElement Group::identity() const {
  switch (desc_.family) {
    case Family::FreeAbelian: return GroupElement{std::vector<std::int32_t>(desc_.rank, 0)};
    case Family::Free: return GroupElement{};
    case Family::FreeProductOfFinite: return GroupElement{};
    case Family::Heisenberg3: return GroupElement{{0, 0, 0}};
  }
  return GroupElement{};
}

bool Group::is_normal_form(const GroupElement& a) const {
  switch (desc_.family) {
    case Family::FreeAbelian: return (int)a.data.size() == desc_.rank;
    case Family::Free: {
      for (std::int32_t x : a.data)
        if (x == 0 || std::abs(x) > desc_.rank) return false;
      for (std::size_t i = 0; i + 1 < a.data.size(); ++i)
        if (a.data[i] == -a.data[i + 1]) return false;
      return true;
    }
    case Family::FreeProductOfFinite: {
      if (a.data.size() % 2 != 0) return false;
      int prev_factor = -1;
      for (std::size_t i = 0; i < a.data.size(); i += 2) {
        int f = a.data[i], e = a.data[i + 1];
        if (f < 0 || f >= (int)desc_.factors.size()) return false;
        if (e < 0 || e >= desc_.factors[f].order) return false;
        if (e == desc_.factors[f].identity) return false;
        if (f == prev_factor) return false;
        prev_factor = f;
      }
      return true;
    }
    case Family::Heisenberg3: return a.data.size() == 3;
  }
  return false;
}

void Group::check_element(const GroupElement& a) const {
  if (!is_normal_form(a))
    throw std::invalid_argument("element is not a normal form for group " +
                                desc_.canonical_name());
}

GroupElement Group::multiply(const GroupElement& a, const GroupElement& b) const {
  check_element(a);
  check_element(b);
  switch (desc_.family) {
    case Family::FreeAbelian: {
      GroupElement out = a;
      for (int i = 0; i < desc_.rank; ++i) out.data[i] += b.data[i];
      return out;
    }
    case Family::Free: {
      GroupElement out = a;
      for (std::int32_t x : b.data) {
        if (!out.data.empty() && out.data.back() == -x)
          out.data.pop_back();
        else
          out.data.push_back(x);
      }
      return out;
    }
    case Family::FreeProductOfFinite: {
      GroupElement out = a;
      std::size_t i = 0;
      while (i < b.data.size()) {
        int f = b.data[i], e = b.data[i + 1];
        if (!out.data.empty() && out.data[out.data.size() - 2] == f) {
          const auto& t = desc_.factors[f];
          int merged = t.mul((int)out.data.back(), e);
          if (merged == t.identity) {
            out.data.pop_back();
            out.data.pop_back();
          } else {
            out.data.back() = merged;
          }
        } else {
          out.data.push_back(f);
          out.data.push_back(e);
        }
        i += 2;
      }
      return out;
    }
    case Family::Heisenberg3: {
      // (a,b,c)(a',b',c') = (a+a', b+b', c+c'+a b')
      GroupElement out;
      out.data = {a.data[0] + b.data[0], a.data[1] + b.data[1],
                  a.data[2] + b.data[2] + a.data[0] * b.data[1]};
      return out;
    }
  }
  return GroupElement{};
}

void Group::multiply_span(std::span<const std::int32_t> a, std::span<const std::int32_t> b,
                          GroupElement& out) const {
  switch (desc_.family) {
    case Family::FreeAbelian: {
      out.data.assign(a.begin(), a.end());
      for (int i = 0; i < desc_.rank; ++i) out.data[i] += b[i];
      return;
    }
    case Family::Free: {
      out.data.assign(a.begin(), a.end());
      for (std::int32_t x : b) {
        if (!out.data.empty() && out.data.back() == -x)
          out.data.pop_back();
        else
          out.data.push_back(x);
      }
      return;
    }
    case Family::FreeProductOfFinite: {
      out.data.assign(a.begin(), a.end());
      std::size_t i = 0;
      while (i < b.size()) {
        int f = b[i], e = b[i + 1];
        if (!out.data.empty() && out.data[out.data.size() - 2] == f) {
          const auto& t = desc_.factors[f];
          int merged = t.mul((int)out.data.back(), e);
          if (merged == t.identity) {
            out.data.pop_back();
            out.data.pop_back();
          } else {
            out.data.back() = merged;
          }
        } else {
          out.data.push_back(f);
          out.data.push_back(e);
        }
        i += 2;
      }
      return;
    }
    case Family::Heisenberg3: {
      std::int32_t c0 = a[0] + b[0], c1 = a[1] + b[1], c2 = a[2] + b[2] + a[0] * b[1];
      out.data.assign({c0, c1, c2});
      return;
    }
  }
}

GroupElement Group::invert(const GroupElement& a) const {
  check_element(a);
  switch (desc_.family) {
    case Family::FreeAbelian: {
      GroupElement out = a;
      for (auto& x : out.data) x = -x;
      return out;
    }
    case Family::Free: {
      GroupElement out;
      out.data.reserve(a.data.size());
      for (auto it = a.data.rbegin(); it != a.data.rend(); ++it) out.data.push_back(-*it);
      return out;
    }
    case Family::FreeProductOfFinite: {
      GroupElement out;
      out.data.reserve(a.data.size());
      for (std::size_t i = a.data.size(); i >= 2; i -= 2) {
        int f = a.data[i - 2], e = a.data[i - 1];
        out.data.push_back(f);
        out.data.push_back(desc_.factors[f].inverse(e));
      }
      return out;
    }
    case Family::Heisenberg3: {
      GroupElement out;
      out.data = {-a.data[0], -a.data[1], a.data[0] * a.data[1] - a.data[2]};
      return out;
    }
  }
  return GroupElement{};
}

long Group::closed_form_word_length(const GroupElement& a) const {
  switch (desc_.family) {
    case Family::FreeAbelian: {
      long s = 0;
      for (std::int32_t x : a.data) s += std::abs((long)x);
      return s;
    }
    case Family::Free: return (long)a.data.size();
    case Family::FreeProductOfFinite: return (long)(a.data.size() / 2);
    case Family::Heisenberg3: return -1;
  }
  return -1;
}

std::string Group::format(const GroupElement& a) const {
  std::ostringstream os;
  switch (desc_.family) {
    case Family::FreeAbelian:
    case Family::Heisenberg3: {
      os << "(";
      for (std::size_t i = 0; i < a.data.size(); ++i) {
        if (i) os << ",";
        os << a.data[i];
      }
      os << ")";
      break;
    }
    case Family::Free: {
      if (a.data.empty()) return "e";
      for (std::size_t i = 0; i < a.data.size(); ++i) {
        if (i) os << ".";
        int x = a.data[i];
        os << char('a' + std::abs(x) - 1);
        if (x < 0) os << "^-1";
      }
      break;
    }
    case Family::FreeProductOfFinite: {
      if (a.data.empty()) return "e";
      for (std::size_t i = 0; i < a.data.size(); i += 2) {
        if (i) os << ".";
        os << "g" << a.data[i] << ":" << a.data[i + 1];
      }
      break;
    }
  }
  return os.str();
}

// ---------------------------------------------------------------- hashing

std::uint64_t hash_span(std::span<const std::int32_t> s) {
  std::uint64_t h = 0x9e3779b97f4a7c15ull ^ (std::uint64_t)s.size();
  for (std::int32_t v : s) {
    h ^= (std::uint64_t)(std::uint32_t)v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h *= 0xff51afd7ed558ccdull;
    h ^= h >> 33;
  }
  return h;
}

namespace {

// flat list of int32 spans; avoids one allocation per element during BFS
struct FlatList {
  std::vector<std::int32_t> data;
  std::vector<std::uint32_t> off{0};

  std::size_t size() const { return off.size() - 1; }
  void push(std::span<const std::int32_t> s) {
    data.insert(data.end(), s.begin(), s.end());
    off.push_back((std::uint32_t)data.size());
  }
  std::span<const std::int32_t> get(std::size_t i) const {
    return {data.data() + off[i], off[i + 1] - off[i]};
  }
  void clear() {
    data.clear();
    off.assign(1, 0);
  }
};

bool span_less(std::span<const std::int32_t> a, std::span<const std::int32_t> b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

bool span_eq(std::span<const std::int32_t> a, std::span<const std::int32_t> b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin());
}

// open-addressing set of spans living in an external arena
struct SpanSet {
  const FlatList* list = nullptr;
  std::vector<std::uint32_t> slots;
  std::uint64_t mask = 0;
  std::size_t count = 0;

  void reset(const FlatList* l, std::size_t expected) {
    list = l;
    std::size_t cap = 16;
    while (cap < expected * 2 + 8) cap <<= 1;
    slots.assign(cap, kNoIndex);
    mask = cap - 1;
    count = 0;
  }
  void grow() {
    std::vector<std::uint32_t> old = std::move(slots);
    slots.assign(old.size() * 2, kNoIndex);
    mask = slots.size() - 1;
    for (std::uint32_t idx : old)
      if (idx != kNoIndex) insert_raw(idx);
  }
  void insert_raw(std::uint32_t idx) {
    std::uint64_t h = hash_span(list->get(idx)) & mask;
    while (slots[h] != kNoIndex) h = (h + 1) & mask;
    slots[h] = idx;
  }
  bool contains(std::span<const std::int32_t> s) const {
    std::uint64_t h = hash_span(s) & mask;
    while (slots[h] != kNoIndex) {
      if (span_eq(list->get(slots[h]), s)) return true;
      h = (h + 1) & mask;
    }
    return false;
  }
  // inserts s (already pushed to list as index idx) unless present
  bool insert_if_absent(std::span<const std::int32_t> s, std::uint32_t idx) {
    if (2 * (count + 1) > slots.size()) grow();
    std::uint64_t h = hash_span(s) & mask;
    while (slots[h] != kNoIndex) {
      if (span_eq(list->get(slots[h]), s)) return false;
      h = (h + 1) & mask;
    }
    slots[h] = idx;
    ++count;
    return true;
  }
};

void mul_into(const Group& g, const GroupElement& gen, std::span<const std::int32_t> w,
              GroupElement& scratch) {
  // left-multiplication gen * w without validation; hot path of BFS
  const auto& desc = g.descriptor();
  scratch.data.clear();
  switch (desc.family) {
    case Family::FreeAbelian: {
      scratch.data.assign(w.begin(), w.end());
      for (int i = 0; i < desc.rank; ++i) scratch.data[i] += gen.data[i];
      break;
    }
    case Family::Free: {
      if (!w.empty() && gen.data[0] == -w[0]) {
        scratch.data.assign(w.begin() + 1, w.end());
      } else {
        scratch.data.reserve(w.size() + 1);
        scratch.data.push_back(gen.data[0]);
        scratch.data.insert(scratch.data.end(), w.begin(), w.end());
      }
      break;
    }
    case Family::FreeProductOfFinite: {
      int f = gen.data[0], e = gen.data[1];
      if (!w.empty() && w[0] == f) {
        const auto& t = desc.factors[f];
        int merged = t.mul(e, w[1]);
        if (merged == t.identity) {
          scratch.data.assign(w.begin() + 2, w.end());
        } else {
          scratch.data.reserve(w.size());
          scratch.data.push_back(f);
          scratch.data.push_back(merged);
          scratch.data.insert(scratch.data.end(), w.begin() + 2, w.end());
        }
      } else {
        scratch.data.reserve(w.size() + 2);
        scratch.data.push_back(f);
        scratch.data.push_back(e);
        scratch.data.insert(scratch.data.end(), w.begin(), w.end());
      }
      break;
    }
    case Family::Heisenberg3: {
      scratch.data = {gen.data[0] + w[0], gen.data[1] + w[1],
                      gen.data[2] + w[2] + gen.data[0] * w[1]};
      break;
    }
  }
}

}  // namespace

// ---------------------------------------------------------------- ball

BallCapacityError::BallCapacityError(int r, std::size_t cap, std::size_t reached)
    : std::runtime_error("ball of radius " + std::to_string(r) + " exceeds the element cap (" +
                         std::to_string(reached) + " > " + std::to_string(cap) + ")"),
      radius(r) {}

struct BallCacheIo {
  static bool load(Ball& b, const std::string& path);
  static void store(const Ball& b, const std::string& path);
};

std::uint32_t Ball::find(std::span<const std::int32_t> e) const {
  std::uint64_t h = hash_span(e) & slot_mask_;
  while (slots_[h] != kNoIndex) {
    std::uint32_t idx = slots_[h];
    auto v = view(idx);
    if (v.size() == e.size() && std::equal(v.begin(), v.end(), e.begin())) return idx;
    h = (h + 1) & slot_mask_;
  }
  return kNoIndex;
}

int Ball::length_of(std::uint32_t i) const {
  auto it = std::upper_bound(sphere_offsets_.begin(), sphere_offsets_.end(), i);
  return (int)(it - sphere_offsets_.begin()) - 1;
}

std::vector<std::size_t> Ball::sphere_sizes() const {
  std::vector<std::size_t> out(sphere_count());
  for (int r = 0; r <= radius_; ++r) out[r] = sphere_size(r);
  return out;
}

void Ball::build_index() {
  std::size_t n = size();
  std::size_t cap = 16;
  while (cap < n * 2 + 8) cap <<= 1;
  slots_.assign(cap, kNoIndex);
  slot_mask_ = cap - 1;
  for (std::uint32_t i = 0; i < n; ++i) {
    std::uint64_t h = hash_span(view(i)) & slot_mask_;
    while (slots_[h] != kNoIndex) h = (h + 1) & slot_mask_;
    slots_[h] = i;
  }
}

Ball Ball::build(const Group& g, int radius, std::size_t cap, const std::string& cache_dir) {
  if (radius < 0) throw std::invalid_argument("ball radius must be >= 0");

  std::string dir = cache_dir;
  if (dir.empty()) {
    if (const char* env = std::getenv("NCHEAT_CACHE_DIR")) dir = env;
  }
  std::string cache_path;
  if (!dir.empty()) {
    std::uint64_t key = 1469598103934665603ull;
    std::string id = g.descriptor().canonical_name() + "#" + std::to_string(radius);
    for (char c : id) {
      key ^= (unsigned char)c;
      key *= 1099511628211ull;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "ball-%016llx.bin", (unsigned long long)key);
    cache_path = dir + "/" + buf;
    Ball cached;
    cached.desc_ = g.descriptor();
    if (BallCacheIo::load(cached, cache_path)) {
      if (cached.radius_ == radius && cached.size() <= cap) {
        cached.build_index();
        return cached;
      }
    }
  }

  Ball b;
  b.desc_ = g.descriptor();
  b.radius_ = radius;

  GroupElement id = g.identity();
  b.arena_.assign(id.data.begin(), id.data.end());
  b.offsets_ = {0, (std::uint32_t)id.data.size()};
  b.sphere_offsets_ = {0, 1};
  b.build_index();

  FlatList frontier;
  frontier.push(std::span(id.data));
  GroupElement scratch;

  for (int r = 1; r <= radius; ++r) {
    FlatList next;
    SpanSet next_set;
    next_set.reset(&next, frontier.size() * 3 + 8);
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      for (const auto& s : g.generators()) {
        mul_into(g, s, frontier.get(i), scratch);
        std::span<const std::int32_t> sp(scratch.data);
        if (b.find(sp) != kNoIndex) continue;
        std::uint32_t idx = (std::uint32_t)next.size();
        next.push(sp);
        if (!next_set.insert_if_absent(next.get(idx), idx)) {
          next.data.resize(next.off[idx]);
          next.off.pop_back();
        }
      }
    }
    // deterministic ordering inside the new sphere
    std::vector<std::uint32_t> order(next.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::uint32_t x, std::uint32_t y) {
      return span_less(next.get(x), next.get(y));
    });
    if (b.size() + next.size() > cap) throw BallCapacityError(r, cap, b.size() + next.size());

    FlatList sorted;
    sorted.data.reserve(next.data.size());
    for (std::uint32_t i : order) sorted.push(next.get(i));
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      auto sp = sorted.get(i);
      b.arena_.insert(b.arena_.end(), sp.begin(), sp.end());
      b.offsets_.push_back((std::uint32_t)b.arena_.size());
    }
    b.sphere_offsets_.push_back((std::uint32_t)b.size());
    b.build_index();
    frontier = std::move(sorted);
    if (frontier.size() == 0) break;  // finite group exhausted
  }
  while ((int)b.sphere_offsets_.size() < radius + 2)
    b.sphere_offsets_.push_back((std::uint32_t)b.size());

  // tiny balls are cheaper to rebuild than to read back
  if (!cache_path.empty() && b.size() >= 4096) BallCacheIo::store(b, cache_path);
  return b;
}

Ball enumerate_ball(const Group& g, int radius, std::size_t cap, const std::string& cache_dir) {
  return Ball::build(g, radius, cap, cache_dir);
}

std::vector<std::size_t> sphere_sizes(const Group& g, int r_max, std::size_t cap) {
  Ball b = Ball::build(g, r_max, cap);
  return b.sphere_sizes();
}

// ---------------------------------------------------------------- streaming

namespace {

void stream_free(const Group& g, int r_max,
                 const std::function<void(int, std::span<const std::int32_t>)>& fn) {
  // depth-first over reduced words; a reduced word extends uniquely, so no
  // dedup set is needed
  int k = g.descriptor().rank;
  std::vector<std::int32_t> word;
  fn(0, std::span<const std::int32_t>{});
  if (r_max == 0) return;
  std::vector<int> choice{0};
  auto letter = [&](int c) {  // c in [0, 2k)
    int i = c / 2 + 1;
    return (c % 2 == 0) ? i : -i;
  };
  while (true) {
    int depth = (int)word.size();
    int& c = choice.back();
    bool descended = false;
    for (; c < 2 * k; ++c) {
      std::int32_t l = letter(c);
      if (!word.empty() && word.back() == -l) continue;
      word.push_back(l);
      fn(depth + 1, std::span<const std::int32_t>(word));
      ++c;
      if (depth + 1 < r_max) {
        choice.push_back(0);
        descended = true;
      } else {
        word.pop_back();
      }
      break;
    }
    if (descended) continue;
    if (c >= 2 * k) {
      choice.pop_back();
      if (choice.empty()) return;
      word.pop_back();
    }
  }
}

void stream_fpf(const Group& g, int r_max,
                const std::function<void(int, std::span<const std::int32_t>)>& fn) {
  const auto& factors = g.descriptor().factors;
  std::vector<std::int32_t> word;  // (factor, elt) pairs
  fn(0, std::span<const std::int32_t>{});
  if (r_max == 0) return;
  struct Slot {
    int f, e;
  };
  std::vector<Slot> pos{{0, 0}};
  auto advance = [&](Slot& s) {
    // next non-identity (factor, elt) pair differing from the previous factor
    int prev = word.empty() ? -1 : word[word.size() - 2];
    while (s.f < (int)factors.size()) {
      if (s.f == prev) {
        ++s.f;
        s.e = 0;
        continue;
      }
      if (s.e >= factors[s.f].order) {
        ++s.f;
        s.e = 0;
        continue;
      }
      if (s.e == factors[s.f].identity) {
        ++s.e;
        continue;
      }
      return true;
    }
    return false;
  };
  while (true) {
    Slot& s = pos.back();
    if (advance(s)) {
      int depth = (int)word.size() / 2;
      word.push_back(s.f);
      word.push_back(s.e);
      fn(depth + 1, std::span<const std::int32_t>(word));
      ++s.e;
      if (depth + 1 < r_max) {
        pos.push_back({0, 0});
      } else {
        word.pop_back();
        word.pop_back();
      }
    } else {
      pos.pop_back();
      if (pos.empty()) return;
      word.pop_back();
      word.pop_back();
    }
  }
}

void stream_bfs(const Group& g, int r_max,
                const std::function<void(int, std::span<const std::int32_t>)>& fn) {
  // level-synchronized BFS keeping two previous levels for dedup
  GroupElement id = g.identity();
  FlatList prev, curr;
  curr.push(std::span(id.data));
  SpanSet prev_set, curr_set;
  prev_set.reset(&prev, 1);
  curr_set.reset(&curr, 1);
  curr_set.insert_if_absent(curr.get(0), 0);
  fn(0, curr.get(0));
  GroupElement scratch;
  for (int r = 1; r <= r_max; ++r) {
    FlatList next;
    SpanSet next_set;
    next_set.reset(&next, curr.size() * 3 + 8);
    for (std::size_t i = 0; i < curr.size(); ++i) {
      for (const auto& s : g.generators()) {
        mul_into(g, s, curr.get(i), scratch);
        std::span<const std::int32_t> sp(scratch.data);
        if (curr_set.contains(sp) || prev_set.contains(sp)) continue;
        std::uint32_t idx = (std::uint32_t)next.size();
        next.push(sp);
        if (!next_set.insert_if_absent(next.get(idx), idx)) {
          next.data.resize(next.off[idx]);
          next.off.pop_back();
        }
      }
    }
    for (std::size_t i = 0; i < next.size(); ++i) fn(r, next.get(i));
    prev = std::move(curr);
    prev_set.reset(&prev, prev.size());
    for (std::size_t i = 0; i < prev.size(); ++i) prev_set.insert_if_absent(prev.get(i), (std::uint32_t)i);
    curr = std::move(next);
    curr_set.reset(&curr, curr.size());
    for (std::size_t i = 0; i < curr.size(); ++i) curr_set.insert_if_absent(curr.get(i), (std::uint32_t)i);
    if (curr.size() == 0) return;
  }
}

}  // namespace

void stream_spheres(const Group& g, int r_max,
                    const std::function<void(int, std::span<const std::int32_t>)>& fn) {
  if (r_max < 0) throw std::invalid_argument("stream_spheres: negative radius");
  switch (g.descriptor().family) {
    case Family::Free: stream_free(g, r_max, fn); return;
    case Family::FreeProductOfFinite: stream_fpf(g, r_max, fn); return;
    default: stream_bfs(g, r_max, fn); return;
  }
}

// ---------------------------------------------------------------- cache io

namespace {
constexpr std::uint64_t kBallMagic = 0x4e43484541544231ull;  // "NCHEATB1"
}

bool BallCacheIo::load(Ball& b, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  auto rd = [&](void* p, std::size_t n) { in.read((char*)p, (std::streamsize)n); };
  std::uint64_t magic = 0;
  rd(&magic, 8);
  if (magic != kBallMagic) return false;
  std::int64_t radius = 0, an = 0, on = 0, sn = 0;
  rd(&radius, 8);
  rd(&an, 8);
  rd(&on, 8);
  rd(&sn, 8);
  if (!in || radius < 0 || an < 0 || on < 1 || sn < 2) return false;
  b.radius_ = (int)radius;
  b.arena_.resize((std::size_t)an);
  b.offsets_.resize((std::size_t)on);
  b.sphere_offsets_.resize((std::size_t)sn);
  rd(b.arena_.data(), (std::size_t)an * 4);
  rd(b.offsets_.data(), (std::size_t)on * 4);
  rd(b.sphere_offsets_.data(), (std::size_t)sn * 4);
  return bool(in);
}

void BallCacheIo::store(const Ball& b, const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(std::filesystem::path(path).parent_path(), ec);
  std::ofstream out(path + ".tmp", std::ios::binary);
  if (!out) return;
  auto wr = [&](const void* p, std::size_t n) { out.write((const char*)p, (std::streamsize)n); };
  wr(&kBallMagic, 8);
  std::int64_t radius = b.radius_, an = (std::int64_t)b.arena_.size(),
               on = (std::int64_t)b.offsets_.size(),
               sn = (std::int64_t)b.sphere_offsets_.size();
  wr(&radius, 8);
  wr(&an, 8);
  wr(&on, 8);
  wr(&sn, 8);
  wr(b.arena_.data(), b.arena_.size() * 4);
  wr(b.offsets_.data(), b.offsets_.size() * 4);
  wr(b.sphere_offsets_.data(), b.sphere_offsets_.size() * 4);
  out.close();
  std::filesystem::rename(path + ".tmp", path, ec);
}

}  // namespace ncheat
