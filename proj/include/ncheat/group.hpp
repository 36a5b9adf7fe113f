#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ncheat {

enum class Family { FreeAbelian, Free, FreeProductOfFinite, Heisenberg3 };

// Multiplication table of a finite group with a designated identity index.
// Validated on construction: identity behaves as a unit, every element has a
// two-sided inverse, and the table is associative.
struct FiniteGroupTable {
  int order = 0;
  int identity = 0;
  std::vector<int> table;  // row-major, table[a*order + b] = a*b

  void validate() const;
  int mul(int a, int b) const { return table[a * order + b]; }
  int inverse(int a) const;
};

// Element in family-specific normal form, stored as a flat integer vector:
//   FreeAbelian(n)       coordinate vector of length n
//   Free(k)              reduced word, letters in {+-1, ..., +-k}
//   FreeProductOfFinite  alternating syllables flattened as (factor, element)
//                        pairs; element != factor identity, adjacent factors
//                        distinct
//   Heisenberg3          triple (a, b, c) of the upper unitriangular matrix
struct GroupElement {
  std::vector<std::int32_t> data;

  friend bool operator==(const GroupElement& a, const GroupElement& b) = default;
  friend bool operator<(const GroupElement& a, const GroupElement& b) {
    if (a.data.size() != b.data.size()) return a.data.size() < b.data.size();
    return a.data < b.data;
  }
};

struct GroupDescriptor {
  Family family = Family::FreeAbelian;
  int rank = 1;  // n for FreeAbelian, k for Free; unused otherwise
  std::vector<FiniteGroupTable> factors;

  static GroupDescriptor free_abelian(int n);
  static GroupDescriptor free_group(int k);
  static GroupDescriptor free_product(std::vector<FiniteGroupTable> tables);
  static GroupDescriptor heisenberg3();

  // e.g. "free:2", "zn:3", "fpf:2,3", "heis3"; used for cache keys and errors
  std::string canonical_name() const;

  friend bool operator==(const GroupDescriptor& a, const GroupDescriptor& b);
};

// Exact group arithmetic on normal forms.
class Group {
 public:
  explicit Group(GroupDescriptor desc);

  const GroupDescriptor& descriptor() const { return desc_; }

  GroupElement identity() const;
  GroupElement multiply(const GroupElement& a, const GroupElement& b) const;
  GroupElement invert(const GroupElement& a) const;
  // unvalidated product into a reusable buffer; hot-path form of multiply
  void multiply_span(std::span<const std::int32_t> a, std::span<const std::int32_t> b,
                     GroupElement& out) const;
  bool is_identity(const GroupElement& a) const { return a.data.empty() || a == identity(); }
  bool is_normal_form(const GroupElement& a) const;

  // canonical symmetric generating set S, in deterministic order
  const std::vector<GroupElement>& generators() const { return generators_; }

  // |g|_S where a closed form exists (FreeAbelian: l1, Free: letter count,
  // FreeProductOfFinite: syllable count). Returns -1 for Heisenberg3, whose
  // word length is defined operationally as BFS depth (see Ball).
  long closed_form_word_length(const GroupElement& a) const;

  std::string format(const GroupElement& a) const;

  void check_element(const GroupElement& a) const;  // throws if not a normal form

 private:
  GroupDescriptor desc_;
  std::vector<GroupElement> generators_;
};

class BallCapacityError : public std::runtime_error {
 public:
  BallCapacityError(int radius, std::size_t cap, std::size_t reached);
  int radius;
};

inline constexpr std::size_t kDefaultBallCap = 5'000'000;
inline constexpr std::uint32_t kNoIndex = 0xffffffffu;

// Cayley ball {g : |g|_S <= r} with deterministic ordering: BFS level first,
// lexicographic normal form inside each level. Immutable after construction.
class Ball {
 public:
  static Ball build(const Group& g, int radius, std::size_t cap = kDefaultBallCap,
                    const std::string& cache_dir = "");

  const GroupDescriptor& descriptor() const { return desc_; }
  int radius() const { return radius_; }
  std::size_t size() const { return offsets_.size() - 1; }

  std::span<const std::int32_t> view(std::uint32_t i) const {
    return {arena_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  GroupElement element(std::uint32_t i) const {
    auto v = view(i);
    return GroupElement{{v.begin(), v.end()}};
  }

  // index of an element, or kNoIndex when outside the ball
  std::uint32_t find(const GroupElement& e) const { return find(std::span(e.data)); }
  std::uint32_t find(std::span<const std::int32_t> e) const;

  int sphere_count() const { return radius_ + 1; }
  std::size_t sphere_begin(int r) const { return sphere_offsets_[r]; }
  std::size_t sphere_end(int r) const { return sphere_offsets_[r + 1]; }
  std::size_t sphere_size(int r) const { return sphere_end(r) - sphere_begin(r); }
  int length_of(std::uint32_t i) const;  // BFS level of element i

  std::vector<std::size_t> sphere_sizes() const;

 private:
  friend struct BallCacheIo;
  GroupDescriptor desc_;
  int radius_ = 0;
  std::vector<std::int32_t> arena_;
  std::vector<std::uint32_t> offsets_;
  std::vector<std::uint32_t> sphere_offsets_;
  std::vector<std::uint32_t> slots_;  // open-addressing index, power-of-two size
  std::uint64_t slot_mask_ = 0;

  void build_index();
};

Ball enumerate_ball(const Group& g, int radius, std::size_t cap = kDefaultBallCap,
                    const std::string& cache_dir = "");
std::vector<std::size_t> sphere_sizes(const Group& g, int r_max,
                                      std::size_t cap = kDefaultBallCap);

// Streams every element of B_{r_max} exactly once as (bfs_level, element view),
// without keeping more than a bounded number of levels in memory. Order within
// a sphere is deterministic but unspecified. Used for series diagnostics on
// balls too large for a dense index.
void stream_spheres(const Group& g, int r_max,
                    const std::function<void(int, std::span<const std::int32_t>)>& fn);

std::uint64_t hash_span(std::span<const std::int32_t> s);

}  // namespace ncheat
