#include <doctest.h>

#include <array>
#include <map>
#include <set>

#include "ncheat/group.hpp"
#include "ncheat/rng.hpp"

using namespace ncheat;

namespace {

FiniteGroupTable cyclic_table(int n) {
  FiniteGroupTable t;
  t.order = n;
  t.identity = 0;
  t.table.resize(n * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) t.table[a * n + b] = (a + b) % n;
  return t;
}

GroupElement rand_element(const Group& g, const Ball& ball, Rng& rng) {
  return ball.element((std::uint32_t)rng.below(ball.size()));
}

}  // namespace

TEST_CASE("multiply and invert in normal form") {
  SUBCASE("free group reduction") {
    Group g(GroupDescriptor::free_group(2));
    GroupElement ab{{1, 2}};       // a b
    GroupElement binv_a{{-2, 1}};  // b^-1 a
    CHECK(g.multiply(ab, binv_a) == GroupElement{{1, 1}});  // a a
    CHECK(g.multiply(ab, g.invert(ab)) == g.identity());
  }
  SUBCASE("free abelian addition") {
    Group g(GroupDescriptor::free_abelian(2));
    CHECK(g.multiply(GroupElement{{1, 2}}, GroupElement{{3, -2}}) == GroupElement{{4, 0}});
  }
  SUBCASE("heisenberg matrix product") {
    Group g(GroupDescriptor::heisenberg3());
    CHECK(g.multiply(GroupElement{{1, 0, 0}}, GroupElement{{0, 1, 0}}) ==
          GroupElement{{1, 1, 1}});
    GroupElement x{{3, -2, 5}};
    CHECK(g.multiply(x, g.invert(x)) == g.identity());
  }
  SUBCASE("free product merge and cancel") {
    Group g(GroupDescriptor::free_product({cyclic_table(2), cyclic_table(3)}));
    GroupElement st{{0, 1, 1, 1}};  // s t
    GroupElement tt{{1, 2}};        // t^2
    // s t t^2 = s (t^3) = s
    CHECK(g.multiply(st, tt) == GroupElement{{0, 1}});
    CHECK(g.multiply(st, g.invert(st)) == g.identity());
  }
  SUBCASE("mixed descriptors rejected") {
    Group g(GroupDescriptor::free_group(2));
    CHECK_THROWS_AS(g.multiply(GroupElement{{1}}, GroupElement{{1, 2, 3}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(g.multiply(GroupElement{{3}}, GroupElement{{1}}), std::invalid_argument);
  }
}

TEST_CASE("group axioms on random elements") {
  std::vector<GroupDescriptor> descs = {
      GroupDescriptor::free_group(2), GroupDescriptor::free_abelian(2),
      GroupDescriptor::heisenberg3(),
      GroupDescriptor::free_product({cyclic_table(2), cyclic_table(3)})};
  for (const auto& desc : descs) {
    Group g(desc);
    Ball ball = Ball::build(g, 4);
    Rng rng(41);
    for (int i = 0; i < 10000; ++i) {
      GroupElement a = rand_element(g, ball, rng);
      GroupElement b = rand_element(g, ball, rng);
      GroupElement c = rand_element(g, ball, rng);
      CHECK(g.multiply(g.multiply(a, b), c) == g.multiply(a, g.multiply(b, c)));
      CHECK(g.invert(g.invert(a)) == a);
      CHECK(g.is_normal_form(g.multiply(a, b)));
    }
  }
}

TEST_CASE("word length subadditivity") {
  Group g(GroupDescriptor::free_group(2));
  Ball ball = Ball::build(g, 5);
  Rng rng(7);
  for (int i = 0; i < 2000; ++i) {
    GroupElement a = rand_element(g, ball, rng);
    GroupElement b = rand_element(g, ball, rng);
    long la = g.closed_form_word_length(a);
    long lb = g.closed_form_word_length(b);
    long lab = g.closed_form_word_length(g.multiply(a, b));
    CHECK(lab <= la + lb);
  }
}

TEST_CASE("free group ball and sphere sizes") {
  Group g(GroupDescriptor::free_group(2));
  Ball b1 = Ball::build(g, 1);
  CHECK(b1.size() == 5);
  CHECK(b1.sphere_size(0) == 1);
  CHECK(b1.sphere_size(1) == 4);

  // |S_n| = 2k(2k-1)^{n-1}
  Ball b8 = Ball::build(g, 8);
  std::size_t expect = 4;
  for (int n = 1; n <= 8; ++n) {
    CHECK(b8.sphere_size(n) == expect);
    expect *= 3;
  }
}

TEST_CASE("free abelian ball sizes against lattice count") {
  Group g(GroupDescriptor::free_abelian(2));
  Ball ball = Ball::build(g, 20);
  for (int r = 0; r <= 20; ++r) {
    // independent oracle: count lattice points with |x|+|y| <= r directly
    std::size_t count = 0;
    for (int x = -r; x <= r; ++x)
      for (int y = -r; y <= r; ++y)
        if (std::abs(x) + std::abs(y) <= r) ++count;
    std::size_t ball_count = ball.sphere_begin(r) + ball.sphere_size(r);
    CHECK(ball_count == count);
    CHECK(count == std::size_t(2 * r * r + 2 * r + 1));
  }
}

TEST_CASE("sphere sizes on z") {
  auto sizes = sphere_sizes(Group(GroupDescriptor::free_abelian(1)), 6);
  CHECK(sizes == std::vector<std::size_t>{1, 2, 2, 2, 2, 2, 2});
}

TEST_CASE("heisenberg sphere sizes against an independent matrix BFS") {
  // oracle: BFS over upper unitriangular integer matrices, multiplying 3x3
  // matrices explicitly and keying states by the matrix entries
  using Mat = std::array<std::array<long, 3>, 3>;
  auto matmul = [](const Mat& x, const Mat& y) {
    Mat z{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        long s = 0;
        for (int k = 0; k < 3; ++k) s += x[i][k] * y[k][j];
        z[i][j] = s;
      }
    return z;
  };
  auto ident = [] {
    Mat m{};
    for (int i = 0; i < 3; ++i) m[i][i] = 1;
    return m;
  };
  auto key = [](const Mat& m) { return std::array<long, 3>{m[0][1], m[1][2], m[0][2]}; };

  std::vector<Mat> gens;
  for (int s : {1, -1}) {
    Mat x = ident();
    x[0][1] = s;
    gens.push_back(x);
    Mat y = ident();
    y[1][2] = s;
    gens.push_back(y);
  }
  std::set<std::array<long, 3>> seen{key(ident())};
  std::vector<Mat> frontier{ident()};
  std::vector<std::size_t> oracle_sizes{1};
  const int r_max = 10;
  for (int r = 1; r <= r_max; ++r) {
    std::vector<Mat> next;
    for (const auto& m : frontier)
      for (const auto& s : gens) {
        Mat p = matmul(s, m);
        if (seen.insert(key(p)).second) next.push_back(p);
      }
    oracle_sizes.push_back(next.size());
    frontier = std::move(next);
  }

  auto sizes = sphere_sizes(Group(GroupDescriptor::heisenberg3()), r_max);
  CHECK(sizes == oracle_sizes);
}

TEST_CASE("free product sphere sizes against alternating-word enumeration") {
  Group g(GroupDescriptor::free_product({cyclic_table(2), cyclic_table(3)}));
  const int r_max = 12;
  // oracle: count alternating sequences directly; factor sizes minus identity
  // give 1 and 2 choices per syllable
  std::vector<std::size_t> oracle{1};
  // a_n: sequences of n syllables ending in factor 0, b_n: ending in factor 1
  double a = 1, b = 2;  // n = 1
  oracle.push_back((std::size_t)(a + b));
  for (int n = 2; n <= r_max; ++n) {
    double na = b * 1.0;  // append a factor-0 syllable after factor-1
    double nb = a * 2.0;
    a = na;
    b = nb;
    oracle.push_back((std::size_t)(a + b));
  }
  auto sizes = sphere_sizes(g, r_max);
  CHECK(sizes == oracle);

  // cross-check the first few levels by explicit enumeration
  std::set<std::vector<std::int32_t>> level3;
  for (int f1 = 0; f1 < 2; ++f1)
    for (int e1 = 1; e1 <= (f1 == 0 ? 1 : 2); ++e1)
      for (int f2 = 0; f2 < 2; ++f2) {
        if (f2 == f1) continue;
        for (int e2 = 1; e2 <= (f2 == 0 ? 1 : 2); ++e2)
          for (int f3 = 0; f3 < 2; ++f3) {
            if (f3 == f2) continue;
            for (int e3 = 1; e3 <= (f3 == 0 ? 1 : 2); ++e3)
              level3.insert({f1, e1, f2, e2, f3, e3});
          }
      }
  CHECK(sizes[3] == level3.size());
}

TEST_CASE("ball ordering is deterministic and prefix-stable") {
  for (const auto& desc :
       {GroupDescriptor::free_group(2), GroupDescriptor::heisenberg3()}) {
    Group g(desc);
    Ball small = Ball::build(g, 3);
    Ball large = Ball::build(g, 5);
    REQUIRE(small.size() <= large.size());
    for (std::uint32_t i = 0; i < small.size(); ++i)
      CHECK(small.element(i) == large.element(i));
    // index map is a bijection consistent with ordering
    for (std::uint32_t i = 0; i < small.size(); ++i)
      CHECK(small.find(small.element(i)) == i);
  }
}

TEST_CASE("ball respects the element cap") {
  Group g(GroupDescriptor::free_group(2));
  try {
    Ball::build(g, 8, 1000);
    FAIL("cap not enforced");
  } catch (const BallCapacityError& e) {
    CHECK(e.radius <= 8);
    CHECK(std::string(e.what()).find(std::to_string(e.radius)) != std::string::npos);
  }
}

TEST_CASE("streamed spheres agree with the dense ball") {
  for (const auto& desc :
       {GroupDescriptor::free_group(2), GroupDescriptor::free_abelian(2),
        GroupDescriptor::heisenberg3(),
        GroupDescriptor::free_product({cyclic_table(2), cyclic_table(3)})}) {
    Group g(desc);
    const int r_max = 5;
    Ball ball = Ball::build(g, r_max);
    std::map<int, std::set<GroupElement>> streamed;
    std::size_t total = 0;
    stream_spheres(g, r_max, [&](int r, std::span<const std::int32_t> e) {
      streamed[r].insert(GroupElement{{e.begin(), e.end()}});
      ++total;
    });
    CHECK(total == ball.size());
    for (int r = 0; r <= r_max; ++r) {
      CHECK(streamed[r].size() == ball.sphere_size(r));
      for (std::size_t i = ball.sphere_begin(r); i < ball.sphere_end(r); ++i)
        CHECK(streamed[r].count(ball.element((std::uint32_t)i)) == 1);
    }
  }
}

TEST_CASE("invalid finite factor tables are rejected") {
  FiniteGroupTable bad = cyclic_table(3);
  bad.table[0] = 2;  // identity row broken
  CHECK_THROWS_AS(GroupDescriptor::free_product({bad, cyclic_table(2)}),
                  std::invalid_argument);

  FiniteGroupTable nonassoc;
  nonassoc.order = 3;
  nonassoc.identity = 0;
  // row 0 and column 0 behave as identity but the rest is not a group
  nonassoc.table = {0, 1, 2, 1, 2, 2, 2, 1, 1};
  CHECK_THROWS_AS(GroupDescriptor::free_product({nonassoc, cyclic_table(2)}),
                  std::invalid_argument);

  FiniteGroupTable trivial = cyclic_table(1);
  CHECK_THROWS_AS(GroupDescriptor::free_product({trivial, cyclic_table(2)}),
                  std::invalid_argument);
}
