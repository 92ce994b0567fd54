#include <doctest.h>

#include <set>

#include "routine/rng.hpp"

using routine::Rng;

TEST_CASE("splitmix64 reference vectors") {
  Rng r(1234567);
  CHECK(r.next_u64() == 6457827717110365317ULL);
  CHECK(r.next_u64() == 3203168211198807973ULL);
  CHECK(r.next_u64() == 9817491932198370423ULL);
  CHECK(r.next_u64() == 4593380528125082431ULL);
  CHECK(r.next_u64() == 16408922859458223821ULL);
}

TEST_CASE("child stream vector") {
  CHECK(Rng(42).split(3).next_u64() == 10178245551302955604ULL);
}

TEST_CASE("equal seeds give equal sequences") {
  Rng a(99), b(99);
  for (int i = 0; i < 10000; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("children are distinct and ignore parent consumption") {
  Rng parent(5);
  std::set<std::uint64_t> firsts;
  for (std::uint64_t i = 0; i < 1000; ++i) firsts.insert(parent.split(i).next_u64());
  CHECK(firsts.size() == 1000);

  Rng used(5);
  for (int i = 0; i < 17; ++i) used.next_u64();
  CHECK(used.split(11).next_u64() == Rng(5).split(11).next_u64());
  CHECK(Rng(5).split("user1").next_u64() != Rng(5).split("user2").next_u64());
}

TEST_CASE("bounded draws stay in range") {
  Rng r(3);
  for (int i = 0; i < 5000; ++i) {
    CHECK(r.below(7) < 7);
    const auto v = r.between(-2, 2);
    CHECK(v >= -2);
    CHECK(v <= 2);
    const double u = r.uniform_open();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
  auto s = r.sample_without_replacement(20, 8);
  CHECK(std::set<std::size_t>(s.begin(), s.end()).size() == 8);
}

TEST_CASE("distribution moments") {
  Rng r(11);
  const int n = 200000;
  double sum = 0.0, sq = 0.0, g = 0.0, g_small = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    sum += z;
    sq += z * z;
    g += r.gamma(3.0);
    g_small += r.gamma(0.4);
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sq / n - 1.0) < 0.01);
  CHECK(std::abs(g / n - 3.0) < 0.02);
  CHECK(std::abs(g_small / n - 0.4) < 0.01);
}

TEST_CASE("dirichlet lies on the simplex and keeps zero weights at zero") {
  Rng r(8);
  const std::vector<double> alpha{0.5, 0.0, 2.0, 10.0};
  for (int i = 0; i < 200; ++i) {
    const auto p = r.dirichlet(alpha);
    double s = 0.0;
    for (double v : p) {
      CHECK(v >= 0.0);
      s += v;
    }
    CHECK(std::abs(s - 1.0) < 1e-12);
    CHECK(p[1] == 0.0);
  }
}
