#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "nsoc/hull.hpp"

using namespace nsoc;

namespace {
Vec v1(double a) {
  Vec v(1);
  v << a;
  return v;
}
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}
}  // namespace

TEST_CASE("hull distance: interval cases") {
  Hull seg = Hull::from_points({v1(-1), v1(1)});
  CHECK(hull_distance(v1(0), seg) == Catch::Approx(0.0).margin(1e-10));
  Hull off = Hull::from_points({v1(2), v1(3)});
  CHECK(hull_distance(v1(0), off) == Catch::Approx(2.0).margin(1e-10));
}

TEST_CASE("hull distance: triangle membership against brute-force grid oracle") {
  Hull tri = Hull::from_points({v2(0, 0), v2(2, 0), v2(0, 2)});
  CHECK(hull_distance(v2(1, 1), tri) <= 1e-10);

  // Oracle: dense convex-combination grid λ over the simplex.
  auto oracle = [&](const Vec& p) {
    double best = 1e300;
    const int N = 400;
    for (int a = 0; a <= N; ++a)
      for (int b = 0; b <= N - a; ++b) {
        double l0 = double(a) / N, l1 = double(b) / N, l2 = 1.0 - l0 - l1;
        Vec y = l0 * tri.vertices[0] + l1 * tri.vertices[1] + l2 * tri.vertices[2];
        best = std::min(best, (y - p).norm());
      }
    return best;
  };
  Vec p = v2(2.0, 2.0);
  CHECK(hull_distance(p, tri) == Catch::Approx(oracle(p)).margin(1e-2));
  Vec q = v2(-1.0, 0.5);
  CHECK(hull_distance(q, tri) == Catch::Approx(oracle(q)).margin(1e-2));
}

TEST_CASE("hull distance is a metric projection: zero on every vertex") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> g(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    int dim = 1 + int(rng() % 5);
    int k = 1 + int(rng() % 7);
    std::vector<Vec> pts;
    for (int a = 0; a < k; ++a) {
      Vec v(dim);
      for (int i = 0; i < dim; ++i) v[i] = g(rng);
      pts.push_back(v);
    }
    Hull h = Hull::from_points(pts);
    for (const auto& v : h.vertices) CHECK(hull_distance(v, h) <= 1e-10);
  }
}

TEST_CASE("interior points of random hulls have zero distance") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0, 1);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    int dim = 1 + int(rng() % 4);
    int k = dim + 2 + int(rng() % 5);
    std::vector<Vec> pts;
    for (int a = 0; a < k; ++a) {
      Vec v(dim);
      for (int i = 0; i < dim; ++i) v[i] = g(rng);
      pts.push_back(v);
    }
    Hull h = Hull::from_points(pts);
    // Random convex combination.
    std::vector<double> w(h.vertices.size());
    double tot = 0;
    for (auto& x : w) {
      x = u(rng);
      tot += x;
    }
    Vec p = Vec::Zero(dim);
    for (std::size_t a = 0; a < h.vertices.size(); ++a) p += (w[a] / tot) * h.vertices[a];
    CHECK(hull_distance(p, h) <= 1e-9);
  }
}

TEST_CASE("support function and dot interval") {
  Hull seg = Hull::from_points({v2(0, -3), v2(0, -2)});
  Vec p = v2(-2, 1);  // want interval of p·v over the segment
  auto [lo, hi] = seg.dot_interval(p);
  CHECK(lo == Catch::Approx(-3.0));
  CHECK(hi == Catch::Approx(-2.0));
  CHECK(seg.support(v2(0, 1)) == Catch::Approx(-2.0));
}

TEST_CASE("hausdorff distance of segments") {
  Hull a = Hull::from_points({v2(0, -3), v2(0, -2)});
  Hull b = Hull::from_points({v2(0, -3.1), v2(0, -1.9)});
  CHECK(hausdorff_distance(a, b) == Catch::Approx(0.1).margin(1e-9));
  CHECK(hausdorff_distance(a, a) <= 1e-12);
}
