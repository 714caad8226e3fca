#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "needle/error.hpp"
#include "needle/gh.hpp"
#include "test_support.hpp"

using namespace needle;
using needle::testing::needle_manifold;
using needle::testing::sphere_manifold;

namespace {

FiniteMetricSpace random_space(std::mt19937& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 2.0);
    std::vector<double> x(n), y(n), d(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = u(rng);
        y[i] = u(rng);
    }
    std::vector<std::string> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        labels[i] = std::to_string(i);
        for (std::size_t j = 0; j < n; ++j) d[i * n + j] = std::hypot(x[i] - x[j], y[i] - y[j]);
    }
    return FiniteMetricSpace(labels, d);
}

FiniteMetricSpace line_space(std::vector<double> pts) {
    const std::size_t n = pts.size();
    std::vector<double> d(n * n);
    std::vector<std::string> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        labels[i] = std::to_string(i);
        for (std::size_t j = 0; j < n; ++j) d[i * n + j] = std::abs(pts[i] - pts[j]);
    }
    return FiniteMetricSpace(labels, d);
}

// Independent oracle: every subset of X x Y that covers both factors.
double gh_by_subsets(const FiniteMetricSpace& x, const FiniteMetricSpace& y) {
    const std::size_t nx = x.size(), ny = y.size(), cells = nx * ny;
    double best = INFINITY;
    for (std::uint32_t mask = 1; mask < (1u << cells); ++mask) {
        std::vector<bool> cx(nx), cy(ny);
        for (std::size_t k = 0; k < cells; ++k) {
            if (mask >> k & 1u) cx[k / ny] = cy[k % ny] = true;
        }
        if (std::find(cx.begin(), cx.end(), false) != cx.end()) continue;
        if (std::find(cy.begin(), cy.end(), false) != cy.end()) continue;
        double dis = 0.0;
        for (std::size_t a = 0; a < cells; ++a) {
            if (!(mask >> a & 1u)) continue;
            for (std::size_t b = 0; b < cells; ++b) {
                if (!(mask >> b & 1u)) continue;
                dis = std::max(dis, std::abs(x(a / ny, b / ny) - y(a % ny, b % ny)));
            }
        }
        best = std::min(best, dis);
    }
    return 0.5 * best;
}

// Least-eps map by enumerating all maps X -> Y.
std::vector<std::size_t> best_map(const FiniteMetricSpace& x, const FiniteMetricSpace& y) {
    std::vector<std::size_t> f(x.size(), 0), best = f;
    double best_eps = INFINITY;
    while (true) {
        const double e = distortion_epsilon(f, x, y);
        if (e < best_eps) {
            best_eps = e;
            best = f;
        }
        std::size_t i = 0;
        while (i < f.size() && ++f[i] == y.size()) f[i++] = 0;
        if (i == f.size()) break;
    }
    return best;
}

}  // namespace

TEST(Hausdorff, Examples) {
    const auto s = sampled_interval(kPi, 9);
    const std::size_t all[] = {0, 1, 2, 3, 4, 5, 6, 7, 8};
    EXPECT_EQ(hausdorff_distance(s, all, all), 0.0);
    const std::size_t a[] = {0}, b[] = {0, 8};
    EXPECT_DOUBLE_EQ(hausdorff_distance(s, a, b), kPi);
    EXPECT_THROW(hausdorff_distance(s, {}, b), std::invalid_argument);
}

TEST(Hausdorff, MatchesDoubleLoop) {
    std::mt19937 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const auto s = random_space(rng, 8);
        std::vector<std::size_t> a, b;
        for (std::size_t i = 0; i < 8; ++i) {
            if (rng() % 2) a.push_back(i);
            if (rng() % 3 == 0) b.push_back(i);
        }
        if (a.empty()) a.push_back(0);
        if (b.empty()) b.push_back(7);
        double ab = 0.0, ba = 0.0;
        for (auto i : a) {
            double m = INFINITY;
            for (auto j : b) m = std::min(m, s(i, j));
            ab = std::max(ab, m);
        }
        for (auto j : b) {
            double m = INFINITY;
            for (auto i : a) m = std::min(m, s(i, j));
            ba = std::max(ba, m);
        }
        EXPECT_EQ(hausdorff_distance(s, a, b), std::max(ab, ba));
    }
}

TEST(Distortion, IdentityAndConstant) {
    const auto s = sampled_interval(kPi, 33);
    std::vector<std::size_t> id(33), zero(33, 0);
    for (std::size_t i = 0; i < 33; ++i) id[i] = i;
    EXPECT_EQ(distortion_epsilon(id, s, s), 0.0);
    EXPECT_DOUBLE_EQ(distortion_epsilon(zero, s, s), kPi);
}

TEST(Distortion, NeverDecreasesWhenTargetGrows) {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const auto x = random_space(rng, 4);
        const auto big = random_space(rng, 7);
        const std::size_t keep[] = {0, 1, 2, 3};
        const auto small = big.subspace(keep);
        std::vector<std::size_t> f(4);
        for (auto& v : f) v = rng() % 4;
        EXPECT_GE(distortion_epsilon(f, x, big), distortion_epsilon(f, x, small));
    }
}

TEST(Distortion, RejectsPartialMap) {
    const auto s = sampled_interval(1.0, 3);
    const std::size_t f[] = {0, 1};
    EXPECT_THROW(distortion_epsilon(f, s, s), std::invalid_argument);
}

TEST(Glued, SinglePoints) {
    const auto x = line_space({0.0}), y = line_space({5.0});
    const std::size_t f[] = {0};
    const auto r = glued_space_bound(x, y, f, 0.3);
    EXPECT_DOUBLE_EQ(r.space.z(0, 1), 0.3);
    EXPECT_DOUBLE_EQ(r.hausdorff, 0.3);
    EXPECT_TRUE(r.report.all_pass());
}

TEST(Glued, IdentityOnInterval) {
    const auto s = sampled_interval(kPi, 65);
    std::vector<std::size_t> id(65);
    for (std::size_t i = 0; i < 65; ++i) id[i] = i;
    const double eps = kPi / 64.0;
    const auto r = glued_space_bound(s, s, id, eps);
    EXPECT_LE(r.hausdorff, 4.0 * eps);
    EXPECT_LE(r.space.z.max_triangle_violation(), 1e-12);
}

TEST(Glued, RejectsTooSmallEpsilon) {
    const auto s = sampled_interval(kPi, 5);
    const std::size_t zero[] = {0, 0, 0, 0, 0};
    EXPECT_THROW(glued_space_bound(s, s, zero, 1.0), std::invalid_argument);
}

TEST(Glued, RestrictsToFactors) {
    std::mt19937 rng(7);
    const auto x = random_space(rng, 5), y = random_space(rng, 4);
    const auto f = best_map(x, y);
    const auto r = glued_space_bound(x, y, f, distortion_epsilon(f, x, y));
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(r.space.z(i, j), x(i, j));
    }
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(r.space.z(5 + i, 5 + j), y(i, j));
    }
}

TEST(BruteForce, Examples) {
    std::mt19937 rng(11);
    const auto x = random_space(rng, 5);
    EXPECT_EQ(brute_force_gh(x, x), 0.0);
    EXPECT_DOUBLE_EQ(brute_force_gh(line_space({0.0, 2.0}), line_space({0.0})), 1.0);
    EXPECT_THROW(brute_force_gh(random_space(rng, 6), random_space(rng, 6)), std::invalid_argument);
}

TEST(BruteForce, MatchesSubsetEnumeration) {
    std::mt19937 rng(13);
    for (int trial = 0; trial < 40; ++trial) {
        const auto x = random_space(rng, 1 + rng() % 3);
        const auto y = random_space(rng, 1 + rng() % 3);
        EXPECT_NEAR(brute_force_gh(x, y), gh_by_subsets(x, y), 1e-15);
    }
}

TEST(BruteForce, BelowGluedBoundForCertifiedMaps) {
    std::mt19937 rng(17);
    for (int trial = 0; trial < 60; ++trial) {
        const auto x = random_space(rng, 1 + rng() % 5);
        const auto y = random_space(rng, 1 + rng() % 5);
        std::vector<std::size_t> f(x.size());
        if (trial % 2) {
            f = best_map(x, y);
        } else {
            for (auto& v : f) v = rng() % y.size();
        }
        const double eps = distortion_epsilon(f, x, y);
        const auto r = glued_space_bound(x, y, f, eps);
        EXPECT_LE(r.hausdorff, 4.0 * eps + 1e-12);
        EXPECT_LE(brute_force_gh(x, y), r.hausdorff + 1e-12);
        EXPECT_TRUE(r.report.all_pass());
    }
}

TEST(MapG, ClampsEndsAndMatchesDelta) {
    const auto& m = needle_manifold(100, 2);
    const DistanceOracle o(m);
    const auto mesh = sample_mesh(m, 101, 32);
    const auto g = build_G(o, mesh, 257);
    const double c = m.c();
    EXPECT_NEAR(g.delta, kPi - 2.0 * c, 1e-15);
    for (std::size_t i = 0; i < g.s.size(); ++i) {
        if (g.s[i] <= g.delta / 2.0) {
            EXPECT_EQ(g.image[i].t, -c);
        }
        if (g.s[i] >= kPi - g.delta / 2.0) {
            EXPECT_EQ(g.image[i].t, c);
        }
        EXPECT_EQ(g.image[i].theta, 0.0);
    }
    EXPECT_LE(g.distortion, g.delta + 1e-12);
    const double eps0 = kPi - extrinsic_diameter(mesh).value;
    EXPECT_LE(g.delta, eps0);
    EXPECT_LE(g.epsilon, std::pow(kPi, 1.5) * std::sqrt(eps0));
    EXPECT_TRUE(g.report.all_pass());
}

TEST(MapG, SphereIsMeridianButNotDense) {
    const auto& m = sphere_manifold(2);
    const DistanceOracle o(m);
    const auto mesh = sample_mesh(m, 41, 16);
    const auto g = build_G(o, mesh, 129);
    EXPECT_NEAR(g.delta, 0.0, 1e-15);
    EXPECT_NEAR(g.distortion, 0.0, 1e-12);
    EXPECT_NEAR(g.density, kPi / 2.0, 1e-9);
}

TEST(MapG, RejectsTipsOffDiameter) {
    const auto& m = needle_manifold(100, 2);
    const DistanceOracle o(m);
    auto mesh = sample_mesh(m, 21, 8);
    const std::size_t top = (mesh.count_t - 1) * mesh.per_row();
    mesh.points[top * 3 + 2] *= 0.9;
    EXPECT_THROW(build_G(o, mesh), GeometryError);
}

TEST(Rigidity, NeedleSweep) {
    double previous = INFINITY;
    for (double k : {100.0, 200.0, 400.0}) {
        const auto& m = needle_manifold(k, 2);
        const DistanceOracle o(m);
        const auto mesh = sample_mesh(m, 201, 32);
        const auto r = almost_rigidity_report(o, mesh);
        EXPECT_TRUE(r.pass) << k;
        EXPECT_TRUE(r.checks.all_pass()) << k;
        EXPECT_LE(r.delta0, r.eps0);
        EXPECT_DOUBLE_EQ(r.bound_constant, 4.0 * std::pow(kPi, 1.5));
        EXPECT_DOUBLE_EQ(r.gh_bound, 4.0 * r.G_epsilon);
        EXPECT_LT(r.gh_bound, previous) << k;
        previous = r.gh_bound;
    }
}

TEST(Rigidity, SphereBoundHolds) {
    const auto& m = sphere_manifold(2);
    const DistanceOracle o(m);
    const auto r = almost_rigidity_report(o, sample_mesh(m, 41, 16), 129);
    EXPECT_TRUE(std::isnan(r.k));
    EXPECT_NEAR(r.eps0, kPi - 2.0, 1e-9);
    EXPECT_TRUE(r.pass);
}
