#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <memory>
#include <random>

#include "needle/comparison.hpp"
#include "test_support.hpp"

using namespace needle;
using needle::testing::needle_manifold;
using needle::testing::sphere_manifold;

namespace {

const DistanceOracle& sphere_oracle() {
    static DistanceOracle o(sphere_manifold(2));
    return o;
}

const DistanceOracle& needle_oracle(double k) {
    static std::map<double, std::unique_ptr<DistanceOracle>> cache;
    auto& slot = cache[k];
    if (!slot) slot = std::make_unique<DistanceOracle>(needle_manifold(k, 2));
    return *slot;
}

double sphere_exact(SurfacePoint a, SurfacePoint b) {
    return std::acos(std::clamp(std::sin(a.t) * std::sin(b.t) +
                                    std::cos(a.t) * std::cos(b.t) * std::cos(b.theta - a.theta),
                                -1.0, 1.0));
}

std::vector<SurfacePoint> random_points(double c, std::size_t count, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> ut(-c, c), uth(0.0, 2.0 * kPi);
    std::vector<SurfacePoint> out(count);
    for (auto& p : out) p = {ut(rng), uth(rng)};
    return out;
}

std::vector<double> embed2(const NeedleManifold& m, SurfacePoint x) {
    const double a[] = {x.theta};
    return embed_point(m, x.t, a);
}

// Dense-stencil Dijkstra values, k = 100, from tests/oracles/distance_oracle.py
// (401 x 320 grid, offsets up to 6). Upper bounds with ~3e-4 direction bias.
struct DensePair {
    SurfacePoint a, b;
    double graph;
};
const DensePair kDense100[] = {
    {{-1.3480162107974012, 4.1765609357672151}, {-0.95516247751378247, 5.8200074855617814}, 0.394009718},
    {{-1.2328902842995042, 1.4181948602756844}, {1.2376238834295414, 5.1910505291467386}, 2.471927138},
    {{-1.2714942617728693, 5.5902014312070287}, {0.66749854798653296, 3.2540524344701351}, 1.940733933},
    {{0.89116219523175055, 3.692413435905928}, {0.73955089235931237, 4.2255064729503982}, 0.1527280534},
    {{1.4678558478209214, 6.2114257435564957}, {0.8684122495581994, 0.15801752958680648}, 0.5994533029},
    {{1.315495879307474, 2.5818380056389238}, {-0.96894236268233991, 1.2818287332982388}, 2.284888279},
};

}  // namespace

TEST(Distance, SphereMatchesClosedForm) {
    const auto& o = sphere_oracle();
    const auto pts = random_points(kPi / 2.0, 40, 3);
    for (std::size_t i = 0; i + 1 < pts.size(); i += 2) {
        EXPECT_NEAR(o.distance(pts[i], pts[i + 1]), sphere_exact(pts[i], pts[i + 1]), 1e-9);
    }
}

TEST(Distance, SphereAntipodesAndEquator) {
    const auto& o = sphere_oracle();
    EXPECT_NEAR(o.distance({0.0, 0.0}, {0.0, kPi}), kPi, 1e-9);
    EXPECT_NEAR(o.distance({0.4, 1.0}, {-0.4, 1.0 + kPi}), kPi, 1e-9);
    for (double gap : {0.1, 1.0, 2.5, 3.0}) {
        EXPECT_NEAR(o.distance({0.0, 0.3}, {0.0, 0.3 + gap}), gap, 1e-9) << gap;
    }
}

TEST(Distance, NeedleTipsAreTwoC) {
    const auto& o = needle_oracle(100);
    const double c = o.manifold().c();
    const auto g = o.geodesic({c, 0.0}, {-c, 1.3});
    EXPECT_DOUBLE_EQ(g.length, 2.0 * c);
    EXPECT_EQ(g.kind, PathKind::TipMeridian);
}

TEST(Distance, SameMeridian) {
    const auto& o = needle_oracle(100);
    const auto g = o.geodesic({-0.7, 2.0}, {1.1, 2.0});
    EXPECT_DOUBLE_EQ(g.length, 1.8);
    EXPECT_EQ(g.kind, PathKind::Meridian);
    ASSERT_TRUE(g.heading.has_value());
    EXPECT_EQ(*g.heading, 0.0);
}

TEST(Distance, ZeroForCoincidentPoints) {
    EXPECT_EQ(needle_oracle(100).distance({0.3, 0.4}, {0.3, 0.4}), 0.0);
}

TEST(Distance, NeedleAgainstDenseGraphOracle) {
    const auto& o = needle_oracle(100);
    for (const auto& p : kDense100) {
        const double d = o.distance(p.a, p.b);
        EXPECT_LE(d, p.graph + 1e-9);
        EXPECT_GE(d, p.graph * (1.0 - 1e-3));
    }
}

TEST(Distance, NeverAboveGraphEstimate) {
    const auto& o = needle_oracle(200);
    const auto pts = random_points(o.manifold().c(), 20, 5);
    for (std::size_t i = 0; i + 1 < pts.size(); i += 2) {
        EXPECT_LE(o.distance(pts[i], pts[i + 1]), o.graph_distance(pts[i], pts[i + 1]) + 1e-12);
    }
}

TEST(Distance, RefinementLevelsAgree) {
    const auto& m = needle_manifold(100, 2);
    const SurfacePoint a{-0.9, 0.2}, b{0.5, 2.9};
    double prev_graph = INFINITY, prev = NAN;
    for (std::size_t level = 0; level < 3; ++level) {
        const std::size_t scale = std::size_t{1} << level;
        DistanceOracle o(m, {.graph_t = 100 * scale + 1, .graph_theta = 32 * scale});
        const double g = o.graph_distance(a, b);
        const double d = o.distance(a, b);
        EXPECT_LE(g, prev_graph + 1e-12);
        EXPECT_LE(d, g + 1e-12);
        if (level > 0) {
            EXPECT_NEAR(d, prev, 1e-3);
        }
        prev_graph = g;
        prev = d;
    }
}

TEST(Distance, MetricAxiomsAndChordBelowArc) {
    const auto& o = needle_oracle(100);
    const auto pts = random_points(o.manifold().c(), 10, 9);
    const auto space = o.distance_matrix(pts);
    EXPECT_LE(space.max_triangle_violation(), 1e-6);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            EXPECT_NEAR(o.distance(pts[j], pts[i]), space(i, j), 1e-9);
            const auto x = embed2(o.manifold(), pts[i]);
            const auto y = embed2(o.manifold(), pts[j]);
            double chord = 0.0;
            for (std::size_t q = 0; q < 3; ++q) chord += (x[q] - y[q]) * (x[q] - y[q]);
            EXPECT_LE(std::sqrt(chord), space(i, j) + 1e-9);
        }
    }
}

TEST(Distance, HigherDimensionReduction) {
    static const DistanceOracle o(sphere_manifold(3));
    const double a[] = {0.4, 1.0}, b[] = {2.0, 5.5};
    const auto ua = sphere_point(a), ub = sphere_point(b);
    double dot = 0.0;
    for (std::size_t i = 0; i < ua.size(); ++i) dot += ua[i] * ub[i];
    const double ta = 0.3, tb = -0.8;
    const double exact = std::acos(std::sin(ta) * std::sin(tb) + std::cos(ta) * std::cos(tb) * dot);
    EXPECT_NEAR(o.distance_nd(ta, a, tb, b), exact, 1e-9);
}

TEST(Distance, GeodesicPathEndsAtTarget) {
    const auto& o = needle_oracle(100);
    const SurfacePoint a{-0.9, 0.2}, b{0.5, 2.9};
    const auto g = o.geodesic(a, b);
    ASSERT_EQ(g.kind, PathKind::Shooting);
    ASSERT_GE(g.path.size(), 2u);
    EXPECT_NEAR(g.path.back().t, b.t, 1e-9);
    EXPECT_NEAR(std::remainder(g.path.back().theta - b.theta, 2.0 * kPi), 0.0, 1e-8);
}

TEST(Excess, ZeroBetweenNeedleTips) {
    const auto& o = needle_oracle(100);
    const double c = o.manifold().c();
    const auto pts = random_points(c, 30, 13);
    const auto r = excess_sup(o, {c, 0.0}, {-c, 0.0}, pts);
    EXPECT_NEAR(r.sup, 0.0, 1e-12);
    EXPECT_TRUE(r.report.all_pass());
}

TEST(Excess, SphereAntipodesEqualityCase) {
    const auto& o = sphere_oracle();
    const auto pts = random_points(kPi / 2.0, 10, 17);
    const auto r = excess_sup(o, {0.2, 0.0}, {-0.2, kPi}, pts);
    EXPECT_NEAR(r.bound, 0.0, 1e-9);
    EXPECT_NEAR(r.sup, 0.0, 1e-8);
    EXPECT_TRUE(r.report.all_pass());
}

TEST(Excess, NeedleOffTipPositiveButBounded) {
    const auto& o = needle_oracle(100);
    const double c = o.manifold().c();
    const auto pts = random_points(c, 40, 19);
    const auto r = excess_sup(o, {c / 2.0, 0.0}, {-c / 2.0, 0.0}, pts);
    EXPECT_GT(r.sup, 1e-3);
    EXPECT_LE(r.sup, r.bound);
    EXPECT_TRUE(r.report.all_pass());

    std::vector<SurfacePoint> more(pts);
    const auto extra = random_points(c, 10, 23);
    more.insert(more.end(), extra.begin(), extra.end());
    EXPECT_GE(excess_sup(o, {c / 2.0, 0.0}, {-c / 2.0, 0.0}, more).sup, r.sup);
}

TEST(Toponogov, DegenerateHingeIsEquality) {
    const auto& o = sphere_oracle();
    const auto h = make_hinge(o, {0.0, 0.0}, {0.0, 0.9}, {0.0, 0.4});
    ASSERT_TRUE(h.has_value());
    EXPECT_NEAR(h->alpha, 0.0, 1e-6);
    EXPECT_NEAR(toponogov_margin(o, *h), 0.0, 1e-9);
}

TEST(Toponogov, SphereHingesAreEqualities) {
    const auto& o = sphere_oracle();
    const auto pts = random_points(1.4, 30, 29);
    int checked = 0;
    for (std::size_t i = 0; i + 2 < pts.size(); i += 3) {
        const auto h = make_hinge(o, pts[i], pts[i + 1], pts[i + 2]);
        if (!h) continue;
        ++checked;
        EXPECT_NEAR(toponogov_margin(o, *h), 0.0, 1e-4);
    }
    EXPECT_GE(checked, 8);
}

TEST(Toponogov, NeedleHingesNonnegative) {
    const auto& o = needle_oracle(100);
    const auto pts = random_points(o.manifold().c(), 90, 31);
    int checked = 0;
    for (std::size_t i = 0; i + 2 < pts.size(); i += 3) {
        const auto h = make_hinge(o, pts[i], pts[i + 1], pts[i + 2]);
        if (!h) continue;
        ++checked;
        EXPECT_GE(toponogov_margin(o, *h), -1e-4);
    }
    EXPECT_GE(checked, 20);
}

TEST(Toponogov, RejectsLegsBeyondPi) {
    const auto& o = sphere_oracle();
    Hinge h;
    h.leg0.length = 3.5;
    h.leg1.length = 0.5;
    EXPECT_THROW(toponogov_margin(o, h), std::invalid_argument);
}

TEST(Toponogov, TipVertexRejected) {
    const auto& o = needle_oracle(100);
    EXPECT_FALSE(make_hinge(o, {o.manifold().c(), 0.0}, {0.0, 0.0}, {0.0, 1.0}).has_value());
}

TEST(Triangle, RightTriangle) {
    const double a[] = {0, 3}, b[] = {0, 0}, c[] = {4, 0};
    const auto r = triangle_height(a, b, c);
    EXPECT_NEAR(r.h, 3.0, 1e-15);
    EXPECT_NEAR(r.bound, 12.0, 1e-14);
}

TEST(Triangle, IsoscelesEquality) {
    const double a[] = {0, 1}, b[] = {-1, 0}, c[] = {1, 0};
    const auto r = triangle_height(a, b, c);
    EXPECT_NEAR(r.h * r.h, 1.0, 1e-15);
    EXPECT_NEAR(r.bound, 1.0, 1e-15);
}

TEST(Triangle, Collinear) {
    const double a[] = {2, 0}, b[] = {0, 0}, c[] = {4, 0};
    EXPECT_EQ(triangle_height(a, b, c).h, 0.0);
}

TEST(Triangle, RejectsDegenerateBase) {
    const double a[] = {0, 1}, b[] = {1, 1};
    EXPECT_THROW(triangle_height(a, b, b), std::invalid_argument);
}

TEST(Triangle, MatchesProjectionAndBound) {
    std::mt19937 rng(37);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        double a[4], b[4], c[4];
        for (int i = 0; i < 4; ++i) {
            a[i] = u(rng);
            b[i] = u(rng);
            c[i] = u(rng);
        }
        double len2 = 0.0, along = 0.0;
        for (int i = 0; i < 4; ++i) {
            len2 += (c[i] - b[i]) * (c[i] - b[i]);
            along += (a[i] - b[i]) * (c[i] - b[i]);
        }
        double h2 = 0.0;
        for (int i = 0; i < 4; ++i) {
            const double r = a[i] - b[i] - along / len2 * (c[i] - b[i]);
            h2 += r * r;
        }
        const auto r = triangle_height(a, b, c);
        EXPECT_NEAR(r.h, std::sqrt(h2), 1e-12);
        EXPECT_LE(r.h * r.h, r.bound * (1.0 + 1e-12) + 1e-15);
    }
}

TEST(Width, SphereAntipodes) {
    const auto& m = sphere_manifold(2);
    const auto mesh = sample_mesh(m, 101, 64);
    const auto top = embed2(m, {m.c(), 0.0}), bottom = embed2(m, {-m.c(), 0.0});
    const auto r = width_ratio(mesh, top, bottom);
    EXPECT_NEAR(r.chord, 2.0, 1e-6);
    EXPECT_NEAR(r.sup_height, 1.0, 1e-6);
    EXPECT_NEAR(r.ratio, 1.0 / std::sqrt(kPi - 2.0), 1e-5);
}

TEST(Width, SamplesOnSegmentContributeNothing) {
    EmbeddedMesh mesh;
    mesh.n = 2;
    mesh.count_t = 3;
    mesh.count_theta = 1;
    mesh.ts = {0, 0, 0};
    mesh.angles = {0, 0, 0};
    mesh.points = {0, 0, 1, 0, 0, 0, 0, 0, -1};
    const double p[] = {0, 0, 1}, q[] = {0, 0, -1};
    EXPECT_EQ(width_ratio(mesh, p, q).sup_height, 0.0);
}

TEST(Width, RejectsLongChord) {
    const auto mesh = sample_mesh(sphere_manifold(2), 5, 4);
    const double p[] = {0, 0, 2}, q[] = {0, 0, -2};
    EXPECT_THROW(width_ratio(mesh, p, q), std::invalid_argument);
}

TEST(Width, NeedleBelowSqrtPi) {
    for (double k : {100.0, 200.0}) {
        const auto& m = needle_manifold(k, 2);
        const auto mesh = sample_mesh(m, 401, 32);
        const auto top = embed2(m, {m.c(), 0.0}), bottom = embed2(m, {-m.c(), 0.0});
        const auto r = width_ratio(mesh, top, bottom);
        EXPECT_LE(r.ratio, std::sqrt(kPi)) << k;
        EXPECT_GT(r.ratio, 0.0);
    }
}
