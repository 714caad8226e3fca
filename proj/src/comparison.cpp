#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "needle/comparison.hpp"

namespace needle {

ExcessResult excess_sup(const DistanceOracle& oracle, SurfacePoint p, SurfacePoint q,
                        std::span<const SurfacePoint> samples, double tol) {
    ExcessResult out;
    out.d_pq = oracle.distance(p, q);
    out.bound = 2.0 * (kPi - out.d_pq);
    const auto dp = oracle.distances_from(p, samples);
    const auto dq = oracle.distances_from(q, samples);
    out.sup = samples.empty() ? 0.0 : -INFINITY;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double e = dp[i] + dq[i] - out.d_pq;
        if (e > out.sup) {
            out.sup = e;
            out.argmax = i;
        }
    }
    out.report.add("excess_at_most_2_pi_minus_d", out.bound - out.sup, tol);
    out.report.set_context("d_pq", out.d_pq);
    out.report.set_context("samples", static_cast<double>(samples.size()));
    return out;
}

std::optional<Hinge> make_hinge(const DistanceOracle& oracle, SurfacePoint vertex, SurfacePoint end0,
                                SurfacePoint end1) {
    const NeedleManifold& m = oracle.manifold();
    if (std::abs(vertex.t) >= m.c()) return std::nullopt;
    Hinge hg{vertex, end0, end1, oracle.geodesic(vertex, end0), oracle.geodesic(vertex, end1), 0.0};
    for (const Geodesic* g : {&hg.leg0, &hg.leg1}) {
        if (!g->heading || !(g->length > 0.0)) return std::nullopt;
    }
    const auto u = embedded_direction(m, vertex, *hg.leg0.heading);
    const auto v = embedded_direction(m, vertex, *hg.leg1.heading);
    const double dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    hg.alpha = std::acos(std::clamp(dot, -1.0, 1.0));
    return hg;
}

double toponogov_margin(const DistanceOracle& oracle, const Hinge& hinge) {
    const double l0 = hinge.leg0.length, l1 = hinge.leg1.length;
    if (l0 > kPi || l1 > kPi) throw std::invalid_argument("toponogov_margin: leg longer than pi");
    const double cs = std::cos(l0) * std::cos(l1) + std::sin(l0) * std::sin(l1) * std::cos(hinge.alpha);
    const double model = std::acos(std::clamp(cs, -1.0, 1.0));
    return model - oracle.distance(hinge.end0, hinge.end1);
}

namespace {
double dist(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
    return std::sqrt(s);
}
}  // namespace

TriangleHeight triangle_height(std::span<const double> a, std::span<const double> b,
                               std::span<const double> c) {
    if (a.size() != b.size() || b.size() != c.size()) {
        throw std::invalid_argument("triangle_height: dimension mismatch");
    }
    const double x = dist(b, a), y = dist(c, a), z = dist(b, c);
    if (z == 0.0) throw std::invalid_argument("triangle_height: b == c");
    const double s = (x + y) * (x + y) - z * z;
    const double d = z * z - (x - y) * (x - y);
    return {std::sqrt(std::max(0.0, s * d / (4.0 * z * z))), s / 4.0};
}

WidthResult width_ratio(const EmbeddedMesh& mesh, std::span<const double> p, std::span<const double> q) {
    const std::size_t dim = static_cast<std::size_t>(mesh.n + 1);
    if (p.size() != dim || q.size() != dim) throw std::invalid_argument("width_ratio: dimension mismatch");
    WidthResult out;
    out.chord = dist(p, q);
    if (!(out.chord < kPi) || out.chord == 0.0) {
        throw std::invalid_argument("width_ratio: need 0 < |p - q| < pi");
    }
    std::vector<double> u(dim);
    for (std::size_t i = 0; i < dim; ++i) u[i] = (q[i] - p[i]) / out.chord;
    for (std::size_t s = 0; s < mesh.size(); ++s) {
        const auto x = mesh.point(s);
        double along = 0.0;
        for (std::size_t i = 0; i < dim; ++i) along += (x[i] - p[i]) * u[i];
        double h2 = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            const double r = x[i] - p[i] - along * u[i];
            h2 += r * r;
        }
        const double h = std::sqrt(h2);
        if (h > out.sup_height) {
            out.sup_height = h;
            out.argmax = s;
        }
    }
    out.ratio = out.sup_height / std::sqrt(kPi - out.chord);
    return out;
}

}  // namespace needle
