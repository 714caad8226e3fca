#include "needle/gh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "needle/error.hpp"
#include "needle/parallel.hpp"

namespace needle {

double hausdorff_distance(const FiniteMetricSpace& space, std::span<const std::size_t> a,
                          std::span<const std::size_t> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("hausdorff_distance: empty subset");
    for (auto idx : {a, b}) {
        for (std::size_t i : idx) {
            if (i >= space.size()) throw std::invalid_argument("hausdorff_distance: index out of range");
        }
    }
    auto directed = [&](std::span<const std::size_t> from, std::span<const std::size_t> to) {
        double worst = 0.0;
        for (std::size_t i : from) {
            double best = INFINITY;
            for (std::size_t j : to) best = std::min(best, space(i, j));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(directed(a, b), directed(b, a));
}

double distortion_epsilon(std::span<const std::size_t> map, const FiniteMetricSpace& x,
                          const FiniteMetricSpace& y) {
    if (map.size() != x.size()) throw std::invalid_argument("distortion_epsilon: map is not total on X");
    for (std::size_t v : map) {
        if (v >= y.size()) throw std::invalid_argument("distortion_epsilon: image index out of range");
    }
    double eps = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            eps = std::max(eps, std::abs(y(map[i], map[j]) - x(i, j)));
        }
    }
    for (std::size_t v = 0; v < y.size(); ++v) {
        double near = INFINITY;
        for (std::size_t u : map) near = std::min(near, y(v, u));
        eps = std::max(eps, near);
    }
    return eps;
}

std::vector<std::size_t> greedy_net(const FiniteMetricSpace& x, double eps) {
    if (x.size() == 0) return {};
    std::vector<std::size_t> net{0};
    std::vector<double> gap(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) gap[i] = x(i, 0);
    while (true) {
        const auto far = std::max_element(gap.begin(), gap.end());
        if (*far <= eps) break;
        const std::size_t f = static_cast<std::size_t>(far - gap.begin());
        net.push_back(f);
        for (std::size_t i = 0; i < x.size(); ++i) gap[i] = std::min(gap[i], x(i, f));
    }
    return net;
}

GluedResult glued_space_bound(const FiniteMetricSpace& x, const FiniteMetricSpace& y,
                              std::span<const std::size_t> map, double epsilon) {
    const double need = distortion_epsilon(map, x, y);
    if (!(epsilon >= need - 1e-12)) {
        throw std::invalid_argument("glued_space_bound: epsilon below the map's distortion");
    }
    const std::size_t nx = x.size(), ny = y.size(), n = nx + ny;
    GluedResult out;
    out.space.x_size = nx;
    out.space.epsilon = epsilon;
    out.space.net = greedy_net(x, epsilon);

    std::vector<double> d(n * n, 0.0);
    std::vector<std::string> labels;
    for (const auto& l : x.labels()) labels.push_back("X:" + l);
    for (const auto& l : y.labels()) labels.push_back("Y:" + l);
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < nx; ++j) d[i * n + j] = x(i, j);
    }
    for (std::size_t i = 0; i < ny; ++i) {
        for (std::size_t j = 0; j < ny; ++j) d[(nx + i) * n + nx + j] = y(i, j);
    }
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < ny; ++j) {
            double best = INFINITY;
            for (std::size_t k : out.space.net) best = std::min(best, x(i, k) + y(j, map[k]));
            d[i * n + nx + j] = d[(nx + j) * n + i] = epsilon + best;
        }
    }
    out.space.z = FiniteMetricSpace(std::move(labels), std::move(d));
    const double violation = out.space.z.max_triangle_violation();
    if (violation > 1e-9) throw GeometryError("glued_space_bound: glued distance is not a metric");

    std::vector<std::size_t> xs(nx), ys(ny);
    for (std::size_t i = 0; i < nx; ++i) xs[i] = i;
    for (std::size_t i = 0; i < ny; ++i) ys[i] = nx + i;
    out.hausdorff = hausdorff_distance(out.space.z, xs, ys);
    out.report.add("triangle_inequality", -violation, 1e-9);
    out.report.add("hausdorff_at_most_4_eps", 4.0 * epsilon - out.hausdorff, 1e-12);
    out.report.set_context("epsilon", epsilon);
    out.report.set_context("net", static_cast<double>(out.space.net.size()));
    return out;
}

namespace {

// Every correspondence contains the graph of some f: X -> Y and of some
// g: Y -> X, and dropping pairs never raises the distortion, so searching
// over (f, g) is exact.
struct CorrespondenceSearch {
    const FiniteMetricSpace& x;
    const FiniteMetricSpace& y;
    std::vector<std::pair<std::size_t, std::size_t>> cells;
    double best = INFINITY;

    void run(std::size_t depth, double current) {
        if (current >= best) return;
        const std::size_t nx = x.size(), ny = y.size();
        if (depth == nx + ny) {
            best = current;
            return;
        }
        const bool from_x = depth < nx;
        const std::size_t fixed = from_x ? depth : depth - nx;
        const std::size_t choices = from_x ? ny : nx;
        for (std::size_t c = 0; c < choices; ++c) {
            const std::size_t a = from_x ? fixed : c;
            const std::size_t b = from_x ? c : fixed;
            double worst = current;
            for (const auto& [u, v] : cells) {
                worst = std::max(worst, std::abs(x(a, u) - y(b, v)));
                if (worst >= best) break;
            }
            if (worst >= best) continue;
            cells.emplace_back(a, b);
            run(depth + 1, worst);
            cells.pop_back();
        }
    }
};

}  // namespace

double brute_force_gh(const FiniteMetricSpace& x, const FiniteMetricSpace& y) {
    if (x.size() == 0 || y.size() == 0) throw std::invalid_argument("brute_force_gh: empty space");
    if (x.size() * y.size() > 30) throw std::invalid_argument("brute_force_gh: |X| |Y| > 30");
    CorrespondenceSearch search{x, y, {}, INFINITY};
    search.run(0, 0.0);
    return 0.5 * search.best;
}

// ---------------------------------------------------------------------------

namespace {

double norm_diff(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

}  // namespace

GMap build_G(const DistanceOracle& oracle, const EmbeddedMesh& mesh, std::size_t samples) {
    const NeedleManifold& m = oracle.manifold();
    if (samples < 2) throw std::invalid_argument("build_G: need at least 2 interval samples");
    if (mesh.n != m.n() || mesh.count_t < 3) throw std::invalid_argument("build_G: mesh does not match");
    const double c = m.c();
    const std::size_t per_row = mesh.per_row();
    const std::size_t rows = mesh.count_t;
    const std::size_t na = static_cast<std::size_t>(m.n() - 1);

    const auto iq = mesh.point(0);
    const auto ip = mesh.point((rows - 1) * per_row);
    const double tip_chord = norm_diff(ip, iq);
    const double diam = extrinsic_diameter(mesh).value;
    if (tip_chord < diam - 1e-12 * std::max(1.0, diam)) {
        throw GeometryError("build_G: the tips do not attain the extrinsic diameter");
    }
    const double eps0 = kPi - diam;

    GMap g;
    const SurfacePoint q{-c, 0.0}, p{c, 0.0};
    g.delta = kPi - oracle.distance(p, q);
    if (g.delta < 0.0) throw GeometryError("build_G: d(p, q) exceeds pi");

    g.s.resize(samples);
    g.image.resize(samples);
    g.source_gap = kPi / static_cast<double>(samples - 1);
    for (std::size_t i = 0; i < samples; ++i) {
        const double s = (i + 1 == samples) ? kPi : g.source_gap * static_cast<double>(i);
        g.s[i] = s;
        if (s <= g.delta / 2.0) {
            g.image[i] = q;
        } else if (s >= kPi - g.delta / 2.0) {
            g.image[i] = p;
        } else {
            g.image[i] = {std::clamp(-c + s - g.delta / 2.0, -c, c), 0.0};
        }
    }

    // Pair distortion over the samples.
    std::vector<double> row_worst(samples, 0.0);
    parallel_for(samples, [&](std::size_t i) {
        double w = 0.0;
        for (std::size_t j = i + 1; j < samples; ++j) {
            w = std::max(w, std::abs(oracle.distance(g.image[i], g.image[j]) - (g.s[j] - g.s[i])));
        }
        row_worst[i] = w;
    });
    g.distortion = *std::max_element(row_worst.begin(), row_worst.end());

    // Fiber gaps of the mesh samples from the theta = 0 fiber point.
    std::vector<double> gaps;
    {
        const std::vector<double> zero(na, 0.0);
        const auto u0 = sphere_point(zero);
        for (std::size_t j = 0; j < per_row; ++j) {
            const auto u = sphere_point(mesh.angle(j));
            double dot = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * u0[i];
            gaps.push_back(std::acos(std::clamp(dot, -1.0, 1.0)));
        }
        std::sort(gaps.begin(), gaps.end());
        gaps.erase(std::unique(gaps.begin(), gaps.end(), [](double a, double b) { return b - a < 1e-12; }),
                   gaps.end());
    }

    // Image meridian heights, for the nearest image point on a level.
    std::vector<double> image_t(samples);
    for (std::size_t i = 0; i < samples; ++i) image_t[i] = g.image[i].t;
    auto nearest_image_offset = [&](double t) {
        const auto it = std::lower_bound(image_t.begin(), image_t.end(), t);
        double best = INFINITY;
        if (it != image_t.end()) best = *it - t;
        if (it != image_t.begin()) best = std::min(best, t - *(it - 1));
        return best;
    };

    // Per interior row: the level set diameter, and each sample's distance to
    // the image bounded through (t, 0), the nearest image point on that
    // meridian, and the two tips.
    const std::size_t inner = rows - 2;
    g.level_t.resize(inner);
    g.level_diameter.assign(inner, 0.0);
    std::vector<double> row_density(inner, 0.0);
    parallel_for(inner, [&](std::size_t r) {
        const double t = mesh.ts[(r + 1) * per_row];
        g.level_t[r] = t;
        std::vector<SurfacePoint> targets;
        for (double gap : gaps) targets.push_back({t, gap});
        const auto d = oracle.distances_from({t, 0.0}, targets);
        const double shift = nearest_image_offset(t);
        const double tip = c - std::abs(t);
        double dens = 0.0;
        for (double v : d) {
            g.level_diameter[r] = std::max(g.level_diameter[r], v);
            dens = std::max(dens, std::min(v + shift, tip));
        }
        row_density[r] = dens;
    });
    g.density = inner ? *std::max_element(row_density.begin(), row_density.end()) : 0.0;

    // Covering radius: move within a cell along t, then along each angle;
    // every angular metric coefficient is at most f~(t)^2.
    double angular = kPi / static_cast<double>(mesh.count_theta);
    angular += static_cast<double>(na - 1) * kPi / (2.0 * static_cast<double>(mesh.count_theta - 1));
    for (std::size_t r = 0; r + 1 < rows; ++r) {
        const double t0 = mesh.ts[r * per_row], t1 = mesh.ts[(r + 1) * per_row];
        double fmax = std::max(m.f(t0), m.f(t1));
        if (t0 < 0.0 && t1 > 0.0) fmax = std::max(fmax, m.f(0.0));
        g.mesh_radius = std::max(g.mesh_radius, 0.5 * (t1 - t0) + fmax * angular);
    }

    g.epsilon = std::max(g.distortion + 2.0 * g.source_gap, g.density + g.mesh_radius);

    // Heights along the axis through q and p: each row is one level.
    double spread = 0.0;
    {
        std::vector<double> axis(ip.size());
        for (std::size_t i = 0; i < axis.size(); ++i) axis[i] = (ip[i] - iq[i]) / tip_chord;
        for (std::size_t r = 0; r < rows; ++r) {
            double lo = INFINITY, hi = -INFINITY;
            for (std::size_t j = 0; j < per_row; ++j) {
                const auto x = mesh.point(r * per_row + j);
                double h = 0.0;
                for (std::size_t i = 0; i < axis.size(); ++i) h += (x[i] - iq[i]) * axis[i];
                lo = std::min(lo, h);
                hi = std::max(hi, h);
            }
            spread = std::max(spread, hi - lo);
        }
    }
    const double level_max =
        g.level_diameter.empty() ? 0.0 : *std::max_element(g.level_diameter.begin(), g.level_diameter.end());
    g.report.add("levels_are_rows", -spread, 1e-9);
    g.report.add("distortion_at_most_delta", g.delta - g.distortion, 1e-9);
    g.report.add("level_set_diameter_within_pi_sqrt_pi_eps0", kPi * std::sqrt(kPi * eps0) - level_max, 0.0);
    g.report.add("epsilon_at_most_pi_3_2_sqrt_eps0", std::pow(kPi, 1.5) * std::sqrt(eps0) - g.epsilon, 0.0);
    g.report.set_context("delta", g.delta);
    g.report.set_context("eps0", eps0);
    g.report.set_context("distortion", g.distortion);
    g.report.set_context("density", g.density);
    g.report.set_context("source_gap", g.source_gap);
    g.report.set_context("mesh_radius", g.mesh_radius);
    g.report.set_context("level_diameter_max", level_max);
    g.report.set_context("samples", static_cast<double>(samples));
    return g;
}

RigidityReport almost_rigidity_report(const DistanceOracle& oracle, const EmbeddedMesh& mesh,
                                      std::size_t samples) {
    const NeedleManifold& m = oracle.manifold();
    RigidityReport r;
    const auto& bump = m.profile().base().bump();
    r.k = bump ? bump->k() : std::numeric_limits<double>::quiet_NaN();
    r.n = m.n();
    r.count_t = mesh.count_t;
    r.count_theta = mesh.count_theta;
    r.diam_extrinsic = extrinsic_diameter(mesh).value;
    r.eps0 = kPi - r.diam_extrinsic;
    const GMap g = build_G(oracle, mesh, samples);
    r.delta0 = g.delta;
    r.G_epsilon = g.epsilon;
    r.gh_bound = 4.0 * g.epsilon;
    r.ratio = r.gh_bound / std::sqrt(r.eps0);
    r.bound_constant = 4.0 * std::pow(kPi, 1.5);
    r.pass = r.ratio <= r.bound_constant;
    r.checks.add("delta0_at_most_eps0", r.eps0 - r.delta0, 1e-12);
    r.checks.add("ratio_at_most_4_pi_3_2", r.bound_constant - r.ratio, 0.0);
    r.checks.append(g.report, "G");
    return r;
}

}  // namespace needle
