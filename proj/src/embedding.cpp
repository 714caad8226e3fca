#include "needle/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "needle/error.hpp"
#include "needle/parallel.hpp"

namespace needle {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double z_integrand(const NeedleProfile& p, double t) { return std::sqrt(p.one_minus_d1_sq(t)); }

double simpson(const NeedleProfile& p, double a, double b) {
    if (b == a) return 0.0;
    return (z_integrand(p, a) + 4.0 * z_integrand(p, 0.5 * (a + b)) + z_integrand(p, b)) * (b - a) /
           6.0;
}

}  // namespace

NeedleManifold::NeedleManifold(int n, NeedleProfile profile) : n_(n), profile_(std::move(profile)) {
    if (n < 2) throw std::invalid_argument("NeedleManifold: n must be >= 2");
    const auto g = profile_.grid();
    z_.reserve(g.size() + 1);
    z_.push_back(0.0);
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
        z_.push_back(z_.back() + simpson(profile_, g[i], g[i + 1]));
    }
    z_.push_back(z_.back() + simpson(profile_, g.back(), profile_.c()));
}

double NeedleManifold::z(double t) const {
    const double a = std::abs(t);
    if (a > c()) throw std::out_of_range("z evaluated outside [-c, c]");
    const auto g = profile_.grid();
    auto it = std::upper_bound(g.begin(), g.end(), a);
    const std::size_t i = static_cast<std::size_t>(it - g.begin()) - 1;
    const double v = z_[i] + simpson(profile_, g[i], a);
    return t < 0.0 ? -v : v;
}

double NeedleManifold::z_prime(double t) const { return z_integrand(profile_, t); }

double NeedleManifold::interior_limit() const { return c() - 10.0 * profile_.base().step(); }

std::vector<double> sphere_point(std::span<const double> angles) {
    std::vector<double> u(angles.size() + 1);
    double prod = 1.0;
    for (std::size_t i = 0; i < angles.size(); ++i) {
        u[i] = prod * std::cos(angles[i]);
        prod *= std::sin(angles[i]);
    }
    u.back() = prod;
    return u;
}

std::vector<double> embed_point(const NeedleManifold& m, double t, std::span<const double> angles,
                                double tol) {
    if (angles.size() != static_cast<std::size_t>(m.n() - 1)) {
        throw std::invalid_argument("embed_point: expected n-1 angles");
    }
    if (!(std::abs(t) <= m.c())) throw std::invalid_argument("embed_point: |t| > c");
    const NeedleProfile& p = m.profile();
    // Unclamped 1 - f~'^2 from the energy identity.
    const double a = std::abs(t);
    const double f = p.base().eval_f(a);
    const double raw = (f * f + p.base().energy_defect(a)) / (p.scale() * p.scale());
    if (raw < -tol) throw GeometryError("embed_point: 1 - f~'^2 < 0, profile not rescaled");

    std::vector<double> x = sphere_point(angles);
    const double r = m.f(t);
    for (double& v : x) v *= r;
    x.push_back(m.z(t));
    return x;
}

double pullback_residual(const NeedleManifold& m, double t, std::span<const double> angles,
                         double fd_step) {
    const std::size_t dim = angles.size() + 1;
    std::vector<std::vector<double>> partial(dim);
    std::vector<double> coords(dim);
    coords[0] = t;
    std::copy(angles.begin(), angles.end(), coords.begin() + 1);
    for (std::size_t k = 0; k < dim; ++k) {
        auto plus = coords, minus = coords;
        plus[k] += fd_step;
        minus[k] -= fd_step;
        const auto xp = embed_point(m, plus[0], std::span<const double>(plus).subspan(1));
        const auto xm = embed_point(m, minus[0], std::span<const double>(minus).subspan(1));
        partial[k].resize(xp.size());
        for (std::size_t j = 0; j < xp.size(); ++j) partial[k][j] = (xp[j] - xm[j]) / (2.0 * fd_step);
    }
    const double r = m.f(t);
    std::vector<double> expected(dim, 1.0);
    double sin_prod = 1.0;
    for (std::size_t k = 1; k < dim; ++k) {
        expected[k] = r * r * sin_prod * sin_prod;
        sin_prod *= std::sin(angles[k - 1]);
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = i; j < dim; ++j) {
            double g = 0.0;
            for (std::size_t l = 0; l < partial[i].size(); ++l) g += partial[i][l] * partial[j][l];
            worst = std::max(worst, std::abs(g - (i == j ? expected[i] : 0.0)));
        }
    }
    return worst;
}

std::vector<double> interior_grid(const NeedleManifold& m, std::size_t count) {
    if (count < 2) throw std::invalid_argument("interior_grid: count must be >= 2");
    const double lim = m.interior_limit();
    std::vector<double> ts(count);
    for (std::size_t i = 0; i < count; ++i) {
        ts[i] = -lim + 2.0 * lim * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    ts.back() = lim;
    return ts;
}

namespace {

// Meridian curvatures of the embedded profile curve (x_1, x_{n+1}) at angle 0,
// from fourth-order central differences.
void fd_meridian_curvatures(const NeedleManifold& m, double t, double& kappa_m,
                            double& kappa_theta) {
    kappa_m = kappa_theta = kNaN;
    const double a = std::abs(t);
    double room = m.c() - a;
    if (const auto& bump = m.profile().base().bump()) {
        if (a >= bump->support_begin() && a <= bump->support_end()) return;
        room = std::min(room, a < bump->support_begin() ? bump->support_begin() - a
                                                        : a - bump->support_end());
    }
    // Second differences of z (|z| ~ 1.5) carry ~3e-16 / h^2 roundoff; below
    // h = 1e-4 that no longer resolves kappa_m to 1e-6.
    const double h = std::min(1e-3, room / 2.0);
    if (h < 1e-4) return;

    std::array<std::array<double, 2>, 5> pts;
    const std::vector<double> zero(m.n() - 1, 0.0);
    for (int s = -2; s <= 2; ++s) {
        const auto x = embed_point(m, t + s * h, zero);
        pts[s + 2] = {x.front(), x.back()};
    }
    double d1[2], d2[2];
    for (int k = 0; k < 2; ++k) {
        d1[k] = (-pts[4][k] + 8.0 * pts[3][k] - 8.0 * pts[1][k] + pts[0][k]) / (12.0 * h);
        d2[k] = (-pts[4][k] + 16.0 * pts[3][k] - 30.0 * pts[2][k] + 16.0 * pts[1][k] - pts[0][k]) /
                (12.0 * h * h);
    }
    const double speed = std::hypot(d1[0], d1[1]);
    kappa_m = (d2[1] * d1[0] - d2[0] * d1[1]) / (speed * speed * speed);
    kappa_theta = d1[1] / (speed * pts[2][0]);
}

}  // namespace

CurvatureReport curvature_report(const NeedleManifold& m, std::span<const double> ts,
                                 double degenerate_tol) {
    const double lim = m.interior_limit();
    for (double t : ts) {
        if (!(std::abs(t) <= lim)) {
            throw std::invalid_argument("curvature_report: sample outside the interior margin");
        }
    }
    CurvatureReport out;
    out.samples.resize(ts.size());
    const double nm1 = m.n() - 1;
    parallel_for(ts.size(), [&](std::size_t i) {
        const double t = ts[i];
        const double f = m.f(t);
        const double fpp = m.fpp(t);
        const double q = m.profile().one_minus_d1_sq(t);
        if (!(q > degenerate_tol)) {
            throw GeometryError("curvature_report: vertical meridian tangent away from the tips");
        }
        const double zp = std::sqrt(q);
        CurvatureSample s{};
        s.t = t;
        s.k_rad = -fpp / f;
        s.k_sph = q / (f * f);
        s.kappa_m = -fpp / zp;
        s.kappa_theta = zp / f;
        s.mean = s.kappa_m + nm1 * s.kappa_theta;
        s.ricci_m = s.kappa_m * (s.mean - s.kappa_m);
        s.ricci_theta = s.kappa_theta * (s.mean - s.kappa_theta);
        s.gauss_rad = std::abs(s.k_rad - s.kappa_m * s.kappa_theta) / std::max(1.0, std::abs(s.k_rad));
        s.gauss_sph =
            std::abs(s.k_sph - s.kappa_theta * s.kappa_theta) / std::max(1.0, std::abs(s.k_sph));
        fd_meridian_curvatures(m, t, s.fd_kappa_m, s.fd_kappa_theta);
        out.samples[i] = s;
    });

    double min_k = INFINITY, min_kappa = INFINITY, min_ricci = INFINITY;
    double max_gauss = 0.0, max_mean_defect = 0.0, max_fd = 0.0;
    std::size_t fd_samples = 0;
    for (const auto& s : out.samples) {
        min_k = std::min({min_k, s.k_rad, s.k_sph});
        min_kappa = std::min({min_kappa, s.kappa_m, s.kappa_theta});
        min_ricci = std::min({min_ricci, s.ricci_m, s.ricci_theta});
        max_mean_defect =
            std::max(max_mean_defect, std::abs(s.mean - s.kappa_m - nm1 * s.kappa_theta));
        max_gauss = std::max({max_gauss, s.gauss_rad, s.gauss_sph});
        if (std::isfinite(s.fd_kappa_m) && std::isfinite(s.fd_kappa_theta)) {
            max_fd = std::max({max_fd,
                               std::abs(s.fd_kappa_m - s.kappa_m) / std::max(1.0, std::abs(s.kappa_m)),
                               std::abs(s.fd_kappa_theta - s.kappa_theta) /
                                   std::max(1.0, std::abs(s.kappa_theta))});
            ++fd_samples;
        }
    }
    auto& r = out.summary;
    r.set_context("n", m.n());
    r.set_context("samples", static_cast<double>(ts.size()));
    r.set_context("fd_samples", static_cast<double>(fd_samples));
    r.add("sectional_at_least_1", min_k - 1.0, 1e-6);
    r.add("principal_curvatures_positive", min_kappa, 0.0);
    r.add("ricci_positive", min_ricci, 0.0);
    r.add("mean_curvature_trace", -max_mean_defect, 1e-12);
    // Relative to max(1, |K|): K_sph reaches ~1/f~^2 just before the bump.
    r.add("gauss_equation_relative", -max_gauss, 1e-6);
    r.add("finite_difference_principal_curvatures", -max_fd, 1e-6);
    return out;
}

EmbeddedMesh sample_mesh(const NeedleManifold& m, std::size_t count_t, std::size_t count_theta) {
    if (count_t < 2 || count_theta < 3) {
        throw std::invalid_argument("sample_mesh: need count_t >= 2 and count_theta >= 3");
    }
    const int n = m.n();
    const std::size_t na = static_cast<std::size_t>(n - 1);
    std::size_t per_row = 1;
    for (std::size_t k = 0; k < na; ++k) per_row *= count_theta;

    EmbeddedMesh mesh;
    mesh.n = n;
    mesh.count_t = count_t;
    mesh.count_theta = count_theta;
    mesh.ts.resize(count_t * per_row);
    mesh.angles.resize(count_t * per_row * na);
    mesh.points.resize(count_t * per_row * (n + 1));
    mesh.z_table.assign(m.z_table().begin(), m.z_table().end());

    const double c = m.c();
    parallel_for(count_t, [&](std::size_t i) {
        double t = -c + 2.0 * c * static_cast<double>(i) / static_cast<double>(count_t - 1);
        if (i == count_t - 1) t = c;
        std::vector<double> ang(na);
        for (std::size_t j = 0; j < per_row; ++j) {
            std::size_t rest = j;
            for (std::size_t k = na; k-- > 0;) {
                const std::size_t idx = rest % count_theta;
                rest /= count_theta;
                ang[k] = (k + 1 == na) ? 2.0 * kPi * static_cast<double>(idx) / count_theta
                                       : kPi * static_cast<double>(idx) / (count_theta - 1);
            }
            const std::size_t s = i * per_row + j;
            mesh.ts[s] = t;
            std::copy(ang.begin(), ang.end(), mesh.angles.begin() + s * na);
            const auto x = embed_point(m, t, ang);
            std::copy(x.begin(), x.end(), mesh.points.begin() + s * (n + 1));
        }
    });
    return mesh;
}

DiameterResult extrinsic_diameter(const EmbeddedMesh& mesh) {
    if (mesh.size() == 0) throw std::invalid_argument("extrinsic_diameter: empty mesh");
    const std::size_t rows = mesh.count_t;
    const std::size_t per_row = mesh.per_row();
    std::size_t rs = 1, cs = 1;
    auto row_count = [&] { return rows <= 1 ? rows : (rows - 2 + rs) / rs + 1; };
    auto col_count = [&] { return (per_row + cs - 1) / cs; };
    while (row_count() * col_count() > kMaxDiameterSamples) {
        if (row_count() >= col_count()) {
            ++rs;
        } else {
            ++cs;
        }
    }
    std::vector<std::size_t> pick;
    for (std::size_t i = 0; i < rows; i += rs) {
        for (std::size_t j = 0; j < per_row; j += cs) pick.push_back(i * per_row + j);
    }
    if ((rows - 1) % rs != 0) {
        for (std::size_t j = 0; j < per_row; j += cs) pick.push_back((rows - 1) * per_row + j);
    }

    const int dim = mesh.n + 1;
    std::vector<DiameterResult> best(pick.size());
    parallel_for(pick.size(), [&](std::size_t a) {
        const double* x = mesh.points.data() + pick[a] * dim;
        DiameterResult r{0.0, pick[a], pick[a]};
        for (std::size_t b = a + 1; b < pick.size(); ++b) {
            const double* y = mesh.points.data() + pick[b] * dim;
            double d2 = 0.0;
            for (int k = 0; k < dim; ++k) d2 += (x[k] - y[k]) * (x[k] - y[k]);
            if (d2 > r.value) r = {d2, pick[a], pick[b]};
        }
        best[a] = r;
    });
    DiameterResult out{0.0, pick.front(), pick.front()};
    for (const auto& r : best) {
        if (r.value > out.value) out = r;
    }
    out.value = std::sqrt(out.value);
    return out;
}

std::vector<std::array<double, 2>> slice_polygon(const EmbeddedMesh& mesh, double level) {
    if (mesh.n != 2) throw std::invalid_argument("slice_polygon: n = 2 only");
    const std::size_t per_row = mesh.per_row();
    const double z_lo = mesh.point(0)[2];
    const double z_hi = mesh.point((mesh.count_t - 1) * per_row)[2];
    if (!(level > z_lo && level < z_hi)) {
        throw std::invalid_argument("slice_polygon: empty slice, level not strictly inside the tips");
    }
    std::vector<std::array<double, 2>> poly;
    poly.reserve(per_row);
    for (std::size_t j = 0; j < per_row; ++j) {
        for (std::size_t i = 0; i + 1 < mesh.count_t; ++i) {
            const auto lo = mesh.point(i * per_row + j);
            const auto hi = mesh.point((i + 1) * per_row + j);
            if (lo[2] < level && level <= hi[2]) {
                const double s = (level - lo[2]) / (hi[2] - lo[2]);
                poly.push_back({lo[0] + s * (hi[0] - lo[0]), lo[1] + s * (hi[1] - lo[1])});
                break;
            }
        }
    }
    return poly;
}

VerificationReport convex_slice_check(const EmbeddedMesh& mesh, double level, double eps) {
    const auto poly = slice_polygon(mesh, level);
    const std::size_t per_row = mesh.per_row();
    const auto q = mesh.point(0);
    const auto p = mesh.point((mesh.count_t - 1) * per_row);
    const double s = (level - q[2]) / (p[2] - q[2]);
    const double wx = q[0] + s * (p[0] - q[0]);
    const double wy = q[1] + s * (p[1] - q[1]);

    const std::size_t m = poly.size();
    double min_turn = INFINITY, max_turn = -INFINITY, max_dist = 0.0, length = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const auto& a = poly[i];
        const auto& b = poly[(i + 1) % m];
        const auto& c = poly[(i + 2) % m];
        const double e1x = b[0] - a[0], e1y = b[1] - a[1];
        const double e2x = c[0] - b[0], e2y = c[1] - b[1];
        const double turn = (e1x * e2y - e1y * e2x) / (std::hypot(e1x, e1y) * std::hypot(e2x, e2y));
        min_turn = std::min(min_turn, turn);
        max_turn = std::max(max_turn, turn);
        length += std::hypot(e1x, e1y);
        max_dist = std::max(max_dist, std::hypot(a[0] - wx, a[1] - wy));
    }
    const double radius = std::sqrt(kPi * eps);
    VerificationReport r;
    r.set_context("level", level);
    r.set_context("eps", eps);
    r.set_context("vertices", static_cast<double>(m));
    r.set_context("perimeter", length);
    r.set_context("max_radius", max_dist);
    // Same turn sign everywhere: margin is the smaller-magnitude side's extreme.
    r.add("convex", min_turn > 0.0 ? min_turn : -max_turn, 0.0);
    r.add("within_sqrt_pi_eps_of_axis", radius - max_dist, 0.0);
    r.add("length_at_most_2pi_sqrt_pi_eps", 2.0 * kPi * radius - length, 0.0);
    return r;
}

}  // namespace needle
