#include "needle/profile.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "needle/error.hpp"

namespace needle {

namespace {

constexpr double kRootTol = 1e-12;
constexpr double kMaxStep = 1e-3;
// Substeps across the bump support are ceil(kSupportResolution / step), so the
// support is resolved proportionally finer as the base step shrinks.
constexpr double kSupportResolution = 0.2;

double simpson(double fa, double fm, double fb, double width) {
    return (fa + 4.0 * fm + fb) * width / 6.0;
}

double simpson_step(double (*g)(double), double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = g(lm);
    const double frm = g(rm);
    const double left = simpson(fa, flm, fm, m - a);
    const double right = simpson(fm, frm, fb, b - m);
    const double err = left + right - whole;
    if (depth <= 0 || std::abs(err) <= 15.0 * tol) {
        return left + right + err / 15.0;
    }
    return simpson_step(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// Primitive of F on [0, 1/2], tabulated on kCells equal cells by adaptive
// Simpson; partial cells use 8-point Gauss-Legendre. Starting from many small
// cells keeps Simpson from stopping early on the flat tail near 0.
constexpr int kCells = 4096;
constexpr double kCellTol = 1e-20;

struct Primitive {
    std::array<double, kCells + 1> table{};
    Primitive() {
        const double h = 0.5 / kCells;
        for (int j = 0; j < kCells; ++j) {
            table[j + 1] = table[j] + adaptive_simpson(&mollifier_F, j * h, (j + 1) * h, kCellTol);
        }
    }
    double operator()(double x) const {
        static constexpr std::array<double, 4> node{0.1834346424956498, 0.5255324099163290,
                                                    0.7966664774136267, 0.9602898564975363};
        static constexpr std::array<double, 4> weight{0.3626837833783620, 0.3137066458778873,
                                                      0.2223810344533745, 0.1012285362903763};
        const double h = 0.5 / kCells;
        const int j = std::min(kCells - 1, static_cast<int>(x / h));
        const double lo = j * h;
        if (x == lo) return table[j];
        const double mid = 0.5 * (lo + x);
        const double half = 0.5 * (x - lo);
        double sum = 0.0;
        for (int i = 0; i < 4; ++i) {
            sum += weight[i] * (mollifier_F(mid - half * node[i]) + mollifier_F(mid + half * node[i]));
        }
        return table[j] + half * sum;
    }
};

const Primitive& primitive() {
    static const Primitive p;
    return p;
}

double half_primitive(double x) { return primitive()(x); }

struct HermiteNode {
    double t, y, dy;
};

double hermite(const HermiteNode& a, const HermiteNode& b, double t) {
    const double dt = b.t - a.t;
    const double s = (t - a.t) / dt;
    const double s2 = s * s;
    const double s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * a.y + (s3 - 2 * s2 + s) * dt * a.dy + (-2 * s3 + 3 * s2) * b.y +
           (s3 - s2) * dt * b.dy;
}

void append_uniform(std::vector<double>& grid, double from, double to, std::size_t count) {
    for (std::size_t i = 1; i <= count; ++i) {
        grid.push_back(i == count ? to : from + (to - from) * static_cast<double>(i) / count);
    }
}

}  // namespace

BumpParams::BumpParams(double k) : k_(k) {
    if (!std::isfinite(k) || k < kMinSharpness) {
        throw std::invalid_argument("bump sharpness k must be >= 100, got " + std::to_string(k));
    }
}

double mollifier_F(double t) {
    if (!(t > 0.0 && t < 1.0)) return 0.0;
    return std::exp(1.0 / (t * (t - 1.0)));
}

double adaptive_simpson(double (*integrand)(double), double a, double b, double tol) {
    if (b == a) return 0.0;
    const double fa = integrand(a);
    const double fb = integrand(b);
    const double fm = integrand(0.5 * (a + b));
    return simpson_step(integrand, a, b, fa, fm, fb, simpson(fa, fm, fb, b - a), tol, 48);
}

double mollifier_normalization() {
    // F(t) = F(1 - t), so both halves carry the same mass.
    static const double n = 2.0 * primitive().table.back();
    return n;
}

double smooth_step(double t) {
    if (!(t > 0.0)) return 0.0;
    if (t >= 1.0) return 1.0;
    const double n = mollifier_normalization();
    if (t <= 0.5) return half_primitive(t) / n;
    return 1.0 - half_primitive(1.0 - t) / n;
}

namespace {

// h as a function of u = t - support_begin. Inside the support u is ~1e-6
// while t ~ 1.57, so forming t - a in double loses ~1e-10 relative accuracy;
// the solver feeds exact offsets instead.
double bump_at_offset(double u, const BumpParams& params) {
    const double w = params.width();
    if (u <= 0.0 || u >= 3.0 * w) return 0.0;
    const double ramp = -(std::pow(params.k(), 5) / BumpParams::delta) * u;
    if (u <= 1.5 * w) return smooth_step(u / w) * ramp;
    return (1.0 - smooth_step(u / w - 2.0)) * ramp;
}

}  // namespace

double bump_h(double t, const BumpParams& params) {
    if (!(t >= 0.0 && t <= kPi / 2.0)) {
        throw std::invalid_argument("bump_h: t outside [0, pi/2]");
    }
    const double a = params.support_begin();
    if (t <= a || t >= params.support_end()) return 0.0;
    return bump_at_offset(t - a, params);
}

// ---------------------------------------------------------------------------
// Profile

Profile Profile::round_sphere(double step) {
    if (!(step > 0.0 && step <= kMaxStep)) {
        throw std::invalid_argument("round_sphere: step must lie in (0, 1e-3]");
    }
    Profile p;
    p.step_ = step;
    const double upper = kPi / 2.0;
    p.grid_.push_back(0.0);
    append_uniform(p.grid_, 0.0, upper, static_cast<std::size_t>(std::ceil(upper / step)));
    for (double t : p.grid_) {
        p.f_.push_back(std::cos(t));
        p.fp_.push_back(-std::sin(t));
        p.fpp_.push_back(-std::cos(t));
        p.h_.push_back(0.0);
        p.work_.push_back(0.0);
    }
    p.c_ = upper;
    p.fp_c_ = -1.0;
    p.total_work_ = 0.0;
    return p;
}

std::size_t Profile::locate(double t) const {
    if (!(t >= grid_.front() && t <= grid_.back())) {
        throw std::out_of_range("profile evaluated outside [0, pi/2]");
    }
    auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
    std::size_t i = static_cast<std::size_t>(it - grid_.begin());
    if (i == 0) return 0;
    return std::min(i - 1, grid_.size() - 2);
}

double Profile::eval_h(double t) const { return bump_ ? bump_h(t, *bump_) : 0.0; }

double Profile::eval_f(double t) const {
    const std::size_t i = locate(t);
    return hermite({grid_[i], f_[i], fp_[i]}, {grid_[i + 1], f_[i + 1], fp_[i + 1]}, t);
}

double Profile::eval_fp(double t) const {
    const std::size_t i = locate(t);
    return hermite({grid_[i], fp_[i], fpp_[i]}, {grid_[i + 1], fp_[i + 1], fpp_[i + 1]}, t);
}

double Profile::eval_fpp(double t) const { return eval_h(t) - eval_f(t); }

double Profile::energy_defect(double t) const {
    if (!bump_) return 0.0;
    const std::size_t i = locate(t);
    const double w = hermite({grid_[i], work_[i], 2.0 * fp_[i] * h_[i]},
                             {grid_[i + 1], work_[i + 1], 2.0 * fp_[i + 1] * h_[i + 1]}, t);
    return total_work_ - w;
}

double Profile::ode_residual() const {
    // Blocks span at least one base step so that the difference quotient of f'
    // is not swamped by roundoff across the tiny substeps inside the bump.
    double worst = 0.0;
    std::size_t start = 0;
    double integral = 0.0;
    double scale = 1.0;
    for (std::size_t i = 0; i + 1 < grid_.size(); ++i) {
        const double dt = grid_[i + 1] - grid_[i];
        const double h_mid = eval_h(grid_[i] + 0.5 * dt);
        const double fpp_mid = h_mid - eval_f(grid_[i] + 0.5 * dt);
        integral += (fpp_[i] + 4.0 * fpp_mid + fpp_[i + 1]) * dt / 6.0;
        scale = std::max({scale, std::abs(h_[i]), std::abs(h_mid), std::abs(h_[i + 1])});
        const double len = grid_[i + 1] - grid_[start];
        if (len >= 0.999 * step_ || i + 2 == grid_.size()) {
            const double defect = (fp_[i + 1] - fp_[start]) - integral;
            worst = std::max(worst, std::abs(defect) / (len * scale));
            start = i + 1;
            integral = 0.0;
            scale = 1.0;
        }
    }
    return worst;
}

void Profile::locate_first_zero() {
    std::size_t bracket = grid_.size();
    for (std::size_t i = 0; i + 1 < grid_.size(); ++i) {
        if (f_[i] > 0.0 && f_[i + 1] <= 0.0) {
            bracket = i;
            break;
        }
    }
    if (bracket == grid_.size()) {
        throw GeometryError("profile has no sign change on (0, pi/2)");
    }
    double lo = grid_[bracket];
    double hi = grid_[bracket + 1];
    if (f_[bracket + 1] == 0.0) {
        lo = hi;
    }
    while (hi - lo > kRootTol) {
        const double mid = 0.5 * (lo + hi);
        if (eval_f(mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    c_ = 0.5 * (lo + hi);
    fp_c_ = eval_fp(c_);
    const std::size_t i = locate(c_);
    total_work_ = hermite({grid_[i], work_[i], 2.0 * fp_[i] * h_[i]},
                          {grid_[i + 1], work_[i + 1], 2.0 * fp_[i + 1] * h_[i + 1]}, c_);
}

Profile solve_profile(const BumpParams& params, double step) {
    if (!(step > 0.0 && step <= kMaxStep)) {
        throw std::invalid_argument("solve_profile: step must lie in (0, 1e-3]");
    }
    Profile p;
    p.bump_ = params;
    p.step_ = step;

    const double a = params.support_begin();
    const double b = params.support_end();
    const double upper = kPi / 2.0;
    p.grid_.push_back(0.0);
    append_uniform(p.grid_, 0.0, a, static_cast<std::size_t>(std::ceil(a / step)));
    const std::size_t first_sub = p.grid_.size() - 1;
    const std::size_t substeps = static_cast<std::size_t>(std::ceil(kSupportResolution / step));
    append_uniform(p.grid_, a, b, substeps);
    append_uniform(p.grid_, b, upper, static_cast<std::size_t>(std::ceil((upper - b) / step)));
    const double du = 3.0 * params.width() / static_cast<double>(substeps);

    const std::size_t n = p.grid_.size();
    p.f_.resize(n);
    p.fp_.resize(n);
    p.h_.resize(n);
    p.work_.resize(n);

    // State (f, f', W) with W' = 2 f' h.
    using State = std::array<double, 3>;
    auto rhs = [](const State& y, double h) -> State { return {y[1], h - y[0], 2.0 * y[1] * h}; };

    State y{1.0, 0.0, 0.0};
    double h_left = 0.0;
    p.f_[0] = y[0];
    p.fp_[0] = y[1];
    p.work_[0] = y[2];
    p.h_[0] = h_left;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        double dt = p.grid_[i + 1] - p.grid_[i];
        double h_mid = 0.0;
        double h_right = 0.0;
        if (i >= first_sub && i < first_sub + substeps) {
            const double u = du * static_cast<double>(i - first_sub);
            dt = du;
            h_mid = bump_at_offset(u + 0.5 * du, params);
            h_right = bump_at_offset(u + du, params);
        }

        const State k1 = rhs(y, h_left);
        State tmp;
        for (int j = 0; j < 3; ++j) tmp[j] = y[j] + 0.5 * dt * k1[j];
        const State k2 = rhs(tmp, h_mid);
        for (int j = 0; j < 3; ++j) tmp[j] = y[j] + 0.5 * dt * k2[j];
        const State k3 = rhs(tmp, h_mid);
        for (int j = 0; j < 3; ++j) tmp[j] = y[j] + dt * k3[j];
        const State k4 = rhs(tmp, h_right);
        for (int j = 0; j < 3; ++j) y[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);

        p.f_[i + 1] = y[0];
        p.fp_[i + 1] = y[1];
        p.work_[i + 1] = y[2];
        p.h_[i + 1] = h_right;
        h_left = h_right;
    }
    p.fpp_.resize(n);
    for (std::size_t i = 0; i < n; ++i) p.fpp_[i] = p.h_[i] - p.f_[i];

    p.locate_first_zero();
    return p;
}

// ---------------------------------------------------------------------------
// NeedleProfile

NeedleProfile::NeedleProfile(std::shared_ptr<const Profile> base)
    : base_(std::move(base)), scale_(std::abs(base_->fp_at_c())) {
    if (!(scale_ > 0.0)) throw GeometryError("profile has f'(c) = 0");
    const auto grid = base_->grid();
    for (std::size_t i = 0; i < grid.size() && grid[i] <= base_->c(); ++i) {
        ft_.push_back(base_->f()[i] / scale_);
        ftp_.push_back(base_->fp()[i] / scale_);
        ftpp_.push_back(base_->fpp()[i] / scale_);
    }
}

namespace {

double fold(double t, double c) {
    const double a = std::abs(t);
    // Allow roundoff-level overshoot at the tips.
    if (a > c) {
        if (a - c > 1e-12 * std::max(1.0, c)) {
            throw std::out_of_range("needle profile evaluated outside [-c, c]");
        }
        return c;
    }
    return a;
}

}  // namespace

double NeedleProfile::value(double t) const { return base_->eval_f(fold(t, c())) / scale_; }

double NeedleProfile::d1(double t) const {
    const double v = base_->eval_fp(fold(t, c())) / scale_;
    return t < 0.0 ? -v : v;
}

double NeedleProfile::d2(double t) const { return base_->eval_fpp(fold(t, c())) / scale_; }

double NeedleProfile::one_minus_d1_sq(double t) const {
    const double a = fold(t, c());
    const double f = base_->eval_f(a);
    return std::max(0.0, (f * f + base_->energy_defect(a)) / (scale_ * scale_));
}

// ---------------------------------------------------------------------------
// Verification

RescaleResult rescale_and_verify(std::shared_ptr<const Profile> profile, double tol) {
    NeedleProfile needle(profile);
    const Profile& p = *profile;
    const double fpc = p.fp_at_c();
    const double s = needle.scale();

    double max_curv = -INFINITY;     // f'' + f
    double max_energy = -INFINITY;   // f^2 + f'^2 - f'(c)^2
    double max_curv_t = -INFINITY;   // f~'' + f~
    double max_unit = -INFINITY;     // f~^2 + f~'^2 - 1
    double max_steep = -INFINITY;    // f'^2 - 1
    auto visit = [&](double f, double fp, double fpp) {
        max_curv = std::max(max_curv, fpp + f);
        max_energy = std::max(max_energy, f * f + fp * fp - fpc * fpc);
        const double ft = f / s, ftp = fp / s, ftpp = fpp / s;
        max_curv_t = std::max(max_curv_t, ftpp + ft);
        max_unit = std::max(max_unit, ft * ft + ftp * ftp - 1.0);
        max_steep = std::max(max_steep, fp * fp - 1.0);
    };
    const auto grid = p.grid();
    for (std::size_t i = 0; i < grid.size() && grid[i] <= p.c(); ++i) {
        visit(p.f()[i], p.fp()[i], p.fpp()[i]);
    }
    const double c = p.c();
    visit(p.eval_f(c), fpc, p.eval_fpp(c));

    RescaleResult out{needle, {}};
    auto& r = out.report;
    if (p.bump()) r.set_context("k", p.bump()->k());
    r.set_context("step", p.step());
    r.set_context("grid_points", static_cast<double>(grid.size()));
    r.set_context("c", c);
    r.set_context("fp_at_c", fpc);
    r.set_context("scale", s);
    r.set_context("ft_at_0", needle.value(0.0));

    r.add("unscaled.fpp_plus_f_nonpositive", -max_curv, tol);
    r.add("unscaled.energy_below_fp_c_sq", -max_energy, tol * std::max(1.0, fpc * fpc));
    r.add("rescaled.fpp_plus_f_nonpositive", -max_curv_t, tol);
    r.add("rescaled.f_sq_plus_fp_sq_at_most_1", -max_unit, tol);
    r.add("closing.ft_at_c_zero", -std::abs(needle.value(c)), tol);
    r.add("closing.ftp_at_c_minus_1", -std::abs(needle.d1(c) + 1.0), tol);
    r.add("closing.ftpp_at_c_zero", -std::abs(needle.d2(c)), tol);
    r.add("unscaled.exists_fp_sq_above_1", max_steep, 0.0);
    return out;
}

VerificationReport construction_bounds(const NeedleProfile& needle, double c_tol) {
    VerificationReport r;
    const Profile& p = needle.base();
    if (!p.bump()) return r;
    const double k = p.bump()->k();
    const double c = p.c();
    const double lower = kPi / 2.0 - 1.0 / k;
    r.set_context("k", k);
    r.set_context("c", c);
    r.set_context("fp_at_c", p.fp_at_c());
    r.add("c_above_pi_over_2_minus_1_over_k", c - lower, c_tol);
    r.add("c_below_pi_over_2", kPi / 2.0 - c, c_tol);
    r.add("c_at_least_pi_over_2_minus_1_over_k_plus_c0_over_k2",
          c - (lower + BumpParams::c0 / (k * k)), c_tol);
    r.add("fp_at_c_at_most_minus_3k_over_16", -3.0 * k / 16.0 - p.fp_at_c(), 0.0);
    r.add("ft_at_0_at_most_16_over_3k", 16.0 / (3.0 * k) - needle.value(0.0), 0.0);
    return r;
}

}  // namespace needle
