#pragma once

// Needle profile: the bump forcing h, the solution of f'' + f = h with
// f(0) = 1, f'(0) = 0, its first zero c, and the rescaled warping function
// f~ = f / |f'(c)| that closes the metric smoothly at t = +-c.

#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "needle/report.hpp"

namespace needle {

inline constexpr double kPi = std::numbers::pi;

/// Sharpness parameter of the bump forcing, together with the fixed
/// constants c0 = 1/4 and delta = c0/4 = 1/16.
class BumpParams {
public:
    static constexpr double kMinSharpness = 100.0;
    static constexpr double c0 = 0.25;
    static constexpr double delta = c0 / 4.0;

    /// Throws std::invalid_argument unless k >= 100 and finite.
    explicit BumpParams(double k);

    double k() const { return k_; }
    /// delta * k^-2, the length scale of one smooth-step transition.
    double width() const { return delta / (k_ * k_); }
    /// pi/2 - 1/k: h vanishes to the left of this point.
    double support_begin() const { return kPi / 2.0 - 1.0 / k_; }
    /// pi/2 - 1/k + 3 delta k^-2: h vanishes to the right of this point.
    double support_end() const { return support_begin() + 3.0 * width(); }
    /// Point where the two branches of h are glued.
    double junction() const { return support_begin() + 1.5 * width(); }

private:
    double k_;
};

/// e^{1/(t(t-1))} on (0, 1), zero elsewhere.
double mollifier_F(double t);

/// Integral of F over [0, 1], computed once by adaptive Simpson (abs tol 1e-12).
double mollifier_normalization();

/// Normalized primitive of F: 0 for t <= 0, 1 for t >= 1, nondecreasing.
double smooth_step(double t);

/// Nonpositive forcing h on [0, pi/2]. Throws std::invalid_argument outside.
double bump_h(double t, const BumpParams& params);

/// Adaptive Simpson quadrature on [a, b] to absolute tolerance `tol`.
double adaptive_simpson(double (*integrand)(double), double a, double b, double tol);

/// Solution of the profile ODE sampled on a piecewise-uniform grid over
/// [0, pi/2], with cubic Hermite dense output.
class Profile {
public:
    /// Closed-form round-sphere profile f = cos t on [0, pi/2] (h = 0, c = pi/2).
    static Profile round_sphere(double step);

    std::span<const double> grid() const { return grid_; }
    std::span<const double> f() const { return f_; }
    std::span<const double> fp() const { return fp_; }
    std::span<const double> fpp() const { return fpp_; }
    std::span<const double> h() const { return h_; }

    double c() const { return c_; }
    double fp_at_c() const { return fp_c_; }
    double step() const { return step_; }
    const std::optional<BumpParams>& bump() const { return bump_; }
    /// Last grid point (pi/2).
    double upper() const { return grid_.back(); }

    /// Dense evaluation on [0, upper()]. f uses Hermite data (f, f'),
    /// f' uses (f', f''), f'' is h - f.
    double eval_f(double t) const;
    double eval_fp(double t) const;
    double eval_fpp(double t) const;
    double eval_h(double t) const;

    /// 2 * integral_t^c f'(s) h(s) ds. Satisfies
    /// f'(c)^2 - f'(t)^2 = f(t)^2 + energy_defect(t) exactly for the ODE, so it
    /// evaluates 1 - f~'^2 without cancellation near the tips.
    double energy_defect(double t) const;

    /// Integral form of f'' + f - h = 0: over consecutive blocks of grid
    /// intervals, each at least one base step long, the max of
    /// |f'(end) - f'(start) - Simpson integral of (h - f)| / length, divided by
    /// max(1, |h| on the block).
    double ode_residual() const;

private:
    friend Profile solve_profile(const BumpParams& params, double step);
    Profile() = default;
    std::size_t locate(double t) const;
    void locate_first_zero();

    std::vector<double> grid_, f_, fp_, fpp_, h_, work_;  // work_ = 2 int_0^t f'h
    std::optional<BumpParams> bump_;
    double c_ = 0.0;
    double fp_c_ = 0.0;
    double step_ = 0.0;
    double total_work_ = 0.0;
};

/// Classical RK4 on (f, f') with base step `step` away from the bump support;
/// the support itself is crossed with ceil(0.2 / step) equal substeps. The first
/// zero c is bracketed on the grid and bisected to 1e-12. Throws
/// std::invalid_argument for step outside (0, 1e-3], GeometryError if f has no
/// sign change on (0, pi/2).
Profile solve_profile(const BumpParams& params, double step = 1e-5);

/// Rescaled warping function f~ = f / |f'(c)| on [-c, c], extended evenly.
class NeedleProfile {
public:
    explicit NeedleProfile(std::shared_ptr<const Profile> base);

    const Profile& base() const { return *base_; }
    double scale() const { return scale_; }
    double c() const { return base_->c(); }

    /// Grid values of f~, f~', f~'' on the part of the base grid inside [0, c].
    std::span<const double> ft() const { return ft_; }
    std::span<const double> ftp() const { return ftp_; }
    std::span<const double> ftpp() const { return ftpp_; }
    std::span<const double> grid() const { return base_->grid().first(ft_.size()); }

    /// Dense evaluation for t in [-c, c]; f~ and f~'' are even, f~' is odd.
    double value(double t) const;
    double d1(double t) const;
    double d2(double t) const;
    /// 1 - f~'(t)^2 via the energy identity, clamped at 0.
    double one_minus_d1_sq(double t) const;

private:
    std::shared_ptr<const Profile> base_;
    double scale_;
    std::vector<double> ft_, ftp_, ftpp_;
};

struct RescaleResult {
    NeedleProfile needle;
    VerificationReport report;
};

/// Rescales by |f'(c)| and checks the profile inequalities on the grid:
/// f''+f <= 0, f^2+f'^2-f'(c)^2 <= 0, f~''+f~ <= 0, f~^2+f~'^2 <= 1, the
/// closing conditions at c, and that the unrescaled profile has |f'| > 1
/// somewhere. `tol` is absolute; the f'(c)^2 entry is scaled by max(1, f'(c)^2).
RescaleResult rescale_and_verify(std::shared_ptr<const Profile> profile, double tol = 1e-6);

/// Bounds on c and f'(c) for the bump profile, and f~(0) <= 16/(3k). Empty for
/// profiles without a bump. `c_tol` is the absolute tolerance on c.
VerificationReport construction_bounds(const NeedleProfile& needle, double c_tol = 1e-8);

}  // namespace needle
