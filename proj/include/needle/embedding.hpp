#pragma once

// Warped product dt^2 + f~(t)^2 dtheta^2 on [-c, c] x S^{n-1} and its
// revolution-hypersurface embedding into R^{n+1}:
//   I(t, theta) = (f~(t) u(theta), z(t)),  z(t) = int_0^t sqrt(1 - f~'^2).

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "needle/profile.hpp"
#include "needle/report.hpp"

namespace needle {

class NeedleManifold {
public:
    /// Throws std::invalid_argument for n < 2.
    NeedleManifold(int n, NeedleProfile profile);

    int n() const { return n_; }
    double c() const { return profile_.c(); }
    const NeedleProfile& profile() const { return profile_; }

    double f(double t) const { return profile_.value(t); }
    double fp(double t) const { return profile_.d1(t); }
    double fpp(double t) const { return profile_.d2(t); }

    /// Height of the meridian, odd in t. Cumulative Simpson on the profile grid.
    double z(double t) const;
    /// sqrt(max(0, 1 - f~'^2)), even in t.
    double z_prime(double t) const;
    /// z at the profile grid points inside [0, c], followed by z(c).
    std::span<const double> z_table() const { return z_; }

    /// Sup of |t| where curvature and slice operations are evaluated:
    /// c - 10 * (profile step).
    double interior_limit() const;

private:
    int n_;
    NeedleProfile profile_;
    std::vector<double> z_;
};

/// Unit vector on S^{n-1} from n-1 hyperspherical angles:
/// (cos a1, sin a1 cos a2, ..., sin a1 ... sin a_{n-2} cos a_{n-1}, sin a1 ... sin a_{n-1}).
std::vector<double> sphere_point(std::span<const double> angles);

/// I(t, theta) in R^{n+1}. Rejects |t| > c, a wrong number of angles, and
/// 1 - f~'^2 < -tol (std::invalid_argument / GeometryError respectively).
std::vector<double> embed_point(const NeedleManifold& m, double t, std::span<const double> angles,
                                double tol = 1e-9);

/// Max-norm difference between the central-difference Gram matrix of I at
/// (t, angles) and diag(1, f~^2 sin^2 a1, f~^2 sin^2 a1 sin^2 a2, ...).
double pullback_residual(const NeedleManifold& m, double t, std::span<const double> angles,
                         double fd_step = 1e-4);

struct CurvatureSample {
    double t;
    double k_rad;    // -f~''/f~
    double k_sph;    // (1 - f~'^2)/f~^2
    double kappa_m;  // meridian principal curvature, -f~''/z'
    double kappa_theta;  // z'/f~, multiplicity n-1
    double mean;         // kappa_m + (n-1) kappa_theta
    double ricci_m;      // kappa_m (H - kappa_m)
    double ricci_theta;  // kappa_theta (H - kappa_theta)
    // Gauss equation defects relative to max(1, |K|).
    double gauss_rad;  // |k_rad - kappa_m kappa_theta|
    double gauss_sph;  // |k_sph - kappa_theta^2|
    // Principal curvatures of the embedded meridian measured by fourth-order
    // finite differences of embed_point; NaN where a stencil of step >= 1e-4
    // would touch the bump support or leave [-c, c].
    double fd_kappa_m;
    double fd_kappa_theta;
};

struct CurvatureReport {
    std::vector<CurvatureSample> samples;
    VerificationReport summary;
};

/// `count` equally spaced t in [-interior_limit, interior_limit].
std::vector<double> interior_grid(const NeedleManifold& m, std::size_t count);

/// Closed-form curvature data at each t. The summary also compares the
/// closed-form principal curvatures with finite differences of the embedding,
/// relative to max(1, |kappa|). Throws std::invalid_argument for |t| > interior_limit() and
/// GeometryError where 1 - f~'^2 <= degenerate_tol.
CurvatureReport curvature_report(const NeedleManifold& m, std::span<const double> ts,
                                 double degenerate_tol = 1e-14);

/// Samples of I on a tensor grid: count_t values of t uniform on [-c, c]
/// (tips included) times count_theta values per angle. Angles a1..a_{n-2}
/// run over [0, pi] inclusive, the last over [0, 2 pi) exclusive.
struct EmbeddedMesh {
    int n = 0;
    std::size_t count_t = 0;
    std::size_t count_theta = 0;
    std::vector<double> ts;      // per sample
    std::vector<double> angles;  // stride n-1
    std::vector<double> points;  // stride n+1
    std::vector<double> z_table;

    std::size_t size() const { return ts.size(); }
    std::size_t per_row() const { return count_t ? size() / count_t : 0; }
    std::span<const double> point(std::size_t i) const {
        return std::span<const double>(points).subspan(i * (n + 1), n + 1);
    }
    std::span<const double> angle(std::size_t i) const {
        return std::span<const double>(angles).subspan(i * (n - 1), n - 1);
    }
};

/// Throws std::invalid_argument for count_t < 2 or count_theta < 3.
EmbeddedMesh sample_mesh(const NeedleManifold& m, std::size_t count_t, std::size_t count_theta);

struct DiameterResult {
    double value = 0.0;
    std::size_t first = 0;
    std::size_t second = 0;
};

/// Max pairwise Euclidean distance. Above kMaxDiameterSamples samples the
/// search runs over a decimated subset that always keeps both tip rows.
inline constexpr std::size_t kMaxDiameterSamples = 4000;
DiameterResult extrinsic_diameter(const EmbeddedMesh& mesh);

/// n = 2 only. Cuts the mesh by {x_3 = level} through linear interpolation on
/// each meridian, and checks that the slice polygon is convex, lies within
/// sqrt(pi eps) of the axis point on the tip-to-tip segment, and has length at
/// most 2 pi sqrt(pi eps). Throws std::invalid_argument when the level is not
/// strictly between the tip heights.
VerificationReport convex_slice_check(const EmbeddedMesh& mesh, double level, double eps);

/// Slice polygon used by convex_slice_check, in meridian order.
std::vector<std::array<double, 2>> slice_polygon(const EmbeddedMesh& mesh, double level);

}  // namespace needle
