#pragma once

// Intrinsic distances on the needle, and the comparison estimates built on
// them: excess, Toponogov hinges, triangle heights, width ratio.
//
// Distances are computed on the 2-dimensional revolution surface
// dt^2 + f~(t)^2 dtheta^2. For n > 2 two points (t_a, u_a), (t_b, u_b) with
// u in S^{n-1} are reduced to (t_a, 0), (t_b, angle(u_a, u_b)): the great
// circle through u_a, u_b spans a totally geodesic copy of that surface.

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "needle/embedding.hpp"
#include "needle/metric_space.hpp"
#include "needle/report.hpp"

namespace needle {

struct SurfacePoint {
    double t = 0.0;
    double theta = 0.0;
};

enum class PathKind {
    TipMeridian,  // one endpoint is a tip; the meridian is minimizing
    Meridian,     // same meridian, |dt|
    ViaTip,       // meridian to a tip and back down another meridian
    Shooting,     // converged geodesic from the shooting solver
    Graph,        // grid graph path, an upper bound only
};

struct Geodesic {
    double length = 0.0;
    PathKind kind = PathKind::Graph;
    /// Initial heading at the source, angle from +d/dt toward +d/dtheta.
    /// Only set when the path is a smooth geodesic leaving a non-tip source.
    std::optional<double> heading;
    std::vector<SurfacePoint> path;
};

struct DistanceOptions {
    std::size_t graph_t = 201;      // graph rows including the two tip rows
    std::size_t graph_theta = 64;   // nodes per row
    double shooting_tol = 1e-12;    // dopri5 abs/rel tolerance
    double endpoint_tol = 1e-10;    // accepted endpoint miss, metric units
    int newton_iterations = 40;
};

/// Shortest-path oracle on the revolution surface of a NeedleManifold. The
/// result is the minimum over lengths of actual paths: closed-form meridian
/// and via-tip routes, an 8-neighbour grid graph, and geodesic shooting
/// (Newton on initial heading and length) seeded from the graph path and
/// from flat-chart guesses for both windings. Thread-safe.
class DistanceOracle {
public:
    explicit DistanceOracle(const NeedleManifold& m, DistanceOptions options = {});
    ~DistanceOracle();
    DistanceOracle(const DistanceOracle&) = delete;
    DistanceOracle& operator=(const DistanceOracle&) = delete;

    const NeedleManifold& manifold() const { return m_; }
    const DistanceOptions& options() const { return options_; }

    double distance(SurfacePoint a, SurfacePoint b) const;
    Geodesic geodesic(SurfacePoint a, SurfacePoint b) const;
    /// One graph search from `a` shared by all targets.
    std::vector<double> distances_from(SurfacePoint a, std::span<const SurfacePoint> targets) const;
    /// Graph estimate alone (upper bound), for refinement studies.
    double graph_distance(SurfacePoint a, SurfacePoint b) const;

    /// Distance between (t_a, angles_a) and (t_b, angles_b) on the
    /// n-dimensional needle via the great-circle reduction.
    double distance_nd(double t_a, std::span<const double> angles_a, double t_b,
                       std::span<const double> angles_b) const;

    /// Pairwise distance matrix, parallel over sources.
    FiniteMetricSpace distance_matrix(std::span<const SurfacePoint> points) const;

private:
    struct Graph;
    struct SourceTree;
    struct Cache;
    std::shared_ptr<const SourceTree> tree_from(SurfacePoint a) const;
    // Builds `tree` on first use; exact cases never need it.
    Geodesic solve(SurfacePoint a, SurfacePoint b, std::shared_ptr<const SourceTree>& tree) const;

    const NeedleManifold& m_;
    DistanceOptions options_;
    std::unique_ptr<Graph> graph_;
    std::unique_ptr<Cache> cache_;
};

/// Unit tangent in R^3 of the n = 2 embedding at (t, theta) for heading psi.
std::array<double, 3> embedded_direction(const NeedleManifold& m, SurfacePoint x, double psi);

struct ExcessResult {
    double sup = 0.0;
    std::size_t argmax = 0;
    double d_pq = 0.0;
    double bound = 0.0;  // 2 (pi - d(p, q))
    VerificationReport report;
};

/// sup over samples of d(p,x) + d(q,x) - d(p,q), checked against 2(pi - d(p,q)).
ExcessResult excess_sup(const DistanceOracle& oracle, SurfacePoint p, SurfacePoint q,
                        std::span<const SurfacePoint> samples, double tol = 1e-3);

struct Hinge {
    SurfacePoint vertex;
    SurfacePoint end0, end1;
    Geodesic leg0, leg1;
    double alpha = 0.0;  // angle between the legs' embedded initial tangents
};

/// Hinge with minimizing legs from `vertex`. Returns nullopt when the vertex
/// is a tip or either leg is not a certified geodesic (graph-only path or a
/// via-tip route that bends at the tip).
std::optional<Hinge> make_hinge(const DistanceOracle& oracle, SurfacePoint vertex, SurfacePoint end0,
                                SurfacePoint end1);

/// arccos(cos l0 cos l1 + sin l0 sin l1 cos alpha) - d(end0, end1).
/// Throws std::invalid_argument if a leg is longer than pi.
double toponogov_margin(const DistanceOracle& oracle, const Hinge& hinge);

struct TriangleHeight {
    double h = 0.0;
    double bound = 0.0;  // ((|b-a| + |c-a|)^2 - |b-c|^2) / 4, always >= h^2
};

/// Distance from a to the line through b and c by the side-length product
/// formula. Throws std::invalid_argument if b == c or dimensions differ.
TriangleHeight triangle_height(std::span<const double> a, std::span<const double> b,
                               std::span<const double> c);

struct WidthResult {
    double sup_height = 0.0;
    double chord = 0.0;  // |p - q|
    double ratio = 0.0;  // sup_height / sqrt(pi - chord)
    std::size_t argmax = 0;
};

/// Sup over mesh samples of the distance to the line through p and q, over
/// sqrt(pi - |p - q|). Throws std::invalid_argument unless |p - q| < pi.
WidthResult width_ratio(const EmbeddedMesh& mesh, std::span<const double> p,
                        std::span<const double> q);

}  // namespace needle
