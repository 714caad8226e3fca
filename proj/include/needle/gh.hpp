#pragma once

// Gromov-Hausdorff tools: Hausdorff distance, distortion of a map, the glued
// space bound, an exhaustive oracle for tiny spaces, and the map G from
// [0, pi] onto a needle with the resulting almost-rigidity report.

#include <cstddef>
#include <span>
#include <vector>

#include "needle/comparison.hpp"
#include "needle/metric_space.hpp"
#include "needle/report.hpp"

namespace needle {

/// Hausdorff distance between index sets a, b of one space. Throws
/// std::invalid_argument if either is empty or an index is out of range.
double hausdorff_distance(const FiniteMetricSpace& space, std::span<const std::size_t> a,
                          std::span<const std::size_t> b);

/// Least eps such that x -> y via `map` is an eps-approximation on the given
/// samples: max of the pair distortion and the density deficit of the image.
double distortion_epsilon(std::span<const std::size_t> map, const FiniteMetricSpace& x,
                          const FiniteMetricSpace& y);

/// Greedy farthest-point net: starts at index 0 and adds the farthest point
/// until every point is within eps.
std::vector<std::size_t> greedy_net(const FiniteMetricSpace& x, double eps);

struct GluedSpace {
    FiniteMetricSpace z;  // X points first, then Y points
    std::size_t x_size = 0;
    std::vector<std::size_t> net;  // indices into X
    double epsilon = 0.0;
};

struct GluedResult {
    GluedSpace space;
    double hausdorff = 0.0;  // between the X and Y parts inside Z
    VerificationReport report;
};

/// d_Z(x, y) = eps + min over the net of d_X(x, x_i) + d_Y(y, F(x_i)).
/// Throws std::invalid_argument if eps is below distortion_epsilon(map), and
/// GeometryError if d_Z fails the triangle inequality.
GluedResult glued_space_bound(const FiniteMetricSpace& x, const FiniteMetricSpace& y,
                              std::span<const std::size_t> map, double epsilon);

/// Exact GH distance, half the least distortion of a correspondence, by
/// branch and bound. Throws std::invalid_argument if |X| |Y| > 30.
double brute_force_gh(const FiniteMetricSpace& x, const FiniteMetricSpace& y);

inline constexpr std::size_t kIntervalSamples = 512;

/// The map G: [0, pi] -> M along the meridian from q (south tip) to p (north
/// tip), constant on the end intervals of length delta/2.
struct GMap {
    std::vector<double> s;             // samples of [0, pi]
    std::vector<SurfacePoint> image;   // G(s_i), on the theta = 0 meridian
    double delta = 0.0;                // pi - d(p, q)
    double distortion = 0.0;           // over sample pairs
    double density = 0.0;              // mesh points to the image, upper bound
    double source_gap = 0.0;           // sample spacing of [0, pi]
    double mesh_radius = 0.0;          // covering radius of the mesh in M
    double epsilon = 0.0;              // certified, sampling included
    std::vector<double> level_t;       // interior mesh rows
    std::vector<double> level_diameter;
    VerificationReport report;
};

/// Builds G and certifies its epsilon over the mesh. The tips must attain
/// the mesh's extrinsic diameter; throws GeometryError otherwise.
GMap build_G(const DistanceOracle& oracle, const EmbeddedMesh& mesh,
             std::size_t samples = kIntervalSamples);

struct RigidityReport {
    double k = 0.0;  // NaN for the round sphere
    int n = 0;
    std::size_t count_t = 0, count_theta = 0;
    double diam_extrinsic = 0.0;
    double eps0 = 0.0;
    double delta0 = 0.0;
    double G_epsilon = 0.0;
    double gh_bound = 0.0;
    double ratio = 0.0;
    double bound_constant = 0.0;  // 4 pi^{3/2}
    bool pass = false;
    VerificationReport checks;
};

/// Per-embedding almost-rigidity check: gh_bound = 4 G_epsilon against
/// 4 pi^{3/2} sqrt(pi - Diam).
RigidityReport almost_rigidity_report(const DistanceOracle& oracle, const EmbeddedMesh& mesh,
                                      std::size_t samples = kIntervalSamples);

}  // namespace needle
