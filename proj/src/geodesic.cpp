// gcc 11 false positive on moved-from std::optional<double> members.
#pragma GCC diagnostic ignored "-Wmaybe-uninitialized"

#include <algorithm>
#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <cstring>
#include <list>
#include <mutex>
#include <queue>
#include <stdexcept>

#include "needle/comparison.hpp"
#include "needle/parallel.hpp"

namespace needle {

namespace {

constexpr double kTwoPi = 2.0 * kPi;

double wrap_pi(double a) {
    double w = std::remainder(a, kTwoPi);
    if (w == -kPi) w = kPi;
    return w;
}

// 16-point Gauss-Legendre on [0, 1].
constexpr std::array<double, 8> kGlX{0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                                     0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                                     0.9445750230732326, 0.9894009349916499};
constexpr std::array<double, 8> kGlW{0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                                     0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                                     0.0622535239386479, 0.0271524594117541};

}  // namespace

// ---------------------------------------------------------------------------
// Grid graph

struct DistanceOracle::Graph {
    const NeedleManifold& m;
    std::size_t rows, cols;
    double c, dt, dtheta;
    std::vector<double> row_t;
    std::vector<double> ring;  // r(t_i) dtheta, per row
    std::vector<double> diag;  // straight segment between (i, j) and (i+1, j+1)
    std::vector<double> breaks;

    Graph(const NeedleManifold& m_, std::size_t r, std::size_t cc)
        : m(m_), rows(r), cols(cc), c(m_.c()) {
        if (rows < 3 || cols < 3) throw std::invalid_argument("DistanceOracle: graph too small");
        dt = 2.0 * c / static_cast<double>(rows - 1);
        dtheta = kTwoPi / static_cast<double>(cols);
        if (const auto& bump = m.profile().base().bump()) {
            for (double s : {-1.0, 1.0}) {
                breaks.push_back(s * bump->support_begin());
                breaks.push_back(s * bump->support_end());
            }
            std::sort(breaks.begin(), breaks.end());
        }
        row_t.resize(rows);
        ring.resize(rows);
        for (std::size_t i = 0; i < rows; ++i) {
            row_t[i] = (i + 1 == rows) ? c : -c + dt * static_cast<double>(i);
            ring[i] = m.f(row_t[i]) * dtheta;
        }
        diag.resize(rows - 1);
        for (std::size_t i = 0; i + 1 < rows; ++i) {
            diag[i] = segment({row_t[i], 0.0}, {row_t[i + 1], dtheta});
        }
    }

    // Length of the straight coordinate segment between two points.
    double segment(SurfacePoint p, SurfacePoint q) const {
        const double dth = q.theta - p.theta;
        const double dtt = q.t - p.t;
        if (dth == 0.0) return std::abs(dtt);
        if (dtt == 0.0) return m.f(p.t) * std::abs(dth);
        double lo = std::min(p.t, q.t), hi = std::max(p.t, q.t);
        std::vector<double> knots{lo};
        for (double b : breaks) {
            if (b > lo && b < hi) knots.push_back(b);
        }
        knots.push_back(hi);
        // Integrate over t; ds = sqrt(1 + r^2 (dth/dtt)^2) dt.
        const double slope = dth / dtt;
        double total = 0.0;
        for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
            const double a = knots[k], b = knots[k + 1];
            const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
            double sum = 0.0;
            for (std::size_t g = 0; g < kGlX.size(); ++g) {
                for (double sgn : {-1.0, 1.0}) {
                    const double r = m.f(mid + sgn * half * kGlX[g]);
                    sum += kGlW[g] * std::sqrt(1.0 + r * r * slope * slope);
                }
            }
            total += half * sum;
        }
        return total;
    }

    std::size_t node_count() const { return 2 + (rows - 2) * cols; }
    std::size_t tip_lo() const { return 0; }
    std::size_t tip_hi() const { return node_count() - 1; }
    std::size_t node(std::size_t i, std::size_t j) const {
        if (i == 0) return tip_lo();
        if (i + 1 == rows) return tip_hi();
        return 1 + (i - 1) * cols + (j % cols);
    }
    std::size_t row_of(std::size_t v) const {
        if (v == tip_lo()) return 0;
        if (v == tip_hi()) return rows - 1;
        return 1 + (v - 1) / cols;
    }
    std::size_t col_of(std::size_t v) const {
        if (v == tip_lo() || v == tip_hi()) return 0;
        return (v - 1) % cols;
    }

    template <class Visit>
    void neighbours(std::size_t v, Visit&& visit) const {
        if (v == tip_lo() || v == tip_hi()) {
            const std::size_t i = (v == tip_lo()) ? 1 : rows - 2;
            for (std::size_t j = 0; j < cols; ++j) visit(node(i, j), dt);
            return;
        }
        const std::size_t i = row_of(v), j = col_of(v);
        visit(node(i, j + 1), ring[i]);
        visit(node(i, j + cols - 1), ring[i]);
        for (int di : {-1, 1}) {
            const std::size_t ii = i + di;
            visit(node(ii, j), dt);
            if (ii == 0 || ii + 1 == rows) continue;
            const double w = diag[std::min(i, ii)];
            visit(node(ii, j + 1), w);
            visit(node(ii, j + cols - 1), w);
        }
    }

    // Corner nodes of the cell containing x, with their coordinates chosen
    // so that |theta_corner - x.theta| <= dtheta.
    std::vector<std::pair<std::size_t, SurfacePoint>> corners(SurfacePoint x) const {
        std::vector<std::pair<std::size_t, SurfacePoint>> out;
        if (x.t >= c) return {{tip_hi(), {c, x.theta}}};
        if (x.t <= -c) return {{tip_lo(), {-c, x.theta}}};
        std::size_t i = static_cast<std::size_t>(std::floor((x.t + c) / dt));
        i = std::min(i, rows - 2);
        const double th = x.theta - kTwoPi * std::floor(x.theta / kTwoPi);
        std::size_t j = static_cast<std::size_t>(std::floor(th / dtheta));
        j = std::min(j, cols - 1);
        const double base = x.theta - th + dtheta * static_cast<double>(j);
        for (std::size_t ii : {i, i + 1}) {
            if (ii == 0 || ii + 1 == rows) {
                out.push_back({node(ii, 0), {row_t[ii], x.theta}});
                continue;
            }
            out.push_back({node(ii, j), {row_t[ii], base}});
            out.push_back({node(ii, j + 1), {row_t[ii], base + dtheta}});
        }
        return out;
    }

    SurfacePoint coords(std::size_t v) const {
        return {row_t[row_of(v)], dtheta * static_cast<double>(col_of(v))};
    }
};

struct DistanceOracle::SourceTree {
    SurfacePoint source;
    std::vector<double> dist;
    std::vector<std::size_t> pred;  // npos: seeded directly from the source
};

namespace {
constexpr std::size_t kNone = static_cast<std::size_t>(-1);
}

// Most recently used source trees.
struct DistanceOracle::Cache {
    std::mutex mu;
    std::list<std::pair<std::array<double, 2>, std::shared_ptr<const SourceTree>>> items;
};

DistanceOracle::DistanceOracle(const NeedleManifold& m, DistanceOptions options)
    : m_(m), options_(options),
      graph_(std::make_unique<Graph>(m, options.graph_t, options.graph_theta)),
      cache_(std::make_unique<Cache>()) {}

DistanceOracle::~DistanceOracle() = default;

std::shared_ptr<const DistanceOracle::SourceTree> DistanceOracle::tree_from(SurfacePoint a) const {
    Cache& cache = *cache_;
    const std::array<double, 2> key{a.t, a.theta};
    {
        std::lock_guard<std::mutex> lock(cache.mu);
        for (auto it = cache.items.begin(); it != cache.items.end(); ++it) {
            if (std::memcmp(it->first.data(), key.data(), sizeof(key)) == 0) {
                cache.items.splice(cache.items.begin(), cache.items, it);
                return it->second;
            }
        }
    }
    const Graph& g = *graph_;
    auto tree = std::make_shared<SourceTree>();
    tree->source = a;
    tree->dist.assign(g.node_count(), INFINITY);
    tree->pred.assign(g.node_count(), kNone);
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    for (const auto& [v, p] : g.corners(a)) {
        const double d = g.segment(a, p);
        if (d < tree->dist[v]) {
            tree->dist[v] = d;
            heap.push({d, v});
        }
    }
    while (!heap.empty()) {
        const auto [d, v] = heap.top();
        heap.pop();
        if (d > tree->dist[v]) continue;
        g.neighbours(v, [&](std::size_t u, double w) {
            const double nd = d + w;
            if (nd < tree->dist[u]) {
                tree->dist[u] = nd;
                tree->pred[u] = v;
                heap.push({nd, u});
            }
        });
    }
    std::lock_guard<std::mutex> lock(cache.mu);
    cache.items.emplace_front(key, tree);
    if (cache.items.size() > 256) cache.items.pop_back();
    return tree;
}

// ---------------------------------------------------------------------------
// Geodesic shooting

namespace {

using State = std::array<double, 6>;  // t, theta, psi and their d/dpsi0

struct LeftSurface {};

// Shots passing closer than kTipFloor * f~(0) to a tip are dropped: the polar
// chart is singular there, and the via-tip route is within O(floor^2) of them.
constexpr double kTipFloor = 1e-6;
constexpr std::size_t kMaxEvaluations = 400000;

struct GeodesicRhs {
    const NeedleManifold& m;
    double limit;
    double floor;
    std::size_t* evaluations;
    void operator()(const State& y, State& dy, double /*s*/) const {
        const double t = y[0];
        if (!(std::abs(t) < limit) || ++*evaluations > kMaxEvaluations) throw LeftSurface{};
        const double r = m.f(t), rp = m.fp(t), rpp = m.fpp(t);
        if (!(r > floor)) throw LeftSurface{};
        const double sp = std::sin(y[2]), cp = std::cos(y[2]);
        dy[0] = cp;
        dy[1] = sp / r;
        dy[2] = -(rp / r) * sp;
        // Variational equations in psi0.
        dy[3] = -sp * y[5];
        dy[4] = cp * y[5] / r - sp * rp * y[3] / (r * r);
        dy[5] = -((rpp * r - rp * rp) / (r * r)) * y[3] * sp - (rp / r) * cp * y[5];
    }
};

struct ShotEnd {
    State y;
};

std::optional<ShotEnd> shoot(const NeedleManifold& m, SurfacePoint a, double psi0, double length,
                             double tol, std::vector<SurfacePoint>* trace) {
    namespace odeint = boost::numeric::odeint;
    State y{a.t, a.theta, psi0, 0.0, 0.0, 1.0};
    std::size_t evaluations = 0;
    GeodesicRhs rhs{m, m.c() * (1.0 - 1e-12), kTipFloor * m.f(0.0), &evaluations};
    auto stepper = odeint::make_controlled(tol, tol, odeint::runge_kutta_dopri5<State>());
    try {
        if (trace) {
            trace->clear();
            odeint::integrate_adaptive(stepper, rhs, y, 0.0, length, std::min(1e-3, length),
                                       [&](const State& s, double) {
                                           trace->push_back({s[0], s[1]});
                                       });
        } else {
            odeint::integrate_adaptive(stepper, rhs, y, 0.0, length, std::min(1e-3, length));
        }
    } catch (const LeftSurface&) {
        return std::nullopt;
    } catch (const std::out_of_range&) {
        return std::nullopt;
    } catch (const odeint::step_adjustment_error&) {
        return std::nullopt;
    }
    for (double v : y) {
        if (!std::isfinite(v)) return std::nullopt;
    }
    return ShotEnd{y};
}

struct ShotResult {
    double psi0;
    double length;
    double theta_target;
};

std::optional<ShotResult> newton_shoot(const NeedleManifold& m, SurfacePoint a, SurfacePoint b,
                                       double theta_target, double psi0, double length,
                                       double tol, double endpoint_tol, int iterations) {
    const double rb = std::max(m.f(b.t), 1e-300);
    auto residual = [&](const ShotEnd& e, double& f0, double& f1) {
        f0 = e.y[0] - b.t;
        f1 = rb * (e.y[1] - theta_target);
    };
    if (!(length > 0.0)) return std::nullopt;
    auto end = shoot(m, a, psi0, length, tol, nullptr);
    if (!end) return std::nullopt;
    double f0, f1;
    residual(*end, f0, f1);
    double norm = std::hypot(f0, f1);
    int slow = 0;
    for (int it = 0; it < iterations; ++it) {
        if (norm <= endpoint_tol) return ShotResult{psi0, length, theta_target};
        // Clairaut: theta' = r_a sin(psi0) / r^2, so a nearly meridional shot
        // only turns by passing next to a tip. The via-tip route covers it.
        const double clairaut = std::abs(m.f(a.t) * std::sin(psi0));
        if (clairaut < kTipFloor * m.f(0.0) && std::abs(theta_target - a.theta) > 1e-6) return std::nullopt;
        const State& y = end->y;
        const double re = m.f(y[0]);
        // d(end)/dpsi0 from the variational state, d(end)/dL from the tangent.
        const double j00 = y[3], j01 = std::cos(y[2]);
        const double j10 = rb * y[4], j11 = rb * std::sin(y[2]) / re;
        const double det = j00 * j11 - j01 * j10;
        if (!std::isfinite(det) || det == 0.0) return std::nullopt;
        const double dpsi = -(j11 * f0 - j01 * f1) / det;
        const double dlen = -(-j10 * f0 + j00 * f1) / det;
        double step = 1.0;
        bool improved = false;
        const double before = norm;
        for (int half = 0; half < 12; ++half, step *= 0.5) {
            const double np = psi0 + step * dpsi;
            double nl = length + step * dlen;
            if (!(nl > 0.0)) continue;
            auto ne = shoot(m, a, np, nl, tol, nullptr);
            if (!ne) continue;
            double g0, g1;
            residual(*ne, g0, g1);
            const double nn = std::hypot(g0, g1);
            if (nn < norm) {
                psi0 = np;
                length = nl;
                end = ne;
                f0 = g0;
                f1 = g1;
                norm = nn;
                improved = true;
                break;
            }
        }
        if (!improved) return std::nullopt;
        // Full Newton steps that only crawl mean a singular limit, usually a
        // geodesic collapsing onto a tip; give up.
        slow = (step == 1.0 && norm > 0.5 * before) ? slow + 1 : 0;
        if (slow >= 6) return std::nullopt;
    }
    if (norm <= endpoint_tol) return ShotResult{psi0, length, theta_target};
    return std::nullopt;
}

}  // namespace

Geodesic DistanceOracle::solve(SurfacePoint a, SurfacePoint b,
                               std::shared_ptr<const SourceTree>& tree_ptr) const {
    const double c = m_.c();
    const Graph& g = *graph_;
    const double dth = wrap_pi(b.theta - a.theta);
    const bool a_tip = std::abs(a.t) >= c;
    const bool b_tip = std::abs(b.t) >= c;

    // Exact cases: |grad t| = 1 gives d >= |dt|, and a meridian attains it.
    if (a_tip || b_tip || dth == 0.0) {
        Geodesic gd;
        gd.length = std::abs(b.t - a.t);
        gd.kind = (a_tip || b_tip) ? PathKind::TipMeridian : PathKind::Meridian;
        if (!a_tip && gd.length > 0.0) gd.heading = (b.t > a.t) ? 0.0 : kPi;
        gd.path = {a, {b.t, a.theta}};
        return gd;
    }

    Geodesic best;
    best.length = INFINITY;
    auto offer = [&](Geodesic cand) {
        if (cand.length < best.length) best = std::move(cand);
    };

    if (!tree_ptr) tree_ptr = tree_from(a);
    const SourceTree& tree = *tree_ptr;

    // Via either tip.
    for (double tip : {c, -c}) {
        Geodesic gd;
        gd.length = std::abs(tip - a.t) + std::abs(tip - b.t);
        gd.kind = PathKind::ViaTip;
        if (std::abs(dth) == kPi) gd.heading = (tip > a.t) ? 0.0 : kPi;
        gd.path = {a, {tip, a.theta}, {tip, b.theta}, b};
        offer(std::move(gd));
    }

    // Straight coordinate segment, short winding.
    {
        Geodesic gd;
        gd.length = g.segment(a, {b.t, a.theta + dth});
        gd.kind = PathKind::Graph;
        gd.path = {a, {b.t, a.theta + dth}};
        offer(std::move(gd));
    }

    // Graph path through the best cell corner of b.
    std::vector<SurfacePoint> graph_path;
    {
        double gl = INFINITY;
        std::size_t via = kNone;
        SurfacePoint via_pt{};
        for (const auto& [v, p] : g.corners(b)) {
            const double d = tree.dist[v] + g.segment(p, b);
            if (d < gl) {
                gl = d;
                via = v;
                via_pt = p;
            }
        }
        if (via != kNone && std::isfinite(gl)) {
            std::vector<std::size_t> nodes;
            for (std::size_t v = via; v != kNone; v = tree.pred[v]) nodes.push_back(v);
            std::reverse(nodes.begin(), nodes.end());
            graph_path.push_back(a);
            double theta = a.theta;
            for (std::size_t v : nodes) {
                SurfacePoint p = g.coords(v);
                const bool tip = (v == g.tip_lo() || v == g.tip_hi());
                if (!tip) theta += wrap_pi(p.theta - theta);
                graph_path.push_back({p.t, theta});
            }
            theta += wrap_pi(b.theta - theta);
            graph_path.push_back({b.t, theta});
            Geodesic gd;
            gd.length = gl;
            gd.kind = PathKind::Graph;
            gd.path = graph_path;
            offer(std::move(gd));
        }
    }

    // Shooting seeds.
    struct Seed {
        double psi, length, theta_target;
    };
    std::vector<Seed> seeds;
    const double dtt = b.t - a.t;
    const double ra = m_.f(a.t);
    double rbar = 0.0;
    for (int k = 0; k <= 8; ++k) rbar += m_.f(a.t + dtt * k / 8.0) / 9.0;
    // At dtheta = pi the two windings mirror each other.
    std::vector<double> windings{dth};
    if (std::abs(dth) < kPi) windings.push_back(dth - std::copysign(kTwoPi, dth));
    for (double wind : windings) {
        const double chord = std::hypot(dtt, rbar * wind);
        const double psi_bar = std::atan2(rbar * wind, dtt);
        seeds.push_back({psi_bar, chord, a.theta + wind});
        const double sc = std::clamp(rbar * std::sin(psi_bar) / ra, -1.0, 1.0);
        const double psi_c = std::asin(sc);
        seeds.push_back({std::cos(psi_bar) >= 0.0 ? psi_c : kPi - psi_c, chord, a.theta + wind});
    }
    if (graph_path.size() >= 2) {
        const double target = graph_path.back().theta;
        double acc = 0.0, total = 0.0;
        std::vector<double> cum{0.0};
        for (std::size_t k = 1; k < graph_path.size(); ++k) {
            total += g.segment(graph_path[k - 1], graph_path[k]);
            cum.push_back(total);
        }
        for (double frac : {0.1, 0.3, 0.6}) {
            std::size_t k = 1;
            while (k + 1 < graph_path.size() && cum[k] < frac * total) ++k;
            const SurfacePoint p = graph_path[k];
            acc = std::atan2(ra * (p.theta - a.theta), p.t - a.t);
            seeds.push_back({acc, total, target});
        }
    }
    // Coarse Newton from every seed, then polish the distinct short ones.
    const double coarse_tol = std::max(options_.shooting_tol, 1e-8);
    std::vector<ShotResult> coarse;
    for (const auto& s : seeds) {
        const auto shot = newton_shoot(m_, a, b, s.theta_target, s.psi, s.length, coarse_tol,
                                       std::max(options_.endpoint_tol, 1e-7), options_.newton_iterations);
        if (!shot) continue;
        const bool seen = std::any_of(coarse.begin(), coarse.end(), [&](const ShotResult& r) {
            return std::abs(r.length - shot->length) < 1e-6 && std::abs(wrap_pi(r.psi0 - shot->psi0)) < 1e-5;
        });
        if (!seen) coarse.push_back(*shot);
    }
    double shortest = INFINITY;
    for (const auto& r : coarse) shortest = std::min(shortest, r.length);
    for (const auto& r : coarse) {
        if (r.length > shortest + 1e-5 || !(r.length < best.length + 1e-5)) continue;
        const auto shot = newton_shoot(m_, a, b, r.theta_target, r.psi0, r.length, options_.shooting_tol,
                                       options_.endpoint_tol, options_.newton_iterations);
        // A certified geodesic replaces an uncertified path of equal length,
        // e.g. the coordinate segment along the equator.
        const bool tie = best.kind == PathKind::Graph && shot->length < best.length + 1e-9;
        if (!shot || !(shot->length < best.length || tie)) continue;
        Geodesic gd;
        gd.length = std::min(shot->length, best.length);
        gd.kind = PathKind::Shooting;
        gd.heading = shot->psi0;
        shoot(m_, a, shot->psi0, shot->length, options_.shooting_tol, &gd.path);
        best = std::move(gd);
    }
    return best;
}

Geodesic DistanceOracle::geodesic(SurfacePoint a, SurfacePoint b) const {
    std::shared_ptr<const SourceTree> tree;
    return solve(a, b, tree);
}

double DistanceOracle::distance(SurfacePoint a, SurfacePoint b) const { return geodesic(a, b).length; }

std::vector<double> DistanceOracle::distances_from(SurfacePoint a,
                                                   std::span<const SurfacePoint> targets) const {
    std::shared_ptr<const SourceTree> tree;
    std::vector<double> out(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) out[i] = solve(a, targets[i], tree).length;
    return out;
}

double DistanceOracle::graph_distance(SurfacePoint a, SurfacePoint b) const {
    const auto tree = tree_from(a);
    const Graph& g = *graph_;
    double best = INFINITY;
    for (const auto& [v, p] : g.corners(b)) best = std::min(best, tree->dist[v] + g.segment(p, b));
    return best;
}

double DistanceOracle::distance_nd(double t_a, std::span<const double> angles_a, double t_b,
                                   std::span<const double> angles_b) const {
    const auto ua = sphere_point(angles_a);
    const auto ub = sphere_point(angles_b);
    if (ua.size() != ub.size()) throw std::invalid_argument("distance_nd: dimension mismatch");
    double dot = 0.0;
    for (std::size_t i = 0; i < ua.size(); ++i) dot += ua[i] * ub[i];
    const double gap = std::acos(std::clamp(dot, -1.0, 1.0));
    return distance({t_a, 0.0}, {t_b, gap});
}

FiniteMetricSpace DistanceOracle::distance_matrix(std::span<const SurfacePoint> points) const {
    const std::size_t n = points.size();
    std::vector<double> d(n * n, 0.0);
    parallel_for(n, [&](std::size_t i) {
        std::shared_ptr<const SourceTree> tree;
        for (std::size_t j = i + 1; j < n; ++j) d[i * n + j] = solve(points[i], points[j], tree).length;
    });
    std::vector<std::string> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        labels[i] = "x" + std::to_string(i);
        for (std::size_t j = 0; j < i; ++j) d[i * n + j] = d[j * n + i];
    }
    return FiniteMetricSpace(std::move(labels), std::move(d));
}

std::array<double, 3> embedded_direction(const NeedleManifold& m, SurfacePoint x, double psi) {
    const double fp = m.fp(x.t);
    const double zp = m.z_prime(x.t);
    const double ct = std::cos(x.theta), st = std::sin(x.theta);
    const double a = std::cos(psi), b = std::sin(psi);
    std::array<double, 3> v{a * fp * ct - b * st, a * fp * st + b * ct, a * zp};
    const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    for (double& e : v) e /= n;
    return v;
}

}  // namespace needle
