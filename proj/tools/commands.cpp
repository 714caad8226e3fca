#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <string>

#include <fmt/format.h>

#include "cli.hpp"
#include "needle/comparison.hpp"
#include "needle/embedding.hpp"
#include "needle/gh.hpp"
#include "needle/profile.hpp"

namespace needle::cli {

namespace {

constexpr double kComparisonTol = 1e-3;
constexpr std::uint64_t kSeed = 20240611;

std::string num(double x) { return fmt::format("{:.17g}", x); }

std::shared_ptr<const Profile> make_profile(const RunConfig& config, long k) {
    if (config.sphere) return std::make_shared<const Profile>(Profile::round_sphere(config.step));
    return std::make_shared<const Profile>(solve_profile(BumpParams(static_cast<double>(k)), config.step));
}

NeedleManifold make_manifold(const RunConfig& config, long k) {
    return NeedleManifold(config.n, NeedleProfile(make_profile(config, k)));
}

long single_k(const RunConfig& config) { return config.sphere ? 0 : config.k.front(); }

Json header(const RunConfig& config, const char* command) {
    Json j;
    j["command"] = command;
    j["profile"] = config.sphere ? "round-sphere" : "needle";
    j["k"] = config.sphere ? Json() : Json(config.k.front());
    j["n"] = config.n;
    j["step"] = config.step;
    return j;
}

// Uniform on [0, 1) from the top 53 bits, so the stream is the same on every
// standard library.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<SurfacePoint> random_points(double c, std::size_t count, std::mt19937_64& rng) {
    std::vector<SurfacePoint> pts(count);
    for (auto& p : pts) {
        p.t = -c + 2.0 * c * unit(rng);
        p.theta = 2.0 * kPi * unit(rng);
    }
    return pts;
}

std::vector<double> embed2(const NeedleManifold& m, SurfacePoint p) {
    std::vector<double> angles(static_cast<std::size_t>(m.n() - 1), kPi / 2.0);
    angles.back() = p.theta;
    return embed_point(m, p.t, angles);
}

Output construct(const RunConfig& config) {
    const auto profile = make_profile(config, single_k(config));
    auto rescaled = rescale_and_verify(profile, config.tol);
    VerificationReport report = rescaled.report;
    report.append(construction_bounds(rescaled.needle), "bounds");
    const NeedleManifold m(config.n, rescaled.needle);

    std::string csv = "t,f,fp,fpp,h\n";
    const auto grid = profile->grid();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        csv += fmt::format("{},{},{},{},{}\n", num(grid[i]), num(profile->f()[i]), num(profile->fp()[i]),
                           num(profile->fpp()[i]), num(profile->h()[i]));
    }
    // Meridian curve (f~, z) over [0, c].
    std::string curve = "t,f_tilde,z\n";
    const auto ng = m.profile().grid();
    const auto ft = m.profile().ft();
    const auto zt = m.z_table();
    for (std::size_t i = 0; i < ng.size(); ++i) {
        curve += fmt::format("{},{},{}\n", num(ng[i]), num(ft[i]), num(zt[i]));
    }
    curve += fmt::format("{},{},{}\n", num(m.c()), num(0.0), num(zt.back()));

    Json j = header(config, "construct");
    j["c"] = profile->c();
    j["fp_c"] = profile->fp_at_c();
    j["scale"] = rescaled.needle.scale();
    j["f_tilde_0"] = m.f(0.0);
    j["z_c"] = m.z(m.c());
    j["report"] = report_json(report);

    Output out;
    out.pass = report.all_pass();
    const std::string json = dump(j);
    out.text = config.format == Format::csv ? csv : json;
    out.files = {{"construct.json", json}, {"profile.csv", csv}, {"curve.csv", curve}};
    return out;
}

VerificationReport diameter_report(const RunConfig& config, double diam) {
    VerificationReport r;
    r.set_context("diam_extrinsic", diam);
    r.add("diameter_below_pi", kPi - diam, 0.0);
    if (config.sphere) {
        r.add("diameter_equals_2", -std::abs(diam - 2.0), kComparisonTol);
    } else {
        const double k = static_cast<double>(config.k.front());
        r.add("diameter_at_least_pi_minus_20_over_k", diam - (kPi - 20.0 / k), 0.0);
    }
    return r;
}

Output verify(const RunConfig& config) {
    const NeedleManifold m = make_manifold(config, single_k(config));
    const double c = m.c();
    const DistanceOracle oracle(m);
    std::mt19937_64 rng(kSeed);
    Json j = header(config, "verify");
    j["resolution"] = Json::array({config.count_t, config.count_theta});
    Json sections;
    bool pass = true;
    auto section = [&](const char* name, const VerificationReport& r) {
        sections[name] = report_json(r);
        pass = pass && r.all_pass();
    };

    section("curvature", curvature_report(m, interior_grid(m, 2000)).summary);

    const auto mesh = sample_mesh(m, config.count_t, config.count_theta);
    const double diam = extrinsic_diameter(mesh).value;
    const double eps0 = kPi - diam;
    section("diameter", diameter_report(config, diam));

    // Chord against arc on random pairs.
    {
        const auto pts = random_points(c, 20, rng);
        VerificationReport r;
        double worst = INFINITY;
        for (std::size_t a = 0; a < pts.size(); ++a) {
            const auto xa = embed2(m, pts[a]);
            for (std::size_t b = a + 1; b < pts.size(); ++b) {
                const auto xb = embed2(m, pts[b]);
                double chord = 0.0;
                for (std::size_t i = 0; i < xa.size(); ++i) chord += (xa[i] - xb[i]) * (xa[i] - xb[i]);
                worst = std::min(worst, oracle.distance(pts[a], pts[b]) - std::sqrt(chord));
            }
        }
        r.add("chord_at_most_arc", worst, 1e-9);
        section("metric", r);
    }

    {
        VerificationReport r;
        const auto samples = random_points(c, 40, rng);
        const SurfacePoint pairs[3][2] = {{{c, 0.0}, {-c, 0.0}},
                                          {{c / 2.0, 0.0}, {-c / 2.0, kPi}},
                                          {{0.8 * c, 1.0}, {-0.3 * c, 2.5}}};
        for (int i = 0; i < 3; ++i) {
            const auto e = excess_sup(oracle, pairs[i][0], pairs[i][1], samples, kComparisonTol);
            r.append(e.report, fmt::format("pair{}", i));
            r.set_context(fmt::format("pair{}_sup", i), e.sup);
        }
        section("excess", r);
    }

    {
        VerificationReport r;
        const auto pts = random_points(c, 150, rng);
        double worst = INFINITY, largest = 0.0;
        int checked = 0;
        for (std::size_t i = 0; i + 2 < pts.size(); i += 3) {
            const auto h = make_hinge(oracle, pts[i], pts[i + 1], pts[i + 2]);
            if (!h) continue;
            ++checked;
            const double margin = toponogov_margin(oracle, *h);
            worst = std::min(worst, margin);
            largest = std::max(largest, std::abs(margin));
        }
        r.set_context("hinges", checked);
        r.add("hinges_certified", checked - 1.0, 0.0);
        r.add("toponogov_margin_nonnegative", checked ? worst : 0.0, kComparisonTol);
        if (config.sphere) r.add("toponogov_equality", -largest, 1e-4);
        section("toponogov", r);
    }

    {
        VerificationReport r;
        const auto w = width_ratio(mesh, embed2(m, {c, 0.0}), embed2(m, {-c, 0.0}));
        r.set_context("sup_height", w.sup_height);
        r.set_context("chord", w.chord);
        r.set_context("ratio", w.ratio);
        r.add("width_ratio_at_most_sqrt_pi", std::sqrt(kPi) - w.ratio, kComparisonTol);
        section("width", r);
    }

    if (m.n() == 2) {
        VerificationReport r;
        const double fractions[] = {-0.5, 0.0, 0.5};
        for (int i = 0; i < 3; ++i) {
            r.append(convex_slice_check(mesh, m.z(fractions[i] * c), eps0), fmt::format("level{}", i));
        }
        section("slice", r);
    }

    j["diam_extrinsic"] = diam;
    j["eps0"] = eps0;
    j["reports"] = sections;
    j["pass"] = pass;
    Output out;
    out.pass = pass;
    out.text = dump(j);
    out.files = {{"verify.json", out.text}};
    return out;
}

std::string mesh_csv(const EmbeddedMesh& mesh) {
    std::string s = "t";
    for (int i = 1; i < mesh.n; ++i) s += fmt::format(",theta_{}", i);
    for (int i = 1; i <= mesh.n + 1; ++i) s += fmt::format(",x_{}", i);
    s += "\n";
    for (std::size_t i = 0; i < mesh.size(); ++i) {
        s += num(mesh.ts[i]);
        for (double a : mesh.angle(i)) s += "," + num(a);
        for (double x : mesh.point(i)) s += "," + num(x);
        s += "\n";
    }
    return s;
}

std::string mesh_obj(const EmbeddedMesh& mesh) {
    std::string s;
    for (std::size_t i = 0; i < mesh.size(); ++i) {
        const auto p = mesh.point(i);
        s += fmt::format("v {} {} {}\n", num(p[0]), num(p[1]), num(p[2]));
    }
    const std::size_t w = mesh.count_theta;
    for (std::size_t r = 0; r + 1 < mesh.count_t; ++r) {
        for (std::size_t a = 0; a < w; ++a) {
            const std::size_t b = (a + 1) % w;
            s += fmt::format("f {} {} {} {}\n", r * w + a + 1, (r + 1) * w + a + 1, (r + 1) * w + b + 1,
                             r * w + b + 1);
        }
    }
    return s;
}

Output embed(const RunConfig& config) {
    const NeedleManifold m = make_manifold(config, single_k(config));
    const auto mesh = sample_mesh(m, config.count_t, config.count_theta);
    const auto d = extrinsic_diameter(mesh);
    Json j = header(config, "embed");
    j["resolution"] = Json::array({config.count_t, config.count_theta});
    j["samples"] = mesh.size();
    j["c"] = m.c();
    j["diam_extrinsic"] = d.value;
    j["diam_pair"] = Json::array({d.first, d.second});
    const std::string json = dump(j);

    Output out;
    out.pass = true;
    out.files = {{"embed.json", json}};
    if (config.format == Format::obj) {
        out.text = mesh_obj(mesh);
        out.files.emplace_back("mesh.obj", out.text);
    } else {
        const std::string csv = mesh_csv(mesh);
        out.text = config.format == Format::csv ? csv : json;
        out.files.emplace_back("mesh.csv", csv);
    }
    return out;
}

Output gh(const RunConfig& config) {
    const NeedleManifold m = make_manifold(config, single_k(config));
    const DistanceOracle oracle(m);
    const auto r = almost_rigidity_report(oracle, sample_mesh(m, config.count_t, config.count_theta));
    Output out;
    out.pass = r.pass && r.checks.all_pass();
    out.text = dump(rigidity_json(r, config));
    out.files = {{"gh.json", out.text}, {"gh_checks.json", dump(report_json(r.checks))}};
    return out;
}

Output sweep(const RunConfig& config) {
    std::string csv = "k,c,fp_c,diam_I,eps,width_ratio,gh_bound,ratio\n";
    Json rows = Json::array();
    VerificationReport report;
    double prev_diam = -INFINITY, prev_gh = INFINITY;
    for (long k : config.k) {
        const NeedleManifold m = make_manifold(config, k);
        const DistanceOracle oracle(m);
        const auto mesh = sample_mesh(m, config.count_t, config.count_theta);
        const auto w = width_ratio(mesh, embed2(m, {m.c(), 0.0}), embed2(m, {-m.c(), 0.0}));
        const auto r = almost_rigidity_report(oracle, mesh);
        const double fpc = m.profile().base().fp_at_c();
        csv += fmt::format("{},{},{},{},{},{},{},{}\n", k, num(m.c()), num(fpc), num(r.diam_extrinsic),
                           num(r.eps0), num(w.ratio), num(r.gh_bound), num(r.ratio));
        RunConfig one = config;
        one.k = {k};
        Json row = rigidity_json(r, one);
        row["c"] = m.c();
        row["fp_c"] = fpc;
        row["width_ratio"] = w.ratio;
        rows.push_back(row);

        const std::string tag = fmt::format("k{}", k);
        report.add(tag + ".eps_at_most_20_over_k", 20.0 / static_cast<double>(k) - r.eps0, 0.0);
        report.add(tag + ".ratio_at_most_4_pi_3_2", r.bound_constant - r.ratio, 0.0);
        report.append(r.checks, tag);
        if (std::isfinite(prev_diam)) {
            report.add(tag + ".diameter_increasing", r.diam_extrinsic - prev_diam, 0.0);
            report.add(tag + ".gh_bound_decreasing", prev_gh - r.gh_bound, 0.0);
        }
        prev_diam = r.diam_extrinsic;
        prev_gh = r.gh_bound;
    }
    // Strict monotonicity: a zero margin is a tie, not an increase.
    bool strict = true;
    for (const auto& e : report.entries()) {
        if (e.name.ends_with("_increasing") || e.name.ends_with("_decreasing")) strict = strict && e.margin > 0.0;
    }

    Json j;
    j["command"] = "sweep";
    j["profile"] = "needle";
    j["k"] = config.k;
    j["n"] = config.n;
    j["step"] = config.step;
    j["resolution"] = Json::array({config.count_t, config.count_theta});
    j["rows"] = rows;
    j["report"] = report_json(report);
    j["pass"] = report.all_pass() && strict;

    Output out;
    out.pass = report.all_pass() && strict;
    const std::string json = dump(j);
    out.text = config.format == Format::csv ? csv : json;
    out.files = {{"sweep.json", json}, {"sweep.csv", csv}};
    return out;
}

}  // namespace

void validate(const RunConfig& config) {
    if (config.n < 2) throw InputError("--n must be at least 2");
    if (!(config.step > 0.0 && config.step <= 1e-3)) throw InputError("--step must lie in (0, 1e-3]");
    if (!(config.tol > 0.0)) throw InputError("--tol must be positive");
    if (config.count_t < 3 || config.count_theta < 3) throw InputError("--resolution needs at least 3,3");
    if (config.sphere) {
        if (!config.k.empty()) throw InputError("--k does not apply to the round-sphere profile");
        if (config.command == Command::sweep) throw InputError("sweep needs the needle profile");
    } else {
        if (config.k.empty()) throw InputError("--k is required");
        for (long k : config.k) {
            if (k < static_cast<long>(BumpParams::kMinSharpness)) throw InputError("--k must be at least 100");
        }
        if (config.command == Command::sweep && config.k.size() < 2) {
            throw InputError("sweep needs at least two values of --k");
        }
        if (config.command != Command::sweep && config.k.size() != 1) {
            throw InputError("--k takes a single value outside sweep");
        }
    }
    const bool obj = config.format == Format::obj;
    if (obj && (config.command != Command::embed || config.n != 2)) {
        throw InputError("--format obj is only available for embed with n = 2");
    }
    const bool csv = config.format == Format::csv;
    if (csv && (config.command == Command::verify || config.command == Command::gh)) {
        throw InputError("verify and gh write json only");
    }
}

Output execute(const RunConfig& config) {
    validate(config);
    switch (config.command) {
        case Command::construct: return construct(config);
        case Command::verify: return verify(config);
        case Command::embed: return embed(config);
        case Command::gh: return gh(config);
        case Command::sweep: return sweep(config);
    }
    throw InputError("unknown command");
}

}  // namespace needle::cli
