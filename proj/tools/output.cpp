#include <cmath>
#include <string>

#include <fmt/format.h>

#include "cli.hpp"

namespace needle::cli {

namespace {

void write(const Json& v, std::string& s, int indent) {
    const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
    switch (v.type()) {
        case Json::value_t::object: {
            if (v.empty()) {
                s += "{}";
                return;
            }
            s += "{\n";
            bool first = true;
            for (const auto& [key, item] : v.items()) {
                if (!first) s += ",\n";
                first = false;
                s += pad;
                s += Json(key).dump();
                s += ": ";
                write(item, s, indent + 2);
            }
            s += "\n" + std::string(static_cast<std::size_t>(indent), ' ') + "}";
            return;
        }
        case Json::value_t::array: {
            // Short numeric arrays stay on one line.
            bool flat = v.size() <= 4;
            for (const auto& item : v) flat = flat && item.is_primitive();
            if (v.empty() || flat) {
                s += "[";
                for (std::size_t i = 0; i < v.size(); ++i) {
                    if (i) s += ", ";
                    write(v[i], s, indent);
                }
                s += "]";
                return;
            }
            s += "[\n";
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i) s += ",\n";
                s += pad;
                write(v[i], s, indent + 2);
            }
            s += "\n" + std::string(static_cast<std::size_t>(indent), ' ') + "]";
            return;
        }
        case Json::value_t::number_float: {
            const double x = v.get<double>();
            // -0 prints as 0.
            s += !std::isfinite(x) ? "null" : x == 0.0 ? "0" : fmt::format("{:.17g}", x);
            return;
        }
        default:
            s += v.dump();
    }
}

}  // namespace

std::string dump(const Json& value) {
    std::string s;
    write(value, s, 0);
    s += "\n";
    return s;
}

Json report_json(const VerificationReport& report) {
    Json entries = Json::array();
    for (const auto& e : report.entries()) {
        entries.push_back(Json{{"name", e.name}, {"margin", e.margin}, {"tolerance", e.tolerance},
                               {"pass", e.pass}});
    }
    Json context = Json::object();
    for (const auto& [key, value] : report.context()) context[key] = value;
    return Json{{"pass", report.all_pass()}, {"entries", entries}, {"context", context}};
}

Json rigidity_json(const RigidityReport& r, const RunConfig& config) {
    Json j;
    j["k"] = config.sphere || config.k.empty() ? Json() : Json(config.k.front());
    j["n"] = r.n;
    j["resolution"] = Json::array({r.count_t, r.count_theta});
    j["diam_extrinsic"] = r.diam_extrinsic;
    j["eps0"] = r.eps0;
    j["delta0"] = r.delta0;
    j["G_epsilon"] = r.G_epsilon;
    j["gh_bound"] = r.gh_bound;
    j["ratio"] = r.ratio;
    j["bound_constant"] = r.bound_constant;
    j["pass"] = r.pass;
    return j;
}

}  // namespace needle::cli
