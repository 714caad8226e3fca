#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cli.hpp"
#include "needle/error.hpp"

namespace needle::cli {

namespace {

std::vector<long> parse_k(const std::string& text) {
    std::vector<long> ks;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        long k = 0;
        try {
            k = std::stol(item, &used);
        } catch (const std::exception&) {
            throw InputError("--k: not an integer: '" + item + "'");
        }
        if (used != item.size()) throw InputError("--k: not an integer: '" + item + "'");
        ks.push_back(k);
    }
    if (ks.empty()) throw InputError("--k is empty");
    return ks;
}

void write_files(const std::filesystem::path& dir, const Output& output) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw InputError("cannot create " + dir.string() + ": " + ec.message());
    for (const auto& [name, contents] : output.files) {
        std::ofstream f(dir / name, std::ios::binary);
        f << contents;
        if (!f) throw InputError("cannot write " + (dir / name).string());
    }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Needle manifolds: construction, embedding, comparison estimates and GH bounds"};
    app.require_subcommand(1);

    RunConfig config;
    std::string k_text, profile = "needle", format = "json";
    std::vector<std::size_t> resolution;
    std::string out_dir;

    const std::pair<const char*, Command> commands[] = {
        {"construct", Command::construct}, {"verify", Command::verify}, {"embed", Command::embed},
        {"gh", Command::gh},               {"sweep", Command::sweep}};
    const char* help[] = {"solve the profile and check the construction inequalities",
                          "curvature, diameter, excess, Toponogov, width and slice checks",
                          "sample the embedded hypersurface", "almost-rigidity report",
                          "table over several k"};
    std::vector<std::pair<CLI::App*, Command>> subs;
    for (std::size_t i = 0; i < std::size(commands); ++i) {
        CLI::App* sub = app.add_subcommand(commands[i].first, help[i]);
        sub->add_option("--k", k_text, "sharpness, an integer >= 100 (comma list for sweep)");
        sub->add_option("--profile", profile, "needle or round-sphere")
            ->check(CLI::IsMember({"needle", "round-sphere"}));
        sub->add_option("--n", config.n, "sphere dimension of the level sets");
        sub->add_option("--step", config.step, "profile integration step");
        sub->add_option("--resolution", resolution, "count_t,count_theta")->delimiter(',')->expected(2);
        sub->add_option("--tol", config.tol, "tolerance for the construction checks");
        sub->add_option("--out", out_dir, "directory for report and data files");
        sub->add_option("--format", format, "json, csv or obj")->check(CLI::IsMember({"json", "csv", "obj"}));
        subs.emplace_back(sub, commands[i].second);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        for (const auto& [sub, cmd] : subs) {
            if (sub->parsed()) config.command = cmd;
        }
        config.sphere = profile == "round-sphere";
        if (!k_text.empty()) config.k = parse_k(k_text);
        if (!resolution.empty()) {
            config.count_t = resolution[0];
            config.count_theta = resolution[1];
        }
        config.format = format == "csv" ? Format::csv : format == "obj" ? Format::obj : Format::json;
        config.out = out_dir;

        const Output output = execute(config);
        if (!config.out.empty()) write_files(config.out, output);
        out << output.text;
        return output.pass ? 0 : 1;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const GeometryError& e) {
        err << "geometry check failed: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace needle::cli
