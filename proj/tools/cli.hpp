#pragma once

// needle_geom command-line front end. run() is the whole program; main() only
// forwards to it so tests can drive the CLI in-process.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "needle/gh.hpp"
#include "needle/report.hpp"

namespace needle::cli {

enum class Command { construct, verify, embed, gh, sweep };
enum class Format { json, csv, obj };

struct RunConfig {
    Command command = Command::construct;
    bool sphere = false;       // --profile round-sphere
    std::vector<long> k;       // one value, or >= 2 for sweep
    int n = 2;
    double step = 1e-5;
    std::size_t count_t = 201;
    std::size_t count_theta = 64;
    double tol = 1e-6;
    std::filesystem::path out;  // directory; empty means stdout only
    Format format = Format::json;
};

// Bad flags or values. Maps to exit code 2.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Output {
    std::string text;  // written to stdout
    std::vector<std::pair<std::string, std::string>> files;  // name, contents
    bool pass = false;
};

// Throws InputError on an invalid combination.
void validate(const RunConfig& config);
Output execute(const RunConfig& config);

// Exit codes: 0 every check passed, 1 some check failed, 2 bad input.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

using Json = nlohmann::ordered_json;

// Floats with 17 significant digits, NaN and infinities as null.
std::string dump(const Json& value);
Json report_json(const VerificationReport& report);
Json rigidity_json(const RigidityReport& report, const RunConfig& config);

}  // namespace needle::cli
