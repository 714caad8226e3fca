#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace needle {

/// One named inequality check. `margin` is signed slack: positive means the
/// inequality holds with room to spare, negative means it is violated by that
/// much. The check passes iff margin >= -tolerance.
struct ReportEntry {
    std::string name;
    double margin = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

class VerificationReport {
public:
    /// Records `name` and returns whether it passed.
    bool add(std::string name, double margin, double tolerance);
    void set_context(std::string key, double value);
    void append(const VerificationReport& other, std::string_view prefix = {});

    const std::vector<ReportEntry>& entries() const { return entries_; }
    const std::vector<std::pair<std::string, double>>& context() const { return context_; }

    bool all_pass() const;
    const ReportEntry* find(std::string_view name) const;

private:
    std::vector<ReportEntry> entries_;
    std::vector<std::pair<std::string, double>> context_;
};

}  // namespace needle
