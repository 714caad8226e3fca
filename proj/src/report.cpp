#include "needle/report.hpp"

#include <algorithm>
#include <cmath>

namespace needle {

bool VerificationReport::add(std::string name, double margin, double tolerance) {
    const bool pass = std::isfinite(margin) && margin >= -tolerance;
    entries_.push_back({std::move(name), margin, tolerance, pass});
    return pass;
}

void VerificationReport::set_context(std::string key, double value) {
    auto it = std::find_if(context_.begin(), context_.end(),
                           [&](const auto& kv) { return kv.first == key; });
    if (it != context_.end()) {
        it->second = value;
    } else {
        context_.emplace_back(std::move(key), value);
    }
}

void VerificationReport::append(const VerificationReport& other, std::string_view prefix) {
    for (const auto& e : other.entries_) {
        ReportEntry copy = e;
        if (!prefix.empty()) copy.name = std::string(prefix) + "." + copy.name;
        entries_.push_back(std::move(copy));
    }
    for (const auto& [key, value] : other.context_) {
        set_context(prefix.empty() ? key : std::string(prefix) + "." + key, value);
    }
}

bool VerificationReport::all_pass() const {
    return std::all_of(entries_.begin(), entries_.end(), [](const ReportEntry& e) { return e.pass; });
}

const ReportEntry* VerificationReport::find(std::string_view name) const {
    for (const auto& e : entries_) {
        if (e.name == name) return &e;
    }
    return nullptr;
}

}  // namespace needle
