#pragma once

#include <string>
#include <vector>

namespace cascadecomp {

// One verified invariant: measured value against its tolerance.
struct Check {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double tolerance = 0.0;
};

inline Check check_at_most(std::string name, double value, double tolerance) {
    return {std::move(name), value <= tolerance, value, tolerance};
}

inline bool all_passed(const std::vector<Check>& checks) {
    for (const auto& c : checks) {
        if (!c.passed) {
            return false;
        }
    }
    return true;
}

} // namespace cascadecomp
