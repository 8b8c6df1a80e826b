#pragma once

#include <vector>

#include "lcm/types.hpp"

namespace lcm {

/// Observed data, in one of two forms:
///  - individual: one row per subject, each holding a covariate vector and
///    the index of the observed response pattern (a one-hot y);
///  - grouped: distinct covariate configurations, each with a frequency
///    vector over the r response patterns. Frequencies may be non-integer
///    (expected-data fits use p-vectors scaled by replicate weights).
/// Exactly one of the two containers is nonempty.
struct Dataset {
    struct Subject {
        Vec covariates;
        int pattern = 0;  // u(i) in [0, r)
    };
    struct Group {
        Vec covariates;
        Vec pattern_freq;  // length r, nonnegative
    };

    std::vector<Subject> subjects;
    std::vector<Group> groups;

    bool grouped() const { return !groups.empty(); }
    bool empty() const { return subjects.empty() && groups.empty(); }

    /// Number of subjects (sum of frequencies for grouped data).
    double total_weight() const;
};

}  // namespace lcm
