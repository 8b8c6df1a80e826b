#pragma once

#include <vector>

#include "lcm/model_spec.hpp"
#include "lcm/types.hpp"

namespace lcm {

/// Lexicographic pattern index; the LAST response variable varies fastest.
/// This ordering is a module-wide convention: G rows, pattern frequencies
/// and dataset indices all share it.
int pattern_index(const std::vector<int>& categories, const ModelSpec& spec);

/// Inverse of pattern_index.
std::vector<int> pattern_at(int index, const ModelSpec& spec);

/// Log-linear design matrix G (r x g). Main effects are dummy-coded with
/// category 0 as reference; each score pair contributes one column with
/// entry 1 - |a - b| / (m - 1) for pattern categories (a, b), which gives
/// the values 1, 0.5, 0 at m = 3. Full column rank is asserted.
Mat build_response_design(const ModelSpec& spec);

/// Class-weight design X_i (c x k) for one subject. Row 0 (reference class)
/// is zero; row j >= 1 holds (1, x_i') in contrast block j - 1.
Mat build_class_design(const Vec& covariates, const ModelSpec& spec);

}  // namespace lcm
