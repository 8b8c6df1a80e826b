#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "lcm/dataset.hpp"
#include "lcm/misfit.hpp"
#include "lcm/model_spec.hpp"
#include "lcm/types.hpp"

namespace lcm {

/// Reads a model spec from a JSON file with keys classes, responses
/// (list of {name, categories}), covariates (list of names) and
/// pair_scores (list of [name, name]).
ModelSpec load_spec(const std::string& path);

/// Parameter file: JSON object with "beta" (array) and "theta" (array of
/// c arrays).
Params load_params(const std::string& path, const ModelSpec& spec);
void save_params(const std::string& path, const Params& params);

/// Misspecification scenario: JSON object with true_spec, true_params,
/// candidate_spec and configs (list of {covariates, weight}).
MisfitScenario load_scenario(const std::string& path);

/// Comma-delimited dataset, header row, one subject per row; response
/// columns first (integer-coded 0..m_t-1, order matching the spec), then
/// covariate columns. Malformed cells are reported with their row number.
/// With group = true, subjects sharing a covariate vector are collapsed
/// into one configuration with a pattern-frequency vector.
Dataset parse_dataset(std::istream& in, const ModelSpec& spec, bool group = false);
Dataset parse_dataset_file(const std::string& path, const ModelSpec& spec, bool group = false);

void write_dataset(std::ostream& out, const ModelSpec& spec, const Dataset& data);

/// Collapses individual data into grouped form and back; the multiset of
/// (covariates, pattern) pairs is preserved.
Dataset group_dataset(const Dataset& data, const ModelSpec& spec);
Dataset expand_dataset(const Dataset& data);

/// Covariate source for simulation: an explicit list of covariate vectors
/// (cycled over subjects) or i.i.d. standard normal draws.
struct CovariateList {
    std::vector<Vec> rows;
};
struct CovariateIIDNormal {};
using CovariateSource = std::variant<CovariateList, CovariateIIDNormal>;

/// Draws each subject's class from pi_i, then a pattern from that class's
/// q_j. Deterministic in the seed.
Dataset simulate(const ModelSpec& spec, const Params& params,
                 const CovariateSource& covariates, int n, std::uint64_t seed);

}  // namespace lcm
