#pragma once

#include <vector>

#include "lcm/dataset.hpp"
#include "lcm/model_spec.hpp"
#include "lcm/types.hpp"

namespace lcm {

/// pi_i = softmax(X_i beta). Row maximum is subtracted before
/// exponentiation so extreme parameters reached during line search do not
/// overflow. Entries are strictly positive and sum to 1.
Vec class_weights(const Mat& class_design, const Vec& beta);

/// q_j = softmax(G theta_j), same overflow guard.
Vec response_probs(const Mat& response_design, const Vec& theta_j);

/// Q (r x c): column j is q_j.
Mat mixture_matrix(const Mat& response_design, const std::vector<Vec>& theta);

/// p_i = Q pi_i, the marginal response-pattern distribution.
Vec marginal_probs(const Mat& mixture, const Vec& pi);

/// Omega(v) = diag(v) - v v'. Symmetric, rows sum to zero, PSD.
Mat omega(const Vec& v);

/// Log-likelihood sum_i y_i' log(p_i), frequency-weighted for grouped data.
/// An observed pattern whose probability underflows to zero raises
/// numeric_error naming the subject; probabilities are never clamped.
double loglik(const ModelSpec& spec, const Params& params, const Dataset& data);

}  // namespace lcm
