#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "lcm/dataset.hpp"
#include "lcm/inference.hpp"
#include "lcm/model_spec.hpp"
#include "lcm/optimizer.hpp"
#include "lcm/types.hpp"

namespace lcm {

/// BIC = -2 loglik + n_params * log(n); smaller is better.
double bic(double loglik_value, int n_params, double n);

/// Flat machine-readable result file: one `key = value` per line, arrays
/// bracketed, doubles printed with 17 significant digits so parsing
/// reproduces every number exactly.
class ResultFile {
  public:
    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, double value);
    void set(const std::string& key, long value);
    void set(const std::string& key, bool value);
    void set(const std::string& key, const Vec& value);

    bool has(const std::string& key) const;
    const std::string& get(const std::string& key) const;
    double get_number(const std::string& key) const;
    long get_integer(const std::string& key) const;
    bool get_flag(const std::string& key) const;
    Vec get_vector(const std::string& key) const;

    void write(std::ostream& out) const;
    static ResultFile read(std::istream& in);

  private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

/// Fit summary with classes relabeled for stable presentation: sorted by
/// the expected value of the first response variable. Standard errors are
/// recomputed at the relabeled parameters.
struct RunReport {
    ModelSpec spec;
    Params params;
    Vec se;
    Vec z;
    bool se_ok = false;
    std::string se_failure;
    double loglik_value = 0.0;
    int n_params = 0;
    double n = 0.0;
    double bic_value = 0.0;
    bool converged = false;
    int n_iter = 0;
    int restart_index = 0;
    std::vector<TraceEntry> trace;
    InfoMatrix::Kind info_kind = InfoMatrix::Kind::hybrid;
};

RunReport make_report(const ModelSpec& spec, const Dataset& data, const FitResult& fit,
                      InfoMatrix::Kind info_kind);

/// Class-conditional marginal distribution of one response under q_j.
Vec class_response_marginal(const ModelSpec& spec, const Mat& response_design,
                            const Vec& theta_j, int response);

void print_report(std::ostream& out, const RunReport& report);
ResultFile to_result_file(const RunReport& report);

struct SelectRow {
    int classes = 0;
    bool ok = false;
    double loglik_value = 0.0;
    int n_params = 0;
    double bic_value = 0.0;
    std::string error;
};

/// Fits each class count in [c_min, c_max]; failures are recorded per row
/// rather than aborting the sweep. Fits may run concurrently, capped by
/// the LCM_THREADS environment variable.
std::vector<SelectRow> select_classes(const ModelSpec& spec, const Dataset& data,
                                      int c_min, int c_max, const OptimOptions& opts);

}  // namespace lcm
