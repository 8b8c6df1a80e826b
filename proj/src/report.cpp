#include "lcm/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <future>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "lcm/design.hpp"
#include "lcm/misfit.hpp"
#include "lcm/model_core.hpp"

namespace lcm {

namespace {

std::string fmt(double value) {
    std::ostringstream out;
    out.precision(17);
    out << value;
    return out.str();
}

std::string fmt(const Vec& value) {
    std::string out = "[";
    for (int a = 0; a < value.size(); ++a) {
        if (a > 0) out += ", ";
        out += fmt(value(a));
    }
    return out + "]";
}

}  // namespace

double bic(double loglik_value, int n_params, double n) {
    return -2.0 * loglik_value + n_params * std::log(n);
}

void ResultFile::set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : entries_)
        if (k == key) {
            v = value;
            return;
        }
    entries_.emplace_back(key, value);
}

void ResultFile::set(const std::string& key, double value) { set(key, fmt(value)); }
void ResultFile::set(const std::string& key, long value) { set(key, std::to_string(value)); }
void ResultFile::set(const std::string& key, bool value) {
    set(key, std::string(value ? "true" : "false"));
}
void ResultFile::set(const std::string& key, const Vec& value) { set(key, fmt(value)); }

bool ResultFile::has(const std::string& key) const {
    for (const auto& [k, v] : entries_)
        if (k == key) return true;
    return false;
}

const std::string& ResultFile::get(const std::string& key) const {
    for (const auto& [k, v] : entries_)
        if (k == key) return v;
    throw structural_error("result file has no key '" + key + "'");
}

double ResultFile::get_number(const std::string& key) const { return std::stod(get(key)); }
long ResultFile::get_integer(const std::string& key) const { return std::stol(get(key)); }
bool ResultFile::get_flag(const std::string& key) const { return get(key) == "true"; }

Vec ResultFile::get_vector(const std::string& key) const {
    const std::string& raw = get(key);
    if (raw.size() < 2 || raw.front() != '[' || raw.back() != ']')
        throw structural_error("key '" + key + "' is not an array");
    std::vector<double> values;
    std::stringstream ss(raw.substr(1, raw.size() - 2));
    std::string field;
    while (std::getline(ss, field, ','))
        if (field.find_first_not_of(" \t") != std::string::npos) values.push_back(std::stod(field));
    Vec out(static_cast<Eigen::Index>(values.size()));
    for (std::size_t a = 0; a < values.size(); ++a) out(static_cast<Eigen::Index>(a)) = values[a];
    return out;
}

void ResultFile::write(std::ostream& out) const {
    for (const auto& [k, v] : entries_) out << k << " = " << v << "\n";
}

ResultFile ResultFile::read(std::istream& in) {
    ResultFile file;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto sep = line.find(" = ");
        if (sep == std::string::npos)
            throw structural_error("result file line " + std::to_string(lineno) +
                                   " is not 'key = value'");
        std::string value = line.substr(sep + 3);
        if (!value.empty() && value.back() == '\r') value.pop_back();
        file.entries_.emplace_back(line.substr(0, sep), value);
    }
    return file;
}

Vec class_response_marginal(const ModelSpec& spec, const Mat& response_design,
                            const Vec& theta_j, int response) {
    const Vec q = response_probs(response_design, theta_j);
    Vec marginal = Vec::Zero(spec.responses[response].categories);
    for (int u = 0; u < q.size(); ++u) marginal(pattern_at(u, spec)[response]) += q(u);
    return marginal;
}

RunReport make_report(const ModelSpec& spec, const Dataset& data, const FitResult& fit,
                      InfoMatrix::Kind info_kind) {
    RunReport report;
    report.spec = spec;
    report.info_kind = info_kind;
    report.loglik_value = fit.loglik_final;
    report.n_params = spec.param_dim();
    report.n = data.total_weight();
    report.bic_value = bic(fit.loglik_final, report.n_params, report.n);
    report.converged = fit.converged;
    report.n_iter = fit.n_iter;
    report.restart_index = fit.restart_index;
    report.trace = fit.trace;

    // Stable presentation order: classes sorted by the expected value of
    // the first response variable.
    const Mat response_design = build_response_design(spec);
    std::vector<double> means(spec.classes);
    for (int j = 0; j < spec.classes; ++j) {
        const Vec marginal =
            class_response_marginal(spec, response_design, fit.params_hat.theta[j], 0);
        double mean = 0.0;
        for (int cat = 0; cat < marginal.size(); ++cat) mean += cat * marginal(cat);
        means[j] = mean;
    }
    std::vector<int> perm(spec.classes);
    std::iota(perm.begin(), perm.end(), 0);
    std::stable_sort(perm.begin(), perm.end(),
                     [&](int a, int b) { return means[a] < means[b]; });
    report.params = relabel(spec, fit.params_hat, perm);

    try {
        const InfoMatrix info = info_kind == InfoMatrix::Kind::observed
                                    ? observed_info(spec, report.params, data)
                                    : hybrid_info(spec, report.params, data);
        auto [se, z] = standard_errors(info, report.params);
        report.se = se;
        report.z = z;
        report.se_ok = true;
    } catch (const structural_error& err) {
        report.se_ok = false;
        report.se_failure = err.what();
    }
    return report;
}

void print_report(std::ostream& out, const RunReport& report) {
    const ModelSpec& spec = report.spec;
    const int v = spec.num_covariates();
    const int width = v + 1;

    out << "Latent class model fit\n";
    out << "  classes: " << spec.classes << "   responses:";
    for (const auto& resp : spec.responses) out << " " << resp.name << "(" << resp.categories << ")";
    out << "\n  covariates:";
    if (spec.covariates.empty()) out << " (none)";
    for (const auto& cov : spec.covariates) out << " " << cov;
    out << "\n  n = " << report.n << ", free parameters = " << report.n_params << "\n";
    out << "  loglik = " << report.loglik_value << "   BIC = " << report.bic_value << "\n";
    out << "  converged: " << (report.converged ? "yes" : "NO") << " (" << report.n_iter
        << " iterations, best run " << report.restart_index << ")\n\n";

    if (spec.classes > 1) {
        out << "Class-weight logits (relative to class 0)\n";
        auto label = [&](int a) {
            return a == 0 ? std::string("(intercept)") : spec.covariates[a - 1];
        };
        for (int j = 1; j < spec.classes; ++j) {
            out << "  class " << j << " / class 0:\n";
            for (int a = 0; a < width; ++a) {
                const int idx = (j - 1) * width + a;
                out << "    " << label(a) << ": " << report.params.beta(idx);
                if (report.se_ok) out << "  (se " << report.se(idx) << ", z " << report.z(idx) << ")";
                out << "\n";
            }
        }
        out << "\n";
    }
    if (!report.se_ok && !report.se_failure.empty())
        out << "standard errors unavailable: " << report.se_failure << "\n\n";

    out << "Class-conditional response distributions\n";
    const Mat response_design = build_response_design(spec);
    for (std::size_t t = 0; t < spec.responses.size(); ++t) {
        out << "  " << spec.responses[t].name << ":\n";
        for (int j = 0; j < spec.classes; ++j) {
            const Vec marginal = class_response_marginal(spec, response_design,
                                                         report.params.theta[j],
                                                         static_cast<int>(t));
            out << "    class " << j << ":";
            for (int cat = 0; cat < marginal.size(); ++cat) out << " " << marginal(cat);
            out << "\n";
        }
    }
}

ResultFile to_result_file(const RunReport& report) {
    ResultFile file;
    file.set("command", std::string("fit"));
    file.set("classes", static_cast<long>(report.spec.classes));
    file.set("converged", report.converged);
    file.set("n_iter", static_cast<long>(report.n_iter));
    file.set("restart_index", static_cast<long>(report.restart_index));
    file.set("n", report.n);
    file.set("n_params", static_cast<long>(report.n_params));
    file.set("loglik", report.loglik_value);
    file.set("bic", report.bic_value);
    file.set("info",
             std::string(report.info_kind == InfoMatrix::Kind::observed ? "observed" : "hybrid"));
    file.set("beta", report.params.beta);
    for (int j = 0; j < report.spec.classes; ++j)
        file.set("theta_" + std::to_string(j), report.params.theta[j]);
    file.set("se_ok", report.se_ok);
    if (report.se_ok) {
        file.set("se", report.se);
        file.set("z", report.z);
    }
    Vec trace_ll(static_cast<Eigen::Index>(report.trace.size()));
    for (std::size_t a = 0; a < report.trace.size(); ++a)
        trace_ll(static_cast<Eigen::Index>(a)) = report.trace[a].loglik;
    file.set("trace_loglik", trace_ll);
    return file;
}

std::vector<SelectRow> select_classes(const ModelSpec& spec, const Dataset& data, int c_min,
                                      int c_max, const OptimOptions& opts) {
    if (c_min < 1 || c_max < c_min) throw structural_error("invalid class range");

    auto fit_one = [&](int c) {
        SelectRow row;
        row.classes = c;
        ModelSpec local = spec;
        local.classes = c;
        OptimOptions local_opts = opts;
        local_opts.seed = opts.seed + 1000003ULL * static_cast<std::uint64_t>(c);
        try {
            const FitResult res = fit(local, data, std::nullopt, local_opts);
            row.ok = true;
            row.loglik_value = res.loglik_final;
            row.n_params = local.param_dim();
            row.bic_value = bic(res.loglik_final, row.n_params, data.total_weight());
        } catch (const std::exception& err) {
            row.error = err.what();
        }
        return row;
    };

    unsigned threads = std::thread::hardware_concurrency();
    if (const char* cap = std::getenv("LCM_THREADS")) {
        const long parsed = std::strtol(cap, nullptr, 10);
        if (parsed >= 1) threads = std::min<unsigned>(threads, static_cast<unsigned>(parsed));
    }

    std::vector<SelectRow> rows(c_max - c_min + 1);
    if (threads <= 1) {
        for (int c = c_min; c <= c_max; ++c) rows[c - c_min] = fit_one(c);
    } else {
        // At most `threads` fits in flight at once.
        int next = c_min;
        while (next <= c_max) {
            std::vector<std::future<SelectRow>> batch;
            for (unsigned a = 0; a < threads && next <= c_max; ++a, ++next)
                batch.push_back(std::async(std::launch::async, fit_one, next));
            for (auto& fut : batch) {
                SelectRow row = fut.get();
                rows[row.classes - c_min] = std::move(row);
            }
        }
    }
    return rows;
}

}  // namespace lcm
