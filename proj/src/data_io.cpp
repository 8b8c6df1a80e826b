#include "lcm/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <json.hpp>

#include "lcm/design.hpp"
#include "lcm/model_core.hpp"

namespace lcm {

namespace {

using nlohmann::json;

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw structural_error("cannot open file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& err) {
        throw structural_error("malformed JSON in " + path + ": " + err.what());
    }
    return doc;
}

int response_index(const ModelSpec& spec, const std::string& name) {
    for (std::size_t t = 0; t < spec.responses.size(); ++t)
        if (spec.responses[t].name == name) return static_cast<int>(t);
    throw structural_error("unknown response name '" + name + "' in pair_scores");
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
        // trim surrounding whitespace
        const auto first = field.find_first_not_of(" \t\r");
        const auto last = field.find_last_not_of(" \t\r");
        fields.push_back(first == std::string::npos ? "" : field.substr(first, last - first + 1));
    }
    if (!line.empty() && line.back() == ',') fields.emplace_back("");
    return fields;
}

}  // namespace

namespace {

ModelSpec spec_from_json(const json& doc, const std::string& where) {
    ModelSpec spec;
    try {
        spec.classes = doc.at("classes").get<int>();
        for (const auto& resp : doc.at("responses"))
            spec.responses.push_back({resp.at("name").get<std::string>(),
                                      resp.at("categories").get<int>()});
        if (doc.contains("covariates"))
            for (const auto& cov : doc["covariates"])
                spec.covariates.push_back(cov.get<std::string>());
        if (doc.contains("pair_scores"))
            for (const auto& pair : doc["pair_scores"]) {
                if (pair.size() != 2) throw structural_error("pair_scores entries must be [name, name]");
                spec.pair_scores.emplace_back(response_index(spec, pair[0].get<std::string>()),
                                              response_index(spec, pair[1].get<std::string>()));
            }
    } catch (const json::exception& err) {
        throw structural_error("invalid spec in " + where + ": " + err.what());
    }
    spec.validate();
    return spec;
}

Params params_from_json(const json& doc, const ModelSpec& spec, const std::string& where) {
    Params params;
    try {
        const auto& beta = doc.at("beta");
        params.beta.resize(static_cast<Eigen::Index>(beta.size()));
        for (std::size_t a = 0; a < beta.size(); ++a)
            params.beta(static_cast<Eigen::Index>(a)) = beta[a].get<double>();
        for (const auto& block : doc.at("theta")) {
            Vec theta(static_cast<Eigen::Index>(block.size()));
            for (std::size_t a = 0; a < block.size(); ++a)
                theta(static_cast<Eigen::Index>(a)) = block[a].get<double>();
            params.theta.push_back(std::move(theta));
        }
    } catch (const json::exception& err) {
        throw structural_error("invalid params in " + where + ": " + err.what());
    }
    if (params.beta.size() != spec.weight_dim() ||
        static_cast<int>(params.theta.size()) != spec.classes)
        throw structural_error("params in " + where + " do not match the model dimensions");
    for (const auto& block : params.theta)
        if (block.size() != spec.loglinear_dim())
            throw structural_error("params in " + where + " have a theta block of wrong length");
    if (!params.stacked().allFinite())
        throw structural_error("params in " + where + " contain non-finite values");
    return params;
}

}  // namespace

ModelSpec load_spec(const std::string& path) { return spec_from_json(load_json(path), path); }

Params load_params(const std::string& path, const ModelSpec& spec) {
    return params_from_json(load_json(path), spec, path);
}

MisfitScenario load_scenario(const std::string& path) {
    const json doc = load_json(path);
    MisfitScenario scenario;
    try {
        scenario.true_spec = spec_from_json(doc.at("true_spec"), path + " (true_spec)");
        scenario.true_params =
            params_from_json(doc.at("true_params"), scenario.true_spec, path + " (true_params)");
        scenario.candidate_spec =
            spec_from_json(doc.at("candidate_spec"), path + " (candidate_spec)");
        for (const auto& cfg : doc.at("configs")) {
            WeightedConfig wc;
            const auto& covs = cfg.at("covariates");
            wc.covariates.resize(static_cast<Eigen::Index>(covs.size()));
            for (std::size_t a = 0; a < covs.size(); ++a)
                wc.covariates(static_cast<Eigen::Index>(a)) = covs[a].get<double>();
            wc.weight = cfg.value("weight", 1.0);
            if (!(wc.weight > 0.0))
                throw structural_error("scenario config weights must be positive");
            scenario.configs.push_back(std::move(wc));
        }
    } catch (const json::exception& err) {
        throw structural_error("invalid scenario file " + path + ": " + err.what());
    }
    return scenario;
}

void save_params(const std::string& path, const Params& params) {
    json doc;
    doc["beta"] = std::vector<double>(params.beta.data(), params.beta.data() + params.beta.size());
    doc["theta"] = json::array();
    for (const auto& block : params.theta)
        doc["theta"].push_back(std::vector<double>(block.data(), block.data() + block.size()));
    std::ofstream out(path);
    if (!out) throw structural_error("cannot write file: " + path);
    out << doc.dump(2) << "\n";
}

Dataset parse_dataset(std::istream& in, const ModelSpec& spec, bool group) {
    spec.validate();
    const int n_resp = static_cast<int>(spec.responses.size());
    const int v = spec.num_covariates();

    std::string line;
    if (!std::getline(in, line)) throw structural_error("dataset is empty (no header row)");
    const auto header = split_csv_line(line);
    if (static_cast<int>(header.size()) != n_resp + v)
        throw structural_error("header has " + std::to_string(header.size()) +
                               " columns, expected " + std::to_string(n_resp + v));
    for (int t = 0; t < n_resp; ++t)
        if (header[t] != spec.responses[t].name)
            throw structural_error("header column " + std::to_string(t + 1) + " is '" + header[t] +
                                   "', expected response '" + spec.responses[t].name + "'");
    for (int a = 0; a < v; ++a)
        if (header[n_resp + a] != spec.covariates[a])
            throw structural_error("header column " + std::to_string(n_resp + a + 1) + " is '" +
                                   header[n_resp + a] + "', expected covariate '" +
                                   spec.covariates[a] + "'");

    Dataset data;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto fields = split_csv_line(line);
        if (static_cast<int>(fields.size()) != n_resp + v)
            throw structural_error("row " + std::to_string(row) + " has " +
                                   std::to_string(fields.size()) + " columns, expected " +
                                   std::to_string(n_resp + v));
        std::vector<int> cats(n_resp);
        for (int t = 0; t < n_resp; ++t) {
            std::size_t used = 0;
            int cat = 0;
            try {
                cat = std::stoi(fields[t], &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != fields[t].size())
                throw structural_error("row " + std::to_string(row) + ": response '" +
                                       spec.responses[t].name + "' value '" + fields[t] +
                                       "' is not an integer");
            if (cat < 0 || cat >= spec.responses[t].categories)
                throw structural_error("row " + std::to_string(row) + ": response '" +
                                       spec.responses[t].name + "' category " +
                                       std::to_string(cat) + " out of range");
            cats[t] = cat;
        }
        Vec covs(v);
        for (int a = 0; a < v; ++a) {
            std::size_t used = 0;
            double val = 0.0;
            try {
                val = std::stod(fields[n_resp + a], &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != fields[n_resp + a].size() || !std::isfinite(val))
                throw structural_error("row " + std::to_string(row) + ": covariate '" +
                                       spec.covariates[a] + "' value '" + fields[n_resp + a] +
                                       "' is not a finite number");
            covs(a) = val;
        }
        data.subjects.push_back({std::move(covs), pattern_index(cats, spec)});
    }
    return group ? group_dataset(data, spec) : data;
}

Dataset parse_dataset_file(const std::string& path, const ModelSpec& spec, bool group) {
    std::ifstream in(path);
    if (!in) throw structural_error("cannot open dataset file: " + path);
    return parse_dataset(in, spec, group);
}

void write_dataset(std::ostream& out, const ModelSpec& spec, const Dataset& data) {
    const Dataset expanded = data.grouped() ? expand_dataset(data) : data;
    for (std::size_t t = 0; t < spec.responses.size(); ++t)
        out << (t == 0 ? "" : ",") << spec.responses[t].name;
    for (const auto& cov : spec.covariates) out << "," << cov;
    out << "\n";
    std::ostringstream number;
    number.precision(17);
    for (const auto& subj : expanded.subjects) {
        const auto cats = pattern_at(subj.pattern, spec);
        for (std::size_t t = 0; t < cats.size(); ++t) out << (t == 0 ? "" : ",") << cats[t];
        for (int a = 0; a < subj.covariates.size(); ++a) {
            number.str("");
            number << subj.covariates(a);
            out << "," << number.str();
        }
        out << "\n";
    }
}

Dataset group_dataset(const Dataset& data, const ModelSpec& spec) {
    if (data.grouped()) return data;
    const int r = spec.num_patterns();

    // Keyed on the exact covariate bytes; first-seen order is preserved.
    std::map<std::vector<double>, std::size_t> seen;
    Dataset out;
    for (const auto& subj : data.subjects) {
        std::vector<double> key(subj.covariates.data(),
                                subj.covariates.data() + subj.covariates.size());
        auto [it, inserted] = seen.try_emplace(key, out.groups.size());
        if (inserted) out.groups.push_back({subj.covariates, Vec::Zero(r)});
        out.groups[it->second].pattern_freq(subj.pattern) += 1.0;
    }
    return out;
}

Dataset expand_dataset(const Dataset& data) {
    if (!data.grouped()) return data;
    Dataset out;
    for (const auto& grp : data.groups)
        for (int u = 0; u < grp.pattern_freq.size(); ++u) {
            const double freq = grp.pattern_freq(u);
            if (freq != std::floor(freq))
                throw structural_error("cannot expand non-integer frequencies");
            for (long rep = 0; rep < static_cast<long>(freq); ++rep)
                out.subjects.push_back({grp.covariates, u});
        }
    return out;
}

Dataset simulate(const ModelSpec& spec, const Params& params, const CovariateSource& covariates,
                 int n, std::uint64_t seed) {
    spec.validate();
    const Mat response_design = build_response_design(spec);
    const Mat mixture = mixture_matrix(response_design, params.theta);
    const int v = spec.num_covariates();

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    auto draw_categorical = [&](const Vec& probs) {
        double cut = uniform(rng);
        for (int a = 0; a < probs.size(); ++a) {
            cut -= probs(a);
            if (cut < 0.0) return a;
        }
        return static_cast<int>(probs.size()) - 1;
    };

    Dataset data;
    for (int i = 0; i < n; ++i) {
        Vec covs(v);
        if (const auto* list = std::get_if<CovariateList>(&covariates)) {
            if (list->rows.empty()) throw structural_error("empty covariate list");
            covs = list->rows[i % list->rows.size()];
            if (covs.size() != v) throw structural_error("covariate list row has wrong length");
        } else {
            for (int a = 0; a < v; ++a) covs(a) = normal(rng);
        }
        const Vec pi = class_weights(build_class_design(covs, spec), params.beta);
        const int cls = draw_categorical(pi);
        const int pattern = draw_categorical(mixture.col(cls));
        data.subjects.push_back({std::move(covs), pattern});
    }
    return data;
}

}  // namespace lcm
