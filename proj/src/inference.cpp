#include "lcm/inference.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <cmath>
#include <string>

#include "lcm/design.hpp"
#include "lcm/model_core.hpp"

namespace lcm {

namespace {

// Per-call quantities shared across subjects.
struct Context {
    Mat response_design;  // G, r x g
    Mat mixture;          // Q, r x c
    std::vector<Vec> gq;  // G' q_j
    int r, c, k, g, dim;
};

Context make_context(const ModelSpec& spec, const Params& params) {
    Context ctx;
    ctx.response_design = build_response_design(spec);
    ctx.mixture = mixture_matrix(ctx.response_design, params.theta);
    ctx.r = spec.num_patterns();
    ctx.c = spec.classes;
    ctx.k = spec.weight_dim();
    ctx.g = spec.loglinear_dim();
    ctx.dim = spec.param_dim();
    ctx.gq.resize(ctx.c);
    for (int j = 0; j < ctx.c; ++j)
        ctx.gq[j] = ctx.response_design.transpose() * ctx.mixture.col(j);
    return ctx;
}

Mat subject_design_ctx(const Context& ctx, const Params& params, const Mat& class_design) {
    const Vec pi = class_weights(class_design, params.beta);
    Mat design(ctx.r, ctx.dim);
    design.leftCols(ctx.k) = ctx.mixture * omega(pi) * class_design;
    for (int j = 0; j < ctx.c; ++j) {
        const Vec qj = ctx.mixture.col(j);
        // pi_j * Omega_j * G = pi_j (diag(q_j) G - q_j (G' q_j)')
        design.middleCols(ctx.k + j * ctx.g, ctx.g) =
            pi(j) * (qj.asDiagonal() * ctx.response_design - qj * ctx.gq[j].transpose());
    }
    return design;
}

SubjectBasis subject_basis_ctx(const Context& ctx, const Params& params, const Mat& class_design,
                               int pattern) {
    if (pattern < 0 || pattern >= ctx.r) throw structural_error("pattern index out of range");
    const Vec pi = class_weights(class_design, params.beta);
    const Vec q_row = ctx.mixture.row(pattern).transpose();  // q-tilde, length c
    const double p_tilde = pi.dot(q_row);
    SubjectBasis basis;
    basis.p_tilde = p_tilde;
    basis.t.resize(ctx.dim);
    // beta part: X' (pi .* q-tilde - (pi' q-tilde) pi)
    basis.t.head(ctx.k) =
        class_design.transpose() * (pi.cwiseProduct(q_row) - p_tilde * pi);
    // theta part j: pi_j q_j[u] (g_u - G' q_j)
    const Vec g_row = ctx.response_design.row(pattern).transpose();
    for (int j = 0; j < ctx.c; ++j)
        basis.t.segment(ctx.k + j * ctx.g, ctx.g) = pi(j) * q_row(j) * (g_row - ctx.gq[j]);
    return basis;
}

}  // namespace

Mat subject_design(const ModelSpec& spec, const Params& params, const Mat& class_design) {
    return subject_design_ctx(make_context(spec, params), params, class_design);
}

SubjectBasis subject_basis(const ModelSpec& spec, const Params& params, const Mat& class_design,
                           int pattern) {
    return subject_basis_ctx(make_context(spec, params), params, class_design, pattern);
}

Vec score(const ModelSpec& spec, const Params& params, const Dataset& data) {
    const Context ctx = make_context(spec, params);
    Vec total = Vec::Zero(ctx.dim);
    if (!data.grouped()) {
        for (std::size_t i = 0; i < data.subjects.size(); ++i) {
            const auto& subj = data.subjects[i];
            const Mat class_design = build_class_design(subj.covariates, spec);
            const SubjectBasis basis = subject_basis_ctx(ctx, params, class_design, subj.pattern);
            if (!(basis.p_tilde > 0.0))
                throw numeric_error("observed pattern probability underflowed for subject " +
                                    std::to_string(i));
            total += basis.t / basis.p_tilde;
        }
    } else {
        for (std::size_t i = 0; i < data.groups.size(); ++i) {
            const auto& grp = data.groups[i];
            const Mat class_design = build_class_design(grp.covariates, spec);
            const Vec pi = class_weights(class_design, params.beta);
            const Vec p = ctx.mixture * pi;
            Vec weights = Vec::Zero(ctx.r);
            for (int u = 0; u < ctx.r; ++u) {
                if (grp.pattern_freq(u) == 0.0) continue;
                if (!(p(u) > 0.0))
                    throw numeric_error("pattern probability underflowed in group " +
                                        std::to_string(i));
                weights(u) = grp.pattern_freq(u) / p(u);
            }
            total += subject_design_ctx(ctx, params, class_design).transpose() * weights;
        }
    }
    return total;
}

InfoMatrix hybrid_info(const ModelSpec& spec, const Params& params, const Dataset& data) {
    const Context ctx = make_context(spec, params);
    InfoMatrix info;
    info.kind = InfoMatrix::Kind::hybrid;
    info.mat = Mat::Zero(ctx.dim, ctx.dim);
    if (!data.grouped()) {
        for (const auto& subj : data.subjects) {
            const Mat class_design = build_class_design(subj.covariates, spec);
            const SubjectBasis basis = subject_basis_ctx(ctx, params, class_design, subj.pattern);
            info.mat.noalias() += basis.t * basis.t.transpose() / (basis.p_tilde * basis.p_tilde);
        }
    } else {
        for (const auto& grp : data.groups) {
            const Mat class_design = build_class_design(grp.covariates, spec);
            const Vec pi = class_weights(class_design, params.beta);
            const Vec p = ctx.mixture * pi;
            Vec d = Vec::Zero(ctx.r);
            for (int u = 0; u < ctx.r; ++u)
                if (grp.pattern_freq(u) != 0.0) d(u) = grp.pattern_freq(u) / (p(u) * p(u));
            const Mat design = subject_design_ctx(ctx, params, class_design);
            info.mat.noalias() += design.transpose() * d.asDiagonal() * design;
        }
    }
    info.mat = ((info.mat + info.mat.transpose()) / 2).eval();
    return info;
}

RankDiagnosis rank_check(const ModelSpec& spec, const Params& params, const Dataset& data) {
    if (data.grouped()) throw structural_error("rank_check requires individual (one-hot) data");
    const Context ctx = make_context(spec, params);
    Mat basis_rows(static_cast<Eigen::Index>(data.subjects.size()), ctx.dim);
    for (std::size_t i = 0; i < data.subjects.size(); ++i) {
        const Mat class_design = build_class_design(data.subjects[i].covariates, spec);
        basis_rows.row(static_cast<Eigen::Index>(i)) =
            subject_basis_ctx(ctx, params, class_design, data.subjects[i].pattern).t.transpose();
    }
    Eigen::JacobiSVD<Mat> svd(basis_rows);
    const double tol = 1e-10 * svd.singularValues()(0);
    RankDiagnosis diag;
    diag.dim = ctx.dim;
    diag.rank = static_cast<int>((svd.singularValues().array() > tol).count());
    diag.positive_definite = diag.rank == ctx.dim;
    return diag;
}

InfoMatrix observed_info(const ModelSpec& spec, const Params& params, const Dataset& data) {
    const Context ctx = make_context(spec, params);
    Mat accum = hybrid_info(spec, params, data).mat;

    // Subtract the zero-expectation correction blocks; the observation
    // enters only through w = y / p.
    auto add_unit = [&](const Mat& class_design, const Vec& y) {
        const Vec pi = class_weights(class_design, params.beta);
        const Vec p = ctx.mixture * pi;
        Vec w = Vec::Zero(ctx.r);
        for (int u = 0; u < ctx.r; ++u)
            if (y(u) != 0.0) w(u) = y(u) / p(u);
        const Vec v = ctx.mixture.transpose() * w;  // length c
        const Mat omega_pi = omega(pi);

        // beta block: X' [diag(v) - (pi'v) I - pi v'] Omega_pi X
        const double piv = pi.dot(v);
        Mat middle = Mat(v.asDiagonal());
        middle.diagonal().array() -= piv;
        middle.noalias() -= pi * v.transpose();
        accum.topLeftCorner(ctx.k, ctx.k).noalias() -=
            class_design.transpose() * middle * omega_pi * class_design;

        for (int j = 0; j < ctx.c; ++j) {
            const Vec qj = ctx.mixture.col(j);
            const Mat omega_g = qj.asDiagonal() * ctx.response_design - qj * ctx.gq[j].transpose();
            // theta_j diagonal block: pi_j G'(diag(w) - (q_j'w) I - q_j w') Omega_j G
            const double qw = qj.dot(w);
            Mat block = ctx.response_design.transpose() * (w.asDiagonal() * omega_g);
            block.noalias() -= qw * ctx.response_design.transpose() * omega_g;
            block.noalias() -= ctx.gq[j] * (w.transpose() * omega_g);
            accum.block(ctx.k + j * ctx.g, ctx.k + j * ctx.g, ctx.g, ctx.g) -= pi(j) * block;

            // mixed block: s_j (x_j' - pi' X)
            const Vec score_j = pi(j) * (omega_g.transpose() * w);
            const Eigen::RowVectorXd contrast =
                class_design.row(j) - pi.transpose() * class_design;
            accum.block(ctx.k + j * ctx.g, 0, ctx.g, ctx.k).noalias() -= score_j * contrast;
            accum.block(0, ctx.k + j * ctx.g, ctx.k, ctx.g).noalias() -=
                contrast.transpose() * score_j.transpose();
        }
    };

    if (!data.grouped()) {
        for (const auto& subj : data.subjects) {
            Vec y = Vec::Zero(ctx.r);
            y(subj.pattern) = 1.0;
            add_unit(build_class_design(subj.covariates, spec), y);
        }
    } else {
        for (const auto& grp : data.groups)
            add_unit(build_class_design(grp.covariates, spec), grp.pattern_freq);
    }

    InfoMatrix info;
    info.kind = InfoMatrix::Kind::observed;
    info.mat = (accum + accum.transpose()) / 2;
    return info;
}

InfoMatrix expected_info(const ModelSpec& spec, const Params& params,
                         const std::vector<WeightedConfig>& configs, long enumeration_cap) {
    const Context ctx = make_context(spec, params);
    if (ctx.r > enumeration_cap)
        throw structural_error("pattern space too large to enumerate (r = " +
                               std::to_string(ctx.r) + ")");
    InfoMatrix info;
    info.kind = InfoMatrix::Kind::expected;
    info.mat = Mat::Zero(ctx.dim, ctx.dim);
    for (const auto& cfg : configs) {
        const Mat class_design = build_class_design(cfg.covariates, spec);
        const Vec pi = class_weights(class_design, params.beta);
        const Vec p = ctx.mixture * pi;
        const Mat design = subject_design_ctx(ctx, params, class_design);
        // sum_u t_u t_u' / p_u = A' diag(p)^-1 A
        info.mat.noalias() +=
            cfg.weight * (design.transpose() * p.cwiseInverse().asDiagonal() * design);
    }
    info.mat = ((info.mat + info.mat.transpose()) / 2).eval();
    return info;
}

std::pair<Vec, Vec> standard_errors(const InfoMatrix& info, const Params& params) {
    const Eigen::Index dim = info.mat.rows();
    Eigen::LLT<Mat> chol(info.mat);
    bool ok = chol.info() == Eigen::Success;
    Vec se;
    if (ok) {
        const Mat inverse = chol.solve(Mat::Identity(dim, dim));
        se = inverse.diagonal();
        ok = (se.array() > 0.0).all();
    }
    if (!ok) {
        Eigen::JacobiSVD<Mat> svd(info.mat);
        const double tol = 1e-10 * svd.singularValues()(0);
        const int rank = static_cast<int>((svd.singularValues().array() > tol).count());
        throw structural_error("information matrix is not positive definite (numerical rank " +
                               std::to_string(rank) + " of " + std::to_string(dim) + ")");
    }
    se = se.cwiseSqrt();
    const Vec psi = params.stacked();
    if (psi.size() != dim) throw structural_error("parameter/information dimension mismatch");
    return {se, psi.cwiseQuotient(se)};
}

}  // namespace lcm
