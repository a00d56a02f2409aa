#include "haarscat/features.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "haarscat/parallel.hpp"
#include "haarscat/scattering.hpp"

namespace haar {

std::vector<ColumnMeta> feature_columns(std::size_t members, std::size_t d, int J, int m_max) {
    const auto cols = kept_columns(J, m_max);
    const std::size_t rows = d >> J;
    std::vector<ColumnMeta> out;
    out.reserve(members * rows * cols.size());
    for (std::size_t k = 0; k < members; ++k)
        for (std::size_t n = 0; n < rows; ++n)
            for (const auto q : cols)
                out.push_back({static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(n), q});
    return out;
}

FeatureMatrix compute_features(std::span<const Signal> signals, std::span<const MultiresApprox> ensemble, int J,
                               int m_max, std::size_t threads) {
    if (ensemble.empty()) throw Error("compute_features: empty ensemble");
    const std::size_t d = ensemble.front().dimension();
    for (const auto& m : ensemble)
        if (m.dimension() != d || m.depth() < J) throw Error("compute_features: ensemble members differ or are too shallow");
    if (m_max < 0 || m_max > J) throw Error("compute_features: m_max must lie in 0..J");
    FeatureMatrix f;
    f.columns = feature_columns(ensemble.size(), d, J, m_max);
    const std::size_t per_member = f.columns.size() / ensemble.size();
    f.values.resize(static_cast<Eigen::Index>(signals.size()), static_cast<Eigen::Index>(f.columns.size()));
    parallel_for(signals.size(), resolve_threads(threads), [&](std::size_t i) {
        for (std::size_t k = 0; k < ensemble.size(); ++k) {
            const auto v = truncate_by_order(transform_top(signals[i], ensemble[k], J), m_max);
            for (std::size_t c = 0; c < per_member; ++c)
                f.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k * per_member + c)) = v[c];
        }
    });
    return f;
}

PlsProblem::PlsProblem(const FeatureMatrix& features, std::span<const int> labels, PlsOptions options)
    : labels_(labels.begin(), labels.end()), options_(options) {
    const auto rows = features.values.rows();
    const auto cols = features.values.cols();
    if (static_cast<std::size_t>(rows) != labels.size()) throw Error("PlsProblem: label count does not match rows");
    if (rows == 0) throw Error("PlsProblem: no training rows");
    z_ = features.values;
    standardization_.mean.assign(cols, 0.0);
    standardization_.scale.assign(cols, 1.0);
    for (Eigen::Index c = 0; c < cols; ++c) {
        auto col = z_.col(c);
        if (options_.standardize) {
            const double mean = col.mean();
            const double var = (col.array() - mean).square().sum() / static_cast<double>(rows);
            const double sd = std::sqrt(var);
            if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
                standardization_.mean[c] = 0.0;
                standardization_.scale[c] = 0.0;
                col.setZero();
                continue;
            }
            standardization_.mean[c] = mean;
            standardization_.scale[c] = sd;
            col = (col.array() - mean) / sd;
        } else if (col.squaredNorm() == 0.0) {
            standardization_.scale[c] = 0.0;
        }
    }
    column_norm2_ = z_.colwise().squaredNorm().transpose();
}

ClassSelection PlsProblem::select(int label, std::size_t K) const {
    const auto rows = z_.rows();
    const auto cols = z_.cols();
    Eigen::VectorXd y(rows);
    bool present = false;
    for (Eigen::Index i = 0; i < rows; ++i) {
        y(i) = labels_[i] == label ? 1.0 : 0.0;
        present = present || labels_[i] == label;
    }
    if (!present) throw Error("pls_select: no training row has class " + std::to_string(label));

    ClassSelection sel;
    sel.label = label;
    K = std::min<std::size_t>(K, static_cast<std::size_t>(cols));

    // Residual statistics of every candidate column against the span of the
    // features selected so far, updated incrementally.
    Eigen::VectorXd yz = z_.transpose() * y;
    Eigen::VectorXd norm2 = column_norm2_;
    std::vector<char> eligible(cols);
    for (Eigen::Index c = 0; c < cols; ++c) eligible[c] = standardization_.scale[c] != 0.0 && column_norm2_(c) > 0.0;

    Eigen::MatrixXd basis(rows, 0);
    Eigen::MatrixXd coeff = Eigen::MatrixXd::Zero(K, K);
    double residual2 = y.squaredNorm();
    const double tol2 = options_.residual_tol * options_.residual_tol;

    while (sel.columns.size() < K) {
        Eigen::Index best = -1;
        double best_score = -1.0;
        for (Eigen::Index c = 0; c < cols; ++c) {
            if (!eligible[c]) continue;
            if (norm2(c) <= tol2 * column_norm2_(c)) {
                eligible[c] = 0;
                continue;
            }
            const double score = std::abs(yz(c)) / std::sqrt(norm2(c));
            if (score > best_score) {
                best_score = score;
                best = c;
            }
        }
        if (best < 0) break;

        // Modified Gram-Schmidt, applied twice.
        const std::size_t k = sel.columns.size();
        Eigen::VectorXd r = z_.col(best);
        Eigen::VectorXd h = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t t = 0; t < k; ++t) {
                const double a = basis.col(t).dot(r);
                r -= a * basis.col(t);
                h(t) += a;
            }
        const double rn = r.norm();
        if (!(rn > options_.residual_tol * std::sqrt(column_norm2_(best)))) {
            eligible[best] = 0;
            continue;
        }
        r /= rn;
        coeff(k, k) = 1.0 / rn;
        for (std::size_t t = 0; t < k; ++t) coeff.row(k).head(k) -= (h(t) / rn) * coeff.row(t).head(k);

        basis.conservativeResize(Eigen::NoChange, static_cast<Eigen::Index>(k + 1));
        basis.col(k) = r;
        sel.columns.push_back(static_cast<std::uint32_t>(best));
        const double corr = y.dot(r);
        sel.correlations.push_back(std::abs(corr));
        residual2 -= corr * corr;
        sel.mse.push_back(std::max(0.0, residual2) / static_cast<double>(rows));

        const Eigen::VectorXd proj = z_.transpose() * r;
        yz -= corr * proj;
        norm2 -= proj.cwiseAbs2();
        eligible[best] = 0;
    }
    const auto K_used = static_cast<Eigen::Index>(sel.columns.size());
    sel.coefficients = coeff.topLeftCorner(K_used, K_used);
    return sel;
}

ClassSelection pls_select(const FeatureMatrix& features, std::span<const int> labels, int label, std::size_t K,
                          PlsOptions options) {
    return PlsProblem(features, labels, options).select(label, K);
}

std::size_t FeatureDictionary::size() const {
    std::size_t m = 0;
    for (const auto& c : classes) m += c.columns.size();
    return m;
}

FeatureDictionary build_dictionary(const FeatureMatrix& features, const Standardization& standardization,
                                   std::vector<ClassSelection> selections) {
    if (selections.empty()) throw Error("build_dictionary: no selections");
    FeatureDictionary dict;
    dict.raw_columns = features.columns;
    dict.standardization = standardization;
    dict.classes = std::move(selections);
    for (const auto& c : dict.classes)
        for (const auto p : c.columns)
            if (p >= dict.raw_columns.size()) throw Error("build_dictionary: selected column out of range");
    return dict;
}

FeatureDictionary select_dictionary(const FeatureMatrix& features, std::span<const int> labels, std::size_t K,
                                    PlsOptions options, std::size_t threads) {
    PlsProblem problem(features, labels, options);
    std::vector<int> classes(labels.begin(), labels.end());
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    std::vector<ClassSelection> sels(classes.size());
    parallel_for(classes.size(), resolve_threads(threads),
                 [&](std::size_t c) { sels[c] = problem.select(classes[c], K); });
    return build_dictionary(features, problem.standardization(), std::move(sels));
}

Eigen::VectorXd project(const FeatureDictionary& dict, std::span<const double> raw) {
    if (raw.size() != dict.raw_columns.size())
        throw Error("project: raw vector has " + std::to_string(raw.size()) + " entries, expected " +
                    std::to_string(dict.raw_columns.size()));
    Eigen::VectorXd out(static_cast<Eigen::Index>(dict.size()));
    Eigen::Index at = 0;
    const auto& st = dict.standardization;
    for (const auto& c : dict.classes) {
        const auto K = static_cast<Eigen::Index>(c.columns.size());
        Eigen::VectorXd z(K);
        for (Eigen::Index r = 0; r < K; ++r) {
            const auto p = c.columns[r];
            z(r) = (raw[p] - st.mean[p]) / st.scale[p];
        }
        out.segment(at, K) = c.coefficients.triangularView<Eigen::Lower>() * z;
        at += K;
    }
    return out;
}

Eigen::MatrixXd project_rows(const FeatureDictionary& dict, const Eigen::MatrixXd& raw) {
    Eigen::MatrixXd out(raw.rows(), static_cast<Eigen::Index>(dict.size()));
    std::vector<double> row(static_cast<std::size_t>(raw.cols()));
    for (Eigen::Index i = 0; i < raw.rows(); ++i) {
        for (Eigen::Index c = 0; c < raw.cols(); ++c) row[c] = raw(i, c);
        out.row(i) = project(dict, row).transpose();
    }
    return out;
}

nlohmann::json dictionary_to_json(const FeatureDictionary& dict) {
    nlohmann::json cols = nlohmann::json::array();
    for (const auto& c : dict.raw_columns) cols.push_back({c.member, c.n, c.q});
    nlohmann::json classes = nlohmann::json::array();
    for (const auto& c : dict.classes) {
        nlohmann::json coeff = nlohmann::json::array();
        for (Eigen::Index k = 0; k < c.coefficients.rows(); ++k) {
            nlohmann::json row = nlohmann::json::array();
            for (Eigen::Index r = 0; r <= k; ++r) row.push_back(c.coefficients(k, r));
            coeff.push_back(row);
        }
        classes.push_back({{"label", c.label},
                           {"columns", c.columns},
                           {"coefficients", coeff},
                           {"correlations", c.correlations},
                           {"mse", c.mse}});
    }
    return {{"M", dict.size()},
            {"raw_columns", cols},
            {"mean", dict.standardization.mean},
            {"scale", dict.standardization.scale},
            {"classes", classes}};
}

FeatureDictionary dictionary_from_json(const nlohmann::json& doc) {
    FeatureDictionary dict;
    try {
        for (const auto& c : doc.at("raw_columns"))
            dict.raw_columns.push_back({c.at(0).get<std::uint32_t>(), c.at(1).get<std::uint32_t>(),
                                        c.at(2).get<std::uint32_t>()});
        dict.standardization.mean = doc.at("mean").get<std::vector<double>>();
        dict.standardization.scale = doc.at("scale").get<std::vector<double>>();
        for (const auto& c : doc.at("classes")) {
            ClassSelection sel;
            sel.label = c.at("label").get<int>();
            sel.columns = c.at("columns").get<std::vector<std::uint32_t>>();
            sel.correlations = c.value("correlations", std::vector<double>{});
            sel.mse = c.value("mse", std::vector<double>{});
            const auto K = static_cast<Eigen::Index>(sel.columns.size());
            sel.coefficients = Eigen::MatrixXd::Zero(K, K);
            const auto& coeff = c.at("coefficients");
            if (static_cast<Eigen::Index>(coeff.size()) != K) throw Error("dictionary: coefficient rows do not match columns");
            for (Eigen::Index k = 0; k < K; ++k)
                for (Eigen::Index r = 0; r <= k; ++r) sel.coefficients(k, r) = coeff.at(k).at(r).get<double>();
            dict.classes.push_back(std::move(sel));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("dictionary: ") + e.what());
    }
    if (dict.standardization.mean.size() != dict.raw_columns.size() ||
        dict.standardization.scale.size() != dict.raw_columns.size())
        throw Error("dictionary: standardization length does not match the raw columns");
    for (const auto& c : dict.classes)
        for (const auto p : c.columns)
            if (p >= dict.raw_columns.size() || dict.standardization.scale[p] == 0.0)
                throw Error("dictionary: invalid selected column");
    return dict;
}

}  // namespace haar
