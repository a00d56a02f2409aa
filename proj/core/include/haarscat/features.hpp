#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "haarscat/common.hpp"
#include "haarscat/multires.hpp"

namespace haar {

/// Origin of a raw feature column: coefficient S_J x(n, q) under ensemble member `member`.
struct ColumnMeta {
    std::uint32_t member = 0;
    std::uint32_t n = 0;
    std::uint32_t q = 0;
    bool operator==(const ColumnMeta&) const = default;
};

struct FeatureMatrix {
    Eigen::MatrixXd values;  // rows = signals, columns = raw features
    std::vector<ColumnMeta> columns;
};

/// Column metadata of compute_features for the given ensemble shape.
std::vector<ColumnMeta> feature_columns(std::size_t members, std::size_t d, int J, int m_max);

/// Order-truncated S_J coefficients of every signal under every member,
/// concatenated in member order.
FeatureMatrix compute_features(std::span<const Signal> signals, std::span<const MultiresApprox> ensemble, int J,
                               int m_max, std::size_t threads = 1);

struct PlsOptions {
    /// Center and scale columns to unit variance before selection; constant
    /// columns are then never selected.
    bool standardize = true;
    /// Candidates whose residual norm falls below this fraction of their
    /// original norm are treated as exhausted.
    double residual_tol = 1e-6;
};

/// Greedy orthogonalized selection for one class indicator.
/// Selected feature k is sum_r coefficients(k, r) * z_{columns[r]}, where z
/// is the raw column after the stored centering and scaling.
struct ClassSelection {
    int label = 0;
    std::vector<std::uint32_t> columns;
    Eigen::MatrixXd coefficients;     // lower triangular, K x K
    std::vector<double> correlations;  // |sum_i f_c(x_i) phi_k(x_i)| at each step
    std::vector<double> mse;           // training MSE of f_c after k features
};

/// Column transform shared by all classes.
struct Standardization {
    std::vector<double> mean;
    std::vector<double> scale;  // 0 marks an excluded column
};

/// Prepared selection problem: the transformed matrix is built once and
/// reused for every class.
class PlsProblem {
public:
    PlsProblem(const FeatureMatrix& features, std::span<const int> labels, PlsOptions options = {});

    /// Selects up to K features for the indicator of `label`; stops early if
    /// every remaining candidate is exhausted.
    ClassSelection select(int label, std::size_t K) const;

    const Standardization& standardization() const { return standardization_; }
    const Eigen::MatrixXd& transformed() const { return z_; }
    std::span<const int> labels() const { return labels_; }

private:
    Eigen::MatrixXd z_;
    Eigen::VectorXd column_norm2_;
    std::vector<int> labels_;
    Standardization standardization_;
    PlsOptions options_;
};

ClassSelection pls_select(const FeatureMatrix& features, std::span<const int> labels, int label, std::size_t K,
                          PlsOptions options = {});

struct FeatureDictionary {
    std::vector<ColumnMeta> raw_columns;
    Standardization standardization;
    std::vector<ClassSelection> classes;

    std::size_t size() const;  // M = sum over classes of K_c
};

FeatureDictionary build_dictionary(const FeatureMatrix& features, const Standardization& standardization,
                                   std::vector<ClassSelection> selections);

/// Runs the per-class selections (in parallel over classes) and assembles
/// the dictionary.
FeatureDictionary select_dictionary(const FeatureMatrix& features, std::span<const int> labels, std::size_t K,
                                    PlsOptions options = {}, std::size_t threads = 1);

/// Maps one raw feature vector to the M dictionary features.
Eigen::VectorXd project(const FeatureDictionary& dict, std::span<const double> raw);
/// Row-wise projection of a raw feature matrix.
Eigen::MatrixXd project_rows(const FeatureDictionary& dict, const Eigen::MatrixXd& raw);

nlohmann::json dictionary_to_json(const FeatureDictionary& dict);
FeatureDictionary dictionary_from_json(const nlohmann::json& doc);

}  // namespace haar
