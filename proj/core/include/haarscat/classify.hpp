#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "haarscat/common.hpp"

namespace haar {

/// exp(-||u - v||^2 / (2 sigma^2)).
double gaussian_kernel(std::span<const double> u, std::span<const double> v, double sigma);

/// One-versus-all Gaussian-kernel regularized least squares:
/// (G + lambda I) W = Y with Y the one-hot label matrix.
struct KernelModel {
    Eigen::MatrixXd support;  // training rows
    Eigen::MatrixXd weights;  // rows x classes
    std::vector<int> classes;  // ascending
    double sigma = 1.0;
    double lambda = 1e-3;
    double lambda_used = 1e-3;  // after jitter escalation
};

struct TrainOptions {
    double sigma = 0.0;  // <= 0 selects median_sigma
    double lambda = 1e-3;
    std::uint64_t seed = 0;  // subsample for the sigma heuristic
    std::size_t threads = 1;
};

/// Median pairwise distance over at most `max_rows` rows drawn with `seed`.
double median_sigma(const Eigen::MatrixXd& rows, std::size_t max_rows = 1000, std::uint64_t seed = 0);

KernelModel train(const Eigen::MatrixXd& rows, std::span<const int> labels, const TrainOptions& options = {});

/// Per-class scores of one row.
Eigen::VectorXd class_scores(const KernelModel& model, std::span<const double> row);

/// Highest-scoring class; ties (within 1e-12 relative) go to the lowest class id.
int predict(const KernelModel& model, std::span<const double> row);

std::vector<int> predict_rows(const KernelModel& model, const Eigen::MatrixXd& rows, std::size_t threads = 1);

double error_rate(const KernelModel& model, const Eigen::MatrixXd& rows, std::span<const int> labels,
                  std::size_t threads = 1);

/// Little-endian binary: 8-byte header length, JSON header, then the support
/// rows and weights as float64.
void save_model(const std::filesystem::path& path, const KernelModel& model);
KernelModel load_model(const std::filesystem::path& path);

}  // namespace haar
