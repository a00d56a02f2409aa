#include "haarscat/classify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <nlohmann/json.hpp>

#include "haarscat/io.hpp"
#include "haarscat/parallel.hpp"
#include "haarscat/rng.hpp"

namespace haar {

double gaussian_kernel(std::span<const double> u, std::span<const double> v, double sigma) {
    if (u.size() != v.size()) throw Error("gaussian_kernel: length mismatch");
    if (!(sigma > 0)) throw Error("gaussian_kernel: sigma must be positive");
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += (u[i] - v[i]) * (u[i] - v[i]);
    return std::exp(-s / (2 * sigma * sigma));
}

double median_sigma(const Eigen::MatrixXd& rows, std::size_t max_rows, std::uint64_t seed) {
    const auto n = static_cast<std::size_t>(rows.rows());
    if (n < 2) return 1.0;
    std::vector<std::uint32_t> pick(n);
    std::iota(pick.begin(), pick.end(), 0u);
    if (n > max_rows) {
        Rng rng(seed);
        rng.shuffle(std::span<std::uint32_t>(pick));
        pick.resize(max_rows);
        std::sort(pick.begin(), pick.end());
    }
    std::vector<double> dist;
    dist.reserve(pick.size() * (pick.size() - 1) / 2);
    for (std::size_t a = 0; a < pick.size(); ++a)
        for (std::size_t b = a + 1; b < pick.size(); ++b) dist.push_back((rows.row(pick[a]) - rows.row(pick[b])).norm());
    auto mid = dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2);
    std::nth_element(dist.begin(), mid, dist.end());
    return *mid > 0 ? *mid : 1.0;
}

namespace {

Eigen::MatrixXd gram(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double sigma, std::size_t threads) {
    Eigen::MatrixXd g(a.rows(), b.rows());
    const Eigen::VectorXd na = a.rowwise().squaredNorm();
    const Eigen::VectorXd nb = b.rowwise().squaredNorm();
    const double scale = -1.0 / (2 * sigma * sigma);
    parallel_for(static_cast<std::size_t>(a.rows()), threads, [&](std::size_t i) {
        const auto r = static_cast<Eigen::Index>(i);
        for (Eigen::Index c = 0; c < b.rows(); ++c) {
            const double d2 = std::max(0.0, na(r) + nb(c) - 2 * a.row(r).dot(b.row(c)));
            g(r, c) = std::exp(d2 * scale);
        }
    });
    return g;
}

}  // namespace

KernelModel train(const Eigen::MatrixXd& rows, std::span<const int> labels, const TrainOptions& options) {
    if (static_cast<std::size_t>(rows.rows()) != labels.size()) throw Error("train: label count does not match rows");
    if (rows.rows() == 0) throw Error("train: no training rows");
    if (!(options.lambda > 0)) throw Error("train: lambda must be positive");
    KernelModel model;
    model.classes.assign(labels.begin(), labels.end());
    std::sort(model.classes.begin(), model.classes.end());
    model.classes.erase(std::unique(model.classes.begin(), model.classes.end()), model.classes.end());
    model.support = rows;
    model.sigma = options.sigma > 0 ? options.sigma : median_sigma(rows, 1000, options.seed);
    model.lambda = options.lambda;
    const std::size_t threads = resolve_threads(options.threads);

    const auto n = rows.rows();
    const auto C = static_cast<Eigen::Index>(model.classes.size());
    Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(n, C);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto it = std::lower_bound(model.classes.begin(), model.classes.end(), labels[i]);
        Y(i, it - model.classes.begin()) = 1.0;
    }
    const Eigen::MatrixXd G = gram(rows, rows, model.sigma, threads);
    for (const double factor : {1.0, 10.0, 100.0}) {
        const double lam = options.lambda * factor;
        Eigen::MatrixXd A = G;
        A.diagonal().array() += lam;
        Eigen::LLT<Eigen::MatrixXd> llt(A);
        if (llt.info() != Eigen::Success) continue;
        model.weights = llt.solve(Y);
        if (!model.weights.allFinite()) continue;
        model.lambda_used = lam;
        return model;
    }
    throw Error("train: kernel system is not positive definite even with jitter");
}

Eigen::VectorXd class_scores(const KernelModel& model, std::span<const double> row) {
    if (static_cast<Eigen::Index>(row.size()) != model.support.cols())
        throw Error("predict: row has " + std::to_string(row.size()) + " entries, model expects " +
                    std::to_string(model.support.cols()));
    const Eigen::Map<const Eigen::RowVectorXd> r(row.data(), static_cast<Eigen::Index>(row.size()));
    Eigen::VectorXd k(model.support.rows());
    const double scale = -1.0 / (2 * model.sigma * model.sigma);
    for (Eigen::Index i = 0; i < model.support.rows(); ++i) k(i) = std::exp((model.support.row(i) - r).squaredNorm() * scale);
    return model.weights.transpose() * k;
}

int predict(const KernelModel& model, std::span<const double> row) {
    if (model.classes.size() == 1) return model.classes.front();
    const Eigen::VectorXd s = class_scores(model, row);
    Eigen::Index best = 0;
    // Scores equal up to rounding count as ties and keep the lower class.
    for (Eigen::Index c = 1; c < s.size(); ++c)
        if (s(c) > s(best) + 1e-12 * std::max(1.0, std::abs(s(best)))) best = c;
    return model.classes[best];
}

std::vector<int> predict_rows(const KernelModel& model, const Eigen::MatrixXd& rows, std::size_t threads) {
    std::vector<int> out(static_cast<std::size_t>(rows.rows()));
    parallel_for(out.size(), resolve_threads(threads), [&](std::size_t i) {
        std::vector<double> row(static_cast<std::size_t>(rows.cols()));
        for (Eigen::Index c = 0; c < rows.cols(); ++c) row[c] = rows(static_cast<Eigen::Index>(i), c);
        out[i] = predict(model, row);
    });
    return out;
}

double error_rate(const KernelModel& model, const Eigen::MatrixXd& rows, std::span<const int> labels,
                  std::size_t threads) {
    if (rows.rows() == 0) throw Error("error_rate: empty test set");
    if (static_cast<std::size_t>(rows.rows()) != labels.size()) throw Error("error_rate: label count does not match rows");
    const auto pred = predict_rows(model, rows, threads);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) wrong += pred[i] != labels[i];
    return static_cast<double>(wrong) / static_cast<double>(pred.size());
}

void save_model(const std::filesystem::path& path, const KernelModel& model) {
    const nlohmann::json header = {{"format", "kernel-ridge-ova"},
                                   {"M", model.support.cols()},
                                   {"C", model.classes.size()},
                                   {"rows", model.support.rows()},
                                   {"sigma", model.sigma},
                                   {"lambda", model.lambda},
                                   {"lambda_used", model.lambda_used},
                                   {"classes", model.classes}};
    const std::string text = header.dump();
    std::vector<std::uint8_t> bytes;
    std::uint64_t len = text.size();
    for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>((len >> (8 * i)) & 0xff));
    bytes.insert(bytes.end(), text.begin(), text.end());
    std::vector<double> payload;
    payload.reserve(static_cast<std::size_t>(model.support.size() + model.weights.size()));
    for (Eigen::Index i = 0; i < model.support.rows(); ++i)
        for (Eigen::Index c = 0; c < model.support.cols(); ++c) payload.push_back(model.support(i, c));
    for (Eigen::Index i = 0; i < model.weights.rows(); ++i)
        for (Eigen::Index c = 0; c < model.weights.cols(); ++c) payload.push_back(model.weights(i, c));
    append_f64_le(bytes, payload);
    write_bytes(path, bytes);
}

KernelModel load_model(const std::filesystem::path& path) {
    const auto bytes = read_bytes(path);
    if (bytes.size() < 8) throw Error("load_model: truncated file " + path.string());
    std::uint64_t len = 0;
    for (int i = 7; i >= 0; --i) len = (len << 8) | bytes[i];
    if (bytes.size() < 8 + len) throw Error("load_model: truncated header in " + path.string());
    KernelModel model;
    std::size_t rows = 0, M = 0;
    try {
        const auto header = nlohmann::json::parse(bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(len));
        M = header.at("M").get<std::size_t>();
        rows = header.at("rows").get<std::size_t>();
        model.sigma = header.at("sigma").get<double>();
        model.lambda = header.at("lambda").get<double>();
        model.lambda_used = header.value("lambda_used", model.lambda);
        model.classes = header.at("classes").get<std::vector<int>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error("load_model: bad header: " + std::string(e.what()));
    }
    const std::size_t C = model.classes.size();
    const auto payload = decode_f64_le(std::span<const std::uint8_t>(bytes).subspan(8 + len));
    if (payload.size() != rows * M + rows * C) throw Error("load_model: payload size does not match header");
    model.support.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(M));
    model.weights.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(C));
    std::size_t k = 0;
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t c = 0; c < M; ++c) model.support(i, c) = payload[k++];
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t c = 0; c < C; ++c) model.weights(i, c) = payload[k++];
    return model;
}

}  // namespace haar
