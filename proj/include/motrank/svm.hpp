#pragma once

#include "motrank/pairwise.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace motrank {

enum class Kernel { linear, rbf };

std::string to_string(Kernel k);
Kernel kernel_from_string(const std::string& s);

struct TrainConfig {
    double c = 1.0;       ///< margin/error trade-off, > 0
    double gamma = 0.5;   ///< RBF width, > 0 (ignored by the linear model)
    double tol = 1e-4;    ///< stop when the largest KKT violation falls below this
    int max_iter = 1000;  ///< coordinate-descent sweeps over the dual
};

struct TrainDiagnostics {
    int sweeps = 0;
    double max_kkt_violation = 0.0;
    double dual_objective = 0.0;
    bool converged = false;
    std::size_t support_count = 0;
    std::size_t train_pairs = 0;
};

/// Primal weight vector of the linear ranking model; no bias term (the
/// mirrored training set makes the optimal bias exactly zero).
struct LinearModel {
    std::vector<double> w;
    TrainConfig config;
    TrainDiagnostics diagnostics;
    std::string schema_fingerprint;
};

/// RBF dual model: signed coefficients alpha_k * z_k and their stored
/// difference vectors. Only nonzero coefficients are kept.
struct KernelModel {
    std::vector<double> alpha_z;
    std::vector<std::vector<double>> support_diffs;
    double gamma = 0.5;
    TrainConfig config;
    TrainDiagnostics diagnostics;
    std::string schema_fingerprint;
};

using RankModel = std::variant<LinearModel, KernelModel>;

/// Minimizes 1/2 ||w||^2 + C * sum_k hinge(z_k * w.d_k) via coordinate
/// descent on the box-constrained dual. Deterministic traversal order;
/// identical inputs give bit-identical models. Non-convergence within
/// max_iter is reported through diagnostics, not thrown.
LinearModel train_linear(const PairwiseDataset& pds, const TrainConfig& cfg);

/// Soft-margin dual with K(u,v) = exp(-gamma ||u-v||^2) over the difference
/// vectors, solved to KKT violation <= tol. Same determinism contract.
KernelModel train_rbf(const PairwiseDataset& pds, const TrainConfig& cfg);

RankModel train(const PairwiseDataset& pds, Kernel kernel, const TrainConfig& cfg);

/// Decision value: w.d for the linear model, the kernel expansion otherwise.
double score(const LinearModel& m, std::span<const double> d);
double score(const KernelModel& m, std::span<const double> d);
double score(const RankModel& m, std::span<const double> d);

enum class Winner { a_preferred, b_preferred, tie };

struct Preference {
    Winner winner = Winner::tie;
    double margin = 0.0; ///< antisymmetrized decision g; positive favours a
};

/// Antisymmetrized preference g(d) = (score(d) - score(-d)) / 2 with
/// d = x_a - x_b, so predict(a, b) and predict(b, a) always agree. Exact for
/// the linear model; exact up to IEEE negation symmetry for the kernel one.
Preference predict_preference(const RankModel& m, std::span<const double> x_a,
                              std::span<const double> x_b);

std::string model_to_json(const RankModel& m);
RankModel model_from_json(const std::string& text);

} // namespace motrank
