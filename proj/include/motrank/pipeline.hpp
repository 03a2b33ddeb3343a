#pragma once

#include "motrank/dataset.hpp"
#include "motrank/svm.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace motrank {

/// Seeded assignment of players to folds. Fold sizes differ by at most one;
/// the first n % k folds take the extra player.
struct FoldPlan {
    int k = 0;
    std::uint64_t seed = 0;
    std::map<std::string, int> assignments;

    int fold_of(const std::string& player_id) const;
};

FoldPlan kfold_split(const std::vector<std::string>& player_ids, int k, std::uint64_t seed);

/// Per-feature z-normalization parameters fitted on training players only.
/// Constant columns are marked by stddev 0 and map every value to 0.
struct Normalizer {
    std::vector<double> mean;
    std::vector<double> stddev;
};

Normalizer fit_normalizer(const std::vector<std::vector<double>>& rows);
Normalizer fit_normalizer(const std::vector<PlayerRecord>& records);
std::vector<double> apply_normalizer(const Normalizer& norm, std::span<const double> row);
std::vector<std::vector<double>> apply_normalizer(const Normalizer& norm,
                                                  const std::vector<std::vector<double>>& rows);
std::vector<PlayerRecord> apply_normalizer(const Normalizer& norm,
                                           const std::vector<PlayerRecord>& records);

struct GridSpec {
    std::vector<double> c_values{1, 2, 3, 4, 5};
    std::vector<double> gamma_values{0.1, 0.5, 0.75, 1, 2};

    /// Throws UserError on empty or non-positive values (gamma values are
    /// only required for the RBF kernel).
    void validate(Kernel kernel) const;
};

struct CvOptions {
    /// Cap on unordered training pairs per fold; 0 means unlimited. When a
    /// fold exceeds the cap, a subsample is drawn deterministically from
    /// (plan seed, fold index), so every grid cell sees the same pairs.
    std::size_t max_train_pairs = 0;
    /// Keep each fold's trained model on the result (test hook).
    bool capture_models = false;
};

/// Deterministic subsample of unordered pairs (both mirrored rows kept,
/// original order preserved). No-op when max_unordered is 0 or the dataset
/// is already within the cap.
void cap_unordered_pairs(PairwiseDataset& pds, std::size_t max_unordered, std::uint64_t seed);

struct FoldResult {
    int fold = 0;
    std::size_t n_train_players = 0;
    std::size_t n_test_players = 0;
    std::size_t train_samples = 0; ///< mirrored training datapoints, after any cap
    std::size_t test_pairs = 0;    ///< unordered test pairs evaluated
    std::size_t test_samples = 0;  ///< mirrored bookkeeping; 2 * test_pairs
    double train_retention = 0.0;  ///< kept fraction before the cap
    double test_retention = 0.0;
    double correct = 0.0; ///< 1 per agreeing pair, 0.5 per tie prediction
    double accuracy = 0.0;
    bool degenerate = false;
    std::string note; ///< reason, when degenerate
    TrainDiagnostics diagnostics;
    std::optional<RankModel> model; ///< present only under capture_models
};

struct EvalReport {
    std::string factor;
    std::string feature_set; ///< stamped by the caller (suite fills it in)
    Kernel kernel = Kernel::linear;
    TrainConfig config;
    double pt = 0.1;
    int folds = 0;
    std::uint64_t seed = 0;
    std::vector<FoldResult> fold_results;
    double mean_accuracy = 0.0; ///< over non-degenerate folds
    double accuracy_std = 0.0;  ///< sample standard deviation over those folds
    double ci_low = 0.0;        ///< mean - 1.96 * std / sqrt(included folds)
    double ci_high = 0.0;
    double best_fold_accuracy = 0.0;
    int best_fold = -1;
    std::size_t degenerate_folds = 0;
};

std::string report_to_json(const EvalReport& report);

/// Leakage-safe k-fold evaluation of one (factor, kernel, config) cell.
/// Per fold: normalizer fitted on training players only, train and test
/// pairwise-transformed separately, accuracy counted once per unordered test
/// pair with ties worth 0.5. Folds with no usable train or test pairs are
/// marked degenerate and excluded from the mean. Throws UserError if every
/// fold is degenerate or the plan does not cover the dataset.
EvalReport run_cv(const Dataset& ds, const std::string& factor, Kernel kernel,
                  const TrainConfig& cfg, double pt, const FoldPlan& plan,
                  const CvOptions& opts = {});

struct GridSearchResult {
    std::vector<EvalReport> reports; ///< one per cell, C-major then gamma
    std::size_t best_index = 0;      ///< highest mean accuracy; ties to smaller C then gamma

    const EvalReport& best() const { return reports[best_index]; }
};

/// Evaluates every grid cell on identical folds. The per-fold preparation
/// (normalization, pairwise transforms, pair cap) is shared across cells.
GridSearchResult grid_search(const Dataset& ds, const std::string& factor, Kernel kernel,
                             const GridSpec& grid, double pt, const FoldPlan& plan,
                             const CvOptions& opts = {}, const TrainConfig& base = {});

struct SuiteEntry {
    FeatureSet feature_set = FeatureSet::all;
    Kernel kernel = Kernel::linear;
    std::string factor;
    std::size_t grid_cells = 0;
    EvalReport best; ///< best grid cell; its best_fold fields give the best fold within it
};

struct SuiteResult {
    std::vector<SuiteEntry> entries; ///< 3 feature sets x 2 kernels x 4 factors
};

/// Full protocol: {styles, metrics, all} x {linear, rbf} x 4 factors, each a
/// grid search on the shared fold plan. Deterministic given (ds, grid, pt,
/// plan, opts).
SuiteResult run_experiment_suite(const Dataset& ds, const GridSpec& grid, double pt,
                                 const FoldPlan& plan, const CvOptions& opts = {},
                                 const TrainConfig& base = {});

/// One row per suite entry: mean accuracy with 95% confidence interval,
/// chosen hyperparameters, best-fold accuracy.
std::string suite_summary_csv(const SuiteResult& suite);
std::string suite_summary_json(const SuiteResult& suite);

} // namespace motrank
