#include "motrank/pipeline.hpp"

#include "motrank/error.hpp"
#include "motrank/format.hpp"
#include "motrank/pairwise.hpp"
#include "motrank/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace motrank {

using nlohmann::json;

int FoldPlan::fold_of(const std::string& player_id) const {
    auto it = assignments.find(player_id);
    if (it == assignments.end()) throw UserError("player not covered by fold plan: " + player_id);
    return it->second;
}

FoldPlan kfold_split(const std::vector<std::string>& player_ids, int k, std::uint64_t seed) {
    const std::size_t n = player_ids.size();
    if (k < 2) throw UserError("k must be >= 2");
    if (static_cast<std::size_t>(k) > n)
        throw UserError("k=" + std::to_string(k) + " exceeds player count " + std::to_string(n));

    std::vector<std::string> shuffled = player_ids;
    Rng rng(derive_seed(seed, {0x666f6c64ULL})); // "fold"
    rng.shuffle(shuffled);

    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    const std::size_t base = n / static_cast<std::size_t>(k);
    const std::size_t extra = n % static_cast<std::size_t>(k);
    std::size_t pos = 0;
    for (int f = 0; f < k; ++f) {
        const std::size_t size = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
        for (std::size_t t = 0; t < size; ++t) {
            auto [it, inserted] = plan.assignments.emplace(shuffled[pos++], f);
            if (!inserted) throw UserError("duplicate player_id in fold split: " + it->first);
        }
    }
    return plan;
}

Normalizer fit_normalizer(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw UserError("cannot fit normalizer on an empty training set");
    const std::size_t dim = rows.front().size();
    for (const auto& r : rows)
        if (r.size() != dim) throw UserError("ragged rows passed to fit_normalizer");

    Normalizer norm;
    norm.mean.resize(dim);
    norm.stddev.resize(dim);
    const double n = static_cast<double>(rows.size());
    for (std::size_t f = 0; f < dim; ++f) {
        double lo = rows.front()[f], hi = lo, sum = 0.0;
        for (const auto& r : rows) {
            lo = std::min(lo, r[f]);
            hi = std::max(hi, r[f]);
            sum += r[f];
        }
        if (lo == hi) {
            // Constant column: record the value as the mean and flag with a
            // zero std so apply() maps it to exactly 0.
            norm.mean[f] = lo;
            norm.stddev[f] = 0.0;
            continue;
        }
        const double mean = sum / n;
        double ss = 0.0;
        for (const auto& r : rows) {
            const double d = r[f] - mean;
            ss += d * d;
        }
        norm.mean[f] = mean;
        norm.stddev[f] = std::sqrt(ss / n); // population convention
    }
    return norm;
}

namespace {

std::vector<std::vector<double>> feature_rows(const std::vector<PlayerRecord>& records) {
    std::vector<std::vector<double>> rows;
    rows.reserve(records.size());
    for (const auto& r : records) rows.push_back(r.features);
    return rows;
}

} // namespace

Normalizer fit_normalizer(const std::vector<PlayerRecord>& records) {
    return fit_normalizer(feature_rows(records));
}

std::vector<double> apply_normalizer(const Normalizer& norm, std::span<const double> row) {
    if (row.size() != norm.mean.size())
        throw UserError("normalizer dimension mismatch: fitted on " +
                        std::to_string(norm.mean.size()) + " features, row has " +
                        std::to_string(row.size()));
    std::vector<double> out(row.size());
    for (std::size_t f = 0; f < row.size(); ++f)
        out[f] = norm.stddev[f] == 0.0 ? 0.0 : (row[f] - norm.mean[f]) / norm.stddev[f];
    return out;
}

std::vector<std::vector<double>> apply_normalizer(const Normalizer& norm,
                                                  const std::vector<std::vector<double>>& rows) {
    std::vector<std::vector<double>> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(apply_normalizer(norm, r));
    return out;
}

std::vector<PlayerRecord> apply_normalizer(const Normalizer& norm,
                                           const std::vector<PlayerRecord>& records) {
    std::vector<PlayerRecord> out = records;
    for (auto& r : out) r.features = apply_normalizer(norm, r.features);
    return out;
}

void GridSpec::validate(Kernel kernel) const {
    if (c_values.empty()) throw UserError("grid has no C values");
    for (double c : c_values)
        if (!(c > 0.0) || !std::isfinite(c)) throw UserError("grid C values must be positive");
    if (kernel == Kernel::rbf) {
        if (gamma_values.empty()) throw UserError("RBF grid has no gamma values");
        for (double g : gamma_values)
            if (!(g > 0.0) || !std::isfinite(g))
                throw UserError("grid gamma values must be positive");
    }
}

void cap_unordered_pairs(PairwiseDataset& pds, std::size_t max_unordered, std::uint64_t seed) {
    const std::size_t m = pds.pairs.size() / 2;
    if (max_unordered == 0 || m <= max_unordered) return;
    std::vector<std::size_t> idx(m);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    for (std::size_t t = 0; t < max_unordered; ++t) {
        const std::size_t j = t + static_cast<std::size_t>(rng.below(m - t));
        std::swap(idx[t], idx[j]);
    }
    idx.resize(max_unordered);
    std::sort(idx.begin(), idx.end());
    std::vector<PreferencePair> kept;
    kept.reserve(2 * max_unordered);
    for (std::size_t u : idx) {
        kept.push_back(std::move(pds.pairs[2 * u]));
        kept.push_back(std::move(pds.pairs[2 * u + 1]));
    }
    pds.pairs = std::move(kept);
}

namespace {

/// Everything a fold needs that is independent of the grid cell: normalized
/// training pairs (after the optional cap) and the unordered test pairs.
struct FoldContext {
    int fold = 0;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    PairwiseDataset train_pairs;
    PairwiseDataset test_pairs;
    double train_retention = 0.0;
    double test_retention = 0.0;
    bool usable = false;
    std::string note;
};

FoldContext prepare_fold(const Dataset& ds, std::size_t factor_idx,
                         const std::vector<std::size_t>& train_rows,
                         const std::vector<std::size_t>& test_rows, double pt,
                         const FoldPlan& plan, const CvOptions& opts, int fold) {
    FoldContext ctx;
    ctx.fold = fold;
    ctx.n_train = train_rows.size();
    ctx.n_test = test_rows.size();

    if (train_rows.size() < 2) {
        ctx.note = "fewer than 2 training players";
        return ctx;
    }
    if (test_rows.size() < 2) {
        ctx.note = "fewer than 2 test players";
        return ctx;
    }

    std::vector<std::vector<double>> train_x;
    std::vector<double> train_y;
    std::vector<std::string> train_ids;
    train_x.reserve(train_rows.size());
    for (std::size_t r : train_rows) {
        train_x.push_back(ds.records[r].features);
        train_y.push_back(ds.records[r].factors[factor_idx]);
        train_ids.push_back(ds.records[r].player_id);
    }
    const Normalizer norm = fit_normalizer(train_x);
    train_x = apply_normalizer(norm, train_x);

    ctx.train_pairs = transform(train_x, train_y, pt, &train_ids);
    ctx.train_retention = retention_stats(ctx.train_pairs).kept_fraction;
    if (ctx.train_pairs.pairs.empty()) {
        ctx.note = "no training pairs cleared the threshold";
        return ctx;
    }
    cap_unordered_pairs(ctx.train_pairs, opts.max_train_pairs,
                        derive_seed(plan.seed, {0x636170ULL, static_cast<std::uint64_t>(fold)}));

    std::vector<std::vector<double>> test_x;
    std::vector<double> test_y;
    std::vector<std::string> test_ids;
    test_x.reserve(test_rows.size());
    for (std::size_t r : test_rows) {
        test_x.push_back(ds.records[r].features);
        test_y.push_back(ds.records[r].factors[factor_idx]);
        test_ids.push_back(ds.records[r].player_id);
    }
    test_x = apply_normalizer(norm, test_x);

    ctx.test_pairs = transform(test_x, test_y, pt, &test_ids);
    ctx.test_retention = retention_stats(ctx.test_pairs).kept_fraction;
    if (ctx.test_pairs.pairs.empty()) {
        ctx.note = "no test pairs cleared the threshold";
        return ctx;
    }
    ctx.usable = true;
    return ctx;
}

FoldResult evaluate_fold(const FoldContext& ctx, Kernel kernel, const TrainConfig& cfg,
                         bool capture_model) {
    FoldResult res;
    res.fold = ctx.fold;
    res.n_train_players = ctx.n_train;
    res.n_test_players = ctx.n_test;
    res.train_retention = ctx.train_retention;
    res.test_retention = ctx.test_retention;
    if (!ctx.usable) {
        res.degenerate = true;
        res.note = ctx.note;
        return res;
    }

    res.train_samples = ctx.train_pairs.pairs.size();
    const RankModel model = train(ctx.train_pairs, kernel, cfg);
    res.diagnostics = std::visit([](const auto& m) { return m.diagnostics; }, model);

    const bool linear = std::holds_alternative<LinearModel>(model);
    double correct = 0.0;
    std::size_t evaluated = 0;
    for (std::size_t p = 0; p + 1 < ctx.test_pairs.pairs.size(); p += 2) {
        const auto& fwd = ctx.test_pairs.pairs[p];     // diff of (higher - lower), label +1
        const auto& mir = ctx.test_pairs.pairs[p + 1]; // exact negation
        double g;
        if (linear) {
            g = score(std::get<LinearModel>(model), fwd.diff);
        } else {
            const auto& km = std::get<KernelModel>(model);
            g = 0.5 * (score(km, fwd.diff) - score(km, mir.diff));
        }
        if (g > 0.0) correct += 1.0;
        else if (g == 0.0) correct += 0.5;
        ++evaluated;
    }
    res.test_pairs = evaluated;
    res.test_samples = 2 * evaluated;
    res.correct = correct;
    res.accuracy = correct / static_cast<double>(evaluated);
    if (capture_model) res.model = model;
    return res;
}

EvalReport assemble_report(const std::string& factor, Kernel kernel, const TrainConfig& cfg,
                           double pt, const FoldPlan& plan, std::vector<FoldResult> folds) {
    EvalReport report;
    report.factor = factor;
    report.kernel = kernel;
    report.config = cfg;
    report.pt = pt;
    report.folds = plan.k;
    report.seed = plan.seed;
    report.fold_results = std::move(folds);

    std::vector<double> accs;
    for (const auto& f : report.fold_results) {
        if (f.degenerate) {
            ++report.degenerate_folds;
            continue;
        }
        accs.push_back(f.accuracy);
        if (report.best_fold < 0 || f.accuracy > report.best_fold_accuracy) {
            report.best_fold_accuracy = f.accuracy;
            report.best_fold = f.fold;
        }
    }
    if (accs.empty())
        throw UserError("all folds degenerate for factor " + factor +
                        " (no pairs cleared the threshold)");

    const double m = static_cast<double>(accs.size());
    report.mean_accuracy = std::accumulate(accs.begin(), accs.end(), 0.0) / m;
    if (accs.size() > 1) {
        double ss = 0.0;
        for (double a : accs) {
            const double d = a - report.mean_accuracy;
            ss += d * d;
        }
        report.accuracy_std = std::sqrt(ss / (m - 1.0));
    }
    const double half = 1.96 * report.accuracy_std / std::sqrt(m);
    report.ci_low = report.mean_accuracy - half;
    report.ci_high = report.mean_accuracy + half;
    return report;
}

std::vector<std::vector<std::size_t>> rows_by_fold(const Dataset& ds, const FoldPlan& plan) {
    if (plan.k < 2) throw UserError("fold plan must have k >= 2");
    std::vector<std::vector<std::size_t>> by_fold(static_cast<std::size_t>(plan.k));
    for (std::size_t r = 0; r < ds.records.size(); ++r) {
        const int f = plan.fold_of(ds.records[r].player_id);
        if (f < 0 || f >= plan.k) throw UserError("fold index out of range in plan");
        by_fold[static_cast<std::size_t>(f)].push_back(r);
    }
    return by_fold;
}

/// Shared engine: prepares each fold once and evaluates every config on it.
std::vector<EvalReport> evaluate_cells(const Dataset& ds, const std::string& factor,
                                       Kernel kernel, const std::vector<TrainConfig>& cells,
                                       double pt, const FoldPlan& plan, const CvOptions& opts) {
    const std::size_t factor_idx = ds.schema.factor_index(factor);
    const auto by_fold = rows_by_fold(ds, plan);

    std::vector<std::vector<FoldResult>> per_cell(cells.size());
    std::vector<std::size_t> train_rows;
    for (int f = 0; f < plan.k; ++f) {
        train_rows.clear();
        for (int g = 0; g < plan.k; ++g)
            if (g != f)
                train_rows.insert(train_rows.end(), by_fold[static_cast<std::size_t>(g)].begin(),
                                  by_fold[static_cast<std::size_t>(g)].end());
        const FoldContext ctx = prepare_fold(ds, factor_idx, train_rows,
                                             by_fold[static_cast<std::size_t>(f)], pt, plan, opts, f);
        for (std::size_t c = 0; c < cells.size(); ++c)
            per_cell[c].push_back(evaluate_fold(ctx, kernel, cells[c], opts.capture_models));
    }

    std::vector<EvalReport> reports;
    reports.reserve(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c)
        reports.push_back(
            assemble_report(factor, kernel, cells[c], pt, plan, std::move(per_cell[c])));
    return reports;
}

json fold_to_json(const FoldResult& f) {
    json j;
    j["fold"] = f.fold;
    j["n_train_players"] = f.n_train_players;
    j["n_test_players"] = f.n_test_players;
    j["train_samples"] = f.train_samples;
    j["test_pairs"] = f.test_pairs;
    j["test_samples"] = f.test_samples;
    j["train_retention"] = f.train_retention;
    j["test_retention"] = f.test_retention;
    j["correct"] = f.correct;
    j["accuracy"] = f.accuracy;
    j["degenerate"] = f.degenerate;
    if (!f.note.empty()) j["note"] = f.note;
    j["diagnostics"] = {{"sweeps", f.diagnostics.sweeps},
                        {"max_kkt_violation", f.diagnostics.max_kkt_violation},
                        {"dual_objective", f.diagnostics.dual_objective},
                        {"converged", f.diagnostics.converged},
                        {"support_count", f.diagnostics.support_count},
                        {"train_pairs", f.diagnostics.train_pairs}};
    return j;
}

json report_json(const EvalReport& r) {
    json j;
    j["factor"] = r.factor;
    j["feature_set"] = r.feature_set;
    j["kernel"] = to_string(r.kernel);
    j["config"] = {{"c", r.config.c},
                   {"gamma", r.config.gamma},
                   {"tol", r.config.tol},
                   {"max_iter", r.config.max_iter}};
    j["pt"] = r.pt;
    j["folds"] = r.folds;
    j["seed"] = r.seed;
    j["mean_accuracy"] = r.mean_accuracy;
    j["accuracy_std"] = r.accuracy_std;
    j["ci_low"] = r.ci_low;
    j["ci_high"] = r.ci_high;
    j["best_fold_accuracy"] = r.best_fold_accuracy;
    j["best_fold"] = r.best_fold;
    j["degenerate_folds"] = r.degenerate_folds;
    json folds = json::array();
    for (const auto& f : r.fold_results) folds.push_back(fold_to_json(f));
    j["fold_results"] = folds;
    return j;
}

} // namespace

std::string report_to_json(const EvalReport& report) { return report_json(report).dump(); }

EvalReport run_cv(const Dataset& ds, const std::string& factor, Kernel kernel,
                  const TrainConfig& cfg, double pt, const FoldPlan& plan, const CvOptions& opts) {
    auto reports = evaluate_cells(ds, factor, kernel, {cfg}, pt, plan, opts);
    return std::move(reports.front());
}

GridSearchResult grid_search(const Dataset& ds, const std::string& factor, Kernel kernel,
                             const GridSpec& grid, double pt, const FoldPlan& plan,
                             const CvOptions& opts, const TrainConfig& base) {
    grid.validate(kernel);
    std::vector<TrainConfig> cells;
    for (double c : grid.c_values) {
        if (kernel == Kernel::linear) {
            TrainConfig cfg = base;
            cfg.c = c;
            cells.push_back(cfg);
        } else {
            for (double gamma : grid.gamma_values) {
                TrainConfig cfg = base;
                cfg.c = c;
                cfg.gamma = gamma;
                cells.push_back(cfg);
            }
        }
    }

    GridSearchResult result;
    result.reports = evaluate_cells(ds, factor, kernel, cells, pt, plan, opts);
    for (std::size_t i = 1; i < result.reports.size(); ++i) {
        const auto& cand = result.reports[i];
        const auto& best = result.reports[result.best_index];
        const bool better =
            cand.mean_accuracy > best.mean_accuracy ||
            (cand.mean_accuracy == best.mean_accuracy &&
             (cand.config.c < best.config.c ||
              (cand.config.c == best.config.c && cand.config.gamma < best.config.gamma)));
        if (better) result.best_index = i;
    }
    return result;
}

SuiteResult run_experiment_suite(const Dataset& ds, const GridSpec& grid, double pt,
                                 const FoldPlan& plan, const CvOptions& opts,
                                 const TrainConfig& base) {
    static constexpr FeatureSet kSets[] = {FeatureSet::play_styles, FeatureSet::game_metrics,
                                           FeatureSet::all};
    static constexpr Kernel kKernels[] = {Kernel::linear, Kernel::rbf};

    SuiteResult suite;
    for (FeatureSet set : kSets) {
        const Dataset sub = select_features(ds, set);
        for (Kernel kernel : kKernels) {
            for (const std::string& factor : sub.schema.factor_names()) {
                GridSearchResult gs = grid_search(sub, factor, kernel, grid, pt, plan, opts, base);
                SuiteEntry entry;
                entry.feature_set = set;
                entry.kernel = kernel;
                entry.factor = factor;
                entry.grid_cells = gs.reports.size();
                entry.best = std::move(gs.reports[gs.best_index]);
                entry.best.feature_set = to_string(set);
                suite.entries.push_back(std::move(entry));
            }
        }
    }
    return suite;
}

std::string suite_summary_csv(const SuiteResult& suite) {
    std::ostringstream out;
    out << "feature_set,kernel,factor,c,gamma,mean_accuracy,accuracy_std,ci_low,ci_high,"
           "best_fold_accuracy,best_fold,grid_cells,degenerate_folds\n";
    for (const auto& e : suite.entries) {
        const auto& r = e.best;
        out << to_string(e.feature_set) << ',' << to_string(e.kernel) << ',' << e.factor << ','
            << format_double(r.config.c) << ','
            << (e.kernel == Kernel::rbf ? format_double(r.config.gamma) : std::string()) << ','
            << format_double(r.mean_accuracy) << ',' << format_double(r.accuracy_std) << ','
            << format_double(r.ci_low) << ',' << format_double(r.ci_high) << ','
            << format_double(r.best_fold_accuracy) << ',' << r.best_fold << ',' << e.grid_cells
            << ',' << r.degenerate_folds << '\n';
    }
    return out.str();
}

std::string suite_summary_json(const SuiteResult& suite) {
    json arr = json::array();
    for (const auto& e : suite.entries) {
        json j;
        j["feature_set"] = to_string(e.feature_set);
        j["kernel"] = to_string(e.kernel);
        j["factor"] = e.factor;
        j["grid_cells"] = e.grid_cells;
        j["best"] = report_json(e.best);
        arr.push_back(j);
    }
    return arr.dump(2);
}

} // namespace motrank
