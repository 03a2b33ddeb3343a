#include "motrank/svm.hpp"

#include "motrank/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

namespace motrank {

using nlohmann::json;

std::string to_string(Kernel k) { return k == Kernel::linear ? "linear" : "rbf"; }

Kernel kernel_from_string(const std::string& s) {
    if (s == "linear") return Kernel::linear;
    if (s == "rbf") return Kernel::rbf;
    throw UserError("unknown kernel: " + s + " (expected linear|rbf)");
}

namespace {

// Full Gram matrices above this size would not fit comfortably in memory;
// rows are recomputed on demand instead (correct but much slower).
constexpr std::size_t kGramLimit = 8192;

struct FlatMatrix {
    std::vector<double> data;
    std::size_t rows = 0;
    std::size_t cols = 0;

    const double* row(std::size_t i) const { return data.data() + i * cols; }
};

void validate_training_input(const PairwiseDataset& pds, const TrainConfig& cfg) {
    if (pds.pairs.empty()) throw UserError("cannot train on an empty pairwise dataset");
    if (!(cfg.c > 0.0)) throw UserError("C must be > 0");
    if (!(cfg.tol > 0.0)) throw UserError("tol must be > 0");
    if (cfg.max_iter < 1) throw UserError("max_iter must be >= 1");
    const std::size_t dim = pds.pairs.front().diff.size();
    for (const auto& p : pds.pairs) {
        if (p.diff.size() != dim) throw UserError("ragged difference vectors");
        if (p.label != 1 && p.label != -1) throw UserError("labels must be +1 or -1");
        for (double v : p.diff)
            if (!std::isfinite(v)) throw UserError("non-finite feature difference");
    }
}

FlatMatrix flatten(const PairwiseDataset& pds) {
    FlatMatrix m;
    m.rows = pds.pairs.size();
    m.cols = pds.pairs.front().diff.size();
    m.data.resize(m.rows * m.cols);
    for (std::size_t i = 0; i < m.rows; ++i)
        std::copy(pds.pairs[i].diff.begin(), pds.pairs[i].diff.end(), m.data.begin() + i * m.cols);
    return m;
}

double sqdist(const double* a, const double* b, std::size_t dim) {
    double s = 0.0;
    for (std::size_t f = 0; f < dim; ++f) {
        const double d = a[f] - b[f];
        s += d * d;
    }
    return s;
}

/// Serves kernel rows either from a precomputed Gram matrix or by
/// recomputing them into a scratch buffer when the problem is too large.
class KernelRows {
public:
    KernelRows(const FlatMatrix& x, double gamma) : x_(x), gamma_(gamma) {
        const std::size_t n = x.rows;
        if (n <= kGramLimit) {
            gram_.resize(n * n);
            for (std::size_t i = 0; i < n; ++i) {
                gram_[i * n + i] = 1.0;
                for (std::size_t j = i + 1; j < n; ++j) {
                    const double k = std::exp(-gamma_ * sqdist(x.row(i), x.row(j), x.cols));
                    gram_[i * n + j] = k;
                    gram_[j * n + i] = k;
                }
            }
        } else {
            scratch_.resize(n);
        }
    }

    const double* row(std::size_t i) {
        if (!gram_.empty()) return gram_.data() + i * x_.rows;
        const double* xi = x_.row(i);
        for (std::size_t j = 0; j < x_.rows; ++j)
            scratch_[j] = std::exp(-gamma_ * sqdist(xi, x_.row(j), x_.cols));
        return scratch_.data();
    }

private:
    const FlatMatrix& x_;
    double gamma_;
    std::vector<double> gram_;
    std::vector<double> scratch_;
};

double projected_gradient(double g, double alpha, double c) {
    if (alpha <= 0.0) return std::min(g, 0.0);
    if (alpha >= c) return std::max(g, 0.0);
    return g;
}

} // namespace

LinearModel train_linear(const PairwiseDataset& pds, const TrainConfig& cfg) {
    validate_training_input(pds, cfg);
    const FlatMatrix x = flatten(pds);
    const std::size_t n = x.rows;
    const std::size_t dim = x.cols;

    std::vector<double> qii(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = x.row(i);
        double s = 0.0;
        for (std::size_t f = 0; f < dim; ++f) s += xi[f] * xi[f];
        qii[i] = s;
    }

    std::vector<double> alpha(n, 0.0);
    std::vector<double> w(dim, 0.0);

    TrainDiagnostics diag;
    diag.train_pairs = n;
    for (int sweep = 1; sweep <= cfg.max_iter; ++sweep) {
        double max_violation = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double* xi = x.row(i);
            const double zi = pds.pairs[i].label;
            double wd = 0.0;
            for (std::size_t f = 0; f < dim; ++f) wd += w[f] * xi[f];
            const double g = zi * wd - 1.0;
            const double pg = projected_gradient(g, alpha[i], cfg.c);
            max_violation = std::max(max_violation, std::abs(pg));
            if (pg == 0.0) continue;
            double next;
            if (qii[i] > 0.0) {
                next = std::clamp(alpha[i] - g / qii[i], 0.0, cfg.c);
            } else {
                // Zero difference vector: the dual gradient is the constant
                // -1, so the coordinate rests at the upper bound.
                next = cfg.c;
            }
            const double delta = next - alpha[i];
            if (delta != 0.0) {
                alpha[i] = next;
                for (std::size_t f = 0; f < dim; ++f) w[f] += delta * zi * xi[f];
            }
        }
        diag.sweeps = sweep;
        diag.max_kkt_violation = max_violation;
        if (max_violation <= cfg.tol) {
            diag.converged = true;
            break;
        }
    }

    double sum_alpha = std::accumulate(alpha.begin(), alpha.end(), 0.0);
    double wnorm2 = 0.0;
    for (double v : w) wnorm2 += v * v;
    diag.dual_objective = sum_alpha - 0.5 * wnorm2;
    diag.support_count = static_cast<std::size_t>(
        std::count_if(alpha.begin(), alpha.end(), [](double a) { return a != 0.0; }));

    LinearModel model;
    model.w = std::move(w);
    model.config = cfg;
    model.diagnostics = diag;
    return model;
}

KernelModel train_rbf(const PairwiseDataset& pds, const TrainConfig& cfg) {
    validate_training_input(pds, cfg);
    if (!(cfg.gamma > 0.0)) throw UserError("gamma must be > 0");
    const FlatMatrix x = flatten(pds);
    const std::size_t n = x.rows;

    KernelRows rows(x, cfg.gamma);
    std::vector<double> alpha(n, 0.0);
    std::vector<double> f(n, 0.0); // decision value at each training diff

    TrainDiagnostics diag;
    diag.train_pairs = n;
    for (int sweep = 1; sweep <= cfg.max_iter; ++sweep) {
        double max_violation = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double zi = pds.pairs[i].label;
            const double g = zi * f[i] - 1.0;
            const double pg = projected_gradient(g, alpha[i], cfg.c);
            max_violation = std::max(max_violation, std::abs(pg));
            if (pg == 0.0) continue;
            const double next = std::clamp(alpha[i] - g, 0.0, cfg.c); // K_ii = 1
            const double delta = next - alpha[i];
            if (delta != 0.0) {
                alpha[i] = next;
                const double step = delta * zi;
                const double* ki = rows.row(i);
                for (std::size_t j = 0; j < n; ++j) f[j] += step * ki[j];
            }
        }
        diag.sweeps = sweep;
        diag.max_kkt_violation = max_violation;
        if (max_violation <= cfg.tol) {
            diag.converged = true;
            break;
        }
    }

    double sum_alpha = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sum_alpha += alpha[i];
        quad += alpha[i] * pds.pairs[i].label * f[i];
    }
    diag.dual_objective = sum_alpha - 0.5 * quad;

    KernelModel model;
    model.gamma = cfg.gamma;
    model.config = cfg;
    for (std::size_t i = 0; i < n; ++i) {
        if (alpha[i] != 0.0) {
            model.alpha_z.push_back(alpha[i] * pds.pairs[i].label);
            model.support_diffs.push_back(pds.pairs[i].diff);
        }
    }
    diag.support_count = model.alpha_z.size();
    model.diagnostics = diag;
    return model;
}

RankModel train(const PairwiseDataset& pds, Kernel kernel, const TrainConfig& cfg) {
    if (kernel == Kernel::linear) return train_linear(pds, cfg);
    return train_rbf(pds, cfg);
}

double score(const LinearModel& m, std::span<const double> d) {
    if (d.size() != m.w.size())
        throw UserError("dimension mismatch: model has " + std::to_string(m.w.size()) +
                        " weights, input has " + std::to_string(d.size()));
    double s = 0.0;
    for (std::size_t f = 0; f < d.size(); ++f) s += m.w[f] * d[f];
    return s;
}

double score(const KernelModel& m, std::span<const double> d) {
    if (!m.support_diffs.empty() && d.size() != m.support_diffs.front().size())
        throw UserError("dimension mismatch: model supports have " +
                        std::to_string(m.support_diffs.front().size()) + " features, input has " +
                        std::to_string(d.size()));
    double s = 0.0;
    for (std::size_t k = 0; k < m.alpha_z.size(); ++k) {
        double dist2 = 0.0;
        const auto& sv = m.support_diffs[k];
        for (std::size_t f = 0; f < d.size(); ++f) {
            const double diff = sv[f] - d[f];
            dist2 += diff * diff;
        }
        s += m.alpha_z[k] * std::exp(-m.gamma * dist2);
    }
    return s;
}

double score(const RankModel& m, std::span<const double> d) {
    return std::visit([&](const auto& model) { return score(model, d); }, m);
}

Preference predict_preference(const RankModel& m, std::span<const double> x_a,
                              std::span<const double> x_b) {
    if (x_a.size() != x_b.size()) throw UserError("preference inputs differ in dimension");
    std::vector<double> d(x_a.size());
    for (std::size_t f = 0; f < d.size(); ++f) d[f] = x_a[f] - x_b[f];

    double g;
    if (std::holds_alternative<LinearModel>(m)) {
        g = score(std::get<LinearModel>(m), d); // w.(-d) == -w.d exactly
    } else {
        std::vector<double> neg(d.size());
        for (std::size_t f = 0; f < d.size(); ++f) neg[f] = -d[f];
        const auto& km = std::get<KernelModel>(m);
        g = 0.5 * (score(km, d) - score(km, neg));
    }

    Preference p;
    p.margin = g;
    if (g > 0.0) p.winner = Winner::a_preferred;
    else if (g < 0.0) p.winner = Winner::b_preferred;
    else p.winner = Winner::tie;
    return p;
}

namespace {

json config_to_json(const TrainConfig& cfg) {
    return {{"c", cfg.c}, {"gamma", cfg.gamma}, {"tol", cfg.tol}, {"max_iter", cfg.max_iter}};
}

TrainConfig config_from_json(const json& j) {
    TrainConfig cfg;
    cfg.c = j.value("c", 1.0);
    cfg.gamma = j.value("gamma", 0.5);
    cfg.tol = j.value("tol", 1e-4);
    cfg.max_iter = j.value("max_iter", 1000);
    return cfg;
}

json diagnostics_to_json(const TrainDiagnostics& d) {
    return {{"sweeps", d.sweeps},
            {"max_kkt_violation", d.max_kkt_violation},
            {"dual_objective", d.dual_objective},
            {"converged", d.converged},
            {"support_count", d.support_count},
            {"train_pairs", d.train_pairs}};
}

TrainDiagnostics diagnostics_from_json(const json& j) {
    TrainDiagnostics d;
    d.sweeps = j.value("sweeps", 0);
    d.max_kkt_violation = j.value("max_kkt_violation", 0.0);
    d.dual_objective = j.value("dual_objective", 0.0);
    d.converged = j.value("converged", false);
    d.support_count = j.value("support_count", std::size_t{0});
    d.train_pairs = j.value("train_pairs", std::size_t{0});
    return d;
}

} // namespace

std::string model_to_json(const RankModel& m) {
    json j;
    if (std::holds_alternative<LinearModel>(m)) {
        const auto& lm = std::get<LinearModel>(m);
        j["kind"] = "linear";
        j["w"] = lm.w;
        j["schema_fingerprint"] = lm.schema_fingerprint;
        j["train_config"] = config_to_json(lm.config);
        j["diagnostics"] = diagnostics_to_json(lm.diagnostics);
    } else {
        const auto& km = std::get<KernelModel>(m);
        j["kind"] = "rbf";
        j["gamma"] = km.gamma;
        j["alpha_z"] = km.alpha_z;
        j["support_diffs"] = km.support_diffs;
        j["schema_fingerprint"] = km.schema_fingerprint;
        j["train_config"] = config_to_json(km.config);
        j["diagnostics"] = diagnostics_to_json(km.diagnostics);
    }
    return j.dump();
}

RankModel model_from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw UserError("model file is not valid JSON");
    const std::string kind = j.value("kind", "");
    if (kind == "linear") {
        LinearModel lm;
        lm.w = j.at("w").get<std::vector<double>>();
        lm.schema_fingerprint = j.value("schema_fingerprint", "");
        if (j.contains("train_config")) lm.config = config_from_json(j["train_config"]);
        if (j.contains("diagnostics")) lm.diagnostics = diagnostics_from_json(j["diagnostics"]);
        return lm;
    }
    if (kind == "rbf") {
        KernelModel km;
        km.gamma = j.at("gamma").get<double>();
        km.alpha_z = j.at("alpha_z").get<std::vector<double>>();
        km.support_diffs = j.at("support_diffs").get<std::vector<std::vector<double>>>();
        km.schema_fingerprint = j.value("schema_fingerprint", "");
        if (j.contains("train_config")) km.config = config_from_json(j["train_config"]);
        if (j.contains("diagnostics")) km.diagnostics = diagnostics_from_json(j["diagnostics"]);
        return km;
    }
    throw UserError("unknown model kind: " + kind);
}

} // namespace motrank
