#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "motrank/dataset.hpp"
#include "motrank/error.hpp"
#include "motrank/manifest.hpp"
#include "motrank/pairwise.hpp"
#include "motrank/pipeline.hpp"
#include "motrank/ranking.hpp"
#include "motrank/svm.hpp"
#include "motrank/synth.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace py = pybind11;
using nlohmann::json;

namespace {

using namespace motrank;

using Matrix = std::vector<std::vector<double>>;

FeatureSchema plain_schema(std::size_t dim) {
    std::vector<FeatureSpec> specs;
    specs.reserve(dim);
    for (std::size_t i = 0; i < dim; ++i)
        specs.push_back({"f" + std::to_string(i), FeatureKind::continuous});
    return FeatureSchema(std::move(specs),
                         {"competence", "autonomy", "relatedness", "presence"});
}

std::vector<std::string> default_ids(std::size_t n) {
    std::vector<std::string> ids;
    ids.reserve(n);
    for (std::size_t i = 0; i < n; ++i) ids.push_back("p" + std::to_string(i));
    return ids;
}

/// Rows of features plus one score column, wrapped as a single-factor
/// dataset so the pipeline entry points can run on plain Python lists.
Dataset make_dataset(const Matrix& x, const std::vector<double>& y,
                     std::optional<std::vector<std::string>> ids) {
    if (x.size() != y.size())
        throw UserError("features and scores must have the same number of rows");
    if (x.empty()) throw UserError("dataset is empty");
    std::vector<std::string> names = ids ? std::move(*ids) : default_ids(x.size());
    if (names.size() != x.size())
        throw UserError("ids must match the number of feature rows");
    Dataset ds;
    ds.schema = plain_schema(x[0].size());
    ds.records.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        PlayerRecord r;
        r.player_id = names[i];
        r.features = x[i];
        r.factors = {y[i], y[i], y[i], y[i]};
        ds.records.push_back(std::move(r));
    }
    ds.validate();
    return ds;
}

TrainConfig make_config(double c, double gamma, double tol, int max_iter) {
    TrainConfig cfg;
    cfg.c = c;
    cfg.gamma = gamma;
    cfg.tol = tol;
    cfg.max_iter = max_iter;
    return cfg;
}

json diagnostics_json(const TrainDiagnostics& d) {
    return json{{"sweeps", d.sweeps},
                {"max_kkt_violation", d.max_kkt_violation},
                {"dual_objective", d.dual_objective},
                {"converged", d.converged},
                {"support_count", d.support_count},
                {"train_pairs", d.train_pairs}};
}

/// Trained model plus the normalizer fitted alongside it, so preference and
/// ranking calls accept raw feature vectors.
struct Ranker {
    RankModel model;
    Normalizer norm;
    bool normalized = false;

    std::vector<double> prepare(const std::vector<double>& x) const {
        return normalized ? apply_normalizer(norm, x) : x;
    }

    std::string kernel() const {
        return std::holds_alternative<LinearModel>(model) ? "linear" : "rbf";
    }

    std::vector<double> weights() const {
        if (const auto* lin = std::get_if<LinearModel>(&model)) return lin->w;
        throw UserError("weights are only defined for the linear kernel");
    }

    double prefer(const std::vector<double>& a, const std::vector<double>& b) const {
        return predict_preference(model, prepare(a), prepare(b)).margin;
    }

    std::pair<std::vector<std::string>, std::vector<double>>
    rank(const Matrix& x, std::optional<std::vector<std::string>> ids,
         const std::string& method) const {
        std::vector<std::string> names = ids ? std::move(*ids) : default_ids(x.size());
        if (names.size() != x.size())
            throw UserError("ids must match the number of feature rows");
        std::vector<PlayerRecord> records;
        records.reserve(x.size());
        for (std::size_t i = 0; i < x.size(); ++i)
            records.push_back({names[i], prepare(x[i]), {}});
        Ordering ord = order_players(model, records, order_method_from_string(method));
        return {std::move(ord.player_ids), std::move(ord.scores)};
    }

    std::string diagnostics() const {
        const TrainDiagnostics& d = std::holds_alternative<LinearModel>(model)
                                        ? std::get<LinearModel>(model).diagnostics
                                        : std::get<KernelModel>(model).diagnostics;
        return diagnostics_json(d).dump();
    }
};

Ranker train_ranker(const Matrix& x, const std::vector<double>& y, double pt,
                    const std::string& kernel, double c, double gamma, double tol,
                    int max_iter, bool normalize) {
    if (x.size() != y.size())
        throw UserError("features and scores must have the same number of rows");
    Ranker r;
    r.normalized = normalize;
    Matrix rows = x;
    if (normalize) {
        r.norm = fit_normalizer(rows);
        rows = apply_normalizer(r.norm, rows);
    }
    PairwiseDataset pds = transform(rows, y, pt);
    r.model = train(pds, kernel_from_string(kernel), make_config(c, gamma, tol, max_iter));
    return r;
}

py::dict transform_pairs(const Matrix& x, const std::vector<double>& y, double pt) {
    PairwiseDataset pds = transform(x, y, pt);
    Matrix diffs;
    std::vector<int> labels;
    std::vector<std::pair<std::size_t, std::size_t>> sources;
    diffs.reserve(pds.pairs.size());
    for (const auto& p : pds.pairs) {
        diffs.push_back(p.diff);
        labels.push_back(p.label);
        sources.emplace_back(p.i, p.j);
    }
    RetentionStats stats = retention_stats(pds);
    py::dict out;
    out["diffs"] = std::move(diffs);
    out["labels"] = std::move(labels);
    out["sources"] = std::move(sources);
    out["kept"] = stats.kept_pairs;
    out["retention"] = stats.kept_fraction;
    return out;
}

std::string cross_validate_json(const Matrix& x, const std::vector<double>& y,
                                std::optional<std::vector<std::string>> ids,
                                const std::string& kernel, double c, double gamma,
                                double tol, int max_iter, double pt, int folds,
                                std::uint64_t seed, std::size_t max_train_pairs) {
    Dataset ds = make_dataset(x, y, std::move(ids));
    std::vector<std::string> names;
    for (const auto& r : ds.records) names.push_back(r.player_id);
    FoldPlan plan = kfold_split(names, folds, seed);
    CvOptions opts;
    opts.max_train_pairs = max_train_pairs;
    EvalReport report = run_cv(ds, "competence", kernel_from_string(kernel),
                               make_config(c, gamma, tol, max_iter), pt, plan, opts);
    return report_to_json(report);
}

std::string grid_search_json(const Matrix& x, const std::vector<double>& y,
                             std::optional<std::vector<std::string>> ids,
                             const std::string& kernel, std::vector<double> c_values,
                             std::vector<double> gamma_values, double pt, int folds,
                             std::uint64_t seed, std::size_t max_train_pairs) {
    Dataset ds = make_dataset(x, y, std::move(ids));
    std::vector<std::string> names;
    for (const auto& r : ds.records) names.push_back(r.player_id);
    FoldPlan plan = kfold_split(names, folds, seed);
    GridSpec grid;
    if (!c_values.empty()) grid.c_values = std::move(c_values);
    if (!gamma_values.empty()) grid.gamma_values = std::move(gamma_values);
    CvOptions opts;
    opts.max_train_pairs = max_train_pairs;
    GridSearchResult result =
        grid_search(ds, "competence", kernel_from_string(kernel), grid, pt, plan, opts);
    json cells = json::array();
    for (const auto& r : result.reports) cells.push_back(json::parse(report_to_json(r)));
    json out{{"cells", std::move(cells)}, {"best_index", result.best_index}};
    return out.dump();
}

py::dict generate_synthetic(std::size_t n, std::size_t dim, std::uint64_t seed,
                            const std::string& kind, double noise) {
    FeatureSchema schema = plain_schema(dim);
    LatentSpec spec;
    if (kind == "linear")
        spec = random_linear_spec(schema, seed, noise);
    else if (kind == "radial")
        spec = random_radial_spec(schema, seed, noise);
    else
        throw UserError("unknown latent kind '" + kind + "' (expected linear or radial)");
    Dataset ds = generate(n, schema, spec);
    Matrix x;
    std::vector<double> y;
    std::vector<std::string> ids;
    for (const auto& r : ds.records) {
        x.push_back(r.features);
        y.push_back(r.factors[0]);
        ids.push_back(r.player_id);
    }
    py::dict out;
    out["features"] = std::move(x);
    out["scores"] = std::move(y);
    out["ids"] = std::move(ids);
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Pairwise ranking models for motivation factor prediction";
    m.attr("__version__") = motrank::kToolVersion;

    py::register_exception<motrank::UserError>(m, "UserError", PyExc_ValueError);

    py::class_<Ranker>(m, "Ranker")
        .def_property_readonly("kernel", &Ranker::kernel)
        .def_property_readonly("weights", &Ranker::weights)
        .def_property_readonly("normalized", [](const Ranker& r) { return r.normalized; })
        .def("prefer", &Ranker::prefer, py::arg("a"), py::arg("b"),
             "Antisymmetric preference margin; positive means a ranks above b.")
        .def("rank", &Ranker::rank, py::arg("features"), py::arg("ids") = py::none(),
             py::arg("method") = "copeland",
             "Global ordering, best first; returns (ids, scores).")
        .def("diagnostics_json", &Ranker::diagnostics)
        .def("model_json", [](const Ranker& r) { return motrank::model_to_json(r.model); });

    m.def("train", &train_ranker, py::arg("features"), py::arg("scores"),
          py::arg("pt") = 0.1, py::arg("kernel") = "linear", py::arg("c") = 1.0,
          py::arg("gamma") = 0.5, py::arg("tol") = 1e-4, py::arg("max_iter") = 1000,
          py::arg("normalize") = true,
          "Pairwise-transform the rows and fit a ranking model.");

    m.def("transform", &transform_pairs, py::arg("features"), py::arg("scores"),
          py::arg("pt") = 0.1,
          "Pairwise preference transformation; returns mirrored difference "
          "vectors, labels and source index pairs.");

    m.def("kfold", [](const std::vector<std::string>& ids, int k, std::uint64_t seed) {
              return motrank::kfold_split(ids, k, seed).assignments;
          },
          py::arg("ids"), py::arg("k"), py::arg("seed") = 1,
          "Seeded player-to-fold assignment; fold sizes differ by at most one.");

    m.def("cross_validate_json", &cross_validate_json, py::arg("features"),
          py::arg("scores"), py::arg("ids") = py::none(), py::arg("kernel") = "linear",
          py::arg("c") = 1.0, py::arg("gamma") = 0.5, py::arg("tol") = 1e-4,
          py::arg("max_iter") = 1000, py::arg("pt") = 0.1, py::arg("folds") = 10,
          py::arg("seed") = 1, py::arg("max_train_pairs") = 0);

    m.def("grid_search_json", &grid_search_json, py::arg("features"), py::arg("scores"),
          py::arg("ids") = py::none(), py::arg("kernel") = "linear",
          py::arg("c_values") = std::vector<double>{}, py::arg("gamma_values") = std::vector<double>{},
          py::arg("pt") = 0.1, py::arg("folds") = 10, py::arg("seed") = 1,
          py::arg("max_train_pairs") = 0);

    m.def("generate_synthetic", &generate_synthetic, py::arg("n"), py::arg("dim"),
          py::arg("seed") = 1, py::arg("kind") = "linear", py::arg("noise") = 0.0,
          "Seeded dataset with a known latent utility; returns features, "
          "scores and ids.");
}
