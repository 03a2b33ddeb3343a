#include "motrank/clustering.hpp"
#include "motrank/dataset.hpp"
#include "motrank/error.hpp"
#include "motrank/format.hpp"
#include "motrank/manifest.hpp"
#include "motrank/pairwise.hpp"
#include "motrank/pipeline.hpp"
#include "motrank/random.hpp"
#include "motrank/ranking.hpp"
#include "motrank/survey.hpp"
#include "motrank/svm.hpp"
#include "motrank/synth.hpp"

#include <array>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace motrank;

namespace {

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UserError("cannot open " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UserError("cannot write " + path.string());
    out << content;
    if (!out) throw UserError("failed writing " + path.string());
}

/// Accepts the built-in layouts "full" and "metrics", or a schema JSON path.
FeatureSchema resolve_schema(const std::string& arg) {
    if (arg == "full") return default_schema();
    if (arg == "metrics") return default_metrics_schema();
    return FeatureSchema::load(arg);
}

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
    std::vector<double> values;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
        auto v = parse_double(item);
        if (!v) throw UserError(flag + ": cannot parse '" + item + "' as a number");
        values.push_back(*v);
    }
    if (values.empty()) throw UserError(flag + ": empty list");
    return values;
}

fs::path prepare_out(const std::string& out) {
    fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw UserError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

void emit_manifest(const fs::path& out_dir, const std::string& command, const json& config,
                   const std::vector<fs::path>& inputs, const std::vector<std::string>& outputs) {
    Manifest m;
    m.command = command;
    m.config_json = config.dump();
    for (const auto& p : inputs) m.inputs.push_back(digest_file(p));
    for (const auto& name : outputs) m.outputs.push_back(digest_file(out_dir / name, name));
    write_manifest(m, out_dir / "manifest.json");
}

Dataset load_dataset(const std::string& data, const FeatureSchema& schema) {
    Dataset ds = load_csv(data, schema);
    ds.validate();
    if (ds.records.empty()) throw UserError("dataset is empty: " + data);
    return ds;
}

std::vector<std::string> player_ids(const Dataset& ds) {
    std::vector<std::string> ids;
    ids.reserve(ds.records.size());
    for (const auto& r : ds.records) ids.push_back(r.player_id);
    return ids;
}

std::string fold_summary_line(const EvalReport& r) {
    std::ostringstream out;
    out << r.factor << ' ' << to_string(r.kernel) << " c=" << format_double(r.config.c);
    if (r.kernel == Kernel::rbf) out << " gamma=" << format_double(r.config.gamma);
    out << " mean=" << format_double(r.mean_accuracy) << " ci=[" << format_double(r.ci_low) << ','
        << format_double(r.ci_high) << "] best_fold=" << format_double(r.best_fold_accuracy);
    if (r.degenerate_folds > 0) out << " degenerate_folds=" << r.degenerate_folds;
    return out.str();
}

json fold_lines(const EvalReport& r, const std::string& feature_set) {
    json base;
    base["feature_set"] = feature_set;
    base["kernel"] = to_string(r.kernel);
    base["factor"] = r.factor;
    base["c"] = r.config.c;
    base["gamma"] = r.config.gamma;
    return base;
}

void append_fold_jsonl(std::ostream& out, const EvalReport& r, const std::string& feature_set) {
    const json report = json::parse(report_to_json(r));
    for (const auto& fold : report.at("fold_results")) {
        json line = fold_lines(r, feature_set);
        for (auto it = fold.begin(); it != fold.end(); ++it) line[it.key()] = it.value();
        out << line.dump() << '\n';
    }
}

struct SynthArgs {
    std::size_t n = 298;
    std::uint64_t seed = 1;
    std::string schema = "full";
    std::string latent = "linear";
    std::string latent_file;
    double noise = 0.0;
    std::string out = ".";
};

void run_synth(const SynthArgs& a) {
    const FeatureSchema schema = resolve_schema(a.schema);
    LatentSpec spec;
    if (!a.latent_file.empty()) {
        spec = latent_spec_from_json(read_text(a.latent_file));
    } else if (a.latent == "linear") {
        spec = random_linear_spec(schema, a.seed, a.noise);
    } else if (a.latent == "radial") {
        spec = random_radial_spec(schema, a.seed, a.noise);
    } else {
        throw UserError("--latent must be linear or radial (use --latent-file for custom specs)");
    }

    const Dataset ds = generate(a.n, schema, spec);
    const fs::path out = prepare_out(a.out);
    write_csv(ds, out / "dataset.csv");
    schema.save(out / "schema.json");
    write_text(out / "latent.json", latent_spec_to_json(spec) + "\n");

    json config{{"n", a.n},      {"seed", a.seed},   {"schema", a.schema},
                {"latent", a.latent}, {"noise", a.noise}, {"latent_file", !a.latent_file.empty()}};
    std::vector<fs::path> inputs;
    if (!a.latent_file.empty()) inputs.emplace_back(a.latent_file);
    emit_manifest(out, "synth", config, inputs, {"dataset.csv", "schema.json", "latent.json"});
    std::cout << "wrote " << ds.records.size() << " players to " << (out / "dataset.csv").string()
              << "\n";
}

struct IngestArgs {
    std::string data;
    std::string survey;
    std::string mapping;
    std::string schema = "metrics";
    std::string out = ".";
};

void run_ingest(const IngestArgs& a) {
    const FeatureSchema schema = resolve_schema(a.schema);
    Dataset ds;
    std::vector<fs::path> inputs{a.data};
    if (!a.survey.empty()) {
        ds = load_features_csv(a.data, schema);
        const auto responses = load_responses_csv(a.survey);
        inputs.emplace_back(a.survey);
        SurveyMapping mapping;
        if (!a.mapping.empty()) {
            mapping = SurveyMapping::load(a.mapping);
            inputs.emplace_back(a.mapping);
        } else {
            mapping = default_mapping();
        }
        const auto problems = validate_mapping(mapping);
        if (!problems.empty()) {
            std::string msg = "survey mapping invalid:";
            for (const auto& p : problems) msg += " " + p + ";";
            throw UserError(msg);
        }
        ds = attach_survey_factors(ds, responses, mapping);
    } else {
        ds = load_csv(a.data, schema);
    }
    ds.validate();

    const fs::path out = prepare_out(a.out);
    write_csv(ds, out / "dataset.csv");
    schema.save(out / "schema.json");
    json config{{"schema", a.schema}, {"with_survey", !a.survey.empty()}};
    emit_manifest(out, "ingest", config, inputs, {"dataset.csv", "schema.json"});
    std::cout << "ingested " << ds.records.size() << " players\n";
}

struct CleanArgs {
    std::string data;
    std::string schema = "full";
    std::string outlier = "iqr:1.5";
    std::string out = ".";
};

void run_clean(const CleanArgs& a) {
    const FeatureSchema schema = resolve_schema(a.schema);
    Dataset ds = load_csv(a.data, schema);
    ds.validate();
    const OutlierRule rule = OutlierRule::parse(a.outlier);
    auto [kept, log] = clean(ds, rule);

    const fs::path out = prepare_out(a.out);
    write_csv(kept, out / "dataset.csv");
    write_text(out / "dropped.jsonl", log.to_jsonl());
    schema.save(out / "schema.json");
    json config{{"schema", a.schema}, {"outlier", rule.to_string()}};
    emit_manifest(out, "clean", config, {a.data}, {"dataset.csv", "dropped.jsonl", "schema.json"});
    std::cout << "kept " << kept.records.size() << " of " << ds.records.size() << " players (dropped "
              << log.dropped.size() << ")\n";
}

struct ClusterArgs {
    std::string data;
    std::string schema = "metrics";
    std::size_t k = 4;
    std::uint64_t seed = 1;
    int max_iter = 100;
    int restarts = 10;
    std::vector<std::string> names;
    std::string out = ".";
};

void run_cluster(const ClusterArgs& a) {
    const FeatureSchema schema = resolve_schema(a.schema);
    Dataset ds = load_dataset(a.data, schema);

    const Normalizer norm = fit_normalizer(ds.records);
    const auto normalized = apply_normalizer(norm, ds.records);
    const ClusterModel model = kmeans_fit(normalized, a.k, a.seed, a.max_iter, a.restarts);

    const fs::path out = prepare_out(a.out);
    write_text(out / "cluster.json", cluster_model_to_json(model) + "\n");
    std::vector<std::string> outputs{"cluster.json"};

    std::array<std::string, 4> names;
    if (a.names.empty()) {
        const auto styles = default_schema().indices_of(FeatureKind::exclusive_category);
        for (std::size_t i = 0; i < 4; ++i)
            names[i] = default_schema().features()[styles[i]].name;
    } else if (a.names.size() == 4) {
        std::copy(a.names.begin(), a.names.end(), names.begin());
    } else {
        throw UserError("--names requires exactly 4 style names");
    }

    if (a.k == 4) {
        const Dataset augmented = assign_styles(model, ds, names);
        write_csv(augmented, out / "dataset.csv");
        augmented.schema.save(out / "schema.json");
        outputs.push_back("dataset.csv");
        outputs.push_back("schema.json");
    }

    json config{{"schema", a.schema}, {"k", a.k},
                {"seed", a.seed},     {"max_iter", a.max_iter},
                {"restarts", a.restarts}, {"names", names}};
    emit_manifest(out, "cluster", config, {a.data}, outputs);
    std::cout << "k=" << a.k << " inertia=" << format_double(model.inertia) << "\n";
}

struct TransformArgs {
    std::string data;
    std::string schema = "full";
    std::string factor;
    std::string features = "all";
    double pt = 0.1;
    bool no_normalize = false;
    std::string out = ".";
};

void run_transform(const TransformArgs& a) {
    const FeatureSchema schema = resolve_schema(a.schema);
    const Dataset full = load_dataset(a.data, schema);
    const Dataset ds = select_features(full, feature_set_from_string(a.features));
    const std::size_t factor_idx = ds.schema.factor_index(a.factor);

    std::vector<std::vector<double>> x;
    std::vector<double> y;
    std::vector<std::string> ids;
    for (const auto& r : ds.records) {
        x.push_back(r.features);
        y.push_back(r.factors[factor_idx]);
        ids.push_back(r.player_id);
    }
    if (!a.no_normalize) x = apply_normalizer(fit_normalizer(x), x);

    const PairwiseDataset pds = transform(x, y, a.pt, &ids);
    const RetentionStats stats = retention_stats(pds);

    const fs::path out = prepare_out(a.out);
    std::vector<std::string> feature_names;
    for (const auto& spec : ds.schema.features()) feature_names.push_back(spec.name);
    write_pairs_csv(pds, feature_names, out / "pairs.csv");
    json stats_json{{"n_players", ds.records.size()},
                    {"kept_samples", stats.kept_pairs},
                    {"possible_samples", ds.records.size() * (ds.records.size() - 1)},
                    {"retention", stats.kept_fraction},
                    {"pt", a.pt}};
    write_text(out / "stats.json", stats_json.dump(2) + "\n");

    json config{{"schema", a.schema},     {"factor", a.factor}, {"features", a.features},
                {"pt", a.pt},             {"normalize", !a.no_normalize}};
    emit_manifest(out, "transform", config, {a.data}, {"pairs.csv", "stats.json"});
    std::cout << "kept " << stats.kept_pairs << " of "
              << ds.records.size() * (ds.records.size() - 1) << " samples (retention "
              << format_double(stats.kept_fraction) << ")\n";
}

struct CvArgs {
    std::string data;
    std::string schema = "full";
    std::string factor;
    std::string kernel = "linear";
    std::string features = "all";
    double pt = 0.1;
    int folds = 10;
    std::uint64_t seed = 1;
    double c = 1.0;
    double gamma = 0.5;
    std::string grid_c;
    std::string grid_gamma;
    std::size_t max_pairs = 0;
    double tol = 1e-4;
    int max_iter = 1000;
    std::string out = ".";
};

void run_cv_cmd(const CvArgs& a) {
    const FeatureSchema schema = resolve_schema(a.schema);
    const Dataset full = load_dataset(a.data, schema);
    const Dataset ds = select_features(full, feature_set_from_string(a.features));
    const Kernel kernel = kernel_from_string(a.kernel);
    const FoldPlan plan = kfold_split(player_ids(ds), a.folds, a.seed);

    CvOptions opts;
    opts.max_train_pairs = a.max_pairs;
    TrainConfig base;
    base.c = a.c;
    base.gamma = a.gamma;
    base.tol = a.tol;
    base.max_iter = a.max_iter;

    std::vector<std::string> factors;
    if (a.factor == "all")
        factors.assign(ds.schema.factor_names().begin(), ds.schema.factor_names().end());
    else
        factors.push_back(a.factor);

    const bool use_grid = !a.grid_c.empty() || !a.grid_gamma.empty();
    GridSpec grid;
    if (use_grid) {
        if (!a.grid_c.empty()) grid.c_values = parse_list(a.grid_c, "--grid-c");
        if (!a.grid_gamma.empty()) grid.gamma_values = parse_list(a.grid_gamma, "--grid-gamma");
    }

    const fs::path out = prepare_out(a.out);
    std::ofstream folds_out(out / "folds.jsonl", std::ios::binary);
    if (!folds_out) throw UserError("cannot write " + (out / "folds.jsonl").string());

    json results = json::array();
    for (const auto& factor : factors) {
        if (use_grid) {
            GridSearchResult gs = grid_search(ds, factor, kernel, grid, a.pt, plan, opts, base);
            json cells = json::array();
            for (const auto& r : gs.reports)
                cells.push_back({{"c", r.config.c},
                                 {"gamma", r.config.gamma},
                                 {"mean_accuracy", r.mean_accuracy},
                                 {"best_fold_accuracy", r.best_fold_accuracy}});
            json entry;
            entry["factor"] = factor;
            entry["mode"] = "grid";
            entry["cells"] = cells;
            entry["best"] = json::parse(report_to_json(gs.best()));
            results.push_back(entry);
            append_fold_jsonl(folds_out, gs.best(), a.features);
            std::cout << fold_summary_line(gs.best()) << "\n";
        } else {
            const EvalReport report = run_cv(ds, factor, kernel, base, a.pt, plan, opts);
            json entry;
            entry["factor"] = factor;
            entry["mode"] = "single";
            entry["report"] = json::parse(report_to_json(report));
            results.push_back(entry);
            append_fold_jsonl(folds_out, report, a.features);
            std::cout << fold_summary_line(report) << "\n";
        }
    }
    if (!folds_out) throw UserError("failed writing " + (out / "folds.jsonl").string());
    folds_out.close();
    write_text(out / "report.json", results.dump(2) + "\n");

    json config{{"schema", a.schema},   {"factor", a.factor},       {"kernel", a.kernel},
                {"features", a.features}, {"pt", a.pt},             {"folds", a.folds},
                {"seed", a.seed},       {"c", a.c},                 {"gamma", a.gamma},
                {"grid_c", a.grid_c},   {"grid_gamma", a.grid_gamma}, {"max_pairs", a.max_pairs},
                {"tol", a.tol},         {"max_iter", a.max_iter}};
    emit_manifest(out, "cv", config, {a.data}, {"report.json", "folds.jsonl"});
}

struct SuiteArgs {
    std::string data;
    std::string schema = "full";
    double pt = 0.1;
    int folds = 10;
    std::uint64_t seed = 1;
    std::string grid_c = "1,2,3,4,5";
    std::string grid_gamma = "0.1,0.5,0.75,1,2";
    std::size_t max_pairs = 0;
    double tol = 1e-4;
    int max_iter = 1000;
    std::string out = ".";
};

void run_suite(const SuiteArgs& a) {
    const FeatureSchema schema = resolve_schema(a.schema);
    const Dataset ds = load_dataset(a.data, schema);
    const FoldPlan plan = kfold_split(player_ids(ds), a.folds, a.seed);

    GridSpec grid;
    grid.c_values = parse_list(a.grid_c, "--grid-c");
    grid.gamma_values = parse_list(a.grid_gamma, "--grid-gamma");
    CvOptions opts;
    opts.max_train_pairs = a.max_pairs;
    TrainConfig base;
    base.tol = a.tol;
    base.max_iter = a.max_iter;

    const SuiteResult suite = run_experiment_suite(ds, grid, a.pt, plan, opts, base);

    const fs::path out = prepare_out(a.out);
    write_text(out / "summary.csv", suite_summary_csv(suite));
    write_text(out / "summary.json", suite_summary_json(suite) + "\n");
    std::ofstream folds_out(out / "folds.jsonl", std::ios::binary);
    if (!folds_out) throw UserError("cannot write " + (out / "folds.jsonl").string());
    for (const auto& entry : suite.entries)
        append_fold_jsonl(folds_out, entry.best, to_string(entry.feature_set));
    if (!folds_out) throw UserError("failed writing " + (out / "folds.jsonl").string());
    folds_out.close();

    json config{{"schema", a.schema},   {"pt", a.pt},
                {"folds", a.folds},     {"seed", a.seed},
                {"grid_c", a.grid_c},   {"grid_gamma", a.grid_gamma},
                {"max_pairs", a.max_pairs}, {"tol", a.tol},
                {"max_iter", a.max_iter}};
    emit_manifest(out, "suite", config, {a.data}, {"summary.csv", "summary.json", "folds.jsonl"});

    for (const auto& entry : suite.entries)
        std::cout << to_string(entry.feature_set) << ' ' << fold_summary_line(entry.best) << "\n";
}

struct RankArgs {
    std::string data;
    std::string schema = "full";
    std::string factor;
    std::string kernel = "linear";
    std::string features = "all";
    std::string method; // empty = auto
    double pt = 0.1;
    double c = 1.0;
    double gamma = 0.5;
    std::size_t top = 10;
    int zoom = 10;
    bool norm_selection = false;
    std::size_t max_pairs = 0;
    double tol = 1e-4;
    int max_iter = 1000;
    std::uint64_t seed = 1;
    std::string out = ".";
};

void run_rank(const RankArgs& a) {
    const FeatureSchema schema = resolve_schema(a.schema);
    const Dataset full = load_dataset(a.data, schema);
    const Dataset ds = select_features(full, feature_set_from_string(a.features));
    const std::size_t factor_idx = ds.schema.factor_index(a.factor);
    const Kernel kernel = kernel_from_string(a.kernel);

    const Normalizer norm = fit_normalizer(ds.records);
    const auto normalized = apply_normalizer(norm, ds.records);

    std::vector<std::vector<double>> x;
    std::vector<double> y;
    std::vector<std::string> ids;
    for (const auto& r : normalized) {
        x.push_back(r.features);
        y.push_back(r.factors[factor_idx]);
        ids.push_back(r.player_id);
    }
    PairwiseDataset pds = transform(x, y, a.pt, &ids);
    if (pds.pairs.empty()) throw UserError("no pairs cleared the threshold; cannot train");
    cap_unordered_pairs(pds, a.max_pairs, derive_seed(a.seed, {0x636170ULL}));

    TrainConfig cfg;
    cfg.c = a.c;
    cfg.gamma = a.gamma;
    cfg.tol = a.tol;
    cfg.max_iter = a.max_iter;
    RankModel model = train(pds, kernel, cfg);
    std::visit([&](auto& m) { m.schema_fingerprint = ds.schema.fingerprint(); }, model);

    const OrderMethod method =
        a.method.empty() ? (kernel == Kernel::linear ? OrderMethod::utility : OrderMethod::copeland)
                         : order_method_from_string(a.method);
    Ordering ordering = order_players(model, normalized, method);
    ordering.factor = a.factor;

    const FeatureMatrix matrix = top_bottom_matrix(ordering, ds, a.top, a.norm_selection);

    const fs::path out = prepare_out(a.out);
    write_text(out / "ordering.json", ordering_to_json(ordering) + "\n");
    write_text(out / "model.json", model_to_json(model) + "\n");
    render_report(matrix, out / "report", a.zoom);

    json config{{"schema", a.schema},   {"factor", a.factor},   {"kernel", a.kernel},
                {"features", a.features}, {"method", to_string(method)}, {"pt", a.pt},
                {"c", a.c},             {"gamma", a.gamma},     {"top", a.top},
                {"zoom", a.zoom},       {"norm_selection", a.norm_selection},
                {"max_pairs", a.max_pairs}, {"tol", a.tol},     {"max_iter", a.max_iter},
                {"seed", a.seed}};
    emit_manifest(out, "rank", config, {a.data},
                  {"ordering.json", "model.json", "report.csv", "report.pgm", "report.json"});
    std::cout << "ranked " << ordering.player_ids.size() << " players on " << a.factor << " ("
              << ordering.method << "); top: " << ordering.player_ids.front() << "\n";
}

std::string error_line(const std::string& type, const std::string& message) {
    json j{{"type", type}, {"message", message}};
    return j.dump();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Motivation ranking toolkit: preference learning over player telemetry"};
    app.require_subcommand(1);

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset with known ground truth");
    synth->add_option("--n", synth_args.n, "Number of players")->capture_default_str();
    synth->add_option("--seed", synth_args.seed, "Generator seed")->capture_default_str();
    synth->add_option("--schema", synth_args.schema, "full, metrics, or a schema JSON path")
        ->capture_default_str();
    synth->add_option("--latent", synth_args.latent, "Latent utility kind: linear or radial")
        ->capture_default_str();
    synth->add_option("--latent-file", synth_args.latent_file, "Latent spec JSON (overrides --latent)");
    synth->add_option("--noise", synth_args.noise, "Noise sigma added to the latent utility")
        ->capture_default_str();
    synth->add_option("--out", synth_args.out, "Output directory")->capture_default_str();
    synth->callback([&] { run_synth(synth_args); });

    IngestArgs ingest_args;
    auto* ingest = app.add_subcommand("ingest", "Load a dataset CSV, optionally joining survey scores");
    ingest->add_option("--data", ingest_args.data, "Dataset CSV")->required();
    ingest->add_option("--survey", ingest_args.survey, "Survey responses CSV (per-item answers)");
    ingest->add_option("--mapping", ingest_args.mapping, "Survey mapping JSON (default built-in)");
    ingest->add_option("--schema", ingest_args.schema, "full, metrics, or a schema JSON path")
        ->capture_default_str();
    ingest->add_option("--out", ingest_args.out, "Output directory")->capture_default_str();
    ingest->callback([&] { run_ingest(ingest_args); });

    CleanArgs clean_args;
    auto* clean_cmd = app.add_subcommand("clean", "Drop invalid records and outliers");
    clean_cmd->add_option("--data", clean_args.data, "Dataset CSV")->required();
    clean_cmd->add_option("--schema", clean_args.schema, "full, metrics, or a schema JSON path")
        ->capture_default_str();
    clean_cmd->add_option("--outlier", clean_args.outlier, "none, iqr:K or zscore:K")
        ->capture_default_str();
    clean_cmd->add_option("--out", clean_args.out, "Output directory")->capture_default_str();
    clean_cmd->callback([&] { run_clean(clean_args); });

    ClusterArgs cluster_args;
    auto* cluster = app.add_subcommand("cluster", "Derive play-style categories via k-means");
    cluster->add_option("--data", cluster_args.data, "Cleaned dataset CSV")->required();
    cluster->add_option("--schema", cluster_args.schema, "full, metrics, or a schema JSON path")
        ->capture_default_str();
    cluster->add_option("--k", cluster_args.k, "Cluster count")->capture_default_str();
    cluster->add_option("--seed", cluster_args.seed, "Seed")->capture_default_str();
    cluster->add_option("--max-iter", cluster_args.max_iter, "Lloyd iteration cap")
        ->capture_default_str();
    cluster->add_option("--restarts", cluster_args.restarts, "Independent restarts")
        ->capture_default_str();
    cluster->add_option("--names", cluster_args.names, "Four style column names")->delimiter(',');
    cluster->add_option("--out", cluster_args.out, "Output directory")->capture_default_str();
    cluster->callback([&] { run_cluster(cluster_args); });

    TransformArgs transform_args;
    auto* transform_cmd =
        app.add_subcommand("transform", "Dump the pairwise preference transformation");
    transform_cmd->add_option("--data", transform_args.data, "Dataset CSV")->required();
    transform_cmd->add_option("--schema", transform_args.schema, "full, metrics, or a schema JSON path")
        ->capture_default_str();
    transform_cmd->add_option("--factor", transform_args.factor, "Factor to transform on")
        ->required();
    transform_cmd->add_option("--features", transform_args.features, "styles, metrics or all")
        ->capture_default_str();
    transform_cmd->add_option("--pt", transform_args.pt, "Preference threshold")
        ->capture_default_str();
    transform_cmd->add_flag("--no-normalize", transform_args.no_normalize,
                            "Emit raw (not z-normalized) differences");
    transform_cmd->add_option("--out", transform_args.out, "Output directory")->capture_default_str();
    transform_cmd->callback([&] { run_transform(transform_args); });

    CvArgs cv_args;
    auto* cv_cmd = app.add_subcommand("cv", "Cross-validated evaluation of one kernel/factor");
    cv_cmd->add_option("--data", cv_args.data, "Dataset CSV")->required();
    cv_cmd->add_option("--schema", cv_args.schema, "full, metrics, or a schema JSON path")
        ->capture_default_str();
    cv_cmd->add_option("--factor", cv_args.factor, "Factor name or 'all'")->required();
    cv_cmd->add_option("--kernel", cv_args.kernel, "linear or rbf")->capture_default_str();
    cv_cmd->add_option("--features", cv_args.features, "styles, metrics or all")
        ->capture_default_str();
    cv_cmd->add_option("--pt", cv_args.pt, "Preference threshold")->capture_default_str();
    cv_cmd->add_option("--folds", cv_args.folds, "Fold count")->capture_default_str();
    cv_cmd->add_option("--seed", cv_args.seed, "Fold split seed")->capture_default_str();
    cv_cmd->add_option("--c", cv_args.c, "SVM C (single-cell mode)")->capture_default_str();
    cv_cmd->add_option("--gamma", cv_args.gamma, "RBF gamma (single-cell mode)")
        ->capture_default_str();
    cv_cmd->add_option("--grid-c", cv_args.grid_c, "Comma-separated C grid (enables grid search)");
    cv_cmd->add_option("--grid-gamma", cv_args.grid_gamma, "Comma-separated gamma grid");
    cv_cmd->add_option("--max-pairs", cv_args.max_pairs,
                       "Cap on unordered training pairs per fold (0 = unlimited)")
        ->capture_default_str();
    cv_cmd->add_option("--tol", cv_args.tol, "Solver KKT tolerance")->capture_default_str();
    cv_cmd->add_option("--max-iter", cv_args.max_iter, "Solver sweep cap")->capture_default_str();
    cv_cmd->add_option("--out", cv_args.out, "Output directory")->capture_default_str();
    cv_cmd->callback([&] { run_cv_cmd(cv_args); });

    SuiteArgs suite_args;
    auto* suite = app.add_subcommand(
        "suite", "Full protocol: 3 feature sets x 2 kernels x 4 factors, grid-searched");
    suite->add_option("--data", suite_args.data, "Dataset CSV")->required();
    suite->add_option("--schema", suite_args.schema, "full, metrics, or a schema JSON path")
        ->capture_default_str();
    suite->add_option("--pt", suite_args.pt, "Preference threshold")->capture_default_str();
    suite->add_option("--folds", suite_args.folds, "Fold count")->capture_default_str();
    suite->add_option("--seed", suite_args.seed, "Fold split seed")->capture_default_str();
    suite->add_option("--grid-c", suite_args.grid_c, "Comma-separated C grid")
        ->capture_default_str();
    suite->add_option("--grid-gamma", suite_args.grid_gamma, "Comma-separated gamma grid")
        ->capture_default_str();
    suite->add_option("--max-pairs", suite_args.max_pairs,
                      "Cap on unordered training pairs per fold (0 = unlimited)")
        ->capture_default_str();
    suite->add_option("--tol", suite_args.tol, "Solver KKT tolerance")->capture_default_str();
    suite->add_option("--max-iter", suite_args.max_iter, "Solver sweep cap")->capture_default_str();
    suite->add_option("--out", suite_args.out, "Output directory")->capture_default_str();
    suite->callback([&] { run_suite(suite_args); });

    RankArgs rank_args;
    auto* rank = app.add_subcommand("rank", "Train on all players and report a global ordering");
    rank->add_option("--data", rank_args.data, "Cleaned dataset CSV")->required();
    rank->add_option("--schema", rank_args.schema, "full, metrics, or a schema JSON path")
        ->capture_default_str();
    rank->add_option("--factor", rank_args.factor, "Factor to rank on")->required();
    rank->add_option("--kernel", rank_args.kernel, "linear or rbf")->capture_default_str();
    rank->add_option("--features", rank_args.features, "styles, metrics or all")
        ->capture_default_str();
    rank->add_option("--method", rank_args.method,
                     "utility or copeland (default: utility for linear, copeland for rbf)");
    rank->add_option("--pt", rank_args.pt, "Preference threshold")->capture_default_str();
    rank->add_option("--c", rank_args.c, "SVM C")->capture_default_str();
    rank->add_option("--gamma", rank_args.gamma, "RBF gamma")->capture_default_str();
    rank->add_option("--top", rank_args.top, "Players shown from each end of the ranking")
        ->capture_default_str();
    rank->add_option("--zoom", rank_args.zoom, "PGM cell size in pixels")->capture_default_str();
    rank->add_flag("--norm-selection", rank_args.norm_selection,
                   "Min-max normalize over the shown players instead of the whole dataset");
    rank->add_option("--max-pairs", rank_args.max_pairs,
                     "Cap on unordered training pairs (0 = unlimited)")
        ->capture_default_str();
    rank->add_option("--tol", rank_args.tol, "Solver KKT tolerance")->capture_default_str();
    rank->add_option("--max-iter", rank_args.max_iter, "Solver sweep cap")->capture_default_str();
    rank->add_option("--seed", rank_args.seed, "Seed for the pair cap subsample")
        ->capture_default_str();
    rank->add_option("--out", rank_args.out, "Output directory")->capture_default_str();
    rank->callback([&] { run_rank(rank_args); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help and friends
        std::cerr << error_line("user", e.what()) << std::endl;
        return 1;
    } catch (const UserError& e) {
        std::cerr << error_line("user", e.what()) << std::endl;
        return 1;
    } catch (const std::exception& e) {
        std::cerr << error_line("internal", e.what()) << std::endl;
        return 2;
    }
    return 0;
}
