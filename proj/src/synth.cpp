#include "motrank/synth.hpp"

#include "motrank/error.hpp"
#include "motrank/random.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace motrank {

using nlohmann::json;

namespace {

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

void validate_spec(const LatentSpec& spec, std::size_t dim) {
    if (!std::isfinite(spec.noise_sigma) || spec.noise_sigma < 0.0)
        throw UserError("noise_sigma must be finite and >= 0");
    switch (spec.kind) {
    case LatentSpec::Kind::linear:
        if (spec.v.size() != dim)
            throw UserError("linear latent has " + std::to_string(spec.v.size()) +
                            " weights for " + std::to_string(dim) + " features");
        break;
    case LatentSpec::Kind::radial:
        if (spec.center.size() != dim)
            throw UserError("radial latent center has " + std::to_string(spec.center.size()) +
                            " components for " + std::to_string(dim) + " features");
        break;
    case LatentSpec::Kind::custom:
        if (spec.table.size() != 4)
            throw UserError("custom latent needs one weight row per factor (4)");
        for (const auto& row : spec.table)
            if (row.size() != dim)
                throw UserError("custom latent row width does not match feature count");
        break;
    }
}

} // namespace

double latent_utility(const LatentSpec& spec, const std::vector<double>& x,
                      std::size_t factor_idx) {
    validate_spec(spec, x.size());
    switch (spec.kind) {
    case LatentSpec::Kind::linear: {
        double s = 0.0;
        for (std::size_t f = 0; f < x.size(); ++f) s += spec.v[f] * x[f];
        return s;
    }
    case LatentSpec::Kind::radial: {
        double s = 0.0;
        for (std::size_t f = 0; f < x.size(); ++f) {
            const double d = x[f] - spec.center[f];
            s += d * d;
        }
        return -s;
    }
    case LatentSpec::Kind::custom: {
        if (factor_idx >= spec.table.size()) throw UserError("factor index out of range");
        double s = 0.0;
        for (std::size_t f = 0; f < x.size(); ++f) s += spec.table[factor_idx][f] * x[f];
        return s;
    }
    }
    throw Error("unreachable latent kind");
}

Dataset generate(std::size_t n, const FeatureSchema& schema, const LatentSpec& spec) {
    if (n < 2) throw UserError("need at least 2 players");
    validate_spec(spec, schema.size());

    const auto exclusive = schema.indices_of(FeatureKind::exclusive_category);
    Rng rng(derive_seed(spec.seed, {0x73796e7468ULL})); // "synth"

    std::size_t width = 1;
    for (std::size_t v = n; v >= 10; v /= 10) ++width;

    Dataset ds;
    ds.schema = schema;
    ds.records.reserve(n);
    for (std::size_t p = 0; p < n; ++p) {
        PlayerRecord rec;
        std::string num = std::to_string(p + 1);
        rec.player_id = "p" + std::string(width - std::min(width, num.size()), '0') + num;

        rec.features.resize(schema.size(), 0.0);
        for (std::size_t f = 0; f < schema.size(); ++f) {
            switch (schema.features()[f].kind) {
            case FeatureKind::continuous:
                rec.features[f] = rng.uniform01();
                break;
            case FeatureKind::binary_flag:
                rec.features[f] = static_cast<double>(rng.below(2));
                break;
            case FeatureKind::exclusive_category:
                break; // drawn once per player below
            }
        }
        if (!exclusive.empty())
            rec.features[exclusive[rng.below(exclusive.size())]] = 1.0;

        for (std::size_t factor = 0; factor < 4; ++factor) {
            double u = latent_utility(spec, rec.features, factor);
            if (spec.noise_sigma > 0.0) u += rng.normal(0.0, spec.noise_sigma);
            rec.factors[factor] = std::clamp(1.0 + 4.0 * sigmoid(u), 1.0, 5.0);
        }
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

LatentSpec random_linear_spec(const FeatureSchema& schema, std::uint64_t seed,
                              double noise_sigma) {
    LatentSpec spec;
    spec.kind = LatentSpec::Kind::linear;
    spec.seed = seed;
    spec.noise_sigma = noise_sigma;
    Rng rng(derive_seed(seed, {0x6c696e656172ULL})); // "linear"
    spec.v.resize(schema.size());
    for (auto& w : spec.v) w = rng.uniform(-1.0, 1.0);
    return spec;
}

LatentSpec random_radial_spec(const FeatureSchema& schema, std::uint64_t seed,
                              double noise_sigma) {
    LatentSpec spec;
    spec.kind = LatentSpec::Kind::radial;
    spec.seed = seed;
    spec.noise_sigma = noise_sigma;
    Rng rng(derive_seed(seed, {0x72616469616cULL})); // "radial"
    spec.center.resize(schema.size());
    for (auto& c : spec.center) c = rng.uniform(0.0, 1.0);
    return spec;
}

double oracle_pair_accuracy(const RankModel& model, const Dataset& ds, const LatentSpec& spec,
                            std::size_t factor_idx, const Normalizer* norm) {
    const std::size_t n = ds.records.size();
    if (n < 2) throw UserError("oracle needs at least 2 players");

    std::vector<std::vector<double>> inputs;
    std::vector<double> u(n);
    inputs.reserve(n);
    for (std::size_t p = 0; p < n; ++p) {
        const auto& x = ds.records[p].features;
        u[p] = latent_utility(spec, x, factor_idx);
        inputs.push_back(norm ? apply_normalizer(*norm, x) : x);
    }

    double correct = 0.0;
    std::size_t evaluated = 0;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            if (u[a] == u[b]) continue;
            const Preference pred = predict_preference(model, inputs[a], inputs[b]);
            const Winner truth = u[a] > u[b] ? Winner::a_preferred : Winner::b_preferred;
            if (pred.winner == truth) correct += 1.0;
            else if (pred.winner == Winner::tie) correct += 0.5;
            ++evaluated;
        }
    }
    if (evaluated == 0) throw UserError("no player pairs with distinct latent utilities");
    return correct / static_cast<double>(evaluated);
}

std::string latent_spec_to_json(const LatentSpec& spec) {
    json j;
    switch (spec.kind) {
    case LatentSpec::Kind::linear: j["kind"] = "linear"; break;
    case LatentSpec::Kind::radial: j["kind"] = "radial"; break;
    case LatentSpec::Kind::custom: j["kind"] = "custom"; break;
    }
    j["v"] = spec.v;
    j["center"] = spec.center;
    j["table"] = spec.table;
    j["noise_sigma"] = spec.noise_sigma;
    j["seed"] = spec.seed;
    return j.dump();
}

LatentSpec latent_spec_from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw UserError("latent spec file is not valid JSON");
    LatentSpec spec;
    const std::string kind = j.value("kind", "linear");
    if (kind == "linear") spec.kind = LatentSpec::Kind::linear;
    else if (kind == "radial") spec.kind = LatentSpec::Kind::radial;
    else if (kind == "custom") spec.kind = LatentSpec::Kind::custom;
    else throw UserError("unknown latent kind: " + kind);
    spec.v = j.value("v", std::vector<double>{});
    spec.center = j.value("center", std::vector<double>{});
    spec.table = j.value("table", std::vector<std::vector<double>>{});
    spec.noise_sigma = j.value("noise_sigma", 0.0);
    spec.seed = j.value("seed", std::uint64_t{0});
    return spec;
}

} // namespace motrank
