#pragma once

#include "motrank/dataset.hpp"
#include "motrank/pipeline.hpp"
#include "motrank/svm.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace motrank {

/// Generator blueprint with a known ground-truth utility, so model quality
/// can be checked against an exact oracle instead of survey data.
struct LatentSpec {
    enum class Kind { linear, radial, custom };

    Kind kind = Kind::linear;
    std::vector<double> v;                  ///< linear weights over features
    std::vector<double> center;             ///< radial: u(x) = -||x - center||^2
    std::vector<std::vector<double>> table; ///< custom: one weight row per factor
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
};

/// Latent utility of a raw (unnormalized) feature vector for one factor.
/// linear and radial share one utility across all four factors; custom uses
/// its per-factor weight rows.
double latent_utility(const LatentSpec& spec, const std::vector<double>& x,
                      std::size_t factor_idx = 0);

/// Samples n players: continuous features uniform [0,1], binary flags fair
/// coin, the exclusive group one-hot uniform. Factor scores are
/// clamp(1 + 4*sigmoid(u(x) + eps), 1, 5) with eps ~ Normal(0, noise_sigma^2),
/// a monotone squashing that preserves the latent ordering exactly when
/// noise_sigma = 0. Pure function of (n, schema, spec).
Dataset generate(std::size_t n, const FeatureSchema& schema, const LatentSpec& spec);

/// Convenience constructors with seed-derived parameters (weights uniform in
/// [-1,1], center uniform in [0,1]); deterministic in the seed.
LatentSpec random_linear_spec(const FeatureSchema& schema, std::uint64_t seed,
                              double noise_sigma = 0.0);
LatentSpec random_radial_spec(const FeatureSchema& schema, std::uint64_t seed,
                              double noise_sigma = 0.0);

/// Exhaustive check of a trained model against the generator's ground truth:
/// the fraction of unordered player pairs with distinct latent utilities
/// whose predicted preference matches the latent ordering (ties credit 0.5).
/// When `norm` is given, model inputs are normalized through it while the
/// latent utility is always evaluated on the raw features.
double oracle_pair_accuracy(const RankModel& model, const Dataset& ds, const LatentSpec& spec,
                            std::size_t factor_idx = 0, const Normalizer* norm = nullptr);

std::string latent_spec_to_json(const LatentSpec& spec);
LatentSpec latent_spec_from_json(const std::string& text);

} // namespace motrank
