#pragma once

#include "motrank/dataset.hpp"
#include "motrank/random.hpp"
#include "motrank/synth.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace motrank::testing {

/// Temporary directory removed on scope exit.
class TempDir {
public:
    TempDir() {
        auto base = std::filesystem::temp_directory_path();
        for (int attempt = 0; attempt < 100; ++attempt) {
            auto candidate = base / ("motrank_test_" + std::to_string(std::rand()) + "_" +
                                     std::to_string(attempt));
            std::error_code ec;
            if (std::filesystem::create_directory(candidate, ec)) {
                path_ = candidate;
                return;
            }
        }
        throw std::runtime_error("could not create temp dir");
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

/// Minimal all-continuous schema with the canonical factor names.
inline FeatureSchema tiny_schema(std::size_t dim) {
    std::vector<FeatureSpec> specs;
    for (std::size_t f = 0; f < dim; ++f)
        specs.push_back({"f" + std::to_string(f), FeatureKind::continuous});
    return FeatureSchema(std::move(specs), {"competence", "autonomy", "relatedness", "presence"});
}

/// Dataset whose players sit on k shared prototype feature vectors, scored by
/// a radial utility centered mid-cube. Difference vectors repeat across such
/// a cloud, which is what lets a kernel model learn a non-linear preference
/// that no linear weighting can express.
inline Dataset clustered_radial_dataset(std::size_t n, std::size_t k_protos, std::size_t dim,
                                        std::uint64_t seed, LatentSpec& spec_out) {
    Rng rng(derive_seed(seed, {0x70726f746fULL})); // "proto"
    std::vector<std::vector<double>> protos(k_protos, std::vector<double>(dim));
    for (auto& p : protos)
        for (auto& v : p) v = rng.uniform01();

    LatentSpec spec;
    spec.kind = LatentSpec::Kind::radial;
    spec.center.assign(dim, 0.5);
    spec.seed = seed;
    spec_out = spec;

    Dataset ds;
    ds.schema = tiny_schema(dim);
    for (std::size_t p = 0; p < n; ++p) {
        PlayerRecord rec;
        rec.player_id = "p" + std::to_string(p + 1);
        rec.features = protos[p % k_protos];
        const double u = latent_utility(spec, rec.features, 0);
        const double y = 1.0 + 4.0 / (1.0 + std::exp(-u));
        rec.factors = {y, y, y, y};
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

inline std::vector<std::string> ids_of(const Dataset& ds) {
    std::vector<std::string> ids;
    for (const auto& r : ds.records) ids.push_back(r.player_id);
    return ids;
}

} // namespace motrank::testing
