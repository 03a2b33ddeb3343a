#include "motrank/clustering.hpp"

#include "motrank/error.hpp"
#include "motrank/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

namespace motrank {

using nlohmann::json;

namespace {

double sqdist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t f = 0; f < a.size(); ++f) {
        const double d = a[f] - b[f];
        s += d * d;
    }
    return s;
}

std::vector<std::vector<double>> seed_centroids(const std::vector<std::vector<double>>& points,
                                                std::size_t k, Rng& rng) {
    std::vector<std::vector<double>> centroids;
    centroids.reserve(k);
    centroids.push_back(points[rng.below(points.size())]);

    std::vector<double> d2(points.size());
    while (centroids.size() < k) {
        double total = 0.0;
        for (std::size_t p = 0; p < points.size(); ++p) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& c : centroids) best = std::min(best, sqdist(points[p], c));
            d2[p] = best;
            total += best;
        }
        std::size_t chosen;
        if (total > 0.0) {
            const double target = rng.uniform01() * total;
            double cum = 0.0;
            chosen = points.size() - 1;
            for (std::size_t p = 0; p < points.size(); ++p) {
                cum += d2[p];
                if (cum > target) {
                    chosen = p;
                    break;
                }
            }
        } else {
            // All remaining points coincide with a centroid; any pick works.
            chosen = rng.below(points.size());
        }
        centroids.push_back(points[chosen]);
    }
    return centroids;
}

struct LloydResult {
    std::vector<std::vector<double>> centroids;
    std::vector<int> assignment;
    double inertia = 0.0;
};

LloydResult lloyd(const std::vector<std::vector<double>>& points, std::size_t k, Rng& rng,
                  int max_iter) {
    const std::size_t n = points.size();
    const std::size_t dim = points.front().size();
    auto centroids = seed_centroids(points, k, rng);
    std::vector<int> assignment(n, -1);

    for (int iter = 0; iter < max_iter; ++iter) {
        bool changed = false;
        for (std::size_t p = 0; p < n; ++p) {
            int best = 0;
            double best_d = sqdist(points[p], centroids[0]);
            for (std::size_t c = 1; c < k; ++c) {
                const double d = sqdist(points[p], centroids[c]);
                if (d < best_d) {
                    best_d = d;
                    best = static_cast<int>(c);
                }
            }
            if (assignment[p] != best) {
                assignment[p] = best;
                changed = true;
            }
        }

        std::vector<std::size_t> counts(k, 0);
        for (int a : assignment) ++counts[static_cast<std::size_t>(a)];
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0) continue;
            // Re-seed the empty cluster from the point farthest from its
            // current centroid, excluding points that are sole members.
            double far_d = -1.0;
            std::size_t far_p = 0;
            for (std::size_t p = 0; p < n; ++p) {
                const auto owner = static_cast<std::size_t>(assignment[p]);
                if (counts[owner] <= 1) continue;
                const double d = sqdist(points[p], centroids[owner]);
                if (d > far_d) {
                    far_d = d;
                    far_p = p;
                }
            }
            --counts[static_cast<std::size_t>(assignment[far_p])];
            assignment[far_p] = static_cast<int>(c);
            counts[c] = 1;
            centroids[c] = points[far_p];
            changed = true;
        }

        std::vector<std::vector<double>> next(k, std::vector<double>(dim, 0.0));
        for (std::size_t p = 0; p < n; ++p) {
            auto& acc = next[static_cast<std::size_t>(assignment[p])];
            for (std::size_t f = 0; f < dim; ++f) acc[f] += points[p][f];
        }
        for (std::size_t c = 0; c < k; ++c)
            for (std::size_t f = 0; f < dim; ++f) next[c][f] /= static_cast<double>(counts[c]);
        centroids = std::move(next);
        if (!changed) break;
    }

    LloydResult res;
    res.centroids = std::move(centroids);
    res.assignment = std::move(assignment);
    for (std::size_t p = 0; p < n; ++p)
        res.inertia += sqdist(points[p], res.centroids[static_cast<std::size_t>(res.assignment[p])]);
    return res;
}

} // namespace

ClusterModel kmeans_fit(const std::vector<PlayerRecord>& records, std::size_t k,
                        std::uint64_t seed, int max_iter, int restarts) {
    if (records.empty()) throw UserError("cannot cluster an empty dataset");
    if (k == 0 || k > records.size())
        throw UserError("k must be in [1, n]; got k=" + std::to_string(k) + " with n=" +
                        std::to_string(records.size()));
    if (max_iter < 1) throw UserError("max_iter must be >= 1");
    if (restarts < 1) throw UserError("restarts must be >= 1");

    std::vector<std::vector<double>> points;
    points.reserve(records.size());
    for (const auto& r : records) {
        if (!r.features.empty() && r.features.size() != records.front().features.size())
            throw UserError("ragged feature vectors in clustering input");
        points.push_back(r.features);
    }

    LloydResult best;
    bool have = false;
    for (int restart = 0; restart < restarts; ++restart) {
        Rng rng(derive_seed(seed, {0x6b6d65616e73ULL, static_cast<std::uint64_t>(restart)}));
        LloydResult run = lloyd(points, k, rng, max_iter);
        if (!have || run.inertia < best.inertia) {
            best = std::move(run);
            have = true;
        }
    }

    ClusterModel model;
    model.k = k;
    model.seed = seed;
    model.inertia = best.inertia;
    model.centroids = std::move(best.centroids);
    for (std::size_t p = 0; p < records.size(); ++p)
        model.assignments[records[p].player_id] = best.assignment[p];
    return model;
}

Dataset assign_styles(const ClusterModel& model, const Dataset& ds,
                      const std::array<std::string, 4>& names) {
    if (model.k != names.size())
        throw UserError("cluster model has k=" + std::to_string(model.k) + ", but " +
                        std::to_string(names.size()) + " style names were given");

    std::vector<FeatureSpec> specs = ds.schema.features();
    for (const auto& name : names) {
        for (const auto& existing : specs)
            if (existing.name == name)
                throw UserError("style column already exists in schema: " + name);
        specs.push_back({name, FeatureKind::exclusive_category});
    }

    Dataset out;
    out.schema = FeatureSchema(std::move(specs), ds.schema.factor_names());
    out.records = ds.records;
    for (auto& r : out.records) {
        auto it = model.assignments.find(r.player_id);
        if (it == model.assignments.end())
            throw UserError("no cluster assignment for player: " + r.player_id);
        if (it->second < 0 || static_cast<std::size_t>(it->second) >= names.size())
            throw UserError("cluster index out of range for player: " + r.player_id);
        for (std::size_t c = 0; c < names.size(); ++c)
            r.features.push_back(c == static_cast<std::size_t>(it->second) ? 1.0 : 0.0);
    }
    return out;
}

std::string cluster_model_to_json(const ClusterModel& model) {
    json j;
    j["k"] = model.k;
    j["seed"] = model.seed;
    j["inertia"] = model.inertia;
    j["centroids"] = model.centroids;
    j["assignments"] = model.assignments;
    return j.dump();
}

ClusterModel cluster_model_from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw UserError("cluster model file is not valid JSON");
    ClusterModel model;
    model.k = j.at("k").get<std::size_t>();
    model.seed = j.at("seed").get<std::uint64_t>();
    model.inertia = j.at("inertia").get<double>();
    model.centroids = j.at("centroids").get<std::vector<std::vector<double>>>();
    model.assignments = j.at("assignments").get<std::map<std::string, int>>();
    return model;
}

} // namespace motrank
