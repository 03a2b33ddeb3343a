#pragma once

#include "motrank/dataset.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace motrank {

struct ClusterModel {
    std::size_t k = 0;
    std::uint64_t seed = 0;
    double inertia = 0.0;
    std::vector<std::vector<double>> centroids;
    std::map<std::string, int> assignments; ///< player_id -> cluster index
};

/// Lloyd's algorithm with k-means++ seeding, run `restarts` times with
/// derived seeds; the lowest-inertia run wins (ties keep the earliest).
/// Empty clusters are re-seeded from the point farthest from its centroid.
/// Records are clustered on their feature vectors as given; normalize first.
ClusterModel kmeans_fit(const std::vector<PlayerRecord>& records, std::size_t k,
                        std::uint64_t seed, int max_iter = 100, int restarts = 10);

/// Appends one exclusive one-hot column per style name, set from the model's
/// assignments. Requires model.k == names.size() and an assignment for every
/// player in the dataset.
Dataset assign_styles(const ClusterModel& model, const Dataset& ds,
                      const std::array<std::string, 4>& names);

std::string cluster_model_to_json(const ClusterModel& model);
ClusterModel cluster_model_from_json(const std::string& text);

} // namespace motrank
