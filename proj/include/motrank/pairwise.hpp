#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace motrank {

/// One signed difference vector. Every unordered source pair that clears the
/// preference threshold contributes two of these: (d, +1) and (-d, -1), both
/// carrying the same (i, j) source indices with i the higher-scored row.
struct PreferencePair {
    std::vector<double> diff;
    int label = 0; // +1 or -1
    std::size_t i = 0;
    std::size_t j = 0;
};

struct PairwiseDataset {
    std::vector<PreferencePair> pairs;
    double pt_used = 0.0;
    std::size_t n_source_players = 0;
    std::vector<std::string> source_ids; // optional, parallel to transform input rows
};

/// Pairwise preference transformation. For each unordered row pair {i, j}
/// with scores y_hi >= y_lo, the mirrored difference pair is emitted iff
/// (y_hi - y_lo) > pt * y_lo; exact ties never emit. If y_lo <= 0 the test
/// degenerates to y_hi > y_lo. Output is ordered by (i, j), the +1 entry
/// before its mirror.
PairwiseDataset transform(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                          double pt, const std::vector<std::string>* ids = nullptr);

struct RetentionStats {
    double kept_fraction = 0.0;
    std::size_t kept_pairs = 0; // mirrored datapoints, max n*(n-1)
};

RetentionStats retention_stats(const PairwiseDataset& pds);

/// CSV dump: source ids (or row indices), label, then diff components.
void write_pairs_csv(const PairwiseDataset& pds, const std::vector<std::string>& feature_names,
                     const std::filesystem::path& path);

} // namespace motrank
