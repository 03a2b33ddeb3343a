#pragma once

#include "motrank/dataset.hpp"
#include "motrank/svm.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace motrank {

enum class OrderMethod { utility, copeland };

std::string to_string(OrderMethod m);
OrderMethod order_method_from_string(const std::string& s);

/// Global per-factor ranking, best first. Scores are w.x for the utility
/// method and Copeland points for the round-robin method; both are
/// non-increasing down the ranking.
struct Ordering {
    std::vector<std::string> player_ids;
    std::vector<double> scores;
    std::string method;
    std::string factor; ///< metadata, set by the caller
};

/// utility: sort by w.x descending (linear models only; throws UserError for
/// kernel models). copeland: round-robin predict_preference over all
/// unordered pairs, 1 point per win and 0.5 per tie; ties in points break by
/// summed margins, then player_id. Records must already be normalized with
/// the model's training normalizer.
Ordering order_players(const RankModel& model, const std::vector<PlayerRecord>& records,
                       OrderMethod method);

std::string ordering_to_json(const Ordering& ordering);

/// Feature rows x selected player columns, min-max normalized per feature.
struct FeatureMatrix {
    std::vector<std::string> feature_names; ///< row labels
    std::vector<std::string> player_ids;    ///< column labels, ranking order
    std::vector<double> scores;             ///< ranking scores, parallel to columns
    std::vector<std::vector<double>> values; ///< [row][col], in [0, 1]
    std::string method;
    std::string factor;
    std::size_t top_k = 0;
};

/// First k and last k players of the ordering as columns. Each feature row
/// is min-max normalized over the whole dataset by default (constant rows
/// become 0); pass normalize_over_selection to use only the shown players'
/// range instead.
FeatureMatrix top_bottom_matrix(const Ordering& ordering, const Dataset& ds, std::size_t k,
                                bool normalize_over_selection = false);

struct PgmImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels; ///< row-major
};

PgmImage read_pgm(const std::filesystem::path& path);

/// Writes stem.csv (full-precision matrix), stem.pgm (8-bit binary grayscale,
/// pixel = 255 - round(255 * value) so darker means higher, each cell a
/// zoom x zoom block) and stem.json (ranking metadata sidecar).
void render_report(const FeatureMatrix& matrix, const std::filesystem::path& stem, int zoom = 10);

} // namespace motrank
