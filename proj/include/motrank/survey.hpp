#pragma once

#include "motrank/dataset.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace motrank {

struct SurveyItem {
    std::string item_id;
    std::string factor;
    bool reverse_scored = false;
};

/// Maps Likert items to the four factors. The factor order here defines the
/// order of aggregated scores.
struct SurveyMapping {
    std::vector<SurveyItem> items;
    std::array<std::string, 4> factor_names{"competence", "autonomy", "relatedness", "presence"};

    std::string to_json_string() const;
    static SurveyMapping from_json_string(const std::string& text);
    static SurveyMapping load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;
};

/// 24 placeholder items: 7 per need factor, 3 for presence, no reversals.
/// Synthetic stand-in; real studies must supply their instrument's mapping.
SurveyMapping default_mapping();

struct SurveyResponse {
    std::string player_id;
    std::map<std::string, int> answers; // item_id -> 1..5
};

/// Per factor, the arithmetic mean of its items' answers, reverse-scored
/// items flipped (v -> 6-v) first. Throws UserError on a missing item or an
/// answer outside 1..5.
std::array<double, 4> aggregate_factor_scores(const SurveyResponse& resp,
                                              const SurveyMapping& mapping);

/// Diagnostic: duplicate item ids, factors with no items, and (when given)
/// a total item count mismatch. Empty result means the mapping is usable.
std::vector<std::string> validate_mapping(const SurveyMapping& mapping,
                                          std::optional<std::size_t> expected_items = {});

/// CSV with header "player_id" then item ids; one row per respondent.
std::vector<SurveyResponse> load_responses_csv(const std::filesystem::path& path);

/// Fills the factor columns of a features-only dataset from survey
/// responses. Every record must have a response; factor ordering must match
/// the dataset schema.
Dataset attach_survey_factors(const Dataset& ds, const std::vector<SurveyResponse>& responses,
                              const SurveyMapping& mapping);

} // namespace motrank
