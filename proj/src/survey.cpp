#include "motrank/survey.hpp"

#include "motrank/csv.hpp"
#include "motrank/error.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace motrank {

using nlohmann::json;

std::string SurveyMapping::to_json_string() const {
    json j;
    j["factors"] = factor_names;
    j["items"] = json::array();
    for (const auto& it : items)
        j["items"].push_back({{"item_id", it.item_id},
                              {"factor", it.factor},
                              {"reverse_scored", it.reverse_scored}});
    return j.dump(2);
}

SurveyMapping SurveyMapping::from_json_string(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw UserError("mapping file is not valid JSON");
    SurveyMapping m;
    if (j.contains("factors")) {
        auto f = j["factors"].get<std::vector<std::string>>();
        if (f.size() != 4) throw UserError("mapping must declare exactly 4 factors");
        m.factor_names = {f[0], f[1], f[2], f[3]};
    }
    const json& items = j.contains("items") ? j["items"] : j;
    if (!items.is_array()) throw UserError("mapping items must be a JSON array");
    for (const auto& it : items) {
        SurveyItem si;
        si.item_id = it.at("item_id").get<std::string>();
        si.factor = it.at("factor").get<std::string>();
        si.reverse_scored = it.value("reverse_scored", false);
        m.items.push_back(std::move(si));
    }
    return m;
}

SurveyMapping SurveyMapping::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UserError("cannot open mapping file: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_string(ss.str());
}

void SurveyMapping::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw UserError("cannot write mapping file: " + path.string());
    out << to_json_string() << "\n";
}

SurveyMapping default_mapping() {
    SurveyMapping m;
    auto add = [&](char prefix, const std::string& factor, int count) {
        for (int i = 1; i <= count; ++i)
            m.items.push_back({std::string(1, prefix) + std::to_string(i), factor, false});
    };
    add('c', "competence", 7);
    add('a', "autonomy", 7);
    add('r', "relatedness", 7);
    add('p', "presence", 3);
    return m;
}

std::array<double, 4> aggregate_factor_scores(const SurveyResponse& resp,
                                              const SurveyMapping& mapping) {
    std::array<double, 4> sums{};
    std::array<int, 4> counts{};
    for (const auto& item : mapping.items) {
        std::size_t fi = 4;
        for (std::size_t i = 0; i < 4; ++i)
            if (mapping.factor_names[i] == item.factor) fi = i;
        if (fi == 4) throw UserError("mapping item " + item.item_id +
                                     " names unknown factor: " + item.factor);
        auto found = resp.answers.find(item.item_id);
        if (found == resp.answers.end())
            throw UserError("response " + resp.player_id + " is missing item " + item.item_id);
        int v = found->second;
        if (v < 1 || v > 5)
            throw UserError("response " + resp.player_id + " item " + item.item_id +
                            " out of range: " + std::to_string(v));
        if (item.reverse_scored) v = 6 - v;
        sums[fi] += v;
        counts[fi] += 1;
    }
    std::array<double, 4> scores{};
    for (std::size_t i = 0; i < 4; ++i) {
        if (counts[i] == 0)
            throw UserError("mapping has no items for factor: " + mapping.factor_names[i]);
        scores[i] = sums[i] / counts[i];
    }
    return scores;
}

std::vector<std::string> validate_mapping(const SurveyMapping& mapping,
                                          std::optional<std::size_t> expected_items) {
    std::vector<std::string> violations;
    std::set<std::string> seen;
    for (const auto& item : mapping.items) {
        if (!seen.insert(item.item_id).second)
            violations.push_back("duplicate item: " + item.item_id);
        bool known = false;
        for (const auto& f : mapping.factor_names)
            if (f == item.factor) known = true;
        if (!known) violations.push_back("item " + item.item_id + " maps to unknown factor: " +
                                         item.factor);
    }
    for (const auto& f : mapping.factor_names) {
        bool any = false;
        for (const auto& item : mapping.items)
            if (item.factor == f) any = true;
        if (!any) violations.push_back("empty factor: " + f);
    }
    if (expected_items && mapping.items.size() != *expected_items)
        violations.push_back("item count " + std::to_string(mapping.items.size()) +
                             " does not match declared " + std::to_string(*expected_items));
    return violations;
}

std::vector<SurveyResponse> load_responses_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UserError("cannot open responses file: " + path.string());
    CsvReader reader(in);
    std::vector<std::string> row;
    if (!reader.next_row(row)) throw UserError("responses file is empty: " + path.string());
    if (row.empty() || row[0] != "player_id")
        throw UserError("responses header must start with player_id");
    const std::vector<std::string> item_ids(row.begin() + 1, row.end());

    std::vector<SurveyResponse> out;
    std::set<std::string> ids;
    std::size_t line = 1;
    while (reader.next_row(row)) {
        ++line;
        if (row.size() == 1 && row[0].empty()) continue;
        if (row.size() != item_ids.size() + 1)
            throw UserError("responses row " + std::to_string(line) + " has wrong cell count");
        SurveyResponse r;
        r.player_id = row[0];
        if (!ids.insert(r.player_id).second)
            throw UserError("duplicate respondent: " + r.player_id);
        for (std::size_t i = 0; i < item_ids.size(); ++i) {
            try {
                r.answers[item_ids[i]] = std::stoi(row[1 + i]);
            } catch (const std::exception&) {
                throw UserError("responses row " + std::to_string(line) + " item " + item_ids[i] +
                                " is not an integer: " + row[1 + i]);
            }
        }
        out.push_back(std::move(r));
    }
    return out;
}

Dataset attach_survey_factors(const Dataset& ds, const std::vector<SurveyResponse>& responses,
                              const SurveyMapping& mapping) {
    if (mapping.factor_names != ds.schema.factor_names())
        throw UserError("mapping factor order does not match dataset schema");
    std::unordered_map<std::string, const SurveyResponse*> by_id;
    for (const auto& r : responses) by_id[r.player_id] = &r;

    Dataset out = ds;
    for (auto& rec : out.records) {
        auto found = by_id.find(rec.player_id);
        if (found == by_id.end())
            throw UserError("no survey response for player: " + rec.player_id);
        rec.factors = aggregate_factor_scores(*found->second, mapping);
    }
    return out;
}

} // namespace motrank
