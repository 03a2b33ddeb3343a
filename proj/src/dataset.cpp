#include "motrank/dataset.hpp"

#include "motrank/csv.hpp"
#include "motrank/error.hpp"
#include "motrank/format.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace motrank {

using nlohmann::json;

std::string to_string(FeatureKind kind) {
    switch (kind) {
        case FeatureKind::continuous: return "continuous";
        case FeatureKind::binary_flag: return "binary_flag";
        case FeatureKind::exclusive_category: return "exclusive_category";
    }
    return "continuous";
}

FeatureKind feature_kind_from_string(const std::string& s) {
    if (s == "continuous") return FeatureKind::continuous;
    if (s == "binary_flag") return FeatureKind::binary_flag;
    if (s == "exclusive_category") return FeatureKind::exclusive_category;
    throw UserError("unknown feature kind: " + s);
}

FeatureSchema::FeatureSchema(std::vector<FeatureSpec> features,
                             std::array<std::string, 4> factor_names)
    : features_(std::move(features)), factor_names_(std::move(factor_names)) {
    std::unordered_set<std::string> seen;
    for (const auto& f : features_) {
        if (f.name.empty()) throw UserError("schema: empty feature name");
        if (!seen.insert(f.name).second)
            throw UserError("schema: duplicate feature name: " + f.name);
    }
    for (const auto& fn : factor_names_) {
        if (fn.empty()) throw UserError("schema: empty factor name");
        if (seen.count(fn)) throw UserError("schema: factor name collides with feature: " + fn);
        if (!seen.insert(fn).second) throw UserError("schema: duplicate factor name: " + fn);
    }
}

std::size_t FeatureSchema::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < features_.size(); ++i)
        if (features_[i].name == name) return i;
    throw UserError("schema has no feature named: " + name);
}

std::size_t FeatureSchema::factor_index(const std::string& name) const {
    for (std::size_t i = 0; i < factor_names_.size(); ++i)
        if (factor_names_[i] == name) return i;
    throw UserError("schema has no factor named: " + name);
}

std::vector<std::size_t> FeatureSchema::indices_of(FeatureKind kind) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < features_.size(); ++i)
        if (features_[i].kind == kind) out.push_back(i);
    return out;
}

bool FeatureSchema::has_kind(FeatureKind kind) const {
    return std::any_of(features_.begin(), features_.end(),
                       [&](const FeatureSpec& f) { return f.kind == kind; });
}

std::uint64_t fnv1a64(const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string FeatureSchema::fingerprint() const {
    std::string blob;
    for (const auto& f : features_) {
        blob += f.name;
        blob.push_back('\x1f');
        blob += to_string(f.kind);
        blob.push_back('\x1e');
    }
    for (const auto& fn : factor_names_) {
        blob += fn;
        blob.push_back('\x1e');
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(blob.data(), blob.size())));
    return buf;
}

std::string FeatureSchema::to_json_string() const {
    json j;
    j["features"] = json::array();
    for (const auto& f : features_)
        j["features"].push_back({{"name", f.name}, {"kind", to_string(f.kind)}});
    j["factors"] = factor_names_;
    return j.dump(2);
}

FeatureSchema FeatureSchema::from_json_string(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw UserError("schema JSON is not valid JSON");
    if (!j.contains("features") || !j.contains("factors"))
        throw UserError("schema JSON needs \"features\" and \"factors\"");
    std::vector<FeatureSpec> feats;
    for (const auto& f : j["features"])
        feats.push_back({f.at("name").get<std::string>(),
                         feature_kind_from_string(f.at("kind").get<std::string>())});
    auto factors = j["factors"].get<std::vector<std::string>>();
    if (factors.size() != 4) throw UserError("schema JSON must list exactly 4 factors");
    return FeatureSchema(std::move(feats), {factors[0], factors[1], factors[2], factors[3]});
}

FeatureSchema FeatureSchema::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UserError("cannot open schema file: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_string(ss.str());
}

void FeatureSchema::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw UserError("cannot write schema file: " + path.string());
    out << to_json_string() << "\n";
}

namespace {

std::vector<FeatureSpec> metric_specs() {
    const auto c = FeatureKind::continuous;
    const auto b = FeatureKind::binary_flag;
    return {
        {"Days Played", c},
        {"Days in Groups", c},
        {"Days in the Dark Zone", c},
        {"Sessions", c},
        {"Playtime", c},
        {"Group Playtime", c},
        {"Dark Zone Playtime", c},
        {"Playtime as Rogue", c},
        {"Non-Daily Missions", c},
        {"Daily Missions", c},
        {"Side Missions", c},
        {"Days with Incursions", c},
        {"Incursions", c},
        {"Gear-Score", c},
        {"Dark Zone Rank", c},
        {"Level", c},
        {"Early Level 30", b},
        {"Reached Level 30", b},
        {"Level Below 30", c},
        {"Early Playtime", c},
        {"Early Group Playtime", c},
        {"Early Dark Zone Playtime", c},
        {"Early Playtime as Rogue", c},
        {"Underground Playtime", c},
        {"Survival Playtime", c},
        {"Season-Pass", b},
    };
}

const std::array<std::string, 4> kFactorNames = {
    "competence", "autonomy", "relatedness", "presence"};

} // namespace

FeatureSchema default_schema() {
    auto feats = metric_specs();
    for (const char* style : {"Adventurer", "Elite", "PvE All-Rounder", "Social Dark Zone Player"})
        feats.push_back({style, FeatureKind::exclusive_category});
    return FeatureSchema(std::move(feats), kFactorNames);
}

FeatureSchema default_metrics_schema() {
    return FeatureSchema(metric_specs(), kFactorNames);
}

void Dataset::validate() const {
    std::unordered_set<std::string> ids;
    for (const auto& r : records) {
        if (r.features.size() != schema.size())
            throw UserError("record " + r.player_id + " has " + std::to_string(r.features.size()) +
                            " features, schema expects " + std::to_string(schema.size()));
        if (!ids.insert(r.player_id).second)
            throw UserError("duplicate player_id: " + r.player_id);
    }
}

std::string to_string(FeatureSet set) {
    switch (set) {
        case FeatureSet::play_styles: return "styles";
        case FeatureSet::game_metrics: return "metrics";
        case FeatureSet::all: return "all";
    }
    return "all";
}

FeatureSet feature_set_from_string(const std::string& s) {
    if (s == "styles" || s == "play_styles") return FeatureSet::play_styles;
    if (s == "metrics" || s == "game_metrics") return FeatureSet::game_metrics;
    if (s == "all") return FeatureSet::all;
    throw UserError("unknown feature set: " + s + " (expected styles|metrics|all)");
}

OutlierRule OutlierRule::parse(const std::string& text) {
    if (text == "none") return none();
    auto colon = text.find(':');
    const std::string head = text.substr(0, colon);
    if (head != "iqr" && head != "zscore")
        throw UserError("unknown outlier rule: " + text + " (expected none, iqr:K or zscore:K)");
    double k = head == "iqr" ? 1.5 : 3.0;
    if (colon != std::string::npos) {
        auto parsed = parse_double(text.substr(colon + 1));
        if (!parsed || !(*parsed >= 0.0))
            throw UserError("bad outlier rule multiplier in: " + text);
        k = *parsed;
    }
    return head == "iqr" ? iqr(k) : zscore(k);
}

std::string OutlierRule::to_string() const {
    switch (kind) {
        case Kind::none: return "none";
        case Kind::iqr: return "iqr:" + format_double(k);
        case Kind::zscore: return "zscore:" + format_double(k);
    }
    return "none";
}

std::string CleanLog::to_jsonl() const {
    std::string out;
    for (const auto& e : dropped) {
        json j{{"player_id", e.player_id}, {"reason", e.reason}};
        out += j.dump();
        out += "\n";
    }
    return out;
}

namespace {

Dataset load_csv_impl(const std::filesystem::path& path, const FeatureSchema& schema,
                      bool with_factors) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UserError("cannot open dataset file: " + path.string());

    CsvReader reader(in);
    std::vector<std::string> row;
    if (!reader.next_row(row)) throw UserError("dataset file is empty: " + path.string());

    std::vector<std::string> expected{"player_id"};
    for (const auto& f : schema.features()) expected.push_back(f.name);
    if (with_factors)
        for (const auto& fn : schema.factor_names()) expected.push_back(fn);
    if (row != expected) {
        std::string msg = "header does not match schema; expected " +
                          std::to_string(expected.size()) + " columns [" + csv_join(expected) +
                          "], got [" + csv_join(row) + "]";
        throw UserError(msg);
    }

    Dataset ds;
    ds.schema = schema;
    std::unordered_set<std::string> ids;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::size_t line = 1;
    while (reader.next_row(row)) {
        ++line;
        if (row.size() == 1 && row[0].empty()) continue; // trailing blank line
        if (row.size() != expected.size())
            throw UserError("row " + std::to_string(line) + " has " + std::to_string(row.size()) +
                            " cells, expected " + std::to_string(expected.size()));
        PlayerRecord rec;
        rec.player_id = row[0];
        if (rec.player_id.empty())
            throw UserError("row " + std::to_string(line) + " has empty player_id");
        if (!ids.insert(rec.player_id).second)
            throw UserError("duplicate player_id: " + rec.player_id);
        rec.features.reserve(schema.size());
        for (std::size_t i = 0; i < schema.size(); ++i) {
            auto v = parse_double(row[1 + i]);
            rec.features.push_back(v ? *v : nan);
        }
        if (with_factors) {
            for (std::size_t i = 0; i < 4; ++i) {
                auto v = parse_double(row[1 + schema.size() + i]);
                rec.factors[i] = v ? *v : nan;
            }
        } else {
            rec.factors = {nan, nan, nan, nan};
        }
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

std::string cell_for(double v) {
    if (std::isnan(v)) return "";
    return format_double(v);
}

} // namespace

Dataset load_csv(const std::filesystem::path& path, const FeatureSchema& schema) {
    return load_csv_impl(path, schema, true);
}

Dataset load_features_csv(const std::filesystem::path& path, const FeatureSchema& schema) {
    return load_csv_impl(path, schema, false);
}

void write_csv(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UserError("cannot write dataset file: " + path.string());
    std::vector<std::string> row{"player_id"};
    for (const auto& f : ds.schema.features()) row.push_back(f.name);
    for (const auto& fn : ds.schema.factor_names()) row.push_back(fn);
    out << csv_join(row) << "\n";
    for (const auto& rec : ds.records) {
        row.clear();
        row.push_back(rec.player_id);
        for (double v : rec.features) row.push_back(cell_for(v));
        for (double v : rec.factors) row.push_back(cell_for(v));
        out << csv_join(row) << "\n";
    }
    if (!out) throw UserError("write failed: " + path.string());
}

namespace {

/// Quantile with linear interpolation between order statistics
/// (the numpy default): position p*(m-1) on the sorted values.
double quantile(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

} // namespace

std::pair<Dataset, CleanLog> clean(const Dataset& ds, const OutlierRule& rule) {
    ds.validate();
    CleanLog log;
    const auto exclusive = ds.schema.indices_of(FeatureKind::exclusive_category);

    // Stage 1: missing, non-finite, factor range, exclusive-flag violations.
    std::vector<const PlayerRecord*> stage1;
    for (const auto& rec : ds.records) {
        std::string reason;
        bool missing = false, nonfinite = false;
        auto check = [&](double v) {
            if (std::isnan(v)) missing = true;
            else if (std::isinf(v)) nonfinite = true;
        };
        for (double v : rec.features) check(v);
        for (double v : rec.factors) check(v);
        if (missing) reason = "missing";
        else if (nonfinite) reason = "non-finite";
        if (reason.empty()) {
            for (double v : rec.factors) {
                if (v < 1.0 || v > 5.0) {
                    reason = "factor-range";
                    break;
                }
            }
        }
        if (reason.empty() && !exclusive.empty()) {
            int set_count = 0;
            bool bad_value = false;
            for (std::size_t idx : exclusive) {
                const double v = rec.features[idx];
                if (v == 1.0) ++set_count;
                else if (v != 0.0) bad_value = true;
            }
            if (bad_value || set_count > 1) reason = "exclusive-violation";
        }
        if (reason.empty()) stage1.push_back(&rec);
        else log.dropped.push_back({rec.player_id, reason});
    }

    // Stage 2: outlier rule over continuous features, statistics from the
    // stage-1 survivors.
    Dataset out;
    out.schema = ds.schema;
    if (rule.kind == OutlierRule::Kind::none || stage1.empty()) {
        for (const auto* rec : stage1) out.records.push_back(*rec);
    } else {
        const auto cont = ds.schema.indices_of(FeatureKind::continuous);
        std::vector<double> lo(cont.size()), hi(cont.size());
        for (std::size_t c = 0; c < cont.size(); ++c) {
            std::vector<double> vals;
            vals.reserve(stage1.size());
            for (const auto* rec : stage1) vals.push_back(rec->features[cont[c]]);
            if (rule.kind == OutlierRule::Kind::iqr) {
                std::sort(vals.begin(), vals.end());
                const double q1 = quantile(vals, 0.25);
                const double q3 = quantile(vals, 0.75);
                const double iqr = q3 - q1;
                lo[c] = q1 - rule.k * iqr;
                hi[c] = q3 + rule.k * iqr;
            } else {
                double mean = 0.0;
                for (double v : vals) mean += v;
                mean /= static_cast<double>(vals.size());
                double var = 0.0;
                for (double v : vals) var += (v - mean) * (v - mean);
                var /= static_cast<double>(vals.size());
                const double sd = std::sqrt(var);
                lo[c] = mean - rule.k * sd;
                hi[c] = mean + rule.k * sd;
            }
        }
        for (const auto* rec : stage1) {
            std::string reason;
            for (std::size_t c = 0; c < cont.size(); ++c) {
                const double v = rec->features[cont[c]];
                if (v < lo[c] || v > hi[c]) {
                    reason = "outlier:" + ds.schema.features()[cont[c]].name;
                    break;
                }
            }
            if (reason.empty()) out.records.push_back(*rec);
            else log.dropped.push_back({rec->player_id, reason});
        }
    }

    if (out.records.empty())
        throw UserError("cleaning dropped every record (" + std::to_string(ds.records.size()) +
                        " in)");
    return {std::move(out), std::move(log)};
}

Dataset select_features(const Dataset& ds, FeatureSet set) {
    if (set == FeatureSet::all) return ds;

    std::vector<std::size_t> keep;
    if (set == FeatureSet::play_styles) {
        keep = ds.schema.indices_of(FeatureKind::exclusive_category);
        if (keep.empty()) throw UserError("schema has no play-style (exclusive) features");
    } else {
        for (std::size_t i = 0; i < ds.schema.size(); ++i)
            if (ds.schema.features()[i].kind != FeatureKind::exclusive_category) keep.push_back(i);
        if (keep.empty()) throw UserError("schema has no game-metric features");
    }

    std::vector<FeatureSpec> specs;
    specs.reserve(keep.size());
    for (std::size_t i : keep) specs.push_back(ds.schema.features()[i]);

    Dataset out;
    out.schema = FeatureSchema(std::move(specs), ds.schema.factor_names());
    out.records.reserve(ds.records.size());
    for (const auto& rec : ds.records) {
        PlayerRecord r;
        r.player_id = rec.player_id;
        r.factors = rec.factors;
        r.features.reserve(keep.size());
        for (std::size_t i : keep) r.features.push_back(rec.features[i]);
        out.records.push_back(std::move(r));
    }
    return out;
}

} // namespace motrank
