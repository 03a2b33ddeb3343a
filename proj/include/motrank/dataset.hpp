#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace motrank {

enum class FeatureKind { continuous, binary_flag, exclusive_category };

std::string to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(const std::string& s);

struct FeatureSpec {
    std::string name;
    FeatureKind kind = FeatureKind::continuous;
};

/// Canonical column layout: feature names in order, then the four factor
/// names. At most one exclusive-category group is allowed; its members are
/// one-hot play-style flags.
class FeatureSchema {
public:
    FeatureSchema() = default;
    FeatureSchema(std::vector<FeatureSpec> features, std::array<std::string, 4> factor_names);

    const std::vector<FeatureSpec>& features() const { return features_; }
    const std::array<std::string, 4>& factor_names() const { return factor_names_; }
    std::size_t size() const { return features_.size(); }

    /// Index of a feature by name; throws UserError if absent.
    std::size_t index_of(const std::string& name) const;
    /// Index of a factor by name; throws UserError if absent.
    std::size_t factor_index(const std::string& name) const;

    std::vector<std::size_t> indices_of(FeatureKind kind) const;
    bool has_kind(FeatureKind kind) const;

    /// FNV-1a hash over names, kinds and factor names, as a hex string.
    /// Stored in serialized models so a model cannot be silently applied to
    /// data with a different layout.
    std::string fingerprint() const;

    std::string to_json_string() const;
    static FeatureSchema from_json_string(const std::string& text);
    static FeatureSchema load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

private:
    std::vector<FeatureSpec> features_;
    std::array<std::string, 4> factor_names_{};
};

/// The 26 lifetime game metrics plus the 4 exclusive play-style flags and
/// the 4 motivation factors.
FeatureSchema default_schema();
/// The 26 game metrics only (no play-style flags); the layout produced by
/// ingestion before clustering attaches style columns.
FeatureSchema default_metrics_schema();

struct PlayerRecord {
    std::string player_id;
    std::vector<double> features;
    std::array<double, 4> factors{};
};

struct Dataset {
    FeatureSchema schema;
    std::vector<PlayerRecord> records;

    /// Checks record lengths and player_id uniqueness; throws UserError.
    void validate() const;
};

enum class FeatureSet { play_styles, game_metrics, all };

std::string to_string(FeatureSet set);
FeatureSet feature_set_from_string(const std::string& s);

struct OutlierRule {
    enum class Kind { none, iqr, zscore };
    Kind kind = Kind::iqr;
    double k = 1.5;

    static OutlierRule none() { return {Kind::none, 0.0}; }
    static OutlierRule iqr(double k) { return {Kind::iqr, k}; }
    static OutlierRule zscore(double k) { return {Kind::zscore, k}; }
    /// Parses "none", "iqr:1.5" or "zscore:3".
    static OutlierRule parse(const std::string& text);
    std::string to_string() const;
};

struct CleanEntry {
    std::string player_id;
    std::string reason;
};

struct CleanLog {
    std::vector<CleanEntry> dropped;

    /// One JSON object per line: {"player_id": ..., "reason": ...}.
    std::string to_jsonl() const;
};

/// Loads a dataset CSV: header must be "player_id", the schema's feature
/// names, then its factor names, in order. Unparseable or empty cells become
/// NaN markers for clean() to drop.
Dataset load_csv(const std::filesystem::path& path, const FeatureSchema& schema);

/// Same, but the file carries features only (no factor columns); factors are
/// set to NaN and must be attached from survey responses before cleaning.
Dataset load_features_csv(const std::filesystem::path& path, const FeatureSchema& schema);

/// Writes the dataset with shortest round-trip number formatting. NaN cells
/// are written empty, infinities as "inf"/"-inf".
void write_csv(const Dataset& ds, const std::filesystem::path& path);

/// Drops records with missing/non-finite values, out-of-range factor scores,
/// exclusive-flag violations, then applies the outlier rule to continuous
/// features (statistics computed over the records that survived the earlier
/// stages). Preserves input order. Throws UserError if nothing survives.
std::pair<Dataset, CleanLog> clean(const Dataset& ds, const OutlierRule& rule);

/// Restricts the schema to one feature group; factors untouched.
Dataset select_features(const Dataset& ds, FeatureSet set);

std::uint64_t fnv1a64(const void* data, std::size_t size);

} // namespace motrank
