#include <doctest.h>

#include "motrank/dataset.hpp"
#include "motrank/error.hpp"
#include "motrank/format.hpp"
#include "motrank/csv.hpp"
#include "support/helpers.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

using namespace motrank;
using namespace motrank::testing;

namespace {

PlayerRecord rec(std::string id, std::vector<double> feats,
                 std::array<double, 4> factors = {3, 3, 3, 3}) {
    PlayerRecord r;
    r.player_id = std::move(id);
    r.features = std::move(feats);
    r.factors = factors;
    return r;
}

} // namespace

TEST_CASE("default schema layout") {
    auto full = default_schema();
    CHECK(full.size() == 30);
    CHECK(full.indices_of(FeatureKind::exclusive_category).size() == 4);
    CHECK(full.factor_names() ==
          std::array<std::string, 4>{"competence", "autonomy", "relatedness", "presence"});
    CHECK(full.index_of("Days Played") == 0);
    CHECK(full.features()[16].kind == FeatureKind::binary_flag); // Early Level 30

    auto metrics = default_metrics_schema();
    CHECK(metrics.size() == 26);
    CHECK(!metrics.has_kind(FeatureKind::exclusive_category));
    // the metrics schema is a strict prefix of the full one
    for (std::size_t i = 0; i < metrics.size(); ++i)
        CHECK(metrics.features()[i].name == full.features()[i].name);

    CHECK(full.fingerprint() != metrics.fingerprint());
    CHECK(full.fingerprint() == default_schema().fingerprint());
    CHECK_THROWS_AS(full.index_of("no-such-feature"), UserError);
    CHECK_THROWS_AS(full.factor_index("no-such-factor"), UserError);
    CHECK(full.factor_index("presence") == 3);
}

TEST_CASE("schema validation and json round trip") {
    CHECK_THROWS_AS(FeatureSchema({{"a", FeatureKind::continuous}, {"a", FeatureKind::continuous}},
                                  {"c", "au", "r", "p"}),
                    UserError);
    CHECK_THROWS_AS(FeatureSchema({{"", FeatureKind::continuous}}, {"c", "au", "r", "p"}),
                    UserError);
    CHECK_THROWS_AS(FeatureSchema({{"a", FeatureKind::continuous}}, {"c", "c", "r", "p"}),
                    UserError);

    auto schema = default_schema();
    auto back = FeatureSchema::from_json_string(schema.to_json_string());
    CHECK(back.fingerprint() == schema.fingerprint());
    CHECK(back.size() == schema.size());
    for (std::size_t i = 0; i < schema.size(); ++i)
        CHECK(back.features()[i].kind == schema.features()[i].kind);

    TempDir tmp;
    schema.save(tmp / "schema.json");
    CHECK(FeatureSchema::load(tmp / "schema.json").fingerprint() == schema.fingerprint());
    CHECK_THROWS_AS(FeatureSchema::load(tmp / "missing.json"), UserError);
    CHECK_THROWS_AS(FeatureSchema::from_json_string("not json"), UserError);
}

TEST_CASE("csv round trip preserves values exactly") {
    TempDir tmp;
    auto schema = tiny_schema(3);
    Dataset ds;
    ds.schema = schema;
    ds.records.push_back(rec("p1", {0.1, 1.0 / 3.0, 1e-300}, {1.0, 5.0, 2.5, 3.75}));
    ds.records.push_back(rec("weird,\"id\"", {-0.0, 1e300, 0.5}));
    ds.records.push_back(rec("p3", {std::nan(""), 2.0, 3.0}));

    auto path = tmp / "ds.csv";
    write_csv(ds, path);
    auto text = slurp(path);
    CHECK(text.find("player_id,f0,f1,f2,competence,autonomy,relatedness,presence\n") == 0);
    CHECK(text.find("\"weird,\"\"id\"\"\"") != std::string::npos);

    auto back = load_csv(path, schema);
    REQUIRE(back.records.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back.records[i].player_id == ds.records[i].player_id);
        for (std::size_t f = 0; f < 3; ++f) {
            const double want = ds.records[i].features[f];
            const double got = back.records[i].features[f];
            if (std::isnan(want)) CHECK(std::isnan(got));
            else CHECK(got == want);
        }
        CHECK(back.records[i].factors == ds.records[i].factors);
    }
}

TEST_CASE("csv loader rejects malformed input") {
    TempDir tmp;
    auto schema = tiny_schema(1);
    auto write = [&](const std::string& name, const std::string& body) {
        std::ofstream out(tmp / name, std::ios::binary);
        out << body;
        return tmp / name;
    };

    CHECK_THROWS_AS(load_csv(tmp / "missing.csv", schema), UserError);
    CHECK_THROWS_AS(load_csv(write("empty.csv", ""), schema), UserError);
    CHECK_THROWS_AS(
        load_csv(write("header.csv", "player_id,wrong,competence,autonomy,relatedness,presence\n"),
                 schema),
        UserError);
    CHECK_THROWS_AS(
        load_csv(write("short.csv",
                       "player_id,f0,competence,autonomy,relatedness,presence\np1,1\n"),
                 schema),
        UserError);
    CHECK_THROWS_AS(
        load_csv(write("dup.csv", "player_id,f0,competence,autonomy,relatedness,presence\n"
                                  "p1,1,3,3,3,3\np1,2,3,3,3,3\n"),
                 schema),
        UserError);

    // unparseable numeric cells become NaN markers for clean()
    auto ds = load_csv(write("garbage.csv", "player_id,f0,competence,autonomy,relatedness,presence\n"
                                            "p1,abc,3,3,3,3\n"),
                       schema);
    CHECK(std::isnan(ds.records[0].features[0]));
}

TEST_CASE("csv reader handles quotes, CRLF and embedded newlines") {
    std::istringstream in("a,\"b,c\",\"d\"\"e\"\r\n\"line\nbreak\",2,3\n");
    CsvReader reader(in);
    std::vector<std::string> row;
    REQUIRE(reader.next_row(row));
    REQUIRE(row.size() == 3);
    CHECK(row[0] == "a");
    CHECK(row[1] == "b,c");
    CHECK(row[2] == "d\"e");
    REQUIRE(reader.next_row(row));
    CHECK(row[0] == "line\nbreak");
    CHECK(!reader.next_row(row));
}

TEST_CASE("shortest round trip formatting") {
    for (double v : {0.1, 1.0 / 3.0, -0.0, 1e300, 5e-324, 1.0, 298.0}) {
        auto s = format_double(v);
        auto parsed = parse_double(s);
        REQUIRE(parsed.has_value());
        CHECK(*parsed == v);
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    CHECK(!parse_double("").has_value());
    CHECK(!parse_double("12x").has_value());
    CHECK(parse_double(" 2.5 ").has_value());
}

TEST_CASE("fnv1a64 matches the published offset basis and an independent loop") {
    // empty input hashes to the FNV-1a offset basis
    CHECK(fnv1a64(nullptr, 0) == 0xcbf29ce484222325ULL);
    auto reference = [](const std::string& s) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return h;
    };
    for (const std::string& s : {std::string("a"), std::string("motrank"), std::string("\x00\xff", 2)})
        CHECK(fnv1a64(s.data(), s.size()) == reference(s));
}

TEST_CASE("clean drops records stage by stage with reasons") {
    auto schema = FeatureSchema({{"m", FeatureKind::continuous},
                                 {"s1", FeatureKind::exclusive_category},
                                 {"s2", FeatureKind::exclusive_category}},
                                {"competence", "autonomy", "relatedness", "presence"});
    Dataset ds;
    ds.schema = schema;
    ds.records.push_back(rec("ok", {1.0, 1.0, 0.0}));
    ds.records.push_back(rec("gap", {std::nan(""), 1.0, 0.0}));
    ds.records.push_back(rec("inf", {std::numeric_limits<double>::infinity(), 1.0, 0.0}));
    ds.records.push_back(rec("range", {1.0, 1.0, 0.0}, {0.5, 3, 3, 3}));
    ds.records.push_back(rec("twohot", {1.0, 1.0, 1.0}));
    ds.records.push_back(rec("halfhot", {1.0, 0.5, 0.0}));
    ds.records.push_back(rec("ok2", {1.2, 0.0, 1.0}));

    auto [cleaned, log] = clean(ds, OutlierRule::none());
    REQUIRE(cleaned.records.size() == 2);
    CHECK(cleaned.records[0].player_id == "ok");
    CHECK(cleaned.records[1].player_id == "ok2");
    REQUIRE(log.dropped.size() == 5);
    CHECK(log.dropped[0].player_id == "gap");
    CHECK(log.dropped[0].reason == "missing");
    CHECK(log.dropped[1].reason == "non-finite");
    CHECK(log.dropped[2].reason == "factor-range");
    CHECK(log.dropped[3].reason == "exclusive-violation");
    CHECK(log.dropped[4].reason == "exclusive-violation");

    auto jsonl = log.to_jsonl();
    CHECK(jsonl.find("\"player_id\":\"gap\"") != std::string::npos);
    CHECK(jsonl.find("\"reason\":\"missing\"") != std::string::npos);

    Dataset empty;
    empty.schema = schema;
    empty.records.push_back(rec("only", {std::nan(""), 1.0, 0.0}));
    CHECK_THROWS_AS(clean(empty, OutlierRule::none()), UserError);
}

TEST_CASE("iqr outlier bounds use interpolated quartiles") {
    auto schema = tiny_schema(1);
    Dataset ds;
    ds.schema = schema;
    // values 1..5 plus an extreme: q1 and q3 of {1,2,3,4,5,100} are 2.25 and
    // 4.75 (linear interpolation), iqr 2.5, so the 1.5 fence is [-1.5, 8.5]
    for (int i = 1; i <= 5; ++i) ds.records.push_back(rec("p" + std::to_string(i), {double(i)}));
    ds.records.push_back(rec("big", {100.0}));

    auto [cleaned, log] = clean(ds, OutlierRule::iqr(1.5));
    CHECK(cleaned.records.size() == 5);
    REQUIRE(log.dropped.size() == 1);
    CHECK(log.dropped[0].player_id == "big");
    CHECK(log.dropped[0].reason == "outlier:f0");

    // a wide enough multiplier keeps everything: need k*2.5 >= 95.25
    auto [kept, log2] = clean(ds, OutlierRule::iqr(40.0));
    CHECK(kept.records.size() == 6);
    CHECK(log2.dropped.empty());
}

TEST_CASE("zscore outlier rule uses population moments of the survivors") {
    auto schema = tiny_schema(1);
    Dataset ds;
    ds.schema = schema;
    // nine at 0, one at 10: mean 1, population sd 3 -> fence at k=2 is [-5, 7]
    for (int i = 0; i < 9; ++i) ds.records.push_back(rec("p" + std::to_string(i), {0.0}));
    ds.records.push_back(rec("far", {10.0}));
    auto [cleaned, log] = clean(ds, OutlierRule::zscore(2.0));
    CHECK(cleaned.records.size() == 9);
    REQUIRE(log.dropped.size() == 1);
    CHECK(log.dropped[0].player_id == "far");

    // k=3 puts the fence at [-8, 10]; the far point sits exactly on it and stays
    auto [kept, log2] = clean(ds, OutlierRule::zscore(3.0));
    CHECK(kept.records.size() == 10);
}

TEST_CASE("binary and style columns are exempt from outlier fences") {
    auto schema = FeatureSchema({{"flag", FeatureKind::binary_flag},
                                 {"metric", FeatureKind::continuous}},
                                {"competence", "autonomy", "relatedness", "presence"});
    Dataset ds;
    ds.schema = schema;
    // one set flag among many zeros would be a gross "outlier" if fenced
    for (int i = 0; i < 20; ++i) ds.records.push_back(rec("p" + std::to_string(i), {0.0, 1.0}));
    ds.records.push_back(rec("rare", {1.0, 1.0}));
    auto [cleaned, log] = clean(ds, OutlierRule::iqr(1.5));
    CHECK(cleaned.records.size() == 21);
    CHECK(log.dropped.empty());
}

TEST_CASE("outlier rule parsing") {
    auto r = OutlierRule::parse("iqr:2.5");
    CHECK(r.kind == OutlierRule::Kind::iqr);
    CHECK(r.k == doctest::Approx(2.5));
    CHECK(r.to_string() == "iqr:2.5");
    CHECK(OutlierRule::parse("none").kind == OutlierRule::Kind::none);
    CHECK(OutlierRule::parse("zscore:3").kind == OutlierRule::Kind::zscore);
    CHECK_THROWS_AS(OutlierRule::parse("median:2"), UserError);
    CHECK_THROWS_AS(OutlierRule::parse("iqr:abc"), UserError);
    CHECK_THROWS_AS(OutlierRule::parse("iqr:-1"), UserError);
}

TEST_CASE("select features restricts the schema in place") {
    auto full = default_schema();
    Dataset ds;
    ds.schema = full;
    PlayerRecord r;
    r.player_id = "p1";
    r.features.assign(30, 0.0);
    for (std::size_t i = 0; i < 26; ++i) r.features[i] = double(i) + 1.0;
    r.features[26] = 1.0; // first style flag
    r.factors = {1, 2, 3, 4};
    ds.records.push_back(r);

    auto styles = select_features(ds, FeatureSet::play_styles);
    CHECK(styles.schema.size() == 4);
    CHECK(styles.records[0].features == std::vector<double>{1.0, 0.0, 0.0, 0.0});
    CHECK(styles.records[0].factors == r.factors);

    auto metrics = select_features(ds, FeatureSet::game_metrics);
    CHECK(metrics.schema.size() == 26);
    CHECK(metrics.records[0].features[25] == 26.0);

    auto all = select_features(ds, FeatureSet::all);
    CHECK(all.schema.size() == 30);
    CHECK(all.schema.fingerprint() == full.fingerprint());

    CHECK(to_string(FeatureSet::play_styles) == "styles");
    CHECK(to_string(FeatureSet::game_metrics) == "metrics");
    CHECK(to_string(FeatureSet::all) == "all");
    CHECK(feature_set_from_string("styles") == FeatureSet::play_styles);
    CHECK_THROWS_AS(feature_set_from_string("bogus"), UserError);
}

TEST_CASE("dataset validate catches structural defects") {
    auto schema = tiny_schema(2);
    Dataset ds;
    ds.schema = schema;
    ds.records.push_back(rec("p1", {1.0, 2.0}));
    ds.validate();
    ds.records.push_back(rec("p1", {1.0, 2.0}));
    CHECK_THROWS_AS(ds.validate(), UserError);
    ds.records[1].player_id = "p2";
    ds.records[1].features = {1.0};
    CHECK_THROWS_AS(ds.validate(), UserError);
}
