#include <doctest.h>

#include "motrank/clustering.hpp"
#include "motrank/error.hpp"
#include "motrank/random.hpp"
#include "support/helpers.hpp"

#include <cmath>
#include <map>
#include <set>

using namespace motrank;
using namespace motrank::testing;

namespace {

// four tight blobs in 2d, far apart
std::vector<PlayerRecord> blob_records(std::size_t per_blob, std::uint64_t seed,
                                       std::vector<int>* truth = nullptr) {
    const double centers[4][2] = {{0, 0}, {10, 0}, {0, 10}, {10, 10}};
    Rng rng(seed);
    std::vector<PlayerRecord> recs;
    for (int b = 0; b < 4; ++b)
        for (std::size_t i = 0; i < per_blob; ++i) {
            PlayerRecord r;
            r.player_id = "b" + std::to_string(b) + "_" + std::to_string(i);
            r.features = {centers[b][0] + rng.normal(0, 0.05), centers[b][1] + rng.normal(0, 0.05)};
            recs.push_back(r);
            if (truth) truth->push_back(b);
        }
    return recs;
}

} // namespace

TEST_CASE("well separated blobs are recovered exactly") {
    std::vector<int> truth;
    auto recs = blob_records(12, 100, &truth);
    auto model = kmeans_fit(recs, 4, 5);
    REQUIRE(model.centroids.size() == 4);
    CHECK(model.assignments.size() == recs.size());

    // every true blob maps to exactly one cluster and vice versa
    std::map<int, std::set<int>> blob_to_cluster;
    for (std::size_t i = 0; i < recs.size(); ++i)
        blob_to_cluster[truth[i]].insert(model.assignments.at(recs[i].player_id));
    std::set<int> used;
    for (const auto& [blob, clusters] : blob_to_cluster) {
        CHECK(clusters.size() == 1);
        used.insert(*clusters.begin());
    }
    CHECK(used.size() == 4);

    // centroids sit on the blob centers
    for (const auto& c : model.centroids) {
        const double x = std::round(c[0] / 10.0) * 10.0;
        const double y = std::round(c[1] / 10.0) * 10.0;
        CHECK(std::abs(c[0] - x) < 0.1);
        CHECK(std::abs(c[1] - y) < 0.1);
    }
    CHECK(model.inertia < 1.0);
}

TEST_CASE("degenerate cluster counts") {
    auto recs = blob_records(3, 7);
    auto one = kmeans_fit(recs, 1, 1);
    REQUIRE(one.centroids.size() == 1);
    std::vector<double> mean(2, 0.0);
    for (const auto& r : recs)
        for (int d = 0; d < 2; ++d) mean[d] += r.features[d];
    for (int d = 0; d < 2; ++d) {
        mean[d] /= double(recs.size());
        CHECK(one.centroids[0][d] == doctest::Approx(mean[d]));
    }

    auto all = kmeans_fit(recs, recs.size(), 1);
    CHECK(all.inertia == doctest::Approx(0.0));

    CHECK_THROWS_AS(kmeans_fit(recs, 0, 1), UserError);
    CHECK_THROWS_AS(kmeans_fit(recs, recs.size() + 1, 1), UserError);
    CHECK_THROWS_AS(kmeans_fit({}, 1, 1), UserError);
}

TEST_CASE("duplicate points cannot starve clusters") {
    std::vector<PlayerRecord> recs;
    for (int i = 0; i < 5; ++i) {
        PlayerRecord r;
        r.player_id = "p" + std::to_string(i);
        r.features = {i < 4 ? 0.0 : 1.0, 0.0};
        recs.push_back(r);
    }
    auto model = kmeans_fit(recs, 4, 3);
    std::map<int, int> counts;
    for (const auto& [id, c] : model.assignments) ++counts[c];
    CHECK(counts.size() == 4); // every cluster keeps at least one member
    CHECK(std::isfinite(model.inertia));
}

TEST_CASE("same seed reproduces, more restarts never hurt") {
    auto recs = blob_records(8, 42);
    auto a = kmeans_fit(recs, 4, 9, 100, 3);
    auto b = kmeans_fit(recs, 4, 9, 100, 3);
    CHECK(a.assignments == b.assignments);
    CHECK(a.inertia == b.inertia);
    CHECK(a.centroids == b.centroids);

    // restart 0 of the 10-restart run is the single-restart run, so the
    // winning inertia cannot be worse
    auto single = kmeans_fit(recs, 4, 9, 100, 1);
    auto ten = kmeans_fit(recs, 4, 9, 100, 10);
    CHECK(ten.inertia <= single.inertia + 1e-12);
}

TEST_CASE("style assignment appends exclusive one hot columns") {
    std::vector<int> truth;
    auto recs = blob_records(5, 11, &truth);
    auto model = kmeans_fit(recs, 4, 2);

    Dataset ds;
    ds.schema = tiny_schema(2);
    ds.records = recs;
    for (auto& r : ds.records) r.factors = {3, 3, 3, 3};

    std::array<std::string, 4> names{"Adventurer", "Elite", "PvE All-Rounder",
                                     "Social Dark Zone Player"};
    auto tagged = assign_styles(model, ds, names);
    CHECK(tagged.schema.size() == 6);
    CHECK(tagged.schema.features()[2].name == "Adventurer");
    CHECK(tagged.schema.features()[2].kind == FeatureKind::exclusive_category);
    for (const auto& r : tagged.records) {
        double sum = 0.0;
        for (int s = 0; s < 4; ++s) {
            const double v = r.features[2 + s];
            CHECK((v == 0.0 || v == 1.0));
            sum += v;
        }
        CHECK(sum == 1.0);
        const int cluster = model.assignments.at(r.player_id);
        CHECK(r.features[2 + cluster] == 1.0);
    }

    // two players in the same cluster share a style column
    auto wrong = model;
    wrong.k = 3;
    wrong.centroids.resize(3);
    CHECK_THROWS_AS(assign_styles(wrong, ds, names), UserError);

    auto missing = model;
    missing.assignments.erase(ds.records[0].player_id);
    CHECK_THROWS_AS(assign_styles(missing, ds, names), UserError);

    Dataset collide = ds;
    collide.schema = FeatureSchema({{"Adventurer", FeatureKind::continuous},
                                    {"x", FeatureKind::continuous}},
                                   {"competence", "autonomy", "relatedness", "presence"});
    CHECK_THROWS_AS(assign_styles(model, collide, names), UserError);
}

TEST_CASE("cluster model json round trip") {
    auto recs = blob_records(4, 19);
    auto model = kmeans_fit(recs, 4, 8);
    auto back = cluster_model_from_json(cluster_model_to_json(model));
    CHECK(back.k == model.k);
    CHECK(back.seed == model.seed);
    CHECK(back.inertia == model.inertia);
    CHECK(back.centroids == model.centroids);
    CHECK(back.assignments == model.assignments);
    CHECK_THROWS_AS(cluster_model_from_json("{"), UserError);
}
