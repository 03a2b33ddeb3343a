#include <doctest.h>

#include "support/helpers.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <sys/wait.h>

using namespace motrank::testing;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

const char* cli_path() {
    const char* cli = std::getenv("MOTRANK_CLI");
    REQUIRE_MESSAGE(cli != nullptr, "MOTRANK_CLI must point at the built binary");
    return cli;
}

RunResult run_cli(const TempDir& tmp, const std::string& args) {
    static int counter = 0;
    const auto out_file = tmp / ("stdout_" + std::to_string(counter) + ".txt");
    const auto err_file = tmp / ("stderr_" + std::to_string(counter) + ".txt");
    ++counter;
    const std::string cmd = std::string(cli_path()) + " " + args + " >" + out_file.string() +
                            " 2>" + err_file.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out_file);
    r.err = slurp(err_file);
    return r;
}

} // namespace

TEST_CASE("synth writes a loadable dataset plus manifest, reproducibly") {
    TempDir tmp;
    fs::create_directories(tmp / "a");
    fs::create_directories(tmp / "b");
    auto r1 = run_cli(tmp, "synth --n 40 --seed 3 --out " + (tmp / "a").string());
    REQUIRE_MESSAGE(r1.exit_code == 0, r1.err);
    CHECK(fs::exists(tmp / "a" / "dataset.csv"));
    CHECK(fs::exists(tmp / "a" / "latent.json"));
    CHECK(fs::exists(tmp / "a" / "manifest.json"));

    auto manifest = nlohmann::json::parse(slurp(tmp / "a" / "manifest.json"));
    CHECK(manifest["tool"] == "motrank");
    CHECK(manifest["command"] == "synth");
    CHECK(manifest.count("created_at") == 0); // manifests carry no timestamps

    auto r2 = run_cli(tmp, "synth --n 40 --seed 3 --out " + (tmp / "b").string());
    REQUIRE(r2.exit_code == 0);
    CHECK(slurp(tmp / "a" / "dataset.csv") == slurp(tmp / "b" / "dataset.csv"));
    CHECK(slurp(tmp / "a" / "manifest.json") == slurp(tmp / "b" / "manifest.json"));
}

TEST_CASE("clean, transform, cv and rank chain end to end") {
    TempDir tmp;
    for (const char* d : {"raw", "clean", "pairs", "cv", "rank"})
        fs::create_directories(tmp / d);
    auto synth = run_cli(tmp, "synth --n 60 --seed 5 --noise 0.2 --out " + (tmp / "raw").string());
    REQUIRE_MESSAGE(synth.exit_code == 0, synth.err);
    const std::string raw = (tmp / "raw" / "dataset.csv").string();

    auto cleaned = run_cli(tmp, "clean --data " + raw + " --outlier iqr:3 --out " +
                                    (tmp / "clean").string());
    REQUIRE_MESSAGE(cleaned.exit_code == 0, cleaned.err);
    CHECK(fs::exists(tmp / "clean" / "dataset.csv"));
    CHECK(fs::exists(tmp / "clean" / "dropped.jsonl"));
    const std::string data = (tmp / "clean" / "dataset.csv").string();

    auto transform = run_cli(tmp, "transform --data " + data +
                                      " --factor competence --pt 0.1 --out " +
                                      (tmp / "pairs").string());
    REQUIRE_MESSAGE(transform.exit_code == 0, transform.err);
    CHECK(fs::exists(tmp / "pairs" / "pairs.csv"));
    auto stats = nlohmann::json::parse(slurp(tmp / "pairs" / "stats.json"));
    CHECK(stats["kept_samples"].get<std::size_t>() > 0);
    CHECK(stats["retention"].get<double>() <= 1.0);
    CHECK(stats["possible_samples"].get<std::size_t>() >= stats["kept_samples"].get<std::size_t>());

    auto cv = run_cli(tmp, "cv --data " + data +
                               " --factor competence --kernel linear --folds 5 --pt 0.1 --out " +
                               (tmp / "cv").string());
    REQUIRE_MESSAGE(cv.exit_code == 0, cv.err);
    CHECK(fs::exists(tmp / "cv" / "folds.jsonl"));
    auto report = nlohmann::json::parse(slurp(tmp / "cv" / "report.json"));
    REQUIRE(report.is_array());
    REQUIRE(report.size() == 1);
    CHECK(report[0]["mode"] == "single");
    CHECK(report[0]["report"]["mean_accuracy"].get<double>() > 0.5);
    CHECK(report[0]["report"]["fold_results"].size() == 5);
    // the human summary on stdout names the factor and the accuracy
    CHECK(cv.out.find("competence") != std::string::npos);
    CHECK(cv.out.find("mean=") != std::string::npos);

    auto rank = run_cli(tmp, "rank --data " + data + " --factor presence --top 5 --zoom 2 --out " +
                                 (tmp / "rank").string());
    REQUIRE_MESSAGE(rank.exit_code == 0, rank.err);
    CHECK(fs::exists(tmp / "rank" / "ordering.json"));
    CHECK(fs::exists(tmp / "rank" / "report.csv"));
    CHECK(fs::exists(tmp / "rank" / "report.pgm"));
    CHECK(fs::exists(tmp / "rank" / "model.json"));
    auto ordering = nlohmann::json::parse(slurp(tmp / "rank" / "ordering.json"));
    CHECK(ordering["method"] == "utility");
    const auto csv_text = slurp(data);
    const auto rows = std::count(csv_text.begin(), csv_text.end(), '\n') - 1;
    CHECK(ordering["player_ids"].size() == std::size_t(rows));
}

TEST_CASE("cv grid mode reports the cells and the chosen one") {
    TempDir tmp;
    const std::string dir = tmp.path().string();
    auto synth = run_cli(tmp, "synth --n 40 --seed 8 --out " + dir);
    REQUIRE(synth.exit_code == 0);
    auto cv = run_cli(tmp, "cv --data " + (tmp / "dataset.csv").string() +
                               " --factor autonomy --kernel rbf --folds 4 --pt 0 " +
                               "--grid-c 1,2 --grid-gamma 0.5,1 --max-pairs 120 --out " + dir);
    REQUIRE_MESSAGE(cv.exit_code == 0, cv.err);
    auto report = nlohmann::json::parse(slurp(tmp / "report.json"));
    REQUIRE(report.is_array());
    CHECK(report[0]["mode"] == "grid");
    CHECK(report[0]["cells"].size() == 4);
    CHECK(report[0]["best"]["config"]["c"].get<double>() >= 1.0);
    CHECK(report[0]["best"]["kernel"] == "rbf");
}

TEST_CASE("ingest joins survey responses and cluster tags styles") {
    TempDir tmp;
    const std::string dir = tmp.path().string();

    // features-only file in the metrics layout, two hand-written players
    auto metrics_synth = run_cli(tmp, "synth --n 30 --seed 4 --schema metrics --out " + dir);
    REQUIRE_MESSAGE(metrics_synth.exit_code == 0, metrics_synth.err);

    fs::create_directories(tmp / "tagged");
    auto cluster = run_cli(tmp, "cluster --data " + (tmp / "dataset.csv").string() +
                                    " --schema metrics --k 4 --seed 2 --out " +
                                    (tmp / "tagged").string());
    REQUIRE_MESSAGE(cluster.exit_code == 0, cluster.err);
    CHECK(fs::exists(tmp / "tagged" / "dataset.csv"));
    CHECK(fs::exists(tmp / "tagged" / "cluster.json"));
    CHECK(fs::exists(tmp / "tagged" / "schema.json"));
    auto clusters = nlohmann::json::parse(slurp(tmp / "tagged" / "cluster.json"));
    CHECK(clusters["k"] == 4);
    CHECK(clusters["assignments"].size() == 30);

    // the augmented file follows the widened schema written next to it
    auto cv = run_cli(tmp, "cv --data " + (tmp / "tagged" / "dataset.csv").string() + " --schema " +
                               (tmp / "tagged" / "schema.json").string() +
                               " --factor competence --folds 3 --pt 0 --features styles --out " +
                               dir);
    REQUIRE_MESSAGE(cv.exit_code == 0, cv.err);
}

TEST_CASE("errors surface as single line json with exit code 1") {
    TempDir tmp;
    const std::string dir = tmp.path().string();
    auto synth = run_cli(tmp, "synth --n 20 --seed 2 --out " + dir);
    REQUIRE(synth.exit_code == 0);

    auto bad_factor = run_cli(tmp, "cv --data " + (tmp / "dataset.csv").string() +
                                       " --factor charisma --out " + dir);
    CHECK(bad_factor.exit_code == 1);
    auto err = nlohmann::json::parse(bad_factor.err);
    CHECK(err["type"] == "user");
    CHECK(err["message"].get<std::string>().find("charisma") != std::string::npos);
    CHECK(bad_factor.err.find('\n') == bad_factor.err.size() - 1);

    auto missing = run_cli(tmp, "cv --data " + (tmp / "nope.csv").string() +
                                    " --factor competence --out " + dir);
    CHECK(missing.exit_code == 1);
    CHECK(nlohmann::json::parse(missing.err)["type"] == "user");

    auto bad_flag = run_cli(tmp, "cv --nonsense");
    CHECK(bad_flag.exit_code == 1);

    auto bad_value = run_cli(tmp, "synth --n 20 --seed 2 --latent cubic --out " + dir);
    CHECK(bad_value.exit_code == 1);
    CHECK(nlohmann::json::parse(bad_value.err)["type"] == "user");
}

TEST_CASE("suite output is byte identical across reruns") {
    TempDir tmp;
    const std::string dir = tmp.path().string();
    auto synth = run_cli(tmp, "synth --n 30 --seed 6 --out " + dir);
    REQUIRE(synth.exit_code == 0);

    fs::create_directories(tmp / "s1");
    fs::create_directories(tmp / "s2");
    const std::string common = "suite --data " + (tmp / "dataset.csv").string() +
                               " --folds 5 --pt 0.1 --grid-c 1,2 --grid-gamma 0.5 " +
                               "--max-pairs 60 --seed 9 --out ";
    auto s1 = run_cli(tmp, common + (tmp / "s1").string());
    REQUIRE_MESSAGE(s1.exit_code == 0, s1.err);
    auto s2 = run_cli(tmp, common + (tmp / "s2").string());
    REQUIRE_MESSAGE(s2.exit_code == 0, s2.err);

    for (const char* name : {"summary.csv", "summary.json", "manifest.json"}) {
        CHECK(slurp(tmp / "s1" / name) == slurp(tmp / "s2" / name));
        CHECK(!slurp(tmp / "s1" / name).empty());
    }

    auto summary = nlohmann::json::parse(slurp(tmp / "s1" / "summary.json"));
    REQUIRE(summary.is_array());
    CHECK(summary.size() == 24);
    // stdout carries one line per entry, led by the feature set name
    CHECK(s1.out.find("styles") != std::string::npos);
    CHECK(s1.out.find("metrics") != std::string::npos);
    CHECK(std::count(s1.out.begin(), s1.out.end(), '\n') >= 24);
}
