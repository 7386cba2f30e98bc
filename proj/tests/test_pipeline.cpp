#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "in2v/embedding.hpp"
#include "in2v/errors.hpp"
#include "in2v/experiment.hpp"
#include "in2v/rng.hpp"
#include "test_util.hpp"

using namespace in2v;
namespace fs = std::filesystem;

namespace {

struct CmdResult {
    int exit_code;
    std::string output;
};

CmdResult run_cli(const std::string& args) {
    const std::string cmd = std::string(IN2V_CLI_PATH) + " " + args + " 2>&1";
    std::array<char, 4096> buf{};
    std::string out;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    while (fgets(buf.data(), buf.size(), pipe) != nullptr) out += buf.data();
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

fs::path work_dir() {
    static fs::path dir = [] {
        auto p = fs::temp_directory_path() / ("in2v_pipeline_" + std::to_string(::getpid()));
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const std::string kToyEdges = testutil::data_path("toy/edges.txt");
const std::string kToyLabels = testutil::data_path("toy/labels.txt");

} // namespace

TEST_CASE("embedding binary format round-trips") {
    EmbeddingMatrix emb(7, 3);
    Rng rng(1);
    for (auto& x : emb.values) x = static_cast<float>(rng.next_double(-1.0, 1.0));
    const auto path = (work_dir() / "roundtrip.bin").string();
    save_embeddings(emb, path);
    CHECK(load_embeddings(path) == emb);

    // header check: magic + version + dims
    const std::string bytes = read_file(path);
    REQUIRE(bytes.size() == 4 + 2 + 4 + 4 + 7 * 3 * 4);
    CHECK(bytes.substr(0, 4) == "IN2V");
    CHECK(bytes[4] == 1);
    CHECK(bytes[5] == 0);
}

TEST_CASE("embedding loader rejects corrupt files") {
    const auto path = (work_dir() / "corrupt.bin").string();
    {
        std::ofstream out(path, std::ios::binary);
        out << "NOPE";
    }
    CHECK_THROWS_AS(load_embeddings(path), ParseError);
    CHECK_THROWS_AS(load_embeddings((work_dir() / "missing.bin").string()), ParseError);
}

TEST_CASE("embeddings TSV export") {
    EmbeddingMatrix emb(2, 2);
    emb.values = {1.0f, 2.0f, 3.0f, 4.0f};
    const auto path = (work_dir() / "emb.tsv").string();
    save_embeddings_tsv(emb, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "0\t1 2");
    std::getline(in, line);
    CHECK(line == "1\t3 4");
}

TEST_CASE("cli split applies the floor rule to Cora-sized input") {
    const auto out = (work_dir() / "split_cora.json").string();
    CmdResult r = run_cli("split --n 2708 --fraction 0.4 --out " + out);
    CHECK(r.exit_code == 0);
    SplitAssignment s = load_split(out);
    CHECK(s.train.size() == 1083);
    CHECK(s.num_nodes() == 2708);
}

TEST_CASE("cli stats emits toy dataset statistics as JSON") {
    CmdResult r = run_cli("stats --json --edges " + kToyEdges + " --labels " + kToyLabels);
    CHECK(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.output);
    CHECK(j["num_nodes"] == 24);
    CHECK(j["directed_edges"] == 100);
    CHECK(j["num_classes"] == 2);
    CHECK(j["adjusted_homophily"].get<double>() > 0.8);
}

TEST_CASE("cli exit codes distinguish usage and data errors") {
    CHECK(run_cli("split --fraction 0.4").exit_code == 2);      // neither --n nor --edges
    CHECK(run_cli("frobnicate").exit_code == 1);                // unknown subcommand
    CHECK(run_cli("stats --edges /nope --labels /nope").exit_code == 2);
    CHECK(run_cli("split --n 10 --fraction 7 --out " +
                  (work_dir() / "bad.json").string())
              .exit_code == 2); // fraction outside (0,1)
}

TEST_CASE("cli train/extend/eval end-to-end on the toy dataset") {
    const auto dir = work_dir();
    const auto split = (dir / "toy_split.json").string();
    const auto emb = (dir / "toy_emb.bin").string();
    const auto ext = (dir / "toy_ext.bin").string();
    const auto cfg = (dir / "train_cfg.json").string();
    {
        std::ofstream out(cfg);
        out << R"({"dim":8,"max_epochs":40,"patience":10,"walk_length":10,"walks_per_node":5,"learning_rate":0.05})";
    }

    REQUIRE(run_cli("--seed 1 split --edges " + kToyEdges + " --fraction 0.5 --out " + split)
                .exit_code == 0);
    REQUIRE(run_cli("--seed 1 train --edges " + kToyEdges + " --split " + split +
                    " --config " + cfg + " --out " + emb)
                .exit_code == 0);
    CHECK(fs::exists(emb + ".meta.json")); // provenance sidecar

    CmdResult ext_r = run_cli("extend --edges " + kToyEdges + " --split " + split +
                              " --embeddings " + emb + " --method in2v --lambda 0.75 --delay 2 --out " + ext);
    REQUIRE(ext_r.exit_code == 0);
    auto report = nlohmann::json::parse(ext_r.output);
    CHECK(report["method"] == "in2v");
    CHECK(report["nodes_unreachable"] == 0); // toy graph is connected

    CmdResult ev = run_cli("eval --embeddings " + ext + " --labels " + kToyLabels +
                           " --split " + split);
    REQUIRE(ev.exit_code == 0);
    auto j = nlohmann::json::parse(ev.output);
    CHECK(j["test_accuracy"].get<double>() >= 0.0);
    CHECK(j["test_accuracy"].get<double>() <= 1.0);

    // feature_propagation path reports zero unreachable as well
    CmdResult fp = run_cli("extend --edges " + kToyEdges + " --split " + split +
                           " --embeddings " + emb +
                           " --method feature_propagation --iterations 20 --out " +
                           (dir / "toy_fp.bin").string());
    REQUIRE(fp.exit_code == 0);
    CHECK(nlohmann::json::parse(fp.output)["nodes_unreachable"] == 0);
}

TEST_CASE("rerunning cli train with the same config reproduces the file bytes") {
    const auto dir = work_dir();
    const auto split = (dir / "det_split.json").string();
    REQUIRE(run_cli("--seed 4 split --edges " + kToyEdges + " --fraction 0.4 --out " + split)
                .exit_code == 0);
    const auto a = (dir / "det_a.bin").string();
    const auto b = (dir / "det_b.bin").string();
    const std::string train_args = "--seed 4 train --edges " + kToyEdges + " --split " +
                                   split + " --out ";
    REQUIRE(run_cli(train_args + a).exit_code == 0);
    REQUIRE(run_cli(train_args + b).exit_code == 0);
    CHECK(read_file(a) == read_file(b));
}

TEST_CASE("experiment subcommand writes reports and a summary CSV") {
    const auto dir = work_dir();
    const auto spec = (dir / "spec.json").string();
    {
        std::ofstream out(spec);
        out << R"({
          "dataset": {"edges": ")" << kToyEdges << R"(", "labels": ")" << kToyLabels << R"("},
          "fractions": [0.4],
          "seeds": [0, 1],
          "search_splits": 1,
          "methods": ["inductive", "in2v_posthoc"],
          "train_grid": [{"dim": 8, "walk_length": 10, "walks_per_node": 5, "max_epochs": 15, "patience": 5}],
          "extend_grid": [{"lambda": 0.75, "delay": 2}],
          "classifier_grid": [{"kind": "logreg"}],
          "output_dir": ")" << (dir / "exp").string() << R"("
        })";
    }
    CmdResult r = run_cli("experiment --spec " + spec);
    REQUIRE(r.exit_code == 0);
    const auto csv_path = dir / "exp" / "reports" / "summary.csv";
    REQUIRE(fs::exists(csv_path));
    const std::string csv = read_file(csv_path);
    CHECK(csv.find("inductive,0.4,0,") != std::string::npos);
    CHECK(csv.find("in2v_posthoc,0.4,1,") != std::string::npos);
    CHECK(fs::exists(dir / "exp" / "reports" / "report_inductive_f0.4.json"));

    // every row carries full config provenance
    auto rep = nlohmann::json::parse(read_file(dir / "exp" / "reports" /
                                               "report_in2v_posthoc_f0.4.json"));
    for (const auto& rec : rep["per_seed"]) {
        CHECK(rec["train_config"].is_object());
        CHECK(rec["extend_config"].is_object());
        CHECK(rec["classifier_config"].is_object());
        CHECK(rec.contains("seed"));
    }
}
