#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "in2v/errors.hpp"
#include "in2v/experiment.hpp"

namespace {

using namespace in2v;
using nlohmann::json;

void write_provenance(const std::string& artifact_path, const std::string& cfg_json,
                      std::uint64_t seed) {
    json j{{"config_hash", config_hash(cfg_json)},
           {"config", json::parse(cfg_json)},
           {"seed", seed},
           {"toolkit_version", kToolkitVersion}};
    std::ofstream out(artifact_path + ".meta.json");
    out << j.dump(2) << '\n';
}

int cmd_stats(const std::string& edges, const std::string& labels,
              const std::string& features, bool as_json) {
    DatasetPaths paths{edges, labels, features};
    const Dataset data = load_dataset(paths);
    const double hom = adjusted_homophily(data.graph, data.labels);
    json j{{"num_nodes", data.graph.num_nodes()},
           {"directed_edges", data.graph.directed_edge_count()},
           {"undirected_edges", data.graph.directed_edge_count() / 2},
           {"num_classes", data.labels.num_classes},
           {"adjusted_homophily", hom}};
    if (data.features) j["feature_dim"] = data.features->dim;
    if (as_json) {
        std::cout << j.dump(2) << '\n';
    } else {
        if (data.features) std::cout << "|X| " << data.features->dim << '\n';
        std::cout << "|V| " << data.graph.num_nodes() << '\n'
                  << "|E| " << data.graph.directed_edge_count() << " directed ("
                  << data.graph.directed_edge_count() / 2 << " undirected)\n"
                  << "|C| " << data.labels.num_classes << '\n'
                  << "hom_adj " << hom << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"iN2V: inductive node2vec embeddings with post-hoc extension"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    std::uint32_t threads = 0;
    app.add_option("--seed", seed, "Global RNG seed")->capture_default_str();
    app.add_option("--threads", threads, "Worker threads (0 = logical cores)");

    // stats
    auto* stats = app.add_subcommand("stats", "Print dataset statistics");
    std::string edges, labels, features;
    bool stats_json = false;
    stats->add_option("--edges", edges, "Edge list file")->required();
    stats->add_option("--labels", labels, "Labels file")->required();
    stats->add_option("--features", features, "Features file");
    stats->add_flag("--json", stats_json, "Emit JSON");

    // split
    auto* split_cmd = app.add_subcommand("split", "Generate a train/val/test split");
    std::uint32_t split_n = 0;
    std::string split_edges;
    double fraction = 0.4;
    std::string out_path = "split.json";
    split_cmd->add_option("--n", split_n, "Node count (alternative to --edges)");
    split_cmd->add_option("--edges", split_edges, "Edge list to take the node count from");
    split_cmd->add_option("--fraction", fraction, "Training fraction")->required();
    split_cmd->add_option("--out", out_path, "Output split JSON")->capture_default_str();

    // train
    auto* train_cmd = app.add_subcommand("train", "Train embeddings on a training subgraph");
    std::string train_edges, train_split, train_cfg_path, train_out = "embeddings.bin";
    train_cmd->add_option("--edges", train_edges, "Edge list file")->required();
    train_cmd->add_option("--split", train_split,
                          "Split JSON; trains on the induced training subgraph "
                          "(omit for transductive training on the full graph)");
    train_cmd->add_option("--config", train_cfg_path, "TrainConfig JSON file");
    train_cmd->add_option("--out", train_out, "Output embedding file")->capture_default_str();

    // extend
    auto* extend_cmd = app.add_subcommand("extend", "Extend embeddings to the full graph");
    std::string ext_edges, ext_split, ext_emb, ext_method = "in2v",
                ext_out = "extended.bin";
    double lambda = 1.0;
    std::uint32_t delay = 0, iterations = 40;
    std::string matmul_norm = "row";
    extend_cmd->add_option("--edges", ext_edges, "Full-graph edge list")->required();
    extend_cmd->add_option("--split", ext_split, "Split JSON")->required();
    extend_cmd->add_option("--embeddings", ext_emb, "Trained embedding file")->required();
    extend_cmd->add_option("--method", ext_method, "in2v | feature_propagation | matmul")
        ->capture_default_str();
    extend_cmd->add_option("--lambda", lambda, "Own-vs-mean mixing weight");
    extend_cmd->add_option("--delay", delay, "Extra iterations after coverage");
    extend_cmd->add_option("--iterations", iterations, "FP / MatMul iteration count");
    extend_cmd->add_option("--matmul-norm", matmul_norm, "raw | row | sym");
    extend_cmd->add_option("--out", ext_out, "Output embedding file")->capture_default_str();

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Classify nodes from extended embeddings");
    std::string ev_emb, ev_labels, ev_split, ev_clf_path, ev_features;
    eval_cmd->add_option("--embeddings", ev_emb, "Full-graph embedding file")->required();
    eval_cmd->add_option("--labels", ev_labels, "Labels file")->required();
    eval_cmd->add_option("--split", ev_split, "Split JSON")->required();
    eval_cmd->add_option("--classifier", ev_clf_path, "ClassifierConfig JSON file");
    eval_cmd->add_option("--features", ev_features, "Optional features to concatenate");

    // experiment
    auto* exp_cmd = app.add_subcommand("experiment", "Run a full end-to-end experiment");
    std::string spec_path, exp_out;
    exp_cmd->add_option("--spec", spec_path, "ExperimentSpec JSON file")->required();
    exp_cmd->add_option("--out", exp_out, "Override the spec's output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*stats) return cmd_stats(edges, labels, features, stats_json);

        if (*split_cmd) {
            NodeId n = split_n;
            if (!split_edges.empty()) n = load_edge_list(split_edges).num_nodes();
            if (n == 0) throw ValidationError("split: provide --n or --edges");
            const SplitAssignment s = make_split(n, fraction, seed);
            save_split(s, out_path);
            std::cout << "split written to " << out_path << " (train " << s.train.size()
                      << ", val " << s.val.size() << ", test " << s.test.size() << ")\n";
            return 0;
        }

        if (*train_cmd) {
            const Graph g_full = load_edge_list(train_edges);
            TrainConfig cfg;
            if (!train_cfg_path.empty()) {
                std::ifstream in(train_cfg_path);
                if (!in) throw ParseError("cannot open config: " + train_cfg_path);
                std::stringstream ss;
                ss << in.rdbuf();
                cfg = train_config_from_json(ss.str());
            }
            cfg.seed = seed;
            TrainResult result;
            if (!train_split.empty()) {
                const SplitAssignment s = load_split(train_split);
                auto [g_train, mapping] = induced_subgraph(g_full, s.train);
                result = train(g_train, cfg);
            } else {
                result = train(g_full, cfg);
            }
            save_embeddings(result.emb, train_out);
            write_provenance(train_out, train_config_to_json(cfg), seed);
            std::cout << "trained " << result.emb.n << "x" << result.emb.d << " embeddings in "
                      << result.epochs_run << " epochs (best loss " << result.best_loss
                      << " at epoch " << result.best_epoch << ") -> " << train_out << '\n';
            return 0;
        }

        if (*extend_cmd) {
            const Graph g_full = load_edge_list(ext_edges);
            const SplitAssignment s = load_split(ext_split);
            const EmbeddingMatrix emb_train = load_embeddings(ext_emb);
            std::vector<bool> mask(g_full.num_nodes(), false);
            for (NodeId v : s.train) mask[v] = true;
            std::vector<NodeId> sub_to_full(s.train.begin(), s.train.end());

            ExtendConfig cfg;
            cfg.lambda = lambda;
            cfg.delay = delay;
            cfg.fp_iterations = iterations;
            cfg.matmul_iterations = iterations;
            if (matmul_norm == "raw") cfg.matmul_norm = AdjacencyNorm::Raw;
            else if (matmul_norm == "row") cfg.matmul_norm = AdjacencyNorm::Row;
            else if (matmul_norm == "sym") cfg.matmul_norm = AdjacencyNorm::Sym;
            else throw ValidationError("unknown --matmul-norm: " + matmul_norm);

            ExtendReport report;
            EmbeddingMatrix out;
            if (ext_method == "in2v") {
                cfg.method = ExtendMethod::In2v;
                out = in2v_extend(emb_train, g_full, sub_to_full, mask, cfg, &report);
            } else if (ext_method == "feature_propagation") {
                cfg.method = ExtendMethod::FeaturePropagation;
                out = feature_propagation(emb_train, g_full, sub_to_full, mask,
                                          cfg.fp_iterations, &report);
            } else if (ext_method == "matmul") {
                cfg.method = ExtendMethod::MatMul;
                out = matmul_extend(emb_train, g_full, sub_to_full, mask,
                                    cfg.matmul_iterations, cfg.matmul_norm, &report);
            } else {
                throw ValidationError("unknown --method: " + ext_method);
            }
            save_embeddings(out, ext_out);
            write_provenance(ext_out, extend_config_to_json(cfg), seed);
            std::ofstream rep(ext_out + ".report.json");
            rep << report.to_json() << '\n';
            std::cout << report.to_json() << '\n';
            return 0;
        }

        if (*eval_cmd) {
            const EmbeddingMatrix emb = load_embeddings(ev_emb);
            const NodeLabels y = load_labels(ev_labels, emb.n);
            const SplitAssignment s = load_split(ev_split);
            ClassifierConfig cfg;
            if (!ev_clf_path.empty()) {
                std::ifstream in(ev_clf_path);
                if (!in) throw ParseError("cannot open classifier config: " + ev_clf_path);
                std::stringstream ss;
                ss << in.rdbuf();
                cfg = classifier_config_from_json(ss.str());
            }
            FeatureMatrix X = as_features(emb);
            if (!ev_features.empty())
                X = concat_features(emb, load_features(ev_features, emb.n));
            double val_acc, test_acc;
            if (cfg.kind == ClassifierConfig::Kind::LogReg) {
                const LinearModel m = train_logreg(X, y.labels, s.train, cfg.weight_decay);
                val_acc = accuracy(m, X, y.labels, s.val);
                test_acc = accuracy(m, X, y.labels, s.test);
            } else {
                const MlpModel m = train_mlp(X, y.labels, s.train, s.val, cfg, seed);
                val_acc = accuracy(m, X, y.labels, s.val);
                test_acc = accuracy(m, X, y.labels, s.test);
            }
            json j{{"val_accuracy", val_acc},
                   {"test_accuracy", test_acc},
                   {"classifier_config", json::parse(classifier_config_to_json(cfg))},
                   {"seed", seed},
                   {"toolkit_version", kToolkitVersion}};
            std::cout << j.dump(2) << '\n';
            return 0;
        }

        if (*exp_cmd) {
            ExperimentSpec spec = ExperimentSpec::from_json_file(spec_path);
            if (!exp_out.empty()) spec.output_dir = exp_out;
            if (threads != 0) spec.threads = threads;
            const ExperimentResult result = run_experiment(spec);
            for (const auto& r : result.reports)
                std::cout << method_name(r.method) << " f=" << r.fraction << " mean="
                          << r.mean << " std=" << r.stddev << '\n';
            std::cout << "summary: " << spec.output_dir << "/reports/summary.csv\n";
            return 0;
        }
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
