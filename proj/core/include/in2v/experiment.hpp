#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "in2v/classify.hpp"
#include "in2v/extend.hpp"
#include "in2v/graph.hpp"
#include "in2v/split.hpp"
#include "in2v/train.hpp"

namespace in2v {

inline constexpr const char* kToolkitVersion = "0.1.0";

// Table-row setups evaluated by cmd_experiment.
enum class Method {
    Inductive,          // no extension: only training nodes have embeddings
    FeaturePropagation, // FP-extended plain N2V embeddings
    In2vFrozen,         // post-hoc with lambda = 1
    In2vPostHoc,        // post-hoc with searched lambda/delay
    PostHocLosses,      // post-hoc on loss-modified (alpha, beta) embeddings
    PostHocSampling,    // post-hoc on sampling-modified (r) embeddings
};

std::string method_name(Method m);
Method method_from_name(const std::string& name);

struct DatasetPaths {
    std::string edges;
    std::string labels;
    std::string features; // optional
};

struct Dataset {
    Graph graph;
    NodeLabels labels;
    std::optional<FeatureMatrix> features;
};

Dataset load_dataset(const DatasetPaths& paths);

struct EmbeddingCandidate {
    TrainConfig train;
    ExtendConfig extend;
};

struct ExperimentSpec {
    DatasetPaths dataset;
    std::vector<double> fractions{0.4};
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::uint32_t search_splits = 3;
    std::vector<Method> methods{Method::Inductive, Method::FeaturePropagation,
                                Method::In2vFrozen, Method::In2vPostHoc,
                                Method::PostHocLosses, Method::PostHocSampling};
    std::vector<TrainConfig> train_grid;        // alpha=beta=r=0 base configs
    std::vector<std::pair<double, double>> loss_grid;   // (alpha, beta) candidates
    std::vector<double> sample_grid;            // r candidates
    std::vector<ExtendConfig> extend_grid;      // lambda/delay candidates
    std::vector<std::uint32_t> fp_iterations_grid{10, 20, 40, 60};
    std::vector<ClassifierConfig> classifier_grid;
    bool use_original_features = false;
    std::string output_dir = "out";
    std::uint32_t threads = 0; // 0 = logical cores

    static ExperimentSpec from_json_file(const std::string& path);
    static ExperimentSpec from_json(const std::string& text);
};

// Trains embeddings on the split's training subgraph and extends them to the
// full graph with the requested method. Returns the full-graph matrix.
EmbeddingMatrix embed_and_extend(const Graph& g_full, const SplitAssignment& split,
                                 const TrainConfig& train_cfg, Method method,
                                 const ExtendConfig& extend_cfg,
                                 ExtendReport* report = nullptr);

// Grid search of §-style protocol: averaged logistic-regression validation
// accuracy over the search splits; ties resolve to the first candidate.
std::size_t select_embedding_config(const std::vector<EmbeddingCandidate>& candidates,
                                    const Dataset& data,
                                    const std::vector<SplitAssignment>& search_splits,
                                    Method method, double logreg_l2 = 1e-4,
                                    std::uint32_t threads = 0);

struct EvalRecord {
    Method method = Method::Inductive;
    double fraction = 0.0;
    std::uint64_t seed = 0;
    double test_accuracy = 0.0;
    double val_accuracy = 0.0;
    std::string train_config;
    std::string extend_config;
    std::string classifier_config;
};

struct EvalReport {
    Method method = Method::Inductive;
    double fraction = 0.0;
    std::vector<EvalRecord> per_seed;
    double mean = 0.0;
    double stddev = 0.0;

    void finalize(); // recompute mean/std from per_seed
    std::string to_json() const;
};

struct ExperimentResult {
    std::vector<EvalReport> reports;
    std::string summary_csv; // byte-deterministic for a fixed spec
};

ExperimentResult run_experiment(const ExperimentSpec& spec);

// Serialization helpers shared by CLI artifacts.
std::string train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const std::string& text);
std::string extend_config_to_json(const ExtendConfig& cfg);
ExtendConfig extend_config_from_json(const std::string& text);
std::string classifier_config_to_json(const ClassifierConfig& cfg);
ClassifierConfig classifier_config_from_json(const std::string& text);

// FNV-1a hash of a config's JSON form; used for cache-aware artifact names.
std::string config_hash(const std::string& json_text);

} // namespace in2v
