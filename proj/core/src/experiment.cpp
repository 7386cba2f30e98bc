#include "in2v/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "in2v/errors.hpp"

namespace in2v {

namespace {

using nlohmann::json;

void parallel_for(std::size_t count, std::uint32_t threads, auto&& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<std::uint32_t>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    for (std::uint32_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count || failed.load()) return;
                try {
                    fn(i);
                } catch (...) {
                    std::scoped_lock lock(error_mu);
                    if (!error) error = std::current_exception();
                    failed.store(true);
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

std::string fmt(double x) {
    std::ostringstream os;
    os << std::setprecision(10) << x;
    return os.str();
}

std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"'; // CSV escaping doubles quotes
        out += c;
    }
    out += '"';
    return out;
}

} // namespace

std::string method_name(Method m) {
    switch (m) {
        case Method::Inductive: return "inductive";
        case Method::FeaturePropagation: return "feature_propagation";
        case Method::In2vFrozen: return "in2v_frozen";
        case Method::In2vPostHoc: return "in2v_posthoc";
        case Method::PostHocLosses: return "posthoc_losses";
        case Method::PostHocSampling: return "posthoc_sampling";
    }
    throw ValidationError("unknown method enum");
}

Method method_from_name(const std::string& name) {
    for (Method m : {Method::Inductive, Method::FeaturePropagation, Method::In2vFrozen,
                     Method::In2vPostHoc, Method::PostHocLosses, Method::PostHocSampling})
        if (method_name(m) == name) return m;
    throw ValidationError("unknown method: " + name);
}

Dataset load_dataset(const DatasetPaths& paths) {
    Dataset data;
    data.graph = load_edge_list(paths.edges);
    data.labels = load_labels(paths.labels, data.graph.num_nodes());
    if (!paths.features.empty())
        data.features = load_features(paths.features, data.graph.num_nodes());
    return data;
}

std::string train_config_to_json(const TrainConfig& cfg) {
    json j{{"p", cfg.walk_params.p},
           {"q", cfg.walk_params.q},
           {"walk_length", cfg.walk_params.walk_length},
           {"walks_per_node", cfg.walk_params.walks_per_node},
           {"dim", cfg.dim},
           {"context_size", cfg.context_size},
           {"negatives_per_positive", cfg.negatives_per_positive},
           {"batch_size", cfg.batch_size},
           {"learning_rate", cfg.learning_rate},
           {"alpha", cfg.alpha},
           {"beta", cfg.beta},
           {"sample_rate", cfg.sample_rate},
           {"patience", cfg.patience},
           {"max_epochs", cfg.max_epochs},
           {"seed", cfg.seed}};
    return j.dump();
}

namespace {

TrainConfig train_config_from(const json& j) {
    TrainConfig cfg;
    cfg.walk_params.p = j.value("p", cfg.walk_params.p);
    cfg.walk_params.q = j.value("q", cfg.walk_params.q);
    cfg.walk_params.walk_length = j.value("walk_length", cfg.walk_params.walk_length);
    cfg.walk_params.walks_per_node = j.value("walks_per_node", cfg.walk_params.walks_per_node);
    cfg.dim = j.value("dim", cfg.dim);
    cfg.context_size = j.value("context_size", cfg.context_size);
    cfg.negatives_per_positive = j.value("negatives_per_positive", cfg.negatives_per_positive);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.alpha = j.value("alpha", cfg.alpha);
    cfg.beta = j.value("beta", cfg.beta);
    cfg.sample_rate = j.value("sample_rate", cfg.sample_rate);
    cfg.patience = j.value("patience", cfg.patience);
    cfg.max_epochs = j.value("max_epochs", cfg.max_epochs);
    cfg.seed = j.value("seed", cfg.seed);
    return cfg;
}

ExtendConfig extend_config_from(const json& j) {
    ExtendConfig cfg;
    const std::string method = j.value("method", std::string("in2v"));
    if (method == "in2v")
        cfg.method = ExtendMethod::In2v;
    else if (method == "feature_propagation")
        cfg.method = ExtendMethod::FeaturePropagation;
    else if (method == "matmul")
        cfg.method = ExtendMethod::MatMul;
    else
        throw ValidationError("unknown extend method: " + method);
    cfg.lambda = j.value("lambda", cfg.lambda);
    cfg.delay = j.value("delay", cfg.delay);
    cfg.fp_iterations = j.value("fp_iterations", cfg.fp_iterations);
    cfg.matmul_iterations = j.value("matmul_iterations", cfg.matmul_iterations);
    const std::string norm = j.value("matmul_norm", std::string("row"));
    if (norm == "raw")
        cfg.matmul_norm = AdjacencyNorm::Raw;
    else if (norm == "row")
        cfg.matmul_norm = AdjacencyNorm::Row;
    else if (norm == "sym")
        cfg.matmul_norm = AdjacencyNorm::Sym;
    else
        throw ValidationError("unknown matmul_norm: " + norm);
    return cfg;
}

ClassifierConfig classifier_config_from(const json& j) {
    ClassifierConfig cfg;
    const std::string kind = j.value("kind", std::string("mlp"));
    if (kind == "logreg")
        cfg.kind = ClassifierConfig::Kind::LogReg;
    else if (kind == "mlp")
        cfg.kind = ClassifierConfig::Kind::Mlp;
    else
        throw ValidationError("unknown classifier kind: " + kind);
    cfg.layers = j.value("layers", cfg.layers);
    cfg.hidden = j.value("hidden", cfg.hidden);
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.weight_decay = j.value("weight_decay", cfg.weight_decay);
    cfg.dropout = j.value("dropout", cfg.dropout);
    cfg.jumping_knowledge = j.value("jumping_knowledge", cfg.jumping_knowledge);
    cfg.max_epochs = j.value("max_epochs", cfg.max_epochs);
    cfg.patience = j.value("patience", cfg.patience);
    return cfg;
}

} // namespace

TrainConfig train_config_from_json(const std::string& text) {
    return train_config_from(json::parse(text));
}

std::string extend_config_to_json(const ExtendConfig& cfg) {
    std::string method;
    switch (cfg.method) {
        case ExtendMethod::In2v: method = "in2v"; break;
        case ExtendMethod::FeaturePropagation: method = "feature_propagation"; break;
        case ExtendMethod::MatMul: method = "matmul"; break;
    }
    std::string norm;
    switch (cfg.matmul_norm) {
        case AdjacencyNorm::Raw: norm = "raw"; break;
        case AdjacencyNorm::Row: norm = "row"; break;
        case AdjacencyNorm::Sym: norm = "sym"; break;
    }
    json j{{"method", method},
           {"lambda", cfg.lambda},
           {"delay", cfg.delay},
           {"fp_iterations", cfg.fp_iterations},
           {"matmul_iterations", cfg.matmul_iterations},
           {"matmul_norm", norm}};
    return j.dump();
}

ExtendConfig extend_config_from_json(const std::string& text) {
    return extend_config_from(json::parse(text));
}

std::string classifier_config_to_json(const ClassifierConfig& cfg) {
    json j{{"kind", cfg.kind == ClassifierConfig::Kind::LogReg ? "logreg" : "mlp"},
           {"layers", cfg.layers},
           {"hidden", cfg.hidden},
           {"learning_rate", cfg.learning_rate},
           {"weight_decay", cfg.weight_decay},
           {"dropout", cfg.dropout},
           {"jumping_knowledge", cfg.jumping_knowledge},
           {"max_epochs", cfg.max_epochs},
           {"patience", cfg.patience}};
    return j.dump();
}

ClassifierConfig classifier_config_from_json(const std::string& text) {
    return classifier_config_from(json::parse(text));
}

std::string config_hash(const std::string& json_text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : json_text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

ExperimentSpec ExperimentSpec::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open experiment spec: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

ExperimentSpec ExperimentSpec::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid experiment spec JSON: ") + e.what());
    }
    ExperimentSpec spec;
    const auto& ds = j.at("dataset");
    spec.dataset.edges = ds.at("edges").get<std::string>();
    spec.dataset.labels = ds.at("labels").get<std::string>();
    spec.dataset.features = ds.value("features", std::string());
    if (j.contains("fractions")) spec.fractions = j["fractions"].get<std::vector<double>>();
    if (j.contains("seeds")) spec.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    spec.search_splits = j.value("search_splits", spec.search_splits);
    if (j.contains("methods")) {
        spec.methods.clear();
        for (const auto& m : j["methods"]) spec.methods.push_back(method_from_name(m));
    }
    if (j.contains("train_grid")) {
        for (const auto& t : j["train_grid"]) spec.train_grid.push_back(train_config_from(t));
    }
    if (spec.train_grid.empty()) spec.train_grid.push_back(TrainConfig{});
    if (j.contains("loss_grid")) {
        for (const auto& ab : j["loss_grid"])
            spec.loss_grid.emplace_back(ab.at(0).get<double>(), ab.at(1).get<double>());
    } else {
        spec.loss_grid = {{0.1, 0.001}, {1.0, 0.01}};
    }
    if (j.contains("sample_grid"))
        spec.sample_grid = j["sample_grid"].get<std::vector<double>>();
    else
        spec.sample_grid = {0.2, 0.4};
    if (j.contains("extend_grid")) {
        for (const auto& e : j["extend_grid"]) spec.extend_grid.push_back(extend_config_from(e));
    } else {
        for (double lam : {0.5, 0.75, 0.9, 1.0})
            for (std::uint32_t delay : {0u, 1u, 2u, 5u, 10u}) {
                ExtendConfig e;
                e.lambda = lam;
                e.delay = delay;
                spec.extend_grid.push_back(e);
            }
    }
    if (j.contains("fp_iterations_grid"))
        spec.fp_iterations_grid = j["fp_iterations_grid"].get<std::vector<std::uint32_t>>();
    if (j.contains("classifier_grid")) {
        for (const auto& c : j["classifier_grid"])
            spec.classifier_grid.push_back(classifier_config_from(c));
    } else {
        // desk-scale reduced grid
        for (std::uint32_t layers : {2u, 3u})
            for (double wd : {0.0, 1e-4}) {
                ClassifierConfig c;
                c.layers = layers;
                c.hidden = 64;
                c.learning_rate = 0.01;
                c.weight_decay = wd;
                c.dropout = 0.5;
                spec.classifier_grid.push_back(c);
            }
    }
    spec.use_original_features = j.value("use_original_features", false);
    spec.output_dir = j.value("output_dir", spec.output_dir);
    spec.threads = j.value("threads", spec.threads);
    if (spec.fractions.empty() || spec.seeds.empty() || spec.methods.empty())
        throw ValidationError("experiment spec: fractions, seeds, and methods must be non-empty");
    return spec;
}

namespace {

// Raw train-subgraph embeddings can be shared across candidates and methods:
// the training stream key depends only on the train config seed and the split
// seed, so two calls with the same train config and split produce identical
// rows no matter how the result is extended afterwards.
struct TrainCache {
    std::mutex mu;
    std::unordered_map<std::string, std::shared_ptr<const EmbeddingMatrix>> rows;
};

std::shared_ptr<const EmbeddingMatrix> trained_rows(const Graph& g_full,
                                                    const SplitAssignment& split,
                                                    const TrainConfig& train_cfg,
                                                    TrainCache* cache) {
    std::string key;
    if (cache) {
        key = train_config_to_json(train_cfg) + '|' + fmt(split.train_fraction) + '|' +
              std::to_string(split.seed);
        std::scoped_lock lock(cache->mu);
        if (auto it = cache->rows.find(key); it != cache->rows.end()) return it->second;
    }
    auto [g_train, mapping] = induced_subgraph(g_full, split.train);
    TrainConfig cfg = train_cfg;
    cfg.seed = stream_key(train_cfg.seed, split.seed, 0x454d4244ULL); // "EMBD"
    auto emb = std::make_shared<const EmbeddingMatrix>(train(g_train, cfg).emb);
    if (cache) {
        std::scoped_lock lock(cache->mu);
        cache->rows.emplace(std::move(key), emb);
    }
    return emb;
}

EmbeddingMatrix extend_trained(const EmbeddingMatrix& sub_emb, const Graph& g_full,
                               const SplitAssignment& split, Method method,
                               const ExtendConfig& extend_cfg, ExtendReport* report) {
    // induced_subgraph indexes kept nodes in ascending full-id order.
    std::vector<NodeId> sub_to_full = split.train;
    std::sort(sub_to_full.begin(), sub_to_full.end());
    std::vector<bool> train_mask(g_full.num_nodes(), false);
    for (NodeId v : split.train) train_mask[v] = true;

    switch (method) {
        case Method::Inductive: {
            if (report) {
                report->method = "inductive";
                report->iterations_run = 0;
            }
            return scatter_to_full(sub_emb, g_full.num_nodes(), sub_to_full);
        }
        case Method::FeaturePropagation:
            return feature_propagation(sub_emb, g_full, sub_to_full, train_mask,
                                       extend_cfg.fp_iterations, report);
        case Method::In2vFrozen: {
            ExtendConfig frozen = extend_cfg;
            frozen.lambda = 1.0;
            frozen.delay = 0;
            return in2v_extend(sub_emb, g_full, sub_to_full, train_mask, frozen, report);
        }
        case Method::In2vPostHoc:
        case Method::PostHocLosses:
        case Method::PostHocSampling:
            return in2v_extend(sub_emb, g_full, sub_to_full, train_mask, extend_cfg, report);
    }
    throw ValidationError("unknown method");
}

} // namespace

EmbeddingMatrix embed_and_extend(const Graph& g_full, const SplitAssignment& split,
                                 const TrainConfig& train_cfg, Method method,
                                 const ExtendConfig& extend_cfg, ExtendReport* report) {
    const auto emb = trained_rows(g_full, split, train_cfg, nullptr);
    return extend_trained(*emb, g_full, split, method, extend_cfg, report);
}

namespace {

std::size_t select_with_cache(const std::vector<EmbeddingCandidate>& candidates,
                              const Dataset& data,
                              const std::vector<SplitAssignment>& search_splits,
                              Method method, double logreg_l2, std::uint32_t threads,
                              TrainCache& cache) {
    if (candidates.empty()) throw ValidationError("select_embedding_config: no candidates");
    if (search_splits.empty())
        throw ValidationError("select_embedding_config: no search splits");
    if (candidates.size() == 1) return 0;

    const std::size_t cells = candidates.size() * search_splits.size();
    std::vector<double> val_acc(cells, 0.0);
    parallel_for(cells, threads, [&](std::size_t cell) {
        const std::size_t ci = cell / search_splits.size();
        const std::size_t si = cell % search_splits.size();
        const auto& cand = candidates[ci];
        const auto& split = search_splits[si];
        double acc = 0.0;
        try {
            const auto rows = trained_rows(data.graph, split, cand.train, &cache);
            const EmbeddingMatrix emb =
                extend_trained(*rows, data.graph, split, method, cand.extend, nullptr);
            const FeatureMatrix X = as_features(emb);
            const LinearModel lr = train_logreg(X, data.labels.labels, split.train, logreg_l2);
            acc = accuracy(lr, X, data.labels.labels, split.val);
        } catch (const NumericalError&) {
            acc = -1.0; // divergent candidate loses
        }
        val_acc[cell] = acc;
    });

    std::size_t best = 0;
    double best_acc = -2.0;
    for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
        double mean = 0.0;
        for (std::size_t si = 0; si < search_splits.size(); ++si)
            mean += val_acc[ci * search_splits.size() + si];
        mean /= static_cast<double>(search_splits.size());
        if (mean > best_acc) { // strict: ties keep the first candidate
            best_acc = mean;
            best = ci;
        }
    }
    return best;
}

} // namespace

std::size_t select_embedding_config(const std::vector<EmbeddingCandidate>& candidates,
                                    const Dataset& data,
                                    const std::vector<SplitAssignment>& search_splits,
                                    Method method, double logreg_l2, std::uint32_t threads) {
    TrainCache cache; // dedup trainings shared by candidates that differ only in extension
    return select_with_cache(candidates, data, search_splits, method, logreg_l2, threads,
                             cache);
}

void EvalReport::finalize() {
    mean = 0.0;
    for (const auto& r : per_seed) mean += r.test_accuracy;
    if (!per_seed.empty()) mean /= static_cast<double>(per_seed.size());
    double var = 0.0;
    for (const auto& r : per_seed) var += (r.test_accuracy - mean) * (r.test_accuracy - mean);
    stddev = per_seed.size() > 1 ? std::sqrt(var / static_cast<double>(per_seed.size() - 1)) : 0.0;
}

std::string EvalReport::to_json() const {
    json seeds = json::array();
    for (const auto& r : per_seed)
        seeds.push_back({{"seed", r.seed},
                         {"test_accuracy", r.test_accuracy},
                         {"val_accuracy", r.val_accuracy},
                         {"train_config", json::parse(r.train_config)},
                         {"extend_config", json::parse(r.extend_config)},
                         {"classifier_config", json::parse(r.classifier_config)}});
    json j{{"method", method_name(method)}, {"fraction", fraction},
           {"mean", mean},                  {"stddev", stddev},
           {"per_seed", seeds},             {"toolkit_version", kToolkitVersion}};
    return j.dump(2);
}

namespace {

std::vector<EmbeddingCandidate> build_candidates(const ExperimentSpec& spec, Method method) {
    std::vector<EmbeddingCandidate> out;
    switch (method) {
        case Method::Inductive:
            for (const auto& t : spec.train_grid) out.push_back({t, ExtendConfig{}});
            break;
        case Method::FeaturePropagation:
            for (const auto& t : spec.train_grid)
                for (std::uint32_t it : spec.fp_iterations_grid) {
                    ExtendConfig e;
                    e.method = ExtendMethod::FeaturePropagation;
                    e.fp_iterations = it;
                    out.push_back({t, e});
                }
            break;
        case Method::In2vFrozen:
            for (const auto& t : spec.train_grid) {
                ExtendConfig e;
                e.lambda = 1.0;
                e.delay = 0;
                out.push_back({t, e});
            }
            break;
        case Method::In2vPostHoc:
            for (const auto& t : spec.train_grid)
                for (const auto& e : spec.extend_grid) out.push_back({t, e});
            break;
        case Method::PostHocLosses:
            for (const auto& t : spec.train_grid)
                for (const auto& [alpha, beta] : spec.loss_grid)
                    for (const auto& e : spec.extend_grid) {
                        TrainConfig tc = t;
                        tc.alpha = alpha;
                        tc.beta = beta;
                        out.push_back({tc, e});
                    }
            break;
        case Method::PostHocSampling:
            for (const auto& t : spec.train_grid)
                for (double r : spec.sample_grid)
                    for (const auto& e : spec.extend_grid) {
                        TrainConfig tc = t;
                        tc.sample_rate = r;
                        out.push_back({tc, e});
                    }
            break;
    }
    return out;
}

} // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    namespace fs = std::filesystem;
    const Dataset data = load_dataset(spec.dataset);

    const fs::path out_dir(spec.output_dir);
    for (const char* sub : {"splits", "embeddings", "extended", "reports"})
        fs::create_directories(out_dir / sub);

    ExperimentResult result;
    // One raw-embedding cache for the whole run: the search splits are a prefix
    // of the per-seed splits, so selection and final evaluation share trainings,
    // as do methods that differ only in how the embedding is extended.
    TrainCache train_cache;
    std::ostringstream csv;
    csv << "method,fraction,seed,test_accuracy,val_accuracy,train_config_hash,"
           "extend_config_hash,classifier_config_hash,train_config,extend_config,"
           "classifier_config,toolkit_version\n";

    for (double fraction : spec.fractions) {
        std::vector<SplitAssignment> splits;
        for (std::uint64_t seed : spec.seeds)
            splits.push_back(make_split(data.graph.num_nodes(), fraction, seed));
        for (const auto& s : splits) {
            std::ostringstream name;
            name << "split_f" << fmt(fraction) << "_s" << s.seed << ".json";
            save_split(s, (out_dir / "splits" / name.str()).string());
        }
        const std::size_t n_search =
            std::min<std::size_t>(spec.search_splits, splits.size());
        const std::vector<SplitAssignment> search(splits.begin(), splits.begin() + n_search);

        for (Method method : spec.methods) {
            const auto candidates = build_candidates(spec, method);
            const std::size_t best_ci = select_with_cache(candidates, data, search, method,
                                                          1e-4, spec.threads, train_cache);
            const EmbeddingCandidate& cand = candidates[best_ci];
            const std::string train_json = train_config_to_json(cand.train);
            const std::string extend_json = extend_config_to_json(cand.extend);

            // Per-seed embeddings with cache-aware artifact reuse.
            std::vector<EmbeddingMatrix> embeddings(splits.size());
            parallel_for(splits.size(), spec.threads, [&](std::size_t si) {
                const std::string key = config_hash(
                    train_json + extend_json + method_name(method) + fmt(fraction) +
                    std::to_string(splits[si].seed));
                const fs::path cache = out_dir / "embeddings" / ("emb_" + key + ".bin");
                if (fs::exists(cache)) {
                    embeddings[si] = load_embeddings(cache.string());
                    return;
                }
                ExtendReport report;
                const auto rows = trained_rows(data.graph, splits[si], cand.train,
                                               &train_cache);
                embeddings[si] = extend_trained(*rows, data.graph, splits[si], method,
                                                cand.extend, &report);
                save_embeddings(embeddings[si], cache.string());
                std::ofstream rep(out_dir / "extended" / ("ext_" + key + ".json"));
                rep << report.to_json() << '\n';
            });

            std::vector<FeatureMatrix> X(splits.size());
            for (std::size_t si = 0; si < splits.size(); ++si)
                X[si] = spec.use_original_features && data.features
                            ? concat_features(embeddings[si], *data.features)
                            : as_features(embeddings[si]);

            // Shared classifier selection on validation accuracy across seeds.
            const std::size_t cells =
                spec.classifier_grid.size() > 1 ? spec.classifier_grid.size() * splits.size()
                                                : 0; // single config: nothing to select
            std::vector<double> clf_val(cells, 0.0);
            parallel_for(cells, spec.threads, [&](std::size_t cell) {
                const std::size_t ci = cell / splits.size();
                const std::size_t si = cell % splits.size();
                const auto& cfg = spec.classifier_grid[ci];
                const auto& s = splits[si];
                if (cfg.kind == ClassifierConfig::Kind::LogReg) {
                    const LinearModel m =
                        train_logreg(X[si], data.labels.labels, s.train, cfg.weight_decay);
                    clf_val[cell] = accuracy(m, X[si], data.labels.labels, s.val);
                } else {
                    const MlpModel m = train_mlp(X[si], data.labels.labels, s.train, s.val,
                                                 cfg, s.seed);
                    clf_val[cell] = accuracy(m, X[si], data.labels.labels, s.val);
                }
            });
            std::size_t best_clf = 0;
            double best_mean = -1.0;
            for (std::size_t ci = 0; ci < spec.classifier_grid.size() && cells > 0; ++ci) {
                double mean = 0.0;
                for (std::size_t si = 0; si < splits.size(); ++si)
                    mean += clf_val[ci * splits.size() + si];
                mean /= static_cast<double>(splits.size());
                if (mean > best_mean) {
                    best_mean = mean;
                    best_clf = ci;
                }
            }
            const ClassifierConfig& clf_cfg = spec.classifier_grid[best_clf];
            const std::string clf_json = classifier_config_to_json(clf_cfg);

            EvalReport report;
            report.method = method;
            report.fraction = fraction;
            report.per_seed.resize(splits.size());
            parallel_for(splits.size(), spec.threads, [&](std::size_t si) {
                const auto& s = splits[si];
                EvalRecord rec;
                rec.method = method;
                rec.fraction = fraction;
                rec.seed = s.seed;
                rec.train_config = train_json;
                rec.extend_config = extend_json;
                rec.classifier_config = clf_json;
                if (clf_cfg.kind == ClassifierConfig::Kind::LogReg) {
                    const LinearModel m = train_logreg(X[si], data.labels.labels, s.train,
                                                       clf_cfg.weight_decay);
                    rec.val_accuracy = accuracy(m, X[si], data.labels.labels, s.val);
                    rec.test_accuracy = accuracy(m, X[si], data.labels.labels, s.test);
                } else {
                    const MlpModel m = train_mlp(X[si], data.labels.labels, s.train, s.val,
                                                 clf_cfg, s.seed);
                    rec.val_accuracy = accuracy(m, X[si], data.labels.labels, s.val);
                    rec.test_accuracy = accuracy(m, X[si], data.labels.labels, s.test);
                }
                report.per_seed[si] = rec;
            });
            report.finalize();

            for (const auto& rec : report.per_seed) {
                csv << method_name(method) << ',' << fmt(fraction) << ',' << rec.seed << ','
                    << fmt(rec.test_accuracy) << ',' << fmt(rec.val_accuracy) << ','
                    << config_hash(rec.train_config) << ',' << config_hash(rec.extend_config)
                    << ',' << config_hash(rec.classifier_config) << ','
                    << csv_quote(rec.train_config) << ',' << csv_quote(rec.extend_config)
                    << ',' << csv_quote(rec.classifier_config) << ',' << kToolkitVersion
                    << '\n';
            }
            {
                std::ostringstream name;
                name << "report_" << method_name(method) << "_f" << fmt(fraction) << ".json";
                std::ofstream rep(out_dir / "reports" / name.str());
                rep << report.to_json() << '\n';
            }
            result.reports.push_back(std::move(report));
        }
    }
    result.summary_csv = csv.str();
    std::ofstream sum(out_dir / "reports" / "summary.csv");
    sum << result.summary_csv;
    return result;
}

} // namespace in2v
