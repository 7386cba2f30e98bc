#include "in2v/split.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "in2v/errors.hpp"
#include "in2v/rng.hpp"

namespace in2v {

SplitAssignment make_split(NodeId n, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ValidationError("train_fraction must lie in (0, 1)");
    if (n < 3) throw ValidationError("make_split requires n >= 3");

    std::vector<NodeId> perm(n);
    for (NodeId i = 0; i < n; ++i) perm[i] = i;
    Rng rng(stream_key(seed, 0x53504c4954ULL)); // "SPLIT" stream tag
    // Fisher-Yates with the project RNG for cross-platform reproducibility.
    for (NodeId i = n - 1; i > 0; --i) {
        auto j = static_cast<NodeId>(rng.next_below(i + 1));
        std::swap(perm[i], perm[j]);
    }

    const auto n_train = static_cast<NodeId>(train_fraction * n);
    const NodeId rest = n - n_train;
    const NodeId n_val = rest / 2;

    SplitAssignment s;
    s.seed = seed;
    s.train_fraction = train_fraction;
    s.train.assign(perm.begin(), perm.begin() + n_train);
    s.val.assign(perm.begin() + n_train, perm.begin() + n_train + n_val);
    s.test.assign(perm.begin() + n_train + n_val, perm.end());
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.val.begin(), s.val.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

void save_split(const SplitAssignment& s, const std::string& path) {
    nlohmann::json j{{"seed", s.seed},
                     {"train_fraction", s.train_fraction},
                     {"train", s.train},
                     {"val", s.val},
                     {"test", s.test}};
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write split file: " + path);
    out << j.dump(2) << '\n';
}

SplitAssignment load_split(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open split file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("invalid split JSON in " + path + ": " + e.what());
    }
    SplitAssignment s;
    try {
        s.seed = j.at("seed").get<std::uint64_t>();
        s.train_fraction = j.at("train_fraction").get<double>();
        s.train = j.at("train").get<std::vector<NodeId>>();
        s.val = j.at("val").get<std::vector<NodeId>>();
        s.test = j.at("test").get<std::vector<NodeId>>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("split schema violation in " + path + ": " + e.what());
    }
    // Invariants: disjoint, covering [0, n).
    std::vector<NodeId> all;
    all.reserve(s.train.size() + s.val.size() + s.test.size());
    all.insert(all.end(), s.train.begin(), s.train.end());
    all.insert(all.end(), s.val.begin(), s.val.end());
    all.insert(all.end(), s.test.begin(), s.test.end());
    std::sort(all.begin(), all.end());
    for (NodeId i = 0; i < all.size(); ++i)
        if (all[i] != i)
            throw ParseError("split sets in " + path +
                             " are overlapping or do not cover [0, n)");
    return s;
}

} // namespace in2v
