#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace in2v {

// Dense n x d row-major embedding matrix.
struct EmbeddingMatrix {
    std::uint32_t n = 0;
    std::uint32_t d = 0;
    std::vector<float> values;

    EmbeddingMatrix() = default;
    EmbeddingMatrix(std::uint32_t n_, std::uint32_t d_)
        : n(n_), d(d_), values(static_cast<std::size_t>(n_) * d_, 0.0f) {}

    std::span<float> row(std::uint32_t v) {
        return {values.data() + static_cast<std::size_t>(v) * d, d};
    }
    std::span<const float> row(std::uint32_t v) const {
        return {values.data() + static_cast<std::size_t>(v) * d, d};
    }

    bool operator==(const EmbeddingMatrix&) const = default;
};

// Binary format: magic "IN2V", u16 version=1, u32 n, u32 d (little-endian),
// then n*d little-endian 32-bit floats row-major.
void save_embeddings(const EmbeddingMatrix& emb, const std::string& path);
EmbeddingMatrix load_embeddings(const std::string& path);

// "node_id<TAB>v1 v2 ... vd" per line.
void save_embeddings_tsv(const EmbeddingMatrix& emb, const std::string& path);

} // namespace in2v
