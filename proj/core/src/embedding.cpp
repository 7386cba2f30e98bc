#include "in2v/embedding.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "in2v/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "embedding i/o assumes a little-endian host");

namespace in2v {

namespace {
constexpr char kMagic[4] = {'I', 'N', '2', 'V'};
constexpr std::uint16_t kVersion = 1;
} // namespace

void save_embeddings(const EmbeddingMatrix& emb, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write embedding file: " + path);
    out.write(kMagic, 4);
    out.write(reinterpret_cast<const char*>(&kVersion), sizeof(kVersion));
    out.write(reinterpret_cast<const char*>(&emb.n), sizeof(emb.n));
    out.write(reinterpret_cast<const char*>(&emb.d), sizeof(emb.d));
    out.write(reinterpret_cast<const char*>(emb.values.data()),
              static_cast<std::streamsize>(emb.values.size() * sizeof(float)));
    if (!out) throw ParseError("short write to embedding file: " + path);
}

EmbeddingMatrix load_embeddings(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open embedding file: " + path);
    char magic[4];
    std::uint16_t version = 0;
    EmbeddingMatrix emb;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    in.read(reinterpret_cast<char*>(&emb.n), sizeof(emb.n));
    in.read(reinterpret_cast<char*>(&emb.d), sizeof(emb.d));
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw ParseError("not an IN2V embedding file: " + path);
    if (version != kVersion)
        throw ParseError("unsupported embedding format version in " + path);
    emb.values.resize(static_cast<std::size_t>(emb.n) * emb.d);
    in.read(reinterpret_cast<char*>(emb.values.data()),
            static_cast<std::streamsize>(emb.values.size() * sizeof(float)));
    if (!in) throw ParseError("truncated embedding file: " + path);
    return emb;
}

void save_embeddings_tsv(const EmbeddingMatrix& emb, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write embedding tsv: " + path);
    for (std::uint32_t v = 0; v < emb.n; ++v) {
        out << v << '\t';
        auto r = emb.row(v);
        for (std::uint32_t k = 0; k < emb.d; ++k) {
            if (k) out << ' ';
            out << r[k];
        }
        out << '\n';
    }
}

} // namespace in2v
