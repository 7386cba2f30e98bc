#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>

namespace testutil {

// Writes content to a unique file under the system temp dir and returns its path.
inline std::string write_temp_file(const std::string& stem, const std::string& content) {
    static int counter = 0;
    const auto path = std::filesystem::temp_directory_path() /
                      (stem + "_" + std::to_string(::getpid()) + "_" +
                       std::to_string(counter++) + ".txt");
    std::ofstream out(path);
    out << content;
    out.close();
    return path.string();
}

inline std::string data_path(const std::string& rel) {
    return std::string(IN2V_DATA_DIR) + "/" + rel;
}

// Random multiple of 2^-10 in [-0.5, 0.5). Exactly representable in float, so
// a power-of-two finite-difference step perturbs the stored value exactly.
template <typename RngT>
float quant_rand(RngT& rng) {
    const auto k = static_cast<long long>(rng.next_below(1024)) - 512;
    return static_cast<float>(k) * 0x1.0p-10f;
}

inline constexpr float kFdStep = 0x1.0p-12f; // ~2.44e-4, exact in float

} // namespace testutil
