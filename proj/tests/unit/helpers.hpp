#pragma once

#include "zslkit/kernel.hpp"
#include "zslkit/random.hpp"

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace testing {

inline zslkit::FeatureVector random_histogram(zslkit::Rng &rng, std::size_t d, double sparsity = 0.2) {
    zslkit::FeatureVector x;
    x.bins.resize(d);
    double total = 0.0;
    for (auto &b : x.bins) {
        b = rng.uniform01() < sparsity ? 0.0 : rng.uniform01();
        total += b;
    }
    if (total == 0.0) {
        x.bins[0] = 1.0;
        total = 1.0;
    }
    for (auto &b : x.bins) {
        b /= total;
    }
    return x;
}

inline std::vector<zslkit::FeatureVector> random_histograms(zslkit::Rng &rng, std::size_t n, std::size_t d) {
    std::vector<zslkit::FeatureVector> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(random_histogram(rng, d));
    }
    return out;
}

inline std::filesystem::path scratch_dir(const std::string &name) {
    const auto dir = std::filesystem::temp_directory_path() / ("zslkit_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testing
