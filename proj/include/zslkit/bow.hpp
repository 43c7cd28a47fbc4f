#pragma once

#include "zslkit/kernel.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace zslkit {

/// k centroids in descriptor space.
struct Codebook {
    std::size_t descriptor_dim{ 0 };
    std::vector<std::vector<double>> centroids;

    [[nodiscard]] std::size_t k() const noexcept { return centroids.size(); }
    /// Index of the closest centroid (squared Euclidean); lowest index on ties.
    [[nodiscard]] std::size_t nearest(std::span<const double> descriptor) const;
};

struct KMeansResult {
    Codebook codebook;
    /// Inertia after each assignment step.
    std::vector<double> inertia_history;
    std::size_t iterations{ 0 };
    bool converged{ false };
};

/**
 * Lloyd's algorithm from a seeded k-means++ start.
 *
 * Stops when an assignment step changes no labels or after max_iters
 * assignment steps. A cluster left empty by an update is moved onto the
 * point farthest from its own centroid. Throws if there are fewer distinct
 * descriptors than k.
 */
[[nodiscard]] KMeansResult kmeans_codebook(const std::vector<std::vector<double>> &descriptors, std::size_t k, std::uint64_t seed, std::size_t max_iters = 100);

struct BowHistogram {
    FeatureVector histogram;
    /// Set when the descriptor list was empty (histogram is all zeros).
    bool empty_input{ false };
};

/// Nearest-centroid counts; with `normalize`, divided by the descriptor count.
[[nodiscard]] BowHistogram quantize(const Codebook &codebook, const std::vector<std::vector<double>> &descriptors, bool normalize);

[[nodiscard]] nlohmann::ordered_json codebook_to_json(const Codebook &codebook);
[[nodiscard]] Codebook codebook_from_json(const nlohmann::json &json);

/// Descriptors read from one CSV file, grouped by the optional leading id column.
struct DescriptorGroup {
    std::string id;
    std::vector<std::vector<double>> descriptors;
};

struct DescriptorFile {
    bool has_id_column{ false };
    std::vector<DescriptorGroup> groups;
};

/**
 * One descriptor per row. When the first cell of the first row is not a
 * number, every row starts with a video id and rows are grouped by it (in
 * first-appearance order); otherwise the whole file is one group named after
 * the file stem.
 */
[[nodiscard]] DescriptorFile load_descriptor_file(const std::filesystem::path &path);

}  // namespace zslkit
