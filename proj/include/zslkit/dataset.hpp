#pragma once

#include "zslkit/embedding.hpp"
#include "zslkit/kernel.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <unordered_set>
#include <vector>

namespace zslkit {

struct Instance {
    std::string id;
    Label label;
    FeatureVector features;
};

/// Labelled feature histograms with a fixed dimension d_x.
class Dataset {
  public:
    Dataset(std::string name, std::size_t feature_dimension);

    /// Appends after checking length, non-negativity and id uniqueness.
    void add(Instance instance);

    [[nodiscard]] const std::string &name() const noexcept { return name_; }
    [[nodiscard]] std::size_t feature_dimension() const noexcept { return d_x_; }
    [[nodiscard]] std::size_t size() const noexcept { return instances_.size(); }
    [[nodiscard]] bool empty() const noexcept { return instances_.empty(); }
    [[nodiscard]] const std::vector<Instance> &instances() const noexcept { return instances_; }
    /// Distinct labels in order of first appearance.
    [[nodiscard]] const std::vector<Label> &class_vocabulary() const noexcept { return vocabulary_; }
    [[nodiscard]] bool has_class(const Label &label) const;

    [[nodiscard]] std::vector<FeatureVector> features() const;
    [[nodiscard]] std::vector<Label> labels() const;

    /// Instances whose label is in `classes`, order preserved.
    [[nodiscard]] Dataset restricted_to(const std::vector<Label> &classes) const;
    /// Instances whose id is in `ids`, in the order of `ids`. Unknown ids throw.
    [[nodiscard]] Dataset select_ids(const std::vector<std::string> &ids) const;

  private:
    std::string name_;
    std::size_t d_x_;
    std::vector<Instance> instances_;
    std::vector<Label> vocabulary_;
    std::unordered_set<std::string> ids_;
};

/// Feature CSV: header "id,label,f0,...,f{d-1}", labels with '_' for spaces.
[[nodiscard]] Dataset parse_dataset(std::istream &in, std::string name);
[[nodiscard]] Dataset load_dataset(const std::filesystem::path &path);
/// Name defaults to the file stem.
[[nodiscard]] Dataset load_dataset(const std::filesystem::path &path, std::string name);
void write_dataset(const Dataset &dataset, std::ostream &out);

/// A 50/50 seen/unseen category partition.
struct SplitSpec {
    std::string dataset;
    std::uint64_t seed{ 0 };
    /// 1-based split number.
    std::size_t index{ 1 };
    std::vector<Label> seen;
    std::vector<Label> unseen;
};

/**
 * `count` independent category splits. Split i draws a fresh Fisher-Yates
 * permutation from Rng(mix_seed(seed, i)); the first ceil(n/2) classes of the
 * permutation are seen, the rest unseen. Both sides are listed in vocabulary
 * order.
 */
[[nodiscard]] std::vector<SplitSpec> generate_splits(const std::vector<Label> &vocabulary, std::size_t count, std::uint64_t seed, const std::string &dataset = {});

[[nodiscard]] nlohmann::ordered_json split_to_json(const SplitSpec &split);
[[nodiscard]] SplitSpec split_from_json(const nlohmann::json &json);
void save_split(const SplitSpec &split, const std::filesystem::path &path);
[[nodiscard]] SplitSpec load_split(const std::filesystem::path &path);

/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path &path, const std::string &contents);

}  // namespace zslkit
