#include "zslkit/dataset.hpp"

#include "zslkit/error.hpp"
#include "zslkit/random.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace zslkit {

Dataset::Dataset(std::string name, std::size_t feature_dimension) : name_{ std::move(name) }, d_x_{ feature_dimension } {
    if (feature_dimension == 0) {
        throw InvalidArgument("feature dimension must be positive");
    }
}

void Dataset::add(Instance instance) {
    if (instance.features.size() != d_x_) {
        throw InvalidArgument("instance '" + instance.id + "' has " + std::to_string(instance.features.size()) + " features, expected " + std::to_string(d_x_));
    }
    for (const double v : instance.features.bins) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw InvalidArgument("instance '" + instance.id + "' has a negative or non-finite feature");
        }
    }
    if (!ids_.insert(instance.id).second) {
        throw InvalidArgument("duplicate instance id '" + instance.id + "'");
    }
    if (!has_class(instance.label)) {
        vocabulary_.push_back(instance.label);
    }
    instances_.push_back(std::move(instance));
}

bool Dataset::has_class(const Label &label) const {
    return std::find(vocabulary_.begin(), vocabulary_.end(), label) != vocabulary_.end();
}

std::vector<FeatureVector> Dataset::features() const {
    std::vector<FeatureVector> out;
    out.reserve(instances_.size());
    for (const auto &inst : instances_) {
        out.push_back(inst.features);
    }
    return out;
}

std::vector<Label> Dataset::labels() const {
    std::vector<Label> out;
    out.reserve(instances_.size());
    for (const auto &inst : instances_) {
        out.push_back(inst.label);
    }
    return out;
}

Dataset Dataset::restricted_to(const std::vector<Label> &classes) const {
    Dataset out{ name_, d_x_ };
    for (const auto &inst : instances_) {
        if (std::find(classes.begin(), classes.end(), inst.label) != classes.end()) {
            out.add(inst);
        }
    }
    return out;
}

Dataset Dataset::select_ids(const std::vector<std::string> &ids) const {
    std::unordered_map<std::string_view, const Instance *> by_id;
    for (const auto &inst : instances_) {
        by_id.emplace(inst.id, &inst);
    }
    Dataset out{ name_, d_x_ };
    for (const auto &id : ids) {
        const auto it = by_id.find(id);
        if (it == by_id.end()) {
            throw InvalidArgument("unknown instance id '" + id + "' in dataset '" + name_ + "'");
        }
        out.add(*it->second);
    }
    return out;
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
    if (!line.empty() && line.back() == '\r') {
        line.remove_suffix(1);
    }
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return cells;
}

}  // namespace

Dataset parse_dataset(std::istream &in, std::string name) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("empty feature file", 1);
    }
    const auto header = split_commas(line);
    if (header.size() < 3 || header[0] != "id" || header[1] != "label") {
        throw ParseError("header must be 'id,label,f0,...'", 1);
    }
    const std::size_t d_x = header.size() - 2;
    Dataset dataset{ std::move(name), d_x };

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") {
            continue;
        }
        const auto cells = split_commas(line);
        if (cells.size() != header.size()) {
            throw ParseError("expected " + std::to_string(d_x) + " feature values, found " + std::to_string(cells.size() < 2 ? 0 : cells.size() - 2), line_no);
        }
        std::vector<double> bins(d_x);
        for (std::size_t k = 0; k < d_x; ++k) {
            const auto cell = cells[k + 2];
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), bins[k]);
            if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
                throw ParseError("invalid number '" + std::string(cell) + "'", line_no);
            }
            if (bins[k] < 0.0 || !std::isfinite(bins[k])) {
                throw ParseError("negative or non-finite feature value", line_no);
            }
        }
        try {
            dataset.add(Instance{ std::string(cells[0]), Label{ std::string(cells[1]) }, FeatureVector{ std::move(bins) } });
        } catch (const InvalidArgument &e) {
            throw ParseError(e.what(), line_no);
        }
    }
    return dataset;
}

Dataset load_dataset(const std::filesystem::path &path) {
    return load_dataset(path, path.stem().string());
}

Dataset load_dataset(const std::filesystem::path &path, std::string name) {
    std::ifstream in{ path };
    if (!in) {
        throw Error("cannot open feature file " + path.string());
    }
    return parse_dataset(in, std::move(name));
}

void write_dataset(const Dataset &dataset, std::ostream &out) {
    out << "id,label";
    for (std::size_t k = 0; k < dataset.feature_dimension(); ++k) {
        out << ",f" << k;
    }
    out << '\n';
    for (const auto &inst : dataset.instances()) {
        std::string label = inst.label.name();
        std::replace(label.begin(), label.end(), ' ', '_');
        out << inst.id << ',' << label;
        for (const double v : inst.features.bins) {
            char buf[32];
            const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
            out << ',' << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
        }
        out << '\n';
    }
}

std::vector<SplitSpec> generate_splits(const std::vector<Label> &vocabulary, std::size_t count, std::uint64_t seed, const std::string &dataset) {
    if (vocabulary.empty()) {
        throw InvalidArgument("empty class vocabulary");
    }
    if (vocabulary.size() < 2) {
        throw InvalidArgument("a seen/unseen split needs at least two classes");
    }
    if (count == 0) {
        throw InvalidArgument("split count must be positive");
    }
    for (std::size_t a = 0; a < vocabulary.size(); ++a) {
        for (std::size_t b = a + 1; b < vocabulary.size(); ++b) {
            if (vocabulary[a] == vocabulary[b]) {
                throw InvalidArgument("duplicate class '" + vocabulary[a].name() + "' in vocabulary");
            }
        }
    }

    const std::size_t n = vocabulary.size();
    const std::size_t n_seen = (n + 1) / 2;
    std::vector<SplitSpec> splits;
    splits.reserve(count);
    for (std::size_t index = 1; index <= count; ++index) {
        Rng rng{ mix_seed(seed, index) };
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) {
            order[i] = i;
        }
        rng.shuffle(order);
        std::vector<bool> is_seen(n, false);
        for (std::size_t r = 0; r < n_seen; ++r) {
            is_seen[order[r]] = true;
        }
        SplitSpec split{ dataset, seed, index, {}, {} };
        for (std::size_t i = 0; i < n; ++i) {
            (is_seen[i] ? split.seen : split.unseen).push_back(vocabulary[i]);
        }
        splits.push_back(std::move(split));
    }
    return splits;
}

nlohmann::ordered_json split_to_json(const SplitSpec &split) {
    nlohmann::ordered_json j;
    j["dataset"] = split.dataset;
    j["seed"] = split.seed;
    j["index"] = split.index;
    auto names = [](const std::vector<Label> &labels) {
        std::vector<std::string> out;
        for (const auto &l : labels) {
            out.push_back(l.name());
        }
        return out;
    };
    j["seen"] = names(split.seen);
    j["unseen"] = names(split.unseen);
    return j;
}

SplitSpec split_from_json(const nlohmann::json &json) {
    try {
        SplitSpec split;
        split.dataset = json.at("dataset").get<std::string>();
        split.seed = json.at("seed").get<std::uint64_t>();
        split.index = json.at("index").get<std::size_t>();
        for (const auto &name : json.at("seen")) {
            split.seen.emplace_back(name.get<std::string>());
        }
        for (const auto &name : json.at("unseen")) {
            split.unseen.emplace_back(name.get<std::string>());
        }
        for (const auto &s : split.seen) {
            if (std::find(split.unseen.begin(), split.unseen.end(), s) != split.unseen.end()) {
                throw ParseError("class '" + s.name() + "' is both seen and unseen");
            }
        }
        return split;
    } catch (const nlohmann::json::exception &e) {
        throw ParseError(std::string("invalid split file: ") + e.what());
    }
}

void save_split(const SplitSpec &split, const std::filesystem::path &path) {
    write_file_atomic(path, split_to_json(split).dump(2) + "\n");
}

SplitSpec load_split(const std::filesystem::path &path) {
    std::ifstream in{ path };
    if (!in) {
        throw Error("cannot open split file " + path.string());
    }
    try {
        return split_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error &e) {
        throw ParseError(std::string("invalid split file: ") + e.what());
    }
}

void write_file_atomic(const std::filesystem::path &path, const std::string &contents) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out{ tmp, std::ios::binary | std::ios::trunc };
        if (!out) {
            throw Error("cannot write " + tmp.string());
        }
        out << contents;
        if (!out) {
            throw Error("write failed for " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace zslkit
