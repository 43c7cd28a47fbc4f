#include "zslkit/bow.hpp"

#include "zslkit/error.hpp"
#include "zslkit/parallel.hpp"
#include "zslkit/random.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

namespace zslkit {

std::size_t Codebook::nearest(std::span<const double> descriptor) const {
    if (descriptor.size() != descriptor_dim) {
        throw InvalidArgument("descriptor has dimension " + std::to_string(descriptor.size()) + ", codebook expects " + std::to_string(descriptor_dim));
    }
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        const double d = squared_euclidean(centroids[c], descriptor);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

namespace {

std::vector<std::vector<double>> kmeans_plus_plus(const std::vector<std::vector<double>> &points, std::size_t k, Rng &rng) {
    const std::size_t n = points.size();
    std::vector<std::vector<double>> centers;
    centers.reserve(k);
    centers.push_back(points[static_cast<std::size_t>(rng.below(n))]);
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) {
        d2[i] = squared_euclidean(points[i], centers.front());
    }
    while (centers.size() < k) {
        double total = 0.0;
        for (const double v : d2) {
            total += v;
        }
        if (!(total > 0.0)) {
            throw InvalidArgument("fewer than k = " + std::to_string(k) + " distinct descriptors");
        }
        const double target = rng.uniform01() * total;
        double acc = 0.0;
        std::size_t pick = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (d2[i] <= 0.0) {
                continue;
            }
            acc += d2[i];
            pick = i;
            if (acc > target) {
                break;
            }
        }
        centers.push_back(points[pick]);
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], squared_euclidean(points[i], centers.back()));
        }
    }
    return centers;
}

}  // namespace

KMeansResult kmeans_codebook(const std::vector<std::vector<double>> &descriptors, std::size_t k, std::uint64_t seed, std::size_t max_iters) {
    if (k == 0) {
        throw InvalidArgument("k must be positive");
    }
    if (descriptors.size() < k) {
        throw InvalidArgument("k = " + std::to_string(k) + " exceeds the " + std::to_string(descriptors.size()) + " available descriptors");
    }
    if (max_iters == 0) {
        throw InvalidArgument("max_iters must be positive");
    }
    const std::size_t dim = descriptors.front().size();
    if (dim == 0) {
        throw InvalidArgument("descriptors must have positive dimension");
    }
    for (const auto &d : descriptors) {
        if (d.size() != dim) {
            throw InvalidArgument("descriptors differ in dimension");
        }
    }

    Rng rng{ seed };
    KMeansResult result;
    result.codebook.descriptor_dim = dim;
    result.codebook.centroids = kmeans_plus_plus(descriptors, k, rng);
    auto &centroids = result.codebook.centroids;

    const std::size_t n = descriptors.size();
    std::vector<std::size_t> assignment(n, k);
    std::vector<double> distance(n, 0.0);
    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        std::vector<std::size_t> next(n);
        parallel_for(n, [&](std::size_t i) {
            next[i] = result.codebook.nearest(descriptors[i]);
            distance[i] = squared_euclidean(descriptors[i], centroids[next[i]]);
        });
        double inertia = 0.0;
        for (const double d : distance) {
            inertia += d;
        }
        result.inertia_history.push_back(inertia);
        result.iterations = iter + 1;
        if (next == assignment) {
            result.converged = true;
            break;
        }
        assignment = std::move(next);

        std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            auto &s = sums[assignment[i]];
            for (std::size_t d = 0; d < dim; ++d) {
                s[d] += descriptors[i][d];
            }
            ++counts[assignment[i]];
        }
        std::vector<bool> taken(n, false);
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                for (std::size_t d = 0; d < dim; ++d) {
                    centroids[c][d] = sums[c][d] / static_cast<double>(counts[c]);
                }
                continue;
            }
            // empty cluster: re-seed at the point farthest from its centroid
            std::size_t far = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (!taken[i] && (far == n || distance[i] > distance[far])) {
                    far = i;
                }
            }
            taken[far] = true;
            centroids[c] = descriptors[far];
        }
    }
    return result;
}

BowHistogram quantize(const Codebook &codebook, const std::vector<std::vector<double>> &descriptors, bool normalize) {
    if (codebook.k() == 0) {
        throw InvalidArgument("empty codebook");
    }
    BowHistogram out;
    out.histogram.bins.assign(codebook.k(), 0.0);
    if (descriptors.empty()) {
        out.empty_input = true;
        return out;
    }
    for (const auto &d : descriptors) {
        out.histogram.bins[codebook.nearest(d)] += 1.0;
    }
    if (normalize) {
        const double inv = 1.0 / static_cast<double>(descriptors.size());
        for (auto &b : out.histogram.bins) {
            b *= inv;
        }
    }
    return out;
}

nlohmann::ordered_json codebook_to_json(const Codebook &codebook) {
    nlohmann::ordered_json j;
    j["format"] = "zslkit-codebook";
    j["version"] = 1;
    j["k"] = codebook.k();
    j["descriptor_dim"] = codebook.descriptor_dim;
    j["centroids"] = codebook.centroids;
    return j;
}

Codebook codebook_from_json(const nlohmann::json &json) {
    try {
        if (json.at("format").get<std::string>() != "zslkit-codebook") {
            throw ParseError("not a codebook file");
        }
        if (json.at("version").get<int>() != 1) {
            throw ParseError("unsupported codebook version");
        }
        Codebook cb;
        cb.descriptor_dim = json.at("descriptor_dim").get<std::size_t>();
        cb.centroids = json.at("centroids").get<std::vector<std::vector<double>>>();
        if (cb.k() != json.at("k").get<std::size_t>() || cb.k() == 0) {
            throw ParseError("codebook k does not match its centroid count");
        }
        for (const auto &c : cb.centroids) {
            if (c.size() != cb.descriptor_dim) {
                throw ParseError("centroid dimension does not match descriptor_dim");
            }
        }
        return cb;
    } catch (const nlohmann::json::exception &e) {
        throw ParseError(std::string("invalid codebook: ") + e.what());
    }
}

namespace {

bool parse_double(std::string_view cell, double &out) {
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) {
        cell.remove_prefix(1);
    }
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r')) {
        cell.remove_suffix(1);
    }
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
    return ec == std::errc{} && ptr == cell.data() + cell.size() && std::isfinite(out);
}

}  // namespace

DescriptorFile load_descriptor_file(const std::filesystem::path &path) {
    std::ifstream in{ path };
    if (!in) {
        throw Error("cannot open descriptor file " + path.string());
    }
    std::vector<DescriptorGroup> groups;
    std::map<std::string, std::size_t> group_index;
    std::string line;
    std::size_t line_no = 0;
    int has_id = -1;
    std::size_t dim = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") {
            continue;
        }
        std::vector<std::string_view> cells;
        std::string_view rest{ line };
        while (true) {
            const auto comma = rest.find(',');
            cells.push_back(rest.substr(0, comma));
            if (comma == std::string_view::npos) {
                break;
            }
            rest.remove_prefix(comma + 1);
        }
        if (has_id < 0) {
            double probe = 0.0;
            has_id = parse_double(cells.front(), probe) ? 0 : 1;
            dim = cells.size() - static_cast<std::size_t>(has_id);
            if (dim == 0) {
                throw ParseError("descriptor row has no values", line_no);
            }
        }
        if (cells.size() != dim + static_cast<std::size_t>(has_id)) {
            throw ParseError("expected " + std::to_string(dim) + " descriptor values", line_no);
        }
        std::vector<double> values(dim);
        for (std::size_t d = 0; d < dim; ++d) {
            if (!parse_double(cells[d + static_cast<std::size_t>(has_id)], values[d])) {
                throw ParseError("invalid descriptor value", line_no);
            }
        }
        const std::string id = has_id == 1 ? std::string(cells.front()) : path.stem().string();
        auto [it, inserted] = group_index.emplace(id, groups.size());
        if (inserted) {
            groups.push_back(DescriptorGroup{ id, {} });
        }
        groups[it->second].descriptors.push_back(std::move(values));
    }
    if (groups.empty()) {
        groups.push_back(DescriptorGroup{ path.stem().string(), {} });
    }
    return DescriptorFile{ has_id == 1, std::move(groups) };
}

}  // namespace zslkit
