#include "crossrl/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "crossrl/layout.hpp"

namespace crossrl {

namespace {

constexpr int kBase = 6;

// Sums in sorted order so the result does not depend on vertex labels.
double sorted_sum(std::vector<double>& values) {
    std::sort(values.begin(), values.end());
    double s = 0.0;
    for (double v : values) {
        s += v;
    }
    return s;
}

}  // namespace

RawFeatures raw_structural_features(const Graph& g, int rounds) {
    const int n = g.num_vertices();
    RawFeatures out(static_cast<std::size_t>(n));
    for (auto& row : out) {
        row.fill(0.0);
    }
    const DistanceMatrix dist(g);
    std::vector<char> mark(static_cast<std::size_t>(n), 0);
    std::vector<double> scratch;

    for (int v = 0; v < n; ++v) {
        auto& row = out[static_cast<std::size_t>(v)];
        const auto nbrs = g.neighbors(v);
        const int deg = static_cast<int>(nbrs.size());
        row[0] = deg;
        if (deg > 0) {
            scratch.clear();
            double lo = g.degree(nbrs[0]);
            double hi = lo;
            for (int w : nbrs) {
                scratch.push_back(g.degree(w));
                lo = std::min(lo, static_cast<double>(g.degree(w)));
                hi = std::max(hi, static_cast<double>(g.degree(w)));
            }
            row[1] = sorted_sum(scratch) / deg;
            row[2] = lo;
            row[3] = hi;
        }
        if (deg >= 2) {
            for (int w : nbrs) {
                mark[static_cast<std::size_t>(w)] = 1;
            }
            long links = 0;
            for (int w : nbrs) {
                for (int x : g.neighbors(w)) {
                    links += mark[static_cast<std::size_t>(x)];
                }
            }
            for (int w : nbrs) {
                mark[static_cast<std::size_t>(w)] = 0;
            }
            // every triangle edge among neighbors was counted twice
            row[4] = static_cast<double>(links) / (static_cast<double>(deg) * (deg - 1));
        }
        row[5] = dist.eccentricity(v);
    }

    // mean aggregation: round r reads the block written by round r-1
    const int mean_rounds = std::min(rounds, 3);
    for (int r = 0; r < mean_rounds; ++r) {
        const int src = r * kBase;
        const int dst = (r + 1) * kBase;
        for (int v = 0; v < n; ++v) {
            const auto nbrs = g.neighbors(v);
            if (nbrs.empty()) {
                continue;
            }
            for (int f = 0; f < kBase; ++f) {
                scratch.clear();
                for (int w : nbrs) {
                    scratch.push_back(out[static_cast<std::size_t>(w)][static_cast<std::size_t>(src + f)]);
                }
                out[static_cast<std::size_t>(v)][static_cast<std::size_t>(dst + f)] =
                    sorted_sum(scratch) / static_cast<double>(nbrs.size());
            }
        }
    }
    if (rounds >= 1) {
        constexpr int dst = 4 * kBase;
        for (int v = 0; v < n; ++v) {
            for (int w : g.neighbors(v)) {
                for (int f = 0; f < kBase; ++f) {
                    double& slot = out[static_cast<std::size_t>(v)][static_cast<std::size_t>(dst + f)];
                    slot = std::max(slot, out[static_cast<std::size_t>(w)][static_cast<std::size_t>(f)]);
                }
            }
        }
    }
    return out;
}

namespace {

using Vec = std::array<double, kRawFeatureDim>;
using Mat = std::array<Vec, kRawFeatureDim>;

Vec multiply(const Mat& m, const Vec& x) {
    Vec y{};
    for (int i = 0; i < kRawFeatureDim; ++i) {
        double s = 0.0;
        for (int j = 0; j < kRawFeatureDim; ++j) {
            s += m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)];
        }
        y[static_cast<std::size_t>(i)] = s;
    }
    return y;
}

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (int i = 0; i < kRawFeatureDim; ++i) {
        s += a[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(i)];
    }
    return s;
}

bool normalize(Vec& v) {
    const double len = std::sqrt(dot(v, v));
    if (len < 1e-300) {
        return false;
    }
    for (double& x : v) {
        x /= len;
    }
    return true;
}

void orthogonalize(Vec& v, std::span<const Vec> basis) {
    for (const Vec& b : basis) {
        const double c = dot(v, b);
        for (int i = 0; i < kRawFeatureDim; ++i) {
            v[static_cast<std::size_t>(i)] -= c * b[static_cast<std::size_t>(i)];
        }
    }
}

// Largest-magnitude entry positive (first one on ties).
void fix_sign(Vec& v) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (std::abs(v[i]) > std::abs(v[arg])) {
            arg = i;
        }
    }
    if (v[arg] < 0.0) {
        for (double& x : v) {
            x = -x;
        }
    }
}

}  // namespace

StructuralEmbedding pca_reduce(const RawFeatures& raw, int k) {
    if (raw.size() < 2) {
        throw std::invalid_argument("pca_reduce needs at least two rows");
    }
    if (k < 1 || k > kEmbeddingDim) {
        throw std::invalid_argument("pca_reduce: k out of range");
    }
    const auto n = raw.size();
    // statistics over lexicographically sorted rows are label independent
    RawFeatures sorted = raw;
    std::sort(sorted.begin(), sorted.end());

    Vec mean{};
    Vec scale{};
    for (int j = 0; j < kRawFeatureDim; ++j) {
        double s = 0.0;
        for (const auto& row : sorted) {
            s += row[static_cast<std::size_t>(j)];
        }
        mean[static_cast<std::size_t>(j)] = s / static_cast<double>(n);
        double var = 0.0;
        for (const auto& row : sorted) {
            const double d = row[static_cast<std::size_t>(j)] - mean[static_cast<std::size_t>(j)];
            var += d * d;
        }
        var /= static_cast<double>(n);
        scale[static_cast<std::size_t>(j)] = var > 1e-24 ? 1.0 / std::sqrt(var) : 0.0;
    }
    auto standardize = [&](const Vec& row) {
        Vec z{};
        for (int j = 0; j < kRawFeatureDim; ++j) {
            z[static_cast<std::size_t>(j)] =
                (row[static_cast<std::size_t>(j)] - mean[static_cast<std::size_t>(j)]) * scale[static_cast<std::size_t>(j)];
        }
        return z;
    };

    Mat cov{};
    for (const auto& row : sorted) {
        const Vec z = standardize(row);
        for (int i = 0; i < kRawFeatureDim; ++i) {
            for (int j = 0; j < kRawFeatureDim; ++j) {
                cov[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] += z[static_cast<std::size_t>(i)] * z[static_cast<std::size_t>(j)];
            }
        }
    }
    double trace = 0.0;
    for (int i = 0; i < kRawFeatureDim; ++i) {
        for (int j = 0; j < kRawFeatureDim; ++j) {
            cov[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] /= static_cast<double>(n);
        }
        trace += cov[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
    }

    StructuralEmbedding out;
    out.reduced_dim = kEmbeddingDim;
    std::vector<Vec> found;
    Mat deflated = cov;
    for (int c = 0; c < k; ++c) {
        Vec v{};
        for (int i = 0; i < kRawFeatureDim; ++i) {
            // fixed start with no special alignment to the axes
            v[static_cast<std::size_t>(i)] = 1.0 + 0.37 * std::sin(1.7 * i + 0.3 * c);
        }
        orthogonalize(v, found);
        if (!normalize(v) || trace <= 0.0) {
            break;
        }
        double lambda = 0.0;
        for (int it = 0; it < 20000; ++it) {
            Vec w = multiply(deflated, v);
            orthogonalize(w, found);
            lambda = std::sqrt(dot(w, w));
            if (!normalize(w)) {
                lambda = 0.0;
                break;
            }
            double delta = 0.0;
            for (int i = 0; i < kRawFeatureDim; ++i) {
                delta = std::max(delta, std::abs(w[static_cast<std::size_t>(i)] - v[static_cast<std::size_t>(i)]));
            }
            v = w;
            if (delta < 1e-8) {
                break;
            }
        }
        lambda = dot(v, multiply(cov, v));
        if (lambda <= 1e-12 * trace) {
            break;
        }
        fix_sign(v);
        found.push_back(v);
        out.components[static_cast<std::size_t>(c)] = v;
        out.explained_variance[static_cast<std::size_t>(c)] = lambda;
        for (int i = 0; i < kRawFeatureDim; ++i) {
            for (int j = 0; j < kRawFeatureDim; ++j) {
                deflated[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -=
                    lambda * v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(j)];
            }
        }
    }

    out.rows.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        const Vec z = standardize(raw[r]);
        out.rows[r].fill(0.0);
        for (std::size_t c = 0; c < found.size(); ++c) {
            out.rows[r][c] = dot(z, found[c]);
        }
    }
    return out;
}

StructuralEmbedding structural_embedding(const Graph& g) {
    if (g.num_vertices() < 2) {
        StructuralEmbedding e;
        e.rows.assign(static_cast<std::size_t>(g.num_vertices()), {});
        return e;
    }
    return pca_reduce(raw_structural_features(g));
}

std::string embedding_to_json(const StructuralEmbedding& e) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (std::size_t v = 0; v < e.rows.size(); ++v) {
        j[std::to_string(v)] = e.rows[v];
    }
    return j.dump();
}

StructuralEmbedding embedding_from_json(const std::string& text, int n) {
    const auto j = nlohmann::json::parse(text);
    StructuralEmbedding e;
    e.rows.assign(static_cast<std::size_t>(n), {});
    if (static_cast<int>(j.size()) != n) {
        throw std::runtime_error("embedding cache does not match the graph size");
    }
    for (const auto& [key, value] : j.items()) {
        const int v = std::stoi(key);
        if (v < 0 || v >= n) {
            throw std::runtime_error("embedding cache: vertex id out of range");
        }
        e.rows[static_cast<std::size_t>(v)] = value.get<std::array<double, kEmbeddingDim>>();
    }
    return e;
}

void save_embedding(const StructuralEmbedding& e, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << embedding_to_json(e) << '\n';
}

StructuralEmbedding load_embedding(const std::filesystem::path& path, int n) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return embedding_from_json(ss.str(), n);
}

}  // namespace crossrl
