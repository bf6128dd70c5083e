#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "crossrl/graph.hpp"

namespace crossrl {

inline constexpr int kRawFeatureDim = 32;
inline constexpr int kEmbeddingDim = 4;

using RawFeatures = std::vector<std::array<double, kRawFeatureDim>>;

/// Per-vertex structural position, PCA-reduced to kEmbeddingDim columns
/// ordered by decreasing explained variance.
struct StructuralEmbedding {
    std::vector<std::array<double, kEmbeddingDim>> rows;
    /// Principal axes in standardized feature space, one per column.
    std::array<std::array<double, kRawFeatureDim>, kEmbeddingDim> components{};
    std::array<double, kEmbeddingDim> explained_variance{};
    int raw_dim = kRawFeatureDim;
    int reduced_dim = kEmbeddingDim;

    const std::array<double, kEmbeddingDim>& operator[](int v) const { return rows[static_cast<std::size_t>(v)]; }
};

/// Deterministic message-passing features. Columns:
///   0-5   degree, mean/min/max neighbor degree, clustering coefficient, eccentricity
///   6-23  three rounds of neighborhood-mean aggregation of the previous round
///   24-29 one round of neighborhood-max aggregation of columns 0-5
///   30-31 zero padding
/// Relabeling the vertices permutes the rows and leaves values bit-identical.
RawFeatures raw_structural_features(const Graph& g, int rounds = 3);

/// Standardizes columns to unit variance, then projects onto the top k
/// principal axes found by power iteration with deflation. Missing rank is
/// padded with zero columns.
StructuralEmbedding pca_reduce(const RawFeatures& raw, int k = kEmbeddingDim);

StructuralEmbedding structural_embedding(const Graph& g);

/// Cache file: {"vertex_id": [f1, f2, f3, f4], ...}
std::string embedding_to_json(const StructuralEmbedding& e);
StructuralEmbedding embedding_from_json(const std::string& text, int n);
void save_embedding(const StructuralEmbedding& e, const std::filesystem::path& path);
StructuralEmbedding load_embedding(const std::filesystem::path& path, int n);

}  // namespace crossrl
