#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "forge/common.hpp"

namespace forge::cluster {

class KTooLarge : public Error {
  public:
    explicit KTooLarge(const std::string& what) : Error(what) {}
};

class DegenerateInput : public Error {
  public:
    explicit DegenerateInput(const std::string& what) : Error(what) {}
};

using Vector = std::vector<double>;

struct ReduceResult {
    std::vector<Vector> vectors;
    std::vector<double> component_variances;  // per retained direction
    double total_variance = 0.0;
    bool degenerate = false;  // all inputs identical; zero-padded projection
};

/// Projects centered data onto its top principal directions. Deterministic:
/// components are ordered by descending eigenvalue and signed so the
/// largest-magnitude loading is positive.
ReduceResult reduce_dim(const std::vector<Vector>& vectors, std::size_t target_dim);

/// Concatenates text and vision embeddings per record before reduction.
std::vector<Vector> fuse(const std::vector<Vector>& text_vecs,
                         const std::vector<Vector>& vision_vecs);

struct ClusterModel {
    std::size_t k = 0;
    std::vector<Vector> centroids;
    std::vector<std::size_t> assignment;  // per input row
    std::vector<double> inertia_history;  // one entry per Lloyd iteration
    double inertia = 0.0;
    std::uint64_t seed = 0;
};

/// k-means++ seeding followed by Lloyd iterations until the assignment
/// reaches a fixed point or max_iters. Empty clusters are re-seeded to the
/// point farthest from its current centroid.
ClusterModel kmeans_fit(const std::vector<Vector>& vectors, std::size_t k,
                        std::uint64_t seed, std::size_t max_iters = 100);

struct SamplingPlan {
    double cap_factor = 2.0;
    std::map<std::size_t, std::uint64_t> per_cluster_quota;
    std::vector<std::size_t> selected_rows;  // rows surviving the downsample
    std::uint64_t seed = 0;
};

/// Caps every cluster at ceil(cap_factor * N / k); capped clusters are
/// sampled uniformly without replacement under the seed, the rest kept whole.
SamplingPlan balanced_downsample(const ClusterModel& model, double cap_factor,
                                 std::uint64_t seed);

// Embedding file: text header line "FORGEEMB 1 <count> <dim> f32 <ids|noids>",
// optional id lines, then little-endian float32 row-major payload.
struct EmbeddingFile {
    std::vector<std::string> ids;  // empty when the file carries no ids
    std::vector<Vector> vectors;
};

void write_embeddings(const std::filesystem::path& path, const EmbeddingFile& data);
EmbeddingFile read_embeddings(const std::filesystem::path& path);

}  // namespace forge::cluster
