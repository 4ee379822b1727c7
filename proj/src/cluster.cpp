#include "forge/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include <Eigen/Dense>

namespace forge::cluster {

namespace {

double squared_distance(const Vector& a, const Vector& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

}  // namespace

ReduceResult reduce_dim(const std::vector<Vector>& vectors, std::size_t target_dim) {
    if (vectors.size() < 2) {
        throw ConfigInvalid("need at least 2 vectors to reduce");
    }
    const std::size_t dim = vectors.front().size();
    if (target_dim > dim || target_dim == 0) {
        throw ConfigInvalid("target_dim must lie in [1, input dim]");
    }
    for (const auto& v : vectors) {
        if (v.size() != dim) {
            throw ConfigInvalid("ragged embedding matrix");
        }
    }

    const auto n = static_cast<Eigen::Index>(vectors.size());
    const auto d = static_cast<Eigen::Index>(dim);
    Eigen::MatrixXd data(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            data(i, j) = vectors[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
    }
    const Eigen::RowVectorXd mean = data.colwise().mean();
    data.rowwise() -= mean;

    const Eigen::MatrixXd cov = (data.transpose() * data) / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) {
        throw DegenerateInput("eigendecomposition failed");
    }
    // Eigen returns ascending eigenvalues; take the top target_dim, descending.
    const Eigen::VectorXd eigenvalues = solver.eigenvalues();
    const Eigen::MatrixXd eigenvectors = solver.eigenvectors();

    ReduceResult result;
    result.total_variance = std::max(eigenvalues.sum(), 0.0);
    result.degenerate = result.total_variance <= 1e-300;

    Eigen::MatrixXd components(d, static_cast<Eigen::Index>(target_dim));
    for (std::size_t c = 0; c < target_dim; ++c) {
        const Eigen::Index src = d - 1 - static_cast<Eigen::Index>(c);
        Eigen::VectorXd component = eigenvectors.col(src);
        // Sign convention: largest-magnitude loading positive.
        Eigen::Index argmax = 0;
        component.cwiseAbs().maxCoeff(&argmax);
        if (component(argmax) < 0.0) {
            component = -component;
        }
        components.col(static_cast<Eigen::Index>(c)) = component;
        result.component_variances.push_back(std::max(eigenvalues(src), 0.0));
    }

    Eigen::MatrixXd projected = data * components;
    if (result.degenerate) {
        projected.setZero();  // all vectors identical: zero-padded projection
    }
    result.vectors.resize(vectors.size(), Vector(target_dim, 0.0));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < target_dim; ++j) {
            result.vectors[static_cast<std::size_t>(i)][j] =
                projected(i, static_cast<Eigen::Index>(j));
        }
    }
    return result;
}

std::vector<Vector> fuse(const std::vector<Vector>& text_vecs,
                         const std::vector<Vector>& vision_vecs) {
    if (text_vecs.size() != vision_vecs.size()) {
        throw ConfigInvalid("text/vision embedding counts differ");
    }
    std::vector<Vector> fused(text_vecs.size());
    for (std::size_t i = 0; i < text_vecs.size(); ++i) {
        fused[i] = text_vecs[i];
        fused[i].insert(fused[i].end(), vision_vecs[i].begin(), vision_vecs[i].end());
    }
    return fused;
}

namespace {

std::size_t nearest_centroid(const Vector& v, const std::vector<Vector>& centroids) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        const double d = squared_distance(v, centroids[c]);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

std::vector<Vector> kmeanspp_init(const std::vector<Vector>& vectors, std::size_t k,
                                  std::mt19937_64& rng) {
    std::vector<Vector> centroids;
    centroids.reserve(k);
    std::uniform_int_distribution<std::size_t> first(0, vectors.size() - 1);
    centroids.push_back(vectors[first(rng)]);

    std::vector<double> dist2(vectors.size());
    while (centroids.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < vectors.size(); ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& c : centroids) {
                best = std::min(best, squared_distance(vectors[i], c));
            }
            dist2[i] = best;
            total += best;
        }
        std::size_t chosen;
        if (total <= 0.0) {
            // All remaining mass at existing centroids; pick the first point
            // not already a centroid to keep seeding deterministic.
            chosen = 0;
            for (std::size_t i = 0; i < vectors.size(); ++i) {
                if (dist2[i] > 0.0) {
                    chosen = i;
                    break;
                }
            }
        } else {
            std::uniform_real_distribution<double> pick(0.0, total);
            double target = pick(rng);
            chosen = vectors.size() - 1;
            for (std::size_t i = 0; i < vectors.size(); ++i) {
                target -= dist2[i];
                if (target <= 0.0) {
                    chosen = i;
                    break;
                }
            }
        }
        centroids.push_back(vectors[chosen]);
    }
    return centroids;
}

}  // namespace

ClusterModel kmeans_fit(const std::vector<Vector>& vectors, std::size_t k,
                        std::uint64_t seed, std::size_t max_iters) {
    if (vectors.empty() || k == 0) {
        throw ConfigInvalid("kmeans needs vectors and k >= 1");
    }
    std::set<Vector> distinct(vectors.begin(), vectors.end());
    if (k > distinct.size()) {
        throw KTooLarge("k=" + std::to_string(k) + " exceeds " +
                        std::to_string(distinct.size()) + " distinct vectors");
    }

    ClusterModel model;
    model.k = k;
    model.seed = seed;
    std::mt19937_64 rng(seed);
    model.centroids = kmeanspp_init(vectors, k, rng);
    model.assignment.assign(vectors.size(), 0);

    const std::size_t dim = vectors.front().size();
    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        bool changed = false;
        double inertia = 0.0;
        for (std::size_t i = 0; i < vectors.size(); ++i) {
            const std::size_t c = nearest_centroid(vectors[i], model.centroids);
            if (c != model.assignment[i]) {
                changed = true;
                model.assignment[i] = c;
            }
            inertia += squared_distance(vectors[i], model.centroids[c]);
        }
        model.inertia_history.push_back(inertia);
        model.inertia = inertia;
        if (!changed && iter > 0) {
            break;
        }

        // Centroid update.
        std::vector<Vector> sums(k, Vector(dim, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < vectors.size(); ++i) {
            const std::size_t c = model.assignment[i];
            ++counts[c];
            for (std::size_t j = 0; j < dim; ++j) {
                sums[c][j] += vectors[i][j];
            }
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                // Re-seed the empty cluster to the point farthest from its
                // own centroid.
                std::size_t far = 0;
                double far_d = -1.0;
                for (std::size_t i = 0; i < vectors.size(); ++i) {
                    const double d = squared_distance(
                        vectors[i], model.centroids[model.assignment[i]]);
                    if (d > far_d) {
                        far_d = d;
                        far = i;
                    }
                }
                model.centroids[c] = vectors[far];
                continue;
            }
            for (std::size_t j = 0; j < dim; ++j) {
                model.centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
            }
        }
    }

    // Final tighten so the stored assignment is nearest-centroid exact.
    double inertia = 0.0;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        model.assignment[i] = nearest_centroid(vectors[i], model.centroids);
        inertia += squared_distance(vectors[i], model.centroids[model.assignment[i]]);
    }
    model.inertia_history.push_back(inertia);
    model.inertia = inertia;
    return model;
}

SamplingPlan balanced_downsample(const ClusterModel& model, double cap_factor,
                                 std::uint64_t seed) {
    if (cap_factor <= 0.0) {
        throw ConfigInvalid("cap_factor must be positive");
    }
    SamplingPlan plan;
    plan.cap_factor = cap_factor;
    plan.seed = seed;

    const std::size_t n = model.assignment.size();
    std::vector<std::vector<std::size_t>> members(model.k);
    for (std::size_t i = 0; i < n; ++i) {
        members[model.assignment[i]].push_back(i);
    }
    const double raw_cap = cap_factor * static_cast<double>(n) /
                           static_cast<double>(model.k);
    const auto cap = static_cast<std::uint64_t>(std::ceil(raw_cap));

    for (std::size_t c = 0; c < model.k; ++c) {
        auto& rows = members[c];
        const auto quota = std::min<std::uint64_t>(rows.size(), cap);
        plan.per_cluster_quota[c] = quota;
        if (quota < rows.size()) {
            // Seeded Fisher-Yates prefix; per-cluster stream keeps clusters
            // independent of each other.
            std::mt19937_64 rng(splitmix64(seed ^ (0x9e3779b97f4a7c15ULL * (c + 1))));
            for (std::size_t i = 0; i < quota; ++i) {
                std::uniform_int_distribution<std::size_t> pick(i, rows.size() - 1);
                std::swap(rows[i], rows[pick(rng)]);
            }
            rows.resize(quota);
            std::sort(rows.begin(), rows.end());
        }
        plan.selected_rows.insert(plan.selected_rows.end(), rows.begin(), rows.end());
    }
    std::sort(plan.selected_rows.begin(), plan.selected_rows.end());
    return plan;
}

// ---------------------------------------------------------------------------
// Embedding file I/O
// ---------------------------------------------------------------------------

void write_embeddings(const std::filesystem::path& path, const EmbeddingFile& data) {
    const std::size_t count = data.vectors.size();
    const std::size_t dim = count == 0 ? 0 : data.vectors.front().size();
    const bool with_ids = !data.ids.empty();
    if (with_ids && data.ids.size() != count) {
        throw ConfigInvalid("embedding id/vector counts differ");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoFailure("cannot write embeddings: " + path.string());
    }
    out << "FORGEEMB 1 " << count << ' ' << dim << " f32 "
        << (with_ids ? "ids" : "noids") << '\n';
    for (const auto& id : data.ids) {
        out << id << '\n';
    }
    for (const auto& v : data.vectors) {
        if (v.size() != dim) {
            throw ConfigInvalid("ragged embedding matrix");
        }
        for (double x : v) {
            const float f = static_cast<float>(x);
            static_assert(std::endian::native == std::endian::little,
                          "embedding payload is little-endian");
            out.write(reinterpret_cast<const char*>(&f), sizeof(f));
        }
    }
}

EmbeddingFile read_embeddings(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoFailure("cannot open embeddings: " + path.string());
    }
    std::string header;
    std::getline(in, header);
    std::istringstream hs(header);
    std::string magic, version, dtype, idflag;
    std::size_t count = 0, dim = 0;
    hs >> magic >> version >> count >> dim >> dtype >> idflag;
    if (magic != "FORGEEMB" || version != "1" || dtype != "f32") {
        throw IoFailure("unsupported embedding file header: " + header);
    }
    EmbeddingFile data;
    if (idflag == "ids") {
        data.ids.resize(count);
        for (auto& id : data.ids) {
            std::getline(in, id);
        }
    }
    data.vectors.assign(count, Vector(dim, 0.0));
    for (auto& v : data.vectors) {
        for (auto& x : v) {
            float f = 0.0f;
            in.read(reinterpret_cast<char*>(&f), sizeof(f));
            x = f;
        }
    }
    if (!in) {
        throw IoFailure("truncated embedding payload: " + path.string());
    }
    return data;
}

}  // namespace forge::cluster
