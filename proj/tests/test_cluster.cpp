#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "forge/cluster.hpp"

using namespace forge;

namespace {

/// Cyclic Jacobi eigensolver for symmetric matrices; the independent oracle
/// for the PCA route.
std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> m) {
    const std::size_t n = m.size();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                off += m[p][q] * m[p][q];
            }
        }
        if (off < 1e-24) {
            break;
        }
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(m[p][q]) < 1e-300) {
                    continue;
                }
                const double theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double mkp = m[k][p];
                    const double mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double mpk = m[p][k];
                    const double mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) {
        eig[i] = m[i][i];
    }
    std::sort(eig.rbegin(), eig.rend());
    return eig;
}

std::vector<cluster::Vector> random_gaussian(std::mt19937_64& rng, std::size_t n,
                                             std::size_t dim) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<cluster::Vector> out(n, cluster::Vector(dim));
    for (auto& v : out) {
        for (auto& x : v) {
            x = normal(rng);
        }
    }
    return out;
}

double sq_dist(const cluster::Vector& a, const cluster::Vector& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += (a[i] - b[i]) * (a[i] - b[i]);
    }
    return acc;
}

}  // namespace

TEST_CASE("reduce_dim basics") {
    SUBCASE("full-dim projection preserves pairwise distances") {
        std::mt19937_64 rng(2);
        const auto data = random_gaussian(rng, 30, 6);
        const auto result = cluster::reduce_dim(data, 6);
        for (std::size_t i = 0; i < data.size(); ++i) {
            for (std::size_t j = i + 1; j < data.size(); ++j) {
                CHECK(sq_dist(result.vectors[i], result.vectors[j]) ==
                      doctest::Approx(sq_dist(data[i], data[j])).epsilon(1e-9));
            }
        }
    }
    SUBCASE("rank-1 data reduces to 1-D with zero loss") {
        std::vector<cluster::Vector> line;
        for (int i = 0; i < 20; ++i) {
            line.push_back({2.0 * i, -1.0 * i});
        }
        const auto result = cluster::reduce_dim(line, 1);
        // Residual variance beyond the first component is zero.
        CHECK(result.component_variances[0] ==
              doctest::Approx(result.total_variance).epsilon(1e-12));
    }
    SUBCASE("identical vectors are degenerate, zero-padded") {
        std::vector<cluster::Vector> same(5, cluster::Vector{1.0, 2.0, 3.0});
        const auto result = cluster::reduce_dim(same, 2);
        CHECK(result.degenerate);
        for (const auto& v : result.vectors) {
            CHECK(v == cluster::Vector{0.0, 0.0});
        }
    }
    SUBCASE("captured variance matches the Jacobi oracle") {
        std::mt19937_64 rng(50);
        const std::size_t dim = 50;
        const auto data = random_gaussian(rng, 300, dim);
        const auto result = cluster::reduce_dim(data, 10);

        // Oracle covariance.
        cluster::Vector mean(dim, 0.0);
        for (const auto& v : data) {
            for (std::size_t j = 0; j < dim; ++j) mean[j] += v[j];
        }
        for (auto& x : mean) x /= static_cast<double>(data.size());
        std::vector<std::vector<double>> cov(dim, std::vector<double>(dim, 0.0));
        for (const auto& v : data) {
            for (std::size_t a = 0; a < dim; ++a) {
                for (std::size_t b = 0; b < dim; ++b) {
                    cov[a][b] += (v[a] - mean[a]) * (v[b] - mean[b]);
                }
            }
        }
        for (auto& row : cov) {
            for (auto& x : row) x /= static_cast<double>(data.size() - 1);
        }
        const auto eig = jacobi_eigenvalues(cov);
        double oracle_top = 0.0, oracle_total = 0.0;
        for (std::size_t i = 0; i < eig.size(); ++i) {
            oracle_total += eig[i];
            if (i < 10) oracle_top += eig[i];
        }
        double impl_top = 0.0;
        for (double v : result.component_variances) impl_top += v;
        CHECK(impl_top / result.total_variance ==
              doctest::Approx(oracle_top / oracle_total).epsilon(1e-6));
    }
}

TEST_CASE("kmeans_fit") {
    SUBCASE("k equal to distinct points gives zero inertia") {
        std::vector<cluster::Vector> pts = {{0, 0}, {5, 5}, {9, 1}};
        const auto model = cluster::kmeans_fit(pts, 3, 1);
        CHECK(model.inertia == doctest::Approx(0.0));
    }
    SUBCASE("two 10-sigma blobs separate perfectly at k=2") {
        std::mt19937_64 rng(6);
        std::normal_distribution<double> noise(0.0, 1.0);
        std::vector<cluster::Vector> pts;
        std::vector<int> truth;
        for (int i = 0; i < 100; ++i) {
            pts.push_back({noise(rng), noise(rng)});
            truth.push_back(0);
        }
        for (int i = 0; i < 100; ++i) {
            pts.push_back({20.0 + noise(rng), 20.0 + noise(rng)});
            truth.push_back(1);
        }
        const auto model = cluster::kmeans_fit(pts, 2, 3);
        // Map cluster index to majority truth label, then demand purity.
        const std::size_t first = model.assignment[0];
        for (std::size_t i = 0; i < pts.size(); ++i) {
            CHECK((model.assignment[i] == first) == (truth[i] == truth[0]));
        }
    }
    SUBCASE("same seed reproduces centroids bit for bit") {
        std::mt19937_64 rng(10);
        const auto pts = random_gaussian(rng, 200, 4);
        const auto m1 = cluster::kmeans_fit(pts, 8, 42);
        const auto m2 = cluster::kmeans_fit(pts, 8, 42);
        CHECK(m1.centroids == m2.centroids);
        CHECK(m1.assignment == m2.assignment);
    }
    SUBCASE("inertia history is non-increasing") {
        std::mt19937_64 rng(12);
        for (int trial = 0; trial < 10; ++trial) {
            const auto pts = random_gaussian(rng, 150, 3);
            const auto model = cluster::kmeans_fit(pts, 5, trial);
            for (std::size_t i = 1; i < model.inertia_history.size(); ++i) {
                CHECK(model.inertia_history[i] <=
                      model.inertia_history[i - 1] * (1.0 + 1e-12));
            }
        }
    }
    SUBCASE("assignment is nearest-centroid exact") {
        std::mt19937_64 rng(14);
        const auto pts = random_gaussian(rng, 100, 3);
        const auto model = cluster::kmeans_fit(pts, 7, 5);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            double best = std::numeric_limits<double>::infinity();
            std::size_t best_c = 0;
            for (std::size_t c = 0; c < model.centroids.size(); ++c) {
                const double d = sq_dist(pts[i], model.centroids[c]);
                if (d < best) {
                    best = d;
                    best_c = c;
                }
            }
            CHECK(model.assignment[i] == best_c);
        }
    }
    SUBCASE("k too large throws") {
        std::vector<cluster::Vector> pts = {{1, 1}, {1, 1}, {2, 2}};
        CHECK_THROWS_AS(cluster::kmeans_fit(pts, 3, 0), cluster::KTooLarge);
    }
}

TEST_CASE("balanced_downsample") {
    SUBCASE("arithmetic oracle for sizes [80,10,10]") {
        cluster::ClusterModel model;
        model.k = 3;
        for (int i = 0; i < 80; ++i) model.assignment.push_back(0);
        for (int i = 0; i < 10; ++i) model.assignment.push_back(1);
        for (int i = 0; i < 10; ++i) model.assignment.push_back(2);
        const auto plan = cluster::balanced_downsample(model, 2.0, 1);
        // cap = ceil(2*100/3) = 67.
        CHECK(plan.per_cluster_quota.at(0) == 67);
        CHECK(plan.per_cluster_quota.at(1) == 10);
        CHECK(plan.per_cluster_quota.at(2) == 10);
        CHECK(plan.selected_rows.size() == 87);
    }
    SUBCASE("equal clusters keep everything") {
        cluster::ClusterModel model;
        model.k = 4;
        for (int c = 0; c < 4; ++c) {
            for (int i = 0; i < 25; ++i) model.assignment.push_back(c);
        }
        const auto plan = cluster::balanced_downsample(model, 1.0, 9);
        CHECK(plan.selected_rows.size() == 100);
    }
    SUBCASE("huge cap is the identity plan") {
        cluster::ClusterModel model;
        model.k = 2;
        for (int i = 0; i < 30; ++i) model.assignment.push_back(i % 2 == 0 ? 0 : 1);
        const auto plan = cluster::balanced_downsample(model, 1e9, 0);
        CHECK(plan.selected_rows.size() == 30);
    }
    SUBCASE("determinism and share bound") {
        std::mt19937_64 rng(31);
        for (int trial = 0; trial < 30; ++trial) {
            cluster::ClusterModel model;
            model.k = 5;
            std::uniform_int_distribution<std::size_t> pick(0, 4);
            std::uniform_int_distribution<std::size_t> npick(20, 300);
            const std::size_t n = npick(rng);
            for (std::size_t i = 0; i < n; ++i) {
                model.assignment.push_back(pick(rng));
            }
            std::uniform_real_distribution<double> cap_dist(0.5, 3.0);
            const double cap_factor = cap_dist(rng);
            const auto p1 = cluster::balanced_downsample(model, cap_factor, trial);
            const auto p2 = cluster::balanced_downsample(model, cap_factor, trial);
            CHECK(p1.selected_rows == p2.selected_rows);
            std::uint64_t max_quota = 0;
            for (const auto& [c, q] : p1.per_cluster_quota) {
                max_quota = std::max(max_quota, q);
            }
            CHECK(static_cast<double>(max_quota) / static_cast<double>(n) <=
                  cap_factor / 5.0 + 1.0 / static_cast<double>(n) + 1e-12);
        }
    }
}

TEST_CASE("embedding file round trip") {
    const auto path = std::filesystem::temp_directory_path() / "forge_test_emb.bin";
    cluster::EmbeddingFile data;
    data.ids = {"a", "b", "c"};
    data.vectors = {{1.0, 2.0}, {3.0, 4.0}, {-1.5, 0.25}};
    cluster::write_embeddings(path, data);
    const auto back = cluster::read_embeddings(path);
    CHECK(back.ids == data.ids);
    REQUIRE(back.vectors.size() == 3);
    CHECK(back.vectors[2][0] == doctest::Approx(-1.5));

    SUBCASE("id-less layout") {
        cluster::EmbeddingFile plain;
        plain.vectors = {{9.0}, {8.0}};
        cluster::write_embeddings(path, plain);
        const auto b2 = cluster::read_embeddings(path);
        CHECK(b2.ids.empty());
        CHECK(b2.vectors.size() == 2);
    }
}
