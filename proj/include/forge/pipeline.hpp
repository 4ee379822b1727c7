#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "forge/cluster.hpp"
#include "forge/common.hpp"
#include "forge/corpus.hpp"
#include "forge/dedup.hpp"
#include "forge/difficulty.hpp"
#include "forge/filters.hpp"
#include "forge/rewards.hpp"
#include "forge/scorer.hpp"
#include "forge/vision.hpp"

namespace forge::pipeline {

class StageFailure : public Error {
  public:
    explicit StageFailure(const std::string& what) : Error(what) {}
};

struct StageCounts {
    std::uint64_t input = 0;
    std::uint64_t kept = 0;
    std::uint64_t rejected = 0;
    std::uint64_t quarantined = 0;

    bool conserved() const { return input == kept + rejected + quarantined; }
};

struct RunSummary {
    std::vector<std::string> stage_order;
    std::map<std::string, StageCounts> stages;
    std::uint64_t seed = 0;
    std::string checksum;  // fnv1a-64 over the summary body, for rerun checks

    std::string to_json() const;
};

/// Data-side knobs for the whole pipeline; one seed drives every stochastic
/// stage. Paths are resolved at run start.
struct PipelineConfig {
    std::uint64_t seed = 0;
    std::filesystem::path input_dir;
    std::filesystem::path work_dir;
    std::filesystem::path media_root;
    std::vector<std::string> stages = {"ingest", "filter", "dedup",  "cluster",
                                       "label",  "judge",  "grade", "vision",
                                       "report"};
    filters::FilterConfig filter;
    dedup::DedupConfig dedup;
    std::optional<std::filesystem::path> baseline_index;
    std::optional<std::filesystem::path> eval_index;
    std::size_t cluster_k = 16;
    double cap_factor = 2.0;
    std::size_t reduced_dim = 8;
    double match_threshold = 0.3;
    vision::LowPassConfig lowpass;
    bool apply_lowpass = false;
    rewards::GrpoConfig grpo;
    std::size_t shard_size = 1000;
    bool strict = false;  // non-empty quarantine fails the run

    void validate() const;
    static PipelineConfig from_file(const std::filesystem::path& path);
};

/// Runs the configured stages in order. Every stage writes shards plus a
/// stage report under the work dir; reruns with identical config and inputs
/// are byte-identical. On stage failure partial outputs keep their manifests.
RunSummary run_pipeline(const PipelineConfig& cfg, const scorer::ScorerClient& client);

/// Stub labeling system prompt clearing the 800-token floor.
const std::string& default_labeling_prompt();

}  // namespace forge::pipeline

namespace forge::scorer {

struct MatchFilterResult {
    std::vector<corpus::SampleRecord> kept;
    std::vector<corpus::SampleRecord> removed;
    std::vector<corpus::SampleRecord> quarantined;
};

/// Stage-6 correlation gate: keep records whose match score clears the
/// threshold; the score lands in record meta. Scorer failures quarantine the
/// record rather than dropping or passing it.
MatchFilterResult match_score_filter(const std::vector<corpus::SampleRecord>& records,
                                     const ScorerClient& client, double threshold);

}  // namespace forge::scorer
