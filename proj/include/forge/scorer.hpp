#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "forge/common.hpp"

namespace forge::scorer {

class ScorerUnavailable : public Error {
  public:
    explicit ScorerUnavailable(const std::string& what) : Error(what) {}
};

class QualityTooLow : public Error {
  public:
    explicit QualityTooLow(const std::string& what) : Error(what) {}
};

class SchemaViolation : public Error {
  public:
    explicit SchemaViolation(const std::string& what) : Error(what) {}
};

/// Transient transport failure; the client retries these.
class TransportError : public Error {
  public:
    explicit TransportError(const std::string& what) : Error(what) {}
};

enum class ScoreKind { kLabel, kMatchScore, kSafety, kEmbedding, kLossProfile };

std::string kind_name(ScoreKind kind);
std::optional<ScoreKind> kind_from_name(std::string_view name);

/// Prompt contract for labeling/rewriting requests. Labeling-mode system
/// prompts must clear the 800-token floor; responses must carry at least
/// min_analysis_tokens tokens of analysis.
struct JudgePromptSpec {
    std::string system_prompt;
    std::size_t min_analysis_tokens = 200;

    static constexpr std::size_t kSystemPromptFloor = 800;
};

struct ScoreRequest {
    ScoreKind kind = ScoreKind::kSafety;
    std::string record_id;
    std::string payload;  // record excerpt the scorer sees
    std::optional<JudgePromptSpec> prompt_spec;
};

struct LabelResult {
    std::string label;
    std::string analysis;
};

struct LossProfile {
    double loss_small = 0.0;
    double loss_expert = 0.0;
    double confidence_small = 0.0;
};

using ScoreValue = std::variant<LabelResult, double, std::vector<double>, LossProfile>;

struct ScoreResponse {
    std::string record_id;
    ScoreKind kind = ScoreKind::kSafety;
    ScoreValue value;
    int attempts = 1;
};

/// Byte channel carrying one request line and returning one response line.
/// Implementations must be safe for concurrent callers.
class Transport {
  public:
    virtual ~Transport() = default;
    virtual std::string send(const std::string& request_line) = 0;
};

/// Offline stub: a pure function of (record_id, kind, seed). Runs the whole
/// pipeline without network and gives byte-identical reruns.
class StubTransport : public Transport {
  public:
    explicit StubTransport(std::uint64_t seed = 0, std::size_t embedding_dim = 16);
    std::string send(const std::string& request_line) override;

  private:
    std::uint64_t seed_;
    std::size_t embedding_dim_;
};

/// HTTP adapter: POSTs the request line to `<base_url>/score` and expects the
/// response line back. Lives behind the same contract as the stub.
class HttpTransport : public Transport {
  public:
    explicit HttpTransport(std::string base_url);
    std::string send(const std::string& request_line) override;

  private:
    std::string host_;
    int port_;
};

struct RetryPolicy {
    int max_attempts = 3;
    double base_delay_seconds = 1.0;  // 1s, 2s, 4s with +-20% jitter
    double backoff_factor = 2.0;
    double jitter_fraction = 0.2;
};

std::string serialize_request(const ScoreRequest& req);
ScoreRequest parse_request(const std::string& line);
std::string serialize_response(const ScoreResponse& resp);

/// Client over a pluggable transport: retries transient failures with
/// exponential backoff, validates responses against the request kind, and
/// rejects labeling responses under the analysis-token floor.
class ScorerClient {
  public:
    explicit ScorerClient(std::shared_ptr<Transport> transport, RetryPolicy retry = {});

    ScoreResponse request(const ScoreRequest& req) const;

    double safety_score(const std::string& record_id, const std::string& payload) const;
    double match_score(const std::string& record_id, const std::string& payload) const;
    std::vector<double> embedding(const std::string& record_id,
                                  const std::string& payload) const;
    LossProfile loss_profile(const std::string& record_id,
                             const std::string& payload) const;
    LabelResult label(const std::string& record_id, const std::string& payload,
                      const JudgePromptSpec& spec) const;

  private:
    std::shared_ptr<Transport> transport_;
    RetryPolicy retry_;
};

/// FORGE_SCORER=stub (default) or live; live reads FORGE_SCORER_URL.
std::shared_ptr<Transport> transport_from_env(std::uint64_t seed);

}  // namespace forge::scorer
