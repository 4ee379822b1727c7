#include "forge/scorer.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <nlohmann/json.hpp>

#include "forge/text.hpp"

namespace forge::scorer {

using nlohmann::json;

std::string kind_name(ScoreKind kind) {
    switch (kind) {
        case ScoreKind::kLabel: return "label";
        case ScoreKind::kMatchScore: return "match_score";
        case ScoreKind::kSafety: return "safety";
        case ScoreKind::kEmbedding: return "embedding";
        case ScoreKind::kLossProfile: return "loss_profile";
    }
    return "unknown";
}

std::optional<ScoreKind> kind_from_name(std::string_view name) {
    if (name == "label") return ScoreKind::kLabel;
    if (name == "match_score") return ScoreKind::kMatchScore;
    if (name == "safety") return ScoreKind::kSafety;
    if (name == "embedding") return ScoreKind::kEmbedding;
    if (name == "loss_profile") return ScoreKind::kLossProfile;
    return std::nullopt;
}

std::string serialize_request(const ScoreRequest& req) {
    json j;
    j["kind"] = kind_name(req.kind);
    j["record_id"] = req.record_id;
    j["payload"] = req.payload;
    if (req.prompt_spec) {
        j["prompt"]["system_prompt"] = req.prompt_spec->system_prompt;
        j["prompt"]["min_analysis_tokens"] = req.prompt_spec->min_analysis_tokens;
    }
    return j.dump();
}

ScoreRequest parse_request(const std::string& line) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw SchemaViolation("malformed score request");
    }
    ScoreRequest req;
    const auto kind = kind_from_name(j.value("kind", ""));
    if (!kind) {
        throw SchemaViolation("unknown score kind: " + j.value("kind", ""));
    }
    req.kind = *kind;
    req.record_id = j.value("record_id", "");
    req.payload = j.value("payload", "");
    if (j.contains("prompt")) {
        JudgePromptSpec spec;
        spec.system_prompt = j["prompt"].value("system_prompt", "");
        spec.min_analysis_tokens =
            j["prompt"].value("min_analysis_tokens", std::size_t{200});
        req.prompt_spec = std::move(spec);
    }
    return req;
}

std::string serialize_response(const ScoreResponse& resp) {
    json j;
    j["record_id"] = resp.record_id;
    j["kind"] = kind_name(resp.kind);
    j["attempts"] = resp.attempts;
    if (const auto* label = std::get_if<LabelResult>(&resp.value)) {
        j["value"]["label"] = label->label;
        j["value"]["analysis"] = label->analysis;
    } else if (const auto* score = std::get_if<double>(&resp.value)) {
        j["value"] = *score;
    } else if (const auto* vec = std::get_if<std::vector<double>>(&resp.value)) {
        j["value"] = *vec;
    } else if (const auto* loss = std::get_if<LossProfile>(&resp.value)) {
        j["value"]["loss_small"] = loss->loss_small;
        j["value"]["loss_expert"] = loss->loss_expert;
        j["value"]["confidence_small"] = loss->confidence_small;
    }
    return j.dump();
}

// ---------------------------------------------------------------------------
// StubTransport
// ---------------------------------------------------------------------------

namespace {

std::uint64_t stub_hash(const std::string& record_id, ScoreKind kind,
                        std::uint64_t seed, std::uint64_t stream) {
    const std::uint64_t base =
        fnv1a64(record_id) ^ fnv1a64(kind_name(kind)) ^ seed;
    return splitmix64(base + stream * 0x9e3779b97f4a7c15ULL);
}

const char* kStubLabels[] = {"ad", "high-risk", "illegal", "porn",
                             "vulgar", "other", "normal"};

}  // namespace

StubTransport::StubTransport(std::uint64_t seed, std::size_t embedding_dim)
    : seed_(seed), embedding_dim_(embedding_dim) {}

std::string StubTransport::send(const std::string& request_line) {
    const ScoreRequest req = parse_request(request_line);
    ScoreResponse resp;
    resp.record_id = req.record_id;
    resp.kind = req.kind;

    switch (req.kind) {
        case ScoreKind::kSafety:
        case ScoreKind::kMatchScore: {
            resp.value = hash_to_unit(stub_hash(req.record_id, req.kind, seed_, 0));
            break;
        }
        case ScoreKind::kEmbedding: {
            std::vector<double> vec(embedding_dim_);
            for (std::size_t i = 0; i < embedding_dim_; ++i) {
                vec[i] =
                    2.0 * hash_to_unit(stub_hash(req.record_id, req.kind, seed_, i)) -
                    1.0;
            }
            resp.value = std::move(vec);
            break;
        }
        case ScoreKind::kLossProfile: {
            LossProfile profile;
            profile.loss_small =
                0.5 + 4.0 * hash_to_unit(stub_hash(req.record_id, req.kind, seed_, 0));
            profile.loss_expert =
                profile.loss_small *
                (0.3 + 0.6 * hash_to_unit(stub_hash(req.record_id, req.kind, seed_, 1)));
            profile.confidence_small =
                hash_to_unit(stub_hash(req.record_id, req.kind, seed_, 2));
            resp.value = profile;
            break;
        }
        case ScoreKind::kLabel: {
            const std::size_t floor =
                req.prompt_spec ? req.prompt_spec->min_analysis_tokens : 200;
            LabelResult result;
            result.label = kStubLabels[stub_hash(req.record_id, req.kind, seed_, 0) %
                                       std::size(kStubLabels)];
            // Deterministic filler analysis meeting the token floor.
            std::string analysis;
            for (std::size_t i = 0; i < floor; ++i) {
                analysis += "t" + std::to_string(
                                      stub_hash(req.record_id, req.kind, seed_, i) % 97);
                analysis += ' ';
            }
            result.analysis = std::move(analysis);
            resp.value = std::move(result);
            break;
        }
    }
    return serialize_response(resp);
}

// ---------------------------------------------------------------------------
// ScorerClient
// ---------------------------------------------------------------------------

ScorerClient::ScorerClient(std::shared_ptr<Transport> transport, RetryPolicy retry)
    : transport_(std::move(transport)), retry_(retry) {}

namespace {

ScoreValue parse_value(const json& v, ScoreKind kind) {
    switch (kind) {
        case ScoreKind::kSafety:
        case ScoreKind::kMatchScore: {
            if (!v.is_number()) {
                throw SchemaViolation("score value must be a number");
            }
            const double score = v.get<double>();
            if (score < 0.0 || score > 1.0 || !std::isfinite(score)) {
                throw SchemaViolation("score out of [0,1]");
            }
            return score;
        }
        case ScoreKind::kEmbedding: {
            if (!v.is_array()) {
                throw SchemaViolation("embedding value must be an array");
            }
            std::vector<double> vec;
            for (const auto& x : v) {
                if (!x.is_number()) {
                    throw SchemaViolation("embedding entries must be numbers");
                }
                vec.push_back(x.get<double>());
            }
            return vec;
        }
        case ScoreKind::kLossProfile: {
            if (!v.is_object()) {
                throw SchemaViolation("loss profile must be an object");
            }
            LossProfile profile;
            profile.loss_small = v.value("loss_small", -1.0);
            profile.loss_expert = v.value("loss_expert", -1.0);
            profile.confidence_small = v.value("confidence_small", -1.0);
            if (profile.loss_small < 0.0 || profile.loss_expert < 0.0 ||
                profile.confidence_small < 0.0 || profile.confidence_small > 1.0) {
                throw SchemaViolation("loss profile fields out of range");
            }
            return profile;
        }
        case ScoreKind::kLabel: {
            if (!v.is_object()) {
                throw SchemaViolation("label value must be an object");
            }
            LabelResult result;
            result.label = v.value("label", "");
            result.analysis = v.value("analysis", "");
            if (result.label.empty()) {
                throw SchemaViolation("empty label");
            }
            return result;
        }
    }
    throw SchemaViolation("unhandled score kind");
}

}  // namespace

ScoreResponse ScorerClient::request(const ScoreRequest& req) const {
    if (req.kind == ScoreKind::kLabel && req.prompt_spec &&
        text::token_count(req.prompt_spec->system_prompt) <
            JudgePromptSpec::kSystemPromptFloor) {
        throw ConfigInvalid("labeling system prompt under the " +
                            std::to_string(JudgePromptSpec::kSystemPromptFloor) +
                            "-token floor");
    }

    const std::string line = serialize_request(req);
    std::string response_line;
    int attempt = 0;
    for (;;) {
        ++attempt;
        try {
            response_line = transport_->send(line);
            break;
        } catch (const TransportError& e) {
            if (attempt >= retry_.max_attempts) {
                throw ScorerUnavailable("scorer unreachable after " +
                                        std::to_string(attempt) +
                                        " attempts: " + e.what());
            }
            // Deterministic jitter from (record_id, attempt); no shared RNG.
            const double u = hash_to_unit(
                splitmix64(fnv1a64(req.record_id) + static_cast<std::uint64_t>(attempt)));
            const double jitter = 1.0 + retry_.jitter_fraction * (2.0 * u - 1.0);
            const double delay = retry_.base_delay_seconds *
                                 std::pow(retry_.backoff_factor, attempt - 1) * jitter;
            if (delay > 0.0) {
                std::this_thread::sleep_for(std::chrono::duration<double>(delay));
            }
        }
    }

    json j = json::parse(response_line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw SchemaViolation("malformed score response");
    }
    const auto kind = kind_from_name(j.value("kind", ""));
    if (!kind || *kind != req.kind) {
        throw SchemaViolation("response kind does not match request");
    }
    if (j.value("record_id", "") != req.record_id) {
        throw SchemaViolation("response keyed to a different record");
    }
    ScoreResponse resp;
    resp.record_id = req.record_id;
    resp.kind = req.kind;
    resp.attempts = attempt;
    resp.value = parse_value(j.at("value"), req.kind);

    if (req.kind == ScoreKind::kLabel) {
        const auto& label = std::get<LabelResult>(resp.value);
        const std::size_t floor =
            req.prompt_spec ? req.prompt_spec->min_analysis_tokens : 200;
        if (text::token_count(label.analysis) < floor) {
            throw QualityTooLow("labeling analysis under " + std::to_string(floor) +
                                " tokens");
        }
    }
    return resp;
}

double ScorerClient::safety_score(const std::string& record_id,
                                  const std::string& payload) const {
    ScoreRequest req{ScoreKind::kSafety, record_id, payload, std::nullopt};
    return std::get<double>(request(req).value);
}

double ScorerClient::match_score(const std::string& record_id,
                                 const std::string& payload) const {
    ScoreRequest req{ScoreKind::kMatchScore, record_id, payload, std::nullopt};
    return std::get<double>(request(req).value);
}

std::vector<double> ScorerClient::embedding(const std::string& record_id,
                                            const std::string& payload) const {
    ScoreRequest req{ScoreKind::kEmbedding, record_id, payload, std::nullopt};
    return std::get<std::vector<double>>(request(req).value);
}

LossProfile ScorerClient::loss_profile(const std::string& record_id,
                                       const std::string& payload) const {
    ScoreRequest req{ScoreKind::kLossProfile, record_id, payload, std::nullopt};
    return std::get<LossProfile>(request(req).value);
}

LabelResult ScorerClient::label(const std::string& record_id, const std::string& payload,
                                const JudgePromptSpec& spec) const {
    ScoreRequest req{ScoreKind::kLabel, record_id, payload, spec};
    return std::get<LabelResult>(request(req).value);
}

std::shared_ptr<Transport> transport_from_env(std::uint64_t seed) {
    const char* mode = std::getenv("FORGE_SCORER");
    if (mode != nullptr && std::string_view(mode) == "live") {
        const char* url = std::getenv("FORGE_SCORER_URL");
        if (url == nullptr) {
            throw ConfigInvalid("FORGE_SCORER=live requires FORGE_SCORER_URL");
        }
        return std::make_shared<HttpTransport>(url);
    }
    return std::make_shared<StubTransport>(seed);
}

}  // namespace forge::scorer
