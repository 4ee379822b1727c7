#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <thread>

#include <httplib.h>

#include "forge/pipeline.hpp"
#include "forge/scorer.hpp"
#include "forge/text.hpp"

using namespace forge;

namespace {

/// Fails the first `failures` sends with a transient error, then delegates.
class FlakyTransport : public scorer::Transport {
  public:
    FlakyTransport(std::shared_ptr<scorer::Transport> inner, int failures)
        : inner_(std::move(inner)), remaining_(failures) {}

    std::string send(const std::string& request_line) override {
        if (remaining_-- > 0) {
            throw scorer::TransportError("transient");
        }
        return inner_->send(request_line);
    }

  private:
    std::shared_ptr<scorer::Transport> inner_;
    std::atomic<int> remaining_;
};

/// Emits labeling analyses far under the token floor.
class ShortAnalysisTransport : public scorer::Transport {
  public:
    std::string send(const std::string& request_line) override {
        const auto req = scorer::parse_request(request_line);
        scorer::ScoreResponse resp;
        resp.record_id = req.record_id;
        resp.kind = req.kind;
        resp.value = scorer::LabelResult{"ad", "too short"};
        return scorer::serialize_response(resp);
    }
};

scorer::RetryPolicy fast_retry() {
    scorer::RetryPolicy policy;
    policy.base_delay_seconds = 0.0;
    return policy;
}

scorer::JudgePromptSpec labeling_spec() {
    scorer::JudgePromptSpec spec;
    spec.system_prompt = pipeline::default_labeling_prompt();
    spec.min_analysis_tokens = 200;
    return spec;
}

}  // namespace

TEST_CASE("stub determinism across clients and reruns") {
    scorer::ScorerClient c1(std::make_shared<scorer::StubTransport>(77));
    scorer::ScorerClient c2(std::make_shared<scorer::StubTransport>(77));
    CHECK(c1.safety_score("r1", "x") == c2.safety_score("r1", "x"));
    CHECK(c1.match_score("r1", "x") == c2.match_score("r1", "x"));
    CHECK(c1.embedding("r1", "x") == c2.embedding("r1", "x"));
    const auto l1 = c1.loss_profile("r1", "x");
    const auto l2 = c2.loss_profile("r1", "x");
    CHECK(l1.loss_small == l2.loss_small);
    CHECK(l1.loss_expert == l2.loss_expert);

    SUBCASE("seed changes the stream") {
        scorer::ScorerClient other(std::make_shared<scorer::StubTransport>(78));
        CHECK(c1.safety_score("r1", "x") != other.safety_score("r1", "x"));
    }
    SUBCASE("scores match request kind and range") {
        const double s = c1.safety_score("any", "p");
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
    }
}

TEST_CASE("retry contract") {
    auto stub = std::make_shared<scorer::StubTransport>(1);
    SUBCASE("transient failure then success reports attempts == 2") {
        scorer::ScorerClient client(std::make_shared<FlakyTransport>(stub, 1),
                                    fast_retry());
        scorer::ScoreRequest req{scorer::ScoreKind::kSafety, "r9", "p", {}};
        const auto resp = client.request(req);
        CHECK(resp.attempts == 2);
    }
    SUBCASE("exhausted retries raise ScorerUnavailable") {
        scorer::ScorerClient client(std::make_shared<FlakyTransport>(stub, 99),
                                    fast_retry());
        scorer::ScoreRequest req{scorer::ScoreKind::kSafety, "r9", "p", {}};
        CHECK_THROWS_AS(client.request(req), scorer::ScorerUnavailable);
    }
}

TEST_CASE("labeling quality floor") {
    SUBCASE("short analysis rejects as QualityTooLow") {
        scorer::ScorerClient client(std::make_shared<ShortAnalysisTransport>(),
                                    fast_retry());
        CHECK_THROWS_AS(client.label("r1", "payload", labeling_spec()),
                        scorer::QualityTooLow);
    }
    SUBCASE("stub meets the floor") {
        scorer::ScorerClient client(std::make_shared<scorer::StubTransport>(3));
        const auto result = client.label("r1", "payload", labeling_spec());
        CHECK(text::token_count(result.analysis) >= 200);
        CHECK_FALSE(result.label.empty());
    }
    SUBCASE("under-length system prompt is a config error") {
        scorer::ScorerClient client(std::make_shared<scorer::StubTransport>(3));
        scorer::JudgePromptSpec spec;
        spec.system_prompt = "way too short";
        CHECK_THROWS_AS(client.label("r1", "p", spec), ConfigInvalid);
    }
    SUBCASE("default prompt clears the 800-token floor") {
        CHECK(text::token_count(pipeline::default_labeling_prompt()) >= 800);
    }
}

TEST_CASE("match_score_filter with quarantine conservation") {
    std::vector<corpus::SampleRecord> records;
    for (int i = 0; i < 60; ++i) {
        corpus::SampleRecord rec;
        rec.id = "m" + std::to_string(i);
        rec.text = "body";
        records.push_back(rec);
    }
    auto stub = std::make_shared<scorer::StubTransport>(5);
    SUBCASE("threshold extremes") {
        scorer::ScorerClient client(stub, fast_retry());
        const auto all = scorer::match_score_filter(records, client, 0.0);
        CHECK(all.kept.size() == records.size());
        const auto none = scorer::match_score_filter(records, client, 1.01);
        CHECK(none.removed.size() == records.size());
    }
    SUBCASE("scores are attached to meta and conservation holds") {
        scorer::ScorerClient client(stub, fast_retry());
        const auto result = scorer::match_score_filter(records, client, 0.5);
        CHECK(result.kept.size() + result.removed.size() +
                  result.quarantined.size() ==
              records.size());
        for (const auto& rec : result.kept) {
            CHECK(rec.meta.contains("match_score"));
        }
    }
    SUBCASE("flaky transport quarantines instead of dropping") {
        // Fail every send: everything quarantines.
        scorer::ScorerClient client(
            std::make_shared<FlakyTransport>(stub, 1 << 30), fast_retry());
        const auto result = scorer::match_score_filter(records, client, 0.5);
        CHECK(result.quarantined.size() == records.size());
    }
}

TEST_CASE("teacher-consensus fixture retains one twelfth") {
    // 840 records; threshold placed so exactly 70 survive, mirroring the
    // 70k-of-840k curation rate.
    auto stub = std::make_shared<scorer::StubTransport>(11);
    scorer::ScorerClient client(stub, fast_retry());
    std::vector<corpus::SampleRecord> records;
    std::vector<double> scores;
    for (int i = 0; i < 840; ++i) {
        corpus::SampleRecord rec;
        rec.id = "t" + std::to_string(i);
        records.push_back(rec);
        scores.push_back(client.match_score(rec.id, rec.text));
    }
    std::vector<double> sorted = scores;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const double threshold = (sorted[69] + sorted[70]) / 2.0;
    const auto result = scorer::match_score_filter(records, client, threshold);
    CHECK(result.kept.size() == 70);
    CHECK(result.kept.size() * 12 == records.size());
}

TEST_CASE("http transport against an in-process server") {
    httplib::Server server;
    scorer::StubTransport stub(42);
    server.Post("/score", [&](const httplib::Request& req, httplib::Response& res) {
        res.set_content(stub.send(req.body), "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    {
        scorer::ScorerClient local(std::make_shared<scorer::StubTransport>(42));
        scorer::ScorerClient remote(
            std::make_shared<scorer::HttpTransport>("127.0.0.1:" +
                                                    std::to_string(port)),
            fast_retry());
        // Same stub behind both transports: identical scores.
        CHECK(remote.safety_score("h1", "x") == local.safety_score("h1", "x"));
        CHECK(remote.embedding("h2", "x") == local.embedding("h2", "x"));
    }
    server.stop();
    server_thread.join();

    SUBCASE("unreachable endpoint raises ScorerUnavailable") {
        scorer::ScorerClient dead(
            std::make_shared<scorer::HttpTransport>("127.0.0.1:1"), fast_retry());
        CHECK_THROWS_AS(dead.safety_score("x", "y"), scorer::ScorerUnavailable);
    }
}

TEST_CASE("request serialization round trip") {
    scorer::ScoreRequest req;
    req.kind = scorer::ScoreKind::kLabel;
    req.record_id = "rt-1";
    req.payload = "excerpt";
    req.prompt_spec = labeling_spec();
    const auto line = scorer::serialize_request(req);
    const auto back = scorer::parse_request(line);
    CHECK(back.kind == req.kind);
    CHECK(back.record_id == req.record_id);
    CHECK(back.payload == req.payload);
    REQUIRE(back.prompt_spec.has_value());
    CHECK(back.prompt_spec->min_analysis_tokens == 200);

    SUBCASE("unknown kind rejects") {
        CHECK_THROWS_AS(scorer::parse_request(R"({"kind":"nope","record_id":"x"})"),
                        scorer::SchemaViolation);
    }
}
