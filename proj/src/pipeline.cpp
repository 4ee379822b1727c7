#include "forge/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "forge/image.hpp"
#include "forge/text.hpp"

namespace forge::pipeline {

using nlohmann::json;

void PipelineConfig::validate() const {
    if (input_dir.empty() || work_dir.empty()) {
        throw ConfigInvalid("input_dir and work_dir are required");
    }
    if (!std::filesystem::exists(input_dir)) {
        throw ConfigInvalid("input_dir does not exist: " + input_dir.string());
    }
    std::vector<std::string> names = stages;
    std::sort(names.begin(), names.end());
    if (std::adjacent_find(names.begin(), names.end()) != names.end()) {
        throw ConfigInvalid("duplicate stage name in config");
    }
    filter.validate();
    dedup.validate();
    if (apply_lowpass) {
        lowpass.validate();
    }
    if (cluster_k == 0 || shard_size == 0 || reduced_dim == 0) {
        throw ConfigInvalid("cluster_k, reduced_dim and shard_size must be positive");
    }
}

PipelineConfig PipelineConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigInvalid("cannot open config: " + path.string());
    }
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw ConfigInvalid("malformed config: " + path.string());
    }
    if (j.value("version", 0) != 1) {
        throw ConfigInvalid("unsupported config version (want 1)");
    }
    PipelineConfig cfg;
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.input_dir = j.value("input_dir", std::string{});
    cfg.work_dir = j.value("work_dir", std::string{});
    cfg.media_root = j.value("media_root", std::string{});
    if (j.contains("stages")) {
        cfg.stages = j.at("stages").get<std::vector<std::string>>();
    }
    if (j.contains("filter")) {
        const auto& f = j.at("filter");
        cfg.filter.max_aspect_ratio = f.value("max_aspect_ratio", 4.0);
        cfg.filter.min_short_edge = f.value("min_short_edge", 224);
        cfg.filter.max_perplexity = f.value("max_perplexity", 1000.0);
        cfg.filter.safety_threshold = f.value("safety_threshold", 0.5);
        cfg.filter.long_image_exempt = f.value("long_image_exempt", true);
    }
    if (j.contains("dedup")) {
        const auto& d = j.at("dedup");
        cfg.dedup.minhash.num_hashes = d.value("num_hashes", std::size_t{128});
        cfg.dedup.minhash.shingle_width = d.value("shingle_width", std::size_t{5});
        cfg.dedup.bands = d.value("bands", std::size_t{16});
        cfg.dedup.rows_per_band = d.value("rows_per_band", std::size_t{8});
        cfg.dedup.jaccard_threshold = d.value("jaccard_threshold", 0.8);
        cfg.dedup.hamming_threshold = d.value("hamming_threshold", 8);
        if (d.contains("baseline_index")) {
            cfg.baseline_index = d.at("baseline_index").get<std::string>();
        }
        if (d.contains("eval_index")) {
            cfg.eval_index = d.at("eval_index").get<std::string>();
        }
    }
    cfg.dedup.minhash.seed = cfg.seed;
    if (j.contains("cluster")) {
        const auto& c = j.at("cluster");
        cfg.cluster_k = c.value("k", std::size_t{16});
        cfg.cap_factor = c.value("cap_factor", 2.0);
        cfg.reduced_dim = c.value("reduced_dim", std::size_t{8});
    }
    if (j.contains("judge")) {
        const auto& q = j.at("judge");
        cfg.match_threshold = q.value("match_threshold", 0.3);
        cfg.apply_lowpass = q.value("apply_lowpass", false);
        cfg.lowpass.removal_fraction = q.value("lowpass_fraction", 0.03);
        cfg.lowpass.luma_only = q.value("lowpass_luma_only", false);
    }
    if (j.contains("grpo")) {
        const auto& g = j.at("grpo");
        cfg.grpo.group_size = g.value("group_size", std::size_t{8});
        cfg.grpo.kl_beta = g.value("kl_beta", 0.01);
    }
    cfg.shard_size = j.value("shard_size", std::size_t{1000});
    cfg.strict = j.value("strict", false);
    return cfg;
}

const std::string& default_labeling_prompt() {
    static const std::string prompt = [] {
        std::ostringstream out;
        out << "You are a content moderation annotator for an industrial "
               "multimodal corpus. Classify each sample into exactly one of: "
               "ad, high-risk, illegal, porn, vulgar, other, normal. ";
        // Pad with numbered rule clauses until the prompt clears the
        // 800-token contract floor.
        for (int i = 0; out.str().size() < 6000; ++i) {
            out << "Rule " << i
                << ": weigh the dominant subject of the sample, not incidental "
                   "background elements, and cite the extracted evidence span "
                   "before deciding. ";
        }
        return out.str();
    }();
    return prompt;
}

namespace {

struct StageIo {
    std::filesystem::path dir;
    std::vector<corpus::SampleRecord> records;
};

std::vector<corpus::SampleRecord> read_all(const std::filesystem::path& dir) {
    std::vector<corpus::SampleRecord> records;
    for (const auto& shard : corpus::list_shards(dir)) {
        auto batch = corpus::read_shard(shard);
        records.insert(records.end(), std::make_move_iterator(batch.begin()),
                       std::make_move_iterator(batch.end()));
    }
    return records;
}

void write_stage(const std::filesystem::path& dir,
                 std::vector<corpus::SampleRecord> records, const std::string& stage,
                 std::size_t shard_size) {
    std::filesystem::create_directories(dir);
    if (records.empty()) {
        corpus::write_shard(dir / "shard_00000.jsonl", {}, stage);
        return;
    }
    std::size_t shard_no = 0;
    for (std::size_t start = 0; start < records.size(); start += shard_size) {
        const std::size_t end = std::min(records.size(), start + shard_size);
        std::vector<corpus::SampleRecord> chunk(records.begin() + start,
                                                records.begin() + end);
        for (auto& rec : chunk) {
            if (rec.stage_history.empty() || rec.stage_history.back() != stage) {
                rec.stage_history.push_back(stage);
            }
        }
        std::ostringstream name;
        name << "shard_" << std::setw(5) << std::setfill('0') << shard_no++ << ".jsonl";
        corpus::write_shard(dir / name.str(), chunk, stage);
    }
}

void write_stage_report(const std::filesystem::path& dir, const std::string& stage,
                        const StageCounts& counts, const json& extra = {}) {
    json j;
    j["stage"] = stage;
    j["input"] = counts.input;
    j["kept"] = counts.kept;
    j["rejected"] = counts.rejected;
    j["quarantined"] = counts.quarantined;
    if (!extra.is_null() && !extra.empty()) {
        j["detail"] = extra;
    }
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / (stage + "_report.json"), std::ios::trunc);
    out << j.dump(2) << '\n';
}

}  // namespace

RunSummary run_pipeline(const PipelineConfig& cfg, const scorer::ScorerClient& client) {
    cfg.validate();
    std::filesystem::create_directories(cfg.work_dir);
    const auto reports_dir = cfg.work_dir / "reports";

    RunSummary summary;
    summary.seed = cfg.seed;

    auto loader = [&](const std::string& locator)
        -> std::optional<image::Image> {
        const auto path = cfg.media_root / locator;
        if (!std::filesystem::exists(path)) {
            return std::nullopt;
        }
        return image::read_pnm(path);
    };

    std::vector<corpus::SampleRecord> current;
    std::filesystem::path current_dir = cfg.input_dir;

    for (const std::string& stage : cfg.stages) {
        StageCounts counts;
        json detail;
        try {
            if (stage == "ingest") {
                // Stage 1: format unification. Raw lines in, validated out.
                std::uint64_t rejected = 0;
                std::vector<corpus::SampleRecord> accepted;
                for (const auto& shard : corpus::list_shards(cfg.input_dir)) {
                    std::ifstream in(shard);
                    std::string line;
                    while (std::getline(in, line)) {
                        if (line.empty()) continue;
                        ++counts.input;
                        auto outcome = corpus::parse_record(line);
                        if (!outcome.ok()) {
                            ++rejected;
                            continue;
                        }
                        auto rec = std::move(*outcome.record);
                        // Probe dimensions for media the loader can reach.
                        for (auto& m : rec.media) {
                            if (m.kind == corpus::MediaKind::kImage &&
                                (!m.width || !m.height)) {
                                const auto path = cfg.media_root / m.locator;
                                if (std::filesystem::exists(path)) {
                                    const auto header = image::probe_pnm(path);
                                    m.width = header.width;
                                    m.height = header.height;
                                }
                            }
                        }
                        accepted.push_back(std::move(rec));
                    }
                }
                counts.rejected = rejected;
                counts.kept = accepted.size();
                current = std::move(accepted);
                current_dir = cfg.work_dir / "stage1_ingest";
                write_stage(current_dir, current, "ingest", cfg.shard_size);
            } else if (stage == "filter") {
                counts.input = current.size();
                std::vector<corpus::SampleRecord> kept, rejects, quarantine;
                // Perplexity model trained on the incoming corpus itself.
                filters::NGramLM lm(3, 1.0);
                for (const auto& rec : current) {
                    const auto tokens = text::tokenize(rec.text);
                    if (!tokens.empty()) {
                        lm.train(tokens);
                    }
                }
                json reject_reasons = json::object();
                for (auto& rec : current) {
                    filters::FilterVerdict verdict;
                    bool dims_ok = true;
                    try {
                        verdict = filters::heuristic_filter(rec, cfg.filter);
                    } catch (const filters::MissingDimensions&) {
                        dims_ok = false;
                    }
                    if (!dims_ok) {
                        verdict.reject("missing_dimensions", 0.0);
                    }
                    if (verdict.keep) {
                        const auto ppl = filters::perplexity_filter(rec, lm, cfg.filter);
                        if (!ppl.keep) {
                            verdict = ppl;
                        }
                    }
                    if (verdict.keep) {
                        try {
                            const auto safety =
                                filters::safety_filter(rec, client, cfg.filter);
                            if (!safety.keep) {
                                verdict = safety;
                            }
                        } catch (const scorer::ScorerUnavailable&) {
                            quarantine.push_back(rec);
                            continue;
                        }
                    }
                    if (verdict.keep) {
                        kept.push_back(std::move(rec));
                    } else {
                        for (const auto& reason : verdict.reasons) {
                            reject_reasons[reason] =
                                reject_reasons.value(reason, 0) + 1;
                        }
                        rejects.push_back(std::move(rec));
                    }
                }
                counts.kept = kept.size();
                counts.rejected = rejects.size();
                counts.quarantined = quarantine.size();
                detail = reject_reasons;
                current = std::move(kept);
                current_dir = cfg.work_dir / "stage2_filter";
                write_stage(current_dir, current, "filter", cfg.shard_size);
                write_stage(cfg.work_dir / "stage2_rejects", rejects, "filter_reject",
                            cfg.shard_size);
                write_stage(cfg.work_dir / "stage2_quarantine", quarantine,
                            "filter_quarantine", cfg.shard_size);
            } else if (stage == "dedup") {
                counts.input = current.size();
                std::vector<dedup::RecordFeatures> features;
                features.reserve(current.size());
                for (const auto& rec : current) {
                    features.push_back(dedup::features_for(rec, cfg.dedup, loader));
                }
                std::optional<dedup::DedupIndex> baseline, eval_index;
                if (cfg.baseline_index) {
                    baseline = dedup::DedupIndex::load(*cfg.baseline_index);
                }
                if (cfg.eval_index) {
                    eval_index = dedup::DedupIndex::load(*cfg.eval_index);
                }
                auto [keep_flags, report] = dedup::dedup_corpus(
                    features, baseline ? &*baseline : nullptr,
                    eval_index ? &*eval_index : nullptr, cfg.dedup);
                std::vector<corpus::SampleRecord> kept, removed;
                for (std::size_t i = 0; i < current.size(); ++i) {
                    (keep_flags[i] ? kept : removed).push_back(std::move(current[i]));
                }
                counts.kept = report.kept_count;
                counts.rejected = report.input_count - report.kept_count;
                detail["url_dupes"] = report.url_dupes;
                detail["text_dupes"] = report.text_dupes;
                detail["image_dupes"] = report.image_dupes;
                detail["leakage_hits"] = report.leakage_hits;
                current = std::move(kept);
                current_dir = cfg.work_dir / "stage3_dedup";
                write_stage(current_dir, current, "dedup", cfg.shard_size);
                write_stage(cfg.work_dir / "stage3_removed", removed, "dedup_removed",
                            cfg.shard_size);
            } else if (stage == "cluster") {
                counts.input = current.size();
                if (current.size() >= 2 && cfg.cluster_k >= 1) {
                    std::vector<cluster::Vector> text_vecs, vision_vecs;
                    for (const auto& rec : current) {
                        text_vecs.push_back(client.embedding(rec.id, rec.text));
                        vision_vecs.push_back(
                            client.embedding(rec.id + "#v", "vision"));
                    }
                    auto fused = cluster::fuse(text_vecs, vision_vecs);
                    const std::size_t target =
                        std::min(cfg.reduced_dim, fused.front().size());
                    auto reduced = cluster::reduce_dim(fused, target);
                    const std::size_t k = std::min(cfg.cluster_k, current.size());
                    auto model =
                        cluster::kmeans_fit(reduced.vectors, k, cfg.seed);
                    auto plan =
                        cluster::balanced_downsample(model, cfg.cap_factor, cfg.seed);
                    std::vector<corpus::SampleRecord> kept;
                    kept.reserve(plan.selected_rows.size());
                    std::vector<bool> selected(current.size(), false);
                    for (std::size_t row : plan.selected_rows) {
                        selected[row] = true;
                    }
                    std::vector<corpus::SampleRecord> removed;
                    for (std::size_t i = 0; i < current.size(); ++i) {
                        (selected[i] ? kept : removed).push_back(std::move(current[i]));
                    }
                    detail["k"] = model.k;
                    detail["inertia"] = model.inertia;
                    counts.kept = kept.size();
                    counts.rejected = removed.size();
                    current = std::move(kept);
                    write_stage(cfg.work_dir / "stage4_downsampled", removed,
                                "cluster_downsampled", cfg.shard_size);
                } else {
                    counts.kept = current.size();
                }
                current_dir = cfg.work_dir / "stage4_cluster";
                write_stage(current_dir, current, "cluster", cfg.shard_size);
            } else if (stage == "label") {
                counts.input = current.size();
                std::vector<corpus::SampleRecord> kept, quarantine;
                scorer::JudgePromptSpec spec;
                spec.system_prompt = default_labeling_prompt();
                for (auto& rec : current) {
                    try {
                        const auto result = client.label(rec.id, rec.text, spec);
                        rec.labels["llm_label"] = result.label;
                        rec.meta["llm_analysis_tokens"] =
                            std::to_string(text::token_count(result.analysis));
                        kept.push_back(std::move(rec));
                    } catch (const scorer::ScorerUnavailable&) {
                        quarantine.push_back(std::move(rec));
                    } catch (const scorer::QualityTooLow&) {
                        quarantine.push_back(std::move(rec));
                    }
                }
                counts.kept = kept.size();
                counts.quarantined = quarantine.size();
                current = std::move(kept);
                current_dir = cfg.work_dir / "stage5_label";
                write_stage(current_dir, current, "label", cfg.shard_size);
                write_stage(cfg.work_dir / "stage5_quarantine", quarantine,
                            "label_quarantine", cfg.shard_size);
            } else if (stage == "judge") {
                counts.input = current.size();
                auto result =
                    scorer::match_score_filter(current, client, cfg.match_threshold);
                counts.kept = result.kept.size();
                counts.rejected = result.removed.size();
                counts.quarantined = result.quarantined.size();
                if (cfg.apply_lowpass) {
                    const auto out_dir = cfg.work_dir / "media_lowpass";
                    std::filesystem::create_directories(out_dir);
                    for (const auto& rec : result.kept) {
                        for (const auto* ref : rec.images()) {
                            if (auto img = loader(ref->locator)) {
                                const auto cleaned = vision::low_pass(*img, cfg.lowpass);
                                image::write_pnm(
                                    out_dir /
                                        std::filesystem::path(ref->locator).filename(),
                                    cleaned);
                            }
                        }
                    }
                }
                current = std::move(result.kept);
                current_dir = cfg.work_dir / "stage6_judge";
                write_stage(current_dir, current, "judge", cfg.shard_size);
                write_stage(cfg.work_dir / "stage6_removed", result.removed,
                            "judge_removed", cfg.shard_size);
                write_stage(cfg.work_dir / "stage6_quarantine", result.quarantined,
                            "judge_quarantine", cfg.shard_size);
            } else if (stage == "grade") {
                counts.input = current.size();
                if (current.size() >= 3) {
                    std::vector<difficulty::ScorerProfile> profiles;
                    profiles.reserve(current.size());
                    for (const auto& rec : current) {
                        const auto loss = client.loss_profile(rec.id, rec.text);
                        profiles.push_back({rec.id, loss.loss_small, loss.loss_expert,
                                            loss.confidence_small});
                    }
                    const auto grades = difficulty::grade_batch(profiles);
                    std::map<std::string, const difficulty::DifficultyGrade*> by_id;
                    for (const auto& g : grades) {
                        by_id[g.record_id] = &g;
                    }
                    for (auto& rec : current) {
                        rec.meta["difficulty"] =
                            difficulty::grade_name(by_id.at(rec.id)->grade);
                    }
                    // Curriculum order: easy, then medium, then hard.
                    std::stable_sort(
                        current.begin(), current.end(),
                        [&](const auto& a, const auto& b) {
                            return static_cast<int>(by_id.at(a.id)->grade) <
                                   static_cast<int>(by_id.at(b.id)->grade);
                        });
                }
                counts.kept = current.size();
                current_dir = cfg.work_dir / "stage7_grade";
                write_stage(current_dir, current, "grade", cfg.shard_size);
            } else if (stage == "vision") {
                counts.input = current.size();
                counts.kept = current.size();
                std::filesystem::create_directories(cfg.work_dir / "stage_vision");
                std::ofstream meta(cfg.work_dir / "stage_vision" / "layouts.jsonl",
                                   std::ios::trunc);
                for (const auto& rec : current) {
                    for (const auto* ref : rec.images()) {
                        if (!ref->width || !ref->height) {
                            continue;
                        }
                        const auto layout = vision::select_grid(*ref->width,
                                                                *ref->height);
                        json line;
                        line["record_id"] = rec.id;
                        line["locator"] = ref->locator;
                        line["grid"] = {layout.grid_cols, layout.grid_rows};
                        line["n_tiles"] = layout.n_tiles;
                        line["thumbnail"] = layout.include_thumbnail;
                        line["token_count"] = layout.token_count;
                        meta << line.dump() << '\n';
                    }
                }
            } else if (stage == "report") {
                counts.input = current.size();
                counts.kept = current.size();
            } else {
                throw ConfigInvalid("unknown stage: " + stage);
            }
        } catch (const Error& e) {
            write_stage_report(reports_dir, stage, counts,
                               json{{"error", e.what()}});
            throw StageFailure("stage '" + stage + "' failed: " + e.what());
        }
        if (!counts.conserved()) {
            throw StageFailure("stage '" + stage + "' lost records: input=" +
                               std::to_string(counts.input));
        }
        write_stage_report(reports_dir, stage, counts, detail);
        summary.stage_order.push_back(stage);
        summary.stages[stage] = counts;
    }

    // Deterministic summary: no wall-clock, no absolute paths.
    std::ostringstream body;
    for (const auto& stage : summary.stage_order) {
        const auto& c = summary.stages[stage];
        body << stage << ':' << c.input << '/' << c.kept << '/' << c.rejected << '/'
             << c.quarantined << ';';
    }
    summary.checksum = to_hex(fnv1a64(body.str()));
    std::ofstream out(cfg.work_dir / "run_summary.json", std::ios::trunc);
    out << summary.to_json() << '\n';
    return summary;
}

std::string RunSummary::to_json() const {
    json j;
    j["seed"] = seed;
    j["checksum"] = checksum;
    j["stage_order"] = stage_order;
    for (const auto& [name, c] : stages) {
        j["stages"][name] = {{"input", c.input},
                             {"kept", c.kept},
                             {"rejected", c.rejected},
                             {"quarantined", c.quarantined}};
    }
    return j.dump(2);
}

}  // namespace forge::pipeline

namespace forge::scorer {

MatchFilterResult match_score_filter(const std::vector<corpus::SampleRecord>& records,
                                     const ScorerClient& client, double threshold) {
    MatchFilterResult result;
    for (const auto& rec : records) {
        double score = 0.0;
        try {
            score = client.match_score(rec.id, rec.text);
        } catch (const ScorerUnavailable&) {
            result.quarantined.push_back(rec);
            continue;
        }
        auto annotated = rec;
        std::ostringstream s;
        s.precision(17);
        s << score;
        annotated.meta["match_score"] = s.str();
        if (score >= threshold) {
            result.kept.push_back(std::move(annotated));
        } else {
            result.removed.push_back(std::move(annotated));
        }
    }
    return result;
}

}  // namespace forge::scorer
