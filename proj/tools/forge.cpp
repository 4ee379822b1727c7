// forge: data curation and alignment toolkit for multimodal moderation
// corpora. Subcommands cover the pipeline stages (ingest through report),
// the reward/eval math, and a seeded synthetic corpus generator.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "forge/cluster.hpp"
#include "forge/corpus.hpp"
#include "forge/dedup.hpp"
#include "forge/difficulty.hpp"
#include "forge/evalkit.hpp"
#include "forge/filters.hpp"
#include "forge/pipeline.hpp"
#include "forge/rewards.hpp"
#include "forge/scorer.hpp"
#include "forge/synth.hpp"
#include "forge/text.hpp"
#include "forge/vision.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kStageFailure = 2;
constexpr int kQuarantineStrict = 3;

std::vector<forge::corpus::SampleRecord> read_dir(const fs::path& dir) {
    std::vector<forge::corpus::SampleRecord> records;
    for (const auto& shard : forge::corpus::list_shards(dir)) {
        auto batch = forge::corpus::read_shard(shard);
        records.insert(records.end(), batch.begin(), batch.end());
    }
    return records;
}

std::vector<json> read_jsonl(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw forge::IoFailure("cannot open " + path.string());
    }
    std::vector<json> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw forge::IoFailure("malformed line in " + path.string());
        }
        lines.push_back(std::move(j));
    }
    return lines;
}

int cmd_gen(const fs::path& out, const fs::path& media, std::size_t count,
            std::uint64_t seed, std::size_t shard_size) {
    forge::synth::SynthConfig cfg;
    cfg.count = count;
    cfg.seed = seed;
    cfg.media_dir = media;
    const auto records = forge::synth::generate(cfg);
    fs::create_directories(out);
    std::size_t shard_no = 0;
    for (std::size_t start = 0; start < records.size(); start += shard_size) {
        const std::size_t end = std::min(records.size(), start + shard_size);
        std::ostringstream name;
        name << "raw_" << std::setw(5) << std::setfill('0') << shard_no++ << ".jsonl";
        forge::corpus::write_shard(
            out / name.str(),
            {records.begin() + start, records.begin() + end}, "raw");
    }
    std::cerr << "gen: wrote " << records.size() << " records in " << shard_no
              << " shard(s)\n";
    return kOk;
}

int cmd_ingest(const fs::path& in, const fs::path& out) {
    std::uint64_t accepted = 0, rejected = 0;
    std::vector<forge::corpus::SampleRecord> records;
    for (const auto& shard : forge::corpus::list_shards(in)) {
        std::ifstream f(shard);
        std::string line;
        while (std::getline(f, line)) {
            if (line.empty()) continue;
            auto outcome = forge::corpus::parse_record(line);
            if (outcome.ok()) {
                records.push_back(std::move(*outcome.record));
                ++accepted;
            } else {
                ++rejected;
            }
        }
    }
    fs::create_directories(out);
    forge::corpus::write_shard(out / "shard_00000.jsonl", records, "ingest");
    std::cerr << "ingest: accepted=" << accepted << " rejected=" << rejected << '\n';
    return kOk;
}

int cmd_filter(const fs::path& config, const fs::path& in, const fs::path& out,
               const fs::path& rejects, std::uint64_t seed) {
    forge::filters::FilterConfig fcfg;
    if (!config.empty()) {
        std::ifstream f(config);
        json j = json::parse(f, nullptr, false);
        if (j.is_discarded()) {
            throw forge::ConfigInvalid("malformed filter config");
        }
        fcfg.max_aspect_ratio = j.value("max_aspect_ratio", 4.0);
        fcfg.min_short_edge = j.value("min_short_edge", 224);
        fcfg.max_perplexity = j.value("max_perplexity", 1000.0);
        fcfg.safety_threshold = j.value("safety_threshold", 0.5);
        fcfg.long_image_exempt = j.value("long_image_exempt", true);
    }
    const auto records = read_dir(in);
    forge::filters::NGramLM lm(3, 1.0);
    for (const auto& rec : records) {
        const auto tokens = forge::text::tokenize(rec.text);
        if (!tokens.empty()) lm.train(tokens);
    }
    forge::scorer::ScorerClient client(forge::scorer::transport_from_env(seed));

    std::vector<forge::corpus::SampleRecord> kept, rejected, quarantined;
    std::map<std::string, std::uint64_t> reasons;
    for (const auto& rec : records) {
        forge::filters::FilterVerdict verdict;
        try {
            verdict = forge::filters::heuristic_filter(rec, fcfg);
        } catch (const forge::filters::MissingDimensions&) {
            verdict.reject("missing_dimensions", 0.0);
        }
        if (verdict.keep) {
            const auto ppl = forge::filters::perplexity_filter(rec, lm, fcfg);
            if (!ppl.keep) verdict = ppl;
        }
        if (verdict.keep) {
            try {
                const auto safety = forge::filters::safety_filter(rec, client, fcfg);
                if (!safety.keep) verdict = safety;
            } catch (const forge::scorer::ScorerUnavailable&) {
                quarantined.push_back(rec);
                continue;
            }
        }
        if (verdict.keep) {
            kept.push_back(rec);
        } else {
            for (const auto& r : verdict.reasons) ++reasons[r];
            rejected.push_back(rec);
        }
    }
    fs::create_directories(out);
    forge::corpus::write_shard(out / "shard_00000.jsonl", kept, "filter");
    fs::create_directories(rejects);
    forge::corpus::write_shard(rejects / "shard_00000.jsonl", rejected, "filter_reject");
    forge::corpus::write_shard(rejects / "quarantine_00000.jsonl", quarantined,
                               "filter_quarantine");
    json summary;
    summary["kept"] = kept.size();
    summary["rejected"] = rejected.size();
    summary["quarantined"] = quarantined.size();
    summary["reasons"] = reasons;
    std::ofstream sf(rejects / "summary.json", std::ios::trunc);
    sf << summary.dump(2) << '\n';
    std::cerr << "filter: kept=" << kept.size() << " rejected=" << rejected.size()
              << " quarantined=" << quarantined.size() << '\n';
    return kOk;
}

int cmd_index(const fs::path& in, const fs::path& out, const fs::path& media,
              std::uint64_t seed) {
    forge::dedup::DedupConfig cfg;
    cfg.minhash.seed = seed;
    forge::dedup::DedupIndex index(cfg);
    auto loader = [&](const std::string& locator)
        -> std::optional<forge::image::Image> {
        const auto path = media / locator;
        if (media.empty() || !fs::exists(path)) return std::nullopt;
        return forge::image::read_pnm(path);
    };
    for (const auto& rec : read_dir(in)) {
        index.add(forge::dedup::features_for(rec, cfg, loader));
    }
    index.save(out);
    std::cerr << "index: " << index.size() << " records -> " << out << '\n';
    return kOk;
}

int cmd_dedup(const fs::path& in, const fs::path& baseline, const fs::path& eval_dir,
              const fs::path& out, const fs::path& report_path, const fs::path& media,
              std::uint64_t seed) {
    forge::dedup::DedupConfig cfg;
    cfg.minhash.seed = seed;
    std::optional<forge::dedup::DedupIndex> baseline_index, eval_index;
    if (!baseline.empty()) {
        baseline_index = forge::dedup::DedupIndex::load(baseline);
        cfg = baseline_index->config();
    }
    if (!eval_dir.empty()) {
        eval_index = forge::dedup::DedupIndex::load(eval_dir);
    }
    auto loader = [&](const std::string& locator)
        -> std::optional<forge::image::Image> {
        const auto path = media / locator;
        if (media.empty() || !fs::exists(path)) return std::nullopt;
        return forge::image::read_pnm(path);
    };
    const auto records = read_dir(in);
    std::vector<forge::dedup::RecordFeatures> features;
    features.reserve(records.size());
    for (const auto& rec : records) {
        features.push_back(forge::dedup::features_for(rec, cfg, loader));
    }
    auto [keep, report] = forge::dedup::dedup_corpus(
        features, baseline_index ? &*baseline_index : nullptr,
        eval_index ? &*eval_index : nullptr, cfg);
    std::vector<forge::corpus::SampleRecord> kept;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (keep[i]) kept.push_back(records[i]);
    }
    fs::create_directories(out);
    forge::corpus::write_shard(out / "shard_00000.jsonl", kept, "dedup");
    json rj;
    rj["input_count"] = report.input_count;
    rj["kept_count"] = report.kept_count;
    rj["url_dupes"] = report.url_dupes;
    rj["text_dupes"] = report.text_dupes;
    rj["image_dupes"] = report.image_dupes;
    rj["leakage_hits"] = report.leakage_hits;
    for (const auto& pair : report.duplicate_pairs) {
        rj["duplicate_pairs"].push_back(
            {{"kept", pair.kept_id}, {"removed", pair.removed_id},
             {"reason", pair.reason}});
    }
    std::ofstream rf(report_path, std::ios::trunc);
    rf << rj.dump(2) << '\n';
    std::cerr << "dedup: kept=" << report.kept_count << "/" << report.input_count
              << '\n';
    return kOk;
}

int cmd_cluster(const fs::path& in, std::size_t k, double cap, const fs::path& out,
                std::uint64_t seed, std::size_t reduced_dim) {
    const auto data = forge::cluster::read_embeddings(in);
    if (data.vectors.size() < 2) {
        throw forge::ConfigInvalid("need at least 2 embeddings");
    }
    const std::size_t target = std::min(reduced_dim, data.vectors.front().size());
    const auto reduced = forge::cluster::reduce_dim(data.vectors, target);
    const auto model = forge::cluster::kmeans_fit(reduced.vectors, k, seed);
    const auto plan = forge::cluster::balanced_downsample(model, cap, seed);

    json j;
    j["k"] = model.k;
    j["seed"] = seed;
    j["cap_factor"] = cap;
    j["inertia"] = model.inertia;
    for (const auto& [c, quota] : plan.per_cluster_quota) {
        j["quota"][std::to_string(c)] = quota;
    }
    for (std::size_t row : plan.selected_rows) {
        if (data.ids.empty()) {
            j["selected"].push_back(row);
        } else {
            j["selected"].push_back(data.ids[row]);
        }
    }
    std::ofstream f(out, std::ios::trunc);
    f << j.dump(2) << '\n';
    std::cerr << "cluster: selected=" << plan.selected_rows.size() << "/"
              << data.vectors.size() << '\n';
    return kOk;
}

int cmd_grade(const fs::path& profiles_path, const fs::path& out) {
    std::vector<forge::difficulty::ScorerProfile> profiles;
    for (const auto& j : read_jsonl(profiles_path)) {
        profiles.push_back({j.value("record_id", ""), j.value("loss_small", 0.0),
                            j.value("loss_expert", 0.0),
                            j.value("confidence_small", 0.0)});
    }
    const auto grades = forge::difficulty::grade_batch(profiles);
    const auto order = forge::difficulty::curriculum_order(grades);
    std::map<std::string, const forge::difficulty::DifficultyGrade*> by_id;
    for (const auto& g : grades) by_id[g.record_id] = &g;

    std::ofstream f(out, std::ios::trunc);
    for (const auto& id : order) {
        const auto* g = by_id.at(id);
        json line;
        line["record_id"] = g->record_id;
        line["score"] = g->score;
        line["grade"] = forge::difficulty::grade_name(g->grade);
        f << line.dump() << '\n';
    }
    std::cerr << "grade: " << grades.size() << " profiles\n";
    return kOk;
}

int cmd_prep_vision(const fs::path& in, const fs::path& out, double lowpass,
                    const fs::path& media, bool emit_tiles) {
    fs::create_directories(out);
    std::ofstream meta(out / "layouts.jsonl", std::ios::trunc);
    std::uint64_t images = 0;
    for (const auto& rec : read_dir(in)) {
        for (const auto* ref : rec.images()) {
            if (!ref->width || !ref->height) continue;
            const auto layout = forge::vision::select_grid(*ref->width, *ref->height);
            json line;
            line["record_id"] = rec.id;
            line["locator"] = ref->locator;
            line["grid"] = {layout.grid_cols, layout.grid_rows};
            line["n_tiles"] = layout.n_tiles;
            line["thumbnail"] = layout.include_thumbnail;
            line["token_count"] = layout.token_count;
            meta << line.dump() << '\n';
            ++images;

            const auto src = media / ref->locator;
            if (!media.empty() && fs::exists(src) && (emit_tiles || lowpass > 0.0)) {
                auto img = forge::image::read_pnm(src);
                if (lowpass > 0.0) {
                    forge::vision::LowPassConfig lp;
                    lp.removal_fraction = lowpass;
                    img = forge::vision::low_pass(img, lp);
                    forge::image::write_pnm(
                        out / ("lowpass_" + fs::path(ref->locator).filename().string()),
                        img);
                }
                if (emit_tiles) {
                    const auto tiles = forge::vision::tile_image(img, layout);
                    for (std::size_t t = 0; t < tiles.size(); ++t) {
                        std::ostringstream name;
                        name << fs::path(ref->locator).stem().string() << "_tile"
                             << t << ".ppm";
                        forge::image::write_pnm(out / name.str(), tiles[t]);
                    }
                }
            }
        }
    }
    std::cerr << "prep-vision: " << images << " image layouts\n";
    return kOk;
}

int cmd_reward(const fs::path& in, const fs::path& gold_path, std::size_t group_size,
               const fs::path& out, bool binary_mode) {
    std::map<std::string, std::pair<std::string, std::string>> gold;
    for (const auto& j : read_jsonl(gold_path)) {
        gold[j.value("group_id", "")] = {j.value("gold_label", ""),
                                         j.value("gold_violating_text", "")};
    }
    struct Row {
        std::string group_id;
        std::string sample_id;
        forge::rewards::RewardBreakdown breakdown;
    };
    std::vector<Row> rows;
    std::vector<std::string> group_order;
    std::map<std::string, std::vector<std::size_t>> groups;
    forge::rewards::RewardConfig rcfg;
    rcfg.binary_class = binary_mode;
    for (const auto& j : read_jsonl(in)) {
        Row row;
        row.group_id = j.value("group_id", "");
        row.sample_id = j.value("sample_id", "");
        auto it = gold.find(row.group_id);
        if (it == gold.end()) {
            throw forge::ConfigInvalid("no gold entry for group " + row.group_id);
        }
        forge::rewards::GroupSample sample;
        sample.response = j.value("response", "");
        sample.gold_label = it->second.first;
        sample.gold_violating_text = it->second.second;
        row.breakdown = forge::rewards::total_reward(sample, rcfg);
        if (!groups.contains(row.group_id)) {
            group_order.push_back(row.group_id);
        }
        groups[row.group_id].push_back(rows.size());
        rows.push_back(std::move(row));
    }
    forge::rewards::GrpoConfig gcfg;
    gcfg.group_size = group_size;

    std::ofstream f(out, std::ios::trunc);
    for (const auto& gid : group_order) {
        const auto& members = groups.at(gid);
        std::vector<double> rewards;
        rewards.reserve(members.size());
        for (std::size_t idx : members) {
            rewards.push_back(rows[idx].breakdown.total);
        }
        const auto advantages = forge::rewards::group_advantages(rewards, gcfg);
        for (std::size_t m = 0; m < members.size(); ++m) {
            const auto& row = rows[members[m]];
            json line;
            line["id"] = row.sample_id;
            line["group_id"] = row.group_id;
            line["r_cls"] = row.breakdown.r_cls;
            line["r_fmt"] = row.breakdown.r_fmt;
            line["r_ocr"] = row.breakdown.r_ocr;
            line["total"] = row.breakdown.total;
            line["advantage"] = advantages[m];
            line["kl_beta"] = gcfg.kl_beta;
            f << line.dump() << '\n';
        }
    }
    std::cerr << "reward: " << rows.size() << " responses in " << groups.size()
              << " group(s)\n";
    return kOk;
}

int cmd_eval(const fs::path& cases_dir, const fs::path& answers_path,
             const fs::path& out) {
    std::map<std::string, std::string> answers;
    for (const auto& j : read_jsonl(answers_path)) {
        answers[j.value("id", "")] = j.value("text", "");
    }
    std::vector<forge::evalkit::ModerationCase> moderation;
    std::vector<forge::evalkit::AdversarialCase> adversarial;
    for (const auto& shard : forge::corpus::list_shards(cases_dir)) {
        std::ifstream in(shard);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            json j = json::parse(line, nullptr, false);
            if (j.is_discarded()) {
                throw forge::IoFailure("malformed case line");
            }
            const std::string id = j.value("id", "");
            const std::string answer =
                answers.contains(id) ? answers.at(id) : std::string{};
            if (j.value("type", "") == "adversarial") {
                adversarial.push_back(
                    {id, j.value("subset", ""), j.value("gold_chars", ""), answer});
            } else {
                moderation.push_back({id, j.value("category", ""),
                                      j.value("gold", "") == "Yes", answer});
            }
        }
    }
    const auto report = forge::evalkit::evaluate(moderation, adversarial);
    std::ofstream f(out, std::ios::trunc);
    f << forge::evalkit::report_to_json(report) << '\n';
    fs::path txt = out;
    txt += ".txt";
    std::ofstream tf(txt, std::ios::trunc);
    tf << forge::evalkit::render_report(report);
    std::cout << forge::evalkit::render_report(report);
    return kOk;
}

int cmd_report(const fs::path& baseline_path, const fs::path& current_path,
               double threshold) {
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p);
        if (!in) throw forge::IoFailure("cannot open report " + p.string());
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    const auto baseline = forge::evalkit::report_from_json(slurp(baseline_path));
    const auto current = forge::evalkit::report_from_json(slurp(current_path));
    const auto alarms = forge::evalkit::drift_alarm(baseline, current, threshold);
    for (const auto& alarm : alarms) {
        std::cout << "ALARM " << alarm.metric << " baseline=" << alarm.baseline
                  << " current=" << alarm.current << " delta=" << alarm.delta << '\n';
    }
    if (alarms.empty()) {
        std::cout << "no drift beyond " << threshold << " points\n";
    }
    return kOk;
}

int cmd_run(const fs::path& config_path) {
    const auto cfg = forge::pipeline::PipelineConfig::from_file(config_path);
    forge::scorer::ScorerClient client(forge::scorer::transport_from_env(cfg.seed));
    const auto summary = forge::pipeline::run_pipeline(cfg, client);
    std::cout << summary.to_json() << '\n';
    if (cfg.strict) {
        for (const auto& [name, counts] : summary.stages) {
            if (counts.quarantined > 0) {
                std::cerr << "strict: stage '" << name << "' quarantined "
                          << counts.quarantined << " record(s)\n";
                return kQuarantineStrict;
            }
        }
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"forge: multimodal moderation data curation toolkit"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a seeded synthetic corpus");
    fs::path gen_out, gen_media;
    std::size_t gen_count = 10000, gen_shard = 1000;
    std::uint64_t gen_seed = 1;
    gen->add_option("--out", gen_out, "output shard dir")->required();
    gen->add_option("--media", gen_media, "image output dir");
    gen->add_option("--count", gen_count, "record count");
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--shard-size", gen_shard, "records per shard");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "parse and validate raw records");
    fs::path ingest_in, ingest_out;
    ingest->add_option("--in", ingest_in, "raw shard dir")->required();
    ingest->add_option("--out", ingest_out, "validated shard dir")->required();

    // filter
    auto* filter = app.add_subcommand("filter", "stage-2 coarse filtering");
    fs::path filter_cfg, filter_in, filter_out, filter_rejects;
    std::uint64_t filter_seed = 0;
    filter->add_option("--config", filter_cfg, "filter config json");
    filter->add_option("--in", filter_in, "input shard dir")->required();
    filter->add_option("--out", filter_out, "kept shard dir")->required();
    filter->add_option("--rejects", filter_rejects, "rejects dir")->required();
    filter->add_option("--seed", filter_seed, "stub scorer seed");

    // index
    auto* index = app.add_subcommand("index", "build a dedup index dir from shards");
    fs::path index_in, index_out, index_media;
    std::uint64_t index_seed = 0;
    index->add_option("--in", index_in, "shard dir")->required();
    index->add_option("--out", index_out, "index dir")->required();
    index->add_option("--media", index_media, "media root for image hashing");
    index->add_option("--seed", index_seed, "minhash seed");

    // dedup
    auto* dedup = app.add_subcommand("dedup", "stage-3 cross-source deduplication");
    fs::path dedup_in, dedup_baseline, dedup_eval, dedup_out, dedup_report, dedup_media;
    std::uint64_t dedup_seed = 0;
    dedup->add_option("--in", dedup_in, "input shard dir")->required();
    dedup->add_option("--baseline", dedup_baseline, "baseline index dir");
    dedup->add_option("--eval", dedup_eval, "eval index dir");
    dedup->add_option("--out", dedup_out, "kept shard dir")->required();
    dedup->add_option("--report", dedup_report, "dedup report json")->required();
    dedup->add_option("--media", dedup_media, "media root for image hashing");
    dedup->add_option("--seed", dedup_seed, "minhash seed");

    // cluster
    auto* cluster = app.add_subcommand("cluster", "stage-4 clustering and sampling");
    fs::path cluster_in, cluster_out;
    std::size_t cluster_k = 256, cluster_dim = 8;
    double cluster_cap = 2.0;
    std::uint64_t cluster_seed = 0;
    cluster->add_option("--in", cluster_in, "embeddings file")->required();
    cluster->add_option("--k", cluster_k, "cluster count");
    cluster->add_option("--cap", cluster_cap, "cap factor");
    cluster->add_option("--out", cluster_out, "plan file")->required();
    cluster->add_option("--seed", cluster_seed, "kmeans seed");
    cluster->add_option("--reduced-dim", cluster_dim, "PCA target dim");

    // grade
    auto* grade = app.add_subcommand("grade", "stage-7 difficulty grading");
    fs::path grade_in, grade_out;
    grade->add_option("--profiles", grade_in, "loss profile jsonl")->required();
    grade->add_option("--out", grade_out, "grades jsonl")->required();

    // prep-vision
    auto* prep = app.add_subcommand("prep-vision", "tiling layouts and low-pass");
    fs::path prep_in, prep_out, prep_media;
    double prep_lowpass = 0.0;
    bool prep_tiles = false;
    prep->add_option("--in", prep_in, "input shard dir")->required();
    prep->add_option("--out", prep_out, "output dir")->required();
    prep->add_option("--lowpass", prep_lowpass, "removal fraction (0 = off)");
    prep->add_option("--media", prep_media, "media root");
    prep->add_flag("--emit-tiles", prep_tiles, "write tile images");

    // reward
    auto* reward = app.add_subcommand("reward", "GRPO rewards and advantages");
    fs::path reward_in, reward_gold, reward_out;
    std::size_t reward_group = 8;
    bool reward_binary = false;
    reward->add_option("--in", reward_in, "responses jsonl")->required();
    reward->add_option("--gold", reward_gold, "gold jsonl")->required();
    reward->add_option("--group-size", reward_group, "samples per group");
    reward->add_option("--out", reward_out, "reward jsonl")->required();
    reward->add_flag("--binary", reward_binary, "grade only the binary decision");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "moderation + adversarial evaluation");
    fs::path eval_cases, eval_answers, eval_out;
    eval_cmd->add_option("--cases", eval_cases, "case shard dir")->required();
    eval_cmd->add_option("--answers", eval_answers, "answers jsonl")->required();
    eval_cmd->add_option("--out", eval_out, "report json")->required();

    // report
    auto* report = app.add_subcommand("report", "stage-8 drift alarms");
    fs::path report_baseline, report_current;
    double report_threshold = 2.0;
    report->add_option("--baseline", report_baseline, "baseline report")->required();
    report->add_option("--current", report_current, "current report")->required();
    report->add_option("--threshold", report_threshold, "alarm threshold (points)");

    // run
    auto* run = app.add_subcommand("run", "run the configured pipeline end to end");
    fs::path run_config;
    run->add_option("--config", run_config, "pipeline config json")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kConfigError;
    }

    try {
        if (gen->parsed()) return cmd_gen(gen_out, gen_media, gen_count, gen_seed,
                                          gen_shard);
        if (ingest->parsed()) return cmd_ingest(ingest_in, ingest_out);
        if (filter->parsed())
            return cmd_filter(filter_cfg, filter_in, filter_out, filter_rejects,
                              filter_seed);
        if (index->parsed()) return cmd_index(index_in, index_out, index_media,
                                              index_seed);
        if (dedup->parsed())
            return cmd_dedup(dedup_in, dedup_baseline, dedup_eval, dedup_out,
                             dedup_report, dedup_media, dedup_seed);
        if (cluster->parsed())
            return cmd_cluster(cluster_in, cluster_k, cluster_cap, cluster_out,
                               cluster_seed, cluster_dim);
        if (grade->parsed()) return cmd_grade(grade_in, grade_out);
        if (prep->parsed())
            return cmd_prep_vision(prep_in, prep_out, prep_lowpass, prep_media,
                                   prep_tiles);
        if (reward->parsed())
            return cmd_reward(reward_in, reward_gold, reward_group, reward_out,
                              reward_binary);
        if (eval_cmd->parsed()) return cmd_eval(eval_cases, eval_answers, eval_out);
        if (report->parsed())
            return cmd_report(report_baseline, report_current, report_threshold);
        if (run->parsed()) return cmd_run(run_config);
    } catch (const forge::ConfigInvalid& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const forge::pipeline::StageFailure& e) {
        std::cerr << "stage failure: " << e.what() << '\n';
        return kStageFailure;
    } catch (const forge::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kStageFailure;
    }
    return kConfigError;
}
