// vmil: synthesize datasets, train the MIL video classifier variants, and
// export metrics and attention visualizations, all driven by one config file.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "vmil/attention_viz.hpp"
#include "vmil/metrics_io.hpp"
#include "vmil/pipeline.hpp"
#include "vmil/vmil.hpp"

namespace fs = std::filesystem;
using namespace vmil;

namespace {

struct CliOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> variant;
    std::string checkpoint;
    std::string out;
    std::string video_id;
};

RunConfig effective_config(const CliOptions& opt) {
    RunConfig cfg = load_run_config(opt.config_path);
    if (opt.seed) {
        cfg.seed = *opt.seed;
        cfg.wire_seeds();
    }
    if (opt.variant) cfg.model.variant = variant_from_string(*opt.variant);
    if (!opt.out.empty()) cfg.out_dir = opt.out;
    return cfg;
}

std::string run_tag(const RunConfig& cfg) {
    return to_string(cfg.model.variant) + "_" + config_hash(cfg);
}

fs::path out_file(const RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.out_dir);
    return fs::path(cfg.out_dir) / name;
}

int cmd_synth(const CliOptions& opt) {
    const RunConfig cfg = effective_config(opt);
    const auto bags = generate_dataset(cfg.data);
    const std::string dir = dataset_dir(cfg);
    write_dataset(dir, bags, cfg.data.num_classes, data_hash(cfg), "manifest.jsonl");

    std::map<int, int> histogram;
    for (const auto& b : bags)
        for (int c : b.video_label.classes()) ++histogram[c];
    std::cout << "wrote " << bags.size() << " videos to " << dir << "\nclass histogram:\n";
    for (int c = 0; c < cfg.data.num_classes; ++c)
        std::cout << "  class_" << c << ": " << histogram[c] << "\n";
    return 0;
}

int cmd_train(const CliOptions& opt) {
    const RunConfig cfg = effective_config(opt);
    const auto bags = load_corpus(cfg);
    const Splits splits = make_splits(cfg, bags);
    const TrainOutcome outcome = train(cfg.model, cfg.training, splits.train, splits.val);

    ModelParams best = outcome.params;
    Checkpoint ckpt = make_checkpoint(outcome, best, to_json(cfg).dump());
    const auto ckpt_path = out_file(cfg, "checkpoint_" + run_tag(cfg) + ".ckpt");
    save_checkpoint(ckpt_path.string(), ckpt);
    write_epoch_log(out_file(cfg, "trainlog_" + run_tag(cfg) + ".jsonl").string(), outcome.log);

    std::cout << "variant " << to_string(cfg.model.variant) << ": best epoch " << outcome.best_epoch
              << " val loss " << outcome.best_val_loss << "\ncheckpoint: " << ckpt_path.string()
              << "\n";
    return 0;
}

int cmd_ablate(const CliOptions& opt) {
    const RunConfig base = effective_config(opt);
    const auto bags = load_corpus(base);
    std::vector<AblationRow> rows;
    for (const auto& [variant, name] : variant_names()) {
        RunConfig cfg = base;
        cfg.model.variant = variant;
        const ExperimentResult result = run_experiment(cfg, bags);
        rows.push_back({name, result.metrics.macro_all});
        std::cout << name << ": F1 " << result.metrics.macro_all.f1 << " precision "
                  << result.metrics.macro_all.precision << " recall "
                  << result.metrics.macro_all.recall << "\n";
    }
    const auto csv = out_file(base, "ablation_" + config_hash(base) + ".csv");
    write_ablation_csv(csv.string(), rows);
    std::cout << "ablation table: " << csv.string() << "\n";
    return 0;
}

ModelParams params_from_checkpoint(const RunConfig& cfg, const std::string& path) {
    const Checkpoint ckpt = load_checkpoint(path);
    ModelParams params = init_model(cfg.model, 0);
    restore_params(ckpt, params);
    return params;
}

int cmd_eval(const CliOptions& opt) {
    const RunConfig cfg = effective_config(opt);
    if (opt.checkpoint.empty()) throw ConfigError("eval requires --checkpoint");
    const auto bags = load_corpus(cfg);
    const Splits splits = make_splits(cfg, bags);
    const ModelParams params = params_from_checkpoint(cfg, opt.checkpoint);

    const auto records = predict_records(cfg, params, splits.test);
    const MetricsTable table = evaluate(records);
    const LocalizationScore loc = localization_score(records, cfg.top_k);

    write_metrics_csv(out_file(cfg, "metrics_" + run_tag(cfg) + ".csv").string(), table);
    nlohmann::json mj = metrics_to_json(table);
    mj["localization"] = {{"argmax_hit_rate", loc.argmax_hit_rate},
                          {"topk_hit_rate", loc.topk_hit_rate},
                          {"mean_attention_on_positive", loc.mean_attention_on_positive},
                          {"counted", loc.counted},
                          {"skipped", loc.skipped}};
    mj["config_hash"] = config_hash(cfg);
    std::ofstream mjf(out_file(cfg, "metrics_" + run_tag(cfg) + ".json"));
    mjf << mj.dump(2) << "\n";
    write_records_jsonl(out_file(cfg, "records_" + run_tag(cfg) + ".jsonl").string(), records);
    write_confusion_csv(out_file(cfg, "confusion_" + run_tag(cfg) + ".csv").string(),
                        confusion_matrix(records));

    std::cout << "macro F1 " << table.macro_all.f1 << " precision " << table.macro_all.precision
              << " recall " << table.macro_all.recall << " specificity "
              << table.macro_all.specificity << "\n";
    if (loc.counted > 0)
        std::cout << "localization argmax hit rate " << loc.argmax_hit_rate << " over "
                  << loc.counted << " videos\n";
    return 0;
}

int cmd_viz(const CliOptions& opt) {
    const RunConfig cfg = effective_config(opt);
    if (opt.checkpoint.empty()) throw ConfigError("viz requires --checkpoint");
    if (opt.video_id.empty()) throw ConfigError("viz requires --video");
    const auto bags = load_corpus(cfg);
    const VideoBag* bag = nullptr;
    for (const auto& b : bags)
        if (b.id == opt.video_id) bag = &b;
    if (!bag) throw ConfigError("unknown video id '" + opt.video_id + "'");

    const ModelParams params = params_from_checkpoint(cfg, opt.checkpoint);
    const VideoBag sub = subsample_uniform(*bag, cfg.training.sequence_length);
    const ForwardResult fwd = forward_variant(cfg.model, params, *sub.features);

    const std::string tag = opt.video_id + "_" + config_hash(cfg);
    const auto alpha_path = out_file(cfg, "alpha_" + tag + ".txt");
    write_alpha(alpha_path.string(), fwd.alpha);
    for (int f = 0; f < sub.frame_count(); ++f) {
        char name[64];
        std::snprintf(name, sizeof name, "frame_%04d", f);
        write_pgm(out_file(cfg, "attn_" + tag + "_" + name + ".pgm").string(),
                  encoded_frame_for_export(sub, f, fwd.alpha[f]));
    }
    std::cout << "alpha: " << alpha_path.string() << " (" << sub.frame_count()
              << " encoded frames alongside)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"weakly-supervised video MIL toolkit"};
    app.require_subcommand(1);

    CliOptions opt;
    auto add_common = [&](CLI::App* sub, bool needs_checkpoint = false) {
        sub->add_option("--config", opt.config_path, "config file (JSON)")->required();
        sub->add_option("--seed", opt.seed, "override the config seed");
        sub->add_option("--variant", opt.variant,
                        "model variant (AttenConv, AttenConvLSTM, AttenLSTM, GuidedLSTM, PS-DeVCEM)");
        sub->add_option("--out", opt.out, "output directory (overrides config)");
        if (needs_checkpoint) sub->add_option("--checkpoint", opt.checkpoint, "checkpoint file");
    };

    auto* synth = app.add_subcommand("synth", "generate the synthetic dataset");
    add_common(synth);
    auto* train_cmd = app.add_subcommand("train", "train one variant");
    add_common(train_cmd);
    auto* ablate = app.add_subcommand("ablate", "train and compare all five variants");
    add_common(ablate);
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
    add_common(eval_cmd, true);
    auto* viz = app.add_subcommand("viz", "export attention weights and encoded frames");
    add_common(viz, true);
    viz->add_option("--video", opt.video_id, "video id to visualize");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (synth->parsed()) return cmd_synth(opt);
        if (train_cmd->parsed()) return cmd_train(opt);
        if (ablate->parsed()) return cmd_ablate(opt);
        if (eval_cmd->parsed()) return cmd_eval(opt);
        if (viz->parsed()) return cmd_viz(opt);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ContractViolation& e) {
        std::cerr << "contract violation: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
