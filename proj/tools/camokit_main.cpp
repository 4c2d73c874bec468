// camokit command-line tool: dataset conversion, sub-description fusion,
// gradient verification, detection evaluation, and the synthetic camouflage
// benchmark.
//
// Exit codes: 0 success, 1 I/O or runtime failure, 2 usage error,
// 3 failed acceptance check (gradcheck, bench-synth --assert).

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>

#include "camokit/gradcheck.hpp"
#include "camokit/io.hpp"
#include "camokit/pipeline.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace camokit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitCheckFailed = 3;

std::string slug(const std::string& name) {
    std::string out = name;
    std::replace(out.begin(), out.end(), ' ', '_');
    return out;
}

void emit(const json& doc, const std::string& out_path) {
    const std::string text = doc.dump(2) + "\n";
    if (out_path.empty() || out_path == "-") {
        std::cout << text;
    } else {
        io::write_file_atomic(out_path, text);
    }
}

// ---------------------------------------------------------------------------

struct ConvertOptions {
    std::string masks_dir;
    std::string descriptions_dir;
    std::string out_dir;
    std::string modifiers_path;
    std::string stopwords_path;
    std::string novel_path;  // canonical names of novel (held-out) classes
    std::size_t min_phrases = 20;
};

int run_convert(const ConvertOptions& opt) {
    std::vector<fs::path> mask_files;
    for (const auto& entry : fs::directory_iterator(opt.masks_dir)) {
        if (!entry.is_regular_file()) continue;
        const fs::path& p = entry.path();
        if (p.extension() == ".pgm" || p.extension() == ".txt") {
            mask_files.push_back(p);
        }
    }
    std::sort(mask_files.begin(), mask_files.end());
    if (mask_files.empty()) {
        std::cerr << "convert: no .pgm or .txt masks in " << opt.masks_dir << "\n";
        return kExitRuntime;
    }

    std::vector<std::string> modifiers;
    if (!opt.modifiers_path.empty()) {
        modifiers = io::read_lines(opt.modifiers_path);
    }
    std::set<std::string> stopwords = opt.stopwords_path.empty()
                                          ? default_stopwords()
                                          : io::read_word_set(opt.stopwords_path);

    // Mask files are named `<raw class>__<image stem>.<ext>`.
    std::vector<std::string> raw_names;
    std::vector<std::string> image_stems;
    for (const fs::path& p : mask_files) {
        const std::string stem = p.stem().string();
        const std::size_t sep = stem.rfind("__");
        if (sep == std::string::npos || sep == 0) {
            std::cerr << "convert: mask name '" << stem
                      << "' is not <class>__<image>\n";
            return kExitRuntime;
        }
        std::string raw = stem.substr(0, sep);
        std::replace(raw.begin(), raw.end(), '_', ' ');  // filenames can't hold spaces
        raw_names.push_back(std::move(raw));
        image_stems.push_back(stem.substr(sep + 2));
    }

    UnifyResult unified = unify_labels(raw_names, modifiers);
    if (!opt.novel_path.empty()) {
        for (const std::string& line : io::read_lines(opt.novel_path)) {
            const std::string name = canonicalize_label(line, modifiers);
            const auto it = std::find(unified.vocab.names.begin(),
                                      unified.vocab.names.end(), name);
            if (it == unified.vocab.names.end()) {
                std::cerr << "convert: warning: novel class '" << name
                          << "' not present in the mask set\n";
                continue;
            }
            unified.vocab.novel[static_cast<std::size_t>(
                it - unified.vocab.names.begin())] = true;
        }
    }

    const fs::path out_root(opt.out_dir);
    fs::create_directories(out_root / "labels");
    io::write_vocabulary(out_root / "classes.txt", unified.vocab);
    if (!opt.novel_path.empty()) {
        io::write_novel_ids(out_root / "novel_ids.txt", unified.vocab);
    }

    for (std::size_t i = 0; i < mask_files.size(); ++i) {
        const MaskImage mask = io::read_mask(mask_files[i]);
        const LabelRecord record{unified.mapping[i], mask_to_bbox(mask)};
        io::write_file_atomic(out_root / "labels" / (image_stems[i] + ".txt"),
                              write_yolo_txt(std::vector{record}));
    }

    // Optional text pipeline: per-class description files drive the term
    // repository, assembled phrases, and quality statistics.
    if (!opt.descriptions_dir.empty()) {
        ClassDescriptions descriptions;
        for (const std::string& name : unified.vocab.names) {
            const fs::path file = fs::path(opt.descriptions_dir) / (slug(name) + ".txt");
            if (fs::exists(file)) {
                descriptions.emplace_back(name, io::read_lines(file));
            }
        }
        if (!descriptions.empty()) {
            const TermRepository repo = build_term_repository(descriptions, stopwords);
            fs::create_directories(out_root / "terms");
            fs::create_directories(out_root / "phrases");
            json quality = json::object();
            for (std::size_t c = 0; c < repo.classes.size(); ++c) {
                const ClassTerms& terms = repo.classes[c];
                if (terms.empty_warning) {
                    std::cerr << "convert: warning: no usable terms for '"
                              << terms.class_name << "'\n";
                }
                io::write_file_atomic(out_root / "terms" / (slug(terms.class_name) + ".txt"),
                                      io::format_terms(terms));
                const std::vector<std::string> phrases =
                    assemble_phrases(terms, terms.class_name, opt.min_phrases);
                if (phrases.size() < opt.min_phrases) {
                    std::cerr << "convert: warning: only " << phrases.size()
                              << " phrases for '" << terms.class_name << "'\n";
                }
                std::string phrase_text;
                for (const std::string& p : phrases) {
                    phrase_text += p;
                    phrase_text += '\n';
                }
                io::write_file_atomic(
                    out_root / "phrases" / (slug(terms.class_name) + ".txt"),
                    phrase_text);

                const TextQualityStats stats =
                    text_quality_stats(descriptions[c].second);
                quality[terms.class_name] = {
                    {"lexical_diversity", stats.lexical_diversity},
                    {"avg_tokens", stats.avg_tokens},
                    {"unique_words", stats.unique_words},
                    {"avg_unique_ratio", stats.avg_unique_ratio},
                    {"sentence_length_std", stats.sentence_length_std},
                };
            }
            emit(quality, (out_root / "quality_stats.json").string());
        }
    }

    std::cout << "convert: wrote " << mask_files.size() << " label files, "
              << unified.vocab.names.size() << " classes -> " << opt.out_dir
              << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct FuseOptions {
    std::string embeddings_dir;
    std::string out_path;
    std::string variant = "sum_normalize";
    std::string field_path;
    long positive = -1;
    std::size_t svd_min = 3;
    std::size_t svd_max = 10;
};

int run_fuse(const FuseOptions& opt) {
    const FusionVariant variant = parse_fusion_variant(opt.variant);
    const bool needs_field = variant == FusionVariant::Contrastive ||
                             variant == FusionVariant::OrthogonalContrastive;
    EmbeddingField field;
    if (needs_field) {
        if (opt.field_path.empty() || opt.positive < 0) {
            std::cerr << "fuse: contrastive variants need --field and --positive\n";
            return kExitUsage;
        }
        field = io::read_embedding_field_file(opt.field_path);
        if (static_cast<std::size_t>(opt.positive) >= field.embeddings.size()) {
            std::cerr << "fuse: --positive out of range\n";
            return kExitUsage;
        }
    }

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(opt.embeddings_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".bin") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        std::cerr << "fuse: no .bin embedding files in " << opt.embeddings_dir << "\n";
        return kExitRuntime;
    }

    json out = json::array();
    for (const fs::path& file : files) {
        const SubDescriptionSet set = io::read_subdescription_file(file);
        const AdapterParams adapter = AdapterParams::identity(set.embeddings.cols);
        const Matrix refined =
            adapter_forward_rows(adapter, decorrelate(set, opt.svd_max, opt.svd_min));

        FusionWeights weights;
        if (needs_field) {
            weights = contrastive_weights(
                field.embeddings[static_cast<std::size_t>(opt.positive)],
                field.mean, refined);
        }
        FusedClassEmbedding fused;
        switch (variant) {
            case FusionVariant::SumNormalize:
                fused = fuse_sum_normalize(set);
                break;
            case FusionVariant::Contrastive:
                fused = fuse_contrastive(weights, refined, set.class_id);
                break;
            case FusionVariant::Orthogonal:
                fused = fuse_orthogonal(refined, nullptr, set.class_id);
                break;
            case FusionVariant::OrthogonalContrastive:
                fused = fuse_orthogonal(refined, &weights, set.class_id);
                break;
        }
        json entry = {
            {"file", file.filename().string()},
            {"class_id", fused.class_id},
            {"degenerate", fused.degenerate},
            {"vector", fused.vector},
        };
        if (needs_field) {
            entry["weights"] = {{"raw", weights.raw_scores},
                                {"normalized", weights.normalized}};
        }
        out.push_back(std::move(entry));
    }
    emit(out, opt.out_path);
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct GradcheckOptions {
    std::size_t trials = 50;
    std::uint64_t seed = 1;
    std::string out_path;
};

int run_gradcheck(const GradcheckOptions& opt) {
    const std::vector<GradCheckResult> results =
        run_gradient_checks(opt.trials, opt.seed);
    json doc = json::array();
    bool all_passed = true;
    for (const GradCheckResult& r : results) {
        std::cout << (r.passed ? "PASS" : "FAIL") << "  " << r.suite
                  << "  max_rel_error=" << r.max_rel_error << "  trials=" << r.trials
                  << "\n";
        doc.push_back({{"suite", r.suite},
                       {"trials", r.trials},
                       {"max_rel_error", r.max_rel_error},
                       {"passed", r.passed}});
        all_passed = all_passed && r.passed;
    }
    if (!opt.out_path.empty()) emit(doc, opt.out_path);
    return all_passed ? kExitOk : kExitCheckFailed;
}

// ---------------------------------------------------------------------------

struct EvalOptions {
    std::string dets_path;
    std::string gt_path;
    std::string out_path;
};

json report_to_json(const EvalReport& report) {
    const auto field = [](const std::optional<double>& v) {
        return v.has_value() ? json(*v) : json(nullptr);
    };
    json doc = {
        {"convention", "coco:101-point interpolation, IoU 0.50:0.05:0.95 mean"},
        {"ap", field(report.ap)},
        {"ap50", field(report.ap50)},
        {"ap75", field(report.ap75)},
        {"ap_medium", field(report.ap_medium)},
        {"ap_large", field(report.ap_large)},
    };
    if (report.ap_mild || report.ap_moderate || report.ap_severe) {
        doc["ap_mild"] = field(report.ap_mild);
        doc["ap_moderate"] = field(report.ap_moderate);
        doc["ap_severe"] = field(report.ap_severe);
    }
    json per_class = json::array();
    for (const ClassApEntry& entry : report.per_class) {
        per_class.push_back({{"class", entry.class_index},
                             {"num_gt", entry.num_gt},
                             {"ap", entry.ap},
                             {"ap50", entry.ap50},
                             {"ap75", entry.ap75}});
    }
    doc["per_class"] = std::move(per_class);
    return doc;
}

int run_eval(const EvalOptions& opt) {
    const std::vector<DetectionRecord> dets =
        io::parse_detections(io::read_file(opt.dets_path));
    const std::vector<GroundTruthRecord> gts =
        io::parse_ground_truth(io::read_file(opt.gt_path));
    emit(report_to_json(evaluate(dets, gts)), opt.out_path);
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct BenchOptions {
    SynthConfig synth;
    std::size_t seeds = 20;
    double lambda = 5.0;
    bool full_matrix = false;
    bool assert_directions = false;
    std::string out_dir;
};

json variant_to_json(const VariantReport& v) {
    json entry = {
        {"fusion", fusion_variant_name(v.fusion)},
        {"gate", gate_variant_name(v.gate)},
        {"mean_ap", v.mean_ap},
        {"per_seed_ap", v.per_seed_ap},
        {"mean_beta_decoy", v.mean_beta_decoy},
        {"mean_beta_informative", v.mean_beta_informative},
        {"mean_focus_ratio", v.mean_focus_ratio},
        {"coverage_by_lambda", v.coverage_by_lambda},
    };
    const auto field = [](const std::optional<double>& x) {
        return x.has_value() ? json(*x) : json(nullptr);
    };
    entry["mean_ap_mild"] = field(v.mean_ap_mild);
    entry["mean_ap_moderate"] = field(v.mean_ap_moderate);
    entry["mean_ap_severe"] = field(v.mean_ap_severe);
    return entry;
}

int run_bench(const BenchOptions& opt) {
    BenchConfig cfg;
    cfg.synth = opt.synth;
    cfg.num_seeds = opt.seeds;
    if (opt.full_matrix) {
        for (FusionVariant fusion :
             {FusionVariant::SumNormalize, FusionVariant::Contrastive,
              FusionVariant::Orthogonal, FusionVariant::OrthogonalContrastive}) {
            for (GateVariant gate : {GateVariant::None, GateVariant::Glu,
                                     GateVariant::Swiglu, GateVariant::Sfglu}) {
                RunConfig run;
                run.fusion = fusion;
                run.gate = gate;
                cfg.runs.push_back(run);
            }
        }
    }
    if (cfg.runs.empty()) cfg.runs = BenchConfig::default_runs();
    for (RunConfig& run : cfg.runs) run.lambda = opt.lambda;
    const BenchReport report = run_benchmark(cfg);

    json doc;
    doc["seeds"] = report.num_seeds;
    doc["config"] = {
        {"embedding_dim", cfg.synth.embedding_dim},
        {"grid", {cfg.synth.grid_height, cfg.synth.grid_width}},
        {"channels", cfg.synth.channels},
        {"num_classes", cfg.synth.num_classes},
        {"subs_per_class", cfg.synth.subs_per_class},
        {"camouflage", cfg.synth.camouflage},
        {"decoy_fraction", cfg.synth.decoy_fraction},
        {"scenes_per_seed", cfg.synth.scenes},
        {"seed_base", cfg.synth.seed},
    };
    json variants = json::array();
    for (const VariantReport& v : report.variants) {
        variants.push_back(variant_to_json(v));
    }
    doc["variants"] = std::move(variants);

    // Plot-friendly flat table.
    std::string table = "fusion\tgate\tmean_ap\tap_mild\tap_moderate\tap_severe\n";
    for (const VariantReport& v : report.variants) {
        table += std::string(fusion_variant_name(v.fusion)) + "\t" +
                 gate_variant_name(v.gate) + "\t" + std::to_string(v.mean_ap) + "\t" +
                 std::to_string(v.mean_ap_mild.value_or(-1)) + "\t" +
                 std::to_string(v.mean_ap_moderate.value_or(-1)) + "\t" +
                 std::to_string(v.mean_ap_severe.value_or(-1)) + "\n";
    }

    if (!opt.out_dir.empty()) {
        fs::create_directories(opt.out_dir);
        emit(doc, (fs::path(opt.out_dir) / "bench_report.json").string());
        io::write_file_atomic(fs::path(opt.out_dir) / "bench_table.tsv", table);
    } else {
        std::cout << table;
    }

    if (!opt.assert_directions) return kExitOk;

    const VariantReport* sum_norm =
        report.find(FusionVariant::SumNormalize, GateVariant::None);
    const VariantReport* contrastive =
        report.find(FusionVariant::Contrastive, GateVariant::None);
    const VariantReport* gated =
        report.find(FusionVariant::Contrastive, GateVariant::Sfglu);
    if (sum_norm == nullptr || contrastive == nullptr || gated == nullptr) {
        std::cerr << "bench-synth: --assert needs the default variant set\n";
        return kExitUsage;
    }

    const std::size_t need_wins =
        (opt.seeds * 8 + 9) / 10;  // ceil(0.8 * seeds): 16 of 20
    bool ok = true;
    const auto check = [&ok](const std::string& what, bool condition) {
        std::cout << (condition ? "PASS  " : "FAIL  ") << what << "\n";
        ok = ok && condition;
    };
    check("contrastive mean AP > sum_normalize mean AP",
          contrastive->mean_ap > sum_norm->mean_ap);
    check("contrastive wins vs sum_normalize in >= " + std::to_string(need_wins) +
              " seeds (" + std::to_string(count_wins(*contrastive, *sum_norm)) + ")",
          count_wins(*contrastive, *sum_norm) >= need_wins);
    check("contrastive+sfglu mean AP >= contrastive mean AP",
          gated->mean_ap >= contrastive->mean_ap);
    check("contrastive+sfglu wins vs contrastive in >= " +
              std::to_string(need_wins) + " seeds (" +
              std::to_string(count_wins(*gated, *contrastive)) + ")",
          count_wins(*gated, *contrastive) >= need_wins);
    check("difficulty ordering mild > moderate > severe (ungated contrastive)",
          contrastive->mean_ap_mild.value_or(0) >
                  contrastive->mean_ap_moderate.value_or(0) &&
              contrastive->mean_ap_moderate.value_or(0) >
                  contrastive->mean_ap_severe.value_or(-1));
    check("coverage term is exactly zero at lambda zero",
          contrastive->coverage_by_lambda.count("0") &&
              contrastive->coverage_by_lambda.at("0") == 0.0);
    return ok ? kExitOk : kExitCheckFailed;
}

// Flat key=value config support: expand `--config FILE` into synthetic
// arguments so explicit command-line flags always win.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config_path = args[i + 1];
        } else if (args[i].starts_with("--config=")) {
            config_path = args[i].substr(9);
        }
    }
    if (config_path.empty()) return args;

    for (const std::string& raw : io::read_lines(config_path)) {
        std::string line = raw.substr(0, raw.find('#'));
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        const auto trim = [](std::string text) {
            const auto begin = text.find_first_not_of(" \t");
            const auto end = text.find_last_not_of(" \t");
            return begin == std::string::npos
                       ? std::string()
                       : text.substr(begin, end - begin + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) continue;
        const std::string flag = "--" + key;
        bool present = false;
        for (const std::string& arg : args) {
            if (arg == flag || arg.starts_with(flag + "=")) present = true;
        }
        if (present) continue;
        args.push_back(flag);
        if (!value.empty() && value != "true") args.push_back(value);
    }
    return args;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"specificity-driven camouflaged object detection toolkit"};
    app.require_subcommand(1);

    ConvertOptions convert_opt;
    CLI::App* convert = app.add_subcommand(
        "convert", "masks + descriptions -> YOLO labels, vocabulary, term repository");
    std::string convert_config;
    convert->add_option("--config", convert_config, "flat key=value config file");
    convert->add_option("--masks", convert_opt.masks_dir, "directory of <class>__<image>.pgm/.txt masks")
        ->required();
    convert->add_option("--descriptions", convert_opt.descriptions_dir,
                        "directory of per-class description .txt files");
    convert->add_option("--out", convert_opt.out_dir, "output directory")->required();
    convert->add_option("--modifiers", convert_opt.modifiers_path,
                        "file listing modifier words to strip from labels");
    convert->add_option("--stopwords", convert_opt.stopwords_path,
                        "stop-word file (default: built-in English list)");
    convert->add_option("--novel", convert_opt.novel_path,
                        "file listing novel class names; emits novel_ids.txt");
    convert->add_option("--min-phrases", convert_opt.min_phrases,
                        "assembled phrases per class before warning");

    FuseOptions fuse_opt;
    CLI::App* fuse = app.add_subcommand(
        "fuse", "fuse per-class sub-description embedding files");
    std::string fuse_config;
    fuse->add_option("--config", fuse_config, "flat key=value config file");
    fuse->add_option("--embeddings", fuse_opt.embeddings_dir,
                     "directory of .bin sub-description embedding files")
        ->required();
    fuse->add_option("--out", fuse_opt.out_path, "output JSON path (default stdout)");
    fuse->add_option("--variant", fuse_opt.variant,
                     "sum_normalize | contrastive | orthogonal | orthogonal_contrastive");
    fuse->add_option("--field", fuse_opt.field_path,
                     "embedding field .bin (contrastive variants)");
    fuse->add_option("--positive", fuse_opt.positive,
                     "positive region index into the field (contrastive variants)");
    fuse->add_option("--svd-min", fuse_opt.svd_min, "rank floor for decorrelation");
    fuse->add_option("--svd-max", fuse_opt.svd_max, "rank cap for decorrelation");

    GradcheckOptions grad_opt;
    CLI::App* gradcheck = app.add_subcommand(
        "gradcheck", "verify analytic gradients against central differences");
    std::string gradcheck_config;
    gradcheck->add_option("--config", gradcheck_config, "flat key=value config file");
    gradcheck->add_option("--trials", grad_opt.trials, "random instances per suite");
    gradcheck->add_option("--seed", grad_opt.seed, "RNG seed");
    gradcheck->add_option("--out", grad_opt.out_path, "write JSON results here");

    EvalOptions eval_opt;
    CLI::App* eval_cmd = app.add_subcommand(
        "eval", "COCO-style AP evaluation of detection files");
    std::string eval_config;
    eval_cmd->add_option("--config", eval_config, "flat key=value config file");
    eval_cmd->add_option("--dets", eval_opt.dets_path,
                         "detections: image_id class x1 y1 x2 y2 confidence")
        ->required();
    eval_cmd->add_option("--gt", eval_opt.gt_path,
                         "ground truth: image_id class x1 y1 x2 y2 [pixel_area]")
        ->required();
    eval_cmd->add_option("--out", eval_opt.out_path, "output JSON path (default stdout)");

    BenchOptions bench_opt;
    CLI::App* bench = app.add_subcommand(
        "bench-synth", "synthetic camouflage benchmark over fusion/gate variants");
    std::string bench_config;
    bench->add_option("--config", bench_config, "flat key=value config file");
    bench->add_option("--seeds", bench_opt.seeds, "number of seeds");
    bench->add_option("--seed,--seed-base", bench_opt.synth.seed, "first seed value");
    bench->add_option("--scenes", bench_opt.synth.scenes, "scenes per seed");
    bench->add_option("--kappa", bench_opt.synth.camouflage,
                      "camouflage coefficient in [0,1]");
    bench->add_option("--decoys", bench_opt.synth.decoy_fraction,
                      "decoy sub-description fraction in [0,1]");
    bench->add_option("--classes", bench_opt.synth.num_classes, "objects per scene");
    bench->add_option("--subs", bench_opt.synth.subs_per_class,
                      "sub-descriptions per class");
    bench->add_option("--lambda", bench_opt.lambda,
                      "coverage-loss weight used by the run diagnostics");
    bench->add_option("--dim", bench_opt.synth.embedding_dim, "embedding dimension");
    bench->add_option("--channels", bench_opt.synth.channels, "feature channels");
    bench->add_option("--grid", bench_opt.synth.grid_height, "grid side length")
        ->check(CLI::PositiveNumber);
    bench->add_flag("--full-matrix", bench_opt.full_matrix,
                    "run every fusion x gate combination");
    bench->add_flag("--assert", bench_opt.assert_directions,
                    "check the directional orderings; exit 3 on failure");
    bench->add_option("--out", bench_opt.out_dir, "report directory (default: stdout table)");

    try {
        std::vector<std::string> args = expand_config(argc, argv);
        std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    } catch (const ParseError& e) {  // unreadable --config file
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }

    try {
        if (convert->parsed()) return run_convert(convert_opt);
        if (fuse->parsed()) return run_fuse(fuse_opt);
        if (gradcheck->parsed()) return run_gradcheck(grad_opt);
        if (eval_cmd->parsed()) return run_eval(eval_opt);
        if (bench->parsed()) {
            bench_opt.synth.grid_width = bench_opt.synth.grid_height;
            return run_bench(bench_opt);
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const DegenerateInputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
