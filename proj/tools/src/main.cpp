#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sne/artifact.hpp"
#include "sne/common.hpp"
#include "sne/eval.hpp"
#include "sne/run_config.hpp"
#include "sne/train.hpp"
#include "sne/zoo.hpp"

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw sne::IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw sne::IoError("write failed for '" + path.string() + "'");
}

std::string config_keys_help() {
    std::ostringstream out;
    out << "Config keys (key=value; file via --config, overrides via --set):\n";
    std::istringstream defaults(sne::RunConfig().to_text());
    std::string line;
    while (std::getline(defaults, line)) out << "  " << line << "\n";
    return out.str();
}

struct ZooArgs {
    std::string spec_path;
    std::string out_dir;
    std::string arch = "arch1";
    std::string dataset = "blobs";
    std::int64_t population = 200;
    std::uint64_t seed = 1;
    std::int64_t threads = 1;
};

void run_zoo(const ZooArgs& args) {
    sne::ZooSpec spec;
    if (!args.spec_path.empty()) {
        spec = sne::read_zoo_spec(args.spec_path);
    } else {
        spec.architecture = args.arch;
        spec.dataset = args.dataset;
        spec.population = args.population;
        spec.seed = args.seed;
    }
    const auto summary = sne::train_zoo(spec, args.out_dir, static_cast<int>(args.threads));
    std::cout << "zoo " << spec.dataset << ":" << spec.architecture << " -> " << args.out_dir
              << "\n"
              << "records " << summary.records.size() << " (trained " << summary.trained
              << ", reused " << summary.reused << ", failed " << summary.failed << ")\n";
}

struct TrainArgs {
    std::string zoo_dir;
    std::string out_path;
    std::string config_path;
    std::string resume_path;
    std::string history_path;
    std::vector<std::string> overrides;
    std::int64_t threads = 0;  // 0: take the config's value
};

std::string history_csv(const sne::TrainHistory& h) {
    std::ostringstream out;
    out << "epoch,lr,train_loss,val_loss,val_tau\n";
    for (std::size_t e = 0; e < h.train_loss.size(); ++e)
        out << e << "," << sne::format_double(h.lr[e]) << ","
            << sne::format_double(h.train_loss[e]) << "," << sne::format_double(h.val_loss[e])
            << "," << sne::format_double(h.val_tau[e]) << "\n";
    return out.str();
}

void run_train(const TrainArgs& args) {
    sne::RunConfig rc;
    if (!args.config_path.empty()) rc = sne::load_run_config(args.config_path);
    sne::apply_overrides(rc, args.overrides);
    rc.validate();
    const int threads = static_cast<int>(args.threads > 0 ? args.threads : rc.threads);

    const sne::LoadedZoo zoo = sne::load_zoo(args.zoo_dir);
    std::vector<const sne::CheckpointModel*> train_models, val_models;
    std::vector<double> train_y, val_y;
    for (const auto i : zoo.split_indices("train")) {
        train_models.push_back(&zoo.models[static_cast<std::size_t>(i)]);
        train_y.push_back(zoo.records[static_cast<std::size_t>(i)].test_accuracy);
    }
    for (const auto i : zoo.split_indices("val")) {
        val_models.push_back(&zoo.models[static_cast<std::size_t>(i)]);
        val_y.push_back(zoo.records[static_cast<std::size_t>(i)].test_accuracy);
    }

    std::unique_ptr<sne::TrainedPredictor> resume;
    if (!args.resume_path.empty())
        resume = std::make_unique<sne::TrainedPredictor>(sne::load_artifact(args.resume_path));

    sne::TrainedPredictor tp = sne::train_predictor(train_models, train_y, val_models, val_y,
                                                    rc.to_train_config(), threads, resume.get());
    tp.source_id = sne::zoo_id(zoo);
    sne::save_artifact(tp, args.out_path);
    const std::string hist_path =
        args.history_path.empty() ? args.out_path + ".history.csv" : args.history_path;
    write_file(hist_path, history_csv(tp.history));

    std::cout << "trained " << sne::encoder_kind_name(tp.encoder) << " on " << tp.source_id
              << ": epochs " << tp.epochs_done << ", best val tau "
              << sne::format_double(tp.history.best_val_tau) << " @ epoch "
              << tp.history.best_epoch << "\n"
              << "artifact " << args.out_path << " (config " << sne::hex64(rc.fingerprint())
              << ")\n";
    if (tp.history.diverged)
        throw sne::DivergenceError(
            "training diverged; the artifact holds the last finite state (epochs done: " +
            std::to_string(tp.epochs_done) + ")");
}

struct EncodeArgs {
    std::string artifact_path;
    std::string zoo_dir;
    std::string out_path;
    std::int64_t threads = 1;
};

void run_encode(const EncodeArgs& args) {
    const sne::TrainedPredictor tp = sne::load_artifact(args.artifact_path);
    const sne::LoadedZoo zoo = sne::load_zoo(args.zoo_dir);
    std::vector<const sne::CheckpointModel*> models;
    models.reserve(zoo.models.size());
    for (const auto& m : zoo.models) models.push_back(&m);
    const auto encodings = sne::encode_models(tp, models, static_cast<int>(args.threads));

    const std::string id = sne::zoo_id(zoo);
    std::ostringstream out;
    out << "index,zoo,split,y";
    const std::size_t width = encodings.empty() ? 0 : encodings[0].size();
    for (std::size_t j = 0; j < width; ++j) out << ",e" << j;
    out << "\n";
    for (std::size_t i = 0; i < encodings.size(); ++i) {
        const auto& rec = zoo.records[i];
        out << rec.index << "," << id << "," << rec.split << ","
            << sne::format_double(rec.test_accuracy);
        for (const double v : encodings[i]) out << "," << sne::format_double(v);
        out << "\n";
    }
    write_file(args.out_path, out.str());
    std::cout << "encoded " << encodings.size() << " records of " << id << " at width " << width
              << " -> " << args.out_path << "\n";
}

struct EvalArgs {
    std::vector<std::string> artifact_paths;
    std::vector<std::string> target_dirs;
    std::string mode = "cross-dataset";
    std::string out_json;
    std::string out_csv;
    std::int64_t threads = 1;
};

void run_eval(const EvalArgs& args) {
    std::vector<sne::TrainedPredictor> artifacts;
    artifacts.reserve(args.artifact_paths.size());
    for (const auto& p : args.artifact_paths) artifacts.push_back(sne::load_artifact(p));
    std::vector<const sne::TrainedPredictor*> seeds;
    for (const auto& a : artifacts) seeds.push_back(&a);

    std::vector<sne::LoadedZoo> zoos;
    zoos.reserve(args.target_dirs.size());
    for (const auto& d : args.target_dirs) zoos.push_back(sne::load_zoo(d));
    std::vector<const sne::LoadedZoo*> targets;
    for (const auto& z : zoos) targets.push_back(&z);

    const sne::EvalReport report =
        sne::cross_eval(seeds, targets, args.mode, static_cast<int>(args.threads));
    if (!args.out_json.empty()) write_file(args.out_json, report.to_json());
    if (!args.out_csv.empty()) write_file(args.out_csv, report.to_csv());
    for (const auto& cell : report.cells)
        std::cout << cell.source << " -> " << cell.target << ": tau "
                  << sne::format_double(cell.tau_mean) << " +/- "
                  << sne::format_double(cell.tau_std) << " (n=" << cell.n << ", seeds "
                  << cell.taus.size() << ")\n";
}

struct ReportArgs {
    std::vector<std::string> in_paths;
    std::string out_path;
};

void run_report(const ReportArgs& args) {
    std::vector<sne::EvalReport> reports;
    for (const auto& p : args.in_paths) {
        std::ifstream in(p, std::ios::binary);
        if (!in) throw sne::IoError("cannot open report '" + p + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        reports.push_back(sne::EvalReport::from_json(ss.str()));
    }
    write_file(args.out_path, sne::merge_reports_csv(reports));
    std::cout << "merged " << reports.size() << " reports -> " << args.out_path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Set-based neural network encoder: modelzoo generation, accuracy-predictor training "
        "and cross-evaluation.\n\nExit codes: 0 success, 2 validation error, 3 capability "
        "error, 4 numerical divergence.\n\n" +
        config_keys_help()};
    app.require_subcommand(1);

    ZooArgs zoo_args;
    auto* zoo_cmd = app.add_subcommand(
        "zoo", "Train a population of small classifiers and record test-accuracy labels");
    zoo_cmd->add_option("--spec", zoo_args.spec_path,
                        "Zoo spec JSON; when given, the other sampling flags are ignored");
    zoo_cmd->add_option("--out", zoo_args.out_dir, "Zoo output directory")->required();
    zoo_cmd->add_option("--arch", zoo_args.arch, "Architecture id: arch1 | arch2")
        ->capture_default_str();
    zoo_cmd->add_option("--dataset", zoo_args.dataset,
                        "Synthetic dataset generator: blobs | stripes | rings | checkers")
        ->capture_default_str();
    zoo_cmd->add_option("--population", zoo_args.population, "Number of trainees")
        ->capture_default_str();
    zoo_cmd->add_option("--seed", zoo_args.seed, "Master seed")->capture_default_str();
    zoo_cmd->add_option("--threads", zoo_args.threads, "Worker threads (1 = bit-deterministic)")
        ->capture_default_str();
    zoo_cmd->callback([&] { run_zoo(zoo_args); });

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand(
        "train", "Jointly train an encoder and accuracy predictor on a zoo's train split");
    train_cmd->add_option("--zoo", train_args.zoo_dir, "Source zoo directory")->required();
    train_cmd->add_option("--out", train_args.out_path, "Artifact output path")->required();
    train_cmd->add_option("--config", train_args.config_path, "key=value config file");
    train_cmd->add_option("--set", train_args.overrides,
                          "Config override key=value (see the top-level help for keys)");
    train_cmd->add_option("--resume", train_args.resume_path,
                          "Continue from a previous artifact (same config)");
    train_cmd->add_option("--history", train_args.history_path,
                          "History CSV path (default: <out>.history.csv)");
    train_cmd->add_option("--threads", train_args.threads,
                          "Worker threads; overrides the config's threads key");
    train_cmd->callback([&] { run_train(train_args); });

    EncodeArgs encode_args;
    auto* encode_cmd = app.add_subcommand(
        "encode", "Export one encoding vector per zoo record from a trained artifact");
    encode_cmd->add_option("--artifact", encode_args.artifact_path, "Trained artifact")
        ->required();
    encode_cmd->add_option("--zoo", encode_args.zoo_dir, "Zoo to encode")->required();
    encode_cmd->add_option("--out", encode_args.out_path, "Encodings CSV path")->required();
    encode_cmd->add_option("--threads", encode_args.threads, "Worker threads")
        ->capture_default_str();
    encode_cmd->callback([&] { run_encode(encode_args); });

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand(
        "eval", "Evaluate seed artifacts of one source zoo against target zoos (Kendall tau)");
    eval_cmd->add_option("--artifact", eval_args.artifact_paths,
                         "Trained artifact(s); several = seed replicas")
        ->required();
    eval_cmd->add_option("--target", eval_args.target_dirs, "Target zoo directories")
        ->required();
    eval_cmd->add_option("--mode", eval_args.mode, "cross-dataset | cross-architecture")
        ->capture_default_str();
    eval_cmd->add_option("--out-json", eval_args.out_json, "Report JSON path");
    eval_cmd->add_option("--out-csv", eval_args.out_csv, "Report CSV path");
    eval_cmd->add_option("--threads", eval_args.threads, "Worker threads")->capture_default_str();
    eval_cmd->callback([&] { run_eval(eval_args); });

    ReportArgs report_args;
    auto* report_cmd =
        app.add_subcommand("report", "Merge eval report JSONs into one CSV matrix");
    report_cmd->add_option("--in", report_args.in_paths, "Eval report JSON files")->required();
    report_cmd->add_option("--out", report_args.out_path, "Merged CSV path")->required();
    report_cmd->callback([&] { run_report(report_args); });

    try {
        app.parse(argc, argv);
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const sne::CapabilityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const sne::DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const sne::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
