#include "sne/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sne/artifact.hpp"
#include "sne/common.hpp"
#include "sne/metrics.hpp"

namespace sne {

namespace {

using i64 = std::int64_t;
using json = nlohmann::json;

std::string arch_of(const std::string& id) {
    const auto at = id.rfind(':');
    return at == std::string::npos ? std::string() : id.substr(at + 1);
}

void gather(const LoadedZoo& zoo, const std::string& split,
            std::vector<const CheckpointModel*>& models, std::vector<double>& y) {
    models.clear();
    y.clear();
    for (const i64 i : zoo.split_indices(split)) {
        models.push_back(&zoo.models[static_cast<std::size_t>(i)]);
        y.push_back(zoo.records[static_cast<std::size_t>(i)].test_accuracy);
    }
}

void finish_cell(EvalCell& cell) {
    const double n = static_cast<double>(cell.taus.size());
    double mean = 0.0;
    for (const double t : cell.taus) mean += t;
    mean /= n;
    double var = 0.0;
    for (const double t : cell.taus) var += (t - mean) * (t - mean);
    cell.tau_mean = mean;
    cell.tau_std = cell.taus.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
}

void append_average_row(std::ostringstream& out, const std::string& source,
                        const std::string& method, const std::vector<const EvalCell*>& cells) {
    double mean = 0.0;
    i64 total_n = 0;
    for (const auto* c : cells) {
        mean += c->tau_mean;
        total_n += c->n;
    }
    mean /= static_cast<double>(cells.size());
    double var = 0.0;
    for (const auto* c : cells) var += (c->tau_mean - mean) * (c->tau_mean - mean);
    const double stddev =
        cells.size() > 1 ? std::sqrt(var / static_cast<double>(cells.size() - 1)) : 0.0;
    out << source << ",average," << method << "," << format_double(mean) << ","
        << format_double(stddev) << "," << total_n << "\n";
}

constexpr char kCsvHeader[] = "source,target,method,tau_mean,tau_std,n\n";

void append_cell_row(std::ostringstream& out, const EvalCell& cell, const std::string& method) {
    out << cell.source << "," << cell.target << "," << method << ","
        << format_double(cell.tau_mean) << "," << format_double(cell.tau_std) << "," << cell.n
        << "\n";
}

}  // namespace

std::string zoo_id(const LoadedZoo& zoo) {
    return zoo.spec.dataset + ":" + zoo.spec.architecture;
}

double eval_tau(const TrainedPredictor& tp, const LoadedZoo& zoo, const std::string& split,
                int threads) {
    if (split != "train" && split != "val" && split != "test")
        throw ValidationError("eval: unknown split '" + split + "'");
    if (zoo_id(zoo) == tp.source_id && split != "test")
        throw ValidationError("eval: refusing the source zoo's '" + split +
                              "' split; the predictor saw it during training");
    std::vector<const CheckpointModel*> models;
    std::vector<double> y;
    gather(zoo, split, models, y);
    if (models.size() < 2)
        throw ValidationError("eval: split '" + split + "' has fewer than 2 records");
    return tau_or_zero(predict_scores(tp, models, threads), y);
}

EvalReport cross_eval(const std::vector<const TrainedPredictor*>& seeds,
                      const std::vector<const LoadedZoo*>& targets, const std::string& mode,
                      int threads) {
    if (mode != "cross-dataset" && mode != "cross-architecture")
        throw ValidationError("eval: unknown mode '" + mode + "'");
    if (seeds.empty()) throw ValidationError("eval: need at least one trained artifact");
    if (targets.empty()) throw ValidationError("eval: need at least one target zoo");
    for (const auto* tp : seeds) {
        if (tp->encoder != seeds[0]->encoder)
            throw ValidationError("eval: seed artifacts use different encoders");
        if (tp->source_id != seeds[0]->source_id)
            throw ValidationError("eval: seed artifacts were trained on different zoos");
    }

    const std::string source = seeds[0]->source_id;
    if (mode == "cross-architecture") {
        if (seeds[0]->encoder != EncoderKind::sne)
            throw CapabilityError(std::string("the ") + encoder_kind_name(seeds[0]->encoder) +
                                  " encoder is locked to one architecture and cannot run the "
                                  "cross-architecture protocol");
        const std::string src_arch = arch_of(source);
        for (const auto* zoo : targets)
            if (zoo->spec.architecture == src_arch)
                throw ValidationError("eval: cross-architecture targets must use a different "
                                      "architecture than the source ('" +
                                      src_arch + "')");
    }

    const auto t0 = std::chrono::steady_clock::now();
    EvalReport report;
    report.mode = mode;
    report.method = encoder_kind_name(seeds[0]->encoder);
    report.source = source;
    report.fingerprint = config_fingerprint(seeds[0]->config);
    for (const auto* zoo : targets) {
        EvalCell cell;
        cell.source = source;
        cell.target = zoo_id(*zoo);
        std::vector<const CheckpointModel*> models;
        std::vector<double> y;
        gather(*zoo, "test", models, y);
        if (models.size() < 2)
            throw ValidationError("eval: target zoo '" + cell.target +
                                  "' has fewer than 2 test records");
        cell.n = static_cast<i64>(models.size());
        for (const auto* tp : seeds)
            cell.taus.push_back(tau_or_zero(predict_scores(*tp, models, threads), y));
        finish_cell(cell);
        report.cells.push_back(std::move(cell));
    }
    report.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

std::string EvalReport::to_json() const {
    json cells_json = json::array();
    for (const auto& c : cells) {
        cells_json.push_back(json{{"n", c.n},
                                  {"source", c.source},
                                  {"target", c.target},
                                  {"tau_mean", c.tau_mean},
                                  {"tau_std", c.tau_std},
                                  {"taus", c.taus}});
    }
    const json j{{"cells", cells_json},
                 {"fingerprint", hex64(fingerprint)},
                 {"method", method},
                 {"mode", mode},
                 {"runtime_seconds", runtime_seconds},
                 {"source", source}};
    return j.dump(2) + "\n";
}

EvalReport EvalReport::from_json(const std::string& text) {
    try {
        const json j = json::parse(text);
        EvalReport r;
        r.mode = j.at("mode").get<std::string>();
        r.method = j.at("method").get<std::string>();
        r.source = j.at("source").get<std::string>();
        r.fingerprint = std::stoull(j.at("fingerprint").get<std::string>(), nullptr, 16);
        r.runtime_seconds = j.at("runtime_seconds").get<double>();
        for (const auto& cj : j.at("cells")) {
            EvalCell c;
            c.n = cj.at("n").get<i64>();
            c.source = cj.at("source").get<std::string>();
            c.target = cj.at("target").get<std::string>();
            c.tau_mean = cj.at("tau_mean").get<double>();
            c.tau_std = cj.at("tau_std").get<double>();
            c.taus = cj.at("taus").get<std::vector<double>>();
            r.cells.push_back(std::move(c));
        }
        return r;
    } catch (const json::exception& e) {
        throw IoError(std::string("cannot parse eval report: ") + e.what());
    }
}

std::string EvalReport::to_csv() const {
    std::ostringstream out;
    out << kCsvHeader;
    std::vector<const EvalCell*> ptrs;
    for (const auto& c : cells) {
        append_cell_row(out, c, method);
        ptrs.push_back(&c);
    }
    if (!ptrs.empty()) append_average_row(out, "all", method, ptrs);
    return out.str();
}

std::string merge_reports_csv(const std::vector<EvalReport>& reports) {
    struct Row {
        const EvalCell* cell;
        const std::string* method;
    };
    std::vector<Row> rows;
    for (const auto& r : reports)
        for (const auto& c : r.cells) rows.push_back({&c, &r.method});
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.cell->source != b.cell->source) return a.cell->source < b.cell->source;
        if (a.cell->target != b.cell->target) return a.cell->target < b.cell->target;
        return *a.method < *b.method;
    });
    std::ostringstream out;
    out << kCsvHeader;
    for (const auto& row : rows) append_cell_row(out, *row.cell, *row.method);

    std::vector<std::string> methods;
    for (const auto& r : reports)
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end())
            methods.push_back(r.method);
    std::sort(methods.begin(), methods.end());
    for (const auto& m : methods) {
        std::vector<const EvalCell*> cells;
        for (const auto& row : rows)
            if (*row.method == m) cells.push_back(row.cell);
        if (!cells.empty()) append_average_row(out, "all", m, cells);
    }
    return out.str();
}

}  // namespace sne
