#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sne/train.hpp"
#include "sne/zoo.hpp"

namespace sne {

// "dataset:architecture", the id used for sources and targets everywhere.
std::string zoo_id(const LoadedZoo& zoo);

struct EvalCell {
    std::string source;
    std::string target;
    std::vector<double> taus;  // one per seed artifact
    double tau_mean = 0.0;
    double tau_std = 0.0;  // sample standard deviation over seeds
    std::int64_t n = 0;    // target test-split size
};

struct EvalReport {
    std::string mode;    // cross-dataset | cross-architecture
    std::string method;  // encoder name
    std::string source;
    std::uint64_t fingerprint = 0;
    std::vector<EvalCell> cells;
    double runtime_seconds = 0.0;

    std::string to_json() const;
    std::string to_csv() const;  // cells then an averaged row
    static EvalReport from_json(const std::string& text);
};

// τ of one artifact over one zoo split. Evaluating the source zoo's own
// train/val split is refused (leakage guard).
double eval_tau(const TrainedPredictor& tp, const LoadedZoo& zoo, const std::string& split,
                int threads = 1);

// Full row of the evaluation matrix: every seed replica of one source against
// every target zoo's test split. cross-architecture mode demands an
// architecture-agnostic encoder (the set encoder); architecture-locked
// baselines raise CapabilityError, and source/target architectures must
// differ.
EvalReport cross_eval(const std::vector<const TrainedPredictor*>& seeds,
                      const std::vector<const LoadedZoo*>& targets, const std::string& mode,
                      int threads = 1);

// Combines per-source reports into one CSV matrix with per-method averages.
std::string merge_reports_csv(const std::vector<EvalReport>& reports);

}  // namespace sne
