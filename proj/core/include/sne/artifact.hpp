#pragma once

#include <cstdint>
#include <string>

#include "sne/train.hpp"

namespace sne {

// Stable hash of everything that shapes a training run; stamped into reports
// and encodings for provenance.
std::uint64_t config_fingerprint(const TrainConfig& config);

std::string train_config_to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const std::string& text);

// Binary artifact: config, best parameters, final optimizer state and
// history. Parameters are stored at full double precision so a resumed run
// replays the uninterrupted one exactly.
void save_artifact(const TrainedPredictor& tp, const std::string& path);
TrainedPredictor load_artifact(const std::string& path);

}  // namespace sne
