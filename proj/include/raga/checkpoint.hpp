#pragma once

#include <filesystem>

#include "raga/trainer.hpp"

namespace raga {

// Checkpoints are JSON documents (see README, "Checkpoint format"). Doubles
// are written in shortest round-trip form, so a reloaded state continues
// training bit-identically.

inline constexpr int kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const TrainState& state);
/// Throws std::runtime_error on unreadable files, a wrong format tag or an
/// unsupported version.
TrainState load_checkpoint(const std::filesystem::path& path);

}  // namespace raga
