#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "vanc/config.hpp"

namespace vanc {

struct ScenarioInfo {
  std::string name;
  std::string description;
  std::vector<std::string> variants;  // single-ear runs the name expands to
};

/// Built-in scenarios in a fixed order.
const std::vector<ScenarioInfo>& list_scenarios();

/// True for a built-in name or one of its variants.
bool is_builtin(std::string_view name);

/// Configs for a built-in name (all its variants) or a single variant.
/// WAV-driven scenarios resolve their files under `data_dir`. Throws
/// ConfigError for unknown names.
std::vector<ScenarioConfig> builtin_variants(std::string_view name,
                                             const std::filesystem::path& data_dir = "data");

/// File names of the environmental recordings used by table1-env.
inline constexpr std::string_view kEnvironmentFiles[] = {
    "aircraft_interior.wav", "aircraft_flyby.wav", "ambient_speech.wav"};

/// Writes synthetic stand-ins for the three environmental recordings into
/// `dir` at 44.1 kHz: interior (PCM16 mono), flyby (float32 mono), speech
/// babble (PCM16 stereo).
void synthesize_environment(const std::filesystem::path& dir, std::uint64_t seed = 2024);

}  // namespace vanc
