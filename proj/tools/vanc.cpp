// vanc: command-line front end for the virtual ANC headphone simulator.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "vanc/config.hpp"
#include "vanc/errors.hpp"
#include "vanc/runner.hpp"
#include "vanc/scenarios.hpp"

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

enum Exit { kOk = 0, kError = 1, kConfig = 2, kAssertion = 3 };

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  bool ci = false;
  fs::path data = "data";
};

std::vector<vanc::ScenarioConfig> resolve(const std::string& target, const Overrides& o) {
  std::vector<vanc::ScenarioConfig> configs;
  if (fs::is_regular_file(target)) {
    configs.push_back(vanc::load_config(target));
  } else if (vanc::is_builtin(target)) {
    configs = vanc::builtin_variants(target, o.data);
  } else {
    throw vanc::ConfigError("'" + target + "' is neither a config file nor a built-in scenario");
  }
  for (auto& c : configs) {
    if (o.ci) c = vanc::ci_profile(std::move(c));
    if (o.duration) c = vanc::with_duration(std::move(c), *o.duration);
    if (o.seed) c.seed = *o.seed;
  }
  return configs;
}

int cmd_run(const std::string& target, const Overrides& o, const fs::path& out) {
  int status = kOk;
  for (const auto& c : resolve(target, o)) {
    const vanc::RunReport r = vanc::run_scenario(c);
    const fs::path dir = out / c.name;
    vanc::emit_report(r, dir);
    std::printf("%-40s off %6.2f dB  on %6.2f dB  attenuation %6.2f dB  -> %s\n", c.name.c_str(),
                r.spl_off_db, r.spl_on_db, r.attenuation_db, dir.string().c_str());
    for (const auto& f : r.failures) {
      std::printf("  FAILED: %s\n", f.c_str());
      status = kAssertion;
    }
  }
  return status;
}

int cmd_identify(const std::string& target, const Overrides& o, const std::optional<fs::path>& out) {
  for (const auto& c : resolve(target, o)) {
    const vanc::IdentificationReport r = vanc::run_identification(c);
    std::printf("%-40s misalignment %s dB (%zu taps)\n", c.name.c_str(),
                r.misalignment_db ? vanc::format_number(*r.misalignment_db).c_str() : "n/a",
                r.estimate.taps.size());
    if (out) {
      fs::create_directories(*out / c.name);
      const fs::path path = *out / c.name / "secondary_path.csv";
      std::ofstream f(path);
      if (!f) throw std::runtime_error("cannot write " + path.string());
      f << "index,estimate,exact\n";
      for (std::size_t i = 0; i < r.estimate.taps.size(); ++i)
        f << i << ',' << vanc::format_number(r.estimate.taps[i]) << ','
          << vanc::format_number(r.truth.taps[i]) << '\n';
    }
  }
  return kOk;
}

int cmd_list() {
  for (const auto& s : vanc::list_scenarios()) {
    std::printf("%-16s %s\n", s.name.c_str(), s.description.c_str());
    for (const auto& v : s.variants)
      if (v != s.name) std::printf("  %s\n", v.c_str());
  }
  return kOk;
}

int cmd_keys() {
  for (const auto& k : vanc::config_keys())
    std::printf("%-40.*s %.*s\n", static_cast<int>(k.key.size()), k.key.data(),
                static_cast<int>(k.help.size()), k.help.data());
  return kOk;
}

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seed", o.seed, "override the scenario seed");
  cmd->add_option("--duration", o.duration, "run length in s; time settings scale along")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--ci", o.ci, "reduced profile: 16 kHz, 256 taps, 4 s");
  cmd->add_option("--data", o.data, "directory with the environmental WAV files");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Virtual ANC headphone simulator"};
  app.require_subcommand(1);

  Overrides run_o, id_o;
  std::string run_target, id_target, synth_dir;
  fs::path run_out = "out";
  std::optional<fs::path> id_out;
  std::uint64_t synth_seed = 2024;

  auto* run = app.add_subcommand("run", "run a config file or built-in scenario");
  run->add_option("target", run_target, "config path or built-in name")->required();
  run->add_option("--out", run_out, "output directory (one subdirectory per run)");
  add_overrides(run, run_o);

  auto* list = app.add_subcommand("list", "list built-in scenarios");
  auto* keys = app.add_subcommand("keys", "list config keys");

  auto* ident = app.add_subcommand("identify", "run only secondary-path identification");
  ident->add_option("target", id_target, "config path or built-in name")->required();
  ident->add_option("--out", id_out, "write secondary_path.csv here");
  add_overrides(ident, id_o);

  auto* version = app.add_subcommand("version", "print the version");

  auto* synth = app.add_subcommand("synth-env", "write the environmental WAV stand-ins");
  synth->add_option("dir", synth_dir, "output directory")->required();
  synth->add_option("--seed", synth_seed, "noise seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*run) return cmd_run(run_target, run_o, run_out);
    if (*list) return cmd_list();
    if (*keys) return cmd_keys();
    if (*ident) return cmd_identify(id_target, id_o, id_out);
    if (*version) {
      std::printf("vanc %s\n", kVersion);
      return kOk;
    }
    if (*synth) {
      vanc::synthesize_environment(synth_dir, synth_seed);
      return kOk;
    }
  } catch (const vanc::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const vanc::FormatError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const vanc::IdentificationError& e) {
    std::fprintf(stderr, "identification failed: %s\n", e.what());
    return kAssertion;
  } catch (const vanc::ContractError& e) {
    std::fprintf(stderr, "assertion failed: %s\n", e.what());
    return kAssertion;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kError;
  }
  return kOk;
}
