#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mfg/cost.hpp"
#include "mfg/game_spec.hpp"
#include "mfg/riccati.hpp"
#include "mfg/sde.hpp"

namespace mfg {

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Run parameters read alongside the game section of a config file.
struct RunConfig {
    LqGameSpec spec;
    int steps = 512;
    int paths = 10000;
    uint64_t seed = 1;
};

// Loads a JSON config: section "game" with scalar or array-valued
// coefficients, optional sections "grid" {steps} and "mc" {paths, seed}.
// Arrays must have steps+1 entries and are linearly interpolated.
RunConfig load_config(const std::filesystem::path& path);

// FNV-1a over the canonical config bytes; names the run directory.
uint64_t config_hash(const std::filesystem::path& path);

void write_riccati_csv(const std::filesystem::path& path, const RiccatiTables& tables);
void write_gains_csv(const std::filesystem::path& path, const GainTables& gains);

// Long format: path_id, t, x, x_hat, v1, v2. `stride` subsamples paths.
void write_paths_csv(const std::filesystem::path& path, const StatePathSet& paths,
                     int stride = 1);

void write_cost_summary(const std::filesystem::path& path, const CostEstimate& cost,
                        int steps, uint64_t seed);

void write_manifest(const std::filesystem::path& path, const std::string& command_line,
                    uint64_t cfg_hash, uint64_t seed, int steps, int n_paths);

}  // namespace mfg
