#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "qcav/bands.hpp"
#include "qcav/cavity.hpp"
#include "qcav/emitter.hpp"
#include "qcav/fitting.hpp"
#include "qcav/photon_stats.hpp"

namespace qcav {

struct DetectorConfig {
    double dead_time_ns = 50.0;
    double jitter_ps = 100.0;
    double background_rate_per_s = 0.0;

    DetectorModel model() const {
        return {dead_time_ns * 1000.0, jitter_ps};
    }
};

struct SimulationConfig {
    std::string mode = "cw";           // "cw" or "pulsed"
    double duration_ms = 1.0;          // cw
    double rep_period_ns = 100.0;      // pulsed, 10 MHz default
    std::uint64_t n_pulses = 1000000;
    double excitation_prob = 0.9;
    int shards = 1;
    double enhancement = -1.0;         // < 0: derive from cavity detuning
};

struct OutputConfig {
    std::string directory = ".";
    bool ndjson = false;
};

struct RunConfig {
    std::uint64_t seed = 1;
    double zpl_mev = 972.43;
    double tau_bulk_ns = 33.3;
    double tau_on_target_ns = 6.7;     // calibrates peak_enhancement when unset
    EmitterParams emitter;
    CavityParams cavity;
    TuningState tuning;
    DetectorConfig detector;
    SimulationConfig simulation;
    LatticeSpec lattice;
    OutputConfig output;

    RunConfig();

    void validate() const;
    double zpl_nm() const;
    // Detuning of the ZPL from the current cavity resonance, nm.
    double detuning() const;
    // Lifetime enhancement used by simulations: explicit override, or the
    // Lorentzian filter of the detuning floored at 1 (an off-resonant cavity
    // does not suppress free-space ZPL emission).
    double effective_enhancement() const;
};

RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& c);
RunConfig load_config(const std::filesystem::path& path);

// FNV-1a over the canonical (sorted-key) serialization.
std::string config_hash(const RunConfig& c);

// Named model with analytic Jacobian and default bounds, as used by the
// generic fit entry point.
struct FitModel {
    ModelFunc f;
    ModelJac jac;
    std::vector<Bound> bounds;
    std::vector<std::string> names;
};

const std::vector<std::string>& fit_model_names();
FitModel lookup_fit_model(const std::string& name);

// Generic fit entry: {"model": "exponential|lorentzian|fano|cos2|linear",
// "x": [...], "y": [...], "weights"?: [...], "init"?: [...], "bounds"?: [[lo,hi]|null,...]}
nlohmann::json run_fit_problem(const nlohmann::json& problem);

// %.17g, locale-independent.
std::string g17(double v);

}
