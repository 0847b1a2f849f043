#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qcav/config.hpp"

namespace qcav {

struct PipelineResult {
    nlohmann::json summary;
    std::vector<std::filesystem::path> artifacts;
};

// Config-driven stream: CW or pulsed emission plus Poisson background.
PhotonStream build_stream(const RunConfig& cfg);

PipelineResult cmd_simulate(const RunConfig& cfg, const std::filesystem::path& out_file);

PipelineResult cmd_hbt(const PhotonStream& s, const RunConfig& cfg, double bin_ns,
                       double max_delay_ns, const std::filesystem::path& prefix);

PipelineResult cmd_lifetime(const PhotonStream& s, const RunConfig& cfg, double rep_period_ns,
                            double bin_ns, const std::filesystem::path& prefix);

PipelineResult cmd_scan_tuning(const RunConfig& cfg, int n_cycles,
                               const std::filesystem::path& prefix);

PipelineResult cmd_bands(const RunConfig& cfg, int n_per_segment, int n_plane_waves,
                         int n_bands, const std::filesystem::path& prefix);

nlohmann::json cmd_purcell(double tau_bulk_ns, double tau_on_ns, double tau_off_ns,
                           double eta);

// name in {fig2c, fig2d, fig3c, fig3d, fig4a, fig4b, fig4c}.
PipelineResult cmd_figure(const std::string& name, const RunConfig& cfg,
                          const std::filesystem::path& outdir);

void write_metadata(const std::filesystem::path& path, const std::string& command,
                    const RunConfig& cfg, const nlohmann::json& args,
                    const std::vector<std::filesystem::path>& artifacts);

}
