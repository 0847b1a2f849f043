#include "qcav/pipelines.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "qcav/errors.hpp"
#include "qcav/fitting.hpp"
#include "qcav/rng.hpp"
#include "qcav/stream_io.hpp"
#include "qcav/units.hpp"
#include "qcav/version.hpp"

namespace qcav {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open output file " + path.string());
    return out;
}

void write_json(const fs::path& path, const json& j) {
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

// Signal fraction rho = S/(S+B) measured from the channel labels.
double label_signal_fraction(const PhotonStream& a, const PhotonStream& b) {
    const auto bg = count_channel(a, Channel::background) + count_channel(b, Channel::background);
    const auto total = a.size() + b.size();
    if (total == 0) return 1.0;
    return 1.0 - static_cast<double>(bg) / static_cast<double>(total);
}

// Background rate that hits the requested signal fraction for this stream.
double background_rate_for_fraction(const PhotonStream& signal, double rho) {
    if (!(rho > 0.0 && rho <= 1.0))
        throw std::domain_error("background fraction target must be in (0, 1]");
    const double duration_s = static_cast<double>(signal.duration_ps) * 1e-12;
    if (duration_s <= 0.0 || signal.size() == 0) return 0.0;
    const double signal_rate = static_cast<double>(signal.size()) / duration_s;
    return signal_rate * (1.0 / rho - 1.0);
}

json g2_json(const G2Histogram& h) {
    return json{{"g2_zero", h.g2_zero()},
                {"g2_zero_sigma", h.g2_zero_sigma()},
                {"bin_width_ps", h.bin_width_ps},
                {"accidental_per_bin", h.accidental_per_bin}};
}

}

void write_metadata(const fs::path& path, const std::string& command, const RunConfig& cfg,
                    const json& args, const std::vector<fs::path>& artifacts) {
    json meta{{"command", command},
              {"args", args},
              {"version", kVersion},
              {"seed", cfg.seed},
              {"config_hash", config_hash(cfg)},
              {"config", config_to_json(cfg)}};
    json files = json::array();
    for (const auto& a : artifacts) files.push_back(a.filename().string());
    meta["outputs"] = files;
    write_json(path, meta);
}

PhotonStream build_stream(const RunConfig& cfg) {
    cfg.validate();
    const double f = cfg.effective_enhancement();
    PhotonStream s;
    if (cfg.simulation.mode == "cw") {
        const auto duration_ps = static_cast<std::uint64_t>(cfg.simulation.duration_ms * 1e9);
        s = simulate_cw(cfg.emitter, f, duration_ps, cfg.seed, cfg.simulation.shards);
    } else {
        s = simulate_pulsed(cfg.emitter, f, cfg.simulation.rep_period_ns, cfg.simulation.n_pulses,
                            cfg.simulation.excitation_prob, cfg.seed);
    }
    if (cfg.detector.background_rate_per_s > 0.0)
        s = add_background(s, cfg.detector.background_rate_per_s, mix_seed(cfg.seed, 0xb9));
    return s;
}

PipelineResult cmd_simulate(const RunConfig& cfg, const fs::path& out_file) {
    const auto s = build_stream(cfg);
    if (out_file.has_parent_path()) fs::create_directories(out_file.parent_path());
    write_stream(out_file, s);

    PipelineResult r;
    r.artifacts.push_back(out_file);
    if (cfg.output.ndjson) {
        fs::path nd = out_file;
        nd.replace_extension(".ndjson");
        write_stream_ndjson(nd, s);
        r.artifacts.push_back(nd);
    }
    r.summary = json{{"count", s.size()},
                     {"duration_ps", s.duration_ps},
                     {"zpl_count", count_channel(s, Channel::zpl)},
                     {"sideband_count", count_channel(s, Channel::sideband)},
                     {"background_count", count_channel(s, Channel::background)},
                     {"enhancement", cfg.effective_enhancement()},
                     {"mode", cfg.simulation.mode}};
    if (cfg.simulation.mode == "pulsed")
        r.summary["rep_period_ns"] = cfg.simulation.rep_period_ns;

    fs::path meta = out_file;
    meta.replace_extension(".meta.json");
    write_metadata(meta, "simulate", cfg, json{{"out", out_file.string()}}, r.artifacts);
    r.artifacts.push_back(meta);
    return r;
}

PipelineResult cmd_hbt(const PhotonStream& s, const RunConfig& cfg, double bin_ns,
                       double max_delay_ns, const fs::path& prefix) {
    if (!(bin_ns > 0.0) || !(max_delay_ns > bin_ns))
        throw std::invalid_argument("hbt: need bin_ns > 0 and max_delay_ns > bin_ns");
    const auto [arm_a, arm_b] = hbt_split(s, mix_seed(cfg.seed, 0x48b7), cfg.detector.model());
    const auto bin_ps = static_cast<std::uint64_t>(std::llround(bin_ns * 1000.0));
    const auto max_ps = static_cast<std::uint64_t>(std::llround(max_delay_ns * 1000.0));
    const auto h = g2_histogram(arm_a, arm_b, bin_ps, max_ps);

    fs::path csv = prefix;
    csv += "_g2.csv";
    auto out = open_out(csv);
    out << "delay_ps,counts,g2\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i)
        out << h.delay_ps[i] << "," << h.counts[i] << "," << g17(h.g2[i]) << "\n";
    out.close();

    const double rho = label_signal_fraction(arm_a, arm_b);
    PipelineResult r;
    r.summary = g2_json(h);
    r.summary["counts_arm_a"] = arm_a.size();
    r.summary["counts_arm_b"] = arm_b.size();
    r.summary["signal_fraction"] = rho;
    r.summary["g2_zero_corrected"] = background_corrected_g2(h.g2_zero(), rho);
    r.artifacts.push_back(csv);

    fs::path meta = prefix;
    meta += ".meta.json";
    write_metadata(meta, "hbt", cfg,
                   json{{"bin_ns", bin_ns}, {"max_delay_ns", max_delay_ns}}, r.artifacts);
    r.artifacts.push_back(meta);
    return r;
}

PipelineResult cmd_lifetime(const PhotonStream& s, const RunConfig& cfg, double rep_period_ns,
                            double bin_ns, const fs::path& prefix) {
    const auto bin_ps = static_cast<std::uint64_t>(std::llround(bin_ns * 1000.0));
    const auto h = decay_histogram(s, rep_period_ns, bin_ps);
    const auto fit = fit_exponential_decay(h);

    fs::path csv = prefix;
    csv += "_decay.csv";
    auto out = open_out(csv);
    out << "t_ns,counts\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i)
        out << g17(h.t_ns[i]) << "," << h.counts[i] << "\n";
    out.close();

    PipelineResult r;
    r.summary = json{{"tau_ns", fit.tau_ns},
                     {"tau_sigma_ns", fit.tau_sigma},
                     {"amplitude", fit.amplitude},
                     {"baseline", fit.baseline},
                     {"converged", fit.detail.converged},
                     {"n_photons", s.size()}};
    r.artifacts.push_back(csv);
    fs::path meta = prefix;
    meta += ".meta.json";
    write_metadata(meta, "lifetime", cfg,
                   json{{"rep_period_ns", rep_period_ns}, {"bin_ns", bin_ns}}, r.artifacts);
    r.artifacts.push_back(meta);
    return r;
}

PipelineResult cmd_scan_tuning(const RunConfig& cfg, int n_cycles, const fs::path& prefix) {
    cfg.validate();
    if (n_cycles < 1) throw std::invalid_argument("scan-tuning: n_cycles must be >= 1");
    const double zpl = cfg.zpl_nm();

    fs::path cyc_csv = prefix;
    cyc_csv += "_cycles.csv";
    auto cyc = open_out(cyc_csv);
    cyc << "cycle,lambda_nm\n";
    fs::path sweep_csv = prefix;
    sweep_csv += "_sweep.csv";
    auto sweep = open_out(sweep_csv);
    sweep << "delta_nm,enhancement,lifetime_ns\n";

    TuningState state = cfg.tuning;
    int crossing = -1;
    double best_f = 0.0;
    CavityParams cav = cfg.cavity;
    for (int cycle = 0; cycle <= n_cycles; ++cycle) {
        if (cycle > 0) state = apply_tuning_cycles(state, 1);
        const double delta = zpl - state.lambda_nm;
        cav.resonance_nm = state.lambda_nm;
        const double f = std::max(enhancement_vs_detuning(cav, delta), 1.0);
        const double lifetime = 1.0 / cfg.emitter.total_decay_rate(f);
        best_f = std::max(best_f, f);
        if (crossing < 0 && state.lambda_nm >= zpl) crossing = cycle;
        cyc << cycle << "," << g17(state.lambda_nm) << "\n";
        sweep << g17(delta) << "," << g17(f) << "," << g17(lifetime) << "\n";
    }
    cyc.close();
    sweep.close();

    PipelineResult r;
    r.summary = json{{"cycles", n_cycles},
                     {"lambda_start_nm", cfg.tuning.lambda_nm},
                     {"lambda_final_nm", state.lambda_nm},
                     {"lambda_saturation_nm", state.lambda_saturation_nm},
                     {"zpl_nm", zpl},
                     {"resonance_crossing_cycle", crossing},
                     {"max_enhancement", best_f}};
    r.artifacts = {cyc_csv, sweep_csv};
    fs::path meta = prefix;
    meta += ".meta.json";
    write_metadata(meta, "scan-tuning", cfg, json{{"cycles", n_cycles}}, r.artifacts);
    r.artifacts.push_back(meta);
    return r;
}

PipelineResult cmd_bands(const RunConfig& cfg, int n_per_segment, int n_plane_waves,
                         int n_bands, const fs::path& prefix) {
    cfg.validate();
    const auto bs = compute_band_structure(cfg.lattice, n_per_segment, n_plane_waves, n_bands);
    const auto gap = find_gap(bs);

    fs::path csv = prefix;
    csv += "_bands.csv";
    auto out = open_out(csv);
    out << "k_index,k_frac";
    for (int b = 1; b <= n_bands; ++b) out << ",band" << b;
    out << "\n";
    for (std::size_t i = 0; i < bs.k_points.size(); ++i) {
        out << i << "," << g17(bs.k_frac[i]);
        for (const double v : bs.bands[i]) out << "," << g17(v);
        out << "\n";
    }
    out.close();

    PipelineResult r;
    r.summary = json{{"n_plane_waves", bs.n_plane_waves},
                     {"n_k_points", bs.k_points.size()},
                     {"gap_found", gap.found},
                     {"gap_bottom", gap.bottom},
                     {"gap_top", gap.top},
                     {"midgap", gap.midgap},
                     {"lattice_constant_nm", cfg.lattice.lattice_constant_nm}};
    if (gap.found) {
        const double target = cfg.cavity.resonance_nm;
        const double a_cal = calibrated_lattice_constant_nm(gap, target);
        r.summary["calibrated_a_nm"] = a_cal;
        r.summary["calibration_target_nm"] = target;
        r.summary["target_in_gap_calibrated"] = wavelength_in_gap(gap, a_cal, target);
        r.summary["target_in_gap_default"] =
            wavelength_in_gap(gap, cfg.lattice.lattice_constant_nm, target);
    }
    r.artifacts.push_back(csv);
    fs::path gap_json = prefix;
    gap_json += "_gap.json";
    write_json(gap_json, r.summary);
    r.artifacts.push_back(gap_json);
    fs::path meta = prefix;
    meta += ".meta.json";
    write_metadata(meta, "bands", cfg,
                   json{{"n_per_segment", n_per_segment},
                        {"n_plane_waves", n_plane_waves},
                        {"n_bands", n_bands}},
                   r.artifacts);
    r.artifacts.push_back(meta);
    return r;
}

json cmd_purcell(double tau_bulk_ns, double tau_on_ns, double tau_off_ns, double eta) {
    const Lifetime tb(tau_bulk_ns), ton(tau_on_ns), toff(tau_off_ns);
    return json{{"fp", purcell_from_lifetimes(tb, ton, toff, eta)},
                {"beta", beta_factor(ton, toff)},
                {"tau_bulk_ns", tau_bulk_ns},
                {"tau_on_ns", tau_on_ns},
                {"tau_off_ns", tau_off_ns},
                {"eta", eta},
                {"fp_formula", "(tau_bulk/tau_on - tau_bulk/tau_off) / eta"},
                {"beta_formula", "(1/tau_on) / (1/tau_on + 1/tau_off)"}};
}

namespace {

PipelineResult fig2c(const RunConfig& cfg, const fs::path& outdir) {
    FanoParams truth;
    truth.center = cfg.cavity.resonance_nm;
    truth.width = cfg.cavity.resonance_nm / cfg.cavity.quality_factor;
    truth.asymmetry = 1.5;
    truth.amplitude = 1.0;
    truth.baseline = 0.2;

    const int n = 601;
    std::vector<double> lambda(n), refl(n);
    double peak = 0.0;
    for (int i = 0; i < n; ++i) {
        lambda[i] = truth.center - 3.0 + 6.0 * i / (n - 1);
        refl[i] = fano_reflectivity(truth, lambda[i]);
        peak = std::max(peak, refl[i]);
    }
    Rng rng(mix_seed(cfg.seed, 0x2c));
    const double noise = 0.01 * peak;
    for (auto& v : refl) v += noise * rng.gaussian();

    FanoParams init = truth;
    init.center += 0.2;
    init.width *= 2.0;  // start with Q off by a factor of two
    init.asymmetry = 1.0;
    const auto fit = fit_fano(lambda, refl, init);

    const double q_true = truth.quality_factor();
    const double q_fit = fit.params.quality_factor();

    const fs::path csv = outdir / "fig2c_fano.csv";
    auto out = open_out(csv);
    out << "lambda_nm,reflectivity,fit\n";
    for (int i = 0; i < n; ++i)
        out << g17(lambda[i]) << "," << g17(refl[i]) << ","
            << g17(fano_reflectivity(fit.params, lambda[i])) << "\n";
    out.close();

    PipelineResult r;
    r.summary = json{{"figure", "fig2c"},
                     {"q_true", q_true},
                     {"q_fit", q_fit},
                     {"q_rel_error", std::fabs(q_fit - q_true) / q_true},
                     {"center_nm", fit.params.center},
                     {"width_nm", fit.params.width},
                     {"asymmetry", fit.params.asymmetry},
                     {"converged", fit.detail.converged}};
    r.artifacts.push_back(csv);
    return r;
}

PipelineResult fig2d(const RunConfig& cfg, const fs::path& outdir) {
    const double axis = cfg.cavity.axis_angle_deg;
    const double i0 = 1000.0;
    const double vis = 0.92;
    const int n = 19;
    std::vector<double> theta(n), inten(n);
    Rng rng(mix_seed(cfg.seed, 0x2d));
    for (int i = 0; i < n; ++i) {
        theta[i] = 10.0 * i;
        inten[i] = dipole_intensity(theta[i], axis, vis, i0) + 0.02 * i0 * rng.gaussian();
    }
    const auto fit = fit_polarization(theta, inten);
    double miss = std::fabs(fit.theta0_deg - std::fmod(std::fmod(axis, 180.0) + 180.0, 180.0));
    miss = std::min(miss, 180.0 - miss);

    const fs::path csv = outdir / "fig2d_polarization.csv";
    auto out = open_out(csv);
    out << "theta_deg,intensity,fit\n";
    for (int i = 0; i < n; ++i)
        out << g17(theta[i]) << "," << g17(inten[i]) << ","
            << g17(dipole_intensity(theta[i], fit.theta0_deg, fit.visibility, fit.i0)) << "\n";
    out.close();

    PipelineResult r;
    r.summary = json{{"figure", "fig2d"},
                     {"cavity_axis_deg", axis},
                     {"theta0_fit_deg", fit.theta0_deg},
                     {"misalignment_deg", miss},
                     {"visibility", fit.visibility},
                     {"converged", fit.detail.converged}};
    r.artifacts.push_back(csv);
    return r;
}

// On-resonance CW antibunching with a background floor; raw and
// background-corrected g2(0).
PipelineResult fig3c(const RunConfig& cfg, const fs::path& outdir) {
    RunConfig run = cfg;
    run.simulation.mode = "cw";
    run.simulation.duration_ms = 400.0;
    run.simulation.enhancement = -1.0;
    run.emitter.pump_rate = 0.01;
    run.tuning.lambda_nm = run.zpl_nm();  // tuned onto resonance

    const double rho_target = 0.837;
    const auto duration_ps = static_cast<std::uint64_t>(run.simulation.duration_ms * 1e9);
    auto signal = simulate_cw(run.emitter, run.effective_enhancement(), duration_ps, run.seed,
                              run.simulation.shards);
    run.detector.background_rate_per_s = background_rate_for_fraction(signal, rho_target);
    const auto merged = add_background(signal, run.detector.background_rate_per_s,
                                       mix_seed(run.seed, 0xb9));

    const auto [arm_a, arm_b] = hbt_split(merged, mix_seed(run.seed, 0x48b7), run.detector.model());
    const auto h = g2_histogram(arm_a, arm_b, 500, 100000);
    const double rho = label_signal_fraction(arm_a, arm_b);

    const fs::path csv = outdir / "fig3c_g2.csv";
    auto out = open_out(csv);
    out << "delay_ps,counts,g2\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i)
        out << h.delay_ps[i] << "," << h.counts[i] << "," << g17(h.g2[i]) << "\n";
    out.close();

    PipelineResult r;
    r.summary = g2_json(h);
    r.summary["figure"] = "fig3c";
    r.summary["signal_fraction"] = rho;
    r.summary["signal_fraction_target"] = rho_target;
    r.summary["g2_zero_corrected"] = background_corrected_g2(h.g2_zero(), rho);
    r.summary["background_rate_per_s"] = run.detector.background_rate_per_s;
    r.artifacts.push_back(csv);
    return r;
}

// Pulsed autocorrelation: peak areas at multiples of the repetition period.
PipelineResult fig3d(const RunConfig& cfg, const fs::path& outdir) {
    RunConfig run = cfg;
    run.simulation.mode = "pulsed";
    run.simulation.rep_period_ns = 100.0;
    run.simulation.n_pulses = 2000000;
    run.simulation.excitation_prob = 0.9;
    run.simulation.enhancement = -1.0;
    run.tuning.lambda_nm = run.zpl_nm();

    const double rho_target = 0.837;
    auto signal = simulate_pulsed(run.emitter, run.effective_enhancement(),
                                  run.simulation.rep_period_ns, run.simulation.n_pulses,
                                  run.simulation.excitation_prob, run.seed);
    run.detector.background_rate_per_s = background_rate_for_fraction(signal, rho_target);
    const auto merged = add_background(signal, run.detector.background_rate_per_s,
                                       mix_seed(run.seed, 0xb9));

    const auto [arm_a, arm_b] = hbt_split(merged, mix_seed(run.seed, 0x48b7), run.detector.model());
    const auto pg = pulsed_g2(arm_a, arm_b, run.simulation.rep_period_ns, 5);

    const fs::path csv = outdir / "fig3d_peaks.csv";
    auto out = open_out(csv);
    out << "peak_index,delay_ns,area\n";
    for (std::size_t i = 0; i < pg.peak_area.size(); ++i)
        out << pg.peak_index[i] << ","
            << g17(pg.peak_index[i] * run.simulation.rep_period_ns) << "," << pg.peak_area[i]
            << "\n";
    out.close();

    PipelineResult r;
    r.summary = json{{"figure", "fig3d"},
                     {"rep_period_ns", run.simulation.rep_period_ns},
                     {"g2_zero", pg.g2_zero},
                     {"g2_zero_sigma", pg.g2_zero_sigma},
                     {"signal_fraction", label_signal_fraction(arm_a, arm_b)}};
    r.artifacts.push_back(csv);
    return r;
}

// ZPL intensity and lifetime versus cavity detuning.  Each scan point runs a
// CW brightness measurement and a pulsed lifetime measurement; the lifetime
// gives a saturation-free enhancement value that a Lorentzian is fit to.
PipelineResult fig4b(const RunConfig& cfg, const fs::path& outdir) {
    RunConfig run = cfg;
    run.emitter.pump_rate = 0.5;
    const double zpl = run.zpl_nm();
    const double duration_ms = 10.0;
    const auto duration_ps = static_cast<std::uint64_t>(duration_ms * 1e9);
    const std::uint64_t n_pulses = 200000;
    const double rep_ns = 400.0;

    const int n = 13;
    std::vector<double> delta(n), counts(n), f_meas(n), f_sigma(n), tau(n), tau_sigma(n);
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) {
        const double d = 2.4 * i / (n - 1);
        CavityParams cav = run.cavity;
        cav.resonance_nm = zpl - d;
        const double f = std::max(enhancement_vs_detuning(cav, d), 1.0);

        const auto cw = simulate_cw(run.emitter, f, duration_ps, mix_seed(run.seed, 0x400 + i), 1);
        const auto pulsed = simulate_pulsed(run.emitter, f, rep_ns, n_pulses, 0.9,
                                            mix_seed(run.seed, 0x4b0 + i));
        const auto fit = fit_exponential_decay(decay_histogram(pulsed, rep_ns, 100));

        delta[i] = d;
        counts[i] = static_cast<double>(count_channel(cw, Channel::zpl));
        tau[i] = fit.tau_ns;
        tau_sigma[i] = fit.tau_sigma;
        // Invert lifetime -> enhancement; the error follows by the chain rule.
        f_meas[i] = calibrate_peak_enhancement(run.emitter, fit.tau_ns);
        f_sigma[i] = fit.tau_sigma
                     / (run.emitter.radiative_rate * run.emitter.debye_waller * fit.tau_ns * fit.tau_ns);
    }

    // The cavity cannot drop the decay below its free-space value, so the far
    // wings sit on a flat floor at 1 instead of the Lorentzian tail.  Fit only
    // the contiguous resonant core that rises above that floor.
    std::size_t n_fit = 0;
    while (n_fit < delta.size() && f_meas[n_fit] > 1.0 + 3.0 * f_sigma[n_fit]) ++n_fit;
    n_fit = std::max<std::size_t>(n_fit, 5);
    const std::vector<double> core_d(delta.begin(), delta.begin() + n_fit);
    const std::vector<double> core_f(f_meas.begin(), f_meas.begin() + n_fit);
    const std::vector<double> core_s(f_sigma.begin(), f_sigma.begin() + n_fit);
    const auto fit = fit_lorentzian_peak(core_d, core_f, core_s);

    const fs::path scan_csv = outdir / "fig4b_scan.csv";
    auto scan = open_out(scan_csv);
    scan << "delta_nm,enhancement,lifetime_ns\n";
    for (int i = 0; i < n; ++i)
        scan << g17(delta[i]) << "," << g17(f_meas[i]) << "," << g17(tau[i]) << "\n";
    scan.close();

    const fs::path csv = outdir / "fig4b_intensity.csv";
    auto out = open_out(csv);
    out << "delta_nm,zpl_counts,enhancement_fit\n";
    for (int i = 0; i < n; ++i) {
        const double z = 2.0 * (delta[i] - fit.center_nm) / fit.width_nm;
        out << g17(delta[i]) << "," << g17(counts[i]) << ","
            << g17(fit.peak / (1.0 + z * z) + fit.baseline) << "\n";
    }
    out.close();

    // Bulk reference: expected ZPL counts for an uncoupled emitter (F = 1).
    const auto ss = steady_state_populations(run.emitter, 1.0);
    const double bulk_rate =
        run.emitter.radiative_rate * run.emitter.debye_waller * ss.excited;  // per ns
    const double bulk_counts = bulk_rate * duration_ms * 1e6;

    PipelineResult r;
    r.summary = json{{"figure", "fig4b"},
                     {"zpl_enhancement_measured", counts.front() / counts.back()},
                     {"zpl_enhancement_vs_bulk_model", counts.front() / bulk_counts},
                     {"fit_center_nm", fit.center_nm},
                     {"fit_center_sigma_nm", fit.center_sigma},
                     {"fit_width_nm", fit.width_nm},
                     {"fit_peak_enhancement", fit.peak + fit.baseline},
                     {"peak_enhancement_configured", run.cavity.peak_enhancement},
                     {"tau_on_ns", tau.front()},
                     {"tau_off_ns", tau.back()},
                     {"converged", fit.detail.converged}};
    r.artifacts = {scan_csv, csv};
    return r;
}

// Pulsed lifetime runs at three detunings.
PipelineResult fig4c(const RunConfig& cfg, const fs::path& outdir) {
    RunConfig run = cfg;
    run.simulation.rep_period_ns = 100.0;
    run.simulation.excitation_prob = 0.9;
    const std::uint64_t n_pulses = 2000000;
    const double zpl = run.zpl_nm();
    const double deltas[3] = {2.40, 0.23, 0.00};

    PipelineResult r;
    r.summary = json{{"figure", "fig4c"}, {"runs", json::array()}};

    const fs::path scan_csv = outdir / "fig4c_scan.csv";
    auto scan = open_out(scan_csv);
    scan << "delta_nm,enhancement,lifetime_ns\n";
    for (int i = 0; i < 3; ++i) {
        const double d = deltas[i];
        CavityParams cav = run.cavity;
        cav.resonance_nm = zpl - d;
        const double f = std::max(enhancement_vs_detuning(cav, d), 1.0);
        const auto s = simulate_pulsed(run.emitter, f, run.simulation.rep_period_ns, n_pulses,
                                       run.simulation.excitation_prob, mix_seed(run.seed, 0x4c0 + i));
        const auto h = decay_histogram(s, run.simulation.rep_period_ns, 100);
        const auto fit = fit_exponential_decay(h);
        const double tau_model = 1.0 / run.emitter.total_decay_rate(f);

        char buf[32];
        std::snprintf(buf, sizeof(buf), "fig4c_delta_%.2f.csv", d);
        const fs::path csv = outdir / buf;
        auto out = open_out(csv);
        out << "t_ns,counts\n";
        for (std::size_t k = 0; k < h.counts.size(); ++k)
            out << g17(h.t_ns[k]) << "," << h.counts[k] << "\n";
        out.close();
        r.artifacts.push_back(csv);

        scan << g17(d) << "," << g17(f) << "," << g17(fit.tau_ns) << "\n";
        r.summary["runs"].push_back(json{{"delta_nm", d},
                                         {"enhancement", f},
                                         {"tau_fit_ns", fit.tau_ns},
                                         {"tau_sigma_ns", fit.tau_sigma},
                                         {"tau_model_ns", tau_model},
                                         {"rel_error", std::fabs(fit.tau_ns - tau_model) / tau_model},
                                         {"n_photons", s.size()},
                                         {"converged", fit.detail.converged}});
        if (d == 0.0) r.summary["tau_on_ns"] = fit.tau_ns;
        if (d == 2.40) r.summary["tau_off_ns"] = fit.tau_ns;
    }
    scan.close();
    r.artifacts.push_back(scan_csv);
    return r;
}

PipelineResult fig4a(const RunConfig& cfg, const fs::path& outdir) {
    auto r = cmd_scan_tuning(cfg, 40, outdir / "fig4a");
    r.summary["figure"] = "fig4a";
    return r;
}

}

PipelineResult cmd_figure(const std::string& name, const RunConfig& cfg, const fs::path& outdir) {
    cfg.validate();
    fs::create_directories(outdir);
    PipelineResult r;
    if (name == "fig2c") r = fig2c(cfg, outdir);
    else if (name == "fig2d") r = fig2d(cfg, outdir);
    else if (name == "fig3c") r = fig3c(cfg, outdir);
    else if (name == "fig3d") r = fig3d(cfg, outdir);
    else if (name == "fig4a") r = fig4a(cfg, outdir);
    else if (name == "fig4b") r = fig4b(cfg, outdir);
    else if (name == "fig4c") r = fig4c(cfg, outdir);
    else
        throw std::invalid_argument("figure: unknown name \"" + name
                                    + "\" (expected fig2c, fig2d, fig3c, fig3d, fig4a, fig4b, fig4c)");

    const fs::path summary = outdir / (name + "_summary.json");
    write_json(summary, r.summary);
    r.artifacts.push_back(summary);
    const fs::path meta = outdir / (name + ".meta.json");
    write_metadata(meta, "figure", cfg, json{{"name", name}}, r.artifacts);
    r.artifacts.push_back(meta);
    return r;
}

}
