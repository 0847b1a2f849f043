#include "qcav/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>

#include "qcav/errors.hpp"
#include "qcav/fitting.hpp"
#include "qcav/units.hpp"

namespace qcav {

using nlohmann::json;

RunConfig::RunConfig() {
    cavity.peak_enhancement = calibrate_peak_enhancement(emitter, tau_on_target_ns);
}

void RunConfig::validate() const {
    emitter.validate();
    cavity.validate();
    lattice.validate();
    if (!(zpl_mev > 0.0)) throw std::domain_error("RunConfig: zpl_mev must be > 0");
    if (!(tau_bulk_ns > 0.0)) throw std::domain_error("RunConfig: tau_bulk_ns must be > 0");
    if (!(tau_on_target_ns > 0.0)) throw std::domain_error("RunConfig: tau_on_target_ns must be > 0");
    if (!(detector.dead_time_ns >= 0.0) || !(detector.jitter_ps >= 0.0)
        || !(detector.background_rate_per_s >= 0.0))
        throw std::domain_error("RunConfig: detector parameters must be >= 0");
    if (simulation.mode != "cw" && simulation.mode != "pulsed")
        throw std::domain_error("RunConfig: simulation.mode must be \"cw\" or \"pulsed\"");
    if (!(simulation.duration_ms > 0.0)) throw std::domain_error("RunConfig: duration_ms must be > 0");
    if (!(simulation.rep_period_ns > 0.0)) throw std::domain_error("RunConfig: rep_period_ns must be > 0");
    if (!(simulation.excitation_prob >= 0.0 && simulation.excitation_prob <= 1.0))
        throw std::domain_error("RunConfig: excitation_prob must be in [0, 1]");
    if (simulation.shards < 1) throw std::domain_error("RunConfig: shards must be >= 1");
}

double RunConfig::zpl_nm() const {
    return energy_to_wavelength(PhotonEnergy(zpl_mev)).nm();
}

double RunConfig::detuning() const {
    return detuning_nm(Wavelength(zpl_nm()), Wavelength(tuning.lambda_nm));
}

double RunConfig::effective_enhancement() const {
    if (simulation.enhancement >= 0.0) return simulation.enhancement;
    CavityParams c = cavity;
    c.resonance_nm = tuning.lambda_nm;
    return std::max(enhancement_vs_detuning(c, detuning()), 1.0);
}

namespace {

void reject_unknown(const json& j, const char* scope, const std::set<std::string>& allowed) {
    for (const auto& [key, val] : j.items()) {
        (void)val;
        if (!allowed.count(key))
            throw std::invalid_argument(std::string("config: unknown field \"") + key
                                        + "\" in " + scope);
    }
}

template <typename T>
void get_if(const json& j, const char* key, T& out) {
    if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

}

RunConfig config_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("config: top level must be a JSON object");
    reject_unknown(j, "top level",
                   {"seed", "zpl_mev", "tau_bulk_ns", "tau_on_target_ns", "emitter", "cavity",
                    "tuning", "detector", "simulation", "lattice", "output"});
    if (!j.contains("seed")) throw std::invalid_argument("config: \"seed\" is mandatory");

    RunConfig c;
    c.seed = j.at("seed").get<std::uint64_t>();
    get_if(j, "zpl_mev", c.zpl_mev);
    get_if(j, "tau_bulk_ns", c.tau_bulk_ns);
    get_if(j, "tau_on_target_ns", c.tau_on_target_ns);

    bool explicit_f0 = false;
    if (j.contains("emitter")) {
        const auto& e = j.at("emitter");
        reject_unknown(e, "emitter",
                       {"pump_rate_per_ns", "radiative_rate_per_ns", "nonradiative_rate_per_ns",
                        "isc_rate_per_ns", "triplet_decay_rate_per_ns", "debye_waller",
                        "dipole_angle_deg"});
        get_if(e, "pump_rate_per_ns", c.emitter.pump_rate);
        get_if(e, "radiative_rate_per_ns", c.emitter.radiative_rate);
        get_if(e, "nonradiative_rate_per_ns", c.emitter.nonradiative_rate);
        get_if(e, "isc_rate_per_ns", c.emitter.isc_rate);
        get_if(e, "triplet_decay_rate_per_ns", c.emitter.triplet_decay_rate);
        get_if(e, "debye_waller", c.emitter.debye_waller);
        get_if(e, "dipole_angle_deg", c.emitter.dipole_angle_deg);
    }
    if (j.contains("cavity")) {
        const auto& v = j.at("cavity");
        reject_unknown(v, "cavity",
                       {"resonance_nm", "quality_factor", "mode_volume_lambda3",
                        "refractive_index", "peak_enhancement", "axis_angle_deg"});
        get_if(v, "resonance_nm", c.cavity.resonance_nm);
        get_if(v, "quality_factor", c.cavity.quality_factor);
        get_if(v, "mode_volume_lambda3", c.cavity.mode_volume);
        get_if(v, "refractive_index", c.cavity.refractive_index);
        if (v.contains("peak_enhancement") && !v.at("peak_enhancement").is_null()) {
            c.cavity.peak_enhancement = v.at("peak_enhancement").get<double>();
            explicit_f0 = true;
        }
        get_if(v, "axis_angle_deg", c.cavity.axis_angle_deg);
    }
    if (!explicit_f0)
        c.cavity.peak_enhancement = calibrate_peak_enhancement(c.emitter, c.tau_on_target_ns);

    if (j.contains("tuning")) {
        const auto& t = j.at("tuning");
        reject_unknown(t, "tuning",
                       {"lambda_nm", "shift_per_cycle_nm", "lambda_saturation_nm", "cycles_applied"});
        get_if(t, "lambda_nm", c.tuning.lambda_nm);
        get_if(t, "shift_per_cycle_nm", c.tuning.shift_per_cycle_nm);
        get_if(t, "lambda_saturation_nm", c.tuning.lambda_saturation_nm);
        get_if(t, "cycles_applied", c.tuning.cycles_applied);
    }
    if (j.contains("detector")) {
        const auto& d = j.at("detector");
        reject_unknown(d, "detector", {"dead_time_ns", "jitter_ps", "background_rate_per_s"});
        get_if(d, "dead_time_ns", c.detector.dead_time_ns);
        get_if(d, "jitter_ps", c.detector.jitter_ps);
        get_if(d, "background_rate_per_s", c.detector.background_rate_per_s);
    }
    if (j.contains("simulation")) {
        const auto& s = j.at("simulation");
        reject_unknown(s, "simulation",
                       {"mode", "duration_ms", "rep_period_ns", "n_pulses", "excitation_prob",
                        "shards", "enhancement"});
        get_if(s, "mode", c.simulation.mode);
        get_if(s, "duration_ms", c.simulation.duration_ms);
        get_if(s, "rep_period_ns", c.simulation.rep_period_ns);
        get_if(s, "n_pulses", c.simulation.n_pulses);
        get_if(s, "excitation_prob", c.simulation.excitation_prob);
        get_if(s, "shards", c.simulation.shards);
        get_if(s, "enhancement", c.simulation.enhancement);
    }
    if (j.contains("lattice")) {
        const auto& l = j.at("lattice");
        reject_unknown(l, "lattice",
                       {"lattice_constant_nm", "hole_radius_ratio", "eps_background", "eps_hole"});
        get_if(l, "lattice_constant_nm", c.lattice.lattice_constant_nm);
        get_if(l, "hole_radius_ratio", c.lattice.hole_radius_ratio);
        get_if(l, "eps_background", c.lattice.eps_background);
        get_if(l, "eps_hole", c.lattice.eps_hole);
    }
    if (j.contains("output")) {
        const auto& o = j.at("output");
        reject_unknown(o, "output", {"directory", "ndjson"});
        get_if(o, "directory", c.output.directory);
        get_if(o, "ndjson", c.output.ndjson);
    }
    c.validate();
    return c;
}

json config_to_json(const RunConfig& c) {
    return json{
        {"seed", c.seed},
        {"zpl_mev", c.zpl_mev},
        {"tau_bulk_ns", c.tau_bulk_ns},
        {"tau_on_target_ns", c.tau_on_target_ns},
        {"emitter",
         {{"pump_rate_per_ns", c.emitter.pump_rate},
          {"radiative_rate_per_ns", c.emitter.radiative_rate},
          {"nonradiative_rate_per_ns", c.emitter.nonradiative_rate},
          {"isc_rate_per_ns", c.emitter.isc_rate},
          {"triplet_decay_rate_per_ns", c.emitter.triplet_decay_rate},
          {"debye_waller", c.emitter.debye_waller},
          {"dipole_angle_deg", c.emitter.dipole_angle_deg}}},
        {"cavity",
         {{"resonance_nm", c.cavity.resonance_nm},
          {"quality_factor", c.cavity.quality_factor},
          {"mode_volume_lambda3", c.cavity.mode_volume},
          {"refractive_index", c.cavity.refractive_index},
          {"peak_enhancement", c.cavity.peak_enhancement},
          {"axis_angle_deg", c.cavity.axis_angle_deg}}},
        {"tuning",
         {{"lambda_nm", c.tuning.lambda_nm},
          {"shift_per_cycle_nm", c.tuning.shift_per_cycle_nm},
          {"lambda_saturation_nm", c.tuning.lambda_saturation_nm},
          {"cycles_applied", c.tuning.cycles_applied}}},
        {"detector",
         {{"dead_time_ns", c.detector.dead_time_ns},
          {"jitter_ps", c.detector.jitter_ps},
          {"background_rate_per_s", c.detector.background_rate_per_s}}},
        {"simulation",
         {{"mode", c.simulation.mode},
          {"duration_ms", c.simulation.duration_ms},
          {"rep_period_ns", c.simulation.rep_period_ns},
          {"n_pulses", c.simulation.n_pulses},
          {"excitation_prob", c.simulation.excitation_prob},
          {"shards", c.simulation.shards},
          {"enhancement", c.simulation.enhancement}}},
        {"lattice",
         {{"lattice_constant_nm", c.lattice.lattice_constant_nm},
          {"hole_radius_ratio", c.lattice.hole_radius_ratio},
          {"eps_background", c.lattice.eps_background},
          {"eps_hole", c.lattice.eps_hole}}},
        {"output", {{"directory", c.output.directory}, {"ndjson", c.output.ndjson}}}};
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("load_config: cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("load_config: " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

std::string config_hash(const RunConfig& c) {
    const std::string canon = config_to_json(c).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canon) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

const std::vector<std::string>& fit_model_names() {
    static const std::vector<std::string> names = {"exponential", "lorentzian", "fano", "cos2",
                                                   "linear"};
    return names;
}

FitModel lookup_fit_model(const std::string& name) {
    constexpr double deg = 3.14159265358979323846 / 180.0;
    if (name == "exponential") {
        return {[](double t, const std::vector<double>& p) { return p[0] * std::exp(-t / p[1]) + p[2]; },
                [](double t, const std::vector<double>& p, std::vector<double>& j) {
                    const double e = std::exp(-t / p[1]);
                    j[0] = e;
                    j[1] = p[0] * e * t / (p[1] * p[1]);
                    j[2] = 1.0;
                },
                {positive(), positive(), positive()},
                {"amplitude", "tau", "baseline"}};
    }
    if (name == "lorentzian") {
        return {[](double x, const std::vector<double>& p) {
                    const double z = 2.0 * (x - p[2]) / p[1];
                    return p[0] / (1.0 + z * z) + p[3];
                },
                [](double x, const std::vector<double>& p, std::vector<double>& j) {
                    const double z = 2.0 * (x - p[2]) / p[1];
                    const double den = 1.0 + z * z;
                    j[0] = 1.0 / den;
                    j[1] = p[0] * 2.0 * z * z / (p[1] * den * den);
                    j[2] = p[0] * 4.0 * z / (p[1] * den * den);
                    j[3] = 1.0;
                },
                {positive(), positive(), unbounded(), positive()},
                {"peak", "width", "center", "baseline"}};
    }
    if (name == "fano") {
        return {[](double x, const std::vector<double>& p) {
                    const double om = 2.0 * (x - p[0]) / p[1];
                    return p[4] + p[3] * (p[2] + om) * (p[2] + om) / (1.0 + om * om);
                },
                [](double x, const std::vector<double>& p, std::vector<double>& j) {
                    const double om = 2.0 * (x - p[0]) / p[1];
                    const double num = p[2] + om;
                    const double den = 1.0 + om * om;
                    const double dr_dom = p[3] * (2.0 * num * den - num * num * 2.0 * om) / (den * den);
                    j[0] = dr_dom * (-2.0 / p[1]);
                    j[1] = dr_dom * (-om / p[1]);
                    j[2] = p[3] * 2.0 * num / den;
                    j[3] = num * num / den;
                    j[4] = 1.0;
                },
                {unbounded(), positive(), unbounded(), positive(), unbounded()},
                {"center", "width", "asymmetry", "amplitude", "baseline"}};
    }
    if (name == "cos2") {
        return {[deg](double th, const std::vector<double>& p) {
                    const double c = std::cos((th - p[2]) * deg);
                    return p[0] * (1.0 - p[1] + p[1] * c * c);
                },
                [deg](double th, const std::vector<double>& p, std::vector<double>& j) {
                    const double arg = (th - p[2]) * deg;
                    const double c = std::cos(arg);
                    j[0] = 1.0 - p[1] + p[1] * c * c;
                    j[1] = p[0] * (c * c - 1.0);
                    j[2] = p[0] * p[1] * 2.0 * c * std::sin(arg) * deg;
                },
                {positive(), Bound{0.0, 1.0}, unbounded()},
                {"i0", "visibility", "theta0_deg"}};
    }
    if (name == "linear") {
        return {[](double x, const std::vector<double>& p) { return p[0] * x + p[1]; },
                [](double x, const std::vector<double>&, std::vector<double>& j) {
                    j[0] = x;
                    j[1] = 1.0;
                },
                {unbounded(), unbounded()},
                {"slope", "intercept"}};
    }
    throw std::invalid_argument("fit: unknown model \"" + name + "\"");
}

json run_fit_problem(const json& problem) {
    if (!problem.is_object()) throw std::invalid_argument("fit: problem must be a JSON object");
    reject_unknown(problem, "fit problem", {"model", "x", "y", "weights", "init", "bounds"});
    if (!problem.contains("model")) throw std::invalid_argument("fit: \"model\" is required");
    const auto model_name = problem.at("model").get<std::string>();
    auto spec = lookup_fit_model(model_name);

    auto x = problem.value("x", std::vector<double>{});
    auto y = problem.value("y", std::vector<double>{});
    if (x.empty() || x.size() != y.size())
        throw std::invalid_argument("fit: x and y must be non-empty arrays of equal length");
    std::vector<double> w;
    if (problem.contains("weights") && !problem.at("weights").is_null())
        w = problem.at("weights").get<std::vector<double>>();

    std::vector<double> init;
    if (problem.contains("init") && !problem.at("init").is_null()) {
        init = problem.at("init").get<std::vector<double>>();
        if (init.size() != spec.names.size())
            throw std::invalid_argument("fit: init must have " + std::to_string(spec.names.size())
                                        + " entries for model \"" + model_name + "\"");
    } else if (model_name == "exponential") {
        const auto fit = fit_exponential_decay(x, y);
        init = {fit.amplitude, fit.tau_ns, fit.baseline};
    } else if (model_name == "lorentzian") {
        const auto fit = fit_lorentzian_peak(x, y);
        init = {fit.peak, fit.width_nm, fit.center_nm, fit.baseline};
    } else if (model_name == "cos2") {
        const auto fit = fit_polarization(x, y);
        init = {fit.i0, fit.visibility, fit.theta0_deg};
    } else if (model_name == "linear") {
        init = {0.0, 0.0};
    } else {
        throw std::invalid_argument("fit: model \"" + model_name + "\" requires \"init\"");
    }

    if (problem.contains("bounds") && !problem.at("bounds").is_null()) {
        const auto& jb = problem.at("bounds");
        if (!jb.is_array() || jb.size() != spec.names.size())
            throw std::invalid_argument("fit: bounds must list one entry per parameter");
        spec.bounds.assign(spec.names.size(), Bound{});
        for (std::size_t i = 0; i < jb.size(); ++i) {
            if (jb[i].is_null()) continue;
            if (!jb[i].is_array() || jb[i].size() != 2)
                throw std::invalid_argument("fit: each bound must be null or [lo, hi]");
            if (!jb[i][0].is_null()) spec.bounds[i].lo = jb[i][0].get<double>();
            if (!jb[i][1].is_null()) spec.bounds[i].hi = jb[i][1].get<double>();
        }
    }

    const auto res = levenberg_marquardt(spec.f, spec.jac, x, y, w, init, spec.bounds);
    json cov = json::array();
    const std::size_t n = res.params.size();
    for (std::size_t i = 0; i < n; ++i) {
        json row = json::array();
        for (std::size_t k = 0; k < n; ++k) row.push_back(res.covariance[i * n + k]);
        cov.push_back(row);
    }
    return json{{"model", model_name},
                {"param_names", spec.names},
                {"params", res.params},
                {"sigma", res.sigma},
                {"covariance", cov},
                {"chi2", res.chi2},
                {"dof", res.dof},
                {"chi2_per_dof", res.chi2 / static_cast<double>(res.dof)},
                {"iterations", res.iterations},
                {"converged", res.converged}};
}

}
