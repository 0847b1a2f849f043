#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "qcav/config.hpp"
#include "qcav/errors.hpp"
#include "qcav/pipelines.hpp"
#include "qcav/stream_io.hpp"
#include "qcav/version.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct GlobalArgs {
    std::string config_file;
    long long seed = -1;
    int workers = 0;
};

qcav::RunConfig load_run_config(const GlobalArgs& g) {
    qcav::RunConfig cfg;
    if (!g.config_file.empty()) cfg = qcav::load_config(g.config_file);
    if (g.seed >= 0) cfg.seed = static_cast<std::uint64_t>(g.seed);
    cfg.validate();
    return cfg;
}

void apply_workers(int workers) {
#ifdef _OPENMP
    if (workers <= 0) {
        if (const char* env = std::getenv("QCAV_WORKERS")) workers = std::atoi(env);
    }
    if (workers > 0) omp_set_num_threads(workers);
#else
    (void)workers;
#endif
}

void print_summary(const qcav::PipelineResult& r) {
    std::cout << r.summary.dump(2) << "\n";
}

}

int main(int argc, char** argv) {
    CLI::App app{"G-center / photonic-crystal cavity simulation toolkit"};
    app.set_version_flag("--version", std::string(qcav::kVersion));
    app.require_subcommand(1);

    GlobalArgs g;
    app.add_option("-c,--config", g.config_file, "JSON run configuration");
    app.add_option("--seed", g.seed, "override the configured RNG seed");
    app.add_option("--workers", g.workers,
                   "OpenMP thread count (0 = QCAV_WORKERS env or runtime default)");

    // simulate
    auto* sim = app.add_subcommand("simulate", "generate a photon time-tag stream");
    std::string sim_out = "stream.qpts";
    sim->add_option("-o,--out", sim_out, "output stream file");

    // hbt
    auto* hbt = app.add_subcommand("hbt", "split a stream and histogram coincidences");
    std::string hbt_in, hbt_prefix = "hbt";
    double hbt_bin_ns = 1.0, hbt_max_ns = 100.0;
    hbt->add_option("-i,--in", hbt_in, "input stream file")->required();
    hbt->add_option("-o,--out-prefix", hbt_prefix, "output file prefix");
    hbt->add_option("--bin-ns", hbt_bin_ns, "histogram bin width in ns");
    hbt->add_option("--max-delay-ns", hbt_max_ns, "maximum |delay| in ns");

    // lifetime
    auto* lt = app.add_subcommand("lifetime", "fold a pulsed stream and fit the decay");
    std::string lt_in, lt_prefix = "lifetime";
    double lt_rep_ns = 100.0, lt_bin_ns = 0.1;
    lt->add_option("-i,--in", lt_in, "input stream file")->required();
    lt->add_option("-o,--out-prefix", lt_prefix, "output file prefix");
    lt->add_option("--rep-period-ns", lt_rep_ns, "excitation repetition period in ns");
    lt->add_option("--bin-ns", lt_bin_ns, "decay histogram bin width in ns");

    // fit
    auto* fit = app.add_subcommand("fit", "run a least-squares fit described by a JSON problem");
    std::string fit_in, fit_out;
    fit->add_option("-i,--in", fit_in, "fit problem JSON")->required();
    fit->add_option("-o,--out", fit_out, "write the result JSON here instead of stdout");

    // scan-tuning
    auto* scan = app.add_subcommand("scan-tuning", "step the gas tuning cycle and log the resonance");
    std::string scan_prefix = "tuning";
    int scan_cycles = 40;
    scan->add_option("-o,--out-prefix", scan_prefix, "output file prefix");
    scan->add_option("--cycles", scan_cycles, "number of deposition cycles");

    // bands
    auto* bands = app.add_subcommand("bands", "TE band structure of the triangular-hole slab");
    std::string bands_prefix = "bands";
    int bands_pts = 16, bands_pw = 271, bands_nb = 6;
    bands->add_option("-o,--out-prefix", bands_prefix, "output file prefix");
    bands->add_option("--k-per-segment", bands_pts, "k-points per Brillouin-zone segment");
    bands->add_option("--plane-waves", bands_pw, "plane-wave budget (rounded down to a full shell)");
    bands->add_option("--bands", bands_nb, "number of bands to keep");

    // purcell
    auto* pur = app.add_subcommand("purcell", "Purcell factor and beta from measured lifetimes");
    double pur_tb = 33.3, pur_on = 6.7, pur_off = 53.6, pur_eta = 0.15;
    pur->add_option("--tau-bulk-ns", pur_tb, "bulk (uncoupled ensemble) lifetime in ns");
    pur->add_option("--tau-on-ns", pur_on, "on-resonance lifetime in ns");
    pur->add_option("--tau-off-ns", pur_off, "detuned lifetime in ns");
    pur->add_option("--eta", pur_eta, "fraction of emission addressed by the cavity");

    // figure
    auto* figure = app.add_subcommand("figure", "run a named end-to-end analysis pipeline");
    std::string fig_name, fig_dir = "figures";
    figure->add_option("name", fig_name, "fig2c, fig2d, fig3c, fig3d, fig4a, fig4b or fig4c")
        ->required();
    figure->add_option("-o,--out-dir", fig_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        apply_workers(g.workers);
        if (sim->parsed()) {
            print_summary(qcav::cmd_simulate(load_run_config(g), sim_out));
        } else if (hbt->parsed()) {
            const auto cfg = load_run_config(g);
            const auto stream = qcav::read_stream(hbt_in);
            print_summary(qcav::cmd_hbt(stream, cfg, hbt_bin_ns, hbt_max_ns, hbt_prefix));
        } else if (lt->parsed()) {
            const auto cfg = load_run_config(g);
            const auto stream = qcav::read_stream(lt_in);
            print_summary(qcav::cmd_lifetime(stream, cfg, lt_rep_ns, lt_bin_ns, lt_prefix));
        } else if (fit->parsed()) {
            std::ifstream in(fit_in);
            if (!in) throw std::runtime_error("cannot open fit problem " + fit_in);
            const auto problem = json::parse(in);
            const auto result = qcav::run_fit_problem(problem);
            if (fit_out.empty()) {
                std::cout << result.dump(2) << "\n";
            } else {
                std::ofstream out(fit_out, std::ios::trunc);
                if (!out) throw std::runtime_error("cannot open output " + fit_out);
                out << result.dump(2) << "\n";
            }
        } else if (scan->parsed()) {
            print_summary(qcav::cmd_scan_tuning(load_run_config(g), scan_cycles, scan_prefix));
        } else if (bands->parsed()) {
            print_summary(
                qcav::cmd_bands(load_run_config(g), bands_pts, bands_pw, bands_nb, bands_prefix));
        } else if (pur->parsed()) {
            std::cout << qcav::cmd_purcell(pur_tb, pur_on, pur_off, pur_eta).dump(2) << "\n";
        } else if (figure->parsed()) {
            print_summary(qcav::cmd_figure(fig_name, load_run_config(g), fig_dir));
        }
    } catch (const json::parse_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
