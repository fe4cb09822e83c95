// Command-line front end: calibrate, spectrum, resonances, run, list.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "triwell/triwell.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitCapacity = 3;
constexpr int kExitNumerical = 4;
constexpr int kExitScenario = 5;

triwell::NumberStateLabel parse_label(const std::string& text) {
    // NL.NM.NR:i
    std::string t = text;
    for (auto& ch : t)
        if (ch == '.' || ch == ':') ch = ' ';
    std::istringstream is(t);
    triwell::NumberStateLabel l;
    if (!(is >> l.occupation[0] >> l.occupation[1] >> l.occupation[2] >> l.excitation))
        throw triwell::config_error("cannot parse label '" + text + "' (expected NL.NM.NR:i)");
    return l;
}

std::filesystem::path output_root(const std::string& cli_dir, const std::string& fallback) {
    if (!cli_dir.empty()) return cli_dir;
    if (const char* env = std::getenv("TRIWELL_OUTPUT_ROOT"))
        return std::filesystem::path(env) / fallback;
    return fallback;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"triwell: few-boson triple-well interband tunneling simulator"};
    app.require_subcommand(1);

    // calibrate
    auto* cal = app.add_subcommand("calibrate", "find the depth V0 matching a target hopping J");
    double target_j = 0.01;
    int bands = 3;
    double lo = 15.0, hi = 45.0;
    std::string cal_out = "calibration.txt";
    cal->add_option("--target-J", target_j, "target lowest-band hopping")->capture_default_str();
    cal->add_option("--bands", bands, "required sub-well levels below the barrier")
        ->capture_default_str();
    cal->add_option("--lo", lo, "lower bracket for V0")->capture_default_str();
    cal->add_option("--hi", hi, "upper bracket for V0")->capture_default_str();
    cal->add_option("-o,--output", cal_out, "record file")->capture_default_str();

    // spectrum
    auto* spec = app.add_subcommand("spectrum", "on-site energies of the number states vs g");
    double sp_v0 = 12.0, sp_tilt = 0.0, sp_gmax = 30.0, sp_gstep = 0.75;
    int sp_n = 3, sp_nsub = 41;
    std::string sp_dir;
    spec->add_option("--V0", sp_v0, "trap depth")->capture_default_str();
    spec->add_option("--tilt", sp_tilt, "linear tilt slope")->capture_default_str();
    spec->add_option("--N", sp_n, "boson number")->capture_default_str();
    spec->add_option("--g-max", sp_gmax, "densely sampled coupling range")->capture_default_str();
    spec->add_option("--g-step", sp_gstep, "coupling step")->capture_default_str();
    spec->add_option("--n-sub", sp_nsub, "sub-well grid points")->capture_default_str();
    spec->add_option("-o,--output", sp_dir, "output directory (default spectrum/)");

    // resonances
    auto* reso = app.add_subcommand("resonances", "locate crossings of on-site energy curves");
    std::string rs_initial = "3.0.0:0";
    std::vector<std::string> rs_candidates;
    double rs_v0 = 12.0, rs_tilt = 0.0, rs_gmax = 30.0, rs_gstep = 0.75, rs_scale = -1.0;
    std::string rs_dir;
    reso->add_option("--initial", rs_initial, "initial label NL.NM.NR:i")->capture_default_str();
    reso->add_option("--candidate", rs_candidates, "candidate label(s) NL.NM.NR:i")
        ->required();
    reso->add_option("--V0", rs_v0, "trap depth")->capture_default_str();
    reso->add_option("--tilt", rs_tilt, "linear tilt slope")->capture_default_str();
    reso->add_option("--g-max", rs_gmax, "scan range")->capture_default_str();
    reso->add_option("--g-step", rs_gstep, "scan step")->capture_default_str();
    reso->add_option("--scale", rs_scale,
                     "coupling scale for the window report (default: hopping J)");
    reso->add_option("-o,--output", rs_dir, "output directory (default resonances/)");

    // run
    auto* run = app.add_subcommand("run", "run a built-in scenario or a config file");
    std::string run_what;
    std::string run_dir;
    run->add_option("scenario", run_what, "built-in name or path to a config file")->required();
    run->add_option("-o,--output", run_dir, "output directory override");

    // list
    auto* list = app.add_subcommand("list", "show the built-in scenario catalog");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cal->parsed()) {
            triwell::CalibrationRecord rec = triwell::calibrate_depth(target_j, bands, lo, hi);
            triwell::write_calibration_record(rec, cal_out);
            std::cout << "V0 = " << rec.v0 << "  J = " << rec.achieved_J
                      << "  bound levels = " << rec.bound_levels << "\n"
                      << "record written to " << cal_out << "\n";
        } else if (spec->parsed()) {
            triwell::NumberStateSolver::Options opt;
            opt.v0 = sp_v0;
            opt.tilt = sp_tilt;
            opt.n_sub = sp_nsub;
            triwell::NumberStateSolver solver(opt);
            auto table = solver.onsite_energy_scan(
                sp_n, triwell::detail::default_g_grid(sp_gmax, sp_gstep));
            const auto dir = output_root(sp_dir, "spectrum");
            std::filesystem::create_directories(dir);
            std::ofstream os(dir / "spectrum.csv");
            triwell::write_spectrum_csv(table, os);
            std::cout << "wrote " << (dir / "spectrum.csv").string() << " with "
                      << table.rows.size() << " states x " << table.g_samples.size()
                      << " couplings\n";
        } else if (reso->parsed()) {
            triwell::NumberStateSolver::Options opt;
            opt.v0 = rs_v0;
            opt.tilt = rs_tilt;
            triwell::NumberStateSolver solver(opt);
            auto table = solver.onsite_energy_scan(
                parse_label(rs_initial).total(),
                triwell::detail::default_g_grid(rs_gmax, rs_gstep));
            std::vector<triwell::NumberStateLabel> cands;
            for (const auto& c : rs_candidates) cands.push_back(parse_label(c));
            const double scale =
                rs_scale > 0.0 ? rs_scale : triwell::wannier_analysis(rs_v0, rs_tilt).hopping_J;
            auto recs =
                solver.find_resonances(table, parse_label(rs_initial), cands, scale);
            const auto dir = output_root(rs_dir, "resonances");
            std::filesystem::create_directories(dir);
            {
                std::ofstream os(dir / "crossings.csv");
                triwell::write_crossings_csv(recs, os);
            }
            {
                std::ofstream os(dir / "spectrum.csv");
                triwell::write_spectrum_csv(table, os);
            }
            for (const auto& r : recs) {
                std::cout << r.initial.str() << " vs " << r.candidate.str() << ": ";
                if (r.has_crossing)
                    std::cout << "crossing at g* = " << r.g_star;
                else
                    std::cout << "no crossing; closest gap " << r.closest_gap << " at g = "
                              << r.closest_g;
                if (r.has_window)
                    std::cout << "  window [" << r.window_lo << ", " << r.window_hi << "]";
                std::cout << "\n";
            }
        } else if (run->parsed()) {
            triwell::ScenarioConfig cfg;
            if (std::filesystem::exists(run_what))
                cfg = triwell::load_scenario_config(run_what);
            else
                cfg = triwell::builtin_scenario(run_what);
            if (!run_dir.empty()) cfg.output_dir = run_dir;
            triwell::ScenarioResult res = triwell::run_scenario(cfg);
            std::cout << "scenario " << cfg.name << " finished: V0=" << res.v0
                      << " g=" << res.g_run << " period=" << res.dominant_period
                      << " horizon=" << res.horizon << "\n"
                      << "outputs in " << res.output_dir << "\n";
            if (res.summary.contains("checks")) {
                for (auto& [k, v] : res.summary["checks"].items())
                    std::cout << "  [" << (v["pass"].get<bool>() ? "pass" : "FAIL") << "] " << k
                              << " (" << v["value"].dump() << ")\n";
            }
        } else if (list->parsed()) {
            for (const auto& e : triwell::list_builtin_scenarios()) {
                std::cout << e.name << "\n  " << e.description << "\n  expects: " << e.expectation
                          << "\n";
            }
        }
    } catch (const triwell::capacity_error& e) {
        std::cerr << "capacity error: " << e.what() << "\n";
        return kExitCapacity;
    } catch (const triwell::scenario_error& e) {
        std::cerr << "scenario error: " << e.what() << "\n";
        return kExitScenario;
    } catch (const triwell::config_error& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const triwell::numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return 0;
}
