// intspec command-line driver.  Exit status: 0 success, 1 domain or data
// error, 2 usage error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "intspec/adjust.hpp"
#include "intspec/config.hpp"
#include "intspec/errors.hpp"
#include "intspec/euler.hpp"
#include "intspec/field_core.hpp"
#include "intspec/flowline.hpp"
#include "intspec/io.hpp"
#include "intspec/kam.hpp"
#include "intspec/rng.hpp"
#include "intspec/spectrum.hpp"
#include "intspec/steady_gallery.hpp"

using namespace intspec;
namespace fs = std::filesystem;

namespace {

struct Context {
    std::string command;
    Json config;
    std::string out_dir;
    std::vector<std::string> outputs;

    std::string path(const std::string& name) const { return (fs::path(out_dir) / name).string(); }
    void write(const std::string& name, const std::string& content) {
        write_file_atomic(path(name), content);
        outputs.push_back(name);
    }
};

SpectralField3 input_field(const Json& cfg) {
    const std::string file = cfg.at("field_file").get<std::string>();
    if (!file.empty()) return load_field(file, 0).field;
    return build_field(cfg.at("field"));
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

int run_make_field(Context& ctx) {
    auto v = build_field(ctx.config.at("field"));
    const auto inv = integral_invariants(v);
    Json meta{{"field", ctx.config.at("field")}, {"energy", inv.energy}, {"helicity", inv.helicity}};
    const std::string name = ctx.config.at("output").get<std::string>();
    save_field(ctx.path(name), v, meta.dump());
    ctx.outputs.push_back(name);
    std::cout << fmt::format("wrote {} (N = {}, E = {:.12g}, H = {:.12g})\n", ctx.path(name), v.n(), inv.energy,
                             inv.helicity);
    return 0;
}

int run_verify_steady(Context& ctx) {
    const auto& cfg = ctx.config;
    auto v = input_field(cfg);
    const double tol = cfg.at("tolerance").get<double>();
    std::optional<ShearGallery> sg;
    if (cfg.at("field_file").get<std::string>().empty())
        sg = shear_gallery(cfg.at("field").at("gallery").get<std::string>());
    SteadyResiduals r;
    std::string alpha_kind = "least-squares";
    if (sg && cfg.at("field").at("epsilon").get<double>() == 0.0) {
        auto alpha = shear_bernoulli(sg->profile, sg->axis, v.n());
        r = steady_residuals(v, &alpha);
        alpha_kind = "(f^2+g^2)/2";
    } else {
        r = steady_residuals(v);
    }
    const double div = max_divergence(v);
    struct Row {
        const char* name;
        double value;
    };
    const Row rows[] = {{"bernoulli", r.bernoulli}, {"commutator", r.commutator}, {"max_divergence", div}};
    std::string csv = "quantity,value,tolerance,pass\n";
    bool ok = true;
    for (const auto& row : rows) {
        const bool pass = row.value <= tol;
        ok = ok && pass;
        csv += fmt::format("{},{:.6e},{:.1e},{}\n", row.name, row.value, tol, pass ? "pass" : "fail");
    }
    ctx.write("verify_steady.csv", csv);
    std::cout << "# alpha: " << alpha_kind << "\n" << csv << (ok ? "steady: pass\n" : "steady: fail\n");
    return ok ? 0 : 1;
}

int run_evolve(Context& ctx) {
    const auto& cfg = ctx.config;
    auto u0 = input_field(cfg);
    const double T = cfg.at("T").get<double>();
    const auto eo = euler_options_from(cfg.at("euler"));
    auto run = evolve(u0, T, eo);
    auto rep = conservation_report(run);
    std::cout << rep.table_csv();
    ctx.write("diagnostics.csv", rep.table_csv());
    Json snaps = Json::array();
    for (std::size_t i = 0; i < run.snapshots.size(); ++i) {
        const auto& s = run.snapshots[i];
        const std::string name = fmt::format("snapshot_{:04d}.spf3", i);
        save_field(ctx.path(name), s.field, Json{{"time", s.time}}.dump());
        ctx.outputs.push_back(name);
        snaps.push_back(Json{{"time", s.time}, {"file", name}});
    }
    Json report{{"n", run.n},
                {"dealiasing", run.dealiasing},
                {"filter", eo.filter},
                {"truncated_norm", run.truncated_norm},
                {"final_time", run.final_time},
                {"blowup", run.blowup},
                {"blowup_reason", run.blowup_reason},
                {"energy_drift", rep.energy_drift},
                {"helicity_drift", rep.helicity_drift},
                {"rows_used", rep.rows_used},
                {"snapshots", snaps}};
    const int markers = cfg.at("kelvin_markers").get<int>();
    if (markers > 0) {
        auto k = kelvin_residual(u0, T, markers, cfg.at("rng_seed").get<std::uint64_t>(), eo);
        report["kelvin"] = Json{{"residual", k.residual}, {"markers", k.markers}, {"failed", k.failed}};
    }
    ctx.write("evolve_report.json", dump(report));
    if (run.blowup) {
        std::cerr << "run aborted: " << run.blowup_reason << "\n";
        return 1;
    }
    return 0;
}

int run_spectrum(Context& ctx) {
    const auto& cfg = ctx.config;
    auto sp = spectrum_params_from(cfg.at("spectrum"));
    sp.rng_seed = cfg.at("rng_seed").get<std::uint64_t>();
    sp.threads = cfg.at("threads").get<int>();
    std::shared_ptr<const FlowField> flow;
    const std::string file = cfg.at("field_file").get<std::string>();
    if (!file.empty())
        flow = make_evaluator(load_field(file, 0).field);
    else
        flow = build_flow(cfg.at("field"));
    auto est = estimate_spectrum(*flow, cfg.at("seeds").get<int>(), sp);
    ctx.write("spectrum.json", est.to_json());
    ctx.write("spectrum.csv", est.to_csv());
    std::cout << fmt::format("dominant {} kappa {:.4f}\n", est.dominant(), est.tag(est.dominant()).kappa);
    return 0;
}

int run_kam_sweep(Context& ctx) {
    const auto& cfg = ctx.config;
    const auto& mc = cfg.at("map");
    const std::string family = mc.at("family").get<std::string>();
    TwistMap m;
    if (family == "standard")
        m = standard_twist_map(mc.at("tau").get<double>(), mc.at("z_lo").get<double>(), mc.at("z_hi").get<double>());
    else if (family == "profile")
        m = twist_map_from_profile(named_profile(mc.at("profile").get<std::string>()), mc.at("z_lo").get<double>(),
                                   mc.at("z_hi").get<double>());
    else
        throw UsageError("map.family must be 'standard' or 'profile'");
    auto sp = survival_params_from(cfg.at("survival"));
    sp.threads = cfg.at("threads").get<int>();
    const auto eps = cfg.at("eps").get<std::vector<double>>();
    auto sw = epsilon_sweep(m, eps, sp);
    ctx.write("kam_sweep.csv", sw.to_csv());
    Json report{{"map", m.name}, {"tau", m.tau},       {"slope", sw.slope}, {"prefactor", sw.prefactor},
                {"floor", sw.floor}, {"degenerate", sw.degenerate}};
    if (cfg.at("tau_check").get<bool>() && family == "standard") {
        std::vector<double> pos;
        for (double e : eps)
            if (e > 0.0) pos.push_back(e);
        Json rows = Json::array();
        for (const auto& r : tau_halving_check(m.tau, pos, sp))
            rows.push_back(Json{{"eps", r.eps}, {"tau", r.destroyed_tau}, {"half_tau", r.destroyed_half_tau}});
        report["tau_check"] = rows;
    }
    ctx.write("kam_sweep.json", dump(report));
    std::cout << sw.to_csv();
    return 0;
}

int run_poincare(Context& ctx) {
    const auto& cfg = ctx.config;
    std::shared_ptr<const FlowField> flow;
    const std::string file = cfg.at("field_file").get<std::string>();
    if (!file.empty())
        flow = make_evaluator(load_field(file, 0).field);
    else
        flow = build_flow(cfg.at("field"));
    Section sec;
    sec.axis = cfg.at("section_axis").get<int>();
    if (sec.axis < 0 || sec.axis > 2) throw UsageError("section_axis must be 0, 1 or 2");
    sec.level = cfg.at("section_level").get<double>();
    PoincareOptions po;
    po.tol = cfg.at("tol").get<double>();
    std::mt19937_64 rng(cfg.at("rng_seed").get<std::uint64_t>());
    const int seeds = cfg.at("seeds").get<int>(), hits = cfg.at("hits").get<int>();
    std::string csv = "seed,hit,c0,c1,time,direction\n";
    for (int s = 0; s < seeds; ++s) {
        Vec3 x0{kTwoPi * uniform01(rng), kTwoPi * uniform01(rng), kTwoPi * uniform01(rng)};
        x0[sec.axis] = sec.level;
        auto h = poincare_hits(*flow, sec, x0, hits, po);
        for (const auto& hit : h.hits)
            csv += fmt::format("{},{},{:.17g},{:.17g},{:.17g},{}\n", s, hit.index, hit.coords[0], hit.coords[1],
                               hit.time, hit.direction);
    }
    ctx.write("poincare.csv", csv);
    return 0;
}

int run_nonmixing(Context& ctx) {
    const auto& cfg = ctx.config;
    const int n = cfg.at("n").get<int>();
    auto base = [&](const std::string& name) {
        auto sg = shear_gallery(name);
        if (!sg) throw UsageError(fmt::format("'{}' is not a shear gallery field", name));
        return std::make_pair(make_shear_field(sg->profile, sg->axis, n), perturbation_mode(sg->axis, n));
    };
    auto [ua, pa] = base(cfg.at("a").get<std::string>());
    auto [ub, pb] = base(cfg.at("b").get<std::string>());
    NonmixingOptions o;
    o.euler = euler_options_from(cfg.at("euler"));
    o.spectrum = spectrum_params_from(cfg.at("spectrum"));
    o.spectrum.rng_seed = cfg.at("rng_seed").get<std::uint64_t>();
    o.spectrum.threads = cfg.at("threads").get<int>();
    o.seeds = cfg.at("seeds").get<int>();
    auto rep = nonmixing_experiment(ua, pa, ub, pb, cfg.at("eps").get<double>(), cfg.at("T").get<double>(), o);
    ctx.write("nonmixing.csv", rep.to_csv());
    Json j{{"tag_a", rep.tag_a},         {"tag_b", rep.tag_b},         {"nonmixing", rep.nonmixing},
           {"min_own_a", rep.min_own_a}, {"min_own_b", rep.min_own_b}, {"max_cross", rep.max_cross},
           {"energy_a", rep.run_a.energy}, {"helicity_a", rep.run_a.helicity},
           {"energy_b", rep.run_b.energy}, {"helicity_b", rep.run_b.helicity},
           {"verdict", rep.verdict()}};
    ctx.write("nonmixing.json", dump(j));
    std::cout << rep.to_csv();
    std::cout << "verdict: " << rep.verdict() << "\n";
    return 0;
}

int run_adjust(Context& ctx) {
    const auto& cfg = ctx.config;
    const std::string in = cfg.at("field_file").get<std::string>();
    const std::string name = cfg.at("output").get<std::string>();
    if (!in.empty() && fs::exists(ctx.path(name)) && fs::equivalent(in, ctx.path(name)))
        throw UsageError("output would overwrite the input field");
    auto u = input_field(cfg);
    auto r = adjust_energy_helicity(u, cfg.at("energy").get<double>(), cfg.at("helicity").get<double>(),
                                    adjust_options_from(cfg.at("adjust")));
    Json j{{"unchanged", r.unchanged},
           {"t", r.t},
           {"lambda", r.lambda},
           {"helical_center", r.helical_center},
           {"energy_center", r.energy_center},
           {"ball_radius", r.ball_radius},
           {"threshold", r.threshold},
           {"energy", r.energy},
           {"helicity", r.helicity},
           {"curl_in_supports", r.curl_in_supports},
           {"curl_change_on_support", r.curl_change_on_support}};
    save_field(ctx.path(name), r.field, j.dump());
    ctx.outputs.push_back(name);
    ctx.write("adjust_report.json", dump(j));
    std::cout << fmt::format("E = {:.15g}, H = {:.15g}\n", r.energy, r.helicity);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Integrability spectrum experiments on the flat 3-torus"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_file, out_flag;
    int threads = 0;
    long long rng = -1;
    app.add_option("--config", config_file, "JSON file overlaid on the command defaults");
    app.add_option("--out", out_flag, "Output directory (default: $INTSPEC_OUT_DIR or .)");
    app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--rng", rng, "RNG seed")->check(CLI::NonNegativeNumber);
    app.add_flag("--print-config", "Print the resolved config and exit");

    Json flags = Json::object();
    auto set = [&flags](std::initializer_list<const char*> path, Json v) {
        Json* j = &flags;
        auto it = path.begin();
        for (; std::next(it) != path.end(); ++it) j = &(*j)[*it];
        (*j)[*it] = std::move(v);
    };

    // Field selection shared by several commands.
    struct FieldFlags {
        std::string gallery, file;
        int n = 0;
        double eps = NAN, delta = NAN;
    };
    std::map<std::string, FieldFlags> ff;
    auto field_opts = [&](CLI::App* sc, bool with_file) {
        auto& f = ff[sc->get_name()];
        sc->add_option("--gallery", f.gallery, "Gallery field name");
        sc->add_option("--n", f.n, "Resolution N")->check(CLI::PositiveNumber);
        sc->add_option("--eps", f.eps, "Perturbation amplitude (shear galleries)");
        sc->add_option("--delta", f.delta, "Knot tube parameter");
        if (with_file) sc->add_option("--field", f.file, "Input field file (SPF3)")->check(CLI::ExistingFile);
    };

    auto* make = app.add_subcommand("make-field", "Write a gallery field to an SPF3 file");
    field_opts(make, false);
    std::string make_out;
    make->add_option("-o,--output", make_out, "Output file name inside the output directory");

    auto* verify = app.add_subcommand("verify-steady", "Bernoulli and commutator residuals of a field");
    field_opts(verify, true);
    double verify_tol = NAN;
    verify->add_option("--tol", verify_tol, "Pass threshold");

    auto* evo = app.add_subcommand("evolve", "Pseudo-spectral Euler evolution");
    field_opts(evo, true);
    double evo_T = NAN, evo_dt = NAN, evo_snap = NAN;
    int evo_markers = -1;
    bool evo_filter = false;
    evo->add_option("--T", evo_T, "Final time");
    evo->add_option("--dt", evo_dt, "Time step");
    evo->add_option("--snapshot-interval", evo_snap, "Snapshot spacing");
    evo->add_option("--kelvin-markers", evo_markers, "Markers for the Kelvin transport check (0 = off)");
    evo->add_flag("--filter", evo_filter, "Enable the exponential filter (not ideal Euler)");

    auto* spec = app.add_subcommand("spectrum", "Estimate the integrability spectrum");
    field_opts(spec, true);
    int spec_seeds = 0;
    double spec_T = NAN, spec_floor = NAN;
    spec->add_option("--seeds", spec_seeds, "Number of seeds")->check(CLI::NonNegativeNumber);
    spec->add_option("--T", spec_T, "Tracing time per seed");
    spec->add_option("--speed-floor", spec_floor, "Mean speed below which a seed is undetermined");

    auto* kam = app.add_subcommand("kam-sweep", "Destroyed-tori fraction against eps");
    std::string kam_family, kam_profile;
    double kam_tau = NAN;
    std::vector<double> kam_eps;
    long kam_iter = 0;
    int kam_grid = 0;
    kam->add_option("--family", kam_family, "standard or profile");
    kam->add_option("--profile", kam_profile, "Profile name for --family profile");
    kam->add_option("--tau", kam_tau, "Twist of the standard family");
    kam->add_option("--eps", kam_eps, "Perturbation amplitudes")->delimiter(',');
    kam->add_option("--n-iter", kam_iter, "Map iterations per circle");
    kam->add_option("--grid", kam_grid, "Number of circles");

    auto* poin = app.add_subcommand("poincare", "Poincare section hits");
    field_opts(poin, true);
    int poin_axis = -1, poin_seeds = 0, poin_hits = 0;
    double poin_level = NAN;
    poin->add_option("--axis", poin_axis, "Section axis (0, 1, 2)");
    poin->add_option("--level", poin_level, "Section level");
    poin->add_option("--seeds", poin_seeds, "Number of seeds");
    poin->add_option("--hits", poin_hits, "Hits per seed");

    auto* nm = app.add_subcommand("nonmixing", "Non-mixing experiment for two shear fields");
    std::string nm_a, nm_b;
    double nm_eps = NAN, nm_T = NAN, nm_spec_T = NAN;
    int nm_n = 0, nm_seeds = 0;
    nm->add_option("--a", nm_a, "First base field (shear gallery)");
    nm->add_option("--b", nm_b, "Second base field (shear gallery)");
    nm->add_option("--eps", nm_eps, "Perturbation amplitude");
    nm->add_option("--T", nm_T, "Final time");
    nm->add_option("--n", nm_n, "Resolution N");
    nm->add_option("--seeds", nm_seeds, "Seeds per snapshot");
    nm->add_option("--trace-T", nm_spec_T, "Tracing time per seed");

    auto* adj = app.add_subcommand("adjust-invariants", "Set energy and helicity of a field");
    field_opts(adj, true);
    double adj_e = NAN, adj_h = NAN, adj_rb = NAN;
    std::string adj_out;
    adj->add_option("--energy", adj_e, "Target energy")->required();
    adj->add_option("--helicity", adj_h, "Target helicity")->required();
    adj->add_option("--ball-radius", adj_rb, "Radius of the correction balls");
    adj->add_option("-o,--output", adj_out, "Output file name inside the output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    CLI::App* sc = app.get_subcommands().front();
    Context ctx;
    ctx.command = sc->get_name();
    const auto t0 = std::chrono::steady_clock::now();
    try {
        Json user = Json::object();
        if (!config_file.empty()) user = Json::parse(read_file(config_file));
        if (ff.count(ctx.command)) {
            const auto& f = ff[ctx.command];
            if (!f.gallery.empty()) set({"field", "gallery"}, f.gallery);
            if (f.n > 0) set({"field", "n"}, f.n);
            if (!std::isnan(f.eps)) set({"field", "epsilon"}, f.eps);
            if (!std::isnan(f.delta)) set({"field", "delta"}, f.delta);
            if (!f.file.empty()) set({"field_file"}, f.file);
        }
        if (threads > 0) set({"threads"}, threads);
        if (rng >= 0) set({"rng_seed"}, static_cast<std::uint64_t>(rng));
        if (!make_out.empty()) set({"output"}, make_out);
        if (!std::isnan(verify_tol)) set({"tolerance"}, verify_tol);
        if (!std::isnan(evo_T)) set({"T"}, evo_T);
        if (!std::isnan(evo_dt)) set({"euler", "dt"}, evo_dt);
        if (!std::isnan(evo_snap)) set({"euler", "snapshot_interval"}, evo_snap);
        if (evo_filter) set({"euler", "filter"}, true);
        if (evo_markers >= 0) set({"kelvin_markers"}, evo_markers);
        if (spec_seeds > 0) set({"seeds"}, spec_seeds);
        if (!std::isnan(spec_T)) set({"spectrum", "T"}, spec_T);
        if (!std::isnan(spec_floor)) set({"spectrum", "speed_floor"}, spec_floor);
        if (!kam_family.empty()) set({"map", "family"}, kam_family);
        if (!kam_profile.empty()) set({"map", "profile"}, kam_profile);
        if (!std::isnan(kam_tau)) set({"map", "tau"}, kam_tau);
        if (!kam_eps.empty()) set({"eps"}, kam_eps);
        if (kam_iter > 0) set({"survival", "n_iter"}, kam_iter);
        if (kam_grid > 0) set({"survival", "grid"}, kam_grid);
        if (poin_axis >= 0) set({"section_axis"}, poin_axis);
        if (!std::isnan(poin_level)) set({"section_level"}, poin_level);
        if (poin_seeds > 0) set({"seeds"}, poin_seeds);
        if (poin_hits > 0) set({"hits"}, poin_hits);
        if (!nm_a.empty()) set({"a"}, nm_a);
        if (!nm_b.empty()) set({"b"}, nm_b);
        if (!std::isnan(nm_eps)) set({"eps"}, nm_eps);
        if (!std::isnan(nm_T)) set({"T"}, nm_T);
        if (nm_n > 0) set({"n"}, nm_n);
        if (nm_seeds > 0) set({"seeds"}, nm_seeds);
        if (!std::isnan(nm_spec_T)) set({"spectrum", "T"}, nm_spec_T);
        if (!std::isnan(adj_e)) set({"energy"}, adj_e);
        if (!std::isnan(adj_h)) set({"helicity"}, adj_h);
        if (!std::isnan(adj_rb)) set({"adjust", "ball_radius"}, adj_rb);
        if (!adj_out.empty()) set({"output"}, adj_out);

        // Defaults, then the config file, then flags.
        ctx.config = resolve_config(ctx.command, user);
        apply_overrides(ctx.config, flags);
        if (app.get_option("--print-config")->as<bool>()) {
            std::cout << dump(ctx.config);
            return 0;
        }
        ctx.out_dir = resolve_output_dir(out_flag);
        fs::create_directories(ctx.out_dir);

        int status = 0;
        if (ctx.command == "make-field") status = run_make_field(ctx);
        else if (ctx.command == "verify-steady") status = run_verify_steady(ctx);
        else if (ctx.command == "evolve") status = run_evolve(ctx);
        else if (ctx.command == "spectrum") status = run_spectrum(ctx);
        else if (ctx.command == "kam-sweep") status = run_kam_sweep(ctx);
        else if (ctx.command == "poincare") status = run_poincare(ctx);
        else if (ctx.command == "nonmixing") status = run_nonmixing(ctx);
        else if (ctx.command == "adjust-invariants") status = run_adjust(ctx);

        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_file_atomic(ctx.path(ctx.command + ".manifest.json"),
                          dump(make_manifest(ctx.command, ctx.config, wall, ctx.outputs)));
        return status;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n" << sc->help();
        return 2;
    } catch (const Json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
