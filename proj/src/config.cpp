#include "intspec/config.hpp"

#include <cstdlib>

#include <fftw3.h>
#include <fmt/format.h>

#include "intspec/errors.hpp"
#include "intspec/field_core.hpp"
#include "intspec/knotted.hpp"
#include "intspec/steady_gallery.hpp"

namespace intspec {

std::string library_version() { return "0.1.0"; }

Json to_json(const SpectrumParams& p) {
    return Json{{"T", p.T},
                {"tol", p.tol},
                {"sample_dt", p.sample_dt},
                {"max_step", p.max_step},
                {"theta_qp", p.theta_qp},
                {"theta_ly", p.theta_ly},
                {"theta_hom", p.theta_hom},
                {"n_max", p.n_max},
                {"q_max", p.q_max},
                {"theta_dio", p.theta_dio},
                {"speed_floor", p.speed_floor}};
}

SpectrumParams spectrum_params_from(const Json& j) {
    SpectrumParams p;
    p.T = j.at("T").get<double>();
    p.tol = j.at("tol").get<double>();
    p.sample_dt = j.at("sample_dt").get<double>();
    p.max_step = j.at("max_step").get<double>();
    p.theta_qp = j.at("theta_qp").get<double>();
    p.theta_ly = j.at("theta_ly").get<double>();
    p.theta_hom = j.at("theta_hom").get<double>();
    p.n_max = j.at("n_max").get<int>();
    p.q_max = j.at("q_max").get<int>();
    p.theta_dio = j.at("theta_dio").get<double>();
    p.speed_floor = j.at("speed_floor").get<double>();
    return p;
}

Json to_json(const EulerOptions& o) {
    return Json{{"dt", o.dt},
                {"snapshot_interval", o.snapshot_interval},
                {"cfl_max", o.cfl_max},
                {"filter", o.filter},
                {"filter_alpha", o.filter_alpha},
                {"filter_order", o.filter_order},
                {"abort_drift", o.abort_drift}};
}

EulerOptions euler_options_from(const Json& j) {
    EulerOptions o;
    o.dt = j.at("dt").get<double>();
    o.snapshot_interval = j.at("snapshot_interval").get<double>();
    o.cfl_max = j.at("cfl_max").get<double>();
    o.filter = j.at("filter").get<bool>();
    o.filter_alpha = j.at("filter_alpha").get<double>();
    o.filter_order = j.at("filter_order").get<int>();
    o.abort_drift = j.at("abort_drift").get<double>();
    return o;
}

Json to_json(const SurvivalParams& p) {
    return Json{{"n_iter", p.n_iter},         {"grid", p.grid},   {"seed_x", p.seed_x},
                {"theta_qp", p.theta_qp},     {"q_max", p.q_max}, {"resonance_window", p.resonance_window}};
}

SurvivalParams survival_params_from(const Json& j) {
    SurvivalParams p;
    p.n_iter = j.at("n_iter").get<long>();
    p.grid = j.at("grid").get<int>();
    p.seed_x = j.at("seed_x").get<double>();
    p.theta_qp = j.at("theta_qp").get<double>();
    p.q_max = j.at("q_max").get<int>();
    p.resonance_window = j.at("resonance_window").get<double>();
    return p;
}

Json to_json(const AdjustOptions& o) {
    return Json{{"ball_radius", o.ball_radius},
                {"blob_width", o.blob_width},
                {"candidates", o.candidates},
                {"support_tol", o.support_tol},
                {"tol", o.tol}};
}

AdjustOptions adjust_options_from(const Json& j) {
    AdjustOptions o;
    o.ball_radius = j.at("ball_radius").get<double>();
    o.blob_width = j.at("blob_width").get<double>();
    o.candidates = j.at("candidates").get<int>();
    o.support_tol = j.at("support_tol").get<double>();
    o.tol = j.at("tol").get<double>();
    return o;
}

Json default_field_spec() {
    return Json{{"gallery", "uz-cos-sin"}, {"n", 32}, {"epsilon", 0.0}, {"delta", 0.5}, {"abc", {1.0, 1.0, 1.0}}};
}

namespace {

SpectrumParams default_spectrum() { return {}; }

Json with_common(Json j) {
    j["rng_seed"] = 42;
    j["threads"] = 1;
    return j;
}

// Recursive overlay; arrays and scalars replace, objects merge.
void overlay(Json& base, const Json& user, const std::string& where) {
    if (!user.is_object()) throw UsageError(fmt::format("{}: expected an object", where.empty() ? "config" : where));
    for (auto it = user.begin(); it != user.end(); ++it) {
        const std::string key = where.empty() ? it.key() : where + "." + it.key();
        if (!base.contains(it.key())) throw UsageError(fmt::format("unknown config key '{}'", key));
        Json& slot = base[it.key()];
        if (slot.is_object()) {
            overlay(slot, it.value(), key);
        } else {
            const bool num = slot.is_number() && it.value().is_number();
            if (!num && slot.type() != it.value().type())
                throw UsageError(fmt::format("config key '{}' has the wrong type", key));
            slot = it.value();
        }
    }
}

struct Gallery {
    enum class Kind { shear, rot_shear, abc, two_integral, knot } kind = Kind::shear;
    Axis axis = Axis::z;
    std::string profile = "cos-sin";
    KnotSpec knot;
};

Gallery parse_gallery(const std::string& name) {
    Gallery g;
    if (name == "abc") {
        g.kind = Gallery::Kind::abc;
        return g;
    }
    if (name == "two-integral") {
        g.kind = Gallery::Kind::two_integral;
        return g;
    }
    if (name == "unknot" || name == "trefoil" || name.rfind("knot-", 0) == 0) {
        g.kind = Gallery::Kind::knot;
        g.knot = KnotSpec::parse(name.rfind("knot-", 0) == 0 ? name.substr(5) : name);
        return g;
    }
    std::string s = name;
    if (s.rfind("rot-", 0) == 0) {
        g.kind = Gallery::Kind::rot_shear;
        s = s.substr(4);
    }
    if (s.size() < 2 || s[0] != 'u' || (s[1] != 'x' && s[1] != 'y' && s[1] != 'z'))
        throw UsageError(fmt::format("unknown gallery field '{}'", name));
    g.axis = parse_axis(std::string(1, s[1]));
    if (s.size() > 2) {
        if (s[2] != '-') throw UsageError(fmt::format("unknown gallery field '{}'", name));
        g.profile = s.substr(3);
        try {
            named_profile(g.profile);
        } catch (const DomainError&) {
            throw UsageError(fmt::format("unknown profile '{}' in gallery field '{}'", g.profile, name));
        }
    }
    return g;
}

TubeProfile knot_profile() { return bump_twist_profile(1.0, 0.5); }

}  // namespace

Json default_config(const std::string& command) {
    if (command == "make-field") return with_common(Json{{"field", default_field_spec()}, {"output", "field.spf3"}});
    if (command == "verify-steady")
        return with_common(Json{{"field", default_field_spec()}, {"field_file", ""}, {"tolerance", 1e-10}});
    if (command == "evolve") {
        Json f = default_field_spec();
        f["epsilon"] = 1e-2;
        return with_common(Json{{"field", f}, {"field_file", ""}, {"T", 1.0}, {"euler", to_json(EulerOptions{})}, {"kelvin_markers", 0}});
    }
    if (command == "spectrum")
        return with_common(
            Json{{"field", default_field_spec()}, {"field_file", ""}, {"seeds", 500}, {"spectrum", to_json(default_spectrum())}});
    if (command == "kam-sweep")
        return with_common(Json{{"map", {{"family", "standard"}, {"tau", 1.0}, {"profile", "sin-offset"},
                                         {"z_lo", -1.0}, {"z_hi", 1.0}}},
                                {"eps", {0.0, 1e-4, 3e-4, 1e-3, 3e-3, 1e-2}},
                                {"survival", to_json(SurvivalParams{})},
                                {"tau_check", true}});
    if (command == "poincare")
        return with_common(Json{{"field", default_field_spec()},
                                {"field_file", ""},
                                {"section_axis", 1},
                                {"section_level", 0.0},
                                {"seeds", 10},
                                {"hits", 200},
                                {"tol", 1e-10}});
    if (command == "nonmixing") {
        Json sp = to_json(default_spectrum());
        return with_common(Json{{"a", "uz"},
                                {"b", "ux"},
                                {"n", 32},
                                {"eps", 1e-2},
                                {"T", 2.0},
                                {"seeds", 100},
                                {"euler", [] {
                                     Json e = to_json(EulerOptions{});
                                     e["snapshot_interval"] = 0.5;
                                     return e;
                                 }()},
                                {"spectrum", sp}});
    }
    if (command == "adjust-invariants")
        return with_common(Json{{"field", default_field_spec()},
                                {"field_file", ""},
                                {"output", "adjusted.spf3"},
                                {"energy", 1.0},
                                {"helicity", 0.0},
                                {"adjust", to_json(AdjustOptions{})}});
    throw UsageError(fmt::format("unknown command '{}'", command));
}

Json resolve_config(const std::string& command, const Json& user) {
    Json base = default_config(command);
    if (!user.is_null()) overlay(base, user, "");
    return base;
}

void apply_overrides(Json& config, const Json& overrides) { overlay(config, overrides, ""); }

SpectralField3 build_field(const Json& spec) {
    Json s = default_field_spec();
    overlay(s, spec, "field");
    const int n = s.at("n").get<int>();
    if (n < 4 || n % 2 != 0) throw DomainError(fmt::format("resolution must be even and >= 4 (got {})", n));
    const Gallery g = parse_gallery(s.at("gallery").get<std::string>());
    const double eps = s.at("epsilon").get<double>();
    SpectralField3 v;
    switch (g.kind) {
        case Gallery::Kind::shear:
        case Gallery::Kind::rot_shear: {
            v = make_shear_field(named_profile(g.profile), g.axis, n);
            if (g.kind == Gallery::Kind::rot_shear) v = curl(v);
            if (eps != 0.0) v = v + eps * perturbation_mode(g.axis, n);
            break;
        }
        case Gallery::Kind::abc: {
            auto c = s.at("abc").get<std::vector<double>>();
            if (c.size() != 3) throw UsageError("abc needs three coefficients");
            auto f = abc_field(c[0], c[1], c[2]);
            v = leray_project(sample_field(n, [&](const Vec3& x) { return f->value(x); }));
            break;
        }
        case Gallery::Kind::two_integral: {
            auto f = two_integral_field();
            v = leray_project(sample_field(n, [&](const Vec3& x) { return f->value(x); }));
            break;
        }
        case Gallery::Kind::knot: {
            KnotOptions o;
            o.n = n;
            v = build_knotted_field(g.knot, s.at("delta").get<double>(), knot_profile(), o).field;
            break;
        }
    }
    if (g.kind != Gallery::Kind::shear && g.kind != Gallery::Kind::rot_shear && eps != 0.0)
        throw UsageError("epsilon applies to shear galleries only");
    return v;
}

std::optional<ShearGallery> shear_gallery(const std::string& name) {
    const Gallery g = parse_gallery(name);
    if (g.kind != Gallery::Kind::shear) return std::nullopt;
    return ShearGallery{named_profile(g.profile), g.axis};
}

std::shared_ptr<const FlowField> build_flow(const Json& spec, const EvaluatorOptions& eval) {
    Json s = default_field_spec();
    overlay(s, spec, "field");
    const Gallery g = parse_gallery(s.at("gallery").get<std::string>());
    if (g.kind == Gallery::Kind::knot) {
        KnotOptions o;
        o.n = s.at("n").get<int>();
        return build_knotted_field(g.knot, s.at("delta").get<double>(), knot_profile(), o).exact;
    }
    return make_evaluator(build_field(s), eval);
}

std::string resolve_output_dir(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* e = std::getenv("INTSPEC_OUT_DIR"); e && *e) return e;
    return ".";
}

Json make_manifest(const std::string& command, const Json& config, double wall_seconds,
                   const std::vector<std::string>& outputs) {
    Json m;
    m["command"] = command;
    m["config"] = config;
    m["rng_seed"] = config.contains("rng_seed") ? config["rng_seed"] : Json(nullptr);
    m["versions"] = Json{{"intspec", library_version()},
                         {"fftw", std::string(fftw_version)},
                         {"fmt", FMT_VERSION},
                         {"nlohmann_json", fmt::format("{}.{}.{}", NLOHMANN_JSON_VERSION_MAJOR,
                                                       NLOHMANN_JSON_VERSION_MINOR, NLOHMANN_JSON_VERSION_PATCH)}};
    m["normalization"] = SpectralField3::kNormalization;
    m["wall_seconds"] = wall_seconds;
    m["outputs"] = outputs;
    return m;
}

}  // namespace intspec
