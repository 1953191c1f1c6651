#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "intspec/adjust.hpp"
#include "intspec/euler.hpp"
#include "intspec/field_eval.hpp"
#include "intspec/kam.hpp"
#include "intspec/spectrum.hpp"

namespace intspec {

using Json = nlohmann::ordered_json;

std::string library_version();

// Every command's configuration with all defaults materialized.  Throws
// UsageError for an unknown command.
Json default_config(const std::string& command);
// Defaults overlaid with `user`.  Keys absent from the defaults are a
// UsageError, so typos cannot silently fall back to defaults.
Json resolve_config(const std::string& command, const Json& user);
// Overlays `overrides` on a resolved config with the same key checks.
void apply_overrides(Json& config, const Json& overrides);

Json to_json(const SpectrumParams& p);
SpectrumParams spectrum_params_from(const Json& j);
Json to_json(const EulerOptions& o);
EulerOptions euler_options_from(const Json& j);
Json to_json(const SurvivalParams& p);
SurvivalParams survival_params_from(const Json& j);
Json to_json(const AdjustOptions& o);
AdjustOptions adjust_options_from(const Json& j);

// Named fields.  Gallery names:
//   u{x,y,z}[-cos-sin|-sin-offset|-windowed]   shear fields (default cos-sin)
//   rot-u{x,y,z}[-profile]                      their curls
//   abc                                         ABC field (coefficients "abc")
//   two-integral                                grad f1 x grad f2
//   unknot, trefoil, knot-p,q                   knotted tube fields ("delta")
// A field spec is {"gallery", "n", "epsilon", "delta", "abc"}; epsilon adds
// that multiple of the perturbation mode of the shear axis.
Json default_field_spec();
SpectralField3 build_field(const Json& spec);

struct ShearGallery {
    TubeProfile profile;
    Axis axis = Axis::z;
};
// Profile and axis of a plain shear gallery name (u{x,y,z}[-profile]).
std::optional<ShearGallery> shear_gallery(const std::string& name);

// Flow field used for tracing.  Knotted galleries return the closed-form tube
// field; everything else an evaluator of the spectral field.
std::shared_ptr<const FlowField> build_flow(const Json& spec, const EvaluatorOptions& eval = {});

// Flag value, else INTSPEC_OUT_DIR, else ".".
std::string resolve_output_dir(const std::string& flag);

// Manifest embedding the resolved config, versions, seed and wall time.
Json make_manifest(const std::string& command, const Json& config, double wall_seconds,
                   const std::vector<std::string>& outputs);

}  // namespace intspec
