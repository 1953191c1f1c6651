#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "intspec/field_eval.hpp"
#include "intspec/flowline.hpp"
#include "intspec/vec.hpp"

namespace intspec {

struct SpectrumParams {
    double T = 2000.0;
    double tol = 1e-10;
    double sample_dt = 0.1;
    double max_step = 1.0;
    double theta_qp = -6.0;    // convergence index gate
    double theta_ly = 0.02;    // Lyapunov gate
    double theta_hom = 1e-4;   // |n . rho| / |rho| gate
    int n_max = 8;             // homology search box |n_i| <= n_max
    int q_max = 50;            // Diophantine gate denominators
    double theta_dio = 1e-3;   // |r - p/q| > theta_dio / q^2
    // Seeds whose mean speed is at or below this are undetermined.
    double speed_floor = 0.0;
    std::uint64_t rng_seed = 42;
    int threads = 1;
};

enum class Verdict { ergodic_torus, periodic, chaotic, undetermined };
const char* verdict_name(Verdict v);

struct IsotopyTag {
    enum class Kind { homology, null_homologous, unknown };
    Kind kind = Kind::unknown;
    std::array<int, 3> n{0, 0, 0};  // primitive, first nonzero component positive
    std::string knot;               // "unknown", "unknot", "torus_knot(p,q)"

    static IsotopyTag homology_class(std::array<int, 3> n);
    static IsotopyTag null_homologous(std::string knot);
    std::string str() const;
    bool operator==(const IsotopyTag& o) const { return str() == o.str(); }
};

struct TorusVerdict {
    Verdict verdict = Verdict::undetermined;
    RotationEstimate rotation;
    double lyapunov = 0.0;
    IsotopyTag tag;
    // Rotation ratio on the torus (in [0, 1]) and whether it passed the gate.
    double ratio = 0.0;
    bool diophantine = false;
    std::string reason;
};

// Primitive n with |n|_inf <= n_max minimizing |n . rho| / |rho|; ties go to
// the shortest n.  rho ~ 0 relative to speed_scale gives null_homologous with
// the supplied knot label.
IsotopyTag homology_of_orbit(const Vec3& rho, double speed_scale, const SpectrumParams& p,
                             const std::string& knot = "unknown");

// Integer basis of {m in Z^3 : n . m = 0} for primitive n.
std::array<std::array<int, 3>, 2> orthogonal_lattice_basis(const std::array<int, 3>& n);

// True when |r - p/q| > theta / q^2 for every q <= q_max.
bool diophantine_gate(double r, int q_max, double theta);

TorusVerdict classify_seed(const FlowField& field, const Vec3& x0, const SpectrumParams& p);

struct TagEstimate {
    std::string tag;
    long count = 0;
    double kappa = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0;
};

// 95% Wilson score interval for k successes out of n.
std::array<double, 2> wilson_interval(long k, long n);

struct SeedRecord {
    int index;
    Vec3 x0;
    TorusVerdict verdict;
};

struct SpectrumEstimate {
    long n_seeds = 0;
    bool undefined = false;  // no seeds
    TagEstimate total;
    std::map<std::string, TagEstimate> tags;
    std::map<std::string, long> verdict_counts;
    SpectrumParams params;
    std::vector<SeedRecord> seeds;

    // kappa for a tag, 0 when absent.
    TagEstimate tag(const std::string& t) const;
    // Tag with the largest kappa ("" when none).
    std::string dominant() const;
    std::string to_json() const;
    std::string to_csv() const;
};

// Seeds are drawn uniformly on the torus from params.rng_seed and classified
// independently; results are ordered by seed index regardless of threads.
SpectrumEstimate estimate_spectrum(const FlowField& field, int n_seeds, const SpectrumParams& p);

// Pushforward of V by the volume-preserving shear (x, y, z) -> (x + a sin y, y, z).
// Keeps a reference to v.
std::unique_ptr<FlowField> shear_pushforward(const FlowField& v, double a);

// Attaches a tube chart to an evaluator (for fields built on knotted tubes).
std::unique_ptr<FlowField> with_chart(std::unique_ptr<FlowField> base, std::shared_ptr<const TubeChart> chart);

}  // namespace intspec
