#ifndef CONCL_SCENARIO_HPP
#define CONCL_SCENARIO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "concl/dynamics.hpp"
#include "concl/graph_ce.hpp"

namespace concl::scenario {

struct ParseIssue {
    int line = 0;
    std::string message;
};

struct GraphCfg {
    std::size_t n = 2;
    std::size_t dimension = 1;
    std::string placement = "grid"; // grid | uniform-random
    std::uint64_t seed = 0;
    bool has_seed = false;
    std::string weights = "uniform"; // uniform | explicit
    std::vector<double> weight_values;
};

struct Eta0Cfg {
    std::string kind = "constant"; // constant | gaussian-kernel
    double value = 1.0;
    double length = 1.0;
};

struct OmegaCfg {
    std::string kind = "constant"; // constant | kernel
    double value = 1.0;
    std::vector<double> table; // n^3 entries for kernel kind
    double omega_star = -1.0;  // unset: constant -> value, kernel -> 0
};

struct VelocityCfg {
    std::string kind = "alpha";        // alpha | kernel | static-kernel
    std::string alpha_kind = "identity"; // sigmoid | tanh | identity
    double alpha_gain = 1.0;
    double alpha_amplitude = 1.0;
    double alpha_scale = 1.0;
    std::string kernel = "gaussian"; // gaussian | quadratic
    double kernel_length = 1.0;
    std::vector<double> reference; // static-kernel; defaults to init r
};

struct FluxCfg {
    std::string kind = "upwind"; // upwind | product-mean | product-max
};

struct InitRCfg {
    std::string kind = "constant"; // constant | uniform-random | indicator | explicit
    double value = 1.0;
    std::uint64_t seed = 0;
    bool has_seed = false;
    double lo = 0.0;
    double hi = 1.0;
    std::vector<std::size_t> subset;
    std::vector<double> values;
};

struct IntegratorCfg {
    std::string scheme = "rk4-with-exact-eta"; // rk4-coupled | rk4-with-exact-eta | euler
    double dt = 1e-3;
    double t_end = 1.0;
    std::size_t record_stride = 1;
};

struct OutputCfg {
    std::string path = "out";
    std::string prefix = "run";
    bool csv = true;
};

struct RunCfg {
    std::string mode = "plain"; // plain | dissipation | stability | picard | monokinetic
};

struct PairCfg {
    std::size_t perturb_vertex = 0;
    double perturb_eps = 1e-3;
    std::vector<double> init_r2; // overrides the perturbation when nonempty
};

struct PicardCfg {
    double horizon = 0.1;
    double grid_dt = 2.5e-4;
    double tol = 1e-10;
    int max_iters = 60;
};

struct AdvectCfg {
    double dt = 1e-3;
};

struct ScenarioConfig {
    GraphCfg graph;
    Eta0Cfg eta0;
    OmegaCfg omega;
    VelocityCfg velocity;
    FluxCfg flux;
    InitRCfg init_r;
    IntegratorCfg integrator;
    OutputCfg output;
    RunCfg run;
    PairCfg pair;
    PicardCfg picard;
    AdvectCfg advect;
};

struct ParseResult {
    ScenarioConfig config;
    std::vector<ParseIssue> issues;
    bool ok() const { return issues.empty(); }
};

/// Line-oriented `section.key = value` parser; collects every violation, not
/// just the first.
ParseResult parse_config(const std::string& text);

std::vector<std::string> preset_names();
/// Embedded config text for a named preset; throws invalid_input on unknown
/// names.
std::string preset_text(const std::string& name);

/// Everything a runner needs, assembled and validated from a config.
struct BuiltScenario {
    Model model;
    CoupledState init;
    BoundsLedger ledger;
    bool section5 = false; // alpha velocity, r0 >= 0, eta0 > 0, omega_* > 0
};

BuiltScenario build(const ScenarioConfig& cfg);

/// Integrator options as configured (scheme, dt, t_end, record stride).
IntegrateOptions integrate_options(const ScenarioConfig& cfg);

struct RunOutcome {
    int exit_code = 0; // 0 ok, 2 parse, 3 blow-up, 4 invariant violation
    std::vector<std::string> files;
    std::string message;
};

/// Executes the configured scenario, writing the trajectory CSV and a
/// summary. Deterministic for a fixed config.
RunOutcome run(const ScenarioConfig& cfg);

struct VerifyRow {
    std::string name;
    bool pass = true;
    std::string detail;
};

struct VerifyOutcome {
    std::vector<VerifyRow> rows;
    bool all_pass = true;
};

/// Runs the invariant suites for the configured scenario and returns the
/// pass/fail table.
VerifyOutcome verify(const ScenarioConfig& cfg);

} // namespace concl::scenario

#endif
