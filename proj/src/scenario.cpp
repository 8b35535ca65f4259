#include "concl/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "concl/metrics.hpp"

namespace concl::scenario {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

struct Parser {
    std::vector<ParseIssue>& issues;
    int line = 0;

    void fail(const std::string& msg) { issues.push_back({line, msg}); }

    bool number(const std::string& v, double& out, const std::string& key) {
        try {
            std::size_t used = 0;
            out = std::stod(v, &used);
            if (used != v.size() || !std::isfinite(out))
                throw std::invalid_argument("bad");
            return true;
        } catch (...) {
            fail(key + ": expected a finite number, got '" + v + "'");
            return false;
        }
    }

    bool unsigned_int(const std::string& v, std::uint64_t& out,
                      const std::string& key) {
        try {
            std::size_t used = 0;
            const long long x = std::stoll(v, &used);
            if (used != v.size() || x < 0) throw std::invalid_argument("bad");
            out = static_cast<std::uint64_t>(x);
            return true;
        } catch (...) {
            fail(key + ": expected a nonnegative integer, got '" + v + "'");
            return false;
        }
    }

    bool number_list(const std::string& v, std::vector<double>& out,
                     const std::string& key) {
        out.clear();
        for (const auto& tok : split_csv(v)) {
            double x = 0;
            if (!number(tok, x, key)) return false;
            out.push_back(x);
        }
        return true;
    }

    bool index_list(const std::string& v, std::vector<std::size_t>& out,
                    const std::string& key) {
        out.clear();
        for (const auto& tok : split_csv(v)) {
            std::uint64_t x = 0;
            if (!unsigned_int(tok, x, key)) return false;
            out.push_back(static_cast<std::size_t>(x));
        }
        return true;
    }

    bool boolean(const std::string& v, bool& out, const std::string& key) {
        if (v == "on" || v == "true" || v == "yes") {
            out = true;
            return true;
        }
        if (v == "off" || v == "false" || v == "no") {
            out = false;
            return true;
        }
        fail(key + ": expected on/off, got '" + v + "'");
        return false;
    }

    bool one_of(const std::string& v, std::initializer_list<const char*> opts,
                const std::string& key) {
        for (const char* o : opts)
            if (v == o) return true;
        std::string msg = key + ": '" + v + "' is not one of {";
        bool first = true;
        for (const char* o : opts) {
            if (!first) msg += ", ";
            msg += o;
            first = false;
        }
        fail(msg + "}");
        return false;
    }
};

} // namespace

ParseResult parse_config(const std::string& text) {
    ParseResult res;
    ScenarioConfig& c = res.config;
    Parser p{res.issues};

    bool graph_seed_needed = false, init_seed_needed = false;
    int placement_line = 0, init_kind_line = 0;

    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        p.line = lineno;
        const auto hash = raw.find('#');
        std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            p.fail("expected 'section.key = value'");
            continue;
        }
        const std::string key = trim(s.substr(0, eq));
        const std::string val = trim(s.substr(eq + 1));
        if (key.empty() || val.empty()) {
            p.fail("expected 'section.key = value'");
            continue;
        }

        if (key == "graph.n") {
            std::uint64_t n = 0;
            if (p.unsigned_int(val, n, key)) {
                if (n < 1)
                    p.fail("graph.n must be >= 1");
                else
                    c.graph.n = static_cast<std::size_t>(n);
            }
        } else if (key == "graph.dimension") {
            std::uint64_t d = 0;
            if (p.unsigned_int(val, d, key)) {
                if (d < 1 || d > 3)
                    p.fail("graph.dimension must be 1, 2 or 3");
                else
                    c.graph.dimension = static_cast<std::size_t>(d);
            }
        } else if (key == "graph.placement") {
            if (p.one_of(val, {"grid", "uniform-random"}, key)) {
                c.graph.placement = val;
                if (val == "uniform-random") {
                    graph_seed_needed = true;
                    placement_line = lineno;
                }
            }
        } else if (key == "graph.seed") {
            c.graph.has_seed = p.unsigned_int(val, c.graph.seed, key);
        } else if (key == "graph.weights") {
            if (p.one_of(val, {"uniform", "explicit"}, key)) c.graph.weights = val;
        } else if (key == "graph.weights_values") {
            p.number_list(val, c.graph.weight_values, key);
        } else if (key == "eta0.kind") {
            if (p.one_of(val, {"constant", "gaussian-kernel"}, key))
                c.eta0.kind = val;
        } else if (key == "eta0.value") {
            p.number(val, c.eta0.value, key);
        } else if (key == "eta0.length") {
            if (p.number(val, c.eta0.length, key) && !(c.eta0.length > 0))
                p.fail("eta0.length must be > 0");
        } else if (key == "omega.kind") {
            if (p.one_of(val, {"constant", "kernel"}, key)) c.omega.kind = val;
        } else if (key == "omega.value") {
            p.number(val, c.omega.value, key);
        } else if (key == "omega.table") {
            p.number_list(val, c.omega.table, key);
        } else if (key == "omega.omega_star") {
            p.number(val, c.omega.omega_star, key);
        } else if (key == "velocity.kind") {
            if (p.one_of(val, {"alpha", "kernel", "static-kernel"}, key))
                c.velocity.kind = val;
        } else if (key == "velocity.alpha_kind") {
            if (p.one_of(val, {"sigmoid", "tanh", "identity"}, key))
                c.velocity.alpha_kind = val;
        } else if (key == "velocity.alpha_gain") {
            if (p.number(val, c.velocity.alpha_gain, key) &&
                !(c.velocity.alpha_gain > 0))
                p.fail("velocity.alpha_gain must be > 0");
        } else if (key == "velocity.alpha_amplitude") {
            if (p.number(val, c.velocity.alpha_amplitude, key) &&
                !(c.velocity.alpha_amplitude > 0))
                p.fail("velocity.alpha_amplitude must be > 0");
        } else if (key == "velocity.alpha_scale") {
            if (p.number(val, c.velocity.alpha_scale, key) &&
                !(c.velocity.alpha_scale > 0))
                p.fail("velocity.alpha_scale must be > 0");
        } else if (key == "velocity.kernel") {
            if (p.one_of(val, {"gaussian", "quadratic"}, key))
                c.velocity.kernel = val;
        } else if (key == "velocity.kernel_length") {
            if (p.number(val, c.velocity.kernel_length, key) &&
                !(c.velocity.kernel_length > 0))
                p.fail("velocity.kernel_length must be > 0");
        } else if (key == "velocity.reference") {
            p.number_list(val, c.velocity.reference, key);
        } else if (key == "flux.kind") {
            if (p.one_of(val, {"upwind", "product-mean", "product-max"}, key))
                c.flux.kind = val;
        } else if (key == "init_r.kind") {
            if (p.one_of(val, {"constant", "uniform-random", "indicator", "explicit"},
                         key)) {
                c.init_r.kind = val;
                if (val == "uniform-random") {
                    init_seed_needed = true;
                    init_kind_line = lineno;
                }
            }
        } else if (key == "init_r.value") {
            p.number(val, c.init_r.value, key);
        } else if (key == "init_r.seed") {
            c.init_r.has_seed = p.unsigned_int(val, c.init_r.seed, key);
        } else if (key == "init_r.lo") {
            p.number(val, c.init_r.lo, key);
        } else if (key == "init_r.hi") {
            p.number(val, c.init_r.hi, key);
        } else if (key == "init_r.subset") {
            p.index_list(val, c.init_r.subset, key);
        } else if (key == "init_r.values") {
            p.number_list(val, c.init_r.values, key);
        } else if (key == "integrator.scheme") {
            if (p.one_of(val, {"rk4-coupled", "rk4-with-exact-eta", "euler"}, key))
                c.integrator.scheme = val;
        } else if (key == "integrator.dt") {
            if (p.number(val, c.integrator.dt, key) && !(c.integrator.dt > 0))
                p.fail("integrator.dt must be > 0");
        } else if (key == "integrator.t_end") {
            if (p.number(val, c.integrator.t_end, key) && !(c.integrator.t_end > 0))
                p.fail("integrator.t_end must be > 0");
        } else if (key == "integrator.record_stride") {
            std::uint64_t s = 0;
            if (p.unsigned_int(val, s, key)) {
                if (s < 1)
                    p.fail("integrator.record_stride must be >= 1");
                else
                    c.integrator.record_stride = static_cast<std::size_t>(s);
            }
        } else if (key == "output.path") {
            c.output.path = val;
        } else if (key == "output.prefix") {
            c.output.prefix = val;
        } else if (key == "output.csv") {
            p.boolean(val, c.output.csv, key);
        } else if (key == "run.mode") {
            if (p.one_of(val,
                         {"plain", "dissipation", "stability", "picard",
                          "monokinetic"},
                         key))
                c.run.mode = val;
        } else if (key == "pair.perturb_vertex") {
            std::uint64_t v = 0;
            if (p.unsigned_int(val, v, key))
                c.pair.perturb_vertex = static_cast<std::size_t>(v);
        } else if (key == "pair.perturb_eps") {
            p.number(val, c.pair.perturb_eps, key);
        } else if (key == "pair.init_r2") {
            p.number_list(val, c.pair.init_r2, key);
        } else if (key == "picard.horizon") {
            if (p.number(val, c.picard.horizon, key) && !(c.picard.horizon > 0))
                p.fail("picard.horizon must be > 0");
        } else if (key == "picard.grid_dt") {
            if (p.number(val, c.picard.grid_dt, key) && !(c.picard.grid_dt > 0))
                p.fail("picard.grid_dt must be > 0");
        } else if (key == "picard.tol") {
            if (p.number(val, c.picard.tol, key) && !(c.picard.tol > 0))
                p.fail("picard.tol must be > 0");
        } else if (key == "picard.max_iters") {
            std::uint64_t v = 0;
            if (p.unsigned_int(val, v, key)) c.picard.max_iters = static_cast<int>(v);
        } else if (key == "advect.dt") {
            if (p.number(val, c.advect.dt, key) && !(c.advect.dt > 0))
                p.fail("advect.dt must be > 0");
        } else {
            p.fail("unknown key '" + key + "'");
        }
    }

    // cross-field invariants, reported at the most relevant line
    p.line = placement_line;
    if (graph_seed_needed && !res.config.graph.has_seed)
        p.fail("graph.placement = uniform-random requires graph.seed");
    p.line = init_kind_line;
    if (init_seed_needed && !res.config.init_r.has_seed)
        p.fail("init_r.kind = uniform-random requires init_r.seed");
    p.line = 0;
    if (c.init_r.kind == "uniform-random" && !(c.init_r.lo <= c.init_r.hi))
        p.fail("init_r.lo must be <= init_r.hi");
    if (c.graph.weights == "explicit" &&
        c.graph.weight_values.size() != c.graph.n)
        p.fail("graph.weights_values must list exactly graph.n weights");
    if (c.init_r.kind == "explicit" && c.init_r.values.size() != c.graph.n)
        p.fail("init_r.values must list exactly graph.n values");
    if (c.init_r.kind == "indicator")
        for (std::size_t i : c.init_r.subset)
            if (i >= c.graph.n) p.fail("init_r.subset index out of range");
    if (c.omega.kind == "kernel" &&
        c.omega.table.size() != c.graph.n * c.graph.n * c.graph.n)
        p.fail("omega.table must list n^3 entries");
    if (c.velocity.kind == "static-kernel" && !c.velocity.reference.empty() &&
        c.velocity.reference.size() != c.graph.n)
        p.fail("velocity.reference must list graph.n values");

    // a section-5 scenario (pointwise monotone velocity) needs a strongly
    // connected graph and nonnegative initial mass
    if (c.velocity.kind == "alpha") {
        if (c.eta0.kind == "constant" && !(c.eta0.value > 0))
            p.fail("eta0.value must be > 0 for alpha (pointwise) velocities");
        const bool maybe_negative =
            (c.init_r.kind == "constant" && c.init_r.value < 0) ||
            (c.init_r.kind == "uniform-random" && c.init_r.lo < 0) ||
            (c.init_r.kind == "indicator" && c.init_r.value < 0);
        if (maybe_negative)
            p.fail("init_r must be nonnegative for alpha (pointwise) velocities");
        if (c.init_r.kind == "explicit")
            for (double v : c.init_r.values)
                if (v < 0)
                    p.fail(
                        "init_r.values must be nonnegative for alpha velocities");
    }
    if (c.run.mode == "dissipation" && c.velocity.kind != "static-kernel")
        p.fail("run.mode = dissipation requires velocity.kind = static-kernel");
    if (c.run.mode == "dissipation" && c.flux.kind != "upwind")
        p.fail("run.mode = dissipation requires flux.kind = upwind");
    if (!c.pair.init_r2.empty() && c.pair.init_r2.size() != c.graph.n)
        p.fail("pair.init_r2 must list graph.n values");
    if (c.pair.perturb_vertex >= c.graph.n)
        p.fail("pair.perturb_vertex out of range");

    return res;
}

// --- presets -----------------------------------------------------------------

namespace {

const std::map<std::string, std::string>& preset_table() {
    static const std::map<std::string, std::string> presets = {
        {"consensus-2", R"(# two-vertex consensus run
graph.n = 2
eta0.kind = constant
eta0.value = 1
omega.kind = constant
omega.value = 1
velocity.kind = alpha
velocity.alpha_kind = identity
flux.kind = upwind
init_r.kind = indicator
init_r.subset = 0
init_r.value = 2
integrator.scheme = rk4-with-exact-eta
integrator.dt = 1e-3
integrator.t_end = 10
integrator.record_stride = 10
output.prefix = consensus-2
)"},
        {"consensus-8", R"(# eight-vertex consensus run
graph.n = 8
eta0.kind = constant
eta0.value = 1
omega.kind = constant
omega.value = 1
velocity.kind = alpha
velocity.alpha_kind = identity
flux.kind = upwind
init_r.kind = uniform-random
init_r.seed = 8
init_r.lo = 0
init_r.hi = 2
integrator.dt = 1e-3
integrator.t_end = 20
integrator.record_stride = 20
output.prefix = consensus-8
)"},
        {"consensus-64", R"(# sixty-four-vertex consensus run
graph.n = 64
eta0.kind = constant
eta0.value = 1
omega.kind = constant
omega.value = 1
velocity.kind = alpha
velocity.alpha_kind = identity
flux.kind = upwind
init_r.kind = uniform-random
init_r.seed = 64
init_r.lo = 0
init_r.hi = 2
integrator.dt = 1e-3
integrator.t_end = 20
integrator.record_stride = 100
output.prefix = consensus-64
)"},
        {"envelope", R"(# sup/inf Bernoulli envelopes alongside a sigmoid run
graph.n = 8
eta0.kind = constant
eta0.value = 1
omega.kind = constant
omega.value = 1
velocity.kind = alpha
velocity.alpha_kind = sigmoid
velocity.alpha_gain = 1
flux.kind = upwind
init_r.kind = uniform-random
init_r.seed = 5
init_r.lo = 0
init_r.hi = 2
integrator.dt = 1e-3
integrator.t_end = 10
integrator.record_stride = 10
output.prefix = envelope
)"},
        {"dissipation", R"(# paired monokinetic runs under a static velocity
graph.n = 4
eta0.kind = gaussian-kernel
eta0.length = 1
omega.kind = constant
omega.value = 1
velocity.kind = static-kernel
velocity.kernel = gaussian
velocity.kernel_length = 1
flux.kind = upwind
init_r.kind = explicit
init_r.values = 2, 1, 0.5, 0.5
run.mode = dissipation
pair.perturb_vertex = 0
pair.perturb_eps = 1e-3
integrator.dt = 1e-3
integrator.t_end = 2
integrator.record_stride = 10
output.prefix = dissipation
)"},
        {"stability", R"(# stability of the push-forward solutions
graph.n = 2
eta0.kind = constant
eta0.value = 1
omega.kind = constant
omega.value = 1
velocity.kind = alpha
velocity.alpha_kind = identity
flux.kind = upwind
init_r.kind = indicator
init_r.subset = 0
init_r.value = 2
run.mode = stability
pair.perturb_vertex = 0
pair.perturb_eps = 1e-3
integrator.dt = 5e-4
integrator.t_end = 1
advect.dt = 1e-3
output.prefix = stability
)"},
        {"picard", R"(# fixed-point solver against the one-step integrator
graph.n = 2
eta0.kind = constant
eta0.value = 1
omega.kind = constant
omega.value = 1
velocity.kind = alpha
velocity.alpha_kind = identity
flux.kind = upwind
init_r.kind = indicator
init_r.subset = 0
init_r.value = 2
run.mode = picard
picard.horizon = 0.1
picard.grid_dt = 2.5e-4
picard.tol = 1e-10
output.prefix = picard
)"},
        {"eta-positivity", R"(# edge-weight floor along the relaxation
graph.n = 4
eta0.kind = constant
eta0.value = 2
omega.kind = constant
omega.value = 1
velocity.kind = alpha
velocity.alpha_kind = identity
flux.kind = upwind
init_r.kind = indicator
init_r.subset = 0
init_r.value = 2
integrator.dt = 1e-3
integrator.t_end = 5
integrator.record_stride = 10
output.prefix = eta-positivity
)"},
        {"mass-check", R"(# mass conservation outside the upwind setting
graph.n = 8
eta0.kind = gaussian-kernel
eta0.length = 1
omega.kind = constant
omega.value = 1
velocity.kind = kernel
velocity.kernel = gaussian
velocity.kernel_length = 1
flux.kind = product-mean
init_r.kind = uniform-random
init_r.seed = 3
init_r.lo = -1
init_r.hi = 2
integrator.dt = 1e-3
integrator.t_end = 5
integrator.record_stride = 10
output.prefix = mass-check
)"},
        {"monokinetic", R"(# push-forward atoms against the vertex densities
graph.n = 4
eta0.kind = constant
eta0.value = 1
omega.kind = constant
omega.value = 1
velocity.kind = alpha
velocity.alpha_kind = sigmoid
velocity.alpha_gain = 1
flux.kind = upwind
init_r.kind = uniform-random
init_r.seed = 11
init_r.lo = 0
init_r.hi = 2
run.mode = monokinetic
integrator.dt = 5e-4
integrator.t_end = 10
integrator.record_stride = 1
advect.dt = 1e-3
output.prefix = monokinetic
)"},
    };
    return presets;
}

} // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const auto& [k, v] : preset_table()) names.push_back(k);
    return names;
}

std::string preset_text(const std::string& name) {
    const auto& t = preset_table();
    const auto it = t.find(name);
    if (it == t.end()) {
        std::string known;
        for (const auto& [k, v] : t) {
            if (!known.empty()) known += ", ";
            known += k;
        }
        throw invalid_input("unknown preset '" + name + "'; known presets: " +
                            known);
    }
    return it->second;
}

// --- building ----------------------------------------------------------------

namespace {

std::vector<double> make_points(const GraphCfg& g) {
    const std::size_t n = g.n, d = g.dimension;
    std::vector<double> pts(n * d, 0.0);
    if (g.placement == "uniform-random") {
        std::mt19937_64 rng(g.seed);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (double& x : pts) x = unif(rng);
        return pts;
    }
    // grid: side^d lattice in [0,1]^d, first n points in row-major order
    std::size_t side = 1;
    auto capacity = [&](std::size_t s) {
        std::size_t c = 1;
        for (std::size_t k = 0; k < d; ++k) c *= s;
        return c;
    };
    while (capacity(side) < n) ++side;
    const double step = side > 1 ? 1.0 / static_cast<double>(side - 1) : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t rem = i;
        for (std::size_t c = 0; c < d; ++c) {
            pts[i * d + c] = static_cast<double>(rem % side) * step;
            rem /= side;
        }
    }
    return pts;
}

VertexDensity make_init_r(const InitRCfg& cfg, std::size_t n) {
    if (cfg.kind == "constant") return VertexDensity(n, cfg.value);
    if (cfg.kind == "explicit") return VertexDensity(cfg.values);
    if (cfg.kind == "indicator") {
        VertexDensity r(n, 0.0);
        for (std::size_t i : cfg.subset) r[i] = cfg.value;
        return r;
    }
    // uniform-random
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unif(cfg.lo, cfg.hi);
    VertexDensity r(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) r[i] = unif(rng);
    return r;
}

} // namespace

BuiltScenario build(const ScenarioConfig& cfg) {
    const std::size_t n = cfg.graph.n;
    std::vector<double> pts = make_points(cfg.graph);
    BaseMeasure mu =
        cfg.graph.weights == "explicit"
            ? BaseMeasure(std::move(pts), cfg.graph.dimension,
                          cfg.graph.weight_values)
            : BaseMeasure::uniform(std::move(pts), cfg.graph.dimension);

    VertexDensity r0 = make_init_r(cfg.init_r, n);
    if (r0.size() != n) throw invalid_input("build: init_r size mismatch");

    // eta0
    EdgeField eta0(n, Symmetry::Symmetric);
    if (cfg.eta0.kind == "constant") {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) eta0.set(i, j, cfg.eta0.value);
    } else {
        const double l2 = 2.0 * cfg.eta0.length * cfg.eta0.length;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const double v = std::exp(-mu.dist2(i, j) / l2);
                eta0.set(i, j, v);
                eta0.set(j, i, v);
            }
    }

    // omega
    OmegaSpec omega =
        cfg.omega.kind == "constant"
            ? OmegaSpec::constant(cfg.omega.value)
            : OmegaSpec::kernel(n, cfg.omega.table,
                                cfg.omega.omega_star < 0 ? 0.0
                                                         : cfg.omega.omega_star);

    // velocity
    VelocitySpec velocity;
    if (cfg.velocity.kind == "alpha") {
        const double hi = std::max(r0.sup_norm(), 1e-6);
        if (cfg.velocity.alpha_kind == "sigmoid")
            velocity = VelocitySpec::from_alpha(
                AlphaProfile::sigmoid(cfg.velocity.alpha_gain, 0.0, hi));
        else if (cfg.velocity.alpha_kind == "tanh")
            velocity = VelocitySpec::from_alpha(AlphaProfile::tanh_scaled(
                cfg.velocity.alpha_amplitude, cfg.velocity.alpha_scale, 0.0, hi));
        else
            velocity =
                VelocitySpec::from_alpha(AlphaProfile::identity_on_box(0.0, hi));
    } else {
        InteractionKernelSpec kernel =
            cfg.velocity.kernel == "gaussian"
                ? InteractionKernelSpec::gaussian(mu, cfg.velocity.kernel_length)
                : InteractionKernelSpec::quadratic(mu);
        if (cfg.velocity.kind == "kernel") {
            velocity = VelocitySpec::from_kernel(std::move(kernel));
        } else {
            const VertexDensity ref = cfg.velocity.reference.empty()
                                          ? r0
                                          : VertexDensity(cfg.velocity.reference);
            velocity = VelocitySpec::static_kernel(kernel, ref, mu);
        }
    }

    // flux
    FluxInterpolation flux = cfg.flux.kind == "upwind"
                                 ? FluxInterpolation::upwind()
                                 : (cfg.flux.kind == "product-mean"
                                        ? FluxInterpolation::product_mean()
                                        : FluxInterpolation::product_max());

    BuiltScenario built{
        Model{std::move(mu), flux, std::move(velocity), std::move(omega)},
        CoupledState{std::move(r0), std::move(eta0), 0.0},
        BoundsLedger{},
        false};
    built.ledger = constants_of(built.model.flux, built.model.velocity,
                                built.model.omega, built.init.eta,
                                built.init.r, built.model.mu);
    built.section5 = cfg.velocity.kind == "alpha" && built.init.r.min() >= 0.0 &&
                     (n < 2 || built.init.eta.min_offdiag() > 0.0) &&
                     built.ledger.omega_star > 0.0 && built.ledger.M > 0.0;
    return built;
}

} // namespace concl::scenario
