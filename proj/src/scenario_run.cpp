#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "concl/metrics.hpp"
#include "concl/scenario.hpp"

namespace concl::scenario {

namespace {

namespace fs = std::filesystem;

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

struct FileWriter {
    FILE* f = nullptr;
    std::string path;

    FileWriter(const fs::path& p) : path(p.string()) {
        if (!p.parent_path().empty()) fs::create_directories(p.parent_path());
        f = std::fopen(path.c_str(), "wb");
        if (!f) throw invalid_input("cannot open output file " + path);
    }
    ~FileWriter() {
        if (f) std::fclose(f);
    }
    FileWriter(const FileWriter&) = delete;
    FileWriter& operator=(const FileWriter&) = delete;

    void line(const std::string& s) {
        std::fwrite(s.data(), 1, s.size(), f);
        std::fputc('\n', f);
    }
};

struct CsvColumns {
    bool bounds = false;   // sup_bound / inf_bound filled
    bool pair = false;     // l2mu_d2, dissipation_lhs, dissipation_rhs
};

std::string csv_header(const CsvColumns& cols) {
    std::string h = "t,mass,r_min,r_max,diameter,eta_min,eta_max,sup_bound,inf_bound";
    if (cols.pair) h += ",l2mu_d2,dissipation_lhs,dissipation_rhs";
    return h;
}

std::string csv_row(const DiagnosticsRow& d, const CsvColumns& cols,
                    double sup_bound, double inf_bound, double pair_dist,
                    double diss_lhs, double diss_rhs, bool pair_has_lhs) {
    std::string row = fmt(d.t) + "," + fmt(d.mass) + "," + fmt(d.r_min) + "," +
                      fmt(d.r_max) + "," + fmt(d.r_max - d.r_min) + "," +
                      fmt(d.eta_min) + "," + fmt(d.eta_max);
    row += ",";
    if (cols.bounds) row += fmt(sup_bound);
    row += ",";
    if (cols.bounds) row += fmt(inf_bound);
    if (cols.pair) {
        row += "," + fmt(pair_dist) + ",";
        if (pair_has_lhs) row += fmt(diss_lhs);
        row += "," + fmt(diss_rhs);
    }
    return row;
}

double max_mass_drift(const Trajectory& traj) {
    const double m0 = traj.diagnostics.front().mass;
    double drift = 0.0;
    for (const auto& d : traj.diagnostics)
        drift = std::max(drift, std::abs(d.mass - m0));
    return drift;
}

struct EtaEnvelope {
    bool ok = true;
    double worst_low = 0.0;  // max violation of the lower curve
    double worst_high = 0.0; // max violation of the sup bound
};

EtaEnvelope eta_envelope_check(const Trajectory& traj, const BoundsLedger& lg) {
    EtaEnvelope res;
    const double eta0_min = traj.diagnostics.front().eta_min;
    const double cap = lg.norm_eta0_inf + lg.C_omega + 1e-9;
    for (const auto& d : traj.diagnostics) {
        const double e = std::exp(-d.t);
        const double floor = eta0_min * e + lg.omega_star * (1.0 - e) - 1e-9;
        res.worst_low = std::max(res.worst_low, floor - d.eta_min);
        res.worst_high = std::max(res.worst_high, d.eta_max - cap);
    }
    res.ok = res.worst_low <= 0.0 && res.worst_high <= 0.0;
    return res;
}

/// Central finite differences of the squared pair distance on the recorded
/// state grid, together with the dissipation bound at the interior nodes.
struct PairSeries {
    std::vector<double> times;
    std::vector<double> dist;      // l2mu_d2 at every recorded state
    std::vector<double> fd_lhs;    // central FD of dist^2 (interior nodes)
    std::vector<double> bound_rhs; // lambda bound term per node
    double worst_violation = 0.0;  // max fd_lhs - bound_rhs (interior)
    double lambda_measured = 0.0;  // inf over nodes of -bound/dist^2
};

PairSeries pair_dissipation_series(const Trajectory& ta, const Trajectory& tb,
                                   const Model& model) {
    if (ta.size() != tb.size())
        throw invalid_input("pair runs recorded different grid sizes");
    PairSeries out;
    const std::size_t N = ta.size();
    out.times = ta.times;
    out.dist.resize(N);
    out.bound_rhs.resize(N);
    out.fd_lhs.assign(N, 0.0);
    double lambda = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < N; ++k) {
        const auto& sa = ta.states[k];
        const auto& sb = tb.states[k];
        double d2 = 0.0;
        for (std::size_t i = 0; i < model.mu.size(); ++i) {
            const double d = sa.r[i] - sb.r[i];
            d2 += model.mu.weight(i) * d * d;
        }
        out.dist[k] = std::sqrt(d2);
        const DissipationTerms terms = contraction_dissipation(
            sa.r, sb.r, model.velocity.static_field, sa.eta, model.mu);
        out.bound_rhs[k] = terms.lambda_bound_term;
        if (d2 > 1e-30) lambda = std::min(lambda, -terms.lambda_bound_term / d2);
    }
    out.lambda_measured = std::isfinite(lambda) ? lambda : 0.0;
    for (std::size_t k = 1; k + 1 < N; ++k) {
        const double h = out.times[k + 1] - out.times[k - 1];
        out.fd_lhs[k] = (out.dist[k + 1] * out.dist[k + 1] -
                         out.dist[k - 1] * out.dist[k - 1]) /
                        h;
        const double scale = std::max(
            {1.0, std::abs(out.fd_lhs[k]), std::abs(out.bound_rhs[k])});
        out.worst_violation = std::max(
            out.worst_violation, (out.fd_lhs[k] - out.bound_rhs[k]) / scale);
    }
    return out;
}

/// Writes the standard trajectory CSV (diagnostics rows, bound columns when
/// the section-5 ledger applies); returns the path, or empty when disabled.
std::string write_trajectory_csv(const ScenarioConfig& cfg,
                                 const BuiltScenario& built,
                                 const Trajectory& traj) {
    if (!cfg.output.csv) return {};
    CsvColumns cols;
    cols.bounds = built.section5;
    std::vector<double> sup_b, inf_b;
    if (cols.bounds) {
        std::vector<double> times;
        times.reserve(traj.diagnostics.size());
        for (const auto& d : traj.diagnostics) times.push_back(d.t);
        sup_b = sup_bound_curve(built.ledger, times);
        inf_b = inf_bound_curve(built.ledger, traj.diagnostics.front().r_min,
                                times);
    }
    FileWriter csv(fs::path(cfg.output.path) / (cfg.output.prefix + ".csv"));
    csv.line(csv_header(cols));
    for (std::size_t k = 0; k < traj.diagnostics.size(); ++k)
        csv.line(csv_row(traj.diagnostics[k], cols, cols.bounds ? sup_b[k] : 0.0,
                         cols.bounds ? inf_b[k] : 0.0, 0, 0, 0, false));
    return csv.path;
}

RunOutcome run_plain(const ScenarioConfig& cfg, const BuiltScenario& built) {
    RunOutcome out;
    IntegrateOptions opt = integrate_options(cfg);
    opt.partial_on_blowup = true;

    const Trajectory traj = integrate(built.init, built.model, opt);

    CsvColumns cols;
    cols.bounds = built.section5;
    std::vector<double> sup_b, inf_b;
    if (cols.bounds) {
        std::vector<double> times;
        times.reserve(traj.diagnostics.size());
        for (const auto& d : traj.diagnostics) times.push_back(d.t);
        sup_b = sup_bound_curve(built.ledger, times);
        inf_b = inf_bound_curve(built.ledger, traj.diagnostics.front().r_min,
                                times);
    }

    const fs::path dir(cfg.output.path);
    if (const std::string p = write_trajectory_csv(cfg, built, traj); !p.empty())
        out.files.push_back(p);

    // summary
    const double drift = max_mass_drift(traj);
    const auto& last = traj.diagnostics.back();
    const EtaEnvelope eta_env = eta_envelope_check(traj, built.ledger);
    bool envelopes_ok = true;
    if (cols.bounds)
        for (std::size_t k = 0; k < traj.diagnostics.size(); ++k) {
            if (traj.diagnostics[k].r_max > sup_b[k] + 1e-6) envelopes_ok = false;
            if (traj.diagnostics[k].r_min < inf_b[k] - 1e-6) envelopes_ok = false;
        }
    const PositivityReport pos = positivity_check(traj);
    const bool positivity_applies =
        cfg.flux.kind == "upwind" && built.section5;

    FileWriter sum(dir / (cfg.output.prefix + "-summary.txt"));
    sum.line("preset = " + cfg.output.prefix);
    sum.line("rows = " + std::to_string(traj.diagnostics.size()));
    sum.line("final_t = " + fmt(last.t));
    sum.line("final_diameter = " + fmt(last.r_max - last.r_min));
    sum.line("final_r_max = " + fmt(last.r_max));
    sum.line("final_r_min = " + fmt(last.r_min));
    sum.line("mass = " + fmt(traj.diagnostics.front().mass));
    sum.line("max_mass_drift = " + fmt(drift));
    sum.line(std::string("eta_envelope_ok = ") + (eta_env.ok ? "yes" : "no"));
    if (positivity_applies)
        sum.line(std::string("positivity_ok = ") + (pos.ok ? "yes" : "no"));
    else
        sum.line("positivity_ok = skipped (out of hypothesis)");
    if (cols.bounds)
        sum.line(std::string("bernoulli_envelopes_ok = ") +
                 (envelopes_ok ? "yes" : "no"));
    if (traj.blew_up) sum.line("blow_up = " + traj.blowup_note);
    out.files.push_back(sum.path);

    if (traj.blew_up) {
        out.exit_code = 3;
        out.message = traj.blowup_note;
    } else if (!eta_env.ok || (positivity_applies && !pos.ok) ||
               (cols.bounds && !envelopes_ok) || drift > 1e-10 * std::max(1.0, std::abs(traj.diagnostics.front().mass))) {
        out.exit_code = 4;
        out.message = "invariant violation; see " + sum.path;
    }
    return out;
}

RunOutcome run_dissipation(const ScenarioConfig& cfg, const BuiltScenario& built) {
    RunOutcome out;
    const IntegrateOptions opt = integrate_options(cfg);

    CoupledState init_b = built.init;
    if (!cfg.pair.init_r2.empty()) {
        init_b.r = VertexDensity(cfg.pair.init_r2);
    } else {
        init_b.r[cfg.pair.perturb_vertex] += cfg.pair.perturb_eps;
    }

    const Trajectory ta = integrate(built.init, built.model, opt);
    const Trajectory tb = integrate(init_b, built.model, opt);
    const PairSeries series = pair_dissipation_series(ta, tb, built.model);

    CsvColumns cols;
    cols.pair = true;
    const fs::path dir(cfg.output.path);
    if (cfg.output.csv) {
        FileWriter csv(dir / (cfg.output.prefix + ".csv"));
        csv.line(csv_header(cols));
        // pair rows live on the recorded state grid
        for (std::size_t k = 0; k < ta.size(); ++k) {
            DiagnosticsRow d;
            d.t = ta.times[k];
            const auto& s = ta.states[k];
            d.mass = 0.0;
            for (std::size_t i = 0; i < built.model.mu.size(); ++i)
                d.mass += built.model.mu.weight(i) * s.r[i];
            d.r_min = s.r.min();
            d.r_max = s.r.max();
            d.eta_min = built.model.mu.size() >= 2 ? s.eta.min_offdiag() : 0.0;
            d.eta_max = s.eta.sup_norm();
            const bool interior = k > 0 && k + 1 < ta.size();
            csv.line(csv_row(d, cols, 0, 0, series.dist[k], series.fd_lhs[k],
                             series.bound_rhs[k], interior));
        }
        out.files.push_back(csv.path);
    }

    const bool ok = series.worst_violation <= 1e-6;
    FileWriter sum(dir / (cfg.output.prefix + "-summary.txt"));
    sum.line("preset = " + cfg.output.prefix);
    sum.line("initial_distance = " + fmt(series.dist.front()));
    sum.line("final_distance = " + fmt(series.dist.back()));
    sum.line("worst_violation = " + fmt(series.worst_violation));
    sum.line("lambda_measured = " + fmt(series.lambda_measured));
    if (series.dist.front() > 0 && series.dist.back() > 0)
        sum.line("decay_exponent_measured = " +
                 fmt(-std::log(series.dist.back() / series.dist.front()) /
                     (series.times.back() - series.times.front())));
    sum.line(std::string("dissipation_ok = ") + (ok ? "yes" : "no"));
    out.files.push_back(sum.path);
    if (!ok) {
        out.exit_code = 4;
        out.message = "dissipation inequality violated";
    }
    return out;
}

RunOutcome run_stability(const ScenarioConfig& cfg, const BuiltScenario& built) {
    RunOutcome out;
    IntegrateOptions opt = integrate_options(cfg);
    opt.record_stride = 1; // the sampler needs the dense grid
    const Trajectory traj = integrate(built.init, built.model, opt);

    AtomicDisintegration sa = AtomicDisintegration::monokinetic(built.init.r);
    AtomicDisintegration sb = sa;
    sb.per_vertex[cfg.pair.perturb_vertex].positions[0] += cfg.pair.perturb_eps;

    AdvectOptions aopt;
    aopt.dt = cfg.advect.dt;
    const StabilityReport rep =
        stability_experiment(sa, sb, traj, built.model, aopt, built.ledger);

    const fs::path dir(cfg.output.path);
    if (const std::string p = write_trajectory_csv(cfg, built, traj); !p.empty())
        out.files.push_back(p);
    FileWriter sum(dir / (cfg.output.prefix + "-summary.txt"));
    sum.line("preset = " + cfg.output.prefix);
    sum.line(std::string("identical_inits = ") + (rep.identical ? "yes" : "no"));
    sum.line("initial_distance = " + fmt(rep.initial_distance));
    sum.line("sup_distance = " + fmt(rep.sup_distance));
    sum.line("observed_ratio = " + fmt(rep.observed_ratio));
    sum.line("envelope_log = " + fmt(rep.envelope_log));
    const bool ok = rep.within_envelope();
    sum.line(std::string("stability_ok = ") + (ok ? "yes" : "no"));
    out.files.push_back(sum.path);
    if (!ok) {
        out.exit_code = 4;
        out.message = "stability envelope violated";
    }
    return out;
}

RunOutcome run_picard(const ScenarioConfig& cfg, const BuiltScenario& built) {
    RunOutcome out;
    PicardOptions popt;
    popt.horizon = cfg.picard.horizon;
    popt.grid_dt = cfg.picard.grid_dt;
    popt.tol = cfg.picard.tol;
    popt.max_iters = cfg.picard.max_iters;
    const PicardResult pres = picard_solve(built.init, built.model, popt);

    IntegrateOptions opt = integrate_options(cfg);
    opt.dt = cfg.picard.grid_dt;
    opt.t_end = cfg.picard.horizon;
    opt.record_stride = 1;
    const Trajectory rk = integrate(built.init, built.model, opt);
    const double dist =
        trajectory_distance(pres.trajectory, rk, built.model.mu);

    const fs::path dir(cfg.output.path);
    if (const std::string p = write_trajectory_csv(cfg, built, pres.trajectory);
        !p.empty())
        out.files.push_back(p);
    FileWriter sum(dir / (cfg.output.prefix + "-summary.txt"));
    sum.line("preset = " + cfg.output.prefix);
    sum.line(std::string("converged = ") + (pres.converged ? "yes" : "no"));
    sum.line("iterations = " + std::to_string(pres.iterations));
    std::string ratios;
    for (double r : pres.ratios) {
        if (!ratios.empty()) ratios += ",";
        ratios += fmt(r);
    }
    sum.line("contraction_ratios = " + ratios);
    sum.line("first_ratio = " + (pres.ratios.empty() ? "n/a" : fmt(pres.ratios[0])));
    sum.line("d_inf_vs_rk4 = " + fmt(dist));
    const bool ok = pres.converged && dist <= 1e-6 &&
                    (pres.ratios.empty() || pres.ratios[0] < 1.0);
    sum.line(std::string("picard_ok = ") + (ok ? "yes" : "no"));
    out.files.push_back(sum.path);
    if (!ok) {
        out.exit_code = 4;
        out.message = "picard agreement failed";
    }
    return out;
}

RunOutcome run_monokinetic(const ScenarioConfig& cfg, const BuiltScenario& built) {
    RunOutcome out;
    IntegrateOptions opt = integrate_options(cfg);
    opt.record_stride = 1;
    const Trajectory traj = integrate(built.init, built.model, opt);

    AdvectOptions aopt;
    aopt.dt = cfg.advect.dt;
    const AtomicDisintegration sigma0 =
        AtomicDisintegration::monokinetic(built.init.r);
    const AdvectResult run = advect(sigma0, traj, built.model, aopt);

    // compare atoms against the vertex densities at the atom times
    TrajectorySampler sampler(traj);
    VertexDensity r_s;
    EdgeField eta_s;
    double max_dev = 0.0;
    for (std::size_t k = 0; k < run.sigma.size(); ++k) {
        sampler.sample(run.sigma.times[k], r_s, eta_s);
        for (std::size_t i = 0; i < built.model.mu.size(); ++i)
            max_dev = std::max(
                max_dev,
                std::abs(run.sigma.states[k].per_vertex[i].positions[0] - r_s[i]));
    }

    const fs::path dir(cfg.output.path);
    if (const std::string p = write_trajectory_csv(cfg, built, traj); !p.empty())
        out.files.push_back(p);
    FileWriter sum(dir / (cfg.output.prefix + "-summary.txt"));
    sum.line("preset = " + cfg.output.prefix);
    sum.line("max_atom_deviation = " + fmt(max_dev));
    const bool ok = max_dev <= 1e-8;
    sum.line(std::string("monokinetic_ok = ") + (ok ? "yes" : "no"));
    out.files.push_back(sum.path);
    if (!ok) {
        out.exit_code = 4;
        out.message = "monokinetic consistency failed";
    }
    return out;
}

} // namespace

IntegrateOptions integrate_options(const ScenarioConfig& cfg) {
    IntegrateOptions opt;
    opt.scheme = cfg.integrator.scheme == "rk4-coupled"
                     ? Scheme::Rk4Coupled
                     : (cfg.integrator.scheme == "euler" ? Scheme::Euler
                                                         : Scheme::Rk4ExactEta);
    opt.dt = cfg.integrator.dt;
    opt.t_end = cfg.integrator.t_end;
    opt.record_stride = cfg.integrator.record_stride;
    return opt;
}

RunOutcome run(const ScenarioConfig& cfg) {
    const BuiltScenario built = build(cfg);
    try {
        if (cfg.run.mode == "dissipation") return run_dissipation(cfg, built);
        if (cfg.run.mode == "stability") return run_stability(cfg, built);
        if (cfg.run.mode == "picard") return run_picard(cfg, built);
        if (cfg.run.mode == "monokinetic") return run_monokinetic(cfg, built);
        return run_plain(cfg, built);
    } catch (const blowup_error& e) {
        RunOutcome out;
        out.exit_code = 3;
        out.message = e.what();
        return out;
    }
}

VerifyOutcome verify(const ScenarioConfig& cfg) {
    VerifyOutcome out;
    const BuiltScenario built = build(cfg);
    const std::size_t n = built.model.mu.size();
    auto push = [&](const std::string& name, bool pass, const std::string& detail) {
        out.rows.push_back({name, pass, detail});
        out.all_pass = out.all_pass && pass;
    };

    // flux admissibility
    {
        const AdmissibilityReport rep =
            admissibility_suite(built.model.flux, 20000, 20240601);
        std::string worst;
        for (const auto& c : rep.checks)
            if (!c.pass) worst += c.property + "; ";
        push("flux admissibility", rep.all_pass(), worst);
    }
    // velocity monotonicity (pointwise velocities only)
    if (built.model.velocity.kind == VelocitySpec::Kind::Alpha) {
        const MonotonicityReport rep =
            monotonicity_suite(built.model.velocity.alpha, 20000, 20240602);
        std::string worst;
        for (const auto& c : rep.checks)
            if (!c.pass) worst += c.property + "; ";
        push("velocity monotonicity", rep.all_pass(), worst);
    }
    // nonlocal calculus adjointness at the scenario size
    {
        std::mt19937_64 rng(20240603);
        std::uniform_real_distribution<double> unif(-2.0, 2.0);
        double worst = 0.0;
        for (int rep = 0; rep < 32; ++rep) {
            VertexDensity phi(n, 0.0);
            for (std::size_t i = 0; i < n; ++i) phi[i] = unif(rng);
            EdgeField j(n, Symmetry::Antisymmetric);
            for (std::size_t a = 0; a < n; ++a)
                for (std::size_t b = a + 1; b < n; ++b) {
                    const double v = unif(rng);
                    j.set(a, b, v);
                    j.set(b, a, -v);
                }
            worst = std::max(worst, adjointness_defect(phi, j, built.model.mu));
        }
        push("adjointness defect < 1e-12", worst < 1e-12, "worst " + fmt(worst));
    }
    // the run itself plus its invariants
    {
        RunOutcome ro;
        std::string note;
        try {
            ScenarioConfig quiet = cfg;
            quiet.output.csv = false;
            quiet.output.path = cfg.output.path;
            quiet.output.prefix = cfg.output.prefix + "-verify";
            ro = run(quiet);
            note = ro.message;
        } catch (const error& e) {
            ro.exit_code = 4;
            note = e.what();
        }
        push("scenario run invariants", ro.exit_code == 0, note);
    }
    return out;
}

} // namespace concl::scenario
