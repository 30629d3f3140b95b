#pragma once

// Command-line runner. Every subcommand reads one ExperimentConfig, writes
// its files under --out and prints a one-line summary. Data files hold no
// timestamps; those go to run.log only.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "io.hpp"

namespace xphase::cli {

namespace fs = std::filesystem;

enum ExitCode { Ok = 0, DomainFailure = 1, UsageFailure = 2 };

struct Options {
  std::string config;
  std::string out = "xphase_out";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;
  std::optional<std::size_t> levels;
  bool quiet = false;
};

using Handler = std::function<std::string(const ExperimentConfig&, const fs::path&)>;

namespace detail {

inline void write(const fs::path& dir, const std::string& name, const std::string& content) {
  io::write_file(dir / name, content);
}

inline PhasePoint simulate_start(const ExperimentConfig& c, const ExtendedSystem& sys) {
  const auto& s = c.simulate;
  switch (s.start) {
    case StartKind::Point: return s.point;
    case StartKind::CcmEnergy: return ccm_initial_point(sys, s.energy, s.delta_E, s.x0);
    case StartKind::MfqmEnergy: return mfqm_initial_point(sys, s.energy, s.delta_E, s.x0, s.x0);
  }
  return s.point;
}

inline std::string simulate(const ExperimentConfig& c, const fs::path& out) {
  const auto sys = c.system();
  const auto X0 = simulate_start(c, sys);
  const auto t = integrate(sys, X0, 0.0, c.simulate.t_end, c.integrator);
  const auto cons = conservation_report(t);
  write(out, "trajectory.csv", io::trajectory_csv(t));
  write(out, "events.json", io::dump(io::events_json(t)));
  Json report{{"flavor", to_string(sys.flavor())},
              {"start", {{"x", X0.x}, {"y", X0.y}, {"p", X0.p}, {"q", X0.q}}},
              {"points", t.size()},
              {"crossings", t.crossings().size()},
              {"end_time", t.times.back()},
              {"termination", to_string(t.termination)},
              {"generator_drift", cons.max_generator_drift},
              {"constraint_drift", cons.max_constraint_drift}};
  if (sys.flavor() == Flavor::MFQM) {
    const auto d = chord_energy_drift(sys, t);
    report["chord_drift_plus"] = d.plus;
    report["chord_drift_minus"] = d.minus;
  }
  write(out, "simulate.json", io::dump(report));
  return std::to_string(t.size()) + " points, " + std::to_string(t.crossings().size()) +
         " crossings, " + std::string(to_string(t.termination)) + " at t=" +
         io::num(t.times.back()) + ", generator drift " + io::num(cons.max_generator_drift);
}

inline std::string sweep_uncertainty(const ExperimentConfig& c, const fs::path& out) {
  SweepSettings s;
  s.E_r = c.sweep.E_r;
  s.x0 = c.sweep.x0;
  s.t_end = c.sweep.t_end;
  s.convention = c.sweep.convention;
  const auto rows = uncertainty_sweep(c.system(), c.sweep.delta_E, s, c.integrator);
  write(out, "sweep_uncertainty.csv", io::sweep_csv(rows));
  write(out, "sweep_uncertainty.json", io::dump(io::sweep_json(rows, c.sweep)));
  write(out, "sweep_uncertainty.txt", io::sweep_text(rows));
  std::size_t complete = 0;
  for (const auto& r : rows) complete += r.delta_t.has_value();
  const auto f = constancy_factor(rows);
  return std::to_string(complete) + "/" + std::to_string(rows.size()) +
         " rows with delta_t, constancy factor " + (f ? io::num(*f) : "-");
}

inline std::string sweep_hbar(const ExperimentConfig& c, const fs::path& out) {
  const ScaledStart s{c.limit.x0, c.limit.ybar0, c.limit.p0, c.limit.qbar0};
  const auto rows =
      classical_limit_sweep(c.system(), c.limit.hbar, s, c.limit.t_end, c.limit.samples,
                            c.integrator);
  write(out, "sweep_hbar.csv", io::limit_csv(rows));
  const Json j = io::limit_json(rows);
  write(out, "sweep_hbar.json", io::dump(j));
  write(out, "sweep_hbar.txt", io::limit_text(rows));
  const auto o = fitted_order(rows);
  return std::to_string(rows.size()) + " hbar values, strictly decreasing: " +
         (j["strictly_decreasing"].get<bool>() ? "yes" : "no") + ", fitted order " +
         (o ? io::num(*o) : "-");
}

inline std::string dwell(const ExperimentConfig& c, const fs::path& out) {
  const auto sys = c.system();
  const auto& b = c.dwell;
  Trajectory t;
  if (sys.flavor() == Flavor::CCM)
    t = ccm_double_well_run(sys, b.E_r, b.delta_E, b.x0, b.t_end, c.integrator);
  else if (sys.flavor() == Flavor::MFQM)
    t = mfqm_double_well_run(sys, b.E_r, b.delta_E, b.t_end, c.integrator, b.x0, b.x0);
  else
    throw usage_error("dwell requires flavor ccm or mfqm");
  const auto d = dwell_analysis(sys, t, {b.x_split, b.x_well_max});
  write(out, "dwell.json", io::dump(io::dwell_json(d)));
  write(out, "dwell.txt", io::dwell_text(d));
  return "left " + io::num(d.time_left) + ", right " + io::num(d.time_right) + ", excursion " +
         io::num(d.excursion_time) + ", " + std::to_string(d.flips) + " flips";
}

inline std::string ellipse(const ExperimentConfig& c, const fs::path& out) {
  const auto sys = c.system();
  const auto& b = c.ellipse;
  const auto X0 = initial_from_velocities(sys, b.x0, b.y0, b.vx0, b.vy0);
  const auto e = ellipse_check(sys, X0, b.periods, c.integrator);
  write(out, "ellipse.json", io::dump(io::ellipse_json(e)));
  write(out, "ellipse.txt", io::ellipse_text(e));
  return "A " + io::num(e.fit.A) + ", B " + io::num(e.fit.B) + ", rms " +
         io::num(e.fit.residual_rms) + ", constraint mismatch " + io::num(e.constraint_mismatch);
}

inline std::string spectrum(const ExperimentConfig& c, const fs::path& out) {
  const auto r = eigensolve(c.potential.build(), c.spectrum.grid, c.hbar, c.mass,
                            c.spectrum.levels);
  Json j = io::spectrum_json(r);
  if (r.levels() >= 2) j["splitting"] = r.energies[1] - r.energies[0];
  write(out, "spectrum.json", io::dump(j));
  if (c.spectrum.wavefunctions) write(out, "wavefunctions.csv", io::wavefunctions_csv(r));
  return std::to_string(r.levels()) + " levels, E0 = " + io::num(r.energies[0]);
}

inline std::string compare(const ExperimentConfig& c, const fs::path& out) {
  CompareSettings s;
  s.level = c.compare.level;
  s.grid = c.spectrum.grid;
  s.x0 = c.compare.x0;
  s.t_end = c.compare.t_end;
  s.dwell = {c.dwell.x_split, c.dwell.x_well_max};
  s.convention = c.compare.convention;
  const auto r = ccm_vs_quantum_report(c.system(), c.hbar, c.compare.delta_E, s, c.integrator);
  write(out, "compare.json", io::dump(io::compare_json(r)));
  write(out, "compare.txt", io::compare_text(r));
  return std::to_string(r.rows.size()) + " rows, extrapolated ratio " +
         (r.extrapolated_ratio ? io::num(*r.extrapolated_ratio) : "-") + ", quantum ratio " +
         io::num(r.quantum_left / r.quantum_right);
}

inline std::string ensemble(const ExperimentConfig& c, const fs::path& out) {
  const auto& b = c.ensemble;
  const auto g = sample_gaussian_wigner(b.x0, b.p0, b.sigma_x, b.sigma_p, b.samples, c.seed);
  const auto sys = c.system(Flavor::ClassicalReal);
  const auto pts = transport(g.samples, sys, b.t, c.integrator);
  write(out, "ensemble.csv", io::ensemble_csv(pts));
  Json j{{"seed", c.seed},
         {"samples", pts.size()},
         {"t", b.t},
         {"uncertainty_product", g.uncertainty_product()},
         {"admissible", g.admissible(c.hbar)},
         {"moments", io::moments_json(moments(pts))}};
  std::string extra;
  if (sys.potential().kind() == PotentialKind::InvertedHarmonic) {
    const double f = separatrix_fraction(pts, sys);
    j["separatrix_fraction"] = f;
    extra = ", separatrix fraction " + io::num(f);
  }
  write(out, "ensemble.json", io::dump(j));
  return std::to_string(pts.size()) + " samples" + extra;
}

inline std::string identity(const ExperimentConfig& c, const fs::path& out) {
  const auto b = identity_battery(c.potential.build(), c.mass, c.identity.points,
                                  c.identity.radius, c.seed);
  write(out, "identity.json", io::dump(io::identity_json(b)));
  write(out, "identity.txt", io::identity_text(b));
  return std::to_string(b.points) + " points, worst identity residual " +
         io::num(b.worst_identity()) + ", worst gradient error " + io::num(b.gradient);
}

inline std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace detail

struct Subcommand {
  const char* name;
  const char* help;
  Handler handler;
};

inline const std::vector<Subcommand>& subcommands() {
  static const std::vector<Subcommand> list{
      {"simulate", "Integrate one trajectory: trajectory.csv, events.json", detail::simulate},
      {"sweep-uncertainty", "Delta t against Im E on the CCM double well",
       detail::sweep_uncertainty},
      {"sweep-hbar", "MFQM deviation from the classical path as hbar shrinks",
       detail::sweep_hbar},
      {"dwell", "Time spent in each well for one double-well run", detail::dwell},
      {"ellipse-check", "Fit SHO ellipses and compare with the logged constraint",
       detail::ellipse},
      {"spectrum", "Finite-difference Schrodinger levels", detail::spectrum},
      {"compare", "CCM dwell ratios against quantum well probabilities", detail::compare},
      {"ensemble", "Sample and transport a Gaussian Wigner density", detail::ensemble},
      {"identity-check", "Bracket, Gamma, Lambda, complexification and gradient residuals",
       detail::identity},
  };
  return list;
}

/// Runs the CLI; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Extended phase space dynamics experiments", "xphase"};
  app.require_subcommand(1);
  Options opt;
  const Subcommand* chosen = nullptr;
  for (const auto& s : subcommands()) {
    auto* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--config", opt.config, "JSON experiment config (defaults apply when omitted)");
    sub->add_option("--out", opt.out, "Output directory")->capture_default_str();
    sub->add_option("--seed", opt.seed, "Seed for random draws (overrides config seed)");
    sub->add_option("--set", opt.sets, "Override a config field, KEY=VALUE with dotted KEY")
        ->take_all()
        ->allow_extra_args(false);
    sub->add_option("--levels", opt.levels, "Number of levels (spectrum.levels)");
    sub->add_flag("--quiet", opt.quiet, "Suppress the summary line");
    sub->callback([&chosen, &s] { chosen = &s; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help requests exit 0 and print the help of the subcommand asked about.
    const int code = app.exit(e, out, err);
    return code == 0 ? Ok : UsageFailure;
  }
  try {
    std::vector<std::string> sets = opt.sets;
    if (opt.seed) sets.push_back("seed=" + std::to_string(*opt.seed));
    if (opt.levels) sets.push_back("spectrum.levels=" + std::to_string(*opt.levels));
    const auto cfg = load_config(opt.config.empty() ? std::nullopt
                                                    : std::optional<std::string>(opt.config),
                                 sets);
    const fs::path dir(opt.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw usage_error("cannot create output directory '" + opt.out + "': " + ec.message());
    const auto started = std::chrono::steady_clock::now();
    const std::string summary = chosen->handler(cfg, dir);
    io::write_file(dir / "config.json", io::dump(config_to_json(cfg)));
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    io::write_file(dir / "run.log", detail::timestamp() + " " + chosen->name + " " +
                                        io::num(secs) + "s: " + summary + "\n");
    if (!opt.quiet) out << chosen->name << ": " << summary << "\n";
    return Ok;
  } catch (const usage_error& e) {
    err << "xphase " << chosen->name << ": usage error: " << e.what() << "\n";
    return UsageFailure;
  } catch (const domain_error& e) {
    err << "xphase " << chosen->name << ": domain error: " << e.what() << "\n";
    return DomainFailure;
  } catch (const numeric_error& e) {
    err << "xphase " << chosen->name << ": numeric error: " << e.what() << "\n";
    return DomainFailure;
  }
}

}  // namespace xphase::cli
