#include "cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <regex>

#include "smoke/admm.hpp"
#include "smoke/baseline.hpp"
#include "smoke/benchmarks.hpp"
#include "smoke/config.hpp"
#include "smoke/errors.hpp"
#include "smoke/field_io.hpp"
#include "smoke/log_io.hpp"
#include "smoke/simulator.hpp"

namespace smoke {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kUsage =
    "usage: smokectl <command> [options]\n"
    "commands:\n"
    "  optimize          --config <path> --out <dir> [--threads k] [--lm] [--fallback] [--safeguard]\n"
    "  simulate          --config <path> --out <dir> [--forces <dir>] [--threads k]\n"
    "  compare-baseline  --config <path> --out <dir> [--threads k]\n"
    "  make-benchmark    --name blob|letter|bunny --out <dir> [--res n] [--steps N] [--dt s]\n"
    "                    [--boundary neumann|periodic] [--seed s] [--r value]\n"
    "  export-frames     --in <dir> --out <dir> [--stem rho] [--slice k]\n";

void error_json(std::ostream& err, const std::string& kind, const std::string& msg, int code) {
  err << json{{"error", kind}, {"message", msg}, {"exit_code", code}}.dump() << "\n";
}

struct Problem {
  ScalarField rho0;
  KeyframeSet keyframes;
};

Problem load_problem(const RunConfig& cfg) {
  Problem p{load_keyframe(cfg.initial, cfg.grid), KeyframeSet(cfg.steps)};
  for (const auto& [i, path] : cfg.keyframes) p.keyframes.set(i, load_keyframe(path, cfg.grid));
  p.keyframes.validate();
  return p;
}

void set_threads(int k) {
  if (k > 0) omp_set_num_threads(k);
}

json summary_json(const ControlResult& r, double objective) {
  return {{"converged", r.converged},
          {"outer_iterations", r.outer_iters},
          {"eps_admm", r.eps_admm},
          {"wall_s", r.wall_s},
          {"objective", objective}};
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream os(p);
  if (!os) throw FormatError("cannot write " + p.string());
  os << s;
}

int cmd_optimize(const std::string& config, const std::string& out_dir, int threads, bool lm, bool fallback,
                 bool safeguard, std::ostream& out, std::ostream& err) {
  RunConfig cfg = load_config(config);
  if (lm) cfg.admm.lm = true;
  if (fallback) cfg.admm.fallback = true;
  if (safeguard) cfg.admm.safeguard = true;
  if (threads > 0) cfg.threads = threads;
  validate(cfg);
  set_threads(cfg.threads);
  const Problem pb = load_problem(cfg);
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  write_text(dir / "config.ini", serialize(cfg));
  GaussianMetric metric(cfg.grid, cfg.admm.metric_levels);

  if (cfg.solver == SolverKind::Lbfgs) {
    ShootingProblem sp{pb.rho0, pb.keyframes, &metric, cfg.admm.r};
    sp.sim.dt = cfg.dt;
    BaselineOptions bo;
    bo.lbfgs.max_iters = cfg.lbfgs_max_iters;
    bo.eps_visual = cfg.admm.eps_admm;
    const BaselineResult res = minimize(sp, bo);
    write_fields(dir, res.control);
    write_outer_csv(dir / "outer_log.csv", res.control.log);
    json s = summary_json(res.control, res.objective);
    s["solver"] = "lbfgs";
    s["status"] = to_string(res.lbfgs.status);
    write_text(dir / "summary.json", s.dump(2) + "\n");
    out << s.dump() << "\n";
    if (res.lbfgs.status == LbfgsStatus::LineSearchFailure) {
      error_json(err, "LineSearchFailure", "line search failed; best iterate written", 3);
      return 3;
    }
    return 0;
  }

  auto finish = [&](const ControlResult& r) {
    write_fields(dir, r);
    write_outer_csv(dir / "admm_log.csv", r.log);
    write_nso_csv(dir / "nso_log.csv", r.log);
    std::vector<ScalarField> rho;
    for (const auto& s : r.trajectory) rho.push_back(s.rho);
    json s = summary_json(r, objective(rho, pb.keyframes, r.forces, cfg.admm.r));
    s["solver"] = "admm";
    s["objective_metric"] = objective(rho, pb.keyframes, r.forces, cfg.admm.r, metric);
    write_text(dir / "summary.json", s.dump(2) + "\n");
    out << s.dump() << "\n";
  };
  try {
    finish(run(pb.rho0, pb.keyframes, cfg.admm));
  } catch (const AdmmMaxIterations& e) {
    finish(*e.result);
    error_json(err, e.kind(), std::string(e.what()) + "; best-so-far result written", 3);
    return 3;
  }
  return 0;
}

int cmd_simulate(const std::string& config, const std::string& out_dir, const std::string& forces_dir, int threads,
                 std::ostream& out) {
  RunConfig cfg = load_config(config);
  if (threads > 0) cfg.threads = threads;
  set_threads(cfg.threads);
  if (cfg.initial.empty()) throw InvalidArgument("density.initial is required");
  const ScalarField rho0 = load_keyframe(cfg.initial, cfg.grid);
  std::vector<FaceField> forces(cfg.steps, FaceField(cfg.grid));
  if (!forces_dir.empty()) {
    for (int i = 0; i < cfg.steps; ++i) {
      forces[i] = load_smkf_face(fs::path(forces_dir) / frame_name("u", i));
      if (forces[i].spec() != cfg.grid) throw SpecMismatch("force field " + std::to_string(i) + " on another grid");
    }
  }
  SimConfig sc;
  sc.dt = cfg.dt;
  const auto states = simulate(SimState::at_rest(rho0), forces, sc);
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  for (std::size_t i = 0; i < states.size(); ++i) {
    save_smkf(dir / frame_name("rho", static_cast<int>(i)), states[i].rho);
    save_smkf(dir / frame_name("v", static_cast<int>(i)), states[i].v);
  }
  out << json{{"frames", states.size()}}.dump() << "\n";
  return 0;
}

int cmd_compare(const std::string& config, const std::string& out_dir, int threads, std::ostream& out) {
  RunConfig cfg = load_config(config);
  if (threads > 0) cfg.threads = threads;
  validate(cfg);
  set_threads(cfg.threads);
  const Problem pb = load_problem(cfg);
  GaussianMetric metric(cfg.grid, cfg.admm.metric_levels);
  const fs::path dir(out_dir);
  fs::create_directories(dir);

  ControlResult admm;
  try {
    admm = run(pb.rho0, pb.keyframes, cfg.admm);
  } catch (const AdmmMaxIterations& e) {
    admm = *e.result;
  }
  std::vector<ScalarField> rho;
  for (const auto& s : admm.trajectory) rho.push_back(s.rho);
  const double admm_obj = objective(rho, pb.keyframes, admm.forces, cfg.admm.r, metric);

  ShootingProblem sp{pb.rho0, pb.keyframes, &metric, cfg.admm.r};
  sp.sim.dt = cfg.dt;
  BaselineOptions bo;
  bo.lbfgs.max_iters = cfg.lbfgs_max_iters;
  bo.eps_visual = admm.eps_admm;
  const BaselineResult lb = minimize(sp, bo);

  write_outer_csv(dir / "admm_log.csv", admm.log);
  write_nso_csv(dir / "nso_log.csv", admm.log);
  write_outer_csv(dir / "lbfgs_log.csv", lb.control.log);
  char buf[512];
  std::string table = "solver,iterations,wall_s,objective,converged\n";
  std::snprintf(buf, sizeof buf, "admm,%d,%.6g,%.10g,%d\nlbfgs,%d,%.6g,%.10g,%d\n", admm.outer_iters, admm.wall_s,
                admm_obj, admm.converged ? 1 : 0, lb.control.outer_iters, lb.control.wall_s, lb.objective,
                lb.control.converged ? 1 : 0);
  table += buf;
  write_text(dir / "comparison.csv", table);
  const double speedup = lb.control.wall_s / std::max(admm.wall_s, 1e-12);
  std::snprintf(buf, sizeof buf,
                "| solver | iterations | wall [s] | objective | converged |\n"
                "|--------|-----------:|---------:|----------:|:---------:|\n"
                "| ADMM   | %d | %.2f | %.6g | %s |\n"
                "| LBFGS  | %d | %.2f | %.6g | %s |\n"
                "speedup (LBFGS / ADMM wall time): %.2fx\n",
                admm.outer_iters, admm.wall_s, admm_obj, admm.converged ? "yes" : "no", lb.control.outer_iters,
                lb.control.wall_s, lb.objective, lb.control.converged ? "yes" : "no", speedup);
  out << buf;
  write_text(dir / "comparison.md", buf);
  return 0;
}

int cmd_make_benchmark(const std::string& name, const std::string& out_dir, int res, int steps, double dt,
                       const std::string& boundary, std::uint64_t seed, double r, std::ostream& out) {
  const Benchmark bm = make_benchmark(name, res, steps, boundary_from_string(boundary), seed);
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  RunConfig cfg;
  cfg.grid = bm.rho0.spec();
  cfg.dt = dt;
  cfg.steps = steps;
  cfg.seed = seed;
  cfg.admm.r = r;
  cfg.admm.dt = dt;
  cfg.initial = "rho0.smkf";
  save_smkf(dir / cfg.initial, bm.rho0);
  for (int i : bm.keyframes.indices()) {
    const std::string f = frame_name("key", i);
    save_smkf(dir / f, bm.keyframes.target(i));
    cfg.keyframes[i] = f;
  }
  cfg.out = "out";
  write_text(dir / "config.ini", serialize(cfg));
  out << json{{"benchmark", bm.name}, {"config", (dir / "config.ini").string()}}.dump() << "\n";
  return 0;
}

int cmd_export(const std::string& in_dir, const std::string& out_dir, const std::string& stem, int slice,
               std::ostream& out) {
  const std::regex pat(stem + R"(_(\d+)\.smkf)");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(in_dir))
    if (std::regex_match(e.path().filename().string(), pat)) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw FormatError("no " + stem + "_XXXX.smkf files in " + in_dir);
  fs::create_directories(out_dir);
  for (const auto& f : files) {
    const ScalarField rho = load_smkf_scalar(f);
    fs::path o = fs::path(out_dir) / f.filename();
    o.replace_extension(".pgm");
    write_pgm(o, field_to_image(rho, slice));
  }
  out << json{{"frames", files.size()}}.dump() << "\n";
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  static const std::vector<std::string> commands{"optimize", "simulate", "compare-baseline", "make-benchmark",
                                                 "export-frames"};
  if (argc < 2) {
    err << kUsage;
    error_json(err, "UsageError", "missing command", 2);
    return 2;
  }
  const std::string cmd = argv[1];
  if (cmd == "-h" || cmd == "--help") {
    out << kUsage;
    return 0;
  }
  if (std::find(commands.begin(), commands.end(), cmd) == commands.end()) {
    err << kUsage;
    error_json(err, "UsageError", "unknown command '" + cmd + "'", 2);
    return 2;
  }

  CLI::App app{"smokectl", "smokectl " + cmd};
  std::string config, out_dir, in_dir, forces, name = "blob", boundary = "neumann", stem = "rho";
  int threads = 0, res = 64, steps = 20, slice = -1;
  double dt = 2.0, r = 1e3;
  std::uint64_t seed = 0;
  bool lm = false, fallback = false, safeguard = false;
  if (cmd == "optimize" || cmd == "simulate" || cmd == "compare-baseline") {
    app.add_option("--config", config, "run configuration")->required();
    app.add_option("--out", out_dir, "output directory")->required();
    app.add_option("--threads", threads, "OpenMP thread count")->check(CLI::NonNegativeNumber);
  }
  if (cmd == "optimize") {
    app.add_flag("--lm", lm, "Levenberg-Marquardt damping in the NSO solve");
    app.add_flag("--fallback", fallback, "augmented Lagrangian fallback");
    app.add_flag("--safeguard", safeguard, "monotone AO sweeps");
  }
  if (cmd == "simulate") app.add_option("--forces", forces, "directory with u_XXXX.smkf");
  if (cmd == "make-benchmark") {
    app.add_option("--name", name)->required()->check(CLI::IsMember(benchmark_names()));
    app.add_option("--out", out_dir)->required();
    app.add_option("--res", res);
    app.add_option("--steps", steps);
    app.add_option("--dt", dt);
    app.add_option("--boundary", boundary)->check(CLI::IsMember({"neumann", "periodic"}));
    app.add_option("--seed", seed);
    app.add_option("--r", r);
  }
  if (cmd == "export-frames") {
    app.add_option("--in", in_dir)->required();
    app.add_option("--out", out_dir)->required();
    app.add_option("--stem", stem);
    app.add_option("--slice", slice);
  }

  try {
    std::vector<std::string> args;
    for (int i = argc - 1; i >= 2; --i) args.emplace_back(argv[i]);
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << kUsage;
    error_json(err, "UsageError", e.what(), 2);
    return 2;
  }

  try {
    if (cmd == "optimize") return cmd_optimize(config, out_dir, threads, lm, fallback, safeguard, out, err);
    if (cmd == "simulate") return cmd_simulate(config, out_dir, forces, threads, out);
    if (cmd == "compare-baseline") return cmd_compare(config, out_dir, threads, out);
    if (cmd == "make-benchmark") return cmd_make_benchmark(name, out_dir, res, steps, dt, boundary, seed, r, out);
    return cmd_export(in_dir, out_dir, stem, slice, out);
  } catch (const Error& e) {
    error_json(err, e.kind(), e.what(), 1);
  } catch (const std::exception& e) {
    error_json(err, "InternalError", e.what(), 1);
  }
  return 1;
}

}  // namespace smoke
