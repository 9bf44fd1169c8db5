// Command-line front end: dataset preparation, single solver runs, method
// comparisons, and Monte-Carlo validation of the high-probability bounds.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "spdhg/analysis.hpp"
#include "spdhg/dataset.hpp"
#include "spdhg/problem.hpp"
#include "spdhg/rng.hpp"
#include "spdhg/solver.hpp"
#include "spdhg/trace.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// Exit codes: 0 success, 1 runtime failure (solver abort, missed reference,
// exceeded bound), 2 usage errors (bad flags, unreadable input).
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Independent deterministic seed streams per purpose.
enum SeedStream : std::uint64_t {
  kSplitStream = 1,
  kSolverStream = 2,
  kRegimeStreamBase = 10,
  kRepetitionStreamBase = 100,
};

struct Options {
  std::string command;
  std::string data;
  std::string model = "gglr";  // gglr | ggrlr
  std::vector<std::string> solvers = {"spdhg"};
  std::vector<std::string> regimes = {"gc"};
  double lambda = 1e-5;
  double gamma = 1e-2;
  double s = 1.0;
  double rho = 1.0;
  double radius_x = 10.0;
  double train_fraction = 0.8;
  std::int64_t iters = 10000;
  std::uint64_t seed = 42;
  std::int64_t checkpoint_every = 100;  // iterations (train), epochs (compare)
  std::int64_t repetitions = 10;
  int jobs = 1;
  std::int64_t trials = 200;
  std::vector<double> omegas = {1.0, 2.0, 3.0};
  std::string graph;  // edge-list file; empty = correlation graph
  double graph_threshold = 0.5;
  std::int64_t graph_max_edges = 10000;
  std::string lpdhg_step = "constant";  // constant | schedule
  std::string timing = "wall";          // wall | off
  bool with_reference = false;
  double ref_tol = 1e-10;
  std::int64_t ref_max_iters = 2000000;
  std::string out;
};

ordered_json options_to_json(const Options& o) {
  ordered_json j;
  j["command"] = o.command;
  j["data"] = o.data;
  j["model"] = o.model;
  j["solver"] = o.solvers;
  j["regime"] = o.regimes;
  j["lambda"] = o.lambda;
  j["gamma"] = o.gamma;
  j["s"] = o.s;
  j["rho"] = o.rho;
  j["radius_x"] = o.radius_x;
  j["train_fraction"] = o.train_fraction;
  j["iters"] = o.iters;
  j["seed"] = o.seed;
  j["checkpoint_every"] = o.checkpoint_every;
  j["repetitions"] = o.repetitions;
  j["jobs"] = o.jobs;
  j["trials"] = o.trials;
  j["omega"] = o.omegas;
  j["graph"] = o.graph;
  j["graph_threshold"] = o.graph_threshold;
  j["graph_max_edges"] = o.graph_max_edges;
  j["lpdhg_step"] = o.lpdhg_step;
  j["timing"] = o.timing;
  j["with_reference"] = o.with_reference;
  j["ref_tol"] = o.ref_tol;
  j["ref_max_iters"] = o.ref_max_iters;
  j["out"] = o.out;
  return j;
}

Options options_from_json(const ordered_json& j) {
  Options o;
  o.command = j.value("command", o.command);
  o.data = j.value("data", o.data);
  o.model = j.value("model", o.model);
  o.solvers = j.value("solver", o.solvers);
  o.regimes = j.value("regime", o.regimes);
  o.lambda = j.value("lambda", o.lambda);
  o.gamma = j.value("gamma", o.gamma);
  o.s = j.value("s", o.s);
  o.rho = j.value("rho", o.rho);
  o.radius_x = j.value("radius_x", o.radius_x);
  o.train_fraction = j.value("train_fraction", o.train_fraction);
  o.iters = j.value("iters", o.iters);
  o.seed = j.value("seed", o.seed);
  o.checkpoint_every = j.value("checkpoint_every", o.checkpoint_every);
  o.repetitions = j.value("repetitions", o.repetitions);
  o.jobs = j.value("jobs", o.jobs);
  o.trials = j.value("trials", o.trials);
  o.omegas = j.value("omega", o.omegas);
  o.graph = j.value("graph", o.graph);
  o.graph_threshold = j.value("graph_threshold", o.graph_threshold);
  o.graph_max_edges = j.value("graph_max_edges", o.graph_max_edges);
  o.lpdhg_step = j.value("lpdhg_step", o.lpdhg_step);
  o.timing = j.value("timing", o.timing);
  o.with_reference = j.value("with_reference", o.with_reference);
  o.ref_tol = j.value("ref_tol", o.ref_tol);
  o.ref_max_iters = j.value("ref_max_iters", o.ref_max_iters);
  o.out = j.value("out", o.out);
  return o;
}

void write_text_file(const std::string& path, const std::string& content) {
  if (const fs::path parent = fs::path(path).parent_path(); !parent.empty()) {
    fs::create_directories(parent);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

void write_manifest(const Options& o, const std::string& path) {
  write_text_file(path, options_to_json(o).dump(2) + "\n");
}

void require_readable(const std::string& path) {
  if (path.empty()) throw UsageError("--data is required");
  if (!fs::exists(path)) {
    throw UsageError("cannot read dataset file: " + path);
  }
}

spdhg::Regime parse_regime(const std::string& name) {
  if (name == "gc") return spdhg::Regime::kGeneralConvex;
  if (name == "sc-uniform") return spdhg::Regime::kStronglyConvexUniform;
  if (name == "sc-nonuniform") return spdhg::Regime::kStronglyConvexNonUniform;
  throw UsageError("unknown regime '" + name +
                   "' (expected gc, sc-uniform or sc-nonuniform)");
}

std::vector<std::pair<std::int64_t, std::int64_t>> read_edge_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read graph file: " + path);
  std::vector<std::pair<std::int64_t, std::int64_t>> edges;
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::int64_t i, j;
    if (!(ss >> i >> j)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw std::runtime_error("graph file " + path + " line " +
                               std::to_string(lineno) + ": expected 'i j [corr]'");
    }
    edges.emplace_back(i, j);
  }
  return edges;
}

double effective_gamma(const Options& o) {
  if (o.model == "gglr") return 0.0;
  if (o.model == "ggrlr") return o.gamma;
  throw UsageError("unknown model '" + o.model + "' (expected gglr or ggrlr)");
}

struct Instance {
  spdhg::SplitDataset data;
  spdhg::ProblemSpec spec;
};

Instance build_instance(const Options& o) {
  require_readable(o.data);
  const spdhg::Dataset full = spdhg::load_libsvm_file(o.data);
  spdhg::SplitDataset parts =
      spdhg::split(full, o.train_fraction, spdhg::Rng::derive(o.seed, kSplitStream));

  std::vector<std::pair<std::int64_t, std::int64_t>> edges;
  if (!o.graph.empty()) {
    edges = read_edge_file(o.graph);
  } else {
    edges = spdhg::edge_pairs(spdhg::build_graph_by_correlation(
        parts.train, o.graph_threshold, o.graph_max_edges));
  }

  spdhg::ProblemSpec spec{
      parts.train,
      spdhg::LossKind{spdhg::Loss::kLogistic, effective_gamma(o)},
      spdhg::build_fusion_matrix(edges, parts.train.dim()),
      spdhg::PrimalSet::l2_ball(o.radius_x),
      spdhg::DualSet::linf_ball(o.lambda)};
  spec.validate();
  return Instance{std::move(parts), std::move(spec)};
}

spdhg::SolverConfig base_config(const Options& o, const spdhg::ProblemSpec& spec,
                                const std::string& regime_name) {
  spdhg::SolverConfig cfg;
  cfg.regime = parse_regime(regime_name);
  cfg.s = o.s;
  cfg.lipschitz = spdhg::loss_lipschitz_bound(spec);
  cfg.mu = spec.loss.ridge;
  cfg.iterations = o.iters;
  cfg.seed = spdhg::Rng::derive(o.seed, kSolverStream);
  cfg.checkpoint_every = o.checkpoint_every;
  if (o.lpdhg_step == "schedule") {
    cfg.lpdhg_step = spdhg::LpdhgStep::kSchedule;
  } else if (o.lpdhg_step == "constant") {
    cfg.lpdhg_step = spdhg::LpdhgStep::kConstant;
  } else {
    throw UsageError("unknown --lpdhg-step '" + o.lpdhg_step + "'");
  }
  if (o.timing == "off") {
    cfg.record_wall_time = false;
  } else if (o.timing != "wall") {
    throw UsageError("unknown --timing '" + o.timing + "' (expected wall or off)");
  }
  return cfg;
}

spdhg::RunTrace dispatch_solver(const std::string& solver,
                                const spdhg::ProblemSpec& spec,
                                const spdhg::SolverConfig& cfg, double rho,
                                const spdhg::Dataset* test,
                                const spdhg::GapReference* ref) {
  if (solver == "spdhg") return spdhg::spdhg_run(spec, cfg, test, ref);
  if (solver == "lpdhg") return spdhg::lpdhg_run(spec, cfg, test, ref);
  if (solver == "gadmm") return spdhg::gadmm_run(spec, cfg, rho, test);
  throw UsageError("unknown solver '" + solver +
                   "' (expected spdhg, lpdhg or gadmm)");
}

int run_train(const Options& o) {
  if (o.solvers.size() != 1) {
    throw UsageError("train expects exactly one --solver; use compare for lists");
  }
  if (o.regimes.size() != 1) {
    throw UsageError("train expects exactly one --regime");
  }
  if (o.out.empty()) throw UsageError("--out is required");

  const Instance inst = build_instance(o);
  const spdhg::SolverConfig cfg = base_config(o, inst.spec, o.regimes[0]);

  spdhg::GapReference gap_ref;
  const spdhg::GapReference* ref_ptr = nullptr;
  if (o.with_reference) {
    try {
      const spdhg::ReferencePoint ref =
          spdhg::compute_reference(inst.spec, o.ref_max_iters, o.ref_tol, o.s);
      gap_ref = {ref.x_star, ref.y_star};
      ref_ptr = &gap_ref;
    } catch (const spdhg::ReferenceError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitFailure;
    }
  }

  const spdhg::RunTrace trace = dispatch_solver(
      o.solvers[0], inst.spec, cfg, o.rho, &inst.data.test, ref_ptr);
  if (trace.aborted) {
    std::cerr << "error: solver aborted: " << trace.abort_reason << "\n";
    return kExitFailure;
  }
  write_text_file(o.out, spdhg::trace_csv(trace));
  write_manifest(o, o.out + ".manifest.json");
  return 0;
}

struct CompareMethod {
  std::string label;
  std::string solver;
  std::string regime;
};

std::vector<CompareMethod> compare_methods(const Options& o) {
  std::vector<CompareMethod> methods;
  for (const std::string& solver : o.solvers) {
    if (solver == "spdhg" ||
        (solver == "lpdhg" && o.lpdhg_step == "schedule")) {
      for (const std::string& regime : o.regimes) {
        methods.push_back({solver + "-" + regime, solver, regime});
      }
    } else if (solver == "lpdhg" || solver == "gadmm") {
      methods.push_back({solver, solver, "gc"});
    } else {
      throw UsageError("unknown solver '" + solver + "'");
    }
  }
  for (std::size_t i = 0; i < methods.size(); ++i) {
    for (std::size_t j = i + 1; j < methods.size(); ++j) {
      if (methods[i].label == methods[j].label) {
        throw UsageError("duplicate method '" + methods[i].label + "'");
      }
    }
  }
  return methods;
}

int run_compare(const Options& o) {
  if (o.out.empty()) throw UsageError("--out is required");
  if (o.repetitions < 1) throw UsageError("--repetitions must be >= 1");
  const std::vector<CompareMethod> methods = compare_methods(o);
  if (methods.size() < 2) {
    throw UsageError("compare needs at least two methods (solvers x regimes)");
  }

  const Instance inst = build_instance(o);
  const std::int64_t n = inst.spec.data.n();

  // Common integer epoch grid: the stochastic solver checkpoints every
  // grid-step * n samples, batch solvers every grid-step iterations.
  const std::int64_t epochs = std::max<std::int64_t>(1, o.iters / n);
  const std::int64_t every =
      std::max<std::int64_t>(1, std::min(o.checkpoint_every, epochs));
  std::vector<std::int64_t> epoch_grid;
  for (std::int64_t e = every; e <= epochs; e += every) epoch_grid.push_back(e);
  if (epoch_grid.empty() || epoch_grid.back() != epochs) {
    epoch_grid.push_back(epochs);
  }

  struct Job {
    std::size_t method;
    std::int64_t rep;
  };
  std::vector<Job> jobs_list;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    for (std::int64_t r = 0; r < o.repetitions; ++r) {
      jobs_list.push_back({m, r});
    }
  }
  std::vector<spdhg::RunTrace> traces(jobs_list.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;

  auto worker = [&]() {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= jobs_list.size()) return;
      try {
        const Job job = jobs_list[idx];
        const CompareMethod& method = methods[job.method];
        spdhg::SolverConfig cfg = base_config(o, inst.spec, method.regime);
        cfg.seed = spdhg::Rng::derive(
            o.seed, kRepetitionStreamBase + static_cast<std::uint64_t>(job.rep));
        const bool batch = method.solver != "spdhg";
        cfg.iterations = batch ? epochs : epochs * n;
        cfg.checkpoints.clear();
        for (const std::int64_t e : epoch_grid) {
          cfg.checkpoints.push_back(batch ? e : e * n);
        }
        traces[idx] = dispatch_solver(method.solver, inst.spec, cfg, o.rho,
                                      &inst.data.test, nullptr);
        if (traces[idx].aborted) {
          throw std::runtime_error("solver aborted (" + method.label +
                                   "): " + traces[idx].abort_reason);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(jobs_list.size());
        return;
      }
    }
  };
  if (o.jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const std::size_t pool_size =
        std::min<std::size_t>(static_cast<std::size_t>(o.jobs), jobs_list.size());
    for (std::size_t t = 0; t < pool_size; ++t) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  // Seed-averaged long-format CSV on the shared epoch grid.
  std::string csv = "method,epoch,objective,test_loss,elapsed_ms\n";
  for (std::size_t m = 0; m < methods.size(); ++m) {
    for (std::size_t g = 0; g < epoch_grid.size(); ++g) {
      double objective = 0.0, test_loss = 0.0, elapsed = 0.0;
      for (std::int64_t r = 0; r < o.repetitions; ++r) {
        const spdhg::RunTrace& trace = traces[m * o.repetitions + r];
        objective += trace.rows[g].objective;
        test_loss += trace.rows[g].test_loss;
        elapsed += trace.rows[g].elapsed_ms;
      }
      const double reps = static_cast<double>(o.repetitions);
      csv += methods[m].label;
      csv += ',' + std::to_string(epoch_grid[g]);
      csv += ',' + spdhg::format_double(objective / reps);
      csv += ',' + spdhg::format_double(test_loss / reps);
      csv += ',' + spdhg::format_double(elapsed / reps);
      csv += '\n';
    }
  }
  write_text_file(o.out, csv);
  write_manifest(o, o.out + ".manifest.json");
  return 0;
}

int run_validate_hp(const Options& o) {
  if (o.out.empty()) throw UsageError("--out is required");
  if (o.trials < 1) throw UsageError("--trials must be >= 1");
  if (o.omegas.empty()) throw UsageError("--omega must list at least one value");
  for (const double w : o.omegas) {
    if (!(w > 0.0)) throw UsageError("--omega values must be positive");
  }

  const Instance inst = build_instance(o);
  std::vector<std::string> regimes = {"gc"};
  if (inst.spec.loss.ridge > 0.0) {
    regimes = {"gc", "sc-uniform", "sc-nonuniform"};
  }

  spdhg::ReferencePoint ref;
  try {
    ref = spdhg::compute_reference(inst.spec, o.ref_max_iters, o.ref_tol, o.s);
  } catch (const spdhg::ReferenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }

  fs::create_directories(o.out);
  bool exceeded = false;
  for (std::size_t ri = 0; ri < regimes.size(); ++ri) {
    spdhg::SolverConfig cfg = base_config(o, inst.spec, regimes[ri]);
    cfg.seed = spdhg::Rng::derive(o.seed, kRegimeStreamBase + ri);
    for (const double omega : o.omegas) {
      const spdhg::TailReport report =
          spdhg::tail_experiment(inst.spec, cfg, ref, omega, o.trials, o.jobs);
      std::ostringstream name;
      name << "tail_" << regimes[ri] << "_omega" << omega << ".json";
      write_text_file((fs::path(o.out) / name.str()).string(),
                      spdhg::tail_report_json(report, regimes[ri]));
      std::cout << regimes[ri] << " omega=" << omega
                << ": rate=" << report.empirical_rate
                << " cap=" << report.theoretical_cap << "\n";
      if (report.empirical_rate > report.theoretical_cap) exceeded = true;
    }
  }
  write_manifest(o, (fs::path(o.out) / "manifest.json").string());
  return exceeded ? kExitFailure : 0;
}

int run_make_graph(const Options& o) {
  if (o.out.empty()) throw UsageError("--out is required");
  require_readable(o.data);
  const spdhg::Dataset ds = spdhg::load_libsvm_file(o.data);
  const std::vector<spdhg::Edge> edges = spdhg::build_graph_by_correlation(
      ds, o.graph_threshold, o.graph_max_edges);
  std::string text;
  for (const spdhg::Edge& e : edges) {
    text += std::to_string(e.i) + " " + std::to_string(e.j) + " " +
            spdhg::format_double(e.correlation) + "\n";
  }
  write_text_file(o.out, text);
  write_manifest(o, o.out + ".manifest.json");
  return 0;
}

void add_common_options(CLI::App* cmd, Options* o, std::string* manifest_path) {
  cmd->add_option("--manifest", *manifest_path,
                  "replay a manifest JSON; other flags are ignored");
  cmd->add_option("--data", o->data, "libsvm dataset (gzip accepted for .gz)");
  cmd->add_option("--model", o->model, "gglr | ggrlr");
  cmd->add_option("--solver", o->solvers, "spdhg | lpdhg | gadmm")
      ->delimiter(',');
  cmd->add_option("--regime", o->regimes, "gc | sc-uniform | sc-nonuniform")
      ->delimiter(',');
  cmd->add_option("--lambda", o->lambda, "fusion penalty weight");
  cmd->add_option("--gamma", o->gamma, "ridge coefficient (ggrlr)");
  cmd->add_option("--s", o->s, "dual proximal step");
  cmd->add_option("--rho", o->rho, "ADMM penalty/step");
  cmd->add_option("--radius-x", o->radius_x, "radius of the primal l2 ball");
  cmd->add_option("--train-fraction", o->train_fraction, "training split share");
  cmd->add_option("--iters", o->iters, "update steps (train/validate-hp) or"
                  " stochastic steps defining the epoch budget (compare)");
  cmd->add_option("--seed", o->seed, "master seed");
  cmd->add_option("--checkpoint-every", o->checkpoint_every,
                  "checkpoint interval: iterations (train), epochs (compare)");
  cmd->add_option("--repetitions", o->repetitions, "seeds averaged by compare");
  cmd->add_option("--jobs", o->jobs, "worker threads");
  cmd->add_option("--trials", o->trials, "Monte-Carlo trials (validate-hp)");
  cmd->add_option("--omega", o->omegas, "confidence parameters (validate-hp)")
      ->delimiter(',');
  cmd->add_option("--graph", o->graph, "edge-list file for the penalty matrix");
  cmd->add_option("--graph-threshold", o->graph_threshold,
                  "|correlation| threshold for built graphs");
  cmd->add_option("--graph-max-edges", o->graph_max_edges, "edge cap");
  cmd->add_option("--lpdhg-step", o->lpdhg_step, "constant | schedule");
  cmd->add_option("--timing", o->timing,
                  "wall | off (off zeroes elapsed_ms for byte-stable output)");
  cmd->add_flag("--with-reference", o->with_reference,
                "compute a saddle reference and fill the gap column (train)");
  cmd->add_option("--ref-tol", o->ref_tol, "reference fixed-point tolerance");
  cmd->add_option("--ref-max-iters", o->ref_max_iters, "reference budget");
  cmd->add_option("--out", o->out, "output path (directory for validate-hp)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Primal-dual solvers for compositely regularized minimization"};
  app.require_subcommand(1);

  Options opts;
  std::string manifest_path;
  CLI::App* train = app.add_subcommand("train", "run one solver, write a trace CSV");
  CLI::App* compare =
      app.add_subcommand("compare", "seed-averaged comparison of methods");
  CLI::App* validate =
      app.add_subcommand("validate-hp", "Monte-Carlo tail-bound validation");
  CLI::App* make_graph =
      app.add_subcommand("make-graph", "write a correlation edge list");
  for (CLI::App* cmd : {train, compare, validate, make_graph}) {
    add_common_options(cmd, &opts, &manifest_path);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (!manifest_path.empty()) {
      std::ifstream in(manifest_path);
      if (!in) throw UsageError("cannot read manifest: " + manifest_path);
      ordered_json j;
      in >> j;
      const std::string out_override = opts.out;
      opts = options_from_json(j);
      if (!opts.command.empty() && opts.command != command) {
        throw UsageError("manifest was recorded for '" + opts.command +
                         "', not '" + command + "'");
      }
      if (!out_override.empty()) opts.out = out_override;
    }
    opts.command = command;

    if (command == "train") return run_train(opts);
    if (command == "compare") return run_compare(opts);
    if (command == "validate-hp") return run_validate_hp(opts);
    if (command == "make-graph") return run_make_graph(opts);
    throw UsageError("unknown command: " + command);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}
