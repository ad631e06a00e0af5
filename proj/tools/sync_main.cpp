// sync: command-line front end for the group synchronization library.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "gsync/experiment.hpp"

using namespace gsync;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kConfig = 1, kMaxIters = 2, kNumerical = 3 };

/// Flag overrides layered on top of the JSON config.
struct Overrides {
  std::string config;
  std::string graph, field, instance, format, point, init, flow_init, graph_path;
  Index n = 0, r = 0, degree = 0, q = 0;
  double probability = -1, expected_degree = -1, dt = -1, t_max = -1;
  std::vector<Index> p;
  std::vector<double> sigma;
  int trials = 0;
  long max_iters = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_json, out_csv, out_svg, out_instance, out_point, out_traj;

  void add_common(CLI::App* app) {
    app->add_option("--config", config, "JSON config file");
    app->add_option("--graph", graph, "complete|cycle|circulant|erdos_renyi|edge_list");
    app->add_option("--graph-file", graph_path, "edge list for --graph edge_list");
    app->add_option("--n", n, "vertex count");
    app->add_option("--degree", degree, "circulant degree");
    app->add_option("--probability", probability, "Erdos-Renyi edge probability");
    app->add_option("--expected-degree", expected_degree, "Erdos-Renyi expected degree");
    app->add_option("--r", r, "block size");
    app->add_option("--p", p, "relaxation rank(s)");
    app->add_option("--sigma", sigma, "noise level(s)");
    app->add_option("--field", field, "real|complex");
    app->add_option("--trials", trials, "trials per cell");
    app->add_option("--seed", seed, "base seed")->each([this](const std::string&) { seed_set = true; });
  }

  ExperimentConfig resolve() const {
    ExperimentConfig c = config.empty() ? ExperimentConfig{} : load_config(config);
    if (!graph.empty()) c.graph.kind = parse_graph_kind(graph);
    if (!graph_path.empty()) c.graph.path = graph_path;
    if (n > 0) c.graph.n = n;
    if (degree > 0) c.graph.degree = degree;
    if (probability >= 0) c.graph.probability = probability;
    if (expected_degree >= 0) c.graph.probability = expected_degree / double(std::max<Index>(1, c.graph.n - 1));
    if (r > 0) c.r = r;
    if (!p.empty()) c.p = p;
    if (!sigma.empty()) c.sigma = sigma;
    if (!field.empty()) c.field = parse_field(field);
    if (trials > 0) c.trials = trials;
    if (seed_set) c.seed = seed;
    if (!instance.empty()) c.instance_path = instance;
    if (!format.empty()) c.instance_format = parse_instance_format(format);
    if (!point.empty()) c.point_path = point;
    if (!init.empty()) c.init = parse_init_kind(init);
    if (max_iters > 0) c.solver.max_iters = max_iters;
    if (!flow_init.empty()) c.flow_init = flow_init;
    if (q > 0) c.twist_q = q;
    if (dt > 0) c.flow.dt = dt;
    if (t_max > 0) c.flow.t_max = t_max;
    if (!out_json.empty()) c.output.json = out_json;
    if (!out_csv.empty()) c.output.csv = out_csv;
    if (!out_svg.empty()) c.output.svg_dir = out_svg;
    if (!out_instance.empty()) c.output.instance = out_instance;
    if (!out_point.empty()) c.output.point = out_point;
    if (!out_traj.empty()) c.output.trajectory_dir = out_traj;
    c.validate();
    return c;
  }
};

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ParameterError("cannot write '" + path + "'");
  return f;
}

void emit_json(const json& j, const std::string& path) {
  const std::string text = j.dump(2) + "\n";
  std::cout << text;
  if (!path.empty()) open_out(path) << text;
}

/// Measurements plus whatever is known about their origin.
template <typename S>
struct Loaded {
  Measurements<S> m;
  std::optional<SyncInstance<S>> generated;
  std::vector<std::string> warnings;
  double sigma = 0.0;
};

template <typename S>
Loaded<S> generate(const ExperimentConfig& c) {
  const Graph g = build_graph(c.graph);
  const TrialSeeds s = trial_seeds(c.seed, 0, 0, 0);
  const double sigma = c.sigma.front();
  const NoiseModel noise = sigma > 0 ? NoiseModel::gaussian(sigma) : NoiseModel{};
  Mat<S> truth;
  if constexpr (!is_complex<S>::value) {
    // g2o stores rotations only, so the truth comes from SO(2) there.
    if (c.instance_format == InstanceFormat::g2o_2d && c.r == 2)
      truth = sample_rotation_truth(g.n(), c.r, s.truth);
  }
  if (truth.size() == 0) truth = sample_ground_truth<S>(g.n(), c.r, s.truth);
  auto inst = make_instance(g, std::move(truth), noise, s.noise);
  Loaded<S> out{inst.measurements, std::move(inst), {}, sigma};
  return out;
}

std::optional<ParsedInstance> parse_source(const ExperimentConfig& c) {
  if (c.instance_path.empty()) return std::nullopt;
  return parse_instance_file(c.instance_path, c.instance_format);
}

json instance_json(const Graph& g, Index r, Index p, Field f, const std::optional<double>& sigma) {
  const LaplacianSummary ls = laplacian_summary(g);
  json j{{"n", g.n()},
         {"edges", g.edge_count()},
         {"r", r},
         {"p", p},
         {"field", to_string(f)},
         {"connected", ls.connected},
         {"lambda2", ls.lambda2},
         {"max_degree", g.max_degree()}};
  j["sigma"] = sigma ? json(*sigma) : json(nullptr);
  return j;
}

template <typename S>
int solve_or_certify(const ExperimentConfig& c, Loaded<S> src, bool certify_only) {
  const Graph& g = src.m.graph;
  const Index r = src.m.r;
  const auto lhat = connection_laplacian(src.m);
  json doc;
  std::vector<std::string> warnings = src.warnings;

  StiefelPoint<S> y;
  if (certify_only || c.init == InitKind::given) {
    if (c.point_path.empty()) throw ParameterError("a point file is required (--point)");
    std::ifstream in(c.point_path);
    if (!in) throw ParameterError("cannot open point file '" + c.point_path + "'");
    ParsedPoint pt = read_point(in);
    if (pt.field != field_of<S>) throw ParameterError("point field does not match the instance");
    Mat<S> m;
    if constexpr (is_complex<S>::value) m = pt.complex; else m = pt.real;
    y = StiefelPoint<S>(std::move(m), pt.r);
    if (y.n() != g.n() || y.r() != r) throw ParameterError("point shape does not match the instance");
  } else if (c.init == InitKind::spectral) {
    y = spectral_init(lhat, c.p.front(), &warnings);
  } else {
    y = random_point<S>(g.n(), r, c.p.front(), trial_seeds(c.seed, 0, 0, 0).init);
  }
  doc["instance"] = instance_json(g, r, y.p(), field_of<S>,
                                  src.generated ? std::optional<double>(src.sigma) : std::nullopt);

  int code = kOk;
  double lnorm = -1.0;
  if (!certify_only) {
    SolveOptions so = c.solver;
    const SolveReport<S> rep = solve(lhat, y, so);
    doc["solve"] = to_json(rep);
    y = rep.y;
    lnorm = rep.lhat_norm;
    if (rep.status == SolveStatus::max_iters) code = kMaxIters;
    if (rep.status == SolveStatus::numerical_failure) code = kNumerical;
    if (!c.output.point.empty()) {
      auto f = open_out(c.output.point);
      write_point(f, y.matrix(), r);
    }
  }

  CertifyOptions co;
  co.lhat_norm = lnorm;
  co.hess = c.solver.hess;
  try {
    doc["certificate"] = to_json(certify(lhat, y, co));
  } catch (const CertificationError& e) {
    doc["certificate"] = to_json(e.partial());
    doc["certificate"]["error"] = e.what();
    code = kNumerical;
  }

  if (src.generated) {
    const auto& inst = *src.generated;
    const Correlation corr = correlation(inst.truth, y.matrix());
    doc["correlation"] = {{"raw", corr.raw}, {"normalized", corr.normalized}};
    const LaplacianSummary ls = laplacian_summary(g);
    if (ls.connected)
      doc["theory"] = to_json(theory_bounds(y.p(), r, g.n(), ls.lambda2, noise_operator_norm(inst.delta)));
  }
  doc["warnings"] = warnings;
  emit_json(doc, c.output.json);
  return code;
}

template <typename S>
Loaded<S> from_parsed(ParsedInstance pi) {
  Loaded<S> out{std::get<Measurements<S>>(std::move(pi.measurements)), std::nullopt, pi.warnings, 0.0};
  return out;
}

int cmd_solve(const ExperimentConfig& c, bool certify_only) {
  if (auto pi = parse_source(c)) {
    for (const auto& w : pi->warnings) std::cerr << "warning: " << w << "\n";
    if (pi->field() == Field::real) return solve_or_certify(c, from_parsed<double>(std::move(*pi)), certify_only);
    return solve_or_certify(c, from_parsed<cdouble>(std::move(*pi)), certify_only);
  }
  if (c.field == Field::real) return solve_or_certify(c, generate<double>(c), certify_only);
  return solve_or_certify(c, generate<cdouble>(c), certify_only);
}

template <typename S>
int gen_impl(const ExperimentConfig& c) {
  const Loaded<S> src = generate<S>(c);
  auto write = [&](std::ostream& os) {
    if (c.instance_format == InstanceFormat::g2o_2d) {
      if constexpr (is_complex<S>::value) {
        throw ParameterError("g2o output needs a real field");
      } else {
        if (c.r != 2) throw ParameterError("g2o output needs r = 2");
        if (src.sigma > 0.0)
          std::cerr << "warning: g2o keeps only the rotation nearest each noisy measurement\n";
        write_g2o_2d(os, src.m);
      }
    } else {
      write_edge_measurements(os, src.m);
    }
  };
  if (c.output.instance.empty()) {
    write(std::cout);
  } else {
    auto f = open_out(c.output.instance);
    write(f);
  }
  if (!c.output.point.empty()) {
    auto f = open_out(c.output.point);
    write_point(f, src.generated->truth, c.r);
  }
  return kOk;
}

int cmd_gen(const ExperimentConfig& c) {
  return c.field == Field::real ? gen_impl<double>(c) : gen_impl<cdouble>(c);
}

int cmd_sweep(const ExperimentConfig& c) {
  const SweepResult res = run_sweep(c, worker_threads());
  std::size_t failed = 0;
  for (const auto& t : res.trials)
    if (t.outcome.failed) {
      ++failed;
      std::cerr << "trial failed (p=" << c.p[t.p_idx] << ", sigma=" << c.sigma[t.sigma_idx]
                << ", trial=" << t.trial << "): " << t.error << "\n";
    }
  if (c.output.csv.empty()) {
    write_sweep_csv(std::cout, res.rows);
  } else {
    auto f = open_out(c.output.csv);
    write_sweep_csv(f, res.rows);
  }
  if (!c.output.svg_dir.empty()) write_sweep_svgs(c.output.svg_dir, res.rows);
  std::cerr << res.trials.size() << " trials, " << failed << " failed\n";
  return kOk;
}

int cmd_flow(const ExperimentConfig& c) {
  const auto trials = run_flow(c, worker_threads());
  if (c.output.csv.empty()) {
    write_flow_csv(std::cout, trials);
  } else {
    auto f = open_out(c.output.csv);
    write_flow_csv(f, trials);
  }
  if (!c.output.trajectory_dir.empty()) {
    std::filesystem::create_directories(c.output.trajectory_dir);
    for (const auto& t : trials) {
      const auto path = std::filesystem::path(c.output.trajectory_dir) /
                        ("flow_p" + std::to_string(t.p) + "_trial" + std::to_string(t.trial) + ".csv");
      auto f = open_out(path.string());
      write_trajectory_csv(f, t.samples);
    }
  }
  return kOk;
}

int cmd_selftest(double scale) {
  const auto checks = run_selftest(scale);
  int failed = 0;
  for (const auto& ch : checks) {
    std::printf("%s  %-48s error=%.3e tol=%.3e\n", ch.passed ? "PASS" : "FAIL", ch.name.c_str(), ch.error,
                ch.tolerance);
    failed += ch.passed ? 0 : 1;
  }
  std::printf("%zu checks, %d failed\n", checks.size(), failed);
  return failed == 0 ? kOk : kConfig;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Orthogonal and unitary group synchronization via low-rank Stiefel relaxations"};
  app.require_subcommand(1);
  Overrides ov;
  double tol_scale = 1.0;

  auto* gen = app.add_subcommand("gen", "generate a synthetic instance");
  ov.add_common(gen);
  gen->add_option("--format", ov.format, "edge_measurements|g2o");
  gen->add_option("--out", ov.out_instance, "measurement file (default stdout)");
  gen->add_option("--truth-out", ov.out_point, "ground-truth point file");

  auto* solve = app.add_subcommand("solve", "solve and certify one instance");
  ov.add_common(solve);
  solve->add_option("--instance", ov.instance, "measurement file (default: generate)");
  solve->add_option("--format", ov.format, "edge_measurements|g2o");
  solve->add_option("--init", ov.init, "random|spectral|given");
  solve->add_option("--point", ov.point, "initial point for --init given");
  solve->add_option("--max-iters", ov.max_iters, "iteration budget");
  solve->add_option("--json", ov.out_json, "also write the report here");
  solve->add_option("--point-out", ov.out_point, "write the final point");

  auto* cert = app.add_subcommand("certify", "certify a given point");
  ov.add_common(cert);
  cert->add_option("--instance", ov.instance, "measurement file (default: generate)");
  cert->add_option("--format", ov.format, "edge_measurements|g2o");
  cert->add_option("--point", ov.point, "point file")->required();
  cert->add_option("--json", ov.out_json, "also write the report here");

  auto* sweep = app.add_subcommand("sweep", "noise sweep over (p, sigma)");
  ov.add_common(sweep);
  sweep->add_option("--init", ov.init, "random|spectral");
  sweep->add_option("--max-iters", ov.max_iters, "iteration budget");
  sweep->add_option("--csv", ov.out_csv, "CSV output (default stdout)");
  sweep->add_option("--svg-dir", ov.out_svg, "directory for SVG charts");

  auto* flow = app.add_subcommand("flow", "Kuramoto flow trials");
  ov.add_common(flow);
  flow->add_option("--init", ov.flow_init, "random|twisted");
  flow->add_option("--q", ov.q, "winding number for twisted init");
  flow->add_option("--dt", ov.dt, "step size");
  flow->add_option("--t-max", ov.t_max, "time budget");
  flow->add_option("--csv", ov.out_csv, "CSV output (default stdout)");
  flow->add_option("--trajectory-dir", ov.out_traj, "per-trial trajectory CSVs");

  auto* self = app.add_subcommand("selftest", "run the embedded invariant checks");
  self->add_option("--tolerance-scale", tol_scale, "multiply every tolerance (0 forces failure)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfig;
  }

  try {
    if (self->parsed()) return cmd_selftest(tol_scale);
    const ExperimentConfig c = ov.resolve();
    if (gen->parsed()) return cmd_gen(c);
    if (solve->parsed()) return cmd_solve(c, false);
    if (cert->parsed()) return cmd_solve(c, true);
    if (sweep->parsed()) return cmd_sweep(c);
    if (flow->parsed()) return cmd_flow(c);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  }
  return kConfig;
}
