#include "gsync/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include <omp.h>

namespace gsync {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ParameterError(where + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ParameterError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read_if(const json& j, const char* key, T& dst) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParameterError(std::string("bad value for '") + key + "': " + e.what());
  }
}

std::string format_instance(InstanceFormat f) {
  return f == InstanceFormat::g2o_2d ? "g2o" : "edge_measurements";
}

std::string init_name(InitKind k) {
  switch (k) {
    case InitKind::random: return "random";
    case InitKind::spectral: return "spectral";
    case InitKind::given: return "given";
  }
  return "?";
}

}  // namespace

void ExperimentConfig::validate() const {
  if (r < 1) throw ParameterError("r must be >= 1");
  if (trials < 1) throw ParameterError("trials must be >= 1");
  if (p.empty()) throw ParameterError("p list is empty");
  for (Index pv : p)
    if (pv < r) throw ParameterError("every p must be >= r");
  if (sigma.empty()) throw ParameterError("sigma list is empty");
  for (double s : sigma)
    if (!(s >= 0.0) || !std::isfinite(s)) throw ParameterError("every sigma must be finite and >= 0");
  if (flow_init != "random" && flow_init != "twisted")
    throw ParameterError("flow init must be 'random' or 'twisted'");
  if (flow_init == "twisted" && r != 1) throw ParameterError("twisted flow init needs r = 1");
  solver.validate();
}

ExperimentConfig config_from_json(const json& j, ExperimentConfig c) {
  check_keys(j, {"graph", "r", "field", "p", "sigma", "trials", "seed", "solver", "flow", "instance",
                 "point", "output"},
             "config");
  if (j.contains("graph")) {
    const json& g = j.at("graph");
    check_keys(g, {"kind", "n", "degree", "probability", "expected_degree", "path", "seed"}, "graph");
    if (g.contains("kind")) c.graph.kind = parse_graph_kind(g.at("kind").get<std::string>());
    read_if(g, "n", c.graph.n);
    read_if(g, "degree", c.graph.degree);
    read_if(g, "probability", c.graph.probability);
    read_if(g, "path", c.graph.path);
    read_if(g, "seed", c.graph.seed);
    if (g.contains("expected_degree")) {
      if (c.graph.n < 2) throw ParameterError("expected_degree needs n >= 2");
      c.graph.probability = g.at("expected_degree").get<double>() / double(c.graph.n - 1);
    }
  }
  read_if(j, "r", c.r);
  if (j.contains("field")) c.field = parse_field(j.at("field").get<std::string>());
  if (j.contains("p")) {
    if (j.at("p").is_array())
      c.p = j.at("p").get<std::vector<Index>>();
    else
      c.p = {j.at("p").get<Index>()};
  }
  if (j.contains("sigma")) {
    if (j.at("sigma").is_array())
      c.sigma = j.at("sigma").get<std::vector<double>>();
    else
      c.sigma = {j.at("sigma").get<double>()};
  }
  read_if(j, "trials", c.trials);
  read_if(j, "seed", c.seed);
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    check_keys(s, {"max_iters", "grad_tol", "hess_tol", "initial_step", "backtrack", "armijo",
                   "escape_step", "init", "hess_dense_limit"},
               "solver");
    read_if(s, "max_iters", c.solver.max_iters);
    read_if(s, "grad_tol", c.solver.grad_tol);
    read_if(s, "hess_tol", c.solver.hess_tol);
    read_if(s, "initial_step", c.solver.initial_step);
    read_if(s, "backtrack", c.solver.backtrack);
    read_if(s, "armijo", c.solver.armijo);
    read_if(s, "escape_step", c.solver.escape_step);
    read_if(s, "hess_dense_limit", c.solver.hess.dense_limit);
    if (s.contains("init")) c.init = parse_init_kind(s.at("init").get<std::string>());
  }
  if (j.contains("flow")) {
    const json& f = j.at("flow");
    check_keys(f, {"dt", "t_max", "sync_tol", "rhs_tol", "init", "q", "sample_interval"}, "flow");
    read_if(f, "dt", c.flow.dt);
    read_if(f, "t_max", c.flow.t_max);
    read_if(f, "sync_tol", c.flow.sync_tol);
    read_if(f, "rhs_tol", c.flow.rhs_tol);
    read_if(f, "init", c.flow_init);
    read_if(f, "q", c.twist_q);
    read_if(f, "sample_interval", c.flow.sample_interval);
  }
  if (j.contains("instance")) {
    const json& in = j.at("instance");
    check_keys(in, {"path", "format"}, "instance");
    read_if(in, "path", c.instance_path);
    if (in.contains("format")) c.instance_format = parse_instance_format(in.at("format").get<std::string>());
  }
  read_if(j, "point", c.point_path);
  if (j.contains("output")) {
    const json& o = j.at("output");
    check_keys(o, {"csv", "svg_dir", "json", "instance", "point", "trajectory_dir"}, "output");
    read_if(o, "csv", c.output.csv);
    read_if(o, "svg_dir", c.output.svg_dir);
    read_if(o, "json", c.output.json);
    read_if(o, "instance", c.output.instance);
    read_if(o, "point", c.output.point);
    read_if(o, "trajectory_dir", c.output.trajectory_dir);
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParameterError("config '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

json to_json(const ExperimentConfig& c) {
  return json{
      {"graph",
       {{"kind", to_string(c.graph.kind)},
        {"n", c.graph.n},
        {"degree", c.graph.degree},
        {"probability", c.graph.probability},
        {"path", c.graph.path},
        {"seed", c.graph.seed}}},
      {"r", c.r},
      {"field", to_string(c.field)},
      {"p", c.p},
      {"sigma", c.sigma},
      {"trials", c.trials},
      {"seed", c.seed},
      {"solver",
       {{"max_iters", c.solver.max_iters},
        {"grad_tol", c.solver.grad_tol},
        {"hess_tol", c.solver.hess_tol},
        {"initial_step", c.solver.initial_step},
        {"backtrack", c.solver.backtrack},
        {"armijo", c.solver.armijo},
        {"escape_step", c.solver.escape_step},
        {"hess_dense_limit", c.solver.hess.dense_limit},
        {"init", init_name(c.init)}}},
      {"flow",
       {{"dt", c.flow.dt},
        {"t_max", c.flow.t_max},
        {"sync_tol", c.flow.sync_tol},
        {"rhs_tol", c.flow.rhs_tol},
        {"init", c.flow_init},
        {"q", c.twist_q},
        {"sample_interval", c.flow.sample_interval}}},
      {"instance", {{"path", c.instance_path}, {"format", format_instance(c.instance_format)}}},
      {"point", c.point_path},
      {"output",
       {{"csv", c.output.csv},
        {"svg_dir", c.output.svg_dir},
        {"json", c.output.json},
        {"instance", c.output.instance},
        {"point", c.output.point},
        {"trajectory_dir", c.output.trajectory_dir}}},
  };
}

json to_json(const CertificateReport& c) {
  return json{{"verdict", to_string(c.verdict)},
              {"first_order_residual", c.first_order_residual},
              {"first_order_tol", c.first_order_tol_abs},
              {"min_tangent_hess_eig", c.min_tangent_hess_eig},
              {"s_min_eig", c.s_min_eig},
              {"psd_slack", c.psd_slack_abs},
              {"numerical_rank", c.numerical_rank},
              {"rank_tolerance", c.rank_tolerance},
              {"p", c.p},
              {"lhat_opnorm", c.lhat_norm}};
}

json to_json(const TheoryBounds& b) {
  auto opt = [](const auto& o) -> json { return o ? json(*o) : json(nullptr); };
  return json{{"p", b.p},
              {"r", b.r},
              {"n", b.n},
              {"lambda2", b.lambda2},
              {"delta_opnorm", b.delta_opnorm},
              {"c_p", opt(b.c_p)},
              {"rank_bound", opt(b.rank_bound)},
              {"benign_condition_holds", opt(b.benign_condition_holds)},
              {"corr_lower_bound", opt(b.corr_lower_bound)},
              {"large_p_condition_holds", b.large_p_condition_holds},
              {"large_p_corr_lower", b.large_p_corr_lower}};
}

template <typename S>
json to_json(const SolveReport<S>& r) {
  json j{{"status", to_string(r.status)},
         {"objective", r.objective},
         {"grad_norm", r.grad_norm},
         {"grad_tol", r.grad_tol_abs},
         {"min_hess_eig", r.min_hess_eig},
         {"hess_tol", r.hess_tol_abs},
         {"iterations", r.iterations},
         {"escapes", r.escapes},
         {"lhat_opnorm", r.lhat_norm}};
  if (!r.message.empty()) j["message"] = r.message;
  return j;
}
template json to_json<double>(const SolveReport<double>&);
template json to_json<cdouble>(const SolveReport<cdouble>&);

int worker_threads() {
  const int max = std::max(1, omp_get_max_threads());
  if (const char* env = std::getenv("SYNC_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return int(std::min<long>(v, max));
  }
  return max;
}

// ---- sweep --------------------------------------------------------------

TrialSeeds trial_seeds(std::uint64_t base, std::size_t p_idx, std::size_t sigma_idx, int trial) {
  const std::uint64_t cell = derive_seed(base, {p_idx, sigma_idx, std::uint64_t(trial)});
  return {derive_seed(cell, {1}), derive_seed(cell, {2}), derive_seed(cell, {3})};
}

namespace {

template <typename S>
TrialRecord run_trial(const ExperimentConfig& cfg, const Graph& g, double lambda2, std::size_t pi,
                      std::size_t si, int trial) {
  TrialRecord rec;
  rec.p_idx = pi;
  rec.sigma_idx = si;
  rec.trial = trial;
  const Index p = cfg.p[pi];
  const double sigma = cfg.sigma[si];
  const TrialSeeds seeds = trial_seeds(cfg.seed, pi, si, trial);
  try {
    Mat<S> truth = sample_ground_truth<S>(g.n(), cfg.r, seeds.truth);
    const NoiseModel noise = sigma > 0.0 ? NoiseModel::gaussian(sigma) : NoiseModel{};
    const SyncInstance<S> inst = make_instance(g, std::move(truth), noise, seeds.noise);
    const auto lhat = connection_laplacian(inst.measurements);
    const StiefelPoint<S> init = cfg.init == InitKind::spectral
                                     ? spectral_init(lhat, p)
                                     : random_point<S>(g.n(), cfg.r, p, seeds.init);
    SolveOptions so = cfg.solver;
    so.seed = seeds.init;
    const auto t0 = std::chrono::steady_clock::now();
    const SolveReport<S> rep = solve(lhat, init, so);
    rec.outcome.time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rec.status = rep.status;
    rec.outcome.iterations = rep.iterations;
    if (rep.status == SolveStatus::numerical_failure) throw NumericalError(rep.message, rep.iterations, rep.objective);

    CertifyOptions co;
    co.lhat_norm = rep.lhat_norm;
    co.hess = so.hess;
    const CertificateReport cert = certify(lhat, rep.y, co);
    const Correlation corr = correlation(inst.truth, rep.y.matrix());
    rec.certificate = cert;
    rec.corr_raw = corr.raw;
    rec.outcome.corr = corr.normalized;
    rec.outcome.rank = cert.numerical_rank;
    rec.outcome.certified = cert.verdict == Verdict::certified_global;
    if (lambda2 > 0.0)
      rec.bounds = theory_bounds(p, cfg.r, g.n(), lambda2, noise_operator_norm(inst.delta));
  } catch (const std::exception& e) {
    rec.outcome.failed = true;
    rec.error = e.what();
  }
  return rec;
}

}  // namespace

SweepResult run_sweep(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  const Graph g = build_graph(cfg.graph);
  const LaplacianSummary ls = laplacian_summary(g);
  const double lambda2 = ls.connected ? ls.lambda2 : 0.0;

  const std::size_t np = cfg.p.size(), ns = cfg.sigma.size();
  const std::size_t nt = std::size_t(cfg.trials);
  const std::size_t total = np * ns * nt;
  SweepResult res;
  res.trials.resize(total);

  // Task k -> (p, sigma, trial) in row order; the pool may finish them in any
  // order, results land in their own slot.
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, threads))
  for (long k = 0; k < long(total); ++k) {
    const std::size_t pi = std::size_t(k) / (ns * nt);
    const std::size_t si = (std::size_t(k) / nt) % ns;
    const int t = int(std::size_t(k) % nt);
    res.trials[std::size_t(k)] = cfg.field == Field::real
                                     ? run_trial<double>(cfg, g, lambda2, pi, si, t)
                                     : run_trial<cdouble>(cfg, g, lambda2, pi, si, t);
  }

  for (std::size_t pi = 0; pi < np; ++pi) {
    for (std::size_t si = 0; si < ns; ++si) {
      SweepRow row;
      row.sigma = cfg.sigma[si];
      row.p = cfg.p[pi];
      for (std::size_t t = 0; t < nt; ++t) {
        const TrialOutcome& o = res.trials[(pi * ns + si) * nt + t].outcome;
        if (o.failed) {
          row.corr_mean = row.rank_r_frac = row.rank_def_frac = kNaN;
          row.time_mean_s = row.iters_mean = row.certified_frac = kNaN;
          break;
        }
        row.corr_mean += o.corr;
        row.rank_r_frac += o.rank == cfg.r ? 1.0 : 0.0;
        row.rank_def_frac += o.rank < row.p ? 1.0 : 0.0;
        row.time_mean_s += o.time_s;
        row.iters_mean += double(o.iterations);
        row.certified_frac += o.certified ? 1.0 : 0.0;
      }
      const double inv = 1.0 / double(nt);
      row.corr_mean *= inv;
      row.rank_r_frac *= inv;
      row.rank_def_frac *= inv;
      row.time_mean_s *= inv;
      row.iters_mean *= inv;
      row.certified_frac *= inv;
      res.rows.push_back(row);
    }
  }
  return res;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, bool include_timing) {
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s << std::setprecision(17);
  s << "sigma,p,corr_mean,rank_r_frac,rank_def_frac,time_mean_s,iters_mean,certified_frac\n";
  for (const auto& r : rows) {
    s << r.sigma << ',' << r.p << ',' << r.corr_mean << ',' << r.rank_r_frac << ',' << r.rank_def_frac
      << ',';
    if (include_timing) s << r.time_mean_s;
    s << ',' << r.iters_mean << ',' << r.certified_frac << '\n';
  }
  out << s.str();
}

namespace {

std::string svg_num(double v) {
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s << std::setprecision(4) << v;
  return s.str();
}

void write_chart(const std::string& path, const std::string& title,
                 const std::vector<SweepRow>& rows, double SweepRow::*metric) {
  const double W = 560, H = 360, L = 64, R = 110, T = 36, B = 48;
  std::vector<Index> ps;
  for (const auto& r : rows)
    if (std::find(ps.begin(), ps.end(), r.p) == ps.end()) ps.push_back(r.p);
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& r : rows) {
    x0 = std::min(x0, r.sigma);
    x1 = std::max(x1, r.sigma);
    if (std::isfinite(r.*metric)) {
      y0 = std::min(y0, r.*metric);
      y1 = std::max(y1, r.*metric);
    }
  }
  if (!std::isfinite(y0)) y0 = 0.0, y1 = 1.0;
  if (x1 <= x0) x1 = x0 + 1.0;
  if (y1 <= y0) y1 = y0 + 1.0;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  std::ofstream out(path);
  if (!out) throw ParameterError("cannot write '" + path + "'");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title
      << "</text>\n";
  out << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
    out << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">"
        << svg_num(xv) << "</text>\n";
    out << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << svg_num(yv)
        << "</text>\n";
  }
  out << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">sigma</text>\n";
  for (std::size_t s = 0; s < ps.size(); ++s) {
    const char* c = colors[s % 6];
    std::ostringstream pts;
    for (const auto& r : rows)
      if (r.p == ps[s] && std::isfinite(r.*metric)) pts << px(r.sigma) << ',' << py(r.*metric) << ' ';
    out << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"2\" points=\"" << pts.str()
        << "\"/>\n";
    out << "<text x=\"" << W - R + 12 << "\" y=\"" << T + 16 * (s + 1) << "\" fill=\"" << c
        << "\">p = " << ps[s] << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace

std::vector<std::string> write_sweep_svgs(const std::string& dir, const std::vector<SweepRow>& rows) {
  std::filesystem::create_directories(dir);
  const std::pair<const char*, double SweepRow::*> metrics[] = {
      {"corr_mean", &SweepRow::corr_mean},         {"rank_r_frac", &SweepRow::rank_r_frac},
      {"rank_def_frac", &SweepRow::rank_def_frac}, {"time_mean_s", &SweepRow::time_mean_s},
      {"iters_mean", &SweepRow::iters_mean},       {"certified_frac", &SweepRow::certified_frac}};
  std::vector<std::string> paths;
  for (const auto& [name, m] : metrics) {
    const std::string path = (std::filesystem::path(dir) / (std::string(name) + ".svg")).string();
    write_chart(path, name, rows, m);
    paths.push_back(path);
  }
  return paths;
}

// ---- flow ---------------------------------------------------------------

namespace {

template <typename S>
FlowTrialResult run_flow_trial(const ExperimentConfig& cfg, const Graph& g, std::size_t pi, int trial) {
  FlowTrialResult res;
  res.p = cfg.p[pi];
  res.trial = trial;
  const StiefelPoint<S> y0 = cfg.flow_init == "twisted"
                                 ? twisted_state<S>(g.n(), cfg.twist_q, res.p)
                                 : random_point<S>(g.n(), cfg.r, res.p, trial_seeds(cfg.seed, pi, 0, trial).init);
  try {
    const FlowReport<S> rep = integrate_flow(g, y0, cfg.flow);
    res.termination = to_string(rep.termination);
    res.final_sync_error = sync_error(rep.final_point);
    res.time_to_sync = rep.termination == FlowTermination::synchronized ? rep.t_final : kNaN;
    res.steps = rep.steps;
    res.samples = rep.samples;
  } catch (const NumericalError& e) {
    res.termination = "numerical_failure";
    res.final_sync_error = kNaN;
    res.time_to_sync = kNaN;
    res.steps = e.iterations();
  }
  return res;
}

}  // namespace

std::vector<FlowTrialResult> run_flow(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  const Graph g = build_graph(cfg.graph);
  const std::size_t np = cfg.p.size(), nt = std::size_t(cfg.trials);
  std::vector<FlowTrialResult> out(np * nt);
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, threads))
  for (long k = 0; k < long(np * nt); ++k) {
    const std::size_t pi = std::size_t(k) / nt;
    const int t = int(std::size_t(k) % nt);
    out[std::size_t(k)] = cfg.field == Field::real ? run_flow_trial<double>(cfg, g, pi, t)
                                                   : run_flow_trial<cdouble>(cfg, g, pi, t);
  }
  return out;
}

void write_flow_csv(std::ostream& out, const std::vector<FlowTrialResult>& trials) {
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s << std::setprecision(17) << "p,trial,termination,final_sync_error,time_to_sync,steps\n";
  for (const auto& t : trials)
    s << t.p << ',' << t.trial << ',' << t.termination << ',' << t.final_sync_error << ','
      << t.time_to_sync << ',' << t.steps << '\n';
  out << s.str();
}

}  // namespace gsync
