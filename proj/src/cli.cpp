#include "levy_ou/cli.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "levy_ou/acceptance.hpp"
#include "levy_ou/errors.hpp"
#include "levy_ou/format.hpp"
#include "levy_ou/levy_core.hpp"
#include "levy_ou/noise_field.hpp"
#include "levy_ou/ou_process.hpp"
#include "levy_ou/stats.hpp"
#include "levy_ou/tree_expansion.hpp"

namespace levy_ou::cli {

namespace {

using nlohmann::json;

struct Globals {
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "csv";
  int threads = 1;
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
};

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

json metadata(const std::string& command, const Globals& g, json config,
              const std::optional<LevyTriplet>& triplet) {
  json meta = {{"tool", "levy-ou"},
               {"version", kVersion},
               {"command", command},
               {"seed", g.seed},
               {"config", std::move(config)}};
  if (triplet) {
    json tj = *triplet;
    meta["triplet"] = tj;
    meta["triplet_hash"] = fnv1a_hex(tj.dump());
  }
  return meta;
}

std::string csv_cell(const json& v) {
  if (v.is_number()) return format_double(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "nan";
  return v.dump();
}

void write_table_csv(std::ostream& os, const Table& table) {
  for (std::size_t c = 0; c < table.columns.size(); ++c) os << (c ? "," : "") << table.columns[c];
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << csv_cell(row[c]);
    os << '\n';
  }
}

json table_json(const Table& table) {
  json rows = json::array();
  for (const auto& row : table.rows) rows.push_back(row);
  return {{"columns", table.columns}, {"rows", rows}};
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw InvalidInput("cannot open output file '" + path + "'");
  f.precision(17);
  return f;
}

// CSV goes to --out with a sidecar <out>.meta.json, or to stdout after a
// "# {meta}" line. JSON output embeds the metadata under "meta".
void emit_table(const Table& table, json meta, const Globals& g, std::ostream& out) {
  if (g.format == "json") {
    json doc = table_json(table);
    doc["meta"] = std::move(meta);
    if (g.out.empty()) {
      out << doc.dump(2) << '\n';
    } else {
      open_out(g.out) << doc.dump(2) << '\n';
    }
    return;
  }
  if (g.out.empty()) {
    out << "# " << meta.dump() << '\n';
    write_table_csv(out, table);
  } else {
    auto f = open_out(g.out);
    write_table_csv(f, table);
    open_out(g.out + ".meta.json") << meta.dump(2) << '\n';
  }
}

void emit_json(json body, json meta, const Globals& g, std::ostream& out) {
  body["meta"] = std::move(meta);
  if (g.out.empty()) {
    out << body.dump(2) << '\n';
  } else {
    open_out(g.out) << body.dump(2) << '\n';
  }
}

LevyTriplet load_triplet(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InvalidInput("cannot open triplet file '" + path + "'");
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw InvalidInput("triplet file '" + path + "': " + e.what());
  }
  LevyTriplet t = j.get<LevyTriplet>();
  validate(t);
  return t;
}

// A triplet comes from a JSON file or from scalar inline flags, never both.
struct TripletSource {
  std::string file;
  std::optional<double> drift;
  std::optional<double> sigma2;
  std::optional<double> jump_rate;
  std::vector<std::string> jumps;  // "weight:size" pairs

  bool inline_given() const { return drift || sigma2 || jump_rate || !jumps.empty(); }
  bool given() const { return !file.empty() || inline_given(); }

  LevyTriplet resolve(const LevyTriplet& fallback) const {
    if (!file.empty() && inline_given()) {
      throw InvalidInput("--triplet cannot be combined with --drift/--sigma2/--jump-rate/--jumps");
    }
    if (!file.empty()) return load_triplet(file);
    if (!inline_given()) return fallback;
    if (!jumps.empty() && !jump_rate) throw InvalidInput("--jumps requires --jump-rate");
    std::vector<std::pair<double, double>> parsed;
    for (const auto& item : jumps) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) throw InvalidInput("--jumps entry '" + item + "' is not weight:size");
      try {
        std::size_t used_w = 0;
        std::size_t used_s = 0;
        const std::string w = item.substr(0, colon);
        const std::string sz = item.substr(colon + 1);
        const double weight = std::stod(w, &used_w);
        const double size = std::stod(sz, &used_s);
        if (used_w != w.size() || used_s != sz.size()) throw std::invalid_argument(item);
        parsed.emplace_back(weight, size);
      } catch (const std::logic_error&) {
        throw InvalidInput("--jumps entry '" + item + "' is not weight:size");
      }
    }
    LevyTriplet t = LevyTriplet::scalar(drift.value_or(0.0), sigma2.value_or(0.0),
                                        jump_rate.value_or(0.0), parsed);
    validate(t);
    return t;
  }
};

void add_triplet_options(CLI::App* cmd, TripletSource& src) {
  cmd->add_option("--triplet", src.file, "Triplet JSON file");
  cmd->add_option("--drift", src.drift, "Inline scalar triplet: drift a");
  cmd->add_option("--sigma2", src.sigma2, "Inline scalar triplet: diffusion Sigma");
  cmd->add_option("--jump-rate", src.jump_rate, "Inline scalar triplet: jump intensity z");
  cmd->add_option("--jumps", src.jumps, "Inline scalar triplet: weight:size list")->delimiter(',');
}

Eigen::VectorXd as_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

OUParams make_params(double m, const std::vector<double>& x0, int dim) {
  OUParams params{m, as_vector(x0)};
  if (params.dim() == 1 && dim > 1) params.x0 = Eigen::VectorXd::Constant(dim, x0[0]);
  if (params.dim() != dim) throw InvalidInput("--x0 has " + std::to_string(params.dim()) +
                                              " entries, triplet dimension is " + std::to_string(dim));
  validate(params);
  return params;
}

TimeGrid make_grid(double t_end, int n, std::optional<double> dt) {
  return dt ? TimeGrid::with_step(*dt, t_end) : TimeGrid::lattice(n, t_end);
}

json grid_json(const TimeGrid& grid) {
  return {{"dt", grid.dt()}, {"t_end", grid.t_end()}, {"intervals", grid.intervals()}};
}

// ---- noise -------------------------------------------------------------

struct NoiseOpts {
  TripletSource triplet;
  double t_end = 1.0;
  std::vector<int> n{100};
  std::optional<double> dt;
  bool check_cf = false;
  std::string f = "exp-decay";
};

double named_test_function(const std::string& name, double t) {
  if (name == "exp-decay") return std::exp(-t);
  if (name == "one") return 1.0;
  if (name == "zero") return 0.0;
  throw InvalidInput("unknown --f '" + name + "' (expected exp-decay, one, zero)");
}

void cmd_noise(const NoiseOpts& o, const Globals& g, std::ostream& out, std::ostream& err) {
  if (!o.check_cf) {
    if (!o.triplet.given()) throw InvalidInput("noise: a triplet (--triplet or inline flags) is required");
    const LevyTriplet triplet = o.triplet.resolve(LevyTriplet::zero(1));
    const TimeGrid grid = make_grid(o.t_end, o.n.front(), o.dt);
    const NoisePath path = generate_path(triplet, grid, g.seed);
    Table table;
    table.columns.push_back("t");
    for (int j = 1; j <= triplet.dim; ++j) table.columns.push_back("dL_" + std::to_string(j));
    for (std::size_t k = 0; k < grid.intervals(); ++k) {
      std::vector<json> row{grid.node(k)};
      for (int j = 0; j < triplet.dim; ++j) row.push_back(path.increments(j, static_cast<Eigen::Index>(k)));
      table.rows.push_back(std::move(row));
    }
    emit_table(table, metadata("noise", g, {{"grid", grid_json(grid)}}, triplet), g, out);
    return;
  }
  const LevyTriplet triplet = o.triplet.resolve(LevyTriplet::scalar(0.0, 1.0));
  int max_n = 1;
  for (int n : o.n) {
    if (n < 1) throw InvalidInput("noise: --n entries must be >= 1");
    max_n = std::max(max_n, n);
  }
  const auto intervals = static_cast<std::size_t>(
      std::max(100000.0, std::ceil(16.0 * max_n * o.t_end)));
  const TimeGrid fine = TimeGrid::uniform(o.t_end, intervals);
  const TestFunction f = TestFunction::sample(fine, [&](double t) -> Eigen::VectorXd {
    return Eigen::VectorXd::Constant(triplet.dim, named_test_function(o.f, t));
  });
  const std::complex<double> limit = log_char_functional(triplet, f);
  Table table{{"n", "gap"}, {}};
  std::vector<double> ns;
  std::vector<double> gaps;
  for (int n : o.n) {
    const double gap = std::abs(log_cf_riemann(triplet, f, n) - limit);
    table.rows.push_back({n, gap});
    ns.push_back(n);
    gaps.push_back(gap);
  }
  json config = {{"f", o.f}, {"t_end", o.t_end}, {"n", o.n}, {"quadrature_intervals", intervals},
                 {"log_char_functional", {limit.real(), limit.imag()}}};
  bool positive = ns.size() >= 2;
  for (double gap : gaps) positive = positive && gap > 0.0;
  if (positive) {
    config["fitted_rate"] = -loglog_slope(ns, gaps);
    err << "fitted convergence rate: " << format_double(config["fitted_rate"].get<double>()) << '\n';
  }
  emit_table(table, metadata("noise", g, config, triplet), g, out);
}

// ---- simulate ----------------------------------------------------------

struct SimulateOpts {
  TripletSource triplet;
  double m = 1.0;
  std::vector<double> x0{0.0};
  double t_end = 1.0;
  int n = 100;
  std::optional<double> dt;
  bool exact = false;
  std::size_t ensemble = 1;
  bool summary = false;
};

void cmd_simulate(const SimulateOpts& o, const Globals& g, std::ostream& out) {
  const LevyTriplet triplet =
      o.triplet.resolve(LevyTriplet::scalar(0.0, 1.0));
  if (o.exact && (triplet.jump_rate != 0.0 || !triplet.jumps.empty())) {
    throw InvalidInput("simulate: --exact requires a triplet without jumps");
  }
  const OUParams params = make_params(o.m, o.x0, triplet.dim);
  const TimeGrid grid = make_grid(o.t_end, o.n, o.dt);
  if (o.ensemble < 1) throw InvalidInput("simulate: --ensemble must be >= 1");
  json config = {{"m", o.m}, {"x0", o.x0}, {"grid", grid_json(grid)}, {"exact", o.exact},
                 {"ensemble", o.ensemble}};
  if (!o.summary) {
    if (o.ensemble != 1) throw InvalidInput("simulate: --ensemble > 1 requires --summary");
    const ProcessPath path = o.exact ? simulate_exact_gaussian(params, triplet, grid, g.seed)
                                     : simulate_from_noise(params, generate_path(triplet, grid, g.seed));
    Table table;
    table.columns.push_back("t");
    for (int j = 1; j <= triplet.dim; ++j) table.columns.push_back("x_" + std::to_string(j));
    for (std::size_t k = 0; k < grid.nodes(); ++k) {
      std::vector<json> row{grid.node(k)};
      for (int j = 0; j < triplet.dim; ++j) row.push_back(path.states(j, static_cast<Eigen::Index>(k)));
      table.rows.push_back(std::move(row));
    }
    emit_table(table, metadata("simulate", g, config, triplet), g, out);
    return;
  }
  if (o.ensemble < 2) throw InvalidInput("simulate: --summary needs --ensemble >= 2");
  const Eigen::MatrixXd xs =
      o.exact ? terminal_states_exact_gaussian(params, triplet, grid, o.ensemble, g.seed, g.threads)
              : terminal_states_from_noise(params, triplet, grid, o.ensemble, g.seed, g.threads);
  const double t = grid.node(grid.intervals());
  const double m = params.m;
  const Eigen::VectorXd mean_exact =
      std::exp(-m * t) * params.x0 + triplet.unit_mean() * (-std::expm1(-m * t) / m);
  const Eigen::VectorXd var_exact =
      triplet.unit_covariance().diagonal() * (-std::expm1(-2.0 * m * t) / (2.0 * m));
  json components = json::array();
  for (int j = 0; j < triplet.dim; ++j) {
    const Eigen::VectorXd row = xs.row(j).transpose();
    const SampleMoments mo = moments(std::span<const double>(row.data(), row.size()));
    components.push_back({{"mean", mo.mean},
                          {"mean_stderr", mo.mean_stderr()},
                          {"variance", mo.variance},
                          {"variance_stderr", mo.variance_stderr()},
                          {"analytic_mean", mean_exact(j)},
                          {"analytic_variance", var_exact(j)}});
  }
  emit_json({{"t", t}, {"n_paths", o.ensemble}, {"components", components}},
            metadata("simulate", g, config, triplet), g, out);
}

// ---- density -----------------------------------------------------------

struct DensityOpts {
  bool mehler = false;
  bool brownian = false;
  double m = 1.0;
  double D = 0.5;
  double t = 1.0;
  double x0 = 0.0;
  double x_min = -5.0;
  double x_max = 5.0;
  std::size_t nodes = 401;
  bool compare_brownian = false;
};

void cmd_density(const DensityOpts& o, const Globals& g, std::ostream& out, std::ostream& err) {
  if (o.mehler && o.brownian) throw InvalidInput("density: choose one of --mehler, --brownian");
  if (o.nodes < 2 || !(o.x_max > o.x_min)) throw InvalidInput("density: bad x grid");
  const bool brownian = o.brownian;
  const Eigen::MatrixXd D = Eigen::MatrixXd::Constant(1, 1, o.D);
  const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(1, o.x0);
  const OUParams params{o.m, x0};
  Table table{{"x", "density"}, {}};
  if (o.compare_brownian) table.columns.insert(table.columns.end(), {"brownian", "rel_gap"});
  double worst = 0.0;
  const double h = (o.x_max - o.x_min) / static_cast<double>(o.nodes - 1);
  for (std::size_t i = 0; i < o.nodes; ++i) {
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, o.x_min + h * static_cast<double>(i));
    const double value = brownian ? brownian_density(D, o.t, x, x0) : mehler_density(params, D, o.t, x);
    std::vector<json> row{x(0), value};
    if (o.compare_brownian) {
      const double b = brownian_density(D, o.t, x, x0);
      const double gap = std::abs(value - b) / b;
      worst = std::max(worst, gap);
      row.insert(row.end(), {b, gap});
    }
    table.rows.push_back(std::move(row));
  }
  json config = {{"kind", brownian ? "brownian" : "mehler"}, {"m", o.m}, {"D", o.D}, {"t", o.t},
                 {"x0", o.x0}, {"x_min", o.x_min}, {"x_max", o.x_max}, {"nodes", o.nodes}};
  if (o.compare_brownian) {
    config["max_rel_gap"] = worst;
    err << "max relative gap to brownian density: " << format_double(worst) << '\n';
  }
  emit_table(table, metadata("density", g, config, std::nullopt), g, out);
}

// ---- charfn ------------------------------------------------------------

struct CharfnOpts {
  TripletSource triplet;
  double m = 1.0;
  std::vector<double> x0{0.0};
  double t = 1.0;
  std::vector<double> p;
  std::size_t n_quad = 10000;
  bool empirical = false;
  std::size_t ensemble = 100000;
  double dt = 1e-3;
};

void cmd_charfn(const CharfnOpts& o, const Globals& g, std::ostream& out, std::ostream& err) {
  const LevyTriplet triplet = o.triplet.resolve(LevyTriplet::scalar(0.0, 1.0));
  if (triplet.dim != 1) throw InvalidInput("charfn: one-dimensional triplet required");
  const OUParams params = make_params(o.m, o.x0, 1);
  std::vector<double> ps = o.p;
  if (ps.empty()) {
    for (int i = 0; i <= 20; ++i) ps.push_back(-5.0 + 0.5 * i);
  }
  Eigen::MatrixXd xs;
  if (o.empirical) {
    xs = terminal_states_from_noise(params, triplet, TimeGrid::with_step(o.dt, o.t), o.ensemble,
                                    g.seed, g.threads);
  }
  Table table{{"p", "re", "im"}, {}};
  if (o.empirical) table.columns.insert(table.columns.end(), {"emp_re", "emp_im", "abs_err"});
  double worst = 0.0;
  for (double p : ps) {
    const auto cf = char_function_xt(params, triplet, o.t, Eigen::VectorXd::Constant(1, p), o.n_quad);
    std::vector<json> row{p, cf.real(), cf.imag()};
    if (o.empirical) {
      double re = 0.0;
      double im = 0.0;
      for (Eigen::Index j = 0; j < xs.cols(); ++j) {
        re += std::cos(p * xs(0, j));
        im += std::sin(p * xs(0, j));
      }
      const std::complex<double> emp(re / xs.cols(), im / xs.cols());
      worst = std::max(worst, std::abs(emp - cf));
      row.insert(row.end(), {emp.real(), emp.imag(), std::abs(emp - cf)});
    }
    table.rows.push_back(std::move(row));
  }
  json config = {{"m", o.m}, {"x0", o.x0}, {"t", o.t}, {"n_quad", o.n_quad}};
  if (o.empirical) {
    config["ensemble"] = o.ensemble;
    config["dt"] = o.dt;
    config["max_abs_err"] = worst;
    config["mc_tolerance"] = 5.0 / std::sqrt(static_cast<double>(o.ensemble));
    err << "max |empirical - analytic|: " << format_double(worst) << '\n';
  }
  emit_table(table, metadata("charfn", g, config, triplet), g, out);
}

// ---- generator ---------------------------------------------------------

struct GeneratorOpts {
  bool heat = false;
  TripletSource triplet;
  std::vector<double> h{0.1, 0.05};
  double D = 0.5;
  double t = 1.0;
  double dt = 1e-3;
  double x0 = 0.0;
  double x_min = -6.0;
  double x_max = 6.0;
  std::string fn = "gaussian";
  double k = 1.0;
};

void cmd_generator(const GeneratorOpts& o, const Globals& g, std::ostream& out) {
  if (!(o.x_max > o.x_min)) throw InvalidInput("generator: bad x range");
  const auto line = [&](double h) {
    if (!(h > 0.0)) throw InvalidInput("generator: --h must be positive");
    const auto nodes = static_cast<std::size_t>(std::floor((o.x_max - o.x_min) / h + 1e-9)) + 1;
    return SpatialGrid::line(o.x_min, h, nodes);
  };
  if (o.heat) {
    const Eigen::MatrixXd D = Eigen::MatrixXd::Constant(1, 1, o.D);
    const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(1, o.x0);
    const std::vector<double> times{o.t};
    Table table{{"h", "dt", "max_residual", "ratio"}, {}};
    double previous = 0.0;
    for (double h : o.h) {
      // time step shrinks in proportion to h
      const double dt = o.dt * h / o.h.front();
      const double r = heat_residual(D, line(h), times, dt, x0);
      table.rows.push_back({h, dt, r, table.rows.empty() ? json(nullptr) : json(previous / r)});
      previous = r;
    }
    json config = {{"heat", true}, {"h", o.h}, {"D", o.D}, {"t", o.t}, {"dt", o.dt}, {"x0", o.x0},
                   {"x_min", o.x_min}, {"x_max", o.x_max}};
    emit_table(table, metadata("generator", g, config, std::nullopt), g, out);
    return;
  }
  const LevyTriplet triplet = o.triplet.resolve(LevyTriplet::scalar(0.0, 1.0));
  if (triplet.dim != 1) throw InvalidInput("generator: one-dimensional triplet required");
  const SpatialGrid grid = line(o.h.front());
  std::function<double(double)> P;
  if (o.fn == "gaussian") {
    P = [](double x) { return std::exp(-0.5 * x * x); };
  } else if (o.fn == "cos") {
    P = [&](double x) { return std::cos(o.k * x); };
  } else if (o.fn == "sin") {
    P = [&](double x) { return std::sin(o.k * x); };
  } else if (o.fn == "square") {
    P = [](double x) { return x * x; };
  } else {
    throw InvalidInput("unknown --fn '" + o.fn + "' (expected gaussian, cos, sin, square)");
  }
  const auto values = grid.sample([&](const Eigen::VectorXd& x) { return P(x(0)); });
  Table table{{"x", "P", "LP", "snap_error"}, {}};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!generator_stencil_fits(triplet, grid, i)) continue;
    const GeneratorValue v = generator_apply(triplet, grid, values, i);
    table.rows.push_back({grid.point(i)(0), values[i], v.value, v.snap_error});
  }
  json config = {{"fn", o.fn}, {"k", o.k}, {"h", o.h.front()}, {"x_min", o.x_min}, {"x_max", o.x_max}};
  emit_table(table, metadata("generator", g, config, triplet), g, out);
}

// ---- trees -------------------------------------------------------------

struct TreesOpts {
  int p = 2;
  int i = 0;
  int N = 2;
  double lambda = 0.1;
  std::vector<double> lambdas{0.05, 0.1, 0.2};
  double m = 1.0;
  double x0 = 0.5;
  TripletSource triplet;
  double t = 1.0;
  double dt = 1e-3;
  int refine = 8;
};

void cmd_trees(const std::string& action, const TreesOpts& o, const Globals& g, std::ostream& out,
               std::ostream& err) {
  const LevyTriplet triplet = o.triplet.resolve(LevyTriplet::scalar(0.0, 0.25));
  if (triplet.dim != 1) throw InvalidInput("trees: one-dimensional triplet required");
  const OUParams params = OUParams::scalar(o.m, o.x0);
  validate(params);
  const TimeGrid grid = TimeGrid::with_step(o.dt, o.t);
  const NoisePath path = generate_path(triplet, grid, g.seed);
  json config = {{"p", o.p}, {"m", o.m}, {"x0", o.x0}, {"t", o.t}, {"dt", o.dt}, {"refine", o.refine}};
  if (action == "enumerate") {
    const auto trees = enumerate_trees(o.p, o.i);
    TreeEvaluator evaluator(params, o.lambda, path, o.t);
    Table table{{"order", "tree", "value"}, {}};
    for (const auto& tree : trees) table.rows.push_back({o.i, render_tree(tree), evaluator.value(tree)});
    config["i"] = o.i;
    config["lambda"] = o.lambda;
    config["count"] = trees.size();
    err << trees.size() << " trees with " << o.i << " inner vertices (p = " << o.p << ")\n";
    emit_table(table, metadata("trees enumerate", g, config, triplet), g, out);
  } else if (action == "evaluate") {
    const SeriesReport report = truncated_series(params, triplet, o.lambda, o.p, o.N, path, o.t, o.refine);
    const double linear = simulate_from_noise(params, path).states(0, grid.intervals());
    json body = report;
    body["linear_solution"] = linear;
    body["linear_error"] = std::abs(report.total - linear);
    config["N"] = o.N;
    config["lambda"] = o.lambda;
    emit_json(body, metadata("trees evaluate", g, config, triplet), g, out);
  } else {
    const OrderCheck check = order_check(params, triplet, o.p, o.N, path, o.t, o.lambdas, o.refine);
    config["N"] = o.N;
    config["lambdas"] = o.lambdas;
    err << "fitted slope " << format_double(check.slope) << " (expected " << check.expected << ")\n";
    emit_json(json(check), metadata("trees order-check", g, config, triplet), g, out);
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"levy-ou"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lévy-driven Ornstein-Uhlenbeck toolkit: noise, simulation, densities, tree series"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Globals g;
  app.add_option("--seed", g.seed, "Master random seed")->capture_default_str();
  app.add_option("--out", g.out, "Output file (default: stdout)");
  app.add_option("--format", g.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads for ensembles")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  NoiseOpts noise;
  auto* noise_cmd = app.add_subcommand("noise", "Generate a Lévy noise path or check lattice CF convergence");
  add_triplet_options(noise_cmd, noise.triplet);
  noise_cmd->add_option("--t-end", noise.t_end)->capture_default_str();
  noise_cmd->add_option("--n", noise.n, "Lattice scale(s)")->delimiter(',');
  noise_cmd->add_option("--dt", noise.dt, "Step (overrides --n for path output)");
  noise_cmd->add_flag("--check-cf", noise.check_cf, "Emit the (n, gap) log-CF convergence table");
  noise_cmd->add_option("--f", noise.f, "Test function: exp-decay, one, zero")->capture_default_str();

  SimulateOpts sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate the generalized OU process");
  add_triplet_options(sim_cmd, sim.triplet);
  sim_cmd->add_option("--m", sim.m)->capture_default_str();
  sim_cmd->add_option("--x0", sim.x0)->delimiter(',');
  sim_cmd->add_option("--t", sim.t_end, "End time")->capture_default_str();
  sim_cmd->add_option("--n", sim.n, "Steps per unit time")->capture_default_str();
  sim_cmd->add_option("--dt", sim.dt, "Step (overrides --n)");
  sim_cmd->add_flag("--exact", sim.exact, "Exact Gaussian transitions");
  sim_cmd->add_option("--ensemble", sim.ensemble)->capture_default_str();
  sim_cmd->add_flag("--summary", sim.summary, "Emit ensemble statistics at t instead of a path");

  DensityOpts dens;
  auto* dens_cmd = app.add_subcommand("density", "Mehler or Brownian transition density on an x grid");
  dens_cmd->add_flag("--mehler", dens.mehler);
  dens_cmd->add_flag("--brownian", dens.brownian);
  dens_cmd->add_option("--m", dens.m)->capture_default_str();
  dens_cmd->add_option("--D", dens.D)->capture_default_str();
  dens_cmd->add_option("--t", dens.t)->capture_default_str();
  dens_cmd->add_option("--x0", dens.x0)->capture_default_str();
  dens_cmd->add_option("--x-min", dens.x_min)->capture_default_str();
  dens_cmd->add_option("--x-max", dens.x_max)->capture_default_str();
  dens_cmd->add_option("--nodes", dens.nodes)->capture_default_str();
  dens_cmd->add_flag("--compare-brownian", dens.compare_brownian);

  CharfnOpts cf;
  auto* cf_cmd = app.add_subcommand("charfn", "Characteristic function of X_t");
  add_triplet_options(cf_cmd, cf.triplet);
  cf_cmd->add_option("--m", cf.m)->capture_default_str();
  cf_cmd->add_option("--x0", cf.x0)->delimiter(',');
  cf_cmd->add_option("--t", cf.t)->capture_default_str();
  cf_cmd->add_option("--p", cf.p, "Frequencies (default -5:0.5:5)")->delimiter(',');
  cf_cmd->add_option("--n-quad", cf.n_quad)->capture_default_str();
  cf_cmd->add_flag("--empirical", cf.empirical, "Add Monte Carlo columns");
  cf_cmd->add_option("--ensemble", cf.ensemble)->capture_default_str();
  cf_cmd->add_option("--dt", cf.dt)->capture_default_str();

  GeneratorOpts gen;
  auto* gen_cmd = app.add_subcommand("generator", "Apply the Lévy generator or check the heat equation");
  gen_cmd->set_help_flag("--help", "Print this help message and exit");
  gen_cmd->add_flag("--heat", gen.heat, "Heat-equation residual refinement table");
  add_triplet_options(gen_cmd, gen.triplet);
  gen_cmd->add_option("--h", gen.h, "Spatial step(s)")->delimiter(',');
  gen_cmd->add_option("--D", gen.D)->capture_default_str();
  gen_cmd->add_option("--t", gen.t)->capture_default_str();
  gen_cmd->add_option("--dt", gen.dt, "Time step at the first h")->capture_default_str();
  gen_cmd->add_option("--x0", gen.x0)->capture_default_str();
  gen_cmd->add_option("--x-min", gen.x_min)->capture_default_str();
  gen_cmd->add_option("--x-max", gen.x_max)->capture_default_str();
  gen_cmd->add_option("--fn", gen.fn, "gaussian, cos, sin, square")->capture_default_str();
  gen_cmd->add_option("--k", gen.k, "Wave number for cos/sin")->capture_default_str();

  TreesOpts trees;
  auto* trees_cmd = app.add_subcommand("trees", "Rooted-tree expansion of the OU solution");
  trees_cmd->require_subcommand(1);
  const auto add_tree_common = [&](CLI::App* c) {
    c->add_option("--p", trees.p, "Arity of inner vertices")->capture_default_str();
    c->add_option("--m", trees.m)->capture_default_str();
    c->add_option("--x0", trees.x0)->capture_default_str();
    add_triplet_options(c, trees.triplet);
    c->add_option("--t", trees.t)->capture_default_str();
    c->add_option("--dt", trees.dt)->capture_default_str();
    c->add_option("--refine", trees.refine, "RK4 sub-steps per noise cell")->capture_default_str();
  };
  auto* enum_cmd = trees_cmd->add_subcommand("enumerate", "List trees with i inner vertices");
  add_tree_common(enum_cmd);
  enum_cmd->add_option("--i", trees.i)->capture_default_str();
  enum_cmd->add_option("--lambda", trees.lambda)->capture_default_str();
  auto* eval_cmd = trees_cmd->add_subcommand("evaluate", "Truncated tree series with oracle");
  add_tree_common(eval_cmd);
  eval_cmd->add_option("--N", trees.N)->capture_default_str();
  eval_cmd->add_option("--lambda", trees.lambda)->capture_default_str();
  auto* order_cmd = trees_cmd->add_subcommand("order-check", "Fitted truncation order over lambdas");
  add_tree_common(order_cmd);
  order_cmd->add_option("--N", trees.N)->capture_default_str();
  order_cmd->add_option("--lambdas", trees.lambdas)->delimiter(',');

  auto* validate_cmd = app.add_subcommand("validate", "Run the acceptance suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (noise_cmd->parsed()) {
      cmd_noise(noise, g, out, err);
    } else if (sim_cmd->parsed()) {
      cmd_simulate(sim, g, out);
    } else if (dens_cmd->parsed()) {
      cmd_density(dens, g, out, err);
    } else if (cf_cmd->parsed()) {
      cmd_charfn(cf, g, out, err);
    } else if (gen_cmd->parsed()) {
      cmd_generator(gen, g, out);
    } else if (trees_cmd->parsed()) {
      const std::string action = enum_cmd->parsed() ? "enumerate" : eval_cmd->parsed() ? "evaluate" : "order-check";
      cmd_trees(action, trees, g, out, err);
    } else if (validate_cmd->parsed()) {
      const auto results = run_acceptance(g.threads, &out);
      std::size_t passed = 0;
      for (const auto& r : results) passed += r.passed ? 1 : 0;
      out << passed << "/" << results.size() << " criteria passed\n";
      return passed == results.size() ? 0 : 1;
    }
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace levy_ou::cli
