#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "porelab/augment.hpp"
#include "porelab/dataset.hpp"
#include "porelab/format.hpp"
#include "porelab/geometry.hpp"
#include "porelab/lbm.hpp"
#include "porelab/losses.hpp"
#include "porelab/properties.hpp"
#include "porelab/stats.hpp"
#include "porelab/uncertainty.hpp"
#include "porelab/warmstart.hpp"

namespace fs = std::filesystem;
using namespace porelab;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNoConvergence = 3 };

// ---------------------------------------------------------------------------
// Output tables
// ---------------------------------------------------------------------------

using Cell = std::variant<std::int64_t, std::uint64_t, double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

std::string cell_text(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return dataset::format_double(*d);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  if (const auto* u = std::get_if<std::uint64_t>(&c)) return std::to_string(*u);
  const auto& s = std::get<std::string>(c);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

nlohmann::json cell_json(const Cell& c) {
  return std::visit([](const auto& v) -> nlohmann::json {
    using V = std::decay_t<decltype(v)>;
    if constexpr (std::is_same_v<V, double>) {
      if (!std::isfinite(v)) return nullptr;
    }
    return v;
  }, c);
}

/// csv: header plus rows. json: an object for single-row tables, else an
/// array of objects. kv: one key=value line per column (single row only).
void emit(std::ostream& os, const Table& t, const std::string& fmt) {
  if (fmt == "json") {
    auto row_json = [&](const std::vector<Cell>& row) {
      nlohmann::ordered_json obj = nlohmann::ordered_json::object();
      for (std::size_t i = 0; i < t.columns.size(); ++i) obj[t.columns[i]] = cell_json(row[i]);
      return obj;
    };
    if (t.rows.size() == 1) {
      os << row_json(t.rows[0]).dump(2) << '\n';
    } else {
      nlohmann::ordered_json arr = nlohmann::ordered_json::array();
      for (const auto& r : t.rows) arr.push_back(row_json(r));
      os << arr.dump(2) << '\n';
    }
    return;
  }
  if (fmt == "kv") {
    for (const auto& row : t.rows)
      for (std::size_t i = 0; i < t.columns.size(); ++i) os << t.columns[i] << '=' << cell_text(row[i]) << '\n';
    return;
  }
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell_text(row[i]);
    os << '\n';
  }
}

/// Writes to `path`, or to stdout when it is empty or "-".
template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw DataError("cannot open for writing: " + path);
  fn(os);
  if (!os) throw DataError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// CSV input
// ---------------------------------------------------------------------------

struct CsvColumns {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t index(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError("csv: no column named " + name);
    return static_cast<std::size_t>(it - header.begin());
  }

  std::vector<double> numbers(const std::string& name) const {
    const std::size_t k = index(name);
    std::vector<double> out;
    for (const auto& r : rows) {
      if (k >= r.size()) throw DataError("csv: short row");
      try {
        std::size_t used = 0;
        out.push_back(std::stod(r[k], &used));
        if (used != r[k].size()) throw std::invalid_argument(r[k]);
      } catch (const std::logic_error&) {
        throw DataError("csv: not a number in column " + name + ": " + r[k]);
      }
    }
    return out;
  }
};

CsvColumns read_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open: " + path);
  CsvColumns csv;
  std::string line;
  if (!std::getline(is, line)) throw DataError("csv: empty file " + path);
  csv.header = dataset::split_csv_line(line);
  while (std::getline(is, line))
    if (!line.empty()) csv.rows.push_back(dataset::split_csv_line(line));
  return csv;
}

std::vector<uncertainty::ResidualPair> read_pairs(const std::string& path) {
  const auto csv = read_csv(path);
  const auto x = csv.numbers("predicted");
  const auto r = csv.numbers("residual");
  std::vector<uncertainty::ResidualPair> out;
  for (std::size_t i = 0; i < x.size(); ++i) out.push_back({x[i], r[i]});
  return out;
}

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw ParameterError(std::string(what) + ": not a number list: " + s);
    }
  }
  if (out.empty()) throw ParameterError(std::string(what) + ": empty list");
  return out;
}

// ---------------------------------------------------------------------------
// Options
// ---------------------------------------------------------------------------

struct SolverOpts {
  double tau = 1.0;
  std::string force = "1e-6";
  double rho0 = 1.0;
  double tol = 1e-8;
  std::int64_t check_interval = 100;
  std::int64_t max_iters = 1'000'000;

  lbm::LbmParams params() const {
    lbm::LbmParams p;
    p.tau = tau;
    const auto g = parse_list(force, "--force");
    if (g.size() > 2) throw ParameterError("--force takes gx or gx,gy");
    p.force = {g[0], g.size() > 1 ? g[1] : 0.0};
    p.rho0 = rho0;
    p.tolerance = tol;
    p.check_interval = check_interval;
    p.max_iterations = max_iters;
    p.validate();
    return p;
  }
};

struct Opts {
  std::string config;
  bool dump_config = false;
  std::string format;  // empty: the command's default
  std::size_t jobs = 1;

  // gen
  std::string kind = "trig";
  std::size_t size = 64;
  double porosity = 0.8;
  std::uint64_t seed = 1;
  double p_circle = 0.5;
  std::size_t wall_thickness = 0;
  std::string output;

  // simulate / props / loss / band pairs
  std::string input;
  std::string warm;
  SolverOpts solver;
  std::string structure;
  std::string field;
  std::string pred;
  std::string pred_translated;
  std::string ref;
  double alpha = 5.0, beta = 1.0, gamma = 0.1, delta = 0.01;
  std::int64_t tx = -1, ty = -1;

  // augment
  double p_flip = 0.5;
  double max_frac = 0.3;
  std::string dataset_dir;
  std::string out_dir;

  // dataset
  std::size_t count = 10;
  double porosity_min = 0.70;
  double porosity_max = 0.95;
  std::string fractions = "0.7,0.15,0.15";

  // warmstart / repro
  std::string warm_source;
  double noise = 0.1;
  std::uint64_t noise_seed = 1;
  std::size_t bootstrap = 10000;
  double level = 0.95;
  std::uint64_t bootstrap_seed = 12345;
  bool rerun_cold = false;
  std::size_t repro_size = 128;
  std::size_t repro_count = 50;
  SolverOpts repro_solver{0.6};

  // stats
  std::string column;
  std::string against;

  // band
  std::string pairs;
  std::string band;
  std::size_t bins = 20;
  std::size_t min_per_bin = 20;
  std::string levels = "0.05,0.95";
  std::string component = "magnitude";
  std::string xs;
};

CLI::App* leaf(CLI::App* app, const std::string& name, const std::string& help, Opts& o, bool jobs = false,
               const std::string& default_format = "csv", std::vector<std::string> formats = {"csv", "json"}) {
  auto* sub = app->add_subcommand(name, help);
  sub->add_option("--config", o.config, "key=value file; command-line flags take precedence");
  sub->add_flag("--dump-config", o.dump_config, "Print the effective configuration and exit");
  sub->add_option("--format", o.format, "Output format: " + CLI::detail::join(formats, "|") + " (default " + default_format + ")")
      ->check(CLI::IsMember(formats));
  if (jobs) sub->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
  return sub;
}

void add_solver(CLI::App* sub, SolverOpts& s) {
  sub->add_option("--tau", s.tau, "BGK relaxation time");
  sub->add_option("--force", s.force, "Body acceleration gx or gx,gy");
  sub->add_option("--rho0", s.rho0, "Reference density");
  sub->add_option("--tol", s.tol, "Relative convergence tolerance");
  sub->add_option("--check-interval", s.check_interval, "Steps between convergence checks");
  sub->add_option("--max-iters", s.max_iters, "Iteration budget");
}

void add_dataset_gen(CLI::App* sub, Opts& o) {
  sub->add_option("--count", o.count, "Number of samples");
  sub->add_option("--size", o.size, "Grid size L");
  sub->add_option("--porosity-min", o.porosity_min, "Lower porosity bound");
  sub->add_option("--porosity-max", o.porosity_max, "Upper porosity bound");
  sub->add_option("--kind", o.kind, "Generator")->check(CLI::IsMember({"trig", "shapes", "pipe"}));
  sub->add_option("--seed", o.seed, "Master seed");
  sub->add_option("--p-circle", o.p_circle, "Circle probability (shapes)");
  sub->add_option("--wall-thickness", o.wall_thickness, "Wall thickness, 0 for max(1, L/32) (pipe)");
  add_solver(sub, o.solver);
}

struct Command {
  std::string path;  // "dataset gen"
  CLI::App* app = nullptr;
};

std::vector<Command> build(CLI::App& app, Opts& o) {
  app.require_subcommand(1);
  app.set_version_flag("--version", "porelab 1.0.0");
  app.option_defaults()->always_capture_default();
  std::vector<Command> cmds;

  auto* gen = leaf(&app, "gen", "Generate one porous structure", o);
  gen->add_option("--kind", o.kind, "Generator")->check(CLI::IsMember({"trig", "shapes", "pipe"}));
  gen->add_option("--size", o.size, "Grid size L");
  gen->add_option("--porosity", o.porosity, "Target porosity");
  gen->add_option("--seed", o.seed, "Seed");
  gen->add_option("--p-circle", o.p_circle, "Circle probability (shapes)");
  gen->add_option("--wall-thickness", o.wall_thickness, "Wall thickness, 0 for max(1, L/32) (pipe)");
  gen->add_option("--output", o.output, "Structure file")->required();
  cmds.push_back({"gen", gen});

  auto* sim = leaf(&app, "simulate", "Solve steady flow through a structure", o, false, "kv", {"kv", "csv", "json"});
  sim->add_option("--input", o.input, "Structure file")->required();
  sim->add_option("--warm", o.warm, "Field file used as warm start");
  sim->add_option("--output", o.output, "Field file to write");
  add_solver(sim, o.solver);
  cmds.push_back({"simulate", sim});

  auto* props = leaf(&app, "props", "Porosity, tortuosity, permeability of a field", o);
  props->add_option("--structure", o.structure, "Structure file")->required();
  props->add_option("--field", o.field, "Field file")->required();
  cmds.push_back({"props", props});

  auto* loss = leaf(&app, "loss", "Score a predicted field", o);
  loss->add_option("--structure", o.structure, "Structure file")->required();
  loss->add_option("--pred", o.pred, "Prediction for the structure")->required();
  loss->add_option("--pred-translated", o.pred_translated, "Prediction for the translated structure")->required();
  loss->add_option("--ref", o.ref, "Reference field")->required();
  loss->add_option("--alpha", o.alpha, "Obstacle weight");
  loss->add_option("--beta", o.beta, "Divergence weight");
  loss->add_option("--gamma", o.gamma, "Periodicity weight");
  loss->add_option("--delta", o.delta, "Tortuosity weight");
  loss->add_option("--tx", o.tx, "Translation along x, -1 for L/2");
  loss->add_option("--ty", o.ty, "Translation along y, -1 for L/2");
  cmds.push_back({"loss", loss});

  auto* aug = leaf(&app, "augment", "Flip and roll records", o);
  aug->add_option("--input", o.input, "Record file");
  aug->add_option("--output", o.output, "Record file to write (may equal --input)");
  aug->add_option("--dataset", o.dataset_dir, "Dataset directory");
  aug->add_option("--out", o.out_dir, "Output dataset directory (may equal --dataset)");
  aug->add_option("--seed", o.seed, "Seed");
  aug->add_option("--p-flip", o.p_flip, "Flip probability");
  aug->add_option("--max-frac", o.max_frac, "Largest shift as a fraction of L");
  cmds.push_back({"augment", aug});

  auto* ds = app.add_subcommand("dataset", "Dataset generation and splitting");
  ds->require_subcommand(1);
  auto* dgen = leaf(ds, "gen", "Generate and simulate a dataset", o, true);
  add_dataset_gen(dgen, o);
  dgen->add_option("--out", o.out_dir, "Output directory")->required();
  cmds.push_back({"dataset gen", dgen});
  auto* dsplit = leaf(ds, "split", "Train/validation/test split of a dataset", o);
  dsplit->add_option("--dataset", o.dataset_dir, "Dataset directory")->required();
  dsplit->add_option("--seed", o.seed, "Shuffle seed");
  dsplit->add_option("--fractions", o.fractions, "train,validation,test");
  dsplit->add_option("--out", o.output, "Split CSV (default stdout)");
  cmds.push_back({"dataset split", dsplit});

  auto* ws = leaf(&app, "warmstart", "Cold vs warm start benchmark", o, true);
  ws->add_option("--dataset", o.dataset_dir, "Dataset directory")->required();
  ws->add_option("--warm-source", o.warm_source, "files:<dir> or noise:<sigma>")->required();
  ws->add_option("--noise-seed", o.noise_seed, "Seed of the perturbation noise");
  ws->add_option("--out", o.output, "Per-sample report CSV");
  ws->add_option("--bootstrap", o.bootstrap, "Bootstrap resamples");
  ws->add_option("--level", o.level, "Confidence level");
  ws->add_option("--bootstrap-seed", o.bootstrap_seed, "Bootstrap seed");
  ws->add_flag("--rerun-cold", o.rerun_cold, "Re-run cold starts instead of using stored iteration counts");
  cmds.push_back({"warmstart", ws});

  auto* st = leaf(&app, "stats", "Summary statistics of CSV columns", o);
  st->add_option("--input", o.input, "CSV file")->required();
  st->add_option("--column", o.column, "Column to summarize")->required();
  st->add_option("--against", o.against, "Second column for a paired Wilcoxon test");
  st->add_option("--bootstrap", o.bootstrap, "Bootstrap resamples");
  st->add_option("--level", o.level, "Confidence level");
  st->add_option("--seed", o.bootstrap_seed, "Bootstrap seed");
  cmds.push_back({"stats", st});

  auto* band = app.add_subcommand("band", "Conditional quantile bands");
  band->require_subcommand(1);
  auto* bpairs = leaf(band, "pairs", "Residual pairs from predicted and reference fields", o);
  bpairs->add_option("--structure", o.structure, "Structure file")->required();
  bpairs->add_option("--pred", o.pred, "Predicted field")->required();
  bpairs->add_option("--ref", o.ref, "Reference field")->required();
  bpairs->add_option("--component", o.component, "magnitude, x or y")->check(CLI::IsMember({"magnitude", "x", "y"}));
  bpairs->add_option("--out", o.output, "Pairs CSV (default stdout)");
  cmds.push_back({"band pairs", bpairs});
  auto* bfit = leaf(band, "fit", "Fit a band to residual pairs", o);
  bfit->add_option("--pairs", o.pairs, "Pairs CSV (predicted,residual)")->required();
  bfit->add_option("--bins", o.bins, "Number of equal-count bins");
  bfit->add_option("--min-per-bin", o.min_per_bin, "Smallest bin population");
  bfit->add_option("--levels", o.levels, "lower,upper quantile levels");
  bfit->add_option("--out", o.output, "Band CSV (default stdout)");
  cmds.push_back({"band fit", bfit});
  auto* beval = leaf(band, "eval", "Evaluate a band", o);
  beval->add_option("--band", o.band, "Band CSV")->required();
  beval->add_option("--x", o.xs, "Comma-separated predicted values")->required();
  cmds.push_back({"band eval", beval});
  auto* bcov = leaf(band, "coverage", "Fraction of reference values inside a band", o);
  bcov->add_option("--band", o.band, "Band CSV")->required();
  bcov->add_option("--pairs", o.pairs, "Pairs CSV");
  bcov->add_option("--structure", o.structure, "Structure file");
  bcov->add_option("--pred", o.pred, "Predicted field");
  bcov->add_option("--ref", o.ref, "Reference field");
  bcov->add_option("--component", o.component, "magnitude, x or y")->check(CLI::IsMember({"magnitude", "x", "y"}));
  cmds.push_back({"band coverage", bcov});

  auto* repro = leaf(&app, "repro", "Dataset generation, noise warm-start sweep and report", o, true);
  repro->add_option("--count", o.repro_count, "Number of samples");
  repro->add_option("--seed", o.seed, "Master seed");
  repro->add_option("--noise", o.noise, "Relative noise level");
  repro->add_option("--size", o.repro_size, "Grid size L");
  repro->add_option("--porosity-min", o.porosity_min, "Lower porosity bound");
  repro->add_option("--porosity-max", o.porosity_max, "Upper porosity bound");
  repro->add_option("--out", o.out_dir, "Output directory")->required();
  repro->add_option("--bootstrap", o.bootstrap, "Bootstrap resamples");
  add_solver(repro, o.repro_solver);
  cmds.push_back({"repro", repro});
  return cmds;
}

// ---------------------------------------------------------------------------
// Config files
// ---------------------------------------------------------------------------

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParameterError("cannot open config: " + path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  while (std::getline(is, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParameterError("config: expected key=value: " + line);
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    out.emplace_back(key, value);
  }
  return out;
}

/// Command-line tokens for config entries whose options were not given on
/// the command line. Unknown or reserved keys are rejected.
std::vector<std::string> config_tokens(const CLI::App* sub, const std::string& path) {
  std::vector<std::string> tokens;
  for (const auto& [key, value] : read_config(path)) {
    if (key == "config" || key == "help")
      throw ParameterError("config: key not allowed in a config file: " + key);
    const CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr) throw ParameterError("config: unknown key: " + key);
    if (opt->count() > 0) continue;
    tokens.push_back("--" + key + "=" + value);
  }
  return tokens;
}

/// Required options may come from a config file, so the first pass must not
/// insist on them.
void relax_required(CLI::App* app) {
  for (auto* opt : app->get_options([](CLI::Option*) { return true; })) opt->required(false);
  for (auto* sub : app->get_subcommands([](CLI::App*) { return true; })) relax_required(sub);
}

const Command* selected(const std::vector<Command>& cmds) {
  for (const auto& c : cmds)
    if (c.app->parsed()) return &c;
  return nullptr;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

format::RecordData read_record(const std::string& path) { return format::read_record(path); }

int cmd_gen(const Opts& o) {
  const auto kind = format::kind_from_string(o.kind);
  format::RecordData rec;
  rec.structure = dataset::build_structure(kind, o.seed, o.size, o.porosity, o.p_circle, o.wall_thickness);
  rec.field = VelocityField(o.size);
  rec.kind = kind;
  format::write_record(o.output, rec);
  Table t{{"file", "kind", "size", "seed", "phi", "percolates"}, {}};
  t.rows.push_back({o.output, o.kind, static_cast<std::uint64_t>(o.size), o.seed, rec.structure.porosity(),
                    static_cast<std::int64_t>(percolates(rec.structure, Axis::x))});
  emit(std::cout, t, o.format);
  return kOk;
}

int cmd_simulate(const Opts& o) {
  const auto params = o.solver.params();
  auto input = read_record(o.input);
  const auto t0 = std::chrono::steady_clock::now();
  lbm::Solution sol;
  if (o.warm.empty()) {
    sol = lbm::solve(input.structure, params);
  } else {
    auto state = lbm::init_warm(input.structure, read_record(o.warm).field, params);
    sol = lbm::run_to_convergence(state);
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.output.empty()) format::write_record(o.output, {input.structure, sol.field, params, input.kind});
  Table t{{"iterations", "wall_time_s"}, {}};
  t.rows.push_back({sol.iterations, wall});
  emit(std::cout, t, o.format);
  return kOk;
}

int cmd_props(const Opts& o) {
  const auto s = read_record(o.structure);
  const auto f = read_record(o.field);
  const auto p = summary(f.field, s.structure, f.params);
  Table t{{"phi", "tau", "k", "mean_v", "max_v"}, {}};
  t.rows.push_back({p.porosity, p.tortuosity, p.permeability, p.mean_speed, p.max_speed});
  emit(std::cout, t, o.format);
  return kOk;
}

int cmd_loss(const Opts& o) {
  const auto s = read_record(o.structure).structure;
  const auto pred = read_record(o.pred).field;
  const auto pred_t = read_record(o.pred_translated).field;
  const auto ref = read_record(o.ref).field;
  losses::Translation tr = losses::Translation::half(s.size());
  if (o.tx >= 0) tr.tx = static_cast<std::size_t>(o.tx);
  if (o.ty >= 0) tr.ty = static_cast<std::size_t>(o.ty);
  tr.validate(s.size());
  const auto r = losses::total_loss(pred, pred_t, ref, s, tr, {o.alpha, o.beta, o.gamma, o.delta});
  Table t{{"l_vel", "l_obstacle", "l_div", "l_perio", "l_tort", "total"}, {}};
  t.rows.push_back({r.l_vel, r.l_obstacle, r.l_div, r.l_perio, r.l_tort, r.total});
  emit(std::cout, t, o.format);
  return kOk;
}

int cmd_augment(const Opts& o) {
  Table t{{"id", "file", "flip", "tx", "ty"}, {}};
  auto augment_one = [&](const fs::path& in, const fs::path& out, std::uint64_t seed, std::uint64_t id) {
    auto rec = format::read_record(in);
    const auto a = augment::sample_augmentation(seed, rec.structure.size(), o.p_flip, o.max_frac);
    auto s = augment::apply(a, rec.structure, rec.field);
    format::write_record(out, {std::move(s.grid), std::move(s.field), rec.params, rec.kind});
    t.rows.push_back({id, out.filename().string(), static_cast<std::int64_t>(a.flip),
                      static_cast<std::uint64_t>(a.tx), static_cast<std::uint64_t>(a.ty)});
  };
  if (!o.dataset_dir.empty()) {
    if (!o.input.empty() || !o.output.empty()) throw ParameterError("augment: use either --dataset or --input");
    if (o.out_dir.empty()) throw ParameterError("augment: --out is required with --dataset");
    const auto rows = dataset::read_manifest(o.dataset_dir);
    fs::create_directories(o.out_dir);
    std::vector<dataset::ManifestRow> out_rows;
    for (const auto& row : rows) {
      augment_one(fs::path(o.dataset_dir) / row.file, fs::path(o.out_dir) / row.file, derive_seed(o.seed, row.id),
                  row.id);
      auto rec = dataset::load_record(o.out_dir, row);
      auto out_row = dataset::manifest_row(rec);
      out_row.file = row.file;
      out_rows.push_back(out_row);
    }
    std::ofstream manifest(fs::path(o.out_dir) / dataset::kManifestName, std::ios::trunc);
    dataset::write_manifest(manifest, out_rows);
  } else {
    if (o.input.empty() || o.output.empty()) throw ParameterError("augment: --input and --output are required");
    augment_one(o.input, o.output, o.seed, 0);
  }
  emit(std::cout, t, o.format);
  return kOk;
}

dataset::GeneratorConfig generator_config(const Opts& o) {
  dataset::GeneratorConfig cfg;
  cfg.count = o.count;
  cfg.size = o.size;
  cfg.porosity_min = o.porosity_min;
  cfg.porosity_max = o.porosity_max;
  cfg.kind = format::kind_from_string(o.kind);
  cfg.seed = o.seed;
  cfg.params = o.solver.params();
  cfg.p_circle = o.p_circle;
  cfg.wall_thickness = o.wall_thickness;
  cfg.validate();
  return cfg;
}

int cmd_dataset_gen(const Opts& o) {
  const auto cfg = generator_config(o);
  const auto result = dataset::generate_dataset(cfg, o.jobs, &std::cerr);
  dataset::write_dataset(o.out_dir, result);
  Table t{{"out", "records", "skipped"}, {}};
  t.rows.push_back({o.out_dir, static_cast<std::uint64_t>(result.records.size()),
                    static_cast<std::uint64_t>(result.skipped.size())});
  emit(std::cout, t, o.format);
  return kOk;
}

int cmd_dataset_split(const Opts& o) {
  const auto rows = dataset::read_manifest(o.dataset_dir);
  std::vector<std::uint64_t> ids;
  for (const auto& r : rows) ids.push_back(r.id);
  const auto f = parse_list(o.fractions, "--fractions");
  if (f.size() != 3) throw ParameterError("--fractions takes three values");
  const auto sp = dataset::split(ids, o.seed, {f[0], f[1], f[2]});
  Table t{{"id", "split"}, {}};
  for (auto id : sp.train) t.rows.push_back({id, std::string("train")});
  for (auto id : sp.validation) t.rows.push_back({id, std::string("validation")});
  for (auto id : sp.test) t.rows.push_back({id, std::string("test")});
  with_output(o.output, [&](std::ostream& os) { emit(os, t, o.format); });
  return kOk;
}

Table summary_table(const warmstart::SuiteSummary& s) {
  Table t{{"samples", "valid", "faster", "fraction_faster", "median_reduction", "q1", "q3", "ci_lo", "ci_hi",
           "wilcoxon_w", "wilcoxon_p", "wilcoxon_exact"},
          {}};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  t.rows.push_back({static_cast<std::uint64_t>(s.results.size()), static_cast<std::uint64_t>(s.valid),
                    static_cast<std::uint64_t>(s.faster), s.fraction_faster(), s.median, s.q1, s.q3, s.ci.lo, s.ci.hi,
                    s.inferential ? s.wilcoxon.statistic : nan, s.inferential ? s.wilcoxon.p_value : nan,
                    static_cast<std::int64_t>(s.inferential && s.wilcoxon.exact)});
  return t;
}

int report_suite(const Opts& o, const warmstart::SuiteSummary& s, const std::string& csv_path) {
  if (!csv_path.empty())
    with_output(csv_path, [&](std::ostream& os) { warmstart::write_results_csv(os, s.results); });
  if (!s.inferential) std::cerr << "warmstart: fewer than 5 valid pairs; inferential statistics not computed\n";
  emit(std::cout, summary_table(s), o.format);
  return kOk;
}

int cmd_warmstart(const Opts& o) {
  const auto rows = dataset::read_manifest(o.dataset_dir);
  std::vector<dataset::DatasetRecord> records;
  for (const auto& r : rows) records.push_back(dataset::load_record(o.dataset_dir, r));

  std::vector<warmstart::BenchCase> cases;
  const std::string src = o.warm_source;
  if (src.rfind("noise:", 0) == 0) {
    double sigma = 0.0;
    try {
      sigma = std::stod(src.substr(6));
    } catch (const std::logic_error&) {
      throw ParameterError("--warm-source: bad noise level: " + src);
    }
    cases = warmstart::noise_cases(records, sigma, o.noise_seed);
  } else if (src.rfind("files:", 0) == 0) {
    const fs::path dir = src.substr(6);
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& r = records[i];
      cases.push_back({r.id, r.structure, format::read_record(dir / rows[i].file).field, r.params, r.iterations});
    }
  } else {
    throw ParameterError("--warm-source must be files:<dir> or noise:<sigma>");
  }
  if (o.rerun_cold)
    for (auto& c : cases) c.cold_iters.reset();
  const auto summary = warmstart::bench_suite(cases, o.jobs, {o.bootstrap, o.level, o.bootstrap_seed}, &std::cerr);
  return report_suite(o, summary, o.output);
}

int cmd_stats(const Opts& o) {
  const auto csv = read_csv(o.input);
  const auto xs = csv.numbers(o.column);
  if (xs.empty()) throw DataError("stats: no values");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  stats::Interval ci{nan, nan};
  if (xs.size() >= 5) ci = stats::bootstrap_ci_median(xs, o.bootstrap, o.level, o.bootstrap_seed);
  Table t{{"column", "n", "min", "q1", "median", "q3", "max", "ci_lo", "ci_hi"}, {}};
  t.rows.push_back({o.column, static_cast<std::uint64_t>(xs.size()), stats::quantile(xs, 0.0),
                    stats::quantile(xs, 0.25), stats::median(xs), stats::quantile(xs, 0.75),
                    stats::quantile(xs, 1.0), ci.lo, ci.hi});
  if (!o.against.empty()) {
    const auto ys = csv.numbers(o.against);
    const auto w = stats::wilcoxon_signed_rank(xs, ys);
    for (const char* c : {"against", "wilcoxon_n", "wilcoxon_w", "wilcoxon_p", "wilcoxon_exact", "degenerate"})
      t.columns.push_back(c);
    auto& row = t.rows.back();
    row.push_back(o.against);
    row.push_back(static_cast<std::uint64_t>(w.n));
    row.push_back(w.statistic);
    row.push_back(w.p_value);
    row.push_back(static_cast<std::int64_t>(w.exact));
    row.push_back(static_cast<std::int64_t>(w.degenerate));
  }
  emit(std::cout, t, o.format);
  return kOk;
}

uncertainty::Component component_of(const std::string& s) {
  if (s == "x") return uncertainty::Component::x;
  if (s == "y") return uncertainty::Component::y;
  return uncertainty::Component::magnitude;
}

int cmd_band_pairs(const Opts& o) {
  const auto s = read_record(o.structure).structure;
  const auto pairs =
      uncertainty::residuals(read_record(o.pred).field, read_record(o.ref).field, s, component_of(o.component));
  Table t{{"predicted", "residual"}, {}};
  for (const auto& p : pairs) t.rows.push_back({p.predicted, p.residual});
  with_output(o.output, [&](std::ostream& os) { emit(os, t, o.format); });
  return kOk;
}

uncertainty::QuantileBand load_band(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open: " + path);
  return uncertainty::QuantileBand::read_csv(is);
}

int cmd_band_fit(const Opts& o) {
  const auto lv = parse_list(o.levels, "--levels");
  if (lv.size() != 2) throw ParameterError("--levels takes two values");
  uncertainty::BinningOptions opt;
  opt.bins = o.bins;
  opt.min_per_bin = o.min_per_bin;
  opt.lower_level = lv[0];
  opt.upper_level = lv[1];
  const auto band = uncertainty::fit_band(read_pairs(o.pairs), opt);
  if (o.format == "json") {
    Table t{{"x", "q_lo", "q_hi"}, {}};
    const auto& n = band.nodes();
    for (std::size_t i = 0; i < n.center.size(); ++i) t.rows.push_back({n.center[i], n.lower[i], n.upper[i]});
    with_output(o.output, [&](std::ostream& os) { emit(os, t, o.format); });
  } else {
    with_output(o.output, [&](std::ostream& os) { band.write_csv(os); });
  }
  return kOk;
}

int cmd_band_eval(const Opts& o) {
  const auto band = load_band(o.band);
  Table t{{"x", "lower", "upper"}, {}};
  for (double x : parse_list(o.xs, "--x")) {
    const auto [lo, hi] = band.eval(x);
    t.rows.push_back({x, lo, hi});
  }
  emit(std::cout, t, o.format);
  return kOk;
}

int cmd_band_coverage(const Opts& o) {
  const auto band = load_band(o.band);
  std::vector<uncertainty::ResidualPair> pairs;
  if (!o.pairs.empty()) {
    pairs = read_pairs(o.pairs);
  } else if (!o.structure.empty() && !o.pred.empty() && !o.ref.empty()) {
    pairs = uncertainty::residuals(read_record(o.pred).field, read_record(o.ref).field,
                                   read_record(o.structure).structure, component_of(o.component));
  } else {
    throw ParameterError("band coverage: give --pairs or --structure, --pred and --ref");
  }
  Table t{{"n", "coverage"}, {}};
  t.rows.push_back({static_cast<std::uint64_t>(pairs.size()), uncertainty::coverage(band, pairs)});
  emit(std::cout, t, o.format);
  return kOk;
}

int cmd_repro(const Opts& o) {
  Opts g = o;
  g.kind = "trig";
  g.size = o.repro_size;
  g.count = o.repro_count;
  g.solver = o.repro_solver;
  const auto cfg = generator_config(g);
  const auto result = dataset::generate_dataset(cfg, o.jobs, &std::cerr);
  dataset::write_dataset(o.out_dir, result);
  const auto cases = warmstart::noise_cases(result.records, o.noise, o.seed);
  const auto summary = warmstart::bench_suite(cases, o.jobs, {o.bootstrap, o.level, o.bootstrap_seed}, &std::cerr);
  with_output((fs::path(o.out_dir) / "summary.csv").string(),
              [&](std::ostream& os) { emit(os, summary_table(summary), "csv"); });
  return report_suite(o, summary, (fs::path(o.out_dir) / "report.csv").string());
}

int dispatch(const std::string& path, const Opts& o) {
  if (path == "gen") return cmd_gen(o);
  if (path == "simulate") return cmd_simulate(o);
  if (path == "props") return cmd_props(o);
  if (path == "loss") return cmd_loss(o);
  if (path == "augment") return cmd_augment(o);
  if (path == "dataset gen") return cmd_dataset_gen(o);
  if (path == "dataset split") return cmd_dataset_split(o);
  if (path == "warmstart") return cmd_warmstart(o);
  if (path == "stats") return cmd_stats(o);
  if (path == "band pairs") return cmd_band_pairs(o);
  if (path == "band fit") return cmd_band_fit(o);
  if (path == "band eval") return cmd_band_eval(o);
  if (path == "band coverage") return cmd_band_coverage(o);
  if (path == "repro") return cmd_repro(o);
  throw ParameterError("unknown command");
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string path;
  Opts opts;
  {
    CLI::App first{"Pore-scale flow laboratory", "porelab"};
    Opts o;
    const auto cmds = build(first, o);
    relax_required(&first);
    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
      first.parse(rev);
    } catch (const CLI::ParseError& e) {
      const int code = first.exit(e);
      return code == 0 ? kOk : kUsage;
    }
    const Command* cmd = selected(cmds);
    if (cmd == nullptr) throw ParameterError("no command given");
    path = cmd->path;
    if (!o.config.empty()) {
      const auto extra = config_tokens(cmd->app, o.config);
      args.insert(args.end(), extra.begin(), extra.end());
    }
  }
  CLI::App app{"Pore-scale flow laboratory", "porelab"};
  const auto cmds = build(app, opts);
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  if (opts.format.empty()) opts.format = path == "simulate" ? "kv" : "csv";
  if (opts.dump_config) {
    const Command* cmd = selected(cmds);
    std::istringstream text(cmd->app->config_to_str(true, false));
    std::string line;
    while (std::getline(text, line)) {
      if (line.rfind("config=", 0) == 0 || line.rfind("dump-config=", 0) == 0) continue;
      if (line.size() > 3 && line.compare(line.size() - 3, 3, "=\"\"") == 0) continue;
      std::cout << line << '\n';
    }
    return kOk;
  }
  return dispatch(path, opts);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const lbm::NonConvergenceError& e) {
    std::cerr << "porelab: " << e.what() << '\n';
    return kNoConvergence;
  } catch (const DivergenceError& e) {
    std::cerr << "porelab: " << e.what() << '\n';
    return kNoConvergence;
  } catch (const ParameterError& e) {
    std::cerr << "porelab: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "porelab: " << e.what() << '\n';
    return kData;
  }
}
