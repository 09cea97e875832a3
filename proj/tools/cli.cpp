#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <boost/crc.hpp>

#include "grcca/errors.hpp"
#include "grcca/model.hpp"
#include "grcca/path.hpp"
#include "grcca/selection.hpp"
#include "grcca/serialize.hpp"
#include "grcca/simulation.hpp"

namespace grcca::cli {

namespace fs = std::filesystem;
using nlohmann::json;

json config_json(const RunConfig& c) {
  json j;
  j["command"] = c.command;
  j["inputs"] = {{"x", c.x},           {"y", c.y},           {"groups_x", c.groups_x},
                 {"groups_y", c.groups_y}, {"adjust", c.adjust}, {"penalty_x", c.penalty_x}};
  j["model"] = {{"method", c.method},
                {"group_path", c.group_path},
                {"unpenalized_x", c.unpenalized_x},
                {"cohens_d_threshold", c.cohens_d_threshold ? json(*c.cohens_d_threshold) : json(nullptr)},
                {"adjust_mode", c.adjust_mode},
                {"scale", c.scale},
                {"ncomp", c.ncomp}};
  j["hyperparameters"] = {{"lambda1", c.lambda1}, {"mu1", c.mu1}, {"lambda2", c.lambda2}, {"mu2", c.mu2}};
  j["grid"] = {{"lambda1", c.grid_lambda1}, {"mu1", c.grid_mu1}, {"lambda2", c.grid_lambda2}, {"mu2", c.grid_mu2}};
  j["selection"] = {{"folds", c.folds}, {"outer_folds", c.outer_folds}, {"inner_folds", c.inner_folds},
                    {"seed", c.seed}};
  j["paths"] = {{"sweep", c.sweep}};
  j["simulation"] = {{"n", c.sim_n},          {"p", c.sim_p},           {"q", c.sim_q},
                     {"groups", c.sim_k},     {"n_test", c.sim_n_test}, {"sigma_x", c.sigma_x},
                     {"sigma_xy", c.sigma_xy}, {"reps", c.reps},        {"methods", c.sim_methods}};
  j["screen"] = {{"threshold", c.threshold}};
  return j;
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  try {
    c.command = j.at("command").get<std::string>();
    const json& in = j.at("inputs");
    c.x = in.at("x");
    c.y = in.at("y");
    c.groups_x = in.at("groups_x");
    c.groups_y = in.at("groups_y");
    c.adjust = in.at("adjust");
    c.penalty_x = in.at("penalty_x");
    const json& m = j.at("model");
    c.method = m.at("method");
    c.group_path = m.at("group_path");
    c.unpenalized_x = m.at("unpenalized_x").get<std::vector<std::string>>();
    if (!m.at("cohens_d_threshold").is_null()) c.cohens_d_threshold = m.at("cohens_d_threshold").get<double>();
    c.adjust_mode = m.at("adjust_mode");
    c.scale = m.at("scale");
    c.ncomp = m.at("ncomp");
    const json& h = j.at("hyperparameters");
    c.lambda1 = h.at("lambda1");
    c.mu1 = h.at("mu1");
    c.lambda2 = h.at("lambda2");
    c.mu2 = h.at("mu2");
    const json& g = j.at("grid");
    c.grid_lambda1 = g.at("lambda1").get<std::vector<double>>();
    c.grid_mu1 = g.at("mu1").get<std::vector<double>>();
    c.grid_lambda2 = g.at("lambda2").get<std::vector<double>>();
    c.grid_mu2 = g.at("mu2").get<std::vector<double>>();
    const json& s = j.at("selection");
    c.folds = s.at("folds");
    c.outer_folds = s.at("outer_folds");
    c.inner_folds = s.at("inner_folds");
    c.seed = s.at("seed");
    c.sweep = j.at("paths").at("sweep");
    const json& sim = j.at("simulation");
    c.sim_n = sim.at("n");
    c.sim_p = sim.at("p");
    c.sim_q = sim.at("q");
    c.sim_k = sim.at("groups");
    c.sim_n_test = sim.at("n_test");
    c.sigma_x = sim.at("sigma_x");
    c.sigma_xy = sim.at("sigma_xy");
    c.reps = sim.at("reps");
    c.sim_methods = sim.at("methods").get<std::vector<std::string>>();
    c.threshold = j.at("screen").at("threshold");
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed manifest config: ") + e.what());
  }
  return c;
}

namespace {

std::string crc32_of(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  boost::crc_32_type crc;
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  crc.process_bytes(bytes.data(), bytes.size());
  std::ostringstream s;
  s << std::hex << std::setw(8) << std::setfill('0') << crc.checksum();
  return s.str();
}

std::vector<std::string> input_paths(const RunConfig& c) {
  std::vector<std::string> paths;
  for (const std::string* p : {&c.x, &c.y, &c.groups_x, &c.groups_y, &c.adjust, &c.penalty_x}) {
    if (!p->empty()) paths.push_back(*p);
  }
  return paths;
}

/// Writes output files and remembers their names for the manifest.
class OutputDir {
 public:
  explicit OutputDir(const std::string& dir) : dir_(dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw InputError("cannot create output directory '" + dir + "': " + ec.message());
  }

  void csv(const std::string& name, const Table& table) {
    save_csv(dir_ / name, table);
    files_.push_back(name);
  }

  void text(const std::string& name, const std::string& content) {
    std::ofstream out(dir_ / name, std::ios::binary);
    out << content;
    if (!out) throw InputError("cannot write '" + (dir_ / name).string() + "'");
    files_.push_back(name);
  }

  void write_json(const std::string& name, const json& j) { text(name, j.dump(2) + "\n"); }

  const std::vector<std::string>& files() const { return files_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

struct Inputs {
  std::optional<DataMatrix> x;
  std::optional<DataMatrix> y;
  std::optional<DataMatrix> covariates;
  MethodSpec spec;
  std::vector<std::string> warnings;
};

Index resolve_feature(const std::string& token, const std::vector<std::string>& names) {
  const auto it = std::find(names.begin(), names.end(), token);
  if (it != names.end()) return static_cast<Index>(it - names.begin());
  // Not a column name: accept a 1-based column number.
  std::size_t used = 0;
  long value = 0;
  try {
    value = std::stol(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == token.size() && value >= 1 && value <= static_cast<long>(names.size())) return value - 1;
  throw InputError("unknown X feature '" + token + "' in --unpenalized-x");
}

Inputs load_inputs(const RunConfig& c) {
  Inputs in;
  in.x = load_csv(c.x);
  in.y = load_csv(c.y);
  if (in.x->rows() != in.y->rows()) {
    throw ShapeError("X has " + std::to_string(in.x->rows()) + " rows but Y has " + std::to_string(in.y->rows()));
  }
  if (!c.adjust.empty()) {
    in.covariates = load_csv(c.adjust);
    if (in.covariates->rows() != in.x->rows()) throw ShapeError("covariate rows do not match X rows");
  }

  MethodSpec& spec = in.spec;
  spec.method = parse_method(c.method);
  spec.group_path = parse_group_path(c.group_path);
  if (!c.groups_x.empty()) spec.groups_x = load_group_map(c.groups_x, in.x->column_names());
  if (!c.groups_y.empty()) spec.groups_y = load_group_map(c.groups_y, in.y->column_names());
  if (!c.penalty_x.empty()) spec.penalty_x = load_csv(c.penalty_x, false).values();

  std::set<Index> unpenalized;
  for (const auto& token : c.unpenalized_x) unpenalized.insert(resolve_feature(token, in.x->column_names()));
  if (c.cohens_d_threshold) {
    const Vector d = cohens_d(*in.x, &in.warnings);
    for (Index j : select_by_cohens_d(d, *c.cohens_d_threshold)) unpenalized.insert(j);
  }
  spec.unpenalized_x.assign(unpenalized.begin(), unpenalized.end());
  if (spec.method != Method::prcca && !spec.unpenalized_x.empty()) {
    throw InputError("--unpenalized-x and --cohens-d-threshold apply to --method prcca only");
  }
  validate(spec, in.x->cols(), in.y->cols());
  return in;
}

/// Covariate adjustment (when not deferred to the folds) and optional
/// scaling. The result is not centered unless adjustment centered it.
std::pair<DataMatrix, DataMatrix> preprocess(const RunConfig& c, const Inputs& in, bool adjust) {
  DataMatrix x = *in.x;
  DataMatrix y = *in.y;
  if (adjust && in.covariates) {
    x = regress_out(x, *in.covariates);
    y = regress_out(y, *in.covariates);
  }
  if (c.scale) {
    x = scale_columns(x);
    y = scale_columns(y);
  }
  return {std::move(x), std::move(y)};
}

Hyperparameters fixed_hyper(const RunConfig& c) { return {c.lambda1, c.mu1, c.lambda2, c.mu2}; }

Grid config_grid(const RunConfig& c) {
  Grid g{c.grid_lambda1, c.grid_mu1, c.grid_lambda2, c.grid_mu2};
  g.normalize();
  return g;
}

std::string fit_summary(const FittedCCA& fit, const MethodSpec& spec, const Hyperparameters& h, Index n) {
  std::ostringstream s;
  s << "method " << to_string(spec.method) << " (" << to_string(fit.path) << " path), n=" << n
    << ", p=" << fit.alpha.rows() << ", q=" << fit.beta.rows() << "\n";
  s << "lambda1=" << format_number(h.lambda1) << " mu1=" << format_number(h.mu1)
    << " lambda2=" << format_number(h.lambda2) << " mu2=" << format_number(h.mu2) << "\n";
  s << "canonical correlations:";
  for (Index i = 0; i < fit.components(); ++i) s << " " << format_number(fit.correlations(i));
  s << "\n";

  // Largest |alpha| of the first component, three per group or ten overall.
  std::vector<std::pair<std::string, std::vector<Index>>> blocks;
  if (spec.groups_x) {
    for (Index k = 0; k < spec.groups_x->group_count(); ++k) {
      blocks.emplace_back(spec.groups_x->names()[static_cast<std::size_t>(k)], spec.groups_x->members(k));
    }
  } else {
    std::vector<Index> all(static_cast<std::size_t>(fit.alpha.rows()));
    for (Index j = 0; j < fit.alpha.rows(); ++j) all[static_cast<std::size_t>(j)] = j;
    blocks.emplace_back("all features", all);
  }
  const std::size_t keep = spec.groups_x ? 3 : 10;
  s << "top X coefficients, component 1:\n";
  for (auto& [name, members] : blocks) {
    std::stable_sort(members.begin(), members.end(),
                     [&](Index a, Index b) { return std::abs(fit.alpha(a, 0)) > std::abs(fit.alpha(b, 0)); });
    s << "  " << name << ":";
    for (std::size_t i = 0; i < std::min(keep, members.size()); ++i) {
      s << " " << fit.x_names[static_cast<std::size_t>(members[i])] << "=" << format_number(fit.alpha(members[i], 0));
    }
    s << "\n";
  }
  return s.str();
}

void write_fit(OutputDir& dir, const DataMatrix& x, const DataMatrix& y, const Inputs& in, const Hyperparameters& h,
               Index ncomp) {
  const DataMatrix xc = center_columns(x);
  const DataMatrix yc = center_columns(y);
  const FittedCCA fit = fit_model(xc, yc, in.spec, h, ncomp);
  dir.write_json("model.json", model_json(fit, in.spec, h));
  dir.text("summary.txt", fit_summary(fit, in.spec, h, x.rows()));
}

void run_fit(const RunConfig& c, OutputDir& dir, std::ostream& out) {
  const Inputs in = load_inputs(c);
  for (const auto& w : in.warnings) out << "warning: " << w << "\n";
  const auto [x, y] = preprocess(c, in, true);
  write_fit(dir, x, y, in, fixed_hyper(c), c.ncomp);
}

void run_cv(const RunConfig& c, OutputDir& dir, unsigned threads, std::ostream& out) {
  const Inputs in = load_inputs(c);
  for (const auto& w : in.warnings) out << "warning: " << w << "\n";
  const bool per_fold = c.adjust_mode == "fold";
  const auto [x, y] = preprocess(c, in, !per_fold);
  CVOptions opt;
  opt.folds = c.folds;
  opt.seed = c.seed;
  opt.threads = threads;
  if (per_fold && in.covariates) opt.covariates = &*in.covariates;
  const CVResult cv = cross_validate(x, y, in.spec, config_grid(c), opt);
  dir.csv("cv_curves.csv", cv_summary_table(cv));
  dir.csv("cv_folds.csv", cv_fold_table(cv));
  dir.write_json("cv.json", cv_json(cv));
  // Final model on all rows at the selected point.
  const auto [xa, ya] = preprocess(c, in, true);
  write_fit(dir, xa, ya, in, cv.best_point().hyper, c.ncomp);
}

void run_ncv(const RunConfig& c, OutputDir& dir, unsigned threads, std::ostream& out) {
  const Inputs in = load_inputs(c);
  for (const auto& w : in.warnings) out << "warning: " << w << "\n";
  const bool per_fold = c.adjust_mode == "fold";
  const auto [x, y] = preprocess(c, in, !per_fold);
  NCVOptions opt;
  opt.outer_folds = c.outer_folds;
  opt.inner_folds = c.inner_folds;
  opt.seed = c.seed;
  opt.threads = threads;
  if (per_fold && in.covariates) opt.covariates = &*in.covariates;
  const NCVResult r = nested_cross_validate(x, y, in.spec, config_grid(c), opt);
  dir.csv("ncv_outer.csv", ncv_outer_table(r));
  dir.write_json("ncv.json", ncv_json(r));
  std::ostringstream s;
  s << "outer folds: " << r.outer.size() << "\n";
  s << "inner cv correlation: " << format_number(r.mean_inner) << " +/- " << format_number(r.se_inner) << "\n";
  s << "test correlation: " << format_number(r.mean_test) << " +/- " << format_number(r.se_test) << "\n";
  dir.text("summary.txt", s.str());
}

void run_paths(const RunConfig& c, OutputDir& dir, unsigned threads, std::ostream& out) {
  const Inputs in = load_inputs(c);
  for (const auto& w : in.warnings) out << "warning: " << w << "\n";
  const auto [x, y] = preprocess(c, in, true);
  const Sweep sweep = c.sweep == "mu1" ? Sweep::mu1 : Sweep::lambda1;
  const std::vector<double>& grid = sweep == Sweep::mu1 ? c.grid_mu1 : c.grid_lambda1;
  const CoefficientPath path =
      coefficient_path(center_columns(x), center_columns(y), in.spec, fixed_hyper(c), sweep, grid, threads);
  dir.csv("paths.csv", path_table(path));
  for (const auto& p : path.points) {
    if (!p.fit) out << "warning: no fit at " << c.sweep << "=" << format_number(
        sweep == Sweep::mu1 ? p.hyper.mu1 : p.hyper.lambda1) << ": " << p.error << "\n";
  }
}

void run_simulate(const RunConfig& c, OutputDir& dir, unsigned threads) {
  SimulationConfig cfg;
  cfg.n = c.sim_n;
  cfg.p = c.sim_p;
  cfg.q = c.sim_q;
  cfg.k = c.sim_k;
  cfg.n_test = c.sim_n_test;
  cfg.sigma_x = c.sigma_x;
  cfg.sigma_xy = c.sigma_xy;
  cfg.seed = c.seed;
  cfg.replicates = c.reps;
  cfg.validate();
  std::vector<SimMethod> methods;
  for (const auto& m : c.sim_methods) methods.push_back(parse_sim_method(m));
  const ExperimentResult r = run_experiment(cfg, methods, {c.grid_lambda1, c.grid_mu1}, threads);
  dir.csv("experiment.csv", experiment_table(r));
  dir.csv("summary.csv", experiment_summary_table(r));
  dir.csv("coefs.csv", coefficient_snapshot(r));

  std::ostringstream s;
  s << "replicates " << cfg.replicates << ", n=" << cfg.n << ", p=" << cfg.p << ", q=" << cfg.q << ", K=" << cfg.k
    << ", sigma_x=" << format_number(cfg.sigma_x) << ", sigma_xy=" << format_number(cfg.sigma_xy) << "\n";
  s << "best grid point per method (mean test correlation +/- se):\n";
  std::map<SimMethod, const ExperimentSummaryRow*> best;
  for (SimMethod m : methods) {
    const auto i = best_summary_row(r, m);
    if (!i) {
      s << "  " << to_string(m) << ": no successful fits\n";
      continue;
    }
    const auto& row = r.summary[*i];
    best[m] = &row;
    s << "  " << to_string(m) << ": lambda1=" << format_number(row.lambda1) << " mu1=" << format_number(row.mu1)
      << " test=" << format_number(row.mean_test) << " +/- " << format_number(row.se_test)
      << " train=" << format_number(row.mean_train) << "\n";
  }
  if (best.count(SimMethod::rcca)) {
    const auto& base = *best[SimMethod::rcca];
    const auto base_scores = test_scores(r, SimMethod::rcca, base.lambda1, base.mu1);
    for (const auto& [m, row] : best) {
      if (m == SimMethod::rcca || r.config.replicates < 2) continue;
      const PairedTest t = paired_t_test(test_scores(r, m, row->lambda1, row->mu1), base_scores);
      s << "paired t-test " << to_string(m) << " - rcca: mean difference " << format_number(t.mean_difference)
        << ", t=" << format_number(t.t) << ", p=" << format_number(t.p_value) << " (" << t.count << " pairs)\n";
    }
  }
  dir.text("summary.txt", s.str());
}

void run_screen(const RunConfig& c, OutputDir& dir, std::ostream& out) {
  const DataMatrix x = load_csv(c.x);
  std::vector<std::string> warnings;
  const Vector d = cohens_d(x, &warnings);
  for (const auto& w : warnings) out << "warning: " << w << "\n";
  const std::vector<Index> chosen = select_by_cohens_d(d, c.threshold);
  const std::set<Index> selected(chosen.begin(), chosen.end());
  Table t{{"feature", "cohens_d", "selected"}, {}};
  for (Index j = 0; j < x.cols(); ++j) {
    t.add_row({x.column_names()[static_cast<std::size_t>(j)], format_number(d(j)), selected.count(j) ? "1" : "0"});
  }
  dir.csv("cohens_d.csv", t);
  out << selected.size() << " of " << x.cols() << " features have d > " << format_number(c.threshold) << "\n";
}

std::string remedy(const Error& e) {
  if (const auto* s = dynamic_cast<const SingularCovariance*>(&e)) {
    return s->side() == 'Y' ? "increase lambda2" : "increase lambda1";
  }
  if (dynamic_cast<const IdentifiabilityError*>(&e)) return "shrink the unpenalized set or use mu1 > 0";
  if (dynamic_cast<const NoFeasiblePoint*>(&e)) return "extend the grid toward larger penalties";
  if (dynamic_cast<const SingularDesign*>(&e)) return "remove collinear or constant covariates";
  return "increase the penalties";
}

unsigned default_threads() {
  const char* env = std::getenv("GRCCA_THREADS");
  if (!env || !*env) return 1;
  try {
    std::size_t used = 0;
    const long v = std::stol(env, &used);
    if (used == std::string(env).size() && v >= 0) return static_cast<unsigned>(v);
  } catch (const std::exception&) {
  }
  throw InputError(std::string("GRCCA_THREADS must be a nonnegative integer, got '") + env + "'");
}

unsigned resolve_threads(long requested) {
  if (requested < 0) throw InputError("--threads must be nonnegative");
  if (requested == 0) return std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(requested);
}

std::string absolute(const std::string& path) {
  return path.empty() ? path : fs::absolute(path).lexically_normal().string();
}

std::vector<double> parse_axis_option(const std::string& text, const std::string& flag) {
  try {
    return parse_grid_axis(text);
  } catch (const DomainError& e) {
    throw DomainError(flag + ": " + e.what());
  }
}

}  // namespace

void execute(const RunConfig& c, const std::string& output_dir, unsigned threads, std::ostream& out) {
  OutputDir dir(output_dir);
  json inputs = json::object();
  for (const auto& p : input_paths(c)) inputs[p] = crc32_of(p);

  if (c.command == "fit") run_fit(c, dir, out);
  else if (c.command == "cv") run_cv(c, dir, threads, out);
  else if (c.command == "ncv") run_ncv(c, dir, threads, out);
  else if (c.command == "paths") run_paths(c, dir, threads, out);
  else if (c.command == "simulate") run_simulate(c, dir, threads);
  else if (c.command == "screen") run_screen(c, dir, out);
  else throw InputError("unknown command '" + c.command + "'");

  json manifest{{"software", {{"name", "grcca"}, {"version", kVersion}}},
                {"config", config_json(c)},
                {"input_crc32", inputs},
                {"outputs", dir.files()},
                {"execution", {{"threads", threads}, {"output_dir", absolute(output_dir)}}}};
  dir.write_json("manifest.json", manifest);
  out << "wrote " << dir.files().size() << " files to " << output_dir << "\n";
}

namespace {

RunConfig replay_config(const std::string& manifest_path, std::ostream& out) {
  std::ifstream in(manifest_path);
  if (!in) throw InputError("cannot read manifest '" + manifest_path + "'");
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw InputError("manifest is not valid JSON: " + std::string(e.what()));
  }
  if (!manifest.contains("config")) throw InputError("manifest has no config section");
  const std::string version = manifest.value("software", json::object()).value("version", "");
  if (version != kVersion) out << "warning: manifest written by version " << version << ", running " << kVersion << "\n";
  RunConfig c = config_from_json(manifest.at("config"));
  const json crcs = manifest.value("input_crc32", json::object());
  for (const auto& [path, crc] : crcs.items()) {
    if (crc32_of(path) != crc.get<std::string>()) throw InputError("input '" + path + "' changed since the manifest was written");
  }
  return c;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Group-regularized canonical correlation analysis"};
  app.name("grcca");
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  RunConfig c;
  std::string out_dir;
  long threads = -1;
  std::string grid_l1, grid_m1, grid_l2, grid_m2, path_grid, unpenalized, manifest_path;
  double d_threshold = 0.0;
  std::vector<std::string> methods_list;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", out_dir, "Output directory")->required();
    sub->add_option("--threads", threads, "Worker threads (0 = all cores; default $GRCCA_THREADS or 1)");
  };
  auto add_data = [&](CLI::App* sub) {
    sub->add_option("--x", c.x, "X matrix CSV with header")->required()->check(CLI::ExistingFile);
    sub->add_option("--y", c.y, "Y matrix CSV with header")->required()->check(CLI::ExistingFile);
    sub->add_option("--method", c.method, "rcca, prcca, grcca or general")
        ->check(CLI::IsMember({"rcca", "prcca", "grcca", "general"}));
    sub->add_option("--groups-x", c.groups_x, "feature,group CSV for X")->check(CLI::ExistingFile);
    sub->add_option("--groups-y", c.groups_y, "feature,group CSV for Y (group penalty on Y)")
        ->check(CLI::ExistingFile);
    sub->add_option("--unpenalized-x", unpenalized, "Comma separated X features left unpenalized (prcca)");
    sub->add_option("--cohens-d-threshold", d_threshold, "Leave X features with Cohen's d above this unpenalized");
    sub->add_option("--adjust", c.adjust, "Covariate CSV regressed out of X and Y")->check(CLI::ExistingFile);
    sub->add_option("--penalty-x", c.penalty_x, "p x p penalty matrix CSV without header (general)")
        ->check(CLI::ExistingFile);
    sub->add_option("--path", c.group_path, "GRCCA reduction: auto, eigen or extend")
        ->check(CLI::IsMember({"auto", "eigen", "extend"}));
    sub->add_flag("--scale", c.scale, "Scale every column to unit variance");
    add_common(sub);
  };
  auto add_hyper = [&](CLI::App* sub) {
    sub->add_option("--lambda1", c.lambda1, "X penalty lambda");
    sub->add_option("--mu1", c.mu1, "X group-mean penalty mu");
    sub->add_option("--lambda2", c.lambda2, "Y penalty lambda");
    sub->add_option("--mu2", c.mu2, "Y group-mean penalty mu");
  };
  auto add_grid = [&](CLI::App* sub) {
    sub->add_option("--grid-lambda1", grid_l1, "lambda1 grid: a:b:log10 or a comma list")->required();
    sub->add_option("--grid-mu1", grid_m1, "mu1 grid");
    sub->add_option("--grid-lambda2", grid_l2, "lambda2 grid");
    sub->add_option("--grid-mu2", grid_m2, "mu2 grid");
    sub->add_option("--seed", c.seed, "Fold assignment seed");
    sub->add_option("--adjust-mode", c.adjust_mode, "once (before splitting) or fold (inside every training fold)")
        ->check(CLI::IsMember({"once", "fold"}));
  };

  CLI::App* fit = app.add_subcommand("fit", "Fit one model");
  add_data(fit);
  add_hyper(fit);
  fit->add_option("--ncomp", c.ncomp, "Number of canonical pairs")->check(CLI::PositiveNumber);

  CLI::App* cv = app.add_subcommand("cv", "k-fold grid search and refit at the best point");
  add_data(cv);
  add_grid(cv);
  cv->add_option("--folds", c.folds, "Number of folds")->check(CLI::Range(2L, 1L << 30));
  cv->add_option("--ncomp", c.ncomp, "Canonical pairs of the final refit")->check(CLI::PositiveNumber);

  CLI::App* ncv = app.add_subcommand("ncv", "Nested cross-validation");
  add_data(ncv);
  add_grid(ncv);
  ncv->add_option("--outer-folds", c.outer_folds, "Outer folds")->check(CLI::Range(2L, 1L << 30));
  ncv->add_option("--inner-folds", c.inner_folds, "Inner folds")->check(CLI::Range(2L, 1L << 30));

  CLI::App* paths = app.add_subcommand("paths", "First-pair coefficients along a penalty grid");
  add_data(paths);
  add_hyper(paths);
  paths->add_option("--sweep", c.sweep, "Swept parameter: lambda1 or mu1")->check(CLI::IsMember({"lambda1", "mu1"}));
  paths->add_option("--grid", path_grid, "Grid of the swept parameter")->required();

  CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo comparison on group-structured data");
  sim->add_option("--reps", c.reps, "Replicates")->check(CLI::PositiveNumber);
  sim->add_option("--sigma-xy", c.sigma_xy, "Latent X-Y link; cross covariance is sigma_xy^2");
  sim->add_option("--sigma-x", c.sigma_x, "Feature noise around each group signal");
  sim->add_option("--n", c.sim_n, "Training rows");
  sim->add_option("--p", c.sim_p, "X features");
  sim->add_option("--q", c.sim_q, "Y features");
  sim->add_option("--groups", c.sim_k, "Number of X groups");
  sim->add_option("--n-test", c.sim_n_test, "Test rows per replicate");
  sim->add_option("--seed", c.seed, "Master seed");
  sim->add_option("--methods", methods_list, "Subset of rcca, prcca, grcca, sgrcca")->delimiter(',');
  sim->add_option("--grid-lambda1", grid_l1, "lambda1 grid (default 1e-5:1e5:log10)");
  sim->add_option("--grid-mu1", grid_m1, "mu1 grid of sgrcca (default 1e-4:1e1:log10)");
  add_common(sim);

  CLI::App* screen = app.add_subcommand("screen", "Cohen's d of every X column");
  screen->add_option("--x", c.x, "X matrix CSV with header")->required()->check(CLI::ExistingFile);
  screen->add_option("--threshold", c.threshold, "Selection threshold on d");
  add_common(screen);

  CLI::App* replay = app.add_subcommand("replay", "Rerun the configuration recorded in a manifest");
  replay->add_option("--manifest", manifest_path, "manifest.json of an earlier run")->required();
  add_common(replay);

  std::vector<const char*> argv{"grcca"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    const unsigned nthreads = threads >= 0 ? resolve_threads(threads) : resolve_threads(default_threads());
    if (replay->parsed()) {
      execute(replay_config(manifest_path, out), out_dir, nthreads, out);
      return 0;
    }
    CLI::App* chosen = app.get_subcommands().front();
    c.command = chosen->get_name();
    c.x = absolute(c.x);
    c.y = absolute(c.y);
    c.groups_x = absolute(c.groups_x);
    c.groups_y = absolute(c.groups_y);
    c.adjust = absolute(c.adjust);
    c.penalty_x = absolute(c.penalty_x);
    if (!unpenalized.empty()) {
      std::stringstream s(unpenalized);
      for (std::string token; std::getline(s, token, ',');) {
        if (!token.empty()) c.unpenalized_x.push_back(token);
      }
    }
    if (const CLI::Option* o = chosen->get_option_no_throw("--cohens-d-threshold"); o && o->count()) {
      c.cohens_d_threshold = d_threshold;
    }
    if (!methods_list.empty()) c.sim_methods = methods_list;

    if (sim->parsed()) {
      const ExperimentGrid defaults = default_experiment_grid();
      c.grid_lambda1 = grid_l1.empty() ? defaults.lambda1 : parse_axis_option(grid_l1, "--grid-lambda1");
      c.grid_mu1 = grid_m1.empty() ? defaults.sparse_mu1 : parse_axis_option(grid_m1, "--grid-mu1");
    } else if (paths->parsed()) {
      (c.sweep == "mu1" ? c.grid_mu1 : c.grid_lambda1) = parse_axis_option(path_grid, "--grid");
    } else if (cv->parsed() || ncv->parsed()) {
      c.grid_lambda1 = parse_axis_option(grid_l1, "--grid-lambda1");
      if (!grid_m1.empty()) c.grid_mu1 = parse_axis_option(grid_m1, "--grid-mu1");
      if (!grid_l2.empty()) c.grid_lambda2 = parse_axis_option(grid_l2, "--grid-lambda2");
      if (!grid_m2.empty()) c.grid_mu2 = parse_axis_option(grid_m2, "--grid-mu2");
    }
    execute(c, out_dir, nthreads, out);
    return 0;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "; remedy: " << remedy(e) << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace grcca::cli
