#include "grcca/simulation.hpp"

#include <cmath>

#include <boost/math/distributions/students_t.hpp>

#include "grcca/errors.hpp"
#include "grcca/model.hpp"
#include "grcca/parallel.hpp"
#include "grcca/rng.hpp"
#include "grcca/selection.hpp"

namespace grcca {

void SimulationConfig::validate() const {
  if (n < 2) throw DomainError("simulation needs n >= 2");
  if (n_test < 2) throw DomainError("simulation needs a test set of at least 2 rows");
  if (p < 1 || q < 1 || k < 1) throw DomainError("simulation needs p, q, K >= 1");
  if (p % k != 0) throw DomainError("K = " + std::to_string(k) + " does not divide p = " + std::to_string(p));
  if (!(sigma_x >= 0.0) || !std::isfinite(sigma_x)) throw DomainError("sigma_x must be finite and >= 0");
  if (!(sigma_xy >= 0.0 && sigma_xy < 1.0)) throw DomainError("sigma_xy must lie in [0, 1)");
  if (replicates < 1) throw DomainError("need at least one replicate");
  const Matrix sigma = joint_covariance();
  const double min_eigenvalue = Eigen::SelfAdjointEigenSolver<Matrix>(sigma, Eigen::EigenvaluesOnly).eigenvalues()(0);
  if (!(min_eigenvalue > 1e-12)) {
    throw InvalidCovariance("joint covariance of (Y, Xc) is not positive definite (min eigenvalue " +
                            format_number(min_eigenvalue) + "); lower sigma_xy");
  }
}

Matrix SimulationConfig::joint_covariance() const {
  Matrix sigma = Matrix::Identity(q + k, q + k);
  const double c = sigma_xy * sigma_xy;
  sigma.topRightCorner(q, k).setConstant(c);
  sigma.bottomLeftCorner(k, q).setConstant(c);
  return sigma;
}

GroupStructure SimulationConfig::groups() const {
  return GroupStructure::contiguous(std::vector<Index>(static_cast<std::size_t>(k), p / k));
}

std::pair<DataMatrix, DataMatrix> generate(const SimulationConfig& config, Index rows, std::uint64_t stream) {
  config.validate();
  if (rows < 2) throw DomainError("need at least 2 rows");
  const Index q = config.q;
  const Index k = config.k;
  const Index width = config.p / k;
  const Eigen::LLT<Matrix> llt(config.joint_covariance());
  const Matrix chol = llt.matrixL();

  CounterRng rng(stream);
  Matrix x(rows, config.p);
  Matrix y(rows, q);
  Vector z(q + k);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < q + k; ++j) z(j) = rng.normal();
    const Vector joint = chol.triangularView<Eigen::Lower>() * z;
    y.row(i) = joint.head(q).transpose();
    for (Index j = 0; j < config.p; ++j) x(i, j) = joint(q + j / width) + config.sigma_x * rng.normal();
  }
  return {DataMatrix(std::move(x), default_column_names(config.p, "X")),
          DataMatrix(std::move(y), default_column_names(q, "Y"))};
}

std::pair<DataMatrix, DataMatrix> generate_train(const SimulationConfig& config, Index replicate) {
  return generate(config, config.n, derive_seed(config.seed, static_cast<std::uint64_t>(replicate), 0));
}

std::pair<DataMatrix, DataMatrix> generate_test(const SimulationConfig& config, Index replicate) {
  return generate(config, config.n_test, derive_seed(config.seed, static_cast<std::uint64_t>(replicate), 1));
}

std::string to_string(SimMethod method) {
  switch (method) {
    case SimMethod::rcca: return "rcca";
    case SimMethod::prcca: return "prcca";
    case SimMethod::grcca: return "grcca";
    case SimMethod::sparse_grcca: return "sgrcca";
  }
  return "unknown";
}

SimMethod parse_sim_method(const std::string& name) {
  if (name == "rcca") return SimMethod::rcca;
  if (name == "prcca") return SimMethod::prcca;
  if (name == "grcca") return SimMethod::grcca;
  if (name == "sgrcca") return SimMethod::sparse_grcca;
  throw DomainError("unknown simulation method '" + name + "' (expected rcca, prcca, grcca or sgrcca)");
}

ExperimentGrid default_experiment_grid() {
  return {parse_grid_axis("1e-5:1e5:log10"), parse_grid_axis("1e-4:1e1:log10")};
}

namespace {

struct MethodRun {
  SimMethod method;
  MethodSpec spec;
  std::vector<Hyperparameters> points;
};

std::vector<MethodRun> method_runs(const SimulationConfig& config, const std::vector<SimMethod>& methods,
                                   const ExperimentGrid& grid) {
  const GroupStructure groups = config.groups();
  std::vector<MethodRun> runs;
  for (SimMethod m : methods) {
    MethodRun run{m, {}, {}};
    std::vector<double> mus{0.0};
    switch (m) {
      case SimMethod::rcca:
        run.spec.method = Method::rcca;
        break;
      case SimMethod::prcca:
        run.spec.method = Method::prcca;
        for (Index g = 0; g < config.k; ++g) run.spec.unpenalized_x.push_back(g * (config.p / config.k));
        break;
      case SimMethod::grcca:
        run.spec.method = Method::grcca;
        run.spec.groups_x = groups;
        break;
      case SimMethod::sparse_grcca:
        run.spec.method = Method::grcca;
        run.spec.groups_x = groups;
        mus = grid.sparse_mu1;
        break;
    }
    for (double l : grid.lambda1) {
      for (double mu : mus) run.points.push_back({l, mu, 0.0, 0.0});
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

bool same_point(const ExperimentCell& c, SimMethod method, double lambda1, double mu1) {
  return c.method == method && c.lambda1 == lambda1 && c.mu1 == mu1;
}

}  // namespace

ExperimentResult run_experiment(const SimulationConfig& config, const std::vector<SimMethod>& methods,
                                const ExperimentGrid& grid, unsigned threads) {
  config.validate();
  if (methods.empty()) throw DomainError("no simulation methods selected");
  if (grid.lambda1.empty()) throw DomainError("empty lambda1 grid");
  if (grid.sparse_mu1.empty()) throw DomainError("empty mu1 grid");
  const auto runs = method_runs(config, methods, grid);

  std::vector<std::vector<ExperimentCell>> per_replicate(static_cast<std::size_t>(config.replicates));
  parallel_for(per_replicate.size(), threads, [&](std::size_t r) {
    const Index rep = static_cast<Index>(r);
    const auto [x_raw, y_raw] = generate_train(config, rep);
    const auto [x_test_raw, y_test_raw] = generate_test(config, rep);
    const Vector xm = column_means(x_raw);
    const Vector ym = column_means(y_raw);
    const DataMatrix x = center_columns(x_raw);
    const DataMatrix y = center_columns(y_raw);
    const DataMatrix x_test = subtract_means(x_test_raw, xm);
    const DataMatrix y_test = subtract_means(y_test_raw, ym);
    auto& cells = per_replicate[r];
    for (const auto& run : runs) {
      for (const auto& h : run.points) {
        ExperimentCell cell{rep, run.method, h.lambda1, h.mu1, std::nullopt, std::nullopt, {}};
        try {
          const FittedCCA fit = fit_model(x, y, run.spec, h, 1);
          const Vector a = fit.alpha.col(0);
          const Vector b = fit.beta.col(0);
          cell.train_cor = plain_correlation(x, y, a, b);
          cell.test_cor = plain_correlation(x_test, y_test, a, b);
        } catch (const Error& e) {
          cell.train_cor.reset();
          cell.test_cor.reset();
          cell.error = e.what();
        }
        cells.push_back(std::move(cell));
      }
    }
  });

  ExperimentResult result;
  result.config = config;
  result.methods = methods;
  for (auto& cells : per_replicate) {
    for (auto& c : cells) result.cells.push_back(std::move(c));
  }

  for (const auto& run : runs) {
    for (const auto& h : run.points) {
      ExperimentSummaryRow row{run.method, h.lambda1, h.mu1, 0, {}, {}, {}, {}};
      std::vector<double> train;
      std::vector<double> test;
      for (const auto& c : result.cells) {
        if (!same_point(c, run.method, h.lambda1, h.mu1) || !c.test_cor) continue;
        train.push_back(*c.train_cor);
        test.push_back(*c.test_cor);
      }
      row.count = static_cast<Index>(test.size());
      if (!test.empty()) {
        std::tie(row.mean_train, row.se_train) = mean_and_se(train);
        std::tie(row.mean_test, row.se_test) = mean_and_se(test);
      }
      result.summary.push_back(row);
    }
  }
  return result;
}

std::optional<std::size_t> best_summary_row(const ExperimentResult& result, SimMethod method) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < result.summary.size(); ++i) {
    const auto& row = result.summary[i];
    if (row.method != method || !row.mean_test) continue;
    if (!best || *row.mean_test > *result.summary[*best].mean_test) best = i;
  }
  return best;
}

std::vector<std::optional<double>> test_scores(const ExperimentResult& result, SimMethod method, double lambda1,
                                               double mu1) {
  std::vector<std::optional<double>> out(static_cast<std::size_t>(result.config.replicates));
  for (const auto& c : result.cells) {
    if (same_point(c, method, lambda1, mu1)) out[static_cast<std::size_t>(c.replicate)] = c.test_cor;
  }
  return out;
}

PairedTest paired_t_test(const std::vector<std::optional<double>>& a, const std::vector<std::optional<double>>& b) {
  if (a.size() != b.size()) throw ShapeError("paired samples differ in length");
  std::vector<double> diff;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] && b[i]) diff.push_back(*a[i] - *b[i]);
  }
  PairedTest test;
  test.count = static_cast<Index>(diff.size());
  if (diff.size() < 2) throw DomainError("paired t-test needs at least 2 complete pairs");
  const auto [mean, se] = mean_and_se(diff);
  test.mean_difference = mean;
  if (se == 0.0) {
    test.t = mean == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), mean);
    test.p_value = mean == 0.0 ? 1.0 : 0.0;
    return test;
  }
  test.t = mean / se;
  const boost::math::students_t dist(static_cast<double>(diff.size() - 1));
  test.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(test.t)));
  return test;
}

Table coefficient_snapshot(const ExperimentResult& result) {
  Table table{{"method", "lambda1", "mu1", "feature", "group", "coefficient"}, {}};
  const auto runs = method_runs(result.config, result.methods, ExperimentGrid{{1.0}, {1.0}});
  const auto [x_raw, y_raw] = generate_train(result.config, 0);
  const DataMatrix x = center_columns(x_raw);
  const DataMatrix y = center_columns(y_raw);
  const GroupStructure groups = result.config.groups();
  for (const auto& run : runs) {
    const auto best = best_summary_row(result, run.method);
    if (!best) continue;
    const auto& row = result.summary[*best];
    std::optional<FittedCCA> fit;
    try {
      fit = fit_model(x, y, run.spec, {row.lambda1, row.mu1, 0.0, 0.0}, 1);
    } catch (const Error&) {
    }
    for (Index j = 0; j < x.cols(); ++j) {
      std::optional<double> value;
      if (fit) value = fit->alpha(j, 0);
      const auto g = static_cast<std::size_t>(groups.assignments()[static_cast<std::size_t>(j)]);
      table.rows.push_back({to_string(run.method), format_number(row.lambda1), format_number(row.mu1),
                            x.column_names()[static_cast<std::size_t>(j)], groups.names()[g], format_number(value)});
    }
  }
  return table;
}

Table experiment_table(const ExperimentResult& result) {
  Table table{{"replicate", "method", "lambda1", "mu1", "train_cor", "test_cor"}, {}};
  for (const auto& c : result.cells) {
    table.rows.push_back({std::to_string(c.replicate + 1), to_string(c.method), format_number(c.lambda1),
                          format_number(c.mu1), format_number(c.train_cor), format_number(c.test_cor)});
  }
  return table;
}

Table experiment_summary_table(const ExperimentResult& result) {
  Table table{{"method", "lambda1", "mu1", "count", "mean_train", "se_train", "mean_test", "se_test"}, {}};
  for (const auto& r : result.summary) {
    table.rows.push_back({to_string(r.method), format_number(r.lambda1), format_number(r.mu1),
                          std::to_string(r.count), format_number(r.mean_train), format_number(r.se_train),
                          format_number(r.mean_test), format_number(r.se_test)});
  }
  return table;
}

}  // namespace grcca
