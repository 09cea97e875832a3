#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "grcca/data.hpp"
#include "grcca/penalty.hpp"
#include "grcca/table.hpp"

namespace grcca {

/// Group-structured Gaussian design: (Y, Xc) ~ N(0, Sigma) with
/// Sigma = [[I_q, s^2 11^T], [s^2 11^T, I_K]], s = sigma_xy, and every
/// feature of group k equal to Xc_k plus N(0, sigma_x^2) noise. Groups are
/// contiguous blocks of p / K features.
struct SimulationConfig {
  Index n = 10;
  Index p = 15;
  Index q = 3;
  Index k = 5;
  double sigma_x = 1.0;
  double sigma_xy = 0.5;
  std::uint64_t seed = 1;
  Index replicates = 1000;
  /// Rows of the independent test set drawn per replicate.
  Index n_test = 10;

  /// Throws DomainError on out-of-range fields and InvalidCovariance when
  /// Sigma is not positive definite.
  void validate() const;
  Matrix joint_covariance() const;
  GroupStructure groups() const;
};

/// `rows` draws from the stream keyed by `stream`. Columns are X1..Xp and
/// Y1..Yq; neither matrix is centered.
std::pair<DataMatrix, DataMatrix> generate(const SimulationConfig& config, Index rows, std::uint64_t stream);

/// Training set of replicate r uses stream derive_seed(seed, r, 0), its test
/// set derive_seed(seed, r, 1).
std::pair<DataMatrix, DataMatrix> generate_train(const SimulationConfig& config, Index replicate);
std::pair<DataMatrix, DataMatrix> generate_test(const SimulationConfig& config, Index replicate);

/// Compared fits: ridge; partial ridge with the first feature of every group
/// unpenalized; group penalty with mu1 = 0; group penalty over a mu1 list.
enum class SimMethod { rcca, prcca, grcca, sparse_grcca };

std::string to_string(SimMethod method);
SimMethod parse_sim_method(const std::string& name);

struct ExperimentGrid {
  std::vector<double> lambda1;
  std::vector<double> sparse_mu1{1.0};
};

/// Default grids: lambda1 = 10^-5..10^5 and
/// mu1 = 10^-4..10 for the sparse variant.
ExperimentGrid default_experiment_grid();

struct ExperimentCell {
  Index replicate = 0;
  SimMethod method = SimMethod::rcca;
  double lambda1 = 0.0;
  double mu1 = 0.0;
  std::optional<double> train_cor;
  std::optional<double> test_cor;
  std::string error;
};

struct ExperimentSummaryRow {
  SimMethod method = SimMethod::rcca;
  double lambda1 = 0.0;
  double mu1 = 0.0;
  Index count = 0;
  std::optional<double> mean_train;
  std::optional<double> se_train;
  std::optional<double> mean_test;
  std::optional<double> se_test;
};

struct ExperimentResult {
  SimulationConfig config;
  std::vector<SimMethod> methods;
  /// Ordered by replicate, then method, then grid point.
  std::vector<ExperimentCell> cells;
  std::vector<ExperimentSummaryRow> summary;
};

/// Fits every method at every grid point on every replicate and scores the
/// first canonical pair on the training and test sets. Failed cells are kept
/// with an error. Replicates run concurrently; results do not depend on
/// `threads`.
ExperimentResult run_experiment(const SimulationConfig& config, const std::vector<SimMethod>& methods,
                                const ExperimentGrid& grid, unsigned threads = 1);

/// Row of `summary` with the largest mean test correlation for a method.
std::optional<std::size_t> best_summary_row(const ExperimentResult& result, SimMethod method);

/// Per-replicate test correlations of a method at one grid point, in
/// replicate order; missing cells are absent from the optional.
std::vector<std::optional<double>> test_scores(const ExperimentResult& result, SimMethod method, double lambda1,
                                               double mu1);

struct PairedTest {
  Index count = 0;
  double mean_difference = 0.0;
  double t = 0.0;
  double p_value = 1.0;
};

/// Two-sided paired t-test of a - b over pairs where both are present.
PairedTest paired_t_test(const std::vector<std::optional<double>>& a, const std::vector<std::optional<double>>& b);

/// Coefficients of each method at its best grid point, refitted on the
/// training set of replicate 0.
Table coefficient_snapshot(const ExperimentResult& result);

Table experiment_table(const ExperimentResult& result);
Table experiment_summary_table(const ExperimentResult& result);

}  // namespace grcca
