#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace grcca::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Fully resolved configuration of one run. Everything that determines the
/// output files lives here; the thread count and output directory do not.
struct RunConfig {
  std::string command;

  // Inputs, stored as absolute paths.
  std::string x;
  std::string y;
  std::string groups_x;
  std::string groups_y;
  std::string adjust;
  std::string penalty_x;

  std::string method = "rcca";
  std::string group_path = "auto";
  std::vector<std::string> unpenalized_x;
  std::optional<double> cohens_d_threshold;
  std::string adjust_mode = "once";
  bool scale = false;
  long ncomp = 1;

  double lambda1 = 0.0;
  double mu1 = 0.0;
  double lambda2 = 0.0;
  double mu2 = 0.0;

  std::vector<double> grid_lambda1{0.0};
  std::vector<double> grid_mu1{0.0};
  std::vector<double> grid_lambda2{0.0};
  std::vector<double> grid_mu2{0.0};

  long folds = 10;
  long outer_folds = 11;
  long inner_folds = 10;
  std::uint64_t seed = 0;

  std::string sweep = "lambda1";

  long sim_n = 10;
  long sim_p = 15;
  long sim_q = 3;
  long sim_k = 5;
  long sim_n_test = 10;
  double sigma_x = 1.0;
  double sigma_xy = 0.5;
  long reps = 1000;
  std::vector<std::string> sim_methods{"rcca", "prcca", "grcca", "sgrcca"};

  double threshold = 0.3;
};

nlohmann::json config_json(const RunConfig& config);
RunConfig config_from_json(const nlohmann::json& j);

/// Parses `args` (without the program name), runs the command and returns
/// the process exit code: 0 success, 2 usage or input error, 3 numerical
/// infeasibility.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Runs a resolved configuration, writing into `output_dir`.
void execute(const RunConfig& config, const std::string& output_dir, unsigned threads, std::ostream& out);

}  // namespace grcca::cli
