#pragma once

#include <optional>
#include <string>
#include <vector>

#include "grcca/kernel.hpp"

namespace grcca {

enum class Method { rcca, prcca, grcca, general };

std::string to_string(Method method);
Method parse_method(const std::string& name);
std::string to_string(GroupPath path);
GroupPath parse_group_path(const std::string& name);

/// Fixed structure of a model family; the penalty strengths come separately
/// as Hyperparameters so one spec can be swept over a grid.
///
/// X side: rcca -> lambda1 I; prcca -> lambda1 on all but `unpenalized_x`;
/// grcca -> lambda1 (I - C) + mu1 C over `groups_x`; general -> lambda1 *
/// `penalty_x`. Y side: group(lambda2, mu2) over `groups_y` when set,
/// ridge(lambda2) otherwise.
struct MethodSpec {
  Method method = Method::rcca;
  std::vector<Index> unpenalized_x;
  std::optional<GroupStructure> groups_x;
  GroupPath group_path = GroupPath::automatic;
  std::optional<Matrix> penalty_x;
  std::optional<GroupStructure> groups_y;
};

struct Hyperparameters {
  double lambda1 = 0.0;
  double mu1 = 0.0;
  double lambda2 = 0.0;
  double mu2 = 0.0;

  friend bool operator==(const Hyperparameters&, const Hyperparameters&) = default;
};

/// Checks the spec against the data widths (groups cover X, indices in range,
/// penalty matrix square of width p).
void validate(const MethodSpec& spec, Index p, Index q);

PenaltySpec y_penalty_spec(const MethodSpec& spec, const Hyperparameters& h);

/// Fits on centered x, y through the reduction path of the method.
FittedCCA fit_model(const DataMatrix& x, const DataMatrix& y, const MethodSpec& spec, const Hyperparameters& h,
                    Index r = 1);

/// Centering statistics of a training set, reusable on held-out rows.
struct CenteredPair {
  DataMatrix x;
  DataMatrix y;
  Vector x_means;
  Vector y_means;
};

CenteredPair center_pair(const DataMatrix& x, const DataMatrix& y);

}  // namespace grcca
