#include "grcca/model.hpp"

#include "grcca/errors.hpp"

namespace grcca {

std::string to_string(Method method) {
  switch (method) {
    case Method::rcca: return "rcca";
    case Method::prcca: return "prcca";
    case Method::grcca: return "grcca";
    case Method::general: return "general";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "rcca") return Method::rcca;
  if (name == "prcca") return Method::prcca;
  if (name == "grcca") return Method::grcca;
  if (name == "general") return Method::general;
  throw DomainError("unknown method '" + name + "' (expected rcca, prcca, grcca or general)");
}

std::string to_string(GroupPath path) {
  switch (path) {
    case GroupPath::automatic: return "auto";
    case GroupPath::eigen: return "eigen";
    case GroupPath::extend: return "extend";
  }
  return "unknown";
}

GroupPath parse_group_path(const std::string& name) {
  if (name == "auto") return GroupPath::automatic;
  if (name == "eigen") return GroupPath::eigen;
  if (name == "extend") return GroupPath::extend;
  throw DomainError("unknown GRCCA path '" + name + "' (expected auto, eigen or extend)");
}

void validate(const MethodSpec& spec, Index p, Index q) {
  switch (spec.method) {
    case Method::rcca:
      break;
    case Method::prcca:
      for (Index j : spec.unpenalized_x) {
        if (j < 0 || j >= p) throw ShapeError("unpenalized index " + std::to_string(j) + " out of range");
      }
      break;
    case Method::grcca:
      if (!spec.groups_x) throw InputError("grcca needs a group structure for X");
      if (spec.groups_x->feature_count() != p) throw ShapeError("X group structure does not cover X");
      break;
    case Method::general:
      if (!spec.penalty_x) throw InputError("general method needs a penalty matrix for X");
      if (spec.penalty_x->rows() != p || spec.penalty_x->cols() != p) {
        throw ShapeError("general penalty must be " + std::to_string(p) + "x" + std::to_string(p));
      }
      validate(GeneralPenalty{*spec.penalty_x});
      break;
  }
  if (spec.groups_y && spec.groups_y->feature_count() != q) throw ShapeError("Y group structure does not cover Y");
}

PenaltySpec y_penalty_spec(const MethodSpec& spec, const Hyperparameters& h) {
  if (spec.groups_y) return GroupPenalty{h.lambda2, h.mu2, *spec.groups_y};
  return RidgePenalty{h.lambda2};
}

FittedCCA fit_model(const DataMatrix& x, const DataMatrix& y, const MethodSpec& spec, const Hyperparameters& h,
                    Index r) {
  const PenaltySpec py = y_penalty_spec(spec, h);
  switch (spec.method) {
    case Method::rcca:
      return rcca_kernel_fit(x, y, h.lambda1, py, r);
    case Method::prcca:
      return prcca_kernel_fit(x, spec.unpenalized_x, y, h.lambda1, py, r);
    case Method::grcca:
      if (!spec.groups_x) throw InputError("grcca needs a group structure for X");
      return grcca_fit(x, y, *spec.groups_x, h.lambda1, h.mu1, py, r, spec.group_path);
    case Method::general: {
      if (!spec.penalty_x) throw InputError("general method needs a penalty matrix for X");
      if (!(h.lambda1 >= 0.0)) throw DomainError("lambda1 must be nonnegative");
      return general_fit(x, y, factor_general_penalty(h.lambda1 * *spec.penalty_x), py, r);
    }
  }
  throw DomainError("unknown method");
}

CenteredPair center_pair(const DataMatrix& x, const DataMatrix& y) {
  Vector xm = column_means(x);
  Vector ym = column_means(y);
  return {center_columns(x), center_columns(y), std::move(xm), std::move(ym)};
}

}  // namespace grcca
