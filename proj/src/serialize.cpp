#include "grcca/serialize.hpp"

namespace grcca {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json columns_json(const Matrix& m) {
  nlohmann::json out = nlohmann::json::array();
  for (Index c = 0; c < m.cols(); ++c) {
    std::vector<double> col(m.col(c).data(), m.col(c).data() + m.rows());
    out.push_back(col);
  }
  return out;
}

nlohmann::json groups_json(const GroupStructure& groups) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t g = 0; g < groups.names().size(); ++g) {
    out.push_back({{"name", groups.names()[g]}, {"members", groups.members(static_cast<Index>(g))}});
  }
  return out;
}

nlohmann::json indices_json(const std::vector<Index>& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Index i : v) out.push_back(i);
  return out;
}

}  // namespace

nlohmann::json penalty_json(const PenaltySpec& spec) {
  return std::visit(
      overloaded{
          [](const NoPenalty&) { return nlohmann::json{{"kind", "none"}}; },
          [](const RidgePenalty& p) { return nlohmann::json{{"kind", "ridge"}, {"lambda", p.lambda}}; },
          [](const PartialPenalty& p) {
            return nlohmann::json{{"kind", "partial"}, {"lambda", p.lambda}, {"penalized", p.penalized}};
          },
          [](const GroupPenalty& p) {
            return nlohmann::json{
                {"kind", "group"}, {"lambda", p.lambda}, {"mu", p.mu}, {"groups", groups_json(p.groups)}};
          },
          [](const GeneralPenalty& p) {
            return nlohmann::json{{"kind", "general"}, {"dimension", p.matrix.rows()}};
          },
      },
      spec);
}

nlohmann::json hyper_json(const Hyperparameters& h) {
  return {{"lambda1", h.lambda1}, {"mu1", h.mu1}, {"lambda2", h.lambda2}, {"mu2", h.mu2}};
}

Hyperparameters hyper_from_json(const nlohmann::json& j) {
  return {j.at("lambda1").get<double>(), j.at("mu1").get<double>(), j.at("lambda2").get<double>(),
          j.at("mu2").get<double>()};
}

nlohmann::json model_json(const FittedCCA& fit, const MethodSpec& spec, const Hyperparameters& hyper) {
  std::vector<double> correlations(fit.correlations.data(), fit.correlations.data() + fit.correlations.size());
  nlohmann::json out{
      {"method", to_string(spec.method)},
      {"path", to_string(fit.path)},
      {"hyperparameters", hyper_json(hyper)},
      {"penalty_x", penalty_json(fit.penalty_x)},
      {"penalty_y", penalty_json(fit.penalty_y)},
      {"components", fit.components()},
      {"correlations", correlations},
      {"x_features", fit.x_names},
      {"y_features", fit.y_names},
      {"alpha", columns_json(fit.alpha)},
      {"beta", columns_json(fit.beta)},
  };
  if (spec.method == Method::prcca) out["unpenalized_x"] = indices_json(spec.unpenalized_x);
  return out;
}

nlohmann::json cv_json(const CVResult& result) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : result.points) {
    nlohmann::json folds = nlohmann::json::array();
    for (const auto& f : p.folds) {
      nlohmann::json fold{{"train_cor", optional_number(f.train_cor)}, {"val_cor", optional_number(f.val_cor)}};
      if (!f.error.empty()) fold["error"] = f.error;
      folds.push_back(fold);
    }
    nlohmann::json entry{{"hyperparameters", hyper_json(p.hyper)},
                         {"folds", folds},
                         {"mean_train", optional_number(p.mean_train)},
                         {"se_train", optional_number(p.se_train)},
                         {"mean_val", optional_number(p.mean_val)},
                         {"se_val", optional_number(p.se_val)}};
    if (!p.failure.empty()) entry["failure"] = p.failure;
    points.push_back(entry);
  }
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& f : result.folds) folds.push_back(indices_json(f));
  return {{"seed", result.seed},
          {"fold_rows", folds},
          {"points", points},
          {"best", {{"index", result.best},
                    {"hyperparameters", hyper_json(result.best_point().hyper)},
                    {"mean_val", optional_number(result.best_point().mean_val)}}}};
}

nlohmann::json ncv_json(const NCVResult& result) {
  nlohmann::json outer = nlohmann::json::array();
  for (const auto& f : result.outer) {
    outer.push_back({{"test_rows", indices_json(f.test_rows)},
                     {"best", hyper_json(f.best)},
                     {"inner_cor", f.inner_score},
                     {"test_cor", f.test_score}});
  }
  auto band = [](double mean, double se) {
    return nlohmann::json{{"mean", mean}, {"se", se}, {"lower", mean - se}, {"upper", mean + se}};
  };
  return {{"seed", result.seed},
          {"outer", outer},
          {"inner_cor", band(result.mean_inner, result.se_inner)},
          {"test_cor", band(result.mean_test, result.se_test)}};
}

}  // namespace grcca
