#pragma once

#include <json.hpp>

#include "grcca/model.hpp"
#include "grcca/selection.hpp"

namespace grcca {

nlohmann::json penalty_json(const PenaltySpec& spec);

/// Coefficients are stored per component, in feature order, next to the
/// feature names.
nlohmann::json model_json(const FittedCCA& fit, const MethodSpec& spec, const Hyperparameters& hyper);

nlohmann::json hyper_json(const Hyperparameters& h);
Hyperparameters hyper_from_json(const nlohmann::json& j);

nlohmann::json cv_json(const CVResult& result);
nlohmann::json ncv_json(const NCVResult& result);

}  // namespace grcca
