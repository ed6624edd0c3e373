#pragma once

#include <json.hpp>
#include <string>

#include "spw/check.hpp"
#include "spw/finite_sample.hpp"
#include "spw/gpw.hpp"
#include "spw/inference.hpp"
#include "spw/residuals.hpp"
#include "spw/sim.hpp"

namespace spw {

using json = nlohmann::ordered_json;

/// Serialise with every floating value printed to 17 significant digits;
/// NaN and infinities become null.
std::string dump17(const json& j, int indent = 2);
std::string format17(double v);

/// {"kind": "gnpw", "nu1": 0, "nu2": 0, "theta": [1,0,-2,1]} and the other
/// tags (see README). Unknown fields are rejected.
ResidualKind residual_kind_from_json(const json& j);
json residual_kind_to_json(const ResidualKind& kind);

/// With 0 < level < 1, adds per-coefficient Wald intervals under "ci".
json fit_to_json(const GpwFit& fit, double level = 0.0);
json fpw_to_json(const FpwResult& r);
json pvalue_meta_to_json(const PValueBounds& pvb);
std::string pvalue_csv(const PValueBounds& pvb);
json confidence_set_to_json(const ConfidenceSet& cs);
json study_to_json(const StudyResult& study);
std::string estimates_csv(const EstimatorResult& res);
std::string density_csv(const DensitySummary& d);
json check_report_to_json(const CheckReport& report);

}  // namespace spw
