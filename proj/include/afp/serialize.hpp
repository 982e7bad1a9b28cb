#pragma once
// JSON round-tripping for designs, problems, and solution files, plus the
// user-facing problem config format with defaults and diagnostics.

#include <string>

#include <json.hpp>

#include "afp/channel_sim.hpp"
#include "afp/optimizer.hpp"

namespace afp {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Complex matrix as row-major nested arrays of [re, im] pairs.
Json matrix_to_json(const Mat& m);
Mat matrix_from_json(const Json& j);

Json target_to_json(const TargetTransform& t);
TargetTransform target_from_json(const Json& j);

Json design_to_json(const AfpDesign& d);
AfpDesign design_from_json(const Json& j);

Json problem_to_json(const DesignProblem& p);
DesignProblem problem_from_json(const Json& j);

Json report_to_json(const MetricReport& r);
MetricReport report_from_json(const Json& j);

/// Full solution file (schema_version, problem, design, report, trace).
/// Deterministic: identical solutions serialize to identical bytes, and
/// no wall-clock information is stored.
Json solution_to_json(const Solution& s);
Solution solution_from_json(const Json& j);

void save_solution(const std::string& path, const Solution& s);
Solution load_solution(const std::string& path);

/// Builds a problem from the user config format. Unknown or ill-typed
/// fields raise std::runtime_error naming the offending field; omitted
/// fields fall back to documented defaults (128-mode grid, 32-mode
/// support, centered channels, depth-3 arbitrary drive, max_success with
/// f_min 0.99).
DesignProblem problem_from_config(const Json& config);
DesignProblem load_problem_config(const std::string& path);

Json validation_to_json(const ValidationTable& t);

}  // namespace afp
