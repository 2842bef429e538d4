// Pass@1 aggregation and report formatting.
#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace ssg {

struct TaskOutcome {
  std::string task_id;
  bool resolved = false;
  int iterations = 0;
};

struct EvalReport {
  std::size_t total = 0;
  std::size_t resolved = 0;
  double pass_at_1 = 0.0;
  std::optional<double> rendering_accuracy;
  std::optional<double> mean_ssim;
  std::vector<TaskOutcome> per_task;
};

/// resolved / total. Throws std::invalid_argument on an empty list.
EvalReport pass_at_1(std::span<const TaskOutcome> outcomes);

nlohmann::json to_json(const EvalReport& r);
/// task_id,outcome,iterations rows followed by a TOTAL row.
std::string to_csv(const EvalReport& r);

nlohmann::json to_json(const TaskOutcome& o);
/// Reads "outcome" ("resolved" / "unresolved" / bool) or a boolean "resolved".
TaskOutcome outcome_from_json(const nlohmann::json& j);
/// Accepts a bare array of outcomes or an object with an "outcomes" (or a
/// report's "per_task") array.
std::vector<TaskOutcome> outcomes_from_json(const nlohmann::json& j);

}  // namespace ssg
