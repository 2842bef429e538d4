#include "ssg/eval.hpp"

#include <cstdio>
#include <stdexcept>

namespace ssg {

EvalReport pass_at_1(std::span<const TaskOutcome> outcomes) {
  if (outcomes.empty()) throw std::invalid_argument("pass_at_1: no outcomes");
  EvalReport r;
  r.total = outcomes.size();
  for (const auto& o : outcomes) {
    r.resolved += o.resolved ? 1 : 0;
    r.per_task.push_back(o);
  }
  r.pass_at_1 = static_cast<double>(r.resolved) / static_cast<double>(r.total);
  return r;
}

nlohmann::json to_json(const TaskOutcome& o) {
  return {{"task_id", o.task_id}, {"outcome", o.resolved ? "resolved" : "unresolved"}, {"iterations", o.iterations}};
}

TaskOutcome outcome_from_json(const nlohmann::json& j) {
  TaskOutcome o;
  o.task_id = j.at("task_id").get<std::string>();
  const auto& out = j.contains("outcome") ? j.at("outcome") : j.at("resolved");
  if (out.is_boolean()) {
    o.resolved = out.get<bool>();
  } else {
    auto s = out.get<std::string>();
    if (s != "resolved" && s != "unresolved") throw std::invalid_argument("unknown outcome '" + s + "'");
    o.resolved = s == "resolved";
  }
  o.iterations = j.value("iterations", 0);
  return o;
}

std::vector<TaskOutcome> outcomes_from_json(const nlohmann::json& j) {
  const auto& arr = !j.is_object() ? j : j.contains("outcomes") ? j.at("outcomes") : j.at("per_task");
  if (!arr.is_array()) throw std::invalid_argument("outcomes must be a JSON array");
  std::vector<TaskOutcome> out;
  for (const auto& e : arr) out.push_back(outcome_from_json(e));
  return out;
}

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json j{{"total", r.total}, {"resolved", r.resolved}, {"pass_at_1", r.pass_at_1}};
  j["rendering_accuracy"] = r.rendering_accuracy ? nlohmann::json(*r.rendering_accuracy) : nlohmann::json(nullptr);
  j["mean_ssim"] = r.mean_ssim ? nlohmann::json(*r.mean_ssim) : nlohmann::json(nullptr);
  j["per_task"] = nlohmann::json::array();
  for (const auto& o : r.per_task) j["per_task"].push_back(to_json(o));
  return j;
}

std::string to_csv(const EvalReport& r) {
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  };
  std::string out = "task_id,outcome,iterations\n";
  for (const auto& o : r.per_task)
    out += quote(o.task_id) + "," + (o.resolved ? "resolved" : "unresolved") + "," + std::to_string(o.iterations) + "\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", r.pass_at_1);
  out += "TOTAL," + std::to_string(r.resolved) + "/" + std::to_string(r.total) + "," + buf + "\n";
  return out;
}

}  // namespace ssg
