#pragma once

#include <optional>
#include <string>
#include <vector>

namespace gridgate {

enum class Severity { warning, error };

/// Which validation stage produced a finding.
enum class Phase { basic, advanced };

struct EntityRef {
  std::string kind;  // "node", "line", "line_kind", "device", "transformer", "grid"
  std::string id;
  bool operator==(const EntityRef&) const = default;
};

/// One validation anomaly, addressed to the grid expert.
struct Finding {
  std::string rule_id;
  Severity severity = Severity::warning;
  Phase phase = Phase::basic;
  EntityRef entity;
  std::string message;
  std::optional<double> measured;
  std::optional<double> threshold;
  bool operator==(const Finding&) const = default;
};

std::string to_string(Severity s);
std::string to_string(Phase p);

/// Every rule id the validators can emit.
const std::vector<std::string>& registered_rule_ids();

/// Canonical report order: (rule_id, entity kind, entity id, message).
void sort_findings(std::vector<Finding>& findings);

bool has_errors(const std::vector<Finding>& findings);

/// Serializes a findings report as a JSON array (deterministic).
std::string findings_to_json(const std::vector<Finding>& findings);

}  // namespace gridgate
