#include "gridgate/findings.hpp"

#include <algorithm>
#include <tuple>

#include "json.hpp"

namespace gridgate {

std::string to_string(Severity s) { return s == Severity::error ? "error" : "warning"; }

std::string to_string(Phase p) { return p == Phase::basic ? "basic" : "advanced"; }

const std::vector<std::string>& registered_rule_ids() {
  static const std::vector<std::string> ids{
      // basic
      "meshed-topology", "gps-out-of-area", "length-vs-distance", "section-out-of-range",
      "missing-gps", "missing-length", "missing-kind-params", "missing-rating",
      "missing-rated-s", "parallel-fuses",
      // advanced
      "v-out-of-band", "line-overcurrent", "gcp-overcurrent", "lf-nonconvergence"};
  return ids;
}

void sort_findings(std::vector<Finding>& findings) {
  std::sort(findings.begin(), findings.end(), [](const Finding& a, const Finding& b) {
    return std::tie(a.rule_id, a.entity.kind, a.entity.id, a.message) <
           std::tie(b.rule_id, b.entity.kind, b.entity.id, b.message);
  });
}

bool has_errors(const std::vector<Finding>& findings) {
  return std::any_of(findings.begin(), findings.end(),
                     [](const Finding& f) { return f.severity == Severity::error; });
}

std::string findings_to_json(const std::vector<Finding>& findings) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& f : findings) {
    nlohmann::ordered_json j;
    j["rule_id"] = f.rule_id;
    j["severity"] = to_string(f.severity);
    j["phase"] = to_string(f.phase);
    j["entity"] = {{"kind", f.entity.kind}, {"id", f.entity.id}};
    j["message"] = f.message;
    if (f.measured) j["measured"] = *f.measured;
    if (f.threshold) j["threshold"] = *f.threshold;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

}  // namespace gridgate
