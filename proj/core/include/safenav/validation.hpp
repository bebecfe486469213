#pragma once

#include <string>
#include <vector>

namespace safenav {

// One finding emitted by a validator. An empty issue list means the object
// satisfies every checked invariant; violations are report entries, not
// exceptions, so callers can collect and print all of them at once.
struct ValidationIssue {
  std::string code;     // stable machine-readable identifier
  std::string message;  // names the offending entity (segment index, field)
  int index = -1;       // ellipsoid / waypoint / segment index, -1 if N/A
  double margin = 0.0;  // measured violation margin (sign convention per check)
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const { return issues.empty(); }
  void add(std::string code, std::string message, int index = -1,
           double margin = 0.0) {
    issues.push_back({std::move(code), std::move(message), index, margin});
  }
  void merge(const ValidationReport& other) {
    issues.insert(issues.end(), other.issues.begin(), other.issues.end());
  }
  std::string to_string() const;
};

}  // namespace safenav
