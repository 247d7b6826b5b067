#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "afford/relationship.hpp"

namespace afford {

inline const std::vector<std::string>& kb_actions() {
  static const std::vector<std::string> actions = {"sit", "run", "grasp"};
  return actions;
}

// Static action -> object-class map of typical affordances. Image
// independent; it can only ever answer positive or firmly negative.
class AffordanceKB {
 public:
  AffordanceKB() = default;
  explicit AffordanceKB(std::map<std::string, std::set<int>> entries);

  // Positive iff the class is listed for the action.
  Relationship predict(const std::string& action, int class_id) const;
  const std::set<int>& classes_for(const std::string& action) const;

  // JSON {"sit": ["chair", ...], ...} resolved against the class-name table.
  static AffordanceKB load(const std::string& path, const std::vector<std::string>& class_names);
  void save(const std::string& path, const std::vector<std::string>& class_names) const;

 private:
  std::map<std::string, std::set<int>> entries_;
};

inline Relationship kb_predict(const AffordanceKB& kb, const std::string& action, int class_id) {
  return kb.predict(action, class_id);
}

}  // namespace afford
