#include "afford/kb.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

namespace afford {

AffordanceKB::AffordanceKB(std::map<std::string, std::set<int>> entries)
    : entries_(std::move(entries)) {
  for (const auto& action : kb_actions()) {
    entries_.try_emplace(action);  // every action has a (possibly empty) list
  }
  for (const auto& [action, classes] : entries_) {
    if (std::find(kb_actions().begin(), kb_actions().end(), action) == kb_actions().end()) {
      throw DataError("knowledge base lists unknown action '" + action + "'");
    }
  }
}

Relationship AffordanceKB::predict(const std::string& action, int class_id) const {
  auto it = entries_.find(action);
  if (it == entries_.end()) throw DataError("unknown action '" + action + "'");
  return it->second.count(class_id) ? Relationship::kPositive : Relationship::kFirmlyNegative;
}

const std::set<int>& AffordanceKB::classes_for(const std::string& action) const {
  auto it = entries_.find(action);
  if (it == entries_.end()) throw DataError("unknown action '" + action + "'");
  return it->second;
}

AffordanceKB AffordanceKB::load(const std::string& path,
                                const std::vector<std::string>& class_names) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open knowledge base: " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad JSON in " + path + ": " + e.what());
  }
  std::map<std::string, std::set<int>> entries;
  std::vector<std::string> unknown;
  for (const auto& [action, list] : j.items()) {
    std::set<int>& classes = entries[action];
    for (const auto& name : list) {
      std::string s = name.get<std::string>();
      auto it = std::find(class_names.begin(), class_names.end(), s);
      if (it == class_names.end()) {
        unknown.push_back(s);
      } else {
        classes.insert(static_cast<int>(it - class_names.begin()));
      }
    }
  }
  if (!unknown.empty()) {
    std::string msg = "knowledge base names unknown classes:";
    for (const auto& s : unknown) msg += " '" + s + "'";
    throw DataError(msg);
  }
  return AffordanceKB(std::move(entries));
}

void AffordanceKB::save(const std::string& path,
                        const std::vector<std::string>& class_names) const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [action, classes] : entries_) {
    nlohmann::json list = nlohmann::json::array();
    for (int cls : classes) list.push_back(class_names.at(static_cast<size_t>(cls)));
    j[action] = list;
  }
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw DataError("cannot write knowledge base: " + path);
  os << j.dump(2) << "\n";
}

}  // namespace afford
