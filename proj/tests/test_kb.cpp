#include <doctest.h>

#include <fstream>

#include "afford/kb.hpp"
#include "afford/rng.hpp"

using namespace afford;

namespace {

const std::vector<std::string> kClassNames = {"floor", "wall", "chair", "bottle", "sky"};

void write_file(const std::string& path, const std::string& body) {
  std::ofstream os(path, std::ios::trunc);
  os << body;
}

}  // namespace

TEST_SUITE("knowledge-base") {

TEST_CASE("lookup semantics match the published exemplars") {
  // bottle is linked to grasp; floor is linked to run and sit
  write_file("kb_test.json",
             R"({"sit": ["floor", "chair"], "run": ["floor"], "grasp": ["bottle"]})");
  AffordanceKB kb = AffordanceKB::load("kb_test.json", kClassNames);
  CHECK(kb.predict("grasp", 3) == Relationship::kPositive);   // bottle
  CHECK(kb.predict("run", 0) == Relationship::kPositive);     // floor
  CHECK(kb.predict("sit", 0) == Relationship::kPositive);     // floor
  CHECK(kb.predict("sit", 4) == Relationship::kFirmlyNegative);  // sky not listed
  CHECK(kb.predict("grasp", 2) == Relationship::kFirmlyNegative);
  CHECK_THROWS_AS(kb.predict("fly", 0), DataError);
}

TEST_CASE("the KB never predicts an exception class") {
  write_file("kb_test2.json", R"({"sit": ["chair"], "run": [], "grasp": ["bottle"]})");
  AffordanceKB kb = AffordanceKB::load("kb_test2.json", kClassNames);
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const std::string& action = kb_actions()[static_cast<size_t>(rng.uniform_int(0, 2))];
    Relationship r = kb_predict(kb, action, rng.uniform_int(0, 4));
    CHECK_FALSE(is_exception(r));
  }
}

TEST_CASE("empty per-action lists mean everything is firmly negative") {
  write_file("kb_empty.json", R"({"sit": [], "run": [], "grasp": []})");
  AffordanceKB kb = AffordanceKB::load("kb_empty.json", kClassNames);
  for (int c = 0; c < 5; ++c) {
    CHECK(kb.predict("sit", c) == Relationship::kFirmlyNegative);
  }
}

TEST_CASE("duplicates collapse to a single entry and round-trip survives") {
  write_file("kb_dup.json", R"({"grasp": ["bottle", "bottle", "bottle"], "sit": [], "run": []})");
  AffordanceKB kb = AffordanceKB::load("kb_dup.json", kClassNames);
  CHECK(kb.classes_for("grasp").size() == 1);
  kb.save("kb_rt.json", kClassNames);
  AffordanceKB kb2 = AffordanceKB::load("kb_rt.json", kClassNames);
  CHECK(kb2.classes_for("grasp") == kb.classes_for("grasp"));
  CHECK(kb2.classes_for("sit") == kb.classes_for("sit"));
}

TEST_CASE("unknown class names are rejected listing the offenders") {
  write_file("kb_bad.json", R"({"sit": ["recliner", "chair", "ottoman"]})");
  try {
    AffordanceKB::load("kb_bad.json", kClassNames);
    FAIL("expected rejection");
  } catch (const DataError& e) {
    std::string msg = e.what();
    CHECK(msg.find("recliner") != std::string::npos);
    CHECK(msg.find("ottoman") != std::string::npos);
  }
}

}  // TEST_SUITE
