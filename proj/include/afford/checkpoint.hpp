#pragma once

#include <map>
#include <string>

#include "afford/param_store.hpp"

namespace afford {

enum class Precision { f64, f32 };

struct Checkpoint {
  ParamStore store;
  int epoch = 0;
  Precision precision = Precision::f64;
  std::map<std::string, std::string> meta;
};

// Single-file binary checkpoint: parameter names, shapes, values, Adam
// moments, step counter, epoch, and a string metadata section (config,
// vocabularies). Round-trips bitwise at the stored precision.
void save_checkpoint(const std::string& path, const ParamStore& store, int epoch,
                     Precision precision = Precision::f64,
                     const std::map<std::string, std::string>& meta = {});

Checkpoint load_checkpoint(const std::string& path);

}  // namespace afford
