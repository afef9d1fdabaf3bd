#pragma once

#include <string>

#include "cpomdp/io.hpp"

namespace testutil {

inline std::string data_path(const std::string& rel) {
  return std::string(CPOMDP_DATA_DIR) + "/" + rel;
}

inline std::string scratch_path(const std::string& rel) {
  return std::string(CPOMDP_SCRATCH_DIR) + "/" + rel;
}

inline cpomdp::LoadedModel load_tiger() {
  return cpomdp::load_model_file(data_path("models/tiger.json"));
}

inline cpomdp::LoadedModel load_coin() {
  return cpomdp::load_model_file(data_path("models/coin.json"));
}

}  // namespace testutil
