#pragma once

#include <string>
#include <vector>

#include "progeo/enc/params.hpp"

namespace progeo::enc {

struct FreezeState {
  int frozen_layer_count = 0;
  std::vector<std::string> affected_parameter_names;
};

// Freezes the stem/embedding stage plus the first k blocks (k == 0 leaves
// everything trainable; k == depth leaves only the head trainable). Frozen
// parameters drop out of the trainable set and keep their bits across
// optimizer steps.
FreezeState freeze_layers(ParamStore& params, int k, int depth);

}  // namespace progeo::enc
