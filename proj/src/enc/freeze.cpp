#include "progeo/enc/freeze.hpp"

#include <stdexcept>

namespace progeo::enc {

FreezeState freeze_layers(ParamStore& params, int k, int depth) {
  if (k < 0 || k > depth) {
    throw std::out_of_range("freeze_layers: k=" + std::to_string(k) + " outside [0, " +
                            std::to_string(depth) + "]");
  }
  FreezeState state;
  state.frozen_layer_count = k;
  for (Param& p : params.all()) {
    const bool freeze = (k >= 1) && (p.layer_tag != kNeverFreeze) && (p.layer_tag <= k);
    p.tensor->requires_grad = !freeze;
    if (freeze) {
      p.tensor->grad.resize(0, 0);
      state.affected_parameter_names.push_back(p.name);
    }
  }
  return state;
}

}  // namespace progeo::enc
