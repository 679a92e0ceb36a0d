#include "progeo/enc/params.hpp"

#include <algorithm>
#include <stdexcept>

#include "progeo/util/hash.hpp"

namespace progeo::enc {

nn::TensorPtr ParamStore::add(std::string name, int layer_tag, nn::MatF value) {
  if (find(name)) throw std::logic_error("duplicate parameter name: " + name);
  auto tensor = nn::parameter<float>(std::move(value));
  params_.push_back({std::move(name), layer_tag, tensor});
  return tensor;
}

nn::TensorPtr ParamStore::find(std::string_view name) const {
  for (const Param& p : params_) {
    if (p.name == name) return p.tensor;
  }
  return nullptr;
}

std::vector<nn::TensorPtr> ParamStore::trainable() const {
  std::vector<nn::TensorPtr> out;
  for (const Param& p : params_) {
    if (p.tensor->requires_grad) out.push_back(p.tensor);
  }
  return out;
}

std::int64_t ParamStore::trainable_scalar_count() const {
  std::int64_t n = 0;
  for (const Param& p : params_) {
    if (p.tensor->requires_grad) n += static_cast<std::int64_t>(p.tensor->value.size());
  }
  return n;
}

std::uint64_t ParamStore::value_hash() const {
  std::vector<const Param*> sorted;
  sorted.reserve(params_.size());
  for (const Param& p : params_) sorted.push_back(&p);
  std::sort(sorted.begin(), sorted.end(),
            [](const Param* a, const Param* b) { return a->name < b->name; });
  std::uint64_t h = util::kFnvOffset;
  for (const Param* p : sorted) {
    h = util::fnv1a(p->name, h);
    const std::int64_t dims[2] = {p->tensor->rows(), p->tensor->cols()};
    h = util::fnv1a(dims, sizeof(dims), h);
    h = util::fnv1a(p->tensor->value.data(),
                    sizeof(float) * static_cast<std::size_t>(p->tensor->value.size()), h);
  }
  return h;
}

void ParamStore::zero_grads() const {
  for (const Param& p : params_) p.tensor->zero_grad();
}

}  // namespace progeo::enc
