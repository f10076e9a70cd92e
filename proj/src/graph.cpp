#include "dscnet/graph.hpp"

#include <algorithm>

namespace dscnet {

bool Graph::wants(std::initializer_list<const Tensor*> inputs) const {
  if (!recording_) return false;
  return std::any_of(inputs.begin(), inputs.end(),
                     [](const Tensor* t) { return t && t->defined() && t->requires_grad(); });
}

bool Graph::wants(const std::vector<Tensor>& inputs) const {
  if (!recording_) return false;
  return std::any_of(inputs.begin(), inputs.end(),
                     [](const Tensor& t) { return t.defined() && t.requires_grad(); });
}

void Graph::record(std::vector<Tensor> inputs, Tensor output, BackwardFn backward) {
  output.set_requires_grad(true);
  nodes_.push_back(Node{std::move(inputs), std::move(output), std::move(backward)});
}

void Graph::backward(Tensor loss) {
  if (loss.size() != 1) {
    throw ShapeError("backward needs a scalar loss, got shape " + shape_string(loss.shape()));
  }
  for (Node& node : nodes_) node.output.zero_grad();
  // A loss that is itself a leaf has nothing to propagate.
  loss.ensure_grad()[0] += 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    for (Tensor& in : it->inputs) {
      if (in.requires_grad()) in.ensure_grad();
    }
    it->backward();
  }
}

}  // namespace dscnet
