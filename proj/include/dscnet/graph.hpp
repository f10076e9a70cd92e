#pragma once

#include <functional>
#include <vector>

#include "dscnet/tensor.hpp"

namespace dscnet {

/// Tape of recorded operations for reverse-mode differentiation.
///
/// Nodes are appended in execution order, so an input always precedes its
/// consumers and backward() simply walks the tape in reverse. A graph built
/// with recording disabled runs every op forward-only.
class Graph {
 public:
  using BackwardFn = std::function<void()>;

  explicit Graph(bool recording = true) : recording_(recording) {}

  bool recording() const { return recording_; }
  std::size_t size() const { return nodes_.size(); }

  /// True when an op over `inputs` must be recorded.
  bool wants(std::initializer_list<const Tensor*> inputs) const;
  bool wants(const std::vector<Tensor>& inputs) const;

  /// Appends a node. The output is marked as requiring grad. The backward
  /// function reads output.grad() and accumulates into the input grads.
  void record(std::vector<Tensor> inputs, Tensor output, BackwardFn backward);

  /// Seeds d(loss)/d(loss) = 1 and propagates to every reachable tensor.
  /// Intermediate gradients are reset first; leaf gradients accumulate across
  /// calls until the caller zeroes them.
  void backward(Tensor loss);

  void clear() { nodes_.clear(); }

 private:
  struct Node {
    std::vector<Tensor> inputs;
    Tensor output;
    BackwardFn backward;
  };

  bool recording_;
  std::vector<Node> nodes_;
};

}  // namespace dscnet
