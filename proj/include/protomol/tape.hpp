#pragma once

#include <deque>
#include <functional>
#include <vector>

#include "protomol/tensor.hpp"

namespace protomol {

class Tape;

// Handle into a tape. Cheap to copy; only meaningful together with the tape
// that produced it.
struct Var {
  int idx = -1;
  bool valid() const { return idx >= 0; }
};

// Reverse-mode tape over dense f64 tensors. Nodes are appended in evaluation
// order, so parents always precede children and a single reverse sweep
// propagates gradients. Every op validates shapes and rejects non-finite
// results with NumericalError.
//
// A tape is single-owner while recording; independent samples get independent
// tapes.
class Tape {
 public:
  Var leaf(Tensor value);      // requires_grad taken from the tensor
  Var constant(Tensor value);  // never receives gradient

  const Tensor& value(Var v) const { return nodes_[v.idx].value; }
  const Tensor& grad(Var v) const;
  bool requires_grad(Var v) const { return nodes_[v.idx].requires_grad; }
  int size() const { return static_cast<int>(nodes_.size()); }

  // Elementwise; a 1x1 operand broadcasts against any shape.
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var add_scalar(Var a, double c);
  Var mul_scalar(Var a, double c);

  Var matmul(Var a, Var b);
  Var relu(Var a);
  Var exp(Var a);
  Var log(Var a);   // DomainError on inputs <= 0
  Var sqrt(Var a);  // DomainError on inputs < 0

  Var sum(Var a);   // -> 1x1
  Var mean(Var a);  // -> 1x1
  // Mean over the row index: n x d -> 1 x d.
  Var mean_rows(Var a);
  // Stack operands (equal column counts) vertically.
  Var concat_rows(const std::vector<Var>& parts);
  // Softmax independently per row, max-shifted for stability.
  Var row_softmax(Var a);
  // Squared euclidean distance between x (1 x d) and every row of m (n x d),
  // producing 1 x n.
  Var sq_dist_rows(Var x, Var m);
  // Cosine similarity of two 1 x d rows -> 1x1. DomainError on a zero vector.
  Var cosine(Var x, Var y);
  // Select rows of m; duplicate indices are allowed. Backward scatters into
  // the source rows and leaves everything else zero.
  Var gather_rows(Var m, std::vector<int> indices);
  // Inverse of gather_rows: place row i of v at row indices[i] of a zero
  // (out_rows x cols) tensor. Duplicate targets accumulate.
  Var scatter_rows(Var v, std::vector<int> indices, int out_rows);
  // Add a 1 x d row vector to every row of an n x d matrix.
  Var add_rowvec(Var m, Var v);
  // Same data, new shape; element count must match.
  Var reshape(Var a, int rows, int cols);

  // Reverse sweep from a scalar output. Gradient buffers are reset on every
  // call, so repeated backward passes give identical results. Throws
  // NonScalarOutput if the output is not 1x1.
  void backward(Var output);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    std::vector<int> parents;
    // Scatters this node's grad into its parents' grads.
    std::function<void(Tape&, const Node&)> backprop;
  };

  Var push(Tensor value, std::vector<int> parents,
           std::function<void(Tape&, const Node&)> backprop);
  Tensor& grad_buf(int idx) { return nodes_[idx].grad; }
  void check_finite(const Tensor& t, const char* op) const;

  std::vector<Node> nodes_;
};

}  // namespace protomol
