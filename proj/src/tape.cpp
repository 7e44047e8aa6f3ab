#include "protomol/tape.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "protomol/errors.hpp"

namespace protomol {

namespace {

bool is_scalar(const Tensor& t) { return t.rows() == 1 && t.cols() == 1; }

}  // namespace

void Tape::check_finite(const Tensor& t, const char* op) const {
  if (!t.all_finite()) {
    throw NumericalError(std::string("non-finite value produced by ") + op);
  }
}

Var Tape::push(Tensor value, std::vector<int> parents,
               std::function<void(Tape&, const Node&)> backprop) {
  Node n;
  n.value = std::move(value);
  n.parents = std::move(parents);
  for (int p : n.parents) {
    if (nodes_[p].requires_grad) {
      n.requires_grad = true;
      break;
    }
  }
  n.backprop = n.requires_grad ? std::move(backprop) : nullptr;
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::leaf(Tensor value) {
  check_finite(value, "leaf");
  Node n;
  n.requires_grad = value.requires_grad();
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::constant(Tensor value) {
  check_finite(value, "constant");
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

const Tensor& Tape::grad(Var v) const {
  const Node& n = nodes_[v.idx];
  if (n.grad.size() == 0) {
    throw Error("gradient not available; run backward first");
  }
  return n.grad;
}

// ---------------------------------------------------------------------------
// Elementwise ops with 1x1 broadcast.

Var Tape::add(Var a, Var b) {
  const Tensor& x = value(a);
  const Tensor& y = value(b);
  if (x.same_shape(y)) {
    Tensor out = x;
    for (int i = 0; i < out.size(); ++i) out[i] += y[i];
    check_finite(out, "add");
    return push(std::move(out), {a.idx, b.idx}, [a, b](Tape& t, const Node& n) {
      Tensor& ga = t.grad_buf(a.idx);
      Tensor& gb = t.grad_buf(b.idx);
      for (int i = 0; i < n.grad.size(); ++i) {
        if (t.requires_grad(a)) ga[i] += n.grad[i];
        if (t.requires_grad(b)) gb[i] += n.grad[i];
      }
    });
  }
  if (is_scalar(x)) return add(b, a);
  if (is_scalar(y)) {
    Tensor out = x;
    const double c = y[0];
    for (int i = 0; i < out.size(); ++i) out[i] += c;
    check_finite(out, "add");
    return push(std::move(out), {a.idx, b.idx}, [a, b](Tape& t, const Node& n) {
      if (t.requires_grad(a)) {
        Tensor& ga = t.grad_buf(a.idx);
        for (int i = 0; i < n.grad.size(); ++i) ga[i] += n.grad[i];
      }
      if (t.requires_grad(b)) {
        double s = 0.0;
        for (int i = 0; i < n.grad.size(); ++i) s += n.grad[i];
        t.grad_buf(b.idx)[0] += s;
      }
    });
  }
  throw ShapeMismatch("add: incompatible shapes");
}

Var Tape::sub(Var a, Var b) { return add(a, mul_scalar(b, -1.0)); }

Var Tape::mul(Var a, Var b) {
  const Tensor& x = value(a);
  const Tensor& y = value(b);
  if (x.same_shape(y)) {
    Tensor out = x;
    for (int i = 0; i < out.size(); ++i) out[i] *= y[i];
    check_finite(out, "mul");
    return push(std::move(out), {a.idx, b.idx}, [a, b](Tape& t, const Node& n) {
      const Tensor& x = t.value(a);
      const Tensor& y = t.value(b);
      if (t.requires_grad(a)) {
        Tensor& ga = t.grad_buf(a.idx);
        for (int i = 0; i < n.grad.size(); ++i) ga[i] += n.grad[i] * y[i];
      }
      if (t.requires_grad(b)) {
        Tensor& gb = t.grad_buf(b.idx);
        for (int i = 0; i < n.grad.size(); ++i) gb[i] += n.grad[i] * x[i];
      }
    });
  }
  if (is_scalar(x)) return mul(b, a);
  if (is_scalar(y)) {
    Tensor out = x;
    const double c = y[0];
    for (int i = 0; i < out.size(); ++i) out[i] *= c;
    check_finite(out, "mul");
    return push(std::move(out), {a.idx, b.idx}, [a, b](Tape& t, const Node& n) {
      const Tensor& x = t.value(a);
      const double c = t.value(b)[0];
      if (t.requires_grad(a)) {
        Tensor& ga = t.grad_buf(a.idx);
        for (int i = 0; i < n.grad.size(); ++i) ga[i] += n.grad[i] * c;
      }
      if (t.requires_grad(b)) {
        double s = 0.0;
        for (int i = 0; i < n.grad.size(); ++i) s += n.grad[i] * x[i];
        t.grad_buf(b.idx)[0] += s;
      }
    });
  }
  throw ShapeMismatch("mul: incompatible shapes");
}

Var Tape::add_scalar(Var a, double c) {
  Tensor out = value(a);
  for (int i = 0; i < out.size(); ++i) out[i] += c;
  check_finite(out, "add_scalar");
  return push(std::move(out), {a.idx}, [a](Tape& t, const Node& n) {
    Tensor& ga = t.grad_buf(a.idx);
    for (int i = 0; i < n.grad.size(); ++i) ga[i] += n.grad[i];
  });
}

Var Tape::mul_scalar(Var a, double c) {
  Tensor out = value(a);
  for (int i = 0; i < out.size(); ++i) out[i] *= c;
  check_finite(out, "mul_scalar");
  return push(std::move(out), {a.idx}, [a, c](Tape& t, const Node& n) {
    Tensor& ga = t.grad_buf(a.idx);
    for (int i = 0; i < n.grad.size(); ++i) ga[i] += n.grad[i] * c;
  });
}

// ---------------------------------------------------------------------------
// Linear algebra.

Var Tape::matmul(Var a, Var b) {
  const Tensor& x = value(a);
  const Tensor& y = value(b);
  if (x.cols() != y.rows()) throw ShapeMismatch("matmul: inner dimensions differ");
  const int R = x.rows(), K = x.cols(), C = y.cols();
  Tensor out(R, C);
  for (int i = 0; i < R; ++i) {
    for (int k = 0; k < K; ++k) {
      const double xv = x.at(i, k);
      if (xv == 0.0) continue;
      for (int j = 0; j < C; ++j) out.at(i, j) += xv * y.at(k, j);
    }
  }
  check_finite(out, "matmul");
  return push(std::move(out), {a.idx, b.idx}, [a, b](Tape& t, const Node& n) {
    const Tensor& x = t.value(a);
    const Tensor& y = t.value(b);
    const int R = x.rows(), K = x.cols(), C = y.cols();
    if (t.requires_grad(a)) {
      Tensor& ga = t.grad_buf(a.idx);
      // dX = dOut * Y^T
      for (int i = 0; i < R; ++i) {
        for (int k = 0; k < K; ++k) {
          double s = 0.0;
          for (int j = 0; j < C; ++j) s += n.grad.at(i, j) * y.at(k, j);
          ga.at(i, k) += s;
        }
      }
    }
    if (t.requires_grad(b)) {
      Tensor& gb = t.grad_buf(b.idx);
      // dY = X^T * dOut
      for (int i = 0; i < R; ++i) {
        for (int k = 0; k < K; ++k) {
          const double xv = x.at(i, k);
          if (xv == 0.0) continue;
          for (int j = 0; j < C; ++j) gb.at(k, j) += xv * n.grad.at(i, j);
        }
      }
    }
  });
}

// ---------------------------------------------------------------------------
// Elementwise nonlinearities.

Var Tape::relu(Var a) {
  Tensor out = value(a);
  for (int i = 0; i < out.size(); ++i) out[i] = out[i] > 0.0 ? out[i] : 0.0;
  return push(std::move(out), {a.idx}, [a](Tape& t, const Node& n) {
    const Tensor& x = t.value(a);
    Tensor& ga = t.grad_buf(a.idx);
    for (int i = 0; i < n.grad.size(); ++i) {
      if (x[i] > 0.0) ga[i] += n.grad[i];
    }
  });
}

Var Tape::exp(Var a) {
  Tensor out = value(a);
  for (int i = 0; i < out.size(); ++i) out[i] = std::exp(out[i]);
  check_finite(out, "exp");
  return push(std::move(out), {a.idx}, [a](Tape& t, const Node& n) {
    Tensor& ga = t.grad_buf(a.idx);
    for (int i = 0; i < n.grad.size(); ++i) ga[i] += n.grad[i] * n.value[i];
  });
}

Var Tape::log(Var a) {
  const Tensor& x = value(a);
  Tensor out = x;
  for (int i = 0; i < out.size(); ++i) {
    if (out[i] <= 0.0) throw DomainError("log of non-positive value");
    out[i] = std::log(out[i]);
  }
  check_finite(out, "log");
  return push(std::move(out), {a.idx}, [a](Tape& t, const Node& n) {
    const Tensor& x = t.value(a);
    Tensor& ga = t.grad_buf(a.idx);
    for (int i = 0; i < n.grad.size(); ++i) ga[i] += n.grad[i] / x[i];
  });
}

Var Tape::sqrt(Var a) {
  const Tensor& x = value(a);
  Tensor out = x;
  for (int i = 0; i < out.size(); ++i) {
    if (out[i] < 0.0) throw DomainError("sqrt of negative value");
    out[i] = std::sqrt(out[i]);
  }
  return push(std::move(out), {a.idx}, [a](Tape& t, const Node& n) {
    Tensor& ga = t.grad_buf(a.idx);
    for (int i = 0; i < n.grad.size(); ++i) {
      if (n.value[i] == 0.0) {
        throw NumericalError("sqrt gradient at zero");
      }
      ga[i] += n.grad[i] * 0.5 / n.value[i];
    }
  });
}

// ---------------------------------------------------------------------------
// Reductions and shape ops.

Var Tape::sum(Var a) {
  const Tensor& x = value(a);
  double s = 0.0;
  for (int i = 0; i < x.size(); ++i) s += x[i];
  Tensor out = Tensor::scalar(s);
  check_finite(out, "sum");
  return push(std::move(out), {a.idx}, [a](Tape& t, const Node& n) {
    Tensor& ga = t.grad_buf(a.idx);
    const double g = n.grad[0];
    for (int i = 0; i < ga.size(); ++i) ga[i] += g;
  });
}

Var Tape::mean(Var a) {
  const int n = value(a).size();
  return mul_scalar(sum(a), 1.0 / n);
}

Var Tape::mean_rows(Var a) {
  const Tensor& x = value(a);
  const int R = x.rows(), C = x.cols();
  Tensor out(1, C);
  for (int i = 0; i < R; ++i)
    for (int j = 0; j < C; ++j) out[j] += x.at(i, j);
  for (int j = 0; j < C; ++j) out[j] /= R;
  check_finite(out, "mean_rows");
  return push(std::move(out), {a.idx}, [a, R, C](Tape& t, const Node& n) {
    Tensor& ga = t.grad_buf(a.idx);
    for (int i = 0; i < R; ++i)
      for (int j = 0; j < C; ++j) ga.at(i, j) += n.grad[j] / R;
  });
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeMismatch("concat_rows: no operands");
  const int C = value(parts[0]).cols();
  int R = 0;
  for (Var p : parts) {
    if (value(p).cols() != C) throw ShapeMismatch("concat_rows: column widths differ");
    R += value(p).rows();
  }
  Tensor out(R, C);
  int r0 = 0;
  std::vector<int> parents;
  parents.reserve(parts.size());
  for (Var p : parts) {
    const Tensor& x = value(p);
    for (int i = 0; i < x.rows(); ++i)
      for (int j = 0; j < C; ++j) out.at(r0 + i, j) = x.at(i, j);
    r0 += x.rows();
    parents.push_back(p.idx);
  }
  std::vector<Var> vs = parts;
  return push(std::move(out), std::move(parents), [vs, C](Tape& t, const Node& n) {
    int r0 = 0;
    for (Var p : vs) {
      const int pr = t.value(p).rows();
      if (t.requires_grad(p)) {
        Tensor& gp = t.grad_buf(p.idx);
        for (int i = 0; i < pr; ++i)
          for (int j = 0; j < C; ++j) gp.at(i, j) += n.grad.at(r0 + i, j);
      }
      r0 += pr;
    }
  });
}

Var Tape::row_softmax(Var a) {
  const Tensor& x = value(a);
  const int R = x.rows(), C = x.cols();
  Tensor out(R, C);
  for (int i = 0; i < R; ++i) {
    double m = x.at(i, 0);
    for (int j = 1; j < C; ++j) m = std::max(m, x.at(i, j));
    double s = 0.0;
    for (int j = 0; j < C; ++j) {
      const double e = std::exp(x.at(i, j) - m);
      out.at(i, j) = e;
      s += e;
    }
    for (int j = 0; j < C; ++j) out.at(i, j) /= s;
  }
  check_finite(out, "row_softmax");
  return push(std::move(out), {a.idx}, [a, R, C](Tape& t, const Node& n) {
    Tensor& ga = t.grad_buf(a.idx);
    for (int i = 0; i < R; ++i) {
      double dot = 0.0;
      for (int j = 0; j < C; ++j) dot += n.grad.at(i, j) * n.value.at(i, j);
      for (int j = 0; j < C; ++j)
        ga.at(i, j) += n.value.at(i, j) * (n.grad.at(i, j) - dot);
    }
  });
}

Var Tape::sq_dist_rows(Var x, Var m) {
  const Tensor& xv = value(x);
  const Tensor& mv = value(m);
  if (xv.rows() != 1 || xv.cols() != mv.cols())
    throw ShapeMismatch("sq_dist_rows: x must be 1 x d matching m's width");
  const int N = mv.rows(), D = mv.cols();
  Tensor out(1, N);
  for (int r = 0; r < N; ++r) {
    double s = 0.0;
    for (int j = 0; j < D; ++j) {
      const double d = xv[j] - mv.at(r, j);
      s += d * d;
    }
    out[r] = s;
  }
  check_finite(out, "sq_dist_rows");
  return push(std::move(out), {x.idx, m.idx}, [x, m, N, D](Tape& t, const Node& n) {
    const Tensor& xv = t.value(x);
    const Tensor& mv = t.value(m);
    for (int r = 0; r < N; ++r) {
      const double g2 = 2.0 * n.grad[r];
      if (g2 == 0.0) continue;
      for (int j = 0; j < D; ++j) {
        const double d = xv[j] - mv.at(r, j);
        if (t.requires_grad(x)) t.grad_buf(x.idx)[j] += g2 * d;
        if (t.requires_grad(m)) t.grad_buf(m.idx).at(r, j) -= g2 * d;
      }
    }
  });
}

Var Tape::cosine(Var x, Var y) {
  const Tensor& xv = value(x);
  const Tensor& yv = value(y);
  if (xv.rows() != 1 || yv.rows() != 1 || xv.cols() != yv.cols())
    throw ShapeMismatch("cosine: operands must be equal-width rows");
  const int D = xv.cols();
  double dot = 0.0, nx2 = 0.0, ny2 = 0.0;
  for (int j = 0; j < D; ++j) {
    dot += xv[j] * yv[j];
    nx2 += xv[j] * xv[j];
    ny2 += yv[j] * yv[j];
  }
  if (nx2 == 0.0 || ny2 == 0.0) throw DomainError("cosine of a zero vector");
  const double nx = std::sqrt(nx2), ny = std::sqrt(ny2);
  const double s = dot / (nx * ny);
  Tensor out = Tensor::scalar(s);
  check_finite(out, "cosine");
  return push(std::move(out), {x.idx, y.idx}, [x, y, D, nx, ny, s](Tape& t, const Node& n) {
    const Tensor& xv = t.value(x);
    const Tensor& yv = t.value(y);
    const double g = n.grad[0];
    for (int j = 0; j < D; ++j) {
      if (t.requires_grad(x))
        t.grad_buf(x.idx)[j] += g * (yv[j] / (nx * ny) - s * xv[j] / (nx * nx));
      if (t.requires_grad(y))
        t.grad_buf(y.idx)[j] += g * (xv[j] / (nx * ny) - s * yv[j] / (ny * ny));
    }
  });
}

Var Tape::gather_rows(Var m, std::vector<int> indices) {
  const Tensor& mv = value(m);
  const int C = mv.cols();
  Tensor out(static_cast<int>(indices.size()), C);
  for (size_t i = 0; i < indices.size(); ++i) {
    const int r = indices[i];
    if (r < 0 || r >= mv.rows()) throw ShapeMismatch("gather_rows: index out of range");
    for (int j = 0; j < C; ++j) out.at(static_cast<int>(i), j) = mv.at(r, j);
  }
  return push(std::move(out), {m.idx},
              [m, idx = std::move(indices), C](Tape& t, const Node& n) {
                Tensor& gm = t.grad_buf(m.idx);
                for (size_t i = 0; i < idx.size(); ++i)
                  for (int j = 0; j < C; ++j)
                    gm.at(idx[i], j) += n.grad.at(static_cast<int>(i), j);
              });
}

Var Tape::scatter_rows(Var v, std::vector<int> indices, int out_rows) {
  const Tensor& xv = value(v);
  if (static_cast<int>(indices.size()) != xv.rows())
    throw ShapeMismatch("scatter_rows: one index per input row required");
  const int C = xv.cols();
  Tensor out(out_rows, C);
  for (size_t i = 0; i < indices.size(); ++i) {
    const int r = indices[i];
    if (r < 0 || r >= out_rows) throw ShapeMismatch("scatter_rows: index out of range");
    for (int j = 0; j < C; ++j) out.at(r, j) += xv.at(static_cast<int>(i), j);
  }
  return push(std::move(out), {v.idx},
              [v, idx = std::move(indices), C](Tape& t, const Node& n) {
                Tensor& gv = t.grad_buf(v.idx);
                for (size_t i = 0; i < idx.size(); ++i)
                  for (int j = 0; j < C; ++j)
                    gv.at(static_cast<int>(i), j) += n.grad.at(idx[i], j);
              });
}

Var Tape::add_rowvec(Var m, Var v) {
  const Tensor& mv = value(m);
  const Tensor& vv = value(v);
  if (vv.rows() != 1 || vv.cols() != mv.cols())
    throw ShapeMismatch("add_rowvec: vector width must match matrix");
  Tensor out = mv;
  for (int i = 0; i < mv.rows(); ++i)
    for (int j = 0; j < mv.cols(); ++j) out.at(i, j) += vv[j];
  check_finite(out, "add_rowvec");
  return push(std::move(out), {m.idx, v.idx}, [m, v](Tape& t, const Node& n) {
    const int R = n.grad.rows(), C = n.grad.cols();
    if (t.requires_grad(m)) {
      Tensor& gm = t.grad_buf(m.idx);
      for (int i = 0; i < R * C; ++i) gm[i] += n.grad[i];
    }
    if (t.requires_grad(v)) {
      Tensor& gv = t.grad_buf(v.idx);
      for (int i = 0; i < R; ++i)
        for (int j = 0; j < C; ++j) gv[j] += n.grad.at(i, j);
    }
  });
}

Var Tape::reshape(Var a, int rows, int cols) {
  const Tensor& x = value(a);
  if (rows * cols != x.size()) throw ShapeMismatch("reshape: element count changed");
  Tensor out(rows, cols, x.data());
  return push(std::move(out), {a.idx}, [a](Tape& t, const Node& n) {
    Tensor& ga = t.grad_buf(a.idx);
    for (int i = 0; i < n.grad.size(); ++i) ga[i] += n.grad[i];
  });
}

// ---------------------------------------------------------------------------

void Tape::backward(Var output) {
  const Tensor& out = value(output);
  if (out.rows() != 1 || out.cols() != 1)
    throw NonScalarOutput("backward requires a 1x1 output");
  // Fresh buffers each call: running backward twice must give identical
  // gradients.
  for (Node& n : nodes_) {
    if (n.requires_grad) {
      n.grad = Tensor(n.value.rows(), n.value.cols());
    } else {
      n.grad = Tensor();
    }
  }
  if (!nodes_[output.idx].requires_grad) {
    // Constant output: all leaf gradients are zero; buffers above suffice,
    // but the output still needs a defined grad for introspection.
    nodes_[output.idx].grad = Tensor(1, 1);
    return;
  }
  nodes_[output.idx].grad[0] = 1.0;
  for (int i = output.idx; i >= 0; --i) {
    const Node& n = nodes_[i];
    if (n.requires_grad && n.backprop) n.backprop(*this, n);
  }
}

}  // namespace protomol
