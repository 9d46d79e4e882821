#include "urbanplan/autodiff.hpp"

#include <cmath>
#include <stdexcept>

namespace urban {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

Graph& common_graph(Var a, Var b) {
  require(a.graph != nullptr && a.graph == b.graph,
          "autodiff: operands from different graphs");
  return *a.graph;
}

}  // namespace

const Tensor& Var::value() const { return graph->value_of(id); }

Var Graph::input(Tensor t) {
  return make(std::move(t), {}, nullptr, false);
}

Var Graph::param(Parameter& p) {
  auto it = bound_.find(&p);
  if (it != bound_.end()) return Var{this, it->second};
  Var v = make(p.value, {}, nullptr, true);
  bound_.emplace(&p, v.id);
  bindings_.emplace_back(&p, v.id);
  return v;
}

Var Graph::make(Tensor value, std::vector<std::uint32_t> parents,
                std::function<void(Graph&, std::uint32_t)> back, bool needs_grad) {
  Node n;
  n.value = std::move(value);
  n.parents = std::move(parents);
  n.back = std::move(back);
  n.needs_grad = needs_grad;
  if (!n.needs_grad) {
    for (std::uint32_t pid : n.parents) {
      if (nodes_[pid].needs_grad) {
        n.needs_grad = true;
        break;
      }
    }
  }
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Tensor& Graph::grad_of(std::uint32_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = Tensor::zeros(n.value.shape());
  return n.grad;
}

void Graph::backward(Var loss) {
  require(loss.graph == this, "backward: loss from another graph");
  if (swept_) throw std::logic_error("backward: graph already swept");
  swept_ = true;
  Node& top = nodes_[loss.id];
  require(top.value.size() == 1, "backward: loss is not scalar");
  grad_of(loss.id).values()[0] = 1.0;
  for (std::uint32_t id = loss.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.needs_grad || n.grad.empty() || !n.back) continue;
    n.back(*this, id);
  }
  for (auto& [p, id] : bindings_) {
    Node& n = nodes_[id];
    if (!n.grad.empty()) axpy(1.0, n.grad, p->grad);
  }
}

namespace {

// Accumulates src into the parent's grad if the parent participates.
void acc_parent(Graph& g, std::uint32_t pid, const Tensor& src) {
  if (!g.needs_grad(pid)) return;
  axpy(1.0, src, g.grad_of(pid));
}

}  // namespace

Var add(Var a, Var b) {
  Graph& g = common_graph(a, b);
  const Tensor& ta = a.value();
  const Tensor& tb = b.value();
  require(ta.same_shape(tb), "add: shape mismatch");
  Tensor out = ta;
  axpy(1.0, tb, out);
  return g.make(std::move(out), {a.id, b.id}, [](Graph& gr, std::uint32_t self) {
    const Tensor& go = gr.grad_of(self);
    acc_parent(gr, gr.parents_of(self)[0], go);
    acc_parent(gr, gr.parents_of(self)[1], go);
  }, false);
}

Var sub(Var a, Var b) {
  Graph& g = common_graph(a, b);
  const Tensor& ta = a.value();
  const Tensor& tb = b.value();
  require(ta.same_shape(tb), "sub: shape mismatch");
  Tensor out = ta;
  axpy(-1.0, tb, out);
  return g.make(std::move(out), {a.id, b.id}, [](Graph& gr, std::uint32_t self) {
    const Tensor& go = gr.grad_of(self);
    acc_parent(gr, gr.parents_of(self)[0], go);
    std::uint32_t pb = gr.parents_of(self)[1];
    if (gr.needs_grad(pb)) axpy(-1.0, go, gr.grad_of(pb));
  }, false);
}

Var mul(Var a, Var b) {
  Graph& g = common_graph(a, b);
  const Tensor& ta = a.value();
  const Tensor& tb = b.value();
  require(ta.same_shape(tb), "mul: shape mismatch");
  Tensor out = ta;
  for (std::size_t i = 0; i < out.size(); ++i) out.at(i) *= tb.at(i);
  return g.make(std::move(out), {a.id, b.id}, [](Graph& gr, std::uint32_t self) {
    const Tensor& go = gr.grad_of(self);
    const std::uint32_t pa = gr.parents_of(self)[0];
    const std::uint32_t pb = gr.parents_of(self)[1];
    const Tensor& va = gr.value_of(pa);
    const Tensor& vb = gr.value_of(pb);
    if (gr.needs_grad(pa)) {
      Tensor& ga = gr.grad_of(pa);
      for (std::size_t i = 0; i < go.size(); ++i) ga.at(i) += go.at(i) * vb.at(i);
    }
    if (gr.needs_grad(pb)) {
      Tensor& gb = gr.grad_of(pb);
      for (std::size_t i = 0; i < go.size(); ++i) gb.at(i) += go.at(i) * va.at(i);
    }
  }, false);
}

Var scale(Var a, double s) {
  Graph& g = *a.graph;
  Tensor out = a.value();
  for (double& v : out.values()) v *= s;
  return g.make(std::move(out), {a.id}, [s](Graph& gr, std::uint32_t self) {
    const std::uint32_t pa = gr.parents_of(self)[0];
    if (gr.needs_grad(pa)) axpy(s, gr.grad_of(self), gr.grad_of(pa));
  }, false);
}

Var add_scalar(Var a, double s) {
  Graph& g = *a.graph;
  Tensor out = a.value();
  for (double& v : out.values()) v += s;
  return g.make(std::move(out), {a.id}, [](Graph& gr, std::uint32_t self) {
    acc_parent(gr, gr.parents_of(self)[0], gr.grad_of(self));
  }, false);
}

Var rsub_scalar(double s, Var a) {
  Graph& g = *a.graph;
  Tensor out = a.value();
  for (double& v : out.values()) v = s - v;
  return g.make(std::move(out), {a.id}, [](Graph& gr, std::uint32_t self) {
    const std::uint32_t pa = gr.parents_of(self)[0];
    if (gr.needs_grad(pa)) axpy(-1.0, gr.grad_of(self), gr.grad_of(pa));
  }, false);
}

Var matmul(Var a, Var b) {
  Graph& g = common_graph(a, b);
  Tensor out = matmul(a.value(), b.value());
  return g.make(std::move(out), {a.id, b.id}, [](Graph& gr, std::uint32_t self) {
    const Tensor& go = gr.grad_of(self);
    const std::uint32_t pa = gr.parents_of(self)[0];
    const std::uint32_t pb = gr.parents_of(self)[1];
    if (gr.needs_grad(pa)) matmul_nt_acc(go, gr.value_of(pb), gr.grad_of(pa));
    if (gr.needs_grad(pb)) matmul_tn_acc(gr.value_of(pa), go, gr.grad_of(pb));
  }, false);
}

Var transpose(Var a) {
  Graph& g = *a.graph;
  const Tensor& ta = a.value();
  require(ta.rank() == 2, "transpose: rank != 2");
  const std::size_t r = ta.rows(), c = ta.cols();
  Tensor out({c, r});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out.at(j, i) = ta.at(i, j);
  return g.make(std::move(out), {a.id}, [](Graph& gr, std::uint32_t self) {
    const std::uint32_t pa = gr.parents_of(self)[0];
    if (!gr.needs_grad(pa)) return;
    const Tensor& go = gr.grad_of(self);
    Tensor& ga = gr.grad_of(pa);
    const std::size_t r = ga.rows(), c = ga.cols();
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) ga.at(i, j) += go.at(j, i);
  }, false);
}

Var relu(Var a) {
  Graph& g = *a.graph;
  Tensor out = a.value();
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  return g.make(std::move(out), {a.id}, [](Graph& gr, std::uint32_t self) {
    const std::uint32_t pa = gr.parents_of(self)[0];
    if (!gr.needs_grad(pa)) return;
    const Tensor& go = gr.grad_of(self);
    const Tensor& va = gr.value_of(pa);
    Tensor& ga = gr.grad_of(pa);
    for (std::size_t i = 0; i < go.size(); ++i) {
      if (va.at(i) > 0.0) ga.at(i) += go.at(i);
    }
  }, false);
}

Var sigmoid(Var a) {
  Graph& g = *a.graph;
  Tensor out = a.value();
  for (double& v : out.values()) {
    v = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                 : std::exp(v) / (1.0 + std::exp(v));
  }
  return g.make(std::move(out), {a.id}, [](Graph& gr, std::uint32_t self) {
    const std::uint32_t pa = gr.parents_of(self)[0];
    if (!gr.needs_grad(pa)) return;
    const Tensor& go = gr.grad_of(self);
    const Tensor& y = gr.value_of(self);
    Tensor& ga = gr.grad_of(pa);
    for (std::size_t i = 0; i < go.size(); ++i) {
      ga.at(i) += go.at(i) * y.at(i) * (1.0 - y.at(i));
    }
  }, false);
}

Var exp_elem(Var a) {
  Graph& g = *a.graph;
  Tensor out = a.value();
  for (double& v : out.values()) v = std::exp(v);
  return g.make(std::move(out), {a.id}, [](Graph& gr, std::uint32_t self) {
    const std::uint32_t pa = gr.parents_of(self)[0];
    if (!gr.needs_grad(pa)) return;
    const Tensor& go = gr.grad_of(self);
    const Tensor& y = gr.value_of(self);
    Tensor& ga = gr.grad_of(pa);
    for (std::size_t i = 0; i < go.size(); ++i) ga.at(i) += go.at(i) * y.at(i);
  }, false);
}

Var log_elem(Var a) {
  Graph& g = *a.graph;
  Tensor out = a.value();
  for (double& v : out.values()) {
    if (!(v > 0.0)) throw std::invalid_argument("log_elem: nonpositive input");
    v = std::log(v);
  }
  return g.make(std::move(out), {a.id}, [](Graph& gr, std::uint32_t self) {
    const std::uint32_t pa = gr.parents_of(self)[0];
    if (!gr.needs_grad(pa)) return;
    const Tensor& go = gr.grad_of(self);
    const Tensor& va = gr.value_of(pa);
    Tensor& ga = gr.grad_of(pa);
    for (std::size_t i = 0; i < go.size(); ++i) ga.at(i) += go.at(i) / va.at(i);
  }, false);
}

Var clamp(Var a, double lo, double hi) {
  Graph& g = *a.graph;
  Tensor out = a.value();
  for (double& v : out.values()) v = v < lo ? lo : (v > hi ? hi : v);
  return g.make(std::move(out), {a.id}, [lo, hi](Graph& gr, std::uint32_t self) {
    const std::uint32_t pa = gr.parents_of(self)[0];
    if (!gr.needs_grad(pa)) return;
    const Tensor& go = gr.grad_of(self);
    const Tensor& va = gr.value_of(pa);
    Tensor& ga = gr.grad_of(pa);
    for (std::size_t i = 0; i < go.size(); ++i) {
      if (va.at(i) >= lo && va.at(i) <= hi) ga.at(i) += go.at(i);
    }
  }, false);
}

Var clamp_passthrough(Var a, double lo, double hi) {
  Graph& g = *a.graph;
  Tensor out = a.value();
  for (double& v : out.values()) v = v < lo ? lo : (v > hi ? hi : v);
  return g.make(std::move(out), {a.id}, [](Graph& gr, std::uint32_t self) {
    acc_parent(gr, gr.parents_of(self)[0], gr.grad_of(self));
  }, false);
}

Var softmax_rows(Var a) {
  Graph& g = *a.graph;
  Tensor out = softmax_rows(a.value());
  return g.make(std::move(out), {a.id}, [](Graph& gr, std::uint32_t self) {
    const std::uint32_t pa = gr.parents_of(self)[0];
    if (!gr.needs_grad(pa)) return;
    const Tensor& go = gr.grad_of(self);
    const Tensor& y = gr.value_of(self);
    Tensor& ga = gr.grad_of(pa);
    const std::size_t r = y.rows(), d = y.cols();
    for (std::size_t i = 0; i < r; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < d; ++j) dot += go.at(i, j) * y.at(i, j);
      for (std::size_t j = 0; j < d; ++j) {
        ga.at(i, j) += y.at(i, j) * (go.at(i, j) - dot);
      }
    }
  }, false);
}

Var sum_all(Var a) {
  Graph& g = *a.graph;
  double total = 0.0;
  for (double v : a.value().values()) total += v;
  return g.make(Tensor({1, 1}, {total}), {a.id}, [](Graph& gr, std::uint32_t self) {
    const std::uint32_t pa = gr.parents_of(self)[0];
    if (!gr.needs_grad(pa)) return;
    const double go = gr.grad_of(self).at(0);
    Tensor& ga = gr.grad_of(pa);
    for (double& v : ga.values()) v += go;
  }, false);
}

Var mean_rows(Var a) {
  Graph& g = *a.graph;
  const Tensor& ta = a.value();
  require(ta.rank() == 2, "mean_rows: rank != 2");
  const std::size_t r = ta.rows(), c = ta.cols();
  Tensor out({1, c});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out.at(0, j) += ta.at(i, j);
  for (std::size_t j = 0; j < c; ++j) out.at(0, j) /= static_cast<double>(r);
  return g.make(std::move(out), {a.id}, [](Graph& gr, std::uint32_t self) {
    const std::uint32_t pa = gr.parents_of(self)[0];
    if (!gr.needs_grad(pa)) return;
    const Tensor& go = gr.grad_of(self);
    Tensor& ga = gr.grad_of(pa);
    const std::size_t r = ga.rows(), c = ga.cols();
    const double inv = 1.0 / static_cast<double>(r);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) ga.at(i, j) += go.at(0, j) * inv;
  }, false);
}

Var add_rowvec(Var a, Var row) {
  Graph& g = common_graph(a, row);
  const Tensor& ta = a.value();
  const Tensor& tr = row.value();
  require(ta.rank() == 2 && tr.rank() == 2 && tr.rows() == 1 &&
              tr.cols() == ta.cols(),
          "add_rowvec: shape mismatch");
  Tensor out = ta;
  const std::size_t r = ta.rows(), c = ta.cols();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out.at(i, j) += tr.at(0, j);
  return g.make(std::move(out), {a.id, row.id}, [](Graph& gr, std::uint32_t self) {
    const Tensor& go = gr.grad_of(self);
    const std::uint32_t pa = gr.parents_of(self)[0];
    const std::uint32_t pr = gr.parents_of(self)[1];
    acc_parent(gr, pa, go);
    if (gr.needs_grad(pr)) {
      Tensor& gb = gr.grad_of(pr);
      const std::size_t r = go.rows(), c = go.cols();
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) gb.at(0, j) += go.at(i, j);
    }
  }, false);
}

Var concat_cols(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_cols: empty");
  Graph& g = *parts[0].graph;
  const std::size_t r = parts[0].value().rows();
  std::size_t total = 0;
  std::vector<std::uint32_t> parents;
  for (const Var& p : parts) {
    require(p.graph == &g, "concat_cols: mixed graphs");
    require(p.value().rank() == 2 && p.value().rows() == r,
            "concat_cols: row mismatch");
    total += p.value().cols();
    parents.push_back(p.id);
  }
  Tensor out({r, total});
  std::size_t off = 0;
  for (const Var& p : parts) {
    const Tensor& t = p.value();
    const std::size_t c = t.cols();
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) out.at(i, off + j) = t.at(i, j);
    off += c;
  }
  return g.make(std::move(out), std::move(parents),
                [](Graph& gr, std::uint32_t self) {
    const Tensor& go = gr.grad_of(self);
    const std::size_t r = go.rows();
    std::size_t off = 0;
    for (std::uint32_t pid : gr.parents_of(self)) {
      const std::size_t c = gr.value_of(pid).cols();
      if (gr.needs_grad(pid)) {
        Tensor& gp = gr.grad_of(pid);
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < c; ++j) gp.at(i, j) += go.at(i, off + j);
      }
      off += c;
    }
  }, false);
}

Var concat_rows(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_rows: empty");
  Graph& g = *parts[0].graph;
  const std::size_t c = parts[0].value().cols();
  std::size_t total = 0;
  std::vector<std::uint32_t> parents;
  for (const Var& p : parts) {
    require(p.graph == &g, "concat_rows: mixed graphs");
    require(p.value().rank() == 2 && p.value().cols() == c,
            "concat_rows: column mismatch");
    total += p.value().rows();
    parents.push_back(p.id);
  }
  Tensor out({total, c});
  std::size_t off = 0;
  for (const Var& p : parts) {
    const Tensor& t = p.value();
    std::copy(t.values().begin(), t.values().end(), out.values().begin() + off);
    off += t.size();
  }
  return g.make(std::move(out), std::move(parents),
                [](Graph& gr, std::uint32_t self) {
    const Tensor& go = gr.grad_of(self);
    std::size_t off = 0;
    for (std::uint32_t pid : gr.parents_of(self)) {
      const std::size_t n = gr.value_of(pid).size();
      if (gr.needs_grad(pid)) {
        Tensor& gp = gr.grad_of(pid);
        for (std::size_t i = 0; i < n; ++i) gp.at(i) += go.at(off + i);
      }
      off += n;
    }
  }, false);
}

Var slice_cols(Var a, std::size_t c0, std::size_t c1) {
  Graph& g = *a.graph;
  const Tensor& ta = a.value();
  require(ta.rank() == 2 && c0 < c1 && c1 <= ta.cols(), "slice_cols: bad range");
  const std::size_t r = ta.rows(), w = c1 - c0;
  Tensor out({r, w});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < w; ++j) out.at(i, j) = ta.at(i, c0 + j);
  return g.make(std::move(out), {a.id}, [c0](Graph& gr, std::uint32_t self) {
    const std::uint32_t pa = gr.parents_of(self)[0];
    if (!gr.needs_grad(pa)) return;
    const Tensor& go = gr.grad_of(self);
    Tensor& ga = gr.grad_of(pa);
    const std::size_t r = go.rows(), w = go.cols();
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < w; ++j) ga.at(i, c0 + j) += go.at(i, j);
  }, false);
}

Var reshape(Var a, std::vector<std::size_t> shape) {
  Graph& g = *a.graph;
  Tensor out = a.value().reshaped(shape);
  return g.make(std::move(out), {a.id}, [](Graph& gr, std::uint32_t self) {
    const std::uint32_t pa = gr.parents_of(self)[0];
    if (!gr.needs_grad(pa)) return;
    const Tensor& go = gr.grad_of(self);
    Tensor& ga = gr.grad_of(pa);
    for (std::size_t i = 0; i < go.size(); ++i) ga.at(i) += go.at(i);
  }, false);
}

Var tile_rows(Var a, std::size_t times) {
  Graph& g = *a.graph;
  const Tensor& ta = a.value();
  require(ta.rank() == 2 && times >= 1, "tile_rows: bad arguments");
  const std::size_t r = ta.rows(), c = ta.cols();
  Tensor out({r * times, c});
  for (std::size_t t = 0; t < times; ++t) {
    std::copy(ta.values().begin(), ta.values().end(),
              out.values().begin() + t * ta.size());
  }
  return g.make(std::move(out), {a.id}, [times](Graph& gr, std::uint32_t self) {
    const std::uint32_t pa = gr.parents_of(self)[0];
    if (!gr.needs_grad(pa)) return;
    const Tensor& go = gr.grad_of(self);
    Tensor& ga = gr.grad_of(pa);
    const std::size_t n = ga.size();
    for (std::size_t t = 0; t < times; ++t)
      for (std::size_t i = 0; i < n; ++i) ga.at(i) += go.at(t * n + i);
  }, false);
}

Var bce_logits_sum(Var scores, const Tensor& targets) {
  Graph& g = *scores.graph;
  const Tensor& s = scores.value();
  require(s.same_shape(targets), "bce_logits_sum: shape mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double x = s.at(i), t = targets.at(i);
    total += std::max(x, 0.0) - x * t + std::log1p(std::exp(-std::abs(x)));
  }
  Tensor tcopy = targets;
  return g.make(Tensor({1, 1}, {total}), {scores.id},
                [t = std::move(tcopy)](Graph& gr, std::uint32_t self) {
    const std::uint32_t pa = gr.parents_of(self)[0];
    if (!gr.needs_grad(pa)) return;
    const double go = gr.grad_of(self).at(0);
    const Tensor& x = gr.value_of(pa);
    Tensor& ga = gr.grad_of(pa);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double v = x.at(i);
      const double sig = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                                  : std::exp(v) / (1.0 + std::exp(v));
      ga.at(i) += go * (sig - t.at(i));
    }
  }, false);
}

}  // namespace urban
