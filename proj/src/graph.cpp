#include "safetext/graph.hpp"

#include <cmath>
#include <cstring>

#include "safetext/errors.hpp"
#include "safetext/kernels/kernels.hpp"

namespace safetext::ad {

namespace ker = safetext::kernels;

// ---- ParameterSet ---------------------------------------------------------

Parameter& ParameterSet::add(std::string name, Tensor init) {
  if (index_.count(name)) throw ConfigError("duplicate parameter: " + name);
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->grad = Tensor::zeros(init.shape());
  p->value = std::move(init);
  index_.emplace(std::move(name), items_.size());
  items_.push_back(std::move(p));
  return *items_.back();
}

Parameter* ParameterSet::find(const std::string& name) {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : items_[it->second].get();
}

const Parameter* ParameterSet::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : items_[it->second].get();
}

void ParameterSet::zero_grad() {
  for (auto& p : items_) p->grad.fill(0.0);
}

std::uint64_t ParameterSet::value_fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& p : items_) {
    mix(p->name.data(), p->name.size());
    mix(p->value.data(), p->value.size() * sizeof(double));
  }
  return h;
}

// ---- Graph ----------------------------------------------------------------

NodeId Graph::input(Tensor v) {
  Node n;
  n.value = std::move(v);
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Graph::input_grad(Tensor v) {
  Node n;
  n.value = std::move(v);
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Graph::param(Parameter& p) {
  auto it = param_nodes_.find(&p);
  if (it != param_nodes_.end()) return it->second;
  Node n;
  n.external = &p.value;
  n.par = &p;
  n.requires_grad = p.trainable;
  nodes_.push_back(std::move(n));
  NodeId id = static_cast<NodeId>(nodes_.size() - 1);
  param_nodes_.emplace(&p, id);
  return id;
}

const Tensor& Graph::val(NodeId id) const {
  const Node& n = nodes_[id];
  return n.external ? *n.external : n.value;
}

const Tensor& Graph::grad(NodeId id) const {
  const Node& n = nodes_[id];
  if (n.grad.empty())
    throw ConfigError("node has no gradient (not reached by backward)");
  return n.grad;
}

Tensor& Graph::grad_buf(NodeId id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = Tensor::zeros(val(id).shape());
  return n.grad;
}

NodeId Graph::make(Tensor value, std::vector<NodeId> parents,
                   std::function<void(Graph&, NodeId)> backprop) {
  Node n;
  n.value = std::move(value);
  for (NodeId p : parents)
    if (nodes_[p].requires_grad) n.requires_grad = true;
  n.parents = std::move(parents);
  if (n.requires_grad) n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

void Graph::backward(NodeId loss) {
  if (ran_backward_) throw ConfigError("backward() may run once per graph");
  ran_backward_ = true;
  if (val(loss).size() != 1)
    throw ConfigError("backward requires a scalar loss node");
  grad_buf(loss)[0] = 1.0;
  for (NodeId id = loss; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.backprop) n.backprop(*this, id);
  }
  // Flush parameter-leaf gradients into their owners.
  for (auto& [p, id] : param_nodes_) {
    Node& n = nodes_[id];
    if (!n.grad.empty() && n.par->trainable)
      ker::axpy(1.0, n.grad.data(), n.par->grad.data(), n.grad.size());
  }
}

// ---- ops ------------------------------------------------------------------

namespace {

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b))
    throw ConfigError(std::string(op) + ": shape mismatch " +
                      shape_str(a.shape()) + " vs " + shape_str(b.shape()));
}

}  // namespace

double sigmoid_scalar(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

NodeId add(Graph& g, NodeId a, NodeId b) {
  const Tensor& va = g.val(a);
  const Tensor& vb = g.val(b);
  check_same_shape(va, vb, "add");
  Tensor out(va.shape());
  ker::vadd(va.data(), vb.data(), out.data(), out.size());
  return g.make(std::move(out), {a, b}, [a, b](Graph& gg, NodeId self) {
    const Tensor& gy = gg.grad(self);
    if (gg.wants_grad(a))
      ker::axpy(1.0, gy.data(), gg.grad_buf(a).data(), gy.size());
    if (gg.wants_grad(b))
      ker::axpy(1.0, gy.data(), gg.grad_buf(b).data(), gy.size());
  });
}

NodeId sub(Graph& g, NodeId a, NodeId b) {
  const Tensor& va = g.val(a);
  const Tensor& vb = g.val(b);
  check_same_shape(va, vb, "sub");
  Tensor out(va.shape());
  ker::vsub(va.data(), vb.data(), out.data(), out.size());
  return g.make(std::move(out), {a, b}, [a, b](Graph& gg, NodeId self) {
    const Tensor& gy = gg.grad(self);
    if (gg.wants_grad(a))
      ker::axpy(1.0, gy.data(), gg.grad_buf(a).data(), gy.size());
    if (gg.wants_grad(b))
      ker::axpy(-1.0, gy.data(), gg.grad_buf(b).data(), gy.size());
  });
}

NodeId mul(Graph& g, NodeId a, NodeId b) {
  const Tensor& va = g.val(a);
  const Tensor& vb = g.val(b);
  check_same_shape(va, vb, "mul");
  Tensor out(va.shape());
  ker::vmul(va.data(), vb.data(), out.data(), out.size());
  return g.make(std::move(out), {a, b}, [a, b](Graph& gg, NodeId self) {
    const Tensor& gy = gg.grad(self);
    const std::size_t n = gy.size();
    if (gg.wants_grad(a)) {
      Tensor& ga = gg.grad_buf(a);
      const double* vb2 = gg.val(b).data();
      const double* gyp = gy.data();
      for (std::size_t i = 0; i < n; ++i) ga[i] += gyp[i] * vb2[i];
    }
    if (gg.wants_grad(b)) {
      Tensor& gb = gg.grad_buf(b);
      const double* va2 = gg.val(a).data();
      const double* gyp = gy.data();
      for (std::size_t i = 0; i < n; ++i) gb[i] += gyp[i] * va2[i];
    }
  });
}

NodeId scale(Graph& g, NodeId a, double c) {
  Tensor out = g.val(a);
  ker::scale(c, out.data(), out.size());
  return g.make(std::move(out), {a}, [a, c](Graph& gg, NodeId self) {
    const Tensor& gy = gg.grad(self);
    if (gg.wants_grad(a))
      ker::axpy(c, gy.data(), gg.grad_buf(a).data(), gy.size());
  });
}

NodeId add_bias(Graph& g, NodeId x, NodeId bias) {
  const Tensor& vx = g.val(x);
  const Tensor& vb = g.val(bias);
  const std::size_t k = vb.size();
  if (k == 0 || vx.size() % k != 0)
    throw ConfigError("add_bias: input size not a multiple of bias length");
  const std::size_t rows = vx.size() / k;
  Tensor out = vx;
  for (std::size_t r = 0; r < rows; ++r)
    ker::axpy(1.0, vb.data(), out.data() + r * k, k);
  return g.make(std::move(out), {x, bias},
                [x, bias, rows, k](Graph& gg, NodeId self) {
                  const Tensor& gy = gg.grad(self);
                  if (gg.wants_grad(x))
                    ker::axpy(1.0, gy.data(), gg.grad_buf(x).data(), gy.size());
                  if (gg.wants_grad(bias)) {
                    Tensor& gb = gg.grad_buf(bias);
                    for (std::size_t r = 0; r < rows; ++r)
                      ker::axpy(1.0, gy.data() + r * k, gb.data(), k);
                  }
                });
}

NodeId matmul(Graph& g, NodeId a, NodeId b) {
  const Tensor& va = g.val(a);
  const Tensor& vb = g.val(b);
  if (va.rank() != 2 || vb.rank() != 2 || va.dim(1) != vb.dim(0))
    throw ConfigError("matmul: incompatible shapes " + shape_str(va.shape()) +
                      " x " + shape_str(vb.shape()));
  const std::size_t m = va.dim(0), k = va.dim(1), n = vb.dim(1);
  Tensor out({m, n});
  ker::gemm(false, false, m, n, k, 1.0, va.data(), k, vb.data(), n, 0.0,
            out.data(), n);
  return g.make(std::move(out), {a, b}, [=](Graph& gg, NodeId self) {
    const Tensor& gy = gg.grad(self);
    if (gg.wants_grad(a)) {
      // dA = dC * B^T
      ker::gemm(false, true, m, k, n, 1.0, gy.data(), n, gg.val(b).data(), n,
                1.0, gg.grad_buf(a).data(), k);
    }
    if (gg.wants_grad(b)) {
      // dB = A^T * dC
      ker::gemm(true, false, k, n, m, 1.0, gg.val(a).data(), k, gy.data(), n,
                1.0, gg.grad_buf(b).data(), n);
    }
  });
}

NodeId sigmoid(Graph& g, NodeId x) {
  const Tensor& vx = g.val(x);
  Tensor out(vx.shape());
  for (std::size_t i = 0; i < vx.size(); ++i) out[i] = sigmoid_scalar(vx[i]);
  return g.make(std::move(out), {x}, [x](Graph& gg, NodeId self) {
    if (!gg.wants_grad(x)) return;
    const Tensor& gy = gg.grad(self);
    const Tensor& y = gg.val(self);
    Tensor& gx = gg.grad_buf(x);
    for (std::size_t i = 0; i < gy.size(); ++i)
      gx[i] += gy[i] * y[i] * (1.0 - y[i]);
  });
}

NodeId tanh_op(Graph& g, NodeId x) {
  const Tensor& vx = g.val(x);
  Tensor out(vx.shape());
  for (std::size_t i = 0; i < vx.size(); ++i) out[i] = std::tanh(vx[i]);
  return g.make(std::move(out), {x}, [x](Graph& gg, NodeId self) {
    if (!gg.wants_grad(x)) return;
    const Tensor& gy = gg.grad(self);
    const Tensor& y = gg.val(self);
    Tensor& gx = gg.grad_buf(x);
    for (std::size_t i = 0; i < gy.size(); ++i)
      gx[i] += gy[i] * (1.0 - y[i] * y[i]);
  });
}

NodeId sum(Graph& g, NodeId x) {
  const Tensor& vx = g.val(x);
  Tensor out = Tensor::scalar(ker::vsum(vx.data(), vx.size()));
  return g.make(std::move(out), {x}, [x](Graph& gg, NodeId self) {
    if (!gg.wants_grad(x)) return;
    const double g0 = gg.grad(self)[0];
    Tensor& gx = gg.grad_buf(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g0;
  });
}

NodeId mean(Graph& g, NodeId x) {
  const Tensor& vx = g.val(x);
  const double inv = 1.0 / static_cast<double>(vx.size());
  Tensor out = Tensor::scalar(ker::vsum(vx.data(), vx.size()) * inv);
  return g.make(std::move(out), {x}, [x, inv](Graph& gg, NodeId self) {
    if (!gg.wants_grad(x)) return;
    const double g0 = gg.grad(self)[0] * inv;
    Tensor& gx = gg.grad_buf(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g0;
  });
}

NodeId select(Graph& g, NodeId x, std::size_t flat_index) {
  const Tensor& vx = g.val(x);
  if (flat_index >= vx.size()) throw ConfigError("select: index out of range");
  Tensor out = Tensor::scalar(vx[flat_index]);
  return g.make(std::move(out), {x}, [x, flat_index](Graph& gg, NodeId self) {
    if (!gg.wants_grad(x)) return;
    gg.grad_buf(x)[flat_index] += gg.grad(self)[0];
  });
}

NodeId softmax_rows(Graph& g, NodeId x) {
  const Tensor& vx = g.val(x);
  if (vx.rank() != 2) throw ConfigError("softmax_rows expects a matrix");
  const std::size_t n = vx.dim(0), k = vx.dim(1);
  Tensor out(vx.shape());
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = vx.data() + i * k;
    double* orow = out.data() + i * k;
    double mx = row[0];
    for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, row[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      orow[j] = std::exp(row[j] - mx);
      z += orow[j];
    }
    const double inv = 1.0 / z;
    for (std::size_t j = 0; j < k; ++j) orow[j] *= inv;
  }
  return g.make(std::move(out), {x}, [x, n, k](Graph& gg, NodeId self) {
    if (!gg.wants_grad(x)) return;
    const Tensor& gy = gg.grad(self);
    const Tensor& y = gg.val(self);
    Tensor& gx = gg.grad_buf(x);
    for (std::size_t i = 0; i < n; ++i) {
      const double* gr = gy.data() + i * k;
      const double* yr = y.data() + i * k;
      double s = ker::dot(gr, yr, k);
      double* gxr = gx.data() + i * k;
      for (std::size_t j = 0; j < k; ++j) gxr[j] += yr[j] * (gr[j] - s);
    }
  });
}

NodeId softmax_xent(Graph& g, NodeId logits, std::vector<std::int32_t> labels) {
  const Tensor& vz = g.val(logits);
  if (vz.rank() != 2) throw ConfigError("softmax_xent expects a logit matrix");
  const std::size_t n = vz.dim(0), k = vz.dim(1);
  if (labels.size() != n)
    throw ConfigError("softmax_xent: label count does not match batch");
  auto probs = std::make_shared<Tensor>(vz.shape());
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = vz.data() + i * k;
    double* prow = probs->data() + i * k;
    double mx = row[0];
    for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, row[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      prow[j] = std::exp(row[j] - mx);
      z += prow[j];
    }
    const double inv = 1.0 / z;
    for (std::size_t j = 0; j < k; ++j) prow[j] *= inv;
    const std::int32_t y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= k)
      throw ConfigError("softmax_xent: label out of range");
    loss -= (row[y] - mx) - std::log(z);
  }
  loss /= static_cast<double>(n);
  auto lab = std::make_shared<std::vector<std::int32_t>>(std::move(labels));
  return g.make(Tensor::scalar(loss), {logits},
                [logits, probs, lab, n, k](Graph& gg, NodeId self) {
                  if (!gg.wants_grad(logits)) return;
                  const double g0 = gg.grad(self)[0] / static_cast<double>(n);
                  Tensor& gz = gg.grad_buf(logits);
                  for (std::size_t i = 0; i < n; ++i) {
                    const double* prow = probs->data() + i * k;
                    double* grow = gz.data() + i * k;
                    for (std::size_t j = 0; j < k; ++j) grow[j] += g0 * prow[j];
                    grow[(*lab)[i]] -= g0;
                  }
                });
}

NodeId sigmoid_bce(Graph& g, NodeId logits, Tensor targets) {
  const Tensor& vz = g.val(logits);
  check_same_shape(vz, targets, "sigmoid_bce");
  const std::size_t n = vz.size();
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = vz[i], y = targets[i];
    loss += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
  }
  loss /= static_cast<double>(n);
  auto tg = std::make_shared<Tensor>(std::move(targets));
  return g.make(Tensor::scalar(loss), {logits},
                [logits, tg, n](Graph& gg, NodeId self) {
                  if (!gg.wants_grad(logits)) return;
                  const double g0 = gg.grad(self)[0] / static_cast<double>(n);
                  const Tensor& vz2 = gg.val(logits);
                  Tensor& gz = gg.grad_buf(logits);
                  for (std::size_t i = 0; i < n; ++i)
                    gz[i] += g0 * (sigmoid_scalar(vz2[i]) - (*tg)[i]);
                });
}

NodeId concat_cols(Graph& g, const std::vector<NodeId>& parts) {
  if (parts.empty()) throw ConfigError("concat_cols: no inputs");
  const std::size_t rows = g.val(parts[0]).dim(0);
  std::size_t total = 0;
  for (NodeId p : parts) {
    const Tensor& v = g.val(p);
    if (v.rank() != 2 || v.dim(0) != rows)
      throw ConfigError("concat_cols: row mismatch");
    total += v.dim(1);
  }
  Tensor out({rows, total});
  std::size_t off = 0;
  for (NodeId p : parts) {
    const Tensor& v = g.val(p);
    const std::size_t k = v.dim(1);
    for (std::size_t r = 0; r < rows; ++r)
      std::memcpy(out.data() + r * total + off, v.data() + r * k,
                  k * sizeof(double));
    off += k;
  }
  auto ps = std::make_shared<std::vector<NodeId>>(parts);
  return g.make(std::move(out), parts,
                [ps, rows, total](Graph& gg, NodeId self) {
                  const Tensor& gy = gg.grad(self);
                  std::size_t off2 = 0;
                  for (NodeId p : *ps) {
                    const std::size_t k = gg.val(p).dim(1);
                    if (gg.wants_grad(p)) {
                      Tensor& gp = gg.grad_buf(p);
                      for (std::size_t r = 0; r < rows; ++r)
                        safetext::kernels::axpy(1.0, gy.data() + r * total + off2,
                                                gp.data() + r * k, k);
                    }
                    off2 += k;
                  }
                });
}

NodeId reshape(Graph& g, NodeId x, std::vector<std::size_t> shape) {
  Tensor out = g.val(x).reshaped(std::move(shape));
  return g.make(std::move(out), {x}, [x](Graph& gg, NodeId self) {
    if (!gg.wants_grad(x)) return;
    const Tensor& gy = gg.grad(self);
    ker::axpy(1.0, gy.data(), gg.grad_buf(x).data(), gy.size());
  });
}

NodeId embedding_lookup(Graph& g, NodeId table,
                        std::shared_ptr<const std::vector<std::int32_t>> ids,
                        std::size_t b, std::size_t t) {
  const Tensor& tab = g.val(table);
  if (tab.rank() != 2) throw ConfigError("embedding_lookup: table must be 2-d");
  if (ids->size() != b * t)
    throw ConfigError("embedding_lookup: id count != b*t");
  const std::size_t v = tab.dim(0), d = tab.dim(1);
  Tensor out({b, t, d});
  for (std::size_t i = 0; i < ids->size(); ++i) {
    const std::int32_t id = (*ids)[i];
    if (id < 0 || static_cast<std::size_t>(id) >= v)
      throw ConfigError("embedding_lookup: id out of range");
    std::memcpy(out.data() + i * d, tab.data() + static_cast<std::size_t>(id) * d,
                d * sizeof(double));
  }
  return g.make(std::move(out), {table}, [table, ids, d](Graph& gg, NodeId self) {
    if (!gg.wants_grad(table)) return;
    const Tensor& gy = gg.grad(self);
    Tensor& gt = gg.grad_buf(table);
    for (std::size_t i = 0; i < ids->size(); ++i)
      ker::axpy(1.0, gy.data() + i * d,
                gt.data() + static_cast<std::size_t>((*ids)[i]) * d, d);
  });
}

}  // namespace safetext::ad
