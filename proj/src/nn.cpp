#include "safetext/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <memory>

#include "safetext/errors.hpp"
#include "safetext/kernels/kernels.hpp"

namespace safetext::nn {

namespace ker = safetext::kernels;
using ad::Graph;
using ad::NodeId;

// ---- convolution ----------------------------------------------------------

namespace {

struct ConvDims {
  std::size_t b, t, d, t_padded, max_width, total_filters;
};

ConvDims conv_dims(const Graph& g, NodeId x,
                   const std::vector<ConvFilterParams>& banks) {
  const Tensor& vx = g.val(x);
  if (vx.rank() != 3) throw ConfigError("conv: input must be {B,T,D}");
  ConvDims dm{vx.dim(0), vx.dim(1), vx.dim(2), 0, 0, 0};
  if (dm.t == 0) throw DataError("conv: empty sequence");
  if (banks.empty()) throw ConfigError("conv: no filter banks");
  for (const auto& bk : banks) {
    const Tensor& w = g.val(bk.weight);
    const Tensor& bias = g.val(bk.bias);
    if (bk.width == 0 || w.rank() != 2 || w.dim(0) != bk.width * dm.d ||
        bias.rank() != 1 || bias.dim(0) != w.dim(1))
      throw ConfigError("conv: filter bank shape mismatch for width " +
                        std::to_string(bk.width));
    dm.max_width = std::max(dm.max_width, bk.width);
    dm.total_filters += w.dim(1);
  }
  dm.t_padded = std::max(dm.t, dm.max_width);
  return dm;
}

// scores[b, 0:pos, :] += x[b, o:o+pos, :] * W_o for every tap o. Rows whose
// window taps run past T read implicit zeros and are simply skipped.
void conv_accumulate_scores(const Tensor& vx, const Tensor& w, std::size_t b,
                            std::size_t t, std::size_t d, std::size_t width,
                            std::size_t positions, double* scores,
                            std::size_t score_stride) {
  const std::size_t f = w.dim(1);
  for (std::size_t o = 0; o < width; ++o) {
    if (t <= o) break;
    const std::size_t rows = std::min(positions, t - o);
    ker::gemm(false, false, rows, f, d, 1.0, vx.data() + (b * t + o) * d, d,
              w.data() + o * d * f, f, 1.0, scores, score_stride);
  }
}

}  // namespace

NodeId conv_max_pool(Graph& g, NodeId x,
                     const std::vector<ConvFilterParams>& banks) {
  const ConvDims dm = conv_dims(g, x, banks);
  Tensor out({dm.b, dm.total_filters});
  // argmax position per (example, output filter), for the backward pass
  auto argmax = std::make_shared<std::vector<std::int32_t>>(
      dm.b * dm.total_filters, 0);

  std::size_t off = 0;
  for (const auto& bk : banks) {
    const Tensor& w = g.val(bk.weight);
    const Tensor& bias = g.val(bk.bias);
    const std::size_t f = w.dim(1);
    const std::size_t positions = dm.t_padded - bk.width + 1;
    Tensor scores({positions, f});
    for (std::size_t b = 0; b < dm.b; ++b) {
      for (std::size_t p = 0; p < positions; ++p)
        std::memcpy(scores.data() + p * f, bias.data(), f * sizeof(double));
      conv_accumulate_scores(g.val(x), w, b, dm.t, dm.d, bk.width, positions,
                             scores.data(), f);
      for (std::size_t j = 0; j < f; ++j) {
        double best = scores.at(0, j);
        std::int32_t best_p = 0;
        for (std::size_t p = 1; p < positions; ++p) {
          if (scores.at(p, j) > best) {
            best = scores.at(p, j);
            best_p = static_cast<std::int32_t>(p);
          }
        }
        out.at(b, off + j) = best;
        (*argmax)[b * dm.total_filters + off + j] = best_p;
      }
    }
    off += f;
  }

  std::vector<NodeId> parents{x};
  for (const auto& bk : banks) {
    parents.push_back(bk.weight);
    parents.push_back(bk.bias);
  }
  auto bks = std::make_shared<std::vector<ConvFilterParams>>(banks);
  return g.make(
      std::move(out), std::move(parents),
      [x, bks, argmax, dm](Graph& gg, NodeId self) {
        const Tensor& gy = gg.grad(self);
        const Tensor& vx = gg.val(x);
        std::size_t off = 0;
        for (const auto& bk : *bks) {
          const Tensor& w = gg.val(bk.weight);
          const std::size_t f = w.dim(1);
          const bool want_w = gg.wants_grad(bk.weight);
          const bool want_b = gg.wants_grad(bk.bias);
          const bool want_x = gg.wants_grad(x);
          Tensor* gw = want_w ? &gg.grad_buf(bk.weight) : nullptr;
          Tensor* gb = want_b ? &gg.grad_buf(bk.bias) : nullptr;
          Tensor* gx = want_x ? &gg.grad_buf(x) : nullptr;
          for (std::size_t b = 0; b < dm.b; ++b) {
            for (std::size_t j = 0; j < f; ++j) {
              const double gval = gy.at(b, off + j);
              if (gval == 0.0) continue;
              if (gb) (*gb)[j] += gval;
              const auto p = static_cast<std::size_t>(
                  (*argmax)[b * dm.total_filters + off + j]);
              for (std::size_t o = 0; o < bk.width; ++o) {
                const std::size_t tpos = p + o;
                if (tpos >= dm.t) break;  // window tap in the zero padding
                const double* xrow = vx.data() + (b * dm.t + tpos) * dm.d;
                if (gw) {
                  double* wcol = gw->data() + o * dm.d * f + j;
                  for (std::size_t dd = 0; dd < dm.d; ++dd)
                    wcol[dd * f] += gval * xrow[dd];
                }
                if (gx) {
                  const double* wcol = w.data() + o * dm.d * f + j;
                  double* gxrow = gx->data() + (b * dm.t + tpos) * dm.d;
                  for (std::size_t dd = 0; dd < dm.d; ++dd)
                    gxrow[dd] += gval * wcol[dd * f];
                }
              }
            }
          }
          off += f;
        }
      });
}

NodeId conv_seq(Graph& g, NodeId x, const std::vector<ConvFilterParams>& banks) {
  const ConvDims dm = conv_dims(g, x, banks);
  const std::size_t tp = dm.t_padded - dm.max_width + 1;  // common positions
  Tensor out({dm.b, tp, dm.total_filters});

  std::size_t off = 0;
  for (const auto& bk : banks) {
    const Tensor& w = g.val(bk.weight);
    const Tensor& bias = g.val(bk.bias);
    const std::size_t f = w.dim(1);
    for (std::size_t b = 0; b < dm.b; ++b) {
      double* slab = out.data() + (b * tp) * dm.total_filters + off;
      for (std::size_t p = 0; p < tp; ++p)
        std::memcpy(slab + p * dm.total_filters, bias.data(), f * sizeof(double));
      conv_accumulate_scores(g.val(x), w, b, dm.t, dm.d, bk.width, tp, slab,
                             dm.total_filters);
    }
    off += f;
  }

  std::vector<NodeId> parents{x};
  for (const auto& bk : banks) {
    parents.push_back(bk.weight);
    parents.push_back(bk.bias);
  }
  auto bks = std::make_shared<std::vector<ConvFilterParams>>(banks);
  return g.make(
      std::move(out), std::move(parents),
      [x, bks, dm, tp](Graph& gg, NodeId self) {
        const Tensor& gy = gg.grad(self);
        const Tensor& vx = gg.val(x);
        std::size_t off = 0;
        for (const auto& bk : *bks) {
          const Tensor& w = gg.val(bk.weight);
          const std::size_t f = w.dim(1);
          for (std::size_t b = 0; b < dm.b; ++b) {
            const double* gslab = gy.data() + (b * tp) * dm.total_filters + off;
            for (std::size_t o = 0; o < bk.width; ++o) {
              if (dm.t <= o) break;
              const std::size_t rows = std::min(tp, dm.t - o);
              if (gg.wants_grad(x)) {
                // dx[b, o:o+rows, :] += dy_slab * W_o^T
                ker::gemm(false, true, rows, dm.d, f, 1.0, gslab,
                          dm.total_filters, w.data() + o * dm.d * f, f, 1.0,
                          gg.grad_buf(x).data() + (b * dm.t + o) * dm.d, dm.d);
              }
              if (gg.wants_grad(bk.weight)) {
                // dW_o += x[b, o:o+rows, :]^T * dy_slab
                ker::gemm(true, false, dm.d, f, rows, 1.0,
                          vx.data() + (b * dm.t + o) * dm.d, dm.d, gslab,
                          dm.total_filters, 1.0,
                          gg.grad_buf(bk.weight).data() + o * dm.d * f, f);
              }
            }
            if (gg.wants_grad(bk.bias)) {
              Tensor& gb = gg.grad_buf(bk.bias);
              for (std::size_t p = 0; p < tp; ++p)
                ker::axpy(1.0, gslab + p * dm.total_filters, gb.data(), f);
            }
          }
          off += f;
        }
      });
}

// ---- LSTM -----------------------------------------------------------------

namespace {

struct LstmStash {
  // per direction: gates {T,B,4H} post-activation and cell {T,B,H} post-step
  std::vector<std::vector<double>> gates;
  std::vector<std::vector<double>> cell;
  std::shared_ptr<const std::vector<std::int32_t>> lengths;
  std::size_t b, t, din, h;
  bool bidirectional;
};

// One (possibly bidirectional) recurrent layer as a single tape node.
NodeId lstm_layer(Graph& g, NodeId x,
                  std::shared_ptr<const std::vector<std::int32_t>> lengths,
                  const LstmLayerWeights& wts, bool bidirectional) {
  const Tensor& vx = g.val(x);
  if (vx.rank() != 3) throw ConfigError("lstm: input must be {B,T,D}");
  const std::size_t b = vx.dim(0), t = vx.dim(1), din = vx.dim(2);
  if (t == 0) throw DataError("lstm: empty sequence");
  if (lengths->size() != b) throw ConfigError("lstm: lengths size != batch");

  const Tensor& u0 = g.val(wts.fwd.w_rec);
  if (u0.rank() != 2 || u0.dim(1) != 4 * u0.dim(0))
    throw ConfigError("lstm: recurrent weights must be {H,4H}");
  const std::size_t h = u0.dim(0);
  const std::size_t dirs = bidirectional ? 2 : 1;

  auto check_dir = [&](const LstmDirWeights& dw) {
    const Tensor& w = g.val(dw.w_in);
    const Tensor& u = g.val(dw.w_rec);
    const Tensor& bias = g.val(dw.bias);
    if (w.rank() != 2 || w.dim(0) != din || w.dim(1) != 4 * h ||
        u.dim(0) != h || u.dim(1) != 4 * h || bias.size() != 4 * h)
      throw ConfigError("lstm: gate weight shapes do not match input dim " +
                        std::to_string(din) + ", hidden " + std::to_string(h));
  };
  check_dir(wts.fwd);
  if (bidirectional) check_dir(wts.bwd);

  auto stash = std::make_shared<LstmStash>();
  stash->lengths = lengths;
  stash->b = b;
  stash->t = t;
  stash->din = din;
  stash->h = h;
  stash->bidirectional = bidirectional;

  Tensor out({b, t, h * dirs});
  std::vector<double> hbuf(b * h), cbuf(b * h), gates(b * 4 * h);

  for (std::size_t dir = 0; dir < dirs; ++dir) {
    const LstmDirWeights& dw = dir == 0 ? wts.fwd : wts.bwd;
    const Tensor& w = g.val(dw.w_in);
    const Tensor& u = g.val(dw.w_rec);
    const Tensor& bias = g.val(dw.bias);

    // Whole-sequence input projection in one gemm.
    std::vector<double> xproj(b * t * 4 * h);
    ker::gemm(false, false, b * t, 4 * h, din, 1.0, vx.data(), din, w.data(),
              4 * h, 0.0, xproj.data(), 4 * h);
    for (std::size_t r = 0; r < b * t; ++r)
      ker::axpy(1.0, bias.data(), xproj.data() + r * 4 * h, 4 * h);

    stash->gates.emplace_back(t * b * 4 * h);
    stash->cell.emplace_back(t * b * h);
    auto& gstore = stash->gates.back();
    auto& cstore = stash->cell.back();

    std::fill(hbuf.begin(), hbuf.end(), 0.0);
    std::fill(cbuf.begin(), cbuf.end(), 0.0);

    for (std::size_t step = 0; step < t; ++step) {
      const std::size_t tt = dir == 0 ? step : t - 1 - step;
      // gates = xproj[t] + h_prev * U
      for (std::size_t bb = 0; bb < b; ++bb)
        std::memcpy(gates.data() + bb * 4 * h,
                    xproj.data() + (bb * t + tt) * 4 * h,
                    4 * h * sizeof(double));
      ker::gemm(false, false, b, 4 * h, h, 1.0, hbuf.data(), h, u.data(), 4 * h,
                1.0, gates.data(), 4 * h);
      for (std::size_t bb = 0; bb < b; ++bb) {
        double* hb = hbuf.data() + bb * h;
        double* cb = cbuf.data() + bb * h;
        if (tt < static_cast<std::size_t>((*lengths)[bb])) {
          double* ga = gates.data() + bb * 4 * h;
          for (std::size_t j = 0; j < h; ++j) {
            const double gi = ad::sigmoid_scalar(ga[j]);
            const double gf = ad::sigmoid_scalar(ga[h + j]);
            const double gc = std::tanh(ga[2 * h + j]);
            const double go = ad::sigmoid_scalar(ga[3 * h + j]);
            ga[j] = gi;
            ga[h + j] = gf;
            ga[2 * h + j] = gc;
            ga[3 * h + j] = go;
            cb[j] = gf * cb[j] + gi * gc;
            hb[j] = go * std::tanh(cb[j]);
          }
        }
        // else: masked step, h and c carry through unchanged
        std::memcpy(gstore.data() + (tt * b + bb) * 4 * h,
                    gates.data() + bb * 4 * h, 4 * h * sizeof(double));
        std::memcpy(cstore.data() + (tt * b + bb) * h, cb, h * sizeof(double));
        double* orow = out.data() + (bb * t + tt) * h * dirs + dir * h;
        std::memcpy(orow, hb, h * sizeof(double));
      }
    }
  }

  std::vector<NodeId> parents{x, wts.fwd.w_in, wts.fwd.w_rec, wts.fwd.bias};
  if (bidirectional) {
    parents.push_back(wts.bwd.w_in);
    parents.push_back(wts.bwd.w_rec);
    parents.push_back(wts.bwd.bias);
  }
  LstmLayerWeights wcopy = wts;
  return g.make(
      std::move(out), std::move(parents),
      [x, wcopy, stash](Graph& gg, NodeId self) {
        const Tensor& gy = gg.grad(self);
        const Tensor& vx = gg.val(x);
        const std::size_t b = stash->b, t = stash->t, din = stash->din,
                          h = stash->h;
        const std::size_t dirs = stash->bidirectional ? 2 : 1;
        const auto& lens = *stash->lengths;
        const Tensor& seq = gg.val(self);

        std::vector<double> dxproj(b * t * 4 * h);
        std::vector<double> dh(b * h), dc(b * h), da(b * 4 * h);
        std::vector<double> hprev(b * h), dh_rec(b * h);

        for (std::size_t dir = 0; dir < dirs; ++dir) {
          const LstmDirWeights& dw = dir == 0 ? wcopy.fwd : wcopy.bwd;
          const Tensor& u = gg.val(dw.w_rec);
          const Tensor& w = gg.val(dw.w_in);
          const auto& gstore = stash->gates[dir];
          const auto& cstore = stash->cell[dir];
          std::fill(dxproj.begin(), dxproj.end(), 0.0);
          std::fill(dh.begin(), dh.end(), 0.0);
          std::fill(dc.begin(), dc.end(), 0.0);

          for (std::size_t rstep = 0; rstep < t; ++rstep) {
            // reverse of the forward iteration order
            const std::size_t step = t - 1 - rstep;
            const std::size_t tt = dir == 0 ? step : t - 1 - step;
            const bool first_iter_step = step == 0;
            const std::size_t tprev = dir == 0 ? tt - 1 : tt + 1;

            // h_prev rows for dU accumulation (zeros at the first step)
            if (first_iter_step) {
              std::fill(hprev.begin(), hprev.end(), 0.0);
            } else {
              for (std::size_t bb = 0; bb < b; ++bb)
                std::memcpy(hprev.data() + bb * h,
                            seq.data() + (bb * t + tprev) * h * dirs + dir * h,
                            h * sizeof(double));
            }

            std::fill(da.begin(), da.end(), 0.0);
            for (std::size_t bb = 0; bb < b; ++bb) {
              double* dhb = dh.data() + bb * h;
              double* dcb = dc.data() + bb * h;
              // incoming gradient from this position's emitted hidden state
              const double* gseq =
                  gy.data() + (bb * t + tt) * h * dirs + dir * h;
              for (std::size_t j = 0; j < h; ++j) dhb[j] += gseq[j];
              if (tt >= static_cast<std::size_t>(lens[bb]))
                continue;  // carried step: dh/dc pass straight through
              const double* ga = gstore.data() + (tt * b + bb) * 4 * h;
              const double* cb = cstore.data() + (tt * b + bb) * h;
              const double* cprev =
                  first_iter_step ? nullptr
                                  : cstore.data() + (tprev * b + bb) * h;
              double* dab = da.data() + bb * 4 * h;
              for (std::size_t j = 0; j < h; ++j) {
                const double gi = ga[j], gf = ga[h + j], gc = ga[2 * h + j],
                             go = ga[3 * h + j];
                const double tc = std::tanh(cb[j]);
                const double dout = dhb[j] * tc;
                double dcell = dcb[j] + dhb[j] * go * (1.0 - tc * tc);
                const double cp = cprev ? cprev[j] : 0.0;
                const double din_g = dcell * gc;
                const double df_g = dcell * cp;
                const double dg_g = dcell * gi;
                dab[j] = din_g * gi * (1.0 - gi);
                dab[h + j] = df_g * gf * (1.0 - gf);
                dab[2 * h + j] = dg_g * (1.0 - gc * gc);
                dab[3 * h + j] = dout * go * (1.0 - go);
                dcb[j] = dcell * gf;
                dhb[j] = 0.0;  // replaced below by da * U^T
              }
            }
            // recurrent gradient: dh_prev = da * U^T (masked rows have da=0,
            // their dh survives untouched from above)
            ker::gemm(false, true, b, h, 4 * h, 1.0, da.data(), 4 * h, u.data(),
                      4 * h, 0.0, dh_rec.data(), h);
            for (std::size_t bb = 0; bb < b; ++bb) {
              if (tt < static_cast<std::size_t>(lens[bb]))
                std::memcpy(dh.data() + bb * h, dh_rec.data() + bb * h,
                            h * sizeof(double));
            }
            if (gg.wants_grad(dw.w_rec)) {
              ker::gemm(true, false, h, 4 * h, b, 1.0, hprev.data(), h,
                        da.data(), 4 * h, 1.0, gg.grad_buf(dw.w_rec).data(),
                        4 * h);
            }
            for (std::size_t bb = 0; bb < b; ++bb)
              ker::axpy(1.0, da.data() + bb * 4 * h,
                        dxproj.data() + (bb * t + tt) * 4 * h, 4 * h);
          }

          if (gg.wants_grad(dw.w_in)) {
            ker::gemm(true, false, din, 4 * h, b * t, 1.0, vx.data(), din,
                      dxproj.data(), 4 * h, 1.0, gg.grad_buf(dw.w_in).data(),
                      4 * h);
          }
          if (gg.wants_grad(dw.bias)) {
            Tensor& gb = gg.grad_buf(dw.bias);
            for (std::size_t r = 0; r < b * t; ++r)
              ker::axpy(1.0, dxproj.data() + r * 4 * h, gb.data(), 4 * h);
          }
          if (gg.wants_grad(x)) {
            ker::gemm(false, true, b * t, din, 4 * h, 1.0, dxproj.data(), 4 * h,
                      w.data(), 4 * h, 1.0, gg.grad_buf(x).data(), din);
          }
        }
      });
}

// final = [fwd at t=T-1 | bwd at t=0]; both are the last valid step because
// masked steps carry state through.
NodeId lstm_final_view(Graph& g, NodeId seq, std::size_t h, std::size_t dirs) {
  const Tensor& vs = g.val(seq);
  const std::size_t b = vs.dim(0), t = vs.dim(1);
  Tensor out({b, h * dirs});
  for (std::size_t bb = 0; bb < b; ++bb) {
    std::memcpy(out.data() + bb * h * dirs,
                vs.data() + (bb * t + (t - 1)) * h * dirs, h * sizeof(double));
    if (dirs == 2)
      std::memcpy(out.data() + bb * h * dirs + h,
                  vs.data() + (bb * t) * h * dirs + h, h * sizeof(double));
  }
  return g.make(std::move(out), {seq}, [seq, h, dirs, b, t](Graph& gg, NodeId self) {
    if (!gg.wants_grad(seq)) return;
    const Tensor& gy = gg.grad(self);
    Tensor& gs = gg.grad_buf(seq);
    for (std::size_t bb = 0; bb < b; ++bb) {
      ker::axpy(1.0, gy.data() + bb * h * dirs,
                gs.data() + (bb * t + (t - 1)) * h * dirs, h);
      if (dirs == 2)
        ker::axpy(1.0, gy.data() + bb * h * dirs + h,
                  gs.data() + (bb * t) * h * dirs + h, h);
    }
  });
}

}  // namespace

LstmOut lstm(Graph& g, NodeId x, const std::vector<std::int32_t>& lengths,
             const std::vector<LstmLayerWeights>& layers, bool bidirectional) {
  if (layers.empty()) throw ConfigError("lstm: at least one layer required");
  auto lens = std::make_shared<const std::vector<std::int32_t>>(lengths);
  NodeId cur = x;
  for (const auto& layer : layers)
    cur = lstm_layer(g, cur, lens, layer, bidirectional);
  const std::size_t dirs = bidirectional ? 2 : 1;
  const std::size_t h = g.val(cur).dim(2) / dirs;
  return {cur, lstm_final_view(g, cur, h, dirs)};
}

// ---- dropout --------------------------------------------------------------

NodeId dropout(Graph& g, NodeId x, double keep_prob, bool training, Rng& rng) {
  if (keep_prob <= 0.0 || keep_prob > 1.0)
    throw ConfigError("dropout: keep probability must be in (0, 1]");
  const Tensor& vx = g.val(x);
  if (!training || keep_prob == 1.0) {
    Tensor out = vx;
    return g.make(std::move(out), {x}, [x](Graph& gg, NodeId self) {
      if (!gg.wants_grad(x)) return;
      const Tensor& gy = gg.grad(self);
      ker::axpy(1.0, gy.data(), gg.grad_buf(x).data(), gy.size());
    });
  }
  const double inv = 1.0 / keep_prob;
  auto mask = std::make_shared<std::vector<double>>(vx.size());
  Tensor out(vx.shape());
  for (std::size_t i = 0; i < vx.size(); ++i) {
    (*mask)[i] = rng.bernoulli(keep_prob) ? inv : 0.0;
    out[i] = vx[i] * (*mask)[i];
  }
  return g.make(std::move(out), {x}, [x, mask](Graph& gg, NodeId self) {
    if (!gg.wants_grad(x)) return;
    const Tensor& gy = gg.grad(self);
    Tensor& gx = gg.grad_buf(x);
    for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i] * (*mask)[i];
  });
}

NodeId dropout_seeded(Graph& g, NodeId x, double keep_prob, bool training,
                      std::uint64_t seed) {
  Rng rng(seed);
  return dropout(g, x, keep_prob, training, rng);
}

void glorot_fill(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit =
      std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-limit, limit);
}

}  // namespace safetext::nn
