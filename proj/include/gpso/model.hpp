#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "gpso/arch.hpp"
#include "gpso/error.hpp"

namespace gpso {

// tanh-form GELU. Smooth everywhere, which keeps central finite differences
// honest (a ReLU kink within h of a pre-activation would poison the check).
template <typename Real>
inline Real gelu(Real x) {
  const Real c = Real(0.7978845608028654);  // sqrt(2/pi)
  const Real a = Real(0.044715);
  Real u = c * (x + a * x * x * x);
  return Real(0.5) * x * (Real(1) + std::tanh(u));
}

template <typename Real>
inline Real gelu_grad(Real x) {
  const Real c = Real(0.7978845608028654);
  const Real a = Real(0.044715);
  Real u = c * (x + a * x * x * x);
  Real t = std::tanh(u);
  Real sech2 = Real(1) - t * t;
  return Real(0.5) * (Real(1) + t) + Real(0.5) * x * sech2 * c * (Real(1) + Real(3) * a * x * x);
}

namespace detail {
constexpr double kRmsEps = 1e-6;
}

// Offsets into the flat parameter vector, resolved once per arch.
struct ParamOffsets {
  std::size_t tok_emb, pos_emb, head;
  std::vector<std::size_t> wq, wk, wv, wo, w1, w2;
  std::size_t total;

  explicit ParamOffsets(const ArchConfig& a) {
    const auto manifest = param_manifest(a);
    std::size_t i = 0;
    tok_emb = manifest[i++].offset;
    pos_emb = manifest[i++].offset;
    for (int l = 0; l < a.depth; ++l) {
      wq.push_back(manifest[i++].offset);
      wk.push_back(manifest[i++].offset);
      wv.push_back(manifest[i++].offset);
      wo.push_back(manifest[i++].offset);
      w1.push_back(manifest[i++].offset);
      w2.push_back(manifest[i++].offset);
    }
    head = manifest[i].offset;
    total = manifest[i].offset + manifest[i].count();
  }
};

// One sequence pushed through the network position by position. Sampling and
// update-time scoring both run through append(), so a token's log-prob is the
// same bits no matter which path computed it. All activations are cached;
// backward() consumes them.
//
// Masking contract: a position appended with visible=false contributes a zero
// token embedding (its content cannot reach anything) and is skipped as an
// attention key by every query. Its own hidden state is still computed (from
// the position embedding and visible context) because the next position's
// prediction conditions on it. Log-probs at invisible positions are defined
// but carry no loss weight.
template <typename Real>
class SequenceRun {
 public:
  SequenceRun(const ArchConfig& arch, const std::vector<Real>& params)
      : arch_(arch), off_(arch), params_(&params) {
    if (params.size() != off_.total) throw InputError("SequenceRun: parameter vector size mismatch");
    const std::size_t ctx = static_cast<std::size_t>(arch.context_length);
    const std::size_t w = static_cast<std::size_t>(arch.width);
    const std::size_t d = static_cast<std::size_t>(arch.depth);
    const std::size_t h4 = 4 * w;
    x_in_.assign((d + 1) * ctx * w, Real(0));
    xn1_.assign(d * ctx * w, Real(0));
    q_.assign(d * ctx * w, Real(0));
    k_.assign(d * ctx * w, Real(0));
    v_.assign(d * ctx * w, Real(0));
    ao_.assign(d * ctx * w, Real(0));
    r1_.assign(d * ctx * w, Real(0));
    xn2_.assign(d * ctx * w, Real(0));
    f1_.assign(d * ctx * h4, Real(0));
    f1a_.assign(d * ctx * h4, Real(0));
    attw_.assign(d * ctx * static_cast<std::size_t>(arch.head_count) * ctx, Real(0));
    rms1_.assign(d * ctx, Real(0));
    rms2_.assign(d * ctx, Real(0));
    rmsf_.assign(ctx, Real(0));
    xf_.assign(ctx * w, Real(0));
    logprobs_.assign(ctx * static_cast<std::size_t>(arch.vocab_size), Real(0));
    tokens_.reserve(ctx);
    visible_.reserve(ctx);
  }

  void reset() {
    tokens_.clear();
    visible_.clear();
  }

  int length() const { return static_cast<int>(tokens_.size()); }
  const std::vector<int>& tokens() const { return tokens_; }
  bool visible_at(int p) const { return visible_[static_cast<std::size_t>(p)] != 0; }

  // Log-probs of the next-token distribution at position p (full vocab).
  const Real* logprobs_at(int p) const {
    return logprobs_.data() + static_cast<std::size_t>(p) * static_cast<std::size_t>(arch_.vocab_size);
  }

  // Appends one token and computes the next-token distribution at its position.
  void append(int token, bool visible) {
    const int p = length();
    if (p >= arch_.context_length) throw InputError("SequenceRun: context length exceeded");
    if (token < 0 || token >= arch_.vocab_size) throw InputError("SequenceRun: token id out of range");
    tokens_.push_back(token);
    visible_.push_back(visible ? 1 : 0);

    const std::size_t w = static_cast<std::size_t>(arch_.width);
    const std::size_t ctx = static_cast<std::size_t>(arch_.context_length);
    const Real* P = params_->data();

    // Embedding. Invisible positions get no token component.
    Real* x0 = xrow(0, p);
    const Real* pe = P + off_.pos_emb + static_cast<std::size_t>(p) * w;
    if (visible) {
      const Real* te = P + off_.tok_emb + static_cast<std::size_t>(token) * w;
      for (std::size_t i = 0; i < w; ++i) x0[i] = te[i] + pe[i];
    } else {
      for (std::size_t i = 0; i < w; ++i) x0[i] = pe[i];
    }

    const int heads = arch_.head_count;
    const std::size_t hd = w / static_cast<std::size_t>(heads);
    const Real inv_sqrt_hd = Real(1) / std::sqrt(static_cast<Real>(hd));

    for (int l = 0; l < arch_.depth; ++l) {
      const Real* xi = xrow(l, p);
      Real* n1 = row(xn1_, l, p, w);
      rms1_[idx2(l, p)] = rmsnorm(xi, n1, w);

      matvec(P + off_.wq[static_cast<std::size_t>(l)], n1, row(q_, l, p, w), w, w);
      matvec(P + off_.wk[static_cast<std::size_t>(l)], n1, row(k_, l, p, w), w, w);
      matvec(P + off_.wv[static_cast<std::size_t>(l)], n1, row(v_, l, p, w), w, w);

      Real* aout = row(ao_, l, p, w);
      const Real* qp = row(q_, l, p, w);
      for (int h = 0; h < heads; ++h) {
        const std::size_t hoff = static_cast<std::size_t>(h) * hd;
        Real* wrow = attw_.data() +
                     ((static_cast<std::size_t>(l) * ctx + static_cast<std::size_t>(p)) *
                          static_cast<std::size_t>(heads) +
                      static_cast<std::size_t>(h)) *
                         ctx;
        // Scores over visible keys s <= p, streamed in position order.
        Real mx = Real(0);
        bool any = false;
        for (int s = 0; s <= p; ++s) {
          if (!visible_[static_cast<std::size_t>(s)]) continue;
          const Real* ks = row(k_, l, s, w);
          Real sc = Real(0);
          for (std::size_t i = 0; i < hd; ++i) sc += qp[hoff + i] * ks[hoff + i];
          sc *= inv_sqrt_hd;
          wrow[s] = sc;  // raw score, normalized below
          if (!any || sc > mx) mx = sc;
          any = true;
        }
        if (!any) {
          // Degenerate: no visible key. Zero output, and zero the weight row
          // so backward sees no stale entries.
          for (int s = 0; s <= p; ++s) wrow[s] = Real(0);
          for (std::size_t i = 0; i < hd; ++i) aout[hoff + i] = Real(0);
          continue;
        }
        Real z = Real(0);
        for (int s = 0; s <= p; ++s) {
          if (!visible_[static_cast<std::size_t>(s)]) continue;
          wrow[s] = std::exp(wrow[s] - mx);
          z += wrow[s];
        }
        const Real invz = Real(1) / z;
        for (std::size_t i = 0; i < hd; ++i) aout[hoff + i] = Real(0);
        for (int s = 0; s <= p; ++s) {
          if (!visible_[static_cast<std::size_t>(s)]) { wrow[s] = Real(0); continue; }
          wrow[s] *= invz;
          const Real* vs = row(v_, l, s, w);
          for (std::size_t i = 0; i < hd; ++i) aout[hoff + i] += wrow[s] * vs[hoff + i];
        }
      }

      Real* r1p = row(r1_, l, p, w);
      matvec(P + off_.wo[static_cast<std::size_t>(l)], aout, r1p, w, w);
      for (std::size_t i = 0; i < w; ++i) r1p[i] += xi[i];

      Real* n2 = row(xn2_, l, p, w);
      rms2_[idx2(l, p)] = rmsnorm(r1p, n2, w);

      Real* f1p = row(f1_, l, p, 4 * w);
      matvec(P + off_.w1[static_cast<std::size_t>(l)], n2, f1p, 4 * w, w);
      Real* f1ap = row(f1a_, l, p, 4 * w);
      for (std::size_t i = 0; i < 4 * w; ++i) f1ap[i] = gelu(f1p[i]);

      Real* xo = xrow(l + 1, p);
      matvec(P + off_.w2[static_cast<std::size_t>(l)], f1ap, xo, w, 4 * w);
      for (std::size_t i = 0; i < w; ++i) xo[i] += r1p[i];
    }

    Real* xfp = xf_.data() + static_cast<std::size_t>(p) * w;
    rmsf_[static_cast<std::size_t>(p)] = rmsnorm(xrow(arch_.depth, p), xfp, w);

    // Head + log-softmax, stored as log-probs (softmax recoverable exactly).
    const std::size_t vs = static_cast<std::size_t>(arch_.vocab_size);
    Real* lp = logprobs_.data() + static_cast<std::size_t>(p) * vs;
    matvec(P + off_.head, xfp, lp, vs, w);
    Real mx = lp[0];
    for (std::size_t i = 1; i < vs; ++i) {
      if (lp[i] > mx) mx = lp[i];
    }
    Real z = Real(0);
    for (std::size_t i = 0; i < vs; ++i) z += std::exp(lp[i] - mx);
    const Real lse = mx + std::log(z);
    for (std::size_t i = 0; i < vs; ++i) lp[i] -= lse;
  }

  // Gradient of sum_p c[p] * logprob_at(p)[tokens[p+1]] with respect to the
  // parameters, accumulated into `grad` (size = param count). c has length
  // len-1 or len (a weight on the last position would reference a token that
  // does not exist, so it must be zero if present). Weights of exactly zero
  // contribute nothing, bit-for-bit: their positions are skipped outright.
  void backward(const std::vector<Real>& c, std::vector<Real>& grad) const {
    const int len = length();
    if (grad.size() != off_.total) throw InputError("backward: gradient vector size mismatch");
    if (c.size() != static_cast<std::size_t>(len) && c.size() + 1 != static_cast<std::size_t>(len)) {
      throw InputError("backward: weight vector length mismatch");
    }
    if (c.size() == static_cast<std::size_t>(len) && len > 0 && c[static_cast<std::size_t>(len - 1)] != Real(0)) {
      throw InputError("backward: last position has no next token; its weight must be zero");
    }

    const std::size_t w = static_cast<std::size_t>(arch_.width);
    const std::size_t vs = static_cast<std::size_t>(arch_.vocab_size);
    const std::size_t ctx = static_cast<std::size_t>(arch_.context_length);
    const int heads = arch_.head_count;
    const std::size_t hd = w / static_cast<std::size_t>(heads);
    const Real inv_sqrt_hd = Real(1) / std::sqrt(static_cast<Real>(hd));
    const Real* P = params_->data();

    // d(stream) = gradient wrt the residual-stream output of the deepest block,
    // per position. Start from the head.
    std::vector<Real> dx(static_cast<std::size_t>(len) * w, Real(0));
    std::vector<Real> dlogits(vs);
    for (int p = 0; p + 1 < len; ++p) {
      const Real cp = c[static_cast<std::size_t>(p)];
      if (cp == Real(0)) continue;
      const Real* lp = logprobs_at(p);
      const int target = tokens_[static_cast<std::size_t>(p) + 1];
      for (std::size_t i = 0; i < vs; ++i) dlogits[i] = -cp * std::exp(lp[i]);
      dlogits[static_cast<std::size_t>(target)] += cp;
      // Through the head into xf, and head weight gradient.
      const Real* xfp = xf_.data() + static_cast<std::size_t>(p) * w;
      Real* dxf = dxf_scratch(w);
      for (std::size_t i = 0; i < w; ++i) dxf[i] = Real(0);
      for (std::size_t r = 0; r < vs; ++r) {
        const Real g = dlogits[r];
        if (g == Real(0)) continue;
        const Real* hr = P + off_.head + r * w;
        Real* ghr = grad.data() + off_.head + r * w;
        for (std::size_t i = 0; i < w; ++i) {
          ghr[i] += g * xfp[i];
          dxf[i] += g * hr[i];
        }
      }
      // Through the final norm into the stream.
      rmsnorm_backward(dxf, xrow(arch_.depth, p), xfp, rmsf_[static_cast<std::size_t>(p)],
                       dx.data() + static_cast<std::size_t>(p) * w, w);
    }

    // Blocks in reverse. dx holds d(block output) per position on entry and
    // d(block input) on exit.
    std::vector<Real> dr1(static_cast<std::size_t>(len) * w);
    std::vector<Real> dq(static_cast<std::size_t>(len) * w);
    std::vector<Real> dk(static_cast<std::size_t>(len) * w);
    std::vector<Real> dv(static_cast<std::size_t>(len) * w);
    std::vector<Real> dao(static_cast<std::size_t>(len) * w);
    std::vector<Real> df1(4 * w);
    std::vector<Real> dn(w);
    std::vector<Real> dsc(static_cast<std::size_t>(len));
    for (int l = arch_.depth - 1; l >= 0; --l) {
      const std::size_t lz = static_cast<std::size_t>(l);
      std::fill(dr1.begin(), dr1.end(), Real(0));
      std::fill(dq.begin(), dq.end(), Real(0));
      std::fill(dk.begin(), dk.end(), Real(0));
      std::fill(dv.begin(), dv.end(), Real(0));
      std::fill(dao.begin(), dao.end(), Real(0));

      // MLP half: x_out = r1 + W2 gelu(W1 xn2), xn2 = norm(r1).
      for (int p = 0; p < len; ++p) {
        const Real* dxo = dx.data() + static_cast<std::size_t>(p) * w;
        Real* dr1p = dr1.data() + static_cast<std::size_t>(p) * w;
        for (std::size_t i = 0; i < w; ++i) dr1p[i] = dxo[i];  // residual
        // W2 branch.
        const Real* f1ap = row(f1a_, l, p, 4 * w);
        const Real* f1p = row(f1_, l, p, 4 * w);
        for (std::size_t i = 0; i < 4 * w; ++i) df1[i] = Real(0);
        for (std::size_t r = 0; r < w; ++r) {
          const Real g = dxo[r];
          if (g == Real(0)) continue;
          const Real* w2r = P + off_.w2[lz] + r * (4 * w);
          Real* gw2r = grad.data() + off_.w2[lz] + r * (4 * w);
          for (std::size_t i = 0; i < 4 * w; ++i) {
            gw2r[i] += g * f1ap[i];
            df1[i] += g * w2r[i];
          }
        }
        for (std::size_t i = 0; i < 4 * w; ++i) df1[i] *= gelu_grad(f1p[i]);
        const Real* n2 = row(xn2_, l, p, w);
        for (std::size_t i = 0; i < w; ++i) dn[i] = Real(0);
        for (std::size_t r = 0; r < 4 * w; ++r) {
          const Real g = df1[r];
          if (g == Real(0)) continue;
          const Real* w1r = P + off_.w1[lz] + r * w;
          Real* gw1r = grad.data() + off_.w1[lz] + r * w;
          for (std::size_t i = 0; i < w; ++i) {
            gw1r[i] += g * n2[i];
            dn[i] += g * w1r[i];
          }
        }
        rmsnorm_backward(dn.data(), row_const(r1_, l, p, w), n2, rms2_[idx2(l, p)], dr1p, w);
      }

      // Attention half: r1 = x_in + Wo ao.
      for (int p = 0; p < len; ++p) {
        const Real* dr1p = dr1.data() + static_cast<std::size_t>(p) * w;
        Real* daop = dao.data() + static_cast<std::size_t>(p) * w;
        const Real* aop = row(ao_, l, p, w);
        for (std::size_t r = 0; r < w; ++r) {
          const Real g = dr1p[r];
          if (g == Real(0)) continue;
          const Real* wor = P + off_.wo[lz] + r * w;
          Real* gwor = grad.data() + off_.wo[lz] + r * w;
          for (std::size_t i = 0; i < w; ++i) {
            gwor[i] += g * aop[i];
            daop[i] += g * wor[i];
          }
        }
      }
      // Through the softmax-weighted sums. Queries in position order; key and
      // value gradients accumulate in that fixed order (determinism).
      for (int p = 0; p < len; ++p) {
        const Real* daop = dao.data() + static_cast<std::size_t>(p) * w;
        const Real* qp = row(q_, l, p, w);
        Real* dqp = dq.data() + static_cast<std::size_t>(p) * w;
        for (int h = 0; h < heads; ++h) {
          const std::size_t hoff = static_cast<std::size_t>(h) * hd;
          const Real* wrow = attw_.data() +
                             ((lz * ctx + static_cast<std::size_t>(p)) * static_cast<std::size_t>(heads) +
                              static_cast<std::size_t>(h)) *
                                 ctx;
          // dw[s] and the softmax backward dot product.
          Real dot = Real(0);
          for (int s = 0; s <= p; ++s) {
            if (wrow[s] == Real(0)) { dsc[static_cast<std::size_t>(s)] = Real(0); continue; }
            const Real* vsr = row(v_, l, s, w);
            Real dws = Real(0);
            for (std::size_t i = 0; i < hd; ++i) dws += daop[hoff + i] * vsr[hoff + i];
            dsc[static_cast<std::size_t>(s)] = dws;
            dot += wrow[s] * dws;
          }
          for (int s = 0; s <= p; ++s) {
            const Real ws = wrow[s];
            if (ws == Real(0)) continue;
            const Real dscore = ws * (dsc[static_cast<std::size_t>(s)] - dot);
            Real* dvs = dv.data() + static_cast<std::size_t>(s) * w;
            for (std::size_t i = 0; i < hd; ++i) dvs[hoff + i] += ws * daop[hoff + i];
            const Real* ks = row(k_, l, s, w);
            Real* dks = dk.data() + static_cast<std::size_t>(s) * w;
            const Real dq_scale = dscore * inv_sqrt_hd;
            for (std::size_t i = 0; i < hd; ++i) {
              dqp[hoff + i] += dq_scale * ks[hoff + i];
              dks[hoff + i] += dq_scale * qp[hoff + i];
            }
          }
        }
      }
      // Projections into xn1 and their weight gradients, then the first norm.
      for (int p = 0; p < len; ++p) {
        const Real* n1 = row(xn1_, l, p, w);
        for (std::size_t i = 0; i < w; ++i) dn[i] = Real(0);
        matvec_backward(P + off_.wq[lz], grad.data() + off_.wq[lz], n1,
                        dq.data() + static_cast<std::size_t>(p) * w, dn.data(), w, w);
        matvec_backward(P + off_.wk[lz], grad.data() + off_.wk[lz], n1,
                        dk.data() + static_cast<std::size_t>(p) * w, dn.data(), w, w);
        matvec_backward(P + off_.wv[lz], grad.data() + off_.wv[lz], n1,
                        dv.data() + static_cast<std::size_t>(p) * w, dn.data(), w, w);
        // dx (block input) = residual from dr1 plus the norm path.
        Real* dxi = dx.data() + static_cast<std::size_t>(p) * w;
        const Real* dr1p = dr1.data() + static_cast<std::size_t>(p) * w;
        for (std::size_t i = 0; i < w; ++i) dxi[i] = dr1p[i];
        rmsnorm_backward(dn.data(), row_const(x_in_, l, p, w), n1, rms1_[idx2(l, p)], dxi, w);
      }
    }

    // Embeddings. Invisible positions contributed no token embedding, so no
    // gradient reaches their token rows.
    for (int p = 0; p < len; ++p) {
      const Real* dxp = dx.data() + static_cast<std::size_t>(p) * w;
      Real* gpe = grad.data() + off_.pos_emb + static_cast<std::size_t>(p) * w;
      for (std::size_t i = 0; i < w; ++i) gpe[i] += dxp[i];
      if (visible_[static_cast<std::size_t>(p)]) {
        Real* gte = grad.data() + off_.tok_emb +
                    static_cast<std::size_t>(tokens_[static_cast<std::size_t>(p)]) * w;
        for (std::size_t i = 0; i < w; ++i) gte[i] += dxp[i];
      }
    }
  }

 private:
  // y = W x, W row-major [rows x cols].
  static void matvec(const Real* W, const Real* x, Real* y, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
      const Real* wr = W + r * cols;
      Real acc = Real(0);
      for (std::size_t i = 0; i < cols; ++i) acc += wr[i] * x[i];
      y[r] = acc;
    }
  }

  // Accumulates dW += dy x^T and dx += W^T dy.
  static void matvec_backward(const Real* W, Real* gW, const Real* x, const Real* dy, Real* dx,
                              std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
      const Real g = dy[r];
      if (g == Real(0)) continue;
      const Real* wr = W + r * cols;
      Real* gwr = gW + r * cols;
      for (std::size_t i = 0; i < cols; ++i) {
        gwr[i] += g * x[i];
        dx[i] += g * wr[i];
      }
    }
  }

  // y = x / sqrt(mean(x^2) + eps); returns the denominator.
  static Real rmsnorm(const Real* x, Real* y, std::size_t n) {
    Real ms = Real(0);
    for (std::size_t i = 0; i < n; ++i) ms += x[i] * x[i];
    ms /= static_cast<Real>(n);
    const Real r = std::sqrt(ms + Real(detail::kRmsEps));
    const Real inv = Real(1) / r;
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] * inv;
    return r;
  }

  // Pullback of y = x / r with r = sqrt(mean(x^2) + eps):
  // dL/dx_j = g_j/r - (sum_i g_i x_i) x_j / (n r^3) = (g_j - y_j dot(g,y)/n) / r.
  // The eps only shifts r; the identity holds as written.
  static void rmsnorm_backward(const Real* g, const Real* x, const Real* y, Real r, Real* dx,
                               std::size_t n) {
    (void)x;
    Real dot = Real(0);
    for (std::size_t i = 0; i < n; ++i) dot += g[i] * y[i];
    const Real inv = Real(1) / r;
    const Real mean_scale = dot / static_cast<Real>(n);
    for (std::size_t i = 0; i < n; ++i) dx[i] += (g[i] - y[i] * mean_scale) * inv;
  }

  Real* xrow(int layer, int p) {
    const std::size_t w = static_cast<std::size_t>(arch_.width);
    const std::size_t ctx = static_cast<std::size_t>(arch_.context_length);
    return x_in_.data() + (static_cast<std::size_t>(layer) * ctx + static_cast<std::size_t>(p)) * w;
  }
  const Real* xrow(int layer, int p) const {
    const std::size_t w = static_cast<std::size_t>(arch_.width);
    const std::size_t ctx = static_cast<std::size_t>(arch_.context_length);
    return x_in_.data() + (static_cast<std::size_t>(layer) * ctx + static_cast<std::size_t>(p)) * w;
  }
  Real* row(std::vector<Real>& buf, int layer, int p, std::size_t stride) {
    const std::size_t ctx = static_cast<std::size_t>(arch_.context_length);
    return buf.data() + (static_cast<std::size_t>(layer) * ctx + static_cast<std::size_t>(p)) * stride;
  }
  const Real* row(const std::vector<Real>& buf, int layer, int p, std::size_t stride) const {
    const std::size_t ctx = static_cast<std::size_t>(arch_.context_length);
    return buf.data() + (static_cast<std::size_t>(layer) * ctx + static_cast<std::size_t>(p)) * stride;
  }
  const Real* row_const(const std::vector<Real>& buf, int layer, int p, std::size_t stride) const {
    return row(buf, layer, p, stride);
  }
  std::size_t idx2(int layer, int p) const {
    return static_cast<std::size_t>(layer) * static_cast<std::size_t>(arch_.context_length) +
           static_cast<std::size_t>(p);
  }
  Real* dxf_scratch(std::size_t w) const {
    if (dxf_.size() < w) dxf_.assign(w, Real(0));
    return dxf_.data();
  }

  ArchConfig arch_;
  ParamOffsets off_;
  const std::vector<Real>* params_;
  std::vector<int> tokens_;
  std::vector<std::uint8_t> visible_;
  std::vector<Real> x_in_, xn1_, q_, k_, v_, ao_, r1_, xn2_, f1_, f1a_, attw_;
  std::vector<Real> rms1_, rms2_, rmsf_, xf_, logprobs_;
  mutable std::vector<Real> dxf_;
};

}  // namespace gpso
