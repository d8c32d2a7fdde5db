#include "zscat/numeric_core.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "zscat/errors.h"

namespace zscat {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ShapeMismatch(what);
}

}  // namespace

bool Tensor2::all_finite() const {
  return std::all_of(data.begin(), data.end(),
                     [](double x) { return std::isfinite(x); });
}

Vector dense_forward(const Tensor2& w, std::span<const double> b,
                     std::span<const double> x) {
  require(w.cols == x.size(), "dense_forward: weight columns != input size");
  require(w.rows == b.size(), "dense_forward: weight rows != bias size");
  Vector out(b.begin(), b.end());
  for (std::size_t r = 0; r < w.rows; ++r) {
    const double* row = w.data.data() + r * w.cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < w.cols; ++c) acc += row[c] * x[c];
    out[r] += acc;
  }
  return out;
}

DenseGrads dense_backward(const Tensor2& w, std::span<const double> x,
                          std::span<const double> grad_out) {
  require(w.cols == x.size(), "dense_backward: weight columns != input size");
  require(w.rows == grad_out.size(), "dense_backward: weight rows != grad size");
  DenseGrads g{Tensor2(w.rows, w.cols), Vector(grad_out.begin(), grad_out.end()),
               Vector(w.cols, 0.0)};
  for (std::size_t r = 0; r < w.rows; ++r) {
    const double go = grad_out[r];
    if (go == 0.0) continue;
    const double* row = w.data.data() + r * w.cols;
    double* grow = g.w.data.data() + r * w.cols;
    for (std::size_t c = 0; c < w.cols; ++c) {
      grow[c] = go * x[c];
      g.x[c] += row[c] * go;
    }
  }
  return g;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double bce_loss(double p, int y) {
  const double q = std::clamp(p, kBceEpsilon, 1.0 - kBceEpsilon);
  return y == 1 ? -std::log(q) : -std::log(1.0 - q);
}

double bce_grad_logit(double p, int y) {
  if (p < kBceEpsilon || p > 1.0 - kBceEpsilon) return 0.0;
  return p - static_cast<double>(y);
}

std::pair<LstmState, LstmStepCache> lstm_step(const LstmParams& params,
                                              std::span<const double> x,
                                              const LstmState& prev) {
  const std::size_t hidden = params.hidden_dim;
  require(x.size() == params.input_dim, "lstm_step: input size");
  require(prev.h.size() == hidden && prev.c.size() == hidden,
          "lstm_step: state size");

  Vector pre = dense_forward(params.w_x, params.b, x);
  for (std::size_t r = 0; r < 4 * hidden; ++r) {
    const double* row = params.w_h.data.data() + r * hidden;
    double acc = 0.0;
    for (std::size_t k = 0; k < hidden; ++k) acc += row[k] * prev.h[k];
    pre[r] += acc;
  }

  LstmStepCache cache;
  cache.x.assign(x.begin(), x.end());
  cache.h_prev = prev.h;
  cache.c_prev = prev.c;
  cache.i.resize(hidden);
  cache.f.resize(hidden);
  cache.g.resize(hidden);
  cache.o.resize(hidden);
  cache.c.resize(hidden);
  cache.tanh_c.resize(hidden);

  LstmState next{Vector(hidden), Vector(hidden)};
  for (std::size_t k = 0; k < hidden; ++k) {
    cache.i[k] = sigmoid(pre[k]);
    cache.f[k] = sigmoid(pre[hidden + k]);
    cache.g[k] = std::tanh(pre[2 * hidden + k]);
    cache.o[k] = sigmoid(pre[3 * hidden + k]);
    cache.c[k] = cache.f[k] * prev.c[k] + cache.i[k] * cache.g[k];
    cache.tanh_c[k] = std::tanh(cache.c[k]);
    next.c[k] = cache.c[k];
    next.h[k] = cache.o[k] * cache.tanh_c[k];
  }
  return {std::move(next), std::move(cache)};
}

LstmGrads lstm_backward(const LstmParams& params,
                        std::span<const LstmStepCache> steps,
                        std::span<const double> grad_h_last) {
  const std::size_t hidden = params.hidden_dim;
  const std::size_t input = params.input_dim;
  require(grad_h_last.size() == hidden, "lstm_backward: gradient size");

  LstmGrads grads{Tensor2(4 * hidden, input), Tensor2(4 * hidden, hidden),
                  Vector(4 * hidden, 0.0),
                  std::vector<Vector>(steps.size(), Vector(input, 0.0))};

  Vector dh(grad_h_last.begin(), grad_h_last.end());
  Vector dc(hidden, 0.0);
  Vector dpre(4 * hidden);
  Vector dh_prev(hidden);

  for (std::size_t s = steps.size(); s-- > 0;) {
    const LstmStepCache& st = steps[s];
    require(st.x.size() == input && st.c.size() == hidden,
            "lstm_backward: cache shape");
    for (std::size_t k = 0; k < hidden; ++k) {
      const double d_o = dh[k] * st.tanh_c[k];
      const double d_c =
          dc[k] + dh[k] * st.o[k] * (1.0 - st.tanh_c[k] * st.tanh_c[k]);
      const double d_i = d_c * st.g[k];
      const double d_f = d_c * st.c_prev[k];
      const double d_g = d_c * st.i[k];
      dpre[k] = d_i * st.i[k] * (1.0 - st.i[k]);
      dpre[hidden + k] = d_f * st.f[k] * (1.0 - st.f[k]);
      dpre[2 * hidden + k] = d_g * (1.0 - st.g[k] * st.g[k]);
      dpre[3 * hidden + k] = d_o * st.o[k] * (1.0 - st.o[k]);
      dc[k] = d_c * st.f[k];
    }

    std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
    Vector& dx = grads.inputs[s];
    for (std::size_t r = 0; r < 4 * hidden; ++r) {
      const double d = dpre[r];
      if (d == 0.0) continue;
      grads.b[r] += d;
      double* gwx = grads.w_x.data.data() + r * input;
      const double* wx = params.w_x.data.data() + r * input;
      for (std::size_t c = 0; c < input; ++c) {
        gwx[c] += d * st.x[c];
        dx[c] += wx[c] * d;
      }
      double* gwh = grads.w_h.data.data() + r * hidden;
      const double* wh = params.w_h.data.data() + r * hidden;
      for (std::size_t c = 0; c < hidden; ++c) {
        gwh[c] += d * st.h_prev[c];
        dh_prev[c] += wh[c] * d;
      }
    }
    dh.swap(dh_prev);
  }
  return grads;
}

void adam_update(AdamState& state, std::span<double> params,
                 std::span<const double> grads) {
  require(params.size() == grads.size(), "adam_update: params vs grads");
  require(params.size() == state.m.size() && params.size() == state.v.size(),
          "adam_update: params vs optimizer state");
  const AdamConfig& cfg = state.config;
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double g = grads[k];
    state.m[k] = cfg.beta1 * state.m[k] + (1.0 - cfg.beta1) * g;
    state.v[k] = cfg.beta2 * state.v[k] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = state.m[k] / correction1;
    const double v_hat = state.v[k] / correction2;
    params[k] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
}

void glorot_uniform(Tensor2& w, std::size_t fan_in, std::size_t fan_out,
                    std::mt19937_64& rng) {
  const double r = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-r, r);
  for (double& x : w.data) x = dist(rng);
}

}  // namespace zscat
