#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace zscat {

using Vector = std::vector<double>;

// Dense row-major matrix of doubles.
struct Tensor2 {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Tensor2() = default;
  Tensor2(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data[r * cols + c];
  }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }
  bool all_finite() const;
};

// ---- Dense layer -----------------------------------------------------------

// Returns w * x + b. Throws ShapeMismatch unless w.cols == |x| and
// w.rows == |b|.
Vector dense_forward(const Tensor2& w, std::span<const double> b,
                     std::span<const double> x);

struct DenseGrads {
  Tensor2 w;  // grad_out ⊗ xᵀ
  Vector b;   // grad_out
  Vector x;   // wᵀ grad_out
};

// `w` and `x` are the operands of the matching dense_forward call.
DenseGrads dense_backward(const Tensor2& w, std::span<const double> x,
                          std::span<const double> grad_out);

// ---- Scalar output ---------------------------------------------------------

inline constexpr double kBceEpsilon = 1e-7;

double sigmoid(double z);

// Binary cross-entropy of probability p against label y ∈ {0, 1}; p is clamped
// to [kBceEpsilon, 1 - kBceEpsilon] first.
double bce_loss(double p, int y);

// d bce_loss(sigmoid(z), y) / dz given p = sigmoid(z). Zero inside the clamp
// region, where the clamped loss is flat.
double bce_grad_logit(double p, int y);

// ---- LSTM ------------------------------------------------------------------

// Gate rows are stacked [input; forget; candidate; output], H rows each.
struct LstmParams {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  Tensor2 w_x;  // 4H x input_dim
  Tensor2 w_h;  // 4H x H
  Vector b;     // 4H

  LstmParams() = default;
  LstmParams(std::size_t input, std::size_t hidden)
      : input_dim(input),
        hidden_dim(hidden),
        w_x(4 * hidden, input),
        w_h(4 * hidden, hidden),
        b(4 * hidden, 0.0) {}
};

struct LstmState {
  Vector h;
  Vector c;

  static LstmState zeros(std::size_t hidden) {
    return {Vector(hidden, 0.0), Vector(hidden, 0.0)};
  }
};

// Everything backward needs from one forward step.
struct LstmStepCache {
  Vector x;
  Vector h_prev;
  Vector c_prev;
  Vector i, f, g, o;
  Vector c;
  Vector tanh_c;
};

std::pair<LstmState, LstmStepCache> lstm_step(const LstmParams& params,
                                              std::span<const double> x,
                                              const LstmState& prev);

struct LstmGrads {
  Tensor2 w_x;
  Tensor2 w_h;
  Vector b;
  std::vector<Vector> inputs;  // d loss / d x_t for every step
};

// Backpropagation through time for a sweep that started from the zero state.
// The only gradient source is the last hidden state.
LstmGrads lstm_backward(const LstmParams& params,
                        std::span<const LstmStepCache> steps,
                        std::span<const double> grad_h_last);

// ---- Adam ------------------------------------------------------------------

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig config;
  Vector m;
  Vector v;
  std::uint64_t t = 0;

  AdamState() = default;
  AdamState(std::size_t parameter_count, AdamConfig cfg)
      : config(cfg), m(parameter_count, 0.0), v(parameter_count, 0.0) {}
};

// One bias-corrected Adam step, in place on `params`.
void adam_update(AdamState& state, std::span<double> params,
                 std::span<const double> grads);

// ---- Initialization --------------------------------------------------------

// Uniform(-r, r) with r = sqrt(6 / (fan_in + fan_out)).
void glorot_uniform(Tensor2& w, std::size_t fan_in, std::size_t fan_out,
                    std::mt19937_64& rng);

}  // namespace zscat
