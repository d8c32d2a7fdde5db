#include "zscat/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "zscat/numeric_core.h"

namespace zscat {
namespace {

double loss_of(const RelatednessModel& model, const SentenceMatrix& s,
               const TagEmbedding& tag, int label) {
  return bce_loss(predict(model, s, tag), label);
}

}  // namespace

double relative_error(double analytic, double numeric) {
  const double denom =
      std::max({std::abs(analytic), std::abs(numeric), kGradcheckFloor});
  return std::abs(analytic - numeric) / denom;
}

double GradcheckReport::max_relative_error() const {
  double m = 0.0;
  for (const auto& b : blocks) m = std::max(m, b.max_relative_error);
  return m;
}

bool GradcheckReport::passed(double tolerance) const {
  return max_relative_error() < tolerance;
}

GradcheckReport run_gradcheck(Architecture arch, std::uint64_t seed,
                              const GradcheckOptions& options) {
  const std::size_t d = options.embed_dim;
  RelatednessModel model =
      RelatednessModel::create(arch, d, options.hidden_dim, seed);

  std::mt19937_64 rng(seed ^ 0x5bd1e995ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  {
    // Nonzero biases so every gradient path is exercised.
    for (auto& block : parameter_blocks(model.mutable_params())) {
      if (block.name.ends_with(".b")) {
        for (double& x : block.values) x += 0.1 * normal(rng);
      }
    }
  }
  SentenceMatrix sentence{Tensor2(options.sequence_length, d), 0, {}};
  for (double& x : sentence.values.data) x = normal(rng);
  TagEmbedding tag{Vector(d)};
  for (double& x : tag.values) x = normal(rng);
  const int label = std::bernoulli_distribution(0.5)(rng) ? 1 : 0;

  const ForwardResult fr = forward(model, sentence, tag);
  Gradients analytic = backward(model, fr.cache, label);
  if (options.corrupt_backward) {
    for (double& x : analytic.params.classifier_w.data) x *= 1.5;
  }

  GradcheckReport report{arch, seed, {}};
  const double h = kGradcheckStep;
  auto analytic_blocks = parameter_blocks(analytic.params);
  auto blocks = parameter_blocks(model.mutable_params());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    BlockCheck check{blocks[b].name, blocks[b].values.size(), 0.0};
    for (std::size_t k = 0; k < blocks[b].values.size(); ++k) {
      double& x = blocks[b].values[k];
      const double saved = x;
      x = saved + h;
      const double up = loss_of(model, sentence, tag, label);
      x = saved - h;
      const double down = loss_of(model, sentence, tag, label);
      x = saved;
      const double numeric = (up - down) / (2.0 * h);
      check.max_relative_error = std::max(
          check.max_relative_error, relative_error(analytic_blocks[b].values[k], numeric));
    }
    report.blocks.push_back(std::move(check));
  }

  BlockCheck rows{"sentence", sentence.values.data.size(), 0.0};
  for (std::size_t k = 0; k < sentence.values.data.size(); ++k) {
    double& x = sentence.values.data[k];
    const double saved = x;
    x = saved + h;
    const double up = loss_of(model, sentence, tag, label);
    x = saved - h;
    const double down = loss_of(model, sentence, tag, label);
    x = saved;
    rows.max_relative_error =
        std::max(rows.max_relative_error,
                 relative_error(analytic.sentence.data[k], (up - down) / (2.0 * h)));
  }
  report.blocks.push_back(std::move(rows));
  return report;
}

}  // namespace zscat
