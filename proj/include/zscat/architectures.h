#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "zscat/embedding_store.h"
#include "zscat/numeric_core.h"

namespace zscat {

enum class Architecture : std::uint32_t {
  // sigmoid(W [mean_t S_t ; T_E] + b)
  kMeanPool = 1,
  // sigmoid(W [h_N ; T_E] + b), LSTM over S_1..S_N
  kLstmConcat = 2,
  // sigmoid(W h_N + b), LSTM over [T_E ; S_t]
  kTagConditionedLstm = 3,
};

inline constexpr std::size_t kDefaultHiddenDim = 128;

Architecture architecture_from_id(std::uint32_t id);  // throws std::invalid_argument
inline std::uint32_t architecture_id(Architecture a) {
  return static_cast<std::uint32_t>(a);
}

// Parameter (or gradient) container. `lstm` is empty for kMeanPool.
struct ModelParams {
  std::optional<LstmParams> lstm;
  Tensor2 classifier_w;  // 1 x classifier input
  double classifier_b = 0.0;
};

struct NamedBlock {
  std::string name;
  std::span<double> values;
};
struct ConstNamedBlock {
  std::string name;
  std::span<const double> values;
};

// Blocks in checkpoint order: lstm.w_x, lstm.w_h, lstm.b (archs 2, 3), then
// classifier.w, classifier.b.
std::vector<NamedBlock> parameter_blocks(ModelParams& params);
std::vector<ConstNamedBlock> parameter_blocks(const ModelParams& params);

class RelatednessModel {
 public:
  // Glorot-uniform weights, zero biases, forget-gate bias 1.0.
  static RelatednessModel create(Architecture arch, std::size_t embed_dim,
                                 std::size_t hidden_dim, std::uint64_t seed);
  // Every parameter zero; forward returns exactly 0.5.
  static RelatednessModel zeros(Architecture arch, std::size_t embed_dim,
                                std::size_t hidden_dim);

  // Wraps existing parameters; throws ShapeMismatch if their shapes do not
  // fit arch/embed_dim/hidden_dim.
  static RelatednessModel restore(Architecture arch, std::size_t embed_dim,
                                  std::size_t hidden_dim, std::uint64_t seed,
                                  ModelParams params);

  Architecture arch() const { return arch_; }
  std::size_t embed_dim() const { return embed_dim_; }
  // 0 for kMeanPool.
  std::size_t hidden_dim() const { return hidden_dim_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t parameter_count() const;

  const ModelParams& params() const { return params_; }
  // Every call invalidates outstanding forward caches.
  ModelParams& mutable_params() {
    ++version_;
    return params_;
  }
  std::uint64_t version() const { return version_; }

  // A zero-filled container with this model's parameter shapes.
  ModelParams zero_like() const;

 private:
  RelatednessModel(Architecture arch, std::size_t embed_dim,
                   std::size_t hidden_dim, std::uint64_t seed);

  Architecture arch_;
  std::size_t embed_dim_;
  std::size_t hidden_dim_;
  std::uint64_t seed_;
  ModelParams params_;
  std::uint64_t version_ = 0;
};

struct ForwardCache {
  std::uint64_t model_version = 0;
  std::size_t sequence_length = 0;
  Vector features;  // classifier input
  double probability = 0.5;
  std::vector<LstmStepCache> steps;
};

struct ForwardResult {
  double probability;
  ForwardCache cache;
};

ForwardResult forward(const RelatednessModel& model,
                      const SentenceMatrix& sentence, const TagEmbedding& tag);

// Forward pass without keeping the cache.
double predict(const RelatednessModel& model, const SentenceMatrix& sentence,
               const TagEmbedding& tag);

struct Gradients {
  ModelParams params;
  Tensor2 sentence;  // d loss / d S_t, one row per token
};

// Gradients of bce_loss(forward(...), label). Throws StaleCache if the model
// changed after `cache` was produced.
Gradients backward(const RelatednessModel& model, const ForwardCache& cache,
                   int label);

// "ZSCAT1", then u32 arch id, u32 embed dim, u32 hidden dim, u64 seed, then
// every parameter block in parameter_blocks() order as float64. All integers
// and floats little-endian.
void save_checkpoint(const RelatednessModel& model, std::ostream& out);
RelatednessModel load_checkpoint(std::istream& in);
void save_checkpoint_file(const RelatednessModel& model, const std::string& path);
RelatednessModel load_checkpoint_file(const std::string& path);

}  // namespace zscat
