#include "zscat/architectures.h"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "zscat/errors.h"

namespace zscat {
namespace {

constexpr std::array<char, 6> kMagic = {'Z', 'S', 'C', 'A', 'T', '1'};

std::size_t classifier_inputs(Architecture arch, std::size_t embed_dim,
                              std::size_t hidden_dim) {
  switch (arch) {
    case Architecture::kMeanPool:
      return 2 * embed_dim;
    case Architecture::kLstmConcat:
      return hidden_dim + embed_dim;
    case Architecture::kTagConditionedLstm:
      return hidden_dim;
  }
  throw std::invalid_argument("unknown architecture");
}

std::size_t lstm_inputs(Architecture arch, std::size_t embed_dim) {
  return arch == Architecture::kTagConditionedLstm ? 2 * embed_dim : embed_dim;
}

// Runs the LSTM over the sequence the architecture feeds it.
std::vector<LstmStepCache> run_lstm(const LstmParams& lstm, Architecture arch,
                                    const Tensor2& sentence,
                                    const Vector& tag, LstmState& state) {
  std::vector<LstmStepCache> steps;
  steps.reserve(sentence.rows);
  Vector input(lstm.input_dim);
  const std::size_t d = sentence.cols;
  for (std::size_t t = 0; t < sentence.rows; ++t) {
    const auto row = sentence.row(t);
    if (arch == Architecture::kTagConditionedLstm) {
      std::copy(tag.begin(), tag.end(), input.begin());
      std::copy(row.begin(), row.end(), input.begin() + static_cast<std::ptrdiff_t>(d));
    } else {
      std::copy(row.begin(), row.end(), input.begin());
    }
    auto [next, cache] = lstm_step(lstm, input, state);
    state = std::move(next);
    steps.push_back(std::move(cache));
  }
  return steps;
}

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int k = 0; k < 4; ++k) b[k] = static_cast<char>((v >> (8 * k)) & 0xff);
  out.write(b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int k = 0; k < 8; ++k) b[k] = static_cast<char>((v >> (8 * k)) & 0xff);
  out.write(b, 8);
}

std::uint64_t get_u64(std::istream& in, int bytes, const char* field) {
  unsigned char b[8] = {};
  in.read(reinterpret_cast<char*>(b), bytes);
  if (in.gcount() != bytes) {
    throw CorruptCheckpoint(std::string("checkpoint truncated in ") + field);
  }
  std::uint64_t v = 0;
  for (int k = 0; k < bytes; ++k) v |= std::uint64_t{b[k]} << (8 * k);
  return v;
}

}  // namespace

Architecture architecture_from_id(std::uint32_t id) {
  if (id < 1 || id > 3) {
    throw std::invalid_argument("architecture id must be 1, 2 or 3, got " +
                                std::to_string(id));
  }
  return static_cast<Architecture>(id);
}

std::vector<NamedBlock> parameter_blocks(ModelParams& p) {
  std::vector<NamedBlock> blocks;
  if (p.lstm) {
    blocks.push_back({"lstm.w_x", p.lstm->w_x.data});
    blocks.push_back({"lstm.w_h", p.lstm->w_h.data});
    blocks.push_back({"lstm.b", p.lstm->b});
  }
  blocks.push_back({"classifier.w", p.classifier_w.data});
  blocks.push_back({"classifier.b", std::span<double>(&p.classifier_b, 1)});
  return blocks;
}

std::vector<ConstNamedBlock> parameter_blocks(const ModelParams& p) {
  std::vector<ConstNamedBlock> blocks;
  for (auto& b : parameter_blocks(const_cast<ModelParams&>(p))) {
    blocks.push_back({std::move(b.name), b.values});
  }
  return blocks;
}

RelatednessModel::RelatednessModel(Architecture arch, std::size_t embed_dim,
                                   std::size_t hidden_dim, std::uint64_t seed)
    : arch_(arch),
      embed_dim_(embed_dim),
      hidden_dim_(arch == Architecture::kMeanPool ? 0 : hidden_dim),
      seed_(seed) {
  if (embed_dim == 0) throw std::invalid_argument("embedding dimension must be >= 1");
  if (arch != Architecture::kMeanPool && hidden_dim == 0) {
    throw std::invalid_argument("hidden dimension must be >= 1");
  }
  params_ = zero_like();
}

ModelParams RelatednessModel::zero_like() const {
  ModelParams p;
  if (arch_ != Architecture::kMeanPool) {
    p.lstm = LstmParams(lstm_inputs(arch_, embed_dim_), hidden_dim_);
  }
  p.classifier_w = Tensor2(1, classifier_inputs(arch_, embed_dim_, hidden_dim_));
  return p;
}

RelatednessModel RelatednessModel::create(Architecture arch,
                                          std::size_t embed_dim,
                                          std::size_t hidden_dim,
                                          std::uint64_t seed) {
  RelatednessModel model(arch, embed_dim, hidden_dim, seed);
  std::mt19937_64 rng(seed);
  ModelParams& p = model.params_;
  if (p.lstm) {
    LstmParams& l = *p.lstm;
    glorot_uniform(l.w_x, l.input_dim, 4 * l.hidden_dim, rng);
    glorot_uniform(l.w_h, l.hidden_dim, 4 * l.hidden_dim, rng);
    for (std::size_t k = 0; k < l.hidden_dim; ++k) l.b[l.hidden_dim + k] = 1.0;
  }
  glorot_uniform(p.classifier_w, p.classifier_w.cols, 1, rng);
  return model;
}

RelatednessModel RelatednessModel::zeros(Architecture arch,
                                         std::size_t embed_dim,
                                         std::size_t hidden_dim) {
  return RelatednessModel(arch, embed_dim, hidden_dim, 0);
}

RelatednessModel RelatednessModel::restore(Architecture arch,
                                           std::size_t embed_dim,
                                           std::size_t hidden_dim,
                                           std::uint64_t seed,
                                           ModelParams params) {
  RelatednessModel model(arch, embed_dim, hidden_dim, seed);
  const ModelParams& want = model.params_;
  const bool lstm_ok =
      want.lstm.has_value() == params.lstm.has_value() &&
      (!want.lstm ||
       (params.lstm->input_dim == want.lstm->input_dim &&
        params.lstm->hidden_dim == want.lstm->hidden_dim &&
        params.lstm->w_x.data.size() == want.lstm->w_x.data.size() &&
        params.lstm->w_h.data.size() == want.lstm->w_h.data.size() &&
        params.lstm->b.size() == want.lstm->b.size()));
  if (!lstm_ok || params.classifier_w.rows != 1 ||
      params.classifier_w.cols != want.classifier_w.cols) {
    throw ShapeMismatch("parameter shapes do not match the architecture");
  }
  model.params_ = std::move(params);
  return model;
}

std::size_t RelatednessModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& b : parameter_blocks(params_)) n += b.values.size();
  return n;
}

ForwardResult forward(const RelatednessModel& model,
                      const SentenceMatrix& sentence, const TagEmbedding& tag) {
  const std::size_t d = model.embed_dim();
  const Tensor2& s = sentence.values;
  if (s.cols != d || tag.values.size() != d) {
    throw ShapeMismatch("model expects " + std::to_string(d) +
                        "-dimensional embeddings, got sentence " +
                        std::to_string(s.cols) + " and tag " +
                        std::to_string(tag.values.size()));
  }
  if (s.rows == 0) throw EmptySentence();

  const ModelParams& p = model.params();
  ForwardCache cache;
  cache.model_version = model.version();
  cache.sequence_length = s.rows;

  switch (model.arch()) {
    case Architecture::kMeanPool: {
      cache.features.assign(2 * d, 0.0);
      for (std::size_t t = 0; t < s.rows; ++t) {
        for (std::size_t k = 0; k < d; ++k) cache.features[k] += s(t, k);
      }
      for (std::size_t k = 0; k < d; ++k) {
        cache.features[k] /= static_cast<double>(s.rows);
      }
      std::copy(tag.values.begin(), tag.values.end(),
                cache.features.begin() + static_cast<std::ptrdiff_t>(d));
      break;
    }
    case Architecture::kLstmConcat: {
      LstmState state = LstmState::zeros(model.hidden_dim());
      cache.steps = run_lstm(*p.lstm, model.arch(), s, tag.values, state);
      cache.features = state.h;
      cache.features.insert(cache.features.end(), tag.values.begin(),
                            tag.values.end());
      break;
    }
    case Architecture::kTagConditionedLstm: {
      LstmState state = LstmState::zeros(model.hidden_dim());
      cache.steps = run_lstm(*p.lstm, model.arch(), s, tag.values, state);
      cache.features = state.h;
      break;
    }
  }

  const Vector logit = dense_forward(p.classifier_w,
                                     std::span<const double>(&p.classifier_b, 1),
                                     cache.features);
  cache.probability = sigmoid(logit[0]);
  return {cache.probability, std::move(cache)};
}

double predict(const RelatednessModel& model, const SentenceMatrix& sentence,
               const TagEmbedding& tag) {
  return forward(model, sentence, tag).probability;
}

Gradients backward(const RelatednessModel& model, const ForwardCache& cache,
                   int label) {
  if (cache.model_version != model.version()) throw StaleCache();
  const ModelParams& p = model.params();
  const std::size_t d = model.embed_dim();
  const std::size_t n = cache.sequence_length;
  if (cache.features.size() != p.classifier_w.cols) {
    throw ShapeMismatch("forward cache does not match the model");
  }

  Gradients g{model.zero_like(), Tensor2(n, d)};
  const double d_logit = bce_grad_logit(cache.probability, label);
  const DenseGrads dense = dense_backward(
      p.classifier_w, cache.features, std::span<const double>(&d_logit, 1));
  g.params.classifier_w = dense.w;
  g.params.classifier_b = dense.b[0];

  switch (model.arch()) {
    case Architecture::kMeanPool: {
      const double scale = 1.0 / static_cast<double>(n);
      for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t k = 0; k < d; ++k) g.sentence(t, k) = dense.x[k] * scale;
      }
      break;
    }
    case Architecture::kLstmConcat:
    case Architecture::kTagConditionedLstm: {
      if (cache.steps.size() != n) {
        throw ShapeMismatch("forward cache has no LSTM steps");
      }
      const std::size_t hidden = model.hidden_dim();
      LstmGrads lg = lstm_backward(
          *p.lstm, cache.steps, std::span<const double>(dense.x.data(), hidden));
      const std::size_t offset =
          model.arch() == Architecture::kTagConditionedLstm ? d : 0;
      for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t k = 0; k < d; ++k) {
          g.sentence(t, k) = lg.inputs[t][offset + k];
        }
      }
      g.params.lstm->w_x = std::move(lg.w_x);
      g.params.lstm->w_h = std::move(lg.w_h);
      g.params.lstm->b = std::move(lg.b);
      break;
    }
  }
  return g;
}

void save_checkpoint(const RelatednessModel& model, std::ostream& out) {
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, architecture_id(model.arch()));
  put_u32(out, static_cast<std::uint32_t>(model.embed_dim()));
  put_u32(out, static_cast<std::uint32_t>(model.hidden_dim()));
  put_u64(out, model.seed());
  for (const auto& block : parameter_blocks(model.params())) {
    for (double x : block.values) put_u64(out, std::bit_cast<std::uint64_t>(x));
  }
  if (!out) throw std::runtime_error("failed to write checkpoint");
}

RelatednessModel load_checkpoint(std::istream& in) {
  std::array<char, 6> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() != static_cast<std::streamsize>(magic.size()) || magic != kMagic) {
    throw CorruptCheckpoint("not a zscat checkpoint (bad magic)");
  }
  const auto arch_id = static_cast<std::uint32_t>(get_u64(in, 4, "header"));
  const auto embed_dim = static_cast<std::size_t>(get_u64(in, 4, "header"));
  const auto hidden_dim = static_cast<std::size_t>(get_u64(in, 4, "header"));
  const std::uint64_t seed = get_u64(in, 8, "header");

  if (arch_id < 1 || arch_id > 3) {
    throw CorruptCheckpoint("unknown architecture id " + std::to_string(arch_id));
  }
  const Architecture arch = static_cast<Architecture>(arch_id);
  if (embed_dim == 0 || (arch == Architecture::kMeanPool) != (hidden_dim == 0)) {
    throw CorruptCheckpoint("checkpoint header has inconsistent dimensions");
  }

  ModelParams p = RelatednessModel::zeros(arch, embed_dim, hidden_dim).params();
  for (auto& block : parameter_blocks(p)) {
    for (double& x : block.values) {
      x = std::bit_cast<double>(get_u64(in, 8, block.name.c_str()));
      if (!std::isfinite(x)) {
        throw CorruptCheckpoint("non-finite value in " + block.name);
      }
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw CorruptCheckpoint("trailing bytes after the last parameter block");
  }
  return RelatednessModel::restore(arch, embed_dim, hidden_dim, seed, std::move(p));
}

void save_checkpoint_file(const RelatednessModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
  save_checkpoint(model, out);
}

RelatednessModel load_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path);
  return load_checkpoint(in);
}

}  // namespace zscat
