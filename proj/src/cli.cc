#include "zscat/cli.h"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "zscat/architectures.h"
#include "zscat/datasets.h"
#include "zscat/embedding_store.h"
#include "zscat/errors.h"
#include "zscat/gradcheck.h"
#include "zscat/training.h"
#include "zscat/zeroshot_inference.h"

namespace zscat::cli {
namespace {

struct RunConfig {
  int arch = 1;
  std::size_t hidden_dim = kDefaultHiddenDim;
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  double learning_rate = 0.001;
  double threshold = kDefaultThreshold;
  double test_fraction = 0.1;
  std::size_t target_length = kDefaultTargetLength;
  std::string oov = "zero";
  bool fine_tune_embeddings = false;
  std::string mode = "single";
  std::string embeddings;
  std::string corpus;
  std::string tree;
  std::string dataset;
  std::string dataset_format = "auto";
  std::string checkpoint;
  std::string metrics;
  std::vector<std::string> sentence;
  bool corrupt_backward = false;
};

// Signals a usage problem detected after flag parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  std::string s(buf, ptr);
  if (s.find_first_of(".en") == std::string::npos) s += ".0";
  return s;
}

void require_path(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string("missing required flag ") + flag);
}

std::string sidecar(const std::string& checkpoint, const char* suffix) {
  return checkpoint + suffix;
}

EmbeddingStore load_store(const RunConfig& cfg) {
  EmbeddingStore store = load_embeddings_file(cfg.embeddings);
  store.set_oov_policy(cfg.oov == "skip" ? OovPolicy::kSkip : OovPolicy::kZero);
  return store;
}

void write_config(const RunConfig& cfg, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "arch=" << cfg.arch << '\n'
      << "hidden=" << cfg.hidden_dim << '\n'
      << "epochs=" << cfg.epochs << '\n'
      << "batch-size=" << cfg.batch_size << '\n'
      << "seed=" << cfg.seed << '\n'
      << "learning-rate=" << format_double(cfg.learning_rate) << '\n'
      << "test-fraction=" << format_double(cfg.test_fraction) << '\n'
      << "target-length=" << cfg.target_length << '\n'
      << "oov=" << cfg.oov << '\n'
      << "fine-tune-embeddings=" << (cfg.fine_tune_embeddings ? "true" : "false") << '\n'
      << "embeddings=" << cfg.embeddings << '\n'
      << "corpus=" << cfg.corpus << '\n';
}

int cmd_train(const RunConfig& cfg, std::ostream& out) {
  require_path(cfg.embeddings, "--embeddings");
  require_path(cfg.corpus, "--corpus");
  require_path(cfg.checkpoint, "--checkpoint");
  if (cfg.test_fraction < 0.0 || cfg.test_fraction >= 1.0) {
    throw UsageError("--test-fraction must lie in [0, 1)");
  }

  const EmbeddingStore store = load_store(cfg);
  const ParsedCorpus parsed = parse_corpus_file(cfg.corpus);
  if (parsed.corpus.empty()) throw Error("corpus " + cfg.corpus + " has no usable records");

  Corpus train_side;
  std::optional<CorpusSplit> split;
  if (cfg.test_fraction > 0.0) {
    split = split_corpus(parsed.corpus, cfg.test_fraction, cfg.seed);
    train_side = split->train;
  } else {
    train_side = parsed.corpus;
  }

  RelatednessModel model = RelatednessModel::create(
      architecture_from_id(static_cast<std::uint32_t>(cfg.arch)), store.dim(),
      cfg.hidden_dim, cfg.seed);
  TrainConfig tc;
  tc.epochs = cfg.epochs;
  tc.batch_size = cfg.batch_size;
  tc.adam.lr = cfg.learning_rate;
  tc.seed = cfg.seed;
  tc.fine_tune_embeddings = cfg.fine_tune_embeddings;
  tc.target_length = cfg.target_length;
  const TrainResult result = train(model, store, train_side, tc);

  save_checkpoint_file(model, cfg.checkpoint);
  const std::string metrics_path =
      cfg.metrics.empty() ? sidecar(cfg.checkpoint, ".metrics.tsv") : cfg.metrics;
  {
    std::ofstream metrics(metrics_path, std::ios::trunc);
    if (!metrics) throw std::runtime_error("cannot write " + metrics_path);
    metrics << "epoch\tmean_loss\taccuracy\n";
    for (const auto& e : result.epochs) {
      metrics << e.epoch << '\t' << format_double(e.mean_loss) << '\t'
              << format_double(e.accuracy) << '\n';
    }
  }
  write_config(cfg, sidecar(cfg.checkpoint, ".config"));
  const std::string tuned_path = sidecar(cfg.checkpoint, ".sentence-embeddings.txt");
  if (result.sentence_embeddings) {
    std::ofstream tuned(tuned_path, std::ios::trunc);
    if (!tuned) throw std::runtime_error("cannot write " + tuned_path);
    write_embeddings_text(tuned, *result.sentence_embeddings);
  } else {
    std::filesystem::remove(tuned_path);
  }

  out << "records=" << train_side.size() << " dropped_records="
      << parsed.dropped_records + result.dropped_records
      << " dropped_tags=" << result.dropped_tags << '\n';
  for (const auto& e : result.epochs) {
    out << "epoch=" << e.epoch << " loss=" << format_double(e.mean_loss)
        << " accuracy=" << format_double(e.accuracy) << '\n';
  }
  if (split) {
    const VocabularyFilter test = restrict_to_vocabulary(split->test, store);
    if (!test.corpus.empty() && test.corpus.tag_vocabulary().size() > 1) {
      try {
        const auto pairs = sample_pairs(test.corpus, cfg.seed);
        const EmbeddingStore* sentences =
            result.sentence_embeddings ? &*result.sentence_embeddings : nullptr;
        const BinaryMetrics m = evaluate_binary(model, store, test.corpus, pairs,
                                                cfg.target_length, sentences);
        out << "test_accuracy=" << format_double(m.accuracy)
            << " test_loss=" << format_double(m.loss) << " test_pairs=" << m.count << '\n';
        const auto unseen = unseen_tag_pairs(pairs, train_side);
        if (!unseen.empty()) {
          const BinaryMetrics u = evaluate_binary(model, store, test.corpus, unseen,
                                                  cfg.target_length, sentences);
          out << "unseen_tag_accuracy=" << format_double(u.accuracy)
              << " unseen_tag_pairs=" << u.count << '\n';
        }
      } catch (const DegenerateVocabulary& e) {
        out << "test evaluation skipped: " << e.what() << '\n';
      }
    }
  }
  out << "checkpoint=" << cfg.checkpoint << '\n';
  return kOk;
}

struct InferenceSetup {
  RelatednessModel model;
  EmbeddingStore tags;
  std::optional<EmbeddingStore> sentences;
  CategoryTree tree;

  EmbeddingSpaces spaces() const {
    return sentences ? EmbeddingSpaces(*sentences, tags) : EmbeddingSpaces(tags);
  }
};

InferenceSetup load_inference(const RunConfig& cfg) {
  require_path(cfg.checkpoint, "--checkpoint");
  require_path(cfg.embeddings, "--embeddings");
  require_path(cfg.tree, "--tree");
  InferenceSetup setup{load_checkpoint_file(cfg.checkpoint), load_store(cfg), {},
                       parse_category_tree_file(cfg.tree)};
  const std::string tuned = sidecar(cfg.checkpoint, ".sentence-embeddings.txt");
  if (std::filesystem::exists(tuned)) {
    setup.sentences = load_embeddings_file(tuned, EmbeddingFormat::kText);
  }
  if (setup.tags.dim() != setup.model.embed_dim()) {
    throw ShapeMismatch("checkpoint expects " + std::to_string(setup.model.embed_dim()) +
                        "-dimensional embeddings, " + cfg.embeddings + " has " +
                        std::to_string(setup.tags.dim()));
  }
  return setup;
}

EvalMode parse_mode(const std::string& mode) {
  return mode == "multilabel" ? EvalMode::kMultilabel : EvalMode::kSingle;
}

int cmd_eval(const RunConfig& cfg, std::ostream& out) {
  require_path(cfg.dataset, "--dataset");
  const InferenceSetup setup = load_inference(cfg);
  DatasetFormat format = DatasetFormat::kTsv;
  if (cfg.dataset_format == "uci" ||
      (cfg.dataset_format == "auto" && cfg.dataset.ends_with(".csv"))) {
    format = DatasetFormat::kUciCsv;
  }
  const LabeledDataset dataset = parse_labeled_dataset_file(cfg.dataset, format);
  const EvalMode mode = parse_mode(cfg.mode);
  const EvaluationReport report =
      evaluate_dataset(setup.model, setup.spaces(), dataset, setup.tree, mode,
                       cfg.threshold, cfg.target_length);

  out << "mode=" << cfg.mode << '\n';
  if (mode == EvalMode::kMultilabel) out << "threshold=" << format_double(cfg.threshold) << '\n';
  out << "class\tprecision\trecall\ttp\tfp\tfn\n";
  for (const auto& [name, c] : report.per_class) {
    out << name << '\t' << format_double(c.precision()) << '\t'
        << format_double(c.recall()) << '\t' << c.true_positives << '\t'
        << c.false_positives << '\t' << c.false_negatives << '\n';
  }
  out << "items=" << report.count << " correct=" << report.correct << '\n';
  out << "accuracy=" << format_double(report.accuracy) << '\n';
  return kOk;
}

int cmd_predict(const RunConfig& cfg, std::ostream& out) {
  std::string sentence;
  for (const auto& part : cfg.sentence) {
    if (!sentence.empty()) sentence.push_back(' ');
    sentence += part;
  }
  if (tokenize(sentence).empty()) throw EmptySentence();
  const InferenceSetup setup = load_inference(cfg);
  const ClassScores scores =
      class_scores(setup.model, setup.spaces(), sentence, setup.tree, cfg.target_length);
  for (const auto& s : scores) out << s.name << '\t' << format_double(s.score) << '\n';
  if (parse_mode(cfg.mode) == EvalMode::kMultilabel) {
    std::string joined;
    for (const auto& name : classify_multilabel(scores, cfg.threshold)) {
      if (!joined.empty()) joined.push_back(',');
      joined += name;
    }
    out << "predicted=" << joined << '\n';
  } else {
    out << "predicted=" << classify_single(scores) << '\n';
  }
  return kOk;
}

int cmd_gradcheck(const RunConfig& cfg, bool arch_given, std::ostream& out) {
  GradcheckOptions options;
  options.corrupt_backward = cfg.corrupt_backward;
  bool ok = true;
  for (std::uint32_t id = 1; id <= 3; ++id) {
    if (arch_given && static_cast<int>(id) != cfg.arch) continue;
    const GradcheckReport report = run_gradcheck(architecture_from_id(id), cfg.seed, options);
    for (const auto& block : report.blocks) {
      const bool block_ok = block.max_relative_error < kGradcheckTolerance;
      out << "arch=" << id << " block=" << block.name << " size=" << block.size
          << " max_rel_error=" << block.max_relative_error
          << (block_ok ? " ok" : " FAILED") << '\n';
      ok = ok && block_ok;
    }
  }
  out << (ok ? "gradcheck passed" : "gradcheck failed") << '\n';
  return ok ? kOk : kGradcheckFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Zero-shot text categorization by sentence-tag relatedness", "zscat"};
  app.set_config("--config", "", "key=value file with default flag values");
  app.require_subcommand(1);

  auto* arch_opt = app.add_option("--arch", cfg.arch, "Architecture 1, 2 or 3")
                       ->check(CLI::Range(1, 3));
  app.add_option("--embeddings", cfg.embeddings, "Pretrained embeddings (.bin = word2vec binary)");
  app.add_option("--corpus", cfg.corpus, "Training corpus: sentence<TAB>tag, tag, ...");
  app.add_option("--tree", cfg.tree, "Category tree: class: tag, tag, ...");
  app.add_option("--dataset", cfg.dataset, "Labeled dataset (TSV or UCI CSV)");
  app.add_option("--dataset-format", cfg.dataset_format, "auto, tsv or uci")
      ->check(CLI::IsMember({"auto", "tsv", "uci"}));
  app.add_option("--checkpoint", cfg.checkpoint, "Model checkpoint path");
  app.add_option("--metrics", cfg.metrics, "Per-epoch metrics file (default <checkpoint>.metrics.tsv)");
  app.add_option("--epochs", cfg.epochs, "Training epochs")->check(CLI::NonNegativeNumber);
  app.add_option("--batch-size", cfg.batch_size, "Minibatch size")->check(CLI::PositiveNumber);
  app.add_option("--seed", cfg.seed, "Random seed");
  app.add_option("--learning-rate", cfg.learning_rate, "Adam learning rate")
      ->check(CLI::PositiveNumber);
  app.add_option("--threshold", cfg.threshold, "Relatedness threshold for multilabel decisions")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--test-fraction", cfg.test_fraction, "Held-out share of the corpus (0 disables)")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--mode", cfg.mode, "single or multilabel")
      ->check(CLI::IsMember({"single", "multilabel"}));
  app.add_option("--hidden", cfg.hidden_dim, "LSTM hidden size")->check(CLI::PositiveNumber);
  app.add_option("--target-length", cfg.target_length, "Tokens per sentence")
      ->check(CLI::PositiveNumber);
  app.add_option("--oov", cfg.oov, "Out-of-vocabulary sentence words")
      ->check(CLI::IsMember({"zero", "skip"}));
  app.add_flag("--fine-tune-embeddings", cfg.fine_tune_embeddings,
               "Update sentence-side word vectors during training");

  auto* train_cmd = app.add_subcommand("train", "Train a relatedness model")->fallthrough();
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate on a labeled dataset")->fallthrough();
  auto* predict_cmd = app.add_subcommand("predict", "Score one sentence against a tree")->fallthrough();
  predict_cmd->add_option("sentence", cfg.sentence, "Sentence text")->required();
  auto* gradcheck_cmd =
      app.add_subcommand("gradcheck", "Compare backprop against finite differences")->fallthrough();
  gradcheck_cmd->add_flag("--corrupt-backward", cfg.corrupt_backward)->group("");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(cfg, out);
    if (eval_cmd->parsed()) return cmd_eval(cfg, out);
    if (predict_cmd->parsed()) return cmd_predict(cfg, out);
    if (gradcheck_cmd->parsed()) return cmd_gradcheck(cfg, arch_opt->count() > 0, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const EmptySentence& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const NonFiniteLoss& e) {
    err << "error: " << e.what() << '\n';
    return kNumericFailure;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

}  // namespace zscat::cli
