#include "zscat/cli.h"

#include <gtest/gtest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "zscat/architectures.h"
#include "zscat/embedding_store.h"

namespace zscat {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string bundled(const char* name) {
  return std::string(ZSCAT_DATA_DIR) + "/synthetic/" + name;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream(p, std::ios::binary) << content;
}

// Value of the last "key=value" token named `key` in the output.
double last_value(const std::string& text, const std::string& key) {
  const auto pos = text.rfind(key + "=");
  EXPECT_NE(pos, std::string::npos) << key << " missing in:\n" << text;
  if (pos == std::string::npos) return -1.0;
  return std::stod(text.substr(pos + key.size() + 1));
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / ("zscat_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
    trained_ = new Outcome(run_cli({"train", "--arch", "3", "--hidden", "16", "--epochs", "50",
                                "--batch-size", "16", "--learning-rate", "0.01",
                                "--seed", "1", "--test-fraction", "0",
                                "--embeddings", bundled("embeddings.txt"),
                                "--corpus", bundled("corpus.tsv"),
                                "--checkpoint", (dir_ / "arch3.ckpt").string()}));
  }
  static void TearDownTestSuite() {
    delete trained_;
    fs::remove_all(dir_);
  }

  static fs::path dir_;
  static Outcome* trained_;
};

fs::path CliTest::dir_;
Outcome* CliTest::trained_ = nullptr;

TEST_F(CliTest, TrainWritesCheckpointAndMetrics) {
  ASSERT_EQ(trained_->code, 0) << trained_->err;
  EXPECT_TRUE(fs::exists(dir_ / "arch3.ckpt"));
  EXPECT_GE(last_value(trained_->out, "accuracy"), 0.9);
  const std::string metrics = read_file(dir_ / "arch3.ckpt.metrics.tsv");
  EXPECT_TRUE(metrics.starts_with("epoch\tmean_loss\taccuracy\n"));
  EXPECT_EQ(std::count(metrics.begin(), metrics.end(), '\n'), 51);
  const auto model = load_checkpoint_file((dir_ / "arch3.ckpt").string());
  EXPECT_EQ(model.arch(), Architecture::kTagConditionedLstm);
  EXPECT_EQ(model.hidden_dim(), 16u);
}

TEST_F(CliTest, EvalClassifiesHeldOutSentences) {
  ASSERT_EQ(trained_->code, 0) << trained_->err;
  const Outcome r = run_cli({"eval", "--checkpoint", (dir_ / "arch3.ckpt").string(),
                         "--embeddings", bundled("embeddings.txt"),
                         "--tree", bundled("tree.txt"), "--dataset", bundled("dataset.tsv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_GE(last_value(r.out, "accuracy"), 0.9) << r.out;
}

TEST_F(CliTest, PredictPrintsEveryClass) {
  ASSERT_EQ(trained_->code, 0) << trained_->err;
  const Outcome r = run_cli({"predict", "--checkpoint", (dir_ / "arch3.ckpt").string(),
                         "--embeddings", bundled("embeddings.txt"),
                         "--tree", bundled("tree.txt"), "c2w01 c2w05 c2w07 c2w11 c2w03 c2w09"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("predicted=class2\n"), std::string::npos) << r.out;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 9);
}

TEST_F(CliTest, MissingCorpusIsAUsageError) {
  const Outcome r = run_cli({"train", "--embeddings", bundled("embeddings.txt"),
                         "--checkpoint", (dir_ / "x.ckpt").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--corpus"), std::string::npos) << r.err;
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"train", "--arch", "4"}).code, 2);
  EXPECT_EQ(run_cli({"eval", "--threshold", "1.5"}).code, 2);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
}

TEST_F(CliTest, UnreadableEmbeddingsIsADataError) {
  const Outcome r = run_cli({"train", "--embeddings", (dir_ / "missing.txt").string(),
                         "--corpus", bundled("corpus.tsv"),
                         "--checkpoint", (dir_ / "x.ckpt").string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_FALSE(r.err.empty());
}

TEST_F(CliTest, NonFiniteLossExitCode) {
  // Huge embedding values overflow the loss to NaN via inf - inf.
  write_file(dir_ / "huge.txt", "a 1e308 1e308\nb -1e308 1e308\nt 1e308 -1e308\nu 1 1\n");
  write_file(dir_ / "huge.tsv", "a a a b\tt\nb b\tu\n");
  const Outcome r = run_cli({"train", "--arch", "1", "--epochs", "2", "--test-fraction", "0",
                         "--learning-rate", "0.9",
                         "--embeddings", (dir_ / "huge.txt").string(),
                         "--corpus", (dir_ / "huge.tsv").string(),
                         "--checkpoint", (dir_ / "huge.ckpt").string()});
  EXPECT_EQ(r.code, 4) << r.out << r.err;
}

// A zero model with d = 2 over a small store holding the tweet tree tags.
struct ZeroModelFiles {
  fs::path checkpoint, embeddings, tree, dataset;
};

ZeroModelFiles zero_model_files(const fs::path& dir) {
  ZeroModelFiles f{dir / "zero.ckpt", dir / "tweet_emb.txt",
                   fs::path(ZSCAT_DATA_DIR) / "trees" / "tweet.tree", dir / "tweets.tsv"};
  save_checkpoint_file(RelatednessModel::zeros(Architecture::kMeanPool, 2, 0),
                       f.checkpoint.string());
  std::string emb;
  for (const char* w : {"health", "medicine", "doctor", "sports", "game", "football",
                        "entertainment", "movie", "actor", "business", "money",
                        "investment", "technology", "internet", "computer", "politics",
                        "election", "government", "visit", "the"}) {
    emb += std::string(w) + " 0.1 -0.2\n";
  }
  write_file(f.embeddings, emb);
  write_file(f.dataset, "the doctor visit\thealth\nthe football game\tsports\n");
  return f;
}

TEST_F(CliTest, EvalOnTweetTree) {
  const auto f = zero_model_files(dir_);
  const Outcome r = run_cli({"eval", "--checkpoint", f.checkpoint.string(),
                         "--embeddings", f.embeddings.string(), "--tree", f.tree.string(),
                         "--dataset", f.dataset.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* c : {"health", "sports", "entertainment", "business", "technology",
                        "politics"}) {
    EXPECT_NE(r.out.find(std::string("\n") + c + "\t"), std::string::npos) << c;
  }
  // Every class ties at 0.5, so the first class (health) is always chosen.
  EXPECT_NE(r.out.find("accuracy=0.5\n"), std::string::npos) << r.out;
}

TEST_F(CliTest, EvalPerfectAndEmptyMultilabel) {
  const auto f = zero_model_files(dir_);
  write_file(dir_ / "one.tree", "health: doctor, medicine\n");
  write_file(dir_ / "one.tsv", "the doctor visit\thealth\nthe game\thealth\n");
  const Outcome perfect = run_cli({"eval", "--checkpoint", f.checkpoint.string(),
                               "--embeddings", f.embeddings.string(),
                               "--tree", (dir_ / "one.tree").string(),
                               "--dataset", (dir_ / "one.tsv").string()});
  ASSERT_EQ(perfect.code, 0) << perfect.err;
  EXPECT_NE(perfect.out.find("accuracy=1.0\n"), std::string::npos) << perfect.out;

  const Outcome multi = run_cli({"eval", "--mode", "multilabel", "--threshold", "1.0",
                             "--checkpoint", f.checkpoint.string(),
                             "--embeddings", f.embeddings.string(),
                             "--tree", f.tree.string(), "--dataset", f.dataset.string()});
  ASSERT_EQ(multi.code, 0) << multi.err;
  EXPECT_NE(multi.out.find("accuracy=0.0\n"), std::string::npos) << multi.out;
}

TEST_F(CliTest, EvalUnknownLabelIsADataError) {
  const auto f = zero_model_files(dir_);
  write_file(dir_ / "bad.tsv", "the doctor\tcooking\n");
  const Outcome r = run_cli({"eval", "--checkpoint", f.checkpoint.string(),
                         "--embeddings", f.embeddings.string(), "--tree", f.tree.string(),
                         "--dataset", (dir_ / "bad.tsv").string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("cooking"), std::string::npos);
}

TEST_F(CliTest, PredictWithZeroModel) {
  const auto f = zero_model_files(dir_);
  const Outcome r = run_cli({"predict", "--checkpoint", f.checkpoint.string(),
                         "--embeddings", f.embeddings.string(), "--tree", f.tree.string(),
                         "the doctor visit"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  int scored = 0;
  while (std::getline(lines, line)) {
    if (line.starts_with("predicted=")) continue;
    EXPECT_TRUE(line.ends_with("\t0.5")) << line;
    ++scored;
  }
  EXPECT_EQ(scored, 6);

  const Outcome empty = run_cli({"predict", "--checkpoint", f.checkpoint.string(),
                             "--embeddings", f.embeddings.string(),
                             "--tree", f.tree.string(), " ... "});
  EXPECT_EQ(empty.code, 2);
}

TEST_F(CliTest, Gradcheck) {
  EXPECT_EQ(run_cli({"gradcheck"}).code, 0);
  for (int seed = 1; seed <= 5; ++seed) {
    const Outcome r = run_cli({"gradcheck", "--seed", std::to_string(seed)});
    EXPECT_EQ(r.code, 0) << r.out;
  }
  const Outcome bad = run_cli({"gradcheck", "--corrupt-backward"});
  EXPECT_EQ(bad.code, 5);
  EXPECT_NE(bad.out.find("classifier.w size="), std::string::npos);
  EXPECT_NE(bad.out.find("FAILED"), std::string::npos);
}

TEST_F(CliTest, IdenticalRunsWriteIdenticalFiles) {
  auto train_to = [&](const std::string& name) {
    return run_cli({"train", "--arch", "2", "--hidden", "4", "--epochs", "2", "--seed", "3",
                    "--embeddings", bundled("embeddings.txt"),
                    "--corpus", bundled("corpus.tsv"),
                    "--checkpoint", (dir_ / name).string()});
  };
  const Outcome a = train_to("a.ckpt");
  const Outcome b = train_to("b.ckpt");
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(read_file(dir_ / "a.ckpt"), read_file(dir_ / "b.ckpt"));
  EXPECT_EQ(read_file(dir_ / "a.ckpt.metrics.tsv"), read_file(dir_ / "b.ckpt.metrics.tsv"));
  EXPECT_NE(a.out.find("test_accuracy="), std::string::npos) << a.out;
}

TEST_F(CliTest, ConfigFileSuppliesFlags) {
  write_file(dir_ / "run.cfg",
             "arch=1\nepochs=3\nseed=4\nembeddings=" + bundled("embeddings.txt") +
                 "\ncorpus=" + bundled("corpus.tsv") +
                 "\ncheckpoint=" + (dir_ / "cfg.ckpt").string() + "\n");
  const Outcome r = run_cli({"train", "--config", (dir_ / "run.cfg").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("epoch=3 "), std::string::npos);
  EXPECT_EQ(load_checkpoint_file((dir_ / "cfg.ckpt").string()).arch(), Architecture::kMeanPool);
  // The written config replays the run.
  const std::string written = read_file(dir_ / "cfg.ckpt.config");
  EXPECT_NE(written.find("arch=1\n"), std::string::npos);
  EXPECT_NE(written.find("epochs=3\n"), std::string::npos);
}

TEST_F(CliTest, FineTunedEmbeddingsAreWrittenAndUsed) {
  const Outcome r = run_cli({"train", "--arch", "1", "--epochs", "2", "--fine-tune-embeddings",
                         "--embeddings", bundled("embeddings.txt"),
                         "--corpus", bundled("corpus.tsv"),
                         "--checkpoint", (dir_ / "ft.ckpt").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const fs::path tuned = dir_ / "ft.ckpt.sentence-embeddings.txt";
  ASSERT_TRUE(fs::exists(tuned));
  EXPECT_NE(read_file(tuned), read_file(bundled("embeddings.txt")));
  const Outcome p = run_cli({"predict", "--checkpoint", (dir_ / "ft.ckpt").string(),
                         "--embeddings", bundled("embeddings.txt"),
                         "--tree", bundled("tree.txt"), "c0w01 c0w02"});
  EXPECT_EQ(p.code, 0) << p.err;
}

}  // namespace
}  // namespace zscat
