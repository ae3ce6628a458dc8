#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::path(::testing::TempDir()) / "bilex_cli";
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    fs::copy_file(fs::path(BILEX_TEST_DATA) / "toy_corpus.txt", dir_ / "corpus.txt");
    fs::copy_file(fs::path(BILEX_TEST_DATA) / "toy_corpus.conll", dir_ / "corpus.conll");
    ASSERT_EQ(run("build-repr --corpus corpus.txt --window 3 --dim 40 --weighting log1p -o repr.vec"), 0);
    ASSERT_EQ(run("extract-pairs --conll corpus.conll --pattern 'NN*:JJ*:amod:head' -o pairs.tsv"), 0);
    ASSERT_EQ(run("--seed 3 split --pairs pairs.tsv --out-prefix ds"), 0);
    ASSERT_EQ(run("--seed 3 train --repr repr.vec --data ds --tau 10 --step0 0.05 --epochs 10 --batch 20 -o model.bin"), 0);
  }

  static int run(const std::string& args) {
    const std::string cmd = "cd \"" + dir_.string() + "\" && \"" BILEX_CLI "\" " + args + " >>out.txt 2>>err.txt";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  static std::string read(const std::string& name) {
    std::ifstream in(dir_ / name, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  static void write(const std::string& name, const std::string& text) {
    std::ofstream(dir_ / name, std::ios::binary) << text;
  }

  static fs::path dir_;
};

fs::path Cli::dir_;

}  // namespace

TEST_F(Cli, PipelineArtifactsExist) {
  for (const char* f : {"repr.vec", "pairs.tsv", "ds.train.tsv", "ds.dev.tsv", "ds.test.tsv", "ds.candidates.txt",
                        "model.bin"})
    EXPECT_TRUE(fs::exists(dir_ / f)) << f;
  EXPECT_NE(read("pairs.tsv").find("car\t"), std::string::npos);
}

TEST_F(Cli, EvalWritesCsvAndJson) {
  ASSERT_EQ(run("eval --model model.bin --repr repr.vec --data ds --label toy -o r.csv"), 0);
  EXPECT_EQ(read("r.csv").rfind("label,accuracy,ops,model_desc\ntoy,", 0), 0u);
  ASSERT_EQ(run("--format json eval --model model.bin --repr repr.vec --data ds -o r.json"), 0);
  EXPECT_EQ(read("r.json").front(), '[');
}

TEST_F(Cli, UnsupervisedSweepAndCurve) {
  ASSERT_EQ(run("eval-unsup --repr repr.vec --k 3 --data ds -o u.csv"), 0);
  ASSERT_EQ(run("eval --model model.bin --repr repr.vec --data ds -o s.csv"), 0);
  ASSERT_EQ(run("curve --reports u.csv s.csv -o curve.csv"), 0);
  EXPECT_EQ(read("curve.csv").rfind("ops,accuracy,label\n", 0), 0u);
  ASSERT_EQ(run("--seed 3 sweep --repr repr.vec --data ds --taus 0.1,10 --regularizers nuclear,l1 --epochs 3 --step0 0.05 "
                "--model-dir sweep -o sweep.csv"),
            0);
  EXPECT_TRUE(fs::exists(dir_ / "sweep" / "nuclear-tau10.model"));
}

TEST_F(Cli, RankingCommands) {
  ASSERT_EQ(run("top-candidates --model model.bin --repr repr.vec --data ds --query car --top-k 3 -o top.txt"), 0);
  EXPECT_FALSE(read("top.txt").empty());
  ASSERT_EQ(run("export-embeddings --model model.bin --repr repr.vec --side query -o q.vec"), 0);
  ASSERT_EQ(run("neighbors --embeddings q.vec --word car --top-k 3 -o nb.txt"), 0);
  EXPECT_FALSE(read("nb.txt").empty());
}

TEST_F(Cli, ErrorsExitWithStatusOne) {
  write("bad.tsv", "red car\n");
  EXPECT_EQ(run("split --pairs bad.tsv --out-prefix bad"), 1);
  EXPECT_NE(read("err.txt").find("line 1"), std::string::npos);
  EXPECT_EQ(run("neighbors --embeddings repr.vec --word nosuchword"), 1);
  write("other.vec", "1 2\ncar 1 0\n");
  EXPECT_EQ(run("eval --model model.bin --repr other.vec --data ds"), 1);
}

TEST_F(Cli, UsageErrorsAreRejected) {
  EXPECT_NE(run("train --data ds"), 0);
  EXPECT_NE(run("no-such-command"), 0);
}
