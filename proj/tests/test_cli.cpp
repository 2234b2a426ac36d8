#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "arbc/image.hpp"
#include "arbc/store.hpp"

namespace fs = std::filesystem;
using namespace arbc;

namespace {

struct CliResult {
  int code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) out.push_back(line);
  return out;
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / ("arbc_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    // 24 train / 8 test synthetic images
    ASSERT_EQ(run("prep --synthetic -o " + (dir_ / "syn").string() + " --per-class 4 --train-count 24").code, 0);
  }

  static CliResult run(const std::string& args) {
    const fs::path out = dir_ / "stdout.txt", err = dir_ / "stderr.txt";
    const std::string cmd = std::string(ARBC_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  static std::string p(const std::string& name) { return (dir_ / name).string(); }
  static std::string train_manifest() { return p("syn/train.tsv"); }
  static std::string first_train_image() {
    const auto m = load_manifest(train_manifest());
    return m.resolve(m.entries.front()).string();
  }

  static fs::path dir_;
};

fs::path Cli::dir_;

}  // namespace

TEST_F(Cli, TrainWritesModelAndLossTrace) {
  const auto r = run("train " + train_manifest() + " -o " + p("model.txt") + " --epochs 30 --seed 3");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto trace = lines(slurp(p("model.txt.loss.tsv")));
  ASSERT_EQ(trace.size(), 30u);
  EXPECT_EQ(trace.front().rfind("1\t", 0), 0u);
  const double first = parse_double(trace.front().substr(trace.front().find('\t') + 1));
  const double last = parse_double(trace.back().substr(trace.back().find('\t') + 1));
  EXPECT_LT(last, first);
  EXPECT_EQ(load_model(p("model.txt")).layer_dims(), (std::vector<int>{376, 188, 376}));
}

TEST_F(Cli, TrainIsReproducibleGivenSeed) {
  ASSERT_EQ(run("train " + train_manifest() + " -o " + p("ma.txt") + " --epochs 5 --seed 9 --jobs 1").code, 0);
  ASSERT_EQ(run("train " + train_manifest() + " -o " + p("mb.txt") + " --epochs 5 --seed 9 --jobs 4").code, 0);
  EXPECT_EQ(slurp(p("ma.txt")), slurp(p("mb.txt")));
  EXPECT_EQ(slurp(p("ma.txt.loss.tsv")), slurp(p("mb.txt.loss.tsv")));
}

TEST_F(Cli, TrainErrors) {
  std::ofstream(p("empty.tsv")) << "# nothing\n";
  EXPECT_EQ(run("train " + p("empty.tsv") + " -o " + p("x.txt")).code, 2);
  EXPECT_EQ(run("train " + train_manifest() + " -o " + p("x.txt") + " --arch h/3").code, 64);
  EXPECT_EQ(run("train " + train_manifest() + " -o " + p("x.txt") + " --size 48").code, 64);
  EXPECT_EQ(run("train " + train_manifest() + " -o " + p("x.txt") + " --lr 0").code, 64);
  EXPECT_EQ(run("train " + p("missing.tsv") + " -o " + p("x.txt")).code, 2);
  EXPECT_EQ(run("frobnicate").code, 64);
}

TEST_F(Cli, EncodeRbcLength) {
  const auto r = run("encode " + train_manifest() + " -o " + p("rbc16.idx") + " --angles 16");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto index = load_index(p("rbc16.idx"));
  EXPECT_EQ(index.size(), 24u);
  for (const auto& rec : index.records()) EXPECT_EQ(rec.barcode.length(), 752u);
  EXPECT_EQ(index.params(), (EncodingParams{32, 16}));
}

TEST_F(Cli, EncodeArbc) {
  ASSERT_EQ(run("train " + train_manifest() + " -o " + p("m2.txt") + " --epochs 2").code, 0);
  EXPECT_EQ(run("encode " + train_manifest() + " -o " + p("a.idx") + " --method arbc:1").code, 64);
  const auto r = run("encode " + train_manifest() + " -o " + p("a.idx") + " --method arbc:1 --model " + p("m2.txt"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(load_index(p("a.idx")).barcode_length(), 188u);
  // model trained for 8 angles cannot encode 16-angle features
  EXPECT_EQ(run("encode " + train_manifest() + " -o " + p("b.idx") + " --angles 16 --method arbc:1 --model " +
                p("m2.txt"))
                .code,
            2);
  EXPECT_EQ(run("encode " + train_manifest() + " -o " + p("b.idx") + " --method arbc:2 --model " + p("m2.txt")).code, 2);
}

TEST_F(Cli, SearchSelfRetrievalAndTruncation) {
  ASSERT_EQ(run("encode " + train_manifest() + " -o " + p("s.idx")).code, 0);
  const auto query = first_train_image();
  const auto r = run("search " + p("s.idx") + " " + query + " -k 3");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto hits = lines(r.out);
  ASSERT_EQ(hits.size(), 3u);
  EXPECT_EQ(hits[0], "1\tsyn0000\t0");

  const auto full = load_index(p("s.idx"));
  BarcodeIndex two(full.barcode_length(), {}, {32, 8});
  for (std::size_t i = 0; i < 2; ++i) two.add(full.records()[i].image_id, full.records()[i].barcode);
  save_index(two, p("two.idx"));
  EXPECT_EQ(lines(run("search " + p("two.idx") + " " + query + " -k 3").out).size(), 2u);
}

TEST_F(Cli, SearchRejectsConfigMismatch) {
  ASSERT_EQ(run("encode " + train_manifest() + " -o " + p("s16.idx") + " --angles 16").code, 0);
  const auto query = first_train_image();
  EXPECT_EQ(run("search " + p("s16.idx") + " " + query + " --angles 8").code, 2);
  const auto r = run("search " + p("s16.idx") + " " + query);
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines(r.out).front(), "1\tsyn0000\t0");
}

TEST_F(Cli, SearchLsh) {
  ASSERT_EQ(run("encode " + train_manifest() + " -o " + p("l.idx") + " --lsh").code, 0);
  ASSERT_TRUE(fs::exists(p("l.idx.lsh")));
  const auto query = first_train_image();
  const auto r = run("search " + p("l.idx") + " " + query + " --lsh -k 1");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines(r.out).front(), "1\tsyn0000\t0");

  // an index whose only barcode is the complement of the query never shares a bucket
  const auto query_bits = load_index(p("l.idx")).records().front().barcode;
  std::string flipped = query_bits.bits.to_string();
  for (char& c : flipped) c = c == '0' ? '1' : '0';
  BarcodeIndex far(flipped.size(), {}, {32, 8});
  far.add("far", Barcode{BitVector::from_string(flipped), {}});
  save_index(far, p("far.idx"));
  const auto none = run("search " + p("far.idx") + " " + query + " --lsh --no-fallback");
  EXPECT_EQ(none.code, 0);
  EXPECT_TRUE(none.out.empty());
  EXPECT_NE(none.err.find("warning"), std::string::npos);
  const auto fallback = run("search " + p("far.idx") + " " + query + " --lsh");
  EXPECT_EQ(fallback.code, 0);
  EXPECT_EQ(lines(fallback.out).size(), 1u);
}

TEST_F(Cli, EvaluateSelfIsZeroAndReportIsAdditive) {
  const auto self = run("evaluate " + train_manifest() + " " + train_manifest() + " -o " + p("self.tsv"));
  ASSERT_EQ(self.code, 0) << self.err;
  EXPECT_EQ(parse_report(slurp(p("self.tsv"))).total_error, 0.0);

  const auto r = run("evaluate " + train_manifest() + " " + p("syn/test.tsv") + " -o " + p("report.tsv"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = parse_report(slurp(p("report.tsv")));
  EXPECT_EQ(report.num_images(), 8u);
  double sum = 0;
  for (const auto& [id, e] : report.per_image_errors) sum += e;
  EXPECT_NEAR(report.total_error, sum, 1e-12);
}

TEST_F(Cli, EvaluateWithSuppliedBranchingTable) {
  std::string table;
  for (int axis = 1; axis <= 4; ++axis)
    for (int pos = 1; pos <= 4; ++pos) table += std::to_string(axis) + "\t" + std::to_string(pos) + "\t10\n";
  std::ofstream(p("branch.tsv")) << table;
  const auto r = run("evaluate " + train_manifest() + " " + p("syn/test.tsv") + " --branching-table " + p("branch.tsv"));
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("TOTAL\t", 0), 0u);

  const auto manifest = load_manifest(train_manifest());
  std::string no_codes;
  for (const auto& e : manifest.entries) no_codes += e.image_id + "\t" + manifest.resolve(e).string() + "\n";
  std::ofstream(p("nocodes.tsv")) << no_codes;
  EXPECT_EQ(run("evaluate " + p("nocodes.tsv") + " " + train_manifest()).code, 2);
}

TEST_F(Cli, BenchRepeat) {
  const auto r = run("bench " + train_manifest() + " --repeat 5 --methods rbc");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].rfind("rbc-encode\t", 0), 0u);
  EXPECT_NE(rows[1].find("\t5\t24"), std::string::npos);
  EXPECT_EQ(run("bench " + train_manifest() + " --methods xyz").code, 64);
}

TEST_F(Cli, PrepNormalizesManifest) {
  const auto r = run("prep " + train_manifest() + " -o " + p("prepped") + " --size 32");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto prepped = load_manifest(p("prepped/manifest.tsv"));
  ASSERT_EQ(prepped.entries.size(), 24u);
  const auto raster = load_grayscale(prepped.resolve(prepped.entries.front()));
  EXPECT_EQ(raster.width, 32);
  EXPECT_EQ(raster.height, 32);
  EXPECT_EQ(prepped.entries.front().irma_code, load_manifest(train_manifest()).entries.front().irma_code);
}
