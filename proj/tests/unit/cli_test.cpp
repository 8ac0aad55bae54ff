#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>
#include <sys/wait.h>

#include "bass/cli.hpp"
#include "bass/io.hpp"
#include "bass/synthgen.hpp"
#include "bass/topicmodel.hpp"
#include "support.hpp"

using namespace bass;
using nlohmann::json;
using testing_support::TempDir;

namespace {

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

RunResult run(std::vector<std::string> args) {
  args.insert(args.begin(), "bass");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(args.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

int run_binary(const std::string& args) {
  const std::string cmd = std::string(BASS_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_corpus(const std::filesystem::path& path, int per_topic = 8) {
  save_corpus(Corpus(testing_support::three_topic_docs(per_topic, 1)), path);
}

}  // namespace

TEST(Cli, EvalClustersCsvAndJson) {
  TempDir dir;
  io::write_file(dir / "pred.jsonl", "{\"id\":\"a\",\"label\":\"x\"}\n{\"id\":\"b\",\"label\":\"x\"}\n{\"id\":\"c\",\"label\":\"y\"}\n");
  io::write_file(dir / "gold.jsonl", "{\"doc_id\":\"a\",\"label\":\"1\"}\n{\"doc_id\":\"b\",\"label\":\"1\"}\n{\"doc_id\":\"c\",\"label\":\"2\"}\n");
  auto r = run({"eval-clusters", "--pred", (dir / "pred.jsonl").string(), "--gold", (dir / "gold.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "metric,value\npurity,1\nari,1\nnmi,1\n");
  r = run({"eval-clusters", "--pred", (dir / "pred.jsonl").string(), "--gold", (dir / "gold.jsonl").string(), "--json"});
  EXPECT_EQ(json::parse(r.out), json({{"purity", 1.0}, {"ari", 1.0}, {"nmi", 1.0}}));
  r = run({"eval-clusters", "--pred", (dir / "pred.jsonl").string(), "--gold", (dir / "gold.jsonl").string(), "--out",
           (dir / "m.csv").string()});
  EXPECT_EQ(io::read_file(dir / "m.csv"), "metric,value\npurity,1\nari,1\nnmi,1\n");
}

TEST(Cli, IngestReport) {
  TempDir dir;
  io::write_file(dir / "c.csv", "id,text,label\n1,\"red apples, green apples\",fruit\n2,apples and pears,fruit\n");
  auto r = run({"ingest", "--input", (dir / "c.csv").string(), "--min-df", "1", "--json", "--out", (dir / "c.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["documents"], 2);
  EXPECT_EQ(j["labeled"], 2);
  const auto c = load_corpus(dir / "c.jsonl", CorpusOptions{1});
  EXPECT_EQ(c.document(0).text, "red apples, green apples");
}

TEST(Cli, LdaIsReproducible) {
  TempDir dir;
  write_corpus(dir / "c.jsonl");
  for (const char* name : {"a.json", "b.json"}) {
    auto r = run({"lda", "--corpus", (dir / "c.jsonl").string(), "--topics", "3", "--sweeps", "30", "--seed", "4", "--out",
                  (dir / name).string(), "--json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = json::parse(r.out);
    EXPECT_EQ(j["top_words"].size(), 3u);
    EXPECT_TRUE(j.contains("baseline"));
  }
  EXPECT_EQ(io::read_file(dir / "a.json"), io::read_file(dir / "b.json"));
  const auto m = load_model(dir / "a.json");
  EXPECT_EQ(m.num_topics, 3);
  EXPECT_EQ(m.seed, 4u);
}

TEST(Cli, SimulateDefaultsAndOutput) {
  TempDir dir;
  write_corpus(dir / "c.jsonl", 5);
  ASSERT_EQ(run({"lda", "--corpus", (dir / "c.jsonl").string(), "--topics", "3", "--sweeps", "20", "--out",
                 (dir / "m.json").string()})
                .code,
            0);
  auto r = run({"simulate", "--corpus", (dir / "c.jsonl").string(), "--model", (dir / "m.json").string(), "--json",
                "--out", (dir / "sim.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["budget"], 200);
  EXPECT_EQ(j["iterations"], 5);
  EXPECT_EQ(j["steps"], 15);  // corpus smaller than the budget
  const auto csv = io::parse_csv(io::read_file(dir / "sim.csv"));
  EXPECT_EQ(csv.size(), 1u + 5u * 15u + 15u);
  EXPECT_DOUBLE_EQ(j["final_median"]["purity"].get<double>(), 1.0);
}

TEST(Cli, BtAndAlpha) {
  TempDir dir;
  io::write_file(dir / "duels.csv",
                 "question,group_a,group_b,winner\n"
                 "q1,A,B,A\nq2,A,B,A\nq3,A,B,A\nq4,A,B,B\n"
                 "q1,B,C,B\nq2,B,C,B\nq3,B,C,C\nq1,A,C,A\n");
  auto r = run({"bt", "--duels", (dir / "duels.csv").string(), "--json", "--out", (dir / "bt.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = json::parse(r.out);
  EXPECT_EQ(j["ranking"], json::array({"A", "B", "C"}));
  EXPECT_EQ(j["duels"], 8);
  EXPECT_TRUE(j["converged"].get<bool>());
  EXPECT_EQ(json::parse(io::read_file(dir / "bt.json")), j);

  io::write_file(dir / "ratings.csv", "item,annotator,label\n1,a,x\n1,b,x\n2,a,y\n2,b,y\n3,a,x\n3,b,y\n");
  r = run({"alpha", "--ratings", (dir / "ratings.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = io::parse_csv(r.out);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1][0], "krippendorff_alpha");
  EXPECT_EQ(rows[2], (io::CsvRow{"ratings", "6"}));
}

TEST(Cli, GenScifiWritesCorpusAndMetadata) {
  TempDir dir;
  const auto cfg = (testing_support::source_dir() / "tests/data/scifi_small.json").string();
  auto r = run({"gen-scifi", "--config", cfg, "--out", (dir / "gen").string(), "--max-docs", "6", "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = io::read_file(dir / "gen/corpus.jsonl");
  EXPECT_EQ(std::count(lines.begin(), lines.end(), '\n'), 6);
  const auto meta = json::parse(io::read_file(dir / "gen/metadata.json"));
  EXPECT_EQ(meta["generated"], 6);
  EXPECT_EQ(meta["backend"], "mock-scifi");
  const auto corpus = load_corpus(dir / "gen/corpus.jsonl", CorpusOptions{1});
  EXPECT_TRUE(corpus.fully_labeled());

  EXPECT_NE(run({"gen-scifi", "--config", cfg}).code, 0);  // --out is required
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run({"no-such-command"}).code, 1);
  EXPECT_EQ(run({"eval-clusters", "--pred", "x"}).code, 1);
  EXPECT_EQ(run({"lda", "--corpus", "/nonexistent/c.jsonl"}).code, 2);
  EXPECT_EQ(run({"lda", "--corpus", "/nonexistent/c.jsonl", "--topics", "many"}).code, 1);
  EXPECT_EQ(run({"--help"}).code, 0);

  EXPECT_EQ(run_binary("--help"), 0);
  EXPECT_EQ(run_binary("ingest --bogus-flag"), 1);
  EXPECT_EQ(run_binary("ingest --input /nonexistent/file.jsonl"), 2);
}

TEST(Cli, ValidationErrorsExitOne) {
  TempDir dir;
  io::write_file(dir / "dup.jsonl", "{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"a\",\"text\":\"y\"}\n");
  const auto r = run({"ingest", "--input", (dir / "dup.jsonl").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(r.err.empty());
}
