#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const fs::path kDir = TEST_SCRATCH;

std::string path(const std::string& name) { return (kDir / name).string(); }

void write(const std::string& name, const std::string& text) {
  fs::create_directories(kDir);
  std::ofstream(path(name), std::ios::binary) << text;
}

std::string read(const std::string& name) {
  std::ifstream in(path(name), std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// Runs the CLI with stdout and stderr captured to files; returns the exit code.
int run(const std::string& args) {
  const std::string cmd = std::string("cd '") + kDir.string() + "' && '" FLUENCY_CLI "' " + args +
                          " > stdout.txt 2> stderr.txt";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::size_t data_lines(const std::string& text) {
  std::size_t n = 0;
  for (std::size_t pos = 0; (pos = text.find('\n', pos)) != std::string::npos; ++pos) ++n;
  return n - 1;  // header
}

void fixture() {
  std::string corpus;
  const char* sentences[] = {"the cat sat on the mat", "a dog ran in the park", "the dog sat on a mat",
                             "a cat ran in the park", "the big dog sat", "the small cat ran"};
  for (int i = 0; i < 20; ++i) corpus += std::string(sentences[i % 6]) + "\n";
  write("c.txt", corpus);
  std::string data;
  const char* outputs[] = {"the cat sat on the mat", "mat the on sat cat the", "a dog ran",
                           "ran dog a the", "the small cat ran in the park", "park park park",
                           "the dog sat", "sat the dog", "a big cat", "cat big a", "the mat", "mat the"};
  for (int i = 0; i < 12; ++i) {
    data += R"({"id":"r)" + std::to_string(100 + i) + R"(","system":")" + (i % 2 ? "B" : "A") +
            R"(","domain":"d","output":")" + outputs[i] + R"(","references":["the cat sat on the mat","a dog ran in the park"],"fluency_ratings":[)" +
            (i % 2 ? "1,2" : "3,2") + "]}\n";
  }
  write("d.jsonl", data);
}

}  // namespace

TEST_CASE("train, score, evaluate pipeline") {
  fixture();
  REQUIRE(run("train-lm --order 3 --corpus c.txt --out m.lm") == 0);
  CHECK(read("m.lm").rfind("#nglm v1 order=3 discount=0.75\n", 0) == 0);
  REQUIRE(run("score --lm m.lm --kind slor --data d.jsonl --out s.tsv") == 0);
  CHECK(data_lines(read("s.tsv")) == 12);

  REQUIRE(run("train-subword --corpus c.txt --target-size 60 --out v.txt") == 0);
  REQUIRE(run("train-lm --corpus c.txt --vocab v.txt --out wp.lm") == 0);
  REQUIRE(run("score --lm wp.lm --vocab v.txt --kind slor --data d.jsonl --out wps.tsv") == 0);
  CHECK(read("wps.tsv").rfind("#scores v1 metric=WPSLOR", 0) == 0);
  REQUIRE(run("score --lm m.lm --kind ppl --name PPL --data d.jsonl --out ppl.tsv") == 0);
  REQUIRE(run("rouge --metric rouge-l-mult --data d.jsonl --out r.tsv") == 0);
  REQUIRE(run("rouge --metric lr2-f --data d.jsonl --out lr2.tsv") == 0);

  REQUIRE(run("evaluate --scores s.tsv --scores wps.tsv --scores ppl.tsv --scores r.tsv --scores lr2.tsv "
              "--data d.jsonl --group-by system --out report.json --table table.md") == 0);
  const auto table = read("stdout.txt");
  CHECK(table == read("table.md"));
  CHECK(table.find("| metric | refs | Pearson A | Pearson B | MSE A | MSE B |") != std::string::npos);
  CHECK(table.find("| ROUGE-L-mult | 2 |") != std::string::npos);
  CHECK(read("report.json").find("\"format\": \"fluency-report v1\"") != std::string::npos);

  // identical invocations produce identical bytes
  const auto first = read("report.json");
  REQUIRE(run("evaluate --scores s.tsv --scores wps.tsv --scores ppl.tsv --scores r.tsv --scores lr2.tsv "
              "--data d.jsonl --group-by system --out report.json") == 0);
  CHECK(read("report.json") == first);
}

TEST_CASE("split and combine") {
  fixture();
  REQUIRE(run("train-lm --corpus c.txt --out m.lm") == 0);
  REQUIRE(run("score --lm m.lm --data d.jsonl --out s.tsv") == 0);
  REQUIRE(run("rouge --data d.jsonl --out r.tsv") == 0);
  REQUIRE(run("split --data d.jsonl --sizes 4,4,rest --seed 3 --out sp.tsv") == 0);
  const auto split = read("sp.tsv");
  REQUIRE(run("split --data d.jsonl --sizes 4,4,rest --seed 3 --out sp2.tsv") == 0);
  CHECK(read("sp2.tsv") == split);
  CHECK(split.rfind("#split v1 seed=3\n", 0) == 0);
  CHECK(data_lines(split) == 12);

  REQUIRE(run("combine --rouge r.tsv --slor s.tsv --split sp.tsv --fit-set train --out rl.tsv --model rl.json") == 0);
  CHECK(read("rl.tsv").rfind("#scores v1 metric=ROUGE-LM refs=2\n", 0) == 0);
  CHECK(read("rl.json").find("\"name\": \"ROUGE-LM\"") != std::string::npos);
  // too few training points for the trained combiner is a runtime error
  CHECK(run("combine --mode trained --rouge r.tsv --slor s.tsv --data d.jsonl --split sp.tsv --out t.tsv") == 2);
  CHECK(read("stderr.txt").find("TooFewSamples") != std::string::npos);
  CHECK_FALSE(fs::exists(path("t.tsv")));
}

TEST_CASE("usage and validation errors exit 1 without writing outputs") {
  fixture();
  CHECK(run("") == 1);
  CHECK(run("frobnicate") == 1);
  CHECK(run("train-lm --corpus c.txt --out x.lm --bogus") == 1);
  CHECK(run("train-lm --corpus missing.txt --out x.lm") == 1);
  CHECK(run("train-lm --corpus c.txt --out x.lm --discount 0") == 1);
  CHECK(run("train-lm --corpus c.txt --out x.lm --order 0") == 1);
  CHECK(run("train-lm --corpus c.txt --out no/such/dir/x.lm") == 1);
  CHECK(run("score --data d.jsonl --out x.tsv") == 1);
  CHECK(run("score --lm c.txt --kind bleu --data d.jsonl --out x.tsv") == 1);
  CHECK(run("evaluate --scores nope.tsv --data d.jsonl") == 1);
  CHECK(run("evaluate --scores c.txt --data d.jsonl --group-by planet") == 1);
  CHECK(run("split --data d.jsonl --sizes 4,4 --seed 1 --out x.tsv") == 1);
  CHECK(run("split --data d.jsonl --sizes 4,4,rest --out x.tsv") == 1);
  CHECK(run("combine --mode trained --rouge c.txt --slor c.txt --out x.tsv") == 1);
  CHECK_FALSE(fs::exists(path("x.lm")));
  CHECK_FALSE(fs::exists(path("x.tsv")));
  CHECK(run("--help") == 0);
}

TEST_CASE("runtime errors exit 2") {
  fixture();
  write("bad.lm", "#nglm v1 order=2\n");
  CHECK(run("score --lm bad.lm --data d.jsonl --out x.tsv") == 2);
  CHECK(read("stderr.txt").find("FormatError") != std::string::npos);
  CHECK(run("train-subword --corpus c.txt --target-size 3 --out v.txt") == 2);
  CHECK(run("split --data d.jsonl --sizes 10,10,rest --seed 1 --out x.tsv") == 2);
  CHECK_FALSE(fs::exists(path("x.tsv")));
}
