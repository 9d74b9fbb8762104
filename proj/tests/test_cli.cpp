// Drives the built `raga` executable end to end on a tiny synthetic task.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "raga_test_cli";

int run(const std::string& args, std::string* output = nullptr) {
  const fs::path log = kWork / "last_output.txt";
  const std::string cmd = std::string("\"") + RAGA_CLI_PATH + "\" " + args + " > \"" +
                          log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  if (output) {
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    *output = ss.str();
  }
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST_CASE("cli workflow") {
  fs::remove_all(kWork);
  fs::create_directories(kWork);
  const fs::path data = kWork / "data";
  const fs::path cfg = data / "config.json";
  std::string out;

  REQUIRE(run("gen-synth --out " + q(data) +
              " --n-entities 40 --n-relations 4 --n-triples 120 --embed-dim 6") == 0);
  for (const char* f : {"kg1_triples.tsv", "kg2_triples.tsv", "seeds.tsv", "tests.tsv",
                        "kg1_embeddings.txt", "kg2_embeddings.txt", "config.json"})
    CHECK(fs::exists(data / f));

  const fs::path runA = kWork / "runA";
  REQUIRE(run("train -c " + q(cfg) + " --out " + q(runA) + " --epochs 6 --d-r 4 --neg-k 2", &out) == 0);
  CHECK(fs::exists(runA / "checkpoint.json"));
  CHECK(fs::exists(runA / "effective_config.json"));
  CHECK(slurp(runA / "effective_config.json").find("\"epochs\": 6") != std::string::npos);

  // Resume from 6 to 10 epochs equals 10 epochs straight.
  const fs::path runB = kWork / "runB";
  REQUIRE(run("train -c " + q(cfg) + " --out " + q(runB) + " --epochs 10 --d-r 4 --neg-k 2") == 0);
  REQUIRE(run("train -c " + q(cfg) + " --out " + q(runA) + " --epochs 10 --d-r 4 --neg-k 2 --resume " +
              q(runA / "checkpoint.json")) == 0);
  CHECK(slurp(runA / "loss.tsv") == slurp(runB / "loss.tsv"));
  CHECK(slurp(runA / "checkpoint.json") == slurp(runB / "checkpoint.json"));

  REQUIRE(run("align -c " + q(cfg) + " --out " + q(runB) + " --matcher hungarian", &out) == 0);
  CHECK(out.find("1-to-1 H@1") != std::string::npos);
  const std::string metrics = slurp(runB / "metrics.txt");
  CHECK(metrics.find("hits@1=") != std::string::npos);
  CHECK(metrics.find("matcher=hungarian") != std::string::npos);
  CHECK(fs::exists(runB / "alignment.tsv"));

  REQUIRE(run("eval -c " + q(cfg) + " --out " + q(runB) + " --alignment " + q(runB / "alignment.tsv"), &out) == 0);
  CHECK(out.find("one_to_one_h1=") != std::string::npos);
  REQUIRE(run("eval -c " + q(cfg) + " --out " + q(runB), &out) == 0);
  CHECK(out.find("mrr=") != std::string::npos);

  REQUIRE(run("align -c " + q(cfg) + " --out " + q(runB) + " --matcher local --no-fine-grained", &out) == 0);
  CHECK(out.find("conflicts") != std::string::npos);
}

TEST_CASE("cli sweep") {
  fs::create_directories(kWork);
  std::string out;
  const std::string small =
      " --n-entities 30 --n-relations 3 --n-triples 80 --embed-dim 4 --d-r 2 --epochs 3 --out " +
      q(kWork / "sweep");
  CHECK(run("sweep" + small, &out) == 0);
  CHECK(out == "seed_ratio\thits@1\thits@10\tmrr\tone_to_one_h1\n");  // empty list, empty table
  CHECK(run("sweep --ratios 0.2,0.5" + small, &out) == 0);
  CHECK(out.find("\n0.2\t") != std::string::npos);
  CHECK(out.find("\n0.5\t") != std::string::npos);
}

TEST_CASE("cli errors and exit codes") {
  fs::create_directories(kWork);
  const fs::path data = kWork / "data";
  const fs::path cfg = data / "config.json";
  std::string out;
  CHECK(run("", &out) == 2);
  CHECK(run("frobnicate", &out) == 2);
  CHECK(run("train --epochs notanumber", &out) == 2);
  CHECK(run("--help", &out) == 0);

  // Missing seed file names the path.
  CHECK(run("train -c " + q(cfg) + " --seeds " + q(kWork / "nope.tsv"), &out) == 2);
  CHECK(out.find("seeds not found: " + (kWork / "nope.tsv").string()) != std::string::npos);

  std::ofstream(kWork / "bad.json") << R"({"hyper": {"epochz": 1}})";
  CHECK(run("train -c " + q(kWork / "bad.json"), &out) == 2);
  CHECK(out.find("epochz") != std::string::npos);

  // A checkpoint trained with a different d_r does not fit: reported, not crashed.
  const fs::path runC = kWork / "runC";
  REQUIRE(run("train -c " + q(cfg) + " --out " + q(runC) + " --epochs 1 --d-r 4") == 0);
  CHECK(run("train -c " + q(cfg) + " --out " + q(runC) + " --epochs 2 --d-r 5 --resume " +
            q(runC / "checkpoint.json"), &out) == 2);

  // Wrong d_e for the data.
  CHECK(run("train -c " + q(cfg) + " --out " + q(runC) + " --d-e 7", &out) == 2);

  CHECK(run("align -c " + q(cfg) + " --out " + q(kWork / "nothing_here"), &out) == 2);
  CHECK(out.find("checkpoint not found") != std::string::npos);
}
