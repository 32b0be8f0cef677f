#include <cstdlib>
#include <filesystem>

#include "doctest.h"

#include "cnir/corpus_io.hpp"
#include "cnir/synth.hpp"
#include "cnir/trainer.hpp"
#include "test_util.hpp"

using namespace cnir;

namespace {

std::string cnir_bin() {
  const char* bin = std::getenv("CNIR_BIN");
  return bin ? bin : "";
}

int run_cli(const std::string& args) {
  std::string cmd = cnir_bin() + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

struct CliFixture {
  TempDir dir;

  CliFixture() : dir("cli") {
    SynthParams params;
    params.seed = 11;
    params.n_queries = 20;
    params.n_train = 12;
    params.n_valid = 4;
    params.n_test = 4;
    params.n_docs = 80;
    params.vocab_size = 120;
    params.synonym_pairs = 5;
    params.embedding_dim = 16;
    generate_synth(params, dir.file("data"));
  }

  std::string data() const { return dir.file("data"); }
};

}  // namespace

TEST_CASE("cli error contracts" * doctest::skip(cnir_bin().empty())) {
  CliFixture fx;
  SUBCASE("unknown subcommand exits 1") { CHECK(run_cli("frobnicate") == 1); }
  SUBCASE("unknown flag exits 1") { CHECK(run_cli("eval --frobnicate") == 1); }
  SUBCASE("unknown config key exits 1") {
    CHECK(run_cli("train --data " + fx.data() + " --set nonsense=1") == 1);
  }
  SUBCASE("missing data file exits 2") {
    CHECK(run_cli("index --data /nonexistent-dir --out " + fx.dir.file("x.txt")) == 2);
  }
  SUBCASE("version exits 0") { CHECK(run_cli("--version") == 0); }
}

TEST_CASE("cli index/gen-synth/eval happy paths" * doctest::skip(cnir_bin().empty())) {
  CliFixture fx;
  CHECK(run_cli("index --data " + fx.data() + " --out " + fx.dir.file("index.txt")) == 0);
  CHECK(std::filesystem::exists(fx.dir.file("index.txt")));

  CHECK(run_cli("gen-synth --out " + fx.dir.file("data2") +
                " --seed 11 --queries 20 --train 12 --valid 4 --test 4 --docs 80 --vocab 120"
                " --pairs 5 --dim 16") == 0);
  CHECK(slurp(fx.dir.file("data2") + "/corpus.jsonl") == slurp(fx.data() + "/corpus.jsonl"));

  // A run file straight from BM25 pools, then eval.
  TrainingConfig config;
  auto data = load_pipeline_data(DataPaths::from_dir(fx.data(), "test"), config);
  std::vector<RankedList> lists;
  for (const auto& q : data.queries) lists.push_back(data.pools.at(q.query_id));
  write_run(lists, fx.dir.file("bm25.run"));
  CHECK(run_cli("eval --run " + fx.dir.file("bm25.run") + " --qrels " + fx.data() +
                "/qrels.txt --per-query " + fx.dir.file("per_query.tsv")) == 0);
  CHECK(std::filesystem::exists(fx.dir.file("per_query.tsv")));
}

TEST_CASE("cli train twice with the same seed is byte-identical" *
          doctest::skip(cnir_bin().empty())) {
  CliFixture fx;
  std::string overrides =
      " --set max_epochs=2 --set pretrain_epochs=2 --set patience=5 --set seed=7";
  std::string a = "train --data " + fx.data() + " --run-dir " + fx.dir.file("runs_a") + overrides;
  std::string b = "train --data " + fx.data() + " --run-dir " + fx.dir.file("runs_b") + overrides;
  REQUIRE(run_cli(a) == 0);
  REQUIRE(run_cli(b) == 0);

  auto find_run = [](const std::string& parent) {
    for (const auto& entry : std::filesystem::directory_iterator(parent))
      if (entry.is_directory()) return entry.path().string();
    return std::string();
  };
  std::string run_a = find_run(fx.dir.file("runs_a"));
  std::string run_b = find_run(fx.dir.file("runs_b"));
  REQUIRE_FALSE(run_a.empty());
  REQUIRE_FALSE(run_b.empty());
  CHECK(std::filesystem::path(run_a).filename() == std::filesystem::path(run_b).filename());
  for (const char* name : {"/history.tsv", "/policy.ckpt", "/knrm.ckpt", "/pretrain.ckpt"})
    CHECK(slurp(run_a + name) == slurp(run_b + name));
}

TEST_CASE("cli rank equals the train-time evaluation path bit for bit" *
          doctest::skip(cnir_bin().empty())) {
  CliFixture fx;
  std::string overrides = " --set max_epochs=2 --set pretrain_epochs=2 --set seed=7";
  REQUIRE(run_cli("train --data " + fx.data() + " --run-dir " + fx.dir.file("runs") + overrides)
          == 0);
  std::string run_dir;
  for (const auto& entry : std::filesystem::directory_iterator(fx.dir.file("runs")))
    if (entry.is_directory()) run_dir = entry.path().string();
  REQUIRE_FALSE(run_dir.empty());

  // CLI composition: reformulate | rank.
  REQUIRE(run_cli("reformulate --data " + fx.data() + " --split test --method rl --policy " +
                  run_dir + "/policy.ckpt --out " + fx.dir.file("reformulated.tsv") +
                  " --set seed=7") == 0);
  REQUIRE(run_cli("rank --data " + fx.data() + " --split test --reformulated " +
                  fx.dir.file("reformulated.tsv") + " --knrm " + run_dir + "/knrm.ckpt --out " +
                  fx.dir.file("cli.run") + " --set seed=7") == 0);

  // Library path on the same checkpoints.
  TrainingConfig config;
  config.seed = 7;
  auto data = load_pipeline_data(DataPaths::from_dir(fx.data(), "test"), config);
  auto policy = load_policy(run_dir + "/policy.ckpt");
  auto ranker = load_knrm(run_dir + "/knrm.ckpt");
  auto lists = pipeline_run(data, &policy, ranker, config);
  write_run(lists, fx.dir.file("lib.run"));

  CHECK(slurp(fx.dir.file("cli.run")) == slurp(fx.dir.file("lib.run")));

  SUBCASE("baseline reformulators also run end to end") {
    CHECK(run_cli("reformulate --data " + fx.data() +
                  " --split test --method tfidf --out " + fx.dir.file("tfidf.tsv")) == 0);
    CHECK(run_cli("reformulate --data " + fx.data() + " --split test --method rm --out " +
                  fx.dir.file("rm.tsv")) == 0);
    auto tf = load_queries(fx.dir.file("tfidf.tsv"));
    auto rm = load_queries(fx.dir.file("rm.tsv"));
    auto orig = load_queries(fx.data() + "/queries_test.tsv");
    REQUIRE(tf.size() == orig.size());
    REQUIRE(rm.size() == orig.size());
    for (std::size_t i = 0; i < orig.size(); ++i) {
      // Original tokens stay as a prefix under every method.
      for (std::size_t t = 0; t < orig[i].tokens.size(); ++t) {
        CHECK(tf[i].tokens[t] == orig[i].tokens[t]);
        CHECK(rm[i].tokens[t] == orig[i].tokens[t]);
      }
    }
  }
}
