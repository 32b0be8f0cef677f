#include <algorithm>
#include <filesystem>

#include "doctest.h"

#include "cnir/corpus_io.hpp"
#include "cnir/knowledge.hpp"
#include "cnir/metrics.hpp"
#include "cnir/retrieval.hpp"
#include "cnir/synth.hpp"
#include "test_util.hpp"

using namespace cnir;

namespace {

SynthParams small_params() {
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
  return params;
}

std::string dir_digest(const std::string& dir) {
  std::string digest;
  std::vector<std::string> names;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    names.push_back(entry.path().filename().string());
  std::sort(names.begin(), names.end());
  for (const auto& name : names) digest += name + "\n" + slurp(dir + "/" + name) + "\n";
  return digest;
}

}  // namespace

TEST_CASE("synth generation is byte-identical under the same seed") {
  TempDir dir("synth_det");
  auto params = small_params();
  generate_synth(params, dir.file("a"));
  generate_synth(params, dir.file("b"));
  CHECK(dir_digest(dir.file("a")) == dir_digest(dir.file("b")));

  params.seed = 12;
  generate_synth(params, dir.file("c"));
  CHECK(dir_digest(dir.file("a")) != dir_digest(dir.file("c")));
}

TEST_CASE("synth planted structure") {
  TempDir dir("synth_struct");
  auto params = small_params();
  generate_synth(params, dir.path.string());

  auto corpus = load_corpus(dir.file("corpus.jsonl"));
  CHECK(static_cast<int>(corpus.size()) == params.n_docs);
  auto judgments = load_qrels(dir.file("qrels.txt"));
  auto index = InvertedIndex::build(corpus);

  auto train = load_queries(dir.file("queries_train.tsv"));
  auto valid = load_queries(dir.file("queries_valid.tsv"));
  auto test = load_queries(dir.file("queries_test.tsv"));
  CHECK(static_cast<int>(train.size()) == params.n_train);
  CHECK(static_cast<int>(valid.size()) == params.n_valid);
  CHECK(static_cast<int>(test.size()) == params.n_test);

  SUBCASE("raw BM25 MAP is poor, canonical expansion fixes every query") {
    std::vector<RankedList> raw, oracle;
    std::vector<Query> all = train;
    all.insert(all.end(), valid.begin(), valid.end());
    all.insert(all.end(), test.begin(), test.end());
    for (const auto& q : all) {
      auto pool = index.retrieve_topk(q.tokens, 10, q.query_id);
      raw.push_back(pool);
      // The alias is the first token; its canonical partner has the same
      // numeric suffix.
      std::string alias = q.tokens[0];
      REQUIRE(alias.substr(0, 5) == "alias");
      std::string canonical = "canon" + alias.substr(5);
      std::vector<std::string> expanded = q.tokens;
      expanded.push_back(canonical);
      RankedList reranked{q.query_id, {}};
      for (const auto& [did, score] : pool.entries)
        reranked.entries.emplace_back(did, index.bm25_score(expanded, did));
      std::sort(reranked.entries.begin(), reranked.entries.end(),
                [](const auto& x, const auto& y) {
                  if (x.second != y.second) return x.second > y.second;
                  return x.first < y.first;
                });
      oracle.push_back(std::move(reranked));

      // Appending the canonical strictly raises BM25 for relevant docs.
      for (const auto& [did, grade] : judgments.entries(q.query_id))
        if (grade >= 1)
          CHECK(index.bm25_score(expanded, did) > index.bm25_score(q.tokens, did));
    }
    CHECK(evaluate(raw, judgments).mean.map < 0.6);
    CHECK(evaluate(oracle, judgments).mean.map == doctest::Approx(1.0));
  }

  SUBCASE("knowledge files link alias to canonical") {
    auto kg = KnowledgeGraph::load(dir.file("kg_names.tsv"), dir.file("kg_edges.tsv"));
    CHECK(kg.entity_count() == 3u * params.synonym_pairs);
    auto dict = EntityDictionary::load(dir.file("entity_dict.tsv"));
    REQUIRE(dict.lookup("alias000") != nullptr);
    CHECK(dict.lookup("alias000")->front().entity_id == "ea000");
    auto neighbors = kg.neighbor_entities({"ea000"});
    CHECK(std::find(neighbors.begin(), neighbors.end(), "ec000") != neighbors.end());
  }
}

TEST_CASE("synth control condition without synonym pairs") {
  TempDir dir("synth_ctrl");
  SynthParams params;
  params.seed = 3;
  params.n_queries = 10;
  params.n_train = 6;
  params.n_valid = 2;
  params.n_test = 2;
  params.n_docs = 60;
  params.vocab_size = 60;
  params.synonym_pairs = 0;
  params.embedding_dim = 8;
  generate_synth(params, dir.path.string());

  auto corpus = load_corpus(dir.file("corpus.jsonl"));
  auto judgments = load_qrels(dir.file("qrels.txt"));
  auto index = InvertedIndex::build(corpus);
  auto queries = load_queries(dir.file("queries_train.tsv"));
  std::vector<RankedList> lists;
  for (const auto& q : queries) lists.push_back(index.retrieve_topk(q.tokens, 10, q.query_id));
  CHECK(evaluate(lists, judgments).mean.map == doctest::Approx(1.0));
}

TEST_CASE("synth rejects inconsistent parameters") {
  TempDir dir("synth_bad");
  SynthParams params = small_params();
  params.n_docs = 10;  // cannot hold 6 docs per topic
  CHECK_THROWS_AS(generate_synth(params, dir.path.string()), DataError);

  params = small_params();
  params.n_train = 1;  // splits no longer sum
  CHECK_THROWS_AS(generate_synth(params, dir.path.string()), DataError);

  params = small_params();
  params.vocab_size = 4 * params.synonym_pairs - 1;
  CHECK_THROWS_AS(generate_synth(params, dir.path.string()), DataError);
}
