#include <algorithm>
#include <cmath>

#include "doctest.h"

#include "cnir/retrieval.hpp"
#include "cnir/rng.hpp"
#include "test_util.hpp"

using namespace cnir;

namespace {

Document doc(const std::string& id, const std::vector<std::string>& tokens) {
  return {id, tokens};
}

// Score-all-documents oracle: rank every doc via bm25_score and sort with
// the same tie-break; independent of the postings-driven path.
RankedList brute_force_topk(const InvertedIndex& index, const std::vector<Document>& corpus,
                            const std::vector<std::string>& query, int k) {
  std::vector<std::pair<std::string, double>> scored;
  for (const auto& d : corpus) {
    bool matches = false;
    for (const auto& t : query)
      if (std::find(d.tokens.begin(), d.tokens.end(), t) != d.tokens.end()) matches = true;
    if (!matches) continue;
    scored.emplace_back(d.doc_id, index.bm25_score(query, d.doc_id));
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (static_cast<int>(scored.size()) > k) scored.resize(k);
  RankedList out{"", {}};
  out.entries = std::move(scored);
  return out;
}

}  // namespace

TEST_CASE("build_index counts") {
  auto index = InvertedIndex::build({doc("d1", {"a", "b", "a"})});
  CHECK(index.doc_count() == 1);
  CHECK(index.doc_length("d1") == 3);
  REQUIRE(index.postings("a").size() == 1);
  CHECK(index.postings("a")[0].tf == 2);
  CHECK(index.postings("b")[0].tf == 1);
  CHECK(index.avg_doc_length() == 3.0);

  SUBCASE("empty corpus") {
    auto empty = InvertedIndex::build({});
    CHECK(empty.doc_count() == 0);
    CHECK(empty.avg_doc_length() == 0.0);
  }
  SUBCASE("average length is the mean") {
    auto two = InvertedIndex::build({doc("d1", {"a", "b"}), doc("d2", {"c", "c", "c", "c"})});
    CHECK(two.avg_doc_length() == 3.0);
  }
}

TEST_CASE("bm25_score") {
  auto index = InvertedIndex::build({doc("d1", {"a"})});
  SUBCASE("single-doc single-term closed form") {
    // idf = ln((N - df + 0.5)/(df + 0.5) + 1) = ln(4/3); tf factor is 1 at
    // len == avglen, so the score is ln(4/3).
    double expected = std::log(4.0 / 3.0);
    CHECK(index.bm25_score({"a"}, "d1") == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("absent terms contribute zero") {
    CHECK(index.bm25_score({"z"}, "d1") == 0.0);
    CHECK(index.bm25_score({"a", "z"}, "d1") ==
          doctest::Approx(index.bm25_score({"a"}, "d1")));
  }
  SUBCASE("empty query scores zero") { CHECK(index.bm25_score({}, "d1") == 0.0); }
  SUBCASE("unknown doc is an error") { CHECK_THROWS_AS(index.bm25_score({"a"}, "dx"), DataError); }
  SUBCASE("monotone in tf") {
    auto idx = InvertedIndex::build({doc("d1", {"a", "b", "b"}), doc("d2", {"a", "a", "b"})});
    // Same length, same df; d2 has higher tf of `a`.
    CHECK(idx.bm25_score({"a"}, "d2") > idx.bm25_score({"a"}, "d1"));
  }
}

TEST_CASE("retrieve_topk basics") {
  auto corpus = std::vector<Document>{doc("d1", {"a", "x"}), doc("d2", {"a", "x"}),
                                      doc("d3", {"b", "y"})};
  auto index = InvertedIndex::build(corpus);
  SUBCASE("k larger than matches returns all matches") {
    auto list = index.retrieve_topk({"a"}, 10);
    CHECK(list.entries.size() == 2);
  }
  SUBCASE("ties broken by ascending doc id") {
    auto list = index.retrieve_topk({"a"}, 2);
    REQUIRE(list.entries.size() == 2);
    CHECK(list.entries[0].first == "d1");
    CHECK(list.entries[1].first == "d2");
  }
  SUBCASE("k must be positive") { CHECK_THROWS_AS(index.retrieve_topk({"a"}, 0), DataError); }
  SUBCASE("non-matching doc never enters the list") {
    auto list = index.retrieve_topk({"a"}, 10);
    for (const auto& [id, score] : list.entries) CHECK(id != "d3");
  }
}

TEST_CASE("retrieve_topk equals brute force on random corpora") {
  Rng rng(20240203);
  std::vector<std::string> vocab;
  for (int i = 0; i < 40; ++i) vocab.push_back("t" + std::to_string(i));

  for (int round = 0; round < 4; ++round) {
    std::vector<Document> corpus;
    int n_docs = 50 + static_cast<int>(rng.index(151));  // up to ~200
    for (int d = 0; d < n_docs; ++d) {
      std::vector<std::string> tokens;
      int len = 1 + static_cast<int>(rng.index(12));
      for (int t = 0; t < len; ++t) tokens.push_back(vocab[rng.index(vocab.size())]);
      char id[16];
      std::snprintf(id, sizeof(id), "d%04d", d);
      corpus.push_back(doc(id, tokens));
    }
    auto index = InvertedIndex::build(corpus);
    for (int q = 0; q < 50; ++q) {
      std::vector<std::string> query;
      int len = 1 + static_cast<int>(rng.index(4));
      for (int t = 0; t < len; ++t) query.push_back(vocab[rng.index(vocab.size())]);
      int k = 1 + static_cast<int>(rng.index(20));
      auto fast = index.retrieve_topk(query, k);
      auto oracle = brute_force_topk(index, corpus, query, k);
      REQUIRE(fast.entries.size() == oracle.entries.size());
      for (std::size_t i = 0; i < fast.entries.size(); ++i) {
        CHECK(fast.entries[i].first == oracle.entries[i].first);
        CHECK(fast.entries[i].second == doctest::Approx(oracle.entries[i].second).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("adding a non-matching document never changes membership") {
  std::vector<Document> corpus{doc("d1", {"a", "b"}), doc("d2", {"a"}), doc("d3", {"b"})};
  auto before = InvertedIndex::build(corpus).retrieve_topk({"a"}, 10);
  corpus.push_back(doc("d4", {"z", "w"}));
  auto after = InvertedIndex::build(corpus).retrieve_topk({"a"}, 10);
  REQUIRE(before.entries.size() == after.entries.size());
  for (std::size_t i = 0; i < before.entries.size(); ++i)
    CHECK(before.entries[i].first == after.entries[i].first);
}

TEST_CASE("index save/load round-trip") {
  TempDir dir("index");
  auto corpus = std::vector<Document>{doc("d1", {"a", "b", "a"}), doc("d2", {"b", "c"})};
  auto index = InvertedIndex::build(corpus);
  auto path = dir.file("index.txt");
  index.save(path);
  auto loaded = InvertedIndex::load(path);
  CHECK(loaded.doc_count() == index.doc_count());
  CHECK(loaded.avg_doc_length() == index.avg_doc_length());
  CHECK(loaded.bm25_score({"a", "c"}, "d2") ==
        doctest::Approx(index.bm25_score({"a", "c"}, "d2")).epsilon(1e-15));
  auto a = index.retrieve_topk({"b"}, 5);
  auto b = loaded.retrieve_topk({"b"}, 5);
  REQUIRE(a.entries.size() == b.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) CHECK(a.entries[i] == b.entries[i]);

  SUBCASE("bad header rejected") {
    auto bad = dir.write("bad.txt", "not-an-index\n");
    CHECK_THROWS_AS(InvertedIndex::load(bad), DataError);
  }
}
