#include "doctest.h"

#include "cnir/corpus_io.hpp"
#include "test_util.hpp"

using namespace cnir;

TEST_CASE("load_corpus parses jsonl titles in file order") {
  TempDir dir("corpus");
  auto path = dir.write("corpus.jsonl",
                        "{\"id\":\"d1\",\"title\":\"los angeles weather\"}\n"
                        "{\"id\":\"d2\",\"title\":\"Paris Hotels\"}\n");
  auto docs = load_corpus(path);
  REQUIRE(docs.size() == 2);
  CHECK(docs[0].doc_id == "d1");
  CHECK(docs[0].tokens == std::vector<std::string>{"los", "angeles", "weather"});
  CHECK(docs[1].tokens == std::vector<std::string>{"paris", "hotels"});
}

TEST_CASE("load_corpus edge cases") {
  TempDir dir("corpus_edge");
  SUBCASE("empty file gives empty collection") {
    auto docs = load_corpus(dir.write("empty.jsonl", ""));
    CHECK(docs.empty());
  }
  SUBCASE("duplicate ids rejected by name") {
    auto path = dir.write("dup.jsonl",
                          "{\"id\":\"d1\",\"title\":\"a\"}\n{\"id\":\"d1\",\"title\":\"b\"}\n");
    CHECK_THROWS_WITH_AS(load_corpus(path), doctest::Contains("d1"), DataError);
  }
  SUBCASE("malformed line reported with line number") {
    auto path = dir.write("bad.jsonl", "{\"id\":\"d1\",\"title\":\"a\"}\nnot json\n");
    CHECK_THROWS_WITH_AS(load_corpus(path), doctest::Contains("line 2"), DataError);
  }
  SUBCASE("empty title flagged, not rejected") {
    int empties = 0;
    auto docs = load_corpus(dir.write("et.jsonl", "{\"id\":\"d1\",\"title\":\"\"}\n"), &empties);
    REQUIRE(docs.size() == 1);
    CHECK(docs[0].tokens.empty());
    CHECK(empties == 1);
  }
}

TEST_CASE("load_queries parses tsv") {
  TempDir dir("queries");
  SUBCASE("direct parse") {
    auto queries = load_queries(dir.write("q.tsv", "q1\tbert character\n"));
    REQUIRE(queries.size() == 1);
    CHECK(queries[0].query_id == "q1");
    CHECK(queries[0].tokens == std::vector<std::string>{"bert", "character"});
    CHECK(queries[0].linked_entities.empty());
  }
  SUBCASE("blank lines skipped with warning count") {
    int blanks = 0;
    auto queries = load_queries(dir.write("q.tsv", "q1\ta\n\nq2\tb\n"), &blanks);
    CHECK(queries.size() == 2);
    CHECK(blanks == 1);
  }
  SUBCASE("empty query text is an error") {
    CHECK_THROWS_AS(load_queries(dir.write("q.tsv", "q2\t\n")), DataError);
  }
  SUBCASE("missing tab reported with line number") {
    CHECK_THROWS_WITH_AS(load_queries(dir.write("q.tsv", "q1 no tab\n")),
                         doctest::Contains("line 1"), DataError);
  }
}

TEST_CASE("load_qrels") {
  TempDir dir("qrels");
  SUBCASE("direct parse and max grade") {
    auto judgments = load_qrels(dir.write("qrels.txt", "q1 0 d1 2\nq1 0 d2 0\n"));
    CHECK(judgments.grade("q1", "d1") == 2);
    CHECK(judgments.max_grade() >= 2);
    CHECK(judgments.grade("q1", "dx") == 0);  // unjudged convention
  }
  SUBCASE("empty file") {
    auto judgments = load_qrels(dir.write("qrels.txt", ""));
    CHECK(judgments.max_grade() == 0);
    CHECK(judgments.size() == 0);
  }
  SUBCASE("negative grade rejected") {
    CHECK_THROWS_AS(load_qrels(dir.write("qrels.txt", "q1 0 d1 -1\n")), DataError);
  }
  SUBCASE("duplicate pair keeps last value") {
    int dups = 0;
    auto judgments = load_qrels(dir.write("qrels.txt", "q1 0 d1 1\nq1 0 d1 3\n"), &dups);
    CHECK(judgments.grade("q1", "d1") == 3);
    CHECK(dups == 1);
  }
}

TEST_CASE("write_run round-trips ids, ranks and scores") {
  TempDir dir("run");
  std::vector<RankedList> lists = {
      {"q1", {{"d2", 0.95}, {"d1", 0.5}, {"d3", -0.25}}},
      {"q2", {{"d1", 1.25}}},
  };
  auto path = dir.file("run.txt");
  write_run(lists, path);
  auto back = load_run(path);
  REQUIRE(back.size() == 2);
  REQUIRE(back[0].entries.size() == 3);
  CHECK(back[0].query_id == "q1");
  CHECK(back[0].entries[0].first == "d2");
  CHECK(back[0].entries[2].first == "d3");
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(back[0].entries[i].second == doctest::Approx(lists[0].entries[i].second).epsilon(1e-6));
  CHECK(back[1].entries[0].first == "d1");

  SUBCASE("single entry writes rank 1") {
    write_run({{"q9", {{"d7", 0.125}}}}, path);
    CHECK(slurp(path) == "q9 Q0 d7 1 0.125000 cnir\n");
  }
  SUBCASE("empty list collection writes empty file") {
    write_run({}, path);
    CHECK(slurp(path).empty());
  }
  SUBCASE("unsorted scores rejected") {
    std::vector<RankedList> bad = {{"q1", {{"d1", 0.5}, {"d2", 0.9}}}};
    CHECK_THROWS_AS(write_run(bad, path), DataError);
  }
  SUBCASE("duplicate doc ids rejected") {
    std::vector<RankedList> bad = {{"q1", {{"d1", 0.9}, {"d1", 0.5}}}};
    CHECK_THROWS_AS(write_run(bad, path), DataError);
  }
}
