#include <cmath>

#include "doctest.h"

#include "cnir/lexical.hpp"
#include "test_util.hpp"

using namespace cnir;

TEST_CASE("tokenize") {
  CHECK(tokenize("Los Angeles") == std::vector<std::string>{"los", "angeles"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("a  b") == std::vector<std::string>{"a", "b"});
  CHECK(tokenize("hello , world !!") == std::vector<std::string>{"hello", "world"});
  CHECK(tokenize("state-of-the-art") == std::vector<std::string>{"state-of-the-art"});
}

TEST_CASE("vocabulary ids and persistence") {
  Vocabulary vocab;
  CHECK(vocab.size() == 2);
  int a = vocab.add("alpha");
  int b = vocab.add("beta");
  CHECK(a == 2);
  CHECK(b == 3);
  CHECK(vocab.add("alpha") == a);
  CHECK(vocab.id("alpha") == a);
  CHECK(vocab.id("missing") == Vocabulary::kUnknown);
  CHECK(vocab.token(a) == "alpha");

  TempDir dir("vocab");
  auto path = dir.file("vocab.txt");
  vocab.save(path);
  auto loaded = Vocabulary::load(path);
  CHECK(loaded.size() == vocab.size());
  CHECK(loaded.id("beta") == b);
}

TEST_CASE("load_embeddings") {
  TempDir dir("emb");
  Vocabulary vocab;
  vocab.add("cat");
  vocab.add("dog");

  SUBCASE("rows read from file; missing rows sampled reproducibly") {
    auto path = dir.write("emb.txt", "1 2\ncat 0.5 -0.5\n");
    Rng rng1(7), rng2(7);
    auto table1 = load_embeddings(path, vocab, EmbeddingKind::word, rng1);
    auto table2 = load_embeddings(path, vocab, EmbeddingKind::word, rng2);
    CHECK(table1.row(vocab.id("cat"))[0] == 0.5);
    CHECK(table1.row(vocab.id("cat"))[1] == -0.5);
    // "dog" is absent: sampled in [-0.1, 0.1], identical across same-seed runs.
    for (int d = 0; d < 2; ++d) {
      CHECK(table1.row(vocab.id("dog"))[d] == table2.row(vocab.id("dog"))[d]);
      CHECK(std::abs(table1.row(vocab.id("dog"))[d]) <= 0.1);
    }
    // PADDING row zeroed.
    CHECK(table1.row(Vocabulary::kPadding)[0] == 0.0);
    CHECK(table1.row(Vocabulary::kPadding)[1] == 0.0);
  }
  SUBCASE("row width mismatch names the token") {
    auto path = dir.write("bad.txt", "1 2\ncat 0.5 -0.5 0.25\n");
    Rng rng(7);
    CHECK_THROWS_WITH_AS(load_embeddings(path, vocab, EmbeddingKind::word, rng),
                         doctest::Contains("cat"), DataError);
  }
}

TEST_CASE("cosine") {
  std::vector<double> e1 = {1.0, 0.0};
  std::vector<double> e2 = {0.0, 1.0};
  std::vector<double> zero = {0.0, 0.0};
  std::vector<double> ones = {1.0, 1.0};
  CHECK(cosine(e1, e1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cosine(e1, e2) == doctest::Approx(0.0));
  CHECK(cosine(zero, ones) == 0.0);
  CHECK_THROWS_AS(cosine(e1, std::vector<double>{1.0, 2.0, 3.0}), DataError);
}

TEST_CASE("cosine properties: symmetry, scale invariance, self-similarity") {
  Rng rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    int dim = 1 + static_cast<int>(rng.index(8));
    std::vector<double> a(dim), b(dim);
    for (auto& x : a) x = rng.uniform(-2.0, 2.0);
    for (auto& x : b) x = rng.uniform(-2.0, 2.0);
    double ab = cosine(a, b);
    CHECK(ab >= -1.0 - 1e-12);
    CHECK(ab <= 1.0 + 1e-12);
    CHECK(ab == doctest::Approx(cosine(b, a)).epsilon(1e-12));
    double alpha = rng.uniform(0.1, 5.0);
    std::vector<double> scaled = a;
    for (auto& x : scaled) x *= alpha;
    CHECK(cosine(scaled, b) == doctest::Approx(ab).epsilon(1e-9));
    double na = 0.0;
    for (double x : a) na += x * x;
    if (na > 0.0) CHECK(cosine(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  }
}
