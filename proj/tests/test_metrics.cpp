#include <algorithm>
#include <cmath>

#include "doctest.h"

#include "cnir/metrics.hpp"
#include "cnir/rng.hpp"

using namespace cnir;

namespace {

// Brute-force references, written independently of the library path:
// precision@r by rescanning the prefix, ideal DCG by full sort, ERR by the
// plain product formula.

double ap_oracle(const RankedList& list, const JudgmentSet& judgments, int threshold = 1) {
  int judged_relevant = 0;
  for (const auto& [did, g] : judgments.entries(list.query_id))
    if (g >= threshold) ++judged_relevant;
  int denom = std::min<int>(judged_relevant, static_cast<int>(list.entries.size()));
  if (denom == 0 || list.entries.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t r = 0; r < list.entries.size(); ++r) {
    if (judgments.grade(list.query_id, list.entries[r].first) < threshold) continue;
    int hits = 0;
    for (std::size_t s = 0; s <= r; ++s)
      if (judgments.grade(list.query_id, list.entries[s].first) >= threshold) ++hits;
    total += static_cast<double>(hits) / static_cast<double>(r + 1);
  }
  return total / denom;
}

double dcg_prefix(const std::vector<int>& grades, int k) {
  double dcg = 0.0;
  for (int r = 0; r < std::min<int>(k, static_cast<int>(grades.size())); ++r)
    dcg += (std::pow(2.0, grades[r]) - 1.0) / (std::log(r + 2.0) / std::log(2.0));
  return dcg;
}

double ndcg_oracle(const RankedList& list, const JudgmentSet& judgments, int k) {
  std::vector<int> ranked;
  for (const auto& [did, score] : list.entries)
    ranked.push_back(judgments.grade(list.query_id, did));
  std::vector<int> ideal;
  for (const auto& [did, g] : judgments.entries(list.query_id)) ideal.push_back(g);
  std::sort(ideal.rbegin(), ideal.rend());
  double idcg = dcg_prefix(ideal, k);
  return idcg > 0.0 ? dcg_prefix(ranked, k) / idcg : 0.0;
}

double err_oracle(const RankedList& list, const JudgmentSet& judgments) {
  if (judgments.max_grade() < 1) return 0.0;
  double out = 0.0;
  for (std::size_t r = 0; r < list.entries.size(); ++r) {
    double stop =
        (std::pow(2.0, judgments.grade(list.query_id, list.entries[r].first)) - 1.0) /
        std::pow(2.0, judgments.max_grade());
    double prefix = 1.0;
    for (std::size_t s = 0; s < r; ++s)
      prefix *= 1.0 - (std::pow(2.0, judgments.grade(list.query_id, list.entries[s].first)) -
                       1.0) /
                          std::pow(2.0, judgments.max_grade());
    out += stop * prefix / static_cast<double>(r + 1);
  }
  return out;
}

}  // namespace

TEST_CASE("average precision hand values") {
  JudgmentSet judgments;
  judgments.set("q", "d2", 1);
  SUBCASE("single relevant at rank 1") {
    RankedList list{"q", {{"d2", 3.0}, {"d1", 2.0}, {"d3", 1.0}}};
    CHECK(average_precision(list, judgments) == doctest::Approx(1.0));
  }
  SUBCASE("relevant doc at rank 2 of 3") {
    RankedList list{"q", {{"d1", 3.0}, {"d2", 2.0}, {"d3", 1.0}}};
    CHECK(average_precision(list, judgments) == doctest::Approx(0.5));
  }
  SUBCASE("no relevant docs") {
    JudgmentSet none;
    none.set("q", "d9", 0);
    RankedList list{"q", {{"d1", 3.0}, {"d2", 2.0}}};
    CHECK(average_precision(list, none) == 0.0);
  }
  SUBCASE("worst case single relevant at rank 3") {
    RankedList list{"q", {{"d1", 3.0}, {"d3", 2.0}, {"d2", 1.0}}};
    CHECK(average_precision(list, judgments) == doctest::Approx(1.0 / 3.0));
  }
}

TEST_CASE("ndcg hand values") {
  SUBCASE("graded example at k=2") {
    JudgmentSet judgments;
    judgments.set("q", "d1", 3);
    judgments.set("q", "d2", 0);
    judgments.set("q", "d3", 1);
    RankedList list{"q", {{"d1", 3.0}, {"d2", 2.0}, {"d3", 1.0}}};
    // DCG = 7; IDCG = 7 + 1/log2(3); ratio ~ 0.9173.
    double idcg = 7.0 + 1.0 / std::log2(3.0);
    CHECK(ndcg_at_k(list, judgments, 2) == doctest::Approx(7.0 / idcg).epsilon(1e-10));
    CHECK(ndcg_at_k(list, judgments, 2) == doctest::Approx(0.9173).epsilon(1e-4));
  }
  SUBCASE("ideal ordering scores 1") {
    JudgmentSet judgments;
    judgments.set("q", "d1", 2);
    judgments.set("q", "d2", 1);
    RankedList list{"q", {{"d1", 2.0}, {"d2", 1.0}}};
    CHECK(ndcg_at_k(list, judgments, 5) == doctest::Approx(1.0));
  }
  SUBCASE("all grades zero") {
    JudgmentSet judgments;
    judgments.set("q", "d1", 0);
    RankedList list{"q", {{"d1", 1.0}}};
    CHECK(ndcg_at_k(list, judgments, 5) == 0.0);
  }
}

TEST_CASE("err hand values") {
  SUBCASE("single binary-relevant doc") {
    JudgmentSet judgments;
    judgments.set("q", "d1", 1);
    RankedList list{"q", {{"d1", 1.0}}};
    CHECK(err(list, judgments) == doctest::Approx(0.5));
  }
  SUBCASE("all grades zero returns 0 with warning") {
    JudgmentSet judgments;
    judgments.set("q", "d1", 0);
    RankedList list{"q", {{"d1", 1.0}}};
    CHECK(err(list, judgments) == 0.0);
  }
  SUBCASE("top-graded doc at rank 1 approaches 1 for large max grade") {
    JudgmentSet judgments;
    judgments.set("q", "d1", 10);
    RankedList list{"q", {{"d1", 1.0}}};
    double expected = (std::pow(2.0, 10) - 1.0) / std::pow(2.0, 10);
    CHECK(err(list, judgments) == doctest::Approx(expected));
    CHECK(err(list, judgments) < 1.0);
  }
}

TEST_CASE("reward delegates to average precision") {
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    JudgmentSet judgments;
    RankedList list{"q", {}};
    int n = 1 + static_cast<int>(rng.index(12));
    for (int d = 0; d < n; ++d) {
      std::string did = "d" + std::to_string(d);
      judgments.set("q", did, static_cast<int>(rng.index(3)));
      list.entries.emplace_back(did, static_cast<double>(n - d));
    }
    CHECK(reward(list, judgments) == average_precision(list, judgments));
  }
}

TEST_CASE("metrics match brute-force oracles on 200 random instances") {
  Rng rng(123456);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 1 + static_cast<int>(rng.index(15));
    JudgmentSet judgments;
    RankedList list{"q" + std::to_string(trial), {}};
    for (int d = 0; d < n; ++d) {
      std::string did = "d" + std::to_string(d);
      int grade = static_cast<int>(rng.index(4));
      // Leave some docs unjudged to exercise the grade-0 convention.
      if (rng.uniform() < 0.8) judgments.set(list.query_id, did, grade);
      list.entries.emplace_back(did, static_cast<double>(n - d));
    }
    // A judged doc that never made the ranking affects AP and IDCG.
    if (rng.uniform() < 0.5) judgments.set(list.query_id, "missing", 2);

    CHECK(average_precision(list, judgments) ==
          doctest::Approx(ap_oracle(list, judgments)).epsilon(1e-10));
    for (int k : {1, 5, 10})
      CHECK(ndcg_at_k(list, judgments, k) ==
            doctest::Approx(ndcg_oracle(list, judgments, k)).epsilon(1e-10));
    CHECK(err(list, judgments) == doctest::Approx(err_oracle(list, judgments)).epsilon(1e-10));
    CHECK(average_precision(list, judgments) >= 0.0);
    CHECK(err(list, judgments) <= 1.0);
  }
}

TEST_CASE("swapping a higher-graded doc upward never decreases ndcg or err") {
  Rng rng(777);
  for (int trial = 0; trial < 60; ++trial) {
    int n = 3 + static_cast<int>(rng.index(8));
    JudgmentSet judgments;
    RankedList list{"q", {}};
    for (int d = 0; d < n; ++d) {
      std::string did = "d" + std::to_string(d);
      judgments.set("q", did, static_cast<int>(rng.index(4)));
      list.entries.emplace_back(did, static_cast<double>(n - d));
    }
    std::size_t i = rng.index(n - 1);
    std::size_t j = i + 1 + rng.index(n - i - 1);
    int gi = judgments.grade("q", list.entries[i].first);
    int gj = judgments.grade("q", list.entries[j].first);
    if (gj <= gi) continue;
    RankedList swapped = list;
    std::swap(swapped.entries[i].first, swapped.entries[j].first);
    CHECK(ndcg_at_k(swapped, judgments, 5) >= ndcg_at_k(list, judgments, 5) - 1e-12);
    CHECK(ndcg_at_k(swapped, judgments, 10) >= ndcg_at_k(list, judgments, 10) - 1e-12);
    CHECK(err(swapped, judgments) >= err(list, judgments) - 1e-12);
  }
}

TEST_CASE("permuting equal-grade ties leaves metrics unchanged") {
  JudgmentSet judgments;
  judgments.set("q", "d1", 2);
  judgments.set("q", "d2", 2);
  judgments.set("q", "d3", 0);
  RankedList a{"q", {{"d1", 3.0}, {"d2", 3.0}, {"d3", 1.0}}};
  RankedList b{"q", {{"d2", 3.0}, {"d1", 3.0}, {"d3", 1.0}}};
  CHECK(average_precision(a, judgments) == average_precision(b, judgments));
  CHECK(ndcg_at_k(a, judgments, 5) == ndcg_at_k(b, judgments, 5));
  CHECK(err(a, judgments) == err(b, judgments));
}

TEST_CASE("evaluate macro-averages and skips unjudged queries") {
  JudgmentSet judgments;
  judgments.set("q1", "d1", 1);
  std::vector<RankedList> lists = {{"q1", {{"d1", 1.0}}}, {"q2", {{"d1", 1.0}}}};
  auto report = evaluate(lists, judgments);
  CHECK(report.evaluated == 1);
  CHECK(report.skipped == 1);
  CHECK(report.mean.map == doctest::Approx(1.0));
}
