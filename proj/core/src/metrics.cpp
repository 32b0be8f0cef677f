#include "cnir/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "cnir/log.hpp"

namespace cnir {

double average_precision(const RankedList& list, const JudgmentSet& judgments,
                         int rel_threshold) {
  if (list.entries.empty()) return 0.0;
  int judged_relevant = 0;
  for (const auto& [doc_id, grade] : judgments.entries(list.query_id))
    if (grade >= rel_threshold) ++judged_relevant;
  int denom = std::min<int>(judged_relevant, static_cast<int>(list.entries.size()));
  if (denom == 0) return 0.0;
  double sum = 0.0;
  int hits = 0;
  for (std::size_t r = 0; r < list.entries.size(); ++r) {
    if (judgments.grade(list.query_id, list.entries[r].first) >= rel_threshold) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(r + 1);
    }
  }
  return sum / denom;
}

double ndcg_at_k(const RankedList& list, const JudgmentSet& judgments, int k) {
  if (k < 1) throw DataError("ndcg_at_k: k must be >= 1");
  double dcg = 0.0;
  int cutoff = std::min<int>(k, static_cast<int>(list.entries.size()));
  for (int r = 0; r < cutoff; ++r) {
    int g = judgments.grade(list.query_id, list.entries[r].first);
    dcg += (std::pow(2.0, g) - 1.0) / std::log2(static_cast<double>(r) + 2.0);
  }
  std::vector<int> grades;
  for (const auto& [doc_id, grade] : judgments.entries(list.query_id)) grades.push_back(grade);
  std::sort(grades.begin(), grades.end(), std::greater<int>());
  double idcg = 0.0;
  for (int r = 0; r < std::min<int>(k, static_cast<int>(grades.size())); ++r)
    idcg += (std::pow(2.0, grades[r]) - 1.0) / std::log2(static_cast<double>(r) + 2.0);
  return idcg > 0.0 ? dcg / idcg : 0.0;
}

double err(const RankedList& list, const JudgmentSet& judgments) {
  int max_grade = judgments.max_grade();
  if (max_grade < 1) {
    log::warn("err: judgment set has max_grade 0; returning 0");
    return 0.0;
  }
  double denom = std::pow(2.0, max_grade);
  double value = 0.0;
  double not_stopped = 1.0;
  for (std::size_t r = 0; r < list.entries.size(); ++r) {
    int g = judgments.grade(list.query_id, list.entries[r].first);
    double stop = (std::pow(2.0, g) - 1.0) / denom;
    value += not_stopped * stop / static_cast<double>(r + 1);
    not_stopped *= (1.0 - stop);
  }
  return value;
}

double reward(const RankedList& list, const JudgmentSet& judgments) {
  return average_precision(list, judgments);
}

MetricReport evaluate(const std::vector<RankedList>& lists, const JudgmentSet& judgments,
                      int rel_threshold) {
  MetricReport report;
  for (const auto& list : lists) {
    if (!judgments.judged(list.query_id)) {
      ++report.skipped;
      continue;
    }
    QueryMetrics m;
    m.map = average_precision(list, judgments, rel_threshold);
    m.err = err(list, judgments);
    m.ndcg5 = ndcg_at_k(list, judgments, 5);
    m.ndcg10 = ndcg_at_k(list, judgments, 10);
    report.per_query[list.query_id] = m;
    report.mean.map += m.map;
    report.mean.err += m.err;
    report.mean.ndcg5 += m.ndcg5;
    report.mean.ndcg10 += m.ndcg10;
    ++report.evaluated;
  }
  if (report.evaluated > 0) {
    report.mean.map /= report.evaluated;
    report.mean.err /= report.evaluated;
    report.mean.ndcg5 /= report.evaluated;
    report.mean.ndcg10 /= report.evaluated;
  }
  return report;
}

void write_per_query_tsv(const MetricReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write per-query metrics file: " + path);
  out << "query_id\tmap\terr\tndcg@5\tndcg@10\n";
  char buf[160];
  for (const auto& [query_id, m] : report.per_query) {
    std::snprintf(buf, sizeof(buf), "%s\t%.6f\t%.6f\t%.6f\t%.6f\n", query_id.c_str(), m.map,
                  m.err, m.ndcg5, m.ndcg10);
    out << buf;
  }
}

}  // namespace cnir
