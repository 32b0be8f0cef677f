#pragma once

#include <map>
#include <string>
#include <vector>

#include "cnir/types.hpp"

namespace cnir {

struct QueryMetrics {
  double map = 0.0;
  double err = 0.0;
  double ndcg5 = 0.0;
  double ndcg10 = 0.0;
};

// Per-query values plus macro-averages. Queries without any judged document
// are excluded from the averages and counted in `skipped`.
struct MetricReport {
  std::map<std::string, QueryMetrics> per_query;
  QueryMetrics mean;
  int evaluated = 0;
  int skipped = 0;
};

// AP with relevant = grade >= rel_threshold. The denominator is the number
// of judged relevant documents for the query, capped at the list size.
double average_precision(const RankedList& list, const JudgmentSet& judgments,
                         int rel_threshold = 1);

// Exponential gain 2^g - 1, discount log2(rank + 1); ideal ranking over all
// judged documents of the query. 0 when the ideal DCG is 0.
double ndcg_at_k(const RankedList& list, const JudgmentSet& judgments, int k);

// Expected reciprocal rank with stop probability (2^g - 1) / 2^max_grade.
double err(const RankedList& list, const JudgmentSet& judgments);

// The RL reward; delegates to average_precision.
double reward(const RankedList& list, const JudgmentSet& judgments);

MetricReport evaluate(const std::vector<RankedList>& lists, const JudgmentSet& judgments,
                      int rel_threshold = 1);

void write_per_query_tsv(const MetricReport& report, const std::string& path);

}  // namespace cnir
