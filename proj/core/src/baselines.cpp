#include "cnir/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

namespace cnir {

namespace {

// Unique terms in first-occurrence order with their counts.
std::pair<std::vector<std::string>, std::unordered_map<std::string, int>> term_counts(
    const std::vector<const Document*>& docs) {
  std::vector<std::string> order;
  std::unordered_map<std::string, int> counts;
  for (const auto* doc : docs)
    for (const auto& t : doc->tokens)
      if (++counts[t] == 1) order.push_back(t);
  return {order, counts};
}

std::vector<std::string> append_top_terms(
    const Query& query, std::vector<std::pair<double, std::string>>& scored, int k) {
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<std::string> out = query.tokens;
  int taken = 0;
  for (const auto& [score, term] : scored) {
    if (taken >= k) break;
    if (score <= 0.0) break;  // zero-score terms never improve the query model
    out.push_back(term);
    ++taken;
  }
  return out;
}

}  // namespace

std::vector<std::string> tfidf_expand(const Query& query, const std::vector<Document>& prf_docs,
                                      const InvertedIndex& index, int expansion_count) {
  if (expansion_count < 1) throw DataError("tfidf_expand: K must be >= 1");
  if (prf_docs.empty()) return query.tokens;
  std::unordered_set<std::string> query_tokens(query.tokens.begin(), query.tokens.end());
  std::vector<const Document*> docs;
  for (const auto& d : prf_docs) docs.push_back(&d);
  auto [order, counts] = term_counts(docs);
  double n = static_cast<double>(index.doc_count());
  std::vector<std::pair<double, std::string>> scored;
  for (const auto& term : order) {
    if (query_tokens.count(term)) continue;
    int df = index.document_frequency(term);
    if (df == 0) continue;  // not in the collection; no idf defined
    scored.emplace_back(counts[term] * std::log(n / df), term);
  }
  return append_top_terms(query, scored, expansion_count);
}

std::vector<std::pair<std::string, double>> relevance_model(const Query& query,
                                                            const RankedList& prf_list,
                                                            const std::vector<Document>& corpus,
                                                            const InvertedIndex& index,
                                                            const RmParams& params) {
  std::unordered_map<std::string, const Document*> by_id;
  for (const auto& d : corpus) by_id[d.doc_id] = &d;

  std::vector<const Document*> docs;
  for (const auto& [doc_id, score] : prf_list.entries) {
    auto it = by_id.find(doc_id);
    if (it == by_id.end()) throw DataError("rm_expand: PRF doc not in corpus: " + doc_id);
    if (!it->second->tokens.empty()) docs.push_back(it->second);
  }
  if (docs.empty() || index.total_tokens() == 0) return {};

  // Document weights P(q|d) under Dirichlet-smoothed unigram models.
  std::vector<double> weights;
  double total_tokens = static_cast<double>(index.total_tokens());
  for (const auto* doc : docs) {
    std::unordered_map<std::string, int> tf;
    for (const auto& t : doc->tokens) ++tf[t];
    double len = static_cast<double>(doc->tokens.size());
    double weight = 1.0;
    for (const auto& qt : query.tokens) {
      double collection_p = index.collection_frequency(qt) / total_tokens;
      auto it = tf.find(qt);
      double term_tf = it == tf.end() ? 0.0 : it->second;
      weight *= (term_tf + params.dirichlet_mu * collection_p) / (len + params.dirichlet_mu);
    }
    weights.push_back(weight);
  }

  auto [order, counts] = term_counts(docs);
  (void)counts;
  std::vector<std::pair<std::string, double>> model;
  double total = 0.0;
  for (const auto& term : order) {
    double mass = 0.0;
    for (std::size_t d = 0; d < docs.size(); ++d) {
      std::size_t tf = std::count(docs[d]->tokens.begin(), docs[d]->tokens.end(), term);
      if (tf == 0) continue;
      mass += weights[d] * static_cast<double>(tf) / docs[d]->tokens.size();
    }
    model.emplace_back(term, mass);
    total += mass;
  }
  if (total > 0.0)
    for (auto& [term, p] : model) p /= total;
  return model;
}

std::vector<std::string> rm_expand(const Query& query, const RankedList& prf_list,
                                   const std::vector<Document>& corpus,
                                   const InvertedIndex& index, int expansion_count,
                                   const RmParams& params) {
  if (expansion_count < 1) throw DataError("rm_expand: K must be >= 1");
  auto model = relevance_model(query, prf_list, corpus, index, params);
  if (model.empty()) return query.tokens;

  std::unordered_map<std::string, double> query_lm;
  for (const auto& qt : query.tokens) query_lm[qt] += 1.0 / query.tokens.size();

  std::unordered_set<std::string> query_tokens(query.tokens.begin(), query.tokens.end());
  std::vector<std::pair<double, std::string>> scored;
  for (const auto& [term, p_rm] : model) {
    if (query_tokens.count(term)) continue;
    double q_p = 0.0;  // non-query terms have no query-model mass
    auto it = query_lm.find(term);
    if (it != query_lm.end()) q_p = it->second;
    scored.emplace_back(params.lambda * q_p + (1.0 - params.lambda) * p_rm, term);
  }
  return append_top_terms(query, scored, expansion_count);
}

}  // namespace cnir
