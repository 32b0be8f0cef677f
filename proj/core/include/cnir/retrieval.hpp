#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "cnir/types.hpp"

namespace cnir {

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

// Okapi BM25 with the +1-smoothed IDF: ln((N - df + 0.5) / (df + 0.5) + 1).
// Never negative, which matters on tiny corpora.
class InvertedIndex {
 public:
  struct Posting {
    int doc = 0;  // slot into doc_ids()
    int tf = 0;
  };

  static InvertedIndex build(const std::vector<Document>& corpus);

  double bm25_score(const std::vector<std::string>& query_tokens, const std::string& doc_id,
                    const Bm25Params& params = {}) const;

  // Top-k documents containing at least one query term, scored by BM25,
  // ties broken by ascending doc_id.
  RankedList retrieve_topk(const std::vector<std::string>& query_tokens, int k,
                           const std::string& query_id = "",
                           const Bm25Params& params = {}) const;

  int doc_count() const { return static_cast<int>(doc_ids_.size()); }
  double avg_doc_length() const { return avg_doc_length_; }
  int doc_length(const std::string& doc_id) const;
  // Documents containing the term; empty for unseen terms.
  const std::vector<Posting>& postings(const std::string& term) const;
  int document_frequency(const std::string& term) const;
  // Collection frequency: total occurrences of the term across the corpus.
  long collection_frequency(const std::string& term) const;
  long total_tokens() const { return total_tokens_; }
  const std::vector<std::string>& doc_ids() const { return doc_ids_; }

  void save(const std::string& path) const;
  static InvertedIndex load(const std::string& path);

 private:
  int doc_slot(const std::string& doc_id) const;
  double idf(const std::string& term) const;

  std::vector<std::string> doc_ids_;
  std::unordered_map<std::string, int> slot_of_;
  std::vector<int> doc_lengths_;
  double avg_doc_length_ = 0.0;
  long total_tokens_ = 0;
  std::unordered_map<std::string, std::vector<Posting>> postings_;
};

}  // namespace cnir
