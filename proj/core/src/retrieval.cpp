#include "cnir/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cnir/version.hpp"

namespace cnir {

InvertedIndex InvertedIndex::build(const std::vector<Document>& corpus) {
  InvertedIndex index;
  index.doc_ids_.reserve(corpus.size());
  for (const auto& doc : corpus) {
    if (index.slot_of_.count(doc.doc_id))
      throw DataError("duplicate doc_id while indexing: " + doc.doc_id);
    int slot = static_cast<int>(index.doc_ids_.size());
    index.slot_of_.emplace(doc.doc_id, slot);
    index.doc_ids_.push_back(doc.doc_id);
    index.doc_lengths_.push_back(static_cast<int>(doc.tokens.size()));
    index.total_tokens_ += static_cast<long>(doc.tokens.size());
    std::unordered_map<std::string, int> counts;
    for (const auto& t : doc.tokens) ++counts[t];
    for (const auto& [term, tf] : counts) index.postings_[term].push_back({slot, tf});
  }
  // Postings sorted by doc_id so the index is deterministic regardless of
  // hash-map iteration order.
  for (auto& [term, list] : index.postings_) {
    (void)term;
    std::sort(list.begin(), list.end(), [&index](const Posting& x, const Posting& y) {
      return index.doc_ids_[x.doc] < index.doc_ids_[y.doc];
    });
  }
  index.avg_doc_length_ = index.doc_ids_.empty()
                              ? 0.0
                              : static_cast<double>(index.total_tokens_) / index.doc_ids_.size();
  return index;
}

int InvertedIndex::doc_slot(const std::string& doc_id) const {
  auto it = slot_of_.find(doc_id);
  if (it == slot_of_.end()) throw DataError("unknown doc_id: " + doc_id);
  return it->second;
}

int InvertedIndex::doc_length(const std::string& doc_id) const {
  return doc_lengths_[doc_slot(doc_id)];
}

const std::vector<InvertedIndex::Posting>& InvertedIndex::postings(const std::string& term) const {
  static const std::vector<Posting> empty;
  auto it = postings_.find(term);
  return it == postings_.end() ? empty : it->second;
}

int InvertedIndex::document_frequency(const std::string& term) const {
  return static_cast<int>(postings(term).size());
}

long InvertedIndex::collection_frequency(const std::string& term) const {
  long total = 0;
  for (const auto& p : postings(term)) total += p.tf;
  return total;
}

double InvertedIndex::idf(const std::string& term) const {
  double n = static_cast<double>(doc_count());
  double df = static_cast<double>(document_frequency(term));
  return std::log((n - df + 0.5) / (df + 0.5) + 1.0);
}

double InvertedIndex::bm25_score(const std::vector<std::string>& query_tokens,
                                 const std::string& doc_id, const Bm25Params& params) const {
  int slot = doc_slot(doc_id);
  double len = static_cast<double>(doc_lengths_[slot]);
  double norm = avg_doc_length_ > 0.0 ? len / avg_doc_length_ : 1.0;
  double score = 0.0;
  for (const auto& term : query_tokens) {
    const auto& list = postings(term);
    auto it = std::find_if(list.begin(), list.end(),
                           [slot](const Posting& p) { return p.doc == slot; });
    if (it == list.end()) continue;
    double tf = static_cast<double>(it->tf);
    score += idf(term) * tf * (params.k1 + 1.0) /
             (tf + params.k1 * (1.0 - params.b + params.b * norm));
  }
  return score;
}

RankedList InvertedIndex::retrieve_topk(const std::vector<std::string>& query_tokens, int k,
                                        const std::string& query_id,
                                        const Bm25Params& params) const {
  if (k < 1) throw DataError("retrieve_topk: k must be >= 1");
  // Accumulate scores over postings of the query terms only. Unique terms
  // in first-occurrence order keep float accumulation order fixed.
  std::unordered_map<int, double> scores;
  std::vector<std::string> unique_terms;
  std::unordered_map<std::string, int> qterm_count;
  for (const auto& term : query_tokens)
    if (++qterm_count[term] == 1) unique_terms.push_back(term);
  for (const auto& term : unique_terms) {
    int count = qterm_count[term];
    const auto& list = postings(term);
    if (list.empty()) continue;
    double term_idf = idf(term);
    for (const auto& p : list) {
      double len = static_cast<double>(doc_lengths_[p.doc]);
      double norm = avg_doc_length_ > 0.0 ? len / avg_doc_length_ : 1.0;
      double tf = static_cast<double>(p.tf);
      double contrib = term_idf * tf * (params.k1 + 1.0) /
                       (tf + params.k1 * (1.0 - params.b + params.b * norm));
      scores[p.doc] += contrib * count;
    }
  }
  std::vector<std::pair<int, double>> ranked(scores.begin(), scores.end());
  std::sort(ranked.begin(), ranked.end(), [this](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second > y.second;
    return doc_ids_[x.first] < doc_ids_[y.first];
  });
  if (static_cast<int>(ranked.size()) > k) ranked.resize(k);
  RankedList out{query_id, {}};
  out.entries.reserve(ranked.size());
  for (const auto& [slot, score] : ranked) out.entries.emplace_back(doc_ids_[slot], score);
  return out;
}

void InvertedIndex::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write index file: " + path);
  char buf[64];
  out << kIndexFormat << "\n";
  out << "docs " << doc_ids_.size() << "\n";
  for (std::size_t i = 0; i < doc_ids_.size(); ++i)
    out << doc_ids_[i] << " " << doc_lengths_[i] << "\n";
  std::vector<std::string> terms;
  terms.reserve(postings_.size());
  for (const auto& [term, list] : postings_) terms.push_back(term);
  std::sort(terms.begin(), terms.end());
  out << "terms " << terms.size() << "\n";
  for (const auto& term : terms) {
    const auto& list = postings_.at(term);
    out << term << " " << list.size();
    for (const auto& p : list) {
      std::snprintf(buf, sizeof(buf), " %d %d", p.doc, p.tf);
      out << buf;
    }
    out << "\n";
  }
  if (!out) throw DataError("I/O error while writing index file: " + path);
}

InvertedIndex InvertedIndex::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open index file: " + path);
  std::string header;
  std::getline(in, header);
  if (header != kIndexFormat)
    throw DataError("unsupported index format in " + path + ": " + header);
  InvertedIndex index;
  std::string word;
  std::size_t doc_count = 0;
  in >> word >> doc_count;
  if (word != "docs") throw DataError("corrupt index file (missing docs section): " + path);
  index.doc_ids_.resize(doc_count);
  index.doc_lengths_.resize(doc_count);
  for (std::size_t i = 0; i < doc_count; ++i) {
    in >> index.doc_ids_[i] >> index.doc_lengths_[i];
    index.slot_of_.emplace(index.doc_ids_[i], static_cast<int>(i));
    index.total_tokens_ += index.doc_lengths_[i];
  }
  index.avg_doc_length_ =
      doc_count == 0 ? 0.0 : static_cast<double>(index.total_tokens_) / doc_count;
  std::size_t term_count = 0;
  in >> word >> term_count;
  if (word != "terms") throw DataError("corrupt index file (missing terms section): " + path);
  for (std::size_t i = 0; i < term_count; ++i) {
    std::string term;
    std::size_t n = 0;
    in >> term >> n;
    auto& list = index.postings_[term];
    list.resize(n);
    for (auto& p : list) in >> p.doc >> p.tf;
  }
  if (!in) throw DataError("corrupt index file (truncated): " + path);
  return index;
}

}  // namespace cnir
