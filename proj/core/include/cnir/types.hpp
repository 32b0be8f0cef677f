#pragma once

#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace cnir {

// Raised by loaders and validators on malformed or inconsistent data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Document {
  std::string doc_id;
  std::vector<std::string> tokens;  // title text only
};

struct Query {
  std::string query_id;
  std::vector<std::string> tokens;
  std::vector<std::string> linked_entities;
};

// Graded relevance judgments. Unjudged pairs read as grade 0.
class JudgmentSet {
 public:
  void set(const std::string& query_id, const std::string& doc_id, int grade);
  int grade(const std::string& query_id, const std::string& doc_id) const;
  bool judged(const std::string& query_id) const;
  // All (doc_id, grade) entries recorded for a query, in insertion order.
  const std::vector<std::pair<std::string, int>>& entries(const std::string& query_id) const;
  int max_grade() const { return max_grade_; }
  std::size_t size() const { return total_; }

 private:
  std::unordered_map<std::string, std::unordered_map<std::string, std::size_t>> slot_;
  std::unordered_map<std::string, std::vector<std::pair<std::string, int>>> by_query_;
  int max_grade_ = 0;
  std::size_t total_ = 0;
};

struct RankedList {
  std::string query_id;
  std::vector<std::pair<std::string, double>> entries;  // (doc_id, score), score desc

  // Throws DataError if entries are not score-descending or repeat a doc_id.
  void validate() const;
};

inline void JudgmentSet::set(const std::string& query_id, const std::string& doc_id, int grade) {
  if (grade < 0) throw DataError("negative relevance grade for (" + query_id + ", " + doc_id + ")");
  auto& slots = slot_[query_id];
  auto& rows = by_query_[query_id];
  auto it = slots.find(doc_id);
  if (it != slots.end()) {
    rows[it->second].second = grade;
  } else {
    slots.emplace(doc_id, rows.size());
    rows.emplace_back(doc_id, grade);
    ++total_;
  }
  if (grade > max_grade_) max_grade_ = grade;
}

inline int JudgmentSet::grade(const std::string& query_id, const std::string& doc_id) const {
  auto q = slot_.find(query_id);
  if (q == slot_.end()) return 0;
  auto d = q->second.find(doc_id);
  if (d == q->second.end()) return 0;
  return by_query_.at(query_id)[d->second].second;
}

inline bool JudgmentSet::judged(const std::string& query_id) const {
  auto q = by_query_.find(query_id);
  return q != by_query_.end() && !q->second.empty();
}

inline const std::vector<std::pair<std::string, int>>& JudgmentSet::entries(
    const std::string& query_id) const {
  static const std::vector<std::pair<std::string, int>> empty;
  auto q = by_query_.find(query_id);
  return q == by_query_.end() ? empty : q->second;
}

inline void RankedList::validate() const {
  std::unordered_map<std::string, int> seen;
  double prev = 0.0;
  bool first = true;
  for (const auto& [doc_id, score] : entries) {
    if (++seen[doc_id] > 1) throw DataError("duplicate doc_id in ranked list: " + doc_id);
    if (!first && score > prev)
      throw DataError("ranked list for " + query_id + " not sorted by descending score");
    prev = score;
    first = false;
  }
}

}  // namespace cnir
