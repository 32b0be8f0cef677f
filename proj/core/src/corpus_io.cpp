#include "cnir/corpus_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

#include "cnir/lexical.hpp"
#include "cnir/log.hpp"

namespace cnir {

std::vector<Document> load_corpus(const std::string& path, int* empty_title_count) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file: " + path);
  std::vector<Document> docs;
  std::unordered_set<std::string> seen;
  std::string line;
  int line_no = 0;
  int empty_titles = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError("corpus line " + std::to_string(line_no) + ": malformed JSON: " + e.what());
    }
    if (!obj.is_object() || !obj.contains("id") || !obj.contains("title") ||
        !obj["id"].is_string() || !obj["title"].is_string()) {
      throw DataError("corpus line " + std::to_string(line_no) +
                      ": expected object with string keys `id` and `title`");
    }
    Document doc;
    doc.doc_id = obj["id"].get<std::string>();
    if (doc.doc_id.empty())
      throw DataError("corpus line " + std::to_string(line_no) + ": empty doc id");
    if (!seen.insert(doc.doc_id).second)
      throw DataError("duplicate doc_id in corpus: " + doc.doc_id);
    doc.tokens = tokenize(obj["title"].get<std::string>());
    if (doc.tokens.empty()) ++empty_titles;
    docs.push_back(std::move(doc));
  }
  if (empty_titles > 0)
    log::warn(std::to_string(empty_titles) + " document(s) with empty title in " + path);
  if (empty_title_count) *empty_title_count = empty_titles;
  return docs;
}

std::vector<Query> load_queries(const std::string& path, int* skipped_blank) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open queries file: " + path);
  std::vector<Query> queries;
  std::unordered_set<std::string> seen;
  std::string line;
  int line_no = 0;
  int blanks = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      ++blanks;
      continue;
    }
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw DataError("queries line " + std::to_string(line_no) + ": missing tab separator");
    Query q;
    q.query_id = line.substr(0, tab);
    q.tokens = tokenize(line.substr(tab + 1));
    if (q.query_id.empty())
      throw DataError("queries line " + std::to_string(line_no) + ": empty query id");
    if (q.tokens.empty())
      throw DataError("queries line " + std::to_string(line_no) + ": empty query tokens for " +
                      q.query_id);
    if (!seen.insert(q.query_id).second)
      throw DataError("duplicate query_id in query set: " + q.query_id);
    queries.push_back(std::move(q));
  }
  if (blanks > 0) log::warn(std::to_string(blanks) + " blank line(s) skipped in " + path);
  if (skipped_blank) *skipped_blank = blanks;
  return queries;
}

JudgmentSet load_qrels(const std::string& path, int* duplicate_count) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open qrels file: " + path);
  JudgmentSet judgments;
  std::string line;
  int line_no = 0;
  int duplicates = 0;
  std::unordered_set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string query_id, zero, doc_id;
    long grade = 0;
    if (!(ls >> query_id >> zero >> doc_id >> grade))
      throw DataError("qrels line " + std::to_string(line_no) + ": expected 4 fields");
    if (grade < 0)
      throw DataError("qrels line " + std::to_string(line_no) + ": negative grade for (" +
                      query_id + ", " + doc_id + ")");
    std::string key = query_id + "\t" + doc_id;
    if (!seen.insert(key).second) {
      ++duplicates;
      log::warn("duplicate qrels pair (" + query_id + ", " + doc_id + "); keeping last value");
    }
    judgments.set(query_id, doc_id, static_cast<int>(grade));
  }
  if (duplicate_count) *duplicate_count = duplicates;
  return judgments;
}

void write_run(const std::vector<RankedList>& lists, const std::string& path,
               const std::string& tag) {
  for (const auto& list : lists) list.validate();
  std::ofstream out(path);
  if (!out) throw DataError("cannot write run file: " + path);
  char buf[64];
  for (const auto& list : lists) {
    int rank = 0;
    for (const auto& [doc_id, score] : list.entries) {
      ++rank;
      std::snprintf(buf, sizeof(buf), "%.6f", score);
      out << list.query_id << " Q0 " << doc_id << " " << rank << " " << buf << " " << tag << "\n";
    }
  }
  if (!out) throw DataError("I/O error while writing run file: " + path);
}

std::vector<RankedList> load_run(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open run file: " + path);
  std::vector<RankedList> lists;
  std::string line;
  int line_no = 0;
  std::string current;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string query_id, q0, doc_id, tag;
    long rank = 0;
    double score = 0.0;
    if (!(ls >> query_id >> q0 >> doc_id >> rank >> score >> tag))
      throw DataError("run line " + std::to_string(line_no) + ": expected 6 fields");
    if (lists.empty() || query_id != current) {
      lists.push_back(RankedList{query_id, {}});
      current = query_id;
    }
    lists.back().entries.emplace_back(doc_id, score);
  }
  for (const auto& list : lists) list.validate();
  return lists;
}

}  // namespace cnir
