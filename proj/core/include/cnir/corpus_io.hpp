#pragma once

#include <string>
#include <vector>

#include "cnir/types.hpp"

namespace cnir {

// JSONL corpus, one object per line with keys `id` and `title`. Documents
// come back in file order; empty titles are kept and counted in
// `empty_title_count` when the pointer is given.
std::vector<Document> load_corpus(const std::string& path, int* empty_title_count = nullptr);

// TSV queries, `query_id \t text`. Blank lines are skipped and counted in
// `skipped_blank` when the pointer is given. linked_entities stays empty.
std::vector<Query> load_queries(const std::string& path, int* skipped_blank = nullptr);

// TREC 4-column qrels `query_id 0 doc_id grade`. Duplicate (query, doc)
// pairs keep the last value; duplicates are counted in `duplicate_count`.
JudgmentSet load_qrels(const std::string& path, int* duplicate_count = nullptr);

// TREC 6-column run file `query_id Q0 doc_id rank score tag`, scores with
// six decimal places. Lists must satisfy RankedList invariants.
void write_run(const std::vector<RankedList>& lists, const std::string& path,
               const std::string& tag = "cnir");

std::vector<RankedList> load_run(const std::string& path);

}  // namespace cnir
