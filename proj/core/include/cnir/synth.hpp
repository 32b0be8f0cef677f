#pragma once

#include <cstdint>
#include <string>

namespace cnir {

// Deterministic generator for a small retrieval collection with a planted
// vocabulary-mismatch structure: each query uses an alias token whose
// canonical partner appears only in that query's relevant document, the
// knowledge graph links the two, and a twin distractor makes the pair
// indistinguishable without the canonical term.
struct SynthParams {
  uint64_t seed = 1;
  int n_queries = 160;
  int n_train = 100;
  int n_valid = 30;
  int n_test = 30;
  int n_docs = 500;
  int vocab_size = 400;
  int synonym_pairs = 25;
  int embedding_dim = 50;

  void validate() const;
};

// Writes corpus.jsonl, queries_{train,valid,test}.tsv, qrels.txt,
// kg_names.tsv, kg_edges.tsv, entity_dict.tsv, word_embeddings.txt,
// entity_embeddings.txt and config.cfg into `out_dir`. Refuses to emit a
// dataset that violates the planted-uplift guarantee.
void generate_synth(const SynthParams& params, const std::string& out_dir);

}  // namespace cnir
