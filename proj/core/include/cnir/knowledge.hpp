#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "cnir/lexical.hpp"
#include "cnir/types.hpp"

namespace cnir {

enum class Relation { subclass, instanceof, same, related };

Relation parse_relation(const std::string& name);
const char* relation_name(Relation r);

struct KgEdge {
  std::string head;
  Relation relation;
  std::string tail;
};

// Entity store plus undirected adjacency over the four relation types.
class KnowledgeGraph {
 public:
  void add_entity(const std::string& entity_id, std::vector<std::string> surface_tokens);
  void add_edge(const std::string& head, Relation relation, const std::string& tail);

  bool has_entity(const std::string& entity_id) const { return surface_.count(entity_id) > 0; }
  const std::vector<std::string>& surface(const std::string& entity_id) const;
  std::size_t entity_count() const { return surface_.size(); }
  const std::vector<KgEdge>& edges() const { return edges_; }

  // Union of 1-hop neighbors of the inputs, inputs excluded, deduplicated,
  // ordered by entity id. Unknown input ids are an error.
  std::vector<std::string> neighbor_entities(const std::vector<std::string>& entity_ids) const;

  // Entity names: TSV `entity_id \t surface tokens`.
  static KnowledgeGraph load(const std::string& names_path, const std::string& edges_path);

 private:
  std::unordered_map<std::string, std::vector<std::string>> surface_;
  std::unordered_map<std::string, std::vector<std::string>> adjacency_;
  std::vector<KgEdge> edges_;
};

// Surface form -> candidate entities with commonness priors, sorted by
// descending commonness (entity id breaks ties).
class EntityDictionary {
 public:
  struct Sense {
    std::string entity_id;
    double commonness = 0.0;
  };

  void add(const std::string& surface, const std::string& entity_id, double commonness);
  const std::vector<Sense>* lookup(const std::string& surface) const;
  int max_surface_tokens() const { return max_surface_tokens_; }

  // TSV `surface \t entity_id \t commonness`.
  static EntityDictionary load(const std::string& path);

 private:
  std::unordered_map<std::string, std::vector<Sense>> senses_;
  int max_surface_tokens_ = 0;
};

struct CandidateTermSet {
  std::string query_id;
  std::vector<std::string> prf_terms;
  std::vector<std::string> know_terms;
  // prf_terms followed by know_terms.
  std::vector<std::string> all;
};

// Greedy longest-match scan over the query tokens; each matched span links
// the candidate with maximal commonness. Duplicate entity ids collapse to
// the first occurrence.
Query link_entities(const Query& query, const EntityDictionary& dict);

// C_q = C_PRF ∪ C_know. PRF terms are the unique tokens of prf_docs minus
// the query tokens, in first-occurrence order. Knowledge terms are surface
// tokens of the linked entities' neighbors, deduplicated against PRF and
// query terms, scored by max cosine against the query tokens, top know_top
// kept (ties lexicographic).
CandidateTermSet build_candidates(const Query& query, const std::vector<Document>& prf_docs,
                                  const KnowledgeGraph& kg, const Vocabulary& vocab,
                                  const EmbeddingTable& word_emb, int know_top = 20);

}  // namespace cnir
