#include "cnir/knowledge.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "cnir/log.hpp"

namespace cnir {

Relation parse_relation(const std::string& name) {
  if (name == "subclass") return Relation::subclass;
  if (name == "instanceof") return Relation::instanceof;
  if (name == "same") return Relation::same;
  if (name == "related") return Relation::related;
  throw DataError("unknown relation type: " + name);
}

const char* relation_name(Relation r) {
  switch (r) {
    case Relation::subclass: return "subclass";
    case Relation::instanceof: return "instanceof";
    case Relation::same: return "same";
    case Relation::related: return "related";
  }
  return "?";
}

void KnowledgeGraph::add_entity(const std::string& entity_id,
                                std::vector<std::string> surface_tokens) {
  surface_[entity_id] = std::move(surface_tokens);
}

void KnowledgeGraph::add_edge(const std::string& head, Relation relation,
                              const std::string& tail) {
  if (!has_entity(head)) throw DataError("edge endpoint not in graph: " + head);
  if (!has_entity(tail)) throw DataError("edge endpoint not in graph: " + tail);
  edges_.push_back({head, relation, tail});
  adjacency_[head].push_back(tail);
  adjacency_[tail].push_back(head);
}

const std::vector<std::string>& KnowledgeGraph::surface(const std::string& entity_id) const {
  auto it = surface_.find(entity_id);
  if (it == surface_.end()) throw DataError("unknown entity id: " + entity_id);
  return it->second;
}

std::vector<std::string> KnowledgeGraph::neighbor_entities(
    const std::vector<std::string>& entity_ids) const {
  std::set<std::string> inputs(entity_ids.begin(), entity_ids.end());
  std::set<std::string> out;
  for (const auto& id : entity_ids) {
    if (!has_entity(id)) throw DataError("unknown entity id: " + id);
    auto it = adjacency_.find(id);
    if (it == adjacency_.end()) continue;
    for (const auto& n : it->second)
      if (!inputs.count(n)) out.insert(n);
  }
  return {out.begin(), out.end()};
}

KnowledgeGraph KnowledgeGraph::load(const std::string& names_path, const std::string& edges_path) {
  KnowledgeGraph kg;
  {
    std::ifstream in(names_path);
    if (!in) throw DataError("cannot open entity names file: " + names_path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      auto tab = line.find('\t');
      if (tab == std::string::npos)
        throw DataError("entity names line " + std::to_string(line_no) + ": missing tab");
      kg.add_entity(line.substr(0, tab), tokenize(line.substr(tab + 1)));
    }
  }
  {
    std::ifstream in(edges_path);
    if (!in) throw DataError("cannot open kg edges file: " + edges_path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      std::istringstream ls(line);
      std::string head, rel, tail;
      if (!(std::getline(ls, head, '\t') && std::getline(ls, rel, '\t') &&
            std::getline(ls, tail)))
        throw DataError("kg edges line " + std::to_string(line_no) + ": expected 3 fields");
      kg.add_edge(head, parse_relation(rel), tail);
    }
  }
  return kg;
}

void EntityDictionary::add(const std::string& surface, const std::string& entity_id,
                           double commonness) {
  if (commonness < 0.0 || commonness > 1.0)
    throw DataError("commonness out of [0,1] for surface '" + surface + "'");
  auto& list = senses_[surface];
  list.push_back({entity_id, commonness});
  std::sort(list.begin(), list.end(), [](const Sense& a, const Sense& b) {
    if (a.commonness != b.commonness) return a.commonness > b.commonness;
    return a.entity_id < b.entity_id;
  });
  double total = 0.0;
  for (const auto& s : list) total += s.commonness;
  if (total > 1.0 + 1e-6)
    throw DataError("commonness values for surface '" + surface + "' sum to " +
                    std::to_string(total));
  int tokens = 1 + static_cast<int>(std::count(surface.begin(), surface.end(), ' '));
  max_surface_tokens_ = std::max(max_surface_tokens_, tokens);
}

const std::vector<EntityDictionary::Sense>* EntityDictionary::lookup(
    const std::string& surface) const {
  auto it = senses_.find(surface);
  return it == senses_.end() ? nullptr : &it->second;
}

EntityDictionary EntityDictionary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open entity dictionary file: " + path);
  EntityDictionary dict;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string surface, entity_id, commonness_text;
    if (!(std::getline(ls, surface, '\t') && std::getline(ls, entity_id, '\t') &&
          std::getline(ls, commonness_text)))
      throw DataError("entity dictionary line " + std::to_string(line_no) +
                      ": expected 3 fields");
    // Surfaces are stored space-joined over their lowercased tokens.
    auto tokens = tokenize(surface);
    std::string joined;
    for (const auto& t : tokens) {
      if (!joined.empty()) joined += ' ';
      joined += t;
    }
    dict.add(joined, entity_id, std::stod(commonness_text));
  }
  return dict;
}

Query link_entities(const Query& query, const EntityDictionary& dict) {
  Query out = query;
  out.linked_entities.clear();
  std::unordered_set<std::string> seen;
  std::size_t i = 0;
  const auto& toks = query.tokens;
  int max_len = std::max(1, dict.max_surface_tokens());
  while (i < toks.size()) {
    std::size_t longest = 0;
    const EntityDictionary::Sense* pick = nullptr;
    std::string span;
    for (std::size_t len = 1; len <= static_cast<std::size_t>(max_len) && i + len <= toks.size();
         ++len) {
      if (len == 1)
        span = toks[i];
      else
        span += ' ' + toks[i + len - 1];
      const auto* senses = dict.lookup(span);
      if (senses && !senses->empty()) {
        longest = len;
        pick = &senses->front();  // maximal commonness (list pre-sorted)
      }
    }
    if (pick) {
      if (seen.insert(pick->entity_id).second) out.linked_entities.push_back(pick->entity_id);
      i += longest;
    } else {
      ++i;
    }
  }
  return out;
}

CandidateTermSet build_candidates(const Query& query, const std::vector<Document>& prf_docs,
                                  const KnowledgeGraph& kg, const Vocabulary& vocab,
                                  const EmbeddingTable& word_emb, int know_top) {
  CandidateTermSet set;
  set.query_id = query.query_id;

  std::unordered_set<std::string> query_tokens(query.tokens.begin(), query.tokens.end());
  std::unordered_set<std::string> used;

  for (const auto& doc : prf_docs) {
    for (const auto& t : doc.tokens) {
      if (query_tokens.count(t) || used.count(t)) continue;
      used.insert(t);
      set.prf_terms.push_back(t);
    }
  }

  if (!query.linked_entities.empty()) {
    auto neighbors = kg.neighbor_entities(query.linked_entities);
    std::vector<std::string> pool;
    std::unordered_set<std::string> pooled;
    for (const auto& entity : neighbors) {
      for (const auto& t : kg.surface(entity)) {
        if (query_tokens.count(t) || used.count(t) || pooled.count(t)) continue;
        pooled.insert(t);
        pool.push_back(t);
      }
    }
    // Similarity to the query = max cosine over the query tokens.
    std::vector<std::pair<double, std::string>> scored;
    scored.reserve(pool.size());
    for (const auto& term : pool) {
      double best = -2.0;
      auto term_row = word_emb.row(vocab.id(term));
      for (const auto& qt : query.tokens)
        best = std::max(best, cosine(term_row, word_emb.row(vocab.id(qt))));
      scored.emplace_back(best, term);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    if (static_cast<int>(scored.size()) > know_top) scored.resize(know_top);
    for (const auto& [score, term] : scored) set.know_terms.push_back(term);
  }

  set.all = set.prf_terms;
  set.all.insert(set.all.end(), set.know_terms.begin(), set.know_terms.end());
  return set;
}

}  // namespace cnir
