#include "cnir/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <vector>

#include "cnir/config.hpp"
#include "cnir/lexical.hpp"
#include "cnir/metrics.hpp"
#include "cnir/retrieval.hpp"
#include "cnir/rng.hpp"
#include "cnir/types.hpp"

namespace cnir {

namespace {

std::string tag(const char* prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%03d", prefix, i);
  return buf;
}

std::vector<double> random_unit(Rng& rng, int dim) {
  std::vector<double> v(dim);
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (auto& x : v) {
      x = rng.uniform(-1.0, 1.0);
      norm2 += x * x;
    }
  } while (norm2 < 1e-6);
  double inv = 1.0 / std::sqrt(norm2);
  for (auto& x : v) x *= inv;
  return v;
}

std::vector<double> orthonormal_to(Rng& rng, const std::vector<double>& u) {
  while (true) {
    auto v = random_unit(rng, static_cast<int>(u.size()));
    double dot = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * v[i];
    double norm2 = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      v[i] -= dot * u[i];
      norm2 += v[i] * v[i];
    }
    if (norm2 < 1e-6) continue;
    double inv = 1.0 / std::sqrt(norm2);
    for (auto& x : v) x *= inv;
    return v;
  }
}

// k distinct indices from [0, n), in draw order.
std::vector<int> sample_distinct(Rng& rng, int n, int k) {
  std::set<int> seen;
  std::vector<int> out;
  while (static_cast<int>(out.size()) < k) {
    int idx = static_cast<int>(rng.index(n));
    if (seen.insert(idx).second) out.push_back(idx);
  }
  return out;
}

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

}  // namespace

void SynthParams::validate() const {
  if (n_queries < 1 || n_docs < 1 || vocab_size < 1 || embedding_dim < 1 || synonym_pairs < 0)
    throw DataError("synth: parameters must be positive (synonym_pairs may be 0)");
  if (n_train + n_valid + n_test != n_queries)
    throw DataError("synth: train + valid + test must equal n_queries");
  if (vocab_size < 4 * synonym_pairs)
    throw DataError("synth: vocab_size must be at least 4 * synonym_pairs");
  int topics = synonym_pairs > 0 ? (n_queries + 1) / 2 : n_queries;
  if (6 * topics > n_docs)
    throw DataError("synth: n_docs too small; need at least 6 docs per topic (" +
                    std::to_string(6 * topics) + ")");
  int reserved = 4 * synonym_pairs + topics;
  if (vocab_size - reserved < 24)
    throw DataError("synth: vocab_size leaves fewer than 24 filler tokens");
}

void generate_synth(const SynthParams& params, const std::string& out_dir) {
  params.validate();
  std::filesystem::create_directories(out_dir);
  Rng rng(mix64(params.seed ^ 0x5717a5f0c0ffee00ULL));

  int pairs = params.synonym_pairs;
  int topics = pairs > 0 ? (params.n_queries + 1) / 2 : params.n_queries;
  int fillers = params.vocab_size - 4 * pairs - topics;

  std::vector<std::string> alias(pairs), canon(pairs), decoy(pairs), kgnoise(pairs);
  for (int p = 0; p < pairs; ++p) {
    alias[p] = tag("alias", p);
    canon[p] = tag("canon", p);
    decoy[p] = tag("decoy", p);
    kgnoise[p] = tag("kgnoise", p);
  }
  std::vector<std::string> topic(topics), filler(fillers);
  for (int t = 0; t < topics; ++t) topic[t] = tag("topic", t);
  for (int f = 0; f < fillers; ++f) filler[f] = tag("word", f);

  // Documents. Per topic (pairs > 0): pure1, pure2, twinA, twinB, relA,
  // relB — relevants carry the largest doc ids so raw-query ties rank them
  // last, and the BM25 top-3 (the PRF docs) never contain the canonical
  // term: it can only enter the candidate set through the knowledge graph.
  // Twins mirror the relevants exactly except decoy-vs-canon.
  std::vector<Document> docs;
  std::vector<Query> queries;
  struct Qrel {
    std::string qid, did;
    int grade;
  };
  std::vector<Qrel> qrels;
  auto doc_id = [](int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "d%04d", i);
    return std::string(buf);
  };

  if (pairs > 0) {
    for (int t = 0; t < topics; ++t) {
      int pair_a = (2 * t) % pairs;
      int pair_b = (2 * t + 1) % pairs;
      auto picks = sample_distinct(rng, fillers, 18);
      std::vector<std::string> fa, fb, fp;
      for (int i = 0; i < 4; ++i) fa.push_back(filler[picks[i]]);
      for (int i = 4; i < 8; ++i) fb.push_back(filler[picks[i]]);
      for (int i = 8; i < 18; ++i) fp.push_back(filler[picks[i]]);

      int base = static_cast<int>(docs.size());
      auto add_doc = [&](std::vector<std::string> tokens) {
        docs.push_back({doc_id(static_cast<int>(docs.size())), std::move(tokens)});
      };
      add_doc({topic[t], fp[0], fp[1], fp[2], fp[3], fp[4]});            // pure1
      add_doc({topic[t], fp[5], fp[6], fp[7], fp[8], fp[9]});            // pure2
      add_doc({topic[t], decoy[pair_a], fa[0], fa[1], fa[2], fa[3]});    // twinA
      add_doc({topic[t], decoy[pair_b], fb[0], fb[1], fb[2], fb[3]});    // twinB
      add_doc({topic[t], canon[pair_a], fa[0], fa[1], fa[2], fa[3]});    // relA
      add_doc({topic[t], canon[pair_b], fb[0], fb[1], fb[2], fb[3]});    // relB

      for (int slot = 0; slot < 2; ++slot) {
        int q = 2 * t + slot;
        if (q >= params.n_queries) break;
        char qid[16];
        std::snprintf(qid, sizeof(qid), "q%04d", q);
        int pair = slot == 0 ? pair_a : pair_b;
        queries.push_back({qid, {alias[pair], topic[t]}, {}});
        int rel = base + 4 + slot;
        for (int d = 0; d < 6; ++d)
          qrels.push_back({qid, doc_id(base + d), base + d == rel ? 1 : 0});
      }
    }
  } else {
    // Control condition: no synonym structure; the topic term alone already
    // identifies the relevant documents.
    for (int t = 0; t < topics; ++t) {
      auto picks = sample_distinct(rng, fillers, 18);
      int base = static_cast<int>(docs.size());
      auto add_doc = [&](std::vector<std::string> tokens) {
        docs.push_back({doc_id(static_cast<int>(docs.size())), std::move(tokens)});
      };
      add_doc({topic[t], filler[picks[0]], filler[picks[1]], filler[picks[2]],
               filler[picks[3]], filler[picks[4]]});
      add_doc({topic[t], filler[picks[5]], filler[picks[6]], filler[picks[7]],
               filler[picks[8]], filler[picks[9]]});
      for (int d = 0; d < 4; ++d)
        add_doc({filler[picks[10 + 2 * d]], filler[picks[11 + 2 * d]]});
      char qid[16];
      std::snprintf(qid, sizeof(qid), "q%04d", t);
      queries.push_back({qid, {topic[t]}, {}});
      qrels.push_back({qid, doc_id(base), 1});
      qrels.push_back({qid, doc_id(base + 1), 1});
    }
  }
  // Background padding documents; no topic token, never retrieved.
  while (static_cast<int>(docs.size()) < params.n_docs) {
    auto picks = sample_distinct(rng, fillers, 6);
    std::vector<std::string> tokens;
    for (int i : picks) tokens.push_back(filler[i]);
    docs.push_back({doc_id(static_cast<int>(docs.size())), std::move(tokens)});
  }

  // Word embeddings: alias/canon/decoy clusters with exact symmetric
  // geometry — cos(alias, canon) = cos(alias, decoy) = 0.9 with canon and
  // decoy on opposite sides of the alias cone, so the raw query cannot
  // tell a relevant document from its twin. Everything else is a random
  // unit vector.
  int dim = params.embedding_dim;
  if (dim < 2) throw DataError("synth: embedding_dim must be at least 2");
  std::vector<std::string> word_tokens;
  std::vector<std::vector<double>> word_rows;
  double side = std::sqrt(1.0 - 0.81);
  for (int p = 0; p < pairs; ++p) {
    auto u = random_unit(rng, dim);
    auto v = orthonormal_to(rng, u);
    std::vector<double> canon_vec(dim), decoy_vec(dim);
    for (int d = 0; d < dim; ++d) {
      canon_vec[d] = 0.9 * u[d] + side * v[d];
      decoy_vec[d] = 0.9 * u[d] - side * v[d];
    }
    word_tokens.push_back(alias[p]);
    word_rows.push_back(u);
    word_tokens.push_back(canon[p]);
    word_rows.push_back(canon_vec);
    word_tokens.push_back(decoy[p]);
    word_rows.push_back(decoy_vec);
    word_tokens.push_back(kgnoise[p]);
    word_rows.push_back(random_unit(rng, dim));
  }
  for (int t = 0; t < topics; ++t) {
    word_tokens.push_back(topic[t]);
    word_rows.push_back(random_unit(rng, dim));
  }
  for (int f = 0; f < fillers; ++f) {
    word_tokens.push_back(filler[f]);
    word_rows.push_back(random_unit(rng, dim));
  }

  std::vector<std::string> entity_ids;
  std::vector<std::vector<double>> entity_rows;
  for (int p = 0; p < pairs; ++p) {
    for (const char* kind : {"ea", "ec", "en"}) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%s%03d", kind, p);
      entity_ids.push_back(buf);
      entity_rows.push_back(random_unit(rng, dim));
    }
  }

  // Planted-property self-checks before anything is written.
  InvertedIndex index = InvertedIndex::build(docs);
  JudgmentSet judgments;
  for (const auto& r : qrels) judgments.set(r.qid, r.did, r.grade);
  std::vector<RankedList> raw_lists, oracle_lists;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto& q = queries[i];
    RankedList pool = index.retrieve_topk(q.tokens, 10, q.query_id);
    raw_lists.push_back(pool);
    if (pairs == 0) continue;
    int t = static_cast<int>(i) / 2;
    int p = (2 * t + static_cast<int>(i) % 2) % pairs;
    std::vector<std::string> expanded = q.tokens;
    expanded.push_back(canon[p]);
    for (const auto& [did, score] : pool.entries) {
      if (judgments.grade(q.query_id, did) >= 1 &&
          index.bm25_score(expanded, did) <= index.bm25_score(q.tokens, did))
        throw DataError("synth self-check failed: canonical term does not raise BM25 for " + did);
    }
    RankedList oracle{q.query_id, {}};
    for (const auto& [did, score] : pool.entries)
      oracle.entries.emplace_back(did, index.bm25_score(expanded, did));
    std::sort(oracle.entries.begin(), oracle.entries.end(), [](const auto& x, const auto& y) {
      if (x.second != y.second) return x.second > y.second;
      return x.first < y.first;
    });
    oracle_lists.push_back(std::move(oracle));
  }
  double raw_map = evaluate(raw_lists, judgments).mean.map;
  if (pairs > 0) {
    double oracle_map = evaluate(oracle_lists, judgments).mean.map;
    if (oracle_map != 1.0)
      throw DataError("synth self-check failed: oracle expansion MAP " +
                      std::to_string(oracle_map) + " != 1");
    if (raw_map >= 0.6)
      throw DataError("synth self-check failed: raw BM25 MAP " + std::to_string(raw_map) +
                      " not < 0.6");
  } else if (raw_map != 1.0) {
    throw DataError("synth self-check failed: control condition raw MAP " +
                    std::to_string(raw_map) + " != 1");
  }

  // Emit files.
  auto path = [&](const char* name) { return out_dir + "/" + name; };
  {
    std::ofstream out(path("corpus.jsonl"));
    for (const auto& d : docs)
      out << "{\"id\":\"" << d.doc_id << "\",\"title\":\"" << join(d.tokens) << "\"}\n";
  }
  {
    std::ofstream train(path("queries_train.tsv")), valid(path("queries_valid.tsv")),
        test(path("queries_test.tsv"));
    for (int i = 0; i < params.n_queries; ++i) {
      std::ofstream& out = i < params.n_train ? train
                           : i < params.n_train + params.n_valid ? valid
                                                                 : test;
      out << queries[i].query_id << "\t" << join(queries[i].tokens) << "\n";
    }
  }
  {
    std::ofstream out(path("qrels.txt"));
    for (const auto& r : qrels) out << r.qid << " 0 " << r.did << " " << r.grade << "\n";
  }
  {
    std::ofstream names(path("kg_names.tsv"));
    std::ofstream edges(path("kg_edges.tsv"));
    std::ofstream dict(path("entity_dict.tsv"));
    for (int p = 0; p < pairs; ++p) {
      char ea[16], ec[16], en[16];
      std::snprintf(ea, sizeof(ea), "ea%03d", p);
      std::snprintf(ec, sizeof(ec), "ec%03d", p);
      std::snprintf(en, sizeof(en), "en%03d", p);
      names << ea << "\t" << alias[p] << "\n";
      names << ec << "\t" << canon[p] << "\n";
      names << en << "\t" << kgnoise[p] << "\n";
      edges << ea << "\tsame\t" << ec << "\n";
      edges << ea << "\trelated\t" << en << "\n";
      dict << alias[p] << "\t" << ea << "\t0.9\n";
      dict << alias[p] << "\t" << en << "\t0.1\n";
      dict << canon[p] << "\t" << ec << "\t1.0\n";
    }
  }
  write_embeddings(path("word_embeddings.txt"), word_tokens, word_rows);
  write_embeddings(path("entity_embeddings.txt"), entity_ids, entity_rows);
  {
    TrainingConfig config;
    config.seed = params.seed;
    std::ofstream out(path("config.cfg"));
    out << config.serialize();
  }
}

}  // namespace cnir
