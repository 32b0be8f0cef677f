#include "cnir/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <thread>

#include "cnir/log.hpp"

namespace cnir {

namespace {

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> workers;
  std::size_t used = std::min<std::size_t>(threads, n);
  for (std::size_t w = 0; w < used; ++w) {
    workers.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += used) fn(i);
    });
  }
  for (auto& t : workers) t.join();
}

std::vector<int> shuffled_indices(std::size_t n, Rng& rng) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  return order;
}

}  // namespace

DataPaths DataPaths::from_dir(const std::string& dir, const std::string& which) {
  DataPaths paths;
  paths.corpus = dir + "/corpus.jsonl";
  paths.queries = dir + "/queries_" + which + ".tsv";
  paths.qrels = dir + "/qrels.txt";
  paths.kg_names = dir + "/kg_names.tsv";
  paths.kg_edges = dir + "/kg_edges.tsv";
  paths.entity_dict = dir + "/entity_dict.tsv";
  paths.word_embeddings = dir + "/word_embeddings.txt";
  paths.entity_embeddings = dir + "/entity_embeddings.txt";
  return paths;
}

const Document* PipelineData::doc(const std::string& doc_id) const {
  auto it = doc_slot.find(doc_id);
  return it == doc_slot.end() ? nullptr : &corpus[it->second];
}

EmbeddingContext PipelineData::ctx() const {
  return {&vocab, &word_emb, &entity_vocab, &entity_emb};
}

PipelineData load_pipeline_data(const DataPaths& paths, const TrainingConfig& config,
                                const PipelineData* shared) {
  PipelineData data;
  data.queries = load_queries(paths.queries);
  data.judgments = load_qrels(paths.qrels);

  if (shared) {
    data.corpus = shared->corpus;
    data.doc_slot = shared->doc_slot;
    data.index = shared->index;
    data.kg = shared->kg;
    data.dict = shared->dict;
    data.vocab = shared->vocab;
    data.entity_vocab = shared->entity_vocab;
    data.word_emb = shared->word_emb;
    data.entity_emb = shared->entity_emb;
  } else {
    data.corpus = load_corpus(paths.corpus);
    for (std::size_t i = 0; i < data.corpus.size(); ++i)
      data.doc_slot.emplace(data.corpus[i].doc_id, static_cast<int>(i));
    data.index = InvertedIndex::build(data.corpus);
    data.kg = KnowledgeGraph::load(paths.kg_names, paths.kg_edges);
    data.dict = EntityDictionary::load(paths.entity_dict);

    // Vocabulary: corpus order, then query tokens, then KG surfaces by
    // entity id; deterministic regardless of map iteration order.
    for (const auto& doc : data.corpus)
      for (const auto& t : doc.tokens) data.vocab.add(t);
    for (const auto& q : data.queries)
      for (const auto& t : q.tokens) data.vocab.add(t);
    std::set<std::string> entity_ids;
    for (const auto& edge : data.kg.edges()) {
      entity_ids.insert(edge.head);
      entity_ids.insert(edge.tail);
    }
    for (const auto& id : entity_ids)
      for (const auto& t : data.kg.surface(id)) data.vocab.add(t);
    for (const auto& id : entity_ids) data.entity_vocab.add(id);

    Rng word_rng = derive_rng(config.seed, "word_embeddings");
    data.word_emb = load_embeddings(paths.word_embeddings, data.vocab, EmbeddingKind::word,
                                    word_rng);
    Rng entity_rng = derive_rng(config.seed, "entity_embeddings");
    data.entity_emb = load_embeddings(paths.entity_embeddings, data.entity_vocab,
                                      EmbeddingKind::entity, entity_rng);
  }

  // Validate judged docs against the corpus (warn only).
  int missing = 0;
  for (const auto& q : data.queries)
    for (const auto& [did, grade] : data.judgments.entries(q.query_id))
      if (!data.doc_slot.count(did)) ++missing;
  if (missing > 0)
    log::warn(std::to_string(missing) + " judged doc(s) missing from the corpus");

  Bm25Params bm25{config.bm25_k1, config.bm25_b};
  for (auto& q : data.queries) {
    q = link_entities(q, data.dict);
    RankedList pool = data.index.retrieve_topk(q.tokens, config.pool_size, q.query_id, bm25);
    std::vector<Document> prf_docs;
    for (int i = 0; i < std::min<int>(config.prf_k, static_cast<int>(pool.entries.size())); ++i)
      prf_docs.push_back(*data.doc(pool.entries[i].first));
    data.candidates.emplace(
        q.query_id,
        build_candidates(q, prf_docs, data.kg, data.vocab, data.word_emb, config.know_top));
    data.pools.emplace(q.query_id, std::move(pool));
  }
  return data;
}

KnrmParameters init_knrm(const PipelineData& data, const TrainingConfig& config) {
  return KnrmParameters::init(KernelBank::standard(config.kernels), data.word_emb,
                              config.train_embeddings);
}

std::vector<std::pair<std::string, std::string>> training_pairs(const PipelineData& data,
                                                                const Query& query) {
  const auto& pool = data.pools.at(query.query_id);
  std::vector<std::pair<std::string, std::string>> pairs;
  for (std::size_t i = 0; i < pool.entries.size(); ++i) {
    const auto& di = pool.entries[i].first;
    if (data.doc(di)->tokens.empty()) continue;
    int gi = data.judgments.grade(query.query_id, di);
    for (std::size_t j = 0; j < pool.entries.size(); ++j) {
      if (i == j) continue;
      const auto& dj = pool.entries[j].first;
      if (data.doc(dj)->tokens.empty()) continue;
      int gj = data.judgments.grade(query.query_id, dj);
      if (gi > gj) pairs.emplace_back(di, dj);
    }
  }
  return pairs;
}

namespace {

// Mean pairwise-hinge gradient over the query's pairs; returns pair count
// with positive loss. Steps are applied by the caller.
int query_pair_gradients(const PipelineData& data, const Query& query,
                         const std::vector<std::string>& scoring_tokens,
                         const KnrmParameters& ranker, KnrmGradients& grads, Rng& rng) {
  auto pairs = training_pairs(data, query);
  if (pairs.empty()) return 0;
  std::vector<int> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  int active = 0;
  for (int idx : order) {
    const auto& [plus_id, minus_id] = pairs[idx];
    const Document* plus = data.doc(plus_id);
    const Document* minus = data.doc(minus_id);
    double loss = pairwise_gradients(scoring_tokens, *plus, *minus,
                                     data.judgments.grade(query.query_id, plus_id),
                                     data.judgments.grade(query.query_id, minus_id), data.vocab,
                                     ranker, grads);
    if (loss > 0.0) ++active;
  }
  if (active > 0) grads.scale(1.0 / static_cast<double>(pairs.size()));
  return active;
}

}  // namespace

KnrmParameters pretrain_ranker(const PipelineData& train, const PipelineData& valid,
                               const TrainingConfig& config,
                               std::vector<std::pair<int, double>>* curve) {
  KnrmParameters ranker = init_knrm(train, config);
  if (config.pretrain_epochs == 0) return ranker;

  bool any_pairs = false;
  for (const auto& q : train.queries)
    if (!training_pairs(train, q).empty()) any_pairs = true;
  if (!any_pairs) throw DataError("pretrain_ranker: no trainable pairs in the training split");

  Adam optimizer;
  KnrmParameters best = ranker;
  double best_metric = -1.0;
  int best_epoch = 0;
  KnrmGradients grads;
  for (int epoch = 1; epoch <= config.pretrain_epochs; ++epoch) {
    Rng order_rng = derive_rng(config.seed, "pretrain_order", epoch);
    for (int qi : shuffled_indices(train.queries.size(), order_rng)) {
      const Query& query = train.queries[qi];
      grads.reset(ranker);
      Rng pair_rng = derive_rng(config.seed, query.query_id, mix64(epoch) ^ fnv1a("pretrain"));
      int active = query_pair_gradients(train, query, query.tokens, ranker, grads, pair_rng);
      if (active == 0) continue;
      auto grad_refs = tensor_refs(grads, ranker);
      check_finite(grad_refs, "pretrain_ranker");
      auto param_refs = tensor_refs(ranker);
      optimizer.step(param_refs, grad_refs, config.lr_pretrain);
    }
    double metric = evaluate_pipeline(valid, nullptr, ranker, config).mean.ndcg10;
    if (curve) curve->emplace_back(epoch, metric);
    if (metric > best_metric) {
      best_metric = metric;
      best_epoch = epoch;
      best = ranker;
    } else if (epoch - best_epoch >= config.patience) {
      break;
    }
  }
  return best;
}

double reformulator_epoch(const PipelineData& train, PolicyParameters& policy,
                          const KnrmParameters& ranker, const TrainingConfig& config, int epoch,
                          Adagrad& optimizer) {
  Rng order_rng = derive_rng(config.seed, "reformulator_order", epoch);
  auto order = shuffled_indices(train.queries.size(), order_rng);
  EmbeddingContext ctx = train.ctx();
  auto doc_lookup = [&](const std::string& id) { return train.doc(id); };

  double reward_sum = 0.0;
  long reward_count = 0;
  PolicyParameters batch_grads = policy.zeros_like();
  int batch_fill = 0;

  auto flush = [&] {
    if (batch_fill == 0) return;
    PolicyParameters mean = batch_grads;
    for (auto& t : tensor_refs(mean))
      for (std::size_t i = 0; i < t.size; ++i) t.data[i] /= batch_fill;
    auto grad_refs = tensor_refs(mean);
    check_finite(grad_refs, "reformulator_epoch");
    auto param_refs = tensor_refs(policy);
    optimizer.step(param_refs, grad_refs, config.lr_reformulator);
    batch_grads = policy.zeros_like();
    batch_fill = 0;
  };

  for (int qi : order) {
    const Query& query = train.queries[qi];
    const auto& candidates = train.candidates.at(query.query_id);
    const auto& pool = train.pools.at(query.query_id);
    if (candidates.all.empty() || pool.entries.empty()) continue;

    Rng episode_rng = derive_rng(config.seed, query.query_id, mix64(epoch));
    std::vector<Episode> episodes;
    episodes.reserve(config.episode_samples);
    for (int m = 0; m < config.episode_samples; ++m) {
      Episode episode;
      episode.action =
          sample_reformulation(query, candidates, ctx, policy, config.expansion_count,
                               episode_rng, config.without_replacement);
      RankedList reranked =
          rerank(episode.action.reformulated_query, pool, doc_lookup, train.vocab, ranker);
      episode.reward = average_precision(reranked, train.judgments, config.rel_threshold);
      reward_sum += episode.reward;
      ++reward_count;
      episodes.push_back(std::move(episode));
    }
    double baseline = 0.0;
    if (config.baseline_on) {
      for (const auto& e : episodes) baseline += e.reward;
      baseline /= episodes.size();
    }
    PolicyParameters grads = policy_gradient(episodes, query, candidates, ctx, policy, baseline,
                                             config.without_replacement);
    accumulate(batch_grads, grads);
    if (++batch_fill >= config.batch_size) flush();
  }
  flush();
  return reward_count > 0 ? reward_sum / reward_count : 0.0;
}

void finetune_ranker_epoch(const PipelineData& train, const PolicyParameters& policy,
                           KnrmParameters& ranker, const TrainingConfig& config, int epoch,
                           Adam& optimizer) {
  Rng order_rng = derive_rng(config.seed, "finetune_order", epoch);
  EmbeddingContext ctx = train.ctx();
  KnrmGradients grads;
  for (int qi : shuffled_indices(train.queries.size(), order_rng)) {
    const Query& query = train.queries[qi];
    const auto& candidates = train.candidates.at(query.query_id);
    Rng sample_rng = derive_rng(config.seed, query.query_id, mix64(epoch) ^ fnv1a("finetune"));
    std::vector<std::string> scoring_tokens = query.tokens;
    if (!candidates.all.empty()) {
      auto action = sample_reformulation(query, candidates, ctx, policy, config.expansion_count,
                                         sample_rng, config.without_replacement);
      scoring_tokens = action.reformulated_query;
    }
    grads.reset(ranker);
    Rng pair_rng = derive_rng(config.seed, query.query_id, mix64(epoch) ^ fnv1a("finetune_pairs"));
    int active = query_pair_gradients(train, query, scoring_tokens, ranker, grads, pair_rng);
    if (active == 0) continue;
    auto grad_refs = tensor_refs(grads, ranker);
    check_finite(grad_refs, "finetune_ranker_epoch");
    auto param_refs = tensor_refs(ranker);
    optimizer.step(param_refs, grad_refs, config.lr_finetune);
  }
}

std::vector<RankedList> pipeline_run(const PipelineData& data, const PolicyParameters* policy,
                                     const KnrmParameters& ranker, const TrainingConfig& config) {
  EmbeddingContext ctx = data.ctx();
  auto doc_lookup = [&](const std::string& id) { return data.doc(id); };
  std::vector<RankedList> lists(data.queries.size());
  parallel_for(data.queries.size(), config.threads, [&](std::size_t i) {
    const Query& query = data.queries[i];
    const auto& pool = data.pools.at(query.query_id);
    std::vector<std::string> scoring_tokens = query.tokens;
    if (policy != nullptr) {
      const auto& candidates = data.candidates.at(query.query_id);
      if (!candidates.all.empty()) {
        auto action =
            greedy_reformulation(query, candidates, ctx, *policy, config.expansion_count);
        scoring_tokens = action.reformulated_query;
      }
    }
    lists[i] = rerank(scoring_tokens, pool, doc_lookup, data.vocab, ranker);
  });
  return lists;
}

MetricReport evaluate_pipeline(const PipelineData& data, const PolicyParameters* policy,
                               const KnrmParameters& ranker, const TrainingConfig& config) {
  return evaluate(pipeline_run(data, policy, ranker, config), data.judgments,
                  config.rel_threshold);
}

std::string run_dir_name(const TrainingConfig& config) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "run-%016llx-s%llu",
                static_cast<unsigned long long>(config.hash()),
                static_cast<unsigned long long>(config.seed));
  return buf;
}

CooperativeResult cooperative_loop(const PipelineData& train, const PipelineData& valid,
                                   const TrainingConfig& config, const std::string& run_dir,
                                   const KnrmParameters& pretrained) {
  std::filesystem::create_directories(run_dir);
  CooperativeResult result;
  result.policy_path = run_dir + "/policy.ckpt";
  result.knrm_path = run_dir + "/knrm.ckpt";
  result.history_path = run_dir + "/history.tsv";

  Rng init_rng = derive_rng(config.seed, "policy_init");
  PolicyParameters policy =
      PolicyParameters::init(train.word_emb.dimension(), config.conv_layers, 50, init_rng);
  KnrmParameters ranker = pretrained;

  Adagrad policy_opt;
  Adam ranker_opt;
  double best_metric = -1.0;
  int best_epoch = 0;

  save_policy(result.policy_path, policy);
  save_knrm(result.knrm_path, ranker);

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    EpochRecord record;
    record.epoch = epoch;
    record.mean_reward = reformulator_epoch(train, policy, ranker, config, epoch, policy_opt);
    if (!config.freeze_ranker && epoch % config.train_ranker_fre == 0) {
      finetune_ranker_epoch(train, policy, ranker, config, epoch, ranker_opt);
      record.finetuned = true;
    }
    record.valid = evaluate_pipeline(valid, &policy, ranker, config).mean;
    result.history.push_back(record);
    log::info("epoch " + std::to_string(epoch) + " reward " +
              std::to_string(record.mean_reward) + " valid ndcg@10 " +
              std::to_string(record.valid.ndcg10) + (record.finetuned ? " [finetuned]" : ""));

    if (record.valid.ndcg10 > best_metric) {
      best_metric = record.valid.ndcg10;
      best_epoch = epoch;
      save_policy(result.policy_path, policy);
      save_knrm(result.knrm_path, ranker);
    } else if (epoch - best_epoch >= config.patience) {
      break;
    }
  }
  result.best_epoch = best_epoch;
  result.best_metric = best_metric;

  std::ofstream history(result.history_path);
  if (!history) throw DataError("cannot write history file: " + result.history_path);
  history << "epoch\tmean_reward\tvalid_map\tvalid_err\tvalid_ndcg5\tvalid_ndcg10\tfinetuned\n";
  char buf[200];
  for (const auto& r : result.history) {
    std::snprintf(buf, sizeof(buf), "%d\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\t%d\n", r.epoch,
                  r.mean_reward, r.valid.map, r.valid.err, r.valid.ndcg5, r.valid.ndcg10,
                  r.finetuned ? 1 : 0);
    history << buf;
  }
  return result;
}

}  // namespace cnir
