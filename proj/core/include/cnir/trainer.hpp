#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "cnir/config.hpp"
#include "cnir/corpus_io.hpp"
#include "cnir/knowledge.hpp"
#include "cnir/knrm.hpp"
#include "cnir/metrics.hpp"
#include "cnir/reformulator.hpp"
#include "cnir/retrieval.hpp"

namespace cnir {

struct DataPaths {
  std::string corpus;
  std::string queries;
  std::string qrels;
  std::string kg_names;
  std::string kg_edges;
  std::string entity_dict;
  std::string word_embeddings;
  std::string entity_embeddings;

  // The synth-generator layout; `which` picks the query split file.
  static DataPaths from_dir(const std::string& dir, const std::string& which);
};

// Everything one split needs: corpus, index, linked queries, judgments,
// knowledge, embedding tables, per-query BM25 pools and candidate sets.
// Immutable once loaded; the ranker trains its own embedding copy.
struct PipelineData {
  std::vector<Document> corpus;
  std::unordered_map<std::string, int> doc_slot;
  InvertedIndex index;
  std::vector<Query> queries;
  JudgmentSet judgments;
  KnowledgeGraph kg;
  EntityDictionary dict;
  Vocabulary vocab;
  Vocabulary entity_vocab;
  EmbeddingTable word_emb;
  EmbeddingTable entity_emb;
  std::unordered_map<std::string, RankedList> pools;
  std::unordered_map<std::string, CandidateTermSet> candidates;

  const Document* doc(const std::string& doc_id) const;
  EmbeddingContext ctx() const;
};

// Loads a split. When `shared` is given, its corpus/index/vocab/embeddings
// and knowledge are reused so train/valid/test agree on every table.
PipelineData load_pipeline_data(const DataPaths& paths, const TrainingConfig& config,
                                const PipelineData* shared = nullptr);

KnrmParameters init_knrm(const PipelineData& data, const TrainingConfig& config);

// All (d+, d-) pairs with strictly ordered grades within the query's pool;
// empty-token documents are excluded.
std::vector<std::pair<std::string, std::string>> training_pairs(const PipelineData& data,
                                                                const Query& query);

// Algorithm: train on original queries with the pairwise hinge, early
// stopping on validation nDCG@10. Zero pretrain_epochs returns the
// initialization untouched.
KnrmParameters pretrain_ranker(const PipelineData& train, const PipelineData& valid,
                               const TrainingConfig& config,
                               std::vector<std::pair<int, double>>* curve = nullptr);

// One REINFORCE epoch against a frozen ranker; returns the mean episode
// reward.
double reformulator_epoch(const PipelineData& train, PolicyParameters& policy,
                          const KnrmParameters& ranker, const TrainingConfig& config, int epoch,
                          Adagrad& optimizer);

// One ranker fine-tuning epoch on single-sample reformulations from the
// frozen policy.
void finetune_ranker_epoch(const PipelineData& train, const PolicyParameters& policy,
                           KnrmParameters& ranker, const TrainingConfig& config, int epoch,
                           Adam& optimizer);

// Deterministic inference path: greedy reformulation (when a policy is
// given) then rerank of the original-query pool.
std::vector<RankedList> pipeline_run(const PipelineData& data, const PolicyParameters* policy,
                                     const KnrmParameters& ranker, const TrainingConfig& config);

MetricReport evaluate_pipeline(const PipelineData& data, const PolicyParameters* policy,
                               const KnrmParameters& ranker, const TrainingConfig& config);

struct EpochRecord {
  int epoch = 0;
  double mean_reward = 0.0;
  QueryMetrics valid;
  bool finetuned = false;
};

struct CooperativeResult {
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  double best_metric = 0.0;
  std::string policy_path;
  std::string knrm_path;
  std::string history_path;
};

// Alternating optimization: every epoch trains the reformulator with the
// ranker frozen; every train_ranker_fre epochs (unless freeze_ranker) the
// ranker fine-tunes on reformulated queries with the policy frozen. Best
// checkpoints by validation nDCG@10; early stopping by patience.
CooperativeResult cooperative_loop(const PipelineData& train, const PipelineData& valid,
                                   const TrainingConfig& config, const std::string& run_dir,
                                   const KnrmParameters& pretrained);

// `run-<confighash>-s<seed>` style directory name.
std::string run_dir_name(const TrainingConfig& config);

}  // namespace cnir
