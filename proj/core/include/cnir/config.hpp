#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cnir {

// Flat `key = value` configuration. Unknown keys are rejected so typos
// cannot silently fall back to defaults.
struct TrainingConfig {
  uint64_t seed = 1;
  int threads = 1;

  // Reformulator (REINFORCE).
  int expansion_count = 3;     // K
  int episode_samples = 5;     // M
  double lr_reformulator = 1e-5;
  int batch_size = 50;
  bool baseline_on = true;
  bool without_replacement = true;
  int conv_layers = 1;

  // Ranker (KNRM).
  int kernels = 11;
  double lr_pretrain = 1e-3;
  double lr_finetune = 1e-4;
  bool train_embeddings = true;

  // Candidate construction and retrieval.
  int pool_size = 10;
  int prf_k = 3;
  int know_top = 20;
  double bm25_k1 = 1.2;
  double bm25_b = 0.75;

  // Schedule.
  int train_ranker_fre = 10;
  int max_epochs = 50;
  int pretrain_epochs = 30;
  int patience = 10;
  bool freeze_ranker = false;

  // Evaluation.
  int rel_threshold = 1;

  void validate() const;
  std::string serialize() const;
  // Stable content hash used in run-directory names.
  uint64_t hash() const;

  static TrainingConfig load(const std::string& path);
  // Applies a `key=value` override; throws on unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  static const std::vector<std::string>& known_keys();
};

}  // namespace cnir
