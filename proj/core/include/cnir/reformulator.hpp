#pragma once

#include <string>
#include <vector>

#include "cnir/knowledge.hpp"
#include "cnir/lexical.hpp"
#include "cnir/optim.hpp"
#include "cnir/rng.hpp"
#include "cnir/tensor.hpp"
#include "cnir/types.hpp"

namespace cnir {

// Convolution windows are 1..3 tokens wide with `maps` feature maps each,
// so a layer emits 3 * maps channels per position.
struct ConvLayer {
  std::vector<Matrix> kernels;              // [window-1]: maps x (window * in_channels)
  std::vector<std::vector<double>> biases;  // [window-1]: maps
};

struct PolicyParameters {
  int embedding_dim = 50;
  int feature_maps = 50;
  std::vector<ConvLayer> conv;  // N >= 1; last layer max-pools globally
  Matrix mlp_w1;                // hidden x dim
  std::vector<double> mlp_b1;
  Matrix mlp_w2;  // dim x hidden
  std::vector<double> mlp_b2;
  Matrix w_score;  // att x (query_repr_dim + dim)
  std::vector<double> u_score;
  double b_score = 0.0;

  int query_repr_dim() const { return 3 * feature_maps; }
  int state_dim() const { return query_repr_dim() + embedding_dim; }

  // Weights uniform [-0.1, 0.1] from `rng`, biases zero.
  static PolicyParameters init(int embedding_dim, int conv_layers, int feature_maps, Rng& rng);

  PolicyParameters zeros_like() const;
};

std::vector<TensorRef> tensor_refs(PolicyParameters& params);

// Word and entity lookup tables the policy reads (never trains).
struct EmbeddingContext {
  const Vocabulary* word_vocab = nullptr;
  const EmbeddingTable* word_emb = nullptr;
  const Vocabulary* entity_vocab = nullptr;
  const EmbeddingTable* entity_emb = nullptr;
};

struct PolicyState {
  std::vector<double> query_repr;                // pooled CNN output
  std::vector<std::vector<double>> cand_repr;    // MLP output per candidate
  std::vector<std::vector<double>> states;       // [query_repr ; cand_repr]
};

struct ReformulationAction {
  std::vector<std::string> chosen_terms;
  std::vector<int> chosen_indices;  // into CandidateTermSet::all
  double log_prob_sum = 0.0;
  std::vector<std::string> reformulated_query;  // original tokens then chosen terms
};

// Pooled CNN representation of [word embeddings ; entity embeddings].
std::vector<double> encode_query(const Query& query, const EmbeddingContext& ctx,
                                 const PolicyParameters& params);

PolicyState build_policy_state(const Query& query, const CandidateTermSet& candidates,
                               const EmbeddingContext& ctx, const PolicyParameters& params);

// softmax(u . tanh(W s_j) + b) across the candidate set. Errors on an
// empty candidate list.
std::vector<double> action_probabilities(const std::vector<std::vector<double>>& states,
                                         const PolicyParameters& params);

// Draws min(K, |candidates|) terms. Without replacement (the default) the
// per-draw distribution renormalizes over the remaining candidates and
// log_prob_sum is taken under that scheme; with replacement duplicates
// collapse in the reformulated query.
ReformulationAction sample_reformulation(const Query& query, const CandidateTermSet& candidates,
                                         const EmbeddingContext& ctx,
                                         const PolicyParameters& params, int expansion_count,
                                         Rng& rng, bool without_replacement = true);

// Deterministic inference-time variant: the K most probable terms.
ReformulationAction greedy_reformulation(const Query& query, const CandidateTermSet& candidates,
                                         const EmbeddingContext& ctx,
                                         const PolicyParameters& params, int expansion_count);

// Analytic gradient of log pi(action) w.r.t. every policy tensor.
PolicyParameters logprob_gradient(const Query& query, const CandidateTermSet& candidates,
                                  const std::vector<int>& chosen_indices,
                                  const EmbeddingContext& ctx, const PolicyParameters& params,
                                  bool without_replacement = true);

// log pi(action) for a fixed choice sequence; the finite-difference
// counterpart of logprob_gradient.
double action_log_prob(const Query& query, const CandidateTermSet& candidates,
                       const std::vector<int>& chosen_indices, const EmbeddingContext& ctx,
                       const PolicyParameters& params, bool without_replacement = true);

struct Episode {
  ReformulationAction action;
  double reward = 0.0;
};

// (1/M) sum_m grad log pi(a_m) * (R_m - baseline); the ascent direction of
// the REINFORCE objective.
PolicyParameters policy_gradient(const std::vector<Episode>& episodes, const Query& query,
                                 const CandidateTermSet& candidates, const EmbeddingContext& ctx,
                                 const PolicyParameters& params, double baseline,
                                 bool without_replacement = true);

// Applies one Adagrad ascent step from the episode batch. `baseline` is
// subtracted from each reward (pass 0 for the raw estimator).
void reinforce_update(const std::vector<Episode>& episodes, const Query& query,
                      const CandidateTermSet& candidates, const EmbeddingContext& ctx,
                      PolicyParameters& params, Adagrad& optimizer, double learning_rate,
                      double baseline, bool without_replacement = true);

void accumulate(PolicyParameters& sink, const PolicyParameters& grads, double scale = 1.0);

void save_policy(const std::string& path, const PolicyParameters& params);
PolicyParameters load_policy(const std::string& path);

}  // namespace cnir
