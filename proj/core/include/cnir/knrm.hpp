#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cnir/lexical.hpp"
#include "cnir/tensor.hpp"
#include "cnir/types.hpp"

namespace cnir {

// Gaussian kernel bank; exactly one exact-match kernel with mu = 1.0.
struct KernelBank {
  std::vector<double> mu;
  std::vector<double> sigma;

  int size() const { return static_cast<int>(mu.size()); }
  void validate() const;

  // Exact kernel (1.0, 1e-3) plus count-1 soft kernels with width 0.1,
  // means evenly spaced over (-1, 1).
  static KernelBank standard(int count = 11);
};

// Soft counts below this are clamped before the log; the clamped region
// propagates zero gradient.
inline constexpr double kKernelLogFloor = 1e-10;

// Score assigned to empty-token documents so they sort below every real
// tanh score.
inline constexpr double kEmptyDocScore = -2.0;

struct KnrmParameters {
  KernelBank bank;
  std::vector<double> w_r;
  double b_r = 0.0;
  EmbeddingTable embeddings;  // the ranker's own trainable copy
  bool train_embeddings = true;

  static KnrmParameters init(const KernelBank& bank, EmbeddingTable embeddings,
                             bool train_embeddings);
};

// All trainable tensors; embeddings included only when the flag is set.
std::vector<TensorRef> tensor_refs(KnrmParameters& params);

struct KnrmGradients {
  std::vector<double> w_r;
  double b_r = 0.0;
  std::vector<double> embeddings;  // dense, same layout as the table

  void reset(const KnrmParameters& params);
  void scale(double factor);
};

std::vector<TensorRef> tensor_refs(KnrmGradients& grads, const KnrmParameters& params);

// M_ij = cosine(v_{q_i}, v_{d_j}). Throws on an empty side.
Matrix interaction_matrix(const std::vector<std::string>& query_tokens,
                          const std::vector<std::string>& doc_tokens, const Vocabulary& vocab,
                          const EmbeddingTable& emb);

// phi_t = sum_i log(max(sum_j exp(-(M_ij - mu_t)^2 / (2 sigma_t^2)), floor)).
std::vector<double> kernel_pool(const Matrix& m, const KernelBank& bank);

// f(q, d) = tanh(w_r . phi(M) + b_r).
double knrm_score(const std::vector<std::string>& query_tokens,
                  const std::vector<std::string>& doc_tokens, const Vocabulary& vocab,
                  const KnrmParameters& params);

// max(0, 1 - f(q, d+) + f(q, d-)). Grades are asserted strictly ordered.
double pairwise_loss(const std::vector<std::string>& query_tokens, const Document& d_plus,
                     const Document& d_minus, int grade_plus, int grade_minus,
                     const Vocabulary& vocab, const KnrmParameters& params);

// Accumulates analytic gradients of the pairwise hinge into `out`;
// returns the loss. Zero-loss pairs contribute nothing.
double pairwise_gradients(const std::vector<std::string>& query_tokens, const Document& d_plus,
                          const Document& d_minus, int grade_plus, int grade_minus,
                          const Vocabulary& vocab, const KnrmParameters& params,
                          KnrmGradients& out);

// Reorders the pool by KNRM score (desc), ties by ascending doc_id;
// membership is preserved. `doc_lookup` resolves pool ids to documents.
RankedList rerank(const std::vector<std::string>& query_tokens, const RankedList& pool,
                  const std::function<const Document*(const std::string&)>& doc_lookup,
                  const Vocabulary& vocab, const KnrmParameters& params);

// Every tensor including frozen embeddings; used for checkpoints and
// parameter fingerprints.
std::vector<TensorRef> all_tensor_refs(KnrmParameters& params);

void save_knrm(const std::string& path, const KnrmParameters& params);
KnrmParameters load_knrm(const std::string& path);

}  // namespace cnir
