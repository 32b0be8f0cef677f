#include "cnir/knrm.hpp"

#include <algorithm>
#include <cmath>

#include "cnir/checkpoint.hpp"

namespace cnir {

void KernelBank::validate() const {
  if (mu.empty() || mu.size() != sigma.size())
    throw DataError("kernel bank must have T >= 1 matched (mu, sigma) pairs");
  int exact = 0;
  for (std::size_t t = 0; t < mu.size(); ++t) {
    if (sigma[t] <= 0.0) throw DataError("kernel sigma must be positive");
    if (mu[t] == 1.0) ++exact;
  }
  if (exact != 1) throw DataError("kernel bank needs exactly one exact-match kernel (mu = 1.0)");
}

KernelBank KernelBank::standard(int count) {
  if (count < 1) throw DataError("kernel count must be >= 1");
  KernelBank bank;
  bank.mu.push_back(1.0);
  bank.sigma.push_back(1e-3);
  int soft = count - 1;
  if (soft > 0) {
    double width = 2.0 / soft;
    for (int t = 0; t < soft; ++t) {
      bank.mu.push_back(1.0 - width / 2.0 - t * width);
      bank.sigma.push_back(0.1);
    }
  }
  bank.validate();
  return bank;
}

KnrmParameters KnrmParameters::init(const KernelBank& bank, EmbeddingTable embeddings,
                                    bool train_embeddings) {
  bank.validate();
  KnrmParameters params;
  params.bank = bank;
  params.w_r.assign(bank.size(), 0.0);
  params.b_r = 0.0;
  params.embeddings = std::move(embeddings);
  params.train_embeddings = train_embeddings;
  return params;
}

std::vector<TensorRef> tensor_refs(KnrmParameters& params) {
  std::vector<TensorRef> refs;
  refs.push_back(ref("knrm.w_r", params.w_r));
  refs.push_back(ref("knrm.b_r", params.b_r));
  if (params.train_embeddings) refs.push_back(ref("knrm.embeddings", params.embeddings.raw()));
  return refs;
}

void KnrmGradients::reset(const KnrmParameters& params) {
  w_r.assign(params.w_r.size(), 0.0);
  b_r = 0.0;
  embeddings.assign(params.embeddings.raw().size(), 0.0);
}

void KnrmGradients::scale(double factor) {
  for (double& g : w_r) g *= factor;
  b_r *= factor;
  for (double& g : embeddings) g *= factor;
}

std::vector<TensorRef> tensor_refs(KnrmGradients& grads, const KnrmParameters& params) {
  std::vector<TensorRef> refs;
  refs.push_back(ref("knrm.w_r", grads.w_r));
  refs.push_back(ref("knrm.b_r", grads.b_r));
  if (params.train_embeddings) refs.push_back(ref("knrm.embeddings", grads.embeddings));
  return refs;
}

Matrix interaction_matrix(const std::vector<std::string>& query_tokens,
                          const std::vector<std::string>& doc_tokens, const Vocabulary& vocab,
                          const EmbeddingTable& emb) {
  if (query_tokens.empty()) throw DataError("interaction_matrix: empty query");
  if (doc_tokens.empty()) throw DataError("interaction_matrix: empty document");
  Matrix m(static_cast<int>(query_tokens.size()), static_cast<int>(doc_tokens.size()));
  for (int i = 0; i < m.rows; ++i) {
    auto qrow = emb.row(vocab.id(query_tokens[i]));
    for (int j = 0; j < m.cols; ++j)
      m(i, j) = cosine(qrow, emb.row(vocab.id(doc_tokens[j])));
  }
  return m;
}

std::vector<double> kernel_pool(const Matrix& m, const KernelBank& bank) {
  if (m.rows == 0 || m.cols == 0) throw DataError("kernel_pool: empty interaction matrix");
  std::vector<double> phi(bank.size(), 0.0);
  for (int t = 0; t < bank.size(); ++t) {
    double inv2s2 = 1.0 / (2.0 * bank.sigma[t] * bank.sigma[t]);
    for (int i = 0; i < m.rows; ++i) {
      double soft_count = 0.0;
      for (int j = 0; j < m.cols; ++j) {
        double d = m(i, j) - bank.mu[t];
        soft_count += std::exp(-d * d * inv2s2);
      }
      phi[t] += std::log(std::max(soft_count, kKernelLogFloor));
    }
  }
  return phi;
}

namespace {

// Forward pass intermediates needed for the backward pass of one score.
struct ScoreCache {
  std::vector<int> query_ids, doc_ids;
  Matrix m;
  std::vector<std::vector<double>> soft_counts;  // [kernel][query row]
  std::vector<double> phi;
  double f = 0.0;
};

ScoreCache score_forward(const std::vector<std::string>& query_tokens,
                         const std::vector<std::string>& doc_tokens, const Vocabulary& vocab,
                         const KnrmParameters& params) {
  ScoreCache cache;
  for (const auto& t : query_tokens) cache.query_ids.push_back(vocab.id(t));
  for (const auto& t : doc_tokens) cache.doc_ids.push_back(vocab.id(t));
  cache.m = interaction_matrix(query_tokens, doc_tokens, vocab, params.embeddings);
  const auto& bank = params.bank;
  cache.soft_counts.assign(bank.size(), std::vector<double>(cache.m.rows, 0.0));
  cache.phi.assign(bank.size(), 0.0);
  for (int t = 0; t < bank.size(); ++t) {
    double inv2s2 = 1.0 / (2.0 * bank.sigma[t] * bank.sigma[t]);
    for (int i = 0; i < cache.m.rows; ++i) {
      double soft_count = 0.0;
      for (int j = 0; j < cache.m.cols; ++j) {
        double d = cache.m(i, j) - bank.mu[t];
        soft_count += std::exp(-d * d * inv2s2);
      }
      cache.soft_counts[t][i] = soft_count;
      cache.phi[t] += std::log(std::max(soft_count, kKernelLogFloor));
    }
  }
  double u = params.b_r;
  for (int t = 0; t < bank.size(); ++t) u += params.w_r[t] * cache.phi[t];
  cache.f = std::tanh(u);
  return cache;
}

// Backward from dL/df into w_r, b_r and (optionally) the embedding table.
void score_backward(const ScoreCache& cache, double df, const KnrmParameters& params,
                    KnrmGradients& out) {
  const auto& bank = params.bank;
  double du = df * (1.0 - cache.f * cache.f);
  out.b_r += du;
  for (int t = 0; t < bank.size(); ++t) out.w_r[t] += du * cache.phi[t];
  if (!params.train_embeddings) return;

  // dL/dM accumulated over kernels.
  Matrix dm(cache.m.rows, cache.m.cols);
  for (int t = 0; t < bank.size(); ++t) {
    double dphi = du * params.w_r[t];
    if (dphi == 0.0) continue;
    double inv_s2 = 1.0 / (bank.sigma[t] * bank.sigma[t]);
    double inv2s2 = 0.5 * inv_s2;
    for (int i = 0; i < cache.m.rows; ++i) {
      double soft_count = cache.soft_counts[t][i];
      if (soft_count <= kKernelLogFloor) continue;  // clamped: zero gradient
      double coeff = dphi / soft_count;
      for (int j = 0; j < cache.m.cols; ++j) {
        double d = cache.m(i, j) - bank.mu[t];
        dm(i, j) += coeff * std::exp(-d * d * inv2s2) * (-d * inv_s2);
      }
    }
  }

  // Cosine backward into the rows of the embedding table.
  const auto& emb = params.embeddings;
  int dim = emb.dimension();
  for (int i = 0; i < cache.m.rows; ++i) {
    auto a = emb.row(cache.query_ids[i]);
    double na2 = 0.0;
    for (int d = 0; d < dim; ++d) na2 += a[d] * a[d];
    for (int j = 0; j < cache.m.cols; ++j) {
      double g = dm(i, j);
      if (g == 0.0) continue;
      auto b = emb.row(cache.doc_ids[j]);
      double nb2 = 0.0, dot = 0.0;
      for (int d = 0; d < dim; ++d) {
        nb2 += b[d] * b[d];
        dot += a[d] * b[d];
      }
      if (na2 == 0.0 || nb2 == 0.0) continue;  // cosine fixed at 0
      double na = std::sqrt(na2), nb = std::sqrt(nb2);
      double inv = 1.0 / (na * nb);
      double cos = dot * inv;
      double* ga = out.embeddings.data() + static_cast<std::size_t>(cache.query_ids[i]) * dim;
      double* gb = out.embeddings.data() + static_cast<std::size_t>(cache.doc_ids[j]) * dim;
      for (int d = 0; d < dim; ++d) {
        ga[d] += g * (b[d] * inv - cos * a[d] / na2);
        gb[d] += g * (a[d] * inv - cos * b[d] / nb2);
      }
    }
  }
}

}  // namespace

double knrm_score(const std::vector<std::string>& query_tokens,
                  const std::vector<std::string>& doc_tokens, const Vocabulary& vocab,
                  const KnrmParameters& params) {
  return score_forward(query_tokens, doc_tokens, vocab, params).f;
}

double pairwise_loss(const std::vector<std::string>& query_tokens, const Document& d_plus,
                     const Document& d_minus, int grade_plus, int grade_minus,
                     const Vocabulary& vocab, const KnrmParameters& params) {
  if (grade_plus <= grade_minus)
    throw DataError("pairwise_loss: grades not strictly ordered for (" + d_plus.doc_id + ", " +
                    d_minus.doc_id + ")");
  double f_plus = knrm_score(query_tokens, d_plus.tokens, vocab, params);
  double f_minus = knrm_score(query_tokens, d_minus.tokens, vocab, params);
  return std::max(0.0, 1.0 - f_plus + f_minus);
}

double pairwise_gradients(const std::vector<std::string>& query_tokens, const Document& d_plus,
                          const Document& d_minus, int grade_plus, int grade_minus,
                          const Vocabulary& vocab, const KnrmParameters& params,
                          KnrmGradients& out) {
  if (grade_plus <= grade_minus)
    throw DataError("pairwise_gradients: grades not strictly ordered for (" + d_plus.doc_id +
                    ", " + d_minus.doc_id + ")");
  ScoreCache plus = score_forward(query_tokens, d_plus.tokens, vocab, params);
  ScoreCache minus = score_forward(query_tokens, d_minus.tokens, vocab, params);
  double loss = 1.0 - plus.f + minus.f;
  if (loss <= 0.0) return 0.0;
  score_backward(plus, -1.0, params, out);
  score_backward(minus, +1.0, params, out);
  return loss;
}

RankedList rerank(const std::vector<std::string>& query_tokens, const RankedList& pool,
                  const std::function<const Document*(const std::string&)>& doc_lookup,
                  const Vocabulary& vocab, const KnrmParameters& params) {
  RankedList out{pool.query_id, {}};
  out.entries.reserve(pool.entries.size());
  for (const auto& [doc_id, old_score] : pool.entries) {
    const Document* doc = doc_lookup(doc_id);
    if (doc == nullptr) throw DataError("rerank: pool doc not in corpus: " + doc_id);
    double score = doc->tokens.empty()
                       ? kEmptyDocScore
                       : knrm_score(query_tokens, doc->tokens, vocab, params);
    out.entries.emplace_back(doc_id, score);
  }
  std::sort(out.entries.begin(), out.entries.end(), [](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second > y.second;
    return x.first < y.first;
  });
  return out;
}

std::vector<TensorRef> all_tensor_refs(KnrmParameters& params) {
  std::vector<TensorRef> refs;
  refs.push_back(ref("knrm.mu", params.bank.mu));
  refs.push_back(ref("knrm.sigma", params.bank.sigma));
  refs.push_back(ref("knrm.w_r", params.w_r));
  refs.push_back(ref("knrm.b_r", params.b_r));
  refs.push_back(ref("knrm.embeddings", params.embeddings.raw()));
  return refs;
}

void save_knrm(const std::string& path, const KnrmParameters& params) {
  auto& mutable_params = const_cast<KnrmParameters&>(params);
  std::map<std::string, std::string> meta = {
      {"kernels", std::to_string(params.bank.size())},
      {"emb_rows", std::to_string(params.embeddings.rows())},
      {"emb_dim", std::to_string(params.embeddings.dimension())},
      {"train_embeddings", params.train_embeddings ? "1" : "0"},
  };
  save_checkpoint(path, "knrm", meta, all_tensor_refs(mutable_params));
}

KnrmParameters load_knrm(const std::string& path) {
  Checkpoint ckpt = load_checkpoint(path);
  if (ckpt.kind != "knrm") throw DataError("checkpoint is not a knrm model: " + path);
  KnrmParameters params;
  int kernels = static_cast<int>(ckpt.meta_long("kernels"));
  params.bank.mu.assign(kernels, 0.0);
  params.bank.sigma.assign(kernels, 0.0);
  params.w_r.assign(kernels, 0.0);
  params.embeddings = EmbeddingTable(EmbeddingKind::word,
                                     static_cast<int>(ckpt.meta_long("emb_rows")),
                                     static_cast<int>(ckpt.meta_long("emb_dim")));
  params.train_embeddings = ckpt.meta_long("train_embeddings") != 0;
  restore_tensors(ckpt, all_tensor_refs(params));
  params.bank.validate();
  return params;
}

}  // namespace cnir
