#include "cnir/reformulator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "cnir/checkpoint.hpp"

namespace cnir {

namespace {

constexpr int kWindows = 3;
constexpr int kAttentionDim = 50;
constexpr int kMlpHidden = 50;

struct LayerCache {
  Matrix input;                                             // L x C
  std::vector<Matrix> pre;                                  // [window]: L x maps
  std::vector<std::vector<int>> global_argmax;              // [window][map], last layer
  std::vector<std::vector<std::vector<int>>> local_argmax;  // [window][pos][map]
  int pooled_len = 0;
};

double relu(double x) { return x > 0.0 ? x : 0.0; }

// One conv layer: per window size, same-length valid convolution over a
// zero-padded tail, then ReLU. The last layer max-pools over positions
// into a fixed-size vector; earlier layers pool locally (width 2, stride 2).
void layer_forward(const ConvLayer& layer, const Matrix& input, bool last, LayerCache& cache,
                   Matrix* next_input, std::vector<double>* pooled_out) {
  int len = input.rows;
  int channels = input.cols;
  int maps = layer.kernels[0].rows;
  cache.input = input;
  cache.pre.assign(kWindows, Matrix(len, maps));
  for (int w = 0; w < kWindows; ++w) {
    const Matrix& kernel = layer.kernels[w];
    for (int p = 0; p < len; ++p) {
      for (int m = 0; m < maps; ++m) {
        double acc = layer.biases[w][m];
        for (int k = 0; k <= w; ++k) {
          if (p + k >= len) break;  // zero padding
          const double* row = input.row(p + k);
          const double* kr = kernel.row(m) + k * channels;
          for (int c = 0; c < channels; ++c) acc += kr[c] * row[c];
        }
        cache.pre[w](p, m) = acc;
      }
    }
  }
  if (last) {
    pooled_out->assign(static_cast<std::size_t>(kWindows) * maps, 0.0);
    cache.global_argmax.assign(kWindows, std::vector<int>(maps, 0));
    for (int w = 0; w < kWindows; ++w) {
      for (int m = 0; m < maps; ++m) {
        double best = relu(cache.pre[w](0, m));
        int arg = 0;
        for (int p = 1; p < len; ++p) {
          double v = relu(cache.pre[w](p, m));
          if (v > best) {
            best = v;
            arg = p;
          }
        }
        (*pooled_out)[static_cast<std::size_t>(w) * maps + m] = best;
        cache.global_argmax[w][m] = arg;
      }
    }
  } else {
    int pooled_len = (len + 1) / 2;
    cache.pooled_len = pooled_len;
    cache.local_argmax.assign(
        kWindows, std::vector<std::vector<int>>(pooled_len, std::vector<int>(maps, 0)));
    *next_input = Matrix(pooled_len, kWindows * maps);
    for (int w = 0; w < kWindows; ++w) {
      for (int p = 0; p < pooled_len; ++p) {
        for (int m = 0; m < maps; ++m) {
          int first = 2 * p;
          double best = relu(cache.pre[w](first, m));
          int arg = first;
          if (first + 1 < len) {
            double v = relu(cache.pre[w](first + 1, m));
            if (v > best) {
              best = v;
              arg = first + 1;
            }
          }
          (*next_input)(p, w * maps + m) = best;
          cache.local_argmax[w][p][m] = arg;
        }
      }
    }
  }
}

void layer_backward(const ConvLayer& layer, const LayerCache& cache, bool last,
                    const std::vector<double>* d_pooled, const Matrix* d_next_input,
                    ConvLayer& grad, Matrix* d_input) {
  int len = cache.input.rows;
  int channels = cache.input.cols;
  int maps = layer.kernels[0].rows;
  if (d_input) *d_input = Matrix(len, channels);
  for (int w = 0; w < kWindows; ++w) {
    Matrix d_pre(len, maps);
    if (last) {
      for (int m = 0; m < maps; ++m) {
        double g = (*d_pooled)[static_cast<std::size_t>(w) * maps + m];
        if (g == 0.0) continue;
        int p = cache.global_argmax[w][m];
        if (cache.pre[w](p, m) > 0.0) d_pre(p, m) += g;
      }
    } else {
      for (int p = 0; p < cache.pooled_len; ++p) {
        for (int m = 0; m < maps; ++m) {
          double g = (*d_next_input)(p, w * maps + m);
          if (g == 0.0) continue;
          int src = cache.local_argmax[w][p][m];
          if (cache.pre[w](src, m) > 0.0) d_pre(src, m) += g;
        }
      }
    }
    const Matrix& kernel = layer.kernels[w];
    Matrix& d_kernel = grad.kernels[w];
    for (int p = 0; p < len; ++p) {
      for (int m = 0; m < maps; ++m) {
        double g = d_pre(p, m);
        if (g == 0.0) continue;
        grad.biases[w][m] += g;
        for (int k = 0; k <= w; ++k) {
          if (p + k >= len) break;
          const double* row = cache.input.row(p + k);
          double* kr = d_kernel.row(m) + k * channels;
          for (int c = 0; c < channels; ++c) kr[c] += g * row[c];
          if (d_input) {
            const double* kr2 = kernel.row(m) + k * channels;
            double* dr = d_input->row(p + k);
            for (int c = 0; c < channels; ++c) dr[c] += g * kr2[c];
          }
        }
      }
    }
  }
}

Matrix embed_sequence(const Query& query, const EmbeddingContext& ctx, int dim) {
  int words = static_cast<int>(query.tokens.size());
  int entities = static_cast<int>(query.linked_entities.size());
  if (words == 0) throw DataError("encode_query: empty query tokens");
  Matrix seq(words + entities, dim);
  for (int i = 0; i < words; ++i) {
    auto row = ctx.word_emb->row(ctx.word_vocab->id(query.tokens[i]));
    std::copy(row.begin(), row.end(), seq.row(i));
  }
  for (int i = 0; i < entities; ++i) {
    auto row = ctx.entity_emb->row(ctx.entity_vocab->id(query.linked_entities[i]));
    std::copy(row.begin(), row.end(), seq.row(words + i));
  }
  return seq;
}

struct ForwardCache {
  std::vector<LayerCache> layers;
  std::vector<double> query_repr;
  std::vector<std::vector<double>> cand_emb;
  std::vector<std::vector<double>> mlp_hidden;
  std::vector<std::vector<double>> cand_repr;
  std::vector<std::vector<double>> att;
  std::vector<double> logits;
  std::vector<double> probs;
};

std::vector<double> conv_forward(const Matrix& seq, const PolicyParameters& params,
                                 std::vector<LayerCache>& caches) {
  caches.resize(params.conv.size());
  Matrix current = seq;
  std::vector<double> pooled;
  for (std::size_t l = 0; l < params.conv.size(); ++l) {
    bool last = (l + 1 == params.conv.size());
    Matrix next;
    layer_forward(params.conv[l], current, last, caches[l], &next, &pooled);
    if (!last) current = std::move(next);
  }
  return pooled;
}

std::vector<double> softmax(const std::vector<double>& logits) {
  double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> probs(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - top);
    total += probs[i];
  }
  for (double& p : probs) p /= total;
  return probs;
}

ForwardCache policy_forward(const Query& query, const CandidateTermSet& candidates,
                            const EmbeddingContext& ctx, const PolicyParameters& params) {
  if (candidates.all.empty()) throw DataError("policy forward: empty candidate set");
  if (ctx.word_emb->dimension() != params.embedding_dim ||
      ctx.entity_emb->dimension() != params.embedding_dim)
    throw DataError("policy forward: embedding dimension mismatch");

  ForwardCache cache;
  Matrix seq = embed_sequence(query, ctx, params.embedding_dim);
  cache.query_repr = conv_forward(seq, params, cache.layers);

  int q_dim = params.query_repr_dim();
  int dim = params.embedding_dim;
  std::size_t n = candidates.all.size();
  cache.cand_emb.resize(n);
  cache.mlp_hidden.resize(n);
  cache.cand_repr.resize(n);
  cache.att.resize(n);
  cache.logits.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    auto row = ctx.word_emb->row(ctx.word_vocab->id(candidates.all[j]));
    cache.cand_emb[j].assign(row.begin(), row.end());
    auto& hidden = cache.mlp_hidden[j];
    hidden.assign(kMlpHidden, 0.0);
    for (int h = 0; h < kMlpHidden; ++h) {
      double acc = params.mlp_b1[h];
      const double* wrow = params.mlp_w1.row(h);
      for (int c = 0; c < dim; ++c) acc += wrow[c] * cache.cand_emb[j][c];
      hidden[h] = std::tanh(acc);
    }
    auto& repr = cache.cand_repr[j];
    repr.assign(dim, 0.0);
    for (int c = 0; c < dim; ++c) {
      double acc = params.mlp_b2[c];
      const double* wrow = params.mlp_w2.row(c);
      for (int h = 0; h < kMlpHidden; ++h) acc += wrow[h] * hidden[h];
      repr[c] = acc;
    }
    auto& att = cache.att[j];
    att.assign(kAttentionDim, 0.0);
    double logit = params.b_score;
    for (int a = 0; a < kAttentionDim; ++a) {
      double acc = 0.0;
      const double* wrow = params.w_score.row(a);
      for (int c = 0; c < q_dim; ++c) acc += wrow[c] * cache.query_repr[c];
      for (int c = 0; c < dim; ++c) acc += wrow[q_dim + c] * repr[c];
      att[a] = std::tanh(acc);
      logit += params.u_score[a] * att[a];
    }
    cache.logits[j] = logit;
  }
  cache.probs = softmax(cache.logits);
  return cache;
}

// Backpropagates a gradient w.r.t. the logits into every policy tensor.
void policy_backward(const ForwardCache& cache, const PolicyParameters& params,
                     const std::vector<double>& d_logits, PolicyParameters& grads) {
  int q_dim = params.query_repr_dim();
  int dim = params.embedding_dim;
  std::vector<double> d_query(q_dim, 0.0);
  for (std::size_t j = 0; j < d_logits.size(); ++j) {
    double g = d_logits[j];
    if (g == 0.0) continue;
    grads.b_score += g;
    std::vector<double> dz(kAttentionDim);
    for (int a = 0; a < kAttentionDim; ++a) {
      grads.u_score[a] += g * cache.att[j][a];
      dz[a] = g * params.u_score[a] * (1.0 - cache.att[j][a] * cache.att[j][a]);
    }
    std::vector<double> d_repr(dim, 0.0);
    for (int a = 0; a < kAttentionDim; ++a) {
      if (dz[a] == 0.0) continue;
      double* wg = grads.w_score.row(a);
      const double* wr = params.w_score.row(a);
      for (int c = 0; c < q_dim; ++c) {
        wg[c] += dz[a] * cache.query_repr[c];
        d_query[c] += dz[a] * wr[c];
      }
      for (int c = 0; c < dim; ++c) {
        wg[q_dim + c] += dz[a] * cache.cand_repr[j][c];
        d_repr[c] += dz[a] * wr[q_dim + c];
      }
    }
    std::vector<double> d_hidden(kMlpHidden, 0.0);
    for (int c = 0; c < dim; ++c) {
      if (d_repr[c] == 0.0) continue;
      grads.mlp_b2[c] += d_repr[c];
      double* wg = grads.mlp_w2.row(c);
      const double* wr = params.mlp_w2.row(c);
      for (int h = 0; h < kMlpHidden; ++h) {
        wg[h] += d_repr[c] * cache.mlp_hidden[j][h];
        d_hidden[h] += d_repr[c] * wr[h];
      }
    }
    for (int h = 0; h < kMlpHidden; ++h) {
      double dh = d_hidden[h] * (1.0 - cache.mlp_hidden[j][h] * cache.mlp_hidden[j][h]);
      if (dh == 0.0) continue;
      grads.mlp_b1[h] += dh;
      double* wg = grads.mlp_w1.row(h);
      for (int c = 0; c < dim; ++c) wg[c] += dh * cache.cand_emb[j][c];
    }
  }

  // CNN backward, last layer to first.
  std::vector<double> d_pooled = d_query;
  Matrix d_next;
  for (std::size_t l = params.conv.size(); l-- > 0;) {
    bool last = (l + 1 == params.conv.size());
    Matrix d_input;
    layer_backward(params.conv[l], cache.layers[l], last, last ? &d_pooled : nullptr,
                   last ? nullptr : &d_next, grads.conv[l], l > 0 ? &d_input : nullptr);
    if (l > 0) d_next = std::move(d_input);
  }
}

double log_prob_of(const std::vector<double>& probs, const std::vector<int>& chosen,
                   bool without_replacement) {
  double log_prob = 0.0;
  double remaining = 1.0;
  for (int idx : chosen) {
    double p = probs[idx];
    if (without_replacement) {
      log_prob += std::log(p) - std::log(std::max(remaining, 1e-300));
      remaining -= p;
    } else {
      log_prob += std::log(p);
    }
  }
  return log_prob;
}

// d log pi / d logits for a fixed draw sequence under the renormalized
// without-replacement scheme (or plain independent draws). With
// log pi = sum_k [log p_{a_k} - log(1 - S_k)], S_k the mass drawn before k,
// every term decomposes into a delta on the drawn indices plus a -p_i
// spread over all candidates.
std::vector<double> logprob_logit_grad(const std::vector<double>& probs,
                                       const std::vector<int>& chosen,
                                       bool without_replacement) {
  std::vector<double> grad(probs.size(), 0.0);
  double spread = 0.0;
  if (!without_replacement) {
    for (int a : chosen) {
      grad[a] += 1.0;
      spread += 1.0;
    }
  } else {
    double drawn_mass = 0.0;  // S_k
    for (std::size_t k = 0; k < chosen.size(); ++k) {
      grad[chosen[k]] += 1.0;
      spread += 1.0;
      if (k > 0) {
        double inv = 1.0 / std::max(1.0 - drawn_mass, 1e-300);
        for (std::size_t j = 0; j < k; ++j) grad[chosen[j]] += inv * probs[chosen[j]];
        spread += inv * drawn_mass;
      }
      drawn_mass += probs[chosen[k]];
    }
  }
  for (std::size_t i = 0; i < probs.size(); ++i) grad[i] -= spread * probs[i];
  return grad;
}

}  // namespace

PolicyParameters PolicyParameters::init(int embedding_dim, int conv_layers, int feature_maps,
                                        Rng& rng) {
  if (conv_layers < 1) throw DataError("policy needs at least one conv layer");
  PolicyParameters p;
  p.embedding_dim = embedding_dim;
  p.feature_maps = feature_maps;
  int in_channels = embedding_dim;
  for (int l = 0; l < conv_layers; ++l) {
    ConvLayer layer;
    for (int w = 0; w < kWindows; ++w) {
      Matrix kernel(feature_maps, (w + 1) * in_channels);
      kernel.fill_uniform(rng, -0.1, 0.1);
      layer.kernels.push_back(std::move(kernel));
      layer.biases.emplace_back(feature_maps, 0.0);
    }
    p.conv.push_back(std::move(layer));
    in_channels = kWindows * feature_maps;
  }
  p.mlp_w1 = Matrix(kMlpHidden, embedding_dim);
  p.mlp_w1.fill_uniform(rng, -0.1, 0.1);
  p.mlp_b1.assign(kMlpHidden, 0.0);
  p.mlp_w2 = Matrix(embedding_dim, kMlpHidden);
  p.mlp_w2.fill_uniform(rng, -0.1, 0.1);
  p.mlp_b2.assign(embedding_dim, 0.0);
  p.w_score = Matrix(kAttentionDim, p.state_dim());
  p.w_score.fill_uniform(rng, -0.1, 0.1);
  p.u_score.assign(kAttentionDim, 0.0);
  for (auto& u : p.u_score) u = rng.uniform(-0.1, 0.1);
  p.b_score = 0.0;
  return p;
}

PolicyParameters PolicyParameters::zeros_like() const {
  PolicyParameters z = *this;
  for (auto& t : tensor_refs(z)) std::fill(t.data, t.data + t.size, 0.0);
  return z;
}

std::vector<TensorRef> tensor_refs(PolicyParameters& params) {
  std::vector<TensorRef> refs;
  for (std::size_t l = 0; l < params.conv.size(); ++l) {
    for (int w = 0; w < kWindows; ++w) {
      std::string base = "policy.conv" + std::to_string(l) + ".w" + std::to_string(w + 1);
      refs.push_back(ref(base + ".kernel", params.conv[l].kernels[w]));
      refs.push_back(ref(base + ".bias", params.conv[l].biases[w]));
    }
  }
  refs.push_back(ref("policy.mlp.w1", params.mlp_w1));
  refs.push_back(ref("policy.mlp.b1", params.mlp_b1));
  refs.push_back(ref("policy.mlp.w2", params.mlp_w2));
  refs.push_back(ref("policy.mlp.b2", params.mlp_b2));
  refs.push_back(ref("policy.score.w", params.w_score));
  refs.push_back(ref("policy.score.u", params.u_score));
  refs.push_back(ref("policy.score.b", params.b_score));
  return refs;
}

std::vector<double> encode_query(const Query& query, const EmbeddingContext& ctx,
                                 const PolicyParameters& params) {
  Matrix seq = embed_sequence(query, ctx, params.embedding_dim);
  std::vector<LayerCache> caches;
  return conv_forward(seq, params, caches);
}

PolicyState build_policy_state(const Query& query, const CandidateTermSet& candidates,
                               const EmbeddingContext& ctx, const PolicyParameters& params) {
  ForwardCache cache = policy_forward(query, candidates, ctx, params);
  PolicyState state;
  state.query_repr = cache.query_repr;
  state.cand_repr = cache.cand_repr;
  state.states.reserve(cache.cand_repr.size());
  for (const auto& repr : cache.cand_repr) {
    std::vector<double> s = cache.query_repr;
    s.insert(s.end(), repr.begin(), repr.end());
    state.states.push_back(std::move(s));
  }
  return state;
}

std::vector<double> action_probabilities(const std::vector<std::vector<double>>& states,
                                         const PolicyParameters& params) {
  if (states.empty()) throw DataError("action_probabilities: empty candidate list");
  int q_dim = params.query_repr_dim();
  int dim = params.embedding_dim;
  std::vector<double> logits(states.size());
  for (std::size_t j = 0; j < states.size(); ++j) {
    if (static_cast<int>(states[j].size()) != q_dim + dim)
      throw DataError("action_probabilities: bad state dimension");
    double logit = params.b_score;
    for (int a = 0; a < kAttentionDim; ++a) {
      double acc = 0.0;
      const double* wrow = params.w_score.row(a);
      for (int c = 0; c < q_dim + dim; ++c) acc += wrow[c] * states[j][c];
      logit += params.u_score[a] * std::tanh(acc);
    }
    logits[j] = logit;
  }
  return softmax(logits);
}

namespace {

ReformulationAction finish_action(const Query& query, const CandidateTermSet& candidates,
                                  std::vector<int> chosen, double log_prob) {
  ReformulationAction action;
  action.chosen_indices = std::move(chosen);
  action.log_prob_sum = log_prob;
  action.reformulated_query = query.tokens;
  for (int idx : action.chosen_indices) {
    action.chosen_terms.push_back(candidates.all[idx]);
    action.reformulated_query.push_back(candidates.all[idx]);
  }
  return action;
}

}  // namespace

ReformulationAction sample_reformulation(const Query& query, const CandidateTermSet& candidates,
                                         const EmbeddingContext& ctx,
                                         const PolicyParameters& params, int expansion_count,
                                         Rng& rng, bool without_replacement) {
  if (expansion_count < 1) throw DataError("sample_reformulation: K must be >= 1");
  if (candidates.all.empty()) return finish_action(query, candidates, {}, 0.0);

  ForwardCache cache = policy_forward(query, candidates, ctx, params);
  std::size_t n = candidates.all.size();
  std::size_t draws = std::min<std::size_t>(expansion_count, without_replacement ? n : expansion_count);

  std::vector<int> chosen;
  if (without_replacement) {
    std::vector<bool> taken(n, false);
    double remaining = 1.0;
    for (std::size_t k = 0; k < draws; ++k) {
      double r = rng.uniform() * remaining;
      double acc = 0.0;
      int pick = -1;
      for (std::size_t j = 0; j < n; ++j) {
        if (taken[j]) continue;
        acc += cache.probs[j];
        pick = static_cast<int>(j);
        if (acc >= r) break;
      }
      chosen.push_back(pick);
      taken[pick] = true;
      remaining -= cache.probs[pick];
    }
  } else {
    for (std::size_t k = 0; k < draws; ++k) {
      double r = rng.uniform();
      double acc = 0.0;
      int pick = static_cast<int>(n) - 1;
      for (std::size_t j = 0; j < n; ++j) {
        acc += cache.probs[j];
        if (acc >= r) {
          pick = static_cast<int>(j);
          break;
        }
      }
      chosen.push_back(pick);
    }
  }
  double log_prob = log_prob_of(cache.probs, chosen, without_replacement);
  auto action = finish_action(query, candidates, std::move(chosen), log_prob);
  if (!without_replacement) {
    // Duplicate draws add nothing to a bag-augmented query.
    std::vector<std::string> dedup = query.tokens;
    std::vector<std::string> terms;
    for (const auto& t : action.chosen_terms)
      if (std::find(terms.begin(), terms.end(), t) == terms.end()) terms.push_back(t);
    for (const auto& t : terms) dedup.push_back(t);
    action.reformulated_query = std::move(dedup);
  }
  return action;
}

ReformulationAction greedy_reformulation(const Query& query, const CandidateTermSet& candidates,
                                         const EmbeddingContext& ctx,
                                         const PolicyParameters& params, int expansion_count) {
  if (expansion_count < 1) throw DataError("greedy_reformulation: K must be >= 1");
  if (candidates.all.empty()) return finish_action(query, candidates, {}, 0.0);
  ForwardCache cache = policy_forward(query, candidates, ctx, params);
  std::vector<int> order(candidates.all.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return cache.probs[a] > cache.probs[b]; });
  std::size_t take = std::min<std::size_t>(expansion_count, order.size());
  std::vector<int> chosen(order.begin(), order.begin() + take);
  double log_prob = log_prob_of(cache.probs, chosen, true);
  return finish_action(query, candidates, std::move(chosen), log_prob);
}

double action_log_prob(const Query& query, const CandidateTermSet& candidates,
                       const std::vector<int>& chosen_indices, const EmbeddingContext& ctx,
                       const PolicyParameters& params, bool without_replacement) {
  ForwardCache cache = policy_forward(query, candidates, ctx, params);
  return log_prob_of(cache.probs, chosen_indices, without_replacement);
}

PolicyParameters logprob_gradient(const Query& query, const CandidateTermSet& candidates,
                                  const std::vector<int>& chosen_indices,
                                  const EmbeddingContext& ctx, const PolicyParameters& params,
                                  bool without_replacement) {
  ForwardCache cache = policy_forward(query, candidates, ctx, params);
  std::vector<double> d_logits =
      logprob_logit_grad(cache.probs, chosen_indices, without_replacement);
  PolicyParameters grads = params.zeros_like();
  policy_backward(cache, params, d_logits, grads);
  return grads;
}

PolicyParameters policy_gradient(const std::vector<Episode>& episodes, const Query& query,
                                 const CandidateTermSet& candidates, const EmbeddingContext& ctx,
                                 const PolicyParameters& params, double baseline,
                                 bool without_replacement) {
  if (episodes.empty()) throw DataError("policy_gradient: need at least one episode");
  ForwardCache cache = policy_forward(query, candidates, ctx, params);
  // All episodes share the forward pass; only the logit gradients differ.
  std::vector<double> d_logits(cache.probs.size(), 0.0);
  double scale = 1.0 / static_cast<double>(episodes.size());
  for (const auto& episode : episodes) {
    double coeff = (episode.reward - baseline) * scale;
    if (coeff == 0.0 || episode.action.chosen_indices.empty()) continue;
    auto g = logprob_logit_grad(cache.probs, episode.action.chosen_indices, without_replacement);
    for (std::size_t i = 0; i < g.size(); ++i) d_logits[i] += coeff * g[i];
  }
  PolicyParameters grads = params.zeros_like();
  policy_backward(cache, params, d_logits, grads);
  return grads;
}

void reinforce_update(const std::vector<Episode>& episodes, const Query& query,
                      const CandidateTermSet& candidates, const EmbeddingContext& ctx,
                      PolicyParameters& params, Adagrad& optimizer, double learning_rate,
                      double baseline, bool without_replacement) {
  PolicyParameters grads =
      policy_gradient(episodes, query, candidates, ctx, params, baseline, without_replacement);
  auto grad_refs = tensor_refs(grads);
  check_finite(grad_refs, "reinforce_update");
  auto param_refs = tensor_refs(params);
  optimizer.step(param_refs, grad_refs, learning_rate);
}

void accumulate(PolicyParameters& sink, const PolicyParameters& grads, double scale) {
  auto dst = tensor_refs(sink);
  auto src = tensor_refs(const_cast<PolicyParameters&>(grads));
  for (std::size_t t = 0; t < dst.size(); ++t)
    for (std::size_t i = 0; i < dst[t].size; ++i) dst[t].data[i] += scale * src[t].data[i];
}

void save_policy(const std::string& path, const PolicyParameters& params) {
  auto& mutable_params = const_cast<PolicyParameters&>(params);
  std::map<std::string, std::string> meta = {
      {"embedding_dim", std::to_string(params.embedding_dim)},
      {"feature_maps", std::to_string(params.feature_maps)},
      {"conv_layers", std::to_string(params.conv.size())},
  };
  save_checkpoint(path, "policy", meta, tensor_refs(mutable_params));
}

PolicyParameters load_policy(const std::string& path) {
  Checkpoint ckpt = load_checkpoint(path);
  if (ckpt.kind != "policy") throw DataError("checkpoint is not a policy model: " + path);
  Rng dummy(0);
  PolicyParameters params = PolicyParameters::init(
      static_cast<int>(ckpt.meta_long("embedding_dim")),
      static_cast<int>(ckpt.meta_long("conv_layers")),
      static_cast<int>(ckpt.meta_long("feature_maps")), dummy);
  restore_tensors(ckpt, tensor_refs(params));
  return params;
}

}  // namespace cnir
