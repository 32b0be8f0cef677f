#pragma once

#include <string>
#include <vector>

#include "cnir/retrieval.hpp"
#include "cnir/types.hpp"

namespace cnir {

// Appends the top-K PRF terms by tf(PRF concatenation) * ln(N / df); terms
// already in the query are excluded, ties break lexicographically.
std::vector<std::string> tfidf_expand(const Query& query, const std::vector<Document>& prf_docs,
                                      const InvertedIndex& index, int expansion_count = 3);

struct RmParams {
  double lambda = 0.5;       // interpolation with the query language model
  double dirichlet_mu = 10;  // smoothing for the document weight P(q|d)
};

// Lavrenko relevance model over the PRF documents with RM3-style
// interpolation: P'(w) = lambda * P_ml(w|query) + (1 - lambda) * P_rm(w).
// Appends the top-K non-query terms with positive score.
std::vector<std::string> rm_expand(const Query& query, const RankedList& prf_list,
                                   const std::vector<Document>& corpus,
                                   const InvertedIndex& index, int expansion_count = 3,
                                   const RmParams& params = {});

// P_rm over the PRF vocabulary (sums to 1); exposed for verification.
std::vector<std::pair<std::string, double>> relevance_model(const Query& query,
                                                            const RankedList& prf_list,
                                                            const std::vector<Document>& corpus,
                                                            const InvertedIndex& index,
                                                            const RmParams& params = {});

}  // namespace cnir
