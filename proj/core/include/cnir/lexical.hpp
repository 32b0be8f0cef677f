#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cnir/rng.hpp"
#include "cnir/types.hpp"

namespace cnir {

// Lowercased whitespace-split tokens; punctuation-only tokens dropped.
std::vector<std::string> tokenize(const std::string& text);

// Token <-> dense id bijection with fixed PADDING and UNKNOWN slots.
class Vocabulary {
 public:
  static constexpr int kPadding = 0;
  static constexpr int kUnknown = 1;

  Vocabulary();

  // Returns the id, inserting the token if new.
  int add(const std::string& token);
  // Returns kUnknown for tokens not present.
  int id(const std::string& token) const;
  bool contains(const std::string& token) const { return map_.count(token) > 0; }
  const std::string& token(int id) const { return tokens_.at(id); }
  int size() const { return static_cast<int>(tokens_.size()); }

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  std::unordered_map<std::string, int> map_;
  std::vector<std::string> tokens_;
};

enum class EmbeddingKind { word, entity };

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(EmbeddingKind kind, int vocab_size, int dimension);

  EmbeddingKind kind() const { return kind_; }
  int dimension() const { return dim_; }
  int rows() const { return rows_; }

  std::span<const double> row(int id) const {
    return {data_.data() + static_cast<std::size_t>(id) * dim_, static_cast<std::size_t>(dim_)};
  }
  std::span<double> row(int id) {
    return {data_.data() + static_cast<std::size_t>(id) * dim_, static_cast<std::size_t>(dim_)};
  }

  std::vector<double>& raw() { return data_; }
  const std::vector<double>& raw() const { return data_; }

 private:
  EmbeddingKind kind_ = EmbeddingKind::word;
  int rows_ = 0;
  int dim_ = 0;
  std::vector<double> data_;
};

// Text format: header `count dimension`, then `token v1 ... vD` per line.
// Vocabulary tokens absent from the file get rows drawn uniform [-0.1, 0.1]
// from `rng`; the PADDING row is zeroed.
EmbeddingTable load_embeddings(const std::string& path, const Vocabulary& vocab,
                               EmbeddingKind kind, Rng& rng);

void write_embeddings(const std::string& path, const std::vector<std::string>& tokens,
                      const std::vector<std::vector<double>>& rows);

// Standard cosine; zero-norm input on either side yields 0.
double cosine(std::span<const double> a, std::span<const double> b);

}  // namespace cnir
