#include "cnir/lexical.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cnir {

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (cur.empty()) return;
    bool all_punct = true;
    for (unsigned char c : cur) {
      if (!std::ispunct(c)) {
        all_punct = false;
        break;
      }
    }
    if (!all_punct) out.push_back(cur);
    cur.clear();
  };
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      flush();
    } else {
      cur.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush();
  return out;
}

Vocabulary::Vocabulary() {
  tokens_ = {"<pad>", "<unk>"};
  map_ = {{"<pad>", kPadding}, {"<unk>", kUnknown}};
}

int Vocabulary::add(const std::string& token) {
  auto it = map_.find(token);
  if (it != map_.end()) return it->second;
  int id = static_cast<int>(tokens_.size());
  tokens_.push_back(token);
  map_.emplace(token, id);
  return id;
}

int Vocabulary::id(const std::string& token) const {
  auto it = map_.find(token);
  return it == map_.end() ? kUnknown : it->second;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write vocabulary file: " + path);
  for (const auto& t : tokens_) out << t << "\n";
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open vocabulary file: " + path);
  Vocabulary v;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    if (line_no == kPadding || line_no == kUnknown) {
      // The two special rows are re-created by the constructor.
    } else {
      v.add(line);
    }
    ++line_no;
  }
  return v;
}

EmbeddingTable::EmbeddingTable(EmbeddingKind kind, int vocab_size, int dimension)
    : kind_(kind), rows_(vocab_size), dim_(dimension) {
  if (dimension <= 0) throw DataError("embedding dimension must be positive");
  data_.assign(static_cast<std::size_t>(vocab_size) * dimension, 0.0);
}

EmbeddingTable load_embeddings(const std::string& path, const Vocabulary& vocab,
                               EmbeddingKind kind, Rng& rng) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embeddings file: " + path);
  std::string header;
  if (!std::getline(in, header)) throw DataError("empty embeddings file: " + path);
  std::istringstream hs(header);
  long count = 0;
  int dim = 0;
  if (!(hs >> count >> dim) || dim <= 0)
    throw DataError("bad embeddings header in " + path + ": " + header);

  EmbeddingTable table(kind, vocab.size(), dim);
  std::vector<bool> filled(vocab.size(), false);
  filled[Vocabulary::kPadding] = true;

  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string token;
    ls >> token;
    std::vector<double> values;
    double v;
    while (ls >> v) values.push_back(v);
    if (static_cast<int>(values.size()) != dim)
      throw DataError("embedding row for token '" + token + "' has " +
                      std::to_string(values.size()) + " values, header says " +
                      std::to_string(dim));
    if (!vocab.contains(token)) continue;
    int id = vocab.id(token);
    std::copy(values.begin(), values.end(), table.row(id).begin());
    filled[id] = true;
  }

  for (int id = 0; id < vocab.size(); ++id) {
    if (filled[id]) continue;
    for (double& x : table.row(id)) x = rng.uniform(-0.1, 0.1);
  }
  return table;
}

void write_embeddings(const std::string& path, const std::vector<std::string>& tokens,
                      const std::vector<std::vector<double>>& rows) {
  if (tokens.size() != rows.size()) throw DataError("embedding writer: token/row count mismatch");
  std::ofstream out(path);
  if (!out) throw DataError("cannot write embeddings file: " + path);
  int dim = rows.empty() ? 0 : static_cast<int>(rows.front().size());
  out << tokens.size() << " " << dim << "\n";
  char buf[64];
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    out << tokens[i];
    for (double v : rows[i]) {
      std::snprintf(buf, sizeof(buf), " %.17g", v);
      out << buf;
    }
    out << "\n";
  }
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DataError("cosine: dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace cnir
