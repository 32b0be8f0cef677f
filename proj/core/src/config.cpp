#include "cnir/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "cnir/rng.hpp"
#include "cnir/types.hpp"

namespace cnir {

namespace {

std::string trim(const std::string& s) {
  auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

bool parse_bool(const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw DataError("config: expected boolean, got '" + value + "'");
}

struct Field {
  std::function<void(TrainingConfig&, const std::string&)> set;
  std::function<std::string(const TrainingConfig&)> get;
};

std::string format_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = {
      {"seed",
       {[](TrainingConfig& c, const std::string& v) { c.seed = std::stoull(v); },
        [](const TrainingConfig& c) { return std::to_string(c.seed); }}},
      {"threads",
       {[](TrainingConfig& c, const std::string& v) { c.threads = std::stoi(v); },
        [](const TrainingConfig& c) { return std::to_string(c.threads); }}},
      {"K",
       {[](TrainingConfig& c, const std::string& v) { c.expansion_count = std::stoi(v); },
        [](const TrainingConfig& c) { return std::to_string(c.expansion_count); }}},
      {"M",
       {[](TrainingConfig& c, const std::string& v) { c.episode_samples = std::stoi(v); },
        [](const TrainingConfig& c) { return std::to_string(c.episode_samples); }}},
      {"lr_reformulator",
       {[](TrainingConfig& c, const std::string& v) { c.lr_reformulator = std::stod(v); },
        [](const TrainingConfig& c) { return format_double(c.lr_reformulator); }}},
      {"batch_size",
       {[](TrainingConfig& c, const std::string& v) { c.batch_size = std::stoi(v); },
        [](const TrainingConfig& c) { return std::to_string(c.batch_size); }}},
      {"baseline_on",
       {[](TrainingConfig& c, const std::string& v) { c.baseline_on = parse_bool(v); },
        [](const TrainingConfig& c) { return c.baseline_on ? "true" : "false"; }}},
      {"without_replacement",
       {[](TrainingConfig& c, const std::string& v) { c.without_replacement = parse_bool(v); },
        [](const TrainingConfig& c) { return c.without_replacement ? "true" : "false"; }}},
      {"conv_layers",
       {[](TrainingConfig& c, const std::string& v) { c.conv_layers = std::stoi(v); },
        [](const TrainingConfig& c) { return std::to_string(c.conv_layers); }}},
      {"kernels",
       {[](TrainingConfig& c, const std::string& v) { c.kernels = std::stoi(v); },
        [](const TrainingConfig& c) { return std::to_string(c.kernels); }}},
      {"lr_pretrain",
       {[](TrainingConfig& c, const std::string& v) { c.lr_pretrain = std::stod(v); },
        [](const TrainingConfig& c) { return format_double(c.lr_pretrain); }}},
      {"lr_finetune",
       {[](TrainingConfig& c, const std::string& v) { c.lr_finetune = std::stod(v); },
        [](const TrainingConfig& c) { return format_double(c.lr_finetune); }}},
      {"train_embeddings",
       {[](TrainingConfig& c, const std::string& v) { c.train_embeddings = parse_bool(v); },
        [](const TrainingConfig& c) { return c.train_embeddings ? "true" : "false"; }}},
      {"pool_size",
       {[](TrainingConfig& c, const std::string& v) { c.pool_size = std::stoi(v); },
        [](const TrainingConfig& c) { return std::to_string(c.pool_size); }}},
      {"prf_k",
       {[](TrainingConfig& c, const std::string& v) { c.prf_k = std::stoi(v); },
        [](const TrainingConfig& c) { return std::to_string(c.prf_k); }}},
      {"know_top",
       {[](TrainingConfig& c, const std::string& v) { c.know_top = std::stoi(v); },
        [](const TrainingConfig& c) { return std::to_string(c.know_top); }}},
      {"bm25_k1",
       {[](TrainingConfig& c, const std::string& v) { c.bm25_k1 = std::stod(v); },
        [](const TrainingConfig& c) { return format_double(c.bm25_k1); }}},
      {"bm25_b",
       {[](TrainingConfig& c, const std::string& v) { c.bm25_b = std::stod(v); },
        [](const TrainingConfig& c) { return format_double(c.bm25_b); }}},
      {"train_ranker_fre",
       {[](TrainingConfig& c, const std::string& v) { c.train_ranker_fre = std::stoi(v); },
        [](const TrainingConfig& c) { return std::to_string(c.train_ranker_fre); }}},
      {"max_epochs",
       {[](TrainingConfig& c, const std::string& v) { c.max_epochs = std::stoi(v); },
        [](const TrainingConfig& c) { return std::to_string(c.max_epochs); }}},
      {"pretrain_epochs",
       {[](TrainingConfig& c, const std::string& v) { c.pretrain_epochs = std::stoi(v); },
        [](const TrainingConfig& c) { return std::to_string(c.pretrain_epochs); }}},
      {"patience",
       {[](TrainingConfig& c, const std::string& v) { c.patience = std::stoi(v); },
        [](const TrainingConfig& c) { return std::to_string(c.patience); }}},
      {"freeze_ranker",
       {[](TrainingConfig& c, const std::string& v) { c.freeze_ranker = parse_bool(v); },
        [](const TrainingConfig& c) { return c.freeze_ranker ? "true" : "false"; }}},
      {"rel_threshold",
       {[](TrainingConfig& c, const std::string& v) { c.rel_threshold = std::stoi(v); },
        [](const TrainingConfig& c) { return std::to_string(c.rel_threshold); }}},
  };
  return table;
}

}  // namespace

void TrainingConfig::validate() const {
  auto positive = [](long v, const char* name) {
    if (v <= 0) throw DataError(std::string("config: ") + name + " must be positive");
  };
  positive(expansion_count, "K");
  positive(episode_samples, "M");
  positive(batch_size, "batch_size");
  positive(conv_layers, "conv_layers");
  positive(kernels, "kernels");
  positive(pool_size, "pool_size");
  positive(prf_k, "prf_k");
  positive(know_top, "know_top");
  positive(train_ranker_fre, "train_ranker_fre");
  positive(max_epochs, "max_epochs");
  positive(patience, "patience");
  positive(threads, "threads");
  positive(rel_threshold, "rel_threshold");
  if (pretrain_epochs < 0) throw DataError("config: pretrain_epochs must be >= 0");
  if (lr_reformulator <= 0 || lr_pretrain <= 0 || lr_finetune <= 0)
    throw DataError("config: learning rates must be positive");
  if (bm25_k1 < 0 || bm25_b < 0 || bm25_b > 1)
    throw DataError("config: bm25 parameters out of range");
}

void TrainingConfig::set(const std::string& key, const std::string& value) {
  auto it = fields().find(key);
  if (it == fields().end()) throw DataError("unknown config key: " + key);
  try {
    it->second.set(*this, value);
  } catch (const DataError&) {
    throw;
  } catch (const std::exception&) {
    throw DataError("config: bad value '" + value + "' for key " + key);
  }
}

const std::vector<std::string>& TrainingConfig::known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& [key, field] : fields()) out.push_back(key);
    return out;
  }();
  return keys;
}

std::string TrainingConfig::serialize() const {
  std::ostringstream out;
  for (const auto& [key, field] : fields()) out << key << " = " << field.get(*this) << "\n";
  return out.str();
}

uint64_t TrainingConfig::hash() const { return fnv1a(serialize()); }

TrainingConfig TrainingConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path);
  TrainingConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw DataError("config line " + std::to_string(line_no) + ": expected key = value");
    config.set(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
  }
  config.validate();
  return config;
}

}  // namespace cnir
