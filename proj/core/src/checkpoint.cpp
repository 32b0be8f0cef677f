#include "cnir/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "cnir/types.hpp"
#include "cnir/version.hpp"

namespace cnir {

void save_checkpoint(const std::string& path, const std::string& kind,
                     const std::map<std::string, std::string>& meta,
                     const std::vector<TensorRef>& tensors) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write checkpoint file: " + path);
  out << kCheckpointFormat << "\n";
  out << "kind " << kind << "\n";
  for (const auto& [key, value] : meta) out << "meta " << key << " " << value << "\n";
  char buf[64];
  for (const auto& t : tensors) {
    out << "tensor " << t.name << " " << t.size;
    for (std::size_t i = 0; i < t.size; ++i) {
      std::snprintf(buf, sizeof(buf), " %.17g", t.data[i]);
      out << buf;
    }
    out << "\n";
  }
  if (!out) throw DataError("I/O error while writing checkpoint: " + path);
}

long Checkpoint::meta_long(const std::string& key) const {
  auto it = meta.find(key);
  if (it == meta.end()) throw DataError("checkpoint missing meta key: " + key);
  return std::stol(it->second);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint file: " + path);
  std::string header;
  std::getline(in, header);
  if (header != kCheckpointFormat)
    throw DataError("unsupported checkpoint format in " + path + ": " + header);
  Checkpoint ckpt;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "kind") {
      ls >> ckpt.kind;
    } else if (word == "meta") {
      std::string key, value;
      ls >> key >> value;
      ckpt.meta[key] = value;
    } else if (word == "tensor") {
      std::string name;
      std::size_t size = 0;
      ls >> name >> size;
      std::vector<double> values(size);
      for (auto& v : values)
        if (!(ls >> v)) throw DataError("truncated tensor '" + name + "' in " + path);
      ckpt.tensors[name] = std::move(values);
    } else {
      throw DataError("unknown checkpoint record '" + word + "' in " + path);
    }
  }
  return ckpt;
}

void restore_tensors(const Checkpoint& ckpt, const std::vector<TensorRef>& tensors) {
  for (const auto& t : tensors) {
    auto it = ckpt.tensors.find(t.name);
    if (it == ckpt.tensors.end()) throw DataError("checkpoint missing tensor: " + t.name);
    if (it->second.size() != t.size)
      throw DataError("checkpoint tensor '" + t.name + "' has size " +
                      std::to_string(it->second.size()) + ", expected " + std::to_string(t.size));
    std::copy(it->second.begin(), it->second.end(), t.data);
  }
}

}  // namespace cnir
