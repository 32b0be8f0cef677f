#pragma once

#include <map>
#include <string>
#include <vector>

#include "cnir/tensor.hpp"

namespace cnir {

// Versioned text tensor dump, shared by policy and ranker checkpoints.
// Layout:
//   cnir-ckpt v1
//   kind <policy|knrm>
//   meta <key> <value>            (repeated)
//   tensor <name> <size> <v...>   (repeated, %.17g values)
void save_checkpoint(const std::string& path, const std::string& kind,
                     const std::map<std::string, std::string>& meta,
                     const std::vector<TensorRef>& tensors);

struct Checkpoint {
  std::string kind;
  std::map<std::string, std::string> meta;
  std::map<std::string, std::vector<double>> tensors;

  long meta_long(const std::string& key) const;
};

Checkpoint load_checkpoint(const std::string& path);

// Copies values into the given refs; throws on a missing tensor or size
// mismatch.
void restore_tensors(const Checkpoint& ckpt, const std::vector<TensorRef>& tensors);

}  // namespace cnir
