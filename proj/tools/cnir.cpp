// Command-line front end: index, gen-synth, pretrain, train, reformulate,
// rank, eval. Every subcommand reads an optional --config file plus
// repeatable --set key=value overrides; all randomness flows from the
// config seed.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cnir/baselines.hpp"
#include "cnir/config.hpp"
#include "cnir/corpus_io.hpp"
#include "cnir/log.hpp"
#include "cnir/metrics.hpp"
#include "cnir/synth.hpp"
#include "cnir/trainer.hpp"
#include "cnir/version.hpp"

namespace {

using namespace cnir;

// Command-line mistakes exit 1; bad data exits 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigArgs {
  std::string config_path;
  std::vector<std::string> overrides;

  TrainingConfig resolve() const {
    TrainingConfig config;
    if (!config_path.empty()) config = TrainingConfig::load(config_path);
    for (const auto& kv : overrides) {
      auto eq = kv.find('=');
      if (eq == std::string::npos)
        throw UsageError("--set expects key=value, got '" + kv + "'");
      std::string key = kv.substr(0, eq);
      const auto& keys = TrainingConfig::known_keys();
      if (std::find(keys.begin(), keys.end(), key) == keys.end())
        throw UsageError("unknown config key: " + key);
      try {
        config.set(key, kv.substr(eq + 1));
      } catch (const DataError& e) {
        throw UsageError(e.what());
      }
    }
    config.validate();
    return config;
  }
};

void add_config_options(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("--config", args.config_path, "flat key = value config file");
  cmd->add_option("--set", args.overrides, "override a config key (key=value, repeatable)");
}

std::string default_config_path(const std::string& data_dir) {
  std::string candidate = data_dir + "/config.cfg";
  return std::filesystem::exists(candidate) ? candidate : "";
}

int cmd_index(const std::string& data_dir, const std::string& out_path) {
  auto corpus = load_corpus(data_dir + "/corpus.jsonl");
  auto index = InvertedIndex::build(corpus);
  index.save(out_path);
  log::info("indexed " + std::to_string(index.doc_count()) + " documents -> " + out_path);
  return 0;
}

int cmd_gen_synth(const SynthParams& params, const std::string& out_dir) {
  generate_synth(params, out_dir);
  log::info("synthetic collection written to " + out_dir);
  return 0;
}

int cmd_pretrain(const std::string& data_dir, const std::string& out_path,
                 const TrainingConfig& config) {
  auto train = load_pipeline_data(DataPaths::from_dir(data_dir, "train"), config);
  auto valid = load_pipeline_data(DataPaths::from_dir(data_dir, "valid"), config, &train);
  auto ranker = pretrain_ranker(train, valid, config);
  save_knrm(out_path, ranker);
  auto metrics = evaluate_pipeline(valid, nullptr, ranker, config).mean;
  std::printf("pretrained ranker: valid MAP %.4f ERR %.4f nDCG@5 %.4f nDCG@10 %.4f\n",
              metrics.map, metrics.err, metrics.ndcg5, metrics.ndcg10);
  return 0;
}

int cmd_train(const std::string& data_dir, const std::string& run_parent,
              const std::string& knrm_ckpt, const TrainingConfig& config) {
  auto train = load_pipeline_data(DataPaths::from_dir(data_dir, "train"), config);
  auto valid = load_pipeline_data(DataPaths::from_dir(data_dir, "valid"), config, &train);
  std::string run_dir = run_parent + "/" + run_dir_name(config);
  std::filesystem::create_directories(run_dir);

  KnrmParameters pretrained =
      knrm_ckpt.empty() ? pretrain_ranker(train, valid, config) : load_knrm(knrm_ckpt);
  save_knrm(run_dir + "/pretrain.ckpt", pretrained);
  {
    std::ofstream cfg(run_dir + "/config.cfg");
    cfg << config.serialize();
  }
  auto result = cooperative_loop(train, valid, config, run_dir, pretrained);
  std::printf("best epoch %d valid nDCG@10 %.4f\n", result.best_epoch, result.best_metric);
  std::printf("checkpoints: %s, %s\n", result.policy_path.c_str(), result.knrm_path.c_str());
  std::printf("history: %s\n", result.history_path.c_str());
  return 0;
}

int cmd_reformulate(const std::string& data_dir, const std::string& split,
                    const std::string& method, const std::string& policy_path,
                    const std::string& out_path, const TrainingConfig& config) {
  auto data = load_pipeline_data(DataPaths::from_dir(data_dir, split), config);
  std::ofstream out(out_path);
  if (!out) throw DataError("cannot write reformulated queries: " + out_path);

  PolicyParameters policy;
  if (method == "rl") {
    if (policy_path.empty()) throw UsageError("--method rl requires --policy <checkpoint>");
    policy = load_policy(policy_path);
  }
  EmbeddingContext ctx = data.ctx();
  for (const auto& query : data.queries) {
    std::vector<std::string> tokens;
    if (method == "tfidf") {
      const auto& pool = data.pools.at(query.query_id);
      std::vector<Document> prf;
      for (int i = 0; i < std::min<int>(config.prf_k, static_cast<int>(pool.entries.size()));
           ++i)
        prf.push_back(*data.doc(pool.entries[i].first));
      tokens = tfidf_expand(query, prf, data.index, config.expansion_count);
    } else if (method == "rm") {
      const auto& pool = data.pools.at(query.query_id);
      RankedList prf{query.query_id, {}};
      for (int i = 0; i < std::min<int>(config.prf_k, static_cast<int>(pool.entries.size()));
           ++i)
        prf.entries.push_back(pool.entries[i]);
      tokens = rm_expand(query, prf, data.corpus, data.index, config.expansion_count);
    } else if (method == "rl") {
      const auto& candidates = data.candidates.at(query.query_id);
      if (candidates.all.empty()) {
        tokens = query.tokens;
      } else {
        tokens = greedy_reformulation(query, candidates, ctx, policy, config.expansion_count)
                     .reformulated_query;
      }
    } else {
      throw UsageError("unknown reformulation method: " + method);
    }
    out << query.query_id << "\t";
    for (std::size_t i = 0; i < tokens.size(); ++i) out << (i ? " " : "") << tokens[i];
    out << "\n";
  }
  log::info("reformulated queries written to " + out_path);
  return 0;
}

int cmd_rank(const std::string& data_dir, const std::string& split,
             const std::string& reformulated_path, const std::string& knrm_path,
             const std::string& out_path, const TrainingConfig& config) {
  auto data = load_pipeline_data(DataPaths::from_dir(data_dir, split), config);
  auto ranker = load_knrm(knrm_path);

  std::map<std::string, std::vector<std::string>> scoring_tokens;
  if (!reformulated_path.empty()) {
    for (const auto& q : load_queries(reformulated_path))
      scoring_tokens[q.query_id] = q.tokens;
  }
  auto doc_lookup = [&](const std::string& id) { return data.doc(id); };
  std::vector<RankedList> lists;
  for (const auto& query : data.queries) {
    const auto& pool = data.pools.at(query.query_id);
    std::vector<std::string> tokens = query.tokens;
    if (!reformulated_path.empty()) {
      auto it = scoring_tokens.find(query.query_id);
      if (it == scoring_tokens.end())
        throw DataError("reformulated file misses query " + query.query_id);
      tokens = it->second;
    }
    lists.push_back(rerank(tokens, pool, doc_lookup, data.vocab, ranker));
  }
  write_run(lists, out_path);
  log::info("run written to " + out_path);
  return 0;
}

int cmd_eval(const std::vector<std::string>& run_paths, const std::string& qrels_path,
             const std::string& per_query_path, const TrainingConfig& config) {
  auto judgments = load_qrels(qrels_path);
  struct Row {
    std::string name;
    MetricReport report;
  };
  std::vector<Row> rows;
  for (const auto& path : run_paths) {
    auto lists = load_run(path);
    rows.push_back({std::filesystem::path(path).filename().string(),
                    evaluate(lists, judgments, config.rel_threshold)});
  }
  std::printf("%-10s", "metric");
  for (const auto& row : rows) std::printf(" %16s", row.name.c_str());
  std::printf("\n");
  auto line = [&](const char* name, auto pick) {
    std::printf("%-10s", name);
    for (const auto& row : rows) std::printf(" %16.4f", pick(row.report.mean));
    std::printf("\n");
  };
  line("MAP", [](const QueryMetrics& m) { return m.map; });
  line("ERR", [](const QueryMetrics& m) { return m.err; });
  line("nDCG@5", [](const QueryMetrics& m) { return m.ndcg5; });
  line("nDCG@10", [](const QueryMetrics& m) { return m.ndcg10; });
  for (const auto& row : rows)
    std::printf("# %s: %d queries evaluated, %d skipped without judgments\n", row.name.c_str(),
                row.report.evaluated, row.report.skipped);
  if (!per_query_path.empty()) {
    if (rows.size() != 1)
      throw UsageError("--per-query expects exactly one --run file");
    write_per_query_tsv(rows.front().report, per_query_path);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cooperative query-reformulation + neural reranking pipeline"};
  app.set_version_flag("--version", std::string("cnir ") + kVersion + " (" + kCheckpointFormat +
                                        ", " + kIndexFormat + ")");
  app.require_subcommand(1);

  // index
  auto* index_cmd = app.add_subcommand("index", "build and persist the inverted index");
  std::string index_data, index_out = "index.txt";
  index_cmd->add_option("--data", index_data, "dataset directory")->required();
  index_cmd->add_option("--out", index_out, "output index file");

  // gen-synth
  auto* synth_cmd = app.add_subcommand("gen-synth", "generate the synthetic collection");
  SynthParams synth_params;
  std::string synth_out;
  synth_cmd->add_option("--out", synth_out, "output directory")->required();
  synth_cmd->add_option("--seed", synth_params.seed, "generator seed");
  synth_cmd->add_option("--queries", synth_params.n_queries, "total queries");
  synth_cmd->add_option("--train", synth_params.n_train, "train split size");
  synth_cmd->add_option("--valid", synth_params.n_valid, "validation split size");
  synth_cmd->add_option("--test", synth_params.n_test, "test split size");
  synth_cmd->add_option("--docs", synth_params.n_docs, "corpus size");
  synth_cmd->add_option("--vocab", synth_params.vocab_size, "vocabulary size");
  synth_cmd->add_option("--pairs", synth_params.synonym_pairs, "synonym pairs");
  synth_cmd->add_option("--dim", synth_params.embedding_dim, "embedding dimension");

  // pretrain
  auto* pretrain_cmd = app.add_subcommand("pretrain", "pretrain the ranker on original queries");
  std::string pre_data, pre_out = "pretrain.ckpt";
  ConfigArgs pre_cfg;
  pretrain_cmd->add_option("--data", pre_data, "dataset directory")->required();
  pretrain_cmd->add_option("--out", pre_out, "output checkpoint");
  add_config_options(pretrain_cmd, pre_cfg);

  // train
  auto* train_cmd = app.add_subcommand("train", "cooperative training loop");
  std::string train_data, train_run_dir = "runs", train_knrm;
  ConfigArgs train_cfg;
  train_cmd->add_option("--data", train_data, "dataset directory")->required();
  train_cmd->add_option("--run-dir", train_run_dir, "parent directory for run outputs");
  train_cmd->add_option("--knrm", train_knrm, "pretrained ranker checkpoint (skips pretraining)");
  add_config_options(train_cmd, train_cfg);

  // reformulate
  auto* ref_cmd = app.add_subcommand("reformulate", "expand queries with a chosen method");
  std::string ref_data, ref_split = "test", ref_method = "rl", ref_policy, ref_out;
  ConfigArgs ref_cfg;
  ref_cmd->add_option("--data", ref_data, "dataset directory")->required();
  ref_cmd->add_option("--split", ref_split, "query split: train, valid or test");
  ref_cmd->add_option("--method", ref_method, "tfidf, rm or rl");
  ref_cmd->add_option("--policy", ref_policy, "policy checkpoint (for rl)");
  ref_cmd->add_option("--out", ref_out, "output TSV of reformulated queries")->required();
  add_config_options(ref_cmd, ref_cfg);

  // rank
  auto* rank_cmd = app.add_subcommand("rank", "rerank BM25 pools with a ranker checkpoint");
  std::string rank_data, rank_split = "test", rank_ref, rank_knrm, rank_out;
  ConfigArgs rank_cfg;
  rank_cmd->add_option("--data", rank_data, "dataset directory")->required();
  rank_cmd->add_option("--split", rank_split, "query split: train, valid or test");
  rank_cmd->add_option("--reformulated", rank_ref, "reformulated queries TSV (optional)");
  rank_cmd->add_option("--knrm", rank_knrm, "ranker checkpoint")->required();
  rank_cmd->add_option("--out", rank_out, "output TREC run file")->required();
  add_config_options(rank_cmd, rank_cfg);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "score run files against qrels");
  std::vector<std::string> eval_runs;
  std::string eval_qrels, eval_per_query;
  ConfigArgs eval_cfg;
  eval_cmd->add_option("--run", eval_runs, "run file (repeatable)")->required();
  eval_cmd->add_option("--qrels", eval_qrels, "qrels file")->required();
  eval_cmd->add_option("--per-query", eval_per_query, "per-query metrics TSV");
  add_config_options(eval_cmd, eval_cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*index_cmd) return cmd_index(index_data, index_out);
    if (*synth_cmd) return cmd_gen_synth(synth_params, synth_out);
    if (*pretrain_cmd) {
      if (pre_cfg.config_path.empty()) pre_cfg.config_path = default_config_path(pre_data);
      return cmd_pretrain(pre_data, pre_out, pre_cfg.resolve());
    }
    if (*train_cmd) {
      if (train_cfg.config_path.empty()) train_cfg.config_path = default_config_path(train_data);
      return cmd_train(train_data, train_run_dir, train_knrm, train_cfg.resolve());
    }
    if (*ref_cmd) {
      if (ref_cfg.config_path.empty()) ref_cfg.config_path = default_config_path(ref_data);
      return cmd_reformulate(ref_data, ref_split, ref_method, ref_policy, ref_out,
                             ref_cfg.resolve());
    }
    if (*rank_cmd) {
      if (rank_cfg.config_path.empty()) rank_cfg.config_path = default_config_path(rank_data);
      return cmd_rank(rank_data, rank_split, rank_ref, rank_knrm, rank_out, rank_cfg.resolve());
    }
    if (*eval_cmd) return cmd_eval(eval_runs, eval_qrels, eval_per_query, eval_cfg.resolve());
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
