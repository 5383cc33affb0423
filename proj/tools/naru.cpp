// Command-line surface for the estimator library: ingest/synth data, train
// models, estimate single queries, and run workload benchmarks.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "naru/baselines.hpp"
#include "naru/bench.hpp"
#include "naru/common.hpp"
#include "naru/inference.hpp"
#include "naru/model.hpp"
#include "naru/model_io.hpp"
#include "naru/ordering.hpp"
#include "naru/query.hpp"
#include "naru/table.hpp"
#include "naru/training.hpp"

namespace {

struct DataArgs {
  std::string data;
  std::string schema;
};

void add_data_args(CLI::App* cmd, DataArgs& args) {
  cmd->add_option("--data", args.data, "input CSV file")->required();
  cmd->add_option("--schema", args.schema, "sidecar schema file (name:dtype per line)");
}

naru::Table load_table(const DataArgs& args) {
  naru::IngestOptions opts;
  if (!args.schema.empty()) opts = naru::read_schema_file(args.schema);
  return naru::Table::ingest_csv(args.data, opts);
}

std::vector<int> parse_hidden(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stoi(item));
  }
  if (out.empty()) throw naru::ConfigError("--hidden must name at least one layer size");
  return out;
}

std::pair<int, int> parse_filters(const std::string& s) {
  auto pos = s.find(':');
  if (pos == std::string::npos) {
    int v = std::stoi(s);
    return {v, v};
  }
  return {std::stoi(s.substr(0, pos)), std::stoi(s.substr(pos + 1))};
}

int cmd_ingest(const DataArgs& data_args) {
  naru::Table t = load_table(data_args);
  nlohmann::json j;
  j["rows"] = t.row_count();
  j["data_entropy_bits"] = naru::data_entropy_bits(t);
  j["columns"] = nlohmann::json::array();
  for (const auto& c : t.meta.columns)
    j["columns"].push_back({{"name", c.name},
                            {"dtype", naru::dtype_name(c.dtype)},
                            {"domain_size", c.domain_size()}});
  std::cout << j.dump(2) << "\n";
  return 0;
}

struct TrainArgs {
  DataArgs data;
  std::string order = "natural";
  std::string hidden = "64,64";
  int embedding_dim = 64;
  int onehot_threshold = 64;
  bool residual = false;
  int epochs = 20;
  int batch = 256;
  double lr = 2e-3;
  bool wildcard_augment = true;
  uint64_t seed = 42;
  std::string out;
  std::string log;
};

int cmd_train(const TrainArgs& a) {
  naru::Table t = load_table(a.data);

  naru::ModelConfig mc;
  mc.hidden_sizes = parse_hidden(a.hidden);
  mc.embedding_dim = a.embedding_dim;
  mc.onehot_threshold = a.onehot_threshold;
  mc.residual = a.residual;
  mc.seed = a.seed;
  if (a.order == "natural") {
    mc.ordering = naru::order_natural(t.n());
  } else if (a.order == "mutinfo") {
    mc.ordering = naru::order_mutinfo(t, naru::MutInfoVariant::Full).permutation;
  } else if (a.order == "pmutinfo") {
    mc.ordering = naru::order_mutinfo(t, naru::MutInfoVariant::Pairwise).permutation;
  } else if (a.order == "random") {
    mc.ordering = naru::order_natural(t.n());
    naru::Rng rng(naru::mix_seed(a.seed, 0x4f524452));
    rng.shuffle(mc.ordering);
  } else {
    throw naru::ConfigError("--order must be natural|mutinfo|pmutinfo|random");
  }

  naru::Model model = naru::Model::build(mc, t.meta);

  naru::TrainConfig tc;
  tc.epochs = a.epochs;
  tc.batch_size = a.batch;
  tc.learning_rate = a.lr;
  tc.wildcard_augment = a.wildcard_augment;
  tc.seed = a.seed;

  std::string log_path = a.log.empty() ? a.out + ".train.jsonl" : a.log;
  std::ofstream log(log_path);
  if (!log) throw naru::Error("cannot write '" + log_path + "'");

  std::cerr << "training on " << t.row_count() << " rows, " << t.n() << " columns\n";
  naru::TrainReport report = naru::train(model, t, tc, &log);
  for (const auto& ep : report.epochs)
    std::cerr << "epoch " << ep.epoch << ": xent " << ep.xent_bits << " bits, gap "
              << ep.gap_bits << " bits, " << ep.seconds << "s\n";

  naru::save_model(model, a.out);
  nlohmann::json j;
  j["model"] = a.out;
  j["log"] = log_path;
  j["data_entropy_bits"] = report.data_entropy_bits;
  j["final_xent_bits"] = report.last().xent_bits;
  j["final_gap_bits"] = report.last().gap_bits;
  std::cout << j.dump(2) << "\n";
  return 0;
}

struct EstimateArgs {
  std::string model;
  std::string query;
  int64_t samples = 1000;
  int64_t threshold = 10000;
  bool no_skip = false;
  uint64_t seed = 42;
};

int cmd_estimate(const EstimateArgs& a) {
  naru::Model model = naru::load_model(a.model);
  naru::Query q = naru::parse_query_text(a.query);
  naru::SamplerConfig sc;
  sc.sample_count = a.samples;
  sc.enumeration_threshold = a.threshold;
  sc.wildcard_skip = !a.no_skip && model.wildcard_trained;
  sc.seed = a.seed;
  naru::Estimate est = naru::estimate(model, q, model.meta, sc);
  nlohmann::json j;
  j["selectivity"] = est.selectivity;
  j["cardinality"] = est.cardinality;
  j["method"] = naru::method_name(est.method);
  j["standard_error"] = est.standard_error;
  std::cout << j.dump() << "\n";
  std::cerr << "sel " << est.selectivity << "  card " << est.cardinality << "  ("
            << naru::method_name(est.method) << ", se " << est.standard_error << ")\n";
  return 0;
}

struct WorkloadArgs {
  DataArgs data;
  int64_t count = 2000;
  std::string filters = "5:11";
  bool ood = false;
  uint64_t seed = 42;
  std::string out;
};

int cmd_workload(const WorkloadArgs& a) {
  naru::Table t = load_table(a.data);
  naru::WorkloadSpec spec;
  spec.query_count = a.count;
  auto [fmin, fmax] = parse_filters(a.filters);
  spec.min_filters = fmin;
  spec.max_filters = fmax;
  spec.source = a.ood ? naru::LiteralSource::Domain : naru::LiteralSource::Data;
  spec.seed = a.seed;
  auto queries = naru::generate_workload(t, spec);
  std::vector<naru::WorkloadEntry> entries;
  for (auto& q : queries) entries.push_back({std::move(q), -1});
  if (a.out.empty()) {
    naru::write_workload(entries, std::cout);
  } else {
    std::ofstream out(a.out);
    if (!out) throw naru::Error("cannot write '" + a.out + "'");
    naru::write_workload(entries, out);
    std::cerr << "wrote " << entries.size() << " queries to " << a.out << "\n";
  }
  return 0;
}

struct OracleArgs {
  DataArgs data;
  std::string workload;
  std::string out;
};

int cmd_oracle(const OracleArgs& a) {
  naru::Table t = load_table(a.data);
  std::ifstream in(a.workload);
  if (!in) throw naru::Error("cannot open '" + a.workload + "'");
  auto entries = naru::read_workload(in);
  in.close();
  for (auto& e : entries) {
    double sel = naru::exact_selectivity(t, naru::bind(e.query, t.meta));
    e.true_card = sel * static_cast<double>(t.row_count());
  }
  std::string out_path = a.out.empty() ? a.workload : a.out;
  std::ofstream out(out_path);
  if (!out) throw naru::Error("cannot write '" + out_path + "'");
  naru::write_workload(entries, out);
  std::cerr << "labeled " << entries.size() << " queries into " << out_path << "\n";
  return 0;
}

struct EvalArgs {
  DataArgs data;
  std::string model;
  std::string workload;
  std::string estimators = "naru";
  int64_t samples = 1000;
  int64_t threshold = 10000;
  bool no_skip = false;
  uint64_t seed = 42;
  int threads = 1;
  std::string out;
  bool per_query = false;
};

int cmd_eval(const EvalArgs& a) {
  naru::Table t = load_table(a.data);
  std::ifstream in(a.workload);
  if (!in) throw naru::Error("cannot open '" + a.workload + "'");
  auto entries = naru::read_workload(in);
  std::vector<naru::Query> queries;
  std::vector<double> labels;
  bool labeled = !entries.empty();
  for (auto& e : entries) {
    queries.push_back(e.query);
    if (e.true_card < 0) labeled = false;
    labels.push_back(e.true_card);
  }
  if (queries.empty()) throw naru::Error("workload is empty");

  std::optional<naru::Model> model;
  std::vector<naru::NamedEstimator> named;
  std::optional<naru::IndepEstimator> indep;
  std::vector<naru::SampleEstimator> samples_kept;

  std::stringstream ss(a.estimators);
  std::string spec;
  while (std::getline(ss, spec, ',')) {
    if (spec.empty()) continue;
    if (spec == "naru") {
      if (a.model.empty()) throw naru::ConfigError("estimator 'naru' needs --model");
      if (!model) model = naru::load_model(a.model);
      const naru::Model* mp = &*model;
      naru::SamplerConfig base;
      base.sample_count = a.samples;
      base.enumeration_threshold = a.threshold;
      base.wildcard_skip = !a.no_skip && mp->wildcard_trained;
      uint64_t seed = a.seed;
      named.push_back({"naru", [mp, &t, base, seed](const naru::Query& q, int64_t idx) {
                         naru::SamplerConfig sc = base;
                         sc.seed = naru::mix_seed(seed, static_cast<uint64_t>(idx));
                         return naru::estimate(*mp, q, t.meta, sc).selectivity;
                       }});
    } else if (spec == "indep") {
      if (!indep) indep.emplace(t);
      const naru::IndepEstimator* ip = &*indep;
      named.push_back({"indep", [ip, &t](const naru::Query& q, int64_t) {
                         return ip->estimate(naru::bind(q, t.meta));
                       }});
    } else if (spec.rfind("sample:", 0) == 0) {
      double pct = std::stod(spec.substr(7));
      samples_kept.push_back(naru::SampleEstimator::build(t, pct, a.seed));
      size_t si = samples_kept.size() - 1;
      auto* vec = &samples_kept;
      named.push_back({spec, [vec, si, &t](const naru::Query& q, int64_t) {
                         return (*vec)[si].estimate(naru::bind(q, t.meta));
                       }});
    } else if (spec.rfind("uniform-region:", 0) == 0) {
      int64_t S = std::stoll(spec.substr(15));
      if (!model) {
        if (a.model.empty()) throw naru::ConfigError("estimator 'uniform-region' needs --model");
        model = naru::load_model(a.model);
      }
      const naru::Model* mp = &*model;
      uint64_t seed = a.seed;
      named.push_back({spec, [mp, &t, S, seed](const naru::Query& q, int64_t idx) {
                         return naru::uniform_region_estimate(
                             *mp, naru::bind(q, t.meta), S,
                             naru::mix_seed(seed, static_cast<uint64_t>(idx)));
                       }});
    } else {
      throw naru::ConfigError("unknown estimator '" + spec +
                              "'; valid names: naru, indep, sample:<pct>, uniform-region:<S>");
    }
  }
  if (named.empty()) throw naru::ConfigError("no estimators named");

  naru::EvalOptions opts;
  opts.threads = a.threads;
  naru::WorkloadReport report =
      naru::run_eval(named, queries, t, labeled ? &labels : nullptr, opts);

  std::cerr << report.to_text();
  nlohmann::json j = report.to_json(a.per_query);
  if (a.out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream out(a.out);
    if (!out) throw naru::Error("cannot write '" + a.out + "'");
    out << j.dump(2) << "\n";
    std::cerr << "report written to " << a.out << "\n";
  }
  return 0;
}

struct SynthArgs {
  std::string kind = "benchmark";
  int64_t rows = 10000;
  int cols = 6;
  int domain = 12;
  double hot_mass = 0.99;
  uint64_t seed = 42;
  std::string out;
};

int cmd_synth(const SynthArgs& a) {
  naru::Table t = [&] {
    if (a.kind == "benchmark") return naru::synth_benchmark(a.rows, a.seed);
    if (a.kind == "skewed") return naru::synth_skewed(a.cols, a.domain, a.rows, a.hot_mass, a.seed);
    if (a.kind == "small") return naru::synth_small_correlated(a.rows, a.seed);
    if (a.kind == "independent") {
      std::vector<int> domains(static_cast<size_t>(a.cols), a.domain);
      return naru::synth_independent(a.rows, domains, a.seed);
    }
    throw naru::ConfigError("--kind must be benchmark|skewed|small|independent");
  }();
  if (a.out.empty()) {
    t.write_csv(std::cout);
  } else {
    t.write_csv_file(a.out);
    std::cerr << "wrote " << t.row_count() << " rows to " << a.out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"selectivity estimation with a masked autoregressive model"};
  app.require_subcommand(1);
  app.set_config("--config");

  DataArgs ingest_args;
  auto* ingest = app.add_subcommand("ingest", "scan a CSV and print its schema and stats");
  add_data_args(ingest, ingest_args);

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "train a model on a table");
  add_data_args(train, train_args.data);
  train->add_option("--order", train_args.order, "natural|mutinfo|pmutinfo|random");
  train->add_option("--hidden", train_args.hidden, "hidden layer sizes, e.g. 512,256,512");
  train->add_option("--embedding-dim", train_args.embedding_dim, "embedding width h");
  train->add_option("--onehot-threshold", train_args.onehot_threshold,
                    "domains larger than this use embeddings");
  train->add_flag("--residual", train_args.residual, "use residual blocks");
  train->add_option("--epochs", train_args.epochs);
  train->add_option("--batch", train_args.batch);
  train->add_option("--lr", train_args.lr);
  train->add_flag("--wildcard-augment,!--no-wildcard-augment", train_args.wildcard_augment,
                  "mask random columns during training (default on)");
  train->add_option("--seed", train_args.seed);
  train->add_option("--out", train_args.out, "output model file")->required();
  train->add_option("--log", train_args.log, "JSON-lines training log (default <out>.train.jsonl)");

  EstimateArgs est_args;
  auto* estimate = app.add_subcommand("estimate", "estimate one query's selectivity");
  estimate->add_option("--model", est_args.model)->required();
  estimate->add_option("--query", est_args.query, "e.g. \"city = SF AND year >= 2017\"")
      ->required();
  estimate->add_option("--samples", est_args.samples, "progressive sample paths");
  estimate->add_option("--threshold", est_args.threshold, "max points for exact enumeration");
  estimate->add_flag("--no-skip", est_args.no_skip, "disable wildcard-skipping");
  estimate->add_option("--seed", est_args.seed);

  WorkloadArgs wl_args;
  auto* workload = app.add_subcommand("workload", "generate a random query workload");
  add_data_args(workload, wl_args.data);
  workload->add_option("--count", wl_args.count, "number of queries");
  workload->add_option("--filters", wl_args.filters, "filter count range, e.g. 5:11");
  workload->add_flag("--ood", wl_args.ood, "draw literals from the whole domain");
  workload->add_option("--seed", wl_args.seed);
  workload->add_option("--out", wl_args.out, "output workload.jsonl (default stdout)");

  OracleArgs oracle_args;
  auto* oracle = app.add_subcommand("oracle", "label true cardinalities by full scan");
  add_data_args(oracle, oracle_args.data);
  oracle->add_option("--workload", oracle_args.workload)->required();
  oracle->add_option("--out", oracle_args.out, "output path (default: rewrite input)");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "run estimators over a workload and report q-errors");
  add_data_args(eval, eval_args.data);
  eval->add_option("--model", eval_args.model, "model file (for naru/uniform-region)");
  eval->add_option("--workload", eval_args.workload)->required();
  eval->add_option("--estimators", eval_args.estimators,
                   "comma list: naru, indep, sample:<pct>, uniform-region:<S>");
  eval->add_option("--samples", eval_args.samples, "progressive sample paths for naru");
  eval->add_option("--threshold", eval_args.threshold, "max points for exact enumeration");
  eval->add_flag("--no-skip", eval_args.no_skip, "disable wildcard-skipping");
  eval->add_option("--seed", eval_args.seed);
  eval->add_option("--threads", eval_args.threads, "evaluation parallelism");
  eval->add_option("--out", eval_args.out, "report JSON path (default stdout)");
  eval->add_flag("--per-query", eval_args.per_query, "include per-query rows in the report");

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "generate a synthetic CSV table");
  synth->add_option("--kind", synth_args.kind, "benchmark|skewed|small|independent");
  synth->add_option("--rows", synth_args.rows);
  synth->add_option("--cols", synth_args.cols);
  synth->add_option("--domain", synth_args.domain);
  synth->add_option("--hot-mass", synth_args.hot_mass);
  synth->add_option("--seed", synth_args.seed);
  synth->add_option("--out", synth_args.out, "output CSV (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) return cmd_ingest(ingest_args);
    if (*train) return cmd_train(train_args);
    if (*estimate) return cmd_estimate(est_args);
    if (*workload) return cmd_workload(wl_args);
    if (*oracle) return cmd_oracle(oracle_args);
    if (*eval) return cmd_eval(eval_args);
    if (*synth) return cmd_synth(synth_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
