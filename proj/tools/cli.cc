// Copyright 2026 The fedppca Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fedppca/data.h"
#include "fedppca/eval.h"
#include "fedppca/experiment.h"
#include "fedppca/hash.h"
#include "fedppca/serialize.h"
#include "json.hpp"

#ifndef FEDPPCA_VERSION
#define FEDPPCA_VERSION "0.0.0"
#endif

namespace fedppca::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Iterations used by select-latent when --first-iters is not given.
constexpr int kSelectionIterations = 20000;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Configuration documents

void CheckKeys(const json& section, const std::string& name,
               std::initializer_list<const char*> allowed) {
  if (!section.is_object()) throw UsageError("config section '" + name + "' must be an object");
  for (const auto& item : section.items()) {
    bool known = false;
    for (const char* a : allowed) known |= item.key() == a;
    if (!known) throw UsageError("unknown config key '" + name + "." + item.key() + "'");
  }
}

template <typename T>
void Read(const json& section, const char* key, T& value) {
  if (section.contains(key)) value = section.at(key).get<T>();
}

json LoadConfig(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open config '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("config '" + path + "': " + e.what());
  }
  if (!doc.is_object()) throw UsageError("config must be an object");
  CheckKeys(doc, "config", {"synthetic", "federation", "privacy", "experiment"});
  return doc;
}

const json& Section(const json& doc, const char* name) {
  static const json kEmpty = json::object();
  return doc.contains(name) ? doc.at(name) : kEmpty;
}

SyntheticSpec ParseSynthetic(const json& s) {
  CheckKeys(s, "synthetic",
            {"n_subjects", "view_dims", "view_names", "latent_dim", "shifted_count",
             "seed", "param_std", "sigma_min", "sigma_max", "shift_std", "shift_norm"});
  SyntheticSpec spec;
  Read(s, "n_subjects", spec.n_subjects);
  Read(s, "view_dims", spec.view_dims);
  Read(s, "view_names", spec.view_names);
  Read(s, "latent_dim", spec.latent_dim);
  Read(s, "shifted_count", spec.shifted_count);
  Read(s, "seed", spec.seed);
  Read(s, "param_std", spec.param_std);
  Read(s, "sigma_min", spec.sigma_min);
  Read(s, "sigma_max", spec.sigma_max);
  Read(s, "shift_std", spec.shift_std);
  Read(s, "shift_norm", spec.shift_norm);
  return spec;
}

json ToJson(const SyntheticSpec& spec) {
  return {{"n_subjects", spec.n_subjects},     {"view_dims", spec.view_dims},
          {"view_names", spec.view_names},     {"latent_dim", spec.latent_dim},
          {"shifted_count", spec.shifted_count}, {"seed", spec.seed},
          {"param_std", spec.param_std},       {"sigma_min", spec.sigma_min},
          {"sigma_max", spec.sigma_max},       {"shift_std", spec.shift_std},
          {"shift_norm", spec.shift_norm}};
}

DpBootstrap ParseBootstrap(const std::string& name) {
  if (name == "seed-prior") return DpBootstrap::kSeedPrior;
  if (name == "permissive") return DpBootstrap::kPermissive;
  throw UsageError("unknown bootstrap '" + name + "' (seed-prior|permissive)");
}

std::string BootstrapName(DpBootstrap b) {
  return b == DpBootstrap::kSeedPrior ? "seed-prior" : "permissive";
}

ScaleMode ParseScaleMode(const std::string& name) {
  if (name == "per-view") return ScaleMode::kPerView;
  if (name == "per-feature") return ScaleMode::kPerFeature;
  throw UsageError("unknown scale mode '" + name + "' (per-view|per-feature)");
}

std::string ScaleModeName(ScaleMode m) {
  return m == ScaleMode::kPerView ? "per-view" : "per-feature";
}

WaicLikelihood ParseLikelihood(const std::string& name) {
  if (name == "view-sum") return WaicLikelihood::kViewSum;
  if (name == "joint") return WaicLikelihood::kJoint;
  throw UsageError("unknown WAIC likelihood '" + name + "' (view-sum|joint)");
}

std::string LikelihoodName(WaicLikelihood l) {
  return l == WaicLikelihood::kViewSum ? "view-sum" : "joint";
}

void ParseFederation(const json& s, FederationConfig& fed) {
  CheckKeys(s, "federation",
            {"rounds", "local_iterations", "first_round_iterations", "latent_dim",
             "bootstrap", "shared_first_init", "spread_floor", "transport"});
  Read(s, "rounds", fed.rounds);
  Read(s, "local_iterations", fed.local_iterations);
  Read(s, "first_round_iterations", fed.first_round_iterations);
  Read(s, "latent_dim", fed.latent_dim);
  Read(s, "shared_first_init", fed.shared_first_init);
  Read(s, "spread_floor", fed.master.spread_floor);
  if (s.contains("bootstrap")) fed.bootstrap = ParseBootstrap(s.at("bootstrap"));
  if (s.contains("transport")) {
    const std::string t = s.at("transport");
    if (t == "in-process") {
      fed.transport = TransportKind::kInProcess;
    } else if (t == "direct") {
      fed.transport = TransportKind::kDirect;
    } else {
      throw UsageError("unknown transport '" + t + "' (in-process|direct)");
    }
  }
}

json ToJson(const FederationConfig& fed) {
  return {{"rounds", fed.rounds},
          {"local_iterations", fed.local_iterations},
          {"first_round_iterations", fed.first_round_iterations},
          {"latent_dim", fed.latent_dim},
          {"bootstrap", BootstrapName(fed.bootstrap)},
          {"shared_first_init", fed.shared_first_init},
          {"spread_floor", fed.master.spread_floor},
          {"transport", fed.transport == TransportKind::kInProcess ? "in-process"
                                                                   : "direct"}};
}

ParameterBudget ParseBudget(const json& s, const std::string& name) {
  CheckKeys(s, name, {"epsilon", "delta"});
  ParameterBudget b;
  Read(s, "epsilon", b.epsilon);
  Read(s, "delta", b.delta);
  return b;
}

std::optional<PrivacySpec> ParsePrivacy(const json& s) {
  if (s.empty()) return std::nullopt;
  CheckKeys(s, "privacy",
            {"enabled", "epsilon", "delta", "clip_multiplier", "norm_order", "variant",
             "mu", "w", "sigma2"});
  bool enabled = true;
  Read(s, "enabled", enabled);
  if (!enabled) return std::nullopt;
  PrivacySpec p;
  Read(s, "epsilon", p.epsilon);
  Read(s, "delta", p.delta);
  Read(s, "clip_multiplier", p.clip_multiplier);
  Read(s, "norm_order", p.norm_order);
  if (s.contains("variant")) p.variant = ParseGaussianVariant(s.at("variant"));
  if (s.contains("mu")) p.mu_budget = ParseBudget(s.at("mu"), "privacy.mu");
  if (s.contains("w")) p.w_budget = ParseBudget(s.at("w"), "privacy.w");
  if (s.contains("sigma2")) p.sigma2_budget = ParseBudget(s.at("sigma2"), "privacy.sigma2");
  return p;
}

json ToJson(const std::optional<PrivacySpec>& p) {
  if (!p) return {{"enabled", false}};
  auto budget = [](const ParameterBudget& b) {
    return json{{"epsilon", b.epsilon}, {"delta", b.delta}};
  };
  return {{"enabled", true},
          {"epsilon", p->epsilon},
          {"delta", p->delta},
          {"clip_multiplier", p->clip_multiplier},
          {"norm_order", p->norm_order},
          {"variant", GaussianVariantName(p->variant)},
          {"mu", budget(p->mu_budget)},
          {"w", budget(p->w_budget)},
          {"sigma2", budget(p->sigma2_budget)}};
}

void ParseExperiment(const json& s, ExperimentConfig& cfg) {
  CheckKeys(s, "experiment",
            {"scenario", "centers", "folds", "repeats", "seed", "standardize",
             "scale_mode", "waic_samples", "waic_likelihood", "evaluate_imputation"});
  if (s.contains("scenario")) cfg.scenario = ParseScenario(s.at("scenario"));
  Read(s, "centers", cfg.centers);
  Read(s, "folds", cfg.folds);
  Read(s, "repeats", cfg.repeats);
  Read(s, "seed", cfg.seed);
  Read(s, "standardize", cfg.standardize);
  Read(s, "evaluate_imputation", cfg.evaluate_imputation);
  Read(s, "waic_samples", cfg.waic.samples);
  if (s.contains("scale_mode")) cfg.scale_mode = ParseScaleMode(s.at("scale_mode"));
  if (s.contains("waic_likelihood")) {
    cfg.waic.likelihood = ParseLikelihood(s.at("waic_likelihood"));
  }
}

json ToJson(const ExperimentConfig& cfg) {
  return {{"scenario", ScenarioName(cfg.scenario)},
          {"centers", cfg.centers},
          {"folds", cfg.folds},
          {"repeats", cfg.repeats},
          {"seed", cfg.seed},
          {"standardize", cfg.standardize},
          {"scale_mode", ScaleModeName(cfg.scale_mode)},
          {"waic_samples", cfg.waic.samples},
          {"waic_likelihood", LikelihoodName(cfg.waic.likelihood)},
          {"evaluate_imputation", cfg.evaluate_imputation}};
}

std::string Hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string ConfigDigest(const json& effective) {
  const std::string text = effective.dump();
  Fnv1a64 h;
  h.AddBytes(text.data(), text.size());
  return Hex64(h.value());
}

// ---------------------------------------------------------------------------
// Files

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, "failed writing '" + path.string() + "'");
}

void MakeDir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create '" + dir.string() + "': " + ec.message());
}

struct Manifest {
  std::string command;
  json config;
  json seeds = json::object();
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;

  void Write(const fs::path& dir) const {
    json doc = {{"command", command},
                {"tool_version", FEDPPCA_VERSION},
                {"config", config},
                {"config_digest", ConfigDigest(config)},
                {"seeds", seeds},
                {"inputs", inputs},
                {"outputs", outputs}};
    WriteText(dir / "manifest.json", doc.dump(2) + "\n");
  }
};

fs::path DataFile(const std::string& arg) {
  fs::path p(arg);
  if (fs::is_directory(p)) p /= "data.csv";
  return p;
}

json ScalerToJson(const Scaler& scaler) {
  json views = json::array();
  for (size_t k = 0; k < scaler.mean.size(); ++k) {
    json v;
    v["mean"] = std::vector<double>(scaler.mean[k].data(),
                                    scaler.mean[k].data() + scaler.mean[k].size());
    v["scale"] = std::vector<double>(scaler.scale[k].data(),
                                     scaler.scale[k].data() + scaler.scale[k].size());
    v["zero_variance"] = scaler.zero_variance[k];
    views.push_back(std::move(v));
  }
  return {{"views", views}};
}

Scaler ScalerFromFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open scaler '" + path + "'");
  Scaler scaler;
  try {
    const json doc = json::parse(in);
    for (const json& v : doc.at("views")) {
      const std::vector<double> mean = v.at("mean");
      const std::vector<double> scale = v.at("scale");
      scaler.mean.push_back(Eigen::Map<const Eigen::VectorXd>(mean.data(), mean.size()));
      scaler.scale.push_back(Eigen::Map<const Eigen::VectorXd>(scale.data(), scale.size()));
      scaler.zero_variance.push_back(v.at("zero_variance").get<std::vector<bool>>());
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidData, "scaler '" + path + "': " + e.what());
  }
  return scaler;
}

std::string FormatMatrixCsv(const std::vector<std::string>& ids,
                            const Eigen::MatrixXd& m, const std::string& prefix) {
  std::ostringstream out;
  out << "id";
  for (int j = 0; j < m.cols(); ++j) out << ',' << prefix << (j + 1);
  out << '\n';
  char buf[32];
  for (int i = 0; i < m.rows(); ++i) {
    out << ids[i];
    for (int j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      out << ',' << buf;
    }
    out << '\n';
  }
  return out.str();
}

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

// Fixed-width cell for the human-readable tables.
std::string Cell(double v, int width = 14) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%*.6f", width, v);
  return buf;
}

// ---------------------------------------------------------------------------
// Shared training flags

struct TrainFlags {
  std::string config_path;
  std::string data;
  std::string out;
  std::optional<std::string> scenario;
  std::optional<int> centers;
  std::optional<int> q;
  std::optional<int> rounds;
  std::optional<int> iters;
  std::optional<int> first_iters;
  std::optional<int> folds;
  std::optional<int> repeats;
  std::optional<uint64_t> seed;
  std::optional<std::string> dp;
  std::optional<std::string> bootstrap;
  std::optional<int> waic_samples;
  bool no_standardize = false;
};

void AddTrainFlags(CLI::App* app, TrainFlags& f) {
  app->add_option("--config", f.config_path, "JSON config file");
  app->add_option("--data", f.data, "dataset CSV or a directory holding data.csv")
      ->required();
  app->add_option("--out", f.out, "output directory")->required();
  app->add_option("--scenario", f.scenario, "IID, G, K or GK");
  app->add_option("--centers", f.centers, "number of centers");
  app->add_option("--q", f.q, "latent dimension");
  app->add_option("--rounds", f.rounds, "communication rounds");
  app->add_option("--iters", f.iters, "local iterations per round");
  app->add_option("--first-iters", f.first_iters, "EM iterations of round 1");
  app->add_option("--folds", f.folds, "cross-validation folds");
  app->add_option("--repeats", f.repeats, "cross-validation repeats");
  app->add_option("--seed", f.seed, "experiment seed");
  app->add_option("--dp", f.dp, "enable DP with eps,delta,clip");
  app->add_option("--bootstrap", f.bootstrap, "DP round-1 handling: seed-prior|permissive");
  app->add_option("--waic-samples", f.waic_samples, "parameter draws for WAIC");
  app->add_flag("--no-standardize", f.no_standardize, "train on unscaled data");
}

PrivacySpec ParseDpFlag(const std::string& text, std::optional<PrivacySpec> base) {
  PrivacySpec p = base.value_or(PrivacySpec{});
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw UsageError("--dp expects eps,delta,clip; bad value '" + item + "'");
    }
  }
  if (values.size() != 3) throw UsageError("--dp expects eps,delta,clip");
  p.epsilon = values[0];
  p.delta = values[1];
  p.clip_multiplier = values[2];
  return p;
}

// Builds the experiment config from file values overridden by flags.
ExperimentConfig BuildExperiment(const json& doc, const TrainFlags& f,
                                 bool selection) {
  ExperimentConfig cfg;
  if (selection) {
    cfg.centers = 1;
    cfg.federation = FederationConfig::Centralized(5);
    cfg.federation.first_round_iterations = kSelectionIterations;
    cfg.compute_waic = true;
    cfg.waic.likelihood = WaicLikelihood::kJoint;
    cfg.evaluate_imputation = false;
  }
  ParseFederation(Section(doc, "federation"), cfg.federation);
  ParseExperiment(Section(doc, "experiment"), cfg);
  cfg.federation.dp = ParsePrivacy(Section(doc, "privacy"));
  if (f.scenario) cfg.scenario = ParseScenario(*f.scenario);
  if (f.centers) cfg.centers = *f.centers;
  if (f.q) cfg.federation.latent_dim = *f.q;
  if (f.rounds) cfg.federation.rounds = *f.rounds;
  if (f.iters) {
    cfg.federation.local_iterations = *f.iters;
    // A single round is one EM run: --iters sizes it.
    if (cfg.federation.rounds == 1 && !f.first_iters) {
      cfg.federation.first_round_iterations = *f.iters;
    }
  }
  if (f.first_iters) cfg.federation.first_round_iterations = *f.first_iters;
  if (f.folds) cfg.folds = *f.folds;
  if (f.repeats) cfg.repeats = *f.repeats;
  if (f.seed) cfg.seed = *f.seed;
  if (f.dp) cfg.federation.dp = ParseDpFlag(*f.dp, cfg.federation.dp);
  if (f.bootstrap) cfg.federation.bootstrap = ParseBootstrap(*f.bootstrap);
  if (f.waic_samples) cfg.waic.samples = *f.waic_samples;
  if (f.no_standardize) cfg.standardize = false;
  if (cfg.centers < 1) throw Error(ErrorCode::kBadCenterCount, "centers must be >= 1");
  cfg.federation.Validate();
  return cfg;
}

json EffectiveConfig(const ExperimentConfig& cfg) {
  return {{"federation", ToJson(cfg.federation)},
          {"privacy", ToJson(cfg.federation.dp)},
          {"experiment", ToJson(cfg)}};
}

std::string JobName(const FoldResult& r) {
  return "r" + std::to_string(r.repeat) + "_f" + std::to_string(r.fold);
}

struct Summary {
  double mean = 0.0;
  double sd = 0.0;
};

Summary Summarize(const std::vector<double>& v) {
  return {Mean(v), std::sqrt(SampleVariance(v))};
}

// ---------------------------------------------------------------------------
// Commands

int CmdGenerate(const std::string& config_path, const std::string& out_dir,
                const std::optional<uint64_t>& seed, const std::optional<int>& n,
                const std::optional<int>& shifted, std::ostream& out) {
  const json doc = LoadConfig(config_path);
  SyntheticSpec spec = ParseSynthetic(Section(doc, "synthetic"));
  if (seed) spec.seed = *seed;
  if (n) spec.n_subjects = *n;
  if (shifted) spec.shifted_count = *shifted;
  spec.Validate();
  const SyntheticData sd = GenerateSynthetic(spec);
  const fs::path dir(out_dir);
  MakeDir(dir);
  WriteTabular((dir / "data.csv").string(), sd.dataset);
  WriteBytesFile((dir / "truth.bin").string(),
                 SerializeParams(sd.truth, sd.dataset.layout));
  WriteText(dir / "latents.csv", FormatMatrixCsv(sd.dataset.ids, sd.latents, "x"));

  Manifest m;
  m.command = "generate";
  m.config = {{"synthetic", ToJson(spec)}};
  m.seeds = {{"synthetic", spec.seed}};
  if (!config_path.empty()) m.inputs.push_back(config_path);
  m.outputs = {"data.csv", "truth.bin", "latents.csv", "manifest.json"};
  m.Write(dir);
  out << "wrote " << sd.dataset.size() << " subjects x " << sd.dataset.layout.total_dim()
      << " features to " << (dir / "data.csv").string() << "\n";
  return kExitOk;
}

int CmdTrain(const TrainFlags& f, std::ostream& out) {
  const json doc = LoadConfig(f.config_path);
  ExperimentConfig cfg = BuildExperiment(doc, f, false);
  cfg.keep_runs = true;
  const fs::path data_path = DataFile(f.data);
  const CenterDataset data = LoadTabular(data_path.string());
  const std::vector<FoldResult> results = RunExperiment(data, cfg);

  const fs::path dir(f.out);
  MakeDir(dir);
  Manifest m;
  m.command = "train";
  m.config = EffectiveConfig(cfg);
  m.seeds = {{"experiment", cfg.seed}};
  m.inputs = {data_path.string()};
  if (!f.config_path.empty()) m.inputs.push_back(f.config_path);

  const bool dp = cfg.federation.dp.has_value();
  const std::string method = dp ? "dp-fed-mv-ppca" : "fed-mv-ppca";
  const std::string scenario = ScenarioName(cfg.scenario);
  std::ostringstream long_rows;
  long_rows << "repeat,fold,metric,scenario,centers,method,value\n";
  std::ostringstream table;
  table << "repeat  fold     mae_train      mae_test      accuracy\n";
  std::vector<double> train_mae, test_mae, accuracy;
  std::map<std::string, std::vector<double>> imputed;
  for (const FoldResult& r : results) {
    const std::string job = JobName(r);
    const fs::path job_dir = dir / "runs" / job;
    MakeDir(job_dir);
    const FederationResult& run = *r.run;
    WriteBytesFile((job_dir / "global.bin").string(),
                   SerializeParams(run.global, run.layout));
    WriteText(job_dir / "history.tsv", ExportHistory(run));
    WriteText(job_dir / "test.csv",
              FormatTabular(data.Subset(r.test_indices)));
    m.outputs.push_back("runs/" + job + "/global.bin");
    m.outputs.push_back("runs/" + job + "/history.tsv");
    m.outputs.push_back("runs/" + job + "/test.csv");
    if (r.scaler) {
      WriteText(job_dir / "scaler.json", ScalerToJson(*r.scaler).dump(2) + "\n");
      m.outputs.push_back("runs/" + job + "/scaler.json");
    }
    if (dp) {
      WriteText(job_dir / "ledger.tsv", run.ledger.Report());
      m.outputs.push_back("runs/" + job + "/ledger.tsv");
    }
    for (const LongRow& row : ToLongRows(r.metrics, scenario, cfg.centers, method)) {
      long_rows << r.repeat << ',' << r.fold << ',' << row.metric << ','
                << row.scenario << ',' << row.centers << ',' << row.method << ','
                << Num(row.value) << '\n';
    }
    train_mae.push_back(r.metrics.mae_train);
    test_mae.push_back(r.metrics.mae_test);
    accuracy.push_back(r.metrics.accuracy_latent);
    for (const auto& [name, value] : r.metrics.imputation_mae) imputed[name].push_back(value);
    table << std::setw(6) << r.repeat << std::setw(6) << r.fold
          << Cell(r.metrics.mae_train) << Cell(r.metrics.mae_test)
          << Cell(r.metrics.accuracy_latent) << "\n";
  }
  const Summary tr = Summarize(train_mae), te = Summarize(test_mae),
                ac = Summarize(accuracy);
  table << "\nmethod " << method << ", scenario " << scenario << ", " << cfg.centers
        << " centers, q=" << cfg.federation.latent_dim << "\n"
        << "mae_train " << Num(tr.mean) << " +- " << Num(tr.sd) << "\n"
        << "mae_test  " << Num(te.mean) << " +- " << Num(te.sd) << "\n"
        << "accuracy  " << Num(ac.mean) << " +- " << Num(ac.sd) << "\n";
  for (const auto& [name, values] : imputed) {
    const Summary s = Summarize(values);
    table << "imputed " << name << " mae " << Num(s.mean) << " +- " << Num(s.sd) << "\n";
  }
  WriteText(dir / "metrics.csv", long_rows.str());
  WriteText(dir / "metrics.txt", table.str());
  m.outputs.push_back("metrics.csv");
  m.outputs.push_back("metrics.txt");
  m.outputs.push_back("manifest.json");
  m.Write(dir);
  out << table.str();
  return kExitOk;
}

std::pair<int, int> ParseRange(const std::string& text) {
  const size_t dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      const int v = std::stoi(text);
      return {v, v};
    }
    return {std::stoi(text.substr(0, dots)), std::stoi(text.substr(dots + 2))};
  } catch (const std::logic_error&) {
    throw UsageError("--q-range expects a..b, got '" + text + "'");
  }
}

int CmdSelectLatent(const TrainFlags& f, const std::string& range,
                    std::ostream& out) {
  const auto [lo, hi] = ParseRange(range);
  if (lo < 1 || hi < lo) throw UsageError("--q-range needs 1 <= a <= b");
  const json doc = LoadConfig(f.config_path);
  ExperimentConfig cfg = BuildExperiment(doc, f, true);
  const fs::path data_path = DataFile(f.data);
  const CenterDataset data = LoadTabular(data_path.string());

  std::ostringstream tsv;
  tsv << "q\twaic_mean\twaic_var\tmae_test_mean\tstd_diff\n";
  std::ostringstream table;
  table << "   q       waic_mean        waic_var      mae_test      std_diff\n";
  std::vector<double> previous;
  int best_q = lo;
  double best = 0.0;
  for (int q = lo; q <= hi; ++q) {
    ExperimentConfig c = cfg;
    c.federation.latent_dim = q;
    const std::vector<FoldResult> results = RunExperiment(data, c);
    std::vector<double> waic, mae;
    for (const FoldResult& r : results) {
      waic.push_back(*r.metrics.waic);
      mae.push_back(r.metrics.mae_test);
    }
    const double w = Mean(waic);
    std::string diff = "NA";
    if (!previous.empty()) {
      try {
        diff = Num(WaicStdDiff(waic, previous));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kInvalidDenominator) throw;
      }
    }
    tsv << q << '\t' << Num(w) << '\t' << Num(SampleVariance(waic)) << '\t'
        << Num(Mean(mae)) << '\t' << diff << '\n';
    table << std::setw(4) << q << Cell(w, 16) << Cell(SampleVariance(waic), 16)
          << Cell(Mean(mae)) << std::setw(14) << (diff == "NA" ? diff : Cell(std::stod(diff)))
          << "\n";
    if (q == lo || w < best) {
      best = w;
      best_q = q;
    }
    previous = std::move(waic);
  }
  table << "argmin WAIC: q=" << best_q << "\n";

  const fs::path dir(f.out);
  MakeDir(dir);
  WriteText(dir / "selection.tsv", tsv.str());
  WriteText(dir / "selection.txt", table.str());
  Manifest m;
  m.command = "select-latent";
  m.config = EffectiveConfig(cfg);
  m.config["q_range"] = {lo, hi};
  m.seeds = {{"experiment", cfg.seed}};
  m.inputs = {data_path.string()};
  if (!f.config_path.empty()) m.inputs.push_back(f.config_path);
  m.outputs = {"selection.tsv", "selection.txt", "manifest.json"};
  m.Write(dir);
  out << table.str();
  return kExitOk;
}

int CmdImpute(const std::string& checkpoint, const std::string& data_arg,
              const std::string& view, const std::string& out_dir,
              const std::string& scaler_path, const std::string& truth_path,
              std::ostream& out) {
  const DecodedParams decoded = DeserializeParams(ReadBytesFile(checkpoint));
  const auto* global = std::get_if<GlobalParams>(&decoded.params);
  if (global == nullptr) {
    throw Error(ErrorCode::kInvalidData, "checkpoint holds local, not global, parameters");
  }
  const ViewLayout& layout = decoded.layout;
  const std::optional<int> k = layout.index_of(view);
  if (!k) throw UsageError("unknown view '" + view + "'");
  const fs::path data_path = DataFile(data_arg);
  CenterDataset data = LoadTabular(data_path.string(), &layout);
  std::optional<Scaler> scaler;
  if (!scaler_path.empty()) {
    scaler = ScalerFromFile(scaler_path);
    data = scaler->Apply(data);
  }
  const DatasetImputation imp = ImputeDatasetView(*global, data, *k);
  Eigen::MatrixXd mean = imp.mean;
  Eigen::MatrixXd stddev = imp.stddev;
  if (scaler) {
    mean = scaler->Invert(*k, mean);
    stddev = (stddev.array().rowwise() * scaler->scale.at(*k).transpose().array()).matrix();
  }

  const fs::path dir(out_dir);
  MakeDir(dir);
  std::ostringstream tsv;
  tsv << "id\tfeature\tmean\tstddev\n";
  for (int n = 0; n < mean.rows(); ++n) {
    for (int j = 0; j < mean.cols(); ++j) {
      tsv << data.ids[n] << '\t' << view << ".f" << (j + 1) << '\t' << Num(mean(n, j))
          << '\t' << Num(stddev(n, j)) << '\n';
    }
  }
  WriteText(dir / "imputation.tsv", tsv.str());
  Manifest m;
  m.command = "impute";
  m.config = {{"view", view}, {"checkpoint", checkpoint}};
  m.inputs = {checkpoint, data_path.string()};
  if (!scaler_path.empty()) m.inputs.push_back(scaler_path);
  m.outputs = {"imputation.tsv"};
  out << "imputed view " << view << " for " << mean.rows() << " subjects\n";

  if (!truth_path.empty()) {
    const CenterDataset truth = LoadTabular(truth_path, &layout);
    if (!truth.has_view(*k)) {
      throw Error(ErrorCode::kInvalidData, "truth file lacks view '" + view + "'");
    }
    if (truth.ids != data.ids) {
      throw Error(ErrorCode::kInvalidData, "truth subjects differ from the data subjects");
    }
    const Eigen::MatrixXd err = (mean - truth.view(*k)).cwiseAbs();
    std::ostringstream mae;
    mae << "feature\tmae\n";
    for (int j = 0; j < err.cols(); ++j) {
      mae << view << ".f" << (j + 1) << '\t' << Num(err.col(j).mean()) << '\n';
    }
    mae << "all\t" << Num(err.mean()) << '\n';
    WriteText(dir / "feature_mae.tsv", mae.str());
    m.inputs.push_back(truth_path);
    m.outputs.push_back("feature_mae.tsv");
    out << "imputation MAE " << Num(err.mean()) << "\n";
  }
  m.outputs.push_back("manifest.json");
  m.Write(dir);
  return kExitOk;
}

int CmdSplit(const std::string& data_arg, const std::string& scenario_name,
             int centers, uint64_t seed, const std::string& out_dir,
             std::ostream& out) {
  Scenario scenario;
  try {
    scenario = ParseScenario(scenario_name);
  } catch (const Error& e) {
    throw UsageError(e.detail());
  }
  if (centers < 1) throw UsageError("--centers must be >= 1");
  const fs::path data_path = DataFile(data_arg);
  const CenterDataset data = LoadTabular(data_path.string());
  const std::vector<CenterDataset> parts = SplitScenario(data, scenario, centers, seed);

  const fs::path dir(out_dir);
  MakeDir(dir);
  Manifest m;
  m.command = "split";
  m.config = {{"scenario", ScenarioName(scenario)}, {"centers", centers}};
  m.seeds = {{"split", seed}};
  m.inputs = {data_path.string()};
  for (size_t c = 0; c < parts.size(); ++c) {
    const std::string name = "center_" + std::to_string(c) + ".csv";
    WriteTabular((dir / name).string(), parts[c]);
    m.outputs.push_back(name);
    std::string views;
    for (int k : parts[c].present_views()) {
      views += (views.empty() ? "" : ",") + data.layout.name(k);
    }
    out << name << ": " << parts[c].size() << " subjects, views " << views << "\n";
  }
  m.outputs.push_back("manifest.json");
  m.Write(dir);
  return kExitOk;
}

}  // namespace

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kBadCenterCount:
    case ErrorCode::kDpDomainError:
    case ErrorCode::kInvalidSensitivity:
    case ErrorCode::kViewNotMissing:
    case ErrorCode::kClientDropped:
      return kExitUsage;
    case ErrorCode::kLayoutMismatch:
    case ErrorCode::kViewParamsMissing:
    case ErrorCode::kNoObservedView:
    case ErrorCode::kInvalidData:
    case ErrorCode::kShapeMismatch:
    case ErrorCode::kViewUnrepresented:
    case ErrorCode::kFormatVersionMismatch:
    case ErrorCode::kTruncatedMessage:
    case ErrorCode::kChecksumFailure:
    case ErrorCode::kBadMagic:
    case ErrorCode::kInsufficientGroupSamples:
    case ErrorCode::kHeaderMismatch:
    case ErrorCode::kRaggedRow:
    case ErrorCode::kNonNumericCell:
    case ErrorCode::kDegenerateLabels:
    case ErrorCode::kIoError:
      return kExitData;
    case ErrorCode::kSingularPosterior:
    case ErrorCode::kSingularUpdate:
    case ErrorCode::kInvalidVariance:
    case ErrorCode::kWaicDegenerate:
    case ErrorCode::kInvalidDenominator:
      return kExitNumerical;
  }
  return kExitNumerical;
}

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Federated multi-view PPCA"};
  app.name("fedppca");
  app.require_subcommand(1);

  std::string gen_config, gen_out;
  std::optional<uint64_t> gen_seed;
  std::optional<int> gen_n, gen_shifted;
  CLI::App* gen = app.add_subcommand("generate", "write a synthetic dataset");
  gen->add_option("--config", gen_config, "JSON config file (synthetic section)");
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--n-subjects", gen_n, "number of subjects");
  gen->add_option("--shifted-count", gen_shifted, "subjects in the shifted group");

  std::string split_data, split_scenario = "IID", split_out;
  int split_centers = 3;
  uint64_t split_seed = 0;
  CLI::App* split = app.add_subcommand("split", "distribute a dataset over centers");
  split->add_option("--data", split_data, "dataset CSV or a directory holding data.csv")
      ->required();
  split->add_option("--scenario", split_scenario, "IID, G, K or GK");
  split->add_option("--centers", split_centers, "number of centers");
  split->add_option("--seed", split_seed, "split seed");
  split->add_option("--out", split_out, "output directory")->required();

  TrainFlags train_flags;
  CLI::App* train = app.add_subcommand("train", "cross-validated federated training");
  AddTrainFlags(train, train_flags);

  TrainFlags select_flags;
  std::string q_range = "2..7";
  CLI::App* select = app.add_subcommand("select-latent", "WAIC sweep over q");
  AddTrainFlags(select, select_flags);
  select->add_option("--q-range", q_range, "latent dimensions a..b");

  std::string imp_checkpoint, imp_data, imp_view, imp_out, imp_scaler, imp_truth;
  CLI::App* impute = app.add_subcommand("impute", "predict a missing view");
  impute->add_option("--checkpoint", imp_checkpoint, "serialized global parameters")
      ->required();
  impute->add_option("--data", imp_data, "CSV without the view")->required();
  impute->add_option("--view", imp_view, "view to impute")->required();
  impute->add_option("--out", imp_out, "output directory")->required();
  impute->add_option("--scaler", imp_scaler, "scaler.json of the training run");
  impute->add_option("--truth", imp_truth, "CSV holding the true view values");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (gen->parsed()) {
      return CmdGenerate(gen_config, gen_out, gen_seed, gen_n, gen_shifted, out);
    }
    if (split->parsed()) {
      return CmdSplit(split_data, split_scenario, split_centers, split_seed, split_out, out);
    }
    if (train->parsed()) return CmdTrain(train_flags, out);
    if (select->parsed()) return CmdSelectLatent(select_flags, q_range, out);
    if (impute->parsed()) {
      return CmdImpute(imp_checkpoint, imp_data, imp_view, imp_out, imp_scaler,
                       imp_truth, out);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what();
    if (e.row() >= 0) err << " (row " << e.row() << ")";
    if (!e.column().empty()) err << " (column " << e.column() << ")";
    err << "\n";
    return ExitCodeFor(e.code());
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const json::exception& e) {
    err << "error: config: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace fedppca::cli
