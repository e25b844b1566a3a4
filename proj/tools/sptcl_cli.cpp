// Command-line harness for self-paced transfer classifier learning.
//
// Subcommands: train, predict, synth, noise, sweep. Every run is a pure
// function of its input files and seeds; `train` writes a manifest that can
// be replayed with --from-manifest to reproduce its outputs byte for byte.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "sptcl/sptcl.hpp"

using nlohmann::json;
using namespace sptcl;

namespace {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_config:
    case ErrorCode::degenerate_input: return 2;
    case ErrorCode::missing_input: return 3;
    case ErrorCode::malformed_file:
    case ErrorCode::non_finite_value:
    case ErrorCode::dimension_mismatch:
    case ErrorCode::class_out_of_range: return 4;
    case ErrorCode::numeric_failure: return 5;
  }
  return 1;
}

std::string one_line(std::string text) {
  for (char& c : text)
    if (c == '\n' || c == '\r') c = ' ';
  return text;
}

// ---- hyperparameter flags shared by train and sweep -------------------------

struct HyperFlags {
  Hyperparams hp;
  std::string kernel = "none";
  std::string gamma = "median";
  std::string ablation = "full";

  void attach(CLI::App* cmd) {
    cmd->add_option("--r", hp.r, "probability exponent of the prudent loss (>= 1)");
    cmd->add_option("--eta", hp.eta, "complexity regularizer (> 0)");
    cmd->add_option("--rho", hp.rho, "manifold regularizer (>= 0)");
    cmd->add_option("--k", hp.k_neighbors, "affinity graph neighbors (>= 1)");
    cmd->add_option("--kernel", kernel, "none | linear | rbf")
        ->check(CLI::IsMember({"none", "linear", "rbf"}));
    cmd->add_option("--gamma", gamma, "rbf bandwidth, a number or 'median'");
    cmd->add_option("--outer-iters", hp.outer_iters, "self-paced schedule length (>= 2)");
    cmd->add_option("--inner-iters", hp.inner_iters, "max alternating passes (>= 1)");
    cmd->add_option("--inner-tol", hp.inner_tol, "relative objective tolerance (>= 0)");
    cmd->add_option("--q-floor", hp.q_floor, "residual floor before inversion (> 0)");
    cmd->add_option("--seed", hp.seed, "base seed; stages derive seed + role offset");
    cmd->add_option("--ablation", ablation, "full | no_spl | hard_label")
        ->check(CLI::IsMember({"full", "no_spl", "hard_label"}));
  }

  Hyperparams resolve() const {
    Hyperparams out = hp;
    if (kernel == "none")
      out.kernel.kind = KernelKind::none;
    else if (kernel == "linear")
      out.kernel.kind = KernelKind::linear;
    else
      out.kernel.kind = KernelKind::rbf;
    if (gamma == "median")
      out.kernel.gamma.reset();
    else
      out.kernel.gamma = std::stod(gamma);
    if (ablation == "full")
      out.ablation = Ablation::full;
    else if (ablation == "no_spl")
      out.ablation = Ablation::no_spl;
    else
      out.ablation = Ablation::hard_label;
    validate(out);
    return out;
  }
};

json hyperparams_to_json(const Hyperparams& hp) {
  json j{{"r", hp.r},
         {"eta", hp.eta},
         {"rho", hp.rho},
         {"k_neighbors", hp.k_neighbors},
         {"outer_iters", hp.outer_iters},
         {"inner_iters", hp.inner_iters},
         {"inner_tol", hp.inner_tol},
         {"q_floor", hp.q_floor},
         {"seed", hp.seed}};
  switch (hp.kernel.kind) {
    case KernelKind::none: j["kernel"] = "none"; break;
    case KernelKind::linear: j["kernel"] = "linear"; break;
    case KernelKind::rbf: j["kernel"] = "rbf"; break;
  }
  if (hp.kernel.gamma)
    j["gamma"] = *hp.kernel.gamma;
  else
    j["gamma"] = nullptr;
  switch (hp.ablation) {
    case Ablation::full: j["ablation"] = "full"; break;
    case Ablation::no_spl: j["ablation"] = "no_spl"; break;
    case Ablation::hard_label: j["ablation"] = "hard_label"; break;
  }
  return j;
}

Hyperparams hyperparams_from_json(const json& j) {
  Hyperparams hp;
  j.at("r").get_to(hp.r);
  j.at("eta").get_to(hp.eta);
  j.at("rho").get_to(hp.rho);
  j.at("k_neighbors").get_to(hp.k_neighbors);
  j.at("outer_iters").get_to(hp.outer_iters);
  j.at("inner_iters").get_to(hp.inner_iters);
  j.at("inner_tol").get_to(hp.inner_tol);
  j.at("q_floor").get_to(hp.q_floor);
  j.at("seed").get_to(hp.seed);
  std::string kernel = j.at("kernel").get<std::string>();
  hp.kernel.kind = kernel == "none"   ? KernelKind::none
                   : kernel == "linear" ? KernelKind::linear
                                        : KernelKind::rbf;
  if (!j.at("gamma").is_null()) hp.kernel.gamma = j["gamma"].get<double>();
  std::string ablation = j.at("ablation").get<std::string>();
  hp.ablation = ablation == "full"     ? Ablation::full
                : ablation == "no_spl" ? Ablation::no_spl
                                       : Ablation::hard_label;
  return hp;
}

// ---- train -------------------------------------------------------------------

struct TrainConfig {
  std::string source_features, source_labels, target_features;
  std::optional<std::string> target_labels, source_clean_labels;
  std::optional<int> class_count;
  std::vector<int> keep_classes, source_keep_classes;
  bool l2_normalize = false;
  std::optional<NoiseSpec> noise;
  Hyperparams hp;
  std::string predictions_out = "predictions.txt";
  std::string metrics_out = "metrics.jsonl";
  std::string manifest_out = "manifest.json";
  std::optional<std::string> model_out, affinity_dump_out;
};

json optional_string(const std::optional<std::string>& s) {
  return s ? json(*s) : json(nullptr);
}

json train_config_to_json(const TrainConfig& cfg) {
  json j{{"command", "train"},
         {"version", 1},
         {"source_features", cfg.source_features},
         {"source_labels", cfg.source_labels},
         {"target_features", cfg.target_features},
         {"target_labels", optional_string(cfg.target_labels)},
         {"source_clean_labels", optional_string(cfg.source_clean_labels)},
         {"class_count", cfg.class_count ? json(*cfg.class_count) : json(nullptr)},
         {"keep_classes", cfg.keep_classes},
         {"source_keep_classes", cfg.source_keep_classes},
         {"l2_normalize", cfg.l2_normalize},
         {"hyperparams", hyperparams_to_json(cfg.hp)},
         {"predictions_out", cfg.predictions_out},
         {"metrics_out", cfg.metrics_out},
         {"manifest_out", cfg.manifest_out},
         {"model_out", optional_string(cfg.model_out)},
         {"affinity_dump_out", optional_string(cfg.affinity_dump_out)}};
  if (cfg.noise)
    j["noise"] = json{{"p_noise", cfg.noise->p_noise}, {"seed", cfg.noise->seed}};
  else
    j["noise"] = nullptr;
  return j;
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig cfg;
  j.at("source_features").get_to(cfg.source_features);
  j.at("source_labels").get_to(cfg.source_labels);
  j.at("target_features").get_to(cfg.target_features);
  if (!j.at("target_labels").is_null()) cfg.target_labels = j["target_labels"].get<std::string>();
  if (!j.at("source_clean_labels").is_null())
    cfg.source_clean_labels = j["source_clean_labels"].get<std::string>();
  if (!j.at("class_count").is_null()) cfg.class_count = j["class_count"].get<int>();
  j.at("keep_classes").get_to(cfg.keep_classes);
  j.at("source_keep_classes").get_to(cfg.source_keep_classes);
  j.at("l2_normalize").get_to(cfg.l2_normalize);
  cfg.hp = hyperparams_from_json(j.at("hyperparams"));
  if (!j.at("noise").is_null())
    cfg.noise = NoiseSpec{j["noise"].at("p_noise").get<double>(),
                          j["noise"].at("seed").get<std::uint64_t>()};
  j.at("predictions_out").get_to(cfg.predictions_out);
  j.at("metrics_out").get_to(cfg.metrics_out);
  j.at("manifest_out").get_to(cfg.manifest_out);
  if (!j.at("model_out").is_null()) cfg.model_out = j["model_out"].get<std::string>();
  if (!j.at("affinity_dump_out").is_null())
    cfg.affinity_dump_out = j["affinity_dump_out"].get<std::string>();
  return cfg;
}

json matrix_to_json(const Matrix& m) {
  return json{{"rows", m.rows()},
              {"cols", m.cols()},
              {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

Matrix matrix_from_json(const json& j) {
  Index rows = j.at("rows").get<Index>();
  Index cols = j.at("cols").get<Index>();
  auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Index>(data.size()) != rows * cols)
    throw Error(ErrorCode::malformed_file, "matrix payload size mismatch in model file");
  return Eigen::Map<const Matrix>(data.data(), rows, cols);
}

void save_model(const std::string& path, const FitResult& result, const Problem& prob) {
  json j{{"format", "sptcl-model"},
         {"version", 1},
         {"mode", result.state.mode == SolverMode::kernel ? "kernel" : "linear"},
         {"class_count", prob.class_count},
         {"r", prob.hp.r},
         {"q_floor", prob.hp.q_floor},
         {"weights", matrix_to_json(result.state.W)}};
  if (prob.kernel_mode()) {
    j["kernel"] = json{{"kind", prob.gram->kind == KernelKind::rbf ? "rbf" : "linear"},
                       {"gamma", prob.gram->gamma}};
    j["train_features"] = matrix_to_json(prob.X);
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::missing_input, "cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
}

void write_predictions(const std::string& path, const Labels& labels) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::missing_input, "cannot open " + path + " for writing");
  for (Index i = 0; i < labels.size(); ++i) out << labels(i) << '\n';
}

int run_train(const TrainConfig& cfg) {
  validate(cfg.hp);  // reject bad hyperparameters before touching any file
  if (cfg.noise) validate(*cfg.noise);

  Dataset source = load_dataset(cfg.source_features, cfg.source_labels, cfg.class_count);
  Dataset target = load_dataset(cfg.target_features, cfg.target_labels, source.class_count);
  if (!cfg.source_keep_classes.empty()) source = subset_classes(source, cfg.source_keep_classes);
  if (!cfg.keep_classes.empty()) target = subset_classes(target, cfg.keep_classes);
  if (cfg.l2_normalize) {
    source.features = l2_normalized(source.features);
    target.features = l2_normalized(target.features);
  }

  FitOptions opts;
  if (target.labels) opts.true_target_labels = *target.labels;
  if (cfg.source_clean_labels) {
    Labels clean = load_labels(*cfg.source_clean_labels, detect_format(*cfg.source_clean_labels));
    opts.clean_source_labels = clean;
  }
  if (cfg.noise) {
    if (!opts.clean_source_labels) opts.clean_source_labels = *source.labels;
    source.labels = inject_label_noise(*source.labels, source.class_count, *cfg.noise).labels;
  }

  if (cfg.affinity_dump_out) {
    std::ofstream out(*cfg.affinity_dump_out);
    if (!out)
      throw Error(ErrorCode::missing_input,
                  "cannot open " + *cfg.affinity_dump_out + " for writing");
    dump_affinity(out, build_affinity(target.features, cfg.hp.k_neighbors));
  }

  FitResult result = fit(source, target, cfg.hp, opts);

  write_predictions(cfg.predictions_out, result.predictions);
  {
    std::ofstream out(cfg.metrics_out);
    if (!out)
      throw Error(ErrorCode::missing_input, "cannot open " + cfg.metrics_out + " for writing");
    write_records_jsonl(out, result.records);
  }
  if (cfg.model_out) {
    Problem prob = make_problem(source, target, cfg.hp);
    save_model(*cfg.model_out, result, prob);
  }
  {
    std::ofstream out(cfg.manifest_out);
    if (!out)
      throw Error(ErrorCode::missing_input, "cannot open " + cfg.manifest_out + " for writing");
    out << train_config_to_json(cfg).dump(2) << '\n';
  }
  return 0;
}

// ---- predict -----------------------------------------------------------------

int run_predict(const std::string& model_path, const std::string& features_path,
                const std::string& out_path, const std::optional<std::string>& probs_out) {
  std::ifstream in(model_path);
  if (!in) throw Error(ErrorCode::missing_input, "cannot open " + model_path);
  json j = json::parse(in, nullptr, true);
  if (j.value("format", "") != "sptcl-model")
    throw Error(ErrorCode::malformed_file, model_path + " is not an sptcl model file");

  ModelState state;
  state.W = matrix_from_json(j.at("weights"));
  state.mode = j.at("mode").get<std::string>() == "kernel" ? SolverMode::kernel
                                                           : SolverMode::linear;
  double r = j.at("r").get<double>();
  double q_floor = j.at("q_floor").get<double>();

  Matrix features = load_features(features_path, detect_format(features_path));
  Matrix inputs;
  if (state.mode == SolverMode::kernel) {
    Matrix train = matrix_from_json(j.at("train_features"));
    KernelKind kind = j.at("kernel").at("kind").get<std::string>() == "rbf"
                          ? KernelKind::rbf
                          : KernelKind::linear;
    inputs = gram_cross(train, features, kind, j.at("kernel").value("gamma", 0.0));
  } else {
    inputs = std::move(features);
  }
  Prediction pred = predict(state, inputs, r, q_floor);
  write_predictions(out_path, pred.labels);
  if (probs_out) save_features_csv(*probs_out, pred.probabilities);
  return 0;
}

// ---- synth -------------------------------------------------------------------

int run_synth(const SyntheticSpec& spec, const std::string& out_dir) {
  validate(spec);
  std::filesystem::create_directories(out_dir);
  auto data = generate_synthetic(spec);
  auto path = [&](const char* name) { return (std::filesystem::path(out_dir) / name).string(); };
  save_features_csv(path("source_features.csv"), data.source.features);
  save_features_binary(path("source_features.bin"), data.source.features);
  save_labels_csv(path("source_labels.csv"), *data.source.labels);
  save_labels_binary(path("source_labels.bin"), *data.source.labels);
  save_features_csv(path("target_features.csv"), data.target.features);
  save_features_binary(path("target_features.bin"), data.target.features);
  save_labels_csv(path("target_labels.csv"), data.true_target_labels);
  save_labels_binary(path("target_labels.bin"), data.true_target_labels);
  return 0;
}

// ---- noise -------------------------------------------------------------------

int run_noise(const std::string& labels_in, int class_count, const NoiseSpec& spec,
              const std::string& labels_out, const std::optional<std::string>& mask_out) {
  validate(spec);
  Labels labels = load_labels(labels_in, detect_format(labels_in));
  auto result = inject_label_noise(labels, class_count, spec);
  FileFormat format = detect_format(labels_in);
  save_labels(labels_out, result.labels, format);
  if (mask_out) {
    std::ofstream out(*mask_out);
    if (!out) throw Error(ErrorCode::missing_input, "cannot open " + *mask_out + " for writing");
    for (bool f : result.flipped) out << (f ? 1 : 0) << '\n';
  }
  return 0;
}

// ---- sweep -------------------------------------------------------------------

struct SweepConfig {
  // base synthetic fixture; file mode is active when source_features is set
  SyntheticSpec synth;
  std::optional<std::string> source_features, source_labels, target_features, target_labels;
  Hyperparams hp;
  std::vector<double> eta_grid, r_grid, rho_grid, p_noise_grid;
  std::vector<int> outlier_grid;
  std::vector<std::uint64_t> seeds;
  std::string out = "sweep.csv";
};

int run_sweep(SweepConfig cfg) {
  validate(cfg.hp);
  if (cfg.eta_grid.empty()) cfg.eta_grid = {cfg.hp.eta};
  if (cfg.r_grid.empty()) cfg.r_grid = {cfg.hp.r};
  if (cfg.rho_grid.empty()) cfg.rho_grid = {cfg.hp.rho};
  if (cfg.p_noise_grid.empty()) cfg.p_noise_grid = {0.0};
  if (cfg.seeds.empty()) cfg.seeds = {cfg.hp.seed};
  const bool file_mode = cfg.source_features.has_value();
  if (file_mode && !cfg.outlier_grid.empty())
    throw Error(ErrorCode::invalid_config,
                "--outlier-grid needs the synthetic fixture, not file inputs");
  if (cfg.outlier_grid.empty())
    cfg.outlier_grid = {file_mode ? -1 : cfg.synth.outlier_classes};

  std::optional<Dataset> file_source, file_target;
  std::optional<Labels> file_truth;
  if (file_mode) {
    if (!cfg.source_labels || !cfg.target_features || !cfg.target_labels)
      throw Error(ErrorCode::invalid_config,
                  "file-mode sweep needs source features+labels and target features+labels");
    file_source = load_dataset(*cfg.source_features, *cfg.source_labels);
    file_target = load_dataset(*cfg.target_features, std::nullopt,
                               file_source->class_count);
    file_truth = load_labels(*cfg.target_labels, detect_format(*cfg.target_labels));
  }

  std::ofstream out(cfg.out);
  if (!out) throw Error(ErrorCode::missing_input, "cannot open " + cfg.out + " for writing");
  out << "eta,r,rho,p_noise,outlier_classes,seed_count,mean_accuracy,std_accuracy\n";
  char buf[64];

  for (double eta : cfg.eta_grid)
    for (double r : cfg.r_grid)
      for (double rho : cfg.rho_grid)
        for (double p_noise : cfg.p_noise_grid)
          for (int outliers : cfg.outlier_grid) {
            std::vector<double> accs;
            for (std::uint64_t seed : cfg.seeds) {
              try {
                Dataset source;
                Dataset target;
                Labels truth;
                if (file_mode) {
                  source = *file_source;
                  target = *file_target;
                  truth = *file_truth;
                } else {
                  SyntheticSpec spec = cfg.synth;
                  spec.outlier_classes = outliers;
                  spec.seed = seed;
                  auto data = generate_synthetic(spec);
                  source = std::move(data.source);
                  target = std::move(data.target);
                  truth = std::move(data.true_target_labels);
                }
                if (p_noise > 0.0)
                  source.labels = inject_label_noise(*source.labels, source.class_count,
                                                     NoiseSpec{p_noise, seed})
                                      .labels;
                Hyperparams hp = cfg.hp;
                hp.eta = eta;
                hp.r = r;
                hp.rho = rho;
                hp.seed = seed;
                validate(hp);
                FitResult result = fit(source, target, hp);
                accs.push_back(accuracy(result.predictions, truth));
              } catch (const Error& e) {
                std::cerr << error_category(e.code()) << " in sweep cell: "
                          << one_line(e.what()) << '\n';
              }
            }
            double mean = std::numeric_limits<double>::quiet_NaN();
            double stddev = std::numeric_limits<double>::quiet_NaN();
            if (!accs.empty()) {
              mean = 0.0;
              for (double a : accs) mean += a;
              mean /= static_cast<double>(accs.size());
              stddev = 0.0;
              for (double a : accs) stddev += (a - mean) * (a - mean);
              stddev = std::sqrt(stddev / static_cast<double>(accs.size()));
            }
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g", eta, r, rho, p_noise);
            out << buf << ',' << outliers << ',' << accs.size() << ',';
            std::snprintf(buf, sizeof buf, "%.17g,%.17g", mean, stddev);
            out << buf << '\n';
          }
  return 0;
}

void attach_synth_flags(CLI::App* cmd, SyntheticSpec& spec) {
  cmd->add_option("--shared-classes", spec.shared_classes, "classes present in both domains");
  cmd->add_option("--outlier-classes", spec.outlier_classes, "source-only classes");
  cmd->add_option("--source-per-class", spec.source_per_class, "source samples per class");
  cmd->add_option("--target-per-class", spec.target_per_class, "target samples per class");
  cmd->add_option("--dim", spec.dim, "feature dimension");
  cmd->add_option("--separation", spec.separation, "class center scale");
  cmd->add_option("--cluster-noise", spec.noise, "within-cluster standard deviation");
  cmd->add_option("--domain-shift", spec.domain_shift, "norm of the domain mean shift");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"self-paced transfer classifier learning"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "fit a classifier and write predictions");
  TrainConfig tc;
  std::string from_manifest;
  HyperFlags train_hp;
  std::uint64_t noise_seed = 0;
  bool noise_seed_given = false;
  double p_noise = 0.0;
  train->add_option("--from-manifest", from_manifest,
                    "replay a previous run from its manifest (other flags ignored)");
  train->add_option("--source-features", tc.source_features, "source feature file");
  train->add_option("--source-labels", tc.source_labels, "source label file");
  train->add_option("--target-features", tc.target_features, "target feature file");
  train->add_option("--target-labels", [&tc](const std::vector<std::string>& v) {
    tc.target_labels = v.front();
    return true;
  }, "target truth labels (metrics only)");
  train->add_option("--source-clean-labels", [&tc](const std::vector<std::string>& v) {
    tc.source_clean_labels = v.front();
    return true;
  }, "uncorrupted source labels (diagnostics only)");
  train->add_option("--class-count", [&tc](const std::vector<std::string>& v) {
    tc.class_count = std::stoi(v.front());
    return true;
  }, "source label space size (default: max label + 1)");
  train->add_option("--keep-classes", tc.keep_classes, "subset the target to these classes")
      ->delimiter(',');
  train->add_option("--source-keep-classes", tc.source_keep_classes,
                    "subset the source to these classes")
      ->delimiter(',');
  train->add_flag("--l2-normalize", tc.l2_normalize, "scale every sample to unit norm");
  train->add_option("--p-noise", p_noise, "source label corruption probability");
  auto* noise_seed_opt =
      train->add_option("--noise-seed", noise_seed, "noise seed (default: --seed)");
  train_hp.attach(train);
  train->add_option("--predictions-out", tc.predictions_out, "predicted target labels");
  train->add_option("--metrics-out", tc.metrics_out, "per-iteration JSON lines");
  train->add_option("--manifest-out", tc.manifest_out, "replayable run manifest");
  train->add_option("--model-out", [&tc](const std::vector<std::string>& v) {
    tc.model_out = v.front();
    return true;
  }, "save the fitted model as JSON");
  train->add_option("--dump-affinity", [&tc](const std::vector<std::string>& v) {
    tc.affinity_dump_out = v.front();
    return true;
  }, "write the affinity matrix as 'i j value' lines");
  train->callback([&] { noise_seed_given = noise_seed_opt->count() > 0; });

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "apply a saved model to new features");
  std::string model_path, predict_features, predict_out = "predictions.txt";
  std::optional<std::string> probs_out;
  predict_cmd->add_option("--model", model_path, "model JSON from train --model-out")
      ->required();
  predict_cmd->add_option("--features", predict_features, "feature file to label")->required();
  predict_cmd->add_option("--out", predict_out, "output label file");
  predict_cmd->add_option("--probabilities-out", [&probs_out](const std::vector<std::string>& v) {
    probs_out = v.front();
    return true;
  }, "class probability columns as CSV");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic cross-domain task");
  SyntheticSpec synth_spec;
  std::string synth_dir = "synthetic";
  attach_synth_flags(synth, synth_spec);
  synth->add_option("--seed", synth_spec.seed, "generation seed");
  synth->add_option("--out-dir", synth_dir, "output directory");

  // noise
  auto* noise = app.add_subcommand("noise", "corrupt a label file");
  std::string noise_in, noise_out = "noisy_labels.csv";
  std::optional<std::string> mask_out;
  int noise_classes = 0;
  NoiseSpec noise_spec;
  noise->add_option("--labels-in", noise_in, "input label file")->required();
  noise->add_option("--class-count", noise_classes, "label space size")->required();
  noise->add_option("--p-noise", noise_spec.p_noise, "corruption probability")->required();
  noise->add_option("--seed", noise_spec.seed, "noise seed");
  noise->add_option("--labels-out", noise_out, "output label file");
  noise->add_option("--mask-out", [&mask_out](const std::vector<std::string>& v) {
    mask_out = v.front();
    return true;
  }, "write the flipped mask, one 0/1 per line");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "grid of runs, mean accuracy per cell");
  SweepConfig sc;
  HyperFlags sweep_hp;
  std::vector<std::uint64_t> sweep_seeds;
  int trials = 0;
  attach_synth_flags(sweep, sc.synth);
  sweep->add_option("--source-features", [&sc](const std::vector<std::string>& v) {
    sc.source_features = v.front();
    return true;
  }, "file mode: source features");
  sweep->add_option("--source-labels", [&sc](const std::vector<std::string>& v) {
    sc.source_labels = v.front();
    return true;
  }, "file mode: source labels");
  sweep->add_option("--target-features", [&sc](const std::vector<std::string>& v) {
    sc.target_features = v.front();
    return true;
  }, "file mode: target features");
  sweep->add_option("--target-labels", [&sc](const std::vector<std::string>& v) {
    sc.target_labels = v.front();
    return true;
  }, "file mode: target truth labels");
  sweep_hp.attach(sweep);
  sweep->add_option("--eta-grid", sc.eta_grid, "eta values")->delimiter(',');
  sweep->add_option("--r-grid", sc.r_grid, "r values")->delimiter(',');
  sweep->add_option("--rho-grid", sc.rho_grid, "rho values")->delimiter(',');
  sweep->add_option("--p-noise-grid", sc.p_noise_grid, "noise levels")->delimiter(',');
  sweep->add_option("--outlier-grid", sc.outlier_grid, "outlier class counts (synthetic only)")
      ->delimiter(',');
  sweep->add_option("--seeds", sweep_seeds, "explicit seed list")->delimiter(',');
  sweep->add_option("--trials", trials, "use seeds seed, seed+1, ..., seed+trials-1");
  sweep->add_option("--out", sc.out, "results CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "ConfigError: " << one_line(e.what()) << '\n';
    return 2;
  }

  try {
    if (*train) {
      if (!from_manifest.empty()) {
        std::ifstream in(from_manifest);
        if (!in) throw Error(ErrorCode::missing_input, "cannot open " + from_manifest);
        tc = train_config_from_json(json::parse(in));
      } else {
        if (tc.source_features.empty() || tc.source_labels.empty() ||
            tc.target_features.empty())
          throw Error(ErrorCode::invalid_config,
                      "train needs --source-features, --source-labels and --target-features");
        tc.hp = train_hp.resolve();
        if (p_noise > 0.0)
          tc.noise = NoiseSpec{p_noise, noise_seed_given
                                            ? noise_seed
                                            : derive_seed(tc.hp.seed, kSeedRoleNoise)};
      }
      return run_train(tc);
    }
    if (*predict_cmd) return run_predict(model_path, predict_features, predict_out, probs_out);
    if (*synth) return run_synth(synth_spec, synth_dir);
    if (*noise) return run_noise(noise_in, noise_classes, noise_spec, noise_out, mask_out);
    if (*sweep) {
      sc.hp = sweep_hp.resolve();
      sc.seeds = sweep_seeds;
      if (sc.seeds.empty() && trials > 0)
        for (int i = 0; i < trials; ++i) sc.seeds.push_back(sc.hp.seed + i);
      return run_sweep(sc);
    }
  } catch (const Error& e) {
    std::cerr << error_category(e.code()) << ": " << one_line(e.what()) << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "InternalError: " << one_line(e.what()) << '\n';
    return 1;
  }
  return 0;
}
