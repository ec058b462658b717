// SPDX-License-Identifier: Apache-2.0
//
// slicetopo: data generation, training, recognition, evaluation, oracle
// checks and diagnostic plots.
//
// Exit codes: 0 ok, 2 usage, 3 data error, 4 verification failure.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "png_writer.hpp"
#include "slicetopo/slicetopo.hpp"
#include "slicetopo/verify/oracle_run.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitVerify = 4;

constexpr const char* kRecognitionSchema = "slicetopo.recognition/1";
constexpr const char* kEvaluationSchema = "slicetopo.evaluation/1";

#ifdef SLICETOPO_MUTANT_ELDER_RULE
// Test build only: the older component dies on a merge.
struct OracleTieRule {
  static bool first_is_younger(double ba, std::size_t a, double bb, std::size_t b) {
    return !slicetopo::ElderRule::first_is_younger(ba, a, bb, b);
  }
};
#else
using OracleTieRule = slicetopo::ElderRule;
#endif

void write_text(const std::string& path, const std::string& text) {
  if (path == "-")
    std::cout << text;
  else
    slicetopo::detail::write_file(path, text);
}

ordered_json to_json(const slicetopo::RecognitionResult& r) {
  ordered_json j;
  j["instance_id"] = r.instance_id;
  j["label"] = r.label.empty() ? ordered_json(nullptr) : ordered_json(r.label);
  j["probability"] = r.probability;
  j["occluded"] = r.occluded;
  j["occluded_end"] = r.occluded_end ? ordered_json(slicetopo::to_string(*r.occluded_end)) : ordered_json(nullptr);
  j["n_slices"] = r.n_slices;
  j["scale_ok"] = r.scale_ok;
  ordered_json models = ordered_json::array();
  for (const auto& [set, n] : r.models_used) models.push_back({{"view_set", slicetopo::to_string(set)}, {"n_slices", n}});
  j["models_used"] = models;
  j["error"] = r.error.empty() ? ordered_json(nullptr) : ordered_json(r.error);
  return j;
}

ordered_json to_json(const slicetopo::EvaluationReport& rep) {
  ordered_json j;
  j["schema"] = kEvaluationSchema;
  j["folds"] = rep.folds;
  j["seed"] = rep.seed;
  ordered_json seqs = ordered_json::array();
  for (const auto& s : rep.sequences)
    seqs.push_back({{"name", s.name},
                    {"objects", s.objects},
                    {"instances", s.instances},
                    {"fold_accuracy", s.fold_accuracy},
                    {"mean", s.mean},
                    {"std", s.std}});
  j["sequences"] = seqs;
  return j;
}

struct GenDataArgs {
  std::string out;
  std::string suite = "mixed";
  std::uint64_t seed = 1;
  int views_per_class = 24;
  int scenes = 8;
  double distance = 2.0;
};

struct TrainArgs {
  std::string data;
  std::string out;
  double sigma1 = 0.1;
  double sigma2 = 0.025;
  double alpha_deg = 45.0;
  int pi_grid = 16;
  double pi_bandwidth = 0.0;
  int iterations = 300;
  std::vector<double> truncation_keep{0.6, 0.7, 0.8};
};

struct RecognizeArgs {
  std::string lib;
  std::string scene;
  std::string out = "-";
  double tau_ratio = 1.15;
  double tau_d = 0.01;
};

struct EvaluateArgs {
  std::string lib;
  std::string data;
  int folds = 5;
  std::uint64_t seed = 1;
  std::string report;
  double tau_ratio = 1.15;
  double tau_d = 0.01;
};

struct OracleArgs {
  int n_trials = 1000;
  int max_points = 12;
  std::uint64_t seed = 1;
};

struct PlotArgs {
  std::string descriptor;
  std::string diagram;
  std::string out;
  int pi_grid = 16;
};

struct DescribeArgs {
  std::string cloud;
  std::string lib;
  std::string out;
  std::string diagrams;
};

int run_gen_data(const GenDataArgs& a) {
  slicetopo::DatasetParams p;
  p.suite = a.suite;
  p.seed = a.seed;
  p.views_per_class = a.views_per_class;
  p.scenes_per_sequence = a.scenes;
  p.distance = a.distance;
  const slicetopo::Dataset d = slicetopo::generate_dataset(p);
  slicetopo::save_dataset(d, a.out);
  std::cout << "training views " << d.train.size() << "\n";
  for (const auto& s : d.sequences) std::cout << "sequence " << s.name << " scenes " << s.scenes.size() << "\n";
  return kExitOk;
}

int run_train(const TrainArgs& a) {
  slicetopo::TrainParams p;
  p.slice = slicetopo::SliceParams::with_defaults(a.sigma1, a.sigma2);
  p.alpha = a.alpha_deg * std::numbers::pi / 180.0;
  p.pi_grid = a.pi_grid;
  p.pi_bandwidth = a.pi_bandwidth;
  p.softmax.iterations = a.iterations;
  p.truncation_keep = a.truncation_keep;
  const auto views = slicetopo::load_training_views(a.data);
  const slicetopo::ModelLibrary lib = slicetopo::train_library(views, p);
  slicetopo::save_library(lib, a.out);
  std::cout << "N_max " << lib.n_max << "\n";
  std::cout << "classes " << lib.class_labels.size() << "\n";
  for (const auto& [set, count] : lib.sample_counts) std::cout << "samples " << slicetopo::to_string(set) << " " << count << "\n";
  return kExitOk;
}

int run_recognize(const RecognizeArgs& a) {
  const slicetopo::ModelLibrary lib = slicetopo::load_library(a.lib);
  const slicetopo::DepthScene scene = slicetopo::load_scene(a.scene);
  slicetopo::RecognizeParams p;
  p.tau_ratio = a.tau_ratio;
  p.tau_d = a.tau_d;
  ordered_json j;
  j["schema"] = kRecognitionSchema;
  j["results"] = ordered_json::array();
  for (const auto& r : slicetopo::recognize_scene(scene, lib, p)) j["results"].push_back(to_json(r));
  write_text(a.out, j.dump(2) + "\n");
  return kExitOk;
}

int run_evaluate(const EvaluateArgs& a) {
  const slicetopo::ModelLibrary lib = slicetopo::load_library(a.lib);
  const auto sequences = slicetopo::load_sequences(a.data);
  slicetopo::RecognizeParams p;
  p.tau_ratio = a.tau_ratio;
  p.tau_d = a.tau_d;
  const auto report = slicetopo::evaluate_sequences(lib, sequences, a.folds, a.seed, p);
  const std::string text = report.to_text();
  slicetopo::detail::write_file(a.report, text);
  slicetopo::detail::write_file(a.report + ".json", to_json(report).dump(2) + "\n");
  std::cout << text;
  return kExitOk;
}

int run_oracle(const OracleArgs& a) {
  const auto failure = slicetopo::verify::run_oracle<OracleTieRule>(a.n_trials, a.max_points, a.seed);
  if (!failure) {
    std::cout << "oracle: " << a.n_trials << " trials, no mismatch\n";
    return kExitOk;
  }
  std::cout << "oracle: mismatch at trial " << failure->trial << "\n"
            << failure->detail << "replay: --seed " << failure->seed << " --n-trials 1 --max-points " << a.max_points
            << "\n";
  return kExitVerify;
}

int run_plot(const PlotArgs& a) {
  if (!a.diagram.empty()) {
    const auto pd = slicetopo::parse_diagram(slicetopo::detail::read_file(a.diagram));
    slicetopo::plot::write_png(slicetopo::plot::plot_diagram(pd).first, a.out);
  } else {
    const auto values = slicetopo::parse_descriptor_values(slicetopo::detail::read_file(a.descriptor));
    slicetopo::plot::write_png(slicetopo::plot::plot_descriptor(values, a.pi_grid, a.pi_grid), a.out);
  }
  return kExitOk;
}

// Descriptor of a single camera-frame cloud, with the library's parameters
// when given and otherwise with defaults and ranges fitted to the cloud.
int run_describe(const DescribeArgs& a) {
  const slicetopo::PointCloud cloud = slicetopo::load_cloud(a.cloud);
  slicetopo::SliceParams sp = slicetopo::SliceParams::with_defaults(0.1, 0.025);
  double alpha = slicetopo::kDefaultAlpha;
  std::optional<slicetopo::PiParams> pi;
  int padded = 0;
  if (!a.lib.empty()) {
    const auto lib = slicetopo::load_library(a.lib);
    sp = lib.slice_params;
    alpha = lib.alpha;
    pi = lib.pi_params;
    padded = lib.n_max;
  }
  const auto aligned = slicetopo::normalize(cloud, alpha);
  const auto sd = slicetopo::compute_slice_diagrams(aligned, sp);
  if (!pi) {
    double b = 0.0, q = 0.0;
    for (const auto& pd : sd.diagrams)
      for (const auto& pt : pd.points) {
        b = std::max(b, pt.birth);
        q = std::max(q, pt.persistence());
      }
    pi = slicetopo::PiParams::with_ranges(b > 0.0 ? b : 1.0, q > 0.0 ? q : 1.0);
  }
  padded = std::max(padded, sd.n_slices());
  const auto desc = slicetopo::describe_prefix(sd, sd.n_slices(), padded, *pi);
  write_text(a.out, slicetopo::format_descriptor(desc));
  if (!a.diagrams.empty()) {
    fs::create_directories(a.diagrams);
    for (int k = 0; k < sd.n_slices(); ++k)
      slicetopo::detail::write_file(fs::path(a.diagrams) / slicetopo::detail::numbered("slice", static_cast<std::size_t>(k), 2, ".diagram"),
                                    slicetopo::format_diagram(sd.diagrams[static_cast<std::size_t>(k)]));
  }
  std::cerr << "slices " << sd.n_slices() << " occupied " << sd.n_occupied() << " padded " << padded << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Slice-wise topological descriptors for point-cloud object recognition"};
  app.set_config("--config", "", "key = value file overriding flags (sections per subcommand)");
  app.require_subcommand(1);

  GenDataArgs gen;
  auto* c_gen = app.add_subcommand("gen-data", "Render training views and clutter sequences");
  c_gen->add_option("--out", gen.out, "Output directory")->required();
  c_gen->add_option("--suite", gen.suite, "Object suite")->check(CLI::IsMember({"curved", "cuboidal", "mixed"}))
      ->capture_default_str();
  c_gen->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  c_gen->add_option("--views-per-class", gen.views_per_class, "Training views per class")->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_gen->add_option("--scenes", gen.scenes, "Scenes per sequence")->check(CLI::PositiveNumber)->capture_default_str();
  c_gen->add_option("--distance", gen.distance, "Camera distance (m)")->check(CLI::PositiveNumber)->capture_default_str();

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Train a model library from gen-data output");
  c_train->add_option("--data", train.data, "Dataset directory")->required();
  c_train->add_option("--out", train.out, "Library file")->required();
  c_train->add_option("--sigma1", train.sigma1, "Slab thickness")->check(CLI::PositiveNumber)->capture_default_str();
  c_train->add_option("--sigma2", train.sigma2, "Column width")->check(CLI::PositiveNumber)->capture_default_str();
  c_train->add_option("--alpha", train.alpha_deg, "Slicing angle (degrees)")->capture_default_str();
  c_train->add_option("--pi-grid", train.pi_grid, "Persistence image resolution")->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_train->add_option("--pi-bandwidth", train.pi_bandwidth, "Kernel bandwidth (0: persistence range / grid)")
      ->check(CLI::NonNegativeNumber)->capture_default_str();
  c_train->add_option("--iterations", train.iterations, "Classifier iterations")->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_train->add_option("--truncation-keep", train.truncation_keep, "Kept fractions for truncated training views")
      ->capture_default_str();

  RecognizeArgs rec;
  auto* c_rec = app.add_subcommand("recognize", "Recognize every instance of a depth scene");
  c_rec->add_option("--lib", rec.lib, "Library file")->required();
  c_rec->add_option("--scene", rec.scene, "Depth scene file")->required();
  c_rec->add_option("--out", rec.out, "JSON output ('-' for stdout)")->capture_default_str();
  c_rec->add_option("--tau-ratio", rec.tau_ratio, "Face-area ratio for model-set selection")->capture_default_str();
  c_rec->add_option("--tau-d", rec.tau_d, "Depth margin for occlusion detection (m)")->capture_default_str();

  EvaluateArgs ev;
  auto* c_ev = app.add_subcommand("evaluate", "Per-sequence cross-validated accuracy");
  c_ev->add_option("--lib", ev.lib, "Library file")->required();
  c_ev->add_option("--data", ev.data, "Dataset directory")->required();
  c_ev->add_option("--folds", ev.folds, "Folds")->check(CLI::PositiveNumber)->capture_default_str();
  c_ev->add_option("--seed", ev.seed, "Fold shuffle seed")->capture_default_str();
  c_ev->add_option("--report", ev.report, "Report file (text; JSON goes to FILE.json)")->required();
  c_ev->add_option("--tau-ratio", ev.tau_ratio, "Face-area ratio for model-set selection")->capture_default_str();
  c_ev->add_option("--tau-d", ev.tau_d, "Depth margin for occlusion detection (m)")->capture_default_str();

  OracleArgs orc;
  auto* c_orc = app.add_subcommand("oracle", "Compare union-find persistence with the brute-force oracle");
  c_orc->add_option("--n-trials", orc.n_trials, "Random slices")->check(CLI::NonNegativeNumber)->capture_default_str();
  c_orc->add_option("--max-points", orc.max_points, "Points per slice at most")->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_orc->add_option("--seed", orc.seed, "Seed of the first trial")->capture_default_str();

  PlotArgs plt;
  auto* c_plot = app.add_subcommand("plot", "Render a descriptor or a diagram as PNG");
  auto* o_desc = c_plot->add_option("--descriptor", plt.descriptor, "Descriptor file (one value per line)");
  auto* o_diag = c_plot->add_option("--diagram", plt.diagram, "Diagram file ('birth death' lines)");
  o_desc->excludes(o_diag);
  c_plot->add_option("--out", plt.out, "PNG file")->required();
  c_plot->add_option("--pi-grid", plt.pi_grid, "Persistence image resolution")->check(CLI::PositiveNumber)
      ->capture_default_str();

  DescribeArgs desc;
  auto* c_desc = app.add_subcommand("describe", "Descriptor and slice diagrams of one cloud");
  c_desc->add_option("--cloud", desc.cloud, "Camera-frame cloud file")->required();
  c_desc->add_option("--lib", desc.lib, "Library supplying slicing and image parameters");
  c_desc->add_option("--out", desc.out, "Descriptor output ('-' for stdout)")->required();
  c_desc->add_option("--diagrams", desc.diagrams, "Directory for per-slice diagrams");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  for (const auto* sub : app.get_subcommands())
    std::cerr << "# resolved config\n[" << sub->get_name() << "]\n" << sub->config_to_str(true, false);

  try {
    if (c_gen->parsed()) return run_gen_data(gen);
    if (c_train->parsed()) return run_train(train);
    if (c_rec->parsed()) return run_recognize(rec);
    if (c_ev->parsed()) return run_evaluate(ev);
    if (c_orc->parsed()) return run_oracle(orc);
    if (c_plot->parsed()) {
      if (plt.descriptor.empty() == plt.diagram.empty()) {
        std::cerr << "plot: exactly one of --descriptor and --diagram is required\n";
        return kExitUsage;
      }
      return run_plot(plt);
    }
    if (c_desc->parsed()) return run_describe(desc);
  } catch (const slicetopo::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: IoError: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
