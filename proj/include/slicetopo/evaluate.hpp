// SPDX-License-Identifier: Apache-2.0
//
// Evaluation protocols: per-sequence accuracy of a trained library on
// cluttered scenes, and suite-level cross-validation on rendered views with
// and without an occluder.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "slicetopo/dataset.hpp"
#include "slicetopo/recognition.hpp"

namespace slicetopo {

struct InstanceOutcome {
  std::uint32_t instance_id = 0;
  std::string truth;
  RecognitionResult result;
  bool correct = false;
};

/// Recognizes every labelled instance of a rendered spec and grades it
/// against the scene's ground-truth labels.
inline std::vector<InstanceOutcome> grade_scene(const SceneSpec& spec, const ModelLibrary& lib,
                                                const RecognizeParams& params = {}) {
  const DepthScene scene = render_depth(spec);
  std::vector<InstanceOutcome> out;
  for (const auto& r : recognize_scene(scene, lib, params)) {
    InstanceOutcome o;
    o.instance_id = r.instance_id;
    for (const auto& obj : spec.objects)
      if (obj.id == r.instance_id) o.truth = obj.label;
    o.result = r;
    o.correct = !r.label.empty() && r.label == o.truth;
    out.push_back(std::move(o));
  }
  return out;
}

struct SequenceScore {
  std::string name;
  int objects = 0;
  std::size_t instances = 0;
  std::vector<double> fold_accuracy;  // percent
  double mean = 0.0;
  double std = 0.0;  // population std over folds
};

struct EvaluationReport {
  int folds = 0;
  std::uint64_t seed = 0;
  std::vector<SequenceScore> sequences;

  std::string to_text() const {
    std::string out = "sequence objects instances mean std\n";
    for (const auto& s : sequences)
      out += s.name + " " + std::to_string(s.objects) + " " + std::to_string(s.instances) + " " +
             detail::format_real(s.mean) + " " + detail::format_real(s.std) + "\n";
    return out;
  }
};

/// Scenes of each sequence are dealt into `folds` groups after a seeded
/// shuffle; a fold's accuracy is the share of its instances recognized.
inline EvaluationReport evaluate_sequences(const ModelLibrary& lib, const std::vector<Sequence>& sequences, int folds,
                                           std::uint64_t seed, const RecognizeParams& params = {}) {
  if (folds < 1) throw Error(ErrorCode::kInvalidParams, "need at least one fold");
  if (sequences.empty()) throw Error(ErrorCode::kInsufficientData, "no sequences to evaluate");
  EvaluationReport report;
  report.folds = folds;
  report.seed = seed;
  rng::Engine e(seed);
  for (const auto& seq : sequences) {
    if (static_cast<int>(seq.scenes.size()) < folds)
      throw Error(ErrorCode::kInsufficientData,
                  "sequence " + seq.name + " has " + std::to_string(seq.scenes.size()) + " scenes for " +
                      std::to_string(folds) + " folds");
    std::vector<std::size_t> order(seq.scenes.size());
    std::iota(order.begin(), order.end(), 0);
    rng::shuffle(order.begin(), order.end(), e);
    std::vector<std::size_t> hits(static_cast<std::size_t>(folds), 0), total(static_cast<std::size_t>(folds), 0);
    SequenceScore score{seq.name, seq.objects, 0, {}, 0.0, 0.0};
    for (std::size_t i = 0; i < order.size(); ++i) {
      const std::size_t f = i % static_cast<std::size_t>(folds);
      for (const auto& o : grade_scene(seq.scenes[order[i]], lib, params)) {
        ++total[f];
        hits[f] += o.correct;
        ++score.instances;
      }
    }
    for (int f = 0; f < folds; ++f) {
      const auto fi = static_cast<std::size_t>(f);
      score.fold_accuracy.push_back(total[fi] ? 100.0 * static_cast<double>(hits[fi]) / total[fi] : 0.0);
    }
    score.mean = std::accumulate(score.fold_accuracy.begin(), score.fold_accuracy.end(), 0.0) / folds;
    double var = 0.0;
    for (double a : score.fold_accuracy) var += (a - score.mean) * (a - score.mean);
    score.std = std::sqrt(var / folds);
    report.sequences.push_back(std::move(score));
  }
  return report;
}

struct SuiteCvParams {
  std::string suite = "mixed";
  int views_per_class = 24;
  double distance = 2.0;
  int folds = 5;
  std::uint64_t seed = 1;
  double occlusion_fraction = 0.3;
  std::vector<double> occluder_dims{0.6, 1.2, 0.05};  // box curtain
  TrainParams train;
  RecognizeParams recognize;
  RenderSettings render;
};

struct SuiteCvResult {
  CrossValReport unoccluded;
  CrossValReport occluded;
  std::size_t occlusion_failures = 0;  // scenes where the fraction was unreachable (graded as misses)
};

/// Each rendered view is also re-rendered with a curtain occluder that
/// approaches along the major axis of the view's silhouette (random sign) and
/// hides `occlusion_fraction` of it. Both conditions share the folds and the
/// per-fold library.
inline SuiteCvResult crossval_suite(const SuiteCvParams& params) {
  const auto classes = suite_classes(params.suite);
  rng::Engine e(params.seed);
  std::vector<TrainingView> views;
  std::vector<std::optional<DepthScene>> occluded;
  std::vector<std::string> names;
  for (const auto& c : classes) names.push_back(c.label);
  std::sort(names.begin(), names.end());
  std::vector<int> labels;
  SuiteCvResult res;
  for (const auto& c : classes)
    for (int i = 0; i < params.views_per_class; ++i) {
      const Eigen::Vector3d dir = random_direction(e);
      views.push_back(render_view(c.kind, c.dims, c.label, dir, params.distance, params.render));
      labels.push_back(static_cast<int>(std::lower_bound(names.begin(), names.end(), c.label) - names.begin()));
      OcclusionRequest req;
      req.target = {1, c.label, c.kind, c.dims, {}};
      req.occluder = {2, "occluder", MeshKind::kBox, params.occluder_dims, {}};
      req.camera = look_at(params.distance * dir, Eigen::Vector3d::Zero());
      req.render = params.render;
      req.fraction = params.occlusion_fraction;
      req.seed = e();
      SceneSpec alone;
      alone.camera = req.camera;
      alone.intrinsics = params.render.intrinsics;
      alone.rows = params.render.rows;
      alone.cols = params.render.cols;
      alone.objects.push_back(req.target);
      Eigen::Vector2d axis = silhouette_axis(render_depth(alone), 1);
      if (rng::unit(e) < 0.5) axis = -axis;
      req.direction = axis;
      try {
        occluded.push_back(render_depth(gen_occluded_scene(req).spec));
      } catch (const Error& err) {
        if (err.code() != ErrorCode::kUnreachableFraction) throw;
        occluded.push_back(std::nullopt);
        ++res.occlusion_failures;
      }
    }
  auto reports = crossval_conditions(labels, names, params.folds, params.seed, 2, [&](const auto& train, const auto& test) {
    std::vector<TrainingView> tv;
    for (auto i : train) tv.push_back(views[i]);
    const ModelLibrary lib = train_library(tv, params.train);
    std::vector<std::vector<int>> out(2);
    for (auto i : test) {
      Observation obs;
      obs.cloud = views[i].cloud;
      obs.instance_id = 1;
      out[0].push_back(static_cast<int>(recognize(obs, lib, params.recognize).label_index));
      int guess = -1;
      if (occluded[i]) {
        try {
          guess = static_cast<int>(
              recognize(make_observation(*occluded[i], 1, lib.alpha, params.recognize), lib, params.recognize)
                  .label_index);
        } catch (const Error&) {
          // unrecognizable: graded as a miss
        }
      }
      out[1].push_back(guess);
    }
    return out;
  });
  res.unoccluded = std::move(reports[0]);
  res.occluded = std::move(reports[1]);
  return res;
}

}  // namespace slicetopo
