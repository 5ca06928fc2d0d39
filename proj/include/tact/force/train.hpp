#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "tact/force/dataset.hpp"
#include "tact/force/regressor.hpp"

namespace tact::force {

struct TrainConfig {
  int batch_size = 64;
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int epochs = 30;
  std::uint64_t seed = 0;

  void validate() const {
    if (batch_size < 1) throw ParameterError("batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw ParameterError("learning_rate must be > 0");
    if (epochs < 1) throw ParameterError("epochs must be >= 1");
  }
};

// A manifest pulled into memory: input tensors plus normalized targets.
struct LoadedSample {
  Tensor input;
  std::array<double, 6> target;  // normalized
  Wrench wrench;                 // physical units
};

struct LoadedDataset {
  std::vector<LoadedSample> samples;
  WrenchNormalization norm;
};

inline LoadedDataset load_dataset(const DatasetManifest& manifest,
                                  const std::filesystem::path& base_dir) {
  LoadedDataset out;
  out.norm = manifest.normalization;
  out.samples.reserve(manifest.samples.size());
  for (const Sample& s : manifest.samples) {
    LoadedSample ls;
    ls.input = tensor_from_triple(deform::load_triple(base_dir / s.triple_path));
    ls.wrench = s.wrench;
    ls.target = out.norm.normalize(s.wrench);
    out.samples.push_back(std::move(ls));
  }
  return out;
}

struct LossCurvePoint {
  int epoch = 0;            // 1-based
  double train_loss = 0.0;  // summed-abs loss averaged per sample
  double holdout_mae = 0.0; // mean normalized MAE over the held-out set
};

struct TrainResult {
  RegressorParams params;  // from the epoch with lowest held-out MAE
  int selected_epoch = 0;
  std::vector<LossCurvePoint> curve;
};

// Mean over samples and components of |prediction - target| in normalized
// space; the epoch-selection criterion.
inline double mean_normalized_mae(const RegressorParams& params,
                                  const LoadedDataset& data) {
  if (data.samples.empty()) throw EmptyDatasetError("empty evaluation set");
  double acc = 0.0;
  for (const LoadedSample& s : data.samples) {
    const auto pred = forward(params, s.input);
    for (int j = 0; j < 6; ++j) acc += std::abs(pred[j] - s.target[j]);
  }
  return acc / (6.0 * data.samples.size());
}

// Adam over seeded shuffled batches; parameters are returned from the epoch
// with the best held-out score. Identical (data, config) reruns produce
// identical curves and parameters.
inline TrainResult train(const LoadedDataset& train_set,
                         const LoadedDataset& holdout_set,
                         const TrainConfig& config) {
  config.validate();
  if (train_set.samples.empty()) throw EmptyDatasetError("empty training set");

  RegressorParams params = init_params(NetSpec::standard(), config.seed);
  RegressorParams m = make_zero_params(params.spec);
  RegressorParams v = make_zero_params(params.spec);
  RegressorParams grad = make_zero_params(params.spec);

  Rng shuffle_rng(config.seed ^ 0xd1b54a32d192ed03ULL);
  std::vector<std::size_t> order(train_set.samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<std::vector<double>*> pa, ga, ma, va;
  for_each_array(params, [&](std::vector<double>& a) { pa.push_back(&a); });
  for_each_array(grad, [&](std::vector<double>& a) { ga.push_back(&a); });
  for_each_array(m, [&](std::vector<double>& a) { ma.push_back(&a); });
  for_each_array(v, [&](std::vector<double>& a) { va.push_back(&a); });

  TrainResult result;
  double best = std::numeric_limits<double>::infinity();
  long step = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle(order, shuffle_rng);
    double epoch_loss = 0.0;

    for (std::size_t start = 0; start < order.size();
         start += config.batch_size) {
      const std::size_t stop =
          std::min(order.size(), start + config.batch_size);
      Batch batch;
      for (std::size_t i = start; i < stop; ++i) {
        batch.inputs.push_back(&train_set.samples[order[i]].input);
        batch.targets.push_back(train_set.samples[order[i]].target);
      }

      double loss;
      try {
        loss = loss_and_gradient(params, batch, grad);
      } catch (const NumericError&) {
        throw TrainingError("training diverged", epoch);
      }
      epoch_loss += loss;

      ++step;
      const double bc1 = 1.0 - std::pow(config.beta1, step);
      const double bc2 = 1.0 - std::pow(config.beta2, step);
      for (std::size_t arr = 0; arr < pa.size(); ++arr) {
        std::vector<double>& p = *pa[arr];
        std::vector<double>& g = *ga[arr];
        std::vector<double>& mm = *ma[arr];
        std::vector<double>& vv = *va[arr];
        for (std::size_t i = 0; i < p.size(); ++i) {
          mm[i] = config.beta1 * mm[i] + (1.0 - config.beta1) * g[i];
          vv[i] = config.beta2 * vv[i] + (1.0 - config.beta2) * g[i] * g[i];
          const double mhat = mm[i] / bc1;
          const double vhat = vv[i] / bc2;
          p[i] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.adam_eps);
        }
      }
    }

    LossCurvePoint point;
    point.epoch = epoch;
    point.train_loss = epoch_loss / train_set.samples.size();
    try {
      point.holdout_mae = mean_normalized_mae(params, holdout_set);
    } catch (const NumericError&) {
      throw TrainingError("training diverged", epoch);
    }
    if (!std::isfinite(point.train_loss) || !std::isfinite(point.holdout_mae))
      throw TrainingError("training diverged", epoch);
    result.curve.push_back(point);

    if (point.holdout_mae < best) {
      best = point.holdout_mae;
      result.params = params;
      result.selected_epoch = epoch;
    }
  }
  return result;
}

struct EvalReport {
  std::array<double, 6> mae{};  // N, N, N, N·m, N·m, N·m
  std::array<double, 6> std{};
  int n = 0;
  int selected_epoch = 0;
};

// Per-component MAE and Std of absolute errors in physical units.
inline EvalReport evaluate(const RegressorParams& params,
                           const LoadedDataset& test,
                           const WrenchNormalization& norm,
                           int selected_epoch = 0) {
  if (test.samples.empty()) throw EmptyDatasetError("empty test set");
  const std::size_t n = test.samples.size();
  std::vector<std::array<double, 6>> abs_err(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Wrench pred = norm.denormalize(forward(params, test.samples[i].input));
    const auto pa = pred.to_array();
    const auto ta = test.samples[i].wrench.to_array();
    for (int j = 0; j < 6; ++j) abs_err[i][j] = std::abs(pa[j] - ta[j]);
  }
  EvalReport report;
  report.n = static_cast<int>(n);
  report.selected_epoch = selected_epoch;
  for (int j = 0; j < 6; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += abs_err[i][j];
    mean /= n;
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      var += (abs_err[i][j] - mean) * (abs_err[i][j] - mean);
    report.mae[j] = mean;
    report.std[j] = std::sqrt(var / n);
  }
  return report;
}

// The constant predictor that always answers the training mean.
inline EvalReport evaluate_baseline(const LoadedDataset& test,
                                    const WrenchNormalization& norm) {
  if (test.samples.empty()) throw EmptyDatasetError("empty test set");
  const std::size_t n = test.samples.size();
  EvalReport report;
  report.n = static_cast<int>(n);
  for (int j = 0; j < 6; ++j) {
    double mean = 0.0;
    for (const LoadedSample& s : test.samples)
      mean += std::abs(s.wrench.to_array()[j] - norm.mean[j]);
    mean /= n;
    double var = 0.0;
    for (const LoadedSample& s : test.samples) {
      const double e = std::abs(s.wrench.to_array()[j] - norm.mean[j]);
      var += (e - mean) * (e - mean);
    }
    report.mae[j] = mean;
    report.std[j] = std::sqrt(var / n);
  }
  return report;
}

inline void save_eval_report(const std::filesystem::path& path,
                             const EvalReport& report) {
  nlohmann::json j{{"mae", report.mae},
                   {"std", report.std},
                   {"n", report.n},
                   {"selected_epoch", report.selected_epoch}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write eval report: " + path.string());
  out << j.dump(2) << "\n";
}

inline void save_loss_curve(const std::filesystem::path& path,
                            const std::vector<LossCurvePoint>& curve) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write loss curve: " + path.string());
  out << "epoch,train_loss,holdout_mae\n";
  char line[96];
  for (const LossCurvePoint& p : curve) {
    std::snprintf(line, sizeof(line), "%d,%.9g,%.9g\n", p.epoch, p.train_loss,
                  p.holdout_mae);
    out << line;
  }
}

// Single-file parameter container: one JSON header line (architecture, seed,
// normalization, element count), then the raw little-endian float32 blob.
inline void save_params(const std::filesystem::path& path,
                        const RegressorParams& params, std::uint64_t seed,
                        const WrenchNormalization& norm,
                        int selected_epoch = 0) {
  nlohmann::json stages = nlohmann::json::array();
  for (const ConvStageSpec& s : params.spec.stages)
    stages.push_back({s.in_ch, s.out_ch, s.kernel, s.stride});
  nlohmann::json header{
      {"stages", stages},
      {"input", {params.spec.input_ch, params.spec.input_w, params.spec.input_h}},
      {"seed", seed},
      {"selected_epoch", selected_epoch},
      {"normalization", {{"mean", norm.mean}, {"scale", norm.scale}}},
      {"count", params.count()}};

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write params: " + path.string());
  out << header.dump() << "\n";
  std::vector<float> blob;
  blob.reserve(params.count());
  for_each_array(const_cast<RegressorParams&>(params),
                 [&](std::vector<double>& a) {
                   for (double v : a) blob.push_back(static_cast<float>(v));
                 });
  out.write(reinterpret_cast<const char*>(blob.data()),
            static_cast<std::streamsize>(blob.size() * sizeof(float)));
  if (!out) throw IoError("write failed: " + path.string());
}

struct SavedParams {
  RegressorParams params;
  std::uint64_t seed = 0;
  int selected_epoch = 0;
  WrenchNormalization norm;
};

inline SavedParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read params: " + path.string());
  std::string header_line;
  if (!std::getline(in, header_line)) throw IoError("missing params header");
  nlohmann::json header = nlohmann::json::parse(header_line);

  NetSpec spec;
  const auto input = header.at("input");
  spec.input_ch = input.at(0).get<int>();
  spec.input_w = input.at(1).get<int>();
  spec.input_h = input.at(2).get<int>();
  for (const auto& s : header.at("stages"))
    spec.stages.push_back(ConvStageSpec{s.at(0).get<int>(), s.at(1).get<int>(),
                                        s.at(2).get<int>(), s.at(3).get<int>()});

  SavedParams result;
  result.params = make_zero_params(spec);
  result.seed = header.at("seed").get<std::uint64_t>();
  result.selected_epoch = header.value("selected_epoch", 0);
  result.norm.mean =
      header.at("normalization").at("mean").get<std::array<double, 6>>();
  result.norm.scale =
      header.at("normalization").at("scale").get<std::array<double, 6>>();

  const std::size_t count = header.at("count").get<std::size_t>();
  if (count != result.params.count())
    throw IoError("params blob count mismatch: " + path.string());
  std::vector<float> blob(count);
  in.read(reinterpret_cast<char*>(blob.data()),
          static_cast<std::streamsize>(count * sizeof(float)));
  if (!in) throw IoError("truncated params blob: " + path.string());
  std::size_t k = 0;
  for_each_array(result.params, [&](std::vector<double>& a) {
    for (double& v : a) v = blob[k++];
  });
  return result;
}

}  // namespace tact::force
