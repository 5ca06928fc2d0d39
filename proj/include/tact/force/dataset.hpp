#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "tact/core/rng.hpp"
#include "tact/core/types.hpp"
#include "tact/deform/representation.hpp"
#include "tact/gelsim/session.hpp"

namespace tact::force {

// Per-component affine map to normalized wrench space.
struct WrenchNormalization {
  std::array<double, 6> mean{0, 0, 0, 0, 0, 0};
  std::array<double, 6> scale{1, 1, 1, 1, 1, 1};

  std::array<double, 6> normalize(const Wrench& w) const {
    const auto a = w.to_array();
    std::array<double, 6> out;
    for (int i = 0; i < 6; ++i) out[i] = (a[i] - mean[i]) / scale[i];
    return out;
  }

  Wrench denormalize(const std::array<double, 6>& n) const {
    std::array<double, 6> a;
    for (int i = 0; i < 6; ++i) a[i] = n[i] * scale[i] + mean[i];
    return Wrench::from_array(a);
  }

  // Per-component standardization, std floored at 1e-6.
  static WrenchNormalization fit(const std::vector<Wrench>& wrenches) {
    if (wrenches.empty()) throw EmptyDatasetError("cannot fit normalization on empty set");
    WrenchNormalization n;
    n.mean.fill(0.0);
    for (const Wrench& w : wrenches) {
      const auto a = w.to_array();
      for (int i = 0; i < 6; ++i) n.mean[i] += a[i];
    }
    for (int i = 0; i < 6; ++i) n.mean[i] /= wrenches.size();
    std::array<double, 6> var{};
    for (const Wrench& w : wrenches) {
      const auto a = w.to_array();
      for (int i = 0; i < 6; ++i) var[i] += (a[i] - n.mean[i]) * (a[i] - n.mean[i]);
    }
    for (int i = 0; i < 6; ++i)
      n.scale[i] = std::max(std::sqrt(var[i] / wrenches.size()), 1e-6);
    return n;
  }
};

// Fixed scales used while gating during collection (no statistics exist
// yet): forces against 0.5 N, torques against 0.002 N·m.
inline WrenchNormalization collection_gate_normalization() {
  WrenchNormalization n;
  n.scale = {0.5, 0.5, 0.5, 0.002, 0.002, 0.002};
  return n;
}

inline double normalized_distance(const Wrench& a, const Wrench& b,
                                  const WrenchNormalization& norm) {
  const auto na = norm.normalize(a);
  const auto nb = norm.normalize(b);
  double d2 = 0.0;
  for (int i = 0; i < 6; ++i) d2 += (na[i] - nb[i]) * (na[i] - nb[i]);
  return std::sqrt(d2);
}

// A wrench is significant iff it is at least epsilon away (normalized
// Euclidean) from everything saved in the same contact period; vacuously
// significant when nothing is saved yet.
inline bool gate_sample(const Wrench& current,
                        const std::vector<Wrench>& saved_in_period,
                        const WrenchNormalization& norm, double epsilon) {
  if (!(epsilon > 0.0)) throw ParameterError("gate epsilon must be positive");
  for (const Wrench& saved : saved_in_period)
    if (normalized_distance(current, saved, norm) < epsilon) return false;
  return true;
}

struct Sample {
  std::string triple_path;  // relative to the manifest directory
  Wrench wrench;
  std::string object_id;
  std::string session_id;
};

struct DatasetManifest {
  std::vector<Sample> samples;
  WrenchNormalization normalization;  // fitted on the training subset only
};

struct CollectOptions {
  double epsilon = 0.15;
  double contact_energy_threshold = 50.0;
  WrenchNormalization gate_norm = collection_gate_normalization();
  bool store_downsampled = true;  // save triples at the regressor input size
};

// Streams frames into gated samples. Contact periods are delimited by the
// contact detector's transitions; the significance gate applies within a
// period. Feed sessions through begin_session/consume, then finish().
class DatasetCollector {
 public:
  DatasetCollector(std::filesystem::path out_dir, GrayImage reference,
                   CollectOptions options = {})
      : out_dir_(std::move(out_dir)), reference_(std::move(reference)),
        opt_(options) {
    std::filesystem::create_directories(out_dir_ / "triples");
  }

  void begin_session(const std::string& session_id) {
    session_id_ = session_id;
    in_contact_ = false;
    saved_in_period_.clear();
  }

  void consume(const gelsim::Frame& frame) {
    deform::DeformationTriple triple =
        deform::compose_triple(reference_, frame.tactile);
    const bool contact =
        deform::detect_contact(triple.darker, opt_.contact_energy_threshold);
    if (!contact) {
      in_contact_ = false;
      saved_in_period_.clear();
      return;
    }
    if (!in_contact_) {
      in_contact_ = true;
      saved_in_period_.clear();
    }
    if (!gate_sample(frame.wrench, saved_in_period_, opt_.gate_norm, opt_.epsilon))
      return;
    saved_in_period_.push_back(frame.wrench);

    char name[64];
    std::snprintf(name, sizeof(name), "triples/sample_%06zu.json",
                  manifest_.samples.size());
    if (opt_.store_downsampled) triple = deform::downsample_to_input(triple);
    deform::save_triple(out_dir_ / name, triple);
    manifest_.samples.push_back(
        Sample{name, frame.wrench, frame.object_id, session_id_});
  }

  // Fits the provisional normalization over everything saved; a later split
  // refits it on the training side.
  DatasetManifest finish() {
    if (manifest_.samples.empty())
      throw EmptyDatasetError("no samples passed contact detection and gating");
    std::vector<Wrench> wrenches;
    wrenches.reserve(manifest_.samples.size());
    for (const Sample& s : manifest_.samples) wrenches.push_back(s.wrench);
    manifest_.normalization = WrenchNormalization::fit(wrenches);
    return manifest_;
  }

 private:
  std::filesystem::path out_dir_;
  GrayImage reference_;
  CollectOptions opt_;
  DatasetManifest manifest_;
  std::string session_id_ = "session-0";
  bool in_contact_ = false;
  std::vector<Wrench> saved_in_period_;
};

namespace detail {

inline DatasetManifest subset_by_indices(const DatasetManifest& manifest,
                                         const std::vector<std::size_t>& idx) {
  DatasetManifest out;
  out.samples.reserve(idx.size());
  for (std::size_t i : idx) out.samples.push_back(manifest.samples[i]);
  return out;
}

inline void stamp_train_normalization(DatasetManifest& train,
                                      DatasetManifest& test) {
  std::vector<Wrench> wrenches;
  wrenches.reserve(train.samples.size());
  for (const Sample& s : train.samples) wrenches.push_back(s.wrench);
  train.normalization = WrenchNormalization::fit(wrenches);
  test.normalization = train.normalization;  // test stats never leak in
}

}  // namespace detail

// Uniform random holdout without replacement; both halves keep the original
// manifest order. Deterministic per seed.
inline std::pair<DatasetManifest, DatasetManifest> split_standard(
    const DatasetManifest& manifest, std::size_t n_test, std::uint64_t seed) {
  const std::size_t n = manifest.samples.size();
  if (n_test == 0) throw ParameterError("n_test must be >= 1");
  if (n_test >= n) throw ParameterError("n_test must be smaller than the dataset");

  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed);
  shuffle(idx, rng);
  std::vector<std::size_t> test_idx(idx.begin(), idx.begin() + n_test);
  std::vector<std::size_t> train_idx(idx.begin() + n_test, idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  std::sort(train_idx.begin(), train_idx.end());

  auto train = detail::subset_by_indices(manifest, train_idx);
  auto test = detail::subset_by_indices(manifest, test_idx);
  detail::stamp_train_normalization(train, test);
  return {std::move(train), std::move(test)};
}

// Whole objects held out: every sample of a test object lands in the test
// manifest, so the splits share no object ids.
inline std::pair<DatasetManifest, DatasetManifest> split_by_object(
    const DatasetManifest& manifest, const std::set<std::string>& test_ids) {
  if (test_ids.empty()) throw ParameterError("test object id set is empty");
  std::set<std::string> present;
  for (const Sample& s : manifest.samples) present.insert(s.object_id);
  for (const std::string& id : test_ids)
    if (!present.count(id))
      throw ParameterError("unknown test object id: " + id);

  DatasetManifest train, test;
  for (const Sample& s : manifest.samples)
    (test_ids.count(s.object_id) ? test : train).samples.push_back(s);
  if (train.samples.empty())
    throw ParameterError("object split leaves the training set empty");
  detail::stamp_train_normalization(train, test);
  return {std::move(train), std::move(test)};
}

// JSONL: a normalization record first, then one record per sample.
inline void save_manifest(const std::filesystem::path& path,
                          const DatasetManifest& manifest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write manifest: " + path.string());
  nlohmann::json head{{"normalization",
                       {{"mean", manifest.normalization.mean},
                        {"scale", manifest.normalization.scale}}}};
  out << head.dump() << "\n";
  for (const Sample& s : manifest.samples) {
    nlohmann::json rec{{"triple", s.triple_path},
                       {"wrench", s.wrench.to_array()},
                       {"object_id", s.object_id},
                       {"session_id", s.session_id}};
    out << rec.dump() << "\n";
  }
}

inline DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read manifest: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty manifest: " + path.string());
  nlohmann::json head = nlohmann::json::parse(line);
  DatasetManifest manifest;
  manifest.normalization.mean =
      head.at("normalization").at("mean").get<std::array<double, 6>>();
  manifest.normalization.scale =
      head.at("normalization").at("scale").get<std::array<double, 6>>();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json rec = nlohmann::json::parse(line);
    Sample s;
    s.triple_path = rec.at("triple").get<std::string>();
    s.wrench = Wrench::from_array(rec.at("wrench").get<std::array<double, 6>>());
    s.object_id = rec.at("object_id").get<std::string>();
    s.session_id = rec.at("session_id").get<std::string>();
    manifest.samples.push_back(std::move(s));
  }
  if (manifest.samples.empty()) throw EmptyDatasetError("manifest has no samples");
  return manifest;
}

}  // namespace tact::force
