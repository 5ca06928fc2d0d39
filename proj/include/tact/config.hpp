#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "tact/core/errors.hpp"
#include "tact/force/train.hpp"
#include "tact/gelsim/gel.hpp"
#include "tact/recon/reconstruct.hpp"

namespace tact {

// Everything a pipeline run needs, read from one INI-style document.
// Units: lengths mm, forces N, torques N·m, intensities in [0, 1].
struct RunConfig {
  std::uint64_t seed = 0;  // mandatory in the file

  // [sensor]
  int raw_width = gelsim::kRawWidth;
  int raw_height = gelsim::kRawHeight;
  int out_width = gelsim::kCropWidth;
  int out_height = gelsim::kCropHeight;
  double mm_per_pixel = gelsim::kDefaultMmPerPixel;

  // [gel] + [optics]
  gelsim::GelSpec gel;
  double reference_base = 0.75;
  double reference_amplitude = 0.05;
  bool noise_enabled = false;
  double noise_std = 0.005;

  // [calibration]
  double ball_radius_mm = 4.0;
  double eval_ball_radius_mm = 2.5;
  double press_depth_mm = 1.0;
  double bin_width = 1.0 / 255.0;
  int board_rows = 5;
  int board_cols = 5;
  double board_spacing_mm = 2.0;
  double board_cylinder_radius_mm = 0.6;
  double board_press_depth_mm = 0.4;
  double distortion_k1 = 0.08;
  double distortion_k2 = 0.0;
  double marker_threshold = 0.05;
  int marker_min_area = 10;

  // [recon]
  recon::ReconParams recon;

  // [collection]
  double gate_epsilon = 0.15;
  double contact_threshold = 50.0;
  int n_objects = 20;
  int trajectories_per_object = 8;
  int steps_press = 4;
  int steps_move = 6;
  double max_press_depth = 1.6;

  // [training]
  force::TrainConfig training;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace detail

inline RunConfig parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line, section;
  bool seen_seed = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ParameterError("config line " + std::to_string(lineno) +
                             ": malformed section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParameterError("config line " + std::to_string(lineno) +
                           ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    kv[section.empty() ? key : section + "." + key] = value;
    if (section.empty() && key == "seed") seen_seed = true;
  }
  if (!seen_seed) throw ParameterError("config is missing the mandatory seed");

  RunConfig cfg;
  auto take = [&](const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) return std::string();
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  auto get_d = [&](const std::string& key, double& out) {
    const std::string v = take(key);
    if (!v.empty()) out = std::stod(v);
  };
  auto get_i = [&](const std::string& key, int& out) {
    const std::string v = take(key);
    if (!v.empty()) out = std::stoi(v);
  };
  auto get_b = [&](const std::string& key, bool& out) {
    const std::string v = take(key);
    if (v.empty()) return;
    if (v == "true" || v == "1") out = true;
    else if (v == "false" || v == "0") out = false;
    else throw ParameterError("config key " + key + ": expected true/false");
  };

  cfg.seed = std::stoull(take("seed"));

  get_i("sensor.raw_width", cfg.raw_width);
  get_i("sensor.raw_height", cfg.raw_height);
  get_i("sensor.out_width", cfg.out_width);
  get_i("sensor.out_height", cfg.out_height);
  get_d("sensor.mm_per_pixel", cfg.mm_per_pixel);

  get_d("gel.h0", cfg.gel.h0);
  get_d("gel.k_n", cfg.gel.k_n);
  get_d("gel.k_s", cfg.gel.k_s);
  get_d("gel.flow_radius", cfg.gel.flow_radius);
  get_d("gel.flow_fraction", cfg.gel.flow_fraction);

  get_d("optics.i_drop_max", cfg.gel.optics.i_drop_max);
  get_d("optics.lambda_d", cfg.gel.optics.lambda_d);
  get_d("optics.i_rise_max", cfg.gel.optics.i_rise_max);
  get_d("optics.lambda_b", cfg.gel.optics.lambda_b);
  get_d("optics.reference_base", cfg.reference_base);
  get_d("optics.reference_amplitude", cfg.reference_amplitude);
  get_b("optics.noise_enabled", cfg.noise_enabled);
  get_d("optics.noise_std", cfg.noise_std);

  get_d("calibration.ball_radius_mm", cfg.ball_radius_mm);
  get_d("calibration.eval_ball_radius_mm", cfg.eval_ball_radius_mm);
  get_d("calibration.press_depth_mm", cfg.press_depth_mm);
  get_d("calibration.bin_width", cfg.bin_width);
  get_i("calibration.board_rows", cfg.board_rows);
  get_i("calibration.board_cols", cfg.board_cols);
  get_d("calibration.board_spacing_mm", cfg.board_spacing_mm);
  get_d("calibration.board_cylinder_radius_mm", cfg.board_cylinder_radius_mm);
  get_d("calibration.board_press_depth_mm", cfg.board_press_depth_mm);
  get_d("calibration.distortion_k1", cfg.distortion_k1);
  get_d("calibration.distortion_k2", cfg.distortion_k2);
  get_d("calibration.marker_threshold", cfg.marker_threshold);
  get_i("calibration.marker_min_area", cfg.marker_min_area);

  get_d("recon.sigma1", cfg.recon.sigma1);
  get_i("recon.radius1", cfg.recon.radius1);
  get_d("recon.sigma2", cfg.recon.sigma2);
  get_i("recon.radius2", cfg.recon.radius2);

  get_d("collection.epsilon", cfg.gate_epsilon);
  get_d("collection.contact_threshold", cfg.contact_threshold);
  get_i("collection.n_objects", cfg.n_objects);
  get_i("collection.trajectories_per_object", cfg.trajectories_per_object);
  get_i("collection.steps_press", cfg.steps_press);
  get_i("collection.steps_move", cfg.steps_move);
  get_d("collection.max_press_depth", cfg.max_press_depth);

  get_i("training.batch_size", cfg.training.batch_size);
  get_d("training.learning_rate", cfg.training.learning_rate);
  get_i("training.epochs", cfg.training.epochs);
  get_d("training.beta1", cfg.training.beta1);
  get_d("training.beta2", cfg.training.beta2);
  get_d("training.adam_eps", cfg.training.adam_eps);

  if (!kv.empty())
    throw ParameterError("unknown config key: " + kv.begin()->first);

  cfg.training.seed = cfg.seed;
  cfg.gel.validate();
  return cfg;
}

inline RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

inline std::string to_ini(const RunConfig& cfg) {
  std::ostringstream out;
  out.precision(17);
  out << "seed = " << cfg.seed << "\n\n";
  out << "[sensor]\n";
  out << "raw_width = " << cfg.raw_width << "\n";
  out << "raw_height = " << cfg.raw_height << "\n";
  out << "out_width = " << cfg.out_width << "\n";
  out << "out_height = " << cfg.out_height << "\n";
  out << "mm_per_pixel = " << cfg.mm_per_pixel << "\n\n";
  out << "[gel]\n";
  out << "h0 = " << cfg.gel.h0 << "  # mm\n";
  out << "k_n = " << cfg.gel.k_n << "  # N/mm^3\n";
  out << "k_s = " << cfg.gel.k_s << "  # N/mm^3\n";
  out << "flow_radius = " << cfg.gel.flow_radius << "  # mm\n";
  out << "flow_fraction = " << cfg.gel.flow_fraction << "\n\n";
  out << "[optics]\n";
  out << "i_drop_max = " << cfg.gel.optics.i_drop_max << "\n";
  out << "lambda_d = " << cfg.gel.optics.lambda_d << "  # mm\n";
  out << "i_rise_max = " << cfg.gel.optics.i_rise_max << "\n";
  out << "lambda_b = " << cfg.gel.optics.lambda_b << "  # mm\n";
  out << "reference_base = " << cfg.reference_base << "\n";
  out << "reference_amplitude = " << cfg.reference_amplitude << "\n";
  out << "noise_enabled = " << (cfg.noise_enabled ? "true" : "false") << "\n";
  out << "noise_std = " << cfg.noise_std << "\n\n";
  out << "[calibration]\n";
  out << "ball_radius_mm = " << cfg.ball_radius_mm << "\n";
  out << "eval_ball_radius_mm = " << cfg.eval_ball_radius_mm << "\n";
  out << "press_depth_mm = " << cfg.press_depth_mm << "\n";
  out << "bin_width = " << cfg.bin_width << "\n";
  out << "board_rows = " << cfg.board_rows << "\n";
  out << "board_cols = " << cfg.board_cols << "\n";
  out << "board_spacing_mm = " << cfg.board_spacing_mm << "\n";
  out << "board_cylinder_radius_mm = " << cfg.board_cylinder_radius_mm << "\n";
  out << "board_press_depth_mm = " << cfg.board_press_depth_mm << "\n";
  out << "distortion_k1 = " << cfg.distortion_k1 << "\n";
  out << "distortion_k2 = " << cfg.distortion_k2 << "\n";
  out << "marker_threshold = " << cfg.marker_threshold << "\n";
  out << "marker_min_area = " << cfg.marker_min_area << "\n\n";
  out << "[recon]\n";
  out << "sigma1 = " << cfg.recon.sigma1 << "  # px\n";
  out << "radius1 = " << cfg.recon.radius1 << "\n";
  out << "sigma2 = " << cfg.recon.sigma2 << "  # px\n";
  out << "radius2 = " << cfg.recon.radius2 << "\n\n";
  out << "[collection]\n";
  out << "epsilon = " << cfg.gate_epsilon << "\n";
  out << "contact_threshold = " << cfg.contact_threshold << "\n";
  out << "n_objects = " << cfg.n_objects << "\n";
  out << "trajectories_per_object = " << cfg.trajectories_per_object << "\n";
  out << "steps_press = " << cfg.steps_press << "\n";
  out << "steps_move = " << cfg.steps_move << "\n";
  out << "max_press_depth = " << cfg.max_press_depth << "  # mm\n\n";
  out << "[training]\n";
  out << "batch_size = " << cfg.training.batch_size << "\n";
  out << "learning_rate = " << cfg.training.learning_rate << "\n";
  out << "epochs = " << cfg.training.epochs
      << "  # desk scale; 200 for full-scale runs\n";
  out << "beta1 = " << cfg.training.beta1 << "\n";
  out << "beta2 = " << cfg.training.beta2 << "\n";
  out << "adam_eps = " << cfg.training.adam_eps << "\n";
  return out.str();
}

}  // namespace tact
