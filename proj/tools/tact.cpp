// Command-line front end: every pipeline stage as a composable subcommand.
// Exit codes: 0 success, 2 usage/config, 3 empty result, 4 calibration
// failure, 5 numeric failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tact/calib/depth_table.hpp"
#include "tact/calib/remap.hpp"
#include "tact/config.hpp"
#include "tact/core/blobs.hpp"
#include "tact/deform/representation.hpp"
#include "tact/force/dataset.hpp"
#include "tact/force/train.hpp"
#include "tact/gelsim/distortion.hpp"
#include "tact/gelsim/objects.hpp"
#include "tact/gelsim/session.hpp"
#include "tact/io/pfm.hpp"
#include "tact/io/pgm.hpp"
#include "tact/io/ply.hpp"
#include "tact/recon/reconstruct.hpp"

namespace fs = std::filesystem;
using namespace tact;

namespace {

RunConfig load_config(const std::string& path,
                      std::optional<std::uint64_t> seed_override) {
  RunConfig cfg = parse_config(path);
  if (seed_override) {
    cfg.seed = *seed_override;
    cfg.training.seed = *seed_override;
  }
  return cfg;
}

void add_frame_noise(GrayImage& img, double std_dev, Rng& rng) {
  for (double& v : img.data())
    v = std::clamp(v + std_dev * normal(rng), 0.0, 1.0);
}

int run_simulate_dataset(const std::string& config_path,
                         const std::string& out_dir,
                         std::optional<std::uint64_t> seed_override) {
  const RunConfig cfg = load_config(config_path, seed_override);
  const PixelScale scale(cfg.mm_per_pixel);

  // Dataset frames render directly at the cropped sensor size.
  const GrayImage reference =
      gelsim::make_reference(cfg.out_width, cfg.out_height, cfg.seed,
                             cfg.reference_base, cfg.reference_amplitude);
  const auto pool =
      gelsim::make_object_pool(cfg.n_objects, cfg.seed, cfg.mm_per_pixel);

  Rng schedule_rng(cfg.seed ^ 0xa5a5a5a5a5a5a5a5ULL);
  const auto schedule = gelsim::make_random_schedule(
      schedule_rng, cfg.n_objects, cfg.trajectories_per_object,
      cfg.steps_press, cfg.steps_move, cfg.out_width, cfg.out_height,
      cfg.max_press_depth);

  force::CollectOptions opt;
  opt.epsilon = cfg.gate_epsilon;
  opt.contact_energy_threshold = cfg.contact_threshold;
  force::DatasetCollector collector(out_dir, reference, opt);

  gelsim::NoiseSpec noise{cfg.noise_enabled, cfg.noise_std};
  char session_id[32];
  for (int obj = 0; obj < cfg.n_objects; ++obj) {
    std::vector<gelsim::Trajectory> chunk(
        schedule.begin() + static_cast<std::ptrdiff_t>(obj) *
                               cfg.trajectories_per_object,
        schedule.begin() + static_cast<std::ptrdiff_t>(obj + 1) *
                               cfg.trajectories_per_object);
    std::snprintf(session_id, sizeof(session_id), "session-%03d", obj);
    collector.begin_session(session_id);
    gelsim::simulate_session(
        cfg.gel, pool, chunk, reference, scale, cfg.seed + obj,
        [&](gelsim::Frame&& f) { collector.consume(f); }, noise);
  }

  const force::DatasetManifest manifest = collector.finish();
  write_pgm(fs::path(out_dir) / "reference.pgm", reference);
  force::save_manifest(fs::path(out_dir) / "manifest.jsonl", manifest);
  std::cout << "samples = " << manifest.samples.size() << "\n";
  return 0;
}

int run_simulate_calibration(const std::string& config_path,
                             const std::string& out_dir,
                             std::optional<std::uint64_t> seed_override) {
  const RunConfig cfg = load_config(config_path, seed_override);
  const PixelScale scale(cfg.mm_per_pixel);
  const double cx = (cfg.raw_width - 1) / 2.0;
  const double cy = (cfg.raw_height - 1) / 2.0;

  const GrayImage reference =
      gelsim::make_reference(cfg.raw_width, cfg.raw_height, cfg.seed,
                             cfg.reference_base, cfg.reference_amplitude);

  const auto board = gelsim::make_calibration_board(
      cfg.board_rows, cfg.board_cols, cfg.board_spacing_mm,
      cfg.board_cylinder_radius_mm, cfg.mm_per_pixel);
  gelsim::ContactState board_press;
  board_press.press_depth = cfg.board_press_depth_mm;
  board_press.center_x = cx;
  board_press.center_y = cy;
  const GrayImage board_img =
      gelsim::simulate_contact(cfg.gel, board, board_press, reference, scale)
          .tactile;

  gelsim::ObjectParams ball_params;
  ball_params.radius = cfg.ball_radius_mm;
  ball_params.mm_per_pixel = cfg.mm_per_pixel;
  const auto ball =
      gelsim::procedural_object(gelsim::ObjectKind::sphere, ball_params, cfg.seed);
  gelsim::ContactState ball_press;
  ball_press.press_depth = cfg.press_depth_mm;
  ball_press.center_x = cx;
  ball_press.center_y = cy;
  const GrayImage ball_img =
      gelsim::simulate_contact(cfg.gel, ball, ball_press, reference, scale)
          .tactile;

  GrayImage ref_d =
      gelsim::apply_distortion(reference, cfg.distortion_k1, cfg.distortion_k2, cx, cy);
  GrayImage board_d =
      gelsim::apply_distortion(board_img, cfg.distortion_k1, cfg.distortion_k2, cx, cy);
  GrayImage ball_d =
      gelsim::apply_distortion(ball_img, cfg.distortion_k1, cfg.distortion_k2, cx, cy);
  if (cfg.noise_enabled) {
    Rng rng(cfg.seed ^ 0x5bd1e995ULL);
    add_frame_noise(ref_d, cfg.noise_std, rng);
    add_frame_noise(board_d, cfg.noise_std, rng);
    add_frame_noise(ball_d, cfg.noise_std, rng);
  }

  fs::create_directories(out_dir);
  write_pgm(fs::path(out_dir) / "ref.pgm", ref_d);
  write_pgm(fs::path(out_dir) / "board.pgm", board_d);
  write_pgm(fs::path(out_dir) / "ball.pgm", ball_d);
  std::cout << "wrote ref.pgm board.pgm ball.pgm\n";
  return 0;
}

int run_calibrate(const std::string& config_path, const std::string& ref_path,
                  const std::string& board_path, const std::string& ball_path,
                  const std::string& out_dir) {
  const RunConfig cfg = load_config(config_path, std::nullopt);
  const GrayImage ref = read_pgm(ref_path);
  const GrayImage board = read_pgm(board_path);
  const GrayImage ball = read_pgm(ball_path);

  const DiffImage board_diff = recon::difference(ref, board);
  const auto blobs =
      detect_blobs(board_diff, cfg.marker_threshold, cfg.marker_min_area);
  std::vector<Point2> markers;
  markers.reserve(blobs.size());
  for (const Blob& b : blobs) markers.push_back({b.centroid_x, b.centroid_y});

  calib::GridSpec grid{cfg.board_rows, cfg.board_cols, cfg.board_spacing_mm};
  auto [remap, scale] = calib::build_remap(markers, grid, ref.width(),
                                           ref.height(), cfg.out_width,
                                           cfg.out_height);

  const GrayImage rect_ref = calib::rectify(ref, remap);
  const GrayImage rect_ball = calib::rectify(ball, remap);
  const auto table = calib::calibrate_depth(rect_ref, rect_ball,
                                            cfg.ball_radius_mm, scale,
                                            cfg.bin_width);

  fs::create_directories(out_dir);
  calib::save_remap(fs::path(out_dir) / "remap", remap, scale);
  calib::save_table(fs::path(out_dir) / "table.json", table);
  std::printf("mm_per_pixel = %.6f\n", scale.mm_per_pixel);
  return 0;
}

int run_reconstruct(const std::string& table_path, const std::string& ref_path,
                    const std::string& tactile_path, const std::string& out_dir,
                    const std::string& remap_dir,
                    const std::string& config_path) {
  recon::ReconParams params;
  double mm_per_pixel = gelsim::kDefaultMmPerPixel;
  if (!config_path.empty()) {
    const RunConfig cfg = parse_config(config_path);
    params = cfg.recon;
    mm_per_pixel = cfg.mm_per_pixel;
  }

  const auto table = calib::load_table(table_path);
  GrayImage ref = read_pgm(ref_path);
  GrayImage tactile = read_pgm(tactile_path);
  if (!remap_dir.empty()) {
    auto [remap, scale] = calib::load_remap(remap_dir);
    ref = calib::rectify(ref, remap);
    tactile = calib::rectify(tactile, remap);
    mm_per_pixel = scale.mm_per_pixel;
  }

  const DiffImage diff = recon::difference(ref, tactile);
  const DepthMap depth = recon::reconstruct(diff, table, params);
  const auto cloud = recon::to_pointcloud(depth, PixelScale(mm_per_pixel));

  fs::create_directories(out_dir);
  write_pfm(fs::path(out_dir) / "depth.pfm", depth);
  write_ply(fs::path(out_dir) / "cloud.ply", cloud.points);
  double max_depth = 0.0;
  for (double v : depth.data()) max_depth = std::max(max_depth, v);
  std::printf("max_depth_mm = %.4f\n", max_depth);
  return 0;
}

std::set<std::string> pick_test_objects(const force::DatasetManifest& manifest,
                                        int n_test_objects,
                                        std::uint64_t seed) {
  std::set<std::string> ids;
  for (const auto& s : manifest.samples) ids.insert(s.object_id);
  if (n_test_objects <= 0 || n_test_objects >= static_cast<int>(ids.size()))
    throw ParameterError("n-test-objects must be in [1, object count)");
  std::vector<std::string> sorted(ids.begin(), ids.end());
  Rng rng(seed ^ 0x0b5e5e5e5e5e5e5eULL);
  shuffle(sorted, rng);
  return std::set<std::string>(sorted.begin(), sorted.begin() + n_test_objects);
}

int run_train(const std::string& config_path, const std::string& manifest_path,
              const std::string& out_dir, const std::string& split,
              int n_test, const std::string& test_objects_csv,
              int n_test_objects, std::optional<std::uint64_t> seed_override) {
  const RunConfig cfg = load_config(config_path, seed_override);
  const force::DatasetManifest manifest = force::load_manifest(manifest_path);
  const fs::path base_dir = fs::path(manifest_path).parent_path();

  force::DatasetManifest train_m, test_m;
  if (split == "standard") {
    if (n_test <= 0) throw ParameterError("standard split requires --n-test");
    std::tie(train_m, test_m) =
        force::split_standard(manifest, static_cast<std::size_t>(n_test), cfg.seed);
  } else if (split == "object") {
    std::set<std::string> ids;
    if (!test_objects_csv.empty()) {
      std::istringstream ss(test_objects_csv);
      std::string id;
      while (std::getline(ss, id, ',')) ids.insert(id);
    } else {
      ids = pick_test_objects(manifest, n_test_objects, cfg.seed);
    }
    std::tie(train_m, test_m) = force::split_by_object(manifest, ids);
  } else {
    throw ParameterError("--split must be 'standard' or 'object'");
  }

  fs::create_directories(out_dir);
  // saved splits reference the triples relative to their own location
  auto rebase = [&](force::DatasetManifest m) {
    for (auto& s : m.samples)
      s.triple_path =
          fs::relative(base_dir / s.triple_path, out_dir).generic_string();
    return m;
  };
  force::save_manifest(fs::path(out_dir) / "train.jsonl", rebase(train_m));
  force::save_manifest(fs::path(out_dir) / "test.jsonl", rebase(test_m));

  const force::LoadedDataset train_set = force::load_dataset(train_m, base_dir);
  const force::LoadedDataset test_set = force::load_dataset(test_m, base_dir);

  const force::TrainResult result = force::train(train_set, test_set, cfg.training);
  force::save_params(fs::path(out_dir) / "params.bin", result.params,
                     cfg.training.seed, train_m.normalization,
                     result.selected_epoch);
  force::save_loss_curve(fs::path(out_dir) / "loss_curve.csv", result.curve);
  std::printf("selected_epoch = %d holdout_mae = %.6f\n", result.selected_epoch,
              result.curve.empty()
                  ? 0.0
                  : result.curve[result.selected_epoch - 1].holdout_mae);
  return 0;
}

int run_evaluate(const std::string& manifest_path,
                 const std::string& params_path, const std::string& out_path,
                 bool baseline) {
  const force::DatasetManifest manifest = force::load_manifest(manifest_path);
  const fs::path base_dir = fs::path(manifest_path).parent_path();
  const force::LoadedDataset test_set = force::load_dataset(manifest, base_dir);

  force::EvalReport report;
  if (baseline) {
    report = force::evaluate_baseline(test_set, manifest.normalization);
  } else {
    if (params_path.empty())
      throw ParameterError("evaluate requires --params (or --baseline)");
    const force::SavedParams saved = force::load_params(params_path);
    report = force::evaluate(saved.params, test_set, saved.norm,
                             saved.selected_epoch);
  }
  if (!out_path.empty()) force::save_eval_report(out_path, report);
  std::printf("mae = [%.4f, %.4f, %.4f, %.6f, %.6f, %.6f]\n", report.mae[0],
              report.mae[1], report.mae[2], report.mae[3], report.mae[4],
              report.mae[5]);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tactile sensing toolkit: gel simulation, calibration, depth "
               "reconstruction and wrench regression"};
  app.require_subcommand(1);

  std::string config_path, out_dir, ref_path, board_path, ball_path;
  std::string table_path, tactile_path, remap_dir;
  std::string manifest_path, params_path, split = "standard", test_objects;
  int n_test = 0, n_test_objects = 3;
  bool baseline = false;
  std::optional<std::uint64_t> seed;

  auto* sim = app.add_subcommand("simulate-dataset",
                                 "simulate sessions and collect gated samples");
  sim->add_option("--config", config_path)->required();
  sim->add_option("--out", out_dir)->required();
  sim->add_option("--seed", seed);

  auto* simcal = app.add_subcommand(
      "simulate-calibration", "render reference, board and ball-press images");
  simcal->add_option("--config", config_path)->required();
  simcal->add_option("--out", out_dir)->required();
  simcal->add_option("--seed", seed);

  auto* cal = app.add_subcommand("calibrate",
                                 "build the rectification remap and depth table");
  cal->add_option("--config", config_path)->required();
  cal->add_option("--ref", ref_path)->required();
  cal->add_option("--board", board_path)->required();
  cal->add_option("--ball", ball_path)->required();
  cal->add_option("--out", out_dir)->required();

  auto* rec = app.add_subcommand("reconstruct",
                                 "difference -> depth map -> point cloud");
  rec->add_option("--table", table_path)->required();
  rec->add_option("--ref", ref_path)->required();
  rec->add_option("--tactile", tactile_path)->required();
  rec->add_option("--out", out_dir)->required();
  rec->add_option("--remap", remap_dir);
  rec->add_option("--config", config_path);

  auto* tr = app.add_subcommand("train", "split a manifest and fit the regressor");
  tr->add_option("--config", config_path)->required();
  tr->add_option("--manifest", manifest_path)->required();
  tr->add_option("--out", out_dir)->required();
  tr->add_option("--split", split)->check(CLI::IsMember({"standard", "object"}));
  tr->add_option("--n-test", n_test);
  tr->add_option("--test-objects", test_objects);
  tr->add_option("--n-test-objects", n_test_objects);
  tr->add_option("--seed", seed);

  auto* ev = app.add_subcommand("evaluate", "per-component MAE/Std on a manifest");
  ev->add_option("--manifest", manifest_path)->required();
  ev->add_option("--params", params_path);
  ev->add_option("--out", out_dir);
  ev->add_flag("--baseline", baseline);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (sim->parsed()) return run_simulate_dataset(config_path, out_dir, seed);
    if (simcal->parsed())
      return run_simulate_calibration(config_path, out_dir, seed);
    if (cal->parsed())
      return run_calibrate(config_path, ref_path, board_path, ball_path, out_dir);
    if (rec->parsed())
      return run_reconstruct(table_path, ref_path, tactile_path, out_dir,
                             remap_dir, config_path);
    if (tr->parsed())
      return run_train(config_path, manifest_path, out_dir, split, n_test,
                       test_objects, n_test_objects, seed);
    if (ev->parsed())
      return run_evaluate(manifest_path, params_path, out_dir, baseline);
  } catch (const EmptyDatasetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const CalibrationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const GeometryError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DimensionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
