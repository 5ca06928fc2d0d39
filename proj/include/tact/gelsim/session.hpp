#pragma once

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tact/core/rng.hpp"
#include "tact/gelsim/flow.hpp"
#include "tact/gelsim/indent.hpp"
#include "tact/gelsim/render.hpp"
#include "tact/gelsim/wrench.hpp"
#include "tact/io/pgm.hpp"

namespace tact::gelsim {

struct Frame {
  GrayImage tactile;
  Wrench wrench;
  std::string object_id;
  ContactState contact;
};

struct Trajectory {
  int object_index = 0;
  std::vector<ContactState> steps;
};

struct NoiseSpec {
  bool enabled = false;
  double std_dev = 0.005;  // additive Gaussian, clamped to [0, 1]
};

// Runs every trajectory step through indent -> flow -> render and labels the
// frame with the elastic-foundation wrench of the same state. Frames are
// produced in schedule order; identical (inputs, seed) give bit-identical
// streams.
template <typename Sink>
  requires std::invocable<Sink&, Frame&&>
void simulate_session(const GelSpec& gel, const std::vector<HeightField>& objects,
                      const std::vector<Trajectory>& schedule,
                      const GrayImage& reference, const PixelScale& scale,
                      std::uint64_t seed, Sink&& sink,
                      const NoiseSpec& noise = {}) {
  gel.validate();
  Rng noise_rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const int w = reference.width();
  const int h = reference.height();

  for (const Trajectory& traj : schedule) {
    if (traj.object_index < 0 ||
        traj.object_index >= static_cast<int>(objects.size()))
      throw ParameterError("trajectory references unknown object");
    const HeightField& obj = objects[traj.object_index];

    for (const ContactState& contact : traj.steps) {
      const DepthMap pen = penetration_field(gel, obj, contact, scale, w, h);
      ThicknessField thickness(w, h, gel.h0);
      for (std::size_t i = 0; i < thickness.size(); ++i)
        thickness.data()[i] = gel.h0 - pen.data()[i];
      thickness = flow(thickness, gel, contact, scale);

      Frame frame;
      frame.tactile = render(thickness, reference, gel);
      if (noise.enabled) {
        for (double& v : frame.tactile.data())
          v = std::clamp(v + noise.std_dev * normal(noise_rng), 0.0, 1.0);
      }
      frame.wrench = synthesize_wrench(pen, gel, contact, scale);
      frame.object_id = obj.id;
      frame.contact = contact;
      sink(std::move(frame));
    }
  }
}

inline std::vector<Frame> simulate_session(
    const GelSpec& gel, const std::vector<HeightField>& objects,
    const std::vector<Trajectory>& schedule, const GrayImage& reference,
    const PixelScale& scale, std::uint64_t seed, const NoiseSpec& noise = {}) {
  std::vector<Frame> frames;
  simulate_session(gel, objects, schedule, reference, scale, seed,
                   [&](Frame&& f) { frames.push_back(std::move(f)); }, noise);
  return frames;
}

// One contact rendered in isolation (no noise).
inline Frame simulate_contact(const GelSpec& gel, const HeightField& obj,
                              const ContactState& contact,
                              const GrayImage& reference,
                              const PixelScale& scale) {
  std::vector<Frame> frames = simulate_session(
      gel, {obj}, {Trajectory{0, {contact}}}, reference, scale, 0);
  return std::move(frames.front());
}

// Press / drag / twist ramps with seeded centers and magnitudes. Trajectory
// modes rotate through press-only, press+drag, press+twist and all three so
// every wrench component varies across a session.
inline std::vector<Trajectory> make_random_schedule(
    Rng& rng, int n_objects, int per_object, int steps_press, int steps_move,
    int width, int height, double max_depth = 1.6) {
  std::vector<Trajectory> schedule;
  for (int obj = 0; obj < n_objects; ++obj) {
    for (int t = 0; t < per_object; ++t) {
      Trajectory traj;
      traj.object_index = obj;
      const double cx = uniform_range(rng, 0.38 * width, 0.62 * width);
      const double cy = uniform_range(rng, 0.38 * height, 0.62 * height);
      const double depth = uniform_range(rng, 0.4, max_depth);
      const int mode = t % 4;
      double drag_x = 0.0, drag_y = 0.0, twist = 0.0;
      if (mode == 1 || mode == 3) {
        const double mag = uniform_range(rng, 0.5, 2.0);
        const double ang = uniform_range(rng, 0.0, 2.0 * std::numbers::pi);
        drag_x = mag * std::cos(ang);
        drag_y = mag * std::sin(ang);
      }
      if (mode == 2 || mode == 3)
        twist = uniform_range(rng, 0.1, 0.5) * (uniform_unit(rng) < 0.5 ? -1 : 1);

      for (int s = 1; s <= steps_press; ++s) {
        ContactState c;
        c.press_depth = depth * s / steps_press;
        c.center_x = cx;
        c.center_y = cy;
        traj.steps.push_back(c);
      }
      for (int s = 1; s <= steps_move; ++s) {
        ContactState c;
        c.press_depth = depth;
        c.center_x = cx;
        c.center_y = cy;
        c.drag_x = drag_x * s / steps_move;
        c.drag_y = drag_y * s / steps_move;
        c.twist = twist * s / steps_move;
        traj.steps.push_back(c);
      }
      // lift off so the contact detector closes the period
      ContactState lift;
      lift.center_x = cx;
      lift.center_y = cy;
      traj.steps.push_back(lift);
      schedule.push_back(std::move(traj));
    }
  }
  return schedule;
}

// Writes reference.pgm, frames/NNNNNN.pgm and session.jsonl (one record per
// frame with relative paths, wrench and contact parameters).
inline void save_session(const std::filesystem::path& dir,
                         const std::vector<Frame>& frames,
                         const GrayImage& reference, std::uint64_t seed) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "frames");
  write_pgm(dir / "reference.pgm", reference);
  std::ofstream manifest(dir / "session.jsonl", std::ios::binary);
  if (!manifest) throw IoError("cannot write session manifest");

  char name[32];
  for (std::size_t i = 0; i < frames.size(); ++i) {
    std::snprintf(name, sizeof(name), "frames/%06zu.pgm", i);
    write_pgm(dir / name, frames[i].tactile);
    const Frame& f = frames[i];
    nlohmann::json rec{
        {"frame", name},
        {"reference", "reference.pgm"},
        {"object_id", f.object_id},
        {"wrench", f.wrench.to_array()},
        {"contact",
         {{"press_depth", f.contact.press_depth},
          {"drag", {f.contact.drag_x, f.contact.drag_y}},
          {"twist", f.contact.twist},
          {"center", {f.contact.center_x, f.contact.center_y}}}},
        {"seed", seed}};
    manifest << rec.dump() << "\n";
  }
}

}  // namespace tact::gelsim
