#pragma once

#include <map>
#include <string>

#include "edgegeo/geometry.hpp"
#include "edgegeo/image.hpp"

namespace edgegeo {

/// Multi-octave value-noise texture on plane-local coordinates.
struct PlaneTexture {
  std::uint32_t seed = 1;
  int octaves = 5;
  double frequency = 0.4;  // cycles per meter at the base octave
  double contrast = 0.9;   // intensity swing around 0.5
};

/// Rectangular (possibly unbounded) textured patch of a 3D plane.
/// u_axis and v_axis must be orthonormal; the geometric normal is their
/// cross product (the renderer flips it camera-facing per view).
struct Plane {
  Vec3 origin = Vec3::Zero();
  Vec3 u_axis = Vec3::UnitX();
  Vec3 v_axis = Vec3::UnitY();
  double u_min = -1e30, u_max = 1e30;
  double v_min = -1e30, v_max = 1e30;
  PlaneTexture texture;

  Vec3 normal() const { return u_axis.cross(v_axis); }
  void validate() const;
};

struct PlanarScene {
  std::string name;
  int width = 64;
  int height = 48;
  Intrinsics K;
  std::vector<Plane> planes;
  std::vector<Vec6> trajectory;  // camera-to-world twists

  void validate() const;
};

struct RenderedView {
  ImageF image;  // 3 channels
  DepthMap depth_gt;
  NormalMap normal_gt;
  BinaryMap edge_gt;
  Vec6 pose;  // camera-to-world
};

/// Ray-cast one view: nearest positive ray-plane hit per pixel, analytic
/// depth, plane normal rotated camera-facing, procedural texture. Throws if
/// any pixel ray misses every plane (scene coverage invariant).
RenderedView render(const PlanarScene& scene, int view_index);

/// Transform taking target-camera points into the source camera.
PoseSE3 relative_pose(const PlanarScene& scene, int target_index, int source_index);

/// Named catalog: "plane", "corridor", "box-street".
std::map<std::string, PlanarScene> standard_scenes();

/// Deterministic hash-based value noise in [0, 1]; exposed for tests.
double value_noise(double u, double v, std::uint32_t seed, int octaves, double frequency);

/// Same, band-limited: octaves whose wavelength falls below twice the given
/// sampling footprint fade out smoothly, so surfaces seen at grazing angles
/// receive a texture the pixel grid can actually resolve.
double value_noise_filtered(double u, double v, std::uint32_t seed, int octaves, double frequency,
                            double footprint);

/// On-disk bundle: manifest.json plus per-view PPM / PFM / PGM files.
struct SceneBundle {
  int width = 0;
  int height = 0;
  Intrinsics K;
  std::vector<RenderedView> views;
};

void write_bundle(const std::string& outdir, const PlanarScene& scene,
                  const std::vector<RenderedView>& views);
SceneBundle read_bundle(const std::string& dir);

PlanarScene scene_from_json_file(const std::string& path);
void scene_to_json_file(const PlanarScene& scene, const std::string& path);

}  // namespace edgegeo
