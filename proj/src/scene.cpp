#include "edgegeo/scene.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "edgegeo/image_io.hpp"

namespace edgegeo {

namespace {

std::uint32_t hash2(int x, int y, std::uint32_t seed) {
  std::uint32_t h = seed + 0x9E3779B9u;
  h ^= static_cast<std::uint32_t>(x) * 0x9E3779B1u;
  h = (h ^ (h >> 15)) * 0x85EBCA77u;
  h ^= static_cast<std::uint32_t>(y) * 0xC2B2AE3Du;
  h = (h ^ (h >> 13)) * 0x27D4EB2Fu;
  h ^= h >> 16;
  return h;
}

double lattice(int x, int y, std::uint32_t seed) {
  return hash2(x, y, seed) * (1.0 / 4294967296.0);
}

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

double noise_octave(double u, double v, std::uint32_t seed) {
  const double fu = std::floor(u), fv = std::floor(v);
  const int iu = static_cast<int>(fu), iv = static_cast<int>(fv);
  const double a = smoothstep(u - fu), b = smoothstep(v - fv);
  const double n00 = lattice(iu, iv, seed);
  const double n10 = lattice(iu + 1, iv, seed);
  const double n01 = lattice(iu, iv + 1, seed);
  const double n11 = lattice(iu + 1, iv + 1, seed);
  return (1.0 - a) * (1.0 - b) * n00 + a * (1.0 - b) * n10 + (1.0 - a) * b * n01 + a * b * n11;
}

}  // namespace

double value_noise(double u, double v, std::uint32_t seed, int octaves, double frequency) {
  return value_noise_filtered(u, v, seed, octaves, frequency, 0.0);
}

double value_noise_filtered(double u, double v, std::uint32_t seed, int octaves, double frequency,
                            double footprint) {
  double sum = 0.0, amp = 1.0, norm = 0.0, f = frequency;
  for (int o = 0; o < octaves; ++o) {
    // octave wavelength 1/f; fade between 8x and 4x the footprint, well
    // clear of the resampling Nyquist edge. A faded octave contributes its
    // mean so brightness stays footprint independent.
    double w = 1.0;
    if (footprint > 0.0) {
      const double ratio = 1.0 / (f * footprint);
      w = std::clamp((ratio - 4.0) / 4.0, 0.0, 1.0);
      w = w * w * (3.0 - 2.0 * w);
    }
    double val = 0.5;
    if (w > 0.0)
      val = noise_octave(u * f, v * f, seed + static_cast<std::uint32_t>(o) * 0x68E31DA4u);
    sum += amp * (w * val + (1.0 - w) * 0.5);
    norm += amp;
    amp *= 0.5;
    f *= 2.0;
  }
  return sum / norm;
}

void Plane::validate() const {
  if (std::abs(u_axis.norm() - 1.0) > 1e-9 || std::abs(v_axis.norm() - 1.0) > 1e-9 ||
      std::abs(u_axis.dot(v_axis)) > 1e-9)
    throw validation_error("plane axes must be orthonormal");
  if (!(u_min < u_max) || !(v_min < v_max)) throw validation_error("plane extent is empty");
}

void PlanarScene::validate() const {
  K.validate();
  if (width < 2 || height < 2) throw validation_error("scene dimensions must be at least 2x2");
  if (planes.empty()) throw validation_error("scene needs at least one plane");
  if (trajectory.empty()) throw validation_error("scene needs at least one view");
  for (const Plane& p : planes) p.validate();
}

RenderedView render(const PlanarScene& scene, int view_index) {
  scene.validate();
  if (view_index < 0 || view_index >= static_cast<int>(scene.trajectory.size()))
    throw validation_error("render: view index out of range");

  const int w = scene.width, h = scene.height;
  const PoseSE3 cam_to_world = PoseSE3::exp(scene.trajectory[view_index]);
  std::vector<PoseSE3> all_poses;
  for (const Vec6& t : scene.trajectory) all_poses.push_back(PoseSE3::exp(t));

  RenderedView out;
  out.pose = scene.trajectory[view_index];
  out.image = ImageF(w, h, 3);
  out.depth_gt = DepthMap(w, h);
  out.normal_gt = NormalMap(w, h);
  out.edge_gt = BinaryMap(w, h);

  std::vector<int> plane_id(static_cast<size_t>(w) * h, -1);

#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Vec3 ray_cam = scene.K.ray(x, y);
      const Vec3 dir = cam_to_world.R * ray_cam;
      const Vec3& org = cam_to_world.t;

      double best_t = 0.0;
      int best = -1;
      double best_lu = 0.0, best_lv = 0.0;
      for (size_t pi = 0; pi < scene.planes.size(); ++pi) {
        const Plane& pl = scene.planes[pi];
        const Vec3 n = pl.normal();
        const double denom = n.dot(dir);
        if (std::abs(denom) < 1e-12) continue;
        const double t = n.dot(pl.origin - org) / denom;
        if (t <= 1e-9) continue;
        const Vec3 hit = org + t * dir;
        const double lu = (hit - pl.origin).dot(pl.u_axis);
        const double lv = (hit - pl.origin).dot(pl.v_axis);
        if (lu < pl.u_min || lu > pl.u_max || lv < pl.v_min || lv > pl.v_max) continue;
        if (best < 0 || t < best_t) {
          best_t = t;
          best = static_cast<int>(pi);
          best_lu = lu;
          best_lv = lv;
        }
      }
      if (best < 0) continue;  // reported after the loop

      plane_id[static_cast<size_t>(y) * w + x] = best;
      // dir has unit camera z, so the ray parameter is the camera-frame depth.
      out.depth_gt.at(x, y) = best_t;

      const Plane& pl = scene.planes[best];
      Vec3 n_cam = cam_to_world.R.transpose() * pl.normal();
      if (n_cam.dot(ray_cam) > 0.0) n_cam = -n_cam;
      out.normal_gt.set(x, y, n_cam);

      // Pixel footprint on the plane: how far the hit point moves per pixel
      // step, in plane-local coordinates, maximized over every trajectory
      // camera that sees the point. The texture band limit must be a pure
      // surface property or the views would disagree on the rendered
      // intensity and photoconsistency would break.
      const Vec3 n = pl.normal();
      const Vec3 hit = org + best_t * dir;
      double footprint = 0.0;
      for (const PoseSE3& cam : all_poses) {
        const Vec3 x_cam = cam.R.transpose() * (hit - cam.t);
        if (!(x_cam.z() > 1e-6)) continue;
        const Vec3 base_ray = x_cam / x_cam.z();
        for (int axis = 0; axis < 2; ++axis) {
          Vec3 ray2 = base_ray;
          ray2[axis] += 1.0 / (axis == 0 ? scene.K.fx : scene.K.fy);
          const Vec3 dir2 = cam.R * ray2;
          const double den2 = n.dot(dir2);
          if (std::abs(den2) < 1e-12) continue;
          const double t2 = n.dot(pl.origin - cam.t) / den2;
          if (t2 <= 0.0) continue;
          const Vec3 hit2 = cam.t + t2 * dir2;
          footprint = std::max(
              footprint, std::hypot((hit2 - hit).dot(pl.u_axis), (hit2 - hit).dot(pl.v_axis)));
        }
      }

      const PlaneTexture& tex = pl.texture;
      for (int c = 0; c < 3; ++c) {
        const double v = value_noise_filtered(best_lu, best_lv,
                                              tex.seed + static_cast<std::uint32_t>(c) * 0x51f15EADu,
                                              tex.octaves, tex.frequency, footprint);
        out.image.at(x, y, c) = std::clamp(0.5 + tex.contrast * (v - 0.5), 0.0, 1.0);
      }
    }
  }

  for (size_t i = 0; i < plane_id.size(); ++i) {
    if (plane_id[i] < 0)
      throw validation_error("scene coverage violated: a pixel ray misses every plane in view " +
                             std::to_string(view_index));
  }

  // Geometrical edge: any 4-neighbor on a different plane (both sides get
  // flagged). In a piecewise-planar scene every depth discontinuity and
  // every crease is a plane boundary, so the id test captures them all; a
  // raw neighbor depth-ratio test would additionally fire on the plain
  // foreshortening of slanted planes near grazing view and is not used.
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int id = plane_id[static_cast<size_t>(y) * w + x];
      bool edge = false;
      const int nx[4] = {x - 1, x + 1, x, x};
      const int ny[4] = {y, y, y - 1, y + 1};
      for (int k = 0; k < 4 && !edge; ++k) {
        if (nx[k] < 0 || ny[k] < 0 || nx[k] >= w || ny[k] >= h) continue;
        if (plane_id[static_cast<size_t>(ny[k]) * w + nx[k]] != id) edge = true;
      }
      out.edge_gt.at(x, y) = edge ? 1 : 0;
    }
  }
  return out;
}

PoseSE3 relative_pose(const PlanarScene& scene, int target_index, int source_index) {
  const PoseSE3 t_wt = PoseSE3::exp(scene.trajectory[target_index]);
  const PoseSE3 t_ws = PoseSE3::exp(scene.trajectory[source_index]);
  return t_ws.inverse() * t_wt;
}

namespace {

Plane make_plane(const Vec3& origin, const Vec3& u, const Vec3& v, std::uint32_t seed) {
  Plane p;
  p.origin = origin;
  p.u_axis = u.normalized();
  p.v_axis = (v - v.dot(p.u_axis) * p.u_axis).normalized();
  p.texture.seed = seed;
  return p;
}

Intrinsics catalog_intrinsics(int w, int h) {
  Intrinsics K;
  K.fx = K.fy = 0.75 * w;
  K.cx = (w - 1) * 0.5;
  K.cy = (h - 1) * 0.5;
  return K;
}

// Camera-to-world twist: a small fixed tilt composed with a per-view motion.
// The tilt keeps every scene plane away from axis-perpendicular in camera
// frame; exactly perpendicular planes make the per-axis slope denominators
// of the depth smoothness term collapse at creases.
Vec6 tilted_pose(const Vec3& rot, const Vec3& trans) {
  const Vec3 tilt(0.10, 0.06, 0.04);
  Vec6 base = Vec6::Zero();
  base.head<3>() = tilt;
  Vec6 motion;
  motion.head<3>() = rot;
  motion.tail<3>() = trans;
  return (PoseSE3::exp(motion) * PoseSE3::exp(base)).log();
}

}  // namespace

std::map<std::string, PlanarScene> standard_scenes() {
  std::map<std::string, PlanarScene> out;

  {
    PlanarScene s;
    s.name = "plane";
    s.width = 64;
    s.height = 48;
    s.K = catalog_intrinsics(s.width, s.height);
    s.planes.push_back(make_plane({0, 0, 5}, {1, 0, 0}, {0, 1, 0}, 11));
    s.trajectory.push_back(Vec6::Zero());
    Vec6 t1 = Vec6::Zero();
    t1 << 0.0, 0.01, 0.0, 0.18, 0.0, 0.0;
    s.trajectory.push_back(t1);
    Vec6 t2 = Vec6::Zero();
    t2 << 0.01, 0.0, 0.0, -0.12, 0.08, 0.05;
    s.trajectory.push_back(t2);
    out[s.name] = s;
  }

  {
    PlanarScene s;
    s.name = "corridor";
    s.width = 64;
    s.height = 48;
    s.K = catalog_intrinsics(s.width, s.height);
    // Ground 1.5 m below the camera, side walls 2.5 m out, near end cap;
    // sideways-dominated baselines keep disparities above a pixel across
    // the whole depth range.
    s.planes.push_back(make_plane({0, 1.5, 0}, {1, 0, 0}, {0, 0, 1}, 21));
    s.planes.push_back(make_plane({-2.5, 0, 0}, {0, 0, 1}, {0, 1, 0}, 22));
    s.planes.push_back(make_plane({2.5, 0, 0}, {0, 0, 1}, {0, 1, 0}, 23));
    s.planes.push_back(make_plane({0, 0, 13}, {1, 0, 0}, {0, 1, 0}, 24));
    s.trajectory.push_back(tilted_pose({0, 0, 0}, {0, 0, 0}));
    s.trajectory.push_back(tilted_pose({0, 0.008, 0}, {0.42, 0.05, 0.25}));
    s.trajectory.push_back(tilted_pose({0, -0.008, 0}, {-0.42, -0.05, 0.5}));
    out[s.name] = s;
  }

  {
    PlanarScene s;
    s.name = "box-street";
    s.width = 64;
    s.height = 48;
    s.K = catalog_intrinsics(s.width, s.height);
    // Ground, one side wall, far cap, and a finite frontal box face whose
    // silhouette is a pure depth discontinuity against the cap behind it.
    s.planes.push_back(make_plane({0, 1.5, 0}, {1, 0, 0}, {0, 0, 1}, 31));
    s.planes.push_back(make_plane({2.6, 0, 0}, {0, 0, 1}, {0, 1, 0}, 32));
    s.planes.push_back(make_plane({0, 0, 12}, {1, 0, 0}, {0, 1, 0}, 33));
    Plane box = make_plane({-0.9, 0.55, 5}, {1, 0, 0}, {0, 1, 0}, 34);
    box.u_min = -1.3;
    box.u_max = 1.3;
    box.v_min = -0.95;
    box.v_max = 0.95;  // reaches the ground at y = 1.5
    s.planes.push_back(box);
    s.trajectory.push_back(tilted_pose({0, 0, 0}, {0, 0, 0}));
    s.trajectory.push_back(tilted_pose({0, 0.01, 0}, {0.4, 0.04, 0.2}));
    s.trajectory.push_back(tilted_pose({0, -0.01, 0}, {-0.4, -0.04, 0.4}));
    out[s.name] = s;
  }

  return out;
}

namespace {

using nlohmann::json;

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
Vec3 vec3_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

json twist_json(const Vec6& t) {
  json a = json::array();
  for (int i = 0; i < 6; ++i) a.push_back(t[i]);
  return a;
}

Vec6 twist_from(const json& j) {
  if (!j.is_array() || j.size() != 6) throw validation_error("pose must be a 6-element array");
  Vec6 t;
  for (int i = 0; i < 6; ++i) t[i] = j.at(i).get<double>();
  return t;
}

json intrinsics_json(const Intrinsics& K) {
  return json{{"fx", K.fx}, {"fy", K.fy}, {"cx", K.cx}, {"cy", K.cy}};
}

Intrinsics intrinsics_from(const json& j) {
  Intrinsics K;
  K.fx = j.at("fx").get<double>();
  K.fy = j.at("fy").get<double>();
  K.cx = j.at("cx").get<double>();
  K.cy = j.at("cy").get<double>();
  K.validate();
  return K;
}

json parse_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw io_error("cannot open " + path);
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw io_error(path + ": " + e.what(), static_cast<std::int64_t>(e.byte));
  }
}

}  // namespace

PlanarScene scene_from_json_file(const std::string& path) {
  const json j = parse_json_file(path);
  PlanarScene s;
  s.name = j.value("name", "");
  s.width = j.at("width").get<int>();
  s.height = j.at("height").get<int>();
  s.K = intrinsics_from(j.at("intrinsics"));
  for (const json& pj : j.at("planes")) {
    Plane p;
    p.origin = vec3_from(pj.at("origin"));
    p.u_axis = vec3_from(pj.at("u_axis"));
    p.v_axis = vec3_from(pj.at("v_axis"));
    if (pj.contains("u_range")) {
      p.u_min = pj.at("u_range").at(0).get<double>();
      p.u_max = pj.at("u_range").at(1).get<double>();
    }
    if (pj.contains("v_range")) {
      p.v_min = pj.at("v_range").at(0).get<double>();
      p.v_max = pj.at("v_range").at(1).get<double>();
    }
    if (pj.contains("texture")) {
      const json& tj = pj.at("texture");
      p.texture.seed = tj.value("seed", 1u);
      p.texture.octaves = tj.value("octaves", 3);
      p.texture.frequency = tj.value("frequency", 0.7);
      p.texture.contrast = tj.value("contrast", 0.7);
    }
    s.planes.push_back(p);
  }
  for (const json& tj : j.at("trajectory")) s.trajectory.push_back(twist_from(tj));
  s.validate();
  return s;
}

void scene_to_json_file(const PlanarScene& s, const std::string& path) {
  json j;
  if (!s.name.empty()) j["name"] = s.name;
  j["width"] = s.width;
  j["height"] = s.height;
  j["intrinsics"] = intrinsics_json(s.K);
  j["planes"] = json::array();
  for (const Plane& p : s.planes) {
    json pj;
    pj["origin"] = vec3_json(p.origin);
    pj["u_axis"] = vec3_json(p.u_axis);
    pj["v_axis"] = vec3_json(p.v_axis);
    if (p.u_min > -1e29 || p.u_max < 1e29) pj["u_range"] = json::array({p.u_min, p.u_max});
    if (p.v_min > -1e29 || p.v_max < 1e29) pj["v_range"] = json::array({p.v_min, p.v_max});
    pj["texture"] = json{{"seed", p.texture.seed},
                         {"octaves", p.texture.octaves},
                         {"frequency", p.texture.frequency},
                         {"contrast", p.texture.contrast}};
    j["planes"].push_back(pj);
  }
  j["trajectory"] = json::array();
  for (const Vec6& t : s.trajectory) j["trajectory"].push_back(twist_json(t));

  std::ofstream f(path);
  if (!f) throw io_error("cannot open " + path + " for writing");
  f << j.dump(2) << "\n";
}

void write_bundle(const std::string& outdir, const PlanarScene& scene,
                  const std::vector<RenderedView>& views) {
  namespace fs = std::filesystem;
  fs::create_directories(outdir);

  json manifest;
  manifest["width"] = scene.width;
  manifest["height"] = scene.height;
  manifest["intrinsics"] = json{{"fx", scene.K.fx}, {"fy", scene.K.fy}, {"cx", scene.K.cx}, {"cy", scene.K.cy}};
  manifest["views"] = json::array();

  char name[64];
  for (size_t i = 0; i < views.size(); ++i) {
    const RenderedView& v = views[i];
    json vj;
    std::snprintf(name, sizeof name, "view_%03zu", i);
    const std::string base(name);
    write_ppm(outdir + "/" + base + ".ppm", v.image);
    write_pfm(outdir + "/" + base + "_depth.pfm", v.depth_gt);
    write_pfm(outdir + "/" + base + "_normal.pfm", v.normal_gt);
    write_pgm8_binary(outdir + "/" + base + "_edge.pgm", v.edge_gt);
    vj["image"] = base + ".ppm";
    vj["depth"] = base + "_depth.pfm";
    vj["normal"] = base + "_normal.pfm";
    vj["edge"] = base + "_edge.pgm";
    vj["pose"] = twist_json(v.pose);
    manifest["views"].push_back(vj);
  }

  std::ofstream f(outdir + "/manifest.json");
  if (!f) throw io_error("cannot open " + outdir + "/manifest.json for writing");
  f << manifest.dump(2) << "\n";
}

SceneBundle read_bundle(const std::string& dir) {
  const json manifest = parse_json_file(dir + "/manifest.json");
  SceneBundle b;
  b.width = manifest.at("width").get<int>();
  b.height = manifest.at("height").get<int>();
  b.K = intrinsics_from(manifest.at("intrinsics"));
  for (const json& vj : manifest.at("views")) {
    RenderedView v;
    v.image = read_ppm(dir + "/" + vj.at("image").get<std::string>());
    ScalarMap d = read_pfm_scalar(dir + "/" + vj.at("depth").get<std::string>());
    static_cast<ScalarMap&>(v.depth_gt) = std::move(d);
    v.normal_gt = read_pfm_normal(dir + "/" + vj.at("normal").get<std::string>());
    v.edge_gt = read_pgm8_binary(dir + "/" + vj.at("edge").get<std::string>());
    v.pose = twist_from(vj.at("pose"));
    if (v.image.width != b.width || v.image.height != b.height)
      throw validation_error("bundle view dimensions disagree with the manifest");
    b.views.push_back(std::move(v));
  }
  if (b.views.empty()) throw validation_error("bundle has no views");
  return b;
}

}  // namespace edgegeo
