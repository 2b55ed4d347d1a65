// Timing comparison between the OpenMP kernels and the serial reference
// implementations on a catalog scene.

#include <chrono>
#include <cstdio>
#include <functional>

#include "edgegeo/optimizer.hpp"
#include "edgegeo/scene.hpp"
#include "ref/reference.hpp"

using namespace edgegeo;

namespace {

double time_ms(const std::function<void()>& fn, int repeats) {
  fn();  // warmup
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < repeats; ++i) fn();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count() / repeats;
}

}  // namespace

int main(int argc, char** argv) {
  const int scale = argc > 1 ? std::atoi(argv[1]) : 2;  // scene upscaling factor
  const int repeats = argc > 2 ? std::atoi(argv[2]) : 5;

  PlanarScene scene = standard_scenes().at("box-street");
  scene.width *= scale;
  scene.height *= scale;
  scene.K.fx *= scale;
  scene.K.fy *= scale;
  scene.K.cx = (scene.width - 1) * 0.5;
  scene.K.cy = (scene.height - 1) * 0.5;

  std::printf("scene %dx%d, %d repeats per row\n", scene.width, scene.height, repeats);

  const RenderedView v0 = render(scene, 0);
  const RenderedView v1 = render(scene, 1);
  const Vec6 twist = relative_pose(scene, 1, 0).log();
  const std::vector<SourceView> sources = {{&v0.image, twist}};

  EdgeMap edges;
  static_cast<ScalarMap&>(edges) = ScalarMap(scene.width, scene.height, 0.2);

  struct Row {
    const char* name;
    std::function<void()> parallel;
    std::function<void()> serial;
  };

  const Row rows[] = {
      {"render",
       [&] { render(scene, 1); },
       {}},
      {"photometric",
       [&] { photometric_loss(v1.image, sources, v1.depth_gt, scene.K); },
       [&] { ref::photometric_value(v1.image, sources, v1.depth_gt, scene.K); }},
      {"depth_to_normal",
       [&] { depth_to_normal(v1.depth_gt, scene.K); },
       [&] { ref::depth_to_normal_serial(v1.depth_gt, scene.K); }},
      {"loss_depth_asap",
       [&] { loss_depth_asap(v1.depth_gt, edges, scene.K, true); },
       [&] { ref::loss_depth_asap_value(v1.depth_gt, edges, scene.K, true); }},
      {"loss_normal_asap",
       [&] { loss_normal_asap(v1.normal_gt, edges); },
       [&] { ref::loss_normal_asap_value(v1.normal_gt, edges); }},
      {"fly_out_mask",
       [&] { fly_out_mask(v1.depth_gt, PoseSE3::exp(twist), scene.K, scene.width, scene.height); },
       [&] { ref::fly_out_mask(v1.depth_gt, PoseSE3::exp(twist), scene.K, scene.width, scene.height); }},
  };

  std::printf("%-18s %12s %12s %8s\n", "kernel", "parallel/ms", "serial/ms", "speedup");
  for (const Row& row : rows) {
    const double par = time_ms(row.parallel, repeats);
    if (row.serial) {
      const double ser = time_ms(row.serial, repeats);
      std::printf("%-18s %12.3f %12.3f %7.2fx\n", row.name, par, ser, ser / par);
    } else {
      std::printf("%-18s %12.3f %12s %8s\n", row.name, par, "-", "-");
    }
  }
  return 0;
}
