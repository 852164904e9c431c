// Render a torso phantom at a known pose, perturb it, and recover the pose.

#include <cstdio>

#include <drr/drr.hpp>

int main() {
  using namespace drr;
  const Volume volume = make_phantom(PhantomKind::torso, {48, 48, 48}, {7.5, 7.5, 7.5}, 1.0);
  const DetectorSpec spec = DetectorSpec::centered_on(volume, 100, 100, 8.0);
  const PoseParameters truth{400.0, degrees(90.0), degrees(90.0), 0.0, {0.0, 0.0, 0.0}};
  const Image fixed = render(volume, truth, spec);

  PoseParameters start = truth;
  start.theta += degrees(20.0);
  start.gamma -= degrees(10.0);
  start.shift = {12.0, -8.0, 5.0};

  const RegistrationTrace trace = register_pose(fixed, volume, start, spec, OptimizerConfig{});
  for (const auto& e : trace.entries)
    if (e.iter % 10 == 0 || &e == &trace.entries.back()) std::printf("iter %3d  loss %.5f\n", e.iter, e.loss);
  std::printf("%s after %d iterations\n", to_string(trace.status), trace.iterations_used);
  return trace.converged ? 0 : 1;
}
