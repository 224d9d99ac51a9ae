#pragma once

// The 32 x 32 limited-angle disk problem shared by the ADMM accuracy test
// and the program that produced its stored reference minimum.

#include <lti/phantom.hpp>
#include <lti/shearlet.hpp>
#include <lti/solver.hpp>
#include <lti/tomo.hpp>

namespace lti::testing {

struct DiskProblem {
    static constexpr std::size_t n = 32;
    ScanGeometry geometry = ScanGeometry::for_image(n, deg_to_rad(50.0));
    RadonOperator radon{n, geometry};
    ShearletSystem system{n, ShearletSystem::default_levels(n)};
    Sinogram y = simulate_measurements(circle_renderer(0.25, 1.0), n, geometry, NoiseSpec{0.01, 11});
    AdmmParams params = admm_preset("ellipses50", system.scale_count());
};

} // namespace lti::testing
