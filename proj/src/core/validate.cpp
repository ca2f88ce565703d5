#include "core/validate.hpp"

#include <cmath>

#include "core/util.hpp"

namespace rivlab {

double mc_sparseness_oracle(const BinaryMask& mask, const std::array<double, 3>& x0, double r,
                            size_t samples, uint64_t seed) {
    const GridSpec g = mask.grid;
    if (!(r > 0.0) || !(r < 0.5 * g.domain_length))
        throw std::invalid_argument("mc_sparseness_oracle: r must satisfy 0 < r < L/2");
    Rng rng(seed);
    const double h = g.spacing();
    size_t hits = 0;
    for (size_t s = 0; s < samples; ++s) {
        // uniform point in the ball by rejection from the cube
        double px, py, pz;
        for (;;) {
            px = rng.uniform(-1.0, 1.0);
            py = rng.uniform(-1.0, 1.0);
            pz = rng.uniform(-1.0, 1.0);
            if (px * px + py * py + pz * pz <= 1.0) break;
        }
        const double x = x0[0] + r * px;
        const double y = x0[1] + r * py;
        const double z = x0[2] + r * pz;
        // voxel i spans the cell [i*h, (i+1)*h)
        const int ix = int(std::floor(x / h));
        const int iy = int(std::floor(y / h));
        const int iz = int(std::floor(z / h));
        if (mask.test(g.wrap_index(ix, iy, iz))) ++hits;
    }
    return double(hits) / double(samples);
}

// run_validation is implemented in this translation unit once all checked
// subsystems exist; see below.

}  // namespace rivlab
