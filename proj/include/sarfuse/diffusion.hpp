#pragma once

#include <utility>

#include "sarfuse/raster.hpp"

namespace sarfuse {

enum class ConductanceVariant { exponential, rational };

/// four_2d diffuses within each band; six_3d adds the two same-pixel
/// neighbors in adjacent bands (bands as a third axis, no wraparound).
enum class Neighborhood { four_2d, six_3d };

struct DiffusionParams {
    int iterations = 10;
    double lambda = 0.15;  // step size, bounded by 1/|neighborhood|
    double kappa = 30.0;   // edge-stopping constant, in pixel-value units
    ConductanceVariant variant = ConductanceVariant::exponential;
    Neighborhood neighborhood = Neighborhood::six_3d;

    double max_lambda() const { return neighborhood == Neighborhood::four_2d ? 0.25 : 1.0 / 6.0; }
    void validate() const;
};

/// Edge-stopping coefficient g(grad) in (0, 1], non-increasing in grad.
/// exponential: exp(-(grad/kappa)^2); rational: 1/(1+(grad/kappa)^2).
double conductance(double grad, double kappa, ConductanceVariant variant);

/// Explicit Perona-Malik diffusion with Jacobi updates and zero-flux
/// boundaries. Every voxel of an iteration reads the previous iteration's
/// buffer, so results do not depend on evaluation order.
Raster diffuse(const Raster& img, const DiffusionParams& p);

/// (base, detail): base = diffuse(img, p), detail = img - base.
std::pair<Raster, Raster> decompose(const Raster& img, const DiffusionParams& p);

}  // namespace sarfuse
