#pragma once

#include "flagwave/grid.hpp"
#include "flagwave/rng.hpp"

namespace flagwave {

// Smooth pseudorandom field at length scale s: random amplitudes in [-1, 1] on a lattice of
// pitch s in z and s^2 in t, each carrying the bump exp(-1/(1 - rho_bar^4/(1.5 s)^4)).
// Lattice points are restricted to |z_i| <= extent_z, |t| <= extent_t so the field stays
// clear of the box boundary. Its spectrum is concentrated below frequency ~1/s.
SampledFunction random_smooth_field(const GridSpec& grid, Rng& rng, double s, double extent_z, double extent_t);

}  // namespace flagwave
