#pragma once

/// Umbrella header for the surface-PDE toolkit: geometry, sparse linear
/// algebra, the evolving-surface finite element scheme, and the two packaged
/// experiments (photobleaching recovery and two-species pattern formation).
/// The io/ headers additionally require the vendored JSON library on the
/// include path.

#include "surfpde/assembly.hpp"
#include "surfpde/bicgstab.hpp"
#include "surfpde/element_geometry.hpp"
#include "surfpde/errors.hpp"
#include "surfpde/frap.hpp"
#include "surfpde/icosphere.hpp"
#include "surfpde/levenberg_marquardt.hpp"
#include "surfpde/mesh_sequence.hpp"
#include "surfpde/parallel.hpp"
#include "surfpde/rds.hpp"
#include "surfpde/sparse.hpp"
#include "surfpde/stepping.hpp"
#include "surfpde/surface_mesh.hpp"
#include "surfpde/vec3.hpp"
