#pragma once

#include "sicdft/builtins.hpp"
#include "sicdft/config.hpp"
#include "sicdft/dipole.hpp"
#include "sicdft/errors.hpp"
#include "sicdft/grid.hpp"
#include "sicdft/ions.hpp"
#include "sicdft/laplacian.hpp"
#include "sicdft/localize.hpp"
#include "sicdft/orbitals.hpp"
#include "sicdft/poisson.hpp"
#include "sicdft/polarizability.hpp"
#include "sicdft/preconditioner.hpp"
#include "sicdft/run.hpp"
#include "sicdft/scf.hpp"
#include "sicdft/schemes.hpp"
#include "sicdft/system.hpp"
#include "sicdft/xc.hpp"
