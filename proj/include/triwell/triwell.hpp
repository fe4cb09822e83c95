#ifndef TRIWELL_TRIWELL_HPP
#define TRIWELL_TRIWELL_HPP

#include "triwell/basis.hpp"
#include "triwell/catalog.hpp"
#include "triwell/common.hpp"
#include "triwell/coupling.hpp"
#include "triwell/grid.hpp"
#include "triwell/hamiltonian.hpp"
#include "triwell/lanczos.hpp"
#include "triwell/numberstate.hpp"
#include "triwell/propagate.hpp"
#include "triwell/scenario.hpp"
#include "triwell/single_particle.hpp"

#endif
