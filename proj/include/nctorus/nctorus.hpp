#pragma once

#include "nctorus/error.hpp"
#include "nctorus/lattice.hpp"
#include "nctorus/theta.hpp"
#include "nctorus/torus_element.hpp"
#include "nctorus/symbol.hpp"
#include "nctorus/symbol_calculus.hpp"
#include "nctorus/psido.hpp"
#include "nctorus/quadrature.hpp"
#include "nctorus/lattice_zeta.hpp"
#include "nctorus/trace.hpp"
#include "nctorus/commutator.hpp"
#include "nctorus/io.hpp"
#include "nctorus/config.hpp"
#include "nctorus/verification.hpp"
