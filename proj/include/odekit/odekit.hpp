#pragma once

// Umbrella header: pluggable vector/matrix/linear/nonlinear solver classes
// beneath adaptive multistep and multistage time integrators.

#include "odekit/ark.hpp"
#include "odekit/butcher.hpp"
#include "odekit/cg.hpp"
#include "odekit/dense_lu.hpp"
#include "odekit/errors.hpp"
#include "odekit/fixed_point.hpp"
#include "odekit/gmres.hpp"
#include "odekit/linear_solver.hpp"
#include "odekit/lmm.hpp"
#include "odekit/many_vector.hpp"
#include "odekit/matrix.hpp"
#include "odekit/multistep_coeffs.hpp"
#include "odekit/newton.hpp"
#include "odekit/nonlinear_solver.hpp"
#include "odekit/ode_common.hpp"
#include "odekit/ode_linsys.hpp"
#include "odekit/standalone.hpp"
#include "odekit/vector.hpp"
