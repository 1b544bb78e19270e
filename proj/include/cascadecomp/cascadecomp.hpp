#pragma once

#include "cascade_fd.hpp"
#include "check.hpp"
#include "delay_comp.hpp"
#include "error.hpp"
#include "heat_ode.hpp"
#include "matops.hpp"
#include "ode.hpp"
#include "pde_sim.hpp"
#include "quadrature.hpp"
#include "sim_result.hpp"
#include "sylvester.hpp"
