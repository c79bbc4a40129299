#pragma once

#include "gexpect/linalg.hpp"
#include "gexpect/sublinear.hpp"
#include "gexpect/constants.hpp"
#include "gexpect/sde.hpp"
#include "gexpect/random.hpp"
#include "gexpect/parallel.hpp"
#include "gexpect/events.hpp"
#include "gexpect/payoff.hpp"
#include "gexpect/grid.hpp"
#include "gexpect/pde.hpp"
#include "gexpect/pde_checks.hpp"
#include "gexpect/control.hpp"
#include "gexpect/mc.hpp"
#include "gexpect/krylov.hpp"
#include "gexpect/ito.hpp"
#include "gexpect/io.hpp"
