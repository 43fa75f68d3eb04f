#pragma once

#include "carnot/error.hpp"
#include "carnot/budget.hpp"
#include "carnot/special.hpp"
#include "carnot/quadrature.hpp"
#include "carnot/parallel.hpp"
#include "carnot/group.hpp"
#include "carnot/heat_kernel.hpp"
#include "carnot/heat_measure.hpp"
#include "carnot/regions.hpp"
#include "carnot/semigroup.hpp"
#include "carnot/overlap.hpp"
#include "carnot/functionals.hpp"
#include "carnot/phi.hpp"
#include "carnot/euclid.hpp"
#include "carnot/io.hpp"
#include "carnot/report.hpp"
