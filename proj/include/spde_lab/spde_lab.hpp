#ifndef SPDE_LAB_SPDE_LAB_HPP
#define SPDE_LAB_SPDE_LAB_HPP

#include "burgers.hpp"
#include "ensemble.hpp"
#include "heat.hpp"
#include "hilbert.hpp"
#include "lyapunov.hpp"
#include "random.hpp"
#include "report.hpp"
#include "stats.hpp"
#include "wave.hpp"
#include "wiener.hpp"

#endif  // SPDE_LAB_SPDE_LAB_HPP
