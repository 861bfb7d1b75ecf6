#pragma once

#include "apps.hpp"
#include "config.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "io.hpp"
#include "kernel.hpp"
#include "operators.hpp"
#include "quadrature.hpp"
#include "solver.hpp"
#include "transform.hpp"
#include "version.hpp"
