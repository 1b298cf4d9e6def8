#pragma once

#include "coagfrag/config.hpp"
#include "coagfrag/convergence.hpp"
#include "coagfrag/diagnostics.hpp"
#include "coagfrag/discretization.hpp"
#include "coagfrag/grid.hpp"
#include "coagfrag/integrator.hpp"
#include "coagfrag/io.hpp"
#include "coagfrag/kernels.hpp"
#include "coagfrag/oracles.hpp"
#include "coagfrag/quadrature.hpp"
#include "coagfrag/summation.hpp"
#include "coagfrag/truncation.hpp"
