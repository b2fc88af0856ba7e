#pragma once

#include "nilsym/errors.hpp"
#include "nilsym/mat2c.hpp"
#include "nilsym/nil3.hpp"
#include "nilsym/grid.hpp"
#include "nilsym/potential.hpp"
#include "nilsym/gauss_solver.hpp"
#include "nilsym/lax_frame.hpp"
#include "nilsym/sym_surface.hpp"
#include "nilsym/verify.hpp"
#include "nilsym/io.hpp"
#include "nilsym/pipeline.hpp"
