#pragma once

#include "slt/akns.hpp"
#include "slt/dense.hpp"
#include "slt/diffpoly.hpp"
#include "slt/errors.hpp"
#include "slt/frame.hpp"
#include "slt/gaussian_rational.hpp"
#include "slt/hierarchy.hpp"
#include "slt/linearization.hpp"
#include "slt/loop_series.hpp"
#include "slt/matrix.hpp"
#include "slt/scalar.hpp"
#include "slt/solver.hpp"
