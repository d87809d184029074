#pragma once

#include "gmhg/bench.hpp"
#include "gmhg/csp.hpp"
#include "gmhg/discretize.hpp"
#include "gmhg/errors.hpp"
#include "gmhg/game.hpp"
#include "gmhg/generators.hpp"
#include "gmhg/io.hpp"
#include "gmhg/rational.hpp"
#include "gmhg/tree_dp.hpp"
#include "gmhg/verify.hpp"
