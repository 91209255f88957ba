#pragma once

#include "arith_table.hpp"
#include "bounds.hpp"
#include "characters.hpp"
#include "convolution.hpp"
#include "errors.hpp"
#include "lvalues.hpp"
#include "parallel.hpp"
#include "progressions.hpp"
#include "siegel_model.hpp"
#include "sieve.hpp"
