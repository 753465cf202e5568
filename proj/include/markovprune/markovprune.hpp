#pragma once

#include "markovprune/adjustment.hpp"
#include "markovprune/dsl.hpp"
#include "markovprune/error.hpp"
#include "markovprune/fit.hpp"
#include "markovprune/graph.hpp"
#include "markovprune/linalg.hpp"
#include "markovprune/projection.hpp"
#include "markovprune/reduce.hpp"
#include "markovprune/rng.hpp"
#include "markovprune/separation.hpp"
#include "markovprune/simulate.hpp"
#include "markovprune/sweep.hpp"
