#pragma once

#include "buchi_dp/analysis.hpp"
#include "buchi_dp/contraction.hpp"
#include "buchi_dp/error.hpp"
#include "buchi_dp/graph.hpp"
#include "buchi_dp/model.hpp"
#include "buchi_dp/oracle.hpp"
#include "buchi_dp/parser.hpp"
#include "buchi_dp/prng.hpp"
#include "buchi_dp/random_chain.hpp"
#include "buchi_dp/surrogate_dp.hpp"
