#pragma once

#include "cimdet/bench.hpp"
#include "cimdet/cim.hpp"
#include "cimdet/constellation.hpp"
#include "cimdet/errors.hpp"
#include "cimdet/ising.hpp"
#include "cimdet/linear.hpp"
#include "cimdet/matrix.hpp"
#include "cimdet/mdi.hpp"
#include "cimdet/mimo.hpp"
#include "cimdet/parallel.hpp"
#include "cimdet/radius.hpp"
#include "cimdet/rng.hpp"
#include "cimdet/trace.hpp"
#include "cimdet/version.hpp"
