#pragma once

#include "renewal/compensated_sum.hpp"
#include "renewal/diagnostics.hpp"
#include "renewal/ensemble.hpp"
#include "renewal/errors.hpp"
#include "renewal/parallel.hpp"
#include "renewal/primes.hpp"
#include "renewal/process.hpp"
#include "renewal/rng.hpp"
#include "renewal/special_functions.hpp"
#include "renewal/statistics.hpp"
#include "renewal/trace_io.hpp"
