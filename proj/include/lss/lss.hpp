#pragma once

#include "lss/chebyshev.hpp"
#include "lss/config.hpp"
#include "lss/decoupling.hpp"
#include "lss/entry_law.hpp"
#include "lss/error.hpp"
#include "lss/freeprob.hpp"
#include "lss/index_family.hpp"
#include "lss/montecarlo.hpp"
#include "lss/report.hpp"
#include "lss/rng.hpp"
#include "lss/spectra.hpp"
#include "lss/stats.hpp"
#include "lss/test_function.hpp"
#include "lss/theory.hpp"
#include "lss/verify.hpp"
#include "lss/wigner.hpp"
