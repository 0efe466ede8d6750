#pragma once

#include "simpson/cache.hpp"
#include "simpson/error.hpp"
#include "simpson/lattice.hpp"
#include "simpson/materialize.hpp"
#include "simpson/paradox.hpp"
#include "simpson/rational.hpp"
#include "simpson/report.hpp"
#include "simpson/rng.hpp"
#include "simpson/robustness.hpp"
#include "simpson/synth.hpp"
#include "simpson/table.hpp"
