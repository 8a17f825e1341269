#pragma once

#include "risk/backtest.hpp"
#include "risk/connectedness.hpp"
#include "risk/data.hpp"
#include "risk/error.hpp"
#include "risk/garch.hpp"
#include "risk/mathstat.hpp"
#include "risk/montecarlo.hpp"
#include "risk/optimize.hpp"
#include "risk/report.hpp"
#include "risk/var_engine.hpp"
