#pragma once

/// Umbrella header for the thermoelastic evolutionary-equation toolkit.

#include "thermoevo/errors.hpp"
#include "thermoevo/signal.hpp"
#include "thermoevo/rational.hpp"
#include "thermoevo/fourier_laplace.hpp"
#include "thermoevo/realization.hpp"
#include "thermoevo/material.hpp"
#include "thermoevo/wellposedness.hpp"
#include "thermoevo/spatial.hpp"
#include "thermoevo/evolution.hpp"
#include "thermoevo/oracle.hpp"
#include "thermoevo/io.hpp"
#include "thermoevo/cli.hpp"
