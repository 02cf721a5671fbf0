#pragma once

#include "mlrisk/error.hpp"
#include "mlrisk/core_types.hpp"
#include "mlrisk/linalg.hpp"
#include "mlrisk/roots.hpp"
#include "mlrisk/closed_form.hpp"
#include "mlrisk/rng.hpp"
#include "mlrisk/simulation.hpp"
#include "mlrisk/config.hpp"
