// bfc.hpp - umbrella header.
#pragma once

#include "bfc/bessel.hpp"
#include "bfc/design.hpp"
#include "bfc/estimate.hpp"
#include "bfc/fit.hpp"
#include "bfc/io.hpp"
#include "bfc/model.hpp"
#include "bfc/noise.hpp"
#include "bfc/oracle.hpp"
#include "bfc/presets.hpp"
#include "bfc/rng.hpp"
#include "bfc/types.hpp"
#include "bfc/version.hpp"
