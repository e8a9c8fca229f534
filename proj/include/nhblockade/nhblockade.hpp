#pragma once

// Umbrella header for the nhblockade library.

#include "nhblockade/analytics.hpp"
#include "nhblockade/error.hpp"
#include "nhblockade/experiment.hpp"
#include "nhblockade/hilbert.hpp"
#include "nhblockade/liouville.hpp"
#include "nhblockade/model.hpp"
#include "nhblockade/observables.hpp"
#include "nhblockade/validation.hpp"
