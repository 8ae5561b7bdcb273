#pragma once

#include "modlab/bessel.hpp"
#include "modlab/config.hpp"
#include "modlab/correlator.hpp"
#include "modlab/error.hpp"
#include "modlab/filter.hpp"
#include "modlab/fit.hpp"
#include "modlab/modulation.hpp"
#include "modlab/scenario.hpp"
#include "modlab/spdc.hpp"
#include "modlab/trace_io.hpp"
#include "modlab/units.hpp"
#include "modlab/validate.hpp"
