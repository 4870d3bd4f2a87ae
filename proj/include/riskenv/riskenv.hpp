#pragma once

// Umbrella header: coherent risk measures on finite probability spaces with
// primal evaluators, dual (risk-envelope) evaluators, envelope set algebra,
// aversity diagnostics, and the envelope/uncertainty-set correspondence.

#include "riskenv/common.hpp"
#include "riskenv/space.hpp"
#include "riskenv/lp.hpp"
#include "riskenv/polytope.hpp"
#include "riskenv/envelope.hpp"
#include "riskenv/measures.hpp"
#include "riskenv/algebra.hpp"
#include "riskenv/aversity.hpp"
#include "riskenv/uncertainty.hpp"
#include "riskenv/oracle.hpp"
