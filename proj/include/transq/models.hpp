#pragma once

#include "transq/arrival.hpp"
#include "transq/service.hpp"

namespace transq::models {

/// Two-state model with batches of size 0..4 used to illustrate the
/// effective process.
DBmapModel five_batch_two_state();
/// Its service law: Poisson with mean 4, shifted to start at 1.
ServiceLaw five_batch_service();

/// Two-state model whose batches are Binomial(10, 0.3) out of state 1 and
/// Binomial(20, 0.6) out of state 2:
///   D(z) = [0.6 b1(z), 0.4 b1(z); 0.1 b2(z), 0.9 b2(z)].
DBmapModel binomial_two_state();
/// Its service law: Y - 1 ~ Poisson(2).
ServiceLaw binomial_two_state_service();

} // namespace transq::models
