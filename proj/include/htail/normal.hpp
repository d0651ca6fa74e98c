#pragma once

namespace htail::normal {

/// Standard normal survival function Φ̄(z).
double tail(double z);
/// log Φ̄(z), finite for all z (asymptotic series once Φ̄ underflows).
double log_tail(double z);
/// z with Φ̄(z) = q.
double tail_inverse(double q);
/// z with Φ(z) = p.
double quantile(double p);

}  // namespace htail::normal
