#pragma once

#include <json.hpp>

namespace chronoreg {

/// Integrability and Hoelder exponents attached to a measured delta:
///   alpha = (1/p - 1/(p + delta)) / 2,   q = 2 / (1 - 2 alpha),   p' = p / (p - 1).
/// Construction asserts both forms of 1/q agree to 1e-14 and rejects delta = 0.
struct ExponentSet {
    int d = 1;
    double p = 2.0;
    double delta = 0.0;
    double alpha = 0.0;
    double q = 2.0;
    double q_hat = 2.0;
    double p_prime = 2.0;

    ExponentSet(int d, double p, double delta, double q_hat = 2.0);

    bool operator==(const ExponentSet&) const = default;

    /// 2d / (d + 2); p must exceed it.
    static double p_min(int d);
};

nlohmann::json to_json(const ExponentSet& e);
/// Rebuilds from (d, p, delta, q_hat) and checks the stored derived fields.
ExponentSet exponent_set_from_json(const nlohmann::json& j);

}  // namespace chronoreg
