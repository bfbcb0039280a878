#include "chronoreg/exponents.hpp"

#include "chronoreg/error.hpp"

#include <cmath>
#include <sstream>

namespace chronoreg {

double ExponentSet::p_min(int d) { return 2.0 * d / (d + 2.0); }

ExponentSet::ExponentSet(int d_, double p_, double delta_, double q_hat_)
    : d(d_), p(p_), delta(delta_), q_hat(q_hat_) {
    if (d < 1) throw ConfigError("exponents: d must be >= 1");
    if (!(p > p_min(d)) || !std::isfinite(p)) {
        std::ostringstream os;
        os << "exponents: p = " << p << " must exceed 2d/(d+2) = " << p_min(d);
        throw ConfigError(os.str());
    }
    if (!(delta >= 0.0) || !std::isfinite(delta)) throw ConfigError("exponents: delta must be >= 0");
    if (!(q_hat > 1.0)) throw ConfigError("exponents: q_hat must be > 1");
    if (delta == 0.0) throw ConfigError("degenerate exponent: delta = 0 gives alpha = 0");
    alpha = 0.5 * (1.0 / p - 1.0 / (p + delta));
    q = 2.0 / (1.0 - 2.0 * alpha);
    p_prime = p / (p - 1.0);
    const double inv_q = 0.5 + 0.5 * (1.0 / (p + delta) - 1.0 / p);
    if (std::abs(1.0 / q - inv_q) > 1e-14) {
        std::ostringstream os;
        os << "exponents: 1/q identity off by " << std::abs(1.0 / q - inv_q);
        throw NumericalError(os.str());
    }
}

nlohmann::json to_json(const ExponentSet& e) {
    return {{"d", e.d},         {"p", e.p}, {"delta", e.delta}, {"alpha", e.alpha},
            {"q", e.q},         {"q_hat", e.q_hat}, {"p_prime", e.p_prime}};
}

ExponentSet exponent_set_from_json(const nlohmann::json& j) {
    try {
        ExponentSet e(j.at("d").get<int>(), j.at("p").get<double>(), j.at("delta").get<double>(),
                      j.value("q_hat", 2.0));
        if (j.contains("alpha") && j["alpha"].get<double>() != e.alpha)
            throw ConfigError("exponents: stored alpha does not match (p, delta)");
        return e;
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError(std::string("exponents: ") + ex.what());
    }
}

}  // namespace chronoreg
