#include "rpde/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rpde/errors.hpp"

namespace rpde {

double gamma_fn(double z) {
    if (!(z > 0.0)) throw DomainError("Gamma is evaluated only for z > 0");
    return std::tgamma(z);
}

double log_gamma_fn(double z) {
    if (!(z > 0.0)) throw DomainError("log Gamma is evaluated only for z > 0");
    return std::lgamma(z);
}

double log_mittag_leffler(double beta, double c, double z) {
    if (!(beta > 0.0) || !(c > 0.0)) throw DomainError("Mittag-Leffler needs beta > 0 and c > 0");
    if (z < 0.0) throw DomainError("Mittag-Leffler is evaluated only for z >= 0");
    if (z == 0.0) return -std::lgamma(c);

    // Running log-sum-exp over log terms l_k = beta k log z - log Gamma(k beta + c).
    const double lz = std::log(z);
    const double stop = std::log(1e-17);
    double peak = -std::lgamma(c);
    double scaled = 1.0;  // sum of exp(l_k - peak)
    double prev = peak;
    for (int k = 1; k < 200000; ++k) {
        const double kb = beta * static_cast<double>(k);
        const double l = kb * lz - std::lgamma(kb + c);
        if (l > peak) {
            scaled = scaled * std::exp(peak - l) + 1.0;
            peak = l;
        } else {
            scaled += std::exp(l - peak);
        }
        // Past the largest term and negligible against the partial sum.
        if (l < prev && l - (peak + std::log(scaled)) < stop) break;
        prev = l;
    }
    return peak + std::log(scaled);
}

double mittag_leffler(double beta, double c, double z, double z_horizon) {
    if (z > z_horizon) {
        std::ostringstream os;
        os << "Mittag-Leffler argument " << z << " beyond overflow horizon " << z_horizon;
        throw RangeError(os.str());
    }
    const double l = log_mittag_leffler(beta, c, z);
    if (l > std::log(std::numeric_limits<double>::max()))
        throw RangeError("Mittag-Leffler value overflows double precision");
    return std::exp(l);
}

double log_ml_derivative(double beta, double z) {
    if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("derivative identity needs beta in (0,1]");
    if (!(z > 0.0)) throw DomainError("E'_{beta,1} is evaluated only for z > 0");
    return (beta - 1.0) * std::log(z) + log_mittag_leffler(beta, beta, z);
}

double ml_derivative(double beta, double z) {
    const double l = log_ml_derivative(beta, z);
    if (l > std::log(std::numeric_limits<double>::max()))
        throw RangeError("Mittag-Leffler derivative overflows double precision");
    return std::exp(l);
}

MlBoundCertificate certify_ml_bound(double beta, double z_min, double z_max) {
    if (!(z_min > 1.0 && z_min < z_max)) throw InvalidInput("certificate needs 1 < z_min < z_max");
    constexpr int kPoints = 1000;
    double worst = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < kPoints; ++i) {
        const double z = z_min + (z_max - z_min) * static_cast<double>(i) / (kPoints - 1);
        worst = std::max(worst, log_ml_derivative(beta, z) - 2.0 * z);
    }
    const double target = std::log(1.1) + worst;
    const double k = std::ceil(target / std::log(2.0));
    return {beta, std::exp2(k), z_min, z_max};
}

bool verify_ml_bound(const MlBoundCertificate& cert, const double* z, int count) {
    const double lm = std::log(cert.m_beta);
    for (int i = 0; i < count; ++i) {
        if (z[i] < cert.z_min || z[i] > cert.z_max) return false;
        if (log_ml_derivative(cert.beta, z[i]) > lm + 2.0 * z[i]) return false;
    }
    return true;
}

}  // namespace rpde
