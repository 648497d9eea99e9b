#pragma once

namespace rpde {

/// Arguments above this make e^{2z} unrepresentable in double precision.
inline constexpr double kMlHorizon = 354.0;

double gamma_fn(double z);
double log_gamma_fn(double z);

/// E_{beta,c}(z) = sum_k z^{beta k} / Gamma(k beta + c), summed in log space.
double log_mittag_leffler(double beta, double c, double z);
/// Throws RangeError for z beyond `z_horizon` or when the value overflows.
double mittag_leffler(double beta, double c, double z, double z_horizon = kMlHorizon);

/// E'_{beta,1}(z) through the identity z^{beta-1} E_{beta,beta}(z); beta in (0,1], z > 0.
double ml_derivative(double beta, double z);
double log_ml_derivative(double beta, double z);

struct MlBoundCertificate {
    double beta = 1.0;
    double m_beta = 0.0;
    double z_min = 0.0;
    double z_max = 0.0;
};

/// Smallest power of two M with E'_{beta,1}(z) <= M e^{2z} on a 1000-point grid of
/// [z_min, z_max], after a 10% safety factor on the observed maximum ratio.
MlBoundCertificate certify_ml_bound(double beta, double z_min, double z_max);

/// Re-check a certificate at arbitrary points (used with fresh random grids).
bool verify_ml_bound(const MlBoundCertificate& cert, const double* z, int count);

}  // namespace rpde
