#ifndef TRIWELL_COUPLING_HPP
#define TRIWELL_COUPLING_HPP

#include <cmath>
#include <sstream>

#include "triwell/common.hpp"

// Physical-parameter conversions (hbar = M = 1).

namespace triwell {

// |zeta(1/2)|
inline constexpr double kAbsZetaHalf = 1.4603545088;

struct EffectiveCoupling {
    double g_1d = 0.0;       // 1D coupling before lattice rescaling
    double g_rescaled = 0.0; // g = 2 g_1D M / (hbar^2 kappa)
};

// Effective 1D coupling under tight cylindrical confinement,
//   g_1D = (2 a0 / a_perp^2) / (1 - |zeta(1/2)| a0 / (sqrt(2) a_perp)),
// diverging at the confinement-induced resonance.
inline EffectiveCoupling effective_coupling_1d(double a0, double a_perp, double kappa = 1.0) {
    if (!(a_perp > 0.0)) throw config_error("effective_coupling_1d: a_perp must be positive");
    const double denom = 1.0 - kAbsZetaHalf * a0 / (std::sqrt(2.0) * a_perp);
    if (std::abs(denom) < 1e-6) {
        std::ostringstream os;
        os << "effective_coupling_1d: confinement-induced resonance singularity (denominator "
           << denom << " at a0/a_perp = " << a0 / a_perp << ")";
        throw numerical_error(os.str());
    }
    EffectiveCoupling out;
    out.g_1d = (2.0 * a0 / (a_perp * a_perp)) / denom;
    out.g_rescaled = 2.0 * out.g_1d / kappa;
    return out;
}

// Local Lieb-Liniger parameter gamma = g / (N rho(x)), with rho the
// unit-normalized one-body profile (so N rho is the particle density).
// Evaluated by convention at the density maximum of the initial state.
inline double lieb_liniger_gamma(double g, int n_bosons, double density_at_point) {
    if (!(density_at_point > 0.0))
        throw config_error("lieb_liniger_gamma: density must be positive");
    return g / (n_bosons * density_at_point);
}

}  // namespace triwell

#endif
