#ifndef TRIWELL_GRID_HPP
#define TRIWELL_GRID_HPP

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "triwell/common.hpp"

// Spatial discretization of the triple well and its sub-wells.
//
// Units: hbar = M = kappa = 1, so the one-body Hamiltonian reads
//   h = -(1/2) d^2/dx^2 + V0 sin^2(x) + tilt*x
// on [-3pi/2, 3pi/2] with hard walls (wavefunction pinned to zero at the
// domain ends). Only interior points are represented.

namespace triwell {

inline constexpr double kPi = std::numbers::pi;

enum class Domain { FullTriple, SubWellLeft, SubWellMiddle, SubWellRight };

inline const char* domain_name(Domain d) {
    switch (d) {
        case Domain::FullTriple: return "FULL_TRIPLE";
        case Domain::SubWellLeft: return "SUB_WELL_LEFT";
        case Domain::SubWellMiddle: return "SUB_WELL_MIDDLE";
        case Domain::SubWellRight: return "SUB_WELL_RIGHT";
    }
    return "?";
}

inline double domain_x_min(Domain d) {
    switch (d) {
        case Domain::FullTriple: return -1.5 * kPi;
        case Domain::SubWellLeft: return -1.5 * kPi;
        case Domain::SubWellMiddle: return -0.5 * kPi;
        case Domain::SubWellRight: return 0.5 * kPi;
    }
    return 0.0;
}

inline double domain_x_max(Domain d) {
    switch (d) {
        case Domain::FullTriple: return 1.5 * kPi;
        case Domain::SubWellLeft: return -0.5 * kPi;
        case Domain::SubWellMiddle: return 0.5 * kPi;
        case Domain::SubWellRight: return 1.5 * kPi;
    }
    return 0.0;
}

// Well minima r_L, r_M, r_R.
inline double well_center(int well) { return (well - 1) * kPi; }

struct GridSpec {
    double x_min = 0.0;
    double x_max = 0.0;
    int n_points = 0;

    GridSpec() = default;
    GridSpec(double lo, double hi, int n) : x_min(lo), x_max(hi), n_points(n) {
        if (!(x_min < x_max)) throw config_error("GridSpec: x_min must be < x_max");
        if (n_points < 8) throw config_error("GridSpec: need n_points >= 8");
    }

    static GridSpec for_domain(Domain d, int n) {
        return GridSpec(domain_x_min(d), domain_x_max(d), n);
    }

    double spacing() const { return (x_max - x_min) / (n_points + 1); }
    double length() const { return x_max - x_min; }
    // x_k = x_min + (k+1)*dx for k in [0, n_points)
    double point(int k) const { return x_min + (k + 1) * spacing(); }

    Eigen::VectorXd points() const {
        Eigen::VectorXd x(n_points);
        for (int k = 0; k < n_points; ++k) x[k] = point(k);
        return x;
    }

    bool operator==(const GridSpec& o) const {
        return x_min == o.x_min && x_max == o.x_max && n_points == o.n_points;
    }
};

// Sub-well grids embed exactly into the full grid when
// n_full = 3*n_sub + 2: the sub-well boundaries +-pi/2 then coincide with
// full-grid points (where hard-walled sub-well states vanish) and every
// interior sub-well point is a full-grid point.
inline int aligned_full_points(int n_sub) { return 3 * n_sub + 2; }

// Index of the first full-grid point of a sub-well (0=L,1=M,2=R),
// for an aligned pair of grids.
inline int subwell_offset(int well, int n_sub) { return well * (n_sub + 1); }

struct PotentialSpec {
    double depth = 0.0;   // V0
    double tilt = 0.0;    // slope of the linear tilt, 0 for untilted
    Domain domain = Domain::FullTriple;

    PotentialSpec() = default;
    PotentialSpec(double v0, double slope = 0.0, Domain d = Domain::FullTriple)
        : depth(v0), tilt(slope), domain(d) {
        if (!(depth > 0.0)) throw config_error("PotentialSpec: V0 must be positive");
    }

    std::string describe() const {
        std::ostringstream os;
        os << domain_name(domain) << " V0=" << depth << " tilt=" << tilt;
        return os.str();
    }
};

// V(x_k) = V0 sin^2(x_k) + tilt*x_k on the interior points.
// The grid must cover exactly the domain named by the spec.
inline Eigen::VectorXd evaluate_potential(const PotentialSpec& spec, const GridSpec& grid) {
    const double tol = 1e-12;
    if (std::abs(grid.x_min - domain_x_min(spec.domain)) > tol ||
        std::abs(grid.x_max - domain_x_max(spec.domain)) > tol) {
        throw config_error("evaluate_potential: grid does not cover domain " +
                           std::string(domain_name(spec.domain)));
    }
    Eigen::VectorXd v(grid.n_points);
    for (int k = 0; k < grid.n_points; ++k) {
        const double x = grid.point(k);
        const double s = std::sin(x);
        v[k] = spec.depth * s * s + spec.tilt * x;
    }
    return v;
}

enum class KineticScheme { FiniteDifference, SineDvr };

// One-body kinetic matrix -(1/2) d^2/dx^2 with hard walls.
//
// FiniteDifference: second-order central stencil, tridiagonal.
// SineDvr: sine discrete-variable representation on the same interior
// points; dense but spectrally accurate (box spectrum reproduced exactly).
inline Eigen::MatrixXd kinetic_operator(const GridSpec& grid,
                                        KineticScheme scheme = KineticScheme::FiniteDifference) {
    const int n = grid.n_points;
    const double dx = grid.spacing();
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
    if (scheme == KineticScheme::FiniteDifference) {
        const double d = 1.0 / (dx * dx);
        for (int k = 0; k < n; ++k) {
            t(k, k) = d;
            if (k + 1 < n) {
                t(k, k + 1) = -0.5 * d;
                t(k + 1, k) = -0.5 * d;
            }
        }
        return t;
    }
    // Sine DVR for a box of n interior points; np1 = n+1 grid cells.
    const int np1 = n + 1;
    const double L = grid.length();
    const double pref = 0.5 * kPi * kPi / (2.0 * L * L);
    for (int j = 1; j <= n; ++j) {
        for (int k = j; k <= n; ++k) {
            double val;
            if (j == k) {
                const double s = std::sin(kPi * j / np1);
                val = pref * ((2.0 * np1 * np1 + 1.0) / 3.0 - 1.0 / (s * s));
            } else {
                const double sm = std::sin(kPi * (j - k) / (2.0 * np1));
                const double sp = std::sin(kPi * (j + k) / (2.0 * np1));
                val = pref * ((j - k) % 2 == 0 ? 1.0 : -1.0) *
                      (1.0 / (sm * sm) - 1.0 / (sp * sp));
            }
            t(j - 1, k - 1) = val;
            t(k - 1, j - 1) = val;
        }
    }
    return t;
}

// h = T + diag(V); symmetric by construction.
inline Eigen::MatrixXd one_body_hamiltonian(const PotentialSpec& pot, const GridSpec& grid,
                                            KineticScheme scheme = KineticScheme::FiniteDifference) {
    Eigen::MatrixXd h = kinetic_operator(grid, scheme);
    h.diagonal() += evaluate_potential(pot, grid);
    return h;
}

}  // namespace triwell

#endif
