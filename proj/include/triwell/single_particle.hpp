#ifndef TRIWELL_SINGLE_PARTICLE_HPP
#define TRIWELL_SINGLE_PARTICLE_HPP

#include <array>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "triwell/common.hpp"
#include "triwell/grid.hpp"

// One-body eigenproblem, Wannier levels and the lowest-band hopping J.
//
// Wannier level i of well w is the i-th eigenstate of the hard-walled
// sub-well problem; for the untilted sin^2 potential the three sub-wells
// are exact translates of each other, so these on-site energies coincide
// across wells. The residual left/right vs middle asymmetry of the *full*
// trap (the outer wells lean on a hard wall, the middle one on two
// barriers) shows up in the band triplets instead and is reported as a
// per-band edge offset from a three-site tight-binding fit.

namespace triwell {

struct SingleParticleSpectrum {
    Eigen::VectorXd energies;   // ascending
    Eigen::MatrixXd orbitals;   // column j: lattice-orthonormal eigenvector
    GridSpec grid;
    PotentialSpec potential;
    KineticScheme scheme = KineticScheme::FiniteDifference;

    int count() const { return static_cast<int>(energies.size()); }

    // Physical wavefunction value psi_j(x_k) = orbitals(k,j)/sqrt(dx).
    double wave(int j, int k) const { return orbitals(k, j) / std::sqrt(grid.spacing()); }
};

// Lowest k eigenpairs of kinetic + potential on the given grid.
// Columns are lattice-orthonormal; sign fixed so the largest-magnitude
// component is positive (keeps runs bit-reproducible).
inline SingleParticleSpectrum solve_spectrum(const GridSpec& grid, const PotentialSpec& pot,
                                             int k,
                                             KineticScheme scheme = KineticScheme::FiniteDifference) {
    if (k < 1 || k > grid.n_points)
        throw config_error("solve_spectrum: need 1 <= k <= n_points");
    Eigen::MatrixXd h = one_body_hamiltonian(pot, grid, scheme);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    if (es.info() != Eigen::Success)
        throw numerical_error("solve_spectrum: dense eigensolver failed on dim " +
                              std::to_string(grid.n_points));
    SingleParticleSpectrum out;
    out.energies = es.eigenvalues().head(k);
    out.orbitals = es.eigenvectors().leftCols(k);
    out.grid = grid;
    out.potential = pot;
    out.scheme = scheme;
    for (int j = 0; j < k; ++j) {
        int imax = 0;
        out.orbitals.col(j).cwiseAbs().maxCoeff(&imax);
        if (out.orbitals(imax, j) < 0.0) out.orbitals.col(j) = -out.orbitals.col(j);
    }
    return out;
}

struct WannierLevels {
    // epsilon[well][band], well in {0=L,1=M,2=R}; bands 0..2 are the working
    // Wannier levels, the 4th entry only serves the band-gap diagnostics
    std::array<std::array<double, 4>, 3> epsilon{};
    double hopping_J = 0.0;       // (E_max - E_min)/4 of the lowest triplet
    double fit_residual = 0.0;    // spacing asymmetry of the triplet
    // Per-band edge offset delta_i = eps_outer - eps_middle of the full trap,
    // from the exactly determined 3-site tight-binding fit.
    std::array<double, 3> edge_offset{};
    std::array<double, 3> band_width{};
    std::array<double, 3> band_centroid{};
    int bound_levels = 0;         // sub-well levels below the barrier top V0
    double depth = 0.0;
    double tilt = 0.0;

    double band_gap(int i) const { return epsilon[1][i + 1] - epsilon[1][i]; }
};

namespace detail {
inline int default_subwell_points() { return 41; }
inline int default_full_points() { return aligned_full_points(default_subwell_points()); }
}  // namespace detail

// Sub-well Wannier energies plus full-trap band analysis.
//
// J is extracted from the lowest full-domain triplet as (E2-E0)/4 and the
// fit residual |(E2-E1)-(E1-E0)|/(E2-E0) quantifies how far the triplet is
// from the symmetric tight-binding spacing. The per-band tight-binding fit
//   eps, eps+delta on-site, hopping J_i
// is exactly determined by the three band energies:
//   delta = 2*E_mid - E_lo - E_hi,  J_i = sqrt((E_hi-E_lo)^2/4 - delta^2/4)/sqrt(2).
inline WannierLevels wannier_analysis(double v0, double tilt = 0.0,
                                      int n_sub = detail::default_subwell_points(),
                                      KineticScheme scheme = KineticScheme::FiniteDifference) {
    WannierLevels out;
    out.depth = v0;
    out.tilt = tilt;

    // The three sub-well problems are translates of one well with the same
    // local tilt slope; well w only adds the constant tilt*r_w.
    const GridSpec sub = GridSpec::for_domain(Domain::SubWellMiddle, n_sub);
    const PotentialSpec local(v0, tilt, Domain::SubWellMiddle);
    const SingleParticleSpectrum sp = solve_spectrum(sub, local, 4, scheme);
    for (int w = 0; w < 3; ++w)
        for (int b = 0; b < 4; ++b)
            out.epsilon[w][b] = sp.energies[b] + tilt * well_center(w);
    out.bound_levels = 0;
    for (int b = 0; b < 4; ++b)
        if (sp.energies[b] < v0) ++out.bound_levels;

    const GridSpec full = GridSpec::for_domain(Domain::FullTriple, aligned_full_points(n_sub));
    const PotentialSpec pot(v0, tilt, Domain::FullTriple);
    const SingleParticleSpectrum bands = solve_spectrum(full, pot, 9, scheme);
    const auto& e = bands.energies;
    out.hopping_J = (e[2] - e[0]) / 4.0;
    out.fit_residual = std::abs((e[2] - e[1]) - (e[1] - e[0])) / (e[2] - e[0]);
    for (int b = 0; b < 3; ++b) {
        const double lo = e[3 * b], mid = e[3 * b + 1], hi = e[3 * b + 2];
        out.band_width[b] = hi - lo;
        out.band_centroid[b] = (lo + mid + hi) / 3.0;
        out.edge_offset[b] = 2.0 * mid - lo - hi;
    }
    return out;
}

// Interaction-energy scale of the lowest Wannier orbital, U0 = g*int |w0|^4.
inline double onsite_interaction_u0(double g, double v0,
                                    int n_sub = detail::default_subwell_points(),
                                    KineticScheme scheme = KineticScheme::FiniteDifference) {
    const GridSpec sub = GridSpec::for_domain(Domain::SubWellMiddle, n_sub);
    const SingleParticleSpectrum sp =
        solve_spectrum(sub, PotentialSpec(v0, 0.0, Domain::SubWellMiddle), 1, scheme);
    const double dx = sub.spacing();
    double acc = 0.0;
    for (int k = 0; k < sub.n_points; ++k) {
        const double w = sp.wave(0, k);
        acc += w * w * w * w;
    }
    return g * acc * dx;
}

struct CalibrationRecord {
    double v0 = 0.0;
    double target_J = 0.0;
    double achieved_J = 0.0;
    int bound_levels = 0;
    std::array<double, 3> band_energies{};  // sub-well eps_i at the calibrated depth
};

// Bisection on the strictly decreasing J(V0) curve, then verification that
// the depth binds the requested number of sub-well levels below the barrier
// top. Fails with the achievable frontier spelled out, because the two
// constraints pull V0 in opposite directions.
inline CalibrationRecord calibrate_depth(double target_J, int bands_required,
                                         double v0_lo = 15.0, double v0_hi = 45.0,
                                         int n_sub = detail::default_subwell_points()) {
    if (!(target_J > 0.0)) throw config_error("calibrate_depth: target_J must be positive");
    if (bands_required < 1) throw config_error("calibrate_depth: bands_required must be >= 1");

    auto J_of = [&](double v0) { return wannier_analysis(v0, 0.0, n_sub).hopping_J; };

    double Jlo = J_of(v0_lo);  // J decreases with depth: J(v0_lo) is the max
    double Jhi = J_of(v0_hi);
    auto frontier = [&](std::ostringstream& os) {
        // Shallowest depth satisfying the bands constraint, and the J there.
        double a = 3.0, b = v0_hi;
        for (int it = 0; it < 60; ++it) {
            const double m = 0.5 * (a + b);
            if (wannier_analysis(m, 0.0, n_sub).bound_levels >= bands_required)
                b = m;
            else
                a = m;
        }
        const auto wl = wannier_analysis(b, 0.0, n_sub);
        os << " achievable frontier: bands>=" << bands_required << " first holds at V0="
           << b << " where J=" << wl.hopping_J << "; larger J requires shallower wells "
           << "with fewer bound levels";
    };

    if (target_J > Jlo || target_J < Jhi) {
        std::ostringstream os;
        os << "calibrate_depth: target_J=" << target_J << " outside achievable range ["
           << Jhi << ", " << Jlo << "] for V0 in [" << v0_lo << ", " << v0_hi << "];";
        frontier(os);
        throw calibration_error(os.str());
    }
    double a = v0_lo, b = v0_hi;
    for (int it = 0; it < 60; ++it) {
        const double m = 0.5 * (a + b);
        if (J_of(m) > target_J)
            a = m;
        else
            b = m;
    }
    const double v0 = 0.5 * (a + b);
    const auto wl = wannier_analysis(v0, 0.0, n_sub);
    if (std::abs(wl.hopping_J - target_J) > 0.01 * target_J) {
        std::ostringstream os;
        os << "calibrate_depth: bisection did not reach 1% of target_J (got "
           << wl.hopping_J << " vs " << target_J << ")";
        throw calibration_error(os.str());
    }
    if (wl.bound_levels < bands_required) {
        std::ostringstream os;
        os << "calibrate_depth: V0=" << v0 << " matches J=" << wl.hopping_J << " but binds only "
           << wl.bound_levels << " sub-well level(s) below the barrier (need " << bands_required
           << ");";
        frontier(os);
        throw calibration_error(os.str());
    }
    CalibrationRecord rec;
    rec.v0 = v0;
    rec.target_J = target_J;
    rec.achieved_J = wl.hopping_J;
    rec.bound_levels = wl.bound_levels;
    for (int b2 = 0; b2 < 3; ++b2) rec.band_energies[b2] = wl.epsilon[1][b2];
    return rec;
}

// Key-value text record consumed by run configs.
inline void write_calibration_record(const CalibrationRecord& rec, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw config_error("cannot write calibration record: " + path);
    os.precision(15);
    os << "V0 = " << rec.v0 << "\n"
       << "target_J = " << rec.target_J << "\n"
       << "J = " << rec.achieved_J << "\n"
       << "bound_levels = " << rec.bound_levels << "\n"
       << "eps0 = " << rec.band_energies[0] << "\n"
       << "eps1 = " << rec.band_energies[1] << "\n"
       << "eps2 = " << rec.band_energies[2] << "\n";
}

inline CalibrationRecord read_calibration_record(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw config_error("cannot read calibration record: " + path);
    CalibrationRecord rec;
    std::string line;
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string key, eq;
        double val;
        if (ls >> key >> eq >> val && eq == "=") {
            if (key == "V0") rec.v0 = val;
            else if (key == "target_J") rec.target_J = val;
            else if (key == "J") rec.achieved_J = val;
            else if (key == "bound_levels") rec.bound_levels = static_cast<int>(val);
            else if (key == "eps0") rec.band_energies[0] = val;
            else if (key == "eps1") rec.band_energies[1] = val;
            else if (key == "eps2") rec.band_energies[2] = val;
        }
    }
    return rec;
}

}  // namespace triwell

#endif
