#ifndef TRIWELL_PROPAGATE_HPP
#define TRIWELL_PROPAGATE_HPP

#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "triwell/common.hpp"
#include "triwell/grid.hpp"
#include "triwell/hamiltonian.hpp"
#include "triwell/lanczos.hpp"
#include "triwell/numberstate.hpp"

// State preparation, time propagation and the observables reported by the
// scenario runner: well populations, number-state probabilities, one-body
// densities and nodal diagnostics.

namespace triwell {

// Ground state by imaginary-time Krylov relaxation, to residual
// ||H psi - E psi|| < tol. Retries from fresh random directions when the
// flow stalls (e.g. a guess orthogonal to the ground state).
template <class Op>
ManyBodyState relax_ground_state(const Op& h, ManyBodyState guess, double tol = 1e-8,
                                 int max_sweeps = 400) {
    ManyBodyState psi = std::move(guess);
    psi.normalize();
    double tau = 0.1;
    double prev_res = 1e300;
    int stalls = 0;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        krylov_propagate(h, psi.coeffs, tau, true, 1e-12);
        const Eigen::VectorXcd hpsi = krylov::apply_c(h, psi.coeffs);
        const double e = std::real(psi.coeffs.dot(hpsi));
        const double res = (hpsi - e * psi.coeffs).norm();
        if (res < tol) return psi;
        if (res > 0.97 * prev_res) {
            if (++stalls >= 4) {
                // likely near-degenerate or orthogonal start; perturb
                psi.coeffs += 0.05 * krylov::deterministic_start(psi.coeffs.size(),
                                                                 0xabcdef12u + sweep)
                                         .cast<std::complex<double>>();
                psi.normalize();
                tau *= 2.0;
                stalls = 0;
            } else {
                tau *= 1.5;
            }
        }
        prev_res = res;
    }
    throw numerical_error("relax_ground_state: residual above tolerance after iteration cap");
}

// Exact propagation by one-time dense diagonalization; the method of choice
// for mode-basis Hamiltonians, whose dimensions stay in the thousands.
class SpectralPropagator {
  public:
    explicit SpectralPropagator(const ManyBodyOperator& h) : basis_(h.basis_ptr()) {
        Eigen::MatrixXd dense(h.matrix());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
        if (es.info() != Eigen::Success)
            throw numerical_error("SpectralPropagator: dense diagonalization failed");
        values_ = es.eigenvalues();
        vectors_ = es.eigenvectors();
    }

    const Eigen::VectorXd& eigenvalues() const { return values_; }
    const Eigen::MatrixXd& eigenvectors() const { return vectors_; }

    // psi(t0 + dt) from psi(t0)
    ManyBodyState advance(const ManyBodyState& psi, double dt) const {
        ManyBodyState out = psi;
        Eigen::VectorXcd c = vectors_.transpose() * psi.coeffs;
        for (Eigen::Index i = 0; i < c.size(); ++i)
            c[i] *= std::exp(std::complex<double>(0.0, -values_[i] * dt));
        out.coeffs = vectors_ * c;
        out.time = psi.time + dt;
        return out;
    }

    // spectral weights |<E_i|psi>|^2
    Eigen::VectorXd weights(const ManyBodyState& psi) const {
        return (vectors_.transpose() * psi.coeffs).cwiseAbs2();
    }

  private:
    std::shared_ptr<const SymmetrizedBasis> basis_;
    Eigen::VectorXd values_;
    Eigen::MatrixXd vectors_;
};

// Unitary propagation sampled every dt_out; the callback sees the state at
// each sample (including t=0). Uses the adaptive short-iterative Krylov
// propagator; set `spectral` to use an eigendecomposition instead.
template <class Op>
void evolve(ManyBodyState& psi, const Op& h, double t_final, double dt_out,
            const std::function<void(const ManyBodyState&)>& observe, double tol = 1e-9,
            int krylov_m = 30, const SpectralPropagator* spectral = nullptr) {
    if (!(t_final > 0.0) || !(dt_out > 0.0))
        throw config_error("evolve: need positive horizon and sampling interval");
    observe(psi);
    const int n_out = static_cast<int>(std::ceil(t_final / dt_out - 1e-9));
    for (int i = 1; i <= n_out; ++i) {
        const double target = std::min(i * dt_out, t_final);
        if (spectral) {
            psi = spectral->advance(psi, target - psi.time);
        } else {
            krylov_propagate(h, psi.coeffs, target - psi.time, false, tol, krylov_m);
            psi.time = target;
        }
        observe(psi);
    }
}

// ---------------------------------------------------------------------------
// Observables

// Spatial context needed to turn basis-space states into x-space output.
struct ObservationContext {
    GridSpec grid;                                        // full domain
    std::shared_ptr<const SingleParticleSpectrum> modes;  // null for grid states

    static ObservationContext for_grid(const GridSpec& g) { return {g, nullptr}; }
    static ObservationContext for_modes(std::shared_ptr<const SingleParticleSpectrum> sp) {
        return {sp->grid, std::move(sp)};
    }
};

// One-body density rho(x_k), normalized so that sum rho * dx = N.
inline Eigen::VectorXd one_body_density(const ManyBodyState& s, const ObservationContext& ctx) {
    const double dx = ctx.grid.spacing();
    if (!ctx.modes) {
        if (s.basis->n_orbitals() != ctx.grid.n_points)
            throw config_error("one_body_density: state/grid mismatch");
        Eigen::VectorXd occ = Eigen::VectorXd::Zero(ctx.grid.n_points);
        Config c = s.basis->first_config();
        for (std::uint64_t ci = 0; ci < s.basis->dimension(); ++ci) {
            const double w = std::norm(s.coeffs[ci]);
            if (w > 1e-28)
                for (int v : c) occ[v] += w;
            s.basis->next_config(c);
        }
        return occ / dx;
    }
    const Eigen::MatrixXd rho_mm = one_body_density_matrix(s);
    const int m = s.basis->n_orbitals();
    Eigen::VectorXd out(ctx.grid.n_points);
    for (int k = 0; k < ctx.grid.n_points; ++k) {
        double acc = 0.0;
        for (int a = 0; a < m; ++a) {
            const double va = ctx.modes->orbitals(k, a);
            acc += rho_mm(a, a) * va * va;
            for (int b = a + 1; b < m; ++b)
                acc += 2.0 * rho_mm(a, b) * va * ctx.modes->orbitals(k, b);
        }
        out[k] = acc / dx;
    }
    return out;
}

// Boson count in each third of the domain (boundaries at +-pi/2).
inline std::array<double, 3> well_populations(const ManyBodyState& s,
                                              const ObservationContext& ctx) {
    const Eigen::VectorXd rho = one_body_density(s, ctx);
    std::array<double, 3> n{0.0, 0.0, 0.0};
    const double dx = ctx.grid.spacing();
    for (int k = 0; k < ctx.grid.n_points; ++k) {
        const double x = ctx.grid.point(k);
        const int w = x < -kPi / 2 ? 0 : (x > kPi / 2 ? 2 : 1);
        n[w] += rho[k] * dx;
    }
    return n;
}

// Squared overlaps |<ref|psi>|^2 against a tracked set of states.
inline std::vector<double> number_state_overlaps(const ManyBodyState& s,
                                                 const std::vector<ManyBodyState>& tracked) {
    std::vector<double> p;
    p.reserve(tracked.size());
    for (const auto& t : tracked) {
        if (t.basis != s.basis && t.basis->dimension() != s.basis->dimension())
            throw config_error("number_state_overlaps: basis mismatch");
        p.push_back(std::norm(t.coeffs.dot(s.coeffs)));
    }
    return p;
}

struct NodeCount {
    int nodes = 0;
    bool low_population = false;
};

// Interior density minima in one well that drop below floor * local max,
// excluding the zeros pinned at the hard walls. Finite ensembles produce
// near-nodes rather than exact zeros, hence the relative floor.
inline NodeCount count_nodes_in_well(const Eigen::VectorXd& rho, const GridSpec& grid, int well,
                                     double floor = 0.1) {
    const double lo = -1.5 * kPi + well * kPi;
    const double hi = lo + kPi;
    std::vector<int> idx;
    for (int k = 0; k < grid.n_points; ++k)
        if (grid.point(k) > lo && grid.point(k) < hi) idx.push_back(k);
    if (idx.size() < 5) throw config_error("count_nodes_in_well: grid too coarse");
    double peak = 0.0;
    for (int k : idx) peak = std::max(peak, rho[k]);
    NodeCount out;
    if (peak < 1e-6) {
        out.low_population = true;
        return out;
    }
    const double cut = floor * peak;
    for (std::size_t j = 1; j + 1 < idx.size(); ++j) {
        const double prev = rho[idx[j - 1]], cur = rho[idx[j]], next = rho[idx[j + 1]];
        if (cur < cut && cur <= prev && cur < next) ++out.nodes;
    }
    return out;
}

// Localized initial state: the N-boson ground state of one hard-walled
// sub-well, embedded into the target basis. For a grid target the embedding
// is exact; for a mode target it is the leakage-checked projection.
inline ManyBodyState prepare_localized_state(NumberStateSolver& solver, int well, int n_bosons,
                                             double g,
                                             std::shared_ptr<const SymmetrizedBasis> target,
                                             const SingleParticleSpectrum* modes = nullptr,
                                             double leakage_threshold = 1e-2,
                                             double* leakage_out = nullptr) {
    NumberStateLabel label;
    label.occupation = {0, 0, 0};
    label.occupation[well] = n_bosons;
    label.excitation = 0;
    const ExcitationTuple tuple{0, 0, 0};
    if (!modes) {
        if (leakage_out) *leakage_out = 0.0;
        return solver.assemble_from_tuple(label, tuple, g, std::move(target));
    }
    auto [state, leak] =
        solver.project_to_modes(label, tuple, g, *modes, std::move(target), leakage_threshold);
    if (leakage_out) *leakage_out = leak;
    return state;
}

// ---------------------------------------------------------------------------
// Recorded series and emission

struct ObservableSeries {
    std::vector<double> times;
    std::vector<std::array<double, 3>> populations;
    std::vector<std::string> tracked_labels;
    std::vector<std::vector<double>> tracked_probs;  // [sample][label]
    std::vector<double> completeness;                // 1 - sum of tracked

    void record(const ManyBodyState& s, const ObservationContext& ctx,
                const std::vector<ManyBodyState>& tracked) {
        times.push_back(s.time);
        populations.push_back(well_populations(s, ctx));
        const auto p = number_state_overlaps(s, tracked);
        double total = 0.0;
        for (double v : p) total += v;
        tracked_probs.push_back(p);
        completeness.push_back(1.0 - total);
    }
};

inline void write_observables_csv(const ObservableSeries& series, std::ostream& os,
                                  const std::vector<std::pair<std::string, std::string>>& meta) {
    for (const auto& [k, v] : meta) os << "# " << k << " = " << v << "\n";
    os << "time,n_L,n_M,n_R";
    for (std::string l : series.tracked_labels) {
        for (auto& ch : l)
            if (ch == ',') ch = '.';  // keep the column header CSV-clean
        os << ",p" << l;
    }
    os << ",completeness\n";
    os.precision(12);
    for (std::size_t i = 0; i < series.times.size(); ++i) {
        os << series.times[i] << "," << series.populations[i][0] << ","
           << series.populations[i][1] << "," << series.populations[i][2];
        for (double p : series.tracked_probs[i]) os << "," << p;
        os << "," << series.completeness[i] << "\n";
    }
}

inline void write_density_csv(const Eigen::VectorXd& rho, const GridSpec& grid, double t,
                              std::ostream& os,
                              const std::vector<std::pair<std::string, std::string>>& meta) {
    for (const auto& [k, v] : meta) os << "# " << k << " = " << v << "\n";
    os << "# t = " << t << "\n";
    os << "x,rho\n";
    os.precision(12);
    for (int k = 0; k < grid.n_points; ++k) os << grid.point(k) << "," << rho[k] << "\n";
}

}  // namespace triwell

#endif
