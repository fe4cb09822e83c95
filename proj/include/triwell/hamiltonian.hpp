#ifndef TRIWELL_HAMILTONIAN_HPP
#define TRIWELL_HAMILTONIAN_HPP

#include <cmath>
#include <complex>
#include <memory>
#include <ostream>
#include <sstream>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "triwell/basis.hpp"
#include "triwell/common.hpp"
#include "triwell/grid.hpp"
#include "triwell/lanczos.hpp"
#include "triwell/single_particle.hpp"

// Many-body Hamiltonian of N contact-interacting bosons,
//   H = sum_j [ -(1/2) d^2/dx_j^2 + V(x_j) ] + g sum_{j<k} delta(x_j - x_k),
// assembled over a SymmetrizedBasis in one of two representations:
//   GRID: orbitals are grid points; the delta is the on-site weight 1/dx,
//         so a doubly occupied point contributes (g/dx) n(n-1)/2.
//   MODE: orbitals are trap eigenmodes; the interaction enters through the
//         two-body integrals g * int phi_a phi_b phi_c phi_d dx.

namespace triwell {

struct GridBackend {
    GridSpec grid;
    PotentialSpec potential;
    KineticScheme scheme = KineticScheme::FiniteDifference;
};

struct ModeBackend {
    std::shared_ptr<const SingleParticleSpectrum> spectrum;
    int n_modes = 0;

    ModeBackend() = default;
    ModeBackend(std::shared_ptr<const SingleParticleSpectrum> sp, int m)
        : spectrum(std::move(sp)), n_modes(m) {
        if (!spectrum) throw config_error("ModeBackend: null spectrum");
        if (n_modes < 1 || n_modes > spectrum->count())
            throw config_error("ModeBackend: n_modes exceeds available eigenmodes");
    }
};

class ManyBodyOperator {
  public:
    ManyBodyOperator() = default;
    ManyBodyOperator(std::shared_ptr<const SymmetrizedBasis> basis,
                     Eigen::SparseMatrix<double> mat)
        : basis_(std::move(basis)), mat_(std::move(mat)) {}

    const SymmetrizedBasis& basis() const { return *basis_; }
    std::shared_ptr<const SymmetrizedBasis> basis_ptr() const { return basis_; }
    const Eigen::SparseMatrix<double>& matrix() const { return mat_; }
    Eigen::Index rows() const { return mat_.rows(); }
    Eigen::Index nonzeros() const { return mat_.nonZeros(); }

    // MatrixMarket coordinate triplets (1-based), for debugging.
    void export_triplets(std::ostream& os) const {
        os << "%%MatrixMarket matrix coordinate real symmetric\n";
        os << mat_.rows() << " " << mat_.cols() << " ";
        Eigen::Index count = 0;
        for (int k = 0; k < mat_.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(mat_, k); it; ++it)
                if (it.row() >= it.col()) ++count;
        os << count << "\n";
        os.precision(17);
        for (int k = 0; k < mat_.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(mat_, k); it; ++it)
                if (it.row() >= it.col())
                    os << it.row() + 1 << " " << it.col() + 1 << " " << it.value() << "\n";
    }

  private:
    std::shared_ptr<const SymmetrizedBasis> basis_;
    Eigen::SparseMatrix<double> mat_;
};

struct ManyBodyState {
    std::shared_ptr<const SymmetrizedBasis> basis;
    Eigen::VectorXcd coeffs;
    double time = 0.0;

    double norm() const { return coeffs.norm(); }
    void normalize() {
        const double n = coeffs.norm();
        if (n < 1e-300) throw numerical_error("ManyBodyState: cannot normalize zero state");
        coeffs /= n;
    }
};

inline double expectation(const ManyBodyState& s, const ManyBodyOperator& op) {
    return std::real(s.coeffs.dot(krylov::apply_c(op.matrix(), s.coeffs)));
}

namespace detail {

// One-body part in an arbitrary orbital basis with one-body matrix h:
// diagonal sum h(s,s) n_s plus hops h(s,s') sqrt(n_s (n_s'+1)).
inline void assemble_one_body(const SymmetrizedBasis& basis, const Eigen::MatrixXd& h,
                              double hop_drop_tol,
                              std::vector<Eigen::Triplet<double>>& trip) {
    const int norb = basis.n_orbitals();
    std::vector<std::vector<int>> neighbors(norb);
    for (int s = 0; s < norb; ++s)
        for (int s2 = 0; s2 < norb; ++s2)
            if (s2 != s && std::abs(h(s, s2)) > hop_drop_tol) neighbors[s].push_back(s2);

    const auto dim = basis.dimension();
    Config c = basis.first_config();
    std::vector<int> occv(norb, 0);
    for (std::uint64_t ci = 0; ci < dim; ++ci) {
        const auto occ = SymmetrizedBasis::occupations(c);
        for (const auto& [s, m] : occ) occv[s] = m;
        double dia = 0.0;
        for (const auto& [s, m] : occ) dia += h(s, s) * m;
        trip.emplace_back(static_cast<int>(ci), static_cast<int>(ci), dia);
        for (const auto& [s, m] : occ) {
            for (int s2 : neighbors[s]) {
                Config cj = c;
                for (auto& v : cj)
                    if (v == s) {
                        v = s2;
                        break;
                    }
                std::sort(cj.begin(), cj.end());
                const double amp = h(s, s2) * std::sqrt(double(m) * (occv[s2] + 1));
                trip.emplace_back(static_cast<int>(basis.index_of(cj)), static_cast<int>(ci), amp);
            }
        }
        for (const auto& [s, m] : occ) occv[s] = 0;
        basis.next_config(c);
    }
}

}  // namespace detail

// GRID backend assembly. FiniteDifference keeps the one-body part
// tridiagonal (sparse many-body matrix); SineDvr yields a dense one-body
// block and is intended for the small sub-well problems.
inline ManyBodyOperator assemble_hamiltonian(std::shared_ptr<const SymmetrizedBasis> basis,
                                             const GridBackend& gb, double g) {
    if (g < 0.0) throw config_error("assemble_hamiltonian: repulsive regime only (g >= 0)");
    if (basis->n_orbitals() != gb.grid.n_points)
        throw config_error("assemble_hamiltonian: basis orbitals != grid points");
    const Eigen::MatrixXd h = one_body_hamiltonian(gb.potential, gb.grid, gb.scheme);
    std::vector<Eigen::Triplet<double>> trip;
    const std::size_t guess = static_cast<std::size_t>(basis->dimension()) *
                              (gb.scheme == KineticScheme::FiniteDifference
                                   ? (2 * basis->n_bosons() + 1)
                                   : (basis->n_bosons() * basis->n_orbitals() + 1));
    trip.reserve(guess);
    detail::assemble_one_body(*basis, h, 1e-300, trip);

    const double u = g / gb.grid.spacing();
    Config c = basis->first_config();
    for (std::uint64_t ci = 0; ci < basis->dimension(); ++ci) {
        double dia = 0.0;
        for (const auto& [s, m] : SymmetrizedBasis::occupations(c))
            dia += 0.5 * u * m * (m - 1);
        if (dia != 0.0) trip.emplace_back(static_cast<int>(ci), static_cast<int>(ci), dia);
        basis->next_config(c);
    }
    Eigen::SparseMatrix<double> mat(static_cast<Eigen::Index>(basis->dimension()),
                                    static_cast<Eigen::Index>(basis->dimension()));
    mat.setFromTriplets(trip.begin(), trip.end());
    return ManyBodyOperator(std::move(basis), std::move(mat));
}

// Two-body contact integrals V_{abcd} = g * int phi_a phi_b phi_c phi_d dx
// over the first M real eigenmodes, evaluated by grid quadrature.
inline Eigen::VectorXd contact_integrals(const SingleParticleSpectrum& sp, int m_modes, double g) {
    const int n = sp.grid.n_points;
    const double dx = sp.grid.spacing();
    // flattened [a + M(b + M(c + M d))]; the full 4-index table is small
    Eigen::VectorXd v(static_cast<Eigen::Index>(m_modes) * m_modes * m_modes * m_modes);
    Eigen::MatrixXd w(n, m_modes);
    for (int a = 0; a < m_modes; ++a) w.col(a) = sp.orbitals.col(a);
    for (int a = 0; a < m_modes; ++a)
        for (int b = a; b < m_modes; ++b) {
            Eigen::VectorXd ab = w.col(a).cwiseProduct(w.col(b));
            for (int c2 = 0; c2 < m_modes; ++c2)
                for (int d2 = c2; d2 < m_modes; ++d2) {
                    if (c2 * m_modes + d2 < a * m_modes + b) continue;
                    const double val =
                        g * ab.dot(w.col(c2).cwiseProduct(w.col(d2))) / dx;
                    const auto set = [&](int i, int j, int k, int l) {
                        v[((i * m_modes + j) * m_modes + k) * m_modes + l] = val;
                    };
                    // all index symmetries of a real two-body contact element
                    set(a, b, c2, d2); set(b, a, c2, d2); set(a, b, d2, c2); set(b, a, d2, c2);
                    set(c2, d2, a, b); set(d2, c2, a, b); set(c2, d2, b, a); set(d2, c2, b, a);
                }
        }
    return v;
}

// MODE backend assembly: one-body part diagonal in the trap eigenmodes,
// interaction from contact_integrals with bosonic symmetrization factors.
inline ManyBodyOperator assemble_hamiltonian(std::shared_ptr<const SymmetrizedBasis> basis,
                                             const ModeBackend& mb, double g) {
    if (g < 0.0) throw config_error("assemble_hamiltonian: repulsive regime only (g >= 0)");
    const int m_modes = mb.n_modes;
    if (basis->n_orbitals() != m_modes)
        throw config_error("assemble_hamiltonian: basis orbitals != mode count");
    const auto& sp = *mb.spectrum;
    const Eigen::VectorXd vint = contact_integrals(sp, m_modes, g);
    const auto V = [&](int a, int b, int c, int d) {
        return vint[((a * m_modes + b) * m_modes + c) * m_modes + d];
    };

    const auto dim = basis->dimension();
    const int nmax = basis->n_orbitals();
    std::vector<Eigen::Triplet<double>> trip;
    std::vector<double> col(dim, 0.0);  // dense scratch per column
    std::vector<std::uint64_t> touched;
    Config c = basis->first_config();
    std::vector<int> occv(nmax, 0);
    for (std::uint64_t ci = 0; ci < dim; ++ci) {
        std::fill(occv.begin(), occv.end(), 0);
        for (int s : c) ++occv[s];
        touched.clear();

        double dia = 0.0;
        for (int s : c) dia += sp.energies[s];
        col[ci] += dia;
        touched.push_back(ci);

        // 1/2 sum_{abcd} V_abcd a+_a a+_b a_d a_c, (c,d) over ordered pairs of
        // distinct occupied orbitals (multiplicity sits in the sqrt factors)
        const auto occ = SymmetrizedBasis::occupations(c);
        for (const auto& [cc, mcc] : occ) {
            for (const auto& [dd, mdd] : occ) {
                const int ncc = mcc;
                const int ndd = mdd - (dd == cc ? 1 : 0);
                if (ndd <= 0) continue;
                const double f1 = std::sqrt(double(ncc) * ndd);
                --occv[cc];
                --occv[dd];
                for (int bb = 0; bb < m_modes; ++bb) {
                    const double f2b = std::sqrt(double(occv[bb] + 1));
                    ++occv[bb];
                    for (int aa = 0; aa < m_modes; ++aa) {
                        const double amp =
                            0.5 * V(aa, bb, cc, dd) * f1 * f2b * std::sqrt(double(occv[aa] + 1));
                        if (amp == 0.0) continue;
                        ++occv[aa];
                        Config tgt;
                        tgt.reserve(c.size());
                        for (int s = 0; s < nmax; ++s)
                            tgt.insert(tgt.end(), occv[s], s);
                        --occv[aa];
                        const std::uint64_t tj = basis->index_of(tgt);
                        if (col[tj] == 0.0) touched.push_back(tj);
                        col[tj] += amp;
                    }
                    --occv[bb];
                }
                ++occv[cc];
                ++occv[dd];
            }
        }
        for (std::uint64_t tj : touched) {
            if (col[tj] != 0.0)
                trip.emplace_back(static_cast<int>(tj), static_cast<int>(ci), col[tj]);
            col[tj] = 0.0;
        }
        basis->next_config(c);
    }
    Eigen::SparseMatrix<double> mat(static_cast<Eigen::Index>(dim),
                                    static_cast<Eigen::Index>(dim));
    mat.setFromTriplets(trip.begin(), trip.end());
    return ManyBodyOperator(std::move(basis), std::move(mat));
}

// One-body operator lifted to the many-body basis (used for projected
// number operators, artificial walls, and similar observables).
inline ManyBodyOperator lift_one_body(std::shared_ptr<const SymmetrizedBasis> basis,
                                      const Eigen::MatrixXd& h, double drop_tol = 1e-14) {
    if (basis->n_orbitals() != h.rows() || h.rows() != h.cols())
        throw config_error("lift_one_body: dimension mismatch");
    std::vector<Eigen::Triplet<double>> trip;
    detail::assemble_one_body(*basis, h, drop_tol, trip);
    Eigen::SparseMatrix<double> mat(static_cast<Eigen::Index>(basis->dimension()),
                                    static_cast<Eigen::Index>(basis->dimension()));
    mat.setFromTriplets(trip.begin(), trip.end());
    return ManyBodyOperator(std::move(basis), std::move(mat));
}

// One-body reduced density matrix <a+_m a_m'> in the orbital basis.
inline Eigen::MatrixXd one_body_density_matrix(const ManyBodyState& s) {
    const auto& basis = *s.basis;
    const int m = basis.n_orbitals();
    Eigen::MatrixXd rho = Eigen::MatrixXd::Zero(m, m);
    Config c = basis.first_config();
    std::vector<int> occv(m, 0);
    for (std::uint64_t ci = 0; ci < basis.dimension(); ++ci) {
        const std::complex<double> a = s.coeffs[ci];
        if (std::norm(a) > 1e-30) {
            std::fill(occv.begin(), occv.end(), 0);
            for (int v : c) ++occv[v];
            const auto occ = SymmetrizedBasis::occupations(c);
            for (const auto& [m2, cnt] : occ) {
                rho(m2, m2) += std::norm(a) * cnt;
                for (int m1 = 0; m1 < m; ++m1) {
                    if (m1 == m2) continue;
                    const double f = std::sqrt(double(cnt) * (occv[m1] + 1));
                    Config cj = c;
                    for (auto& v : cj)
                        if (v == m2) {
                            v = m1;
                            break;
                        }
                    std::sort(cj.begin(), cj.end());
                    const std::uint64_t tj = basis.index_of(cj);
                    rho(m1, m2) += std::real(std::conj(s.coeffs[tj]) * a) * f;
                }
            }
        }
        basis.next_config(c);
    }
    return rho;
}

// Parity in the grid representation: reflection maps grid point k to
// n-1-k, i.e. permutes configurations. Returns the permutation.
inline std::vector<std::uint64_t> parity_permutation(const SymmetrizedBasis& basis) {
    std::vector<std::uint64_t> perm(basis.dimension());
    const int n = basis.n_orbitals();
    Config c = basis.first_config();
    for (std::uint64_t ci = 0; ci < basis.dimension(); ++ci) {
        Config cj = c;
        for (auto& v : cj) v = n - 1 - v;
        std::sort(cj.begin(), cj.end());
        perm[ci] = basis.index_of(cj);
        basis.next_config(c);
    }
    return perm;
}

}  // namespace triwell

#endif
