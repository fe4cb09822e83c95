#ifndef TRIWELL_LANCZOS_HPP
#define TRIWELL_LANCZOS_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <sstream>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "triwell/common.hpp"

// Krylov machinery shared by the eigensolvers and the time propagator.
// All operators are real symmetric; with a complex start vector the Lanczos
// recurrence still produces a real tridiagonal matrix, so complex
// application is done on the real and imaginary parts separately.

namespace triwell {

namespace krylov {

inline Eigen::VectorXd apply(const Eigen::SparseMatrix<double>& h, const Eigen::VectorXd& v) {
    return h * v;
}
inline Eigen::VectorXd apply(const Eigen::MatrixXd& h, const Eigen::VectorXd& v) { return h * v; }

template <class Op>
Eigen::VectorXcd apply_c(const Op& h, const Eigen::VectorXcd& v) {
    Eigen::VectorXcd out(v.size());
    out.real() = apply(h, Eigen::VectorXd(v.real()));
    out.imag() = apply(h, Eigen::VectorXd(v.imag()));
    return out;
}

inline Eigen::VectorXd deterministic_start(Eigen::Index dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v[i] = gauss(rng);
    v.normalize();
    return v;
}

}  // namespace krylov

struct EigenPairs {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;  // column i pairs with values[i]
    int iterations = 0;
    double max_residual = 0.0;
};

// Lowest k eigenpairs of a real symmetric operator by Lanczos with full
// reorthogonalization. The subspace grows until the k candidate pairs pass
// an explicit residual check ||H x - lambda x|| <= tol * scale. Throws
// numerical_error with iteration diagnostics if the subspace cap is reached
// without convergence.
template <class Op>
EigenPairs lowest_eigenpairs(const Op& h, int k, double tol = 1e-10,
                             std::uint64_t seed = 0x5eed, int m_cap = 0) {
    const Eigen::Index dim = h.rows();
    if (k < 1 || k > dim) throw config_error("lowest_eigenpairs: bad k");
    if (m_cap <= 0) m_cap = static_cast<int>(std::min<Eigen::Index>(dim, std::max(420, 10 * k)));
    m_cap = static_cast<int>(std::min<Eigen::Index>(m_cap, dim));

    std::vector<Eigen::VectorXd> basis;
    basis.reserve(m_cap);
    std::vector<double> alpha, beta;
    basis.push_back(krylov::deterministic_start(dim, seed));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    double scale = 1.0;
    EigenPairs out;
    auto try_extract = [&](int m, double b_last) -> bool {
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) {
            t(i, i) = alpha[i];
            if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[i];
        }
        es.compute(t);
        double bound = 0.0;
        for (int i = 0; i < k; ++i)
            bound = std::max(bound, b_last * std::abs(es.eigenvectors()(m - 1, i)));
        if (bound > tol * scale && m < static_cast<int>(dim)) return false;
        out.values = es.eigenvalues().head(k);
        out.vectors = Eigen::MatrixXd::Zero(dim, k);
        for (int i = 0; i < k; ++i)
            for (int q = 0; q < m; ++q) out.vectors.col(i) += es.eigenvectors()(q, i) * basis[q];
        out.max_residual = 0.0;
        for (int i = 0; i < k; ++i) {
            out.vectors.col(i).normalize();
            const Eigen::VectorXd r =
                krylov::apply(h, Eigen::VectorXd(out.vectors.col(i))) - out.values[i] * out.vectors.col(i);
            out.max_residual = std::max(out.max_residual, r.norm());
            int imax = 0;
            out.vectors.col(i).cwiseAbs().maxCoeff(&imax);
            if (out.vectors(imax, i) < 0.0) out.vectors.col(i) *= -1.0;
        }
        out.iterations = m;
        if (out.max_residual > 20.0 * tol * scale && m < static_cast<int>(dim)) return false;
        return true;
    };

    for (int j = 0; j < m_cap; ++j) {
        Eigen::VectorXd w = krylov::apply(h, basis[j]);
        const double a = basis[j].dot(w);
        alpha.push_back(a);
        scale = std::max(scale, std::abs(a));
        w -= a * basis[j];
        if (j > 0 && beta[j - 1] != 0.0) w -= beta[j - 1] * basis[j - 1];
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& q : basis) w -= q.dot(w) * q;
        const double b = w.norm();
        const int m = j + 1;
        const bool breakdown = b < 1e-13 * scale;

        if (m >= k && (breakdown || m == m_cap || m % 10 == 0)) {
            if (try_extract(m, breakdown ? 0.0 : b)) return out;
        }
        if (m == m_cap) break;
        if (breakdown) {
            Eigen::VectorXd v =
                krylov::deterministic_start(dim, seed + 0x9e3779b97f4a7c15ULL * (j + 1));
            for (int pass = 0; pass < 2; ++pass)
                for (const auto& q : basis) v -= q.dot(v) * q;
            if (v.norm() < 1e-10) break;  // space exhausted
            v.normalize();
            beta.push_back(0.0);
            basis.push_back(v);
        } else {
            beta.push_back(b);
            basis.push_back(w / b);
        }
    }
    std::ostringstream os;
    os << "lowest_eigenpairs: no convergence for k=" << k << " after " << basis.size()
       << " Lanczos vectors (dim=" << dim << ", tol=" << tol << ")";
    throw numerical_error(os.str());
}

struct PropagationStats {
    int steps = 0;
    int matvecs = 0;
    double smallest_dt = 0.0;
};

// Short-iterative Lanczos propagation of psi over `span`:
//   real time:       psi <- exp(-i H span) psi
//   imaginary time:  psi <- exp(-H span) psi, renormalized to unit norm.
// Adaptive substeps controlled by the last-component local error estimate
// against `tol` per step; step-size underflow raises a stiffness error.
template <class Op>
PropagationStats krylov_propagate(const Op& h, Eigen::VectorXcd& psi, double span,
                                  bool imaginary_time = false, double tol = 1e-9, int m = 30) {
    using cd = std::complex<double>;
    const Eigen::Index dim = h.rows();
    m = static_cast<int>(std::min<Eigen::Index>(m, dim));
    PropagationStats stats;
    if (span == 0.0) return stats;
    const double direction = span < 0.0 ? -1.0 : 1.0;
    double remaining = std::abs(span);
    double dt = remaining;

    Eigen::MatrixXcd basis(dim, m + 1);
    Eigen::VectorXd alpha(m), beta(m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;

    while (remaining > 1e-15 * std::abs(span)) {
        const double nrm = psi.norm();
        if (nrm < 1e-300) throw numerical_error("krylov_propagate: state vanished");
        basis.col(0) = psi / nrm;
        int built = 0;
        bool invariant = false;
        for (int j = 0; j < m; ++j) {
            Eigen::VectorXcd w = krylov::apply_c(h, Eigen::VectorXcd(basis.col(j)));
            ++stats.matvecs;
            const double a = std::real(basis.col(j).dot(w));
            alpha[j] = a;
            w -= cd(a) * basis.col(j);
            if (j > 0) w -= cd(beta[j - 1]) * basis.col(j - 1);
            for (int q = 0; q <= j; ++q) w -= basis.col(q).dot(w) * basis.col(q);
            const double b = w.norm();
            beta[j] = b;
            built = j + 1;
            if (b < 1e-13 * std::max(1.0, std::abs(a))) {
                invariant = true;
                break;
            }
            basis.col(j + 1) = w / b;
        }
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(built, built);
        for (int i = 0; i < built; ++i) {
            t(i, i) = alpha[i];
            if (i + 1 < built) t(i, i + 1) = t(i + 1, i) = beta[i];
        }
        es.compute(t);
        const Eigen::VectorXd& theta = es.eigenvalues();
        const Eigen::MatrixXd& s = es.eigenvectors();
        const bool exact = invariant || built == static_cast<int>(dim);

        for (;;) {
            const double step = std::min(dt, remaining);
            Eigen::VectorXcd coef = s.row(0).transpose().cast<cd>();
            for (int i = 0; i < built; ++i) {
                if (imaginary_time)
                    coef[i] *= std::exp(-(theta[i] - theta[0]) * step);
                else
                    coef[i] *= std::exp(cd(0.0, -direction * theta[i] * step));
            }
            const Eigen::VectorXcd amp = s.cast<cd>() * coef;
            const double err = exact ? 0.0 : beta[built - 1] * std::abs(amp[built - 1]);
            if (err <= tol) {
                psi = nrm * (basis.leftCols(built) * amp);
                if (imaginary_time) {
                    const double nn = psi.norm();
                    if (nn < 1e-300) throw numerical_error("krylov_propagate: damped to zero");
                    psi /= nn;
                }
                remaining -= step;
                ++stats.steps;
                stats.smallest_dt =
                    stats.smallest_dt == 0.0 ? step : std::min(stats.smallest_dt, step);
                if (err < 0.05 * tol) dt = step * 1.5;
                break;
            }
            if (step <= 1e-13 * std::abs(span)) {
                std::ostringstream os;
                os << "krylov_propagate: step size underflow (dt=" << step << ", local error "
                   << err << " > tol " << tol << ", krylov dim " << built
                   << ") -- system too stiff for this tolerance";
                throw numerical_error(os.str());
            }
            dt = 0.5 * step;
        }
    }
    return stats;
}

}  // namespace triwell

#endif
