#ifndef TRIWELL_BASIS_HPP
#define TRIWELL_BASIS_HPP

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "triwell/common.hpp"

// Symmetrized N-boson basis over M single-particle orbitals.
//
// A configuration is stored as the sorted orbital tuple (k_1 <= ... <= k_N).
// Enumeration order is lexicographic ascending on that tuple, which is
// descending lexicographic on occupation vectors. Rank and unrank use the
// combinatorial number system, so index <-> configuration is an exact
// bijection with no lookup tables.

namespace triwell {

using Config = std::vector<int>;

inline std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / i;
    return r;
}

class SymmetrizedBasis {
  public:
    static constexpr std::uint64_t kDefaultBudget = 4'000'000;

    SymmetrizedBasis(int n_bosons, int n_orbitals, std::uint64_t budget = kDefaultBudget)
        : n_(n_bosons), m_(n_orbitals) {
        if (n_ < 1) throw config_error("SymmetrizedBasis: need at least one boson");
        if (m_ < 1) throw config_error("SymmetrizedBasis: need at least one orbital");
        dim_ = binomial(m_ + n_ - 1, n_);
        if (dim_ > budget) {
            std::ostringstream os;
            os << "SymmetrizedBasis: dimension " << dim_ << " (N=" << n_ << ", M=" << m_
               << ") exceeds the memory budget of " << budget << " configurations";
            throw capacity_error(os.str());
        }
    }

    int n_bosons() const { return n_; }
    int n_orbitals() const { return m_; }
    std::uint64_t dimension() const { return dim_; }

    // Lexicographic rank of a sorted tuple. Maps through the strictly
    // increasing combination c_j = k_j + j over M + N - 1 symbols.
    std::uint64_t index_of(const Config& c) const {
        std::uint64_t rank = 0;
        int prev = -1;  // previous strict symbol
        const int symbols = m_ + n_ - 1;
        for (int j = 0; j < n_; ++j) {
            const int cj = c[j] + j;
            for (int v = prev + 1; v < cj; ++v)
                rank += binomial(symbols - 1 - v, n_ - 1 - j);
            prev = cj;
        }
        return rank;
    }

    Config config_at(std::uint64_t index) const {
        Config c(n_);
        const int symbols = m_ + n_ - 1;
        int v = 0;
        for (int j = 0; j < n_; ++j) {
            for (;; ++v) {
                const std::uint64_t block = binomial(symbols - 1 - v, n_ - 1 - j);
                if (index < block) break;
                index -= block;
            }
            c[j] = v - j;
            ++v;
        }
        return c;
    }

    // Advance a sorted tuple to its lexicographic successor in place.
    // Returns false past the last configuration.
    bool next_config(Config& c) const {
        for (int j = n_ - 1; j >= 0; --j) {
            if (c[j] < m_ - 1) {
                const int v = c[j] + 1;
                for (int i = j; i < n_; ++i) c[i] = v;
                return true;
            }
        }
        return false;
    }

    Config first_config() const { return Config(n_, 0); }

    // (orbital, multiplicity) pairs of a sorted tuple.
    static std::vector<std::pair<int, int>> occupations(const Config& c) {
        std::vector<std::pair<int, int>> occ;
        for (int v : c) {
            if (!occ.empty() && occ.back().first == v)
                ++occ.back().second;
            else
                occ.emplace_back(v, 1);
        }
        return occ;
    }

  private:
    int n_;
    int m_;
    std::uint64_t dim_;
};

}  // namespace triwell

#endif
