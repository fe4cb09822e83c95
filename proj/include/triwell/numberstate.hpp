#ifndef TRIWELL_NUMBERSTATE_HPP
#define TRIWELL_NUMBERSTATE_HPP

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "triwell/basis.hpp"
#include "triwell/common.hpp"
#include "triwell/grid.hpp"
#include "triwell/hamiltonian.hpp"
#include "triwell/lanczos.hpp"
#include "triwell/single_particle.hpp"

// Generalized interacting number states |N_L, N_M, N_R>_i.
//
// Each state is a symmetrized product of the three sub-well eigenstates
// obtained with hard walls at the well boundaries and contact interactions
// only within a well. Factors live on disjoint intervals, so states with
// different distributions are exactly orthogonal and states with the same
// distribution inherit orthogonality from the sub-well eigenproblem.
//
// The composite excitation index i orders the direct-product excitations of
// the three sub-well problems by total energy at the working coupling,
// breaking ties lexicographically on the per-well excitation tuple. The
// tuple itself is the stable identity of a state; the (tuple <-> i) mapping
// is published with every output because the ordering may rearrange with g.

namespace triwell {

enum class ModeClass { Single, Pair, Triple, Quad, SinglePair, DoublePair };

inline const char* mode_class_name(ModeClass m) {
    switch (m) {
        case ModeClass::Single: return "SINGLE";
        case ModeClass::Pair: return "PAIR";
        case ModeClass::Triple: return "TRIPLE";
        case ModeClass::Quad: return "QUAD";
        case ModeClass::SinglePair: return "SINGLE_PAIR";
        case ModeClass::DoublePair: return "DOUBLE_PAIR";
    }
    return "?";
}

struct NumberStateLabel {
    std::array<int, 3> occupation{};  // N_L, N_M, N_R
    int excitation = 0;               // composite index i

    int total() const { return occupation[0] + occupation[1] + occupation[2]; }

    std::string str() const {
        std::ostringstream os;
        os << "|" << occupation[0] << "," << occupation[1] << "," << occupation[2] << ">_"
           << excitation;
        return os.str();
    }
};

// Per-well excitation indices; entries for empty wells are 0 by convention.
using ExcitationTuple = std::array<int, 3>;

inline std::string tuple_str(const ExcitationTuple& t) {
    std::ostringstream os;
    os << "(" << t[0] << ";" << t[1] << ";" << t[2] << ")";
    return os.str();
}

inline ModeClass classify_mode(const NumberStateLabel& label) {
    std::vector<int> nz;
    for (int n : label.occupation)
        if (n > 0) nz.push_back(n);
    std::sort(nz.rbegin(), nz.rend());
    if (nz == std::vector<int>{1, 1, 1}) return ModeClass::Single;
    if (nz == std::vector<int>{2, 1}) return ModeClass::Pair;
    if (nz == std::vector<int>{3}) return ModeClass::Triple;
    if (nz == std::vector<int>{4}) return ModeClass::Quad;
    if (nz == std::vector<int>{2, 1, 1}) return ModeClass::SinglePair;
    if (nz == std::vector<int>{2, 2}) return ModeClass::DoublePair;
    std::ostringstream os;
    os << "classify_mode: no class defined for distribution " << label.str();
    throw config_error(os.str());
}

// Solution of the n-boson problem in one hard-walled sub-well. Solved once
// on the centered well; other wells are exact translates, shifted in energy
// by n * tilt * r_well.
struct SubsetSolution {
    int n = 0;
    double g = 0.0;
    Eigen::VectorXd energies;                 // k lowest, centered well
    std::vector<Eigen::VectorXd> states;      // lattice-normalized coefficients
    std::shared_ptr<const SymmetrizedBasis> basis;  // null for n = 0
};

struct SpectrumRow {
    std::array<int, 3> occupation{};
    ExcitationTuple tuple{};
    ModeClass mode_class = ModeClass::Single;
    std::vector<double> energies;   // one per g sample
    std::vector<int> index_map;     // composite index i at each g sample
};

struct CrossingRecord {
    NumberStateLabel initial, candidate;
    ExcitationTuple candidate_tuple{};
    bool has_crossing = false;
    double g_star = 0.0;
    double energy_at_crossing = 0.0;
    double residual = 0.0;           // |e_i - e_c| after refinement
    // |e_i - e_c| < coupling_scale window, clipped to the scanned range
    bool has_window = false;
    double window_lo = 0.0, window_hi = 0.0;
    double closest_gap = 0.0;        // min |e_i - e_c| over the scan
    double closest_g = 0.0;
};

struct SpectrumTable {
    std::vector<double> g_samples;
    double tilt = 0.0;
    double v0 = 0.0;
    double band_threshold = 0.0;     // g=0 energy ceiling used for truncation
    std::vector<SpectrumRow> rows;
    std::vector<CrossingRecord> crossings;

    const SpectrumRow* find(const std::array<int, 3>& occ, const ExcitationTuple& t) const {
        for (const auto& r : rows)
            if (r.occupation == occ && r.tuple == t) return &r;
        return nullptr;
    }
    const SpectrumRow* find(const NumberStateLabel& label, int sample) const {
        for (const auto& r : rows)
            if (r.occupation == label.occupation && r.index_map[sample] == label.excitation)
                return &r;
        return nullptr;
    }
};

// Builds and caches sub-well solutions and everything derived from them.
class NumberStateSolver {
  public:
    struct Options {
        double v0 = 12.0;
        double tilt = 0.0;
        int n_sub = 41;
        KineticScheme scheme = KineticScheme::FiniteDifference;
        int excitations_1 = 5;   // k per subset size
        int excitations_2 = 8;
        int excitations_3 = 8;
        int excitations_4 = 8;
        std::uint64_t budget = SymmetrizedBasis::kDefaultBudget;
    };

    explicit NumberStateSolver(Options opt) : opt_(opt) {
        if (opt_.n_sub < 8) throw config_error("NumberStateSolver: n_sub too small");
    }

    const Options& options() const { return opt_; }
    int full_points() const { return aligned_full_points(opt_.n_sub); }

    // Lowest k eigenstates of the n-boson centered sub-well problem with
    // intra-well contact interaction g. Single-particle solutions carry no
    // g dependence and are cached once.
    const SubsetSolution& subset(int n, double g, int k = -1) {
        if (n < 0) throw config_error("subset: negative boson count");
        if (k <= 0) k = default_k(n);
        const double g_key = n <= 1 ? 0.0 : g;
        const Key key{n, g_key, k};
        auto it = cache_.find(key);
        if (it != cache_.end()) return *it->second;
        auto [pos, ok] = cache_.emplace(key, solve_subset(n, g_key, k));
        return *pos->second;
    }

    // Solves a batch of (n, g) subset problems concurrently before they are
    // requested one by one (the solves are independent; results identical to
    // the sequential path).
    void prefetch(std::vector<std::pair<int, double>> wanted) {
        std::vector<Key> keys;
        for (auto [n, g] : wanted) {
            const Key key{n, n <= 1 ? 0.0 : g, default_k(n)};
            if (cache_.find(key) == cache_.end()) keys.push_back(key);
        }
        std::sort(keys.begin(), keys.end());
        keys.erase(std::unique(keys.begin(), keys.end(),
                               [](const Key& a, const Key& b) {
                                   return !(a < b) && !(b < a);
                               }),
                   keys.end());
        if (keys.size() < 2) {
            for (const auto& key : keys) subset(key.n, key.g, key.k);
            return;
        }
        std::vector<std::shared_ptr<SubsetSolution>> results(keys.size());
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= keys.size()) return;
                results[i] = solve_subset(keys[i].n, keys[i].g, keys[i].k);
            }
        };
        const unsigned n_threads =
            std::max(1u, std::min(std::thread::hardware_concurrency(), 4u));
        std::vector<std::thread> pool;
        for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
        worker();
        for (auto& t : pool) t.join();
        for (std::size_t i = 0; i < keys.size(); ++i) cache_.emplace(keys[i], results[i]);
    }

    // Spec-facing variant: energies and factors of well `well` (0=L,1=M,2=R)
    // including the tilt offset n * tilt * r_well.
    std::vector<std::pair<double, const Eigen::VectorXd*>> solve_subset_states(int n, int well,
                                                                               double g, int k) {
        const SubsetSolution& sol = subset(n, g, k);
        std::vector<std::pair<double, const Eigen::VectorXd*>> out;
        const double shift = n * opt_.tilt * well_center(well);
        for (int i = 0; i < sol.energies.size() && i < k; ++i)
            out.emplace_back(sol.energies[i] + shift,
                             n == 0 ? nullptr : &sol.states[i]);
        return out;
    }

    struct Composite {
        std::array<int, 3> occupation{};
        ExcitationTuple tuple{};
        double energy = 0.0;
    };

    // Energy-ordered composite excitations of one distribution at coupling g.
    std::vector<Composite> composites(const std::array<int, 3>& occ, double g) {
        std::array<const SubsetSolution*, 3> sols{};
        for (int w = 0; w < 3; ++w) sols[w] = &subset(occ[w], g);
        std::vector<Composite> list;
        for (int a = 0; a < count_of(*sols[0]); ++a)
            for (int b = 0; b < count_of(*sols[1]); ++b)
                for (int c = 0; c < count_of(*sols[2]); ++c) {
                    Composite comp;
                    comp.occupation = occ;
                    comp.tuple = {a, b, c};
                    comp.energy = sols[0]->energies[a] + sols[1]->energies[b] +
                                  sols[2]->energies[c] + tilt_shift(occ);
                    list.push_back(comp);
                }
        std::sort(list.begin(), list.end(), [](const Composite& x, const Composite& y) {
            if (x.energy != y.energy) return x.energy < y.energy;
            return x.tuple < y.tuple;
        });
        return list;
    }

    // Composite index i of a tuple at coupling g (the published mapping).
    int index_of_tuple(const std::array<int, 3>& occ, const ExcitationTuple& t, double g) {
        const auto list = composites(occ, g);
        for (std::size_t i = 0; i < list.size(); ++i)
            if (list[i].tuple == t) return static_cast<int>(i);
        throw config_error("index_of_tuple: tuple outside the solved excitation range");
    }

    ExcitationTuple tuple_of_label(const NumberStateLabel& label, double g) {
        const auto list = composites(label.occupation, g);
        if (label.excitation < 0 || label.excitation >= static_cast<int>(list.size())) {
            std::ostringstream os;
            os << "label " << label.str() << ": excitation index outside the solved range ("
               << list.size() << " composites available)";
            throw config_error(os.str());
        }
        return list[label.excitation].tuple;
    }

    // Requests only as many excitations per well as the tuple needs, which
    // keeps crossing refinements (many fresh couplings, ground states only)
    // cheap compared to full spectrum-table columns.
    double onsite_energy(const std::array<int, 3>& occ, const ExcitationTuple& t, double g) {
        double e = tilt_shift(occ);
        for (int w = 0; w < 3; ++w) {
            const int k = occ[w] <= 1 ? -1 : t[w] + 1;  // one-body solves are cached anyway
            e += subset(occ[w], g, k).energies[t[w]];
        }
        return e;
    }

    // All distributions of N bosons over three wells.
    static std::vector<std::array<int, 3>> distributions(int n) {
        std::vector<std::array<int, 3>> out;
        for (int l = n; l >= 0; --l)
            for (int m = n - l; m >= 0; --m) out.push_back({l, m, n - l - m});
        return out;
    }

    // On-site energies over a coupling grid for every composite whose g=0
    // energy lies below the band threshold (default: everything up to and
    // including the third excited band of the single modes).
    SpectrumTable onsite_energy_scan(int n_bosons, const std::vector<double>& g_grid,
                                     double band_ceiling_offset = -1.0) {
        if (g_grid.empty() || !std::is_sorted(g_grid.begin(), g_grid.end()))
            throw config_error("onsite_energy_scan: g grid must be sorted ascending");
        SpectrumTable table;
        table.g_samples = g_grid;
        table.tilt = opt_.tilt;
        table.v0 = opt_.v0;

        const SubsetSolution& singles = subset(1, 0.0);
        const double e0 = singles.energies[0];
        double ceiling = band_ceiling_offset;
        if (ceiling < 0.0) ceiling = singles.energies[3] - e0;  // through band 3
        table.band_threshold = n_bosons * e0 + ceiling + 1e-9;

        {
            std::vector<std::pair<int, double>> wanted;
            for (const auto& occ : distributions(n_bosons))
                for (int w = 0; w < 3; ++w)
                    if (occ[w] >= 2)
                        for (double g : g_grid) wanted.emplace_back(occ[w], g);
            prefetch(std::move(wanted));
        }

        for (const auto& occ : distributions(n_bosons)) {
            const auto at_zero = composites(occ, 0.0);
            for (const auto& comp : at_zero) {
                if (comp.energy - tilt_shift(occ) > table.band_threshold) continue;
                SpectrumRow row;
                row.occupation = occ;
                row.tuple = comp.tuple;
                row.mode_class = classify_mode({occ, 0});
                row.energies.reserve(g_grid.size());
                row.index_map.reserve(g_grid.size());
                table.rows.push_back(std::move(row));
            }
        }
        for (std::size_t s = 0; s < g_grid.size(); ++s) {
            const double g = g_grid[s];
            std::map<std::array<int, 3>, std::vector<Composite>> lists;
            for (auto& row : table.rows) {
                auto it = lists.find(row.occupation);
                if (it == lists.end())
                    it = lists.emplace(row.occupation, composites(row.occupation, g)).first;
                const auto& list = it->second;
                int idx = -1;
                for (std::size_t i = 0; i < list.size(); ++i)
                    if (list[i].tuple == row.tuple) {
                        idx = static_cast<int>(i);
                        break;
                    }
                row.energies.push_back(onsite_energy(row.occupation, row.tuple, g));
                row.index_map.push_back(idx);
            }
        }
        return table;
    }

    // Crossing search between one initial row and candidate rows of a table.
    // Sign changes on the sampled grid are refined by bisection on fresh
    // subset solves; windows report where |delta e| < coupling_scale.
    std::vector<CrossingRecord> find_resonances(const SpectrumTable& table,
                                                const NumberStateLabel& initial,
                                                const std::vector<NumberStateLabel>& candidates,
                                                double coupling_scale) {
        const SpectrumRow* init = table.find(initial, 0);
        if (!init) throw config_error("find_resonances: initial label not in table");
        std::vector<CrossingRecord> out;
        for (const auto& cand : candidates) {
            const SpectrumRow* cr = table.find(cand, 0);
            if (!cr) throw config_error("find_resonances: candidate label not in table");
            out.push_back(locate_crossing(table, *init, *cr, initial, cand, coupling_scale));
        }
        return out;
    }

    CrossingRecord locate_crossing(const SpectrumTable& table, const SpectrumRow& init,
                                   const SpectrumRow& cand, const NumberStateLabel& ilabel,
                                   const NumberStateLabel& clabel, double coupling_scale) {
        CrossingRecord rec;
        rec.initial = ilabel;
        rec.candidate = clabel;
        rec.candidate_tuple = cand.tuple;
        auto delta_of = [&](double g) {
            return onsite_energy(init.occupation, init.tuple, g) -
                   onsite_energy(cand.occupation, cand.tuple, g);
        };
        const auto& gs = table.g_samples;
        rec.closest_gap = 1e300;
        for (std::size_t s = 0; s < gs.size(); ++s) {
            const double d = init.energies[s] - cand.energies[s];
            if (std::abs(d) < rec.closest_gap) {
                rec.closest_gap = std::abs(d);
                rec.closest_g = gs[s];
            }
        }
        for (std::size_t s = 0; s + 1 < gs.size(); ++s) {
            const double d0 = init.energies[s] - cand.energies[s];
            const double d1 = init.energies[s + 1] - cand.energies[s + 1];
            if (d0 == 0.0 || d0 * d1 < 0.0) {
                double lo = gs[s], hi = gs[s + 1], dlo = d0;
                for (int it = 0; it < 60; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const double dm = delta_of(mid);
                    if (std::abs(dm) < 1e-4 || hi - lo < 1e-12) {
                        lo = hi = mid;
                        break;
                    }
                    if (dlo * dm <= 0.0)
                        hi = mid;
                    else {
                        lo = mid;
                        dlo = dm;
                    }
                }
                rec.has_crossing = true;
                rec.g_star = 0.5 * (lo + hi);
                rec.residual = std::abs(delta_of(rec.g_star));
                rec.energy_at_crossing = onsite_energy(init.occupation, init.tuple, rec.g_star);
                break;
            }
        }
        if (coupling_scale > 0.0) {
            // window boundaries by bisection against |delta| = coupling_scale
            auto below = [&](std::size_t s) {
                return std::abs(init.energies[s] - cand.energies[s]) < coupling_scale;
            };
            std::size_t first = gs.size(), last = gs.size();
            for (std::size_t s = 0; s < gs.size(); ++s)
                if (below(s)) {
                    if (first == gs.size()) first = s;
                    last = s;
                }
            if (first < gs.size()) {
                rec.has_window = true;
                rec.window_lo = first == 0 ? gs.front()
                                           : refine_window(delta_of, gs[first - 1], gs[first],
                                                           coupling_scale);
                rec.window_hi = last + 1 == gs.size()
                                    ? gs.back()
                                    : refine_window(delta_of, gs[last + 1], gs[last],
                                                    coupling_scale);
            }
        }
        return rec;
    }

    // Embeds the symmetrized product of sub-well factors into a full-domain
    // grid basis (exact, thanks to the aligned grids). The result lists the
    // nonzero amplitudes by full-grid configuration index.
    std::vector<std::pair<std::uint64_t, double>> embed_grid_amplitudes(
        const NumberStateLabel& label, const ExcitationTuple& tuple, double g,
        const SymmetrizedBasis& target, double amplitude_cut = 1e-9) {
        if (target.n_orbitals() != full_points())
            throw config_error("embed: target basis does not match the aligned full grid");
        if (target.n_bosons() != label.total())
            throw config_error("embed: boson count mismatch");
        std::vector<std::pair<Config, double>> partial{{Config{}, 1.0}};
        for (int w = 0; w < 3; ++w) {
            const int n = label.occupation[w];
            if (n == 0) continue;
            // request exactly as many excitations as the tuple needs
            const SubsetSolution& sol = subset(n, g, n <= 1 ? -1 : tuple[w] + 1);
            const Eigen::VectorXd& st = sol.states[tuple[w]];
            const int off = subwell_offset(w, opt_.n_sub);
            std::vector<std::pair<Config, double>> next;
            Config c = sol.basis->first_config();
            for (std::uint64_t ci = 0; ci < sol.basis->dimension(); ++ci) {
                const double x = st[ci];
                if (std::abs(x) > amplitude_cut) {
                    Config shifted = c;
                    for (auto& v : shifted) v += off;
                    for (const auto& [base, amp] : partial) {
                        Config merged = base;
                        merged.insert(merged.end(), shifted.begin(), shifted.end());
                        next.emplace_back(std::move(merged), amp * x);
                    }
                }
                sol.basis->next_config(c);
            }
            partial = std::move(next);
        }
        std::vector<std::pair<std::uint64_t, double>> out;
        out.reserve(partial.size());
        for (auto& [cfg, amp] : partial) {
            std::sort(cfg.begin(), cfg.end());
            out.emplace_back(target.index_of(cfg), amp);
        }
        return out;
    }

    ManyBodyState assemble_number_state(const NumberStateLabel& label, double g,
                                        std::shared_ptr<const SymmetrizedBasis> target) {
        const ExcitationTuple tuple = tuple_of_label(label, g);
        return assemble_from_tuple(label, tuple, g, std::move(target));
    }

    ManyBodyState assemble_from_tuple(const NumberStateLabel& label, const ExcitationTuple& tuple,
                                      double g, std::shared_ptr<const SymmetrizedBasis> target) {
        ManyBodyState s;
        s.basis = target;
        s.coeffs = Eigen::VectorXcd::Zero(target->dimension());
        for (const auto& [idx, amp] : embed_grid_amplitudes(label, tuple, g, *target))
            s.coeffs[idx] += amp;
        const double nrm = s.coeffs.norm();
        // amplitude cut loses a sliver of norm; this is not representation
        // leakage (the grid embedding is exact), just bookkeeping truncation
        s.coeffs /= nrm;
        return s;
    }

    // Projection onto a mode basis; returns the state and the leakage
    // (norm lost outside the span of the first M modes).
    std::pair<ManyBodyState, double> project_to_modes(
        const NumberStateLabel& label, const ExcitationTuple& tuple, double g,
        const SingleParticleSpectrum& modes, std::shared_ptr<const SymmetrizedBasis> mode_basis,
        double leakage_threshold = 1e-2) {
        const int n = label.total();
        if (mode_basis->n_bosons() != n) throw config_error("project_to_modes: boson mismatch");
        const int m_modes = mode_basis->n_orbitals();
        if (modes.count() < m_modes) throw config_error("project_to_modes: not enough modes");
        if (modes.grid.n_points != full_points())
            throw config_error("project_to_modes: mode grid mismatch");

        SymmetrizedBasis grid_basis(n, full_points(), opt_.budget);
        const auto amps = embed_grid_amplitudes(label, tuple, g, grid_basis);

        ManyBodyState s;
        s.basis = mode_basis;
        s.coeffs = Eigen::VectorXcd::Zero(mode_basis->dimension());
        // permanent overlap <mode config | grid config> over the orbital
        // overlap matrix; N is small so direct permutation sums suffice.
        // Grid configurations and their orbital rows are staged once.
        std::vector<int> perm_idx(n);
        for (int i = 0; i < n; ++i) perm_idx[i] = i;
        std::vector<std::vector<int>> perms;
        do perms.push_back(perm_idx);
        while (std::next_permutation(perm_idx.begin(), perm_idx.end()));

        const std::size_t na = amps.size();
        Eigen::MatrixXd rows(static_cast<Eigen::Index>(na) * n, m_modes);
        Eigen::VectorXd weight(na);
        for (std::size_t a = 0; a < na; ++a) {
            const Config gc = grid_basis.config_at(amps[a].first);
            for (int r = 0; r < n; ++r)
                rows.row(static_cast<Eigen::Index>(a) * n + r) =
                    modes.orbitals.row(gc[r]).head(m_modes);
            weight[a] = amps[a].second / std::sqrt(multiplicity_factor(gc));
        }
        Eigen::VectorXd per_amp(na);
        Config mc = mode_basis->first_config();
        for (std::uint64_t mi = 0; mi < mode_basis->dimension(); ++mi) {
            per_amp.setZero();
            for (const auto& p : perms) {
                Eigen::VectorXd prod = Eigen::VectorXd::Ones(na);
                for (int r = 0; r < n; ++r)
                    prod.array() *=
                        rows(Eigen::seqN(Eigen::Index(p[r]), Eigen::Index(na), Eigen::Index(n)),
                             mc[r])
                            .array();
                per_amp += prod;
            }
            s.coeffs[mi] = weight.dot(per_amp) / std::sqrt(multiplicity_factor(mc));
            mode_basis->next_config(mc);
        }
        const double nrm2 = s.coeffs.squaredNorm();
        const double leakage = 1.0 - nrm2;
        if (leakage > leakage_threshold) {
            std::ostringstream os;
            os << "project_to_modes: " << label.str() << " at g=" << g << " loses "
               << leakage << " of its norm in an M=" << m_modes
               << " mode basis (threshold " << leakage_threshold
               << "); a larger mode basis is required";
            throw representation_error(os.str());
        }
        s.coeffs /= std::sqrt(nrm2);
        return {std::move(s), leakage};
    }

    static double multiplicity_factor(const Config& c) {
        double f = 1.0;
        int run = 1;
        for (std::size_t i = 1; i <= c.size(); ++i) {
            if (i < c.size() && c[i] == c[i - 1])
                f *= ++run;
            else
                run = 1;
        }
        return f;
    }

  private:
    struct Key {
        int n;
        double g;
        int k;
        bool operator<(const Key& o) const {
            if (n != o.n) return n < o.n;
            if (g != o.g) return g < o.g;
            return k < o.k;
        }
    };

    int default_k(int n) const {
        switch (n) {
            case 0: return 1;
            case 1: return opt_.excitations_1;
            case 2: return opt_.excitations_2;
            case 3: return opt_.excitations_3;
            default: return opt_.excitations_4;
        }
    }

    std::shared_ptr<SubsetSolution> solve_subset(int n, double g_key, int k) const {
        auto sol = std::make_shared<SubsetSolution>();
        sol->n = n;
        sol->g = g_key;
        if (n == 0) {
            sol->energies = Eigen::VectorXd::Zero(1);
            return sol;
        }
        const GridSpec sub = GridSpec::for_domain(Domain::SubWellMiddle, opt_.n_sub);
        const PotentialSpec pot(opt_.v0, opt_.tilt, Domain::SubWellMiddle);
        auto basis = std::make_shared<SymmetrizedBasis>(n, opt_.n_sub, opt_.budget);
        GridBackend gb{sub, pot, opt_.scheme};
        ManyBodyOperator h = assemble_hamiltonian(basis, gb, g_key);
        const std::uint64_t seed = 0x9e3779b9u ^ (static_cast<std::uint64_t>(n) << 32) ^
                                   static_cast<std::uint64_t>(g_key * 4096.0);
        const int m_cap = basis->dimension() > 5000 ? 900 : 480;
        EigenPairs ep = lowest_eigenpairs(h.matrix(), k, 3e-11, seed, m_cap);
        sol->energies = ep.values;
        sol->states.reserve(k);
        for (int i = 0; i < k; ++i) sol->states.push_back(ep.vectors.col(i));
        sol->basis = basis;
        return sol;
    }

    static int count_of(const SubsetSolution& sol) {
        return static_cast<int>(sol.energies.size());
    }

    double tilt_shift(const std::array<int, 3>& occ) const {
        double e = 0.0;
        for (int w = 0; w < 3; ++w) e += occ[w] * opt_.tilt * well_center(w);
        return e;
    }

    template <class F>
    static double refine_window(F&& delta_of, double outside, double inside, double scale) {
        double lo = outside, hi = inside;  // |delta(lo)| >= scale > |delta(hi)|
        for (int it = 0; it < 40; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (std::abs(delta_of(mid)) < scale)
                hi = mid;
            else
                lo = mid;
        }
        return 0.5 * (lo + hi);
    }

    Options opt_;
    std::map<Key, std::shared_ptr<SubsetSolution>> cache_;
};

// CSV export: one row per state, one energy column per coupling sample,
// with the (tuple <-> i) mapping in companion columns.
inline void write_spectrum_csv(const SpectrumTable& t, std::ostream& os,
                               const std::string& version = kVersion) {
    os << "# triwell spectrum table, version " << version << "\n";
    os << "# V0 = " << t.v0 << ", tilt = " << t.tilt << ", band_threshold = "
       << t.band_threshold << "\n";
    os << "label,mode_class,tuple";
    os.precision(12);
    for (double g : t.g_samples) os << ",e(g=" << g << ")";
    for (double g : t.g_samples) os << ",i(g=" << g << ")";
    os << "\n";
    for (const auto& r : t.rows) {
        os << r.occupation[0] << "." << r.occupation[1] << "." << r.occupation[2] << ","
           << mode_class_name(r.mode_class) << "," << tuple_str(r.tuple);
        for (double e : r.energies) os << "," << e;
        for (int i : r.index_map) os << "," << i;
        os << "\n";
    }
}

inline void write_crossings_csv(const std::vector<CrossingRecord>& recs, std::ostream& os,
                                const std::string& version = kVersion) {
    os << "# triwell resonance crossings, version " << version << "\n";
    os << "initial,candidate,candidate_tuple,has_crossing,g_star,energy,residual,"
          "window_lo,window_hi,closest_gap,closest_g\n";
    os.precision(12);
    for (const auto& r : recs) {
        os << r.initial.str() << "," << r.candidate.str() << "," << tuple_str(r.candidate_tuple)
           << "," << (r.has_crossing ? 1 : 0) << "," << r.g_star << "," << r.energy_at_crossing
           << "," << r.residual << "," << (r.has_window ? r.window_lo : 0.0) << ","
           << (r.has_window ? r.window_hi : 0.0) << "," << r.closest_gap << "," << r.closest_g
           << "\n";
    }
}

}  // namespace triwell

#endif
