#include <catch2/catch_amalgamated.hpp>

#include <memory>
#include <sstream>

#include "triwell/numberstate.hpp"
#include "triwell/propagate.hpp"

using namespace triwell;

namespace {

NumberStateSolver::Options opts(double tilt = 0.0) {
    NumberStateSolver::Options o;
    o.v0 = 12.0;
    o.tilt = tilt;
    o.n_sub = 41;
    return o;
}

}  // namespace

TEST_CASE("mode classification covers all distributions", "[numberstate]") {
    CHECK(classify_mode({{1, 1, 1}, 0}) == ModeClass::Single);
    CHECK(classify_mode({{2, 1, 0}, 0}) == ModeClass::Pair);
    CHECK(classify_mode({{0, 2, 1}, 3}) == ModeClass::Pair);
    CHECK(classify_mode({{0, 3, 0}, 0}) == ModeClass::Triple);
    CHECK(classify_mode({{4, 0, 0}, 0}) == ModeClass::Quad);
    CHECK(classify_mode({{2, 1, 1}, 0}) == ModeClass::SinglePair);
    CHECK(classify_mode({{2, 0, 2}, 1}) == ModeClass::DoublePair);
    CHECK_THROWS_AS(classify_mode({{5, 0, 0}, 0}), config_error);
}

TEST_CASE("single-boson subsets ignore the coupling", "[numberstate]") {
    NumberStateSolver solver(opts());
    const auto& a = solver.subset(1, 0.0);
    const auto& b = solver.subset(1, 7.3);
    CHECK(&a == &b);  // cached once, exactly constant in g
    // n=0: trivial vacuum factor
    CHECK(solver.subset(0, 2.0).energies[0] == 0.0);
    // n=2 at g=0: twice the single-particle ground energy
    const auto& two = solver.subset(2, 0.0);
    CHECK(two.energies[0] == Catch::Approx(2.0 * a.energies[0]).margin(1e-8));
}

TEST_CASE("three strongly coupled bosons fermionize in a sub-well", "[numberstate][slow]") {
    NumberStateSolver solver(opts());
    const auto& singles = solver.subset(1, 0.0);
    const double tg = singles.energies[0] + singles.energies[1] + singles.energies[2];
    double prev_gap = 1e300;
    for (double g : {30.0, 90.0, 300.0}) {
        const double e = solver.subset(3, g, 1).energies[0];
        CHECK(e < tg);
        const double gap = tg - e;
        CHECK(gap < prev_gap);  // residual decreases with g
        prev_gap = gap;
    }
    CHECK(prev_gap < 0.05 * tg);
}

TEST_CASE("composite enumeration is energy-ordered with stable tuples", "[numberstate]") {
    NumberStateSolver solver(opts());
    const auto list = solver.composites({2, 1, 0}, 1.0);
    REQUIRE(list.size() >= 6);
    for (std::size_t i = 1; i < list.size(); ++i) CHECK(list[i].energy >= list[i - 1].energy);
    CHECK(list[0].tuple == ExcitationTuple{0, 0, 0});
    // round trip label -> tuple -> index
    for (int i = 0; i < 5; ++i) {
        NumberStateLabel l{{2, 1, 0}, i};
        const auto t = solver.tuple_of_label(l, 1.0);
        CHECK(solver.index_of_tuple({2, 1, 0}, t, 1.0) == i);
    }
}

TEST_CASE("spectrum table reproduces the number-state systematics", "[numberstate][slow]") {
    NumberStateSolver solver(opts());
    std::vector<double> grid;
    for (double g = 0.0; g <= 10.0 + 1e-9; g += 2.0) grid.push_back(g);
    grid.insert(grid.end(), {20.0, 60.0, 200.0});
    SpectrumTable table = solver.onsite_energy_scan(3, grid);

    const auto& singles = solver.subset(1, 0.0);

    // g=0 energies equal sums of Wannier levels of the same discretization
    for (const auto& row : table.rows) {
        double sum = 0.0;
        std::array<int, 3> nper = row.occupation;
        // distribute the per-well excitations onto single-particle levels at g=0
        // via the composite construction itself: cross-check against subset sums
        sum = solver.onsite_energy(row.occupation, row.tuple, 0.0);
        CHECK(row.energies.front() == Catch::Approx(sum).margin(1e-9));
        (void)nper;
    }
    // single modes: flat in g to strictly better than 1e-6
    int n_single = 0;
    for (const auto& row : table.rows) {
        if (row.mode_class != ModeClass::Single) continue;
        ++n_single;
        for (double e : row.energies)
            CHECK(std::abs(e - row.energies.front()) < 1e-6);
    }
    CHECK(n_single >= 10);
    // monotone response to repulsion for every state
    for (const auto& row : table.rows)
        for (std::size_t s = 1; s < row.energies.size(); ++s)
            CHECK(row.energies[s] >= row.energies[s - 1] - 1e-8);

    // pair and triple rows join the single-mode energy at g=0
    const SpectrumRow* pair0 = table.find({2, 1, 0}, {0, 0, 0});
    REQUIRE(pair0);
    CHECK(pair0->energies.front() ==
          Catch::Approx(2 * singles.energies[0] + singles.energies[0]).margin(1e-8));

    // fermionization saturation at the largest sampled coupling, against the
    // noninteracting-fermion oracle of the same discretization
    const double e_f3 = singles.energies[0] + singles.energies[1] + singles.energies[2];
    const double e_f2 = singles.energies[0] + singles.energies[1];
    const SpectrumRow* triple = table.find({0, 3, 0}, {0, 0, 0});
    REQUIRE(triple);
    CHECK(std::abs(triple->energies.back() - e_f3) < 0.05 * e_f3);
    // e_f ordering: the more bosons share a well, the higher the shift
    const double ef_300 = triple->energies.back() - triple->energies.front();
    const double ef_210 = pair0->energies.back() - pair0->energies.front();
    CHECK(ef_300 > ef_210);
    CHECK(ef_210 > 0.0);
    // single modes have e_f = 0 exactly
    const SpectrumRow* single = table.find({1, 1, 1}, {0, 0, 0});
    REQUIRE(single);
    CHECK(std::abs(single->energies.back() - single->energies.front()) < 1e-9);
    // pair modes saturate one band up
    CHECK(pair0->energies.back() - pair0->energies.front() ==
          Catch::Approx(e_f2 - 2 * singles.energies[0]).epsilon(0.05));

    // band structure: inter-band gaps of the table approximate the Wannier
    // level differences
    const SpectrumRow* single1 = table.find({1, 1, 1}, {0, 1, 0});
    REQUIRE(single1);
    CHECK(single1->energies.front() - single->energies.front() ==
          Catch::Approx(singles.energies[1] - singles.energies[0]).margin(1e-9));
    // intra-band splitting between mirror-related tuples vanishes untilted,
    // matching the equal sub-well on-site energies of the construction
    const SpectrumRow* single1L = table.find({1, 1, 1}, {1, 0, 0});
    REQUIRE(single1L);
    CHECK(std::abs(single1L->energies.front() - single1->energies.front()) < 1e-10);

    // CSV export carries every row and the i-mapping columns
    std::ostringstream os;
    write_spectrum_csv(table, os);
    const std::string csv = os.str();
    CHECK(csv.find("label,mode_class,tuple") != std::string::npos);
    CHECK(csv.find("TRIPLE") != std::string::npos);
    CHECK(csv.find(",i(g=") != std::string::npos);
}

TEST_CASE("assembled number states: support, orthonormality, projections",
          "[numberstate][slow]") {
    NumberStateSolver solver(opts());
    const double g = 2.0;
    auto target = std::make_shared<SymmetrizedBasis>(3, solver.full_points());

    ManyBodyState s300 = solver.assemble_number_state({{3, 0, 0}, 0}, g, target);
    const GridSpec full = GridSpec::for_domain(Domain::FullTriple, solver.full_points());
    auto ctx = ObservationContext::for_grid(full);
    const auto pops = well_populations(s300, ctx);
    CHECK(pops[0] == Catch::Approx(3.0).margin(1e-6));
    CHECK(std::abs(pops[1]) < 1e-6);
    CHECK(std::abs(pops[2]) < 1e-6);

    // disjoint support and sub-well eigen-orthogonality -> orthonormal family
    std::vector<NumberStateLabel> family = {
        {{3, 0, 0}, 0}, {{0, 3, 0}, 0}, {{2, 1, 0}, 0}, {{2, 1, 0}, 1},
        {{2, 1, 0}, 2}, {{1, 1, 1}, 0}, {{1, 1, 1}, 1}, {{0, 0, 3}, 0},
    };
    std::vector<ManyBodyState> states;
    for (const auto& l : family) states.push_back(solver.assemble_number_state(l, g, target));
    for (std::size_t i = 0; i < states.size(); ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            const double want = i == j ? 1.0 : 0.0;
            CHECK(std::abs(std::abs(states[i].coeffs.dot(states[j].coeffs)) - want) < 1e-8);
        }

    // mode reconstruction of the noninteracting |1,1,1>_0 keeps >= 0.99
    auto modes = std::make_shared<SingleParticleSpectrum>(
        solve_spectrum(full, PotentialSpec(12.0), 12));
    auto mode_basis = std::make_shared<SymmetrizedBasis>(3, 12);
    auto [proj, leak] =
        solver.project_to_modes({{1, 1, 1}, 0}, {0, 0, 0}, 0.0, *modes, mode_basis);
    CHECK(1.0 - leak >= 0.99);
    // and the projected state reproduces the populations
    auto mctx = ObservationContext::for_modes(modes);
    const auto mpops = well_populations(proj, mctx);
    CHECK(mpops[0] == Catch::Approx(1.0).margin(0.02));
    CHECK(mpops[1] == Catch::Approx(1.0).margin(0.02));

    // a strongly correlated trio does not fit into a four-band basis
    CHECK_THROWS_AS(
        solver.project_to_modes({{0, 3, 0}, 0}, {0, 0, 0}, 9.0, *modes, mode_basis),
        representation_error);
}

TEST_CASE("resonance location: first-band crossing and mirror degeneracy",
          "[numberstate][slow]") {
    NumberStateSolver solver(opts());
    std::vector<double> grid;
    for (double g = 0.0; g <= 8.0 + 1e-9; g += 1.0) grid.push_back(g);
    SpectrumTable table = solver.onsite_energy_scan(3, grid);

    NumberStateLabel initial{{3, 0, 0}, 0};
    const int i_towards_m = solver.index_of_tuple({2, 1, 0}, {0, 1, 0}, 4.0);
    const int i_towards_r = solver.index_of_tuple({2, 0, 1}, {0, 0, 1}, 4.0);
    auto recs = solver.find_resonances(
        table, initial,
        {NumberStateLabel{{2, 1, 0}, i_towards_m}, NumberStateLabel{{2, 0, 1}, i_towards_r}},
        0.02);
    REQUIRE(recs.size() == 2);
    // both mirror-related candidates cross, at the same coupling
    CHECK(recs[0].has_crossing);
    CHECK(recs[1].has_crossing);
    CHECK(recs[0].g_star == Catch::Approx(recs[1].g_star).margin(1e-3));
    CHECK(recs[0].residual < 1e-4);
    CHECK(recs[0].g_star > 3.0);
    CHECK(recs[0].g_star < 7.0);
}

TEST_CASE("a tilt splits the two first-band crossings", "[numberstate][slow]") {
    NumberStateSolver tilted(opts(0.1));
    std::vector<double> grid;
    for (double g = 0.0; g <= 10.0 + 1e-9; g += 1.0) grid.push_back(g);
    SpectrumTable table = tilted.onsite_energy_scan(3, grid);
    NumberStateLabel initial{{3, 0, 0}, 0};
    // identify the candidates by their physical tuples
    const SpectrumRow* toM = table.find({2, 1, 0}, {0, 1, 0});
    const SpectrumRow* toR = table.find({2, 0, 1}, {0, 0, 1});
    REQUIRE(toM);
    REQUIRE(toR);
    const SpectrumRow* init = table.find({3, 0, 0}, {0, 0, 0});
    auto recM = tilted.locate_crossing(table, *init, *toM, initial, {{2, 1, 0}, 0}, 0.02);
    auto recR = tilted.locate_crossing(table, *init, *toR, initial, {{2, 0, 1}, 0}, 0.02);
    REQUIRE(recM.has_crossing);
    REQUIRE(recR.has_crossing);
    CHECK(std::abs(recM.g_star - recR.g_star) > 0.2);
    CHECK(recR.g_star > recM.g_star);  // the right well is tilted further away
}

TEST_CASE("second-band partner only approaches asymptotically", "[numberstate][slow]") {
    NumberStateSolver solver(opts());
    std::vector<double> grid = {0.0, 5.0, 10.0, 20.0, 40.0, 80.0, 160.0};
    SpectrumTable table = solver.onsite_energy_scan(3, grid);
    const SpectrumRow* init = table.find({0, 3, 0}, {0, 0, 0});
    const SpectrumRow* cand = table.find({1, 2, 0}, {2, 0, 0});
    REQUIRE(init);
    REQUIRE(cand);
    auto rec = solver.locate_crossing(table, *init, *cand, {{0, 3, 0}, 0}, {{1, 2, 0}, 3}, 0.3);
    CHECK_FALSE(rec.has_crossing);
    // the gap shrinks monotonically toward degeneracy
    double prev = 1e300;
    for (std::size_t s = 0; s < grid.size(); ++s) {
        const double gap = std::abs(init->energies[s] - cand->energies[s]);
        CHECK(gap < prev + 1e-12);
        prev = gap;
    }
    CHECK(rec.has_window);
    CHECK(rec.closest_gap < 0.3);
}
