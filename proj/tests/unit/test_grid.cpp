#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include "triwell/grid.hpp"

using namespace triwell;

namespace {
double box_level(int n, double length) { return n * n * kPi * kPi / (2.0 * length * length); }
}  // namespace

TEST_CASE("potential evaluation on the full triple well", "[grid]") {
    GridSpec g = GridSpec::for_domain(Domain::FullTriple, 127);
    PotentialSpec flat(30.0);
    Eigen::VectorXd v = evaluate_potential(flat, g);

    // closest grid points to x=0 and x=pi/2
    auto value_at = [&](double x0) {
        int best = 0;
        double dist = 1e9;
        for (int k = 0; k < g.n_points; ++k)
            if (std::abs(g.point(k) - x0) < dist) {
                dist = std::abs(g.point(k) - x0);
                best = k;
            }
        return std::pair{g.point(best), v[best]};
    };
    auto [x_mid, v_mid] = value_at(0.0);
    CHECK(std::abs(v_mid - 30.0 * std::sin(x_mid) * std::sin(x_mid)) < 1e-12);
    CHECK(v_mid < 0.2);  // near the well bottom
    auto [x_top, v_top] = value_at(kPi / 2);
    CHECK(v_top == Catch::Approx(30.0 * std::sin(x_top) * std::sin(x_top)));
    CHECK(v_top > 29.5);

    PotentialSpec tilted(30.0, 0.1);
    Eigen::VectorXd vt = evaluate_potential(tilted, g);
    for (int k = 0; k < g.n_points; ++k)
        CHECK(vt[k] == Catch::Approx(v[k] + 0.1 * g.point(k)));
}

TEST_CASE("domain mismatch is a configuration error", "[grid]") {
    GridSpec g = GridSpec::for_domain(Domain::SubWellMiddle, 41);
    CHECK_THROWS_AS(evaluate_potential(PotentialSpec(30.0, 0.0, Domain::FullTriple), g),
                    config_error);
    CHECK_THROWS_AS(GridSpec(1.0, -1.0, 41), config_error);
    CHECK_THROWS_AS(GridSpec(0.0, 1.0, 4), config_error);
}

TEST_CASE("kinetic matrices are symmetric and reproduce box spectra", "[grid]") {
    for (auto scheme : {KineticScheme::FiniteDifference, KineticScheme::SineDvr}) {
        GridSpec g = GridSpec::for_domain(Domain::FullTriple, 101);
        Eigen::MatrixXd t = kinetic_operator(g, scheme);
        CHECK((t - t.transpose()).cwiseAbs().maxCoeff() == 0.0);

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
        const double tol = scheme == KineticScheme::SineDvr ? 1e-10 : 2e-3;
        CHECK(std::abs(es.eigenvalues()[0] - box_level(1, 3 * kPi)) <
              tol * box_level(1, 3 * kPi) + (scheme == KineticScheme::SineDvr ? 1e-12 : 0.0));
        // L = 3pi box: lowest level 1/18
        CHECK(es.eigenvalues()[0] == Catch::Approx(1.0 / 18.0).epsilon(2e-3));
    }
    // sub-well box: L = pi, levels n^2/2
    GridSpec s = GridSpec::for_domain(Domain::SubWellMiddle, 61);
    Eigen::MatrixXd t = kinetic_operator(s, KineticScheme::SineDvr);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    CHECK(es.eigenvalues()[0] == Catch::Approx(0.5).epsilon(1e-10));
    CHECK(es.eigenvalues()[1] == Catch::Approx(2.0).epsilon(1e-10));
    CHECK(es.eigenvalues()[2] == Catch::Approx(4.5).epsilon(1e-10));
}

TEST_CASE("box-spectrum error decreases monotonically as the grid doubles", "[grid]") {
    // finite differences: relative error of the lowest 5 levels vs n^2 pi^2/(2L^2)
    double prev[5] = {1e9, 1e9, 1e9, 1e9, 1e9};
    for (int n : {31, 63, 127}) {
        GridSpec g = GridSpec::for_domain(Domain::FullTriple, n);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
            kinetic_operator(g, KineticScheme::FiniteDifference));
        for (int i = 0; i < 5; ++i) {
            const double exact = box_level(i + 1, 3 * kPi);
            const double rel = std::abs(es.eigenvalues()[i] - exact) / exact;
            CHECK(rel < prev[i]);
            prev[i] = rel;
        }
    }
}

TEST_CASE("sub-well potential agrees pointwise with the full-domain restriction", "[grid]") {
    const int n_sub = 41;
    GridSpec sub = GridSpec::for_domain(Domain::SubWellMiddle, n_sub);
    GridSpec full = GridSpec::for_domain(Domain::FullTriple, aligned_full_points(n_sub));
    CHECK(sub.spacing() == Catch::Approx(full.spacing()).epsilon(1e-14));

    Eigen::VectorXd v_sub = evaluate_potential(PotentialSpec(30.0, 0.0, Domain::SubWellMiddle), sub);
    Eigen::VectorXd v_full = evaluate_potential(PotentialSpec(30.0), full);
    const int off = subwell_offset(1, n_sub);
    for (int k = 0; k < n_sub; ++k)
        CHECK(v_sub[k] == Catch::Approx(v_full[off + k]).margin(1e-12));
    // the sub-well boundary points of the aligned full grid sit at +-pi/2
    CHECK(full.point(subwell_offset(1, n_sub) - 1) == Catch::Approx(-kPi / 2).margin(1e-12));
    CHECK(full.point(subwell_offset(2, n_sub) - 1) == Catch::Approx(kPi / 2).margin(1e-12));
}
