#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <sstream>

#include "degenwave/rays.hpp"
#include "doctest.h"

using namespace degenwave;

TEST_CASE("hamiltonian evaluation") {
    const RayField f = RayField::linear_shear();
    const double lam = 3.0;
    CHECK(hamiltonian(f, {0.0, 1.0, 0.0}, {lam, -lam, 0.0}) ==
          doctest::Approx(std::sqrt(2.0) * lam * lam));
    CHECK(hamiltonian(f, {0.0, 1.0, 0.0}, {0.0, 2.0, 0.0}) == doctest::Approx(0.0));
    CHECK(hamiltonian(f, {0.0, 0.0, 0.0}, {lam, -lam, 0.0}) == doctest::Approx(0.0));
    CHECK_THROWS_AS(hamiltonian(f, {0.0, 1.0, 0.0}, {0.0, 0.0, 0.0}), ZeroFrequency);
}

TEST_CASE("closed form initial data and asymptotics") {
    const RayState s0 = explicit_ray_linear(4.0, 0.0);
    CHECK(s0.pos.y == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s0.freq.y == doctest::Approx(-4.0).epsilon(1e-15));
    CHECK(s0.pos.x == doctest::Approx(0.0).epsilon(1e-14));

    const RayState s = explicit_ray_linear(4.0, 0.5);
    CHECK(s.pos.y == doctest::Approx(0.15807).epsilon(2e-4));
    CHECK(s.freq.y == doctest::Approx(-35.569).epsilon(2e-4));

    // y(t) ~ e^{-lambda t} within a factor of 4 for lambda t in [2, 6]
    for (double lt : {2.0, 3.5, 6.0}) {
        const RayState a = explicit_ray_linear(2.0, lt / 2.0);
        const double ratio = a.pos.y * std::exp(lt);
        CHECK(ratio > 0.25);
        CHECK(ratio < 4.0);
    }
}

TEST_CASE("rk4 against the closed form") {
    const RayField f = RayField::linear_shear();
    for (double lam : {2.0, 4.0, 8.0}) {
        const RayTrajectory traj =
            integrate_ray(f, {0.0, 1.0, 0.0}, {lam, -lam, 0.0}, 1.0, 1e-4, 500);
        double worst = 0.0;
        double sy = 1.0, sxi = 1.0;
        for (const auto& s : traj.samples) {
            const RayState ex = explicit_ray_linear(lam, s.t);
            sy = std::max(sy, std::abs(ex.pos.y));
            sxi = std::max(sxi, std::abs(ex.freq.y));
        }
        for (const auto& s : traj.samples) {
            const RayState ex = explicit_ray_linear(lam, s.t);
            worst = std::max(worst, std::abs(s.pos.y - ex.pos.y) / sy);
            worst = std::max(worst, std::abs(s.freq.y - ex.freq.y) / sxi);
            worst = std::max(worst, std::abs(s.pos.x - ex.pos.x) /
                                        std::max(1.0, std::abs(ex.pos.x)));
        }
        CHECK(worst <= 1e-8);
    }
    // t_end = 0: single initial sample
    const RayTrajectory still = integrate_ray(f, {0.0, 1.0, 0.0}, {2.0, -2.0, 0.0}, 0.0, 1e-3);
    CHECK(still.samples.size() == 1);
}

TEST_CASE("conserved quantities along the flow") {
    const RayField f = RayField::linear_shear();
    const RayTrajectory traj = integrate_ray(f, {0.0, 1.0, 0.0}, {4.0, -4.0, 0.0}, 1.0, 1e-4, 50);
    const ConservedReport rep = conserved_report(f, traj);
    CHECK(rep.p_drift <= 1e-9);
    CHECK(rep.m1_drift <= 1e-12);  // xi_x is exactly constant for this field
    CHECK(rep.m2_drift <= 1e-12);
    // y |Xi| is conserved on B = y d/dx
    const double ref = traj.samples.front().pos.y * traj.samples.front().freq.norm();
    for (const auto& s : traj.samples)
        CHECK(s.pos.y * s.freq.norm() == doctest::Approx(ref).epsilon(1e-8));
}

TEST_CASE("sampled closed form has zero drift") {
    const RayField f = RayField::linear_shear();
    RayTrajectory traj;
    traj.p0 = hamiltonian(f, explicit_ray_linear(4.0, 0.0).pos, explicit_ray_linear(4.0, 0.0).freq);
    traj.momenta0 = {4.0, 0.0};
    for (int k = 0; k <= 20; ++k) traj.samples.push_back(explicit_ray_linear(4.0, 0.05 * k));
    const ConservedReport rep = conserved_report(f, traj);
    CHECK(rep.max() <= 1e-12);
}

TEST_CASE("order four convergence under step halving") {
    const RayField f = RayField::linear_shear();
    const double lam = 4.0, T = 0.5;
    auto end_err = [&](double dt) {
        const RayTrajectory t = integrate_ray(f, {0.0, 1.0, 0.0}, {lam, -lam, 0.0}, T, dt, 1 << 30);
        const RayState ex = explicit_ray_linear(lam, T);
        return std::abs(t.samples.back().pos.y - ex.pos.y) +
               std::abs(t.samples.back().freq.y - ex.freq.y) / lam;
    };
    const double e1 = end_err(2e-3), e2 = end_err(1e-3);
    CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.1));
}

TEST_CASE("translational sine profile conserves the momenta") {
    ProfilePtr prof = make_profile(ProfileKind::Translational, ProfileShape::sine(), 1.0);
    const RayField f = RayField::translational(prof);
    const RayTrajectory traj =
        integrate_ray(f, {0.0, 0.4, 0.0}, {4.0, -4.0, 1.0}, 1.0, 1e-4, 100);
    const ConservedReport rep = conserved_report(f, traj);
    CHECK(rep.p_drift <= 1e-9);
    CHECK(rep.m1_drift <= 1e-12);
    CHECK(rep.m2_drift <= 1e-12);
    // the packet's carrier moves toward the degeneracy
    CHECK(traj.samples.back().pos.y < 0.4);
}

TEST_CASE("axisymmetric profile conserves angular momentum") {
    ProfilePtr prof =
        make_profile_explicit(ProfileKind::Axisymmetric, ProfileShape::radial_sine(1.0), 1.0, 2.2);
    const RayField f = RayField::axisymmetric(prof);
    const RayTrajectory traj = integrate_ray(f, {1.8, 0.0, 0.0}, {1.0, 5.0, 1.0}, 1.0, 1e-4, 100);
    const ConservedReport rep = conserved_report(f, traj);
    CHECK(rep.p_drift <= 1e-9);
    CHECK(rep.m1_drift <= 1e-9);  // x xi_y - y xi_x
    CHECK(rep.m2_drift <= 1e-12);
}

TEST_CASE("exceptional family: frequency grows, position escapes") {
    const RayField f = RayField::exceptional(1.0, 1.0);
    const RayTrajectory traj = integrate_ray(f, {0.0, 1.0, 0.0}, {4.0, -4.0, 0.5}, 1.0, 1e-4, 100);
    const ConservedReport rep = conserved_report(f, traj);
    CHECK(rep.m1_drift <= 1e-10);
    CHECK(rep.m2_drift <= 1e-10);
    CHECK(rep.p_drift <= 1e-9);
    // |xi_y| grows and y(t) increases monotonically after the turn
    CHECK(std::abs(traj.samples.back().freq.y) > 10.0);
    double prev = traj.samples[traj.samples.size() / 2].pos.y;
    bool monotone = true;
    for (std::size_t k = traj.samples.size() / 2 + 1; k < traj.samples.size(); ++k) {
        if (traj.samples[k].pos.y < prev) monotone = false;
        prev = traj.samples[k].pos.y;
    }
    CHECK(monotone);
}

TEST_CASE("frequency collapse is detected") {
    // run the linear-shear ray backwards in effect by flipping the sign of xi_y:
    // the frequency shrinks toward the turning point; a capped run stays fine
    const RayField f = RayField::linear_shear();
    CHECK_NOTHROW(integrate_ray(f, {0.0, 0.5, 0.0}, {2.0, 2.0, 0.0}, 0.5, 1e-4));
}

TEST_CASE("trajectory csv dump") {
    const RayField f = RayField::linear_shear();
    const RayTrajectory traj = integrate_ray(f, {0.0, 1.0, 0.0}, {2.0, -2.0, 0.0}, 0.2, 1e-3, 10);
    std::ostringstream out;
    write_trajectory_csv(f, traj, out);
    const std::string s = out.str();
    CHECK(s.find("degenwave-csv") != std::string::npos);
    CHECK(s.find("t,x,y,z,xi_x,xi_y,xi_z,p,drift_p,drift_m1,drift_m2") != std::string::npos);
}
