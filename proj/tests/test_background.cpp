#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <functional>
#include <sstream>

#include "degenwave/profile.hpp"
#include "degenwave/ops.hpp"
#include "doctest.h"

using namespace degenwave;

namespace {

// independent quadrature oracle (adaptive Simpson)
double simpson_oracle(const std::function<double(double)>& f, double a, double b,
                      double tol = 1e-13, int depth = 60) {
    std::function<double(double, double, double, double, double, double, int)> rec =
        [&](double lo, double hi, double flo, double fm, double fhi, double whole,
            int d) -> double {
        const double m = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + m), rm = 0.5 * (m + hi);
        const double flm = f(lm), frm = f(rm);
        const double left = (m - lo) / 6.0 * (flo + 4.0 * flm + fm);
        const double right = (hi - m) / 6.0 * (fm + 4.0 * frm + fhi);
        if (d <= 0 || std::abs(left + right - whole) < 15.0 * tol)
            return left + right + (left + right - whole) / 15.0;
        return rec(lo, m, flo, flm, fm, left, d - 1) + rec(m, hi, fm, frm, fhi, right, d - 1);
    };
    const double fm = f(0.5 * (a + b));
    return rec(a, b, f(a), fm, f(b), (b - a) / 6.0 * (f(a) + 4.0 * fm + f(b)), depth);
}

}  // namespace

TEST_CASE("window selection for f = sin") {
    ProfilePtr p = make_profile(ProfileKind::Translational, ProfileShape::sine(), 1.0);
    // the f < 1/2 constraint binds: y1 = arcsin(1/2), located by a bisection oracle
    double lo = 0.1, hi = 1.0;
    for (int i = 0; i < 80; ++i) {
        const double m = 0.5 * (lo + hi);
        (std::sin(m) < 0.5 ? lo : hi) = m;
    }
    CHECK(p->y0() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(p->c0() == doctest::Approx(1.0));
    CHECK(p->y1() == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-9));
    CHECK(p->y1() == doctest::Approx(Grid::pi() / 6.0).epsilon(1e-9));
}

TEST_CASE("no degeneracy and empty windows are rejected") {
    ProfileShape s;
    s.name = "one_plus_cos";
    s.f = [](double y) { return 1.0 + std::cos(y); };
    s.bracket_lo = 0.5;
    s.bracket_hi = 6.0;
    CHECK_THROWS_AS(make_profile(ProfileKind::Translational, s, 1.0), NoDegeneracy);
    CHECK_THROWS_AS(make_profile(ProfileKind::Translational, ProfileShape::sine(), -0.5),
                    WindowEmpty);
}

TEST_CASE("linear profile closed forms") {
    // synthetic window: f(y) = y up to y1 = 1 (f < 1/2 fails there on purpose)
    ProfilePtr p = make_profile_explicit(ProfileKind::Translational, ProfileShape::linear(), 0.0,
                                         1.0);
    for (double y : {0.9, 0.5, std::exp(-1.0), 0.2, 0.05, 1e-3}) {
        CHECK(p->eta_of_y(y) == doctest::Approx(std::log(y)).epsilon(1e-10));
    }
    CHECK(p->eta_of_y(std::exp(-1.0)) == doctest::Approx(-1.0).epsilon(1e-10));
    CHECK(p->eta_of_y(1.0) == doctest::Approx(0.0).epsilon(1e-12));
    for (double eta : {-0.3, -1.0, -4.0, -10.0})
        CHECK(p->y_of_eta(eta) == doctest::Approx(std::exp(eta)).epsilon(1e-10));
    // f(eta) = e^eta at table nodes, to 1e-10
    for (int i = 0; i < p->table_size(); i += 997) {
        const double eta = p->table_eta(i);
        CHECK(std::abs(p->table_f(i) - std::exp(eta)) <= 1e-10);
    }
}

TEST_CASE("phase integral g_of_eta") {
    ProfilePtr p =
        make_profile_explicit(ProfileKind::Translational, ProfileShape::linear(), 0.0, 1.0);
    // oracle: integral of (sqrt(1 - e^{2s}) - 1) over (-inf, 0] via u = e^s
    const double oracle =
        simpson_oracle([](double u) { return (std::sqrt(std::max(0.0, 1.0 - u * u)) - 1.0) / u; },
                       1e-9, 1.0);
    // the 1e-9..1 truncation error is ~ 2.5e-19 (integrand ~ -u/2 near 0)
    CHECK(oracle == doctest::Approx(std::log(2.0) - 1.0).epsilon(1e-8));
    CHECK(p->g_of_eta(0.0) == doctest::Approx(std::log(2.0) - 1.0).epsilon(1e-7));
    // tail decay: g(eta) - eta vanishes at depth like f^2
    const double em = p->eta_min();
    CHECK(std::abs(p->g_of_eta(em) - em) <= std::exp(2.0 * em) / 2.0 + 1e-12);
    // dG/deta = sqrt(1 - f^2) by centered differences
    for (double eta : {-0.5, -2.0, -7.5}) {
        const double h = 1e-5;
        const double d = (p->g_of_eta(eta + h) - p->g_of_eta(eta - h)) / (2.0 * h);
        const double f = p->f_of_eta(eta);
        CHECK(d == doctest::Approx(std::sqrt(1.0 - f * f)).epsilon(1e-7));
    }

    // constant-f synthetic window: g is linear in eta
    ProfileShape flat;
    flat.name = "offset_linear";
    flat.f = [](double y) { return 0.3 + 0.05 * (y - 1.0); };
    flat.bracket_lo = 0.0;
    flat.bracket_hi = 2.0;
    ProfilePtr q = make_profile_explicit(ProfileKind::Translational, flat, -5.0, 1.0);
    const double g1 = q->g_of_eta(-0.2), g2 = q->g_of_eta(-0.1);
    const double fmid = q->f_of_eta(-0.15);
    CHECK((g2 - g1) / 0.1 == doctest::Approx(std::sqrt(1.0 - fmid * fmid)).epsilon(1e-4));
}

TEST_CASE("eta quadrature oracle for f = sin") {
    ProfilePtr p = make_profile(ProfileKind::Translational, ProfileShape::sine(), 1.0);
    const double y1 = p->y1();
    const double target = Grid::pi() / 12.0;
    const double oracle = -simpson_oracle([](double y) { return 1.0 / std::sin(y); }, target, y1);
    const double closed = std::log(std::tan(0.5 * target) / std::tan(0.5 * y1));
    CHECK(oracle == doctest::Approx(closed).epsilon(1e-11));
    CHECK(p->eta_of_y(target) == doctest::Approx(oracle).epsilon(1e-8));
    // mutual inversion and monotonicity
    for (double y : {0.9 * y1, 0.6 * y1, 0.3 * y1, 0.05 * y1}) {
        CHECK(p->y_of_eta(p->eta_of_y(y)) == doctest::Approx(y).epsilon(1e-8));
    }
    CHECK_THROWS_AS(p->eta_of_y(-0.1), OutOfWindow);
    CHECK_THROWS_AS(p->eta_of_y(2.0 * y1), OutOfWindow);
    CHECK_THROWS_AS(p->g_of_eta(0.5), OutOfWindow);
}

TEST_CASE("chain rule consistency of the tables") {
    ProfilePtr p = make_profile(ProfileKind::Translational, ProfileShape::sine(), 1.0);
    for (int i = 5; i < p->table_size() - 5; i += 1771) {
        const double eta = p->table_eta(i);
        const double y = p->y_of_eta(eta);
        // step scaled by f so the eta increment stays in the linear regime
        const double h = 3e-4 * p->f(y);
        if (!(y - 2 * h > p->y0() && y + 2 * h < p->y1())) continue;
        const double deta_dy = (8.0 * (p->eta_of_y(y + h) - p->eta_of_y(y - h)) -
                                (p->eta_of_y(y + 2 * h) - p->eta_of_y(y - 2 * h))) /
                               (12.0 * h);
        CHECK(p->f(y) * deta_dy == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("exponential envelope of the eta-derivatives") {
    ProfilePtr p = make_profile(ProfileKind::Translational, ProfileShape::sine(), 1.0);
    const double c0 = p->c0();
    // fit C once near the top of the table, then check the bound at depth
    auto df_deta = [&](double eta) {
        return p->f_of_eta(eta) * p->fp(p->y_of_eta(eta));
    };
    const double C = 2.0 * std::abs(df_deta(-0.5)) / std::exp(-0.5 * c0);
    for (double eta : {-2.0, -5.0, -10.0, -20.0}) {
        CHECK(std::abs(df_deta(eta)) <= C * std::exp(c0 * eta));
    }
}

TEST_CASE("stationarity verification") {
    auto grid = Grid::make(64, 64);
    ProfilePtr sin_prof = make_profile(ProfileKind::Translational, ProfileShape::sine(), 1.0);
    StationarityReport r1 = verify_stationary(*sin_prof, *grid);
    CHECK(r1.div_linf <= 1e-11);
    CHECK(r1.curl_transport_linf <= 1e-11);

    ProfilePtr axi =
        make_profile_explicit(ProfileKind::Axisymmetric, ProfileShape::radial_sine(1.0), 1.0, 2.0);
    StationarityReport r2 = verify_stationary(*axi, *grid);
    CHECK(r2.div_linf <= 1e-8);
    CHECK(r2.curl_transport_linf <= 1e-8);

    // adversarial non-stationary field: B = sin(y) d/dy has div = cos(y)
    ScalarField bx = ScalarField::zero(grid);
    ScalarField by =
        ScalarField::from_function(grid, [](double, double y) { return std::sin(y); });
    StationarityReport r3 = verify_stationary(bx, by);
    CHECK(r3.div_linf == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("evolved background semigroup and parity") {
    ProfilePtr p = make_profile(ProfileKind::Translational, ProfileShape::sine(), 1.0);
    std::vector<double> samples(256);
    for (int i = 0; i < 256; ++i) samples[i] = std::cos(2.0 * Grid::pi() * i / 256.0);
    FourierSeries1D f0 = FourierSeries1D::from_samples(2.0 * Grid::pi(), samples);
    EvolvedBackground eb = evolve_background(p, f0, 1.0, 0.5);
    // single mode |k| = 1, alpha = 1/2: f(1, y) = e^{-1} cos y
    const FourierSeries1D f1 = eb.f_at(1.0);
    CHECK(f1.eval(0.7) == doctest::Approx(std::exp(-1.0) * std::cos(0.7)).epsilon(1e-12));
    CHECK(f1.eval(0.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    // t = 0 identity
    CHECK(eb.f_at(0.0).eval(1.1) == doctest::Approx(f0.eval(1.1)).epsilon(1e-14));
    // semigroup
    FourierSeries1D two_steps = eb.f_at(0.3).decayed(1.0, 0.5, 0.45);
    CHECK(two_steps.eval(0.9) == doctest::Approx(eb.f_at(0.75).eval(0.9)).epsilon(1e-12));
    // odd data stays odd with a fixed zero
    std::vector<double> odd(256);
    for (int i = 0; i < 256; ++i) odd[i] = std::sin(2.0 * Grid::pi() * i / 256.0) +
                                           0.25 * std::sin(6.0 * Grid::pi() * i / 256.0);
    FourierSeries1D fodd = FourierSeries1D::from_samples(2.0 * Grid::pi(), odd);
    EvolvedBackground ebo = evolve_background(p, fodd, 0.7, 0.25);
    const FourierSeries1D ft = ebo.f_at(2.0);
    CHECK(std::abs(ft.eval(0.0)) <= 1e-13);
    CHECK(ft.eval(0.4) == doctest::Approx(-ft.eval(-0.4)).epsilon(1e-12));
}

TEST_CASE("admissible dissipative initial profile") {
    for (double alpha : {0.25, 0.75}) {
        FradissBackground fb = make_fradiss_background(alpha);
        AdmissibilityReport rep = check_f0_admissible(fb.f0, alpha);
        CHECK(rep.admissible);
        CHECK(rep.frac_lap_linf_window <= 1e-8);
        CHECK(rep.odd_symmetry_linf <= 1e-10);
        CHECK(fb.profile->c0() == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(fb.profile->y1() > 0.2);
    }
    // sin is not admissible: (-Delta)^alpha sin = sin on the window
    std::vector<double> samples(256);
    for (int i = 0; i < 256; ++i) samples[i] = std::sin(2.0 * Grid::pi() * i / 256.0);
    FourierSeries1D s = FourierSeries1D::from_samples(2.0 * Grid::pi(), samples);
    CHECK_FALSE(check_f0_admissible(s, 0.25).admissible);
    // even data fails the odd-symmetry check
    for (int i = 0; i < 256; ++i) samples[i] = std::cos(2.0 * Grid::pi() * i / 256.0);
    FourierSeries1D c = FourierSeries1D::from_samples(2.0 * Grid::pi(), samples);
    CHECK(check_f0_admissible(c, 0.25).odd_symmetry_linf > 0.1);
}

TEST_CASE("profile export and import round trip") {
    ProfilePtr p = make_profile(ProfileKind::Translational, ProfileShape::sine(), 1.0);
    std::stringstream buf;
    export_profile(*p, buf, 600);
    ProfilePtr q = import_profile(buf);
    CHECK(q->y0() == doctest::Approx(p->y0()).epsilon(1e-8));
    CHECK(q->y1() == doctest::Approx(p->y1()).epsilon(1e-10));
    for (double y : {0.15, 0.3, 0.45}) {
        CHECK(q->f(y) == doctest::Approx(p->f(y)).epsilon(1e-8));
        CHECK(q->eta_of_y(y) == doctest::Approx(p->eta_of_y(y)).epsilon(1e-5));
    }
}
