#include "degenwave/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace degenwave {

SolverVariant parse_variant(const std::string& name) {
    if (name == "emhd_linear" || name == "emhd_fradiss") return SolverVariant::EmhdLinear;
    if (name == "emhd_nonlinear") return SolverVariant::EmhdNonlinear;
    if (name == "hall_linear" || name == "hall_fradiss") return SolverVariant::HallLinear;
    throw ValidationError("unknown solver variant '" + name + "'");
}

SolverBackground SolverBackground::constant(double c) {
    return SolverBackground(FourierSeries1D(2.0 * Grid::pi(), {Complex(c)}));
}

SolverBackground SolverBackground::from_series(FourierSeries1D f0) {
    return SolverBackground(std::move(f0));
}

SolverBackground SolverBackground::from_profile(const BackgroundProfile& profile, int samples) {
    std::vector<double> v(samples);
    for (int i = 0; i < samples; ++i) v[i] = profile.f(2.0 * Grid::pi() * i / samples);
    return SolverBackground(FourierSeries1D::from_samples(2.0 * Grid::pi(), v));
}

FourierSeries1D SolverBackground::at(double t, double eta_diss, double alpha,
                                     bool evolving) const {
    if (!evolving || t == 0.0 || eta_diss == 0.0) return f0_;
    return f0_.decayed(eta_diss, alpha, t);
}

double SolverBackground::max_abs() const {
    double m = 0.0;
    for (int i = 0; i < 512; ++i)
        m = std::max(m, std::abs(f0_.eval(f0_.period() * i / 512.0)));
    return m;
}

Solver::Solver(GridPtr grid, SolverBackground background, SolverParams params)
    : grid_(std::move(grid)), background_(std::move(background)), params_(params) {
    nfields_ = params_.variant == SolverVariant::HallLinear ? 4 : 2;
    refresh_rows(0.0);
}

void Solver::refresh_rows(double t) const {
    if (!frow_.empty() && (rows_t_ == t || !params_.evolving_background)) return;
    const FourierSeries1D f =
        background_.at(t, params_.eta_diss, params_.alpha, params_.evolving_background);
    frow_ = f.sample_rows(*grid_, 0);
    fpprow_ = f.sample_rows(*grid_, 2);
    rows_t_ = t;
}

SolverState Solver::make_state(const ScalarField& bz, const ScalarField& psi) const {
    if (nfields_ != 2) throw ValidationError("this solver variant carries four fields");
    require_same_grid(bz, psi);
    if (!bz.grid()->same_as(*grid_)) throw GridMismatch("state grid differs from solver grid");
    SolverState s;
    s.fields = {bz.spec(), psi.spec()};
    for (auto& f : s.fields) spectral::apply_dealias(*grid_, f);
    s.fields[1][0] = 0.0;  // mean-zero stream function
    return s;
}

SolverState Solver::make_state(const ScalarField& uz, const ScalarField& omega,
                               const ScalarField& bz, const ScalarField& psi) const {
    if (nfields_ != 4) throw ValidationError("this solver variant carries two fields");
    SolverState s;
    s.fields = {uz.spec(), omega.spec(), bz.spec(), psi.spec()};
    for (auto& f : s.fields) spectral::apply_dealias(*grid_, f);
    s.fields[3][0] = 0.0;
    if (std::abs(s.fields[1][0]) > 1e-12)
        throw ValidationError("vorticity must have zero mean");
    return s;
}

SolverState Solver::state_from_packet(const WavePacket& packet, double t, bool zero_fluid) const {
    const PacketFields pf = packet.evaluate(grid_, t);
    if (nfields_ == 2) return make_state(pf.bz, pf.psi);
    if (zero_fluid) {
        ScalarField z = ScalarField::zero(grid_);
        return make_state(z, z, pf.bz, pf.psi);
    }
    return make_state(pf.psi * -1.0, pf.bz * -1.0, pf.bz, pf.psi);
}

ScalarField Solver::field(const SolverState& s, int index) const {
    return ScalarField::from_spectral(grid_, s.fields[index]);
}

double Solver::omega_mean(const SolverState& s) const {
    return nfields_ == 4 ? std::abs(s.fields[1][0]) : 0.0;
}

namespace {

void ddy(const Grid& g, const std::vector<Complex>& in, std::vector<Complex>& out) {
    const int nx = g.nx(), nyc = g.nyc();
    out.resize(in.size());
    for (int i = 0; i < nx; ++i)
        for (int m = 0; m < nyc; ++m) {
            const Complex f = (m == g.ny() / 2) ? Complex(0.0) : Complex(0.0, g.ky(m));
            out[static_cast<std::size_t>(i) * nyc + m] =
                f * in[static_cast<std::size_t>(i) * nyc + m];
        }
}

void inv_neg_lap(const Grid& g, const std::vector<Complex>& in, std::vector<Complex>& out) {
    // (-Delta)^{-1}: coefficient / |k|^2, zero mode dropped
    const int nx = g.nx(), nyc = g.nyc();
    out.resize(in.size());
    for (int i = 0; i < nx; ++i) {
        const double kx2 = g.kx(i) * g.kx(i);
        for (int m = 0; m < nyc; ++m) {
            const double k2 = kx2 + g.ky(m) * g.ky(m);
            const std::size_t k = static_cast<std::size_t>(i) * nyc + m;
            out[k] = k2 == 0.0 ? Complex(0.0) : in[k] / k2;
        }
    }
}

}  // namespace

void Solver::nonlinear_rhs(const Fields& in, double t, Fields& out) const {
    refresh_rows(t);
    const Grid& g = *grid_;
    const std::size_t np = g.size_phys(), ns = g.size_spec();
    const int ny = g.ny();
    out.resize(nfields_);
    for (auto& f : out) f.resize(ns);

    ctmp_.resize(ns);
    ctmp2_.resize(ns);
    for (auto& buf : ptmp_) buf.resize(np);
    auto& tmp = ctmp_;
    auto& tmp2 = ctmp2_;
    auto& pxbz = ptmp_[0];
    auto& pxpsi = ptmp_[1];
    auto& pxlap = ptmp_[2];
    auto& work = ptmp_[3];
    auto& acc = ptmp_[4];
    const auto& bz = in[nfields_ == 4 ? 2 : 0];
    const auto& psi = in[nfields_ == 4 ? 3 : 1];

    spectral::ddx(g, bz, tmp);
    g.backward(tmp.data(), pxbz.data());
    spectral::ddx(g, psi, tmp);
    g.backward(tmp.data(), pxpsi.data());
    spectral::scale_by_k2(g, psi, tmp2, -1.0);  // Delta psi
    spectral::ddx(g, tmp2, tmp);
    g.backward(tmp.data(), pxlap.data());

    auto frow = [&](std::size_t k) { return frow_[k % ny]; };
    auto fpprow = [&](std::size_t k) { return fpprow_[k % ny]; };

    if (params_.variant == SolverVariant::EmhdLinear ||
        params_.variant == SolverVariant::EmhdNonlinear) {
        // d(bz)/dt = f dx(Delta psi) - f'' dx(psi) [- perp(psi).grad(Delta psi)]
        // d(psi)/dt = -f dx(bz) [+ perp(psi).grad(bz)]
        for (std::size_t k = 0; k < np; ++k)
            acc[k] = frow(k) * pxlap[k] - fpprow(k) * pxpsi[k];
        if (params_.variant == SolverVariant::EmhdNonlinear) {
            auto& dypsi = ptmp_[5];
            auto& dyg = work;
            ddy(g, psi, tmp);
            g.backward(tmp.data(), dypsi.data());
            ddy(g, tmp2, tmp);  // dy Delta psi
            g.backward(tmp.data(), dyg.data());
            for (std::size_t k = 0; k < np; ++k)
                acc[k] -= -dypsi[k] * pxlap[k] + pxpsi[k] * dyg[k];
            g.forward(acc.data(), out[0].data());
            ddy(g, bz, tmp);
            g.backward(tmp.data(), dyg.data());  // dy bz
            for (std::size_t k = 0; k < np; ++k)
                acc[k] = -frow(k) * pxbz[k] + (-dypsi[k] * pxbz[k] + pxpsi[k] * dyg[k]);
            g.forward(acc.data(), out[1].data());
        } else {
            g.forward(acc.data(), out[0].data());
            for (std::size_t k = 0; k < np; ++k) work[k] = -frow(k) * pxbz[k];
            g.forward(work.data(), out[1].data());
        }
        spectral::apply_dealias(g, out[0]);
        spectral::apply_dealias(g, out[1]);
        out[0][0] = 0.0;
        out[1][0] = 0.0;
        return;
    }

    // Hall (linearized): uz, omega, bz, psi
    const auto& uz = in[0];
    const auto& om = in[1];
    auto& pxuz = ptmp_[5];
    auto& pxphi = acc;
    spectral::ddx(g, uz, tmp);
    g.backward(tmp.data(), pxuz.data());
    inv_neg_lap(g, om, tmp2);
    spectral::ddx(g, tmp2, tmp);
    g.backward(tmp.data(), pxphi.data());

    for (std::size_t k = 0; k < np; ++k) work[k] = frow(k) * pxbz[k];
    g.forward(work.data(), out[0].data());
    for (std::size_t k = 0; k < np; ++k) work[k] = fpprow(k) * pxpsi[k] - frow(k) * pxlap[k];
    g.forward(work.data(), out[1].data());
    for (std::size_t k = 0; k < np; ++k)
        work[k] = frow(k) * pxuz[k] - fpprow(k) * pxpsi[k] + frow(k) * pxlap[k];
    g.forward(work.data(), out[2].data());
    for (std::size_t k = 0; k < np; ++k) work[k] = frow(k) * (pxphi[k] - pxbz[k]);
    g.forward(work.data(), out[3].data());
    for (int f = 0; f < 4; ++f) {
        spectral::apply_dealias(g, out[f]);
        if (f != 1) out[f][0] = 0.0;
    }
}

std::vector<double> Solver::dissipation_multiplier(int field_index) const {
    const Grid& g = *grid_;
    std::vector<double> mult(g.size_spec(), 0.0);
    double strength = 0.0, order = 1.0;
    if (nfields_ == 4 && field_index < 2) {
        strength = params_.nu;
        order = 1.0 + params_.beta;
    } else {
        strength = params_.eta_diss;
        order = params_.alpha;
    }
    if (strength == 0.0) return mult;
    const int nx = g.nx(), nyc = g.nyc();
    for (int i = 0; i < nx; ++i) {
        const double kx2 = g.kx(i) * g.kx(i);
        for (int m = 0; m < nyc; ++m) {
            const double k2 = kx2 + g.ky(m) * g.ky(m);
            double k2a;
            if (k2 == 0.0)
                k2a = order == 0.0 ? 1.0 : 0.0;
            else
                k2a = std::pow(k2, order);
            mult[static_cast<std::size_t>(i) * nyc + m] = -strength * k2a;
        }
    }
    return mult;
}

SolverState Solver::rhs(const SolverState& s) const {
    SolverState out;
    out.t = s.t;
    nonlinear_rhs(s.fields, s.t, out.fields);
    if (params_.eta_diss != 0.0 || params_.nu != 0.0) {
        for (int f = 0; f < nfields_; ++f) {
            const std::vector<double> mult = dissipation_multiplier(f);
            for (std::size_t k = 0; k < mult.size(); ++k)
                out.fields[f][k] += mult[k] * s.fields[f][k];
        }
    }
    return out;
}

void Solver::apply_exp(Fields& fields, double dt, double scale) const {
    if (params_.eta_diss == 0.0 && params_.nu == 0.0) return;
    if (exp_dt_ != dt || exp_half_.empty()) {
        exp_half_.assign(nfields_, {});
        exp_full_.assign(nfields_, {});
        for (int f = 0; f < nfields_; ++f) {
            const std::vector<double> mult = dissipation_multiplier(f);
            exp_half_[f].resize(mult.size());
            exp_full_[f].resize(mult.size());
            for (std::size_t k = 0; k < mult.size(); ++k) {
                exp_half_[f][k] = std::exp(0.5 * mult[k] * dt);
                exp_full_[f][k] = std::exp(mult[k] * dt);
            }
        }
        exp_dt_ = dt;
    }
    const auto& table = scale == 0.5 ? exp_half_ : exp_full_;
    for (int f = 0; f < nfields_; ++f)
        for (std::size_t k = 0; k < table[f].size(); ++k) fields[f][k] *= table[f][k];
}

SolverState Solver::step(const SolverState& s, double dt) const {
    if (dt == 0.0) return s;
    // Lawson exponential RK4: the diagonal dissipation is integrated exactly,
    // the background/advective part N by classical RK4 stages.
    const bool diss = params_.eta_diss != 0.0 || params_.nu != 0.0;
    auto expf_inplace = [&](Fields& v, double scale) {
        if (diss) apply_exp(v, dt, scale);
    };
    auto axpy_inplace = [&](Fields& a, double c, const Fields& b) {
        for (int f = 0; f < nfields_; ++f)
            for (std::size_t k = 0; k < a[f].size(); ++k) a[f][k] += c * b[f][k];
    };

    const Fields& u = s.fields;
    Fields& a = stage_a_;
    Fields& b = stage_b_;
    Fields& c = stage_c_;
    Fields& d = stage_d_;
    Fields& stage = stage_u_;
    nonlinear_rhs(u, s.t, a);

    stage = u;
    axpy_inplace(stage, 0.5 * dt, a);
    expf_inplace(stage, 0.5);
    nonlinear_rhs(stage, s.t + 0.5 * dt, b);

    stage = u;
    expf_inplace(stage, 0.5);
    axpy_inplace(stage, 0.5 * dt, b);
    nonlinear_rhs(stage, s.t + 0.5 * dt, c);

    expf_inplace(c, 0.5);  // e^{hL/2} c, reused in the update
    stage = u;
    expf_inplace(stage, 1.0);
    axpy_inplace(stage, dt, c);
    nonlinear_rhs(stage, s.t + dt, d);

    SolverState out;
    out.t = s.t + dt;
    out.fields = u;
    expf_inplace(out.fields, 1.0);
    expf_inplace(a, 1.0);
    expf_inplace(b, 0.5);
    for (int f = 0; f < nfields_; ++f)
        for (std::size_t k = 0; k < out.fields[f].size(); ++k)
            out.fields[f][k] +=
                dt / 6.0 * (a[f][k] + 2.0 * b[f][k] + 2.0 * c[f][k] + d[f][k]);
    // mean-zero projection (exact no-op up to roundoff for these systems)
    out.fields[out.psi_index()][0] = 0.0;
    out.fields[out.bz_index()][0] = 0.0;
    if (nfields_ == 4) out.fields[0][0] = 0.0;
    for (int f = 0; f < nfields_; ++f) {
        if (!std::isfinite(out.fields[f][1].real()))
            throw BlowUp("non-finite field after time step");
    }
    return out;
}

double Solver::cfl_dt(const SolverState& s, double safety) const {
    const Grid& g = *grid_;
    refresh_rows(s.t);
    double fmax = 0.0;
    for (double v : frow_) fmax = std::max(fmax, std::abs(v));
    const double kx_max = g.kx_cutoff();
    const double k_max = std::hypot(g.kx_cutoff(), g.ky_cutoff());
    double denom = fmax * kx_max * k_max;
    if (params_.eta_diss > 0.0) denom += params_.eta_diss * std::pow(k_max, 2.0 * params_.alpha);
    if (params_.nu > 0.0) denom += params_.nu * std::pow(k_max, 2.0 + 2.0 * params_.beta);
    if (params_.variant == SolverVariant::EmhdNonlinear) {
        // advective bound from the perturbation velocity
        std::vector<Complex> tmp(g.size_spec());
        std::vector<double> dx(g.size_phys()), dy(g.size_phys());
        spectral::ddx(g, s.fields[s.psi_index()], tmp);
        g.backward(tmp.data(), dx.data());
        ddy(g, s.fields[s.psi_index()], tmp);
        g.backward(tmp.data(), dy.data());
        double vmax = 0.0;
        for (std::size_t k = 0; k < dx.size(); ++k)
            vmax = std::max(vmax, std::hypot(dx[k], dy[k]));
        denom += vmax * k_max;
    }
    if (denom == 0.0) return std::numeric_limits<double>::infinity();
    return safety / denom;
}

double Solver::energy(const SolverState& s) const {
    const Grid& g = *grid_;
    const auto& bz = s.fields[s.bz_index()];
    const auto& psi = s.fields[s.psi_index()];
    double e = 0.5 * (spectral::inner_grad(g, psi, psi) + spectral::inner(g, bz, bz));
    if (params_.variant == SolverVariant::EmhdNonlinear) {
        // total field energy: add the background and the cross term
        refresh_rows(s.t);
        const FourierSeries1D f =
            background_.at(s.t, params_.eta_diss, params_.alpha, params_.evolving_background);
        double f2 = 0.0;
        const int nsamp = 4096;
        for (int i = 0; i < nsamp; ++i) {
            const double v = f.eval(g.ly() * i / nsamp);
            f2 += v * v;
        }
        e += 0.5 * g.lx() * g.ly() * f2 / nsamp;
        // cross term <f, dy psi> via the kx = 0 row
        double cross = 0.0;
        const int nyc = g.nyc();
        const double k0 = 2.0 * Grid::pi() / f.period();
        for (int m = 1; m < std::min(nyc - 1, f.modes()); ++m) {
            const Complex dpsi = Complex(0.0, g.ky(m)) * psi[m];  // kx = 0 row
            cross += 2.0 * (std::conj(f.coeffs()[m]) * dpsi).real();
            (void)k0;
        }
        e += g.lx() * g.ly() * cross;
    }
    if (nfields_ == 4) {
        const auto& uz = s.fields[0];
        const auto& om = s.fields[1];
        e += 0.5 * (spectral::inner(g, uz, uz) + spectral::inner_invlap(g, om, om));
    }
    return e;
}

double Solver::energy_rate_predicted(const SolverState& s) const {
    const Grid& g = *grid_;
    refresh_rows(s.t);
    const std::size_t np = g.size_phys();
    const int ny = g.ny();
    const auto& bz = s.fields[s.bz_index()];
    const auto& psi = s.fields[s.psi_index()];
    double rate = 0.0;

    if (params_.variant != SolverVariant::EmhdNonlinear) {
        // exchange term -<f'' dx psi, bz> (+ <f'' dx psi, (-Delta)^{-1} omega> for Hall)
        std::vector<Complex> tmp(g.size_spec());
        std::vector<double> pxpsi(np), pbz(np);
        spectral::ddx(g, psi, tmp);
        g.backward(tmp.data(), pxpsi.data());
        g.backward(bz.data(), pbz.data());
        double acc = 0.0;
        for (std::size_t k = 0; k < np; ++k) acc += fpprow_[k % ny] * pxpsi[k] * pbz[k];
        rate -= acc * g.cell_area();
        if (nfields_ == 4) {
            std::vector<Complex> phi;
            inv_neg_lap(g, s.fields[1], phi);
            std::vector<double> pphi(np);
            g.backward(phi.data(), pphi.data());
            double acc2 = 0.0;
            for (std::size_t k = 0; k < np; ++k) acc2 += fpprow_[k % ny] * pxpsi[k] * pphi[k];
            rate += acc2 * g.cell_area();
        }
    }
    // dissipative drains
    if (params_.eta_diss > 0.0 || params_.nu > 0.0) {
        const int nx = g.nx(), nyc = g.nyc(), nyq = g.ny() / 2;
        double drain = 0.0;
        for (int i = 0; i < nx; ++i) {
            const double kx2 = g.kx(i) * g.kx(i);
            for (int m = 0; m < nyc; ++m) {
                const double k2 = kx2 + g.ky(m) * g.ky(m);
                const double w = (m == 0 || m == nyq) ? 1.0 : 2.0;
                const std::size_t k = static_cast<std::size_t>(i) * nyc + m;
                if (params_.eta_diss > 0.0) {
                    const double k2a =
                        k2 == 0.0 ? (params_.alpha == 0.0 ? 1.0 : 0.0) : std::pow(k2, params_.alpha);
                    drain += params_.eta_diss * k2a * w *
                             (std::norm(bz[k]) + k2 * std::norm(psi[k]));
                }
                if (params_.nu > 0.0 && nfields_ == 4 && k2 > 0.0) {
                    const double k2b = std::pow(k2, 1.0 + params_.beta);
                    drain += params_.nu * k2b * w *
                             (std::norm(s.fields[0][k]) + std::norm(s.fields[1][k]) / k2);
                }
            }
        }
        rate -= drain * g.lx() * g.ly();
    }
    return rate;
}

TestingFunctional Solver::testing_functional(const SolverState& s, const WavePacket& packet) const {
    const Grid& g = *grid_;
    const PacketFields pf = packet.evaluate(grid_, s.t);
    TestingFunctional out;
    out.bb = spectral::inner_grad(g, pf.psi.spec(), s.fields[s.psi_index()]) +
             spectral::inner(g, pf.bz.spec(), s.fields[s.bz_index()]);
    if (nfields_ == 4) {
        // u~^z = -psi~, omega~ = -bz~
        out.uu = -spectral::inner(g, pf.psi.spec(), s.fields[0]) -
                 spectral::inner_invlap(g, pf.bz.spec(), s.fields[1]);
    }
    // exchange pairings of the bilinear identity
    refresh_rows(s.t);
    const std::size_t np = g.size_phys();
    const int ny = g.ny();
    std::vector<Complex> tmp(g.size_spec());
    std::vector<double> a(np), b(np);
    spectral::ddx(g, pf.psi.spec(), tmp);
    g.backward(tmp.data(), a.data());
    g.backward(s.fields[s.bz_index()].data(), b.data());
    double acc = 0.0;
    for (std::size_t k = 0; k < np; ++k) acc += fpprow_[k % ny] * a[k] * b[k];
    spectral::ddx(g, s.fields[s.psi_index()], tmp);
    g.backward(tmp.data(), a.data());
    g.backward(pf.bz.spec().data(), b.data());
    for (std::size_t k = 0; k < np; ++k) acc += fpprow_[k % ny] * a[k] * b[k];
    out.rhs_exchange = -acc * g.cell_area();
    if (nfields_ == 4) {
        // -<f' grad psi~, u^{x,y}> - <u~^{x,y}, f' grad psi>
        //   = <f'' dx psi~, (-D)^{-1} omega> + <(-D)^{-1} omega~, f'' dx psi>
        std::vector<Complex> phi;
        inv_neg_lap(g, s.fields[1], phi);
        std::vector<double> pphi(np);
        g.backward(phi.data(), pphi.data());
        spectral::ddx(g, pf.psi.spec(), tmp);
        g.backward(tmp.data(), a.data());
        double acc2 = 0.0;
        for (std::size_t k = 0; k < np; ++k) acc2 += fpprow_[k % ny] * a[k] * pphi[k];
        // omega~ = -bz~: (-D)^{-1} omega~ = -(-D)^{-1} bz~
        inv_neg_lap(g, pf.bz.spec(), phi);
        g.backward(phi.data(), pphi.data());
        spectral::ddx(g, s.fields[s.psi_index()], tmp);
        g.backward(tmp.data(), a.data());
        for (std::size_t k = 0; k < np; ++k) acc2 -= fpprow_[k % ny] * a[k] * pphi[k];
        out.rhs_exchange += acc2 * g.cell_area();
    }
    return out;
}

RunResult Solver::run(SolverState initial, const RunOptions& opts) const {
    RunResult res;
    SolverState s = std::move(initial);
    const Grid& g = *grid_;
    double dt = opts.dt;
    if (dt <= 0.0) {
        dt = cfl_dt(s, opts.cfl_safety);
        if (!std::isfinite(dt)) {
            res.aborted = true;
            res.abort_reason = "cfl_dt is unbounded; supply dt explicitly";
            res.final_state = std::move(s);
            return res;
        }
    }
    res.dt_used = dt;

    double prev_energy = 0.0, prev_t = 0.0;
    bool have_prev = false;
    double visc_accum = 0.0;

    auto record = [&](const SolverState& st) -> bool {
        DiagnosticsRecord r;
        r.t = st.t;
        const auto& bz = st.fields[st.bz_index()];
        const auto& psi = st.fields[st.psi_index()];
        r.l2_b = std::sqrt(spectral::inner_grad(g, psi, psi) + spectral::inner(g, bz, bz));
        if (nfields_ == 4)
            r.l2_u = std::sqrt(spectral::inner(g, st.fields[0], st.fields[0]) +
                               spectral::inner_invlap(g, st.fields[1], st.fields[1]));
        for (double sv : opts.s_list) {
            const int nx = g.nx(), nyc = g.nyc(), nyq = g.ny() / 2;
            double sum = 0.0;
            for (int i = 0; i < nx; ++i) {
                const double kx2 = g.kx(i) * g.kx(i);
                for (int m = 0; m < nyc; ++m) {
                    const double k2 = kx2 + g.ky(m) * g.ky(m);
                    const double w = (m == 0 || m == nyq) ? 1.0 : 2.0;
                    const std::size_t k = static_cast<std::size_t>(i) * nyc + m;
                    sum += w * std::pow(1.0 + k2, sv) * (k2 * std::norm(psi[k]) + std::norm(bz[k]));
                }
            }
            r.hs_b[sv] = std::sqrt(g.lx() * g.ly() * sum);
        }
        if (!opts.p_list.empty()) {
            std::vector<double> pbz(g.size_phys());
            g.backward(bz.data(), pbz.data());
            for (double p : opts.p_list) {
                if (std::isinf(p)) {
                    double m = 0.0;
                    for (double v : pbz) m = std::max(m, std::abs(v));
                    r.lp_bz[p] = m;
                } else {
                    double acc = 0.0;
                    for (double v : pbz) acc += std::pow(std::abs(v), p);
                    r.lp_bz[p] = std::pow(acc * g.cell_area(), 1.0 / p);
                }
            }
        }
        r.energy = energy(st);
        r.energy_rate_predicted = energy_rate_predicted(st);
        if (have_prev && st.t > prev_t) {
            r.energy_rate_measured = (r.energy - prev_energy) / (st.t - prev_t);
        }
        prev_energy = r.energy;
        prev_t = st.t;
        have_prev = true;
        r.omega_mean = omega_mean(st);
        {  // spectral tail indicator over the outer 15% of the dealias band
            const int nx = g.nx(), nyc = g.nyc();
            double tail = 0.0, total = 0.0;
            const double kcut2 = g.kx_cutoff() * g.kx_cutoff() + g.ky_cutoff() * g.ky_cutoff();
            for (int i = 0; i < nx; ++i)
                for (int m = 0; m < nyc; ++m) {
                    const double k2 = g.kx(i) * g.kx(i) + g.ky(m) * g.ky(m);
                    const std::size_t k = static_cast<std::size_t>(i) * nyc + m;
                    const double e = k2 * std::norm(psi[k]) + std::norm(bz[k]);
                    total += e;
                    if (k2 > 0.7225 * kcut2) tail += e;  // |k| > 0.85 k_cut
                }
            r.tail_fraction = total > 0.0 ? tail / total : 0.0;
        }
        if (opts.packet) {
            try {
                const TestingFunctional tf = testing_functional(st, *opts.packet);
                r.test_bb = tf.bb;
                r.test_uu = tf.uu;
            } catch (const UnderResolved&) {
                res.records.push_back(r);
                res.aborted = true;
                res.abort_reason = "packet under-resolved on this grid";
                return false;
            }
            if (nfields_ == 4 && params_.nu > 0.0) {
                const PacketFields pf = opts.packet->evaluate(grid_, st.t);
                // nu <grad u~^z, grad u^z> + nu <omega~, omega>
                const double pair =
                    params_.nu * (-spectral::inner_grad(g, pf.psi.spec(), st.fields[0]) -
                                  spectral::inner(g, pf.bz.spec(), st.fields[1]));
                visc_accum += pair * dt * opts.cadence;
                r.visc_pairing_accum = visc_accum;
            }
        }
        res.records.push_back(r);
        return true;
    };

    if (!record(s)) {
        res.final_state = std::move(s);
        return res;
    }
    long step_count = 0;
    while (s.t < opts.t_end - 1e-15) {
        if (opts.dt <= 0.0 && opts.recompute_dt_every > 0 &&
            step_count % opts.recompute_dt_every == 0 && step_count > 0) {
            const double fresh = cfl_dt(s, opts.cfl_safety);
            if (std::isfinite(fresh)) dt = fresh;
        }
        const double h = std::min(dt, opts.t_end - s.t);
        try {
            s = step(s, h);
        } catch (const BlowUp& e) {
            res.aborted = true;
            res.abort_reason = e.what();
            break;
        }
        ++step_count;
        if (step_count % opts.cadence == 0 || s.t >= opts.t_end - 1e-15) {
            if (!record(s)) break;
        }
    }
    res.final_state = std::move(s);
    return res;
}

}  // namespace degenwave
