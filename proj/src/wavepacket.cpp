#include "degenwave/wavepacket.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "json.hpp"

namespace degenwave {

namespace {

// transport coefficients at one eta: speed c = sqrt(1-f^2), integrating
// factor source S = -f^2 f'(y) / (2c), and dS/deta
struct CoreVals {
    double y, f, g, c, S, Sp;
};

CoreVals core_at(const BackgroundProfile& prof, double eta) {
    CoreVals v;
    const double e = std::min(eta, 0.0);
    v.y = prof.y_of_eta(e);
    v.f = prof.f_of_eta(e);
    v.g = prof.fp_of_eta(e);
    const double f2 = v.f * v.f;
    v.c = std::sqrt(std::max(1e-12, 1.0 - f2));
    v.S = -0.5 * f2 * v.g / v.c;
    const double fpp = prof.fpp_of_eta(e);
    v.Sp = -0.5 * (2.0 * f2 * v.g * v.g / v.c + f2 * v.f * fpp / v.c +
                   f2 * f2 * v.g * v.g / (v.c * v.c * v.c));
    return v;
}

struct BackState {
    double eta, alpha, dalpha;
};

// RK4 sweep of the backward characteristics for a batch of starting points.
// dalpha tracks d(alpha)/d(eta) through the variational factor e^{2 alpha}.
// Full steps of size ds plus one smooth partial step, so the discretization
// error varies smoothly with tau (centered time differences of the packet
// would otherwise pick up step-count jitter).
void backtrack_batch(const BackgroundProfile& prof, double tau, std::vector<BackState>& pts,
                     double ds) {
    if (tau == 0.0 || pts.empty()) return;
    const double step = tau > 0.0 ? ds : -ds;
    const long full = static_cast<long>(tau / step);
    const double rest = tau - full * step;
    auto deriv = [&](const BackState& s) {
        const CoreVals v = core_at(prof, s.eta);
        return BackState{v.c, v.S, v.Sp * std::exp(2.0 * s.alpha)};
    };
    auto rk4 = [&](BackState& p, double h) {
        const BackState k1 = deriv(p);
        const BackState k2 = deriv({p.eta + 0.5 * h * k1.eta, p.alpha + 0.5 * h * k1.alpha,
                                    p.dalpha + 0.5 * h * k1.dalpha});
        const BackState k3 = deriv({p.eta + 0.5 * h * k2.eta, p.alpha + 0.5 * h * k2.alpha,
                                    p.dalpha + 0.5 * h * k2.dalpha});
        const BackState k4 =
            deriv({p.eta + h * k3.eta, p.alpha + h * k3.alpha, p.dalpha + h * k3.dalpha});
        p.eta += h / 6.0 * (k1.eta + 2 * k2.eta + 2 * k3.eta + k4.eta);
        p.alpha += h / 6.0 * (k1.alpha + 2 * k2.alpha + 2 * k3.alpha + k4.alpha);
        p.dalpha += h / 6.0 * (k1.dalpha + 2 * k2.dalpha + 2 * k3.dalpha + k4.dalpha);
    };
    for (auto& p : pts) {
        for (long n = 0; n < full; ++n) rk4(p, step);
        if (rest != 0.0) rk4(p, rest);
    }
}

double lp_x_factor(double p) {
    // (1/2pi) int_0^{2pi} |cos|^p
    return std::tgamma(0.5 * (p + 1.0)) / (std::sqrt(Grid::pi()) * std::tgamma(0.5 * p + 1.0));
}

void fd_derivative_uniform(const std::vector<Complex>& w, double h, std::vector<Complex>& out) {
    const int n = static_cast<int>(w.size());
    out.assign(n, Complex(0.0));
    for (int i = 3; i < n - 3; ++i)
        out[i] = (45.0 * (w[i + 1] - w[i - 1]) - 9.0 * (w[i + 2] - w[i - 2]) +
                  (w[i + 3] - w[i - 3])) /
                 (60.0 * h);
}

void fd_second_uniform(const std::vector<Complex>& w, double h, std::vector<Complex>& out) {
    const int n = static_cast<int>(w.size());
    out.assign(n, Complex(0.0));
    for (int i = 3; i < n - 3; ++i)
        out[i] = (2.0 * (w[i + 3] + w[i - 3]) - 27.0 * (w[i + 2] + w[i - 2]) +
                  270.0 * (w[i + 1] + w[i - 1]) - 490.0 * w[i]) /
                 (180.0 * h * h);
}

// |b|^2 density of a slice row (Cartesian components; axi uses the stored
// radial derivative and the 1/r^2 theta factor), including the area weight.
double vec_density(const PacketSlice& s, std::size_t i, bool axi, int lambda) {
    if (!axi)
        return std::norm(s.w_bz[i]) + std::norm(s.w_bx[i]) + std::norm(s.w_by[i]);
    const double r = s.y[i];
    const double grad2 = std::norm(s.w_bx[i]) +
                         static_cast<double>(lambda) * lambda * std::norm(s.w_psi[i]) / (r * r);
    return (std::norm(s.w_bz[i]) + grad2) * r;
}

}  // namespace

BacktrackResult backtrack(const BackgroundProfile& profile, double tau, double eta, double ds) {
    if (tau < 0.0) throw ValidationError("backtrack requires tau >= 0");
    std::vector<BackState> pts{{eta, 0.0, 0.0}};
    backtrack_batch(profile, tau, pts, ds);
    BacktrackResult r;
    r.eta0 = pts[0].eta;
    r.alpha = pts[0].alpha;
    r.dalpha_deta = pts[0].dalpha;
    if (tau > 0.0) {
        // x-foot offset x0 - x = int (1 + f^2) along the same path
        const long steps = std::max<long>(1, std::lround(tau / ds));
        const double h = tau / static_cast<double>(steps);
        auto fx = [&](double ee) {
            const double f = core_at(profile, ee).f;
            return 1.0 + f * f;
        };
        double x = 0.0, e = eta;
        for (long n = 0; n < steps; ++n) {
            const double c1 = core_at(profile, e).c;
            const double e2 = e + 0.5 * h * c1;
            const double c2 = core_at(profile, e2).c;
            const double e3 = e + 0.5 * h * c2;
            const double c3 = core_at(profile, e3).c;
            const double e4 = e + h * c3;
            x += h / 6.0 * (fx(e) + 2.0 * fx(e2) + 2.0 * fx(e3) + fx(e4));
            e += h / 6.0 * (c1 + 2.0 * c2 + 2.0 * c3 + core_at(profile, e4).c);
        }
        r.x_shift = x;
    }
    return r;
}

double characteristic_forward(const BackgroundProfile& profile, double tau, double eta0,
                              double ds) {
    if (tau == 0.0) return eta0;
    const double step = tau > 0.0 ? ds : -ds;
    const long full = static_cast<long>(tau / step);
    const double rest = tau - full * step;
    double e = eta0;
    auto rk4 = [&](double h) {
        const double k1 = -core_at(profile, e).c;
        const double k2 = -core_at(profile, e + 0.5 * h * k1).c;
        const double k3 = -core_at(profile, e + 0.5 * h * k2).c;
        const double k4 = -core_at(profile, e + h * k3).c;
        e += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    };
    for (long n = 0; n < full; ++n) rk4(step);
    if (rest != 0.0) rk4(rest);
    return e;
}

AmplitudeSpec AmplitudeSpec::default_bump(const BackgroundProfile& profile) {
    AmplitudeSpec a;
    const double y0 = profile.y0(), y1 = profile.y1();
    a.y_lo = y0 + 0.52 * (y1 - y0);
    a.y_hi = y0 + 0.98 * (y1 - y0);
    const double mid = 0.5 * (a.y_lo + a.y_hi), half = 0.5 * (a.y_hi - a.y_lo);
    a.q0 = [mid, half](double y) {
        const double s = (y - mid) / half;
        return std::abs(s) < 1.0 ? Complex(std::exp(-1.0 / (1.0 - s * s))) : Complex(0.0);
    };
    a.q0p = [mid, half](double y) {
        const double s = (y - mid) / half;
        if (!(std::abs(s) < 1.0)) return Complex(0.0);
        const double d = 1.0 - s * s;
        return Complex(std::exp(-1.0 / d) * (-2.0 * s / (d * d)) / half);
    };
    return a;
}

WavePacket::WavePacket(ProfilePtr profile, int lambda, AmplitudeSpec amp)
    : profile_(std::move(profile)), lambda_(lambda), amp_(std::move(amp)) {
    if (lambda_ < 1) throw ValidationError("packet wave number must be a positive integer");
    const double y0 = profile_->y0(), y1 = profile_->y1();
    if (!(amp_.y_lo > 0.5 * (y0 + y1) - 1e-12 && amp_.y_hi < y1 + 1e-12 && amp_.y_lo < amp_.y_hi))
        throw ValidationError("amplitude support must sit in the upper half of the window");
    if (!amp_.q0p) throw ValidationError("amplitude q0p sampler is required");
    eta_lo_ = profile_->eta_of_y(amp_.y_lo);
    eta_hi_ = profile_->eta_of_y(amp_.y_hi);
    scale_ = 1.0;
    const bool axi = profile_->kind() == ProfileKind::Axisymmetric;
    const PacketSlice s0 = slice_uniform(0.0, 4096);
    double l2sq = 0.0;
    const double h = s0.y[1] - s0.y[0];
    for (std::size_t i = 0; i < s0.y.size(); ++i) l2sq += vec_density(s0, i, axi, lambda_) * h;
    l2sq *= Grid::pi();  // x (or theta) period 2*pi, |Re e^{i lambda x}|^2 averages to 1/2
    if (!(l2sq > 0.0)) throw ValidationError("packet amplitude is identically zero");
    scale_ = 1.0 / std::sqrt(l2sq);
}

std::pair<double, double> WavePacket::support(double t) const {
    const double tau = lambda_ * t;
    const double lo = characteristic_forward(*profile_, tau, eta_lo_);
    const double hi = characteristic_forward(*profile_, tau, eta_hi_);
    return {profile_->y_of_eta(lo), profile_->y_of_eta(hi)};
}

double WavePacket::bandwidth(double t) const {
    const auto [ylo, yhi] = support(t);
    const double f_lo = profile_->f(ylo);
    const double c = std::sqrt(std::max(0.0, 1.0 - f_lo * f_lo));
    const double phase = lambda_ * c / std::max(f_lo, 1e-12);
    const double envelope = 8.0 * Grid::pi() / std::max(yhi - ylo, 1e-12);
    return phase + envelope;
}

WavePacket::AmplitudeSample WavePacket::amplitude_h(double tau, int n) const {
    AmplitudeSample out;
    const double lo = characteristic_forward(*profile_, tau, eta_lo_);
    const double hi = characteristic_forward(*profile_, tau, eta_hi_);
    const double pad = 0.1 * (hi - lo);
    out.eta.resize(n);
    std::vector<BackState> pts(n);
    for (int i = 0; i < n; ++i) {
        out.eta[i] = lo - pad + (hi - lo + 2 * pad) * i / (n - 1);
        pts[i] = {out.eta[i], 0.0, 0.0};
    }
    backtrack_batch(*profile_, tau, pts, 5e-3);
    out.h.resize(n);
    out.h_eta.resize(n);
    out.h_tau.resize(n);
    for (int i = 0; i < n; ++i) {
        const CoreVals v0 = core_at(*profile_, pts[i].eta);
        const Complex q = amp_.q0(v0.y) * scale_;
        const Complex qp = amp_.q0p(v0.y) * scale_;
        const double sf0 = std::sqrt(v0.f);
        const Complex h0 = q / sf0;
        const Complex h0p = sf0 * qp - 0.5 * v0.g / sf0 * q;
        const double ea = std::exp(pts[i].alpha);
        out.h[i] = ea * h0;
        out.h_eta[i] = ea * (pts[i].dalpha * h0 + h0p * std::exp(2.0 * pts[i].alpha));
        const CoreVals v = core_at(*profile_, out.eta[i]);
        out.h_tau[i] = v.c * out.h_eta[i] + v.S * out.h[i];
    }
    return out;
}

PacketSlice WavePacket::slice(double t, const std::vector<double>& y_points) const {
    const double tau = lambda_ * t;
    PacketSlice s;
    s.t = t;
    s.y = y_points;
    const int n = static_cast<int>(y_points.size());
    s.w_psi.assign(n, Complex(0.0));
    s.w_bz.assign(n, Complex(0.0));
    s.w_bx.assign(n, Complex(0.0));
    s.w_by.assign(n, Complex(0.0));
    const double lo_eta = characteristic_forward(*profile_, tau, eta_lo_);
    const double hi_eta = characteristic_forward(*profile_, tau, eta_hi_);
    s.supp_lo = profile_->y_of_eta(lo_eta);
    s.supp_hi = profile_->y_of_eta(hi_eta);

    // padded mask: the amplitude vanishes identically outside the transported
    // support, so rows in the pad contribute exact zeros and the active set
    // varies smoothly with t (no flicker under centered time differences)
    const double pad = 0.08 * (s.supp_hi - s.supp_lo);
    const double lo_mask = std::max(profile_->y0() + 1e-14, s.supp_lo - pad);
    const double hi_mask = std::min(profile_->y1() - 1e-14, s.supp_hi + pad);
    std::vector<int> active;
    std::vector<double> etas;
    std::vector<BackState> pts;
    for (int i = 0; i < n; ++i) {
        const double y = y_points[i];
        if (!(y > lo_mask && y < hi_mask)) continue;
        active.push_back(i);
        const double eta = profile_->eta_of_y(y);
        etas.push_back(eta);
        pts.push_back({eta, 0.0, 0.0});
    }
    backtrack_batch(*profile_, tau, pts, 5e-3);

    const bool axi = profile_->kind() == ProfileKind::Axisymmetric;
    const Complex rot = std::exp(Complex(0.0, static_cast<double>(lambda_) * lambda_ * t));
    const Complex ilam(0.0, static_cast<double>(lambda_));
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const int i = active[k];
        const double eta = etas[k];
        const CoreVals v = core_at(*profile_, eta);
        const CoreVals v0 = core_at(*profile_, pts[k].eta);
        const Complex q = amp_.q0(v0.y) * scale_;
        const Complex qp = amp_.q0p(v0.y) * scale_;
        const double sf0 = std::sqrt(v0.f);
        const Complex h0 = q / sf0;
        const Complex h0p = sf0 * qp - 0.5 * v0.g / sf0 * q;
        const double ea = std::exp(pts[k].alpha);
        const Complex h = ea * h0;
        const Complex h_eta = ea * (pts[k].dalpha * h0 + h0p * std::exp(2.0 * pts[k].alpha));
        const Complex h_tau = v.c * h_eta + v.S * h;
        const Complex phase =
            rot * std::exp(Complex(0.0, static_cast<double>(lambda_) * profile_->g_of_eta(eta)));
        const double sf = std::sqrt(v.f);
        if (!axi) {
            s.w_psi[i] = phase * h * sf / static_cast<double>(lambda_);
            s.w_bz[i] = -phase * (h + h_tau / ilam) / sf;
            s.w_bx[i] =
                phase / sf *
                (Complex(0.0, v.c) * h + (0.5 * v.g * h + h_eta) / static_cast<double>(lambda_));
            s.w_by[i] = -ilam * s.w_psi[i];
        } else {
            const double r = y_points[i];
            const double sfr = std::sqrt(v.f / r);
            s.w_psi[i] = phase * h * sfr / static_cast<double>(lambda_);
            s.w_bz[i] = -phase * (h + h_tau / ilam) / std::sqrt(v.f * r);
            // radial derivative of the psi profile (the theta part is analytic)
            s.w_bx[i] = phase / static_cast<double>(lambda_) *
                        (0.5 / sfr * (v.g * r - v.f) / (r * r) * h +
                         sfr * (ilam * v.c / v.f * h + h_eta / v.f));
            s.w_by[i] = -ilam * s.w_psi[i];
        }
    }
    return s;
}

PacketSlice WavePacket::slice_uniform(double t, int n, double pad) const {
    auto [lo, hi] = support(t);
    const double w = hi - lo;
    lo = std::max(profile_->y0() + 1e-12, lo - (pad > 0 ? pad : 0.02 * w));
    hi = hi + (pad > 0 ? pad : 0.02 * w);
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) y[i] = lo + (hi - lo) * i / (n - 1);
    return slice(t, y);
}

PacketFields WavePacket::evaluate(const GridPtr& gp, double t) const {
    const Grid& grid = *gp;
    if (t < -1.0) throw ValidationError("packet evaluation far before t = 0");
    if (std::abs(grid.lx() - 2.0 * Grid::pi()) > 1e-12)
        throw ValidationError("packet grids must have x-period 2*pi");
    if (bandwidth(t) > 0.98 * grid.ky_cutoff())
        throw UnderResolved("packet bandwidth exceeds the grid's dealiased band");
    const int nx = grid.nx(), ny = grid.ny();
    std::vector<double> bz(grid.size_phys(), 0.0), psi(grid.size_phys(), 0.0),
        bx(grid.size_phys(), 0.0), by(grid.size_phys(), 0.0);
    if (profile_->kind() == ProfileKind::Translational) {
        std::vector<double> rows(ny);
        for (int j = 0; j < ny; ++j) rows[j] = grid.y(j);
        const PacketSlice s = slice(t, rows);
        for (int i = 0; i < nx; ++i) {
            const Complex ph = std::exp(Complex(0.0, lambda_ * grid.x(i)));
            for (int j = 0; j < ny; ++j) {
                const std::size_t k = static_cast<std::size_t>(i) * ny + j;
                bz[k] = (ph * s.w_bz[j]).real();
                psi[k] = (ph * s.w_psi[j]).real();
                bx[k] = (ph * s.w_bx[j]).real();
                by[k] = (ph * s.w_by[j]).real();
            }
        }
    } else {
        const auto [rlo, rhi] = support(t);
        const double rpad = 0.08 * (rhi - rlo);
        const double rlo_mask = std::max(profile_->y0() + 1e-14, rlo - rpad);
        const double rhi_mask = std::min(profile_->y1() - 1e-14, rhi + rpad);
        std::vector<double> radii;
        std::vector<std::size_t> idx;
        for (int i = 0; i < nx; ++i) {
            double xc = grid.x(i);
            if (xc > grid.lx() / 2) xc -= grid.lx();
            for (int j = 0; j < ny; ++j) {
                double yc = grid.y(j);
                if (yc > grid.ly() / 2) yc -= grid.ly();
                const double r = std::hypot(xc, yc);
                if (!(r > rlo_mask && r < rhi_mask)) continue;
                radii.push_back(r);
                idx.push_back(static_cast<std::size_t>(i) * ny + j);
            }
        }
        const PacketSlice s = slice(t, radii);
        const Complex ilam(0.0, static_cast<double>(lambda_));
        for (std::size_t k = 0; k < idx.size(); ++k) {
            const std::size_t cell = idx[k];
            const int i = static_cast<int>(cell / ny), j = static_cast<int>(cell % ny);
            double xc = grid.x(i), yc = grid.y(j);
            if (xc > grid.lx() / 2) xc -= grid.lx();
            if (yc > grid.ly() / 2) yc -= grid.ly();
            const double r = radii[k];
            const double theta = std::atan2(yc, xc);
            const Complex ph = std::exp(Complex(0.0, lambda_ * theta));
            bz[cell] = (ph * s.w_bz[k]).real();
            psi[cell] = (ph * s.w_psi[k]).real();
            const Complex dpsidx = ilam * (-yc / (r * r)) * s.w_psi[k] + (xc / r) * s.w_bx[k];
            const Complex dpsidy = ilam * (xc / (r * r)) * s.w_psi[k] + (yc / r) * s.w_bx[k];
            bx[cell] = (ph * dpsidy).real();
            by[cell] = -(ph * dpsidx).real();
        }
    }
    return PacketFields{ScalarField::from_physical(gp, std::move(bz)),
                        ScalarField::from_physical(gp, std::move(psi)),
                        ScalarField::from_physical(gp, std::move(bx)),
                        ScalarField::from_physical(gp, std::move(by))};
}

double WavePacket::default_dt_fd(double) const {
    // balances the O(dt^2 lambda^6) stencil truncation against the O(eps/dt)
    // cancellation noise of the structurally-zero psi residual
    return 8e-6 / static_cast<double>(lambda_);
}

namespace {

// centered (or one-sided at t = 0) second-order time derivative samples
struct TimeStencil {
    std::array<double, 3> t;
    std::array<double, 3> w;  // weights of F(t[k]) approximating dF/dt
};

TimeStencil fd_stencil(double t, double dt) {
    // the packet is defined for small negative t, so stay centered at t = 0
    return TimeStencil{{t - dt, t, t + dt}, {-0.5 / dt, 0.0, 0.5 / dt}};
}

}  // namespace

WavePacket::ResidualFields WavePacket::residual_fields(const GridPtr& gp, double t,
                                                       double dt_fd) const {
    if (profile_->kind() == ProfileKind::Axisymmetric)
        throw ValidationError("grid residual fields use the translational reduction");
    if (dt_fd <= 0.0) dt_fd = default_dt_fd(t);
    const TimeStencil st = fd_stencil(t, dt_fd);
    const PacketFields mid = evaluate(gp, t);
    const PacketFields f0 = evaluate(gp, st.t[0]);
    const PacketFields f1 = evaluate(gp, st.t[1]);
    const PacketFields f2 = evaluate(gp, st.t[2]);
    auto fd = [&](const ScalarField& a, const ScalarField& b, const ScalarField& c) {
        return a * st.w[0] + b * st.w[1] + c * st.w[2];
    };
    std::vector<double> frow(gp->ny(), 0.0), fpprow(gp->ny(), 0.0);
    for (int j = 0; j < gp->ny(); ++j) {
        const double y = gp->y(j);
        if (y > profile_->y0() && y <= profile_->y1()) {
            frow[j] = profile_->f(y);
            fpprow[j] = profile_->fpp(y);
        }
    }
    auto mul_row = [&](const ScalarField& a, const std::vector<double>& row) {
        std::vector<double> out(a.phys());
        for (int i = 0; i < gp->nx(); ++i)
            for (int j = 0; j < gp->ny(); ++j)
                out[static_cast<std::size_t>(i) * gp->ny() + j] *= row[j];
        return ScalarField::from_physical(gp, std::move(out));
    };
    ScalarField err_psi = fd(f0.psi, f1.psi, f2.psi) + mul_row(deriv(mid.bz, Axis::X, 1), frow);
    ScalarField err_b = fd(f0.bz, f1.bz, f2.bz) + mul_row(deriv(mid.psi, Axis::X, 1), fpprow) -
                        mul_row(deriv(laplacian(mid.psi), Axis::X, 1), frow);
    return ResidualFields{std::move(err_b), std::move(err_psi)};
}

ResidualNorms WavePacket::residual(const GridPtr& gp, double t, double dt_fd) const {
    if (profile_->kind() == ProfileKind::Axisymmetric) return residual_native(t, dt_fd);
    const ResidualFields rf = residual_fields(gp, t, dt_fd);
    ResidualNorms out;
    out.err_b_l2 = lp_norm(rf.err_b, 2.0);
    out.grad_err_psi_l2 =
        std::sqrt(spectral::inner_grad(*gp, rf.err_psi.spec(), rf.err_psi.spec()));
    return out;
}

ResidualNorms WavePacket::residual_native(double t, double dt_fd, int n) const {
    if (dt_fd <= 0.0) dt_fd = default_dt_fd(t);
    const TimeStencil st = fd_stencil(t, dt_fd);
    (void)0;
    // shared y-grid covering the supports of the stencil times
    double lo = 1e300, hi = -1e300;
    for (double ts : st.t) {
        const auto sp = support(ts);
        lo = std::min(lo, sp.first);
        hi = std::max(hi, sp.second);
    }
    const double pad = 0.05 * (hi - lo);
    lo = std::max(profile_->y0() + 1e-12, lo - pad);
    hi = hi + pad;
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) y[i] = lo + (hi - lo) * i / (n - 1);
    const double h = (hi - lo) / (n - 1);
    if (bandwidth(st.t[2]) * h > 0.5)
        throw UnderResolved("native residual sampling is too coarse");

    const PacketSlice mid = slice(t, y);
    const PacketSlice s0 = slice(st.t[0], y);
    const PacketSlice s1 = slice(st.t[1], y);
    const PacketSlice s2 = slice(st.t[2], y);
    const bool axi = profile_->kind() == ProfileKind::Axisymmetric;
    const Complex ilam(0.0, static_cast<double>(lambda_));
    const double lam2 = static_cast<double>(lambda_) * lambda_;

    std::vector<Complex> wpp, wp;
    fd_second_uniform(mid.w_psi, h, wpp);
    fd_derivative_uniform(mid.w_psi, h, wp);

    std::vector<Complex> err_b(n, Complex(0.0)), err_psi(n, Complex(0.0));
    for (int i = 3; i < n - 3; ++i) {
        const double yy = y[i];
        if (!(yy > profile_->y0() && yy <= profile_->y1())) continue;
        const double f = profile_->f(yy), fpp = profile_->fpp(yy), g = profile_->fp(yy);
        const Complex dbz_dt =
            st.w[0] * s0.w_bz[i] + st.w[1] * s1.w_bz[i] + st.w[2] * s2.w_bz[i];
        const Complex dpsi_dt =
            st.w[0] * s0.w_psi[i] + st.w[1] * s1.w_psi[i] + st.w[2] * s2.w_psi[i];
        if (!axi) {
            const Complex lap = wpp[i] - lam2 * mid.w_psi[i];
            err_b[i] = dbz_dt + fpp * ilam * mid.w_psi[i] - f * ilam * lap;
        } else {
            const double r = yy;
            const Complex lap = wpp[i] + wp[i] / r - lam2 * mid.w_psi[i] / (r * r);
            err_b[i] = dbz_dt - f * ilam * lap + (fpp + 3.0 * g / r) * ilam * mid.w_psi[i];
        }
        err_psi[i] = dpsi_dt + f * ilam * mid.w_bz[i];
    }
    std::vector<Complex> errp_d;
    fd_derivative_uniform(err_psi, h, errp_d);
    const double lper = 2.0 * Grid::pi();
    double nb = 0.0, np = 0.0;
    for (int i = 0; i < n; ++i) {
        const double w = axi ? y[i] : 1.0;
        nb += std::norm(err_b[i]) * w;
        const double inv = axi ? 1.0 / (y[i] * y[i]) : 1.0;
        np += (std::norm(errp_d[i]) + lam2 * std::norm(err_psi[i]) * inv) * w;
    }
    ResidualNorms out;
    out.err_b_l2 = std::sqrt(0.5 * lper * nb * h);
    out.grad_err_psi_l2 = std::sqrt(0.5 * lper * np * h);
    return out;
}

PacketFields WavePacket::hall_lift(const GridPtr& gp, double t) const {
    PacketFields b = evaluate(gp, t);
    // (u^z, omega) = (-psi, -b^z); returned as {omega, uz, bx, by} slots?
    // Keep the natural mapping: bz slot holds omega, psi slot holds u^z.
    return PacketFields{b.bz * -1.0, b.psi * -1.0, std::move(b.bx), std::move(b.by)};
}

HallResidualNorms WavePacket::hall_residuals(const GridPtr& gp, double t, double nu) const {
    if (profile_->kind() != ProfileKind::Translational)
        throw ValidationError("hall residuals are defined for the translational reduction");
    // L2-type residuals carry no gradient amplification, so a smaller stencil
    // step is optimal here
    const double dt_eff = 8e-6 / (static_cast<double>(lambda_) * lambda_);
    const TimeStencil st = fd_stencil(t, dt_eff);
    const PacketFields mid = evaluate(gp, t);
    const PacketFields f0 = evaluate(gp, st.t[0]);
    const PacketFields f1 = evaluate(gp, st.t[1]);
    const PacketFields f2 = evaluate(gp, st.t[2]);
    auto fd = [&](const ScalarField& a, const ScalarField& b, const ScalarField& c) {
        return a * st.w[0] + b * st.w[1] + c * st.w[2];
    };
    std::vector<double> frow(gp->ny(), 0.0), fpprow(gp->ny(), 0.0);
    for (int j = 0; j < gp->ny(); ++j) {
        const double y = gp->y(j);
        if (y > profile_->y0() && y <= profile_->y1()) {
            frow[j] = profile_->f(y);
            fpprow[j] = profile_->fpp(y);
        }
    }
    auto mul_row = [&](const ScalarField& a, const std::vector<double>& row) {
        std::vector<double> out(a.phys());
        for (int i = 0; i < gp->nx(); ++i)
            for (int j = 0; j < gp->ny(); ++j)
                out[static_cast<std::size_t>(i) * gp->ny() + j] *= row[j];
        return ScalarField::from_physical(gp, std::move(out));
    };
    const ScalarField err_psi =
        fd(f0.psi, f1.psi, f2.psi) + mul_row(deriv(mid.bz, Axis::X, 1), frow);
    const ScalarField err_b = fd(f0.bz, f1.bz, f2.bz) +
                              mul_row(deriv(mid.psi, Axis::X, 1), fpprow) -
                              mul_row(deriv(laplacian(mid.psi), Axis::X, 1), frow);
    HallResidualNorms out;
    (void)nu;  // the dissipation-compensated residuals are nu-independent
    out.res_u = lp_norm(err_psi, 2.0);
    out.res_omega = std::sqrt(spectral::inner_invlap(*gp, err_b.spec(), err_b.spec()));
    const ScalarField res_b = err_b + mul_row(deriv(mid.psi, Axis::X, 1), frow);
    out.res_b = lp_norm(res_b, 2.0);
    std::vector<Complex> invb;
    spectral::invert_laplacian(*gp, mid.bz.spec(), invb);
    for (auto& c : invb) c = -c;  // (-Delta)^{-1}
    ScalarField invbz = ScalarField::from_spectral(gp, std::move(invb));
    const ScalarField res_psi = err_psi + mul_row(deriv(invbz, Axis::X, 1), frow);
    out.grad_res_psi = std::sqrt(spectral::inner_grad(*gp, res_psi.spec(), res_psi.spec()));
    return out;
}

WavePacket::LiftNorms WavePacket::hall_lift_norms_native(double t, int n) const {
    if (profile_->kind() != ProfileKind::Translational)
        throw ValidationError("hall lift norms use the translational reduction");
    const double lper = 2.0 * Grid::pi();
    std::vector<double> yy(n);
    for (int i = 0; i < n; ++i) yy[i] = lper * i / n;
    const PacketSlice s = slice(t, yy);
    const double h = lper / n;
    double uz = 0.0;
    for (const auto& w : s.w_psi) uz += std::norm(w);
    LiftNorms out;
    out.uz_l2 = std::sqrt(0.5 * lper * uz * h);
    // |grad (-Delta)^{-1} bz~|^2 = (Lx Ly / 2) sum |W_bz(ky)|^2 / (lambda^2 + ky^2)
    const std::vector<Complex> hat = detail::fft_forward_1d(s.w_bz);
    const double lam2 = static_cast<double>(lambda_) * lambda_;
    double acc = 0.0;
    for (int q = 0; q < n; ++q) {
        const double ky = (q <= n / 2 ? q : q - n) * (2.0 * Grid::pi() / lper);
        acc += std::norm(hat[q]) / (lam2 + ky * ky);
    }
    out.gradinv_omega_l2 = std::sqrt(0.5 * lper * lper * acc);
    return out;
}

DegenerationScan WavePacket::degeneration_scan(const std::vector<double>& times,
                                               const std::vector<double>& p_list,
                                               const std::vector<double>& s_list, int n) const {
    if (times.size() < 4) throw InsufficientSamples("degeneration scan needs >= 4 times");
    DegenerationScan sc;
    sc.times = times;
    const bool axi = profile_->kind() == ProfileKind::Axisymmetric;
    const double lper = 2.0 * Grid::pi();
    for (double p : p_list) sc.lp_bz[p] = {};
    for (double s : s_list) sc.hs_b[s] = {};

    for (double t : times) {
        const PacketSlice s = slice_uniform(t, n);
        const double h = s.y[1] - s.y[0];
        if (bandwidth(t) * h > 0.5)
            throw UnderResolved("degeneration scan sampling is too coarse");
        sc.supp_lo.push_back(s.supp_lo);
        sc.supp_hi.push_back(s.supp_hi);
        const double tau = lambda_ * t;
        const double eta_mid = 0.5 * (eta_lo_ + eta_hi_);
        sc.supp_mid.push_back(
            profile_->y_of_eta(characteristic_forward(*profile_, tau, eta_mid)));
        for (double p : p_list) {
            if (std::isinf(p)) {
                double m = 0.0;
                for (const auto& w : s.w_bz) m = std::max(m, std::abs(w));
                sc.lp_bz[p].push_back(m);
                continue;
            }
            const double mp = lp_x_factor(p);
            double acc = 0.0;
            for (std::size_t i = 0; i < s.y.size(); ++i) {
                const double wgt = axi ? s.y[i] : 1.0;
                acc += std::pow(std::abs(s.w_bz[i]), p) * wgt;
            }
            sc.lp_bz[p].push_back(std::pow(lper * mp * acc * h, 1.0 / p));
        }
        double l2 = 0.0;
        for (std::size_t i = 0; i < s.y.size(); ++i) l2 += vec_density(s, i, axi, lambda_) * h;
        sc.l2_b.push_back(std::sqrt(Grid::pi() * l2));
        if (!axi && !s_list.empty()) {
            // H^s from the 1D spectrum of the single-x-mode row profiles
            const int m = 16384;
            std::vector<double> yy(m);
            for (int i = 0; i < m; ++i) yy[i] = lper * i / m;
            const PacketSlice full = slice(t, yy);
            const double lam2 = static_cast<double>(lambda_) * lambda_;
            for (double sv : s_list) {
                double total = 0.0;
                for (const std::vector<Complex>* w : {&full.w_bz, &full.w_bx, &full.w_by}) {
                    const std::vector<Complex> hat = detail::fft_forward_1d(*w);
                    double comp = 0.0;
                    for (int q = 0; q < m; ++q) {
                        const double ky = (q <= m / 2 ? q : q - m) * (2.0 * Grid::pi() / lper);
                        comp += std::pow(1.0 + lam2 + ky * ky, sv) * std::norm(hat[q]);
                    }
                    total += comp;
                }
                // |b|_{H^s}^2 = (Lx Ly / 2) sum over (kx = +-lambda, ky)
                sc.hs_b[sv].push_back(std::sqrt(0.5 * lper * lper * total));
            }
        }
    }
    const double y_hi0 = amp_.y_hi;
    const double y_last = sc.supp_lo.back();
    double cf = profile_->fp(profile_->y0());
    const int m = 512;
    for (int i = 0; i <= m; ++i) {
        const double yv = y_last + (y_hi0 - y_last) * i / m;
        cf = std::min(cf, profile_->fp(yv));
    }
    sc.cf_measured = cf;
    sc.cf_upper = profile_->fp(profile_->y0());
    for (auto& [p, series] : sc.lp_bz) {
        std::vector<double> logv(series.size());
        for (std::size_t i = 0; i < series.size(); ++i)
            logv[i] = std::log(std::max(series[i], 1e-300));
        sc.lp_fit[p] = ols_fit(times, logv);
    }
    for (auto& [sv, series] : sc.hs_b) {
        if (series.empty()) continue;
        std::vector<double> logv(series.size());
        for (std::size_t i = 0; i < series.size(); ++i)
            logv[i] = std::log(std::max(series[i], 1e-300));
        sc.hs_fit[sv] = ols_fit(times, logv);
    }
    return sc;
}

FitResult ols_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw InsufficientSamples("ols_fit needs >= 2 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    FitResult r;
    r.slope = (n * sxy - sx * sy) / denom;
    r.intercept = (sy - r.slope * sx) / n;
    if (n > 2) {
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = y[i] - (r.intercept + r.slope * x[i]);
            ss += e * e;
        }
        r.stderr_slope = std::sqrt(ss / (n - 2) * n / denom);
    }
    return r;
}

WavePacket build_packet(ProfilePtr profile, int lambda, std::optional<AmplitudeSpec> amp) {
    if (profile->kind() != ProfileKind::Translational)
        throw ValidationError("build_packet expects a translational profile");
    AmplitudeSpec a = amp ? *amp : AmplitudeSpec::default_bump(*profile);
    return WavePacket(std::move(profile), lambda, std::move(a));
}

WavePacket build_packet_axi(ProfilePtr profile, int lambda, std::optional<AmplitudeSpec> amp) {
    if (profile->kind() != ProfileKind::Axisymmetric)
        throw ValidationError("build_packet_axi expects an axisymmetric profile");
    AmplitudeSpec a = amp ? *amp : AmplitudeSpec::default_bump(*profile);
    return WavePacket(std::move(profile), lambda, std::move(a));
}

void export_packet_snapshot(const WavePacket& packet, const PacketFields& fields, double t,
                            const std::string& csv_path, const std::string& json_path) {
    std::ofstream csv(csv_path);
    csv << "# degenwave-csv v1\nx,y,bz,psi,bx,by\n" << std::setprecision(17);
    const Grid& g = *fields.bz.grid();
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 0; j < g.ny(); ++j)
            csv << g.x(i) << "," << g.y(j) << "," << fields.bz.at(i, j) << ","
                << fields.psi.at(i, j) << "," << fields.bx.at(i, j) << "," << fields.by.at(i, j)
                << "\n";
    nlohmann::json meta;
    meta["lambda"] = packet.lambda();
    meta["profile"] = packet.profile().name();
    meta["t"] = t;
    meta["norm_scale"] = packet.norm_scale();
    meta["grid"] = {g.nx(), g.ny()};
    std::ofstream js(json_path);
    js << meta.dump(2) << "\n";
}

}  // namespace degenwave
