#include "degenwave/ops.hpp"

#include <algorithm>
#include <cmath>

namespace degenwave {

namespace {

constexpr double kMeanTol = 1e-10;

double rms(const Grid& g, const std::vector<Complex>& spec) {
    double s = 0.0;
    const int nx = g.nx(), nyc = g.nyc(), nyq = g.ny() / 2;
    for (int i = 0; i < nx; ++i)
        for (int m = 0; m < nyc; ++m) {
            const double w = (m == 0 || m == nyq) ? 1.0 : 2.0;
            s += w * std::norm(spec[static_cast<std::size_t>(i) * nyc + m]);
        }
    return std::sqrt(s);
}

ScalarField apply_multiplier(const ScalarField& f,
                             const std::function<Complex(double, double)>& mult) {
    const Grid& g = *f.grid();
    std::vector<Complex> spec(f.spec());
    const int nx = g.nx(), nyc = g.nyc();
    for (int i = 0; i < nx; ++i)
        for (int m = 0; m < nyc; ++m)
            spec[static_cast<std::size_t>(i) * nyc + m] *= mult(g.kx(i), g.ky(m));
    return ScalarField::from_spectral(f.grid(), std::move(spec));
}

}  // namespace

ScalarField deriv(const ScalarField& f, Axis axis, int order) {
    if (order < 1) throw ValidationError("derivative order must be positive");
    const Grid& g = *f.grid();
    std::vector<Complex> spec(f.spec());
    const int nx = g.nx(), ny = g.ny(), nyc = g.nyc();
    const bool odd = order % 2 != 0;
    for (int i = 0; i < nx; ++i) {
        for (int m = 0; m < nyc; ++m) {
            const double k = axis == Axis::X ? g.kx(i) : g.ky(m);
            Complex factor = std::pow(Complex(0.0, k), order);
            if (odd && ((axis == Axis::X && i == nx / 2) || (axis == Axis::Y && m == ny / 2)))
                factor = 0.0;
            spec[static_cast<std::size_t>(i) * nyc + m] *= factor;
        }
    }
    return ScalarField::from_spectral(f.grid(), std::move(spec));
}

ScalarField laplacian(const ScalarField& f) {
    return apply_multiplier(f, [](double kx, double ky) { return Complex(-(kx * kx + ky * ky)); });
}

ScalarField inv_laplacian(const ScalarField& f) {
    const double scale = rms(*f.grid(), f.spec());
    if (std::abs(f.spec()[0]) > kMeanTol * std::max(scale, 1e-300))
        throw NonZeroMean("inv_laplacian requires a mean-zero field");
    return apply_multiplier(f, [](double kx, double ky) {
        const double k2 = kx * kx + ky * ky;
        return k2 == 0.0 ? Complex(0.0) : Complex(-1.0 / k2);
    });
}

ScalarField frac_laplacian(const ScalarField& f, double a) {
    if (a < 0.0) {
        const double scale = rms(*f.grid(), f.spec());
        if (std::abs(f.spec()[0]) > kMeanTol * std::max(scale, 1e-300))
            throw NonZeroMean("frac_laplacian with negative exponent requires mean-zero field");
    }
    return apply_multiplier(f, [a](double kx, double ky) {
        const double k2 = kx * kx + ky * ky;
        if (k2 == 0.0) return a == 0.0 ? Complex(1.0) : Complex(0.0);
        return Complex(std::pow(k2, a));
    });
}

ScalarField inv_dx(const ScalarField& f) {
    const Grid& g = *f.grid();
    const int nx = g.nx(), nyc = g.nyc();
    double row0 = 0.0;
    for (int m = 0; m < nyc; ++m) row0 += std::norm(f.spec()[m]);
    const double scale = rms(g, f.spec());
    if (std::sqrt(row0) > kMeanTol * std::max(scale, 1e-300))
        throw NonZeroXMean("inv_dx requires zero x-mean for every y");
    std::vector<Complex> spec(f.spec());
    for (int i = 0; i < nx; ++i) {
        const double kx = g.kx(i);
        for (int m = 0; m < nyc; ++m) {
            auto& c = spec[static_cast<std::size_t>(i) * nyc + m];
            c = (i == 0) ? Complex(0.0) : c / Complex(0.0, kx);
        }
    }
    return ScalarField::from_spectral(f.grid(), std::move(spec));
}

VectorField2 perp_grad(const ScalarField& psi) {
    ScalarField px = deriv(psi, Axis::Y, 1) * (-1.0);
    ScalarField py = deriv(psi, Axis::X, 1);
    return VectorField2{std::move(px), std::move(py)};
}

ScalarField dealias(const ScalarField& f) {
    const Grid& g = *f.grid();
    std::vector<Complex> spec(f.spec());
    spectral::apply_dealias(g, spec);
    return ScalarField::from_spectral(f.grid(), std::move(spec));
}

ScalarField multiply_dealias(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a, b);
    std::vector<double> phys(a.phys());
    for (std::size_t k = 0; k < phys.size(); ++k) phys[k] *= b.phys()[k];
    return dealias(ScalarField::from_physical(a.grid(), std::move(phys)));
}

double lp_norm(const ScalarField& f, double p) {
    if (p < 1.0) throw ValidationError("lp_norm requires p >= 1");
    const auto& v = f.phys();
    if (std::isinf(p)) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }
    double s = 0.0;
    if (p == 2.0) {
        for (double x : v) s += x * x;
    } else if (p == 1.0) {
        for (double x : v) s += std::abs(x);
    } else {
        for (double x : v) s += std::pow(std::abs(x), p);
    }
    return std::pow(s * f.grid()->cell_area(), 1.0 / p);
}

double hs_norm(const ScalarField& f, double s) { return spectral::hs_norm(*f.grid(), f.spec(), s); }

double inner(const ScalarField& f, const ScalarField& g) {
    require_same_grid(f, g);
    double s = 0.0;
    for (std::size_t k = 0; k < f.phys().size(); ++k) s += f.phys()[k] * g.phys()[k];
    return s * f.grid()->cell_area();
}

double inner_vec(const VectorField2& a, const VectorField2& b) {
    return inner(a.x, b.x) + inner(a.y, b.y);
}

namespace spectral {

double l2_norm(const Grid& g, const std::vector<Complex>& spec) { return hs_norm(g, spec, 0.0); }

double hs_norm(const Grid& g, const std::vector<Complex>& spec, double s) {
    const int nx = g.nx(), nyc = g.nyc(), nyq = g.ny() / 2;
    const double area = g.lx() * g.ly();
    double sum = 0.0;
    for (int i = 0; i < nx; ++i) {
        const double kx2 = g.kx(i) * g.kx(i);
        for (int m = 0; m < nyc; ++m) {
            const double w = (m == 0 || m == nyq) ? 1.0 : 2.0;
            const double mult = std::pow(1.0 + kx2 + g.ky(m) * g.ky(m), s);
            sum += w * mult * std::norm(spec[static_cast<std::size_t>(i) * nyc + m]);
        }
    }
    return std::sqrt(area * sum);
}

double inner(const Grid& g, const std::vector<Complex>& a, const std::vector<Complex>& b) {
    const int nx = g.nx(), nyc = g.nyc(), nyq = g.ny() / 2;
    double sum = 0.0;
    for (int i = 0; i < nx; ++i)
        for (int m = 0; m < nyc; ++m) {
            const double w = (m == 0 || m == nyq) ? 1.0 : 2.0;
            const std::size_t k = static_cast<std::size_t>(i) * nyc + m;
            sum += w * (std::conj(a[k]) * b[k]).real();
        }
    return g.lx() * g.ly() * sum;
}

double inner_grad(const Grid& g, const std::vector<Complex>& a, const std::vector<Complex>& b) {
    const int nx = g.nx(), nyc = g.nyc(), nyq = g.ny() / 2;
    double sum = 0.0;
    for (int i = 0; i < nx; ++i) {
        const double kx2 = g.kx(i) * g.kx(i);
        for (int m = 0; m < nyc; ++m) {
            const double w = (m == 0 || m == nyq) ? 1.0 : 2.0;
            const std::size_t k = static_cast<std::size_t>(i) * nyc + m;
            sum += w * (kx2 + g.ky(m) * g.ky(m)) * (std::conj(a[k]) * b[k]).real();
        }
    }
    return g.lx() * g.ly() * sum;
}

double inner_invlap(const Grid& g, const std::vector<Complex>& a, const std::vector<Complex>& b) {
    const int nx = g.nx(), nyc = g.nyc(), nyq = g.ny() / 2;
    double sum = 0.0;
    for (int i = 0; i < nx; ++i) {
        const double kx2 = g.kx(i) * g.kx(i);
        for (int m = 0; m < nyc; ++m) {
            const double k2 = kx2 + g.ky(m) * g.ky(m);
            if (k2 == 0.0) continue;
            const double w = (m == 0 || m == nyq) ? 1.0 : 2.0;
            const std::size_t k = static_cast<std::size_t>(i) * nyc + m;
            sum += w * (std::conj(a[k]) * b[k]).real() / k2;
        }
    }
    return g.lx() * g.ly() * sum;
}

void apply_dealias(const Grid& g, std::vector<Complex>& spec) {
    const int nx = g.nx(), nyc = g.nyc();
    for (int i = 0; i < nx; ++i)
        for (int m = 0; m < nyc; ++m)
            if (!g.in_dealias_band(i, m)) spec[static_cast<std::size_t>(i) * nyc + m] = 0.0;
}

void ddx(const Grid& g, const std::vector<Complex>& in, std::vector<Complex>& out) {
    const int nx = g.nx(), nyc = g.nyc();
    out.resize(in.size());
    for (int i = 0; i < nx; ++i) {
        const Complex f = (i == nx / 2) ? Complex(0.0) : Complex(0.0, g.kx(i));
        for (int m = 0; m < nyc; ++m)
            out[static_cast<std::size_t>(i) * nyc + m] =
                f * in[static_cast<std::size_t>(i) * nyc + m];
    }
}

void scale_by_k2(const Grid& g, const std::vector<Complex>& in, std::vector<Complex>& out,
                 double sign) {
    const int nx = g.nx(), nyc = g.nyc();
    out.resize(in.size());
    for (int i = 0; i < nx; ++i) {
        const double kx2 = g.kx(i) * g.kx(i);
        for (int m = 0; m < nyc; ++m) {
            const std::size_t k = static_cast<std::size_t>(i) * nyc + m;
            out[k] = sign * (kx2 + g.ky(m) * g.ky(m)) * in[k];
        }
    }
}

void invert_laplacian(const Grid& g, const std::vector<Complex>& in, std::vector<Complex>& out) {
    const int nx = g.nx(), nyc = g.nyc();
    out.resize(in.size());
    for (int i = 0; i < nx; ++i) {
        const double kx2 = g.kx(i) * g.kx(i);
        for (int m = 0; m < nyc; ++m) {
            const double k2 = kx2 + g.ky(m) * g.ky(m);
            const std::size_t k = static_cast<std::size_t>(i) * nyc + m;
            out[k] = k2 == 0.0 ? Complex(0.0) : -in[k] / k2;
        }
    }
}

}  // namespace spectral

}  // namespace degenwave
