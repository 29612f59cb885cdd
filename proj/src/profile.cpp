#include "degenwave/profile.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>

#include "degenwave/ops.hpp"

namespace degenwave {

namespace {

Sampler fd_derivative(Sampler f, int order) {
    if (order == 1) {
        return [f](double y) {
            const double h = 1e-4;
            return (8.0 * (f(y + h) - f(y - h)) - (f(y + 2 * h) - f(y - 2 * h))) / (12.0 * h);
        };
    }
    return [f](double y) {
        const double h = 1e-3;
        return (-f(y + 2 * h) + 16.0 * f(y + h) - 30.0 * f(y) + 16.0 * f(y - h) - f(y - 2 * h)) /
               (12.0 * h * h);
    };
}

void fill_derivatives(ProfileShape& s) {
    if (!s.fp) s.fp = fd_derivative(s.f, 1);
    if (!s.fpp) s.fpp = fd_derivative(s.f, 2);
}

// Natural cubic spline (used for table-backed shapes and profile import).
class CubicSpline {
  public:
    CubicSpline(std::vector<double> x, std::vector<double> y)
        : x_(std::move(x)), y_(std::move(y)) {
        const int n = static_cast<int>(x_.size());
        if (n < 4) throw ValidationError("spline needs at least 4 points");
        m_.assign(n, 0.0);
        std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), r(n, 0.0);
        b[0] = b[n - 1] = 1.0;
        for (int i = 1; i < n - 1; ++i) {
            const double hl = x_[i] - x_[i - 1], hr = x_[i + 1] - x_[i];
            a[i] = hl / 6.0;
            b[i] = (hl + hr) / 3.0;
            c[i] = hr / 6.0;
            r[i] = (y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl;
        }
        for (int i = 1; i < n; ++i) {
            const double w = a[i] / b[i - 1];
            b[i] -= w * c[i - 1];
            r[i] -= w * r[i - 1];
        }
        m_[n - 1] = r[n - 1] / b[n - 1];
        for (int i = n - 2; i >= 0; --i) m_[i] = (r[i] - c[i] * m_[i + 1]) / b[i];
    }

    double eval(double x, int deriv = 0) const {
        const int n = static_cast<int>(x_.size());
        int i = static_cast<int>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin()) - 1;
        i = std::clamp(i, 0, n - 2);
        const double h = x_[i + 1] - x_[i];
        const double A = (x_[i + 1] - x) / h, B = (x - x_[i]) / h;
        if (deriv == 0)
            return A * y_[i] + B * y_[i + 1] +
                   ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[i + 1]) * h * h / 6.0;
        if (deriv == 1)
            return (y_[i + 1] - y_[i]) / h -
                   (3.0 * A * A - 1.0) / 6.0 * h * m_[i] + (3.0 * B * B - 1.0) / 6.0 * h * m_[i + 1];
        return A * m_[i] + B * m_[i + 1];
    }

  private:
    std::vector<double> x_, y_, m_;
};

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-12) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

double hermite(double t, double v0, double v1, double d0, double d1, double h) {
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * v0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * v1 +
           (t3 - t2) * h * d1;
}

double bisect(const std::function<double(double)>& f, double lo, double hi) {
    double flo = f(lo);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fmid = f(mid);
        if ((flo < 0.0) == (fmid < 0.0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

ProfileShape ProfileShape::sine() {
    ProfileShape s;
    s.name = "sin";
    s.f = [](double y) { return std::sin(y); };
    s.fp = [](double y) { return std::cos(y); };
    s.fpp = [](double y) { return -std::sin(y); };
    s.bracket_lo = -0.8;
    s.bracket_hi = 0.8;
    return s;
}

ProfileShape ProfileShape::linear() {
    ProfileShape s;
    s.name = "linear";
    s.f = [](double y) { return y; };
    s.fp = [](double) { return 1.0; };
    s.fpp = [](double) { return 0.0; };
    s.bracket_lo = -0.8;
    s.bracket_hi = 2.0;
    return s;
}

ProfileShape ProfileShape::radial_sine(double r0) {
    ProfileShape s;
    s.name = "radial_sine";
    s.f = [r0](double r) { return std::sin(r - r0); };
    s.fp = [r0](double r) { return std::cos(r - r0); };
    s.fpp = [r0](double r) { return -std::sin(r - r0); };
    s.bracket_lo = r0 - 0.5;
    s.bracket_hi = r0 + 1.5;
    return s;
}

ProfileShape ProfileShape::from_table(const std::vector<double>& y, const std::vector<double>& f) {
    if (y.size() != f.size()) throw ValidationError("table columns differ in length");
    auto spline = std::make_shared<CubicSpline>(y, f);
    ProfileShape s;
    s.name = "table";
    s.f = [spline](double v) { return spline->eval(v, 0); };
    s.fp = [spline](double v) { return spline->eval(v, 1); };
    s.fpp = [spline](double v) { return spline->eval(v, 2); };
    s.bracket_lo = y.front();
    s.bracket_hi = y.back();
    return s;
}

ProfileShape ProfileShape::parse(const std::string& spec) {
    if (spec == "sin") return sine();
    if (spec == "linear") return linear();
    if (spec.rfind("radial_sine:", 0) == 0) return radial_sine(std::stod(spec.substr(12)));
    if (spec.rfind("table:", 0) == 0) {
        std::ifstream in(spec.substr(6));
        if (!in) throw ValidationError("cannot open profile table " + spec.substr(6));
        std::vector<double> y, f;
        double a, b;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            std::istringstream row(line);
            if (row >> a >> b) {
                y.push_back(a);
                f.push_back(b);
            }
        }
        return from_table(y, f);
    }
    throw ValidationError("unknown profile shape '" + spec + "'");
}

void BackgroundProfile::check_window(double y) const {
    if (!(y > y0_ && y <= y1_ + 1e-12)) throw OutOfWindow("coordinate outside (y0, y1]");
}

double BackgroundProfile::y_of_eta(double eta) const {
    if (eta > 1e-12) throw OutOfWindow("eta must be <= 0");
    if (eta <= eta_min_) {
        // exponential asymptote: y - y0 ~ (y(eta_min) - y0) e^{c0 (eta - eta_min)}
        return y0_ + (y_tbl_.front() - y0_) * std::exp(c0_ * (eta - eta_min_));
    }
    const double s = (eta - eta_min_) / deta_;
    int i = std::clamp(static_cast<int>(s), 0, table_size() - 2);
    const double t = s - i;
    return hermite(t, y_tbl_[i], y_tbl_[i + 1], f_tbl_[i], f_tbl_[i + 1], deta_);
}

double BackgroundProfile::f_of_eta(double eta) const {
    if (eta > 1e-12) throw OutOfWindow("eta must be <= 0");
    if (eta <= eta_min_) return f_tbl_.front() * std::exp(c0_ * (eta - eta_min_));
    const double s = (eta - eta_min_) / deta_;
    int i = std::clamp(static_cast<int>(s), 0, table_size() - 2);
    const double t = s - i;
    // d(f)/d(eta) = f * f'(y)
    return hermite(t, f_tbl_[i], f_tbl_[i + 1], f_tbl_[i] * fp_tbl_[i],
                   f_tbl_[i + 1] * fp_tbl_[i + 1], deta_);
}

double BackgroundProfile::fp_of_eta(double eta) const {
    if (eta > 1e-12) throw OutOfWindow("eta must be <= 0");
    if (eta <= eta_min_) return fp_tbl_.front();
    const double s = (eta - eta_min_) / deta_;
    int i = std::clamp(static_cast<int>(s), 0, table_size() - 2);
    const double t = s - i;
    return hermite(t, fp_tbl_[i], fp_tbl_[i + 1], f_tbl_[i] * fpp_tbl_[i],
                   f_tbl_[i + 1] * fpp_tbl_[i + 1], deta_);
}

double BackgroundProfile::fpp_of_eta(double eta) const {
    if (eta > 1e-12) throw OutOfWindow("eta must be <= 0");
    if (eta <= eta_min_) return fpp_tbl_.front();
    const double s = (eta - eta_min_) / deta_;
    int i = std::clamp(static_cast<int>(s), 0, table_size() - 2);
    const double t = s - i;
    return (1.0 - t) * fpp_tbl_[i] + t * fpp_tbl_[i + 1];
}

double BackgroundProfile::g_of_eta(double eta) const {
    if (eta > 1e-12) throw OutOfWindow("eta must be <= 0");
    if (eta <= eta_min_) {
        const double fe = f_of_eta(eta);
        return eta - fe * fe / (4.0 * c0_);
    }
    const double s = (eta - eta_min_) / deta_;
    int i = std::clamp(static_cast<int>(s), 0, table_size() - 2);
    const double t = s - i;
    auto slope = [this](int n) {
        const double fv = f_tbl_[n];
        return std::sqrt(std::max(0.0, 1.0 - fv * fv));
    };
    return hermite(t, g_tbl_[i], g_tbl_[i + 1], slope(i), slope(i + 1), deta_);
}

double BackgroundProfile::eta_of_y(double y) const {
    check_window(y);
    if (y <= y_tbl_.front()) {
        return eta_min_ + std::log((y - y0_) / (y_tbl_.front() - y0_)) / c0_;
    }
    const auto lo = std::upper_bound(y_tbl_.begin(), y_tbl_.end(), y);
    int i = std::clamp(static_cast<int>(lo - y_tbl_.begin()) - 1, 0, table_size() - 2);
    double eta = table_eta(i) + (y - y_tbl_[i]) / std::max(f_tbl_[i], 1e-300);
    eta = std::min(eta, 0.0);
    for (int it = 0; it < 6; ++it) {
        const double yy = y_of_eta(eta);
        const double fv = f_of_eta(std::min(eta, 0.0));
        if (fv <= 0.0) break;
        const double step = (yy - y) / fv;
        eta -= step;
        eta = std::min(eta, 0.0);
        if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(eta))) break;
    }
    return eta;
}

namespace {

double find_upward_zero(const ProfileShape& s) {
    const int n = 4096;
    const double lo = s.bracket_lo, hi = s.bracket_hi;
    double prev = s.f(lo);
    for (int i = 1; i <= n; ++i) {
        const double y = lo + (hi - lo) * i / n;
        const double cur = s.f(y);
        if (prev < 0.0 && cur >= 0.0) {
            const double y0 = bisect(s.f, lo + (hi - lo) * (i - 1) / n, y);
            if (s.fp(y0) > 0.0) return y0;
        }
        prev = cur;
    }
    throw NoDegeneracy("no simple upward zero of f in bracket");
}

double shrink_window(const ProfileShape& s, double y0, double c0, double y1_request) {
    if (!(y1_request > y0)) throw WindowEmpty("requested window ends at or before the zero");
    double y1 = std::min(y1_request, s.bracket_hi);
    const int n = 4096;
    for (int i = 1; i <= n; ++i) {
        const double y = y0 + (y1 - y0) * i / n;
        const double fv = s.f(y), fpv = s.fp(y);
        if (fv >= 0.5) {
            y1 = bisect([&](double v) { return s.f(v) - 0.5; }, y0 + (y1 - y0) * (i - 1) / n, y);
            break;
        }
        if (fpv <= 0.5 * c0) {
            y1 = bisect([&](double v) { return s.fp(v) - 0.5 * c0; },
                        y0 + (y1 - y0) * (i - 1) / n, y);
            break;
        }
        if (fv <= 0.0 && i > 1) {
            y1 = y0 + (y1 - y0) * (i - 1) / n;
            break;
        }
    }
    if (!(y1 > y0 + 1e-8)) throw WindowEmpty("window conditions leave no room above the zero");
    return y1;
}

}  // namespace

std::shared_ptr<const BackgroundProfile> build_profile(ProfileKind kind, ProfileShape shape,
                                                       double y0, double y1, bool /*checked*/) {
    fill_derivatives(shape);
    auto prof = std::shared_ptr<BackgroundProfile>(new BackgroundProfile());
    prof->kind_ = kind;
    prof->name_ = shape.name;
    prof->shape_ = shape;
    prof->y0_ = y0;
    prof->y1_ = y1;
    prof->c0_ = shape.fp(y0);
    if (!(prof->c0_ > 0.0)) throw NoDegeneracy("f'(y0) must be positive");

    // march dy/deta = f(y) down from (eta, y) = (0, y1)
    const double h = 1e-3;
    const double f_stop = 1e-6 * shape.f(y1);
    const double eta_cap = std::max(-40.0 / prof->c0_, -400.0);
    std::vector<double> ys{y1};
    double y = y1, eta = 0.0;
    while (eta > eta_cap && shape.f(y) > f_stop) {
        const double k1 = shape.f(y);
        const double k2 = shape.f(y - 0.5 * h * k1);
        const double k3 = shape.f(y - 0.5 * h * k2);
        const double k4 = shape.f(y - h * k3);
        y -= h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        eta -= h;
        ys.push_back(y);
    }
    std::reverse(ys.begin(), ys.end());
    prof->deta_ = h;
    prof->eta_min_ = -h * (static_cast<double>(ys.size()) - 1.0);
    prof->y_tbl_ = std::move(ys);
    const int n = prof->table_size();
    prof->f_tbl_.resize(n);
    prof->fp_tbl_.resize(n);
    prof->fpp_tbl_.resize(n);
    for (int i = 0; i < n; ++i) {
        prof->f_tbl_[i] = shape.f(prof->y_tbl_[i]);
        prof->fp_tbl_[i] = shape.fp(prof->y_tbl_[i]);
        prof->fpp_tbl_[i] = shape.fpp(prof->y_tbl_[i]);
    }

    // g table: accumulate sqrt(1 - f^2) per interval. Near f -> 1 the
    // integrand has a sqrt kink in eta; substitute u = sqrt(eta_top - eta).
    prof->g_tbl_.assign(n, 0.0);
    auto y_local = [&](int i, double t) {
        return hermite(t, prof->y_tbl_[i], prof->y_tbl_[i + 1], prof->f_tbl_[i],
                       prof->f_tbl_[i + 1], h);
    };
    double acc = 0.0;
    std::vector<double> increments(n - 1, 0.0);
    for (int i = 0; i < n - 1; ++i) {
        auto integrand = [&](double t) {
            const double fv = shape.f(y_local(i, t));
            return std::sqrt(std::max(0.0, 1.0 - fv * fv));
        };
        double inc;
        if (std::max(prof->f_tbl_[i], prof->f_tbl_[i + 1]) > 0.9) {
            // u-substitution measured from the top of the interval
            auto sub = [&](double u) {
                const double t = 1.0 - u * u;
                return 2.0 * u * integrand(t);
            };
            inc = h * integrate(sub, 0.0, 1.0, 1e-13);
        } else {
            inc = h * integrate(integrand, 0.0, 1.0, 1e-13);
        }
        increments[i] = inc;
    }
    for (int i = 1; i < n; ++i) {
        acc += increments[i - 1];
        prof->g_tbl_[i] = acc;
    }
    // normalize so that g(eta) - eta -> 0 at depth (analytic tail correction)
    const double f_min = prof->f_tbl_.front();
    const double g_at_min = prof->eta_min_ - f_min * f_min / (4.0 * prof->c0_);
    const double shift = g_at_min - prof->g_tbl_[0];
    for (auto& g : prof->g_tbl_) g += shift;
    return prof;
}

ProfilePtr make_profile(ProfileKind kind, ProfileShape shape, double y1_request) {
    fill_derivatives(shape);
    const double y0 = find_upward_zero(shape);
    const double c0 = shape.fp(y0);
    const double y1 = shrink_window(shape, y0, c0, y1_request);
    return build_profile(kind, std::move(shape), y0, y1, true);
}

ProfilePtr make_profile_explicit(ProfileKind kind, ProfileShape shape, double y0, double y1) {
    fill_derivatives(shape);
    if (!(y1 > y0)) throw WindowEmpty("y1 must exceed y0");
    return build_profile(kind, std::move(shape), y0, y1, false);
}

StationarityReport verify_stationary(const BackgroundProfile& profile, const Grid& grid) {
    // 6th-order centered differences of the sampled planar field over the
    // window band (local stencils; window profiles need not be periodic).
    StationarityReport rep;
    std::function<double(double, double)> bx, by;
    if (profile.kind() == ProfileKind::Translational) {
        bx = [&](double, double yv) { return profile.f(yv); };
        by = [](double, double) { return 0.0; };
    } else {
        bx = [&](double x, double yv) { return -yv * profile.f(std::hypot(x, yv)); };
        by = [&](double x, double yv) { return x * profile.f(std::hypot(x, yv)); };
    }
    const double span = profile.y1() - profile.y0();
    const double hd = std::min({grid.lx() / grid.nx(), grid.ly() / grid.ny(), span / 64.0});
    auto d6 = [hd](const std::function<double(double)>& f, double v) {
        return (45.0 * (f(v + hd) - f(v - hd)) - 9.0 * (f(v + 2 * hd) - f(v - 2 * hd)) +
                (f(v + 3 * hd) - f(v - 3 * hd))) /
               (60.0 * hd);
    };
    auto curl = [&](double xx, double yy) {
        return d6([&](double v) { return by(v, yy); }, xx) -
               d6([&](double v) { return bx(xx, v); }, yy);
    };
    const int nr = 48, nq = profile.kind() == ProfileKind::Translational ? 1 : 12;
    for (int i = 0; i < nr; ++i) {
        // keep the full stencil (incl. nested curl) inside the window
        const double rlo = profile.y0() + 7.0 * hd, rhi = profile.y1() - 7.0 * hd;
        if (!(rhi > rlo)) break;
        const double r = rlo + (rhi - rlo) * i / (nr - 1);
        for (int q = 0; q < nq; ++q) {
            double x, yv;
            if (profile.kind() == ProfileKind::Translational) {
                x = grid.lx() * 0.37;
                yv = r;
            } else {
                const double th = 2.0 * Grid::pi() * q / nq;
                x = r * std::cos(th);
                yv = r * std::sin(th);
            }
            const double div = d6([&](double v) { return bx(v, yv); }, x) +
                               d6([&](double v) { return by(x, v); }, yv);
            const double transport = bx(x, yv) * d6([&](double v) { return curl(v, yv); }, x) +
                                     by(x, yv) * d6([&](double v) { return curl(x, v); }, yv);
            rep.div_linf = std::max(rep.div_linf, std::abs(div));
            rep.curl_transport_linf = std::max(rep.curl_transport_linf, std::abs(transport));
        }
    }
    return rep;
}

StationarityReport verify_stationary(const ScalarField& bx, const ScalarField& by) {
    require_same_grid(bx, by);
    StationarityReport rep;
    ScalarField div = deriv(bx, Axis::X, 1) + deriv(by, Axis::Y, 1);
    ScalarField curlz = deriv(by, Axis::X, 1) - deriv(bx, Axis::Y, 1);
    ScalarField transport = multiply_dealias(bx, deriv(curlz, Axis::X, 1)) +
                            multiply_dealias(by, deriv(curlz, Axis::Y, 1));
    rep.div_linf = lp_norm(div, std::numeric_limits<double>::infinity());
    rep.curl_transport_linf = lp_norm(transport, std::numeric_limits<double>::infinity());
    return rep;
}

void export_profile(const BackgroundProfile& profile, std::ostream& out, int rows) {
    out << "# degenwave-profile v1\n";
    out << "# kind=" << (profile.kind() == ProfileKind::Translational ? "translational"
                                                                      : "axisymmetric")
        << " name=" << profile.name() << std::setprecision(17) << " y0=" << profile.y0()
        << " y1=" << profile.y1() << " c0=" << profile.c0() << " eta_min=" << profile.eta_min()
        << "\n";
    out << "# columns: y f fp fpp eta G\n";
    out << std::setprecision(17);
    for (int i = 0; i < rows; ++i) {
        const double eta = profile.eta_min() * (1.0 - static_cast<double>(i) / (rows - 1));
        const double y = profile.y_of_eta(eta);
        out << y << " " << profile.f(y) << " " << profile.fp(y) << " " << profile.fpp(y) << " "
            << eta << " " << profile.g_of_eta(eta) << "\n";
    }
}

ProfilePtr import_profile(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("# degenwave-profile", 0) != 0)
        throw ParseError("missing profile header");
    if (!std::getline(in, line)) throw ParseError("missing profile metadata");
    auto get = [&](const std::string& key) {
        const auto pos = line.find(key + "=");
        if (pos == std::string::npos) throw ParseError("missing profile key " + key);
        return line.substr(pos + key.size() + 1);
    };
    const bool translational = get("kind").rfind("translational", 0) == 0;
    const double y0 = std::stod(get("y0"));
    const double y1 = std::stod(get("y1"));
    std::vector<double> ys, fs;
    double a, b, skip;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        if (row >> a >> b >> skip >> skip >> skip >> skip) {
            ys.push_back(a);
            fs.push_back(b);
        }
    }
    if (ys.size() < 8) throw ParseError("profile table too short");
    ProfileShape shape = ProfileShape::from_table(ys, fs);
    shape.bracket_lo = y0;
    shape.bracket_hi = y1;
    return make_profile_explicit(
        translational ? ProfileKind::Translational : ProfileKind::Axisymmetric, shape, y0, y1);
}

// --- FourierSeries1D -----------------------------------------------------

FourierSeries1D FourierSeries1D::from_samples(double period, const std::vector<double>& samples) {
    const int n = static_cast<int>(samples.size());
    std::vector<Complex> out(n / 2 + 1);
    {
        std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
        std::vector<double> in(samples);
        fftw_plan plan = fftw_plan_dft_r2c_1d(n, in.data(),
                                              reinterpret_cast<fftw_complex*>(out.data()),
                                              FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_execute(plan);
        fftw_destroy_plan(plan);
    }
    for (auto& c : out) c /= static_cast<double>(n);
    // trim trailing negligible modes (keeps single-mode shapes cheap to sample)
    double peak = 0.0;
    for (const auto& c : out) peak = std::max(peak, std::abs(c));
    std::size_t keep = out.size();
    while (keep > 1 && std::abs(out[keep - 1]) <= 1e-14 * std::max(peak, 1e-300)) --keep;
    out.resize(keep);
    return FourierSeries1D(period, std::move(out));
}

double FourierSeries1D::eval(double y, int deriv_order) const {
    const double k0 = 2.0 * Grid::pi() / period_;
    Complex sum = deriv_order == 0 ? coeffs_[0] : Complex(0.0);
    double result = sum.real();
    for (int m = 1; m < modes(); ++m) {
        const double k = k0 * m;
        Complex term = coeffs_[m] * std::exp(Complex(0.0, k * y));
        term *= std::pow(Complex(0.0, k), deriv_order);
        result += 2.0 * term.real();
    }
    return result;
}

FourierSeries1D FourierSeries1D::frac_laplacian(double a) const {
    std::vector<Complex> c(coeffs_);
    const double k0 = 2.0 * Grid::pi() / period_;
    c[0] = (a == 0.0) ? c[0] : Complex(0.0);
    for (int m = 1; m < modes(); ++m) c[m] *= std::pow(k0 * m, 2.0 * a);
    return FourierSeries1D(period_, std::move(c));
}

FourierSeries1D FourierSeries1D::decayed(double eta_diss, double alpha, double t) const {
    std::vector<Complex> c(coeffs_);
    const double k0 = 2.0 * Grid::pi() / period_;
    for (int m = 0; m < modes(); ++m) {
        const double k2a = (m == 0) ? (alpha == 0.0 ? 1.0 : 0.0) : std::pow(k0 * m, 2.0 * alpha);
        c[m] *= std::exp(-eta_diss * k2a * t);
    }
    return FourierSeries1D(period_, std::move(c));
}

std::vector<double> FourierSeries1D::sample_rows(const Grid& grid, int deriv_order) const {
    if (std::abs(grid.ly() - period_) > 1e-12 * period_) {
        std::vector<double> rows(grid.ny());
        for (int j = 0; j < grid.ny(); ++j) rows[j] = eval(grid.y(j), deriv_order);
        return rows;
    }
    const double k0 = 2.0 * Grid::pi() / period_;
    std::vector<Complex> c(coeffs_);
    for (int m = 0; m < modes(); ++m) c[m] *= std::pow(Complex(0.0, k0 * m), deriv_order);
    if (deriv_order > 0) c[0] = 0.0;
    return detail::fft_synthesize_1d(c, grid.ny());
}

EvolvedBackground evolve_background(ProfilePtr profile0, const FourierSeries1D& f0,
                                    double eta_diss, double alpha) {
    return EvolvedBackground(std::move(profile0), f0, eta_diss, alpha);
}

double EvolvedBackground::window_discrepancy(double t, int samples) const {
    const FourierSeries1D ft = f_at(t);
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double y = 0.5 * i / (samples - 1);
        worst = std::max(worst, std::abs(ft.eval(y) - f0_.eval(y)));
    }
    return worst;
}

AdmissibilityReport check_f0_admissible(const FourierSeries1D& f0, double alpha, double tol) {
    AdmissibilityReport rep;
    const FourierSeries1D lap = f0.frac_laplacian(alpha);
    const int n = 513;
    for (int i = 0; i < n; ++i) {
        const double y = 0.5 * i / (n - 1);
        rep.frac_lap_linf_window = std::max(rep.frac_lap_linf_window, std::abs(lap.eval(y)));
        rep.odd_symmetry_linf =
            std::max(rep.odd_symmetry_linf, std::abs(f0.eval(y) + f0.eval(-y)));
    }
    double scale = 0.0;
    for (int i = 0; i < n; ++i)
        scale = std::max(scale, std::abs(f0.eval(f0.period() * i / n)));
    rep.admissible = rep.frac_lap_linf_window <= tol * std::max(scale, 1.0) &&
                     rep.odd_symmetry_linf <= tol * std::max(scale, 1.0);
    return rep;
}

FradissBackground make_fradiss_background(double alpha, double y1_request, int resolution) {
    const double period = 2.0 * Grid::pi();
    // odd bump pair supported in 1 < |y| < pi; the low-pass (-Delta)^{-alpha}
    // makes the global maximum of f0 a few times the slope at the degeneracy
    auto bump = [](double s) {
        return std::abs(s) < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0;
    };
    const double yc = 1.5, w = 0.45;
    std::vector<double> g(resolution);
    for (int i = 0; i < resolution; ++i) {
        double y = period * i / resolution;
        if (y > Grid::pi()) y -= period;  // principal branch [-pi, pi)
        g[i] = bump((y - yc) / w) - bump((y + yc) / w);
    }
    FourierSeries1D g_series = FourierSeries1D::from_samples(period, g);
    FourierSeries1D f0 = g_series.frac_laplacian(-alpha);
    // scale so the slope at the degeneracy is 1
    const double slope = f0.eval(0.0, 1);
    if (std::abs(slope) < 1e-14) throw NoDegeneracy("fradiss f0 has vanishing slope at 0");
    std::vector<Complex> scaled(f0.coeffs());
    for (auto& c : scaled) c /= slope;
    FourierSeries1D f0n(period, std::move(scaled));

    ProfileShape shape;
    shape.name = "fradiss_f0";
    auto series = std::make_shared<FourierSeries1D>(f0n);
    shape.f = [series](double y) { return series->eval(y, 0); };
    shape.fp = [series](double y) { return series->eval(y, 1); };
    shape.fpp = [series](double y) { return series->eval(y, 2); };
    shape.bracket_lo = -0.4;
    shape.bracket_hi = 1.2;
    ProfilePtr prof = make_profile(ProfileKind::Translational, shape, y1_request);
    return FradissBackground{std::move(f0n), std::move(prof)};
}

}  // namespace degenwave
