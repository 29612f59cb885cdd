#include "degenwave/rays.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

namespace degenwave {

namespace {

struct PhaseState {
    Vec3 x, xi;
    PhaseState operator+(const PhaseState& o) const { return {x + o.x, xi + o.xi}; }
    PhaseState operator*(double s) const { return {x * s, xi * s}; }
};

// dX/dt = B |xi| + (B.xi) xi/|xi|, dXi/dt = -(dB.xi)|xi|
PhaseState rhs(const RayField& field, const PhaseState& s) {
    const double n = s.xi.norm();
    if (n == 0.0) throw ZeroFrequency("ray frequency vanished");
    const Vec3 B = field.value(s.x);
    const double bxi = B.dot(s.xi);
    PhaseState d;
    d.x = B * n + s.xi * (bxi / n);
    const auto J = field.jacobian(s.x);
    d.xi = Vec3{-J[0].dot(s.xi) * n, -J[1].dot(s.xi) * n, -J[2].dot(s.xi) * n};
    return d;
}

}  // namespace

RayField RayField::translational(ProfilePtr profile) {
    RayField f;
    f.name = "translational:" + profile->name();
    f.value = [profile](const Vec3& p) { return Vec3{profile->f(p.y), 0.0, 0.0}; };
    f.jacobian = [profile](const Vec3& p) {
        return std::array<Vec3, 3>{Vec3{0.0, 0.0, 0.0}, Vec3{profile->fp(p.y), 0.0, 0.0},
                                   Vec3{0.0, 0.0, 0.0}};
    };
    f.momenta = [](const Vec3&, const Vec3& xi) { return std::array<double, 2>{xi.x, xi.z}; };
    return f;
}

RayField RayField::axisymmetric(ProfilePtr profile) {
    RayField f;
    f.name = "axisymmetric:" + profile->name();
    f.value = [profile](const Vec3& p) {
        const double r = std::hypot(p.x, p.y);
        const double fr = profile->f(r);
        return Vec3{-p.y * fr, p.x * fr, 0.0};
    };
    f.jacobian = [profile](const Vec3& p) {
        const double r = std::hypot(p.x, p.y);
        const double fr = profile->f(r), fpr = profile->fp(r);
        const double rx = r > 0 ? p.x / r : 0.0, ry = r > 0 ? p.y / r : 0.0;
        // d/dx (-y f), d/dy (-y f) etc.
        return std::array<Vec3, 3>{Vec3{-p.y * fpr * rx, fr + p.x * fpr * rx, 0.0},
                                   Vec3{-fr - p.y * fpr * ry, p.x * fpr * ry, 0.0},
                                   Vec3{0.0, 0.0, 0.0}};
    };
    f.momenta = [](const Vec3& p, const Vec3& xi) {
        return std::array<double, 2>{p.x * xi.y - p.y * xi.x, xi.z};
    };
    return f;
}

RayField RayField::linear_shear() {
    RayField f;
    f.name = "linear_shear";
    f.value = [](const Vec3& p) { return Vec3{p.y, 0.0, 0.0}; };
    f.jacobian = [](const Vec3&) {
        return std::array<Vec3, 3>{Vec3{0, 0, 0}, Vec3{1, 0, 0}, Vec3{0, 0, 0}};
    };
    f.momenta = [](const Vec3&, const Vec3& xi) { return std::array<double, 2>{xi.x, xi.z}; };
    return f;
}

RayField RayField::exceptional(double c, double d) {
    RayField f;
    f.name = "exceptional";
    f.value = [c, d](const Vec3& p) { return Vec3{c * p.y, d, 0.0}; };
    f.jacobian = [c](const Vec3&) {
        return std::array<Vec3, 3>{Vec3{0, 0, 0}, Vec3{c, 0, 0}, Vec3{0, 0, 0}};
    };
    f.momenta = [](const Vec3&, const Vec3& xi) { return std::array<double, 2>{xi.x, xi.z}; };
    return f;
}

double hamiltonian(const RayField& field, const Vec3& pos, const Vec3& freq) {
    const double n = freq.norm();
    if (n == 0.0) throw ZeroFrequency("hamiltonian undefined at xi = 0");
    return field.value(pos).dot(freq) * n;
}

RayTrajectory integrate_ray(const RayField& field, const Vec3& pos0, const Vec3& freq0,
                            double t_end, double dt, int record_every) {
    if (!(dt > 0.0)) throw ValidationError("integrate_ray requires dt > 0");
    const double n0 = freq0.norm();
    if (n0 == 0.0) throw ZeroFrequency("initial frequency must be nonzero");

    RayTrajectory traj;
    traj.p0 = hamiltonian(field, pos0, freq0);
    traj.momenta0 = field.momenta(pos0, freq0);

    PhaseState s{pos0, freq0};
    double t = 0.0;
    traj.samples.push_back({s.x, s.xi, t});
    const long steps = std::lround(t_end / dt);
    for (long n = 0; n < steps; ++n) {
        const PhaseState k1 = rhs(field, s);
        const PhaseState k2 = rhs(field, s + k1 * (0.5 * dt));
        const PhaseState k3 = rhs(field, s + k2 * (0.5 * dt));
        const PhaseState k4 = rhs(field, s + k3 * dt);
        s = s + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        t = (n + 1) * dt;
        if (s.xi.norm() < 1e-8 * n0)
            throw FrequencyCollapse("ray frequency collapsed below 1e-8 of its initial size");
        if (n % record_every == record_every - 1 || n == steps - 1)
            traj.samples.push_back({s.x, s.xi, t});
    }
    const auto rep = conserved_report(field, traj);
    traj.step_too_large = rep.max() > 1e-4;
    return traj;
}

RayState explicit_ray_linear(double lambda, double t) {
    if (!(lambda > 0.0)) throw ValidationError("lambda must be positive");
    const double theta0 = std::log(1.0 + std::sqrt(2.0));
    const double arg = lambda * t + theta0;
    RayState s;
    s.t = t;
    s.pos.y = std::cosh(theta0) / std::cosh(arg);
    s.pos.x = std::sqrt(2.0) * lambda * t + std::sqrt(2.0) * std::tanh(arg) - 1.0;
    s.pos.z = 0.0;
    s.freq = Vec3{lambda, -lambda * std::sinh(arg), 0.0};
    return s;
}

ConservedReport conserved_report(const RayField& field, const RayTrajectory& traj) {
    if (traj.samples.empty()) throw ValidationError("trajectory is empty");
    ConservedReport rep;
    auto rel = [](double drift, double ref) { return std::abs(drift) / std::max(std::abs(ref), 1e-30); };
    for (const auto& s : traj.samples) {
        rep.p_drift = std::max(rep.p_drift, rel(hamiltonian(field, s.pos, s.freq) - traj.p0,
                                                traj.p0 == 0.0 ? 1.0 : traj.p0));
        const auto m = field.momenta(s.pos, s.freq);
        for (int k = 0; k < 2; ++k) {
            const double ref = traj.momenta0[k] == 0.0 ? 1.0 : traj.momenta0[k];
            const double d = rel(m[k] - traj.momenta0[k], ref);
            (k == 0 ? rep.m1_drift : rep.m2_drift) =
                std::max(k == 0 ? rep.m1_drift : rep.m2_drift, d);
        }
    }
    return rep;
}

void write_trajectory_csv(const RayField& field, const RayTrajectory& traj, std::ostream& out) {
    out << "# degenwave-csv v1\n# field=" << field.name << "\n";
    out << "t,x,y,z,xi_x,xi_y,xi_z,p,drift_p,drift_m1,drift_m2\n";
    out << std::setprecision(17);
    for (const auto& s : traj.samples) {
        const double p = hamiltonian(field, s.pos, s.freq);
        const auto m = field.momenta(s.pos, s.freq);
        auto rel = [](double v, double ref) {
            return std::abs(v - ref) / std::max(std::abs(ref), 1.0);
        };
        out << s.t << "," << s.pos.x << "," << s.pos.y << "," << s.pos.z << "," << s.freq.x << ","
            << s.freq.y << "," << s.freq.z << "," << p << "," << rel(p, traj.p0) << ","
            << rel(m[0], traj.momenta0[0]) << "," << rel(m[1], traj.momenta0[1]) << "\n";
    }
}

}  // namespace degenwave
