#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "degenwave/profile.hpp"

namespace degenwave {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const { return std::hypot(std::hypot(x, y), z); }
};

// Stationary planar field seen by the ray tracer: value and Jacobian at a
// point. Axisymmetric profiles are traced in Cartesian coordinates.
struct RayField {
    std::string name;
    std::function<Vec3(const Vec3&)> value;
    std::function<std::array<Vec3, 3>(const Vec3&)> jacobian;  // rows: dB/dx, dB/dy, dB/dz
    // conserved momenta besides p: translational (xi_x, xi_z),
    // axisymmetric (x xi_y - y xi_x, xi_z), exceptional (xi_x, xi_z)
    std::function<std::array<double, 2>(const Vec3&, const Vec3&)> momenta;

    static RayField translational(ProfilePtr profile);
    static RayField axisymmetric(ProfilePtr profile);
    static RayField linear_shear();                       // B = y d/dx
    static RayField exceptional(double c, double d);      // B = c y d/dx + d d/dy
};

struct RayState {
    Vec3 pos;
    Vec3 freq;
    double t = 0.0;
};

struct RayTrajectory {
    std::vector<RayState> samples;
    double p0 = 0.0;
    std::array<double, 2> momenta0{0.0, 0.0};
    bool step_too_large = false;  // advisory: conserved drift exceeded 1e-4
};

struct ConservedReport {
    double p_drift = 0.0;  // max relative drift over the trajectory
    double m1_drift = 0.0;
    double m2_drift = 0.0;
    double max() const { return std::max({p_drift, m1_drift, m2_drift}); }
};

// p(x, xi) = B(x).xi |xi|; throws ZeroFrequency at xi = 0.
double hamiltonian(const RayField& field, const Vec3& pos, const Vec3& freq);

// Classical fixed-step RK4 on the 6-dimensional Hamiltonian system.
// Throws FrequencyCollapse if |xi| falls below 1e-8 |xi(0)|.
RayTrajectory integrate_ray(const RayField& field, const Vec3& pos0, const Vec3& freq0,
                            double t_end, double dt, int record_every = 1);

// Closed form on B = y d/dx for X(0) = (0,1,0), Xi(0) = (lambda,-lambda,0).
RayState explicit_ray_linear(double lambda, double t);

ConservedReport conserved_report(const RayField& field, const RayTrajectory& traj);

void write_trajectory_csv(const RayField& field, const RayTrajectory& traj, std::ostream& out);

}  // namespace degenwave
