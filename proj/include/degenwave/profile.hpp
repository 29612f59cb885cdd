#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "degenwave/field.hpp"

namespace degenwave {

enum class ProfileKind { Translational, Axisymmetric };

using Sampler = std::function<double(double)>;

// One-variable shape of the stationary field: f(y) for f(y) d/dx, or f(r)
// for f(r) d/theta. Derivative samplers fall back to high-order finite
// differences when not supplied.
struct ProfileShape {
    std::string name;
    Sampler f;
    Sampler fp;   // optional
    Sampler fpp;  // optional
    double bracket_lo = -1.0;
    double bracket_hi = 3.0;

    static ProfileShape sine();                    // f(y) = sin y
    static ProfileShape linear();                  // f(y) = y
    static ProfileShape radial_sine(double r0);    // f(r) = sin(r - r0)
    static ProfileShape from_table(const std::vector<double>& y, const std::vector<double>& f);
    static ProfileShape parse(const std::string& spec);  // "sin" | "linear" | "table:<path>"
};

// Stationary degenerate profile with the renormalizing coordinate tables.
// eta(y) solves d(eta)/dy = 1/f with eta(y1) = 0; g_of_eta is the phase
// integral with g(eta) - eta -> 0 as eta -> -inf. Tables are uniform in eta
// (node derivatives are exact, interpolation is cubic Hermite); below
// eta_min the exponential asymptote f ~ f_min e^{c0(eta-eta_min)} takes over.
class BackgroundProfile {
  public:
    ProfileKind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    double y0() const { return y0_; }
    double y1() const { return y1_; }
    double c0() const { return c0_; }
    double eta_min() const { return eta_min_; }

    double f(double y) const { return shape_.f(y); }
    double fp(double y) const { return shape_.fp(y); }
    double fpp(double y) const { return shape_.fpp(y); }

    double eta_of_y(double y) const;
    double y_of_eta(double eta) const;
    // table-interpolated samplers in the eta variable (cubic Hermite with
    // exact nodal slopes; much cheaper than the y-samplers for table-heavy
    // shapes and accurate to ~1e-12 at the 1e-3 node spacing)
    double f_of_eta(double eta) const;
    double fp_of_eta(double eta) const;
    double fpp_of_eta(double eta) const;
    double g_of_eta(double eta) const;

    int table_size() const { return static_cast<int>(y_tbl_.size()); }
    double table_eta(int i) const { return eta_min_ + i * deta_; }
    double table_y(int i) const { return y_tbl_[i]; }
    double table_f(int i) const { return f_tbl_[i]; }
    double table_g(int i) const { return g_tbl_[i]; }

    friend std::shared_ptr<const BackgroundProfile> build_profile(ProfileKind, ProfileShape,
                                                                  double, double, bool);

  private:
    ProfileKind kind_;
    std::string name_;
    ProfileShape shape_;
    double y0_ = 0.0, y1_ = 0.0, c0_ = 0.0;
    double eta_min_ = 0.0, deta_ = 0.0;
    std::vector<double> y_tbl_, f_tbl_, g_tbl_;  // node i at eta_min + i*deta
    std::vector<double> fp_tbl_, fpp_tbl_;
    void check_window(double y) const;
};

using ProfilePtr = std::shared_ptr<const BackgroundProfile>;

// Locates the simple zero by bisection over the shape's bracket, then shrinks
// y1_request until f' > c0/2 and 0 < f < 1/2 hold on (y0, y1].
// Throws NoDegeneracy / WindowEmpty.
ProfilePtr make_profile(ProfileKind kind, ProfileShape shape, double y1_request);

// Explicit-window construction: y0/y1 given, window conditions not enforced
// (used for synthetic shapes whose tables are exercised outside the packet
// window, e.g. f(y) = y up to y1 = 1).
ProfilePtr make_profile_explicit(ProfileKind kind, ProfileShape shape, double y0, double y1);

struct StationarityReport {
    double div_linf = 0.0;
    double curl_transport_linf = 0.0;
};

// Profile form: residuals of the stationary-field conditions sampled over the
// window band with 6th-order finite differences.
StationarityReport verify_stationary(const BackgroundProfile& profile, const Grid& grid);
// Field form: spectral residuals for an arbitrary planar field (Bx, By).
StationarityReport verify_stationary(const ScalarField& bx, const ScalarField& by);

// Plain-text table export/import (columns: y f fp fpp eta G).
void export_profile(const BackgroundProfile& profile, std::ostream& out, int rows = 512);
ProfilePtr import_profile(std::istream& in);

// --- fractionally dissipative background -------------------------------

// Truncated Fourier series on [0, L), evaluated with analytic derivatives.
class FourierSeries1D {
  public:
    FourierSeries1D() = default;
    FourierSeries1D(double period, std::vector<Complex> coeffs)
        : period_(period), coeffs_(std::move(coeffs)) {}
    static FourierSeries1D from_samples(double period, const std::vector<double>& samples);

    double period() const { return period_; }
    int modes() const { return static_cast<int>(coeffs_.size()); }
    const std::vector<Complex>& coeffs() const { return coeffs_; }

    double eval(double y, int deriv_order = 0) const;
    // multiplier |k|^{2a} (zero mode killed for a != 0)
    FourierSeries1D frac_laplacian(double a) const;
    FourierSeries1D decayed(double eta_diss, double alpha, double t) const;
    std::vector<double> sample_rows(const Grid& grid, int deriv_order = 0) const;

  private:
    double period_ = 2.0 * Grid::pi();
    std::vector<Complex> coeffs_;  // one-sided (m >= 0), series = c0 + 2 Re sum c_m e^{imky}
};

// Background evolving under d/dt f = -eta_diss (-Delta)^alpha f (exact 1D
// spectral multipliers; the semigroup property holds to roundoff).
class EvolvedBackground {
  public:
    EvolvedBackground(ProfilePtr profile0, FourierSeries1D f0, double eta_diss, double alpha)
        : profile0_(std::move(profile0)), f0_(std::move(f0)), eta_diss_(eta_diss), alpha_(alpha) {}

    const ProfilePtr& profile0() const { return profile0_; }
    const FourierSeries1D& f0() const { return f0_; }
    double eta_diss() const { return eta_diss_; }
    double alpha() const { return alpha_; }

    FourierSeries1D f_at(double t) const { return f0_.decayed(eta_diss_, alpha_, t); }
    // sup over [0, 1/2] of |f(t,y) - f0(y)|
    double window_discrepancy(double t, int samples = 257) const;

  private:
    ProfilePtr profile0_;
    FourierSeries1D f0_;
    double eta_diss_, alpha_;
};

EvolvedBackground evolve_background(ProfilePtr profile0, const FourierSeries1D& f0,
                                    double eta_diss, double alpha);

struct AdmissibilityReport {
    double frac_lap_linf_window = 0.0;  // |(-Delta)^alpha f0| on [0, 1/2]
    double odd_symmetry_linf = 0.0;     // |f0(y) + f0(-y)|
    bool admissible = false;
};

AdmissibilityReport check_f0_admissible(const FourierSeries1D& f0, double alpha,
                                        double tol = 1e-8);

// Builds f0 = (-Delta)^{-alpha} g with g an odd bump pair supported outside
// [-1, 1] on the 2*pi torus, scaled so the window conditions hold near 0,
// plus the profile for the window [0, y1_request].
struct FradissBackground {
    FourierSeries1D f0;
    ProfilePtr profile;
};
FradissBackground make_fradiss_background(double alpha, double y1_request = 0.5,
                                          int resolution = 2048);

}  // namespace degenwave
