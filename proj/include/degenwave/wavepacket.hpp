#pragma once

#include <map>
#include <optional>
#include <vector>

#include "degenwave/ops.hpp"
#include "degenwave/profile.hpp"

namespace degenwave {

enum class AmplitudeMode { XIndependent, ProductP0One };

// Initial amplitude q0 on the window; default is the C-infinity bump
// exp(-1/(1-s^2)) rescaled into (y1/2, y1). In ProductP0One mode the
// x-factor is identically 1 on the torus, which coincides with
// XIndependent for integer wave numbers.
struct AmplitudeSpec {
    AmplitudeMode mode = AmplitudeMode::XIndependent;
    std::function<Complex(double)> q0;  // sampler in y (or r)
    std::function<Complex(double)> q0p;
    double y_lo = 0.0, y_hi = 0.0;  // support, inside (y1/2, y1)

    static AmplitudeSpec default_bump(const BackgroundProfile& profile);
};

// Foot point of the backward characteristic through (tau, eta) plus the
// accumulated integrating factor alpha and its eta-derivative.
struct BacktrackResult {
    double eta0 = 0.0;
    double x_shift = 0.0;
    double alpha = 0.0;
    double dalpha_deta = 0.0;
};

BacktrackResult backtrack(const BackgroundProfile& profile, double tau, double eta,
                          double ds = 5e-3);
// Forward image Y(tau, eta0) of the transport characteristic.
double characteristic_forward(const BackgroundProfile& profile, double tau, double eta0,
                              double ds = 5e-3);

// Complex row profiles of the packet at one time: every component has the
// form Re(e^{i lambda x} W(y)) (theta in place of x when axisymmetric).
struct PacketSlice {
    double t = 0.0;
    std::vector<double> y;
    std::vector<Complex> w_psi, w_bz, w_bx, w_by;
    double supp_lo = 0.0, supp_hi = 0.0;  // y-range of the transported support
};

struct PacketFields {
    ScalarField bz;
    ScalarField psi;
    ScalarField bx;
    ScalarField by;
};

struct ResidualNorms {
    double err_b_l2 = 0.0;
    double grad_err_psi_l2 = 0.0;
};

struct HallResidualNorms {
    double res_u = 0.0;       // fluid z-equation, dissipation-compensated (structural zero)
    double res_omega = 0.0;   // |grad (-Delta)^{-1} (omega-residual)| ~ 1/lambda
    double res_b = 0.0;       // magnetic z-equation ~ 1
    double grad_res_psi = 0.0;
};

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_slope = 0.0;
};

struct DegenerationScan {
    std::vector<double> times;
    std::map<double, std::vector<double>> lp_bz;  // p -> |bz|_Lp series
    std::map<double, std::vector<double>> hs_b;   // s -> H^s of the full packet
    std::vector<double> l2_b;                     // three-component L^2
    std::vector<double> supp_lo, supp_mid, supp_hi;
    double cf_measured = 0.0;  // min f' over the visited range
    double cf_upper = 0.0;     // f'(y0)
    std::map<double, FitResult> lp_fit;  // slope of log |bz|_Lp vs t
    std::map<double, FitResult> hs_fit;
};

// Degenerating approximate solution at wave number lambda on a translational
// or axisymmetric profile. Construction normalizes q0 so that the full
// three-component field has unit L^2 norm at t = 0.
class WavePacket {
  public:
    WavePacket(ProfilePtr profile, int lambda, AmplitudeSpec amp);

    const BackgroundProfile& profile() const { return *profile_; }
    const ProfilePtr& profile_ptr() const { return profile_; }
    int lambda() const { return lambda_; }
    double norm_scale() const { return scale_; }
    double initial_l2() const { return 1.0; }

    // Transported amplitude h(tau, .) sampled on a uniform eta grid covering
    // the support, plus d(h)/d(eta) and d(h)/d(tau).
    struct AmplitudeSample {
        std::vector<double> eta;
        std::vector<Complex> h, h_eta, h_tau;
    };
    AmplitudeSample amplitude_h(double tau, int n = 1024) const;

    PacketSlice slice(double t, const std::vector<double>& y_points) const;
    PacketSlice slice_uniform(double t, int n, double pad = 0.0) const;

    // Grid evaluation; throws UnderResolved when the packet's instantaneous
    // bandwidth exceeds the grid's dealiased band.
    PacketFields evaluate(const GridPtr& grid, double t) const;
    double bandwidth(double t) const;  // max local y (or r) frequency

    ResidualNorms residual(const GridPtr& grid, double t, double dt_fd = 0.0) const;
    struct ResidualFields {
        ScalarField err_b;
        ScalarField err_psi;
    };
    ResidualFields residual_fields(const GridPtr& grid, double t, double dt_fd = 0.0) const;
    // Separable-representation residual (resolution set by n, not by a grid).
    ResidualNorms residual_native(double t, double dt_fd = 0.0, int n = 8192) const;

    PacketFields hall_lift(const GridPtr& grid, double t) const;  // (uz, omega) = (-psi, -bz)
    HallResidualNorms hall_residuals(const GridPtr& grid, double t, double nu) const;

    // smoothing norms of the fluid lift, |u~^z| and |grad (-Delta)^{-1} omega~|,
    // computed in the separable representation (grid-free)
    struct LiftNorms {
        double uz_l2 = 0.0;
        double gradinv_omega_l2 = 0.0;
    };
    LiftNorms hall_lift_norms_native(double t, int n = 16384) const;

    DegenerationScan degeneration_scan(const std::vector<double>& times,
                                       const std::vector<double>& p_list,
                                       const std::vector<double>& s_list, int n = 8192) const;

    // support endpoints in y (or r) at time t
    std::pair<double, double> support(double t) const;

  private:
    ProfilePtr profile_;
    int lambda_;
    AmplitudeSpec amp_;
    double eta_lo_ = 0.0, eta_hi_ = 0.0;  // initial support in eta
    double scale_ = 1.0;
    double default_dt_fd(double) const;
};

WavePacket build_packet(ProfilePtr profile, int lambda,
                        std::optional<AmplitudeSpec> amp = std::nullopt);
WavePacket build_packet_axi(ProfilePtr profile, int lambda,
                            std::optional<AmplitudeSpec> amp = std::nullopt);

void export_packet_snapshot(const WavePacket& packet, const PacketFields& fields, double t,
                            const std::string& csv_path, const std::string& json_path);

FitResult ols_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace degenwave
