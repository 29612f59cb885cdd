#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "degenwave/profile.hpp"
#include "degenwave/wavepacket.hpp"

namespace degenwave {

enum class SolverVariant { EmhdLinear, EmhdNonlinear, HallLinear };

SolverVariant parse_variant(const std::string& name);  // accepts the *_fradiss aliases too

struct SolverParams {
    SolverVariant variant = SolverVariant::EmhdLinear;
    double nu = 0.0;        // fluid dissipation strength (Hall)
    double eta_diss = 0.0;  // magnetic dissipation strength
    double alpha = 1.0;     // magnetic dissipation order (-Delta)^alpha
    double beta = 0.0;      // fluid dissipation order (-Delta)^{1+beta}
    bool evolving_background = false;
};

// Background seen by the pseudo-spectral stepper: a 1D Fourier series in y,
// optionally decaying under the fractional heat flow.
class SolverBackground {
  public:
    static SolverBackground constant(double c);
    static SolverBackground from_series(FourierSeries1D f0);
    static SolverBackground from_profile(const BackgroundProfile& profile, int samples = 1024);

    FourierSeries1D at(double t, double eta_diss, double alpha, bool evolving) const;
    const FourierSeries1D& initial() const { return f0_; }
    double max_abs() const;

  private:
    explicit SolverBackground(FourierSeries1D f0) : f0_(std::move(f0)) {}
    FourierSeries1D f0_;
};

// Prognostic fields in spectral form. Electron-MHD variants carry (bz, psi),
// Hall carries (uz, omega, bz, psi).
struct SolverState {
    double t = 0.0;
    std::vector<std::vector<Complex>> fields;
    int bz_index() const { return fields.size() == 4 ? 2 : 0; }
    int psi_index() const { return fields.size() == 4 ? 3 : 1; }
};

struct EnergyReport {
    double energy = 0.0;
    double rate_measured = 0.0;   // differenced between consecutive reports
    double rate_predicted = 0.0;  // quadrature of the identity's RHS
    bool has_measured = false;
};

struct TestingFunctional {
    double bb = 0.0;          // <b~, b>
    double uu = 0.0;          // <u~, u> (Hall)
    double rhs_exchange = 0.0;  // f''/f' pairings of the bilinear identity
};

struct DiagnosticsRecord {
    double t = 0.0;
    double l2_b = 0.0;
    double l2_u = 0.0;
    std::map<double, double> hs_b;
    std::map<double, double> lp_bz;
    double energy = 0.0;
    double energy_rate_measured = 0.0;
    double energy_rate_predicted = 0.0;
    double test_bb = 0.0;
    double test_uu = 0.0;
    double visc_pairing_accum = 0.0;  // nu int <grad u~, grad u>
    double omega_mean = 0.0;
    double tail_fraction = 0.0;  // spectral-energy fraction near the cutoff
};

struct RunOptions {
    double t_end = 0.0;
    double dt = 0.0;  // 0: cfl_dt re-evaluated every recompute_dt_every steps
    int cadence = 16;
    int recompute_dt_every = 32;
    double cfl_safety = 0.5;
    std::vector<double> s_list{1.0};
    std::vector<double> p_list{};
    const WavePacket* packet = nullptr;
};

struct RunResult {
    std::vector<DiagnosticsRecord> records;
    SolverState final_state;
    bool aborted = false;
    std::string abort_reason;
    double dt_used = 0.0;
};

class Solver {
  public:
    Solver(GridPtr grid, SolverBackground background, SolverParams params);

    const GridPtr& grid() const { return grid_; }
    const SolverParams& params() const { return params_; }

    SolverState make_state(const ScalarField& bz, const ScalarField& psi) const;
    SolverState make_state(const ScalarField& uz, const ScalarField& omega, const ScalarField& bz,
                           const ScalarField& psi) const;
    SolverState state_from_packet(const WavePacket& packet, double t = 0.0,
                                  bool zero_fluid = true) const;

    SolverState rhs(const SolverState& s) const;        // dissipation included
    SolverState step(const SolverState& s, double dt) const;
    double cfl_dt(const SolverState& s, double safety = 0.5) const;

    double energy(const SolverState& s) const;
    double energy_rate_predicted(const SolverState& s) const;
    TestingFunctional testing_functional(const SolverState& s, const WavePacket& packet) const;

    RunResult run(SolverState initial, const RunOptions& opts) const;

    ScalarField field(const SolverState& s, int index) const;
    double omega_mean(const SolverState& s) const;

  private:
    GridPtr grid_;
    SolverBackground background_;
    SolverParams params_;
    int nfields_;
    mutable std::vector<double> frow_, fpprow_;  // refreshed when evolving
    mutable double rows_t_ = -1.0;
    using Fields = std::vector<std::vector<Complex>>;
    // scratch reused across stages; a Solver instance is single-threaded
    // (runs parallelize across instances)
    mutable std::vector<Complex> ctmp_, ctmp2_;
    mutable std::vector<double> ptmp_[6];
    mutable Fields stage_a_, stage_b_, stage_c_, stage_d_, stage_u_;
    mutable double exp_dt_ = 0.0;
    mutable std::vector<std::vector<double>> exp_half_, exp_full_;  // per field
    void refresh_rows(double t) const;
    void nonlinear_rhs(const Fields& in, double t, Fields& out) const;
    std::vector<double> dissipation_multiplier(int field_index) const;
    void apply_exp(Fields& fields, double dt, double scale) const;
};

}  // namespace degenwave
