#pragma once

#include <optional>
#include <string>
#include <vector>

#include "degenwave/diagnostics.hpp"
#include "degenwave/rays.hpp"

namespace degenwave {

inline constexpr const char* kVersion = "degenwave 0.1.0";

struct ExperimentConfig {
    std::string experiment;
    // [grid]
    int nx = 128, ny = 1024;
    double lx = 2.0 * Grid::pi(), ly = 2.0 * Grid::pi();
    // [profile]
    std::string profile = "sin";
    double y1 = 1.0;
    // [run]
    std::vector<int> lambdas{8, 16, 32};
    std::vector<double> s_list{1.0, 2.0};
    std::vector<double> p_list{1.0, 2.0};
    double t_end = 0.0;  // 0 = auto
    double dt = 0.0;     // 0 = auto
    double lt_max = 0.8;  // cap on lambda * t for growth runs (auto t_end)
    int cadence = 16;
    double nu = 0.0, eta_diss = 0.0, alpha = 0.0, beta = 0.0;
    unsigned seed = 1234;
    int threads = 1;
    std::string output_dir = ".";
    bool plot_data = false;
    bool snapshot = false;  // emit field snapshots next to the CSVs
    // [verdicts]
    double window_T = 0.012;
    double growth_lo = 0.7, growth_hi = 1.3;
    double doubling_lo = 1.6, doubling_hi = 2.4;
    double degen_tol = 0.25;
    // [fradiss]
    double fradiss_epsilon = 0.3;
    // [nonlinear]
    double amp_epsilon = 0.05;
    double s_exp = 3.0, n_exp = 0.0, s0 = 1.0;
    bool bisect_eps = false;
    bool control = false;  // degeneracy-free control run (norm_growth)
};

ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);  // for tests
std::string dump_config(const ExperimentConfig& cfg);

struct Verdict {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double lo = 0.0, hi = 0.0;  // admissible interval (when applicable)
};

struct ExperimentReport {
    std::string experiment;
    std::vector<std::string> csv_files;
    std::vector<Verdict> verdicts;
    std::map<std::string, double> fits;  // named fitted exponents / constants
    std::map<std::string, std::string> environment;
    bool pass() const {
        for (const auto& v : verdicts)
            if (!v.pass) return false;
        return true;
    }
    std::string to_json() const;
    void write(const std::string& out_dir) const;  // report.json (+ plot data)
};

ExperimentReport run_experiment(const ExperimentConfig& cfg);

ExperimentReport run_rays(const ExperimentConfig& cfg);
ExperimentReport run_packet_validate(const ExperimentConfig& cfg);
ExperimentReport run_norm_growth(const ExperimentConfig& cfg);
ExperimentReport run_degeneration(const ExperimentConfig& cfg);
ExperimentReport run_fradiss(const ExperimentConfig& cfg);
ExperimentReport run_hall_growth(const ExperimentConfig& cfg);
ExperimentReport run_nonlinear_demo(const ExperimentConfig& cfg);

// Verdict recomputation from the emitted CSVs alone (the runners call this on
// the files they just wrote; re-running it on saved files reproduces the
// verdicts bit-identically).
std::vector<Verdict> verdicts_from_csvs(const ExperimentConfig& cfg,
                                        const std::vector<std::string>& csv_files);

// largest t such that the packet stays within the grid's dealiased band
double resolution_horizon(const WavePacket& packet, const Grid& grid);

ProfilePtr profile_from_config(const ExperimentConfig& cfg);

}  // namespace degenwave
