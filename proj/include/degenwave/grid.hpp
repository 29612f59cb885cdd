#pragma once

#include <complex>
#include <memory>
#include <mutex>
#include <vector>

#include "degenwave/errors.hpp"

namespace degenwave {

using Complex = std::complex<double>;

class FftEngine;

// Doubly periodic rectangular grid. Physical samples are row-major with x the
// slow index: values[i*ny + j] = f(x_i, y_j). Spectral storage is the
// real-to-complex half spectrum over y: nx * (ny/2 + 1) coefficients scaled as
// Fourier-series coefficients, f = sum c_{jm} exp(i(kx_j x + ky_m y)) with the
// m > 0 half implicit by conjugate symmetry.
class Grid {
  public:
    static std::shared_ptr<const Grid> make(int nx, int ny, double lx = 2.0 * pi(),
                                            double ly = 2.0 * pi());
    ~Grid();

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double lx() const { return lx_; }
    double ly() const { return ly_; }

    int nyc() const { return ny_ / 2 + 1; }          // stored ky count
    std::size_t size_phys() const { return static_cast<std::size_t>(nx_) * ny_; }
    std::size_t size_spec() const { return static_cast<std::size_t>(nx_) * nyc(); }

    double x(int i) const { return lx_ * i / nx_; }
    double y(int j) const { return ly_ * j / ny_; }
    double cell_area() const { return (lx_ / nx_) * (ly_ / ny_); }

    // Signed-index wavenumbers, kx[i] = 2*pi*j/Lx with j = i for i <= nx/2 and
    // j = i - nx otherwise; ky[m] = 2*pi*m/Ly for the stored half.
    double kx(int i) const { return kx_[i]; }
    double ky(int m) const { return ky_[m]; }
    int jx(int i) const { return i <= nx_ / 2 ? i : i - nx_; }

    double kx_cutoff() const;  // 2/3-rule cutoff magnitude in x
    double ky_cutoff() const;
    double ky_nyquist() const { return 2.0 * pi() / ly_ * (ny_ / 2); }

    bool in_dealias_band(int i, int m) const {
        return 3 * std::abs(jx(i)) <= nx_ && 3 * m <= ny_;
    }

    // FFTs between the two representations (thread-safe after construction).
    void forward(const double* phys, Complex* spec) const;   // includes 1/(nx*ny)
    void backward(const Complex* spec, double* phys) const;  // input copied, not clobbered

    bool same_as(const Grid& other) const {
        return nx_ == other.nx_ && ny_ == other.ny_ && lx_ == other.lx_ && ly_ == other.ly_;
    }

    static constexpr double pi() { return 3.141592653589793238462643383279502884; }

  private:
    Grid(int nx, int ny, double lx, double ly);
    int nx_, ny_;
    double lx_, ly_;
    std::vector<double> kx_, ky_;
    std::unique_ptr<FftEngine> fft_;
};

using GridPtr = std::shared_ptr<const Grid>;

namespace detail {
// FFTW plan creation is not thread-safe; all planners share this lock.
std::mutex& fftw_planner_mutex();
// Forward c2c transform, output scaled to Fourier-series coefficients.
std::vector<Complex> fft_forward_1d(const std::vector<Complex>& in);
// Synthesize n real samples from one-sided series coefficients.
std::vector<double> fft_synthesize_1d(const std::vector<Complex>& onesided, int n);
}  // namespace detail

}  // namespace degenwave
