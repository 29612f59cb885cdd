#include "degenwave/grid.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>
#include <tuple>

namespace degenwave {

namespace detail {

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

std::vector<Complex> fft_forward_1d(const std::vector<Complex>& in) {
    const int n = static_cast<int>(in.size());
    std::vector<Complex> work(in), out(n);
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_plan plan = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(work.data()),
                                          reinterpret_cast<fftw_complex*>(out.data()),
                                          FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_execute(plan);
        fftw_destroy_plan(plan);
    }
    for (auto& c : out) c /= static_cast<double>(n);
    return out;
}

std::vector<double> fft_synthesize_1d(const std::vector<Complex>& onesided, int n) {
    std::vector<Complex> half(static_cast<std::size_t>(n) / 2 + 1, Complex(0.0));
    const std::size_t m = std::min(half.size(), onesided.size());
    for (std::size_t k = 0; k < m; ++k) half[k] = onesided[k];
    std::vector<double> out(n);
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_plan plan =
            fftw_plan_dft_c2r_1d(n, reinterpret_cast<fftw_complex*>(half.data()), out.data(),
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_execute(plan);
        fftw_destroy_plan(plan);
    }
    // c2r sums conjugate pairs, matching the one-sided c0 + 2 Re sum convention
    return out;
}

}  // namespace detail

namespace {
std::mutex& planner_mutex() { return detail::fftw_planner_mutex(); }
}  // namespace

// Owns the FFTW plans for one grid size. Plans are created once under the
// global planner lock with natural (heap) alignment; execution falls back to
// aligned scratch copies when a caller's buffer has a different alignment
// class. c2r always goes through scratch since it clobbers its input.
class FftEngine {
  public:
    FftEngine(int nx, int ny) : nx_(nx), ny_(ny) {
        const std::size_t np = static_cast<std::size_t>(nx) * ny;
        const std::size_t ns = static_cast<std::size_t>(nx) * (ny / 2 + 1);
        rbuf_ = fftw_alloc_real(np);
        cbuf_ = fftw_alloc_complex(ns);
        align_class_ = fftw_alignment_of(rbuf_);
        std::lock_guard<std::mutex> lock(planner_mutex());
        const unsigned flags = np >= (1u << 16) ? FFTW_PATIENT : FFTW_MEASURE;
        fwd_ = fftw_plan_dft_r2c_2d(nx, ny, rbuf_, cbuf_, flags);
        bwd_ = fftw_plan_dft_c2r_2d(nx, ny, cbuf_, rbuf_, flags);
    }

    ~FftEngine() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(rbuf_);
        fftw_free(cbuf_);
    }

    void forward(const double* phys, Complex* spec) const {
        // out-of-place r2c preserves its input
        const std::size_t np = static_cast<std::size_t>(nx_) * ny_;
        const std::size_t ns = static_cast<std::size_t>(nx_) * (ny_ / 2 + 1);
        double* in = const_cast<double*>(phys);
        fftw_complex* out = reinterpret_cast<fftw_complex*>(spec);
        if (fftw_alignment_of(in) == align_class_ &&
            fftw_alignment_of(reinterpret_cast<double*>(out)) == align_class_) {
            fftw_execute_dft_r2c(fwd_, in, out);
        } else {
            std::lock_guard<std::mutex> lock(scratch_mutex_);
            std::copy(phys, phys + np, rbuf_);
            fftw_execute_dft_r2c(fwd_, rbuf_, cbuf_);
            std::copy(reinterpret_cast<Complex*>(cbuf_), reinterpret_cast<Complex*>(cbuf_) + ns,
                      spec);
        }
        const double scale = 1.0 / static_cast<double>(np);
        for (std::size_t k = 0; k < ns; ++k) spec[k] *= scale;
    }

    void backward(const Complex* spec, double* phys) const {
        // c2r clobbers its input; stage through a per-thread copy
        const std::size_t np = static_cast<std::size_t>(nx_) * ny_;
        const std::size_t ns = static_cast<std::size_t>(nx_) * (ny_ / 2 + 1);
        thread_local std::vector<Complex> stage;
        stage.assign(spec, spec + ns);
        fftw_complex* in = reinterpret_cast<fftw_complex*>(stage.data());
        if (fftw_alignment_of(reinterpret_cast<double*>(in)) == align_class_ &&
            fftw_alignment_of(phys) == align_class_) {
            fftw_execute_dft_c2r(bwd_, in, phys);
        } else {
            std::lock_guard<std::mutex> lock(scratch_mutex_);
            std::copy(spec, spec + ns, reinterpret_cast<Complex*>(cbuf_));
            fftw_execute_dft_c2r(bwd_, cbuf_, rbuf_);
            std::copy(rbuf_, rbuf_ + np, phys);
        }
    }

  private:
    int nx_, ny_;
    int align_class_ = 0;
    double* rbuf_;
    fftw_complex* cbuf_;
    fftw_plan fwd_, bwd_;
    mutable std::mutex scratch_mutex_;
};

Grid::Grid(int nx, int ny, double lx, double ly)
    : nx_(nx), ny_(ny), lx_(lx), ly_(ly), fft_(std::make_unique<FftEngine>(nx, ny)) {
    kx_.resize(nx_);
    for (int i = 0; i < nx_; ++i) kx_[i] = 2.0 * pi() * jx(i) / lx_;
    ky_.resize(nyc());
    for (int m = 0; m < nyc(); ++m) ky_[m] = 2.0 * pi() * m / ly_;
}

Grid::~Grid() = default;

std::shared_ptr<const Grid> Grid::make(int nx, int ny, double lx, double ly) {
    if (nx < 8 || ny < 8 || nx % 2 != 0 || ny % 2 != 0)
        throw ValidationError("grid sizes must be even and >= 8");
    if (!(lx > 0.0) || !(ly > 0.0)) throw ValidationError("grid periods must be positive");
    // grids (and their plans) are immutable; share one instance per size
    struct Key {
        int nx, ny;
        double lx, ly;
        bool operator<(const Key& o) const {
            return std::tie(nx, ny, lx, ly) < std::tie(o.nx, o.ny, o.lx, o.ly);
        }
    };
    static std::map<Key, std::weak_ptr<const Grid>> cache;
    static std::mutex cache_mutex;
    const Key key{nx, ny, lx, ly};
    std::lock_guard<std::mutex> lock(cache_mutex);
    if (auto hit = cache[key].lock()) return hit;
    auto fresh = std::shared_ptr<const Grid>(new Grid(nx, ny, lx, ly));
    cache[key] = fresh;
    return fresh;
}

double Grid::kx_cutoff() const { return 2.0 * pi() / lx_ * (nx_ / 3.0); }
double Grid::ky_cutoff() const { return 2.0 * pi() / ly_ * (ny_ / 3.0); }

void Grid::forward(const double* phys, Complex* spec) const { fft_->forward(phys, spec); }
void Grid::backward(const Complex* spec, double* phys) const { fft_->backward(spec, phys); }

}  // namespace degenwave
