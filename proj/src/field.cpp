#include "degenwave/field.hpp"

#include <cmath>

namespace degenwave {

namespace {

// Force the self-conjugacy the r2c layout cannot represent structurally:
// on the jy = 0 and jy = ny/2 planes, c(kx) must equal conj(c(-kx)).
void enforce_hermitian(const Grid& g, std::vector<Complex>& spec) {
    const int nx = g.nx(), nyc = g.nyc();
    for (int m : {0, g.ny() / 2}) {
        if (m >= nyc) continue;
        for (int i = 0; i <= nx / 2; ++i) {
            const int ic = (nx - i) % nx;
            const std::size_t a = static_cast<std::size_t>(i) * nyc + m;
            const std::size_t b = static_cast<std::size_t>(ic) * nyc + m;
            const Complex avg = 0.5 * (spec[a] + std::conj(spec[b]));
            spec[a] = avg;
            spec[b] = std::conj(avg);
        }
    }
}

void check_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) throw ValidationError("field contains non-finite values");
}

}  // namespace

ScalarField ScalarField::zero(GridPtr grid) {
    std::vector<double> phys(grid->size_phys(), 0.0);
    std::vector<Complex> spec(grid->size_spec(), Complex(0.0, 0.0));
    return ScalarField(std::move(grid), std::move(phys), std::move(spec));
}

ScalarField ScalarField::from_physical(GridPtr grid, std::vector<double> values) {
    if (values.size() != grid->size_phys())
        throw ValidationError("physical sample count does not match grid");
    check_finite(values);
    std::vector<Complex> spec(grid->size_spec());
    grid->forward(values.data(), spec.data());
    return ScalarField(std::move(grid), std::move(values), std::move(spec));
}

ScalarField ScalarField::from_spectral(GridPtr grid, std::vector<Complex> coeffs) {
    if (coeffs.size() != grid->size_spec())
        throw ValidationError("spectral coefficient count does not match grid");
    enforce_hermitian(*grid, coeffs);
    std::vector<double> phys(grid->size_phys());
    grid->backward(coeffs.data(), phys.data());
    check_finite(phys);
    return ScalarField(std::move(grid), std::move(phys), std::move(coeffs));
}

ScalarField ScalarField::from_function(GridPtr grid,
                                       const std::function<double(double, double)>& f) {
    std::vector<double> phys(grid->size_phys());
    for (int i = 0; i < grid->nx(); ++i)
        for (int j = 0; j < grid->ny(); ++j)
            phys[static_cast<std::size_t>(i) * grid->ny() + j] = f(grid->x(i), grid->y(j));
    return from_physical(std::move(grid), std::move(phys));
}

void require_same_grid(const ScalarField& a, const ScalarField& b) {
    if (!a.grid()->same_as(*b.grid())) throw GridMismatch("fields live on different grids");
}

ScalarField ScalarField::operator+(const ScalarField& o) const {
    require_same_grid(*this, o);
    std::vector<double> phys(phys_);
    std::vector<Complex> spec(spec_);
    for (std::size_t k = 0; k < phys.size(); ++k) phys[k] += o.phys_[k];
    for (std::size_t k = 0; k < spec.size(); ++k) spec[k] += o.spec_[k];
    return ScalarField(grid_, std::move(phys), std::move(spec));
}

ScalarField ScalarField::operator-(const ScalarField& o) const {
    require_same_grid(*this, o);
    std::vector<double> phys(phys_);
    std::vector<Complex> spec(spec_);
    for (std::size_t k = 0; k < phys.size(); ++k) phys[k] -= o.phys_[k];
    for (std::size_t k = 0; k < spec.size(); ++k) spec[k] -= o.spec_[k];
    return ScalarField(grid_, std::move(phys), std::move(spec));
}

ScalarField ScalarField::operator*(double s) const {
    std::vector<double> phys(phys_);
    std::vector<Complex> spec(spec_);
    for (auto& v : phys) v *= s;
    for (auto& c : spec) c *= s;
    return ScalarField(grid_, std::move(phys), std::move(spec));
}

}  // namespace degenwave
