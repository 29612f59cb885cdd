#pragma once

#include <functional>
#include <vector>

#include "degenwave/grid.hpp"

namespace degenwave {

// Real scalar field on a Grid. Both representations are materialized at
// construction, so instances are immutable and freely shareable across
// threads. All operations return new fields.
class ScalarField {
  public:
    static ScalarField zero(GridPtr grid);
    static ScalarField from_physical(GridPtr grid, std::vector<double> values);
    static ScalarField from_spectral(GridPtr grid, std::vector<Complex> coeffs);
    static ScalarField from_function(GridPtr grid,
                                     const std::function<double(double, double)>& f);

    const GridPtr& grid() const { return grid_; }
    const std::vector<double>& phys() const { return phys_; }
    const std::vector<Complex>& spec() const { return spec_; }

    double at(int i, int j) const { return phys_[static_cast<std::size_t>(i) * grid_->ny() + j]; }
    Complex coeff(int i, int m) const {
        return spec_[static_cast<std::size_t>(i) * grid_->nyc() + m];
    }
    double mean() const { return spec_[0].real(); }

    ScalarField operator+(const ScalarField& o) const;
    ScalarField operator-(const ScalarField& o) const;
    ScalarField operator*(double s) const;

  private:
    ScalarField(GridPtr grid, std::vector<double> phys, std::vector<Complex> spec)
        : grid_(std::move(grid)), phys_(std::move(phys)), spec_(std::move(spec)) {}
    GridPtr grid_;
    std::vector<double> phys_;
    std::vector<Complex> spec_;
};

struct VectorField2 {
    ScalarField x;
    ScalarField y;
};

void require_same_grid(const ScalarField& a, const ScalarField& b);

}  // namespace degenwave
