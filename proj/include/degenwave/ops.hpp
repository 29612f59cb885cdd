#pragma once

#include "degenwave/field.hpp"

namespace degenwave {

enum class Axis { X, Y };

// Spectral derivative; exact for band-limited fields. Nyquist modes are
// zeroed for odd orders to keep the result real.
ScalarField deriv(const ScalarField& f, Axis axis, int order = 1);

ScalarField laplacian(const ScalarField& f);

// Mean-zero inverse, throws NonZeroMean when |c00| > 1e-10 * rms(f).
ScalarField inv_laplacian(const ScalarField& f);

// (-Delta)^a: multiplier |k|^{2a}. Zero mode: killed for a > 0, kept for
// a = 0, requires mean-zero input for a < 0 (NonZeroMean otherwise).
ScalarField frac_laplacian(const ScalarField& f, double a);

// Right inverse of d/dx with zero x-mean output for every y; requires the
// x-mean of f to vanish row-wise (NonZeroXMean otherwise).
ScalarField inv_dx(const ScalarField& f);

// (-d/dy, d/dx) psi; spectrally divergence-free.
VectorField2 perp_grad(const ScalarField& psi);

// 2/3-rule truncation: modes with 3|jx| > nx or 3|jy| > ny zeroed.
ScalarField dealias(const ScalarField& f);

// Pointwise product in physical space, then 2/3 truncation.
ScalarField multiply_dealias(const ScalarField& a, const ScalarField& b);

// Trapezoidal L^p on the uniform grid (p = inf: grid max).
double lp_norm(const ScalarField& f, double p);
double hs_norm(const ScalarField& f, double s);
double inner(const ScalarField& f, const ScalarField& g);
double inner_vec(const VectorField2& a, const VectorField2& b);

// --- raw spectral kernels shared with the time stepper ---
namespace spectral {

double l2_norm(const Grid& g, const std::vector<Complex>& spec);
double hs_norm(const Grid& g, const std::vector<Complex>& spec, double s);
double inner(const Grid& g, const std::vector<Complex>& a, const std::vector<Complex>& b);
// <grad a, grad b> = sum |k|^2 conj(a) b
double inner_grad(const Grid& g, const std::vector<Complex>& a, const std::vector<Complex>& b);
// <a, (-Delta)^{-1} b> with zero modes skipped
double inner_invlap(const Grid& g, const std::vector<Complex>& a, const std::vector<Complex>& b);

void apply_dealias(const Grid& g, std::vector<Complex>& spec);
void ddx(const Grid& g, const std::vector<Complex>& in, std::vector<Complex>& out);
void scale_by_k2(const Grid& g, const std::vector<Complex>& in, std::vector<Complex>& out,
                 double sign);  // out = sign * |k|^2 * in
void invert_laplacian(const Grid& g, const std::vector<Complex>& in, std::vector<Complex>& out);

}  // namespace spectral

}  // namespace degenwave
