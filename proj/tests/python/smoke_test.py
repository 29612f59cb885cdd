"""Smoke tests for the python module: core operators, profile tables, rays, packets."""

import math

import numpy as np

import degenwave as dw


def test_spectral_ops():
    g = dw.Grid(32, 32)
    x = np.linspace(0.0, 2.0 * math.pi, 32, endpoint=False)
    xx, yy = np.meshgrid(x, x, indexing="ij")
    f = dw.ScalarField.from_array(g, np.cos(2.0 * xx))
    d = dw.deriv(f, "x").to_array()
    assert np.max(np.abs(d + 2.0 * np.sin(2.0 * xx))) < 1e-11

    u = dw.ScalarField.from_array(g, np.cos(xx + 2.0 * yy) * -5.0)
    w = dw.inv_laplacian(u).to_array()
    assert np.max(np.abs(w - np.cos(xx + 2.0 * yy))) < 1e-10

    s = dw.ScalarField.from_array(g, np.cos(3.0 * xx))
    assert abs(dw.hs_norm(s, 1.0) - 2.0 * math.pi * math.sqrt(5.0)) < 1e-10
    assert abs(dw.inner(dw.ScalarField.from_array(g, np.sin(xx)),
                        dw.ScalarField.from_array(g, np.cos(xx)))) < 1e-12


def test_profile_tables():
    prof = dw.make_profile("translational", "sin", 1.0)
    assert abs(prof.y1 - math.asin(0.5)) < 1e-10
    assert abs(prof.c0 - 1.0) < 1e-10
    lin = dw.make_profile_explicit("translational", "linear", 0.0, 1.0)
    assert abs(lin.eta_of_y(math.exp(-1.0)) + 1.0) < 1e-8
    assert abs(lin.g_of_eta(0.0) - (math.log(2.0) - 1.0)) < 1e-8


def test_rays():
    ex = dw.explicit_ray_linear(4.0, 0.5)
    assert abs(ex.pos[1] - math.cosh(math.log(1 + math.sqrt(2))) / math.cosh(2 + math.log(1 + math.sqrt(2)))) < 1e-12
    samples = dw.integrate_ray_linear_shear(4.0, 0.5, 1e-4)
    last = samples[-1]
    ref = dw.explicit_ray_linear(4.0, last.t)
    assert abs(last.pos[1] - ref.pos[1]) < 1e-8


def test_packet():
    prof = dw.make_profile("translational", "sin", 1.0)
    pk = dw.build_packet(prof, 8)
    g = dw.Grid(64, 512)
    fields = pk.evaluate(g, 0.0)
    total = 0.0
    area = (2.0 * math.pi / 64) * (2.0 * math.pi / 512)
    for name in ("bz", "bx", "by"):
        total += float(np.sum(fields[name] ** 2)) * area
    assert abs(math.sqrt(total) - 1.0) < 1e-2  # unit-normalized at t = 0
    err_b, grad_err_psi = pk.residual_native(0.05)
    assert err_b < 100.0 and grad_err_psi < 1e-4 * 8.0
    slope = pk.degeneration_exponent(1.0, 0.25)
    assert slope < -0.25 * 8.0 * 0.5 * 0.7  # L^1 decays at a rate ~ lambda/2


def main():
    test_spectral_ops()
    test_profile_tables()
    test_rays()
    test_packet()
    print("python smoke tests passed")


if __name__ == "__main__":
    main()
