import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from sicyig.magnetostatics import (EffectiveShift, InsideStripeError,
                                   StripeGeometry, effective_zeeman_shift,
                                   find_xopt, gradient_profile,
                                   homogeneity_report, stripe_field)

GEOM = StripeGeometry(width_nm=500.0, thickness_nm=100.0, length_um=100.0,
                      b_sat_G=1700.0)


def oracle_field_2d(geom, x, z):
    """Brute-force quadrature of the line-charge kernel over both faces."""
    sigma = geom.b_sat_G / (4 * np.pi)
    t, w = geom.thickness_nm, geom.width_nm

    def bz(xs, zf, sgn):
        return sgn * 2 * sigma * (z - zf) / ((x - xs) ** 2 + (z - zf) ** 2)

    def bx(xs, zf, sgn):
        return sgn * 2 * sigma * (x - xs) / ((x - xs) ** 2 + (z - zf) ** 2)

    kw = dict(epsabs=1e-13, epsrel=1e-13, limit=200)
    bz_val = (quad(bz, -t / 2, t / 2, args=(w / 2, 1), **kw)[0]
              + quad(bz, -t / 2, t / 2, args=(-w / 2, -1), **kw)[0])
    bx_val = (quad(bx, -t / 2, t / 2, args=(w / 2, 1), **kw)[0]
              + quad(bx, -t / 2, t / 2, args=(-w / 2, -1), **kw)[0])
    return bx_val, bz_val


def oracle_field_3d(geom, point):
    """Finite-length surface integral over the two charged faces.

    For field points on the y = 0 symmetry plane the y integral has the
    closed form L / (rho^2 sqrt(rho^2 + L^2/4)); the x' integral is done
    numerically, so the route is independent of the infinite-length
    arctan kernel.
    """
    sigma = geom.b_sat_G / (4 * np.pi)
    t, w, ell = geom.thickness_nm, geom.width_nm, geom.length_um * 1e3
    x, _, z = np.asarray(point, float)
    total = np.zeros(3)
    kw = dict(epsabs=1e-13, epsrel=1e-13, limit=200)
    for zf, sgn in ((w / 2, 1.0), (-w / 2, -1.0)):
        def kern(xs, comp):
            rho2 = (x - xs) ** 2 + (z - zf) ** 2
            u = (x - xs) if comp == 0 else (z - zf)
            return sgn * sigma * u * ell / (rho2 * np.sqrt(rho2 + ell ** 2 / 4))
        total[0] += quad(kern, -t / 2, t / 2, args=(0,), **kw)[0]
        total[2] += quad(kern, -t / 2, t / 2, args=(2,), **kw)[0]
    return total


class TestStripeField:
    def test_matches_2d_quadrature_oracle_on_axis(self):
        b = stripe_field(GEOM, (150.0, 0.0, 0.0))
        ox, oz = oracle_field_2d(GEOM, 150.0, 0.0)
        assert b[2] == pytest.approx(oz, rel=1e-6)
        assert abs(b[0] - ox) < 1e-9

    @pytest.mark.parametrize("point", [(150.0, 0.0, 37.0), (90.0, 0.0, -180.0),
                                       (400.0, 0.0, 120.0)])
    def test_matches_2d_quadrature_oracle_off_axis(self, point):
        b = stripe_field(GEOM, point)
        ox, oz = oracle_field_2d(GEOM, point[0], point[2])
        assert b[2] == pytest.approx(oz, rel=1e-6)
        assert b[0] == pytest.approx(ox, rel=1e-6)

    def test_matches_3d_surface_integral_for_long_stripe(self):
        # finite length 100 um leaves only ~1e-5 relative tail
        b = stripe_field(GEOM, (150.0, 0.0, 0.0))
        o = oracle_field_3d(GEOM, (150.0, 0.0, 0.0))
        assert b[2] == pytest.approx(o[2], rel=1e-4)

    def test_far_field_decays(self):
        b = stripe_field(GEOM, (1e6, 0.0, 0.0))
        assert np.linalg.norm(b) < 1e-3

    def test_midplane_symmetry_zeroes_transverse(self):
        b = stripe_field(GEOM, (123.0, 0.0, 0.0))
        assert b[0] == 0.0
        assert b[1] == 0.0

    def test_inside_raises(self):
        with pytest.raises(InsideStripeError):
            stripe_field(GEOM, (0.0, 0.0, 0.0))

    def test_divergence_free_closed_contour(self):
        # net flux of (Bx, Bz) through a rectangle enclosing no charge
        n = 4000
        x0, x1, z0, z1 = 80.0, 400.0, -300.0, 300.0
        flux = 0.0
        for (xa, za, xb, zb, nx, nz) in (
                (x0, z0, x1, z0, 0.0, -1.0), (x1, z0, x1, z1, 1.0, 0.0),
                (x1, z1, x0, z1, 0.0, 1.0), (x0, z1, x0, z0, -1.0, 0.0)):
            ts = np.linspace(0.0, 1.0, n)
            xs = xa + (xb - xa) * ts
            zs = za + (zb - za) * ts
            seg = np.hypot(xb - xa, zb - za) / (n - 1)
            bs = np.array([stripe_field(GEOM, (x, 0.0, z)) for x, z in zip(xs, zs)])
            flux += ((bs[:, 0] * nx + bs[:, 2] * nz).sum()
                     - 0.5 * (bs[0, 0] * nx + bs[0, 2] * nz)
                     - 0.5 * (bs[-1, 0] * nx + bs[-1, 2] * nz)) * seg
        peak = max(np.linalg.norm(stripe_field(GEOM, (x, 0, 0)))
                   for x in (80.0, 150.0, 400.0))
        area = (x1 - x0) * (z1 - z0)
        assert abs(flux) < 1e-6 * peak * area

    @settings(max_examples=30, deadline=None)
    @given(x=st.floats(60.0, 2000.0), z=st.floats(-900.0, 900.0))
    def test_mirror_symmetry(self, x, z):
        b_up = stripe_field(GEOM, (x, 0.0, z))
        b_dn = stripe_field(GEOM, (x, 0.0, -z))
        assert b_up[2] == pytest.approx(b_dn[2], rel=1e-12, abs=1e-12)
        assert b_up[0] == pytest.approx(-b_dn[0], rel=1e-12, abs=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(x=st.floats(60.0, 2000.0), z=st.floats(-900.0, 900.0),
           scale=st.floats(0.1, 10.0))
    def test_linear_in_saturation(self, x, z, scale):
        geom2 = StripeGeometry(GEOM.width_nm, GEOM.thickness_nm, GEOM.length_um,
                               GEOM.b_sat_G * scale)
        b1 = stripe_field(GEOM, (x, 0.0, z))
        b2 = stripe_field(geom2, (x, 0.0, z))
        assert np.allclose(b2, scale * b1, rtol=1e-12, atol=1e-12)

    def test_two_dimensional_far_field_quarter_ratio(self):
        for x in (2000.0, 3500.0, 5000.0):
            ratio = (stripe_field(GEOM, (2 * x, 0, 0))[2]
                     / stripe_field(GEOM, (x, 0, 0))[2])
            assert ratio == pytest.approx(0.25, rel=0.05)


class TestGradient:
    def test_peak_gradient_near_half_gauss_per_nm(self):
        samples = gradient_profile(GEOM, 60.0, 400.0, 400)
        peak = max(abs(s.grad_bz_x_G_per_nm) for s in samples)
        assert peak == pytest.approx(0.5, rel=0.1)

    def test_profile_mirror_in_z(self):
        up = gradient_profile(GEOM, 60.0, 400.0, 50, z_nm=20.0)
        dn = gradient_profile(GEOM, 60.0, 400.0, 50, z_nm=-20.0)
        for a, b in zip(up, dn):
            # field values mirror to 1e-12 relative; the finite-difference
            # gradient adds a few ulp of cancellation noise
            assert a.b_dip_G[2] == pytest.approx(b.b_dip_G[2], rel=1e-12)
            assert a.grad_bz_x_G_per_nm == pytest.approx(
                b.grad_bz_x_G_per_nm, rel=1e-10)

    def test_step_halving_richardson(self):
        coarse = gradient_profile(GEOM, 100.0, 300.0, 30, step_nm=0.1)
        fine = gradient_profile(GEOM, 100.0, 300.0, 30, step_nm=0.05)
        for a, b in zip(coarse, fine):
            assert a.grad_bz_x_G_per_nm == pytest.approx(
                b.grad_bz_x_G_per_nm, rel=1e-4)

    def test_empty_range_rejected(self):
        with pytest.raises(ValueError):
            gradient_profile(GEOM, 300.0, 100.0, 10)

    def test_xopt_reference_geometry(self):
        x_opt, g_max = find_xopt(GEOM)
        assert x_opt == pytest.approx(150.0, abs=10.0)
        assert g_max == pytest.approx(0.5, rel=0.1)

    def test_xopt_wide_stripe(self):
        wide = StripeGeometry(800.0, 100.0, 100.0, 1700.0)
        x_opt, _ = find_xopt(wide)
        assert x_opt == pytest.approx(230.0, abs=15.0)

    def test_xopt_invariant_under_saturation_scaling(self):
        doubled = StripeGeometry(GEOM.width_nm, GEOM.thickness_nm,
                                 GEOM.length_um, 2 * GEOM.b_sat_G)
        x1, g1 = find_xopt(GEOM)
        x2, g2 = find_xopt(doubled)
        assert x2 == pytest.approx(x1, abs=0.5)
        assert g2 == pytest.approx(2 * g1, rel=1e-6)

    def test_wider_stripes_trade_gradient_for_distance(self):
        xs, gs = [], []
        for w in (400.0, 500.0, 600.0, 800.0):
            x, g = find_xopt(StripeGeometry(w, 100.0, 100.0, 1700.0))
            xs.append(x)
            gs.append(g)
        assert all(a < b for a, b in zip(xs, xs[1:]))
        assert all(a > b for a, b in zip(gs, gs[1:]))


class TestHomogeneity:
    def test_within_tenth_gauss_at_optimum(self):
        x_opt, _ = find_xopt(GEOM)
        assert homogeneity_report(GEOM, x_opt, 30.0) <= 0.1

    def test_within_three_tenths_ten_nm_below(self):
        x_opt, _ = find_xopt(GEOM)
        assert homogeneity_report(GEOM, x_opt - 10.0, 30.0) <= 0.3

    def test_degenerate_interval(self):
        assert homogeneity_report(GEOM, 150.0, 0.0) == 0.0


class TestEffectiveShift:
    def test_midplane_has_no_second_order_term(self):
        shift = effective_zeeman_shift(GEOM, (150.0, 0.0, 0.0), 3350.0)
        assert shift.second_order_G == 0.0
        assert shift.total_G == shift.first_order_G

    def test_total_variation_small_at_optimum(self):
        x_opt, _ = find_xopt(GEOM)
        totals = [effective_zeeman_shift(GEOM, (x_opt, 0.0, z), 3350.0).total_G
                  for z in np.linspace(-30, 30, 61)]
        assert max(totals) - min(totals) <= 0.1

    def test_components_recomputed_from_field(self):
        point, b0 = (170.0, 0.0, 55.0), 3350.0
        shift = effective_zeeman_shift(GEOM, point, b0)
        b = stripe_field(GEOM, point)
        assert shift.first_order_G == pytest.approx(b[2], rel=1e-12)
        assert shift.second_order_G == pytest.approx(b[0] ** 2 / (2 * b0), rel=1e-12)
        assert shift.total_G == shift.first_order_G + shift.second_order_G

    def test_nonpositive_b0_rejected(self):
        with pytest.raises(ValueError):
            effective_zeeman_shift(GEOM, (150.0, 0.0, 0.0), 0.0)

    def test_negative_second_order_rejected(self):
        with pytest.raises(ValueError):
            EffectiveShift(first_order_G=1.0, second_order_G=-0.1)


def test_short_stripe_warns():
    with pytest.warns(UserWarning):
        StripeGeometry(width_nm=500.0, thickness_nm=100.0, length_um=1.0)
