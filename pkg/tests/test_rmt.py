import numpy as np
import pytest
from scipy import integrate

from echochain import rmt
from echochain.rmt import (
    b2,
    c_rmt,
    elr_fidelity,
    gue_exact_fidelity,
    lr_fidelity,
    mc_ensemble_fidelity,
    s_function,
)
from echochain.rng import substream


def test_s_function_values():
    assert s_function(0.0) == (1.0, 0.0)
    s, sp = s_function(1.0)
    assert s == pytest.approx(np.sinh(1.0), abs=1e-15)
    assert sp == pytest.approx(np.cosh(1.0) - np.sinh(1.0), abs=1e-15)
    # parity: s even, s' odd
    s_m, sp_m = s_function(-1.3)
    s_p, sp_p = s_function(1.3)
    assert s_m == s_p and sp_m == -sp_p


def test_s_function_series_region_accuracy():
    # high-precision reference: the direct double-precision formula for s'
    # is itself cancellation-limited below x ~ 0.1
    import mpmath

    mpmath.mp.dps = 40
    for x in (1e-5, 1e-3, 0.1, 0.2499, 0.2501, 1.0, 5.0):
        s, sp = s_function(x)
        xm = mpmath.mpf(x)
        ref_s = float(mpmath.sinh(xm) / xm)
        ref_sp = float(mpmath.cosh(xm) / xm - mpmath.sinh(xm) / xm**2)
        assert s == pytest.approx(ref_s, rel=1e-13)
        assert sp == pytest.approx(ref_sp, rel=1e-12, abs=1e-18)


def test_s_function_scaled_large_argument():
    g, h = s_function(800.0, scaled=True)
    assert np.isfinite(g) and np.isfinite(h)
    assert g == pytest.approx(1.0 / 1600.0, rel=1e-12)
    # s = e^x g would overflow; the scaled pair must not
    assert g > 0 and h > 0


def test_gue_exact_at_zero():
    assert gue_exact_fidelity(17.0, 0.0) == pytest.approx(1.0, abs=1e-14)
    assert gue_exact_fidelity(0.0, 0.7) == pytest.approx(1.0, abs=1e-14)
    ts = np.linspace(0, 0.99, 30)
    assert np.allclose(gue_exact_fidelity(0.0, ts), 1.0, atol=1e-14)


def test_gue_exact_linear_response_limit():
    eps = 1e-4
    for t in (0.2, 0.7, 1.3, 1.9):
        lr = 1.0 - eps * c_rmt(2, t)
        assert gue_exact_fidelity(eps, t) == pytest.approx(lr, abs=5e-8)


def test_gue_exact_continuity_variant_is_continuous():
    for eps in (1.0, 10.3, 31.78):
        below = gue_exact_fidelity(eps, 1.0 - 1e-12)
        above = gue_exact_fidelity(eps, 1.0 + 1e-12, variant="continuity")
        assert below == pytest.approx(above, rel=1e-9)


def test_gue_printed_variant_jumps_at_one():
    # taken verbatim, the printed t>1 branch is discontinuous at t=1 and
    # exceeds |f| <= 1 by orders of magnitude at strong perturbation
    below = gue_exact_fidelity(31.78, 1.0 - 1e-12)
    printed = gue_exact_fidelity(31.78, 1.0 + 1e-12, variant="printed")
    assert printed > 1e4 * abs(below)


def test_gue_exact_revival():
    ts = np.linspace(0.5, 1.5, 401)
    f = gue_exact_fidelity(31.78, ts)
    peak = int(np.argmax(f))
    assert 0 < peak < len(ts) - 1  # interior maximum
    assert 0.9 <= ts[peak] <= 1.1
    # size of the revival is ~2/eps^2
    assert f[peak] == pytest.approx(2.0 / 31.78**2, rel=0.15)


def test_b2_values():
    assert b2(2, 0.0) == 1.0
    assert b2(2, 1.0) == 0.0
    assert b2(2, 2.5) == 0.0
    # beta=1 branches agree at t=1
    assert b2(1, 1.0 - 1e-13) == pytest.approx(b2(1, 1.0 + 1e-13), abs=1e-12)
    assert b2(1, 1.0) == pytest.approx(np.log(3.0) - 1.0 + 2 - 2)  # ln3 - 1
    # and decay to zero at large t
    assert abs(b2(1, 20.0)) < 1e-3


def test_c_rmt_beta2_closed_form():
    assert c_rmt(2, 0.0) == 0.0
    for t in (0.3, 0.8, 1.0):
        assert c_rmt(2, t) == pytest.approx(t / 2 + t**3 / 6, abs=1e-15)
    assert c_rmt(2, 1.0) == pytest.approx(2.0 / 3.0, abs=1e-15)
    for t in (1.2, 2.0, 5.0):
        assert c_rmt(2, t) == pytest.approx(t**2 / 2 + 1.0 / 6.0, abs=1e-12)


@pytest.mark.parametrize("beta", [1, 2])
def test_c_rmt_against_nested_quadrature(beta):
    # independent check: C(t) = t^2/beta + t/2 - double quadrature of b2
    for t in (0.4, 1.0, 1.7):
        inner = lambda tau: integrate.quad(lambda x: b2(beta, x), 0.0, tau, limit=100)[0]
        double, _ = integrate.quad(inner, 0.0, t, limit=100)
        expected = t**2 / beta + t / 2.0 - double
        assert c_rmt(beta, t) == pytest.approx(expected, abs=1e-8)


def test_lr_elr_relations():
    ts = np.linspace(0.0, 2.0, 9)
    assert np.allclose(lr_fidelity(0.0, 2, ts), 1.0)
    assert np.allclose(elr_fidelity(0.0, 1, ts), 1.0)
    # ELR - LR = O((eps C)^2) in the small-exponent regime
    eps = 0.05
    for beta in (1, 2):
        for t in (0.2, 0.6, 1.0):
            x = eps * c_rmt(beta, t)
            if x < 0.1:
                diff = abs(elr_fidelity(eps, beta, t) - lr_fidelity(eps, beta, t))
                assert diff < x**2


def test_elr_tracks_exact_at_moderate_eps():
    # at eps=5.15 the exact and ELR curves overlap on the scale of a
    # fidelity plot; the true absolute gap grows to ~0.042 as t -> 1
    # (exact above ELR), which is what the Monte Carlo oracle confirms
    ts = np.linspace(0.05, 1.0, 20)
    exact = gue_exact_fidelity(5.15, ts)
    elr = elr_fidelity(5.15, 2, ts)
    gap = exact - elr
    assert np.max(np.abs(gap[ts <= 0.4])) < 1e-2
    assert np.max(np.abs(gap)) < 5e-2
    assert gap[-1] > 0  # exact sits above ELR approaching t_H


def test_mc_matches_exact_for_zero_perturbation():
    t = np.linspace(0.0, 1.0, 5)
    curve = mc_ensemble_fidelity(2, 0.0, 64, 3, t, seed=1)
    assert np.allclose(curve.f, 1.0, atol=1e-10)
    assert np.allclose(curve.f_imag, 0.0, atol=1e-10)


def test_mc_unfolding_unit_spacing():
    # central 50% of the unfolded spectrum has mean spacing 1 +- 2%
    rng = substream(12, "t", 0)
    spacings = []
    for _ in range(12):
        h = rmt._sample_gaussian_hermitian(2, 256, rng)
        eu = rmt._unfold_semicircle(np.linalg.eigvalsh(h), 256)
        spacings.append(np.diff(eu)[64:191].mean())
    assert np.mean(spacings) == pytest.approx(1.0, abs=0.02)


@pytest.mark.parametrize("beta", [1, 2])
def test_mc_imaginary_part_consistent_with_zero(beta):
    t = np.linspace(0.1, 1.5, 15)
    curve = mc_ensemble_fidelity(beta, 6.0, 100, 200, t, seed=7, workers=2)
    pulls = np.abs(curve.f_imag) / curve.stderr_imag
    # ensemble-averaged amplitude is real; allow the usual 3-sigma wiggle
    assert np.max(pulls) < 4.0
    assert np.mean(pulls) < 1.5


def test_mc_agrees_with_exact_small_run():
    # fast consistency check; the full oracle run lives in the acceptance suite
    t = np.linspace(0.15, 1.0, 10)
    curve = mc_ensemble_fidelity(2, 10.3, 100, 220, t, seed=5, workers=2)
    dev = np.abs(curve.f - gue_exact_fidelity(10.3, t)) / curve.stderr
    assert np.max(dev) < 3.5


def test_mc_worker_invariance():
    t = np.linspace(0.2, 1.0, 4)
    a = mc_ensemble_fidelity(2, 5.0, 64, 8, t, seed=3, workers=1)
    b = mc_ensemble_fidelity(2, 5.0, 64, 8, t, seed=3, workers=4)
    assert np.array_equal(a.f, b.f)
    assert np.array_equal(a.stderr, b.stderr)


def test_mc_goe_deviates_from_elr():
    # orthogonal class at eps=10: the ensemble average visibly departs
    # from ELR; the oracle puts it *above* ELR at intermediate times
    # (and again past t_H, the small orthogonal-class revival)
    t = np.linspace(0.25, 0.6, 8)
    curve = mc_ensemble_fidelity(1, 10.0, 200, 600, t, seed=11, workers=4)
    gap = curve.f - elr_fidelity(10.0, 1, t)
    pulls = gap / curve.stderr
    # a coherent positive offset across the window: joint significance
    assert np.mean(pulls) * np.sqrt(len(t)) > 4.0
    assert np.all(gap > 0)


def test_input_validation():
    with pytest.raises(ValueError):
        gue_exact_fidelity(-1.0, 0.5)
    with pytest.raises(ValueError):
        gue_exact_fidelity(1.0, 0.5, variant="bogus")
    with pytest.raises(ValueError):
        b2(3, 0.5)
    with pytest.raises(ValueError):
        c_rmt(0, 0.5)
    with pytest.raises(ValueError):
        mc_ensemble_fidelity(2, 1.0, 4, 10, np.array([0.1]), seed=1)
    with pytest.raises(ValueError):
        mc_ensemble_fidelity(2, 1.0, 64, 1, np.array([0.1]), seed=1)
