import math

import numpy as np
import pytest

from emlreg import (
    EML,
    LAD,
    LS,
    Cauchy,
    Fixed,
    Huber,
    KnnProportion,
    Tukey,
    batch_loss_and_grad,
    eml_loss_and_grad,
    pointwise_grad,
    pointwise_loss,
)
from emlreg.kde import resolve_bandwidths
from emlreg.losses import eml_value_fixed_bandwidths

ALL_POINTWISE = [LS(), LAD(), Huber(), Cauchy(), Tukey()]


def eml_value_brute_force(residuals, bandwidths, clamp):
    """Naive double-loop evaluation of the EML objective."""
    n = len(residuals)
    total = 0.0
    for i in range(n):
        f = 0.0
        for j in range(n):
            t = (residuals[j] - residuals[i]) / bandwidths[i]
            f += math.exp(-0.5 * t * t) / math.sqrt(2 * math.pi) / bandwidths[i]
        f /= n
        total += -math.log(max(f, clamp))
    return total / n


def test_huber_hand_example():
    assert pointwise_loss(Huber(1.345), 2.0) == pytest.approx(1.345 * 2 - 1.345**2 / 2)


def test_cauchy_hand_example():
    assert pointwise_loss(Cauchy(1.0), 1.0) == pytest.approx(math.log(2.0))


def test_tukey_flat_branch():
    assert pointwise_loss(Tukey(4.685), 10.0) == pytest.approx(4.685**2 / 6)
    assert pointwise_grad(Tukey(4.685), 5.0) == 0.0


def test_basic_grads():
    assert pointwise_grad(LS(), 3.0) == 6.0
    assert pointwise_grad(LAD(), 0.0) == 0.0


def test_pointwise_rejects_eml():
    with pytest.raises(ValueError):
        pointwise_loss(EML(), 1.0)
    with pytest.raises(ValueError):
        pointwise_grad(EML(), 1.0)


def test_bounded_influence():
    x = np.linspace(-100, 100, 20001)
    assert np.max(np.abs(pointwise_grad(LAD(), x))) <= 1.0
    assert np.max(np.abs(pointwise_grad(Huber(1.345), x))) <= 1.345
    assert np.max(np.abs(pointwise_grad(Cauchy(1.0), x))) <= 1.0 + 1e-12
    assert np.all(pointwise_grad(Tukey(4.685), x)[np.abs(x) > 4.685] == 0.0)


def test_batch_ls_hand_example():
    ev = batch_loss_and_grad(np.array([1.0, -1.0, 2.0]), LS())
    assert ev.value == pytest.approx(2.0)
    assert np.allclose(ev.grad_residuals, [2 / 3, -2 / 3, 4 / 3])


def test_batch_zero_residuals():
    z = np.zeros(5)
    for kind in ALL_POINTWISE:
        ev = batch_loss_and_grad(z, kind)
        assert ev.value == 0.0
        assert np.all(ev.grad_residuals == 0.0)


def test_batch_lad_single_point():
    ev = batch_loss_and_grad(np.array([3.0]), LAD())
    assert ev.value == 3.0
    assert np.allclose(ev.grad_residuals, [1.0])


def test_eml_two_equal_residuals():
    ev = eml_loss_and_grad([0.0, 0.0], Fixed(1.0))
    assert ev.value == pytest.approx(-math.log(0.3989422804014327), abs=1e-7)
    assert np.allclose(ev.grad_residuals, 0.0)


def test_eml_two_point_antisymmetry():
    ev = eml_loss_and_grad([0.0, 1.0], Fixed(1.0))
    expect = -math.log((0.3989422804014327 + 0.24197072451914337) / 2.0)
    assert ev.value == pytest.approx(expect, abs=1e-7)
    assert ev.grad_residuals[0] == pytest.approx(-ev.grad_residuals[1], abs=1e-14)


def test_eml_validation():
    with pytest.raises(ValueError):
        eml_loss_and_grad([1.0], Fixed(1.0))
    with pytest.raises(ValueError):
        eml_loss_and_grad([1.0, np.inf], Fixed(1.0))


def test_eml_translation_invariance():
    rng = np.random.default_rng(8)
    res = rng.uniform(-3, 3, 40)
    for bw in (Fixed(0.8), KnnProportion(0.4)):
        base = eml_loss_and_grad(res, bw)
        assert abs(base.grad_residuals.sum()) < 1e-12
        for c in (-5.0, 0.3, 12.0):
            shifted = eml_loss_and_grad(res + c, bw)
            assert abs(shifted.value - base.value) < 1e-12
            assert np.max(np.abs(shifted.grad_residuals - base.grad_residuals)) < 1e-12


def test_eml_matches_brute_force():
    rng = np.random.default_rng(9)
    for _ in range(20):
        n = int(rng.integers(2, 65))
        res = rng.uniform(-3, 3, n)
        for bw in (Fixed(0.5), KnnProportion(0.3)):
            h = resolve_bandwidths(res, bw)
            got = eml_loss_and_grad(res, bw).value
            assert abs(got - eml_value_brute_force(res, h, 1e-5)) < 1e-12


def test_eml_monotone_clamp():
    rng = np.random.default_rng(10)
    res = rng.uniform(-3, 3, 20)
    # Tiny bandwidth pushes some densities below the larger clamp.
    values = [
        eml_loss_and_grad(res, Fixed(1e-4), clamp=c).value for c in (1e-1, 1e-3, 1e-5, 1e-8)
    ]
    assert all(a <= b + 1e-15 for a, b in zip(values, values[1:]))


def _fd_grad(value_fn, residuals, step=1e-5):
    fd = np.zeros_like(residuals)
    for m in range(residuals.size):
        up, down = residuals.copy(), residuals.copy()
        up[m] += step
        down[m] -= step
        fd[m] = (value_fn(up) - value_fn(down)) / (2 * step)
    return fd


def test_finite_difference_agreement_all_kinds():
    rng = np.random.default_rng(11)
    kinds = ALL_POINTWISE + [EML(Fixed(0.5)), EML(KnnProportion(0.3))]
    for kind in kinds:
        res = rng.uniform(-3, 3, 32)
        # keep clear of the LAD kink and the Huber/Tukey breakpoints
        for bad in (0.0, 1.345, 4.685):
            res[np.abs(np.abs(res) - bad) < 1e-3] += 5e-3
        ev = batch_loss_and_grad(res, kind)
        if isinstance(kind, EML):
            h = resolve_bandwidths(res, kind.bandwidth)
            fd = _fd_grad(lambda r: eml_value_fixed_bandwidths(r, h, kind.clamp), res)
        else:
            fd = _fd_grad(lambda r: float(np.mean(pointwise_loss(kind, r))), res)
        # floor keeps FD roundoff on tiny components from dominating
        denom = np.maximum(np.abs(fd), 1e-4)
        assert np.max(np.abs(ev.grad_residuals - fd) / denom) < 1e-6
