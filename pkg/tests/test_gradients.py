import numpy as np
import pytest

from equimax.losses import GradOutput, LossConfig, gradient, loss_value

from conftest import fd_gradient, interior_matrix

SMOOTH_CONFIGS = [
    LossConfig("ms"),
    LossConfig("cwsm", r=0.0),
    LossConfig("cwsm", r=0.25),
    LossConfig("cwsm", r=0.5),
    LossConfig("cwsm", r=1.0),
    LossConfig("nsm", r=0.0, alpha=1.0, epsilon=0.0),
    LossConfig("nsm", r=0.5, alpha=1.0, epsilon=1e-6),
    LossConfig("nsm", r=0.75, alpha=2.0, epsilon=1e-6),
    LossConfig("nsm", r=1.0, alpha=1.0, epsilon=0.0),
    LossConfig("nsm", r=1.0, alpha=2.0, epsilon=1e-6),
]


def rel_err(analytic, fd, floor):
    return float(np.max(np.abs(analytic - fd) / np.maximum(np.abs(fd), floor)))


@pytest.mark.parametrize("cfg", SMOOTH_CONFIGS, ids=lambda c: f"{c.kind}-r{c.r}-a{c.alpha}")
def test_smooth_losses_match_finite_differences(cfg, rng):
    for _ in range(25):
        mat = interior_matrix(rng, int(rng.integers(2, 7)), int(rng.integers(2, 6)))
        out = gradient(mat, cfg)
        assert out.exact
        assert np.all(np.isfinite(out.grad))
        assert out.grad.shape == mat.shape
        fd = fd_gradient(lambda m: loss_value(m, cfg), mat)
        assert rel_err(out.grad, fd, floor=1e-4) <= 1e-5


def test_bnm_matches_finite_differences(rng):
    cfg = LossConfig("bnm")
    checked = 0
    while checked < 25:
        mat = interior_matrix(rng, int(rng.integers(2, 7)), int(rng.integers(2, 6)))
        out = gradient(mat, cfg)
        if not out.exact:
            continue  # repeated or vanishing singular values: subgradient only
        fd = fd_gradient(lambda m: loss_value(m, cfg), mat)
        assert rel_err(out.grad, fd, floor=1e-3) <= 1e-4
        checked += 1


def test_ms_gradient_uniform():
    out = gradient(np.full((2, 2), 0.5), LossConfig("ms"))
    assert np.allclose(out.grad, -0.5)
    assert out.value == -0.5


def test_cwsm_r0_gradient_closed_form(rng):
    mat = interior_matrix(rng, 4, 3)
    out = gradient(mat, LossConfig("cwsm", r=0.0))
    assert np.allclose(out.grad, -(2.0 / 3.0) * mat, atol=1e-14)


def test_bnm_identity_subgradient():
    out = gradient(np.eye(2), LossConfig("bnm"))
    assert isinstance(out, GradOutput)
    assert not out.exact  # repeated singular values
    # u @ v.T of any valid SVD of I is I itself: subgradient is -I/2
    assert np.allclose(out.grad, -np.eye(2) / 2)


def test_bnm_rank_deficient_flagged(rng):
    out = gradient(np.full((4, 2), 0.5), LossConfig("bnm"))
    assert not out.exact  # vanishing singular value
    assert np.all(np.isfinite(out.grad))


def test_cwsm_zero_mass_class_gradient_is_zero():
    mat = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    out = gradient(mat, LossConfig("cwsm", r=0.5))
    assert np.all(out.grad[:, 2] == 0.0)


def test_gradient_value_agrees_with_loss_value(rng):
    for cfg in SMOOTH_CONFIGS + [LossConfig("bnm")]:
        mat = interior_matrix(rng, 4, 3)
        assert abs(gradient(mat, cfg).value - loss_value(mat, cfg)) <= 1e-12
