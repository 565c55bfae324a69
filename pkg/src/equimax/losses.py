"""Batch prediction losses, their analytic gradients, and the SVD engine.

Four losses over a validated prediction matrix P (rows = samples, columns =
classes), all written so that smaller is better:

* ``ms``    mean negative squared confidence, -(1/B) sum P_ic^2.
* ``bnm``   negative nuclear norm per sample, -(1/B) sum of singular values.
* ``cwsm``  negative class weighted squares; each class contributes its
            squared column mass divided by its soft class size to the
            power r, so small classes weigh more as r grows.
* ``nsm``   negative normalized squares; the squared-confidence total is
            divided by a pairwise-overlap term that shrinks as predictions
            of different samples separate into different classes.

Conventions baked into the formulas:

* A class with zero soft size contributes 0 to ``cws`` (its term is 0/0 in
  the raw formula; 0 is the continuous limit for r < 1 and is kept at
  r = 1 for uniformity).
* A zero pairwise overlap contributes 0 to the ``ns`` denominator for every
  r in [0, 1], including r = 0.  This deliberately diverges from the
  0^0 = 1 convention so that matrices whose rows occupy pairwise distinct
  classes attain the exact optimum 1/alpha + epsilon*B.

Everything accepts a single (B, C) matrix; internal ``*_stack`` helpers used
by the optimizer and the brute-force checks operate on (N, B, C) stacks with
identical semantics.  The SVD is a deterministic, seed-free one-sided Jacobi
(cyclic sweeps, relative off-diagonal criterion) rather than a library call,
so results are bit-reproducible across platforms and the nuclear-norm path
stays independent of the closed-form checks used in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

LOSS_KINDS = ("ms", "bnm", "cwsm", "nsm")

EPSILON_AUTO = "auto"
_AUTO_EPSILON_VALUE = 1e-6

# BNM gradient is reported exact only when consecutive singular values are
# separated by more than this gap and none sits at (numerical) zero.
SV_DISTINCT_GAP = 1e-8
SV_ZERO_TOL = 1e-10

# Pairwise overlaps at or below this floor contribute nothing to the ns
# gradient; overlap^(r-1) would overflow float64 below it for small r.
_PAIR_GRAD_FLOOR = 1e-300

_JACOBI_TOL = 1e-14
_DENOM_TOL = 1e-15


class ConvergenceError(RuntimeError):
    """The Jacobi sweep cap was reached before the off-diagonals vanished."""


@dataclass(frozen=True)
class LossConfig:
    """Loss selector plus parameters.

    Parameters irrelevant to the chosen kind are recorded but ignored.
    ``epsilon`` may be the literal string "auto", which resolves to 0 when
    the matrix has more rows than columns and to 1e-6 otherwise.
    ``lam`` is the weight given to the loss when it is combined with a
    supervised objective (see the toyuda module).
    """

    kind: str
    r: float = 0.5
    alpha: float = 1.0
    epsilon: Union[float, str] = EPSILON_AUTO
    lam: float = 1.0

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise ValueError(f"unknown loss kind {self.kind!r}, expected one of {LOSS_KINDS}")
        if not 0.0 <= self.r <= 1.0:
            raise ValueError(f"r must be in [0, 1], got {self.r}")
        if self.alpha < 0.0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if isinstance(self.epsilon, str):
            if self.epsilon != EPSILON_AUTO:
                raise ValueError(f"epsilon must be a number or 'auto', got {self.epsilon!r}")
        elif self.epsilon < 0.0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.lam < 0.0:
            raise ValueError(f"lam must be >= 0, got {self.lam}")
        if self.kind == "nsm" and self.r > 0.0 and self.alpha == 0.0:
            raise ValueError("nsm with r > 0 and alpha = 0 is ill-posed: the denominator may vanish")

    def resolved_epsilon(self, n_rows: int, n_cols: int) -> float:
        if self.epsilon == EPSILON_AUTO:
            return 0.0 if n_rows > n_cols else _AUTO_EPSILON_VALUE
        return float(self.epsilon)


@dataclass
class SvdResult:
    """Thin SVD ``P = u @ diag(s) @ v.T`` with s sorted descending.

    ``u`` is (B, k) and ``v`` is (C, k) with orthonormal columns,
    k = min(B, C).  Sign convention: the largest-magnitude entry of each
    ``u`` column is non-negative.
    """

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray

    @property
    def k(self) -> int:
        return self.s.size


@dataclass
class GradOutput:
    """Loss value plus the matrix of partials d(loss)/dP_ic.

    ``exact`` is False when only a valid subgradient could be returned
    (bnm with repeated or vanishing singular values).
    """

    value: float
    grad: np.ndarray
    exact: bool = True


# ---------------------------------------------------------------------------
# one-sided Jacobi SVD


def _jacobi_orthogonalize(mats: np.ndarray, max_sweeps: int) -> tuple[np.ndarray, int]:
    """Rotate the columns of each (m, n) matrix in ``mats`` until orthogonal.

    ``mats`` has shape (N, m, n) with m >= n and is modified in place; the
    accumulated right rotations are returned as (N, n, n).  Cyclic pair
    order, so the computation is deterministic.
    """
    n_mats, _, n = mats.shape
    rots = np.tile(np.eye(n), (n_mats, 1, 1))
    # Rotation-invariant scale; inner products below this floor belong to
    # numerically-zero columns and are skipped (also keeps zeta finite).
    floor = 1e-32 * np.einsum("nmk,nmk->n", mats, mats)
    for sweep in range(1, max_sweeps + 1):
        rotated = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                col_i = mats[:, :, i]
                col_j = mats[:, :, j]
                aa = np.einsum("nm,nm->n", col_i, col_i)
                bb = np.einsum("nm,nm->n", col_j, col_j)
                ab = np.einsum("nm,nm->n", col_i, col_j)
                need = (np.abs(ab) > _JACOBI_TOL * np.sqrt(aa * bb)) & (np.abs(ab) > floor)
                if not need.any():
                    continue
                rotated = True
                safe_ab = np.where(need, ab, 1.0)
                zeta = (bb - aa) / (2.0 * safe_ab)
                sgn = np.where(zeta >= 0.0, 1.0, -1.0)
                t = sgn / (np.abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                c = np.where(need, c, 1.0)[:, None]
                s = np.where(need, s, 0.0)[:, None]
                new_i = c * col_i - s * col_j
                new_j = s * col_i + c * col_j
                mats[:, :, i] = new_i
                mats[:, :, j] = new_j
                rot_i = rots[:, :, i].copy()
                rot_j = rots[:, :, j]
                rots[:, :, i] = c * rot_i - s * rot_j
                rots[:, :, j] = s * rot_i + c * rot_j
        if not rotated:
            return rots, sweep
    raise ConvergenceError(f"Jacobi SVD did not converge within {max_sweeps} sweeps")


def _orthonormalize_columns(q: np.ndarray, needs_fill: np.ndarray) -> np.ndarray:
    """Re-orthonormalize columns in order, filling flagged ones deterministically.

    Flagged columns (vanishing singular value) are replaced by the first
    standard basis vector whose residual against the already-fixed columns
    keeps more than half its length.  Two Gram-Schmidt passes per column.
    """
    m, k = q.shape
    out = q.copy()
    fixed: list[int] = []
    for idx in range(k):
        if not needs_fill[idx]:
            v = out[:, idx]
            for _ in range(2):
                for f in fixed:
                    v = v - (out[:, f] @ v) * out[:, f]
            norm = np.linalg.norm(v)
            if norm <= 0.5:  # column collapsed onto earlier ones; refill instead
                needs_fill = needs_fill.copy()
                needs_fill[idx] = True
            else:
                out[:, idx] = v / norm
                fixed.append(idx)
                continue
        for cand in range(m):
            v = np.zeros(m)
            v[cand] = 1.0
            for _ in range(2):
                for f in fixed:
                    v = v - (out[:, f] @ v) * out[:, f]
            norm = np.linalg.norm(v)
            if norm > 0.5:
                out[:, idx] = v / norm
                fixed.append(idx)
                break
        else:
            raise ConvergenceError("failed to complete an orthonormal basis")
    return out


def svd(P: np.ndarray) -> SvdResult:
    """Deterministic thin SVD of a prediction matrix.

    One-sided Jacobi on the narrow side, sweep cap 100 * min(B, C).
    Satisfies, for entries in [0, 1] at desk scale: exact reconstruction to
    1e-9 * max(1, s[0]), orthonormal factor columns to 1e-9, descending
    singular values.
    """
    arr = np.asarray(P, dtype=float)
    if arr.ndim != 2:
        raise ValueError("svd expects a 2-D matrix")
    n_rows, n_cols = arr.shape
    transpose = n_rows < n_cols
    work = (arr.T if transpose else arr).copy()[None, :, :]
    k = min(n_rows, n_cols)
    rots, _ = _jacobi_orthogonalize(work, max_sweeps=100 * k)
    work = work[0]
    rots = rots[0]
    sigma = np.linalg.norm(work, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    work = work[:, order]
    rots = rots[:, order]
    top = sigma[0] if k else 0.0
    fill = sigma <= SV_ZERO_TOL * max(1.0, top)
    left = np.where(fill[None, :], 0.0, work / np.where(fill, 1.0, sigma)[None, :])
    left = _orthonormalize_columns(left, fill)
    if transpose:
        u, v = rots, left
    else:
        u, v = left, rots
    for col in range(k):
        pivot = int(np.argmax(np.abs(u[:, col])))
        if u[pivot, col] < 0.0:
            u[:, col] = -u[:, col]
            v[:, col] = -v[:, col]
    return SvdResult(u=u, s=sigma, v=v)


def _singular_values_stack(stack: np.ndarray) -> np.ndarray:
    """Descending singular values for every matrix in an (N, B, C) stack."""
    _, n_rows, n_cols = stack.shape
    work = (stack.transpose(0, 2, 1) if n_rows < n_cols else stack).copy()
    k = min(n_rows, n_cols)
    _jacobi_orthogonalize(work, max_sweeps=100 * k)
    sigma = np.sqrt(np.einsum("nmk,nmk->nk", work, work))
    return np.sort(sigma, axis=1)[:, ::-1]


def nuclear_norm(P: np.ndarray) -> float:
    """Sum of singular values.  Equals sum_c sqrt(n_c) on one-hot matrices."""
    return float(svd(P).s.sum())


# ---------------------------------------------------------------------------
# loss values over stacks


def _squares_stack(stack: np.ndarray) -> np.ndarray:
    return np.einsum("nbc,nbc->n", stack, stack)


def _ms_stack(stack: np.ndarray) -> np.ndarray:
    return -_squares_stack(stack) / stack.shape[1]


def _bnm_stack(stack: np.ndarray) -> np.ndarray:
    return -_singular_values_stack(stack).sum(axis=1) / stack.shape[1]


def _cws_stack(stack: np.ndarray, r: float) -> np.ndarray:
    sq_mass = np.einsum("nbc,nbc->nc", stack, stack)
    size = stack.sum(axis=1)
    pos = size > 0.0
    terms = np.zeros_like(size)
    np.divide(sq_mass, np.power(size, r, where=pos, out=np.ones_like(size)), where=pos, out=terms)
    return terms.sum(axis=1) / stack.shape[2]


def _pairwise_power_sum(stack: np.ndarray, r: float) -> np.ndarray:
    """sum over ordered sample pairs i != j of (row_i . row_j)^r, with 0^r = 0.

    Row-blocked so the overlap tiles stay cache-resident at large B.
    """
    n_mats, n_rows, _ = stack.shape
    # fixed ~512 KB overlap tile per matrix so per-element cost is uniform in B
    block = max(1, min(n_rows, 65536 // n_rows))
    total = np.zeros(n_mats)
    rows = np.arange(n_rows)
    trans = stack.transpose(0, 2, 1)
    for start in range(0, n_rows, block):
        part = stack[:, start : start + block, :]
        overlap = np.matmul(part, trans)
        np.maximum(overlap, 0.0, out=overlap)
        span = rows[start : start + block]
        if r == 0.0:
            hits = overlap > 0.0
            total += hits.sum(axis=(1, 2))
            total -= hits[:, span - start, span].sum(axis=1)
        else:
            if r != 1.0:
                np.power(overlap, r, out=overlap)
            total += overlap.sum(axis=(1, 2))
            total -= overlap[:, span - start, span].sum(axis=1)
    return total


def _ns_denominator_stack(stack: np.ndarray, r: float, alpha: float, squares: np.ndarray) -> np.ndarray:
    if r == 1.0:
        # sum_{i != j} overlap_ij == sum_c size_c^2 - squares, an O(BC) path
        size = stack.sum(axis=1)
        pair_sum = np.einsum("nc,nc->n", size, size) - squares
    else:
        pair_sum = _pairwise_power_sum(stack, r)
    return pair_sum + alpha * squares


def _ns_stack(stack: np.ndarray, r: float, alpha: float, epsilon: float) -> np.ndarray:
    squares = _squares_stack(stack)
    denom = _ns_denominator_stack(stack, r, alpha, squares)
    if np.any(denom < _DENOM_TOL):
        raise ZeroDivisionError(
            f"normalized-squares denominator {float(denom.min())!r} below {_DENOM_TOL}"
        )
    return squares / denom + epsilon * squares


def _loss_values_stack(kind: str, stack: np.ndarray, r: float, alpha: float, epsilon: float) -> np.ndarray:
    if kind == "ms":
        return _ms_stack(stack)
    if kind == "bnm":
        return _bnm_stack(stack)
    if kind == "cwsm":
        return -_cws_stack(stack, r)
    if kind == "nsm":
        return -_ns_stack(stack, r, alpha, epsilon)
    raise ValueError(f"unknown loss kind {kind!r}")


# ---------------------------------------------------------------------------
# gradients over stacks (of the loss, minimization orientation)


def _ms_grad_stack(stack: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return _ms_stack(stack), -2.0 * stack / stack.shape[1]


def _cwsm_grad_stack(stack: np.ndarray, r: float) -> tuple[np.ndarray, np.ndarray]:
    n_cols = stack.shape[2]
    sq_mass = np.einsum("nbc,nbc->nc", stack, stack)
    size = stack.sum(axis=1)
    pos = size > 0.0
    pow_r = np.power(size, r, where=pos, out=np.ones_like(size))
    terms = np.zeros_like(size)
    np.divide(sq_mass, pow_r, where=pos, out=terms)
    values = -terms.sum(axis=1) / n_cols
    # d cws / dP_ic = (2 P_ic / size_c^r - r * sq_mass_c / size_c^(r+1)) / C
    coef_lin = np.where(pos, 1.0 / pow_r, 0.0)
    coef_const = np.zeros_like(size)
    np.divide(r * terms, size, where=pos, out=coef_const)
    grads = -(2.0 * stack * coef_lin[:, None, :] - coef_const[:, None, :]) / n_cols
    return values, grads


def _nsm_grad_stack(
    stack: np.ndarray, r: float, alpha: float, epsilon: float
) -> tuple[np.ndarray, np.ndarray]:
    n_rows = stack.shape[1]
    squares = _squares_stack(stack)
    d_squares = 2.0 * stack
    if r == 1.0:
        size = stack.sum(axis=1)
        pair_sum = np.einsum("nc,nc->n", size, size) - squares
        d_pair = 2.0 * size[:, None, :] - d_squares
    else:
        overlap = np.maximum(np.matmul(stack, stack.transpose(0, 2, 1)), 0.0)
        idx = np.arange(n_rows)
        pos = overlap > 0.0
        powered = np.zeros_like(overlap)
        np.power(overlap, r, where=pos, out=powered)
        powered[:, idx, idx] = 0.0
        pair_sum = powered.sum(axis=(1, 2))
        if r == 0.0:
            d_pair = np.zeros_like(stack)
        else:
            weights = np.zeros_like(overlap)
            big = overlap > _PAIR_GRAD_FLOOR
            np.power(overlap, r - 1.0, where=big, out=weights)
            weights[:, idx, idx] = 0.0
            d_pair = 2.0 * r * np.matmul(weights, stack)
    denom = pair_sum + alpha * squares
    if np.any(denom < _DENOM_TOL):
        raise ZeroDivisionError(
            f"normalized-squares denominator {float(denom.min())!r} below {_DENOM_TOL}"
        )
    values = squares / denom + epsilon * squares
    d_denom = d_pair + alpha * d_squares
    grads = (
        d_squares * denom[:, None, None] - squares[:, None, None] * d_denom
    ) / (denom * denom)[:, None, None] + epsilon * d_squares
    return -values, -grads


def _bnm_grad_single(P: np.ndarray) -> GradOutput:
    n_rows = P.shape[0]
    decomp = svd(P)
    grad = -(decomp.u @ decomp.v.T) / n_rows
    gaps_ok = bool(np.all(-np.diff(decomp.s) > SV_DISTINCT_GAP)) if decomp.k > 1 else True
    exact = gaps_ok and bool(decomp.s[-1] > SV_ZERO_TOL)
    return GradOutput(value=float(-decomp.s.sum() / n_rows), grad=grad, exact=exact)


def _loss_grads_stack(
    kind: str, stack: np.ndarray, r: float, alpha: float, epsilon: float
) -> tuple[np.ndarray, np.ndarray]:
    """Values and gradients for a stack; bnm falls back to a per-matrix loop."""
    if kind == "ms":
        return _ms_grad_stack(stack)
    if kind == "cwsm":
        return _cwsm_grad_stack(stack, r)
    if kind == "nsm":
        return _nsm_grad_stack(stack, r, alpha, epsilon)
    if kind == "bnm":
        outs = [_bnm_grad_single(stack[i]) for i in range(stack.shape[0])]
        return np.array([o.value for o in outs]), np.stack([o.grad for o in outs])
    raise ValueError(f"unknown loss kind {kind!r}")


# ---------------------------------------------------------------------------
# public single-matrix API


def _as_stack(P: np.ndarray) -> np.ndarray:
    arr = np.asarray(P, dtype=float)
    if arr.ndim != 2:
        raise ValueError("expected a 2-D prediction matrix")
    return arr[None, :, :]


def ms(P: np.ndarray) -> float:
    """Mean negative squared confidence: -(1/B) sum_ic P_ic^2."""
    return float(_ms_stack(_as_stack(P))[0])


def bnm(P: np.ndarray) -> float:
    """Negative nuclear norm per sample: -(1/B) sum_i sigma_i."""
    return float(_bnm_stack(_as_stack(P))[0])


def cws(P: np.ndarray, r: float) -> float:
    """Class weighted squares: (1/C) sum_c (column squared mass) / (soft size)^r.

    A class with zero soft size contributes 0.
    """
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"r must be in [0, 1], got {r}")
    return float(_cws_stack(_as_stack(P), r)[0])


def cwsm(P: np.ndarray, r: float) -> float:
    """Negated :func:`cws`."""
    return -cws(P, r)


def ns(P: np.ndarray, r: float, alpha: float, epsilon: float) -> float:
    """Normalized squares.

    squares / (sum over ordered sample pairs of overlap^r + alpha * squares)
    plus epsilon * squares, with squares = sum_ic P_ic^2 and
    overlap_ij = sum_c P_ic P_jc.  Zero overlaps contribute 0 for every r.
    Raises ZeroDivisionError when the denominator falls below 1e-15, which
    is only reachable with alpha = 0.
    """
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"r must be in [0, 1], got {r}")
    return float(_ns_stack(_as_stack(P), r, alpha, epsilon)[0])


def nsm(P: np.ndarray, r: float, alpha: float, epsilon: float) -> float:
    """Negated :func:`ns`."""
    return -ns(P, r, alpha, epsilon)


def discriminability(P: np.ndarray) -> float:
    """Mean squared confidence, (1/B) sum_ic P_ic^2; 1 exactly on one-hot rows."""
    stack = _as_stack(P)
    return float(_squares_stack(stack)[0] / stack.shape[1])


def equity_metric(P: np.ndarray) -> float:
    """1 - sum_c |size_c / B - 1/C|: 1 iff all soft class sizes are equal."""
    arr = np.asarray(P, dtype=float)
    n_rows, n_cols = arr.shape
    share = arr.sum(axis=0) / n_rows
    return float(1.0 - np.abs(share - 1.0 / n_cols).sum())


def loss_value(P: np.ndarray, cfg: LossConfig) -> float:
    """Evaluate the configured loss on ``P`` (auto epsilon resolved here)."""
    stack = _as_stack(P)
    eps = cfg.resolved_epsilon(stack.shape[1], stack.shape[2])
    return float(_loss_values_stack(cfg.kind, stack, cfg.r, cfg.alpha, eps)[0])


def gradient(P: np.ndarray, cfg: LossConfig) -> GradOutput:
    """Loss value and the matrix of partials d(loss)/dP_ic.

    Analytic in closed form for ms/cwsm/nsm.  For bnm the matrix
    -(u @ v.T)/B from the thin SVD is returned; it is the exact gradient
    when the singular values are separated by more than 1e-8 and none is
    numerically zero, and a valid subgradient (``exact=False``) otherwise.
    """
    stack = _as_stack(P)
    if cfg.kind == "bnm":
        return _bnm_grad_single(stack[0])
    eps = cfg.resolved_epsilon(stack.shape[1], stack.shape[2])
    values, grads = _loss_grads_stack(cfg.kind, stack, cfg.r, cfg.alpha, eps)
    return GradOutput(value=float(values[0]), grad=grads[0], exact=True)
