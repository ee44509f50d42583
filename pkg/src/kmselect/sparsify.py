"""Column sampling primitives.

Three ways to pick and rescale ``r`` columns of an n-column matrix:

* :func:`deterministic_sampling_one` — greedy dual-set selection keeping a
  lower barrier on the spectrum of one vector set while a static Frobenius
  budget caps a second set.
* :func:`deterministic_sampling_two` — greedy dual-set selection with a
  moving upper spectral barrier on the second set.
* :func:`randomized_sampling` — i.i.d. leverage-score sampling.

All three return a :class:`SamplingPlan`, the compact form of a sampling
matrix / rescaling matrix pair: applying the plan to ``a`` realizes
``a @ omega @ s``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ArgumentError,
    BarrierViolationError,
    DegeneratePotentialError,
    NumericalSearchError,
)
from .linalg import as_matrix, sym_eig

ORTHO_TOL = 1e-8
# Barrier crossings smaller than this (relative to the barrier magnitude)
# are attributed to roundoff and tolerated.
BARRIER_SLACK = 1e-9


@dataclass(frozen=True)
class SamplingPlan:
    """An ordered column selection with positive rescaling weights.

    ``indices`` are 1-based positions into the ``source_dim`` columns of the
    matrix the plan will be applied to; duplicates are allowed.  Column ``j``
    of the reduced matrix is ``weights[j]`` times the selected source column.
    """

    source_dim: int
    target_dim: int
    indices: tuple
    weights: tuple

    def __post_init__(self):
        if self.source_dim < 1 or self.target_dim < 1:
            raise ArgumentError("plan dimensions must be positive")
        if len(self.indices) != self.target_dim or len(self.weights) != self.target_dim:
            raise ArgumentError("indices and weights must both have target_dim entries")
        if any(not 1 <= int(i) <= self.source_dim for i in self.indices):
            raise ArgumentError("plan indices must lie in [1, source_dim]")
        if any(not w > 0 for w in self.weights):
            raise ArgumentError("plan weights must be positive")

    def to_dict(self) -> dict:
        return {
            "source_dim": self.source_dim,
            "target_dim": self.target_dim,
            "indices": [int(i) for i in self.indices],
            "weights": [float(w) for w in self.weights],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SamplingPlan":
        return cls(
            source_dim=int(d["source_dim"]),
            target_dim=int(d["target_dim"]),
            indices=tuple(int(i) for i in d["indices"]),
            weights=tuple(float(w) for w in d["weights"]),
        )


def identity_plan(n: int) -> SamplingPlan:
    """The plan that keeps all *n* columns with unit weights."""
    return SamplingPlan(n, n, tuple(range(1, n + 1)), (1.0,) * n)


def apply_plan(a, plan: SamplingPlan) -> np.ndarray:
    """Gather and rescale columns of *a* according to *plan*."""
    a = as_matrix(a)
    if plan.source_dim != a.shape[1]:
        raise ArgumentError(
            f"plan covers {plan.source_dim} columns but the matrix has {a.shape[1]}"
        )
    idx = np.asarray(plan.indices, dtype=int) - 1
    return a[:, idx] * np.asarray(plan.weights, dtype=float)


# ---------------------------------------------------------------------------
# barrier potentials and greedy gains
# ---------------------------------------------------------------------------


def lower_potential(shift_point: float, m) -> float:
    """Sum of ``1 / (lambda_i - shift_point)`` over the spectrum of *m*.

    Requires ``shift_point`` strictly below the smallest eigenvalue.
    """
    vals = sym_eig(m).values
    if shift_point >= vals[0]:
        raise BarrierViolationError(
            f"shift point {shift_point} is not below lambda_min={vals[0]}"
        )
    return float(np.sum(1.0 / (vals - shift_point)))


def upper_potential(shift_point: float, m) -> float:
    """Sum of ``1 / (shift_point - lambda_i)`` over the spectrum of *m*.

    Requires ``shift_point`` strictly above the largest eigenvalue.
    """
    vals = sym_eig(m).values
    if shift_point <= vals[-1]:
        raise BarrierViolationError(
            f"shift point {shift_point} is not above lambda_max={vals[-1]}"
        )
    return float(np.sum(1.0 / (shift_point - vals)))


def lower_gain(v, shift: float, m, barrier: float) -> float:
    """Largest admissible reciprocal weight for advancing the lower barrier.

    With ``l' = barrier + shift``, evaluates

        v.T (M - l' I)^{-2} v / (phi(l') - phi(l))  -  v.T (M - l' I)^{-1} v

    through the eigendecomposition of ``M``, where ``phi`` is the lower
    potential.  Adding ``t * v v.T`` to ``M`` keeps the shifted barrier safe
    whenever ``1/t`` is at most this value.
    """
    eig = sym_eig(m)
    vals = eig.values
    lp = barrier + shift
    if lp >= vals[0]:
        raise BarrierViolationError(
            f"shifted barrier {lp} is not below lambda_min={vals[0]}"
        )
    w = eig.vectors.T @ np.asarray(v, dtype=float)
    dif = vals - lp
    denom = float(np.sum(1.0 / dif) - np.sum(1.0 / (vals - barrier)))
    if denom <= 0.0:
        raise DegeneratePotentialError("potential difference vanished on the lower side")
    w2 = w * w
    return float(np.sum(w2 / dif**2) / denom - np.sum(w2 / dif))


def upper_gain_frob(z, delta: float) -> float:
    """Frobenius-budget charge of a column: ``z.T z / delta``."""
    if not delta > 0:
        raise ArgumentError(f"delta must be positive, got {delta}")
    z = np.asarray(z, dtype=float)
    return float(z @ z / delta)


def upper_gain_spec(q, shift: float, m, barrier: float) -> float:
    """Smallest admissible reciprocal weight against the upper barrier.

    With ``u' = barrier + shift``, evaluates

        q.T (M - u' I)^{-2} q / (phihat(u) - phihat(u'))  -  q.T (M - u' I)^{-1} q

    where ``phihat`` is the upper potential.  Adding ``t * q q.T`` to ``M``
    keeps the shifted barrier safe whenever ``1/t`` is at least this value.
    """
    eig = sym_eig(m)
    vals = eig.values
    up = barrier + shift
    if up <= vals[-1]:
        raise BarrierViolationError(
            f"shifted barrier {up} is not above lambda_max={vals[-1]}"
        )
    denom = float(np.sum(1.0 / (barrier - vals)) - np.sum(1.0 / (up - vals)))
    if denom <= 0.0:
        raise DegeneratePotentialError("potential difference vanished on the upper side")
    w = eig.vectors.T @ np.asarray(q, dtype=float)
    w2 = w * w
    dif = vals - up
    return float(np.sum(w2 / dif**2) / denom - np.sum(w2 / dif))


def leverage_scores(v_rows) -> np.ndarray:
    """Sampling probabilities ``p_i = ||v_i||^2 / k`` for the columns of *v_rows*.

    The probabilities sum to one because the rows are orthonormal; the
    returned vector is renormalized so the sum is exact despite roundoff.
    """
    v_rows = as_matrix(v_rows)
    _require_orthonormal_rows(v_rows, "v_rows")
    p = (v_rows * v_rows).sum(axis=0) / v_rows.shape[0]
    return p / p.sum()


# ---------------------------------------------------------------------------
# greedy dual-set loop
# ---------------------------------------------------------------------------


def _require_orthonormal_rows(mat: np.ndarray, what: str) -> None:
    k = mat.shape[0]
    gram = mat @ mat.T
    err = float(np.abs(gram - np.eye(k)).max())
    if err > ORTHO_TOL:
        raise ArgumentError(f"{what} must have orthonormal rows (deviation {err:.2e})")


def upper_shift(ell2: int, k: int, r: int) -> float:
    """Additive step of the upper spectral barrier for an ell2-dim second set."""
    return (1.0 + math.sqrt(ell2 / r)) / (1.0 - math.sqrt(k / r))


class _FrobeniusUpper:
    """Static per-column charges ``||b_i||^2 / delta_B``; no barrier state."""

    def __init__(self, charges: np.ndarray):
        self._charges = charges

    def values(self, tau: int) -> np.ndarray:
        return self._charges

    def add(self, index: int, t: float) -> None:
        pass


class _SpectralUpperDiag:
    """Upper-barrier bookkeeping for the identity second set.

    Rank-one updates with standard basis vectors keep the accumulator
    diagonal, so potentials reduce to sums over a length-n vector and the
    per-column gain costs O(1) after an O(n) sweep per iteration.
    """

    def __init__(self, n: int, k: int, r: int):
        self.diag = np.zeros(n)
        self.delta = upper_shift(n, k, r)
        self._offset = math.sqrt(n * r)

    def values(self, tau: int) -> np.ndarray:
        u = self.delta * (tau + self._offset)
        dmax = float(self.diag.max())
        _check_upper_barrier(dmax, u, tau)
        inv_u = 1.0 / (u - self.diag)
        inv_up = 1.0 / (u + self.delta - self.diag)
        dphi = float(inv_u.sum() - inv_up.sum())
        if dphi <= 0.0:
            raise NumericalSearchError(
                "upper potential difference vanished", step=tau,
                diagnostics={"barrier": u, "lambda_max": dmax},
            )
        return inv_up * inv_up / dphi + inv_up

    def add(self, index: int, t: float) -> None:
        self.diag[index] += t


class _SpectralUpperDense:
    """Upper-barrier bookkeeping for a general orthonormal-row second set."""

    def __init__(self, q_cols: np.ndarray, k: int, r: int):
        self.q = q_cols
        ell2 = q_cols.shape[0]
        self.accum = np.zeros((ell2, ell2))
        self.delta = upper_shift(ell2, k, r)
        self._offset = math.sqrt(ell2 * r)

    def values(self, tau: int) -> np.ndarray:
        u = self.delta * (tau + self._offset)
        lam, vecs = np.linalg.eigh(self.accum)
        _check_upper_barrier(float(lam[-1]), u, tau)
        inv_u = 1.0 / (u - lam)
        inv_up = 1.0 / (u + self.delta - lam)
        dphi = float(inv_u.sum() - inv_up.sum())
        if dphi <= 0.0:
            raise NumericalSearchError(
                "upper potential difference vanished", step=tau,
                diagnostics={"barrier": u, "lambda_max": float(lam[-1])},
            )
        g2 = np.square(vecs.T @ self.q)
        return (g2 * (inv_up * inv_up)[:, None]).sum(axis=0) / dphi + (
            g2 * inv_up[:, None]
        ).sum(axis=0)

    def add(self, index: int, t: float) -> None:
        qi = self.q[:, index]
        self.accum += t * np.outer(qi, qi)


def _check_lower_barrier(lam_min: float, barrier: float, tau: int) -> None:
    if lam_min <= barrier - BARRIER_SLACK * max(1.0, abs(barrier)):
        raise NumericalSearchError(
            "lower barrier crossed", step=tau,
            diagnostics={"barrier": barrier, "lambda_min": lam_min},
        )


def _check_upper_barrier(lam_max: float, barrier: float, tau: int) -> None:
    # strict: the upper potential is undefined once the barrier is reached
    if lam_max >= barrier:
        raise NumericalSearchError(
            "upper barrier crossed", step=tau,
            diagnostics={"barrier": barrier, "lambda_max": lam_max},
        )


def _dual_set_loop(v_rows: np.ndarray, r: int, upper) -> tuple[np.ndarray, np.ndarray]:
    """Run r greedy steps; return selected 0-based indices and update weights."""
    k, _ = v_rows.shape
    sqrt_rk = math.sqrt(r * k)
    accum = np.zeros((k, k))
    picked = np.empty(r, dtype=int)
    t_vals = np.empty(r)
    for tau in range(r):
        ell = tau - sqrt_rk
        ellp = ell + 1.0  # lower shift delta_L = 1
        lam, vecs = np.linalg.eigh(accum)
        _check_lower_barrier(float(lam[0]), ell, tau)
        if lam[0] <= ellp:
            raise NumericalSearchError(
                "shifted lower barrier reached the spectrum", step=tau,
                diagnostics={"barrier": ell, "lambda_min": float(lam[0])},
            )
        dif = lam - ellp
        dphi = float(np.sum(1.0 / dif) - np.sum(1.0 / (lam - ell)))
        if dphi <= 0.0:
            raise NumericalSearchError(
                "lower potential difference vanished", step=tau,
                diagnostics={"barrier": ell, "lambda_min": float(lam[0])},
            )
        g2 = np.square(vecs.T @ v_rows)
        lower_vals = (g2 / np.square(dif)[:, None]).sum(axis=0) / dphi - (
            g2 / dif[:, None]
        ).sum(axis=0)
        upper_vals = upper.values(tau)
        admissible = (upper_vals <= lower_vals) & (upper_vals + lower_vals > 0.0)
        hits = np.flatnonzero(admissible)
        if hits.size == 0:
            gap = float((lower_vals - upper_vals).max())
            raise NumericalSearchError(
                "no admissible column", step=tau,
                diagnostics={"barrier": ell, "lambda_min": float(lam[0]), "max_gap": gap},
            )
        i = int(hits[0])  # smallest qualifying index, for determinism
        t = 2.0 / (upper_vals[i] + lower_vals[i])  # midpoint of [1/L, 1/U]
        accum += t * np.outer(v_rows[:, i], v_rows[:, i])
        upper.add(i, t)
        picked[tau] = i
        t_vals[tau] = t
    return picked, t_vals


def _finish_plan(n: int, r: int, k: int, picked: np.ndarray, t_vals: np.ndarray) -> SamplingPlan:
    scale = (1.0 - math.sqrt(k / r)) / r
    weights = np.sqrt(t_vals * scale)
    return SamplingPlan(
        source_dim=n,
        target_dim=r,
        indices=tuple(int(i) + 1 for i in picked),
        weights=tuple(float(w) for w in weights),
    )


def deterministic_sampling_one(v_rows, b, r: int) -> SamplingPlan:
    """Deterministic dual-set selection with a Frobenius cap on *b*.

    *v_rows* is k x n with orthonormal rows and *b* is any matrix with the
    same number of columns.  The returned plan satisfies

        sigma_k(v_rows applied)  >=  1 - sqrt(k/r)
        ||b applied||_F          <=  ||b||_F

    where "applied" means gathering and rescaling columns with the plan.
    The output is a pure function of the inputs.
    """
    v_rows = as_matrix(v_rows)
    b = as_matrix(b)
    k, n = v_rows.shape
    if b.shape[1] != n:
        raise ArgumentError(
            f"second set has {b.shape[1]} columns, expected {n}"
        )
    _require_orthonormal_rows(v_rows, "v_rows")
    if r <= k:
        raise ArgumentError(f"need r > k, got r={r}, k={k}")
    col_sq = np.square(b).sum(axis=0)
    fro2 = float(col_sq.sum())
    if fro2 > 0.0:
        # charges ||b_i||^2 / delta_B with delta_B = ||B||_F^2 / (1 - sqrt(k/r))
        charges = col_sq * ((1.0 - math.sqrt(k / r)) / fro2)
    else:
        charges = np.zeros(n)
    picked, t_vals = _dual_set_loop(v_rows, r, _FrobeniusUpper(charges))
    return _finish_plan(n, r, k, picked, t_vals)


def deterministic_sampling_two(v_rows, q, r: int) -> SamplingPlan:
    """Deterministic dual-set selection with a spectral cap on *q*.

    *v_rows* is k x n with orthonormal rows; *q* is ell2 x n, also with
    orthonormal rows.  The returned plan satisfies

        sigma_k(v_rows applied)  >=  1 - sqrt(k/r)
        ||q applied||_2          <=  1 + sqrt(ell2/r)

    When *q* is the n x n identity the accumulator stays diagonal and the
    candidate scan runs in O(n) per iteration.  The output is a pure
    function of the inputs.
    """
    v_rows = as_matrix(v_rows)
    q = as_matrix(q)
    k, n = v_rows.shape
    if q.shape[1] != n:
        raise ArgumentError(f"second set has {q.shape[1]} columns, expected {n}")
    _require_orthonormal_rows(v_rows, "v_rows")
    _require_orthonormal_rows(q, "q")
    if r <= k:
        raise ArgumentError(f"need r > k, got r={r}, k={k}")
    if q.shape[0] == n and np.array_equal(q, np.eye(n)):
        upper = _SpectralUpperDiag(n, k, r)
    else:
        upper = _SpectralUpperDense(q, k, r)
    picked, t_vals = _dual_set_loop(v_rows, r, upper)
    return _finish_plan(n, r, k, picked, t_vals)


def randomized_sampling(v_rows, r: int, seed: int) -> SamplingPlan:
    """Leverage-score sampling: r i.i.d. draws with replacement.

    Column *i* is drawn with probability ``p_i = ||v_i||^2 / k`` and enters
    the plan with weight ``1 / sqrt(p_i * r)``, which makes the squared
    Frobenius norm of any rescaled sample an unbiased estimate of the
    source's.  Fully reproducible for a fixed seed.
    """
    v_rows = as_matrix(v_rows)
    if r < 1:
        raise ArgumentError(f"need r >= 1, got {r}")
    p = leverage_scores(v_rows)
    rng = np.random.default_rng(seed)
    draws = rng.choice(p.size, size=r, replace=True, p=p)
    weights = 1.0 / np.sqrt(p[draws] * r)
    return SamplingPlan(
        source_dim=int(p.size),
        target_dim=r,
        indices=tuple(int(i) + 1 for i in draws),
        weights=tuple(float(w) for w in weights),
    )
