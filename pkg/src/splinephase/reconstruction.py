"""Collocation matrices and linear recovery of ``|f|^2`` from phaseless samples.

Given samples ``F_n = |f(x_n)|^2`` on a set ``E`` that samples the squared
space linearly, the coefficients of ``|f|^2`` in the product basis are the
least-squares solution ``c`` of ``Phi c = F``, with ``Phi = [h_j(x_n)]``.
The fit is computed from a QR factorization of ``Phi``; the kernels are
``S(x) = Q R^{-T} h(x)``, so that ``|f(x)|^2 = sum_n F_n S_n(x)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np
from scipy.linalg import solve_triangular

from .config import resolve_rtol
from .errors import ConditionsViolated, IndexOutOfRange, OutOfWindow, RankDeficient, SizeMismatch
from .knot_core import BasisAtlas
from .sampling_conditions import SampleSet, check_linear_squared
from .squared_space import SquaredBasis

__all__ = [
    "CollocationMatrix",
    "ReconstructionOperator",
    "build_reconstructor",
    "collocation_matrix",
    "kernel_values",
    "numerical_rank",
    "reconstruct",
    "sw_invertible",
]

Basis = Union[BasisAtlas, SquaredBasis]


def _window_atlas(basis: Basis) -> BasisAtlas:
    return basis.atlas if isinstance(basis, SquaredBasis) else basis


def _as_samples(E) -> SampleSet:
    return E if isinstance(E, SampleSet) else SampleSet.of(E)


def _check_in_window(atlas: BasisAtlas, xs) -> None:
    lo, hi = float(atlas.start), float(atlas.end)
    for x in xs:
        inside = atlas.start <= x <= atlas.end if isinstance(x, Fraction) else lo <= float(x) <= hi
        if not inside:
            raise OutOfWindow(f"x={x} lies outside the window [{atlas.start}, {atlas.end}]")


@dataclass(frozen=True, eq=False)
class CollocationMatrix:
    """Dense matrix of basis values: rows follow ``points``, columns the basis order."""

    matrix: np.ndarray
    points: SampleSet
    basis: Basis

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape


def collocation_matrix(basis: Basis, E) -> CollocationMatrix:
    """``[B_j(x_n)]`` for an atlas (the spline space) or a product basis."""
    E = _as_samples(E)
    atlas = _window_atlas(basis)
    _check_in_window(atlas, E)
    if not E:
        return CollocationMatrix(np.zeros((0, len(basis))), E, basis)
    return CollocationMatrix(basis.collocation(list(E)), E, basis)


def numerical_rank(singular_values: np.ndarray, shape: tuple[int, int], rtol: float | None = None) -> int:
    """Count singular values above ``rtol * sigma_max * max(shape)``."""
    s = np.asarray(singular_values, dtype=float)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > resolve_rtol(rtol) * s[0] * max(shape)))


def sw_invertible(atlas: BasisAtlas, E) -> bool:
    """Diagonal test for the square collocation matrix of the spline space.

    With ``E`` ascending and ``#E = N_{0,k}``, the matrix ``[Q_j(x_n)]`` is
    invertible exactly when every ``x_n`` lies strictly inside the support of
    the ``n``-th atlas B-spline. Support membership is decided exactly.

    Raises
    ------
    SizeMismatch
        If ``#E`` differs from the dimension of the spline space.
    """
    E = _as_samples(E)
    if len(E) != len(atlas):
        raise SizeMismatch(f"#E = {len(E)} but the spline space has dimension {len(atlas)}")
    _check_in_window(atlas, E)
    for x, pair in zip(E, atlas.pairs):
        a, b = atlas.support(pair)
        if not a < x < b:
            return False
    return True


@dataclass(frozen=True, eq=False)
class ReconstructionOperator:
    """Factorized collocation system of a product basis at ``E``.

    Built by :func:`build_reconstructor`; immutable afterwards.
    """

    E: SampleSet
    basis: SquaredBasis
    phi: np.ndarray
    q: np.ndarray
    r: np.ndarray
    rank: int
    rtol: float
    singular_values: np.ndarray
    method: str = "qr"

    @property
    def condition_number(self) -> float:
        s = self.singular_values
        return float(s[0] / s[-1]) if s[-1] > 0 else float("inf")

    def coefficients(self, F) -> np.ndarray:
        """Product-basis coefficients of the least-squares fit to ``F``."""
        F = np.asarray(F, dtype=float)
        if F.shape != (len(self.E),):
            raise SizeMismatch(f"{F.size} samples for a set of {len(self.E)} points")
        if np.any(F < 0):
            warnings.warn("negative squared-modulus samples passed through unchanged", RuntimeWarning, stacklevel=3)
        if self.method == "normal":
            gram = self.phi.T @ self.phi
            return np.linalg.solve(gram, self.phi.T @ F)
        return solve_triangular(self.r, self.q.T @ F)

    def basis_values(self, x) -> np.ndarray:
        """Rows ``h(x)`` for each abscissa in ``x``."""
        atlas = self.basis.atlas
        _check_in_window(atlas, x)
        return self.basis.collocation(list(x))

    def kernels(self, x) -> np.ndarray:
        """``S_n(x)`` for every ``n``; shape ``(len(x), #E)``."""
        h = self.basis_values(x)
        if self.method == "normal":
            gram = self.phi.T @ self.phi
            return h @ np.linalg.solve(gram, self.phi.T)
        # S(x) = Q R^{-T} h(x)
        return solve_triangular(self.r, h.T, trans="T").T @ self.q.T


def build_reconstructor(
    sb: SquaredBasis, E, rtol: float | None = None, method: str = "qr"
) -> ReconstructionOperator:
    """Factor the collocation matrix of ``sb`` at ``E``.

    ``method="normal"`` solves the normal equations instead of using the QR
    factor. It exists for cross-checks and is not meant for production use.

    Raises
    ------
    ConditionsViolated
        If ``E`` is not a linear sampling set for the squared space.
    RankDeficient
        If the counting conditions hold but the numerical rank of ``Phi``
        falls short of ``M_k`` at tolerance ``rtol``.
    """
    if method not in ("qr", "normal"):
        raise ValueError(f"unknown method {method!r}")
    E = _as_samples(E)
    report = check_linear_squared(sb.atlas, E)
    if not report.passed:
        raise ConditionsViolated(report)
    rtol = resolve_rtol(rtol)
    phi = collocation_matrix(sb, E).matrix
    s = np.linalg.svd(phi, compute_uv=False)
    rank = numerical_rank(s, phi.shape, rtol)
    if rank < len(sb):
        raise RankDeficient(
            f"collocation matrix has numerical rank {rank} < {len(sb)} at rtol={rtol:g}",
            rank=rank,
            expected=len(sb),
            singular_values=s,
        )
    q, r = np.linalg.qr(phi, mode="reduced")
    return ReconstructionOperator(E, sb, phi, q, r, rank, rtol, s, method)


def _points(x):
    scalar = np.ndim(x) == 0 and not isinstance(x, (list, tuple))
    return scalar, ([x] if scalar else list(x))


def reconstruct(op: ReconstructionOperator, F, x):
    """Value at ``x`` of the squared-space element fitted to ``F``.

    ``F`` holds ``|f(x_n)|^2`` in the order of ``op.E``. Negative entries
    trigger a warning and are used as given.
    """
    scalar, pts = _points(x)
    c = op.coefficients(F)
    vals = op.basis_values(pts) @ c
    return float(vals[0]) if scalar else vals


def kernel_values(op: ReconstructionOperator, n: int, x):
    """``S_n(x)`` with ``n`` counted from 1 in the order of ``op.E``."""
    if not 1 <= n <= len(op.E):
        raise IndexOutOfRange(f"kernel index {n} not in 1..{len(op.E)}")
    scalar, pts = _points(x)
    vals = op.kernels(pts)[:, n - 1]
    return float(vals[0]) if scalar else vals
