"""Periodic non-Abelian Toda system: fixed data, field contract, PDE residual.

Block indices ``alpha`` run over ``1..p`` in every public signature and are
reduced modulo ``p`` internally, so ``Gamma_{alpha+p}`` and ``Gamma_alpha``
are the same object.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from . import matcore
from .errors import SingularFieldError, SingularMatrixError, ValidationError


def eps_power(p: int, x) -> complex:
    """``eps_p ** x`` on the principal branch, ``exp(2 pi i x / p)``; ``x`` may be fractional."""
    return np.exp(2j * np.pi * np.asarray(x, dtype=float) / p)


def residue(x: int, p: int) -> int:
    """Nonnegative residue of ``x`` modulo ``p``."""
    return int(x) % p


def reduce_index(alpha: int, p: int) -> int:
    """Map any integer block index onto ``1..p``."""
    return (int(alpha) - 1) % p + 1


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TodaSystem:
    p: int
    n_star: int
    h: np.ndarray = dc_field(repr=False)
    c_plus: np.ndarray = dc_field(repr=False)
    c_minus: np.ndarray = dc_field(repr=False)

    @property
    def n(self) -> int:
        return self.p * self.n_star

    @property
    def eps_p(self) -> complex:
        return complex(eps_power(self.p, 1))

    @property
    def layout(self) -> matcore.BlockLayout:
        return matcore.BlockLayout(self.p, self.p, self.n_star)

    def eps(self, x) -> complex:
        return eps_power(self.p, x)

    def h_power(self, k: int) -> np.ndarray:
        """``h**k`` for any integer ``k`` (``h`` is diagonal with ``h**p = I``)."""
        return np.diag(np.diag(self.h) ** (int(k) % self.p))


def build_system(p: int, n_star: int) -> TodaSystem:
    if int(p) != p or p < 2:
        raise ValidationError(f"p must be an integer >= 2, got {p}")
    if int(n_star) != n_star or n_star < 1:
        raise ValidationError(f"n_star must be an integer >= 1, got {n_star}")
    p, n_star = int(p), int(n_star)
    n = p * n_star
    # grading element: block alpha is eps^(p - alpha + 1) I
    diag = np.repeat([eps_power(p, p - a + 1) for a in range(1, p + 1)], n_star)
    h = np.diag(diag)
    layout = matcore.BlockLayout(p, p, n_star)
    eye = np.eye(n_star)
    c_plus = np.zeros((n, n), dtype=complex)
    for a in range(p):
        # superdiagonal blocks (a, a+1) and the corner (p, 1)
        c_plus = matcore.block_set(c_plus, layout, a, (a + 1) % p, eye)
    c_minus = c_plus.T.copy()
    return TodaSystem(p, n_star, _frozen(h), _frozen(c_plus), _frozen(c_minus))


class CoordinateMode(str, enum.Enum):
    """How a sample point ``(a, b)`` maps to the light-cone pair ``(z+, z-)``.

    ``independent``: ``(a, b) = (z+, z-)``.
    ``euclidean``:   ``(a, b) = (x, t)``, ``z- = x - i t``, ``z+ = x + i t``.
    ``lorentzian``:  ``(a, b) = (x, t)``, ``z- = x - t``,   ``z+ = x + t``.
    """

    INDEPENDENT = "independent"
    EUCLIDEAN = "euclidean"
    LORENTZIAN = "lorentzian"

    def to_light_cone(self, a, b) -> tuple[complex, complex]:
        if self is CoordinateMode.INDEPENDENT:
            return complex(a), complex(b)
        if self is CoordinateMode.EUCLIDEAN:
            return complex(a + 1j * b), complex(a - 1j * b)
        return complex(a + b), complex(a - b)


class GammaField:
    """Evaluator ``(alpha, z+, z-) -> Gamma_alpha`` (an ``n* x n*`` matrix).

    ``func`` receives ``alpha`` already reduced to ``1..p``.  Singular matrices
    met during evaluation surface as :class:`SingularFieldError`.
    """

    def __init__(self, system: TodaSystem, func: Callable, name: str = "field"):
        self.system = system
        self._func = func
        self.name = name

    def __repr__(self):
        return f"GammaField({self.name!r}, p={self.system.p}, n_star={self.system.n_star})"

    def __call__(self, alpha: int, z_plus, z_minus) -> np.ndarray:
        a = reduce_index(alpha, self.system.p)
        try:
            value = self._func(a, complex(z_plus), complex(z_minus))
        except SingularMatrixError as exc:
            raise SingularFieldError((complex(z_plus), complex(z_minus)), a, exc) from exc
        return np.asarray(value, dtype=complex)

    def at(self, alpha: int, point, mode: CoordinateMode = CoordinateMode.INDEPENDENT) -> np.ndarray:
        return self(alpha, *CoordinateMode(mode).to_light_cone(*point))

    def is_valid(self, z_plus, z_minus) -> bool:
        """True iff every ``Gamma_alpha`` evaluates without a singularity."""
        try:
            for a in range(1, self.system.p + 1):
                self(a, z_plus, z_minus)
        except SingularFieldError:
            return False
        return True


def vacuum_field(system: TodaSystem) -> GammaField:
    eye = np.eye(system.n_star, dtype=complex)
    return GammaField(system, lambda a, zp, zm: eye, name="vacuum")


def _derivative_ops(mode: CoordinateMode, step: float):
    """Central-difference stencils for d/dz- and d/dz+ in the mode's native coordinates.

    Each op is a list of ``(weight, (da, db))`` shifts of the sample point.
    """
    h = float(step)
    if mode is CoordinateMode.INDEPENDENT:
        d_minus = [(1 / (2 * h), (0.0, h)), (-1 / (2 * h), (0.0, -h))]
        d_plus = [(1 / (2 * h), (h, 0.0)), (-1 / (2 * h), (-h, 0.0))]
        return d_minus, d_plus
    dx = [(1 / (2 * h), (h, 0.0)), (-1 / (2 * h), (-h, 0.0))]
    dt = [(1 / (2 * h), (0.0, h)), (-1 / (2 * h), (0.0, -h))]
    # Wirtinger-type combinations of the x and t differences
    s = 1j if mode is CoordinateMode.EUCLIDEAN else -1.0
    d_minus = [(0.5 * w, sh) for w, sh in dx] + [(0.5 * s * w, sh) for w, sh in dt]
    d_plus = [(0.5 * w, sh) for w, sh in dx] + [(-0.5 * s * w, sh) for w, sh in dt]
    return d_minus, d_plus


def toda_residual_terms(field: GammaField, alpha: int, point, step: float = 1e-4,
                        mode: CoordinateMode = CoordinateMode.INDEPENDENT) -> dict:
    """The three terms of the periodic Toda equation at ``point``.

    Returns ``{"kinetic", "forward", "backward", "residual"}`` where
    ``residual = kinetic + forward - backward`` with
    ``kinetic = d+(Gamma^-1 d- Gamma)``, ``forward = Gamma_a^-1 Gamma_{a+1}`` and
    ``backward = Gamma_{a-1}^-1 Gamma_a``.
    """
    mode = CoordinateMode(mode)
    a0, b0 = point
    d_minus, d_plus = _derivative_ops(mode, step)
    cache: dict = {}

    def gamma(a, q):
        key = (reduce_index(a, field.system.p), q)
        if key not in cache:
            try:
                cache[key] = field.at(a, (a0 + q[0], b0 + q[1]), mode)
            except SingularFieldError as exc:
                raise SingularFieldError((a0 + q[0], b0 + q[1]), key[0], exc.cause) from exc
        return cache[key]

    def left_div(a, q, rhs):
        try:
            return matcore.solve(gamma(a, q), rhs)
        except SingularMatrixError as exc:
            raise SingularFieldError((a0 + q[0], b0 + q[1]), reduce_index(a, field.system.p), exc) from exc

    def current(q):
        dg = sum(w * gamma(alpha, (q[0] + s[0], q[1] + s[1])) for w, s in d_minus)
        return left_div(alpha, q, dg)

    kinetic = sum(w * current(s) for w, s in d_plus)
    origin = (0.0, 0.0)
    g = gamma(alpha, origin)
    forward = left_div(alpha, origin, gamma(alpha + 1, origin))
    backward = left_div(alpha - 1, origin, g)
    return {
        "kinetic": kinetic,
        "forward": forward,
        "backward": backward,
        "residual": kinetic + forward - backward,
    }


def toda_residual(field: GammaField, alpha: int, point, step: float = 1e-4,
                  mode: CoordinateMode = CoordinateMode.INDEPENDENT) -> np.ndarray:
    """Finite-difference residual of the periodic Toda equation for block ``alpha``.

    Both derivatives are second-order central differences with spacing
    ``step``.  In Euclidean and Lorentzian modes ``point`` is ``(x, t)`` and the
    light-cone derivatives are assembled from x- and t-differences.
    """
    return toda_residual_terms(field, alpha, point, step, mode)["residual"]


def apply_symmetry(field: GammaField, xi: complex = 1.0, x=None) -> GammaField:
    """``Gamma_alpha -> xi * x^-1 Gamma_alpha x``, a symmetry of the Toda system."""
    xi = complex(xi)
    if xi == 0 or not np.isfinite(xi):
        raise ValidationError("symmetry scale xi must be finite and nonzero")
    n_star = field.system.n_star
    if x is None:
        x = np.eye(n_star, dtype=complex)
    x = matcore.as_matrix(x)
    if x.shape != (n_star, n_star):
        raise ValidationError(f"x must be {n_star}x{n_star}, got {x.shape}")
    try:
        x_inv = matcore.mat_inv(x)
    except SingularMatrixError as exc:
        raise ValidationError(f"symmetry matrix x is singular: {exc}") from exc

    def func(a, zp, zm):
        return xi * (x_inv @ field(a, zp, zm) @ x)

    return GammaField(field.system, func, name=f"sym({field.name})")
