"""Rational dressing of the vacuum solution.

Everything is evaluated pointwise at a light-cone point ``z = (z+, z-)``.
Array conventions: pole index ``i`` is 0-based in arrays and 1-based in
messages; block index ``alpha``/``beta`` is 1-based in signatures and stored
at position ``alpha - 1``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import matcore
from .errors import PoleError, ValidationError
from .model import GammaField, TodaSystem, residue

POLE_RTOL = 1e-9


def _power_gap(a: complex, b: complex, p: int) -> float:
    return abs(a**p - b**p) / (abs(a) ** p + abs(b) ** p)


def check_poles(p: int, mu, nu, rtol: float = POLE_RTOL):
    """Validate the pole invariants; raises naming the offending 1-based pair."""
    mu = np.asarray(mu, dtype=complex)
    nu = np.asarray(nu, dtype=complex)
    for name, v in (("mu", mu), ("nu", nu)):
        for i, x in enumerate(v):
            if not np.isfinite(x) or x == 0:
                raise ValidationError(f"{name}[{i + 1}] must be finite and nonzero")
        for i in range(len(v)):
            for j in range(i + 1, len(v)):
                if _power_gap(v[i], v[j], p) < rtol:
                    raise ValidationError(
                        f"pole collision: {name}_{i + 1}^p == {name}_{j + 1}^p (pair ({i + 1}, {j + 1}))")
    for i in range(len(nu)):
        for j in range(len(mu)):
            if _power_gap(nu[i], mu[j], p) < rtol:
                raise ValidationError(
                    f"pole collision: nu_{i + 1}^p == mu_{j + 1}^p (pair ({i + 1}, {j + 1}))")


@dataclass(frozen=True)
class DressingData:
    """Pole positions and initial values ``c[i, alpha-1]``, ``d[i, alpha-1]`` (``n* x n*`` each)."""

    mu: np.ndarray
    nu: np.ndarray
    c_init: np.ndarray
    d_init: np.ndarray

    def __post_init__(self):
        mu = np.atleast_1d(np.asarray(self.mu, dtype=complex))
        nu = np.atleast_1d(np.asarray(self.nu, dtype=complex))
        c = np.asarray(self.c_init, dtype=complex)
        d = np.asarray(self.d_init, dtype=complex)
        if mu.ndim != 1 or mu.shape != nu.shape or mu.size < 1:
            raise ValidationError("mu and nu must be equal-length 1-D arrays with r >= 1")
        r = mu.size
        if c.ndim != 4 or c.shape[0] != r or c.shape[2] != c.shape[3]:
            raise ValidationError(f"c_init must have shape (r, p, n*, n*), got {c.shape}")
        if d.shape != c.shape:
            raise ValidationError(f"d_init shape {d.shape} != c_init shape {c.shape}")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(d))):
            raise ValidationError("initial data must be finite")
        check_poles(c.shape[1], mu, nu)
        for name, v in (("mu", mu), ("nu", nu), ("c_init", c), ("d_init", d)):
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @property
    def r(self) -> int:
        return self.mu.size

    @property
    def p(self) -> int:
        return self.c_init.shape[1]

    @property
    def n_star(self) -> int:
        return self.c_init.shape[2]

    def check_system(self, system: TodaSystem):
        if (self.p, self.n_star) != (system.p, system.n_star):
            raise ValidationError(
                f"data is for p={self.p}, n*={self.n_star}; system has p={system.p}, n*={system.n_star}")


def eval_Z(system: TodaSystem, alpha: int, mu: complex, z) -> complex:
    """``Z_alpha(mu) = mu^-1 eps^-alpha z- + mu eps^alpha z+``."""
    mu = complex(mu)
    if mu == 0:
        raise ValidationError("Z_alpha(mu) needs mu != 0")
    zp, zm = z
    return zm / mu * system.eps(-alpha) + mu * system.eps(alpha) * zp


def _alphas(p):
    return np.arange(1, p + 1)


def _fourier(system: TodaSystem) -> np.ndarray:
    """``F[beta-1, alpha-1] = eps^(beta alpha)``."""
    a = _alphas(system.p)
    return system.eps(np.outer(a, a))


def _u_weights(system, mu, z, deriv=None):
    """Per-alpha scalar weights of ``u`` (and of its z-derivative)."""
    a = _alphas(system.p)
    zp, zm = z
    w = np.exp(-(zm / mu * system.eps(-a) + mu * system.eps(a) * zp))
    if deriv == "minus":
        w = w * (-system.eps(-a) / mu)
    elif deriv == "plus":
        w = w * (-mu * system.eps(a))
    return w


def _y_weights(system, nu, z, deriv=None):
    a = _alphas(system.p)
    zp, zm = z
    # exponent is Z_{-alpha}(nu)
    w = np.exp(zm / nu * system.eps(a) + nu * system.eps(-a) * zp)
    if deriv == "minus":
        w = w * (system.eps(a) / nu)
    elif deriv == "plus":
        w = w * (nu * system.eps(-a))
    return w


def eval_u(system: TodaSystem, data: DressingData, i: int, z, deriv=None) -> np.ndarray:
    """Blocks ``u_{i,beta}``, shape ``(p, n*, n*)``; ``i`` is 0-based.

    ``deriv`` = ``"minus"`` or ``"plus"`` returns the exact z-/z+ derivative.
    """
    w = _u_weights(system, data.mu[i], z, deriv)
    return np.einsum("ba,a,axy->bxy", _fourier(system), w, data.c_init[i])


def eval_y(system: TodaSystem, data: DressingData, i: int, z, deriv=None) -> np.ndarray:
    """Blocks ``y_{i,beta}``, shape ``(p, n*, n*)``."""
    w = _y_weights(system, data.nu[i], z, deriv)
    return np.einsum("ba,a,axy->bxy", _fourier(system), w, data.d_init[i])


def _all_u(system, data, z, deriv=None):
    return np.stack([eval_u(system, data, i, z, deriv) for i in range(data.r)])


def _all_y(system, data, z, deriv=None):
    return np.stack([eval_y(system, data, i, z, deriv) for i in range(data.r)])


def tilde_blocks(system: TodaSystem, data: DressingData, i: int, alpha: int, z):
    """``(u~_{i,alpha}, y~_{i,alpha}^T)`` with ``u~ = u mu^alpha``, ``y~ = y nu^-alpha``.

    ``alpha`` may be any integer; the block is periodic but the scalar factor is not.
    """
    b = (int(alpha) - 1) % system.p
    u = eval_u(system, data, i, z)[b] * data.mu[i] ** alpha
    y = eval_y(system, data, i, z)[b] * data.nu[i] ** (-alpha)
    return u, y.T


def _assemble_rr(blocks: np.ndarray) -> np.ndarray:
    """``(r, r, n*, n*)`` blocks -> ``(r n*, r n*)`` matrix."""
    r, _, n, _ = blocks.shape
    return blocks.transpose(0, 2, 1, 3).reshape(r * n, r * n)


def _split_rr(m: np.ndarray, r: int) -> np.ndarray:
    n = m.shape[0] // r
    return m.reshape(r, n, r, n).transpose(0, 2, 1, 3)


def _r_coefficients(system, data, alpha):
    """``a[i, j, beta-1] = nu_i^(p-k) mu_j^k / (nu_i^p - mu_j^p)``, ``k = |beta - alpha|_p``."""
    p = system.p
    k = np.array([residue(b - alpha, p) for b in _alphas(p)])
    nu = data.nu[:, None, None]
    mu = data.mu[None, :, None]
    return nu ** (p - k) * mu**k / (nu**p - mu**p)


def _build_R_untilded(system, data, alpha, u, y, du=None, dy=None):
    a = _r_coefficients(system, data, alpha)
    blocks = np.einsum("ijb,ibyx,jbyz->ijxz", a, y, u)
    if du is None:
        return _assemble_rr(blocks)
    dblocks = np.einsum("ijb,ibyx,jbyz->ijxz", a, dy, u) + np.einsum("ijb,ibyx,jbyz->ijxz", a, y, du)
    return _assemble_rr(blocks), _assemble_rr(dblocks)


def _build_R_tilde_exponential(system, data, alpha, z):
    p = system.p
    a = _alphas(p)
    zp, zm = z
    nu = data.nu[:, None]
    mu = data.mu[:, None]
    ey = np.exp(zm / nu * system.eps(a) + nu * system.eps(-a) * zp)  # e^{Z_{-beta}(nu_i)}, (r, p)
    eu = np.exp(-(zm / mu * system.eps(-a) + mu * system.eps(a) * zp))  # e^{-Z_delta(mu_j)}
    s = a[:, None] + a[None, :]  # beta + delta
    ratio = data.mu[None, :] / data.nu[:, None]  # mu_j / nu_i
    denom = 1.0 - ratio[:, :, None, None] * system.eps(s)[None, None]
    coef = (ey[:, None, :, None] * eu[None, :, None, :] * system.eps(alpha * s)[None, None]
            / denom * (ratio**alpha)[:, :, None, None])
    blocks = np.einsum("ijbd,ibyx,jdyz->ijxz", coef, data.d_init, data.c_init)
    return _assemble_rr(blocks)


def _build_R_tilde_partition(system, data, alpha, z):
    p = system.p
    a0 = (int(alpha) - 1) % p + 1
    u = _all_u(system, data, z)
    y = _all_y(system, data, z)
    b = _alphas(p)
    ut = u * (data.mu[:, None] ** b)[:, :, None, None]
    yt = y * (data.nu[:, None] ** (-b))[:, :, None, None]
    nu_p = data.nu[:, None] ** p
    mu_p = data.mu[None, :] ** p
    low = b < a0
    s_low = np.einsum("ibyx,jbyz->ijxz", yt[:, low], ut[:, low])
    s_high = np.einsum("ibyx,jbyz->ijxz", yt[:, ~low], ut[:, ~low])
    blocks = (mu_p[:, :, None, None] * s_low + nu_p[:, :, None, None] * s_high) / (nu_p - mu_p)[:, :, None, None]
    # tilded R picks up (mu_j / nu_i)^(alpha - a0) outside 1..p
    shift = (data.mu[None, :] / data.nu[:, None]) ** (int(alpha) - a0)
    return _assemble_rr(blocks * shift[:, :, None, None])


def build_R(system: TodaSystem, data: DressingData, alpha: int, z, tilde: bool = False,
            method: str = "exponential") -> np.ndarray:
    """``R_alpha`` or ``R~_alpha`` as an ``(n* r) x (n* r)`` matrix.

    ``tilde=True`` uses the closed exponential double sum by default;
    ``method="partition"`` uses the split sum over ``beta < alpha`` / ``beta >= alpha``
    of the tilded blocks.  ``alpha`` may be any integer.
    """
    data.check_system(system)
    if not tilde:
        return _build_R_untilded(system, data, alpha, _all_u(system, data, z), _all_y(system, data, z))
    if method == "exponential":
        return _build_R_tilde_exponential(system, data, alpha, z)
    if method == "partition":
        return _build_R_tilde_partition(system, data, alpha, z)
    raise ValueError(f"unknown method {method!r}")


def _tilde_row_col(system, data, alpha, z):
    """``U = (u~_{1,a} ... u~_{r,a})`` and ``Y = (y~_{1,a}^T; ...; y~_{r,a}^T)``."""
    b = (int(alpha) - 1) % system.p
    u = _all_u(system, data, z)[:, b] * (data.mu**alpha)[:, None, None]
    y = _all_y(system, data, z)[:, b] * (data.nu ** (-alpha))[:, None, None]
    return np.hstack(list(u)), np.vstack([yi.T for yi in y])


def gamma_dressing(system: TodaSystem, data: DressingData, method: str = "exponential") -> GammaField:
    """``Gamma_alpha = I - sum_ij u~_{i,a} (R~_a^-1)_ij y~_{j,a}^T``."""
    data.check_system(system)
    eye = np.eye(system.n_star, dtype=complex)

    def func(a, zp, zm):
        z = (zp, zm)
        U, Y = _tilde_row_col(system, data, a, z)
        R = build_R(system, data, a, z, tilde=True, method=method)
        return eye - U @ matcore.solve(R, Y)

    return GammaField(system, func, name="dressing")


def gamma_inv_dressing(system: TodaSystem, data: DressingData, method: str = "exponential") -> GammaField:
    """``Gamma_alpha^-1 = I + sum_ij u~_{i,a} (R~_{a+1}^-1)_ij y~_{j,a}^T``."""
    data.check_system(system)
    eye = np.eye(system.n_star, dtype=complex)

    def func(a, zp, zm):
        z = (zp, zm)
        U, Y = _tilde_row_col(system, data, a, z)
        R = build_R(system, data, a + 1, z, tilde=True, method=method)
        return eye + U @ matcore.solve(R, Y)

    return GammaField(system, func, name="dressing_inverse")


class DressingState:
    """All dressing quantities at one point, with exact z-derivatives of ``P_i`` and ``Q_i``."""

    def __init__(self, system: TodaSystem, data: DressingData, z):
        data.check_system(system)
        self.system = system
        self.data = data
        self.z = (complex(z[0]), complex(z[1]))

    @cached_property
    def _pq(self):
        system, data, z = self.system, self.data, self.z
        p, n, r = system.p, system.n_star, data.r
        u = _all_u(system, data, z)
        y = _all_y(system, data, z)
        du = {d: _all_u(system, data, z, d) for d in ("minus", "plus")}
        dy = {d: _all_y(system, data, z, d) for d in ("minus", "plus")}
        R, dR, Rinv = {}, {"minus": {}, "plus": {}}, {}
        for b in range(1, p + 1):
            R[b], dR["minus"][b] = _build_R_untilded(system, data, b, u, y, du["minus"], dy["minus"])
            _, dR["plus"][b] = _build_R_untilded(system, data, b, u, y, du["plus"], dy["plus"])
            Rinv[b] = matcore.mat_inv(R[b])

        def col(yarr, b):  # (r n*, n*) stack of y_{j,b}^T
            return np.vstack([yarr[j, b - 1].T for j in range(r)])

        def row(uarr, b):  # (n*, r n*) of u_{j,b} / mu_j
            return np.hstack([uarr[j, b - 1] / data.mu[j] for j in range(r)])

        def nxt(b):
            return b % p + 1

        P = np.zeros((r, p * n, p * n), dtype=complex)
        Q = np.zeros_like(P)
        dP = {d: np.zeros_like(P) for d in du}
        dQ = {d: np.zeros_like(P) for d in du}
        for b in range(1, p + 1):
            W = _split_rows(Rinv[b] @ col(y, b), r)
            X = _split_cols(row(u, b) @ Rinv[nxt(b)], r)
            dW, dX = {}, {}
            for d in du:
                dRinv_b = -Rinv[b] @ dR[d][b] @ Rinv[b]
                dRinv_n = -Rinv[nxt(b)] @ dR[d][nxt(b)] @ Rinv[nxt(b)]
                dW[d] = _split_rows(dRinv_b @ col(y, b) + Rinv[b] @ col(dy[d], b), r)
                dX[d] = _split_cols(row(du[d], b) @ Rinv[nxt(b)] + row(u, b) @ dRinv_n, r)
            rs = slice((b - 1) * n, b * n)
            for i in range(r):
                for a in range(1, p + 1):
                    sa = slice((a - 1) * n, a * n)
                    # (P_i)_{a b} = -(1/p) u_{i,a} W_{i,b};  (Q_i)_{b a} = (1/p) X_{i,b} nu_i y_{i,a}^T
                    P[i, sa, rs] = -u[i, a - 1] @ W[i] / p
                    Q[i, rs, sa] = data.nu[i] * X[i] @ y[i, a - 1].T / p
                    for d in du:
                        dP[d][i, sa, rs] = -(du[d][i, a - 1] @ W[i] + u[i, a - 1] @ dW[d][i]) / p
                        dQ[d][i, rs, sa] = data.nu[i] * (dX[d][i] @ y[i, a - 1].T + X[i] @ dy[d][i, a - 1].T) / p
        return P, Q, dP, dQ

    @property
    def P(self):
        return self._pq[0]

    @property
    def Q(self):
        return self._pq[1]

    def dP(self, which: str):
        return self._pq[2][which]

    def dQ(self, which: str):
        return self._pq[3][which]

    def _conj_sum(self, mats, poles, lam):
        """``sum_i sum_k w(lam, eps^k pole_i) h^k M_i h^-k`` with ``w = lam/(lam - eps^k pole_i)``."""
        system = self.system
        hd = np.diag(system.h)
        out = np.zeros((system.n, system.n), dtype=complex)
        for i, m in enumerate(mats):
            for k in range(1, system.p + 1):
                pole = system.eps(k) * poles[i]
                if np.isinf(lam):
                    w = 1.0
                else:
                    gap = abs(lam - pole)
                    if gap <= 1e-12 * max(1.0, abs(pole)):
                        raise PoleError(f"lambda={lam} is the pole eps^{k} * {poles[i]} (i={i + 1})")
                    w = lam / (lam - pole)
                out += w * (hd[:, None] ** k) * m * (hd[None, :] ** (-k))
        return out

    def psi(self, lam) -> np.ndarray:
        """``psi(lam) = I + sum lam/(lam - eps^k mu_i) h^k P_i h^-k`` (``psi_0 = I``)."""
        return np.eye(self.system.n) + self._conj_sum(self.P, self.data.mu, lam)

    def psi_inv(self, lam) -> np.ndarray:
        return np.eye(self.system.n) + self._conj_sum(self.Q, self.data.nu, lam)

    def dpsi(self, lam, which: str) -> np.ndarray:
        return self._conj_sum(self.dP(which), self.data.mu, lam)

    def gamma_blocks(self) -> np.ndarray:
        """``I + p sum_i (P_i)_{aa}`` for each ``a``, shape ``(p, n*, n*)``."""
        return self._diag_blocks(self.P)

    def gamma_inv_blocks(self) -> np.ndarray:
        return self._diag_blocks(self.Q)

    def _diag_blocks(self, mats):
        system = self.system
        lay = system.layout
        tot = mats.sum(axis=0)
        return np.stack([np.eye(system.n_star) + system.p * matcore.block_get(tot, lay, a, a)
                         for a in range(system.p)])


def _split_rows(m, r):
    n = m.shape[0] // r
    return [m[i * n:(i + 1) * n] for i in range(r)]


def _split_cols(m, r):
    n = m.shape[1] // r
    return [m[:, i * n:(i + 1) * n] for i in range(r)]


def build_P(system: TodaSystem, data: DressingData, i: int, z) -> np.ndarray:
    """Full ``n x n`` residue matrix ``P_i`` (``i`` 0-based)."""
    return DressingState(system, data, z).P[i].copy()


def build_Q(system: TodaSystem, data: DressingData, i: int, z) -> np.ndarray:
    return DressingState(system, data, z).Q[i].copy()


def eval_psi(system: TodaSystem, data: DressingData, lam, z) -> np.ndarray:
    """``psi(lam)`` at ``z``; ``lam = numpy.inf`` gives the limit ``psi(inf)``."""
    return DressingState(system, data, z).psi(lam)


def eval_psi_inv(system: TodaSystem, data: DressingData, lam, z) -> np.ndarray:
    return DressingState(system, data, z).psi_inv(lam)


RESIDUE_NAMES = ("res1_n", "res1_m", "res2_n", "res3_n", "res2_m", "res3_m")


def residue_norms(state: DressingState, P=None, Q=None, dP=None, dQ=None) -> dict:
    """Max-norms of the six residue relations, each relative to ``1 + |factors|``.

    ``P``/``Q`` (stacks of ``r`` matrices) and ``dP``/``dQ`` (``{"minus", "plus"}``
    dicts) override the state's own values, so callers can inject perturbations.
    """
    system, data = state.system, state.data
    P = state.P if P is None else P
    Q = state.Q if Q is None else Q
    dP = {w: state.dP(w) for w in ("minus", "plus")} if dP is None else dP
    dQ = {w: state.dQ(w) for w in ("minus", "plus")} if dQ is None else dQ
    cm, cp = system.c_minus, system.c_plus
    out = dict.fromkeys(RESIDUE_NAMES, 0.0)

    def rel(left, right):
        scale = 1.0 + matcore.max_norm(left) * matcore.max_norm(right)
        return matcore.max_norm(left @ right) / scale

    for i in range(data.r):
        A = np.eye(system.n) + state._conj_sum(P, data.mu, data.nu[i])   # = psi(nu_i)
        B = np.eye(system.n) + state._conj_sum(Q, data.nu, data.mu[i])   # = psi^-1(mu_i)
        mu, nu = data.mu[i], data.nu[i]
        vals = {
            "res1_n": rel(Q[i], A),
            "res1_m": rel(B, P[i]),
            "res2_n": rel(dQ["minus"][i] - Q[i] @ cm / nu, A),
            "res3_n": rel(dQ["plus"][i] - nu * Q[i] @ cp, A),
            "res2_m": rel(B, dP["minus"][i] + cm @ P[i] / mu),
            "res3_m": rel(B, dP["plus"][i] + mu * cp @ P[i]),
        }
        for k, v in vals.items():
            out[k] = max(out[k], v)
    return out


def fd_derivatives(system, data, z, step=1e-5):
    """Central-difference z-/z+ derivatives of all ``P_i`` and ``Q_i``."""
    zp, zm = complex(z[0]), complex(z[1])

    def st(a, b):
        return DressingState(system, data, (a, b))

    dP = {"minus": (st(zp, zm + step).P - st(zp, zm - step).P) / (2 * step),
          "plus": (st(zp + step, zm).P - st(zp - step, zm).P) / (2 * step)}
    dQ = {"minus": (st(zp, zm + step).Q - st(zp, zm - step).Q) / (2 * step),
          "plus": (st(zp + step, zm).Q - st(zp - step, zm).Q) / (2 * step)}
    return dP, dQ


def check_residue_relations(system: TodaSystem, data: DressingData, z, fd_step: float | None = 1e-5) -> dict:
    """Six residue-relation norms plus, optionally, the analytic-vs-FD derivative mismatch."""
    state = DressingState(system, data, z)
    report = residue_norms(state)
    if fd_step:
        dP, dQ = fd_derivatives(system, data, z, fd_step)
        report["derivative_fd_mismatch"] = max(
            matcore.rel_deviation(dP[w], state.dP(w)) for w in ("minus", "plus")) if data.r else 0.0
        report["derivative_fd_mismatch"] = max(
            report["derivative_fd_mismatch"],
            max(matcore.rel_deviation(dQ[w], state.dQ(w)) for w in ("minus", "plus")))
    return report


def default_lambda_samples(data: DressingData, count: int = 16) -> np.ndarray:
    """``count`` points on the unit circle, rotated away from the poles."""
    best, best_gap = None, -1.0
    for shift in np.linspace(0, 2 * np.pi / count, 17)[:-1]:
        lam = np.exp(1j * (2 * np.pi * np.arange(count) / count + shift + 0.1))
        gap = _min_pole_gap(data, lam)
        if gap > best_gap:
            best, best_gap = lam, gap
    return best


def _min_pole_gap(data, lam):
    p = data.p
    poles = np.concatenate([np.outer(data.mu, np.exp(2j * np.pi * np.arange(p) / p)).ravel(),
                            np.outer(data.nu, np.exp(2j * np.pi * np.arange(p) / p)).ravel()])
    return float(np.min(np.abs(np.asarray(lam)[:, None] - poles[None, :])))


def _fit_residual(lams, values, basis):
    """Least-squares fit of ``values[s]`` (matrices) to ``sum_k coef_k basis_k(lam_s)``."""
    A = np.stack([f(lams) for f in basis], axis=1)
    V = values.reshape(len(lams), -1)
    coef, *_ = np.linalg.lstsq(A, V, rcond=None)
    resid = V - A @ coef
    scale = 1.0 + np.max(np.abs(V))
    return float(np.max(np.abs(resid)) / scale), coef.reshape((len(basis),) + values.shape[1:])


def check_grading(system: TodaSystem, data: DressingData, z, lam_samples=None,
                  derivative: str = "analytic", fd_step: float = 1e-4) -> dict:
    """Least-squares Laurent fits of the connection components over ``lam_samples``.

    ``omega_- = psi^-1 d-psi + lam^-1 psi^-1 c- psi`` is fitted to ``a0 + a_{-1}/lam``
    and ``omega_+ = psi^-1 d+psi + lam psi^-1 c+ psi`` to ``a1 lam``.  Fit residuals
    are relative to ``1 + max |omega|``.  ``omega_minus_no_pole_fit`` is the
    residual of fitting ``omega_-`` with the ``1/lam`` term removed.
    """
    lams = default_lambda_samples(data) if lam_samples is None else np.asarray(lam_samples, dtype=complex)
    if lams.size < 3:
        raise ValidationError("check_grading needs at least 3 lambda samples")
    if np.any(lams == 0) or _min_pole_gap(data, lams) < 1e-8:
        raise ValidationError("lambda samples collide with a pole of psi or psi^-1")
    state = DressingState(system, data, z)
    if derivative == "analytic":
        dpsi = {w: (lambda lam, w=w: state.dpsi(lam, w)) for w in ("minus", "plus")}
    elif derivative == "fd":
        zp, zm = state.z
        shifted = {"minus": (DressingState(system, data, (zp, zm + fd_step)),
                             DressingState(system, data, (zp, zm - fd_step))),
                   "plus": (DressingState(system, data, (zp + fd_step, zm)),
                            DressingState(system, data, (zp - fd_step, zm)))}
        dpsi = {w: (lambda lam, w=w: (shifted[w][0].psi(lam) - shifted[w][1].psi(lam)) / (2 * fd_step))
                for w in shifted}
    else:
        raise ValueError(f"unknown derivative mode {derivative!r}")

    om_minus, om_plus = [], []
    for lam in lams:
        psi, psi_inv = state.psi(lam), state.psi_inv(lam)
        om_minus.append(psi_inv @ dpsi["minus"](lam) + psi_inv @ system.c_minus @ psi / lam)
        om_plus.append(psi_inv @ dpsi["plus"](lam) + lam * psi_inv @ system.c_plus @ psi)
    om_minus, om_plus = np.array(om_minus), np.array(om_plus)

    fit_minus, coef_minus = _fit_residual(lams, om_minus, [np.ones_like, lambda l: 1 / l])
    fit_plus, coef_plus = _fit_residual(lams, om_plus, [lambda l: l])
    no_pole, _ = _fit_residual(lams, om_minus, [np.ones_like])
    omega_plus_zero = state.psi_inv(0.0) @ dpsi["plus"](0.0)
    return {
        "omega_minus_fit": fit_minus,
        "omega_plus_fit": fit_plus,
        "omega_plus_zero": matcore.max_norm(omega_plus_zero),
        "omega_minus_no_pole_fit": no_pole,
        "pole_coefficient_deviation": matcore.max_norm(coef_minus[1] - system.c_minus),
    }
