"""Soliton-like solutions: one ``c`` and two ``d`` initial-value blocks per pole pair.

Soliton ``i`` is labelled by block indices ``I_i`` (for ``c``) and ``J_i != K_i``
(for ``d``).  All ``E``/``R'`` formulas below depend on ``z`` only through
``E_{alpha,i} = eps^(alpha rho_i) exp(kappa_i (z-/zeta_i + zeta_i z+))``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import matcore
from .dressing import DressingData, check_poles, eval_Z
from .errors import SingularMatrixError, ValidationError
from .model import CoordinateMode, GammaField, TodaSystem, apply_symmetry

log = logging.getLogger(__name__)

DENOM_RTOL = 1e-12


@dataclass(frozen=True)
class SolitonParams:
    rho: int
    zeta: complex
    kappa: float


@dataclass(frozen=True)
class SolitonData:
    system: TodaSystem
    mu: np.ndarray
    nu: np.ndarray
    I: np.ndarray
    J: np.ndarray
    K: np.ndarray
    c_I: np.ndarray
    d_J: np.ndarray
    d_K: np.ndarray

    def __post_init__(self):
        p, n = self.system.p, self.system.n_star
        mu = np.atleast_1d(np.asarray(self.mu, dtype=complex))
        nu = np.atleast_1d(np.asarray(self.nu, dtype=complex))
        r = mu.size
        if r < 1 or nu.shape != mu.shape or mu.ndim != 1:
            raise ValidationError("mu and nu must be equal-length 1-D arrays with r >= 1")
        idx = {}
        for name in ("I", "J", "K"):
            v = np.atleast_1d(np.asarray(getattr(self, name)))
            if v.shape != (r,) or not np.all(np.equal(np.mod(v, 1), 0)):
                raise ValidationError(f"{name} must hold r integers")
            v = v.astype(int)
            if np.any((v < 1) | (v > p)):
                raise ValidationError(f"{name} entries must lie in 1..{p}, got {v.tolist()}")
            idx[name] = v
        mats = {}
        for name in ("c_I", "d_J", "d_K"):
            m = np.asarray(getattr(self, name), dtype=complex)
            if m.ndim == 1 and n == 1:
                m = m.reshape(r, 1, 1)
            if m.shape != (r, n, n):
                raise ValidationError(f"{name} must have shape ({r}, {n}, {n}), got {m.shape}")
            if not np.all(np.isfinite(m)):
                raise ValidationError(f"{name} must be finite")
            mats[name] = m
        check_poles(p, mu, nu)
        for i in range(r):
            if (idx["K"][i] - idx["J"][i]) % p == 0:
                log.warning("soliton %d has rho = 0 (J = K); kappa vanishes", i + 1)
                raise ValidationError(f"soliton {i + 1}: J and K coincide (rho = 0 is degenerate)")
            try:
                matcore.lu_factor(mats["c_I"][i])
            except SingularMatrixError as exc:
                raise ValidationError(f"c_I[{i + 1}] is singular: {exc}") from exc
        for A in ("J", "K"):
            den = _d_tilde_denominators(self.system, mu, nu, idx["I"], idx[A])
            bad = np.argwhere(np.abs(den) < DENOM_RTOL)
            if bad.size:
                i, j = bad[0]
                raise ValidationError(f"D~({A}) denominator vanishes at (i, j) = ({i + 1}, {j + 1})")
        for name, v in [("mu", mu), ("nu", nu), *idx.items(), *mats.items()]:
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @property
    def r(self) -> int:
        return self.mu.size

    @property
    def rho(self) -> np.ndarray:
        return self.K - self.J

    @property
    def zeta(self) -> np.ndarray:
        return -1j * self.nu * self.system.eps(-(self.K + self.J) / 2)

    @property
    def kappa(self) -> np.ndarray:
        return 2 * np.sin(np.pi * self.rho / self.system.p)

    def to_dressing_data(self) -> DressingData:
        p, n, r = self.system.p, self.system.n_star, self.r
        c = np.zeros((r, p, n, n), dtype=complex)
        d = np.zeros_like(c)
        for i in range(r):
            c[i, self.I[i] - 1] = self.c_I[i]
            d[i, self.J[i] - 1] += self.d_J[i]
            d[i, self.K[i] - 1] += self.d_K[i]
        return DressingData(self.mu, self.nu, c, d)


def _d_tilde_denominators(system, mu, nu, I, A):
    """``1 - nu_i^-1 mu_j eps^(A_i + I_j)`` as an ``(r, r)`` array."""
    return 1 - (mu[None, :] / nu[:, None]) * system.eps(A[:, None] + I[None, :])


def derive_params(data: SolitonData) -> list[SolitonParams]:
    return [SolitonParams(int(rho), complex(zeta), float(kappa))
            for rho, zeta, kappa in zip(data.rho, data.zeta, data.kappa)]


def eval_E(data: SolitonData, alpha: int, i: int, z) -> complex:
    """``E_{alpha,i}``; ``i`` is 0-based."""
    zp, zm = z
    zeta, kappa = data.zeta[i], data.kappa[i]
    return complex(data.system.eps(alpha * data.rho[i]) * np.exp(kappa * (zm / zeta + zeta * zp)))


def eval_E_identity(data: SolitonData, alpha: int, i: int, z) -> complex:
    """Same quantity via ``eps^(alpha rho) exp(Z_{-K}(nu) - Z_{-J}(nu))``."""
    s = data.system
    ex = eval_Z(s, -data.K[i], data.nu[i], z) - eval_Z(s, -data.J[i], data.nu[i], z)
    return complex(s.eps(alpha * data.rho[i]) * np.exp(ex))


def _E_vector(data, alpha, z):
    return np.array([eval_E(data, alpha, i, z) for i in range(data.r)])


def build_D_tilde(data: SolitonData, which: str) -> np.ndarray:
    """``D~_ij(A) = d_{A_i}^T c_{I_j} / (1 - nu_i^-1 mu_j eps^(A_i + I_j))`` for ``A`` = ``"J"``/``"K"``."""
    if which not in ("J", "K"):
        raise ValidationError(f"selector must be 'J' or 'K', got {which!r}")
    A = data.J if which == "J" else data.K
    d = data.d_J if which == "J" else data.d_K
    den = _d_tilde_denominators(data.system, data.mu, data.nu, data.I, A)
    if np.any(np.abs(den) < DENOM_RTOL):
        i, j = np.argwhere(np.abs(den) < DENOM_RTOL)[0]
        raise ValidationError(f"D~({which}) denominator vanishes at (i, j) = ({i + 1}, {j + 1})")
    blocks = np.einsum("iyx,jyz->ijxz", d, data.c_I) / den[:, :, None, None]
    r, n = data.r, data.system.n_star
    return blocks.transpose(0, 2, 1, 3).reshape(r * n, r * n)


def _r_prime_scale(data, alpha, z) -> float:
    """Size of the terms summed into ``R'_alpha``, for the singularity threshold."""
    E = np.abs(_E_vector(data, alpha, z))
    return matcore.max_norm(build_D_tilde(data, "J")) + float(E.max()) * matcore.max_norm(build_D_tilde(data, "K"))


def build_R_prime(data: SolitonData, alpha: int, z) -> np.ndarray:
    """``R'_alpha = D~(J) + diag(E_{alpha,i}) D~(K)``."""
    n = data.system.n_star
    return build_D_tilde(data, "J") + matcore.scalar_block_diag(_E_vector(data, alpha, z), n) @ build_D_tilde(data, "K")


def factorized_R_tilde(data: SolitonData, alpha: int, z) -> np.ndarray:
    """``R~_alpha`` rebuilt from ``R'_alpha`` with the diagonal phase factors on both sides."""
    s, n = data.system, data.system.n_star
    left = [data.nu[i] ** (-alpha) * s.eps(alpha * data.J[i]) * np.exp(eval_Z(s, -data.J[i], data.nu[i], z))
            for i in range(data.r)]
    right = [data.mu[j] ** alpha * s.eps(alpha * data.I[j]) * np.exp(-eval_Z(s, data.I[j], data.mu[j], z))
             for j in range(data.r)]
    return (matcore.scalar_block_diag(left, n) @ build_R_prime(data, alpha, z)
            @ matcore.scalar_block_diag(right, n))


def gamma_soliton_e28(data: SolitonData) -> GammaField:
    """``Gamma_a = I - sum_ij c_{I_i} (R'_a^-1)_ij (d_{J_j}^T + E_{a,j} d_{K_j}^T)``."""
    s, n = data.system, data.system.n_star
    row = np.hstack(list(data.c_I))
    eye = np.eye(n, dtype=complex)

    def func(a, zp, zm):
        z = (zp, zm)
        E = _E_vector(data, a, z)
        col = np.vstack([data.d_J[j].T + E[j] * data.d_K[j].T for j in range(data.r)])
        return eye - row @ matcore.solve(build_R_prime(data, a, z), col, _r_prime_scale(data, a, z))

    return GammaField(s, func, name="soliton_e28")


def _require_one(data):
    if data.r != 1:
        raise ValidationError(f"one-soliton formulas need r = 1, got r = {data.r}")


def one_soliton_H(data: SolitonData) -> np.ndarray:
    """``H = D~(J)^-1 D~(K)`` (``r = 1``), so that ``R'_alpha = D~(J) T_alpha``."""
    _require_one(data)
    DJ = build_D_tilde(data, "J")
    try:
        DJ_inv = matcore.mat_inv(DJ)
    except SingularMatrixError as exc:
        raise ValidationError(f"D~(J) is singular: {exc}") from exc
    return DJ_inv @ build_D_tilde(data, "K")


def eval_T(data: SolitonData, alpha: int, z) -> np.ndarray:
    """``T_alpha = I + E_alpha H``."""
    H = one_soliton_H(data)
    return np.eye(data.system.n_star) + eval_E(data, alpha, 0, z) * H


def gamma_one_soliton(data: SolitonData, form: str = "T") -> GammaField:
    """One-soliton field ``T_a^-1 T_{a+1}`` (``form="T"``) or ``R'_a^-1 R'_{a+1}`` (``form="R_prime"``)."""
    _require_one(data)
    n = data.system.n_star
    H = one_soliton_H(data)
    h_norm = matcore.max_norm(H)
    eye = np.eye(n)
    if form == "T":
        def func(a, zp, zm):
            z = (zp, zm)
            Ea = eval_E(data, a, 0, z)
            return matcore.solve(eye + Ea * H, eye + eval_E(data, a + 1, 0, z) * H, 1 + abs(Ea) * h_norm)
    elif form == "R_prime":
        def func(a, zp, zm):
            z = (zp, zm)
            return matcore.solve(build_R_prime(data, a, z), build_R_prime(data, a + 1, z), _r_prime_scale(data, a, z))
    else:
        raise ValueError(f"unknown form {form!r}")
    return GammaField(data.system, func, name=f"one_soliton[{form}]")


def one_soliton_symmetry(data: SolitonData) -> tuple[complex, np.ndarray]:
    """``(xi, x)`` mapping the general soliton field onto the ``T``-form for ``r = 1``."""
    _require_one(data)
    xi = data.nu[0] / data.mu[0] * data.system.eps(-(data.I[0] + data.J[0]))
    return complex(xi), data.c_I[0].copy()


def symmetric_closed_form(data: SolitonData) -> GammaField:
    xi, x = one_soliton_symmetry(data)
    return apply_symmetry(gamma_soliton_e28(data), xi, x)


def abelian_one_soliton(data: SolitonData, alpha: int, z) -> complex:
    """Scalar closed form ``(1 + E_{a+1} H) / (1 + E_a H)`` for ``n* = 1``, ``r = 1``."""
    if data.system.n_star != 1:
        raise ValidationError("abelian closed form needs n* = 1")
    H = one_soliton_H(data)[0, 0]
    return (1 + eval_E(data, alpha + 1, 0, z) * H) / (1 + eval_E(data, alpha, 0, z) * H)


def _multi_factors(data):
    s, n = data.system, data.system.n_star
    row = np.hstack(list(data.c_I))
    col = np.vstack([matcore.mat_inv(c) for c in data.c_I])
    N_inv = matcore.scalar_block_diag(s.eps(data.J) / data.nu, n)
    M = matcore.scalar_block_diag(data.mu * s.eps(data.I), n)
    return row, col, N_inv, M


def gamma_multi_soliton(data: SolitonData, normalize: bool = False) -> GammaField:
    """``c_I^T R'_a^-1 N_J^-1 R'_{a+1} M_I c_I^-1``; divided by ``r`` when ``normalize``."""
    row, col, N_inv, M = _multi_factors(data)
    scale = 1.0 / data.r if normalize else 1.0

    def func(a, zp, zm):
        z = (zp, zm)
        inner = matcore.solve(build_R_prime(data, a, z), N_inv @ build_R_prime(data, a + 1, z) @ M @ col,
                              _r_prime_scale(data, a, z))
        return scale * (row @ inner)

    return GammaField(data.system, func, name="multi_soliton" + ("[1/r]" if normalize else ""))


def tau_factors(data: SolitonData, alpha: int, z) -> tuple[np.ndarray, np.ndarray]:
    """Diagnostic factors ``(R'_{a+1} M_I c_I^-1, c_I^T R'_a^-1 N_J^-1)``; their product is the multi-soliton field."""
    row, col, N_inv, M = _multi_factors(data)
    right = build_R_prime(data, alpha + 1, z) @ M @ col
    left = row @ matcore.mat_inv(build_R_prime(data, alpha, z)) @ N_inv
    return right, left


def hirota_tau(data: SolitonData, alpha: int, z) -> complex:
    """``det(I + diag(E_a) H)`` with ``H = D~(K) D~(J)^-1`` (scalar tau function for ``n* = 1``)."""
    if data.system.n_star != 1:
        raise ValidationError("hirota_tau is defined for n* = 1")
    H = build_D_tilde(data, "K") @ matcore.mat_inv(build_D_tilde(data, "J"))
    return complex(np.linalg.det(np.eye(data.r) + np.diag(_E_vector(data, alpha, z)) @ H))


# --- two-soliton asymptotics (n* = 1, r = 2) -------------------------------------------------

def _hirota_coefficients(data):
    H = build_D_tilde(data, "K") @ matcore.mat_inv(build_D_tilde(data, "J"))
    return H[0, 0], H[1, 1], np.linalg.det(H)


def two_soliton_asymptotics(data: SolitonData, t_values=(-30.0, 30.0), half_width: float = 6.0,
                            n_samples: int = 41, cross_tol: float = 1e-6,
                            mode: CoordinateMode = CoordinateMode.LORENTZIAN) -> dict:
    """Compare the ``n* = 1`` two-soliton with a product of shifted one-solitons.

    At each ``t`` in ``t_values`` the field is sampled across both soliton
    cores.  Where the other soliton contributes a term below ``cross_tol`` the
    field should match ``C * prod_i (1 + E_{a+1,i} h_i) / (1 + E_{a,i} h_i)``,
    where ``h_i`` is ``H_ii`` on the side where the other soliton vanishes and
    ``det H / H_jj`` where it dominates.  Returns the max relative deviation over
    those points and how many qualified.
    """
    if data.system.n_star != 1 or data.r != 2:
        raise ValidationError("two-soliton asymptotics need n* = 1 and r = 2")
    mode = CoordinateMode(mode)
    field = gamma_multi_soliton(data, normalize=True)
    a1, a2, a12 = _hirota_coefficients(data)
    diag = (a1, a2)
    # vacuum value of the normalized field, reached when every E -> 0
    DJ = build_D_tilde(data, "J")
    const = 1 - (np.hstack(list(data.c_I)) @ matcore.solve(DJ, np.vstack([d.T for d in data.d_J])))[0, 0]

    def growth(i):
        """Re Z_i as ``gx * x + gt * t``."""
        zp1, zm1 = mode.to_light_cone(1.0, 0.0)
        zp2, zm2 = mode.to_light_cone(0.0, 1.0)
        k, zeta = data.kappa[i], data.zeta[i]
        return (float(np.real(k * (zm1 / zeta + zeta * zp1))), float(np.real(k * (zm2 / zeta + zeta * zp2))))

    rates = [growth(0), growth(1)]
    worst, used = 0.0, 0
    for t in t_values:
        xs = []
        for i in (0, 1):
            gx, gt = rates[i]
            if abs(gx) < 1e-12:
                continue
            x0 = (-np.log(abs(diag[i])) - gt * t) / gx
            xs.append(np.linspace(x0 - half_width / abs(gx), x0 + half_width / abs(gx), n_samples))
        for x in np.concatenate(xs) if xs else []:
            zp, zm = mode.to_light_cone(x, t)
            z = (zp, zm)
            mods = [abs(eval_E(data, 1, i, z)) for i in (0, 1)]
            far_terms = []
            for j, i in ((0, 1), (1, 0)):
                # size of the terms dropped when soliton j is far from the point
                if mods[j] < 1:
                    far_terms.append(mods[j] * max(abs(diag[j]), abs(a12 / diag[i])))
                else:
                    far_terms.append(max(1 / abs(diag[j]), abs(diag[i] / a12)) / mods[j])
            far = int(np.argmin(far_terms))
            if far_terms[far] > cross_tol:
                continue
            near = 1 - far
            hs = list(diag)
            if mods[far] >= 1:
                hs[near] = a12 / diag[far]
            for a in range(1, data.system.p + 1):
                pred = const
                for i in (0, 1):
                    pred *= (1 + eval_E(data, a + 1, i, z) * hs[i]) / (1 + eval_E(data, a, i, z) * hs[i])
                try:
                    val = field(a, zp, zm)[0, 0]
                except Exception:  # singular points are skipped, not judged
                    continue
                worst = max(worst, abs(val - pred) / (1 + abs(pred)))
                used += 1
    return {"max_deviation": worst, "points": used}


# --- reality and kinematics ------------------------------------------------------------------

@dataclass(frozen=True)
class RealityCheckData:
    H_prime: np.ndarray
    exp_delta: complex


@dataclass(frozen=True)
class RealityReport:
    condition_norm: float
    grid_unitarity_norm: float
    pairing_violation: float
    pairing_ok: bool
    split: RealityCheckData
    split_consistency: float


def reality_split(data: SolitonData) -> RealityCheckData:
    """``H = H' exp(delta)`` with the closed form of ``exp(delta)``."""
    _require_one(data)
    s = data.system
    q = data.mu[0] / data.nu[0]
    exp_delta = (1 - q * s.eps(data.I[0] + data.J[0])) / (1 - q * s.eps(data.I[0] + data.K[0]))
    return RealityCheckData(one_soliton_H(data) / exp_delta, complex(exp_delta))


def check_reality_compact(data: SolitonData, x_range=(-4.0, 4.0), t_range=(-4.0, 4.0),
                          nx: int = 33, nt: int = 33) -> RealityReport:
    """Compact-reality diagnostics for ``r = 1`` on a Euclidean ``(x, t)`` grid."""
    if data.r != 1:
        raise ValidationError("check_reality_compact supports r = 1 only")
    H = one_soliton_H(data)
    split = reality_split(data)
    cond = matcore.max_norm(H.conj().T - data.system.eps(data.rho[0]) * H)
    violation = abs(np.conj(data.mu[0]) - data.nu[0])
    field = gamma_one_soliton(data)
    eye = np.eye(data.system.n_star)
    worst = 0.0
    for x in np.linspace(*x_range, nx):
        for t in np.linspace(*t_range, nt):
            for a in range(1, data.system.p + 1):
                try:
                    g = field.at(a, (x, t), CoordinateMode.EUCLIDEAN)
                except Exception:
                    continue
                worst = max(worst, matcore.max_norm(g.conj().T @ g - eye))
    return RealityReport(
        condition_norm=cond,
        grid_unitarity_norm=worst,
        pairing_violation=float(violation),
        pairing_ok=bool(violation <= 1e-12 * max(1.0, abs(data.nu[0]))),
        split=split,
        split_consistency=matcore.max_norm(split.H_prime * split.exp_delta - H),
    )


def compact_soliton_data(system: TodaSystem, theta: float, I: int, J: int, K: int,
                         c_I, d_J, hermitian) -> SolitonData:
    """One-soliton data with ``nu = conj(mu)``, ``|mu| = 1`` and ``H^dagger = eps^rho H``.

    ``H`` is set to ``eps^(-rho/2) S`` for the Hermitian part of ``hermitian``,
    and ``d_K`` is solved from it.
    """
    mu = np.exp(1j * theta)
    nu = np.conj(mu)
    S = np.asarray(hermitian, dtype=complex)
    S = (S + S.conj().T) / 2
    rho = K - J
    H = system.eps(-rho / 2) * S
    c_I = np.asarray(c_I, dtype=complex)
    d_J = np.asarray(d_J, dtype=complex)
    q = mu / nu
    exp_delta = (1 - q * system.eps(I + J)) / (1 - q * system.eps(I + K))
    # H = (d_J^T c)^-1 d_K^T c exp(delta)  =>  d_K^T = d_J^T c (H / exp(delta)) c^-1
    d_K = (d_J.T @ c_I @ matcore.solve(c_I.T, (H / exp_delta).T).T).T
    return SolitonData(system, [mu], [nu], [I], [J], [K], [c_I], [d_J], [d_K])


@dataclass(frozen=True)
class Kinematics:
    mode: CoordinateMode
    velocity: float
    sign: int
    profile_deviation: float


def soliton_kinematics(data: SolitonData, i: int, mode, samples=None) -> Kinematics:
    """Velocity of soliton ``i`` (0-based) and a check of ``Z_i`` against the travelling-wave profile."""
    mode = CoordinateMode(mode)
    zeta, kappa = complex(data.zeta[i]), float(data.kappa[i])
    if mode is CoordinateMode.EUCLIDEAN:
        if abs(abs(zeta) - 1) > 1e-9:
            raise ValidationError(f"euclidean kinematics need |zeta| = 1, got |zeta| = {abs(zeta):.12g}")
        if abs(zeta.real) < 1e-12:
            raise ValidationError("euclidean kinematics need Re zeta != 0")
        v = zeta.imag / zeta.real
        sign = 1 if zeta.real > 0 else -1

        def profile(x, t):
            return sign * 2 * kappa * (x - v * t) / np.sqrt(1 + v * v)
    elif mode is CoordinateMode.LORENTZIAN:
        if abs(zeta.imag) > 1e-9:
            raise ValidationError(f"lorentzian kinematics need real zeta, got Im zeta = {zeta.imag:.3e}")
        zr = zeta.real
        v = (zr - 1 / zr) / (zr + 1 / zr)
        sign = 1 if zr > 0 else -1

        def profile(x, t):
            return sign * 2 * kappa * (x + v * t) / np.sqrt(1 - v * v)
    else:
        raise ValidationError("kinematics need a euclidean or lorentzian coordinate mode")
    if samples is None:
        rng = np.random.default_rng(0)
        samples = rng.uniform(-3, 3, size=(16, 2))
    worst = 0.0
    for x, t in samples:
        zp, zm = mode.to_light_cone(x, t)
        Z = kappa * (zm / zeta + zeta * zp)
        prof = profile(x, t)
        worst = max(worst, abs(Z - prof) / (1 + abs(prof)))
    return Kinematics(mode, float(v), sign, float(worst))


def field_for(data: SolitonData, kind: str, normalize: bool = False) -> GammaField:
    """Dispatch by solution kind name."""
    if kind == "soliton_e28":
        return gamma_soliton_e28(data)
    if kind == "one_soliton":
        return gamma_one_soliton(data)
    if kind == "multi_soliton":
        return gamma_multi_soliton(data, normalize)
    raise ValidationError(f"unknown soliton kind {kind!r}")


__all__ = [name for name in dir() if not name.startswith("_") and name not in ("annotations", "log")]
