"""Grid sampling, verification reports and randomized check campaigns."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import dressing, matcore, solitons
from .errors import SingularFieldError, TodaError, ValidationError
from .model import CoordinateMode, GammaField, build_system, toda_residual_terms
from .tolerances import TOLERANCES, passes

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridSpec:
    """Rectangular grid in the mode's native coordinates.

    ``x``/``t`` are ``z+``/``z-`` in independent mode.
    """

    mode: CoordinateMode = CoordinateMode.INDEPENDENT
    x_range: tuple[float, float] = (-1.0, 1.0)
    t_range: tuple[float, float] = (-1.0, 1.0)
    nx: int = 5
    nt: int = 5
    fd_step: float = 1e-3

    def __post_init__(self):
        object.__setattr__(self, "mode", CoordinateMode(self.mode))
        object.__setattr__(self, "x_range", tuple(float(v) for v in self.x_range))
        object.__setattr__(self, "t_range", tuple(float(v) for v in self.t_range))
        if self.nx < 1 or self.nt < 1:
            raise ValidationError("nx and nt must be positive")
        if not all(np.isfinite(self.x_range + self.t_range)):
            raise ValidationError("grid ranges must be finite")
        if not self.fd_step > 0:
            raise ValidationError("fd_step must be positive")
        spacings = [abs(r[1] - r[0]) / (k - 1) for r, k in ((self.x_range, self.nx), (self.t_range, self.nt)) if k > 1]
        if spacings and self.fd_step >= min(spacings) / 4:
            raise ValidationError(f"fd_step {self.fd_step} must be below a quarter of the grid spacing {min(spacings)}")

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(*self.x_range, self.nx) if self.nx > 1 else np.array([self.x_range[0]])

    @property
    def ts(self) -> np.ndarray:
        return np.linspace(*self.t_range, self.nt) if self.nt > 1 else np.array([self.t_range[0]])

    def points(self):
        for ix, x in enumerate(self.xs):
            for it, t in enumerate(self.ts):
                yield ix, it, (float(x), float(t))


@dataclass
class FieldGrid:
    """Sampled ``Gamma_alpha``: ``values[alpha-1, ix, it]`` is ``n* x n*``; NaN where invalid."""

    spec: GridSpec
    values: np.ndarray
    validity: np.ndarray
    residual_norms: np.ndarray | None = None

    @property
    def p(self) -> int:
        return self.values.shape[0]

    @property
    def n_star(self) -> int:
        return self.values.shape[-1]


def sample_field(field: GammaField, spec: GridSpec) -> FieldGrid:
    p, n = field.system.p, field.system.n_star
    values = np.full((p, spec.nx, spec.nt, n, n), np.nan + 0j)
    validity = np.zeros((spec.nx, spec.nt), dtype=bool)
    for ix, it, pt in spec.points():
        try:
            blocks = [field.at(a, pt, spec.mode) for a in range(1, p + 1)]
        except SingularFieldError:
            continue
        if not all(np.all(np.isfinite(b)) for b in blocks):
            continue
        values[:, ix, it] = blocks
        validity[ix, it] = True
    return FieldGrid(spec, values, validity)


@dataclass
class CheckResult:
    name: str
    max_norm: float
    mean_norm: float
    min_norm: float
    points_tested: int
    passed: bool = dc_field(init=False)

    def __post_init__(self):
        self.passed = bool(self.points_tested > 0 and passes(self.name, self.max_norm, self.min_norm))

    @property
    def tolerance(self):
        return TOLERANCES[self.name][1]

    def merge(self, other: "CheckResult") -> "CheckResult":
        n = self.points_tested + other.points_tested
        mean = (self.mean_norm * self.points_tested + other.mean_norm * other.points_tested) / n if n else 0.0
        return CheckResult(self.name, max(self.max_norm, other.max_norm), mean,
                           min(self.min_norm, other.min_norm), n)

    def to_dict(self) -> dict:
        kind, tol = TOLERANCES[self.name]
        return {"max_norm": self.max_norm, "mean_norm": self.mean_norm, "min_norm": self.min_norm,
                "points_tested": self.points_tested, "tolerance": list(tol) if kind == "range" else tol,
                "comparison": kind, "pass": self.passed}

    def summary_line(self) -> str:
        kind, tol = TOLERANCES[self.name]
        stat = self.min_norm if kind == "ge" else self.max_norm
        op = {"le": "<=", "ge": ">=", "range": "in"}[kind]
        return (f"{'PASS' if self.passed else 'FAIL'} {self.name}: {stat:.3e} {op} {tol} "
                f"({self.points_tested} points)")


def make_check(name: str, values) -> CheckResult:
    v = np.asarray(list(values), dtype=float)
    if v.size == 0:
        return CheckResult(name, float("nan"), float("nan"), float("nan"), 0)
    return CheckResult(name, float(v.max()), float(v.mean()), float(v.min()), int(v.size))


def make_median_check(name: str, values) -> CheckResult:
    """Range check applied to the median (Richardson ratios)."""
    v = np.asarray(list(values), dtype=float)
    if v.size == 0:
        return CheckResult(name, float("nan"), float("nan"), float("nan"), 0)
    med = float(np.median(v))
    return CheckResult(name, med, float(v.mean()), med, int(v.size))


@dataclass
class VerificationReport:
    checks: dict = dc_field(default_factory=dict)
    notes: dict = dc_field(default_factory=dict)

    def add(self, check: CheckResult):
        if check.name in self.checks:
            self.checks[check.name] = self.checks[check.name].merge(check)
        else:
            self.checks[check.name] = check

    def merge(self, other: "VerificationReport") -> "VerificationReport":
        out = VerificationReport(dict(self.checks), {**self.notes, **other.notes})
        for c in other.checks.values():
            out.add(c)
        return out

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def __getitem__(self, name) -> CheckResult:
        return self.checks[name]

    def to_dict(self) -> dict:
        return {"pass": self.passed,
                "checks": {k: self.checks[k].to_dict() for k in sorted(self.checks)},
                "notes": self.notes}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, default=_json_default)

    def summary_lines(self) -> list[str]:
        return [self.checks[k].summary_line() for k in sorted(self.checks)]


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"cannot serialise {type(o)}")


# --- residuals --------------------------------------------------------------------------------

def residual_norm(field: GammaField, alpha: int, point, step: float, mode) -> float:
    """Toda residual max-norm relative to ``1 +`` the largest entry of its three terms."""
    terms = toda_residual_terms(field, alpha, point, step, mode)
    scale = max(matcore.max_norm(terms[k]) for k in ("kinetic", "forward", "backward"))
    return matcore.max_norm(terms["residual"]) / (1.0 + scale)


def _richardson(field, alpha, point, step, mode):
    """``(norm(step), norm(step/2), ratio or None)``; ratio is None below the rounding floor."""
    r1 = residual_norm(field, alpha, point, step, mode)
    r2 = residual_norm(field, alpha, point, step / 2, mode)
    floor = 100 * matcore.EPS / (step / 2) ** 2
    ratio = r1 / r2 if r2 > floor else None
    return r1, r2, ratio


def residual_values(field: GammaField, points, step: float, mode=CoordinateMode.INDEPENDENT):
    """Residual norms and Richardson ratios over ``points`` for every ``alpha``."""
    norms, ratios, skipped = [], [], 0
    for pt in points:
        for a in range(1, field.system.p + 1):
            try:
                r1, _, ratio = _richardson(field, a, pt, step, mode)
            except SingularFieldError:
                skipped += 1
                continue
            norms.append(r1)
            if ratio is not None:
                ratios.append(ratio)
    return norms, ratios, skipped


def residual_report(field: GammaField, spec: GridSpec, name: str = "pde_residual",
                    ratio_name: str = "richardson_ratio") -> VerificationReport:
    """Toda residual at every valid interior grid point, with the Richardson sub-report."""
    grid = sample_field(field, spec)
    pts = []
    for ix, it, pt in spec.points():
        interior = (spec.nx < 3 or 0 < ix < spec.nx - 1) and (spec.nt < 3 or 0 < it < spec.nt - 1)
        if interior and grid.validity[ix, it]:
            pts.append(pt)
    norms, ratios, skipped = residual_values(field, pts, spec.fd_step, spec.mode)
    report = VerificationReport()
    report.add(make_check(name, norms))
    if ratios:
        report.add(make_median_check(ratio_name, ratios))
    report.notes[f"{name}_skipped_singular"] = skipped
    report.notes[f"{name}_ratios_below_floor"] = len(norms) - len(ratios)
    return report


def equivalence_report(fields: list[GammaField], spec: GridSpec, mode: str = "exact") -> VerificationReport:
    """Pointwise agreement of several fields on a grid (optionally up to one global scalar)."""
    if len(fields) < 2:
        raise ValidationError("equivalence needs at least two fields")
    system = fields[0].system
    if any((f.system.p, f.system.n_star) != (system.p, system.n_star) for f in fields):
        raise ValidationError("fields belong to different systems")
    grids = [sample_field(f, spec) for f in fields]
    valid = np.logical_and.reduce([g.validity for g in grids])
    idx = np.argwhere(valid)
    report = VerificationReport()
    name = "equivalence" if mode == "exact" else "equivalence_proportional"
    if mode not in ("exact", "proportional"):
        raise ValueError(f"unknown mode {mode!r}")
    devs = []
    ratios = []
    for k in range(1, len(grids)):
        ratio = 1.0
        if mode == "proportional":
            if idx.size == 0:
                continue
            # scalar ratio from the first valid point
            ix, it = idx[0]
            A = grids[0].values[:, ix, it]
            B = grids[k].values[:, ix, it]
            ratio = complex(np.vdot(A.ravel(), B.ravel()) / np.vdot(A.ravel(), A.ravel()))
            ratios.append(ratio)
        for ix, it in idx:
            for a in range(system.p):
                devs.append(matcore.rel_deviation(grids[k].values[a, ix, it], ratio * grids[0].values[a, ix, it]))
    report.add(make_check(name, devs))
    if ratios:
        report.notes["ratios"] = [[r.real, r.imag] for r in ratios]
    return report


# --- randomized campaign ----------------------------------------------------------------------

DEFAULT_RANGES = {"p": (2, 4), "n_star": (1, 3), "r": (1, 3)}
ANNULUS = (0.3, 3.0)
GENERATION_MARGIN = 1e-3  # pole gaps and D~ denominators kept this far from zero


def _annulus(rng, size):
    return rng.uniform(*ANNULUS, size) * np.exp(1j * rng.uniform(0, 2 * np.pi, size))


def _cnormal(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def random_soliton_data(rng: np.random.Generator, p: int, n_star: int, r: int,
                        inject_collision: bool = False, max_tries: int = 1000):
    """Rejection-sample valid :class:`SolitonData`; returns ``(data, rejected_draws)``."""
    system = build_system(p, n_star)
    rejected = 0
    for attempt in range(max_tries):
        mu, nu = _annulus(rng, r), _annulus(rng, r)
        if inject_collision and attempt == 0:
            nu[0] = mu[0] * system.eps(1)
        I = rng.integers(1, p + 1, r)
        J = rng.integers(1, p + 1, r)
        K = (J - 1 + rng.integers(1, p, r)) % p + 1
        c_I, d_J, d_K = _cnormal(rng, r, n_star, n_star), _cnormal(rng, r, n_star, n_star), _cnormal(rng, r, n_star, n_star)
        try:
            dressing.check_poles(p, mu, nu, rtol=GENERATION_MARGIN)
            for A in (J, K):
                if np.min(np.abs(solitons._d_tilde_denominators(system, mu, nu, I, A))) < GENERATION_MARGIN:
                    raise ValidationError("D~ denominator too small")
            data = solitons.SolitonData(system, mu, nu, I, J, K, c_I, d_J, d_K)
            if np.linalg.cond(solitons.build_D_tilde(data, "J")) > 1e8:
                raise ValidationError("D~(J) ill-conditioned")
        except ValidationError:
            rejected += 1
            continue
        return data, rejected
    raise RuntimeError("could not draw valid soliton data")


def _point_ok(fields, system, z):
    try:
        for f in fields:
            for a in range(1, system.p + 1):
                f(a, *z)
        return True
    except SingularFieldError:
        return False


def battery(data: solitons.SolitonData, rng: np.random.Generator, n_points: int = 10,
            fd_step: float = 1e-3, box: float = 1.0) -> VerificationReport:
    """Run every oracle on one soliton data set at ``n_points`` random real points."""
    system = data.system
    p, n = system.p, system.n_star
    dd = data.to_dressing_data()
    g_dress = dressing.gamma_dressing(system, dd)
    g_inv = dressing.gamma_inv_dressing(system, dd)
    g28 = solitons.gamma_soliton_e28(data)
    g_multi = solitons.gamma_multi_soliton(data, normalize=False)
    fields = [g_dress, g_inv, g28, g_multi]
    one = None
    if data.r == 1:
        one = (solitons.gamma_one_soliton(data), solitons.gamma_one_soliton(data, "R_prime"),
               solitons.symmetric_closed_form(data))
        fields.extend(one)

    points, resampled = [], 0
    while len(points) < n_points:
        z = tuple(rng.uniform(-box, box, 2))
        if _point_ok(fields, system, z):
            points.append(z)
        else:
            resampled += 1
            if resampled > 100 * n_points:
                raise RuntimeError("too many singular sample points")

    vals = {k: [] for k in TOLERANCES}
    eye = np.eye(n)
    for z in points:
        for a in range(1, p + 1):
            G, Gi = g_dress(a, *z), g_inv(a, *z)
            G28 = g28(a, *z)
            vals["dressing_vs_closed_form"].append(matcore.rel_deviation(G, G28))
            vals["inverse_pair"].append(max(matcore.max_norm(G @ Gi - eye), matcore.max_norm(Gi @ G - eye)))
            vals["multi_proportional"].append(matcore.rel_deviation(g_multi(a, *z), data.r * G28))
            R = dressing.build_R(system, dd, a, z)
            Rt = dressing.build_R(system, dd, a, z, tilde=True)
            conj = (matcore.scalar_block_diag(dd.nu ** (-a), n) @ R @ matcore.scalar_block_diag(dd.mu ** a, n))
            vals["conjugation_R"].append(matcore.rel_deviation(Rt, conj))
            vals["partition_vs_exponential"].append(
                matcore.rel_deviation(Rt, dressing.build_R(system, dd, a, z, tilde=True, method="partition")))
            vals["factorization_R_prime"].append(matcore.rel_deviation(Rt, solitons.factorized_R_tilde(data, a, z)))
            for i in range(data.r):
                e1, e2 = solitons.eval_E(data, a, i, z), solitons.eval_E_identity(data, a, i, z)
                vals["e_identity"].append(abs(e1 - e2) / (1 + abs(e1)))
            if one is not None:
                T, Rp, sym = (f(a, *z) for f in one)
                vals["one_soliton_T_vs_R_prime"].append(matcore.rel_deviation(T, Rp))
                vals["one_soliton_vs_symmetry"].append(matcore.rel_deviation(T, sym))
                if n == 1:
                    vals["abelian_one_soliton"].append(
                        abs(T[0, 0] - solitons.abelian_one_soliton(data, a, z)) / (1 + abs(T[0, 0])))

        state = dressing.DressingState(system, dd, z)
        gb = state.gamma_blocks()
        gib = state.gamma_inv_blocks()
        for a in range(1, p + 1):
            vals["eq13_gamma"].append(matcore.rel_deviation(gb[a - 1], g_dress(a, *z)))
            vals["eq13_gamma_inverse"].append(matcore.rel_deviation(gib[a - 1], g_inv(a, *z)))
        psi_inf = state.psi(np.inf)
        vals["psi_infinity"].append(matcore.rel_deviation(psi_inf, matcore.block_diag(gb)))
        lams = dressing.default_lambda_samples(dd)
        for lam in lams:
            prod = state.psi_inv(lam) @ state.psi(lam)
            vals["psi_inverse"].append(matcore.max_norm(prod - np.eye(system.n)))
        res = dressing.residue_norms(state)
        vals["residue_relations"].append(max(res.values()))
        bumped = state.P.copy()
        bumped[0] *= 1.01
        vals["residue_negative_control"].append(max(dressing.residue_norms(state, P=bumped).values()))
        gr = dressing.check_grading(system, dd, z, lams)
        vals["grading_omega_minus"].append(gr["omega_minus_fit"])
        vals["grading_omega_plus"].append(gr["omega_plus_fit"])
        vals["omega_plus_zero"].append(gr["omega_plus_zero"])
        vals["grading_negative_control"].append(gr["omega_minus_no_pole_fit"])

    norms, ratios, skipped = residual_values(g28, points, fd_step)
    vals["pde_residual"] = norms
    vals["richardson_ratio"] = ratios
    report = VerificationReport()
    report.notes["resampled_points"] = resampled
    report.notes["singular_residual_points"] = skipped
    if data.r >= 2:
        m_norms, m_ratios, _ = residual_values(g_multi, points, fd_step)
        vals["multi_pde_residual"] = m_norms
        vals["multi_richardson_ratio"] = m_ratios
    for name, v in vals.items():
        if not v:
            continue
        if name in ("richardson_ratio", "multi_richardson_ratio"):
            report.add(make_median_check(name, v))
        else:
            report.add(make_check(name, v))
    return report


@dataclass
class TrialRecord:
    index: int
    seed: list
    p: int
    n_star: int
    r: int
    rejected_draws: int
    passed: bool
    failed_checks: list
    error: str | None = None


@dataclass
class CampaignResult:
    report: VerificationReport
    trials: list
    rejected_draws: int

    def to_dict(self) -> dict:
        d = self.report.to_dict()
        d["trials"] = [t.__dict__ for t in self.trials]
        d["rejected_draws"] = self.rejected_draws
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, default=_json_default)


def campaign(seed: int, ranges: dict | None = None, trials: int = 20, n_points: int = 10,
             fd_step: float = 1e-3, inject_collision: tuple = ()) -> CampaignResult:
    """Seeded battery over random soliton data; each trial has its own spawned seed."""
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    ranges = {**DEFAULT_RANGES, **(ranges or {})}
    seqs = np.random.SeedSequence(seed).spawn(trials)
    total = VerificationReport()
    records, rejected_total = [], 0
    for k, seq in enumerate(seqs):
        rng = np.random.default_rng(seq)
        p = int(rng.integers(ranges["p"][0], ranges["p"][1] + 1))
        n_star = int(rng.integers(ranges["n_star"][0], ranges["n_star"][1] + 1))
        r = int(rng.integers(ranges["r"][0], ranges["r"][1] + 1))
        data, rejected = random_soliton_data(rng, p, n_star, r, inject_collision=k in inject_collision)
        rejected_total += rejected
        try:
            rep = battery(data, rng, n_points, fd_step)
        except (TodaError, RuntimeError, np.linalg.LinAlgError) as exc:
            records.append(TrialRecord(k, [seed, k], p, n_star, r, rejected, False, [], repr(exc)))
            continue
        failed = sorted(name for name, c in rep.checks.items() if not c.passed)
        records.append(TrialRecord(k, [seed, k], p, n_star, r, rejected, not failed, failed))
        total = total.merge(rep)
    total.notes = {"seed": seed, "trials": trials, "rejected_draws": rejected_total,
                   "failed_trials": [t.index for t in records if not t.passed]}
    return CampaignResult(total, records, rejected_total)
