"""Scenario runner: load check suites from JSON, execute, emit reports.

A scenario file pins a name, a 64-bit seed, a truncation order, named
tolerances and an ordered list of checks.  Every check draws its randomness
from a generator derived by hashing the scenario seed with the check name,
so reruns with an equal seed are bit-reproducible.  Failing checks never
stop the run; their records carry the failure.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from . import brst, galilei, qplane, series, wigner
from . import krein as krein_mod

__all__ = [
    "Scenario",
    "CheckSpec",
    "CheckRecord",
    "Report",
    "ScenarioParseError",
    "UnknownCheckError",
    "load_scenario",
    "run_scenario",
    "emit_report",
    "series_from_json",
    "series_to_json",
    "available_checks",
    "DEFAULT_TOLERANCES",
]

DEFAULT_TOLERANCES = {
    "default": 1e-10,
    "witness": 1e-10,
    "parseval": 1e-8,
    "grid_exact": 1e-11,
}

ENV_PREFIX = "OPALG_TOL_"


class ScenarioParseError(ValueError):
    pass


class UnknownCheckError(ValueError):
    pass


@dataclass(frozen=True)
class CheckSpec:
    check: str
    params: Dict
    independent: bool = True


@dataclass(frozen=True)
class Scenario:
    name: str
    seed: int
    truncation_order: int
    tolerances: Dict[str, float]
    checks: Tuple[CheckSpec, ...]


@dataclass
class CheckRecord:
    name: str
    status: str                  # pass | fail | error
    value: str
    tolerance: str
    wall_ms: float


@dataclass
class Report:
    scenario: str
    seed: int
    records: List[CheckRecord] = field(default_factory=list)

    @property
    def counts(self) -> Dict[str, int]:
        out = {"pass": 0, "fail": 0, "error": 0}
        for r in self.records:
            out[r.status] += 1
        return out

    @property
    def all_passed(self) -> bool:
        c = self.counts
        return c["fail"] == 0 and c["error"] == 0


# ---------------------------------------------------------------------------
# serialization helpers


def series_from_json(data) -> series.FormalSeries:
    """Series from arrays of [re, im] pairs or nested arrays for matrices."""
    def decode(entry):
        arr = np.asarray(entry, dtype=float)
        if arr.ndim == 1 and arr.shape == (2,):
            return complex(arr[0], arr[1])
        if arr.ndim >= 2 and arr.shape[-1] == 2:
            return arr[..., 0] + 1j * arr[..., 1]
        raise ScenarioParseError(f"cannot decode series coefficient {entry!r}")
    return series.FormalSeries([decode(entry) for entry in data])


def series_to_json(s: series.FormalSeries):
    out = []
    for c in s.coeffs:
        if isinstance(c, np.ndarray):
            out.append(np.stack([c.real, c.imag], axis=-1).tolist())
        else:
            out.append([c.real, c.imag])
    return out


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


# ---------------------------------------------------------------------------
# check context and registry


@dataclass
class CheckContext:
    rng: np.random.Generator
    truncation_order: int
    tolerances: Dict[str, float]

    def tol(self, name: str = "default") -> float:
        return self.tolerances.get(name, self.tolerances["default"])


@dataclass
class CheckResult:
    passed: bool
    value: object
    tolerance: Optional[float] = None


CheckFn = Callable[[Dict, CheckContext], CheckResult]
_REGISTRY: Dict[str, CheckFn] = {}


def register(name: str):
    def wrap(fn: CheckFn) -> CheckFn:
        _REGISTRY[name] = fn
        return fn
    return wrap


def available_checks() -> List[str]:
    return sorted(_REGISTRY)


@register("series.is_positive")
def _check_is_positive(params, ctx):
    b = series_from_json(params["b"])
    expect = params.get("expect", "positive")
    verdict = series.is_positive(b, tol=ctx.tol())
    got = "positive" if verdict.positive else "not_positive"
    return CheckResult(passed=(got == expect), value=got, tolerance=ctx.tol())


@register("series.witness_roundtrip")
def _check_witness_roundtrip(params, ctx):
    count = int(params.get("count", 50))
    order = int(params.get("order", ctx.truncation_order))
    tol = ctx.tol("witness")
    worst = 0.0
    for _ in range(count):
        c = series.FormalSeries(
            ctx.rng.normal(size=order + 1) + 1j * ctx.rng.normal(size=order + 1))
        if abs(c.coeffs[0]) < 0.1:
            c = series.series_add(c, series.FormalSeries.constant(1.0, order))
        b = series.series_mul(series.series_star(c), c)
        verdict = series.is_positive(b, tol=tol)
        if not verdict.positive:
            return CheckResult(passed=False, value=f"not_positive@{verdict.failure_order}")
        redone = series.series_mul(series.series_star(verdict.witness),
                                   verdict.witness)
        worst = max(worst, (redone - b).max_abs())
    return CheckResult(passed=worst <= tol, value=worst, tolerance=tol)


@register("krein.invariants")
def _check_krein_invariants(params, ctx):
    signature = tuple(params.get("signature", (1, 1)))
    samples = int(params.get("samples", 100))
    tol = ctx.tol()
    gram = np.diag([1.0] * signature[0] + [-1.0] * signature[1])
    K = krein_mod.make_krein(gram)
    J = krein_mod.fundamental_symmetry(K)
    worst = np.max(np.abs(J.matrix @ J.matrix - np.eye(K.dim)))
    worst = max(worst, float(np.min(np.linalg.eigvalsh(
        krein_mod.wick_rotate(K, J))) <= 0))
    n = K.dim
    for _ in range(samples):
        A = ctx.rng.normal(size=(n, n)) + 1j * ctx.rng.normal(size=(n, n))
        B = ctx.rng.normal(size=(n, n)) + 1j * ctx.rng.normal(size=(n, n))
        adj = krein_mod.krein_adjoint(K, A)
        worst = max(worst, float(np.max(np.abs(
            krein_mod.krein_adjoint(K, adj) - A))))
        worst = max(worst, float(np.max(np.abs(
            krein_mod.krein_adjoint(K, A @ B)
            - krein_mod.krein_adjoint(K, B) @ krein_mod.krein_adjoint(K, A)))))
    return CheckResult(passed=worst <= tol, value=float(worst), tolerance=tol)


_MODELS = {
    "null_pair": brst.null_pair_toy,
    "gupta_bleuler": brst.gupta_bleuler_toy,
    "two_pair": brst.two_pair_model,
}


@register("brst.physical_space")
def _check_physical_space(params, ctx):
    model = params.get("model", "gupta_bleuler")
    B = _MODELS[model]()
    quotient = brst.physical_space(B)
    expect = params.get("expect_dim")
    ok = True if expect is None else quotient.dim == int(expect)
    return CheckResult(passed=ok, value=f"quotient_dim={quotient.dim}")


@register("brst.observables")
def _check_observables(params, ctx):
    model = params.get("model", "gupta_bleuler")
    variant = params.get("variant", "even_ghost")
    B = _MODELS[model]()
    algebra = brst.observable_algebra(B, variant)
    expect = params.get("expect_dim")
    ok = True if expect is None else algebra.quotient_dim == int(expect)
    return CheckResult(passed=ok, value=f"quotient_dim={algebra.quotient_dim}")


@register("brst.deform_stability")
def _check_deform_stability(params, ctx):
    model = params.get("model", "two_pair")
    order = int(params.get("order", 3))
    samples = int(params.get("samples", 20))
    B = _MODELS[model]()
    gens = brst.deformation_generators(B)
    if params.get("mode", "solved") == "rescale" or not gens:
        coeffs = [B.Q, B.Q] + [np.zeros_like(B.Q)] * (order - 1)
        q_series = series.FormalSeries(coeffs[: order + 1])
    else:
        weights = ctx.rng.normal(size=len(gens))
        Q1 = sum(w * g for w, g in zip(weights, gens))
        q_series = series.FormalSeries(
            [B.Q, Q1] + [np.zeros_like(B.Q)] * (order - 1))
    D = brst.validate_deformation(B, q_series)
    report = brst.deform_check(D, samples=samples, rng=ctx.rng)
    items = ",".join("ok" if p else "FAIL" for p in report.items_passed)
    return CheckResult(passed=report.all_passed, value=items)


@register("galilei.cocycle")
def _check_cocycle(params, ctx):
    triples = int(params.get("triples", 200))
    tol = ctx.tol()
    worst = 0.0
    for _ in range(triples):
        elems = []
        for _ in range(3):
            M = ctx.rng.normal(size=(3, 3))
            Q, _ = np.linalg.qr(M)
            if np.linalg.det(Q) < 0:
                Q[:, 0] = -Q[:, 0]
            elems.append(galilei.make_galilei(Q, ctx.rng.normal(size=3),
                                              ctx.rng.normal(size=3),
                                              ctx.rng.normal()))
        r, rp, rpp = elems
        lhs = galilei.bargmann_exponent(r, rp) \
            + galilei.bargmann_exponent(galilei.galilei_compose(r, rp), rpp)
        rhs = galilei.bargmann_exponent(rp, rpp) \
            + galilei.bargmann_exponent(r, galilei.galilei_compose(rp, rpp))
        worst = max(worst, abs(lhs - rhs))
    return CheckResult(passed=worst <= tol, value=worst, tolerance=tol)


@register("galilei.commutators")
def _check_commutators(params, ctx):
    points = int(params.get("points", 32))
    p_max = float(params.get("p_max", 10.0))
    grid = galilei.momentum_grid(points, p_max)
    report = galilei.generator_commutators(float(params.get("mass", 1.0)), grid)
    tol = ctx.tol("grid_exact")
    worst_exact = report.max_deviation(galilei.EXACT_BRACKETS)
    return CheckResult(passed=worst_exact <= tol, value=worst_exact, tolerance=tol)


@register("galilei.commutator_convergence")
def _check_convergence(params, ctx):
    sizes = [int(s) for s in params.get("sizes", (32, 64))]
    p_max = float(params.get("p_max", 10.0))
    orders = galilei.commutator_convergence(float(params.get("mass", 1.0)),
                                            sizes, p_max)
    flat = [o for seq in orders.values() for o in seq]
    lo, hi = min(flat), max(flat)
    ok = 1.8 <= lo and hi <= 2.2
    return CheckResult(passed=ok, value=f"orders[{lo:.3f},{hi:.3f}]")


@register("galilei.clifford")
def _check_clifford(params, ctx):
    cl = galilei.clifford_generators()
    worst = 0.0
    for i, gi in enumerate(cl.gammas):
        for j, gj in enumerate(cl.gammas):
            target = 2.0 * (i == j) * np.eye(4)
            worst = max(worst, float(np.max(np.abs(gi @ gj + gj @ gi - target))))
    tol = 1e-12
    return CheckResult(passed=worst <= tol, value=worst, tolerance=tol)


@register("galilei.levy_leblond_shell")
def _check_shell_determinant(params, ctx):
    mass = float(params.get("mass", 1.0))
    count = int(params.get("count", 100))
    off = float(params.get("off_shell", 0.5))
    L = galilei.levy_leblond_matrices(mass)
    worst_on = 0.0
    worst_off = np.inf
    for _ in range(count):
        p = ctx.rng.uniform(-2, 2, size=3)
        eps = float(p @ p) / (2 * mass)
        worst_on = max(worst_on, abs(np.linalg.det(
            galilei.levy_leblond_symbol(L, eps, p))))
        worst_off = min(worst_off, abs(np.linalg.det(
            galilei.levy_leblond_symbol(L, eps + off, p))))
    ok = worst_on <= 1e-9 and worst_off > 1e-6
    return CheckResult(passed=ok, value=f"on={worst_on:.3e},off={worst_off:.3e}")


@register("wigner.parseval")
def _check_parseval(params, ctx):
    kind = params.get("kind", "galilean")
    n = int(params.get("points", 16))
    mass = float(params.get("mass", 1.0))
    spacing = float(params.get("spacing", 0.4))
    reweight = params.get("reweight", "none")
    times = params.get("times", (0.0, 1.0))
    shell = wigner.make_shell(kind, mass, n, spacing)
    defect = max(wigner.isometry_defect(shell, wigner.reciprocal_slice(shell, t),
                                        reweight) for t in times)
    tol = ctx.tol("parseval")
    mode = params.get("expect", "isometry")
    ok = defect <= tol if mode == "isometry" else defect > float(params.get("floor", 0.05))
    result = CheckResult(passed=ok, value=float(defect), tolerance=tol)
    dump = params.get("dump_field")
    if dump:
        f = wigner.gaussian_family(shell, width=0.5, radius=0.0)[0]
        grid = wigner.reciprocal_slice(shell, float(times[0]))
        _dump_field(dump, grid, wigner.restricted_inverse_fourier(f, grid))
    return result


@register("wigner.two_particle")
def _check_two_particle(params, ctx):
    kind = params.get("kind", "relativistic")
    mass = float(params.get("mass", 1.0))
    samples = int(params.get("samples", 1000))
    shell = wigner.make_shell(kind, mass, int(params.get("points", 9)),
                              float(params.get("spacing", 0.5)))
    stats = wigner.two_particle_mass_spectrum(shell, samples, rng=ctx.rng)
    ok = stats.min >= 2 * mass - 1e-12 and abs(stats.threshold - 2 * mass) <= 1e-12
    return CheckResult(passed=ok, value=f"min={stats.min:.6f}")


@register("wigner.angular")
def _check_angular(params, ctx):
    name = params.get("amplitude", "isotropic")
    l_max = int(params.get("l_max", 4))
    if name == "isotropic":
        amp = lambda th, ph: np.ones_like(th, dtype=complex)
        main_l = 0
    elif name == "cos_theta":
        amp = lambda th, ph: np.cos(th).astype(complex)
        main_l = 1
    else:
        raise ValueError(f"unknown amplitude {name!r}")
    report = wigner.angular_decomposition(amp, l_max)
    leakage = sum(v for l, v in report.channel_norms.items() if l != main_l)
    tol = ctx.tol("parseval")
    return CheckResult(passed=leakage <= tol, value=float(leakage), tolerance=tol)


@register("qplane.normal_form")
def _check_normal_form(params, ctx):
    word = list(params.get("word", "yx"))
    q = _decode_q(params.get("q", {"N": 3, "k": 1}))
    poly = qplane.qplane_normal_form(word, q)
    ((a, b), _), = poly.terms.items()
    expect = params.get("expect_monomial")
    ok = True if expect is None else (a, b) == tuple(expect)
    return CheckResult(passed=ok, value=f"x^{a}y^{b}")


@register("qplane.center")
def _check_center(params, ctx):
    q = _decode_q(params["q"])
    max_deg = int(params.get("max_deg", 6))
    central = qplane.center_probe(q, max_deg)
    if isinstance(q, qplane.RootOfUnity) and q.N > 1:
        expected = [(a, b) for total in range(1, max_deg + 1)
                    for a in range(total + 1) for b in [total - a]
                    if a % q.N == 0 and b % q.N == 0]
        ok = sorted(central) == sorted(expected)
    else:
        ok = central == []
    return CheckResult(passed=ok, value=f"count={len(central)}")


@register("qplane.coaction")
def _check_coaction(params, ctx):
    q = _decode_q(params["q"])
    max_deg = int(params.get("max_deg", 3))
    perturb = bool(params.get("perturb_ab", False))
    try:
        report = qplane.glq2_coaction_check(q, max_deg, perturb_ab=perturb)
        ok = not perturb and report.preserved
        value = f"preserved,words={report.words_checked}"
    except qplane.RelationViolatedError as exc:
        ok = perturb
        value = f"violated@deg{exc.degree}"
    return CheckResult(passed=ok, value=value)


def _decode_q(data):
    if isinstance(data, dict):
        return qplane.RootOfUnity(N=int(data["N"]), k=int(data.get("k", 1)))
    if isinstance(data, (list, tuple)):
        return complex(data[0], data[1])
    return complex(data)


def _dump_field(path: str, grid: wigner.SliceGrid, values: np.ndarray):
    points = grid.points()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x1,x2,x3,re_psi,im_psi\n")
        for (x1, x2, x3), v in zip(points, values):
            fh.write(f"{_fmt(float(x1))},{_fmt(float(x2))},{_fmt(float(x3))},"
                     f"{_fmt(float(v.real))},{_fmt(float(v.imag))}\n")


# ---------------------------------------------------------------------------
# loading and running


def _env_tolerances() -> Dict[str, float]:
    out = {}
    for key, val in os.environ.items():
        if key.startswith(ENV_PREFIX):
            out[key[len(ENV_PREFIX):].lower()] = float(val)
    return out


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(
            f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    except OSError as exc:
        raise ScenarioParseError(f"{path}: {exc}") from exc
    for key in ("name", "seed", "checks"):
        if key not in data:
            raise ScenarioParseError(f"{path}: missing required key {key!r}")
    tolerances = dict(DEFAULT_TOLERANCES)
    tolerances.update(_env_tolerances())
    tolerances.update({k: float(v) for k, v in data.get("tolerances", {}).items()})
    checks = []
    for i, entry in enumerate(data["checks"]):
        if "check" not in entry:
            raise ScenarioParseError(f"{path}: checks[{i}] has no 'check' key")
        name = entry["check"]
        if name not in _REGISTRY:
            raise UnknownCheckError(f"{path}: unknown check {name!r}")
        checks.append(CheckSpec(check=name, params=entry.get("params", {}),
                                independent=bool(entry.get("independent", True))))
    return Scenario(name=str(data["name"]), seed=int(data["seed"]),
                    truncation_order=int(data.get("truncation_order", 8)),
                    tolerances=tolerances, checks=tuple(checks))


def _derive_rng(seed: int, check_name: str) -> np.random.Generator:
    digest = hashlib.sha256(f"{seed}:{check_name}".encode()).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "little"))


def _run_one(scenario: Scenario, spec: CheckSpec) -> CheckRecord:
    ctx = CheckContext(rng=_derive_rng(scenario.seed, spec.check),
                       truncation_order=scenario.truncation_order,
                       tolerances=scenario.tolerances)
    start = time.perf_counter()
    try:
        result = _REGISTRY[spec.check](spec.params, ctx)
        status = "pass" if result.passed else "fail"
        value = _fmt(result.value)
        tolerance = _fmt(result.tolerance) if result.tolerance is not None else ""
    except Exception as exc:  # captured into the report, never aborts the run
        status = "error"
        value = f"{type(exc).__name__}: {exc}"
        tolerance = ""
    wall_ms = (time.perf_counter() - start) * 1e3
    return CheckRecord(name=spec.check, status=status, value=value,
                       tolerance=tolerance, wall_ms=wall_ms)


def run_scenario(scenario, jobs: int = 1,
                 seed_override: Optional[int] = None) -> Report:
    """Execute all checks in declared order; never aborts on check failure."""
    if isinstance(scenario, str):
        scenario = load_scenario(scenario)
    if seed_override is not None:
        scenario = Scenario(name=scenario.name, seed=int(seed_override),
                            truncation_order=scenario.truncation_order,
                            tolerances=scenario.tolerances,
                            checks=scenario.checks)
    report = Report(scenario=scenario.name, seed=scenario.seed)
    if jobs <= 1:
        for spec in scenario.checks:
            report.records.append(_run_one(scenario, spec))
        return report
    # dependent checks act as barriers between concurrent batches
    batch: List[CheckSpec] = []

    def flush():
        if not batch:
            return
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            report.records.extend(pool.map(lambda s: _run_one(scenario, s), batch))
        batch.clear()

    for spec in scenario.checks:
        if spec.independent:
            batch.append(spec)
        else:
            flush()
            report.records.append(_run_one(scenario, spec))
    flush()
    return report


def emit_report(report: Report, fmt: str = "text") -> str:
    """Render a report; csv output is byte-identical across equal-seed runs.

    The csv ms column is pinned to zero so that reruns compare equal; the
    text rendering carries the measured wall time instead.
    """
    if fmt == "csv":
        lines = ["check,status,value,tolerance,ms"]
        for r in report.records:
            value = r.value.replace(",", ";")
            lines.append(f"{r.name},{r.status},{value},{r.tolerance},0")
        return "\n".join(lines) + "\n"
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")
    width = max((len(r.name) for r in report.records), default=10)
    lines = [f"scenario {report.scenario} (seed {report.seed})"]
    for r in report.records:
        tol = f" tol={r.tolerance}" if r.tolerance else ""
        lines.append(f"  {r.name:<{width}}  {r.status:<5}  value={r.value}"
                     f"{tol}  [{r.wall_ms:.1f} ms]")
    c = report.counts
    lines.append(f"summary: {c['pass']} passed, {c['fail']} failed, "
                 f"{c['error']} errors")
    return "\n".join(lines) + "\n"
