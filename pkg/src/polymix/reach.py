"""Discrete-time set propagation and the bundled dynamic scenarios.

A reach scenario iterates ``x_{k+1} = reduce(step(x_k, k), q)`` from an
encoded initial set, recording interval bounds and complexity statistics at
every step.  A filter scenario runs the polynotopic Kalman iteration
against measurements of a simulated plant.  Both come with Monte-Carlo
containment checkers: sample concrete realizations of every uncertainty,
integrate them punctually through the same recursion, and assert they stay
inside the propagated enclosures step by step.

Bundled dynamics (forward Euler):

* ``vanderpol``  dx1 = x2, dx2 = (1 - x1^2) x2 - x1, with the square and
  the cubic-term product reduced in place;
* ``traffic``    three-road junction with min-type flow limits and one
  persistent uncertain inflow symbol shared by all steps;
* ``lotka``      prey-predator quadratic dynamics, optionally with the
  product term reduced (used by the filter).

Conditional-cell queries: fixing some signed symbols of a propagated
polynotope to +-1 slices out the reachable enclosure of the matching cell
of the initial dyadic paving, with no bisection of the dynamics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import nonlinear as nl
from . import polynotope as pn
from .errors import BlowUpError, ConfigError, DomainError
from .mixedenc import EncodingSpec, encode_interval
from .pkf import PkfConfig, PkfModel, pkf_step_detailed
from .symbols import SymbolProvider, SymbolType, provider, type_of

__all__ = [
    "InitComponent",
    "Scenario",
    "FilterScenario",
    "ReachTrace",
    "FilterTrace",
    "CellHull",
    "McReport",
    "run",
    "run_filter",
    "cell_hull",
    "mc_check",
    "mc_check_cell",
    "mc_check_filter",
    "scenario_from_config",
]


# --------------------------------------------------------------------------
# scenario descriptions
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class InitComponent:
    """Initial set of one state component: center +/- radius, encoded at
    ``level`` with ``flavor`` discrete symbols."""

    center: float
    radius: float
    level: int = 0
    flavor: SymbolType = SymbolType.SIGNED


@dataclass(frozen=True)
class Scenario:
    name: str
    dynamics: str
    h: float
    N: int
    q: int
    init: tuple
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.h <= 0:
            raise ConfigError("step size must be positive")
        if self.N < 0:
            raise ConfigError("step count must be nonnegative")
        if self.q < len(self.init):
            raise ConfigError("reduction order below state dimension")
        if self.dynamics not in DYNAMICS:
            raise ConfigError(f"unknown dynamics {self.dynamics!r}")

    @property
    def dim(self) -> int:
        return len(self.init)


@dataclass(frozen=True)
class FilterScenario:
    name: str
    h: float
    N: int
    q: int
    level: int
    init: tuple                      # (center, radius) pairs
    params: dict = field(default_factory=dict)
    state_noise_gain: float = 3e-3
    meas_gain: float = 1.5
    input: dict = field(default_factory=lambda: {"kind": "const", "value": 0.0})
    truth_x0: tuple = (22.0, 8.0)
    truth_method: str = "heun"
    seed: int = 0

    def __post_init__(self):
        if self.h <= 0 or self.N < 0 or self.level < 0:
            raise ConfigError("invalid filter scenario sizes")
        if self.q < len(self.init):
            raise ConfigError("reduction order below state dimension")
        if self.truth_method not in ("heun", "euler"):
            raise ConfigError(f"unknown truth integrator {self.truth_method!r}")

    def input_at(self, k: int) -> float:
        kind = self.input.get("kind", "const")
        if kind == "const":
            return float(self.input.get("value", 0.0))
        if kind == "pulse":
            on, off = int(self.input["on"]), int(self.input["off"])
            return float(self.input["value"]) if on <= k < off else 0.0
        raise ConfigError(f"unknown input kind {kind!r}")


# --------------------------------------------------------------------------
# dynamics registry
# --------------------------------------------------------------------------


class _Zero:
    """Identity step map; propagated sets stay constant (smoke testing)."""

    dim = None  # any state dimension
    defaults: dict = {}

    def __init__(self, scenario: Scenario, prov: SymbolProvider):
        pass

    def step(self, x: pn.Polynotope, k: int) -> pn.Polynotope:
        return x

    @staticmethod
    def sample_params(scenario, rng, count):
        return {}

    @staticmethod
    def concrete(scenario):
        return lambda X, k, theta: X


class _VanDerPol:
    dim = 2
    defaults: dict = {}

    def __init__(self, scenario: Scenario, prov: SymbolProvider):
        self.h, self.q, self.prov = scenario.h, scenario.q, prov

    def step(self, x: pn.Polynotope, k: int) -> pn.Polynotope:
        x1, x2 = x[0], x[1]
        sq = pn.reduce(pn.row_product(x, 0, 0), self.q, self.prov)
        cubic = pn.reduce(sq * x2, self.q, self.prov)
        dx = pn.vcat(x2, x2 - cubic - x1)
        return x + self.h * dx

    @staticmethod
    def sample_params(scenario, rng, count):
        return {}

    @staticmethod
    def concrete(scenario):
        h = scenario.h

        def step(X, k, theta):
            x1, x2 = X[:, 0], X[:, 1]
            return X + h * np.stack([x2, (1 - x1**2) * x2 - x1], axis=1)

        return step


class _Traffic:
    dim = 3
    defaults = {"T": 30.0, "c": 40.0, "v": 0.5, "xbar": 320.0, "w": 1.0 / 6.0,
                "p_lo": 4.0 / 3.0, "p_hi": 2.0}

    def __init__(self, scenario: Scenario, prov: SymbolProvider):
        self.h, self.q, self.prov = scenario.h, scenario.q, prov
        self.p = dict(self.defaults, **scenario.params)
        # one persistent inflow symbol, shared by every step
        mid = 0.5 * (self.p["p_lo"] + self.p["p_hi"])
        rad = 0.5 * (self.p["p_hi"] - self.p["p_lo"])
        self.inflow = encode_interval(mid, rad, EncodingSpec(0), prov)

    def step(self, x: pn.Polynotope, k: int) -> pn.Polynotope:
        p = self.p
        prov = self.prov
        x1, x2, x3 = x[0], x[1], x[2]
        lim = pn.punctual([p["c"]])
        inner1 = nl.minimum(lim, p["v"] * x1, prov=prov)
        inner2 = nl.minimum(
            2 * p["w"] * (p["xbar"] - x2),
            2 * p["w"] * (p["xbar"] - x3),
            prov=prov,
        )
        flow = nl.minimum(inner1, inner2, prov=prov)
        dx1 = (-1.0 / p["T"]) * flow + self.inflow
        dx2 = 0.5 * flow - nl.minimum(lim, p["v"] * x2, prov=prov)
        dx3 = 0.5 * flow - nl.minimum(lim, p["v"] * x3, prov=prov)
        return x + self.h * pn.vcat(dx1, dx2, dx3)

    @staticmethod
    def sample_params(scenario, rng, count):
        p = dict(_Traffic.defaults, **scenario.params)
        return {"inflow": rng.uniform(p["p_lo"], p["p_hi"], size=count)}

    @staticmethod
    def concrete(scenario):
        p = dict(_Traffic.defaults, **scenario.params)
        h = scenario.h

        def step(X, k, theta):
            x1, x2, x3 = X[:, 0], X[:, 1], X[:, 2]
            flow = np.minimum(
                np.minimum(p["c"], p["v"] * x1),
                np.minimum(2 * p["w"] * (p["xbar"] - x2),
                           2 * p["w"] * (p["xbar"] - x3)),
            )
            dx1 = -flow / p["T"] + theta["inflow"]
            dx2 = 0.5 * flow - np.minimum(p["c"], p["v"] * x2)
            dx3 = 0.5 * flow - np.minimum(p["c"], p["v"] * x3)
            return X + h * np.stack([dx1, dx2, dx3], axis=1)

        return step


class _Lotka:
    dim = 2
    defaults = {"a": 2.0, "b": 0.4, "c": 1.0, "d": 0.1, "reduce_product": False}

    def __init__(self, scenario: Scenario, prov: SymbolProvider):
        self.h, self.q, self.prov = scenario.h, scenario.q, prov
        self.p = dict(self.defaults, **scenario.params)

    def step(self, x: pn.Polynotope, k: int) -> pn.Polynotope:
        dx = lotka_field(x, 0.0, self.p, self.q if self.p["reduce_product"]
                         else None, self.prov)
        return x + self.h * dx

    @staticmethod
    def sample_params(scenario, rng, count):
        return {}

    @staticmethod
    def concrete(scenario):
        p = dict(_Lotka.defaults, **scenario.params)
        h = scenario.h

        def step(X, k, theta):
            return X + h * lotka_field_concrete(X, 0.0, p)

        return step


def lotka_field(x: pn.Polynotope, u, params: dict,
                reduce_q: int | None, prov: SymbolProvider) -> pn.Polynotope:
    """Prey-predator vector field; the quadratic coupling optionally reduced."""
    x1, x2 = x[0], x[1]
    prod = pn.row_product(x, 0, 1)
    if reduce_q is not None:
        prod = pn.reduce(prod, reduce_q, prov)
    dx1 = params["a"] * x1 - params["b"] * prod
    dx2 = (-params["c"]) * x2 + params["d"] * prod
    if isinstance(u, pn.Polynotope):
        dx2 = dx2 + u
    elif float(u) != 0.0:
        dx2 = dx2 + float(u)
    return pn.vcat(dx1, dx2)


def lotka_field_concrete(X: np.ndarray, u: float, params: dict) -> np.ndarray:
    x1, x2 = X[..., 0], X[..., 1]
    prod = x1 * x2
    return np.stack(
        [params["a"] * x1 - params["b"] * prod,
         -params["c"] * x2 + params["d"] * prod + u],
        axis=-1,
    )


DYNAMICS = {"vanderpol": _VanDerPol, "traffic": _Traffic, "lotka": _Lotka,
            "zero": _Zero}


# --------------------------------------------------------------------------
# reach runs
# --------------------------------------------------------------------------


@dataclass
class StepRecord:
    k: int
    lo: np.ndarray
    hi: np.ndarray
    monomial_count: int
    max_degree: int


@dataclass
class ReachTrace:
    scenario: Scenario
    states: list
    records: list
    discrete_ids: list  # per component: ids of its encoding's signed symbols

    @property
    def final(self) -> pn.Polynotope:
        return self.states[-1]


def _encode_initial(scenario, prov) -> tuple[pn.Polynotope, list]:
    parts, discrete = [], []
    for comp in scenario.init:
        enc = encode_interval(comp.center, comp.radius,
                              EncodingSpec(comp.level, comp.flavor), prov)
        discrete.append([int(i) for i in enc.I
                         if type_of(int(i)) == comp.flavor])
        parts.append(enc)
    return pn.vcat(*parts), discrete


def _record(k: int, x: pn.Polynotope) -> StepRecord:
    box = pn.box_hull(x)
    return StepRecord(k, box.lo, box.hi, x.gen_count, x.max_degree)


def run(scenario: Scenario, prov: SymbolProvider | None = None) -> ReachTrace:
    """Propagate the scenario, recording bounds and complexity per step."""
    prov = prov or provider()
    dyn = DYNAMICS[scenario.dynamics](scenario, prov)
    if dyn.dim is not None and dyn.dim != scenario.dim:
        raise ConfigError(
            f"{scenario.dynamics} needs {dyn.dim} components, got {scenario.dim}"
        )
    x, discrete = _encode_initial(scenario, prov)
    states, records = [x], [_record(0, x)]
    for k in range(scenario.N):
        x = pn.reduce(dyn.step(x, k), scenario.q, prov)
        if not (np.isfinite(x.c).all() and np.isfinite(x.R).all()):
            raise BlowUpError(k + 1)
        states.append(x)
        records.append(_record(k + 1, x))
    return ReachTrace(scenario, states, records, discrete)


# --------------------------------------------------------------------------
# conditional cells
# --------------------------------------------------------------------------


@dataclass
class CellHull:
    box: pn.IntervalVec
    zono: pn.Polynotope


def cell_hull(x: pn.Polynotope, assignment: dict,
              prov: SymbolProvider | None = None) -> CellHull:
    """Enclosure of the slice of ``x`` under a +-1 assignment of some of its
    signed symbols."""
    for i, v in assignment.items():
        if type_of(int(i)) != SymbolType.SIGNED:
            raise DomainError(f"cell queries fix signed symbols only, got {i}")
        if float(v) not in (-1.0, 1.0):
            raise DomainError(f"cell value for {i} must be +-1")
    sliced = pn.substitute(x, assignment)
    return CellHull(pn.box_hull(sliced), pn.zono_hull(sliced, prov))


# --------------------------------------------------------------------------
# Monte-Carlo containment
# --------------------------------------------------------------------------


@dataclass
class McReport:
    samples: int
    steps: int
    violations: int
    worst_defect: float  # largest bound excess observed (<= tol means clean)
    divergent: int = 0   # realizations that left the representable window
    steps_checked: int = 0

    @property
    def ok(self) -> bool:
        return self.violations == 0


def _defects(X: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    return np.maximum(lo[None, :] - X, X - hi[None, :]).max(axis=1)


def mc_check(scenario: Scenario, samples: int = 1000,
             seed: int | None = None, trace: ReachTrace | None = None,
             tol: float = 1e-9) -> McReport:
    """Sample concrete initial states (and persistent parameters), integrate
    punctually, and check membership in the propagated boxes at every step."""
    rng = np.random.default_rng(scenario.seed if seed is None else seed)
    if trace is None:
        trace = run(scenario)
    dyn_cls = DYNAMICS[scenario.dynamics]
    theta = dyn_cls.sample_params(scenario, rng, samples)
    step = dyn_cls.concrete(scenario)
    X = np.stack(
        [rng.uniform(c.center - c.radius, c.center + c.radius, size=samples)
         for c in scenario.init],
        axis=1,
    )
    violations, worst = 0, -math.inf
    for k, rec in enumerate(trace.records):
        d = _defects(X, rec.lo, rec.hi)
        violations += int((d > tol).sum())
        worst = max(worst, float(d.max()))
        if k < scenario.N:
            X = step(X, k, theta)
    return McReport(samples, scenario.N, violations, worst)


def mc_check_cell(scenario: Scenario, assignment_by_component: list,
                  samples: int = 200, seed: int | None = None,
                  trace: ReachTrace | None = None, tol: float = 1e-9
                  ) -> McReport:
    """Containment of trajectories started inside one dyadic initial cell,
    checked against the matching conditional slice at every step.

    ``assignment_by_component[i]`` lists +-1 values for the leading signed
    symbols of component i's encoding (may be partial or empty).
    """
    rng = np.random.default_rng(scenario.seed if seed is None else seed)
    if trace is None:
        trace = run(scenario)
    assignment = {}
    for ids, values in zip(trace.discrete_ids, assignment_by_component):
        for i, v in zip(ids, values):
            assignment[int(i)] = float(v)
    cell0 = cell_hull(trace.states[0], assignment)
    dyn_cls = DYNAMICS[scenario.dynamics]
    theta = dyn_cls.sample_params(scenario, rng, samples)
    step = dyn_cls.concrete(scenario)
    X = np.stack(
        [rng.uniform(cell0.box.lo[i], cell0.box.hi[i], size=samples)
         for i in range(scenario.dim)],
        axis=1,
    )
    violations, worst = 0, -math.inf
    for k in range(scenario.N + 1):
        box = cell_hull(trace.states[k], assignment).box
        d = _defects(X, box.lo, box.hi)
        violations += int((d > tol).sum())
        worst = max(worst, float(d.max()))
        if k < scenario.N:
            X = step(X, k, theta)
    return McReport(samples, scenario.N, violations, worst)


# --------------------------------------------------------------------------
# filter runs
# --------------------------------------------------------------------------


@dataclass
class FilterRecord:
    k: int
    center: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    cov_trace: float
    monomial_count: int
    max_degree: int


@dataclass
class FilterTrace:
    scenario: FilterScenario
    states: list
    records: list
    truth: np.ndarray         # (N+1, dim) simulated plant
    measurements: np.ndarray  # (N,)

    @property
    def max_degree_overall(self) -> int:
        return max(r.max_degree for r in self.records)


def _filter_model(fs: FilterScenario, prov: SymbolProvider) -> PkfModel:
    params = dict(_Lotka.defaults, **fs.params)
    gain_e, gain_f = fs.state_noise_gain, fs.meas_gain

    def predict(xbar, u, v):
        dx = lotka_field(xbar, u, params, fs.q, prov)
        return xbar + fs.h * dx + gain_e * v[[0, 1]]

    def innovate(xbar, u, v, y):
        return xbar[0] + gain_f * v[2] - y

    return PkfModel(predict, innovate)


class _NoiseTemplate:
    """Per-step noise vector [v1; v2; w] with w a level-g encoding of
    [-1, 1]; only the symbol ids change between steps, so the coefficient
    arrays are built once and fresh ids are spliced in.

    Allocating the interval batch before the signed batch keeps the fresh
    id vector sorted (the counter is monotone), matching the row layout.
    """

    def __init__(self, level: int):
        g = self.level = level
        c = np.zeros(3)
        R = np.zeros((3, g + 3))
        R[0, 0] = 1.0  # v1 <- first interval symbol
        R[1, 1] = 1.0  # v2 <- second interval symbol
        R[2, 2] = 0.5**g  # w remainder <- third interval symbol
        for j in range(g):
            R[2, 3 + j] = 0.5 ** (j + 1)  # w discrete part
        self.c, self.R = c, R
        self.E = np.eye(g + 3, dtype=np.int16)

    def fresh(self, prov: SymbolProvider) -> pn.Polynotope:
        ids = np.concatenate([
            prov.fresh(3, SymbolType.INTERVAL),
            prov.fresh(self.level, SymbolType.SIGNED),
        ])
        return pn._trusted(self.c, self.R, ids, self.E)


def _fresh_noise(fs: FilterScenario, prov: SymbolProvider,
                 template: _NoiseTemplate | None = None) -> pn.Polynotope:
    if template is None:
        template = _NoiseTemplate(fs.level)
    return template.fresh(prov)


def _filter_record(k: int, x: pn.Polynotope) -> FilterRecord:
    box = pn.box_hull(x)
    return FilterRecord(k, x.c.copy(), box.lo, box.hi,
                        float((x.R * x.R).sum()), x.gen_count, x.max_degree)


def _truth_step(fs: FilterScenario, params: dict, x: np.ndarray, u: float
                ) -> np.ndarray:
    f1 = lotka_field_concrete(x, u, params)
    if fs.truth_method == "euler":
        return x + fs.h * f1
    f2 = lotka_field_concrete(x + fs.h * f1, u, params)
    return x + 0.5 * fs.h * (f1 + f2)


def run_filter(fs: FilterScenario, prov: SymbolProvider | None = None
               ) -> FilterTrace:
    """Run the filter against a simulated plant with noisy measurements."""
    prov = prov or provider()
    rng = np.random.default_rng(fs.seed)
    params = dict(_Lotka.defaults, **fs.params)
    model = _filter_model(fs, prov)
    cfg = PkfConfig(fs.q)
    template = _NoiseTemplate(fs.level)
    parts = [encode_interval(c, r, EncodingSpec(fs.level), prov)
             for c, r in fs.init]
    x_est = pn.vcat(*parts)
    x_true = np.asarray(fs.truth_x0, dtype=float)
    states, records = [x_est], [_filter_record(0, x_est)]
    truth = [x_true]
    measurements = []
    for k in range(fs.N):
        u = fs.input_at(k)
        w = rng.uniform(-1.0, 1.0)
        y = x_true[0] + fs.meas_gain * w
        measurements.append(y)
        v = template.fresh(prov)
        x_est, _ = pkf_step_detailed(x_est, u, v, np.array([y]), model, cfg,
                                     prov)
        if not (np.isfinite(x_est.c).all() and np.isfinite(x_est.R).all()):
            raise BlowUpError(k + 1)
        x_true = _truth_step(fs, params, x_true, u)
        states.append(x_est)
        records.append(_filter_record(k + 1, x_est))
        truth.append(x_true)
    return FilterTrace(fs, states, records, np.array(truth),
                       np.array(measurements))


def mc_check_filter(fs: FilterScenario, samples: int = 1000,
                    seed: int | None = None, tol: float = 1e-9,
                    prov: SymbolProvider | None = None,
                    workers: int | None = None) -> McReport:
    """Closed-loop containment: for each sample, draw an initial state and
    per-step noises, simulate the exact discrete plant, feed its noisy
    measurements to the filter, and check that the true state stays inside
    the filter's box at every step.

    Each sample is a full filter re-run (its measurements depend on its
    noise draw), so this scales with samples * N; ``workers`` spreads
    samples over processes.  Per-sample seeding makes the report identical
    for any worker count.
    """
    if workers and workers > 1 and samples > 1:
        return _mc_filter_parallel(fs, samples, seed, tol, workers)
    base_seed = fs.seed if seed is None else seed
    stats = _mc_filter_chunk(fs, 0, samples, base_seed, tol, prov)
    violations, worst, divergent, steps_checked = stats
    return McReport(samples, fs.N, violations, worst, divergent,
                    steps_checked)


# additive noise can push a near-axis population negative, after which the
# Euler-discretized plant model itself escapes to infinity; containment is
# checked while the realization stays inside this window
_TRUTH_WINDOW = 1e6


def _mc_filter_chunk(fs: FilterScenario, lo: int, hi: int, base_seed: int,
                     tol: float, prov: SymbolProvider | None = None):
    prov = prov or provider()
    params = dict(_Lotka.defaults, **fs.params)
    model = _filter_model(fs, prov)
    cfg = PkfConfig(fs.q)
    template = _NoiseTemplate(fs.level)
    violations, worst = 0, -math.inf
    divergent, steps_checked = 0, 0
    for s in range(lo, hi):
        rng = np.random.default_rng((base_seed, s))
        x_true = np.array([rng.uniform(c - r, c + r) for c, r in fs.init])
        parts = [encode_interval(c, r, EncodingSpec(fs.level), prov)
                 for c, r in fs.init]
        x_est = pn.vcat(*parts)
        for k in range(fs.N):
            u = fs.input_at(k)
            w = rng.uniform(-1.0, 1.0)
            vbar = rng.uniform(-1.0, 1.0, size=2)
            y = x_true[0] + fs.meas_gain * w
            v = template.fresh(prov)
            filter_dead = False
            try:
                with np.errstate(over="ignore", invalid="ignore"):
                    x_est, _ = pkf_step_detailed(x_est, u, v, np.array([y]),
                                                 model, cfg, prov)
            except np.linalg.LinAlgError:
                filter_dead = True
            # plant follows the modeled discrete-time recursion exactly
            with np.errstate(over="ignore", invalid="ignore"):
                x_true = (x_true
                          + fs.h * lotka_field_concrete(x_true, u, params)
                          + fs.state_noise_gain * vbar)
            truth_sane = bool(np.isfinite(x_true).all()
                              and np.abs(x_true).max() <= _TRUTH_WINDOW)
            if not filter_dead:
                box = pn.box_hull(x_est)
                filter_dead = not (np.isfinite(box.lo).all()
                                   and np.isfinite(box.hi).all())
            if filter_dead:
                if truth_sane:
                    violations += 1  # enclosure failed on a sane realization
                else:
                    divergent += 1
                break
            if not truth_sane:
                divergent += 1  # realization left the representable window
                break
            d = float(np.maximum(box.lo - x_true, x_true - box.hi).max())
            worst = max(worst, d)
            steps_checked += 1
            if d > tol:
                violations += 1
    return violations, worst, divergent, steps_checked


def _mc_filter_parallel(fs: FilterScenario, samples: int, seed: int | None,
                        tol: float, workers: int) -> McReport:
    from concurrent.futures import ProcessPoolExecutor

    base_seed = fs.seed if seed is None else seed
    workers = min(workers, samples)
    bounds = np.linspace(0, samples, workers + 1).astype(int)
    violations, worst = 0, -math.inf
    divergent, steps_checked = 0, 0
    with ProcessPoolExecutor(max_workers=workers) as pool:
        jobs = [
            pool.submit(_mc_filter_chunk, fs, int(a), int(b), base_seed, tol)
            for a, b in zip(bounds, bounds[1:]) if b > a
        ]
        for job in jobs:
            v, w, dv, sc = job.result()
            violations += v
            worst = max(worst, w)
            divergent += dv
            steps_checked += sc
    return McReport(samples, fs.N, violations, worst, divergent,
                    steps_checked)


# --------------------------------------------------------------------------
# config parsing
# --------------------------------------------------------------------------

_FLAVORS = {"signed": SymbolType.SIGNED, "boolean": SymbolType.BOOLEAN}


def _require_keys(obj: dict, allowed: set, required: set, where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)} in {where}")
    missing = required - set(obj)
    if missing:
        raise ConfigError(f"missing keys {sorted(missing)} in {where}")


def _parse_init_component(entry: dict, idx: int, default_level: int | None
                          ) -> InitComponent:
    _require_keys(entry, {"encode"}, {"encode"}, f"init[{idx}]")
    enc = entry["encode"]
    _require_keys(enc, {"center", "radius", "level", "flavor"},
                  {"center", "radius"}, f"init[{idx}].encode")
    level = int(enc.get("level", 0 if default_level is None else default_level))
    flavor = _FLAVORS.get(enc.get("flavor", "signed"))
    if flavor is None:
        raise ConfigError(f"unknown flavor {enc.get('flavor')!r}")
    return InitComponent(float(enc["center"]), float(enc["radius"]),
                         level, flavor)


def scenario_from_config(cfg: dict, overrides: dict | None = None):
    """Build a Scenario or FilterScenario from a JSON-shaped dict.

    Unknown keys fail fast.  ``overrides`` may replace h (dt), N (steps),
    q (order), level, and seed after parsing.
    """
    overrides = overrides or {}
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be an object")
    kind = cfg.get("kind", "reach")
    if kind == "reach":
        _require_keys(
            cfg,
            {"kind", "name", "dynamics", "h", "N", "q", "init", "params",
             "seed"},
            {"name", "dynamics", "h", "N", "q", "init"},
            "config",
        )
        level = overrides.get("level")
        init = tuple(
            _parse_init_component(e, i, level)
            for i, e in enumerate(cfg["init"])
        )
        return Scenario(
            name=str(cfg["name"]),
            dynamics=str(cfg["dynamics"]),
            h=float(overrides.get("h", cfg["h"])),
            N=int(overrides.get("N", cfg["N"])),
            q=int(overrides.get("q", cfg["q"])),
            init=init,
            params=dict(cfg.get("params", {})),
            seed=int(overrides.get("seed", cfg.get("seed", 0))),
        )
    if kind == "filter":
        _require_keys(
            cfg,
            {"kind", "name", "h", "N", "q", "level", "init", "params",
             "noise", "input", "truth", "seed"},
            {"name", "h", "N", "q", "level", "init"},
            "config",
        )
        noise = dict(cfg.get("noise", {}))
        _require_keys(noise, {"state_gain", "meas_gain"}, set(), "noise")
        truth = dict(cfg.get("truth", {}))
        _require_keys(truth, {"x0", "method"}, set(), "truth")
        inp = dict(cfg.get("input", {"kind": "const", "value": 0.0}))
        _require_keys(inp, {"kind", "value", "on", "off"}, {"kind"}, "input")
        init = []
        for i, e in enumerate(cfg["init"]):
            _require_keys(e, {"center", "radius"}, {"center", "radius"},
                          f"init[{i}]")
            init.append((float(e["center"]), float(e["radius"])))
        return FilterScenario(
            name=str(cfg["name"]),
            h=float(overrides.get("h", cfg["h"])),
            N=int(overrides.get("N", cfg["N"])),
            q=int(overrides.get("q", cfg["q"])),
            level=int(overrides.get("level", cfg["level"])),
            init=tuple(init),
            params=dict(cfg.get("params", {})),
            state_noise_gain=float(noise.get("state_gain", 3e-3)),
            meas_gain=float(noise.get("meas_gain", 1.5)),
            input=inp,
            truth_x0=tuple(truth.get("x0", (22.0, 8.0))),
            truth_method=str(truth.get("method", "heun")),
            seed=int(overrides.get("seed", cfg.get("seed", 0))),
        )
    raise ConfigError(f"unknown config kind {kind!r}")
