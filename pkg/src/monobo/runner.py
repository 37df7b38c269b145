"""Seeded optimisation runs and campaigns.

One iteration: normalise the archive objectives, fit surrogate(s), maximise
the acquisition, evaluate, append. EHVI fits one GP per objective; XHVI and
HYPI scalarise the normalised archive and fit a single GP to the result.

Everything that can differ between two executions of the same (config, seed)
(wall-clock time) is kept out of ``archive.csv``, ``iterations.json`` and
``result.json`` and written to ``timing.json`` instead.
"""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from . import acquisition as acq
from .core import ACQUIRED, INITIAL, Archive, latin_hypercube, nondominated_set, scale_to_bounds, scale_to_unit
from .errors import ConditioningError, EvaluationError, InfeasibleGeometryError, InvalidArgumentError
from .metrics import hv_percent, nds_size
from .problems import Problem, get_problem
from .scalarize import HYPI, SCALARISERS, XHVI, normalise_objectives
from .surrogate import fit

log = logging.getLogger(__name__)

EHVI = "EHVI"
METHODS = (XHVI, HYPI, EHVI)
DUPLICATE_TOL = 1e-9
DUPLICATE_NUDGE = 1e-6
PENALTY_MARGIN = 0.1


@dataclass(frozen=True)
class RunConfig:
    problem: str
    methods: tuple = (HYPI,)
    D: int = 10
    budget: int = 300
    n_init: int = 40
    xi: float = 0.0
    ref_point: object = "unit"
    seeds: tuple = (0,)
    restarts: int = 10
    fd_step: float = 1e-6
    mc_samples: int = 1000
    maxiter: int = 100
    jitter: float = 0.0
    output_dir: str = "runs"
    workers: int = 1
    metric_reference: str = "range"
    eaf_resolution: int = 512
    evaluator: str | None = None

    def __post_init__(self):
        methods = (self.methods,) if isinstance(self.methods, str) else tuple(self.methods)
        methods = tuple(m.upper() for m in methods)
        object.__setattr__(self, "methods", methods)
        object.__setattr__(self, "seeds", tuple(int(s) for s in np.atleast_1d(self.seeds)))
        if not methods or any(m not in METHODS for m in methods):
            raise InvalidArgumentError(f"methods must be drawn from {METHODS}, got {methods}")
        if not self.seeds:
            raise InvalidArgumentError("at least one seed is required")
        if self.n_init < 2 or self.budget < self.n_init:
            raise InvalidArgumentError("need n_init >= 2 and budget >= n_init")

    @property
    def method(self) -> str:
        return self.methods[0]

    @classmethod
    def from_dict(cls, data: dict) -> RunConfig:
        data = dict(data)
        if "method" in data:
            data["methods"] = data.pop("method")
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise InvalidArgumentError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> RunConfig:
        with open(path) as fh:
            return cls.from_dict(yaml.safe_load(fh))

    def to_dict(self) -> dict:
        out = asdict(self)
        out["methods"] = list(self.methods)
        out["seeds"] = list(self.seeds)
        return out

    def acquisition_spec(self, method: str) -> acq.AcquisitionSpec:
        return acq.AcquisitionSpec(
            kind=acq.EHVI if method == EHVI else acq.EI,
            jitter=self.jitter,
            mc_samples=self.mc_samples,
            restarts=self.restarts,
            fd_step=self.fd_step,
            maxiter=self.maxiter,
        )

    def reference_point(self, M: int) -> np.ndarray:
        if isinstance(self.ref_point, str):
            if self.ref_point != "unit":
                raise InvalidArgumentError(f"ref_point must be 'unit' or a vector, got {self.ref_point!r}")
            return np.ones(M)
        ref = np.asarray(self.ref_point, dtype=float)
        if ref.shape != (M,):
            raise InvalidArgumentError(f"ref_point needs {M} components")
        return ref


@dataclass
class RunResult:
    method: str
    seed: int
    archive: Archive
    iterations: list
    metrics: dict
    config: dict
    timing: list = field(default_factory=list)

    def final_front(self) -> np.ndarray:
        Y = self.archive.Y
        return Y[nondominated_set(Y)]

    def hv_trace(self) -> list:
        return [self.metrics.get("hv_percent_initial")] + [it.get("hv_percent") for it in self.iterations]

    def result_record(self) -> dict:
        return {
            "method": self.method,
            "seed": self.seed,
            "metrics": self.metrics,
            "config": self.config,
            "conventions": {
                "target_normalisation": "offset (1-xi)*mean+xi*min, scaled by sample std",
                "scalar_targets": "negated fitness renormalised with the same xi",
                "metric_reference": self.config.get("metric_reference", "range"),
            },
        }

    def save(self, directory) -> Path:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        self.archive.to_csv(directory / "archive.csv")
        _dump(self.iterations, directory / "iterations.json")
        _dump(self.result_record(), directory / "result.json")
        _dump(self.timing, directory / "timing.json")
        return directory

    @classmethod
    def load(cls, directory) -> RunResult:
        directory = Path(directory)
        record = json.loads((directory / "result.json").read_text())
        iterations = json.loads((directory / "iterations.json").read_text())
        timing_path = directory / "timing.json"
        timing = json.loads(timing_path.read_text()) if timing_path.exists() else []
        return cls(
            method=record["method"],
            seed=record["seed"],
            archive=Archive.from_csv(directory / "archive.csv"),
            iterations=iterations,
            metrics=record["metrics"],
            config=record["config"],
            timing=timing,
        )


def _dump(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _floats(values) -> list:
    return [float(v) for v in np.ravel(values)]


def _subseed(*parts: int) -> int:
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


def _penalty(archive: Archive) -> np.ndarray:
    Y = archive.Y
    worst = Y.max(axis=0)
    span = Y.max(axis=0) - Y.min(axis=0)
    span = np.where(span > 0, span, np.maximum(np.abs(worst), 1.0))
    return worst + PENALTY_MARGIN * span


def _evaluate(problem: Problem, x, archive: Archive, events: list) -> np.ndarray:
    try:
        return problem(x)
    except (EvaluationError, InfeasibleGeometryError) as exc:
        events.append({"event": "evaluation-failure", "detail": str(exc)})
        log.warning("evaluation failed at %s: %s", x, exc)
        return _penalty(archive)


def _initial_design(problem: Problem, design: np.ndarray, archive: Archive) -> list:
    """Evaluate the whole design, then penalise failures against the successes."""
    values, events = [], []
    for k, x in enumerate(design):
        try:
            values.append(problem(x))
        except (EvaluationError, InfeasibleGeometryError) as exc:
            values.append(None)
            events.append({"event": "evaluation-failure", "index": k, "detail": str(exc)})
            log.warning("initial design point %d failed: %s", k, exc)
    ok = [v for v in values if v is not None]
    if not ok:
        raise EvaluationError("every initial design point failed to evaluate")
    scratch = Archive(D=problem.D, M=problem.M)
    for k, v in enumerate(values):
        if v is not None:
            scratch.append(design[k], v, INITIAL)
    penalty = _penalty(scratch)
    for x, v in zip(design, values):
        archive.append(x, penalty if v is None else v, INITIAL)
    return events


def _hv(front, problem: Problem, mode: str):
    if problem.front_fn is None:
        return None
    return float(hv_percent(front, problem, mode))


def _resolve_problem(config: RunConfig) -> Problem:
    if config.problem.lower() == "aerofoil":
        from .aerofoil import ExternalEvaluator, aerofoil_problem

        return aerofoil_problem(ExternalEvaluator.from_env(config.evaluator))
    return get_problem(config.problem, config.D)


def _deduplicate(x_unit: np.ndarray, X_unit: np.ndarray, rng, events: list) -> np.ndarray:
    gap = np.max(np.abs(X_unit - x_unit), axis=1).min()
    if gap > DUPLICATE_TOL:
        return x_unit
    nudged = x_unit
    while np.max(np.abs(X_unit - nudged), axis=1).min() <= DUPLICATE_TOL:
        step = rng.uniform(-DUPLICATE_NUDGE, DUPLICATE_NUDGE, x_unit.size)
        # reflect at the box faces so a corner proposal still moves
        nudged = np.where((x_unit + step < 0.0) | (x_unit + step > 1.0), x_unit - step, x_unit + step)
    events.append({"event": "duplicate-proposal", "original": _floats(x_unit), "nudged": _floats(nudged)})
    return nudged


def _iteration(config: RunConfig, method: str, problem: Problem, archive: Archive, seed: int, it: int) -> dict:
    """Propose one point; returns the log record (without the evaluation)."""
    X_unit = scale_to_unit(archive.X, problem.bounds)
    Yn, _ = normalise_objectives(archive.Y, config.xi)
    ref = config.reference_point(problem.M)
    front = nondominated_set(archive.Y)
    spec = config.acquisition_spec(method)
    unit = np.tile([0.0, 1.0], (problem.D, 1))
    record: dict = {"iteration": it}

    if method == EHVI:
        models = [fit(X_unit, archive.Y[:, m], config.xi, _subseed(seed, it, m)) for m in range(problem.M)]
        z = acq.standard_normal_block(spec.mc_samples, problem.M, _subseed(seed, it, 101))
        acquisition = acq.EHVIAcquisition(models, Yn[front], ref, z)
        record["hyperparameters"] = [m.hyperparameters.as_dict() for m in models]
    else:
        scalarised = SCALARISERS[method](Yn, ref, normalise=False)
        model = fit(X_unit, -scalarised.scalar_fitness, config.xi, _subseed(seed, it, 0))
        acquisition = acq.EIAcquisition(model, spec.jitter)
        record["scalar_fitness"] = _floats(scalarised.scalar_fitness)
        record["hyperparameters"] = [model.hyperparameters.as_dict()]

    x_unit, value = acq.propose_next(spec, acquisition, X_unit[front], unit, _subseed(seed, it, 202))
    record["acquisition_value"] = float(value)
    record["proposal_unit"] = x_unit
    return record


def run_one(config: RunConfig, seed: int, method: str | None = None) -> RunResult:
    """Execute one seeded run of ``method`` (default: the config's first method)."""
    method = (method or config.method).upper()
    problem = _resolve_problem(config)
    archive = Archive(D=problem.D, M=problem.M)
    timing = []

    design = scale_to_bounds(latin_hypercube(config.n_init, problem.D, seed), problem.bounds)
    init_events = _initial_design(problem, design, archive)
    hv0 = _hv(archive.Y[nondominated_set(archive.Y)], problem, config.metric_reference)

    iterations = []
    nudge_rng = np.random.default_rng(_subseed(seed, 303))
    for it in range(config.budget - config.n_init):
        start = time.perf_counter()
        events: list = []
        try:
            record = _iteration(config, method, problem, archive, seed, it)
        except ConditioningError as exc:
            fallback = np.random.default_rng(_subseed(seed, it, 404)).uniform(size=problem.D)
            record = {"iteration": it, "acquisition_value": None, "proposal_unit": fallback}
            events.append({"event": "conditioning-failure", "detail": str(exc)})
        x_unit = _deduplicate(record.pop("proposal_unit"), scale_to_unit(archive.X, problem.bounds), nudge_rng, events)
        x = scale_to_bounds(x_unit, problem.bounds)
        x = np.clip(x, problem.bounds[:, 0], problem.bounds[:, 1])
        y = _evaluate(problem, x, archive, events)
        archive.append(x, y, ACQUIRED)
        front = archive.Y[nondominated_set(archive.Y)]
        record.update(
            x=_floats(x),
            y=_floats(y),
            hv_percent=_hv(front, problem, config.metric_reference),
            nds_size=nds_size(front),
            events=events,
        )
        iterations.append(record)
        timing.append({"iteration": it, "seconds": time.perf_counter() - start})

    front = archive.Y[nondominated_set(archive.Y)]
    metrics = {
        "hv_percent": _hv(front, problem, config.metric_reference),
        "hv_percent_initial": hv0,
        "nds_size": nds_size(front),
        "evaluations": len(archive),
        "evaluation_failures": len(init_events)
        + sum(1 for it in iterations for ev in it["events"] if ev["event"] == "evaluation-failure"),
        "initial_design_events": init_events,
    }
    echo = replace(config, methods=(method,), seeds=(seed,)).to_dict()
    return RunResult(method, seed, archive, iterations, metrics, echo, timing)


def run_dir(config: RunConfig, method: str, seed: int) -> Path:
    return Path(config.output_dir) / config.problem.lower() / method.lower() / f"seed_{seed}"


def _run_and_save(args) -> tuple[str, int, str | None]:
    config, method, seed = args
    try:
        result = run_one(config, seed, method)
    except Exception as exc:  # recorded per seed, campaign continues
        log.exception("run %s seed %d failed", method, seed)
        return method, seed, f"{type(exc).__name__}: {exc}"
    result.save(run_dir(config, method, seed))
    return method, seed, None


def run_campaign(config: RunConfig, figures: bool = True) -> tuple[dict, dict]:
    """Run every (method, seed) pair and summarise.

    Methods share seeds, so initial designs are identical across methods.
    Returns ``(results_by_method, summary)``.
    """
    jobs = [(config, m, s) for m in config.methods for s in config.seeds]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(_run_and_save, jobs))
    else:
        outcomes = [_run_and_save(job) for job in jobs]
    failures = {f"{m}/{s}": err for m, s, err in outcomes if err}
    results: dict = {m: [] for m in config.methods}
    for m, s, err in outcomes:
        if err is None:
            results[m].append(RunResult.load(run_dir(config, m, s)))
    from .report import summarise

    out = Path(config.output_dir) / config.problem.lower()
    summary = summarise(results, out, config.eaf_resolution, figures=figures, failures=failures)
    return results, summary


def load_runs(directory) -> dict:
    """Collect saved runs below ``directory`` grouped by method."""
    results: dict = {}
    for path in sorted(Path(directory).rglob("result.json")):
        res = RunResult.load(path.parent)
        results.setdefault(res.method, []).append(res)
    for runs in results.values():
        runs.sort(key=lambda r: r.seed)
    return results
