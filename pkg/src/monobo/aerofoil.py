"""Bézier aerofoil parameterisation, spar-cap stiffness and an external aerodynamic evaluator.

Geometry lives in chord units with the leading edge A at (0, 0) and the
trailing edge C at (1, 0). Four cubic Béziers make the contour:
A->B and B->C (upper surface), C->D and D->A (lower surface). B and D are
the upper and lower crests. Control points whose vertical position is not a
decision variable sit at their crest's height, so both crests have
horizontal tangents; controls 1 and 8 sit on the leading-edge vertical.

The lower surface is scaled vertically so its lowest point lies exactly
``t`` below the upper crest, which fixes the thickness at ``0.18 c``.
"""

from __future__ import annotations

import csv
import os
import shlex
import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.integrate import simpson, trapezoid

from .errors import DimensionError, EvaluationError, InfeasibleGeometryError, InvalidArgumentError

CHORD = 1.0
THICKNESS = 0.18 * CHORD
SAMPLES_PER_SEGMENT = 256
SPAR_WIDTH = 0.25 * CHORD
SPAR_SCALE = 0.9
ELASTIC_MODULUS = 1e9  # Pa
ALPHAS = np.arange(0, 11, dtype=float)
EVALUATOR_ENV = "MONOBO_AERO_EVALUATOR"

VARIABLES = ("j1", "jB", "iB", "i2", "i3", "i4", "j4", "i5", "j5", "iD", "i6", "i7", "j8")
BOUNDS = np.array(
    [
        [0.2, 0.9],
        [0.50, 0.95],
        [0.15, 0.70],
        [0.1, 0.9],
        [0.2, 0.8],
        [0.05, 0.75],
        [0.05, 0.95],
        [0.05, 0.75],
        [0.05, 0.50],
        [0.15, 0.70],
        [0.2, 0.8],
        [0.1, 0.9],
        [0.2, 0.9],
    ]
)


def bezier(controls, t) -> np.ndarray:
    """Cubic Bézier points for parameters ``t`` (Bernstein form)."""
    P = np.asarray(controls, dtype=float)
    t = np.asarray(t, dtype=float)[:, None]
    s = 1.0 - t
    return s**3 * P[0] + 3 * s**2 * t * P[1] + 3 * s * t**2 * P[2] + t**3 * P[3]


def _extreme_j(controls) -> tuple[float, float]:
    """Exact min and max of the vertical coordinate of one cubic segment."""
    j = np.asarray(controls, dtype=float)[:, 1]
    # derivative coefficients of the cubic in t
    a = -j[0] + 3 * j[1] - 3 * j[2] + j[3]
    b = 2 * (j[0] - 2 * j[1] + j[2])
    c = j[1] - j[0]
    roots = [0.0, 1.0]
    if abs(a) > 1e-15:
        disc = b * b - 4 * a * c
        if disc >= 0:
            roots += [(-b + np.sqrt(disc)) / (2 * a), (-b - np.sqrt(disc)) / (2 * a)]
    elif abs(b) > 1e-15:
        roots.append(-c / b)
    ts = np.array([r for r in roots if 0.0 <= r <= 1.0])
    vals = bezier(controls, ts)[:, 1]
    return float(vals.min()), float(vals.max())


@dataclass(frozen=True)
class AerofoilShape:
    """Resolved contour: control polygons plus dense samples of each surface.

    ``upper`` and ``lower`` run from the leading edge to the trailing edge.
    """

    segments: tuple
    upper: np.ndarray
    lower: np.ndarray
    anchors: dict
    chord: float = CHORD
    thickness: float = THICKNESS

    @property
    def max_thickness(self) -> float:
        lo = min(_extreme_j(seg)[0] for seg in self.segments[2:])
        hi = max(_extreme_j(seg)[1] for seg in self.segments[:2])
        return hi - lo

    def surface_j(self, which: str, i) -> np.ndarray:
        """Exact surface height at chord positions ``i`` (inverts i(t) per segment)."""
        segs = self.segments[:2] if which == "upper" else (self.segments[3][::-1], self.segments[2][::-1])
        i = np.atleast_1d(np.asarray(i, dtype=float))
        out = np.full(i.shape, np.nan)
        for seg in segs:
            seg = np.asarray(seg)
            lo, hi = seg[0, 0], seg[3, 0]
            mask = (i >= lo) & (i <= hi) & np.isnan(out)
            if not mask.any():
                continue
            target = i[mask]
            a = np.zeros_like(target)
            b = np.ones_like(target)
            for _ in range(60):
                mid = 0.5 * (a + b)
                below = bezier(seg, mid)[:, 0] < target
                a = np.where(below, mid, a)
                b = np.where(below, b, mid)
            out[mask] = bezier(seg, 0.5 * (a + b))[:, 1]
        return out


def _control_points(d: np.ndarray, t: float) -> tuple:
    j1, jB, iB, i2, i3, i4, j4, i5, j5, iD, i6, i7, j8 = d
    A = np.array([0.0, 0.0])
    C = np.array([CHORD, 0.0])
    B = np.array([iB * CHORD, jB * t])
    D = np.array([iD * CHORD, jB * t - t])
    c1 = np.array([A[0], A[1] + j1 * (B[1] - A[1])])
    c2 = np.array([B[0] - i2 * (B[0] - A[0]), B[1]])
    c3 = np.array([B[0] + i3 * (C[0] - B[0]), B[1]])
    c4 = np.array([C[0] - i4 * (C[0] - c3[0]), C[1] + j4 * (B[1] - C[1])])
    c6 = np.array([D[0] + i6 * (C[0] - D[0]), D[1]])
    c5 = np.array([C[0] - i5 * (c4[0] - c6[0]), C[1] - j5 * (c4[1] - D[1])])
    c7 = np.array([D[0] - i7 * (D[0] - A[0]), D[1]])
    c8 = np.array([A[0], A[1] - j8 * (A[1] - D[1])])
    segments = (
        np.array([A, c1, c2, B]),
        np.array([B, c3, c4, C]),
        np.array([C, c5, c6, D]),
        np.array([D, c7, c8, A]),
    )
    return segments, {"A": A, "B": B, "C": C, "D": D}


def check_decision(d) -> np.ndarray:
    d = np.asarray(d, dtype=float)
    if d.shape != (len(VARIABLES),):
        raise DimensionError(f"aerofoil decision has {len(VARIABLES)} variables, got shape {d.shape}")
    if np.any(d < BOUNDS[:, 0]) or np.any(d > BOUNDS[:, 1]):
        raise InvalidArgumentError("aerofoil decision lies outside its bounds")
    return d


def build_shape(d, samples: int = SAMPLES_PER_SEGMENT) -> AerofoilShape:
    """Resolve a 13-variable decision into a closed aerofoil contour.

    Raises:
        InfeasibleGeometryError: if a surface doubles back in the chordwise
            direction, leaves the chord, or the surfaces cross.
    """
    d = check_decision(d)
    segments, anchors = _control_points(d, THICKNESS)
    jB = anchors["B"][1]
    target_low = jB - THICKNESS
    low = min(_extreme_j(seg)[0] for seg in segments[2:])
    if low >= 0:
        raise InfeasibleGeometryError("lower surface never drops below the chord line")
    factor = target_low / low
    lower_segs = tuple(seg * np.array([1.0, factor]) for seg in segments[2:])
    segments = segments[:2] + lower_segs
    anchors = dict(anchors, D=segments[3][0].copy())

    ts = np.linspace(0.0, 1.0, samples)
    upper = np.vstack([bezier(segments[0], ts), bezier(segments[1], ts)[1:]])
    lower = np.vstack([bezier(segments[3], ts)[::-1], bezier(segments[2], ts)[::-1][1:]])
    for name, surf in (("upper", upper), ("lower", lower)):
        if np.any(np.diff(surf[:, 0]) < -1e-12):
            raise InfeasibleGeometryError(f"{name} surface doubles back along the chord")
        if surf[:, 0].min() < -1e-12 or surf[:, 0].max() > CHORD + 1e-12:
            raise InfeasibleGeometryError(f"{name} surface leaves the chord extent")
    grid = np.linspace(0.0, CHORD, 4 * samples)[1:-1]
    shape = AerofoilShape(segments=segments, upper=upper, lower=lower, anchors=anchors)
    if np.any(shape.surface_j("upper", grid) < shape.surface_j("lower", grid)):
        raise InfeasibleGeometryError("upper and lower surfaces cross")
    return shape


def section_stiffness(i, j_lo, j_hi, modulus: float = ELASTIC_MODULUS) -> float:
    """Integral of ``E j^2`` over the region ``j_lo(i) <= j <= j_hi(i)``.

    The inner integral is exact, ``(j_hi^3 - j_lo^3) / 3``; the chordwise one
    uses Simpson's rule on the supplied grid.
    """
    i = np.asarray(i, dtype=float)
    inner = (np.asarray(j_hi, dtype=float) ** 3 - np.asarray(j_lo, dtype=float) ** 3) / 3.0
    return float(modulus * simpson(inner, x=i))


@dataclass(frozen=True)
class SparCap:
    width: float
    centre_i: float
    i: np.ndarray
    upper_outer: np.ndarray
    upper_inner: np.ndarray
    lower_inner: np.ndarray
    lower_outer: np.ndarray

    @property
    def thickness_profile(self) -> np.ndarray:
        return (self.upper_outer - self.upper_inner) + (self.lower_inner - self.lower_outer)


def spar_cap(shape: AerofoilShape, n: int = 2001) -> SparCap:
    """Spar caps between each surface and its 90%-scaled copy, centred under the upper crest."""
    centre = float(shape.anchors["B"][0])
    lo = max(centre - SPAR_WIDTH / 2, 0.0)
    hi = min(centre + SPAR_WIDTH / 2, shape.chord)
    i = np.linspace(lo, hi, n)
    up = shape.surface_j("upper", i)
    dn = shape.surface_j("lower", i)
    return SparCap(SPAR_WIDTH, centre, i, up, SPAR_SCALE * up, SPAR_SCALE * dn, dn)


def stiffness(shape: AerofoilShape, n: int = 2001) -> float:
    """Flapwise bending stiffness of the spar caps about the chord line (N m^2 for c = 1 m)."""
    cap = spar_cap(shape, n)
    upper = section_stiffness(cap.i, cap.upper_inner, cap.upper_outer)
    lower = section_stiffness(cap.i, cap.lower_outer, cap.lower_inner)
    return upper + lower


def write_coordinates(shape: AerofoilShape, path) -> None:
    """Two-column coordinate file: upper TE->LE, then lower LE->TE."""
    pts = np.vstack([shape.upper[::-1], shape.lower[1:]])
    with open(path, "w") as fh:
        for i, j in pts:
            fh.write(f"{i:.8f} {j:.8f}\n")


@dataclass(frozen=True)
class ExternalEvaluator:
    """Runs an aerodynamic solver through a command template.

    The template must contain ``{input}`` and ``{output}``. The solver writes
    CSV rows ``alpha,cl,cd`` for alpha = 0..10 degrees.
    """

    command: str
    timeout: float = 60.0

    @classmethod
    def from_env(cls, default: str | None = None, timeout: float = 60.0) -> ExternalEvaluator | None:
        command = os.environ.get(EVALUATOR_ENV, default)
        return cls(command, timeout) if command else None

    def run(self, shape: AerofoilShape) -> np.ndarray:
        with tempfile.TemporaryDirectory(prefix="monobo-aero-") as tmp:
            inp = Path(tmp) / "shape.dat"
            out = Path(tmp) / "polar.csv"
            write_coordinates(shape, inp)
            argv = shlex.split(self.command.format(input=inp, output=out))
            try:
                subprocess.run(argv, check=True, timeout=self.timeout, capture_output=True)
            except FileNotFoundError as exc:
                raise EvaluationError(f"evaluator not found: {argv[0]}") from exc
            except subprocess.TimeoutExpired as exc:
                raise EvaluationError(f"evaluator timed out after {self.timeout} s") from exc
            except subprocess.CalledProcessError as exc:
                raise EvaluationError(f"evaluator exited with status {exc.returncode}") from exc
            if not out.exists():
                raise EvaluationError("evaluator produced no output file")
            return parse_polar(out.read_text())


def parse_polar(text: str) -> np.ndarray:
    """Parse ``alpha,cl,cd`` rows into an array sorted by alpha."""
    rows = []
    for row in csv.reader(text.splitlines()):
        if not row or not row[0].strip():
            continue
        try:
            rows.append([float(v) for v in row[:3]])
        except ValueError:
            if rows:
                raise EvaluationError(f"unparseable evaluator row: {row}") from None
            continue  # header
    if not rows or any(len(r) != 3 for r in rows):
        raise EvaluationError("evaluator output has no alpha,cl,cd rows")
    polar = np.array(rows)
    polar = polar[np.argsort(polar[:, 0])]
    if not np.all(np.isin(ALPHAS, polar[:, 0])):
        raise EvaluationError("evaluator output does not cover alpha = 0..10 deg in 1 deg steps")
    if np.any(polar[:, 2] == 0) or not np.all(np.isfinite(polar)):
        raise EvaluationError("evaluator output contains zero drag or non-finite values")
    return polar


def lift_drag_integral(polar: np.ndarray) -> float:
    """Trapezoidal integral of cl/cd over alpha in [0, 10] degrees."""
    keep = (polar[:, 0] >= ALPHAS[0]) & (polar[:, 0] <= ALPHAS[-1])
    a = polar[keep, 0]
    return float(trapezoid(polar[keep, 1] / polar[keep, 2], a))


def aero_objective(shape: AerofoilShape, evaluator: ExternalEvaluator | None) -> float:
    """Negated lift/drag integral (minimisation form)."""
    if evaluator is None:
        raise EvaluationError(f"no aerodynamic evaluator configured (set {EVALUATOR_ENV})")
    return -lift_drag_integral(evaluator.run(shape))


def aerofoil_problem(evaluator: ExternalEvaluator | None = None):
    """The aerofoil as a two-objective minimisation problem: (-f_alpha, -f_s)."""
    from .problems import Problem

    evaluator = evaluator or ExternalEvaluator.from_env()

    def objectives(d):
        shape = build_shape(d)
        return np.array([aero_objective(shape, evaluator), -stiffness(shape)])

    return Problem(name="aerofoil", D=len(VARIABLES), M=2, bounds=BOUNDS.copy(), fn=objectives)
