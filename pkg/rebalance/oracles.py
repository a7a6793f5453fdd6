"""Brute-force reference computations for cross-checking the library.

Everything here is deliberately naive: exhaustive pair scans, full sorts,
numeric integration, finite differences. None of it calls the production
metric, neighbour or t-distribution code; the gradient check only uses the
network's forward pass to difference against `backward`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, List, Sequence

import numpy as np

from .errors import InputError, UndefinedMetricError
from .nn_core import ACTIVATIONS, LayerSpec, MlpModel, backward, layer_specs, mlp_forward, mlp_init


@dataclass(frozen=True)
class OracleResult:
    value: Any
    method_tag: str


def oracle_auc(y_true: Sequence[int], scores: Sequence[float]) -> OracleResult:
    """Exact AUC by scanning every (positive, negative) pair."""
    pos = [float(s) for y, s in zip(y_true, scores) if int(y) == 1]
    neg = [float(s) for y, s in zip(y_true, scores) if int(y) == 0]
    if not pos or not neg:
        raise UndefinedMetricError("oracle_auc needs both classes")
    credit = Fraction(0)
    for p in pos:
        for n in neg:
            if p > n:
                credit += 1
            elif p == n:
                credit += Fraction(1, 2)
    return OracleResult(credit / (len(pos) * len(neg)), "exhaustive-pairs")


def oracle_nearest(points: Sequence[Sequence[float]], query: Sequence[float], k: int) -> OracleResult:
    """Indices of the k nearest points; equal distances keep the lower index first."""
    if k > len(points):
        raise InputError(f"k={k} exceeds {len(points)} points")
    dist = [(math.dist(p, query), i) for i, p in enumerate(points)]
    dist.sort()
    return OracleResult([i for _, i in dist[:k]], "full-sort")


def oracle_danger_set(
    minority: Sequence[Sequence[float]],
    majority: Sequence[Sequence[float]],
    m: int,
) -> OracleResult:
    """Minority rows whose m nearest neighbours (itself excluded) hold
    between m/2 and m-1 majority rows."""
    labelled = [(list(p), 1) for p in minority] + [(list(p), 0) for p in majority]
    danger = []
    for i, x in enumerate(minority):
        others = [(math.dist(p, x), j, lab) for j, (p, lab) in enumerate(labelled) if j != i]
        others.sort()
        n_major = sum(1 for _, _, lab in others[:m] if lab == 0)
        if m / 2 <= n_major < m:
            danger.append(i)
    return OracleResult(danger, "exhaustive-neighbourhoods")


def _t_density(x: float, df: float) -> float:
    log_c = math.lgamma((df + 1) / 2) - math.lgamma(df / 2) - 0.5 * math.log(df * math.pi)
    return math.exp(log_c - (df + 1) / 2 * math.log1p(x * x / df))


def _simpson(f: Callable[[float], float], a: float, b: float, tol: float) -> float:
    def simpson(a: float, fa: float, b: float, fb: float) -> tuple:
        m = (a + b) / 2
        fm = f(m)
        return m, fm, (b - a) / 6 * (fa + 4 * fm + fb)

    def refine(a, fa, b, fb, m, fm, whole, tol, depth):
        lm, flm, left = simpson(a, fa, m, fm)
        rm, frm, right = simpson(m, fm, b, fb)
        if depth <= 0 or abs(left + right - whole) <= 15 * tol:
            return left + right + (left + right - whole) / 15
        return (refine(a, fa, m, fm, lm, flm, left, tol / 2, depth - 1)
                + refine(m, fm, b, fb, rm, frm, right, tol / 2, depth - 1))

    fa, fb = f(a), f(b)
    m, fm, whole = simpson(a, fa, b, fb)
    return refine(a, fa, b, fb, m, fm, whole, tol, 50)


def oracle_t_cdf(t: float, df: float) -> OracleResult:
    """Student-t CDF by adaptive Simpson integration of the density."""
    if df < 1:
        raise InputError(f"df must be >= 1, got {df}")
    if t == 0:
        return OracleResult(0.5, "adaptive-simpson")
    area = _simpson(lambda x: _t_density(x, df), 0.0, abs(t), 1e-12)
    return OracleResult(0.5 + area if t > 0 else 0.5 - area, "adaptive-simpson")


# ----------------------------
# Finite-difference gradient check
# ----------------------------

def oracle_numeric_gradient(model: MlpModel, x: np.ndarray, weights: np.ndarray, h: float = 1e-5) -> List[np.ndarray]:
    """Central differences of sum(weights * forward(x)) w.r.t. every parameter."""
    def loss(m: MlpModel) -> float:
        return float(np.sum(weights * mlp_forward(m, x)))

    grads = []
    shifted = model.copy()
    for p in shifted.parameters():
        g = np.zeros_like(p)
        for idx in np.ndindex(p.shape):
            keep = p[idx]
            p[idx] = keep + h
            up = loss(shifted)
            p[idx] = keep - h
            down = loss(shifted)
            p[idx] = keep
            g[idx] = (up - down) / (2 * h)
        grads.append(g)
    return grads


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-3) -> float:
    a = np.asarray(analytic, dtype=float).ravel()
    n = np.asarray(numeric, dtype=float).ravel()
    if a.size == 0:
        return 0.0
    scale = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
    return float(np.max(np.abs(a - n) / scale))


@dataclass
class GradCheckReport:
    cases: int
    max_rel_error: float
    tolerance: float
    worst_case: str = ""
    errors: List[float] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.tolerance


def _random_specs(rng: np.random.Generator) -> List[LayerSpec]:
    """Up to three hidden layers, every width in 1..16."""
    n_hidden = int(rng.integers(0, 4))
    widths = [int(w) for w in rng.integers(1, 17, size=n_hidden + 2)]
    hidden = ACTIVATIONS[int(rng.integers(0, len(ACTIVATIONS)))]
    output = ACTIVATIONS[int(rng.integers(0, len(ACTIVATIONS)))]
    return layer_specs(widths, hidden=hidden, output=output)


def kink_distance(model: MlpModel, x: np.ndarray) -> float:
    """Smallest |pre-activation| feeding a relu or leaky_relu unit on input x.

    Central differences are one-sided within h of such a point, so a case
    closer than a few h to a kink cannot be checked numerically.
    """
    nearest = math.inf
    a = np.asarray(x, dtype=float)
    for i, layer in enumerate(model.layers):
        z = a @ layer.weight.T + layer.bias
        if layer.spec.activation in ("relu", "leaky_relu") and z.size:
            nearest = min(nearest, float(np.min(np.abs(z))))
        a = mlp_forward(MlpModel(model.layers[: i + 1]), x)
    return nearest


def gradient_check(
    cases: int = 100,
    seed: int = 0,
    h: float = 1e-5,
    tolerance: float = 1e-4,
    max_redraws: int = 50,
) -> GradCheckReport:
    """Compare backprop with central differences on random networks and inputs.

    Biases are drawn from N(0, 0.5); inputs within 100 h of a relu kink are
    redrawn.
    """
    rng = np.random.default_rng(seed)
    report = GradCheckReport(cases=cases, max_rel_error=0.0, tolerance=tolerance)
    for case in range(cases):
        specs = _random_specs(rng)
        model = mlp_init(specs, int(rng.integers(0, 2**31)))
        for layer in model.layers:
            layer.bias = rng.normal(scale=0.5, size=layer.bias.shape)
        batch = int(rng.integers(1, 5))
        for _ in range(max_redraws):
            x = rng.normal(size=(batch, model.input_width))
            if kink_distance(model, x) > 100 * h:
                break
        weights = rng.normal(size=(batch, model.output_width))

        analytic = backward(model, x, weights)[0].flat()
        numeric = oracle_numeric_gradient(model, x, weights, h)
        err = max(relative_error(a, n) for a, n in zip(analytic, numeric))
        report.errors.append(err)
        if err > report.max_rel_error:
            report.max_rel_error = err
            widths = "->".join(str(w) for w in model.widths)
            report.worst_case = f"case {case}: {widths} ({specs[0].activation}/{specs[-1].activation})"
    return report
