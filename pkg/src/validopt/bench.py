"""Benchmark ground truths and dataset sampling.

Each ground truth is a box-constrained minimization problem with a known
global optimum, used both to generate training data and to score optimizer
output against the true optimal value and solution.

Registry (name, dim, box, minimum):

=========================  ===  ================  =============================================
beale                        2  [-4.5, 4.5]^2     f = 0 at (3, 0.5)
peaks                        2  [-3, 3]^2         f = -6.551133332835843 at
                                                  (0.228278927348741, -1.625534954835248)
powell                       4  [-4, 5]^4         f = 0 at the origin
griewank                     4  [-600, 600]^4     f = 0 at the origin
quintic                      5  [-10, 10]^5       f = 0 at all-coordinates -1
qing                         8  [-10, 10]^8       f = 0 at (sqrt(1), ..., sqrt(8))
rastrigin                   10  [-5.12, 5.12]^10  f = 0 at the origin
rotated_hyper_ellipsoid     20  [-200, 200]^20    f = 0 at the origin
=========================  ===  ================  =============================================

The peaks minimizer was refined offline with a local polish of the grid
argmin; the other optima are exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ArgumentError, ConfigError, DataError, DimensionError

UNIFORM = "uniform"
NORMAL = "normal"
SAMPLING_RULES = (UNIFORM, NORMAL)


def beale(x: np.ndarray) -> float:
    x1, x2 = x
    return float(
        (1.5 - x1 + x1 * x2) ** 2
        + (2.25 - x1 + x1 * x2**2) ** 2
        + (2.625 - x1 + x1 * x2**3) ** 2
    )


def peaks(x: np.ndarray) -> float:
    x1, x2 = x
    return float(
        3 * (1 - x1) ** 2 * np.exp(-x1**2 - (x2 + 1) ** 2)
        - 10 * (x1 / 5 - x1**3 - x2**5) * np.exp(-x1**2 - x2**2)
        - np.exp(-((x1 + 1) ** 2) - x2**2) / 3
    )


def powell(x: np.ndarray) -> float:
    x1, x2, x3, x4 = x
    return float(
        (x1 + 10 * x2) ** 2
        + 5 * (x3 - x4) ** 2
        + (x2 - 2 * x3) ** 4
        + 10 * (x1 - x4) ** 4
    )


def griewank(x: np.ndarray) -> float:
    i = np.arange(1, x.size + 1)
    return float(np.sum(x**2) / 4000 - np.prod(np.cos(x / np.sqrt(i))) + 1)


def quintic(x: np.ndarray) -> float:
    return float(np.sum(np.abs(x**5 - 3 * x**4 + 4 * x**3 + 2 * x**2 - 10 * x - 4)))


def qing(x: np.ndarray) -> float:
    i = np.arange(1, x.size + 1)
    return float(np.sum((x**2 - i) ** 2))


def rastrigin(x: np.ndarray) -> float:
    return float(10 * x.size + np.sum(x**2 - 10 * np.cos(2 * np.pi * x)))


def rotated_hyper_ellipsoid(x: np.ndarray) -> float:
    return float(np.sum(np.cumsum(x) ** 2))


@dataclass(frozen=True)
class GroundTruth:
    """A box-constrained minimization problem with a known global optimum."""

    name: str
    lower: np.ndarray
    upper: np.ndarray
    evaluate: Callable[[np.ndarray], float]
    x_star: np.ndarray
    v_star: float

    @property
    def dim(self) -> int:
        return int(self.lower.size)

    def value(self, x: np.ndarray) -> float:
        """Evaluate at one point, validating shape and finiteness."""
        x = np.asarray(x, dtype=float).ravel()
        if x.size != self.dim:
            raise DimensionError(
                f"{self.name} expects {self.dim} coordinates, got {x.size}"
            )
        if not np.all(np.isfinite(x)):
            raise DataError(f"{self.name} evaluated at a non-finite point")
        return float(self.evaluate(x))

    def values(self, points: np.ndarray) -> np.ndarray:
        """Evaluate each row of an (N, dim) array."""
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[1] != self.dim:
            raise DimensionError(
                f"{self.name} expects an (N, {self.dim}) array, got {points.shape}"
            )
        return np.array([self.value(row) for row in points])


def _make(name, lo, hi, dim, fn, x_star, v_star) -> GroundTruth:
    lower = np.full(dim, float(lo))
    upper = np.full(dim, float(hi))
    return GroundTruth(name, lower, upper, fn, np.asarray(x_star, dtype=float), v_star)


REGISTRY: dict[str, GroundTruth] = {
    g.name: g
    for g in (
        _make("beale", -4.5, 4.5, 2, beale, [3.0, 0.5], 0.0),
        _make(
            "peaks",
            -3.0,
            3.0,
            2,
            peaks,
            [0.228278927348741, -1.625534954835248],
            -6.551133332835843,
        ),
        _make("powell", -4.0, 5.0, 4, powell, np.zeros(4), 0.0),
        _make("griewank", -600.0, 600.0, 4, griewank, np.zeros(4), 0.0),
        _make("quintic", -10.0, 10.0, 5, quintic, -np.ones(5), 0.0),
        _make("qing", -10.0, 10.0, 8, qing, np.sqrt(np.arange(1.0, 9.0)), 0.0),
        _make("rastrigin", -5.12, 5.12, 10, rastrigin, np.zeros(10), 0.0),
        _make(
            "rotated_hyper_ellipsoid",
            -200.0,
            200.0,
            20,
            rotated_hyper_ellipsoid,
            np.zeros(20),
            0.0,
        ),
    )
}


def list_ground_truths() -> list[str]:
    return sorted(REGISTRY)


def get_ground_truth(name: str) -> GroundTruth:
    key = name.strip().lower()
    if key not in REGISTRY:
        raise ArgumentError(
            f"unknown ground truth {name!r}; known: {', '.join(list_ground_truths())}"
        )
    return REGISTRY[key]


def domain_diameter(truth: GroundTruth) -> float:
    """Euclidean diameter of the box, ||upper - lower||_2."""
    _validate_box(truth)
    return float(np.linalg.norm(truth.upper - truth.lower))


def boundary_distance(x: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> float:
    """Distance from an interior point to the nearest box face."""
    x = np.asarray(x, dtype=float)
    return float(min(np.min(x - lower), np.min(upper - x)))


def _validate_box(truth: GroundTruth) -> None:
    if truth.lower.shape != truth.upper.shape:
        raise DimensionError("box bound arrays disagree in shape")
    if not (np.all(np.isfinite(truth.lower)) and np.all(np.isfinite(truth.upper))):
        raise ConfigError("box bounds must be finite")
    if np.any(truth.upper <= truth.lower):
        raise ConfigError("box has a zero-width or inverted coordinate")


@dataclass(frozen=True)
class Dataset:
    """Sampled inputs with clean and (optionally) noise-corrupted values.

    ``values`` is what a learner sees; ``clean_values`` keeps the exact
    ground-truth evaluations for diagnostics and extended-dataset builds.
    """

    truth_name: str
    rule: str
    n_samples: int
    sigma: float
    seed: int
    inputs: np.ndarray
    clean_values: np.ndarray
    values: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.inputs.shape[1])


def sample_inputs(
    truth: GroundTruth, rule: str, n_samples: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw input points only; consumes the generator.

    uniform: independent uniforms over the box.  normal: isotropic normal
    centered at the known optimum with per-coordinate standard deviation
    rho = (distance from the optimum to the nearest box face) / 6, kept
    inside the box by rejection resampling, never by clipping.
    """
    _validate_box(truth)
    if n_samples < 1:
        raise ArgumentError(f"n_samples must be >= 1, got {n_samples}")
    rule = rule.strip().lower()
    if rule == UNIFORM:
        return rng.uniform(truth.lower, truth.upper, size=(n_samples, truth.dim))
    if rule == NORMAL:
        rho = boundary_distance(truth.x_star, truth.lower, truth.upper) / 6.0
        if rho <= 0:
            raise ConfigError(
                f"{truth.name}: optimum sits on the box boundary; "
                "normal sampling is undefined"
            )
        out = np.empty((n_samples, truth.dim))
        have = 0
        while have < n_samples:
            draw = rng.normal(truth.x_star, rho, size=(n_samples - have, truth.dim))
            keep = draw[
                np.all((draw >= truth.lower) & (draw <= truth.upper), axis=1)
            ]
            out[have : have + len(keep)] = keep
            have += len(keep)
        return out
    raise ArgumentError(f"unknown sampling rule {rule!r}; known: {SAMPLING_RULES}")


def sample_dataset(
    truth: GroundTruth,
    rule: str,
    n_samples: int,
    sigma: float,
    seed: int,
) -> Dataset:
    """Sample a dataset from a ground truth.

    One seeded generator drives the dataset; input sampling consumes it
    before the noise draw, so inputs are identical across sigma values at
    the same seed.  Noise is zero-mean normal with standard deviation
    sigma times the population standard deviation of the clean values,
    added once.
    """
    if isinstance(truth, str):
        truth = get_ground_truth(truth)
    if sigma < 0:
        raise ArgumentError(f"sigma must be >= 0, got {sigma}")
    rng = np.random.default_rng(seed)
    inputs = sample_inputs(truth, rule, n_samples, rng)
    clean = truth.values(inputs)
    if sigma > 0:
        scale = sigma * float(np.std(clean))
        values = clean + rng.normal(0.0, 1.0, size=n_samples) * scale
    else:
        values = clean.copy()
    return Dataset(
        truth_name=truth.name,
        rule=rule.strip().lower(),
        n_samples=n_samples,
        sigma=float(sigma),
        seed=int(seed),
        inputs=inputs,
        clean_values=clean,
        values=values,
    )
