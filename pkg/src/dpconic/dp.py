"""Differential-privacy primitives.

Noise sampling and mechanism calibration (Laplace / Gaussian), the two
baseline perturbation strategies (output and input perturbation), and Monte
Carlo estimation of the worst-case query sensitivity over adjacent-dataset
pairs.

Randomness contract: every sampling routine is driven by a counter-based
Philox generator keyed by (seed, stream), so results are reproducible and
independent streams can run in parallel.  All noise is drawn in standardized
form and then multiplied by the scale, which makes draws for two calibrations
of the same family and seed exactly proportional (nested adjacency balls stay
nested, costs stay monotone in the noise scale).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Any, Callable

import numpy as np


def rng_stream(seed: int, stream: int = 0) -> np.random.Generator:
    """Philox generator keyed by the 64-bit (seed, stream) pair."""
    return np.random.Generator(
        np.random.Philox(key=np.array([seed, stream], dtype=np.uint64))
    )


# --- noise specification ------------------------------------------------------


@dataclass(frozen=True)
class NoiseSpec:
    """Zero-mean perturbation: iid Laplace(scale) or Gaussian(sigma) coordinates.

    covariance is 2*scale^2*I for Laplace and scale^2*I for Gaussian; factor
    satisfies covariance = factor factor'.
    """

    family: str  # "laplace" | "gaussian"
    k: int
    scale: float

    def __post_init__(self):
        if self.family not in ("laplace", "gaussian"):
            raise ValueError(f"unknown noise family {self.family!r}")
        if self.k < 1:
            raise ValueError("noise dimension must be >= 1")
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    @property
    def coordinate_variance(self) -> float:
        return 2.0 * self.scale**2 if self.family == "laplace" else self.scale**2

    @property
    def covariance(self) -> np.ndarray:
        return self.coordinate_variance * np.eye(self.k)

    @property
    def factor(self) -> np.ndarray:
        return math.sqrt(self.coordinate_variance) * np.eye(self.k)

    def with_dim(self, k: int) -> "NoiseSpec":
        return replace(self, k=k)


def sample_noise(spec: NoiseSpec, seed: int, count: int, stream: int = 0) -> np.ndarray:
    """count x k matrix of iid draws; identical for identical (seed, stream)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = rng_stream(seed, stream)
    if spec.family == "laplace":
        base = rng.laplace(0.0, 1.0, size=(count, spec.k))
    else:
        base = rng.standard_normal(size=(count, spec.k))
    return spec.scale * base


def calibrate_laplace(delta_1: float, epsilon: float, k: int = 1,
                      inverse_scale: bool = False) -> NoiseSpec:
    """Laplace mechanism scale delta_1/epsilon for l1-sensitivity delta_1.

    inverse_scale applies the epsilon/delta_1 reading that one of the
    reference experiments prints; left off unless you are reproducing that
    exact table.
    """
    if delta_1 <= 0 or epsilon <= 0:
        raise ValueError("delta_1 and epsilon must be positive")
    scale = epsilon / delta_1 if inverse_scale else delta_1 / epsilon
    return NoiseSpec("laplace", k, scale)


def calibrate_gaussian(delta_2: float, epsilon: float, delta: float, k: int = 1) -> NoiseSpec:
    """Gaussian mechanism sigma = sqrt(2 ln(1.25/delta)) * delta_2 / epsilon."""
    if delta_2 <= 0 or epsilon <= 0:
        raise ValueError("delta_2 and epsilon must be positive")
    if not 0 < delta < 1:
        raise ValueError("delta must be in (0, 1)")
    sigma = math.sqrt(2.0 * math.log(1.25 / delta)) * delta_2 / epsilon
    return NoiseSpec("gaussian", k, sigma)


# --- privacy parameters -------------------------------------------------------


@dataclass(frozen=True)
class PrivacyParams:
    epsilon: float
    delta: float = 0.0
    alpha: float = math.inf
    p: int = 1
    delta_p: float | None = None
    gamma: float | None = None
    beta: float | None = None
    samples: int | None = None

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if not 0 <= self.delta < 1:
            raise ValueError("delta must be in [0, 1)")
        if self.p not in (1, 2):
            raise ValueError("norm order p must be 1 or 2")
        if self.p == 2 and self.delta == 0:
            raise ValueError("Gaussian calibration (p=2) needs delta > 0")

    def noise(self, k: int, inverse_scale: bool = False) -> NoiseSpec:
        if self.delta_p is None:
            raise ValueError("sensitivity delta_p not set")
        if self.p == 1:
            return calibrate_laplace(self.delta_p, self.epsilon, k, inverse_scale)
        return calibrate_gaussian(self.delta_p, self.epsilon, self.delta, k)


def sensitivity_sample_size(gamma: float, beta: float) -> int:
    """Minimum sample count ceil(1/(gamma*beta) - 1) for the (gamma, beta) bound."""
    if not (0 < gamma < 1 and 0 < beta < 1):
        raise ValueError("gamma and beta must be in (0, 1)")
    return int(math.ceil(1.0 / (gamma * beta) - 1.0))


# --- adjacency and sensitivity estimation -------------------------------------


@dataclass(frozen=True)
class AdjacencyModel:
    """Seedable generator of alpha-adjacent dataset pairs plus the query map.

    sample_pair(rng) must construct the pair directly inside the alpha ball
    (no rejection), solve_map maps a dataset to the solved program's variable
    vector, and query maps that vector to the released value(s); None means
    the identity query.
    """

    sample_pair: Callable[[np.random.Generator], tuple[Any, Any]]
    solve_map: Callable[[Any], np.ndarray]
    alpha: float
    query: Callable[[np.ndarray], np.ndarray] | None = None

    def released(self, dataset) -> np.ndarray:
        x = np.atleast_1d(np.asarray(self.solve_map(dataset), dtype=float))
        if self.query is None:
            return x
        return np.atleast_1d(np.asarray(self.query(x), dtype=float))


class SolveFailure(RuntimeError):
    def __init__(self, sample_index: int, msg: str):
        super().__init__(f"sample {sample_index}: {msg}")
        self.sample_index = sample_index


@dataclass(frozen=True)
class SensitivityReport:
    p: int
    alpha: float
    gamma: float
    beta: float
    samples: int
    delta_p: float
    failures: tuple[int, ...] = ()

    def to_json(self) -> str:
        return json.dumps(
            {
                "p": self.p,
                "alpha": self.alpha,
                "gamma": self.gamma,
                "beta": self.beta,
                "S": self.samples,
                "delta_p": self.delta_p,
                "failures": list(self.failures),
            }
        )

    @staticmethod
    def from_json(text: str) -> "SensitivityReport":
        doc = json.loads(text)
        return SensitivityReport(
            p=doc["p"], alpha=doc["alpha"], gamma=doc["gamma"], beta=doc["beta"],
            samples=doc["S"], delta_p=doc["delta_p"], failures=tuple(doc["failures"]),
        )

    def privacy_params(self, epsilon: float, delta: float = 0.0) -> PrivacyParams:
        return PrivacyParams(
            epsilon=epsilon, delta=delta, alpha=self.alpha, p=self.p,
            delta_p=self.delta_p, gamma=self.gamma, beta=self.beta,
            samples=self.samples,
        )


def estimate_sensitivity(
    adjacency: AdjacencyModel,
    p: int,
    samples: int,
    gamma: float,
    beta: float,
    seed: int,
    max_failure_fraction: float = 0.01,
) -> SensitivityReport:
    """Monte Carlo lower bound on the worst-case query sensitivity.

    Draws `samples` adjacent pairs, solves both programs of each pair and
    takes the max p-norm gap of the released queries.  Pairs whose solve
    fails are dropped and reported, but only up to max_failure_fraction of
    the total; beyond that a SolveFailure propagates.
    """
    if p not in (1, 2):
        raise ValueError("p must be 1 or 2")
    if samples < sensitivity_sample_size(gamma, beta):
        raise ValueError(
            f"samples={samples} below the (gamma={gamma}, beta={beta}) "
            f"requirement {sensitivity_sample_size(gamma, beta)}"
        )
    worst = 0.0
    failures: list[int] = []
    allowed = max(1, int(max_failure_fraction * samples))
    for s in range(samples):
        rng = rng_stream(seed, s)
        d_a, d_b = adjacency.sample_pair(rng)
        try:
            q_a = adjacency.released(d_a)
            q_b = adjacency.released(d_b)
        except Exception as exc:  # noqa: BLE001 - app solve errors vary
            failures.append(s)
            if len(failures) > allowed:
                raise SolveFailure(s, str(exc)) from exc
            continue
        gap = np.linalg.norm(q_a - q_b, ord=p)
        worst = max(worst, float(gap))
    return SensitivityReport(
        p=p, alpha=adjacency.alpha, gamma=gamma, beta=beta,
        samples=samples, delta_p=worst, failures=tuple(failures),
    )


# --- baseline strategies ------------------------------------------------------


def output_perturbation(query_value: np.ndarray, spec: NoiseSpec, seed: int,
                        stream: int = 0) -> np.ndarray:
    """query + one noise draw; the draw equals sample_noise(spec, seed, 1)."""
    value = np.atleast_1d(np.asarray(query_value, dtype=float))
    if value.shape[0] != spec.k:
        raise ValueError(f"query dim {value.shape[0]} != noise dim {spec.k}")
    return value + sample_noise(spec, seed, 1, stream)[0]


def input_perturbation(rebuild, spec: NoiseSpec, solver, seed: int, stream: int = 0):
    """Perturb the designated private coordinates, then solve.

    rebuild(zeta) must return the ConicProgram built on the perturbed
    dataset D + zeta; solver is a callable program -> Solution.  The
    Solution is returned as-is (possibly with an infeasible status, which
    callers count toward infeasibility rates).
    """
    zeta = sample_noise(spec, seed, 1, stream)[0]
    return solver(rebuild(zeta))


def laplace_ratio_sup(gap_l1: float, scale: float) -> float:
    """sup over outputs of the Laplace density ratio for centers gap_l1 apart."""
    return math.exp(gap_l1 / scale)


def privacy_ratio_check(
    query_a: np.ndarray,
    query_b: np.ndarray,
    spec: NoiseSpec,
    epsilon: float,
    delta: float = 0.0,
) -> bool:
    """Analytic check that the mechanism masks this particular query pair.

    Laplace: the density-ratio sup is exp(gap_1/scale), so the epsilon bound
    holds everywhere iff gap_1 <= epsilon * scale.  Gaussian: the pair is
    covered iff gap_2 does not exceed the sensitivity the sigma was
    calibrated for.
    """
    a = np.atleast_1d(np.asarray(query_a, dtype=float))
    b = np.atleast_1d(np.asarray(query_b, dtype=float))
    if a.shape != b.shape or a.shape[0] != spec.k:
        raise ValueError("query values must match the noise dimension")
    if spec.family == "laplace":
        gap = float(np.linalg.norm(a - b, ord=1))
        return gap <= epsilon * spec.scale + 1e-12
    if not 0 < delta < 1:
        raise ValueError("gaussian check needs delta in (0, 1)")
    gap = float(np.linalg.norm(a - b, ord=2))
    implied_delta_2 = spec.scale * epsilon / math.sqrt(2.0 * math.log(1.25 / delta))
    return gap <= implied_delta_2 + 1e-12
