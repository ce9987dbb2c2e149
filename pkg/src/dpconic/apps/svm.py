"""Soft-margin SVM and its privately released hyperplane.

The deterministic program is the hinge-loss QP in conic form (rotated-SOC
epigraph for the margin norm).  The private release is the identity query
on (w, b): the rule pins their recourse to the identity while the slack
recourse Z stays a free decision, and each margin/slack row is tightened
row-by-row with the Chebyshev safety factor (the noise is Laplace).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..conic import ConeKind, ConicProgram, ConeSpec, Solution, Status, nonneg, rsoc
from ..dp import AdjacencyModel, NoiseSpec, sample_noise
from ..ldr import (
    DecisionRule,
    IndividualChance,
    ProgramBuilder,
    RuleSpace,
    VertexChance,
    chance_row_blocks,
    hyperrectangle_vertices,
    vertex_sample_size,
)
from ..solver import SolverSettings, solve

BOX_STREAM = 0xB0C5

# weakly regularized margin programs hit their accuracy floor around 1e-7
DEFAULT_SETTINGS = SolverSettings(tol=1e-7, max_iter=200)


@dataclass(frozen=True)
class LabeledPoints:
    features: np.ndarray  # (m, n)
    labels: np.ndarray    # (m,) in {-1, +1}
    regularizer: float

    def __post_init__(self):
        object.__setattr__(self, "features",
                           np.atleast_2d(np.asarray(self.features, dtype=float)))
        object.__setattr__(self, "labels",
                           np.asarray(self.labels, dtype=float).ravel())
        if self.features.shape[0] != self.labels.shape[0]:
            raise ValueError("features and labels disagree on m")
        if self.features.shape[0] < 2:
            raise ValueError("need at least two points")
        if not set(np.unique(self.labels)) <= {-1.0, 1.0}:
            raise ValueError("labels must be -1 or +1")
        if len(np.unique(self.labels)) < 2:
            raise ValueError("both classes must be present")

    @property
    def m(self) -> int:
        return self.features.shape[0]

    @property
    def n(self) -> int:
        return self.features.shape[1]


def synthetic_gaussian_classes(
    m: int = 100,
    seed: int = 0,
    center_pos=(1.0, 1.0),
    center_neg=(3.0, 3.0),
    variance: float = 0.5,
    regularizer: float = 1e-5,
    test_points: int = 1000,
):
    """Two isotropic Gaussian blobs in equal proportion, min-max normalized.

    Returns (train, test_features, test_labels); the test set is normalized
    with the training extremes.
    """
    rng = np.random.default_rng(seed)
    half = m // 2
    sd = math.sqrt(variance)
    xp = rng.normal(center_pos, sd, size=(half, 2))
    xn = rng.normal(center_neg, sd, size=(m - half, 2))
    X = np.vstack([xp, xn])
    y = np.concatenate([np.ones(half), -np.ones(m - half)])
    lo, hi = X.min(axis=0), X.max(axis=0)
    Xn = (X - lo) / (hi - lo)

    tp = test_points // 2
    tx = np.vstack([
        rng.normal(center_pos, sd, size=(tp, 2)),
        rng.normal(center_neg, sd, size=(test_points - tp, 2)),
    ])
    ty = np.concatenate([np.ones(tp), -np.ones(test_points - tp)])
    txn = (tx - lo) / (hi - lo)
    return LabeledPoints(Xn, y, regularizer), txn, ty


def build_svm(data: LabeledPoints) -> ConicProgram:
    """Conic form of min lambda |w|^2 + (1/m) 1'z s.t. hinge rows.

    Variables (t, w, b, z); |w|^2 <= t via a rotated-SOC block with a
    constant 1/2 slot, margin and slack rows in NonNeg blocks.
    """
    m, n = data.m, data.n
    nv = 1 + n + 1 + m
    t_i, w_i, b_i, z_i = 0, np.arange(1, 1 + n), 1 + n, np.arange(2 + n, nv)

    rows = []
    # RSOC block (t, 1/2, w)
    A = np.zeros((n + 2, nv)); bvec = np.zeros(n + 2)
    A[0, t_i] = -1.0
    bvec[1] = 0.5
    A[2:, w_i] = -np.eye(n)
    rows.append((A, bvec, rsoc(n + 2)))
    # margin rows: y_i (w'x_i - b) - 1 + z_i >= 0
    Am = np.zeros((m, nv)); bm = -np.ones(m)
    for i in range(m):
        Am[i, w_i] = -data.labels[i] * data.features[i]
        Am[i, b_i] = data.labels[i]
        Am[i, z_i[i]] = -1.0
    rows.append((Am, bm, nonneg(m)))
    # slack rows: z >= 0
    Az = np.zeros((m, nv)); Az[np.arange(m), z_i] = -1.0
    rows.append((Az, np.zeros(m), nonneg(m)))

    A_all = np.vstack([r[0] for r in rows])
    b_all = np.concatenate([r[1] for r in rows])
    cones = ConeSpec([r[2] for r in rows])
    c = np.zeros(nv)
    c[t_i] = data.regularizer
    c[z_i] = 1.0 / m
    names = ("t",) + tuple(f"w[{j}]" for j in range(n)) + ("b",) + tuple(
        f"z[{i}]" for i in range(m))
    return ConicProgram(A_all, b_all, c, cones, variable_names=names)


def solve_svm(data: LabeledPoints, settings: SolverSettings | None = None):
    """Returns (w, b, solution) of the deterministic SVM."""
    sol = solve(build_svm(data), settings or DEFAULT_SETTINGS)
    if sol.status != Status.OPTIMAL:
        raise RuntimeError(f"SVM solve returned {sol.status.value}")
    n = data.n
    return sol.x[1 : 1 + n], float(sol.x[1 + n]), sol


def classify(w: np.ndarray, b: float, x: np.ndarray) -> np.ndarray:
    """sign(w'x - b) with the tie sent to +1."""
    vals = np.atleast_2d(x) @ np.asarray(w, dtype=float) - b
    return np.where(vals >= 0.0, 1.0, -1.0)


def accuracy(w, b, X, y) -> float:
    return float(np.mean(classify(w, b, X) == np.asarray(y, dtype=float)))


def circle_law_adjacency(
    data: LabeledPoints,
    radius: float = 0.05,
    settings: SolverSettings | None = None,
) -> AdjacencyModel:
    """Whole-dataset universe: every point jitters inside a circle of the
    given radius (r sin t, r cos t with r ~ U(0, radius)); any two such
    datasets are adjacent (alpha = inf).  The query is the (w, b) identity.
    """

    def jitter(rng):
        r = rng.uniform(0.0, radius, size=data.m)
        t = rng.uniform(0.0, 2.0 * math.pi, size=data.m)
        shift = np.column_stack([r * np.sin(t), r * np.cos(t)])
        return LabeledPoints(data.features + shift, data.labels, data.regularizer)

    def sample_pair(rng):
        return jitter(rng), jitter(rng)

    def solve_map(ds):
        w, b, _ = solve_svm(ds, settings)
        return np.concatenate([w, [b]])

    return AdjacencyModel(sample_pair=sample_pair, solve_map=solve_map,
                          alpha=math.inf)


@dataclass
class SvmPrivatization:
    rule: DecisionRule          # over the base variables (w, b, z)
    noise: NoiseSpec
    data: LabeledPoints
    solution: Solution
    program: ConicProgram
    objective_offset: float

    @property
    def w_nominal(self) -> np.ndarray:
        return self.rule.xbar[: self.data.n]

    @property
    def b_nominal(self) -> float:
        return float(self.rule.xbar[self.data.n])

    def release(self, seed: int, stream: int = 0):
        draw = sample_noise(self.noise, seed, 1, stream)[0]
        return self.w_nominal + draw[:-1], self.b_nominal + draw[-1]


def privatize_svm(
    data: LabeledPoints,
    noise: NoiseSpec,
    chance,
    seed: int = 0,
    settings: SolverSettings | None = None,
    recourse_ridge: float = 1e-8,
) -> SvmPrivatization:
    """Chance-constrained SVM rule with the identity query on (w, b).

    The recourse of (w, b) is pinned to the identity; the slack recourse Z
    is free.  The expected objective reduces to
    lambda(|wbar|^2 + n Var[zeta_1]) + (1/m) 1'zbar; the constant appears
    in objective_offset.  `chance` is an IndividualChance (per-point rows,
    the default study setting) or a VertexChance.
    """
    m, n = data.m, data.n
    k = n + 1
    if noise.k != k:
        raise ValueError(f"noise dim {noise.k}, expected n+1={k}")

    builder = ProgramBuilder()
    # base decision vector (w, b, z) of length n+1+m; (w, b) recourse pinned
    pin_mask = np.zeros((n + 1 + m, k), dtype=bool)
    pin_mask[: n + 1, :] = True
    pin_values = np.zeros((n + 1 + m, k))
    pin_values[: n + 1, :] = np.eye(k)
    space = RuleSpace(builder, n + 1 + m, k, pin_mask, pin_values, name="v")
    w_idx = space.xbar_idx[:n]
    z_idx = space.xbar_idx[n + 1 :]

    t = builder.add_var("t", obj=data.regularizer)
    for i in z_idx:
        builder.add_objective(int(i), 1.0 / m)

    # chance rows over the base variables
    rows = []
    for i in range(m):
        a = np.zeros(n + 1 + m)
        a[:n] = -data.labels[i] * data.features[i]
        a[n] = data.labels[i]
        a[n + 1 + i] = -1.0
        rows.append((a, -1.0))
    for i in range(m):
        a = np.zeros(n + 1 + m)
        a[n + 1 + i] = -1.0
        rows.append((a, 0.0))

    if isinstance(chance, IndividualChance):
        levels = chance.row_levels(len(rows))
        for kind, block_rows in chance_row_blocks(space, rows, noise, levels,
                                                  chance.safety):
            builder.add_block(kind, block_rows)
    elif isinstance(chance, VertexChance):
        S = chance.samples or vertex_sample_size(chance.eta, k, chance.beta)
        box = hyperrectangle_vertices(sample_noise(noise, seed, S, BOX_STREAM))
        for vert in box:
            block_rows = []
            for a, b0 in rows:
                terms = dict(space.nominal_terms(a))
                const = float(b0)
                for j, (tj, cj) in enumerate(space.zeta_coef(a)):
                    const -= cj * vert[j]
                    for idx, coef in tj.items():
                        terms[idx] = terms.get(idx, 0.0) - coef * vert[j]
                block_rows.append((terms, const))
            builder.add_block(ConeKind.NONNEG, block_rows)
    else:
        raise TypeError("chance must be IndividualChance or VertexChance")

    # |wbar|^2 <= t epigraph
    ridge_rows = [({t: 1.0}, 0.0), ({}, 0.5)]
    ridge_rows += [({int(i): 1.0}, 0.0) for i in w_idx]
    builder.add_block(ConeKind.RSOC, ridge_rows)

    if recourse_ridge > 0 and space.free_entries:
        u = builder.add_var("zridge", obj=recourse_ridge)
        rr = [({u: 1.0}, 0.0), ({}, 0.5)]
        rr += [({int(space.X_idx[i, j]): 1.0}, 0.0) for i, j in space.free_entries]
        builder.add_block(ConeKind.RSOC, rr)

    program = builder.build()
    sol = solve(program, settings or DEFAULT_SETTINGS)
    if sol.status != Status.OPTIMAL:
        raise RuntimeError(f"privatized SVM returned {sol.status.value}")
    rule = space.extract(sol.x)
    offset = data.regularizer * n * noise.coordinate_variance
    return SvmPrivatization(rule=rule, noise=noise, data=data, solution=sol,
                            program=program, objective_offset=offset)
