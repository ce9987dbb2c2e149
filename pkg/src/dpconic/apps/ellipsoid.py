"""Maximum-volume inscribed ellipsoid of a planar polytope, privately.

The ellipse {Y u + z : |u| <= 1} sits inside {x : a_i'x <= b_i} iff
|Y'a_i| <= b_i - a_i'z per row; for symmetric PSD Y the objective
det(Y)^(1/2) has the rotated-SOC hypograph t^2 <= Y11 Y22 - Y12^2.  The
private release perturbs (z, Y) entrywise with a fixed identity recourse,
so released Y may be asymmetric: containment is always checked with the
exact support-function test and definiteness on the symmetric part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..conic import ConeKind, ConicProgram, ConeSpec, Solution, Status
from ..dp import AdjacencyModel, NoiseSpec, sample_noise
from ..ldr import (
    DecisionRule,
    ProgramBuilder,
    RuleSpace,
    hyperrectangle_vertices,
    vertex_sample_size,
)
from ..solver import SolverSettings, solve

BOX_STREAM = 0xB0C5
OBJ_STREAM = 0x0B5E

DEFAULT_SETTINGS = SolverSettings(tol=1e-7, max_iter=150)

_SQRT2 = math.sqrt(2.0)

# rule coordinate order: (z1, z2, Y11, Y21, Y12, Y22); the fixed recourse is
# the identity on these six coordinates, i.e. z += zeta[0:2], Y's first
# column += zeta[2:4] and second column += zeta[4:6].
RULE_DIM = 6


@dataclass(frozen=True)
class EllipsoidInstance:
    a: np.ndarray  # (m, 2) row normals
    b: np.ndarray  # (m,)

    def __post_init__(self):
        object.__setattr__(self, "a", np.atleast_2d(np.asarray(self.a, dtype=float)))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float).ravel())
        if self.a.shape[1] != 2:
            raise ValueError("only planar (n=2) instances are supported")
        if self.a.shape[0] != self.b.shape[0]:
            raise ValueError("a and b row counts differ")

    @property
    def m(self) -> int:
        return self.a.shape[0]

    def with_b(self, b) -> "EllipsoidInstance":
        return EllipsoidInstance(self.a, np.asarray(b, dtype=float))


def unit_square() -> EllipsoidInstance:
    a = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    return EllipsoidInstance(a, np.ones(4))


def regular_polygon(sides: int = 5, radius: float = 2.0,
                    rotation: float = 0.3) -> EllipsoidInstance:
    ang = rotation + 2.0 * math.pi * np.arange(sides) / sides
    a = np.column_stack([np.cos(ang), np.sin(ang)])
    return EllipsoidInstance(a, radius * np.ones(sides))


def check_bounded(inst: EllipsoidInstance,
                  settings: SolverSettings | None = None) -> None:
    """Solve max/min of each coordinate; unbounded or empty sets are rejected."""
    settings = settings or DEFAULT_SETTINGS
    A = inst.a
    for j in range(2):
        for sign in (1.0, -1.0):
            c = np.zeros(2)
            c[j] = sign
            prog = ConicProgram(A, inst.b, c, ConeSpec([(ConeKind.NONNEG.value, inst.m)]))
            sol = solve(prog, settings)
            if sol.status == Status.DUAL_INFEASIBLE:
                raise ValueError("polyhedron is unbounded")
            if sol.status == Status.PRIMAL_INFEASIBLE:
                raise ValueError("polyhedron is empty")


def build_ellipsoid(inst: EllipsoidInstance) -> ConicProgram:
    """max t s.t. t^2 <= det(Y), |Y a_i| <= b_i - a_i'z, Y symmetric 2x2.

    Variables (t, z1, z2, Y11, Y22, Y12); the det hypograph is the
    rotated-SOC row (Y11, Y22, sqrt2 t, sqrt2 Y12).
    """
    check_bounded(inst)
    nv = 6
    t_i, z_i, y11, y22, y12 = 0, (1, 2), 3, 4, 5
    rows_A, rows_b, blocks = [], [], []

    A1 = np.zeros((4, nv))
    A1[0, y11] = -1.0
    A1[1, y22] = -1.0
    A1[2, t_i] = -_SQRT2
    A1[3, y12] = -_SQRT2
    rows_A.append(A1)
    rows_b.append(np.zeros(4))
    blocks.append((ConeKind.RSOC.value, 4))

    for i in range(inst.m):
        a1, a2 = inst.a[i]
        Ai = np.zeros((3, nv))
        Ai[0, z_i[0]], Ai[0, z_i[1]] = a1, a2
        # (Y a)_1 = Y11 a1 + Y12 a2 ; (Y a)_2 = Y12 a1 + Y22 a2
        Ai[1, y11], Ai[1, y12] = -a1, -a2
        Ai[2, y12], Ai[2, y22] = -a1, -a2
        rows_A.append(Ai)
        rows_b.append(np.array([inst.b[i], 0.0, 0.0]))
        blocks.append((ConeKind.SOC.value, 3))

    c = np.zeros(nv)
    c[t_i] = -1.0
    names = ("t", "z[0]", "z[1]", "Y[0][0]", "Y[1][1]", "Y[0][1]")
    return ConicProgram(np.vstack(rows_A), np.concatenate(rows_b), c,
                        ConeSpec(blocks), variable_names=names)


def solve_ellipsoid(inst: EllipsoidInstance,
                    settings: SolverSettings | None = None):
    """Returns (z, Y, t, solution) for the deterministic instance."""
    sol = solve(build_ellipsoid(inst), settings or DEFAULT_SETTINGS)
    if sol.status != Status.OPTIMAL:
        raise RuntimeError(f"ellipsoid solve returned {sol.status.value}")
    t, z1, z2, y11, y22, y12 = sol.x
    Y = np.array([[y11, y12], [y12, y22]])
    return np.array([z1, z2]), Y, float(t), sol


def rule_vector(z: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """(z1, z2, Y11, Y21, Y12, Y22): the rule coordinate order."""
    return np.array([z[0], z[1], Y[0, 0], Y[1, 0], Y[0, 1], Y[1, 1]])

def unpack_rule_vector(v: np.ndarray):
    z = np.array([v[0], v[1]])
    Y = np.array([[v[2], v[4]], [v[3], v[5]]])
    return z, Y


def contains_ellipsoid(inst: EllipsoidInstance, z: np.ndarray, Y: np.ndarray,
                       tol: float = 1e-9) -> bool:
    """Exact support-function containment |Y'a_i| <= b_i - a_i'z, any Y."""
    for i in range(inst.m):
        ai = inst.a[i]
        if np.linalg.norm(Y.T @ ai) > inst.b[i] - ai @ z + tol:
            return False
    return True


def ellipsoid_volume(Y: np.ndarray) -> float:
    return math.pi * abs(float(np.linalg.det(Y)))


def b_range_adjacency(inst: EllipsoidInstance, gamma_frac: float,
                      settings: SolverSettings | None = None) -> AdjacencyModel:
    """Universe where each b_i ranges over [b_i(1-gamma), b_i(1+gamma)];
    all such instances are adjacent (alpha = inf).  Query: the (z, Y) rule
    vector of the deterministic optimum."""

    def jitter(rng):
        f = rng.uniform(-gamma_frac, gamma_frac, size=inst.m)
        return inst.with_b(inst.b * (1.0 + f))

    def sample_pair(rng):
        return jitter(rng), jitter(rng)

    def solve_map(ins):
        z, Y, _, _ = solve_ellipsoid(ins, settings)
        return rule_vector(z, Y)

    return AdjacencyModel(sample_pair=sample_pair, solve_map=solve_map,
                          alpha=math.inf)


@dataclass
class EllipsoidPrivatization:
    rule: DecisionRule       # xbar = rule vector, X = I6
    noise: NoiseSpec
    inst: EllipsoidInstance
    solution: Solution
    program: ConicProgram

    @property
    def z_nominal(self) -> np.ndarray:
        return unpack_rule_vector(self.rule.xbar)[0]

    @property
    def Y_nominal(self) -> np.ndarray:
        return unpack_rule_vector(self.rule.xbar)[1]

    def release(self, seed: int, stream: int = 0):
        draw = sample_noise(self.noise, seed, 1, stream)[0]
        return unpack_rule_vector(self.rule.xbar + draw)


def privatize_ellipsoid(
    inst: EllipsoidInstance,
    noise: NoiseSpec,
    eta: float,
    seed: int = 0,
    beta: float = 0.01,
    obj_samples: int = 32,
    settings: SolverSettings | None = None,
) -> EllipsoidPrivatization:
    """Chance-constrained ellipse rule with the fixed identity recourse.

    Containment rows and the PSD row of the symmetric part are enforced on
    all 2^6 vertices of the empirical noise box; the objective maximizes a
    sample average of per-draw det hypograph variables (the expectation of
    det^(1/2) has no closed conic form).
    """
    if noise.k != RULE_DIM:
        raise ValueError(f"noise dim {noise.k}, expected {RULE_DIM}")
    check_bounded(inst)
    builder = ProgramBuilder()
    pin = np.eye(RULE_DIM)
    space = RuleSpace(builder, RULE_DIM, RULE_DIM,
                      np.ones((RULE_DIM, RULE_DIM), dtype=bool), pin, name="r")
    xb = space.xbar_idx  # (z1, z2, Y11, Y21, Y12, Y22)

    S = vertex_sample_size(eta, RULE_DIM, beta)
    box = hyperrectangle_vertices(sample_noise(noise, seed, S, BOX_STREAM))
    for vert in box:
        dz1, dz2, dy11, dy21, dy12, dy22 = vert
        for i in range(inst.m):
            a1, a2 = inst.a[i]
            # slack rows of the SOC: (b_i - a'(z+dz), Y(v)'a) with Y(v)' rows
            head = ({int(xb[0]): -a1, int(xb[1]): -a2},
                    float(inst.b[i] - a1 * dz1 - a2 * dz2))
            r1 = ({int(xb[2]): a1, int(xb[3]): a2}, float(a1 * dy11 + a2 * dy21))
            r2 = ({int(xb[4]): a1, int(xb[5]): a2}, float(a1 * dy12 + a2 * dy22))
            builder.add_block(ConeKind.SOC, [head, r1, r2])
        # symmetric part PSD: (Ys11, Ys22, sqrt2 Ys12) in RSOC
        ys12 = ({int(xb[3]): 0.5 * _SQRT2, int(xb[4]): 0.5 * _SQRT2},
                float(0.5 * _SQRT2 * (dy21 + dy12)))
        builder.add_block(ConeKind.RSOC, [
            ({int(xb[2]): 1.0}, float(dy11)),
            ({int(xb[5]): 1.0}, float(dy22)),
            ys12,
        ])

    obj_draws = sample_noise(noise, seed, obj_samples, OBJ_STREAM)
    for s in range(obj_samples):
        dz1, dz2, dy11, dy21, dy12, dy22 = obj_draws[s]
        t_s = builder.add_var(f"t[{s}]", obj=-1.0 / obj_samples)
        ys12 = ({int(xb[3]): 0.5 * _SQRT2, int(xb[4]): 0.5 * _SQRT2},
                float(0.5 * _SQRT2 * (dy21 + dy12)))
        builder.add_block(ConeKind.RSOC, [
            ({int(xb[2]): 1.0}, float(dy11)),
            ({int(xb[5]): 1.0}, float(dy22)),
            ({t_s: _SQRT2}, 0.0),
            ys12,
        ])

    program = builder.build()
    sol = solve(program, settings or DEFAULT_SETTINGS)
    if sol.status != Status.OPTIMAL:
        raise RuntimeError(f"privatized ellipsoid returned {sol.status.value}")
    rule = space.extract(sol.x)
    return EllipsoidPrivatization(rule=rule, noise=noise, inst=inst,
                                  solution=sol, program=program)
