"""Optimality-loss evaluation and CVaR co-optimization.

The loss of a rule against the deterministic optimum is itself random; its
tail is controlled by minimizing the empirical conditional value-at-risk

    min_gamma  gamma + 1/((1-q) S) sum_s [loss_s - gamma]^+,

either after the fact (cvar_empirical) or inside the transformed program by
appending the epigraph variables (gamma, z_1..z_S).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conic import ConeKind, ConicProgram, Solution
from .dp import NoiseSpec, sample_noise
from .ldr import DecisionRule, PrivatizedProgram


@dataclass(frozen=True)
class CVaRSpec:
    """Tail-averaging parameters: optimize the mean of the worst (1-q) share."""

    q: float
    samples: int
    loss: tuple[float, ...]  # linear loss functional over the rule variables

    def __post_init__(self):
        if not 0 < self.q < 1:
            raise ValueError("q must be in (0, 1)")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")

    @property
    def loss_vector(self) -> np.ndarray:
        return np.asarray(self.loss, dtype=float)


def optimality_loss(
    rule: DecisionRule,
    base: Solution,
    loss: np.ndarray,
    noise: NoiseSpec,
    samples: int,
    seed: int,
    stream: int = 0,
) -> dict:
    """Per-sample and mean loss of the rule against the deterministic optimum.

    loss_s = l'(xbar + X zeta_s) - l'(x*), for the linear functional l.
    """
    loss = np.asarray(loss, dtype=float).ravel()
    zetas = sample_noise(noise, seed, samples, stream)
    values = rule.evaluate_many(zetas) @ loss
    base_value = float(loss @ base.x)
    per_sample = values - base_value
    return {"mean": float(per_sample.mean()), "samples": per_sample}


def var_empirical(losses: np.ndarray, q: float) -> float:
    """Empirical (1-q)-tail value-at-risk: the optimal gamma of the CVaR program."""
    losses = np.asarray(losses, dtype=float).ravel()
    if losses.size == 0:
        raise ValueError("losses must be nonempty")
    if not 0 < q < 1:
        raise ValueError("q must be in (0, 1)")
    S = losses.size
    w = (1.0 - q) * S
    j = int(np.ceil(w - 1e-12))
    ordered = np.sort(losses)[::-1]
    return float(ordered[min(j, S) - 1])


def cvar_empirical(losses: np.ndarray, q: float) -> float:
    """Average of the worst (1-q) fraction of losses, by sorting.

    Equals the optimum of min_gamma gamma + 1/((1-q)S) sum [loss-gamma]^+.
    """
    losses = np.asarray(losses, dtype=float).ravel()
    if losses.size == 0:
        raise ValueError("losses must be nonempty")
    if not 0 < q < 1:
        raise ValueError("q must be in (0, 1)")
    S = losses.size
    w = (1.0 - q) * S
    ordered = np.sort(losses)[::-1]
    j = int(np.ceil(w - 1e-12))
    full = ordered[: j - 1].sum()
    partial = (w - (j - 1)) * ordered[min(j, S) - 1]
    return float((full + partial) / w)


def augment_with_cvar(
    privatized: PrivatizedProgram,
    spec: CVaRSpec,
    seed: int,
    stream: int = 1,
    blend: float = 0.0,
) -> tuple[ConicProgram, dict]:
    """Append the CVaR epigraph of the rule's loss to a transformed program.

    New variables gamma (free) and z_1..z_S >= 0 with
    z_s >= l'(xbar + X zeta_s) - gamma; the objective becomes
    gamma + 1/((1-q)S) sum z_s, optionally blended with the original
    expected-cost objective (blend * old + cvar).  The query constraints on
    X are untouched, which is what keeps the privacy guarantee intact.

    Returns the augmented program and a layout dict with the new variable
    indices and the drawn samples.
    """
    base = privatized.program
    space = privatized.space
    loss = spec.loss_vector
    if loss.shape[0] != space.n:
        raise ValueError("loss functional must match the rule dimension")
    zetas = sample_noise(privatized.noise, seed, spec.samples, stream)
    S = spec.samples

    n0 = base.n
    gamma_idx = n0
    z_idx = np.arange(n0 + 1, n0 + 1 + S)
    n_new = n0 + 1 + S

    A_parts = [np.hstack([base.A, np.zeros((base.m, 1 + S))])]
    b_parts = [base.b]
    blocks = [(blk.kind.value, blk.dim) for blk in base.cones.blocks]

    # z_s >= 0 and z_s >= l'(xbar + X zeta_s) - gamma
    A_pos = np.zeros((S, n_new))
    A_pos[np.arange(S), z_idx] = -1.0
    A_parts.append(A_pos)
    b_parts.append(np.zeros(S))
    blocks.append((ConeKind.NONNEG.value, S))

    A_epi = np.zeros((S, n_new))
    b_epi = np.zeros(S)
    for s in range(S):
        # slack = z_s + gamma - l'(xbar + X zeta_s) >= 0
        A_epi[s, z_idx[s]] = -1.0
        A_epi[s, gamma_idx] = -1.0
        for i in range(space.n):
            if loss[i] == 0.0:
                continue
            A_epi[s, space.xbar_idx[i]] += loss[i]
            for j in range(space.k):
                contrib = loss[i] * zetas[s, j]
                if space.pin_mask[i, j]:
                    b_epi[s] += contrib * space.pin_values[i, j]
                else:
                    A_epi[s, space.X_idx[i, j]] += contrib
    b_epi = -b_epi  # move pinned contribution into the constant of the slack
    A_parts.append(A_epi)
    b_parts.append(b_epi)
    blocks.append((ConeKind.NONNEG.value, S))

    c = np.concatenate([blend * base.c, np.zeros(1 + S)])
    c[gamma_idx] = 1.0
    c[z_idx] = 1.0 / ((1.0 - spec.q) * S)

    names = tuple(base.variable_names or ()) or tuple(f"v[{i}]" for i in range(n0))
    names = names + ("gamma",) + tuple(f"z[{s}]" for s in range(S))
    from .conic import ConeSpec

    augmented = ConicProgram(np.vstack(A_parts), np.concatenate(b_parts), c,
                             ConeSpec(blocks), variable_names=names)
    layout = {"gamma": gamma_idx, "z": z_idx, "zetas": zetas}
    return augmented, layout
