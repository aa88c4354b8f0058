"""Certifying the weighted-twirl domination of the hard-family vectors.

For the admissible parameter window, the weighted sum sum_i lambda_i Gamma_i
dominates |V(U)><V(U)|^{(x) n} for every group element U. The certificate is
numeric and two-route: the scalar form q(U) = sum_i <v|Gamma_i^+|v> / lambda_i
<= 1 together with a support check, and the direct minimum eigenvalue of the
difference operator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, exp, log, sqrt

import numpy as np

from ..linalg import haar_unitary, herm_eig, pseudo_inverse, support_projector, vectorize
from .instance import HardInstanceSpec, gamma_state, kron_power
from .twirl import gamma_twirl

__all__ = [
    "WEIGHT_BUDGET_CONSTANT",
    "DominationResult",
    "LambdaSchedule",
    "domination_check",
    "lambda_schedule",
    "symmetric_span_dim",
    "twirl_trace_bound",
]

WEIGHT_BUDGET_CONSTANT = 2 * exp(4.0)


@dataclass(frozen=True)
class LambdaSchedule:
    """Weights lambda_0..lambda_n with their admissibility data.

    ``log_weights`` is the exact log-domain form; ``weights`` is its
    exponential and underflows to zero deep in the geometric tail, so
    log-domain consumers should prefer ``log_weights``.
    """

    d1: int
    d2: int
    n: int
    eps: float
    log_weights: tuple[float, ...]
    sum_bound: float

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(exp(w) for w in self.log_weights)

    @property
    def total(self) -> float:
        return float(sum(self.weights))


def lambda_schedule(d1: int, d2: int, n: int, eps: float) -> LambdaSchedule:
    """Weight schedule: a flat head of 2*d1*d2*exp(sqrt(8*n*eps^2*d1*d2)) for
    i < d1*d2 and a geometric tail exp(-i) beyond, valid when
    1 <= n <= d1*d2 / (B*eps^2) with B = 2e^4."""
    d = d1 * d2
    if d < 2:
        raise ValueError(f"need d1*d2 >= 2, got {d}")
    if not 0 < eps < 1:
        raise ValueError(f"need 0 < eps < 1, got {eps}")
    n_max = d / (WEIGHT_BUDGET_CONSTANT * eps**2)
    if not 1 <= n <= n_max:
        raise ValueError(
            f"round count n={n} outside the admissible window [1, {n_max:.6g}] "
            f"for d1*d2={d}, eps={eps}"
        )
    log_head = log(2.0 * d) + sqrt(8.0 * n * eps**2 * d)
    log_weights = tuple(log_head if i < d else -float(i) for i in range(n + 1))
    sum_bound = 3.0 * d1**2 * d2**2 * exp(sqrt(8.0 * n * eps**2 * d))
    sched = LambdaSchedule(
        d1=d1, d2=d2, n=n, eps=eps, log_weights=log_weights, sum_bound=sum_bound
    )
    if sched.total > sum_bound:
        raise ValueError(
            f"weight sum {sched.total:.6g} exceeds its closed-form bound {sum_bound:.6g}"
        )
    return sched


@dataclass(frozen=True)
class DominationResult:
    """Evidence that sum_i lambda_i Gamma_i >= |v(U)><v(U)| over sampled U."""

    d1: int
    d2: int
    n: int
    eps: float
    n_samples: int
    max_quadratic_form: float
    quadratic_forms: tuple[float, ...]
    max_support_residual: float
    min_eig_ratio: float
    trace_bound_margin: float
    ok: bool
    details: dict = field(default_factory=dict, compare=False)


def twirl_trace_bound(x: np.ndarray, twirled: np.ndarray) -> float:
    """tr(twirled^+ x), the scalar that the support dimension of the twirl
    bounds from above: for x PSD with twirled = E[g x g^dagger] over a unitary
    group, tr(twirled^+ x) <= rank(twirled)."""
    return float(np.trace(pseudo_inverse(twirled) @ x).real)


def symmetric_span_dim(d: int, m: int, rng: np.random.Generator, oversample: int = 5) -> int:
    """Numeric dimension of span{phi^{(x) m} : phi in C^d} via a sampled Gram
    matrix; the closed form is binom(d+m-1, m)."""
    target = comb(d + m - 1, m)
    count = target + oversample
    vecs = np.empty((count, d**m), dtype=complex)
    for idx in range(count):
        phi = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        phi /= np.linalg.norm(phi)
        vecs[idx] = kron_power(phi, m)
    gram = vecs @ vecs.conj().T
    vals, _ = herm_eig(gram)
    lam_max = float(vals[-1]) if vals.size else 0.0
    return int(np.count_nonzero(vals > 1e-8 * max(lam_max, 1e-300)))


def domination_check(
    spec: HardInstanceSpec,
    n: int,
    eps: float,
    n_samples: int = 20,
    seed: int = 0,
    method: str = "auto",
    support_tol: float = 1e-9,
    eig_tol: float = 1e-8,
) -> DominationResult:
    """Certify sum_i lambda_i Gamma_i >= |v(U)><v(U)|^{(x)n} on Haar samples U.

    The quadratic form q(U) = sum_i c_i(U)-weighted Gamma_i^+ energies is a
    group invariant, so the sampled values double as an invariance probe; the
    direct eigenvalue route on the difference operator is kept as an
    independent second reading.
    """
    d1, d2 = spec.d1, spec.d2
    sched = lambda_schedule(d1, d2, n, eps)
    rng = np.random.default_rng(seed)
    iota = spec.complement_basis()

    gammas = [gamma_twirl(spec, n, i, method=method, seed=seed) for i in range(n + 1)]
    pinvs = [pseudo_inverse(g) for g in gammas]

    trace_margin = -np.inf
    for i in range(n + 1):
        g_vec = gamma_state(spec, n, i)
        bound = comb(d1 * d2 + i - 2, i)
        val = float((g_vec.conj() @ (pinvs[i] @ g_vec)).real)
        trace_margin = max(trace_margin, val - bound)

    weighted = sum(w * g for w, g in zip(sched.weights, gammas))
    lam_total = sched.total
    joint_support = support_projector(weighted)

    q_values = []
    max_support_residual = 0.0
    min_eig_ratio = np.inf
    for _ in range(n_samples):
        u = haar_unitary(spec.rotor_dim, rng)
        v = kron_power(vectorize(spec.member(eps, u, iota)), n)
        norm_v = np.linalg.norm(v)

        # pseudo-inverses vanish off their support, so each term reads the
        # energy of the v-component inside the matching twirl support
        q = sum(
            float((v.conj() @ (pinvs[i] @ v)).real) / sched.weights[i]
            for i in range(n + 1)
        )
        residual = float(np.linalg.norm(v - joint_support @ v)) / norm_v

        diff = weighted - np.outer(v, v.conj())
        vals, _ = herm_eig(diff, check_tol=1e-8)
        min_eig_ratio = min(min_eig_ratio, float(vals[0]) / lam_total)

        q_values.append(q)
        max_support_residual = max(max_support_residual, residual)

    max_q = max(q_values)
    ok = (
        max_q <= 1.0 + 1e-9
        and max_support_residual <= support_tol
        and min_eig_ratio >= -eig_tol
        and trace_margin <= 1e-6
    )
    return DominationResult(
        d1=d1,
        d2=d2,
        n=n,
        eps=eps,
        n_samples=n_samples,
        max_quadratic_form=max_q,
        quadratic_forms=tuple(q_values),
        max_support_residual=max_support_residual,
        min_eig_ratio=min_eig_ratio,
        trace_bound_margin=trace_margin,
        ok=ok,
        details={"lambda_total": lam_total, "lambda_sum_bound": sched.sum_bound},
    )
