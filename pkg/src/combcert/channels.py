"""Kraus / Choi / Stinespring representations of completely positive maps.

Conventions: a channel maps ``d_in -> d_out``. Its Choi operator lives on the
ordered pair (out, in) — row index (b, a) with ``b`` major — and equals
``sum_k |E_k>><<E_k|`` for any Kraus family, so ``tr C = d_in`` and
``tr_out C = I_in``. A Stinespring isometry stacks the Kraus blocks with the
ancilla index major: ``V = sum_i |i>_anc (x) E_i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import LabeledOperator, haar_isometry, herm_eig, trace_norm, vectorize

__all__ = [
    "Channel",
    "choi_from_kraus",
    "choi_operator",
    "kraus_from_choi",
    "kraus_rank",
    "stinespring",
    "channel_from_isometry",
    "random_channel",
    "apply_channel",
    "choi_distance_lb",
]


@dataclass(frozen=True)
class Channel:
    """CPTP map given by a Kraus family of d_out x d_in matrices."""

    kraus: tuple[np.ndarray, ...]
    completeness_tol: float = field(default=1e-10, compare=False)

    def __post_init__(self) -> None:
        ops = tuple(np.asarray(k, dtype=complex) for k in self.kraus)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        shape = ops[0].shape
        if len(shape) != 2 or any(k.shape != shape for k in ops):
            raise ValueError(f"Kraus operators must share one 2d shape, got {[k.shape for k in ops]}")
        object.__setattr__(self, "kraus", ops)
        defect = self.completeness_defect()
        if defect > self.completeness_tol:
            raise ValueError(
                f"Kraus family is not trace preserving: "
                f"||sum E^dagger E - I||_max = {defect:.3e} > {self.completeness_tol:.1e}"
            )

    @property
    def d_out(self) -> int:
        return self.kraus[0].shape[0]

    @property
    def d_in(self) -> int:
        return self.kraus[0].shape[1]

    def completeness_defect(self) -> float:
        acc = sum(k.conj().T @ k for k in self.kraus)
        return float(np.abs(acc - np.eye(self.d_in)).max())


def choi_from_kraus(kraus) -> np.ndarray:
    """Choi operator sum_k |E_k>><<E_k| on (out, in), out index major."""
    ops = kraus.kraus if isinstance(kraus, Channel) else tuple(np.asarray(k, dtype=complex) for k in kraus)
    d = ops[0].shape[0] * ops[0].shape[1]
    c = np.zeros((d, d), dtype=complex)
    for k in ops:
        v = vectorize(k)
        c += np.outer(v, v.conj())
    return c


def choi_operator(channel: Channel, out_label: str = "B", in_label: str = "A") -> LabeledOperator:
    """Choi of a channel as a labeled operator on (out_label, in_label)."""
    return LabeledOperator(
        choi_from_kraus(channel),
        ((out_label, channel.d_out), (in_label, channel.d_in)),
    )


def kraus_from_choi(choi: np.ndarray, d_out: int, d_in: int, rank_tol: float = 1e-10) -> list[np.ndarray]:
    """Kraus family from a Choi operator via its eigendecomposition.

    Keeps eigenvalues above ``rank_tol * lambda_max``. Each operator's global
    phase is fixed by making its largest-modulus entry real and positive, so
    the output is deterministic.
    """
    choi = np.asarray(choi, dtype=complex)
    if choi.shape != (d_out * d_in, d_out * d_in):
        raise ValueError(f"Choi shape {choi.shape} does not match d_out*d_in = {d_out * d_in}")
    vals, vecs = herm_eig(choi)
    lam_max = float(vals[-1]) if vals.size else 0.0
    if lam_max <= 0.0:
        raise ValueError("Choi operator has no positive spectrum")
    if float(vals[0]) < -rank_tol * lam_max:
        raise ValueError(f"Choi operator is not PSD: min eigenvalue {vals[0]:.3e}")
    ops = []
    for lam, v in zip(vals, vecs.T):
        if lam <= rank_tol * lam_max:
            continue
        e = np.sqrt(lam) * v.reshape(d_out, d_in)
        pivot = e.reshape(-1)[np.argmax(np.abs(e))]
        ops.append(e * (np.conj(pivot) / abs(pivot)))
    return ops


def kraus_rank(choi: np.ndarray, rank_tol: float = 1e-10) -> int:
    """Number of Choi eigenvalues above rank_tol * lambda_max."""
    vals = herm_eig(np.asarray(choi, dtype=complex)).values
    lam_max = float(vals[-1]) if vals.size else 0.0
    if lam_max <= 0.0:
        return 0
    return int(np.sum(vals > rank_tol * lam_max))


def stinespring(channel: Channel) -> np.ndarray:
    """Stinespring isometry V = sum_i |i>_anc (x) E_i, shape (r*d_out, d_in)."""
    return np.vstack(channel.kraus)


def channel_from_isometry(v: np.ndarray, anc_dim: int, tol: float = 1e-10) -> Channel:
    """Channel rho -> tr_anc(V rho V^dagger) for an isometry with ancilla-major rows."""
    v = np.asarray(v, dtype=complex)
    rows, d_in = v.shape
    if rows % anc_dim != 0:
        raise ValueError(f"row count {rows} is not divisible by ancilla dimension {anc_dim}")
    defect = float(np.abs(v.conj().T @ v - np.eye(d_in)).max())
    if defect > tol:
        raise ValueError(f"not an isometry: ||V^dagger V - I||_max = {defect:.3e}")
    d_out = rows // anc_dim
    return Channel(tuple(v[i * d_out : (i + 1) * d_out] for i in range(anc_dim)), completeness_tol=max(tol, 1e-10) * 10)


def random_channel(d_in: int, d_out: int, rank: int, rng: np.random.Generator) -> Channel:
    """Haar-random channel with Kraus rank at most ``rank``."""
    if d_out * rank < d_in:
        raise ValueError(f"need d_out * rank >= d_in for an isometry, got {d_out}*{rank} < {d_in}")
    return channel_from_isometry(haar_isometry(d_in, d_out * rank, rng), rank)


def apply_channel(channel: Channel, rho: np.ndarray) -> np.ndarray:
    """sum_k E_k rho E_k^dagger."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (channel.d_in, channel.d_in):
        raise ValueError(f"state shape {rho.shape} does not match d_in = {channel.d_in}")
    out = np.zeros((channel.d_out, channel.d_out), dtype=complex)
    for k in channel.kraus:
        out += k @ rho @ k.conj().T
    return out


def choi_distance_lb(choi_a: np.ndarray, choi_b: np.ndarray, d_in: int) -> float:
    """Diamond-distance lower bound ||C_A - C_B||_1 / d_in."""
    return trace_norm(np.asarray(choi_a) - np.asarray(choi_b)) / d_in
