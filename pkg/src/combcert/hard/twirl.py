"""Three routes to the rotation-twirled gamma operators.

Gamma_i = E_U[ rho(U) |gamma_i><gamma_i| rho(U)^dagger ] with
rho(U) = (R(U) (x) I_{d1})^{(x) n} and the expectation over the Haar measure
of the rotor group U(d2 - d1).

Routes:
  * exact-commutant — the twirl is the Hilbert-Schmidt-orthogonal projection
    onto the commutant of the rho image; a nullspace of stacked commutator
    maps over a few generic generators pins the commutant down exactly.
  * permutation-frame (Weingarten-style) — for the i twirled slots the
    commutant of U^{(x) i} (x) I is spanned by permutation operators; the
    frame projection with the (pseudo-inverted) cycle Gram matrix gives the
    twirl in closed form, valid for any rotor dimension including singular
    Gram matrices.
  * monte-carlo — a batched Haar-sample average, for spot checks at scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations
from math import comb

import numpy as np

from ..linalg import haar_unitary, haar_unitary_batch, herm_eig, vectorize
from .instance import HardInstanceSpec, gamma_state, kron_power

__all__ = [
    "COMMUTANT_DIM_CAP",
    "PERMUTATION_ORDER_CAP",
    "CommutantProjector",
    "commutant_projector",
    "rho_action",
    "gamma_twirl",
    "gamma_twirl_exact_commutant",
    "gamma_twirl_weingarten",
    "gamma_twirl_monte_carlo",
]

COMMUTANT_DIM_CAP = 48
PERMUTATION_ORDER_CAP = 4


def rho_action(spec: HardInstanceSpec, n: int, u: np.ndarray, iota: np.ndarray | None = None) -> np.ndarray:
    """(R(U) (x) I_{d1})^{(x) n} on the full slot space."""
    slot = np.kron(spec.rotor(u, iota), np.eye(spec.d1))
    return kron_power(slot, n)


@dataclass(frozen=True)
class CommutantProjector:
    """Orthonormal basis of a matrix-group commutant, as vectorized columns."""

    basis: np.ndarray
    dim: int

    @property
    def commutant_dim(self) -> int:
        return self.basis.shape[1]

    def twirl(self, x: np.ndarray) -> np.ndarray:
        """Hilbert-Schmidt-orthogonal projection of x onto the commutant."""
        x = np.asarray(x, dtype=complex)
        if x.shape != (self.dim, self.dim):
            raise ValueError(f"operator shape {x.shape} does not match dimension {self.dim}")
        v = self.basis.conj().T @ x.reshape(-1)
        return (self.basis @ v).reshape(self.dim, self.dim)


def commutant_projector(
    spec: HardInstanceSpec,
    n: int,
    seed: int = 0,
    n_generators: int = 4,
    dim_cap: int = COMMUTANT_DIM_CAP,
    nullspace_tol: float = 1e-10,
) -> CommutantProjector:
    """Projector onto the commutant of {rho(U)} from generic Haar generators.

    A generic tuple of group elements generates a dense subgroup, so the
    joint commutant of ``n_generators`` Haar samples equals the commutant of
    the whole rho image almost surely. The commutant is recovered as the
    nullspace of H = sum_g C_g^dagger C_g with C_g the commutator map
    X -> gX - Xg on vectorized operators.
    """
    d_slot = spec.d1 * spec.d2
    dim = d_slot**n
    if dim > dim_cap:
        raise ValueError(
            f"exact-commutant twirl dimension {dim} exceeds the cap {dim_cap}; "
            f"use the permutation-frame or monte-carlo route"
        )
    rng = np.random.default_rng(seed)
    iota = spec.complement_basis()
    eye = np.eye(dim)
    h = np.zeros((dim * dim, dim * dim), dtype=complex)
    for _ in range(n_generators):
        g = rho_action(spec, n, haar_unitary(spec.rotor_dim, rng), iota)
        c = np.kron(g, eye) - np.kron(eye, g.T)
        h += c.conj().T @ c
    vals, vecs = herm_eig(h)
    cut = nullspace_tol * max(1.0, float(vals[-1]))
    basis = vecs[:, vals <= cut]
    return CommutantProjector(basis=basis, dim=dim)


def gamma_twirl_exact_commutant(
    spec: HardInstanceSpec,
    n: int,
    i: int,
    projector: CommutantProjector | None = None,
    seed: int = 0,
    dim_cap: int = COMMUTANT_DIM_CAP,
) -> np.ndarray:
    """Gamma_i as the commutant projection of |gamma_i><gamma_i|."""
    if projector is None:
        projector = commutant_projector(spec, n, seed=seed, dim_cap=dim_cap)
    g = gamma_state(spec, n, i)
    out = projector.twirl(np.outer(g, g.conj()))
    return (out + out.conj().T) / 2


def _perm_matrix(sigma: tuple[int, ...], k: int) -> np.ndarray:
    """Permutation operator P_sigma on (C^k)^{(x) i}: factor t receives the
    former factor sigma^{-1}(t)."""
    i = len(sigma)
    dim = k**i
    digits = np.array(np.unravel_index(np.arange(dim), (k,) * i))
    inv = np.argsort(np.asarray(sigma))
    x_digits = digits[inv, :] if i else digits
    x_index = np.ravel_multi_index(tuple(x_digits), (k,) * i)
    p = np.zeros((dim, dim))
    p[x_index, np.arange(dim)] = 1.0
    return p


def _cycle_count(sigma: tuple[int, ...]) -> int:
    seen = [False] * len(sigma)
    count = 0
    for start in range(len(sigma)):
        if seen[start]:
            continue
        count += 1
        t = start
        while not seen[t]:
            seen[t] = True
            t = sigma[t]
    return count


def _compose(sigma: tuple[int, ...], tau: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(sigma[t] for t in tau)


def _invert(sigma: tuple[int, ...]) -> tuple[int, ...]:
    inv = [0] * len(sigma)
    for a, b in enumerate(sigma):
        inv[b] = a
    return tuple(inv)


def _interleave_slots(vec: np.ndarray, k: int, d1: int, i: int) -> np.ndarray:
    """(w_1..w_i, a_1..a_i) grouped order -> (w_1, a_1, ..., w_i, a_i)."""
    t = vec.reshape((k,) * i + (d1,) * i)
    order = [ax for pair in zip(range(i), range(i, 2 * i)) for ax in pair]
    return t.transpose(order).reshape(-1)


def _group_slots(vec: np.ndarray, k: int, d1: int, i: int) -> np.ndarray:
    """(w_1, a_1, ..., w_i, a_i) -> (w_1..w_i, a_1..a_i)."""
    t = vec.reshape(tuple(dim for _ in range(i) for dim in (k, d1)))
    order = list(range(0, 2 * i, 2)) + list(range(1, 2 * i, 2))
    return t.transpose(order).reshape(-1)


def _twirled_core(delta_coords: np.ndarray, i: int, rank_tol: float = 1e-12):
    """Eigendecomposition of N = E_U[(U^{(x)i} (x) I) |d^{(x)i}><d^{(x)i}| (...)^dg].

    Works in the grouped order (W^{(x)i}, A^{(x)i}). The frame projection
    P(X) = sum_{s,t} (G^+)_{st} p(s) (x) tr_W[(p(t)^dg (x) I) X] with
    G_{st} = k^{cycles(s^{-1} t)} realizes the Haar average even when the
    permutation operators are linearly dependent (k < i), because the
    pseudo-inverse still yields the orthogonal projection onto their span.
    """
    k, d1 = delta_coords.shape
    psi = _group_slots(kron_power(vectorize(delta_coords), i), k, d1, i)
    k_i, a_i = k**i, d1**i
    psi_mat = psi.reshape(k_i, a_i)

    perms = list(permutations(range(i)))
    mats = [_perm_matrix(s, k) for s in perms]
    gram = np.array(
        [[float(k) ** _cycle_count(_compose(_invert(s), t)) for t in perms] for s in perms]
    )
    gram_pinv = np.linalg.pinv(gram, rcond=1e-12, hermitian=True)

    partials = []
    for p in mats:
        phi = p.conj().T @ psi_mat
        partials.append(phi.T @ psi_mat.conj())
    core = np.zeros((k_i * a_i, k_i * a_i), dtype=complex)
    for s_idx in range(len(perms)):
        b = np.zeros((a_i, a_i), dtype=complex)
        for t_idx in range(len(perms)):
            b += gram_pinv[s_idx, t_idx] * partials[t_idx]
        core += np.kron(mats[s_idx], b)
    core = (core + core.conj().T) / 2
    vals, vecs = herm_eig(core, check_tol=1e-8)
    lam_max = float(vals[-1]) if vals.size else 0.0
    keep = vals > rank_tol * max(lam_max, 1e-300)
    return vals[keep], vecs[:, keep]


def gamma_twirl_weingarten(
    spec: HardInstanceSpec,
    n: int,
    i: int,
    order_cap: int = PERMUTATION_ORDER_CAP,
) -> np.ndarray:
    """Gamma_i via the permutation-frame projection on the i twirled slots.

    The twirl only touches the rotated branch factors, so the core operator
    on (W (x) A)^{(x) i} is twirled once, eigendecomposed, and each eigenvector
    is embedded into every size-i slot subset, tensored with |V0>> elsewhere.
    """
    if not 0 <= i <= n:
        raise ValueError(f"need 0 <= i <= n, got i={i}, n={n}")
    if i > order_cap:
        raise ValueError(
            f"permutation-frame route supports at most {order_cap} rotated slots, got i={i}; "
            f"use the exact-commutant or monte-carlo route"
        )
    d1, d2 = spec.d1, spec.d2
    slot = d1 * d2
    dim = slot**n
    if i == 0:
        g = gamma_state(spec, n, 0)
        return np.outer(g, g.conj())

    iota = spec.complement_basis()
    k = spec.rotor_dim
    nu, cols = _twirled_core(spec.delta_coords(iota), i)
    if cols.shape[1] == 0:
        return np.zeros((dim, dim), dtype=complex)

    embed = kron_power(np.kron(iota, np.eye(d1)), i)
    embedded = embed @ np.stack(
        [_interleave_slots(c, k, d1, i) for c in cols.T], axis=1
    )
    v0_rest = kron_power(vectorize(spec.v0), n - i) if n > i else np.ones(1, dtype=complex)

    g_cols = np.zeros((dim, embedded.shape[1]), dtype=complex)
    for subset in combinations(range(n), i):
        chosen = set(subset)
        rest = [j for j in range(n) if j not in chosen]
        axes = []
        for j in range(n):
            axes.append(subset.index(j) if j in chosen else i + rest.index(j))
        for m in range(embedded.shape[1]):
            t = np.kron(embedded[:, m], v0_rest).reshape((slot,) * n)
            g_cols[:, m] += t.transpose(axes).reshape(-1)
    gamma_i = (g_cols * nu) @ g_cols.conj().T / comb(n, i)
    return (gamma_i + gamma_i.conj().T) / 2


def gamma_twirl_monte_carlo(
    spec: HardInstanceSpec,
    n: int,
    i: int,
    samples: int = 100_000,
    seed: int = 0,
    batch: int = 2000,
) -> tuple[np.ndarray, float]:
    """Haar-sample estimate of Gamma_i plus the entrywise standard-error scale
    d1^n / sqrt(samples)."""
    rng = np.random.default_rng(seed)
    d1, d2 = spec.d1, spec.d2
    k = spec.rotor_dim
    iota = spec.complement_basis()
    p0 = spec.v0 @ spec.v0.conj().T
    g = gamma_state(spec, n, i)
    dim = g.size

    acc = np.zeros((dim, dim), dtype=complex)
    done = 0
    while done < samples:
        nb = min(batch, samples - done)
        u = haar_unitary_batch(k, nb, rng)
        rot = p0[None, :, :] + np.einsum("ak,nkl,bl->nab", iota, u, iota.conj(), optimize=True)
        y = np.broadcast_to(g, (nb, dim)).reshape((nb,) + (d2, d1) * n).copy()
        for j in range(n):
            axis = 1 + 2 * j
            moved = np.moveaxis(y, axis, 1)
            moved = np.einsum("nxy,ny...->nx...", rot, moved, optimize=True)
            y = np.moveaxis(moved, 1, axis)
        yf = y.reshape(nb, dim)
        acc += yf.T @ yf.conj()
        done += nb
    est = acc / samples
    return (est + est.conj().T) / 2, float(d1**n / np.sqrt(samples))


def gamma_twirl(
    spec: HardInstanceSpec,
    n: int,
    i: int,
    method: str = "auto",
    seed: int = 0,
    samples: int = 100_000,
    projector: CommutantProjector | None = None,
) -> np.ndarray:
    """Dispatch to a twirl route; ``auto`` picks an exact one or fails loudly."""
    dim = (spec.d1 * spec.d2) ** n
    if method == "auto":
        if i <= PERMUTATION_ORDER_CAP:
            method = "weingarten"
        elif dim <= COMMUTANT_DIM_CAP:
            method = "exact-commutant"
        else:
            raise ValueError(
                f"no exact route for i={i}, dimension {dim}; "
                f"request method='monte-carlo' explicitly"
            )
    if method == "weingarten":
        return gamma_twirl_weingarten(spec, n, i)
    if method == "exact-commutant":
        return gamma_twirl_exact_commutant(spec, n, i, projector=projector, seed=seed)
    if method == "monte-carlo":
        return gamma_twirl_monte_carlo(spec, n, i, samples=samples, seed=seed)[0]
    raise ValueError(f"unknown twirl method {method!r}")
