"""Dense complex linear algebra primitives shared by every verification layer.

All matrices are plain ``numpy.ndarray`` with complex dtype, row-major
vectorization throughout: ``vec(X) = X.reshape(-1)``, so ``|i><j|`` maps to
``e_i (x) conj(e_j)`` and ``vec(A X B) = (A (x) B^T) vec(X)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

__all__ = [
    "EigDecomposition",
    "PsdCheck",
    "LabeledOperator",
    "kron",
    "dagger",
    "vectorize",
    "devectorize",
    "partial_trace",
    "partial_transpose",
    "herm_eig",
    "psd_check",
    "trace_norm",
    "pseudo_inverse",
    "psd_sqrt",
    "support_projector",
    "nullspace",
    "haar_unitary",
    "haar_unitary_batch",
    "haar_isometry",
    "random_psd",
]


class EigDecomposition(NamedTuple):
    """Hermitian eigendecomposition: ascending real values, column eigenvectors."""

    values: np.ndarray
    vectors: np.ndarray


class PsdCheck(NamedTuple):
    ok: bool
    min_eig: float
    max_eig: float


def dagger(x: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.asarray(x).conj().T


def kron(*factors: np.ndarray) -> np.ndarray:
    """Kronecker product of one or more matrices, left to right."""
    if not factors:
        raise ValueError("kron needs at least one factor")
    out = np.asarray(factors[0])
    for f in factors[1:]:
        out = np.kron(out, np.asarray(f))
    return out


def vectorize(x: np.ndarray) -> np.ndarray:
    """Row-major vectorization |X>> of a matrix."""
    return np.asarray(x).reshape(-1)


def devectorize(v: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vectorize` for a ``rows x cols`` matrix."""
    v = np.asarray(v)
    if v.size != rows * cols:
        raise ValueError(f"cannot devectorize length {v.size} into {rows}x{cols}")
    return v.reshape(rows, cols)


def _as_square(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {x.shape}")
    return x


def partial_trace(x: np.ndarray, dims: Sequence[int], trace_out: Iterable[int]) -> np.ndarray:
    """Trace out the tensor factors listed in ``trace_out``.

    ``x`` is a square matrix on the tensor product of subsystems with
    dimensions ``dims`` (row-major Kronecker order). Returns the reduced
    matrix on the remaining factors, in their original relative order.
    """
    x = _as_square(x)
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    if x.shape[0] != int(np.prod(dims)):
        raise ValueError(f"dims {dims} do not match matrix dimension {x.shape[0]}")
    traced = sorted(set(int(a) for a in trace_out))
    if any(a < 0 or a >= n for a in traced):
        raise ValueError(f"trace_out {traced} out of range for {n} factors")
    keep = [a for a in range(n) if a not in traced]
    t = x.reshape(dims + dims)
    ket = list(range(n))
    bra = [a if a in traced else n + a for a in range(n)]
    out_axes = [a for a in keep] + [n + a for a in keep]
    reduced = np.einsum(t, ket + bra, out_axes)
    d_keep = int(np.prod([dims[a] for a in keep])) if keep else 1
    return reduced.reshape(d_keep, d_keep)


def partial_transpose(x: np.ndarray, dims: Sequence[int], transpose: Iterable[int]) -> np.ndarray:
    """Transpose the listed tensor factors in place of the full transpose."""
    x = _as_square(x)
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    if x.shape[0] != int(np.prod(dims)):
        raise ValueError(f"dims {dims} do not match matrix dimension {x.shape[0]}")
    flip = set(int(a) for a in transpose)
    if any(a < 0 or a >= n for a in flip):
        raise ValueError(f"transpose axes {sorted(flip)} out of range for {n} factors")
    t = x.reshape(dims + dims)
    perm = [n + a if a in flip else a for a in range(n)]
    perm += [a if a in flip else n + a for a in range(n)]
    return t.transpose(perm).reshape(x.shape)


def herm_eig(x: np.ndarray, check_tol: float = 1e-10) -> EigDecomposition:
    """Eigendecomposition of a Hermitian matrix.

    Validates Hermiticity to ``check_tol * max(1, ||x||_F)`` and then
    diagonalizes the Hermitian part. Eigenvalues come back ascending with
    orthonormal column eigenvectors.
    """
    x = _as_square(x)
    scale = max(1.0, float(np.linalg.norm(x)))
    asym = float(np.linalg.norm(x - x.conj().T))
    if asym > check_tol * scale:
        raise ValueError(
            f"matrix is not Hermitian: ||X - X^dagger||_F = {asym:.3e} "
            f"exceeds {check_tol:.1e} * {scale:.3e}"
        )
    vals, vecs = np.linalg.eigh((x + x.conj().T) / 2.0)
    return EigDecomposition(values=vals, vectors=vecs)


def psd_check(x: np.ndarray, tol: float = 1e-10, check_tol: float = 1e-10) -> PsdCheck:
    """Positive-semidefiniteness test with an eigenvalue floor.

    PSD iff lambda_min >= -tol * max(1, lambda_max).
    """
    vals = herm_eig(x, check_tol=check_tol).values
    lo = float(vals[0]) if vals.size else 0.0
    hi = float(vals[-1]) if vals.size else 0.0
    return PsdCheck(ok=lo >= -tol * max(1.0, hi), min_eig=lo, max_eig=hi)


def trace_norm(x: np.ndarray) -> float:
    """Sum of singular values."""
    x = np.asarray(x)
    if x.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {x.shape}")
    return float(np.linalg.svd(x, compute_uv=False).sum())


def pseudo_inverse(x: np.ndarray, rank_tol: float = 1e-10) -> np.ndarray:
    """Moore-Penrose inverse of a Hermitian PSD matrix on its support.

    Eigenvalues above ``rank_tol * lambda_max`` are inverted; the rest are
    treated as exact zeros (support convention).
    """
    vals, vecs = herm_eig(x)
    lam_max = float(vals[-1]) if vals.size else 0.0
    if lam_max <= 0.0:
        return np.zeros_like(np.asarray(x, dtype=complex))
    keep = vals > rank_tol * lam_max
    inv = np.zeros_like(vals)
    inv[keep] = 1.0 / vals[keep]
    return (vecs * inv) @ vecs.conj().T


def psd_sqrt(x: np.ndarray, check_tol: float = 1e-10) -> np.ndarray:
    """Hermitian square root of a PSD matrix (negative eigenvalues clipped to 0)."""
    vals, vecs = herm_eig(x, check_tol=check_tol)
    root = np.sqrt(np.clip(vals, 0.0, None))
    return (vecs * root) @ vecs.conj().T


def support_projector(x: np.ndarray, rank_tol: float = 1e-10) -> np.ndarray:
    """Orthogonal projector onto the support of a Hermitian PSD matrix."""
    vals, vecs = herm_eig(x)
    lam_max = float(vals[-1]) if vals.size else 0.0
    if lam_max <= 0.0:
        return np.zeros_like(np.asarray(x, dtype=complex))
    cols = vecs[:, vals > rank_tol * lam_max]
    return cols @ cols.conj().T


def nullspace(m: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (columns) of the right nullspace of ``m``.

    Singular values <= tol * sigma_max count as zero.
    """
    m = np.asarray(m)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {m.shape}")
    _, s, vh = np.linalg.svd(m, full_matrices=True)
    sigma_max = float(s[0]) if s.size else 0.0
    rank = int(np.sum(s > tol * sigma_max)) if sigma_max > 0 else 0
    return vh[rank:].conj().T


def haar_isometry(d_in: int, d_out: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random isometry with ``d_in`` orthonormal columns in C^{d_out}.

    Complex Ginibre sample, reduced QR, then the R-diagonal phase correction
    that makes the distribution exactly Haar.
    """
    if d_out < d_in:
        raise ValueError(f"isometry needs d_out >= d_in, got {d_out} < {d_in}")
    if d_in < 1:
        raise ValueError(f"d_in must be positive, got {d_in}")
    g = rng.standard_normal((d_out, d_in)) + 1j * rng.standard_normal((d_out, d_in))
    q, r = np.linalg.qr(g)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary on C^dim."""
    return haar_isometry(dim, dim, rng)


def haar_unitary_batch(dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Stack of ``count`` independent Haar-random unitaries, shape (count, dim, dim)."""
    g = rng.standard_normal((count, dim, dim)) + 1j * rng.standard_normal((count, dim, dim))
    q, r = np.linalg.qr(g)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[:, None, :]


def random_psd(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random PSD matrix G G^dagger with G complex Ginibre of shape (dim, rank)."""
    r = dim if rank is None else int(rank)
    if r < 1 or r > dim:
        raise ValueError(f"rank must be in [1, {dim}], got {r}")
    g = rng.standard_normal((dim, r)) + 1j * rng.standard_normal((dim, r))
    return g @ g.conj().T


@dataclass(frozen=True)
class LabeledOperator:
    """Square operator on a tensor product of named spaces.

    ``spaces`` fixes the Kronecker order of ``mat``; operations address
    factors by label so callers never juggle raw axis indices. An empty
    ``spaces`` tuple means a scalar stored as a 1x1 matrix.
    """

    mat: np.ndarray
    spaces: tuple[tuple[str, int], ...]

    def __post_init__(self) -> None:
        mat = np.asarray(self.mat, dtype=complex)
        object.__setattr__(self, "mat", mat)
        spaces = tuple((str(lbl), int(d)) for lbl, d in self.spaces)
        object.__setattr__(self, "spaces", spaces)
        labels = [lbl for lbl, _ in spaces]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate labels in {labels}")
        if any(d < 1 for _, d in spaces):
            raise ValueError(f"space dimensions must be positive: {spaces}")
        d_total = int(np.prod([d for _, d in spaces])) if spaces else 1
        if mat.ndim != 2 or mat.shape != (d_total, d_total):
            raise ValueError(
                f"matrix shape {mat.shape} does not match spaces {spaces} "
                f"(expected {(d_total, d_total)})"
            )

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lbl for lbl, _ in self.spaces)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.spaces)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def dim_of(self, label: str) -> int:
        for lbl, d in self.spaces:
            if lbl == label:
                return d
        raise KeyError(f"no space labeled {label!r} in {self.labels}")

    def trace(self) -> complex:
        return complex(np.trace(self.mat))

    @staticmethod
    def identity(spaces: Sequence[tuple[str, int]]) -> "LabeledOperator":
        d = int(np.prod([dim for _, dim in spaces])) if spaces else 1
        return LabeledOperator(np.eye(d, dtype=complex), tuple(spaces))

    def tensor(self, other: "LabeledOperator") -> "LabeledOperator":
        overlap = set(self.labels) & set(other.labels)
        if overlap:
            raise ValueError(f"tensor factors share labels {sorted(overlap)}")
        return LabeledOperator(np.kron(self.mat, other.mat), self.spaces + other.spaces)

    def reorder(self, new_labels: Sequence[str]) -> "LabeledOperator":
        """Permute tensor factors into the order given by ``new_labels``."""
        new_labels = tuple(new_labels)
        if sorted(new_labels) != sorted(self.labels):
            raise ValueError(f"reorder labels {new_labels} != current {self.labels}")
        if new_labels == self.labels:
            return self
        n = len(self.spaces)
        idx = [self.labels.index(lbl) for lbl in new_labels]
        t = self.mat.reshape(self.dims + self.dims)
        perm = idx + [n + i for i in idx]
        new_spaces = tuple(self.spaces[i] for i in idx)
        return LabeledOperator(t.transpose(perm).reshape(self.dim, self.dim), new_spaces)

    def partial_trace(self, labels: Sequence[str]) -> "LabeledOperator":
        """Trace out the named spaces."""
        drop = self._positions(labels)
        reduced = partial_trace(self.mat, self.dims, drop)
        keep = tuple(sp for i, sp in enumerate(self.spaces) if i not in set(drop))
        return LabeledOperator(reduced, keep)

    def partial_transpose(self, labels: Sequence[str]) -> "LabeledOperator":
        """Transpose the named spaces."""
        flip = self._positions(labels)
        return LabeledOperator(partial_transpose(self.mat, self.dims, flip), self.spaces)

    def _positions(self, labels: Sequence[str]) -> list[int]:
        out = []
        for lbl in labels:
            if lbl not in self.labels:
                raise KeyError(f"no space labeled {lbl!r} in {self.labels}")
            out.append(self.labels.index(lbl))
        return out
