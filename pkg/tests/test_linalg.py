import numpy as np
import pytest

from combcert.linalg import (
    LabeledOperator,
    devectorize,
    haar_isometry,
    haar_unitary,
    herm_eig,
    kron,
    nullspace,
    partial_trace,
    partial_transpose,
    pseudo_inverse,
    psd_check,
    random_psd,
    support_projector,
    trace_norm,
    vectorize,
)


def test_herm_eig_2x2_closed_form():
    # independent oracle: eigenvalues of [[a, b], [conj(b), c]] are
    # (a+c)/2 +- sqrt(((a-c)/2)^2 + |b|^2)
    rng = np.random.default_rng(11)
    for _ in range(25):
        a, c = rng.normal(size=2)
        b = rng.normal() + 1j * rng.normal()
        x = np.array([[a, b], [np.conj(b), c]])
        mid = (a + c) / 2
        rad = np.sqrt(((a - c) / 2) ** 2 + abs(b) ** 2)
        vals = herm_eig(x).values
        assert abs(vals[0] - (mid - rad)) < 1e-12
        assert abs(vals[1] - (mid + rad)) < 1e-12


def test_herm_eig_contract():
    rng = np.random.default_rng(12)
    for d in (1, 3, 7, 20):
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        x = g + g.conj().T
        vals, vecs = herm_eig(x)
        assert np.all(np.diff(vals) >= -1e-14)
        assert np.abs(vecs.conj().T @ vecs - np.eye(d)).max() < 1e-12
        recon = (vecs * vals) @ vecs.conj().T
        assert np.linalg.norm(recon - x) <= 1e-10 * max(1.0, np.linalg.norm(x))


def test_herm_eig_rejects_non_hermitian():
    with pytest.raises(ValueError):
        herm_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_psd_check():
    rng = np.random.default_rng(13)
    w = random_psd(6, rng)
    ok, lo, hi = psd_check(w)
    assert ok and lo > -1e-12 and hi > 0
    assert not psd_check(-np.eye(3)).ok
    # rank-deficient but PSD
    ok, lo, _ = psd_check(random_psd(6, rng, rank=2))
    assert ok and abs(lo) < 1e-10


def test_trace_norm_oracles():
    rng = np.random.default_rng(14)
    d = np.diag([3.0, -2.0, 0.5])
    assert abs(trace_norm(d) - 5.5) < 1e-12
    # rank one: ||u v^dagger||_1 = ||u|| ||v||
    u = rng.normal(size=5) + 1j * rng.normal(size=5)
    v = rng.normal(size=5) + 1j * rng.normal(size=5)
    assert abs(trace_norm(np.outer(u, v.conj())) - np.linalg.norm(u) * np.linalg.norm(v)) < 1e-10
    # unitary of dimension d has trace norm d
    assert abs(trace_norm(haar_unitary(4, rng)) - 4.0) < 1e-10
    # non-square input is fine
    m = rng.normal(size=(3, 5))
    s = np.linalg.svd(m, compute_uv=False)
    assert abs(trace_norm(m) - s.sum()) < 1e-12


def test_pseudo_inverse_against_numpy():
    rng = np.random.default_rng(15)
    for rank in (2, 5):
        x = random_psd(5, rng, rank=rank)
        p = pseudo_inverse(x)
        assert np.abs(p - np.linalg.pinv(x, hermitian=True)).max() < 1e-8
        assert np.abs(x @ p @ x - x).max() < 1e-9
        assert np.abs(p @ x @ p - p).max() < 1e-9
    assert np.abs(pseudo_inverse(np.zeros((3, 3)))).max() == 0.0


def test_support_projector():
    rng = np.random.default_rng(16)
    x = random_psd(6, rng, rank=3)
    p = support_projector(x)
    assert np.abs(p @ p - p).max() < 1e-10
    assert np.abs(p - p.conj().T).max() < 1e-12
    assert np.abs(p @ x - x).max() < 1e-9
    assert abs(np.trace(p).real - 3.0) < 1e-9


def test_nullspace():
    rng = np.random.default_rng(17)
    ns = nullspace(np.diag([1.0, 0.0]))
    assert ns.shape == (2, 1)
    assert abs(abs(ns[1, 0]) - 1.0) < 1e-12
    # random rank-r rectangular matrix
    a = rng.normal(size=(6, 3)) + 1j * rng.normal(size=(6, 3))
    b = rng.normal(size=(3, 8)) + 1j * rng.normal(size=(3, 8))
    m = a @ b
    ns = nullspace(m)
    assert ns.shape == (8, 5)
    assert np.abs(m @ ns).max() < 1e-10
    assert np.abs(ns.conj().T @ ns - np.eye(5)).max() < 1e-12


def test_haar_unitary_is_unitary():
    rng = np.random.default_rng(18)
    for d in (1, 2, 5):
        u = haar_unitary(d, rng)
        assert np.abs(u.conj().T @ u - np.eye(d)).max() < 1e-12


def test_haar_unitary_first_entry_moment():
    # E |U_00|^2 = 1/d for Haar measure; |U_00|^2 ~ Beta(1, d-1)
    rng = np.random.default_rng(19)
    d, n = 3, 2000
    vals = np.array([abs(haar_unitary(d, rng)[0, 0]) ** 2 for _ in range(n)])
    sigma = np.sqrt((d - 1) / (d**2 * (d + 1)) / n)
    assert abs(vals.mean() - 1 / d) < 5 * sigma


def test_haar_isometry():
    rng = np.random.default_rng(20)
    v = haar_isometry(3, 7, rng)
    assert v.shape == (7, 3)
    assert np.abs(v.conj().T @ v - np.eye(3)).max() < 1e-12
    with pytest.raises(ValueError):
        haar_isometry(4, 3, rng)


def test_vectorize_conventions():
    rng = np.random.default_rng(21)
    x = rng.normal(size=(3, 4)) + 1j * rng.normal(size=(3, 4))
    assert np.abs(devectorize(vectorize(x), 3, 4) - x).max() == 0.0
    # |psi><phi| vectorizes to psi (x) conj(phi)
    psi = rng.normal(size=3) + 1j * rng.normal(size=3)
    phi = rng.normal(size=4) + 1j * rng.normal(size=4)
    assert np.abs(vectorize(np.outer(psi, phi.conj())) - np.kron(psi, phi.conj())).max() < 1e-14
    # vec(A X B) = (A (x) B^T) vec(X)
    a = rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3))
    b = rng.normal(size=(4, 5)) + 1j * rng.normal(size=(4, 5))
    lhs = vectorize(a @ x @ b)
    rhs = kron(a, b.T) @ vectorize(x)
    assert np.abs(lhs - rhs).max() < 1e-12
    # <<X|Y>> = tr(X^dagger Y)
    y = rng.normal(size=(3, 4)) + 1j * rng.normal(size=(3, 4))
    assert abs(np.vdot(vectorize(x), vectorize(y)) - np.trace(x.conj().T @ y)) < 1e-12


def test_partial_trace_oracles():
    rng = np.random.default_rng(22)
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    b = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    x = np.kron(a, b)
    assert np.abs(partial_trace(x, (3, 4), [1]) - np.trace(b) * a).max() < 1e-12
    assert np.abs(partial_trace(x, (3, 4), [0]) - np.trace(a) * b).max() < 1e-12
    assert abs(partial_trace(x, (3, 4), [0, 1])[0, 0] - np.trace(a) * np.trace(b)) < 1e-12
    # trace preservation on a random three-factor operator
    y = rng.normal(size=(24, 24)) + 1j * rng.normal(size=(24, 24))
    red = partial_trace(y, (2, 3, 4), [1])
    assert red.shape == (8, 8)
    assert abs(np.trace(red) - np.trace(y)) < 1e-12
    with pytest.raises(ValueError):
        partial_trace(y, (2, 3), [0])


def test_partial_transpose_oracles():
    rng = np.random.default_rng(23)
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    x = np.kron(a, b)
    assert np.abs(partial_transpose(x, (2, 3), [1]) - np.kron(a, b.T)).max() < 1e-12
    y = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    twice = partial_transpose(partial_transpose(y, (2, 3), [0]), (2, 3), [0])
    assert np.abs(twice - y).max() == 0.0
    assert np.abs(partial_transpose(y, (2, 3), [0, 1]) - y.T).max() == 0.0


def test_labeled_operator_basics():
    rng = np.random.default_rng(24)
    a = LabeledOperator(rng.normal(size=(2, 2)), (("A", 2),))
    b = LabeledOperator(rng.normal(size=(3, 3)), (("B", 3),))
    ab = a.tensor(b)
    assert ab.labels == ("A", "B")
    assert np.abs(ab.mat - np.kron(a.mat, b.mat)).max() == 0.0
    ba = ab.reorder(("B", "A"))
    assert np.abs(ba.mat - np.kron(b.mat, a.mat)).max() < 1e-14
    assert np.abs(ba.reorder(("A", "B")).mat - ab.mat).max() < 1e-14
    with pytest.raises(ValueError):
        a.tensor(LabeledOperator(np.eye(2), (("A", 2),)))
    with pytest.raises(ValueError):
        LabeledOperator(np.eye(5), (("A", 2), ("B", 3)))


def test_labeled_operator_partial_ops_match_plain():
    rng = np.random.default_rng(25)
    m = rng.normal(size=(30, 30)) + 1j * rng.normal(size=(30, 30))
    op = LabeledOperator(m, (("X", 2), ("Y", 3), ("Z", 5)))
    red = op.partial_trace(["Y"])
    assert red.labels == ("X", "Z")
    assert np.abs(red.mat - partial_trace(m, (2, 3, 5), [1])).max() == 0.0
    flipped = op.partial_transpose(["X", "Z"])
    assert np.abs(flipped.mat - partial_transpose(m, (2, 3, 5), [0, 2])).max() == 0.0
    scalar = op.partial_trace(["X", "Y", "Z"])
    assert scalar.spaces == ()
    assert abs(scalar.mat[0, 0] - np.trace(m)) < 1e-12
