"""Dense complex linear algebra for small multipartite quantum systems.

Everything operates on plain numpy arrays: kets are 1-D complex vectors,
operators are square complex matrices.  The computational basis of an
n-partite system is lexicographic with subsystem 0 most significant, so
``tensor(A, B)`` places ``A`` on the most significant index block
(numpy ``kron`` convention).  All functions are pure; arrays should be
treated as immutable once constructed.
"""

from __future__ import annotations

import numpy as np

# Tolerance policy: structural invariants (hermiticity, trace, POVM
# completeness) at 1e-9, eigendecomposition reconstruction at 1e-8,
# score comparisons at 1e-7.  Dimensions stay <= ~100, so double
# precision leaves a wide margin.
ATOL = 1e-9
EIG_ATOL = 1e-8
SCORE_ATOL = 1e-7


def dag(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.conj(a).T


def basis(dim: int, i: int) -> np.ndarray:
    """Computational basis ket |i> in dimension ``dim``."""
    if not 0 <= i < dim:
        raise ValueError(f"basis index {i} out of range for dimension {dim}")
    e = np.zeros(dim, dtype=complex)
    e[i] = 1.0
    return e


def proj(psi: np.ndarray) -> np.ndarray:
    """Rank-1 projector |psi><psi|."""
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def tensor(*factors) -> np.ndarray:
    """Kronecker product of kets or operators, leftmost factor most significant.

    Accepts either ``tensor(a, b, c)`` or ``tensor([a, b, c])``.
    """
    if len(factors) == 1 and isinstance(factors[0], (list, tuple)):
        factors = tuple(factors[0])
    if len(factors) == 0:
        raise ValueError("tensor requires at least one factor")
    out = np.asarray(factors[0], dtype=complex)
    for f in factors[1:]:
        out = np.kron(out, np.asarray(f, dtype=complex))
    return out


def clock(d: int) -> np.ndarray:
    """Clock operator Z = sum_j exp(2*pi*i*j/d) |j><j|."""
    if d < 2:
        raise ValueError(f"clock requires d >= 2, got {d}")
    phases = np.exp(2j * np.pi * np.arange(d) / d)
    return np.diag(phases)


def shift(d: int) -> np.ndarray:
    """Shift operator X = sum_j |j+1 mod d><j|."""
    if d < 2:
        raise ValueError(f"shift requires d >= 2, got {d}")
    x = np.zeros((d, d), dtype=complex)
    for j in range(d):
        x[(j + 1) % d, j] = 1.0
    return x


def _check_dims(op: np.ndarray, dims) -> list:
    dims = [int(d) for d in dims]
    total = int(np.prod(dims))
    if op.shape != (total, total):
        raise ValueError(
            f"operator shape {op.shape} incompatible with subsystem dims {dims}"
        )
    return dims


def partial_trace(op: np.ndarray, dims, keep) -> np.ndarray:
    """Trace out all subsystems not listed in ``keep`` (0-based indices).

    Kept subsystems retain their original relative order.
    """
    op = np.asarray(op, dtype=complex)
    dims = _check_dims(op, dims)
    n = len(dims)
    if isinstance(keep, (int, np.integer)):
        keep = [int(keep)]
    keep = sorted(set(int(k) for k in keep))
    if not keep or any(k < 0 or k >= n for k in keep):
        raise ValueError(f"keep={keep} must be a nonempty subset of 0..{n - 1}")
    t = op.reshape(dims + dims)
    traced = [k for k in range(n) if k not in keep]
    # Trace highest index first so lower axis positions stay valid.
    for k in sorted(traced, reverse=True):
        t = np.trace(t, axis1=k, axis2=k + (t.ndim // 2))
    dim_keep = int(np.prod([dims[k] for k in keep]))
    return t.reshape(dim_keep, dim_keep)


def partial_transpose(op: np.ndarray, dims, sys=None) -> np.ndarray:
    """Transpose the listed subsystems (default: the last one)."""
    op = np.asarray(op, dtype=complex)
    dims = _check_dims(op, dims)
    n = len(dims)
    if sys is None:
        sys = [n - 1]
    if isinstance(sys, (int, np.integer)):
        sys = [int(sys)]
    sys = sorted(set(int(s) for s in sys))
    if any(s < 0 or s >= n for s in sys):
        raise ValueError(f"sys={sys} out of range for {n} subsystems")
    t = op.reshape(dims + dims)
    axes = list(range(2 * n))
    for s in sys:
        axes[s], axes[s + n] = axes[s + n], axes[s]
    total = int(np.prod(dims))
    return t.transpose(axes).reshape(total, total)


def permute_systems(op: np.ndarray, dims, order) -> np.ndarray:
    """Reorder subsystems: output slot j holds input subsystem ``order[j]``."""
    op = np.asarray(op, dtype=complex)
    dims = _check_dims(op, dims)
    n = len(dims)
    order = [int(p) for p in order]
    if sorted(order) != list(range(n)):
        raise ValueError(f"order={order} is not a permutation of 0..{n - 1}")
    t = op.reshape(dims + dims)
    axes = order + [p + n for p in order]
    total = int(np.prod(dims))
    return t.transpose(axes).reshape(total, total)


def is_hermitian(op: np.ndarray, atol: float = ATOL) -> bool:
    op = np.asarray(op)
    return op.ndim == 2 and op.shape[0] == op.shape[1] and np.max(np.abs(op - dag(op))) <= atol


def min_eigenvalue(op: np.ndarray) -> float:
    """Smallest eigenvalue of a Hermitian operator."""
    return float(np.linalg.eigvalsh(op)[0])


def is_psd(op: np.ndarray, atol: float = ATOL) -> bool:
    return is_hermitian(op, atol) and min_eigenvalue((op + dag(op)) / 2) >= -atol


def is_unitary(op: np.ndarray, atol: float = ATOL) -> bool:
    op = np.asarray(op)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        return False
    return np.max(np.abs(op @ dag(op) - np.eye(op.shape[0]))) <= atol


def is_density_matrix(op: np.ndarray, atol: float = ATOL) -> bool:
    return is_psd(op, atol) and abs(np.trace(op) - 1.0) <= atol


def is_povm(elements, atol: float = ATOL) -> bool:
    elements = [np.asarray(e, dtype=complex) for e in elements]
    if not elements:
        return False
    dim = elements[0].shape[0]
    if any(not is_psd(e, atol) for e in elements):
        return False
    total = sum(elements)
    return np.max(np.abs(total - np.eye(dim))) <= atol


def eig_hermitian(op: np.ndarray, atol: float = ATOL):
    """Eigendecomposition of a Hermitian operator, eigenvalues descending.

    Returns ``(w, V)`` with ``op = V @ diag(w) @ V.conj().T`` and the
    columns of ``V`` holding the eigenvectors in matching order.
    """
    op = np.asarray(op, dtype=complex)
    if not is_hermitian(op, atol):
        raise ValueError("eig_hermitian requires a Hermitian operator")
    w, v = np.linalg.eigh((op + dag(op)) / 2)
    return w[::-1].copy(), v[:, ::-1].copy()


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a Ginibre matrix with phase fix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r).copy()
    ph /= np.abs(ph)
    return q * ph


def haar_isometry(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """Random isometry (rows x cols, rows >= cols) with orthonormal columns."""
    if rows < cols:
        raise ValueError(f"isometry needs rows >= cols, got {rows} < {cols}")
    z = (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r).copy()
    ph /= np.abs(ph)
    return q * ph


def random_ket(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density matrix from a Ginibre factor of the given rank."""
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ dag(g)
    return rho / np.trace(rho).real


def embed_local(op: np.ndarray, dims, k: int) -> np.ndarray:
    """Embed a (possibly rectangular) single-subsystem operator at slot ``k``.

    ``op`` maps dimension ``dims[k]`` to any output dimension; the other
    subsystems get identities.
    """
    dims = [int(d) for d in dims]
    pre = int(np.prod(dims[:k])) if k > 0 else 1
    post = int(np.prod(dims[k + 1:])) if k < len(dims) - 1 else 1
    return np.kron(np.eye(pre), np.kron(op, np.eye(post)))


def polar_project(mat: np.ndarray) -> np.ndarray:
    """Nearest matrix with orthonormal columns (unitary when square).

    The maximizer of Re Tr[V^dag M] over isometries V is the polar
    factor U W^dag of the SVD M = U S W^dag.
    """
    u, _, vh = np.linalg.svd(mat, full_matrices=False)
    return u @ vh


def apply_kraus(kraus, rho: np.ndarray) -> np.ndarray:
    """Apply a channel given by a Kraus list (or stacked array) to ``rho``."""
    rho = np.asarray(rho, dtype=complex)
    out = None
    for K in kraus:
        term = K @ rho @ dag(K)
        out = term if out is None else out + term
    if out is None:
        raise ValueError("empty Kraus list")
    return out
