"""Dense complex linear algebra on multipartite operators.

All operators are plain complex numpy arrays living on a tensor product of
finite-dimensional factors.  Factor dimensions are passed as a sequence such
as ``(2, 2, 2, 2)``; the factor order is fixed globally and never reordered
implicitly.  Alongside Kronecker products, partial trace/transpose and a
cyclic Jacobi eigensolver, this module provides decompositions over the
product Hilbert-Schmidt basis (identity plus traceless Hermitian elements
per factor), which downstream code uses to reason about which tensor
factors an operator acts on nontrivially.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Iterable, Sequence

import numpy as np

HERMITICITY_TOL = 1e-10


def as_square_matrix(matrix, name: str = "matrix") -> np.ndarray:
    """Coerce to a square complex ndarray, raising on bad shape."""
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {m.shape}")
    return m


def check_factor_dims(matrix: np.ndarray, dims: Sequence[int], name: str = "matrix") -> tuple[int, ...]:
    """Validate that ``matrix`` is square with side equal to the product of ``dims``."""
    dims = tuple(int(d) for d in dims)
    if not dims or any(d <= 0 for d in dims):
        raise ValueError(f"factor dimensions must be positive, got {dims}")
    side = math.prod(dims)
    if matrix.shape != (side, side):
        raise ValueError(
            f"{name} has shape {matrix.shape}, expected {(side, side)} for factor dimensions {dims}"
        )
    return dims


def hermiticity_defect(matrix) -> float:
    """Max-entry distance from ``matrix`` to its own conjugate transpose."""
    m = np.asarray(matrix, dtype=complex)
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def require_hermitian(matrix, tol: float = HERMITICITY_TOL, name: str = "matrix") -> np.ndarray:
    m = as_square_matrix(matrix, name)
    defect = hermiticity_defect(m)
    if defect > tol:
        raise ValueError(f"{name} is not Hermitian: max |M - M^dag| = {defect:.3e} > {tol:.1e}")
    return m


def tensor_product(factors: Iterable[np.ndarray]) -> np.ndarray:
    """Kronecker product of the given matrices, in list order."""
    mats = [np.asarray(f, dtype=complex) for f in factors]
    if not mats:
        raise ValueError("tensor_product requires at least one factor")
    return reduce(np.kron, mats)


def partial_trace(matrix, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every factor not listed in ``keep``.

    The kept factors preserve their original relative order; the result is a
    square matrix of side ``prod(dims[i] for i in keep)``.  Tracing all
    factors returns a 1x1 matrix holding the trace.
    """
    m = as_square_matrix(matrix)
    dims = check_factor_dims(m, dims)
    n = len(dims)
    keep_set = set(int(i) for i in keep)
    for i in keep_set:
        if not 0 <= i < n:
            raise IndexError(f"keep index {i} out of range for {n} factors")
    kept = sorted(keep_set)

    t = m.reshape(dims + dims)
    row = list(range(n))
    col = [i if i not in keep_set else n + i for i in range(n)]
    out = kept + [n + i for i in kept]
    reduced = np.einsum(t, row + col, out)
    side = math.prod(dims[i] for i in kept) if kept else 1
    return reduced.reshape(side, side)


def partial_transpose(matrix, dims: Sequence[int], subset: Iterable[int]) -> np.ndarray:
    """Transpose the factors in ``subset`` only.  Involutive."""
    m = as_square_matrix(matrix)
    dims = check_factor_dims(m, dims)
    n = len(dims)
    sub = set(int(i) for i in subset)
    for i in sub:
        if not 0 <= i < n:
            raise IndexError(f"subset index {i} out of range for {n} factors")
    t = m.reshape(dims + dims)
    axes = [n + i if i in sub else i for i in range(n)] + [i if i in sub else n + i for i in range(n)]
    return t.transpose(axes).reshape(m.shape)


def frobenius_inner(a, b) -> complex:
    """Hilbert-Schmidt pairing Tr(A^dag B)."""
    am = as_square_matrix(a, "a")
    bm = as_square_matrix(b, "b")
    if am.shape != bm.shape:
        raise ValueError(f"dimension mismatch: {am.shape} vs {bm.shape}")
    return complex(np.vdot(am, bm))


def _offdiag_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def hermitian_eig(matrix, max_sweeps: int = 100, off_tol: float = 1e-13):
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues real and
    ascending and eigenvectors as the corresponding orthonormal columns.
    Each rotation zeroes one off-diagonal pair via a phased 2x2 rotation;
    sweeps repeat until the off-diagonal Frobenius norm drops below
    ``off_tol`` (scaled by the matrix norm) or ``max_sweeps`` is reached.
    Sized for operators up to a few hundred rows, where robustness matters
    more than speed.
    """
    a = require_hermitian(matrix, name="matrix")
    n = a.shape[0]
    a = (a + a.conj().T) / 2.0
    v = np.eye(n, dtype=complex)
    if n == 1:
        return np.array([a[0, 0].real]), v

    threshold = off_tol * max(1.0, float(np.linalg.norm(a)))
    skip = max(threshold / (n * n), 1e-300)
    for _ in range(max_sweeps):
        if _offdiag_norm(a) < threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= skip:
                    continue
                phase = apq / mag
                app = a[p, p].real
                aqq = a[q, q].real
                tau = (aqq - app) / (2.0 * mag)
                if tau >= 0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # 2x2 unitary [[c, s], [-s conj(phase), c conj(phase)]] diagonalizes
                # the (p, q) submatrix; apply it to columns, its adjoint to rows.
                j = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                a[:, [p, q]] = a[:, [p, q]] @ j
                a[[p, q], :] = j.conj().T @ a[[p, q], :]
                v[:, [p, q]] = v[:, [p, q]] @ j

    evals = np.real(np.diag(a))
    order = np.argsort(evals, kind="stable")
    return evals[order], v[:, order]


@lru_cache(maxsize=None)
def hermitian_basis(dim: int) -> np.ndarray:
    """Orthogonal Hermitian basis for one factor: identity then traceless elements.

    Normalization is Tr(t_j t_k) = dim * delta_jk for every element including
    the identity.  For dim 2 this is exactly (identity, sigma_x, sigma_y,
    sigma_z); higher dimensions use rescaled generalized Gell-Mann matrices
    in the order symmetric/antisymmetric pair elements followed by the
    diagonal ladder.
    """
    if dim <= 0:
        raise ValueError(f"dimension must be positive, got {dim}")
    scale = math.sqrt(dim / 2.0)
    elems = [np.eye(dim, dtype=complex)]
    for k in range(1, dim):
        for j in range(k):
            sym = np.zeros((dim, dim), dtype=complex)
            sym[j, k] = sym[k, j] = 1.0
            elems.append(scale * sym)
            anti = np.zeros((dim, dim), dtype=complex)
            anti[j, k] = -1.0j
            anti[k, j] = 1.0j
            elems.append(scale * anti)
    for level in range(1, dim):
        diag = np.zeros((dim, dim), dtype=complex)
        diag[np.arange(level), np.arange(level)] = 1.0
        diag[level, level] = -float(level)
        elems.append(scale * math.sqrt(2.0 / (level * (level + 1))) * diag)
    basis = np.stack(elems, axis=0)
    basis.setflags(write=False)
    return basis


@dataclass(frozen=True)
class HSDecomposition:
    """Real coefficients of a Hermitian operator over the product basis.

    ``coefficients[t1, ..., tn]`` multiplies the product of per-factor basis
    elements with those indices; index 0 is the identity on each factor, so
    the all-zero entry equals Tr(M) / total dimension.
    """

    dims: tuple[int, ...]
    coefficients: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        shape = tuple(d * d for d in dims)
        coeffs = np.asarray(self.coefficients, dtype=float)
        if coeffs.shape != shape:
            raise ValueError(f"coefficients have shape {coeffs.shape}, expected {shape} for factors {dims}")
        coeffs = coeffs.copy()
        coeffs.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def total_dim(self) -> int:
        return math.prod(self.dims)


_EINSUM_PATHS: dict = {}


def _cached_einsum(key, operands, output_labels):
    """einsum with the contraction path computed once per (dims, direction)."""
    args: list = []
    for op, labels in operands:
        args.extend([op, labels])
    args.append(output_labels)
    path = _EINSUM_PATHS.get(key)
    if path is None:
        path = np.einsum_path(*args, optimize="optimal")[0]
        _EINSUM_PATHS[key] = path
    return np.einsum(*args, optimize=path)


def hs_decompose(matrix, dims: Sequence[int]) -> HSDecomposition:
    """Expand a Hermitian matrix over the product Hilbert-Schmidt basis.

    Coefficients are c_T = Tr(M B_T) / ||B_T||_F^2 and are real for Hermitian
    input; ``hs_reconstruct`` inverts the expansion exactly.
    """
    m = require_hermitian(matrix)
    dims = check_factor_dims(m, dims)
    n = len(dims)
    operands = [(m.reshape(dims + dims), list(range(2 * n)))]
    for f, d in enumerate(dims):
        operands.append((hermitian_basis(d), [2 * n + f, n + f, f]))
    coeffs = _cached_einsum(("dec", dims), operands, list(range(2 * n, 3 * n)))
    return HSDecomposition(dims, np.real(coeffs) / math.prod(dims))


def hs_reconstruct(decomposition: HSDecomposition) -> np.ndarray:
    """Rebuild the Hermitian matrix from its product-basis coefficients."""
    dims = decomposition.dims
    n = len(dims)
    operands = [(decomposition.coefficients, list(range(2 * n, 3 * n)))]
    for f, d in enumerate(dims):
        operands.append((hermitian_basis(d), [2 * n + f, f, n + f]))
    t = _cached_einsum(("rec", dims), operands, list(range(2 * n)))
    side = math.prod(dims)
    return np.ascontiguousarray(t.reshape(side, side))
