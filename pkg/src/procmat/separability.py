"""Causal separability of bipartite process matrices.

A process matrix is causally separable when it splits as a convex mixture
p * W_ab + (1 - p) * W_ba of two one-way-signaling processes (W_ab trivial
on Bob's output, W_ba trivial on Alice's output).  For matrices that are
diagonal in fixed input bases this module builds such a split explicitly:

  1. write d * W = (1 + lambda0) * 1 + kappa1 + kappa2 with kappa1 trivial
     on B2, kappa2 trivial on A2 and kappa1 + kappa2 >= 0 (``kappa_split``);
  2. per input block (n, m) the kappas act as A_(n,m) (x) 1 and
     1 (x) B_(n,m); diagonalize those blocks (``eigenstructure``);
  3. shift eigenvalue weight between the kappas blockwise until both sides
     are positive, and normalize (``constructive_decomposition``).

The input-diagonal structure makes the kappas commute with each other and
with every input-block projector, and makes their joint eigenvectors
products; both facts are verified numerically rather than assumed.  For
general matrices ``dykstra_separability`` searches for a split directly by
alternating projections, which also serves as an independent cross-check of
the constructive path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .effective import MeasurementBasis, as_basis, is_input_diagonal
from .process import (
    ProcessMatrix,
    SystemLayout,
    ValidityReport,
    _allowed_coefficient_mask,
    validate_process,
)
from .tensor import (
    HSDecomposition,
    hermitian_basis,
    hermitian_eig,
    hs_decompose,
    hs_reconstruct,
    partial_trace,
    tensor_product,
)

SEPARABLE = "separable"
NOT_SEPARABLE = "not-separable-up-to-tolerance"
INCONCLUSIVE = "inconclusive"

_SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
_EYE2 = np.eye(2, dtype=complex)


class NotInputDiagonalError(ValueError):
    """The matrix is not input-diagonal in the given bases."""


class EigenstructureError(RuntimeError):
    """A block is not of the required product form or a commutator is too large."""


class DecompositionError(RuntimeError):
    """Internal consistency failure while assembling a causal decomposition."""


def commutator_norm(x, y) -> float:
    """Frobenius norm of XY - YX."""
    xm = np.asarray(x, dtype=complex)
    ym = np.asarray(y, dtype=complex)
    if xm.shape != ym.shape:
        raise ValueError(f"dimension mismatch: {xm.shape} vs {ym.shape}")
    return float(np.linalg.norm(xm @ ym - ym @ xm))


@dataclass(frozen=True)
class KappaSplit:
    """The split d * W = (1 + lambda0) * 1 + kappa1 + kappa2.

    ``lambda0`` is the minimal eigenvalue of d * W - 1; the identity shift
    -lambda0 is allocated between the kappas by ``alpha`` (fraction assigned
    to kappa1), which leaves their sum, and hence W, unchanged.
    """

    layout: SystemLayout
    lambda0: float
    kappa1: np.ndarray
    kappa2: np.ndarray
    alpha: float


def kappa_split(w_eff: ProcessMatrix, alpha: float = 1.0) -> KappaSplit:
    """Split d * W_eff - 1 into a B2-trivial and an A2-trivial part.

    Hilbert-Schmidt terms nontrivial on B2 go to kappa2, everything else
    (input-only terms included) to kappa1; the identity is then shifted so
    kappa1 + kappa2 has minimal eigenvalue zero.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    layout = w_eff.layout
    report = validate_process(w_eff)
    if not report.overall:
        raise ValueError(
            f"kappa_split needs a valid process matrix; offending terms {report.offending_terms}, "
            f"min eigenvalue {report.min_eigenvalue:.3e}, trace {report.trace_value:.6f}"
        )
    side = layout.d_total
    g = layout.d * w_eff.matrix - np.eye(side)
    evals, _ = hermitian_eig(g)
    lambda0 = float(evals[0])
    if lambda0 < -1.0 - 1e-9:
        raise ValueError(f"minimal eigenvalue {lambda0:.6f} below -1; matrix cannot be a valid process")

    dec = hs_decompose(g, layout.dims)
    coeffs = dec.coefficients
    b2_nontrivial = np.zeros(coeffs.shape, dtype=bool)
    b2_nontrivial[..., 1:] = True
    c2 = np.where(b2_nontrivial, coeffs, 0.0)
    c1 = np.where(b2_nontrivial, 0.0, coeffs)
    eye = np.eye(side)
    kappa1 = hs_reconstruct(HSDecomposition(layout.dims, c1)) - alpha * lambda0 * eye
    kappa2 = hs_reconstruct(HSDecomposition(layout.dims, c2)) - (1.0 - alpha) * lambda0 * eye
    return KappaSplit(layout, lambda0, kappa1, kappa2, alpha)


@dataclass(frozen=True)
class EigenStructure:
    """Blockwise eigendata of a kappa split over the input bases.

    For each input block (n, m), ``block_a[n, m]`` is the operator A_(n,m)
    with kappa1 acting as A_(n,m) (x) 1 on that block, ``m1[n, a, m]`` its
    ascending eigenvalues and ``a_bases[n, m]`` the eigenvector columns;
    ``block_b``/``m2[n, m, b]``/``b_bases`` mirror this for kappa2.  The
    residuals record how well the product form, the commutation relations
    and the joint product eigenvectors hold.
    """

    basis_a1: MeasurementBasis
    basis_b1: MeasurementBasis
    block_a: np.ndarray
    block_b: np.ndarray
    m1: np.ndarray
    m2: np.ndarray
    a_bases: np.ndarray
    b_bases: np.ndarray
    product_form_residual: float
    kappa_commutator: float
    projector_commutator: float
    eigen_residual: float


def _input_blocks(kappa: np.ndarray, layout: SystemLayout, ua1: np.ndarray, ub1: np.ndarray) -> np.ndarray:
    """Diagonal input blocks <n, m| kappa |n, m> as matrices on A2 (x) B2."""
    t = kappa.reshape(layout.dims + layout.dims)
    blocks = np.einsum(
        "in,jn,km,lm,irksjtlu->nmrstu",
        ua1.conj(), ua1, ub1.conj(), ub1, t, optimize=True,
    )
    d_out = layout.d_a2 * layout.d_b2
    return blocks.reshape(layout.d_a1, layout.d_b1, d_out, d_out)


def eigenstructure(split: KappaSplit, basis_a1, basis_b1, w_eff: ProcessMatrix,
                   tol: float = 1e-8) -> EigenStructure:
    """Extract and diagonalize the per-block operators of a kappa split.

    Requires ``w_eff`` to be input-diagonal in the given bases; raises
    :class:`EigenstructureError` when a block fails the A (x) 1 / 1 (x) B
    product form or a commutation residual exceeds ``tol``.
    """
    layout = split.layout
    ba1 = as_basis(basis_a1, layout.d_a1)
    bb1 = as_basis(basis_b1, layout.d_b1)
    diagonal, off_norm = is_input_diagonal(w_eff, ba1, bb1, tol=tol)
    if not diagonal:
        raise NotInputDiagonalError(
            f"matrix is not input-diagonal in the given bases: off-block norm {off_norm:.3e} > {tol:.1e}"
        )

    d_a2, d_b2 = layout.d_a2, layout.d_b2
    blocks1 = _input_blocks(split.kappa1, layout, ba1.vectors, bb1.vectors)
    blocks2 = _input_blocks(split.kappa2, layout, ba1.vectors, bb1.vectors)

    block_a = np.zeros((layout.d_a1, layout.d_b1, d_a2, d_a2), dtype=complex)
    block_b = np.zeros((layout.d_a1, layout.d_b1, d_b2, d_b2), dtype=complex)
    m1 = np.zeros((layout.d_a1, d_a2, layout.d_b1))
    m2 = np.zeros((layout.d_a1, layout.d_b1, d_b2))
    a_bases = np.zeros((layout.d_a1, layout.d_b1, d_a2, d_a2), dtype=complex)
    b_bases = np.zeros((layout.d_a1, layout.d_b1, d_b2, d_b2), dtype=complex)

    product_residual = 0.0
    for n in range(layout.d_a1):
        for m in range(layout.d_b1):
            b1 = blocks1[n, m]
            a_op = partial_trace(b1, (d_a2, d_b2), keep={0}) / d_b2
            res_a = float(np.linalg.norm(b1 - np.kron(a_op, np.eye(d_b2))))
            b2_ = blocks2[n, m]
            b_op = partial_trace(b2_, (d_a2, d_b2), keep={1}) / d_a2
            res_b = float(np.linalg.norm(b2_ - np.kron(np.eye(d_a2), b_op)))
            product_residual = max(product_residual, res_a, res_b)
            if res_a > tol or res_b > tol:
                raise EigenstructureError(
                    f"block ({n}, {m}) is not of product form: residuals {res_a:.3e}, {res_b:.3e}"
                )
            evals_a, vecs_a = hermitian_eig(a_op)
            evals_b, vecs_b = hermitian_eig(b_op)
            block_a[n, m] = a_op
            block_b[n, m] = b_op
            m1[n, :, m] = evals_a
            m2[n, m, :] = evals_b
            a_bases[n, m] = vecs_a
            b_bases[n, m] = vecs_b

    comm_kappa = commutator_norm(split.kappa1, split.kappa2)
    comm_proj = 0.0
    eye_a2 = np.eye(d_a2, dtype=complex)
    eye_b2 = np.eye(d_b2, dtype=complex)
    for n in range(layout.d_a1):
        for m in range(layout.d_b1):
            p_nm = tensor_product([ba1.projector(n), eye_a2, bb1.projector(m), eye_b2])
            comm_proj = max(
                comm_proj,
                commutator_norm(split.kappa1, p_nm),
                commutator_norm(p_nm, split.kappa2),
            )
    if comm_kappa > tol or comm_proj > tol:
        raise EigenstructureError(
            f"commutation residuals too large: [k1, k2] = {comm_kappa:.3e}, "
            f"max [k, P] = {comm_proj:.3e}"
        )

    eigen_residual = 0.0
    for n in range(layout.d_a1):
        for m in range(layout.d_b1):
            for a in range(d_a2):
                for b in range(d_b2):
                    psi = tensor_product([
                        ba1.vector(n).reshape(-1, 1),
                        a_bases[n, m][:, a].reshape(-1, 1),
                        bb1.vector(m).reshape(-1, 1),
                        b_bases[n, m][:, b].reshape(-1, 1),
                    ]).reshape(-1)
                    r1 = float(np.linalg.norm(split.kappa1 @ psi - m1[n, a, m] * psi))
                    r2 = float(np.linalg.norm(split.kappa2 @ psi - m2[n, m, b] * psi))
                    eigen_residual = max(eigen_residual, r1, r2)

    return EigenStructure(
        basis_a1=ba1,
        basis_b1=bb1,
        block_a=block_a,
        block_b=block_b,
        m1=m1,
        m2=m2,
        a_bases=a_bases,
        b_bases=b_bases,
        product_form_residual=product_residual,
        kappa_commutator=comm_kappa,
        projector_commutator=comm_proj,
        eigen_residual=eigen_residual,
    )


@dataclass(frozen=True)
class CausalDecomposition:
    """Convex split W = p * w_ab + (1 - p) * w_ba witnessing causal separability.

    A side with vanishing weight is reported as ``None`` rather than as a
    fabricated normalized zero matrix.
    """

    p: float
    w_ab: ProcessMatrix | None
    w_ba: ProcessMatrix | None


@dataclass(frozen=True)
class DecompositionReport:
    """Checks of a claimed causal decomposition against a process matrix."""

    reconstruction_residual: float
    p_ok: bool
    report_ab: ValidityReport | None
    report_ba: ValidityReport | None
    ok: bool


def verify_decomposition(w: ProcessMatrix, decomposition: CausalDecomposition,
                         tol: float = 1e-8, psd_tol: float | None = None) -> DecompositionReport:
    """Check reconstruction, weight range and one-way validity of both parts."""
    layout = w.layout
    p = decomposition.p
    p_ok = -tol <= p <= 1.0 + tol

    total = np.zeros_like(w.matrix)
    if decomposition.w_ab is not None:
        total = total + p * decomposition.w_ab.matrix
    elif p > tol:
        p_ok = False
    if decomposition.w_ba is not None:
        total = total + (1.0 - p) * decomposition.w_ba.matrix
    elif 1.0 - p > tol:
        p_ok = False
    residual = float(np.linalg.norm(total - w.matrix))

    report_ab = None
    if decomposition.w_ab is not None:
        report_ab = validate_process(decomposition.w_ab, tol=tol, variant="a_before_b", psd_tol=psd_tol)
    report_ba = None
    if decomposition.w_ba is not None:
        report_ba = validate_process(decomposition.w_ba, tol=tol, variant="b_before_a", psd_tol=psd_tol)

    ok = (
        p_ok
        and residual <= tol
        and (report_ab is None or report_ab.overall)
        and (report_ba is None or report_ba.overall)
    )
    return DecompositionReport(residual, p_ok, report_ab, report_ba, ok)


def constructive_decomposition(w_eff: ProcessMatrix, basis_a1, basis_b1,
                               alpha: float = 1.0, tol: float = 1e-8) -> CausalDecomposition:
    """Build a causal decomposition of an input-diagonal process matrix.

    Per input block the smallest eigenvalue s(n, m) = min_a m1(n, a, m) is
    moved from kappa1 to kappa2 (their sum is untouched), which makes both
    shifted operators positive: m1 - s >= 0 by construction and
    m2 + s >= 0 because kappa1 + kappa2 >= 0 forces m1 + m2 >= 0 on every
    joint eigenvector.  The positive parts, with the identity weight
    (1 + lambda0) kept on the kappa1 side, normalize into the two one-way
    processes of the split.
    """
    layout = w_eff.layout
    split = kappa_split(w_eff, alpha=alpha)
    structure = eigenstructure(split, basis_a1, basis_b1, w_eff, tol=tol)

    shift = structure.m1.min(axis=1)  # s(n, m)
    m1_bar = structure.m1 - shift[:, None, :]
    m2_bar = structure.m2 + shift[:, :, None]
    if m1_bar.min() < -tol or m2_bar.min() < -tol:
        raise DecompositionError(
            f"shifted eigenvalues went negative: min m1_bar {m1_bar.min():.3e}, "
            f"min m2_bar {m2_bar.min():.3e}"
        )

    side = layout.d_total
    ba1, bb1 = structure.basis_a1, structure.basis_b1
    eye_a2 = np.eye(layout.d_a2, dtype=complex)
    eye_b2 = np.eye(layout.d_b2, dtype=complex)
    kappa1_bar = (1.0 + split.lambda0) * np.eye(side, dtype=complex)
    kappa2_bar = np.zeros((side, side), dtype=complex)
    for n in range(layout.d_a1):
        for m in range(layout.d_b1):
            va = structure.a_bases[n, m]
            shifted_a = (va * m1_bar[n, :, m]) @ va.conj().T
            kappa1_bar += tensor_product([ba1.projector(n), shifted_a, bb1.projector(m), eye_b2])
            vb = structure.b_bases[n, m]
            shifted_b = (vb * m2_bar[n, m, :]) @ vb.conj().T
            kappa2_bar += tensor_product([ba1.projector(n), eye_a2, bb1.projector(m), shifted_b])

    p = float(np.trace(kappa1_bar).real) / layout.d_prime
    edge = 1e-12
    if p <= edge:
        decomposition = CausalDecomposition(0.0, None, w_eff)
    elif p >= 1.0 - edge:
        decomposition = CausalDecomposition(1.0, ProcessMatrix(layout, kappa1_bar / layout.d), None)
    else:
        w_ab = ProcessMatrix(layout, kappa1_bar / (p * layout.d))
        w_ba = ProcessMatrix(layout, kappa2_bar / ((1.0 - p) * layout.d))
        decomposition = CausalDecomposition(p, w_ab, w_ba)

    check = verify_decomposition(w_eff, decomposition, tol=tol)
    if not check.ok:
        raise DecompositionError(
            f"constructed decomposition failed verification: residual "
            f"{check.reconstruction_residual:.3e}, p = {p:.6f}"
        )
    return decomposition


@dataclass(frozen=True)
class FeasibilityReport:
    """Outcome of the alternating-projection separability search."""

    status: str
    residual: float
    iterations: int
    decomposition: CausalDecomposition | None
    plateau_residual: float | None = None


def _negative_part_norm(evals: np.ndarray) -> float:
    neg = np.clip(evals, None, 0.0)
    return float(np.sqrt(np.sum(neg * neg)))


def _psd_project(m: np.ndarray):
    """Projection onto the positive cone plus the distance to it."""
    h = (m + m.conj().T) / 2.0
    evals, vecs = np.linalg.eigh(h)
    clipped = np.clip(evals, 0.0, None)
    return (vecs * clipped) @ vecs.conj().T, _negative_part_norm(evals)


@lru_cache(maxsize=None)
def _span_rows(dims: tuple[int, ...], variant: str):
    """Flattened product-basis elements split by the mask, conjugates precomputed.

    Returns ``(allowed, allowed_conj, forbidden_conj)`` where each row is
    vec(B_T) for one coefficient index T, so span projections and span
    distances reduce to thin matrix-vector products in the
    alternating-projection inner loop.
    """
    allowed_mask = _allowed_coefficient_mask(dims, variant)
    stacks = [hermitian_basis(d) for d in dims]
    allowed_rows, forbidden_rows = [], []
    for idx in np.ndindex(allowed_mask.shape):
        row = tensor_product([stack[t] for stack, t in zip(stacks, idx)]).ravel()
        (allowed_rows if allowed_mask[idx] else forbidden_rows).append(row)
    allowed = np.array(allowed_rows)
    out = (allowed, allowed.conj(), np.array(forbidden_rows).conj())
    for block in out:
        block.setflags(write=False)
    return out


def _span_project_fast(m: np.ndarray, rows: np.ndarray, rows_conj: np.ndarray,
                       total_dim: int) -> np.ndarray:
    v = m.ravel()
    coefficients = rows_conj @ v
    return ((coefficients @ rows) / total_dim).reshape(m.shape)


def _span_distance_fast(m: np.ndarray, forbidden_conj: np.ndarray, total_dim: int) -> float:
    return float(np.linalg.norm(forbidden_conj @ m.ravel())) / math.sqrt(total_dim)


def dykstra_separability(w: ProcessMatrix, tol: float = 1e-8, max_iter: int = 50_000) -> FeasibilityReport:
    """Search for a causal split of W by Dykstra alternating projections.

    Looks for X with: X positive, X in the B2-trivial allowed span, W - X
    positive and W - X in the A2-trivial allowed span; any such X equals
    p * w_ab of a causal decomposition.  Starting from X = W / 2, the four
    projections are cycled with Dykstra correction terms and the four
    membership residuals are tracked per cycle.  All residuals below ``tol``
    count as separable and the decomposition is extracted; at the iteration
    cap the run reports not-separable when the residual has plateaued above
    10 * tol over the last tenth of the run, and inconclusive otherwise
    (alternating projections cannot certify infeasibility).
    """
    report = validate_process(w)
    if not report.overall:
        raise ValueError("dykstra_separability needs a valid process matrix")

    layout = w.layout
    dims = layout.dims
    total_dim = layout.d_total
    rows_ab, rows_ab_conj, forb_ab_conj = _span_rows(dims, "a_before_b")
    rows_ba, rows_ba_conj, forb_ba_conj = _span_rows(dims, "b_before_a")
    target = w.matrix

    x = target / 2.0
    corrections = [np.zeros_like(x) for _ in range(4)]
    history = np.empty(max_iter)
    iterations = 0
    converged = False

    for it in range(max_iter):
        # Cycle: PSD(X), span(X), PSD(W - X), span(W - X), each with its
        # Dykstra correction.
        shifted = x + corrections[0]
        y, _ = _psd_project(shifted)
        corrections[0] = shifted - y
        x = y

        shifted = x + corrections[1]
        y = _span_project_fast(shifted, rows_ab, rows_ab_conj, total_dim)
        corrections[1] = shifted - y
        x = y

        shifted = x + corrections[2]
        z, _ = _psd_project(target - shifted)
        y = target - z
        corrections[2] = shifted - y
        x = y

        shifted = x + corrections[3]
        z = _span_project_fast(target - shifted, rows_ba, rows_ba_conj, total_dim)
        y = target - z
        corrections[3] = shifted - y
        x = y

        x = (x + x.conj().T) / 2.0
        remainder = target - x
        residual = max(
            _negative_part_norm(np.linalg.eigvalsh(x)),
            _span_distance_fast(x, forb_ab_conj, total_dim),
            _negative_part_norm(np.linalg.eigvalsh(remainder)),
            _span_distance_fast(remainder, forb_ba_conj, total_dim),
        )
        history[it] = residual
        iterations = it + 1
        if residual < tol:
            converged = True
            break

    history = history[:iterations]
    best = float(history.min()) if iterations else float("inf")

    if converged:
        decomposition = _extract_decomposition(w, x, tol)
        check = verify_decomposition(w, decomposition, tol=max(100.0 * tol, 1e-6),
                                     psd_tol=max(100.0 * tol, 1e-6))
        if not check.ok:
            raise DecompositionError(
                f"feasible point failed decomposition checks: residual "
                f"{check.reconstruction_residual:.3e}"
            )
        return FeasibilityReport(SEPARABLE, float(history[-1]), iterations, decomposition)

    window = max(1, iterations // 10)
    plateau = float(history[-window:].min()) if iterations else float("inf")
    status = NOT_SEPARABLE if plateau > 10.0 * tol else INCONCLUSIVE
    return FeasibilityReport(status, best, iterations, None, plateau_residual=plateau)


def _extract_decomposition(w: ProcessMatrix, x: np.ndarray, tol: float) -> CausalDecomposition:
    layout = w.layout
    p = float(np.trace(x).real) / layout.target_trace
    if p <= tol:
        return CausalDecomposition(0.0, None, w)
    if p >= 1.0 - tol:
        return CausalDecomposition(1.0, w, None)
    w_ab = ProcessMatrix(layout, x / p)
    w_ba = ProcessMatrix(layout, (w.matrix - x) / (1.0 - p))
    return CausalDecomposition(p, w_ab, w_ba)


def w0_process(p: float, layout: SystemLayout | None = None) -> ProcessMatrix:
    """Qubit fixture: a causally separable mixture whose defining terms do not commute.

    Mixes, with weight ``p``, a process trivial on Bob's output against one
    trivial on Alice's output.  No nontrivial shared eigenbasis of the two
    defining terms exists, so the blockwise constructive route does not
    apply, yet the defining split itself witnesses separability.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    layout = layout or SystemLayout.qubit()
    if layout.dims != (2, 2, 2, 2):
        raise ValueError("w0_process is a qubit fixture")
    split = w0_defining_split(p)
    m = p * split.w_ab.matrix + (1.0 - p) * split.w_ba.matrix
    return ProcessMatrix(layout, m)


def w0_defining_split(p: float) -> CausalDecomposition:
    """The defining two-part split of :func:`w0_process`."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    layout = SystemLayout.qubit()
    eye = np.eye(16, dtype=complex)
    part_ab = (eye - tensor_product([_SIGMA_Z, _SIGMA_Z, _SIGMA_X, _EYE2])) / layout.d
    part_ba = (
        eye
        + 0.5 * tensor_product([_SIGMA_Z, _EYE2, _EYE2, _SIGMA_X])
        + 0.5 * tensor_product([_SIGMA_X, _EYE2, _SIGMA_X, _SIGMA_Z])
    ) / layout.d
    return CausalDecomposition(
        float(p),
        ProcessMatrix(layout, part_ab),
        ProcessMatrix(layout, part_ba),
    )


def w0_defining_terms() -> tuple[np.ndarray, np.ndarray]:
    """The two nontrivial operators defining :func:`w0_process`, for inspection."""
    term_ab = -tensor_product([_SIGMA_Z, _SIGMA_Z, _SIGMA_X, _EYE2])
    term_ba = 0.5 * tensor_product([_SIGMA_Z, _EYE2, _EYE2, _SIGMA_X]) + 0.5 * tensor_product(
        [_SIGMA_X, _EYE2, _SIGMA_X, _SIGMA_Z]
    )
    return term_ab, term_ba
