"""Effective process matrices under fixed-basis input measurements.

When both parties measure their inputs in fixed orthonormal bases, the
statistics they can collect only probe the input-diagonal blocks of the
process matrix.  The non-selective update

    W -> sum_{n,m} (P_n (x) 1 (x) P_m (x) 1) W (P_n (x) 1 (x) P_m (x) 1)

produces an operationally indistinguishable effective matrix, in exact
analogy with dephasing an entangled state into a separable one.  This
module implements that update, the fully classical (input and output)
variant, the selective single-block update (which generally leaves the
valid span), and numerical indistinguishability checks against sampled
fixed-basis instruments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .instruments import Instrument, born_probability, cq_instrument
from .process import ProcessMatrix, SystemLayout, validate_process
from .tensor import hermitian_eig, partial_transpose

ORTHONORMALITY_TOL = 1e-10


class DegenerateInputError(ValueError):
    """Selective update conditioned on a block of zero weight."""


@dataclass(frozen=True)
class MeasurementBasis:
    """Orthonormal basis of one factor, stored as the columns of a unitary."""

    vectors: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=complex)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"basis must be a square matrix of column vectors, got shape {v.shape}")
        gram = v.conj().T @ v
        defect = float(np.max(np.abs(gram - np.eye(v.shape[0]))))
        if defect > ORTHONORMALITY_TOL:
            raise ValueError(f"basis is not orthonormal: max Gram defect {defect:.3e}")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    def vector(self, n: int) -> np.ndarray:
        return self.vectors[:, n]

    def projector(self, n: int) -> np.ndarray:
        v = self.vectors[:, n]
        return np.outer(v, v.conj())

    @classmethod
    def computational(cls, dim: int) -> "MeasurementBasis":
        return cls(np.eye(dim, dtype=complex))

    @classmethod
    def random(cls, dim: int, seed) -> "MeasurementBasis":
        """Haar-random basis, deterministic in the seed."""
        rng = np.random.default_rng(seed)
        g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        q, r = np.linalg.qr(g)
        q = q * (np.diag(r) / np.abs(np.diag(r)))
        return cls(q)


def as_basis(basis, dim: int) -> MeasurementBasis:
    """Coerce an array of column vectors (or a MeasurementBasis) to the given dimension."""
    b = basis if isinstance(basis, MeasurementBasis) else MeasurementBasis(basis)
    if b.dim != dim:
        raise ValueError(f"basis has dimension {b.dim}, expected {dim}")
    return b


@dataclass(frozen=True)
class EffectiveProcess:
    """An input-dephased process matrix together with its provenance."""

    source: ProcessMatrix
    basis_a1: MeasurementBasis
    basis_b1: MeasurementBasis
    matrix: ProcessMatrix


def _input_frame(layout: SystemLayout, basis_a1: MeasurementBasis, basis_b1: MeasurementBasis) -> np.ndarray:
    """Unitary rotating the two input factors into their measurement bases."""
    return np.kron(
        np.kron(basis_a1.vectors, np.eye(layout.d_a2)),
        np.kron(basis_b1.vectors, np.eye(layout.d_b2)),
    )


def _input_block_tensor(w: ProcessMatrix, basis_a1, basis_b1) -> np.ndarray:
    """Eight-index view of W in the measurement frame of both inputs."""
    layout = w.layout
    ba1 = as_basis(basis_a1, layout.d_a1)
    bb1 = as_basis(basis_b1, layout.d_b1)
    frame = _input_frame(layout, ba1, bb1)
    rotated = frame.conj().T @ w.matrix @ frame
    return rotated.reshape(layout.dims + layout.dims)


def luders_input_dephase(w: ProcessMatrix, basis_a1, basis_b1) -> EffectiveProcess:
    """Non-selective update of both input factors onto the given bases.

    Idempotent, trace preserving and positivity preserving; a valid process
    stays valid because the update acts factor-locally on the inputs.
    """
    layout = w.layout
    ba1 = as_basis(basis_a1, layout.d_a1)
    bb1 = as_basis(basis_b1, layout.d_b1)
    frame = _input_frame(layout, ba1, bb1)
    t = (frame.conj().T @ w.matrix @ frame).reshape(layout.dims + layout.dims)

    eye_a = np.eye(layout.d_a1, dtype=bool)
    eye_b = np.eye(layout.d_b1, dtype=bool)
    t = t * eye_a[:, None, None, None, :, None, None, None]
    t = t * eye_b[None, None, :, None, None, None, :, None]

    side = layout.d_total
    dephased = frame @ t.reshape(side, side) @ frame.conj().T
    dephased = (dephased + dephased.conj().T) / 2.0
    return EffectiveProcess(w, ba1, bb1, ProcessMatrix(layout, dephased))


def classical_effective(w: ProcessMatrix, basis_a1, basis_a2, basis_b1, basis_b2) -> ProcessMatrix:
    """Fully diagonal effective matrix for operations classical in all four bases.

    Keeps exactly the diagonal of W in the product of the four bases, which
    equals input dephasing followed by the same update on both outputs.
    """
    layout = w.layout
    bases = [
        as_basis(basis_a1, layout.d_a1),
        as_basis(basis_a2, layout.d_a2),
        as_basis(basis_b1, layout.d_b1),
        as_basis(basis_b2, layout.d_b2),
    ]
    frame = bases[0].vectors
    for b in bases[1:]:
        frame = np.kron(frame, b.vectors)
    rotated = frame.conj().T @ w.matrix @ frame
    diagonal = np.diag(np.diag(rotated).real).astype(complex)
    back = frame @ diagonal @ frame.conj().T
    return ProcessMatrix(layout, (back + back.conj().T) / 2.0)


def is_input_diagonal(w: ProcessMatrix, basis_a1, basis_b1, tol: float = 1e-10):
    """Whether all cross-input blocks of W vanish in the given bases.

    Returns ``(flag, max_off_block_norm)`` where the norm is the largest
    Frobenius norm among blocks <n, m| W |n', m'> with (n, m) != (n', m').
    """
    layout = w.layout
    t = _input_block_tensor(w, basis_a1, basis_b1)
    # block_norms[n, m, n', m'] over the A2/B2 entries of each input block
    block_norms = np.sqrt(np.einsum("arbsctdu->abcd", (t * t.conj()).real))
    eye_a = np.eye(layout.d_a1, dtype=bool)
    eye_b = np.eye(layout.d_b1, dtype=bool)
    off = ~(eye_a[:, None, :, None] & eye_b[None, :, None, :])
    max_off = float(block_norms[off].max()) if off.any() else 0.0
    return max_off <= tol, max_off


def selective_update(w: ProcessMatrix, n: int, m: int, basis_a1, basis_b1):
    """Single-block conditioning P_(n,m) W P_(n,m), renormalized to a process trace.

    Unlike the non-selective update this generally leaves the valid span:
    the conditioned block picks up terms that correlate the two output
    spaces or an output with nothing on the partner input.  Returns the
    renormalized block and its validity report.
    """
    layout = w.layout
    ba1 = as_basis(basis_a1, layout.d_a1)
    bb1 = as_basis(basis_b1, layout.d_b1)
    if not 0 <= n < layout.d_a1:
        raise IndexError(f"index n={n} out of range for dimension {layout.d_a1}")
    if not 0 <= m < layout.d_b1:
        raise IndexError(f"index m={m} out of range for dimension {layout.d_b1}")
    projector = np.kron(
        np.kron(ba1.projector(n), np.eye(layout.d_a2)),
        np.kron(bb1.projector(m), np.eye(layout.d_b2)),
    )
    block = projector @ w.matrix @ projector
    weight = float(np.trace(block).real)
    if weight <= 1e-12:
        raise DegenerateInputError(f"block ({n}, {m}) has zero weight; cannot renormalize")
    renormalized = block * (layout.target_trace / weight)
    pm = ProcessMatrix(layout, (renormalized + renormalized.conj().T) / 2.0)
    return pm, validate_process(pm)


def random_cq_instrument(basis: MeasurementBasis, output_dim: int, rng, n_outcomes: int = 2) -> Instrument:
    """Random fixed-basis instrument: stochastic outcome table, Wishart repreparations."""
    raw = rng.uniform(0.1, 1.0, size=(n_outcomes, basis.dim))
    p = raw / raw.sum(axis=0)
    states = []
    for _ in range(n_outcomes):
        g = rng.standard_normal((output_dim, output_dim)) + 1j * rng.standard_normal((output_dim, output_dim))
        wish = g @ g.conj().T
        states.append(wish / np.trace(wish).real)
    return cq_instrument(basis.vectors, p, states)


def indistinguishability_residual(w: ProcessMatrix, effective: EffectiveProcess,
                                  samples: int = 100, seed: int = 0) -> float:
    """Largest probability deviation between W and its effective matrix.

    Samples pairs of random fixed-basis instruments in the dephasing bases
    and returns the max over samples and outcome pairs of
    |P_W - P_Weff|.  Vanishes (numerically) whenever the effective matrix
    was produced by input dephasing in the same bases.
    """
    layout = w.layout
    children = np.random.SeedSequence(seed).spawn(samples)
    worst = 0.0
    for child in children:
        rng = np.random.default_rng(child)
        instr_a = random_cq_instrument(effective.basis_a1, layout.d_a2, rng)
        instr_b = random_cq_instrument(effective.basis_b1, layout.d_b2, rng)
        for m_a in instr_a.outcomes:
            for m_b in instr_b.outcomes:
                delta = abs(born_probability(w, m_a, m_b) - born_probability(effective.matrix, m_a, m_b))
                worst = max(worst, delta)
    return worst


def dephase_state(rho, basis_a, basis_b) -> np.ndarray:
    """Non-selective product-basis measurement update of a bipartite state."""
    r = np.asarray(rho, dtype=complex)
    ba = basis_a if isinstance(basis_a, MeasurementBasis) else MeasurementBasis(basis_a)
    bb = basis_b if isinstance(basis_b, MeasurementBasis) else MeasurementBasis(basis_b)
    da, db = ba.dim, bb.dim
    if r.shape != (da * db, da * db):
        raise ValueError(f"state has shape {r.shape}, expected {(da * db, da * db)}")
    frame = np.kron(ba.vectors, bb.vectors)
    t = (frame.conj().T @ r @ frame).reshape(da, db, da, db)
    eye_a = np.eye(da, dtype=bool)
    eye_b = np.eye(db, dtype=bool)
    t = t * eye_a[:, None, :, None] * eye_b[None, :, None, :]
    out = frame @ t.reshape(da * db, da * db) @ frame.conj().T
    return (out + out.conj().T) / 2.0


def ppt_check(rho, dims: tuple[int, int] = (2, 2), tol: float = 1e-10):
    """Positive-partial-transpose test, restricted to 2x2 and 2x3 systems.

    In those dimensions PPT decides separability, so the returned flag is a
    separability verdict.  Returns ``(flag, min_pt_eigenvalue)``.
    """
    da, db = int(dims[0]), int(dims[1])
    if sorted((da, db)) not in ([2, 2], [2, 3]):
        raise ValueError(f"PPT is only decisive for 2x2 and 2x3 systems, got {da}x{db}")
    r = np.asarray(rho, dtype=complex)
    pt = partial_transpose(r, (da, db), {1})
    evals, _ = hermitian_eig(pt)
    min_eig = float(evals[0])
    return min_eig >= -tol, min_eig
