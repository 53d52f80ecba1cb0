"""Symmetric-logarithmic-derivative solve and information-matrix extraction.

The pipeline: orthonormalize the six-vector basis (Cholesky), transport
the state and its coordinate derivatives to the orthonormal frame, solve
the SLD equation ``L rho + rho L = 2 drho`` on the eigenbasis of rho,
rotate the four coordinate SLDs to the physical parameters
(s, xbar, p, zbar), and read off

    H[mu, nu] + i * Gamma[mu, nu] = Tr(rho L_mu L_nu).

All results are independent of the centroid coordinates by construction
(the Gram data only sees the separations).
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import CutoffDegeneracyWarning, DegenerateBasisError, SmallSeparationError, SrlocError
from .gram import ActionMatrix, GramMatrix, build_drho_action, build_gram, build_rho_action
from .psf import (
    GaussianPsf,
    OverlapJet,
    PsfConstants,
    gaussian_constants,
    gaussian_overlap_jet,
    small_separation_threshold,
)

__all__ = [
    "PARAMETERS",
    "SldSet",
    "QfimResult",
    "PipelineResult",
    "orthonormalize",
    "solve_sld",
    "rotate_to_physical",
    "compute_qfim",
    "qfim_from_jet",
    "gaussian_pipeline",
]

logger = logging.getLogger(__name__)

# Estimation parameters, fixed order used by every 4x4 matrix in the package.
PARAMETERS = ("s", "xbar", "p", "zbar")

# Numerical rank-2 states populate their kernel at ~1e-16; eigenvalue sums at
# or below this are treated as exact kernel in the SLD solve.
SUPPORT_CUTOFF = 1e-12

# Max tolerated asymmetry of Re/Im Tr(rho L L) before symmetrization.
_ASYMMETRY_LIMIT = 1e-10


@dataclass(frozen=True)
class SldSet:
    """The four physical-parameter SLDs with their companion Gram matrix."""

    l_s: ActionMatrix
    l_xbar: ActionMatrix
    l_p: ActionMatrix
    l_zbar: ActionMatrix
    gram: GramMatrix

    def in_order(self) -> tuple[ActionMatrix, ActionMatrix, ActionMatrix, ActionMatrix]:
        """SLDs in ``PARAMETERS`` order."""
        return (self.l_s, self.l_xbar, self.l_p, self.l_zbar)


@dataclass(frozen=True)
class QfimResult:
    """Quantum Fisher information matrix ``h`` and SLD-commutator matrix
    ``gamma_mat``, both 4x4 real in ``PARAMETERS`` order."""

    h: np.ndarray
    gamma_mat: np.ndarray

    def __post_init__(self) -> None:
        for name in ("h", "gamma_mat"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != (4, 4):
                raise SrlocError(f"{name} must be 4x4, got shape {arr.shape}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class PipelineResult:
    """End-to-end numerical pipeline output."""

    qfim: QfimResult
    rho_eigenvalues: np.ndarray  # all six, descending
    slds: SldSet

    def __post_init__(self) -> None:
        arr = np.array(self.rho_eigenvalues, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "rho_eigenvalues", arr)


def _gram_array(gram) -> np.ndarray:
    return gram.s_mat if isinstance(gram, GramMatrix) else np.asarray(gram, dtype=complex)


def orthonormalize(gram) -> np.ndarray:
    """Upper-triangular Cholesky factor T of the Gram matrix, T^H T = S.

    T is the change of basis to an orthonormal frame: an action matrix M
    becomes A = T M T^{-1}, under which operator Hermiticity is the
    ordinary A = A^H.

    Raises
    ------
    DegenerateBasisError
        If S is not numerically positive definite.
    """
    s = _gram_array(gram)
    try:
        lower = np.linalg.cholesky(s)
    except np.linalg.LinAlgError as exc:
        raise DegenerateBasisError(f"Gram matrix is not positive definite: {exc}") from exc
    return lower.conj().T


def solve_sld(
    rho: ActionMatrix,
    drho: ActionMatrix,
    gram,
    cutoff: float = SUPPORT_CUTOFF,
) -> ActionMatrix:
    """Solve ``L rho + rho L = 2 drho`` for the SLD in action representation.

    The solve runs in the orthonormal frame on the eigenbasis of rho:
    L[i, j] = 2 drho[i, j] / (q_i + q_j) wherever q_i + q_j exceeds
    ``cutoff`` and 0 on the kernel block (support-restricted completion;
    H and Gamma do not depend on how the kernel block is completed).

    Emits :class:`CutoffDegeneracyWarning` when any eigenvalue sum lands
    within a decade of the cutoff, where the division is ill-conditioned.
    """
    t = orthonormalize(gram)
    t_inv = np.linalg.inv(t)
    rho_o = t @ rho.m @ t_inv
    rho_o = (rho_o + rho_o.conj().T) / 2.0
    q, u = np.linalg.eigh(rho_o)
    drho_o = t @ drho.m @ t_inv
    drho_e = u.conj().T @ drho_o @ u

    qsum = q[:, None] + q[None, :]
    shaky = (qsum > cutoff / 10.0) & (qsum <= cutoff * 10.0)
    if np.any(shaky):
        warnings.warn(
            f"{int(np.count_nonzero(shaky))} eigenvalue sums within a decade of the "
            f"support cutoff {cutoff:.1e}; SLD entries there are low-confidence",
            CutoffDegeneracyWarning,
            stacklevel=2,
        )
    l_e = np.where(qsum > cutoff, 2.0 * drho_e / np.where(qsum > cutoff, qsum, 1.0), 0.0)
    l_o = u @ l_e @ u.conj().T
    return ActionMatrix(m=t_inv @ l_o @ t)


def rotate_to_physical(
    l_x1: ActionMatrix,
    l_x2: ActionMatrix,
    l_z1: ActionMatrix,
    l_z2: ActionMatrix,
    gram: GramMatrix,
) -> SldSet:
    """Rotate coordinate SLDs to the physical parameters (s, xbar, p, zbar).

    s = x2 - x1 and xbar = (x2 + x1)/2 give L_s = (L_x2 - L_x1)/2 and
    L_xbar = L_x1 + L_x2; same pattern axially.
    """
    return SldSet(
        l_s=ActionMatrix(m=0.5 * (l_x2.m - l_x1.m)),
        l_xbar=ActionMatrix(m=l_x1.m + l_x2.m),
        l_p=ActionMatrix(m=0.5 * (l_z2.m - l_z1.m)),
        l_zbar=ActionMatrix(m=l_z1.m + l_z2.m),
        gram=gram,
    )


def compute_qfim(rho: ActionMatrix, slds: SldSet, gram: GramMatrix) -> QfimResult:
    """H and Gamma from traces of action-matrix products.

    Traces are representation-independent, so Tr(rho L_mu L_nu) is taken
    directly on the action matrices.  H is the real part symmetrized,
    Gamma the imaginary part antisymmetrized; the pre-symmetrization
    asymmetry is pure roundoff and is required to stay below 1e-10.
    """
    ls = [a.m for a in slds.in_order()]
    c = np.empty((4, 4), dtype=complex)
    for a in range(4):
        rho_l = rho.m @ ls[a]
        for b in range(4):
            c[a, b] = np.trace(rho_l @ ls[b])
    h_raw, g_raw = c.real, c.imag
    h_asym = float(np.max(np.abs(h_raw - h_raw.T)))
    g_asym = float(np.max(np.abs(g_raw + g_raw.T)))
    logger.debug("qfim pre-symmetrization residuals: H %.3e, Gamma %.3e", h_asym, g_asym)
    if max(h_asym, g_asym) >= _ASYMMETRY_LIMIT:
        raise SrlocError(
            f"information-matrix asymmetry {max(h_asym, g_asym):.3e} exceeds "
            f"{_ASYMMETRY_LIMIT:.1e}; inputs are inconsistent or ill-conditioned"
        )
    return QfimResult(h=(h_raw + h_raw.T) / 2.0, gamma_mat=(g_raw - g_raw.T) / 2.0)


def qfim_from_jet(
    jet: OverlapJet,
    consts: PsfConstants,
    degeneracy_threshold: float = 1e-12,
    cutoff: float = SUPPORT_CUTOFF,
) -> PipelineResult:
    """Run the full numerical pipeline from overlap data.

    Returns the information matrices together with all six eigenvalues of
    the state in the orthonormal frame (descending; exactly two are
    nonzero up to roundoff).
    """
    gram = build_gram(jet, consts, degeneracy_threshold=degeneracy_threshold)
    rho = build_rho_action(gram)
    l_coord = {
        coord: solve_sld(rho, build_drho_action(gram, coord), gram, cutoff=cutoff)
        for coord in ("x1", "z1", "x2", "z2")
    }
    slds = rotate_to_physical(l_coord["x1"], l_coord["x2"], l_coord["z1"], l_coord["z2"], gram)
    qfim = compute_qfim(rho, slds, gram)

    t = orthonormalize(gram)
    rho_o = t @ rho.m @ np.linalg.inv(t)
    eigs = np.linalg.eigvalsh((rho_o + rho_o.conj().T) / 2.0)[::-1]
    return PipelineResult(qfim=qfim, rho_eigenvalues=eigs, slds=slds)


def gaussian_pipeline(
    psf: GaussianPsf,
    s: float,
    p: float,
    degeneracy_threshold: float = 1e-12,
    cutoff: float = SUPPORT_CUTOFF,
) -> PipelineResult:
    """Numerical pipeline for the Gaussian PSF at separations (s, p).

    Refuses separations with s^2 + p^2 below the square of
    ``small_separation_threshold(k, z_R)``: that regime is served
    analytically by the coincident-source limit, not numerically.
    """
    threshold = small_separation_threshold(psf.k, psf.z_r)
    if s * s + p * p < threshold * threshold:
        raise SmallSeparationError(
            f"separations (s={s!r}, p={p!r}) below the pipeline threshold "
            f"{threshold:.3e}; use small_separation_limit (CLI: the `limits` command)"
        )
    return qfim_from_jet(
        gaussian_overlap_jet(psf, s, p),
        gaussian_constants(psf),
        degeneracy_threshold=degeneracy_threshold,
        cutoff=cutoff,
    )
