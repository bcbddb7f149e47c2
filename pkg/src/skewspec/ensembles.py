"""Sampling the chiral and elliptic real Gaussian matrix models.

Chiral model
    Two real N x (N+nu) matrices A, B with density
    exp[-eta_+/2 Tr(A A^T + B B^T) + eta_- Tr(A B^T)],
    eta_pm = (1 +/- mu^2) / (4 mu^2).  Writing A = P + mu Q, B = P - mu Q the
    exponent becomes -|P|^2/2 - |Q|^2/2, so P and Q have i.i.d. standard
    normal entries.  The eigenvalues z_j of C = A B^T are the squared
    nonzero Dirac eigenvalues.

Elliptic model
    A real N x N matrix J with density exp[-Tr(J J^T - tau J^2) / (2(1 - tau^2))].
    Completing the square per entry pair gives Var J_ii = 1 + tau,
    Var J_ij = 1 and Cov(J_ij, J_ji) = tau for i != j.  We build J = S + c A
    with S symmetric, A antisymmetric, c = sqrt((1 - tau)/(1 + tau)),
    Var S_ii = 1 + tau and Var S_ij = Var A_ij = (1 + tau)/2 for i < j.
    In this normalisation the real-eigenvalue weight is exp(-x^2 / (2(1 + tau))).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ClassificationError, DomainError, ShapeError
from .skewlinalg import eigenvalues_real_matrix

__all__ = [
    "Model",
    "EnsembleSpec",
    "Spectrum",
    "make_rng",
    "sample_chiral",
    "sample_chiral_batch",
    "sample_ginibre",
    "sample_ginibre_batch",
    "chiral_z_matrix",
    "classify_spectrum",
    "sample_spectrum",
    "dirac_eigenvalues",
]


class Model(str, Enum):
    CHIRAL = "chiral"
    GINIBRE = "ginibre"


@dataclass(frozen=True)
class EnsembleSpec:
    """Model choice, size, non-Hermiticity and flavour content.

    ``n`` is the matrix size N.  ``nu`` and ``mu`` apply to the chiral model,
    ``tau`` to the elliptic one.  ``masses`` holds the nf flavour masses m_f.
    """

    model: Model
    n: int
    nu: int = 0
    mu: float = 0.5
    tau: float = 0.0
    masses: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "model", Model(self.model))
        object.__setattr__(self, "masses", tuple(float(m) for m in self.masses))
        if int(self.n) != self.n or self.n < 0:
            raise DomainError(f"n must be a nonnegative integer, got {self.n!r}")
        if int(self.nu) != self.nu or self.nu < 0:
            raise DomainError(f"nu must be a nonnegative integer, got {self.nu!r}")
        if self.model is Model.CHIRAL and not 0.0 < self.mu <= 1.0:
            raise DomainError(f"mu must lie in (0, 1], got {self.mu!r}")
        if self.model is Model.GINIBRE and not 0.0 <= self.tau < 1.0:
            raise DomainError(f"tau must lie in [0, 1), got {self.tau!r}")
        if any(not m > 0 for m in self.masses):
            raise DomainError("masses must be positive")

    @classmethod
    def chiral(cls, n, nu, mu, masses=()):
        return cls(Model.CHIRAL, n, nu=nu, mu=mu, masses=tuple(masses))

    @classmethod
    def ginibre(cls, n, tau, masses=()):
        return cls(Model.GINIBRE, n, tau=tau, masses=tuple(masses))

    @property
    def nf(self) -> int:
        return len(self.masses)

    @property
    def eta_plus(self) -> float:
        return (1 + self.mu**2) / (4 * self.mu**2)

    @property
    def eta_minus(self) -> float:
        return (1 - self.mu**2) / (4 * self.mu**2)

    def with_n(self, n: int) -> "EnsembleSpec":
        return EnsembleSpec(self.model, n, self.nu, self.mu, self.tau, self.masses)

    def with_masses(self, masses) -> "EnsembleSpec":
        return EnsembleSpec(self.model, self.n, self.nu, self.mu, self.tau, tuple(masses))


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues split into real ones and upper-half-plane pair representatives."""

    real_eigs: tuple
    pair_reps: tuple
    zero_modes: int = 0

    @property
    def n_real(self) -> int:
        return len(self.real_eigs)

    @property
    def n_pairs(self) -> int:
        return len(self.pair_reps)

    def all_eigs(self) -> np.ndarray:
        p = np.asarray(self.pair_reps, dtype=complex)
        return np.concatenate([np.asarray(self.real_eigs, dtype=complex), p, p.conj()])


def make_rng(seed: int, stream: int = 0, *substream: int) -> np.random.Generator:
    """Independent generator for (seed, stream, *substream); distinct keys never overlap."""
    key = (int(stream),) + tuple(int(s) for s in substream)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=key)))


def sample_chiral_batch(spec: EnsembleSpec, rng: np.random.Generator, size: int):
    """``size`` independent (A, B) pairs, each N x (N + nu), stacked on axis 0."""
    if spec.model is not Model.CHIRAL:
        raise DomainError("sample_chiral needs a chiral EnsembleSpec")
    shape = (size, spec.n, spec.n + spec.nu)
    P = rng.standard_normal(shape)
    Q = rng.standard_normal(shape)
    return P + spec.mu * Q, P - spec.mu * Q


def sample_chiral(spec: EnsembleSpec, rng: np.random.Generator):
    A, B = sample_chiral_batch(spec, rng, 1)
    return A[0], B[0]


def sample_ginibre_batch(spec: EnsembleSpec, rng: np.random.Generator, size: int) -> np.ndarray:
    """``size`` independent N x N matrices J stacked on axis 0."""
    if spec.model is not Model.GINIBRE:
        raise DomainError("sample_ginibre needs a Ginibre EnsembleSpec")
    n, tau = spec.n, spec.tau
    iu = np.triu_indices(n, 1)
    s_off = math.sqrt((1 + tau) / 2)
    S = np.zeros((size, n, n))
    A = np.zeros((size, n, n))
    S[:, iu[0], iu[1]] = s_off * rng.standard_normal((size, len(iu[0])))
    A[:, iu[0], iu[1]] = s_off * rng.standard_normal((size, len(iu[0])))
    S = S + np.swapaxes(S, 1, 2)
    A = A - np.swapaxes(A, 1, 2)
    idx = np.arange(n)
    S[:, idx, idx] = math.sqrt(1 + tau) * rng.standard_normal((size, n))
    return S + math.sqrt((1 - tau) / (1 + tau)) * A


def sample_ginibre(spec: EnsembleSpec, rng: np.random.Generator) -> np.ndarray:
    return sample_ginibre_batch(spec, rng, 1)[0]


def chiral_z_matrix(A, B) -> np.ndarray:
    """C = A B^T; its eigenvalues are the z_j = Lambda_j^2."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape:
        raise ShapeError(f"A and B must have the same shape, got {A.shape} and {B.shape}")
    return A @ np.swapaxes(B, -1, -2)


def classify_spectrum(eigs, tol_scale: float = 1e-9, zero_modes: int = 0) -> Spectrum:
    """Split a conjugation-closed multiset into real values and pairs.

    An eigenvalue is real iff |Im| <= tol_scale * (1 + |lambda|).  The rest are
    matched greedily (closest conjugate first); an unmatched one raises
    :class:`ClassificationError`.
    """
    ev = np.asarray(eigs, dtype=complex).ravel()
    is_real = np.abs(ev.imag) <= tol_scale * (1 + np.abs(ev))
    reals = np.sort(ev[is_real].real)
    upper = [z for z in ev[~is_real] if z.imag > 0]
    lower = [z for z in ev[~is_real] if z.imag < 0]
    if len(upper) != len(lower):
        raise ClassificationError(
            f"{len(upper)} eigenvalues above the axis but {len(lower)} below; tol_scale={tol_scale} too small?"
        )
    reps = []
    for z in sorted(upper, key=lambda w: -w.imag):
        j = min(range(len(lower)), key=lambda j: abs(lower[j] - z.conjugate()))
        w = lower.pop(j)
        if abs(w - z.conjugate()) > max(1e-6, 1e3 * tol_scale) * (1 + abs(z)):
            raise ClassificationError(f"no conjugate partner for {z}")
        reps.append(complex(0.5 * (z.real + w.real), 0.5 * (z.imag - w.imag)))
    reps.sort(key=lambda w: (w.real, w.imag))
    return Spectrum(tuple(float(x) for x in reals), tuple(reps), int(zero_modes))


def sample_spectrum(spec: EnsembleSpec, rng: np.random.Generator, tol_scale: float = 1e-9) -> Spectrum:
    """Draw one matrix and classify its eigenvalues (z_j for the chiral model)."""
    if spec.model is Model.CHIRAL:
        A, B = sample_chiral(spec, rng)
        ev = eigenvalues_real_matrix(chiral_z_matrix(A, B))
        return classify_spectrum(ev, tol_scale, zero_modes=spec.nu)
    return classify_spectrum(eigenvalues_real_matrix(sample_ginibre(spec, rng)), tol_scale)


def dirac_eigenvalues(z) -> np.ndarray:
    """Nonzero Dirac eigenvalues +/- sqrt(z_j) for each z_j."""
    r = np.sqrt(np.asarray(z, dtype=complex))
    return np.concatenate([r, -r])
