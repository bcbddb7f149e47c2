"""Unquenched partition functions, SOP and kernels from quenched building blocks.

Flavours enter through the insertion points a_l with
prod_f mass_factor_f(z) = prod_l (a_l - z):

* chiral, ``MINUS``: a_f = m_f^2 (the determinants det(m_f^2 - A B^T));
* chiral, ``PLUS``:  a_f = -m_f^2;
* elliptic: two points per flavour, +/- m_f (``MINUS``) or +/- i m_f (``PLUS``).

With k insertion points and quenched kernel K = K^{(0)}, SOP q = q^{(0)},
norms h = h^{(0)}, the building block is

    <prod_l det(a_l - M)>_{2N} =
        (-1)^{k/2} prod_{j=N}^{N+k/2-1} h_j Pf[K_{2N+k}(a_f, a_g)] / Delta_k(a)             (k even)
        (-1)^{(k-1)/2} prod_{j=N}^{N+(k-3)/2} h_j Pf[[0, q_{2N+k-1}(a_g)],
                                                     [-q_{2N+k-1}(a_f), K_{2N+k-1}(a_f, a_g)]] / Delta_k(a)   (k odd)

Pfaffian borders are laid out as in the docstrings below: scalar rows first,
then one row per insertion point, in the order of ``points``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularMassError
from .skewlinalg import pfaffian, vandermonde
from .sop import SkewPolyFamily
from .weights import MassConvention, WeightSpec

__all__ = [
    "MassiveContext",
    "expect_char_polys",
    "massive_partition_ratio",
    "massive_norm",
    "massive_even_sop",
    "massive_odd_sop",
    "massive_kernel",
    "pfid_shift_check",
    "bordered_pfaffian",
    "massive_sop_coeffs",
    "massive_kernel_coeffs",
    "massive_odd_sop_normalized",
    "interpolation_radius",
]

COND_TOL = 1e-12


@dataclass(frozen=True)
class MassiveContext:
    """Quenched family plus flavour masses at a fixed even eigenvalue count."""

    quenched: SkewPolyFamily
    masses: tuple
    n_eigs: int
    convention: MassConvention = MassConvention.MINUS

    def __post_init__(self):
        object.__setattr__(self, "masses", tuple(float(m) for m in self.masses))
        object.__setattr__(self, "convention", MassConvention(self.convention))
        if self.n_eigs < 0 or self.n_eigs % 2:
            raise DomainError(f"n_eigs must be even and nonnegative, got {self.n_eigs}")
        if any(not m > 0 for m in self.masses):
            raise DomainError("masses must be positive")
        a = self.points
        for i in range(a.size):
            for j in range(i):
                if abs(a[i] - a[j]) <= 1e-12 * (1 + abs(a[i])):
                    raise SingularMassError(
                        "coincident insertion points: the Vandermonde of the masses vanishes"
                    )

    @property
    def N(self) -> int:
        return self.n_eigs // 2

    @property
    def nf(self) -> int:
        return len(self.masses)

    @property
    def points(self) -> np.ndarray:
        return self.weight().insertion_points()

    def weight(self) -> WeightSpec:
        ens = self.quenched.ensemble(self.N, self.masses)
        return WeightSpec(ens, True, self.convention)

    def with_n_eigs(self, n_eigs: int) -> "MassiveContext":
        return MassiveContext(self.quenched, self.masses, n_eigs, self.convention)

    def with_masses(self, masses) -> "MassiveContext":
        return MassiveContext(self.quenched, tuple(masses), self.n_eigs, self.convention)


def _maybe_real(x, *inputs):
    if all(np.isrealobj(np.asarray(v)) for v in inputs):
        return np.real(x)
    return x


def bordered_pfaffian(borders, K):
    """Pfaffian of [[B, X], [-X^T, K]] with scalar border block.

    ``borders`` is a list of (row, col_block) pairs: ``row`` holds the border
    row's entries against the previous borders, ``col_block`` its entries
    against the point rows.  Used to assemble all border layouts below.
    """
    nb = len(borders)
    k = K.shape[0]
    M = np.zeros((nb + k, nb + k), dtype=complex)
    for i, (row, block) in enumerate(borders):
        for j, v in enumerate(row):
            M[j, i] = -v
            M[i, j] = v
        M[i, nb:] = block
        M[nb:, i] = -np.asarray(block)
    M[nb:, nb:] = K
    return pfaffian(M)


def _kmat(fam, n, a):
    if a.size == 0:
        return np.zeros((0, 0), dtype=complex)
    return np.asarray(fam.kernel(n, a[:, None], a[None, :]), dtype=complex)


def _check_conditioning(M, what):
    """Fail on a numerically singular Pfaffian matrix.

    The estimate uses the symmetrically equilibrated matrix D M D with
    D_ii = 1 / sqrt(max_j |M_ij|): rescaling rows and columns only multiplies
    the Pfaffian by det D, so it should not count as ill-conditioning.
    """
    if M.size == 0:
        return
    scale = np.max(np.abs(M), axis=1)
    if np.any(scale == 0):
        raise SingularMassError(f"{what} has a zero row")
    d = 1.0 / np.sqrt(scale)
    s = np.linalg.svd(M * d[:, None] * d[None, :], compute_uv=False)
    if s[0] == 0 or s[-1] / s[0] < COND_TOL:
        raise SingularMassError(f"{what} is numerically singular (reciprocal condition {s[-1] / max(s[0], 1e-300):.2e})")


def _char_block(fam: SkewPolyFamily, N: int, a: np.ndarray, check=True):
    """Pfaffian factor and its prefactor (without 1/Delta) for k = len(a) points."""
    k = a.size
    if k == 0:
        return 1.0, np.zeros((0, 0))
    if k % 2 == 0:
        K = _kmat(fam, 2 * N + k, a)
        pre = (-1) ** (k // 2) * math.prod(fam.norm(j) for j in range(N, N + k // 2))
        M = K
    else:
        n = 2 * N + k - 1
        qv = np.asarray(fam.q(n, a), dtype=complex)
        K = _kmat(fam, n, a)
        pre = (-1) ** ((k - 1) // 2) * math.prod(fam.norm(j) for j in range(N, N + (k - 1) // 2))
        M = np.zeros((k + 1, k + 1), dtype=complex)
        M[0, 1:], M[1:, 0], M[1:, 1:] = qv, -qv, K
    if check:
        _check_conditioning(M, "denominator Pfaffian")
    return pre, M


def expect_char_polys(fam: SkewPolyFamily, n_eigs: int, points) -> complex:
    """<prod_l det(a_l - M)> over 2N quenched eigenvalues, as a Pfaffian of kernels."""
    if n_eigs % 2:
        raise DomainError("n_eigs must be even")
    a = np.asarray(points)
    pre, M = _char_block(fam, n_eigs // 2, a, check=False)
    if a.size == 0:
        return 1.0
    d = vandermonde(a)
    if d == 0:
        raise SingularMassError("coincident insertion points")
    out = pre * pfaffian(M) / d
    return _maybe_real(out, a)


def massive_partition_ratio(ctx: MassiveContext):
    """Z^{(N_f)}_{2N} / Z^{(0)}_{2N}, including prod m_f^nu for the chiral model."""
    pref = 1.0
    if not ctx.quenched.is_hermite:
        pref = math.prod(m ** ctx.quenched.params.nu for m in ctx.masses)
    val = expect_char_polys(ctx.quenched, ctx.n_eigs, ctx.points)
    return pref * val


def massive_norm(ctx: MassiveContext, k: int | None = None):
    """h^{(N_f)}_k from partition-ratio quotients (default k = N - 1)."""
    if k is None:
        k = ctx.N - 1
    if k < 0:
        raise DomainError("norm index must be nonnegative")
    fam, a = ctx.quenched, ctx.points
    r_hi = expect_char_polys(fam, 2 * k + 2, a)
    r_lo = expect_char_polys(fam, 2 * k, a)
    return _maybe_real(fam.norm(k) * r_hi / r_lo, a)


def _near_point_offsets(z, a, rel=1e-6):
    """Offsets for z within rel of an insertion point (removable singularity)."""
    za = complex(z)
    for p in a:
        if abs(za - p) <= rel * (1 + abs(p)):
            return 1e-4 * (1 + abs(p))
    return 0.0


def _pointwise(fun):
    """Vectorise a scalar evaluator and resolve removable singularities at z = a_l."""

    def wrapped(ctx, z, *args):
        a = ctx.points
        z_arr = np.asarray(z)
        out = np.empty(z_arr.shape, dtype=complex)
        for idx, zz in np.ndenumerate(z_arr):
            h = _near_point_offsets(zz, a)
            if h:
                # polynomial in z: the symmetric average is exact up to O(h^2) terms
                out[idx] = 0.5 * (fun(ctx, zz + h, *args) + fun(ctx, zz - h, *args))
            else:
                out[idx] = fun(ctx, zz, *args)
        out = _maybe_real(out, z_arr, a)
        return out if np.ndim(z) else out[()]

    wrapped.__doc__ = fun.__doc__
    wrapped.__name__ = fun.__name__
    return wrapped


def _even_sop_scalar(ctx: MassiveContext, z):
    fam, N, a = ctx.quenched, ctx.N, ctx.points
    k = a.size
    if k == 0:
        return fam.q(2 * N, z)
    denom_z = np.prod(z - a)
    if k % 2 == 0:
        # Pf [[0, q(z), q(a_g)], [-q(z), 0, K(z, a_g)], [-q(a_f), K(a_f, z), K(a_f, a_g)]]
        n = 2 * N + k
        _, M = _char_block(fam, N, a)
        qz, qa = fam.q(n, z), fam.q(n, a)
        num = bordered_pfaffian([([], qa), ([-qz], fam.kernel(n, z, a))], _kmat(fam, n, a))
        return num / (denom_z * pfaffian(M))
    # Pf [[0, K(z, a_g)], [K(a_f, z), K(a_f, a_g)]] over the bordered denominator
    n = 2 * N + k + 1
    _, D = _char_block(fam, N, a)
    num = bordered_pfaffian([([], fam.kernel(n, z, a))], _kmat(fam, n, a))
    return fam.norm(N + (k - 1) // 2) * num / (denom_z * pfaffian(D))


massive_even_sop = _pointwise(_even_sop_scalar)
massive_even_sop.__doc__ = """q^{(N_f)}_{2N}(z): ratio of bordered Pfaffians of quenched kernels and SOP.

Even number of insertion points k, with n = 2N + k:
    Pf[[0, q_n(z), q_n(a_g)], [-q_n(z), 0, K_n(z, a_g)], [-q_n(a_f), K_n(a_f, z), K_n(a_f, a_g)]]
        / (prod_f (z - a_f) Pf[K_n(a_f, a_g)])
Odd k, with n = 2N + k + 1:
    h_{N+(k-1)/2} Pf[[0, K_n(z, a_g)], [K_n(a_f, z), K_n(a_f, a_g)]]
        / (prod_f (z - a_f) Pf[[0, q_{n-2}(a_g)], [-q_{n-2}(a_f), K_{n-2}(a_f, a_g)]])
At z = a_f the value is taken as the mean of z +/- 1e-4 (1 + |a_f|).
"""


def _kernel_scalar(ctx: MassiveContext, z, u):
    fam, N, a = ctx.quenched, ctx.N, ctx.points
    k = a.size
    if N == 0:
        return 0.0
    if k == 0:
        return fam.kernel(2 * N, z, u)
    den = np.prod(z - a) * np.prod(u - a)
    if k % 2 == 0:
        n = 2 * N + k
        _, M = _char_block(fam, N, a)
        num = bordered_pfaffian(
            [([], fam.kernel(n, u, a)), ([fam.kernel(n, z, u)], fam.kernel(n, z, a))],
            _kmat(fam, n, a),
        )
        return -num / (den * pfaffian(M))
    n = 2 * N + k - 1
    _, D = _char_block(fam, N, a)
    qz, qu, qa = fam.q(n, z), fam.q(n, u), fam.q(n, a)
    num = bordered_pfaffian(
        [([], qa), ([-qz], fam.kernel(n, z, a)), ([-qu, fam.kernel(n, u, z)], fam.kernel(n, u, a))],
        _kmat(fam, n, a),
    )
    return num / (den * pfaffian(D))


def massive_kernel(ctx: MassiveContext, z, u):
    """K^{(N_f)}_{2N}(z, u) from quenched kernels (and SOP for odd k).

    Even k, n = 2N + k: -Pf[[0, K_n(u, z), K_n(u, a_g)], [K_n(z, u), 0, K_n(z, a_g)],
    [K_n(a_f, u), K_n(a_f, z), K_n(a_f, a_g)]] / (prod (z - a_f)(u - a_f) Pf[K_n(a_f, a_g)]).
    Odd k uses the doubly bordered layout with q_{2N+k-1} in the first row.
    """
    a = ctx.points
    zb, ub = np.broadcast_arrays(np.asarray(z), np.asarray(u))
    out = np.empty(zb.shape, dtype=complex)
    for idx in np.ndindex(zb.shape):
        zz, uu = complex(zb[idx]), complex(ub[idx])
        hz, hu = _near_point_offsets(zz, a), _near_point_offsets(uu, a)
        if hz or hu:
            vals = [
                _kernel_scalar(ctx, zz + sz * hz, uu + su * hu)
                for sz in ((1, -1) if hz else (0,))
                for su in ((1, -1) if hu else (0,))
            ]
            out[idx] = np.mean(vals)
        else:
            out[idx] = _kernel_scalar(ctx, zz, uu)
    out = _maybe_real(out, z, u, a)
    return out if out.ndim else out[()]


def _odd_sop_scalar(ctx: MassiveContext, z, c):
    fam, N, a = ctx.quenched, ctx.N, ctx.points
    k = a.size
    if k == 0:
        return fam.with_c(c).q(2 * N + 1, z)
    denom_z = np.prod(z - a)
    if k % 2 == 0:
        n = 2 * N + k
        _, M = _char_block(fam, N, a)
        qz, qa = fam.q(n + 1, z), fam.q(n + 1, a)
        num = bordered_pfaffian([([], qa), ([-qz], fam.kernel(n, z, a))], _kmat(fam, n, a))
        val = num / (denom_z * pfaffian(M))
    else:
        n = 2 * N + k + 1
        _, D = _char_block(fam, N, a)
        qp_z, qp_a = fam.q(n, z), fam.q(n, a)
        qm_z, qm_a = fam.q(n - 2, z), fam.q(n - 2, a)
        # rows: border q_{n}, z, border q_{n-2} (c~ = 0), a_f
        num = bordered_pfaffian(
            [([], qp_a), ([-qp_z], fam.kernel(n, z, a)), ([0.0, qm_z], qm_a)],
            _kmat(fam, n, a),
        )
        val = num / (denom_z * pfaffian(D))
    return val + c * _even_sop_scalar(ctx, z)


def massive_odd_sop(ctx: MassiveContext, z, c: float = 0.0):
    """q^{(N_f)}_{2N+1}(z) up to the free multiple c of q^{(N_f)}_{2N}(z)."""
    return _pointwise(_odd_sop_scalar)(ctx, z, c)


def pfid_shift_check(ctx: MassiveContext, M: int | None = None, rtol: float = 1e-10) -> dict:
    """Compare Pf[[0, q_{2M}(a_g)], [-q_{2M}(a_f), K_{2M+2}]] with the same using K_{2M}.

    Needs an odd number of insertion points (otherwise the bordered matrix has
    odd size).  The difference is measured relative to the larger value, or to
    the Hadamard bound sqrt(prod_i |row_i|) when both Pfaffians vanish to
    rounding (``vanishing`` is then True: with few quenched eigenvalues the
    bordered kernel matrix is rank deficient).
    """
    fam, a = ctx.quenched, ctx.points
    if a.size % 2 == 0:
        raise DomainError("the shift identity needs an odd number of insertion points")
    M = ctx.N if M is None else M
    q = fam.q(2 * M, a)
    K_hi = _kmat(fam, 2 * M + 2, a)
    lhs = bordered_pfaffian([([], q)], K_hi)
    rhs = bordered_pfaffian([([], q)], _kmat(fam, 2 * M, a))
    full = np.zeros((a.size + 1, a.size + 1), dtype=complex)
    full[0, 1:], full[1:, 0], full[1:, 1:] = q, -q, K_hi
    bound = float(np.sqrt(np.prod(np.linalg.norm(full, axis=1))))
    scale = max(abs(lhs), abs(rhs))
    vanishing = scale <= 1e-12 * bound
    rel = abs(lhs - rhs) / (bound if vanishing else max(scale, 1e-300))
    return {"lhs": lhs, "rhs": rhs, "rel_err": float(rel), "vanishing": bool(vanishing),
            "pass": bool(rel <= rtol)}


NODE_SHIFT = 0.3


def interpolation_radius(ctx: MassiveContext) -> float:
    """Radius of the circle used to read off polynomial coefficients.

    Chosen as the geometric mean root modulus of the quenched q_{2N}, so
    that the monomials are of comparable size on the circle.
    """
    if ctx.N == 0:
        return 1.0
    q0 = abs(complex(ctx.quenched.q(2 * ctx.N, 0.0)))
    return max(1.0, q0 ** (1.0 / (2 * ctx.N)))


def _circle_nodes(m, R):
    # rotated off the real and imaginary axes, where insertion points sit
    return R * np.exp(2j * np.pi * (np.arange(m) + NODE_SHIFT) / m)


def _circle_coeffs(values, R, axis=0):
    """Ascending coefficients from values at :func:`_circle_nodes` along ``axis``."""
    v = np.asarray(values, dtype=complex)
    m = v.shape[axis]
    k = np.arange(m)
    fac = np.exp(-2j * np.pi * k * NODE_SHIFT / m) / R**k / m
    shape = [1] * v.ndim
    shape[axis] = m
    return np.fft.fft(v, axis=axis) * fac.reshape(shape)


def _realify(C):
    if np.all(np.abs(C.imag) <= 1e-9 * np.max(np.abs(C))):
        return C.real
    return C


def massive_sop_coeffs(ctx: MassiveContext, odd: bool = False, c: float = 0.0) -> np.ndarray:
    """Ascending coefficients of q^{(N_f)}_{2N} (or q^{(N_f)}_{2N+1} with constant c).

    The polynomial is interpolated exactly on deg + 1 points of a circle;
    a real array is returned when the imaginary parts vanish to rounding.
    """
    deg = 2 * ctx.N + int(odd)
    R = interpolation_radius(ctx)
    nodes = _circle_nodes(deg + 1, R)
    vals = massive_odd_sop(ctx, nodes, c) if odd else massive_even_sop(ctx, nodes)
    return _realify(_circle_coeffs(vals, R))


def massive_kernel_coeffs(ctx: MassiveContext) -> np.ndarray:
    """Coefficient matrix C[i, j] of z^i u^j in K^{(N_f)}_{2N}(z, u)."""
    d = max(2 * ctx.N, 1)
    R = interpolation_radius(ctx)
    nodes = _circle_nodes(d, R)
    vals = massive_kernel(ctx, nodes[:, None], nodes[None, :])
    return _realify(_circle_coeffs(_circle_coeffs(vals, R, 0), R, 1))


def massive_odd_sop_normalized(ctx: MassiveContext, z, c: float = 0.0):
    """q^{(N_f)}_{2N+1}(z) with its z^{2N} coefficient fixed to c.

    This is the normalisation of the quenched q_1 = z + c and of the
    expectation value <det(z - M)(Tr M + z + c)>.
    """
    lead = massive_sop_coeffs(ctx, odd=True)[2 * ctx.N]
    return massive_odd_sop(ctx, z, 0.0) + (c - lead) * massive_even_sop(ctx, z)
