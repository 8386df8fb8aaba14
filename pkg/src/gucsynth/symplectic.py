"""Real symplectic matrices in the (q1, p1, ..., qN, pN) quadrature ordering.

Matrices are plain ``float64`` numpy arrays. A *local layer* is stored as an
array of shape ``(N, 2, 2)`` holding one 2x2 block per mode; use
:func:`embed_local` to expand it to the ``2N x 2N`` block-diagonal form.
"""

from dataclasses import dataclass
from functools import reduce

import numpy as np
from scipy.linalg import block_diag, expm
from scipy.stats import unitary_group

from .errors import InvalidArgument, InvalidDimension, NotSymplectic, SqueezeOverflow

OMEGA_1 = np.array([[0.0, 1.0], [-1.0, 0.0]])

SQUEEZE_HARD_CAP = 50.0
TOL_DET = 1e-10
TOL_STRUCT = 1e-8


@dataclass(frozen=True)
class RngSpec:
    """Seed and sampling scheme for every random draw in the package.

    Two equal specs always produce bit-identical samples.
    """

    seed: int = 0
    scheme: str = "factored"
    squeeze_cap: float = 1.0

    def __post_init__(self):
        if self.scheme not in ("factored", "exponential"):
            raise InvalidArgument(f"unknown sampling scheme {self.scheme!r}")
        if not (np.isfinite(self.squeeze_cap) and self.squeeze_cap >= 0):
            raise InvalidArgument("squeeze_cap must be finite and non-negative")

    def generator(self):
        return np.random.default_rng(self.seed)


def _generator(rng):
    if isinstance(rng, RngSpec):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def n_modes_of(S):
    """Number of modes of a ``2N x 2N`` matrix; raises on bad shapes."""
    S = np.asarray(S)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise InvalidDimension(f"expected a square matrix, got shape {S.shape}")
    if S.shape[0] == 0 or S.shape[0] % 2:
        raise InvalidDimension(f"matrix dimension {S.shape[0]} is not a positive even number")
    return S.shape[0] // 2


def max_abs(A):
    return float(np.max(np.abs(A))) if np.size(A) else 0.0


def symplectic_form(n_modes):
    if int(n_modes) != n_modes or n_modes < 1:
        raise InvalidDimension(f"number of modes must be a positive integer, got {n_modes}")
    return block_diag(*([OMEGA_1] * int(n_modes)))


def symplectic_residual(S):
    """Max-abs entry of ``S @ Omega @ S.T - Omega``."""
    S = np.asarray(S, dtype=float)
    omega = symplectic_form(n_modes_of(S))
    return max_abs(S @ omega @ S.T - omega)


def default_symplectic_tol(S, scale=None):
    """Residual budget ``1e-9 * 2N`` scaled by the max-abs entry of ``S``.

    The rounding error of ``S @ Omega @ S.T`` grows like ``max|S|**2``. For a
    product of many factors pass ``scale``, the largest entry seen in any
    partial product: the accumulated error is then of order ``max|S| * scale``.
    """
    S = np.asarray(S, dtype=float)
    m = max(1.0, max_abs(S))
    return 1e-9 * S.shape[0] * m * max(m, scale or 0.0)


def is_symplectic(S, tol=None, scale=None):
    """True iff the symplectic residual of ``S`` is within ``tol``.

    With ``tol=None`` the default of :func:`default_symplectic_tol` is used
    (optionally widened by ``scale``); an explicit ``tol`` is absolute.
    """
    S = np.asarray(S, dtype=float)
    n_modes_of(S)
    if not np.all(np.isfinite(S)):
        return False
    if tol is None:
        tol = default_symplectic_tol(S, scale)
    return symplectic_residual(S) <= tol


def validate_symplectic(S, tol=None, name="matrix"):
    """Return ``S`` as a float array, raising :class:`NotSymplectic` if it is not."""
    S = np.array(S, dtype=float)
    n_modes_of(S)
    if not np.all(np.isfinite(S)):
        raise NotSymplectic(f"{name} has non-finite entries")
    residual = symplectic_residual(S)
    if tol is None:
        tol = default_symplectic_tol(S)
    if residual > tol:
        raise NotSymplectic(
            f"{name} is not symplectic: residual {residual:.3e} > {tol:.3e}", residual
        )
    return S


def rotation(theta):
    """Phase-space rotation by ``theta`` radians."""
    if not np.isfinite(theta):
        raise InvalidArgument(f"rotation angle must be finite, got {theta}")
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s], [-s, c]])


def squeeze(r, cap=SQUEEZE_HARD_CAP):
    """Single-mode squeezer ``diag(exp(-r), exp(r))``."""
    if not np.isfinite(r) or abs(r) > cap:
        raise SqueezeOverflow(f"|r| = {abs(r)} exceeds the squeezing cap {cap}")
    return np.diag([np.exp(-r), np.exp(r)])


def check_local_block(L, tol=TOL_DET):
    L = np.asarray(L, dtype=float)
    if L.shape != (2, 2):
        raise InvalidDimension(f"local block must be 2x2, got {L.shape}")
    det = np.linalg.det(L)
    if not np.isfinite(det) or abs(det - 1.0) > tol:
        raise NotSymplectic(f"local block has det {det!r}, expected 1", abs(det - 1.0))
    return L


def euler_decompose(L, tol=TOL_DET):
    """Split a 2x2 symplectic block as ``rotation(-theta) @ squeeze(r) @ rotation(phi)``.

    Returns ``(theta, r, phi)`` with ``r >= 0``, ``theta`` in ``[0, pi)`` and
    ``phi`` in ``[0, 2*pi)``. Shifting both angles by ``pi`` gives the same
    block, so the smaller ``theta`` is reported.
    """
    L = check_local_block(L, tol)
    U, s, Vt = np.linalg.svd(L)
    if np.linalg.det(U) < 0:
        flip = np.diag([1.0, -1.0])
        U, Vt = U @ flip, flip @ Vt
    # SVD sorts singular values descending; squeeze() puts the small one first.
    U = U @ OMEGA_1.T
    Vt = OMEGA_1 @ Vt
    r = 0.5 * (np.log(s[0]) - np.log(s[1]))
    theta = -np.arctan2(U[0, 1], U[0, 0])
    phi = np.arctan2(Vt[0, 1], Vt[0, 0])
    # (theta, phi) and (theta - pi, phi + pi) give the same block; each step
    # below moves both angles so rounding at the boundary cannot split them.
    if theta < 0:
        theta, phi = theta + np.pi, phi + np.pi
    if theta >= np.pi:
        theta, phi = theta - np.pi, phi + np.pi
    phi = phi % (2 * np.pi)
    if phi >= 2 * np.pi:
        phi = 0.0
    return float(theta), float(r), float(phi)


def symplectic_inverse(S):
    """Inverse via ``Omega^T S^T Omega``; no linear solve."""
    S = np.asarray(S, dtype=float)
    omega = symplectic_form(n_modes_of(S))
    return omega.T @ S.T @ omega


def compose(*matrices):
    """Matrix product ``A @ B @ ...`` of equally sized symplectic matrices.

    The rightmost factor acts first.
    """
    if not matrices:
        raise InvalidArgument("compose needs at least one matrix")
    mats = [np.asarray(M, dtype=float) for M in matrices]
    n = n_modes_of(mats[0])
    for M in mats[1:]:
        if n_modes_of(M) != n:
            raise InvalidDimension(f"cannot compose {2 * n}x{2 * n} with {M.shape}")
    return reduce(np.matmul, mats)


def embed_local(blocks):
    """Block-diagonal ``2N x 2N`` matrix from an ``(N, 2, 2)`` stack of blocks."""
    blocks = np.asarray(blocks, dtype=float)
    if blocks.ndim != 3 or blocks.shape[1:] != (2, 2) or blocks.shape[0] < 1:
        raise InvalidDimension(f"local layer must have shape (N, 2, 2), got {blocks.shape}")
    return block_diag(*blocks)


def apply_local(blocks, M):
    """``embed_local(blocks) @ M`` computed as 2x2 updates of row pairs."""
    blocks = np.asarray(blocks, dtype=float)
    M = np.asarray(M, dtype=float)
    q, p = M[0::2], M[1::2]
    a, b = blocks[:, 0, 0, None], blocks[:, 0, 1, None]
    c, d = blocks[:, 1, 0, None], blocks[:, 1, 1, None]
    out = np.empty_like(M)
    out[0::2] = a * q + b * p
    out[1::2] = c * q + d * p
    return out


def identity_layer(n_modes):
    return np.tile(np.eye(2), (n_modes, 1, 1))


def local_blocks_of(S, tol=TOL_STRUCT):
    """Diagonal 2x2 blocks of ``S`` if ``S`` is local (no cross-mode blocks)."""
    S = np.asarray(S, dtype=float)
    n = n_modes_of(S)
    blocks = np.array([S[2 * m : 2 * m + 2, 2 * m : 2 * m + 2] for m in range(n)])
    off = S - block_diag(*blocks)
    if max_abs(off) > tol * max(1.0, max_abs(S)):
        raise InvalidArgument("matrix has non-zero cross-mode blocks")
    return blocks


def quadrature_indices(modes):
    """Row/column indices ``[2m, 2m+1, ...]`` of the given (0-based) modes."""
    return np.array([q for m in modes for q in (2 * m, 2 * m + 1)], dtype=int)


def embed_on_modes(T, modes, n_modes):
    """Embed a ``2l x 2l`` matrix acting on ``modes`` into the N-mode identity."""
    T = np.asarray(T, dtype=float)
    if T.shape != (2 * len(modes), 2 * len(modes)):
        raise InvalidDimension(f"{T.shape} does not act on {len(modes)} modes")
    if len(set(modes)) != len(modes) or any(not 0 <= m < n_modes for m in modes):
        raise InvalidArgument(f"modes {list(modes)} are not distinct indices below {n_modes}")
    E = np.eye(2 * n_modes)
    idx = quadrature_indices(modes)
    E[np.ix_(idx, idx)] = T
    return E


def mode_permutation(perm):
    """Symplectic matrix sending input mode ``i`` to output mode ``perm[i]``."""
    n = len(perm)
    if sorted(perm) != list(range(n)):
        raise InvalidArgument(f"{perm} is not a permutation of range({n})")
    P = np.zeros((2 * n, 2 * n))
    for i, j in enumerate(perm):
        P[2 * j : 2 * j + 2, 2 * i : 2 * i + 2] = np.eye(2)
    return P


def random_local_block(rng, squeeze_cap=1.0):
    theta, phi = rng.uniform(0.0, 2 * np.pi, size=2)
    r = rng.uniform(-squeeze_cap, squeeze_cap)
    return rotation(-theta) @ squeeze(r) @ rotation(phi)


def random_local_layer(n_modes, rng, squeeze_cap=None):
    """Stack of ``n_modes`` random blocks ``rotation(-t) @ squeeze(r) @ rotation(p)``.

    ``rng`` may be an :class:`RngSpec`, a numpy ``Generator`` or a seed.
    """
    if n_modes < 1:
        raise InvalidDimension("need at least one mode")
    if squeeze_cap is None:
        squeeze_cap = rng.squeeze_cap if isinstance(rng, RngSpec) else 1.0
    gen = _generator(rng)
    return np.array([random_local_block(gen, squeeze_cap) for _ in range(n_modes)])


def passive_from_unitary(U):
    """Orthogonal symplectic matrix of the passive transformation ``a -> U a``."""
    X, Y = U.real, U.imag
    n = U.shape[0]
    K = np.empty((2 * n, 2 * n))
    K[0::2, 0::2] = X
    K[0::2, 1::2] = -Y
    K[1::2, 0::2] = Y
    K[1::2, 1::2] = X
    return K


def random_symplectic(n_modes, rng, scheme=None, squeeze_cap=None):
    """Seeded random ``2N x 2N`` symplectic matrix.

    ``"factored"`` draws ``L2 @ K @ L1`` with random local layers ``L1, L2`` and
    a Haar-random passive mixer ``K``; all 2x2 blocks are nonzero with
    probability one. ``"exponential"`` draws ``expm(Omega @ H)`` for a random
    symmetric ``H`` of spectral norm ``squeeze_cap``.
    """
    if int(n_modes) != n_modes or n_modes < 1:
        raise InvalidDimension(f"number of modes must be a positive integer, got {n_modes}")
    if isinstance(rng, RngSpec):
        scheme = scheme or rng.scheme
        squeeze_cap = rng.squeeze_cap if squeeze_cap is None else squeeze_cap
    scheme = scheme or "factored"
    squeeze_cap = 1.0 if squeeze_cap is None else squeeze_cap
    gen = _generator(rng)
    n = int(n_modes)
    if scheme == "factored":
        L1 = embed_local(random_local_layer(n, gen, squeeze_cap))
        U = unitary_group.rvs(n, random_state=gen) if n > 1 else np.exp(
            2j * np.pi * gen.uniform()
        ).reshape(1, 1)
        L2 = embed_local(random_local_layer(n, gen, squeeze_cap))
        return L2 @ passive_from_unitary(U) @ L1
    if scheme == "exponential":
        A = gen.standard_normal((2 * n, 2 * n))
        H = 0.5 * (A + A.T)
        H *= squeeze_cap / np.linalg.norm(H, 2)
        return expm(symplectic_form(n) @ H)
    raise InvalidArgument(f"unknown sampling scheme {scheme!r}")
