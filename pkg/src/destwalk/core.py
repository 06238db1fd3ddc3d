"""Step mathematics for the destination-attractiveness walk.

An agent at ``X`` is pulled toward a destination ``D``. With ``R = D - X``
rotated into a random orthonormal frame (``R' = A^T R``) the per-axis move is

    dx'_i = alpha * eta_i * r**2 / r'_i,
    eta_i = beta_i**(1 - |gamma|) * (r'_i**2 / r**2)**gamma,

then capped at ``l_max`` and rotated back (``dX = A dx'``). ``gamma = 1``
reproduces the weighted-average (minimum displacement) step ``alpha * R``;
``gamma = 0`` lands anywhere on the hyperplane ``R . dX = alpha r**2``.

All functions broadcast over leading axes: vectors are ``(..., n)`` arrays
and frames are ``(..., n, n)`` arrays whose *columns* are the new basis.
Nothing here holds state; randomness comes in through an explicit
``numpy.random.Generator``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    AtDestinationError,
    DimensionMismatchError,
    InvalidDimensionError,
    SingularComponentError,
)

BETA_MODES = ("simplex", "onehot")

# |r'_i| below SINGULAR_REL * max(1, r) is treated as a zero component.
SINGULAR_REL = 1e-12
# Below this ||R|| the agent is considered to be at its destination.
AT_DESTINATION = 1e-15
# Gram-Schmidt residual (relative to the raw column norm) that counts as
# linear dependence and triggers a redraw.
DEGENERATE_REL = 1e-8


@dataclass(frozen=True)
class StepParams:
    """Change rate ``alpha``, attractiveness ``gamma`` and step cap ``l_max``."""

    alpha: float = 0.001
    gamma: float = 0.0
    l_max: float = 10.0

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError("alpha must be in (0,1]")
        if not (-1.0 <= self.gamma <= 1.0):
            raise ValueError("gamma must be in [-1,1]")
        if not (self.l_max > 0.0) or not np.isfinite(self.l_max):
            raise ValueError("l_max must be positive and finite")


def _check_dim(n):
    if int(n) != n or n < 1:
        raise InvalidDimensionError(f"dimension must be a positive integer, got {n!r}")
    return int(n)


def _shape(size):
    if size is None:
        return ()
    if np.isscalar(size):
        return (int(size),)
    return tuple(size)


def sample_beta(n, mode="simplex", rng=None, size=None):
    """Draw allocation weights on the (n-1)-simplex.

    ``"simplex"`` is uniform on the simplex (normalised i.i.d. standard
    exponentials, i.e. a flat Dirichlet). ``"onehot"`` picks one axis
    uniformly and gives it all the weight.
    """
    n = _check_dim(n)
    rng = np.random.default_rng() if rng is None else rng
    shape = _shape(size)
    if mode == "simplex":
        e = rng.standard_exponential(shape + (n,))
        return e / e.sum(axis=-1, keepdims=True)
    if mode == "onehot":
        k = rng.integers(n, size=shape)
        return np.eye(n)[k]
    raise ValueError(f"unknown beta mode {mode!r}; expected one of {BETA_MODES}")


def singular_floor(r):
    return SINGULAR_REL * np.maximum(1.0, r)


def eta_weights(beta, r_prime, gamma):
    """Effective per-axis weights ``beta**(1-|gamma|) * (r'_i**2/r**2)**gamma``.

    Uses ``0**0 == 1`` so that ``|gamma| = 1`` ignores ``beta`` entirely.

    Raises
    ------
    AtDestinationError
        If any ``||r_prime||`` is zero.
    SingularComponentError
        If ``gamma < 0`` and some ``|r'_i|`` is below the singularity floor.
    """
    beta = np.asarray(beta, dtype=float)
    r_prime = np.asarray(r_prime, dtype=float)
    if not (-1.0 <= gamma <= 1.0):
        raise ValueError("gamma must be in [-1,1]")
    r2 = np.sum(r_prime**2, axis=-1, keepdims=True)
    if np.any(r2 == 0.0):
        raise AtDestinationError("difference vector has zero norm")
    if gamma < 0:
        floor = singular_floor(np.sqrt(r2))
        if np.any(np.abs(r_prime) < floor):
            raise SingularComponentError("rotated component below singularity floor")
    with np.errstate(divide="ignore", invalid="ignore"):
        return beta ** (1.0 - abs(gamma)) * (r_prime**2 / r2) ** gamma


def raw_step(r_prime, eta, alpha):
    """Unclipped move in the rotated frame, ``alpha * eta_i * r**2 / r'_i``.

    Axes with zero weight do not move. An axis with positive weight and a
    component below the singularity floor raises ``SingularComponentError``.
    """
    r_prime = np.asarray(r_prime, dtype=float)
    eta = np.asarray(eta, dtype=float)
    r2 = np.sum(r_prime**2, axis=-1, keepdims=True)
    active = eta > 0
    if np.any(active & (np.abs(r_prime) < singular_floor(np.sqrt(r2)))):
        raise SingularComponentError("division by a near-zero rotated component")
    num = alpha * eta * r2
    out = np.zeros(np.broadcast(num, r_prime).shape)
    np.divide(num, r_prime, out=out, where=active)
    return out


def clip_step(delta, l_max):
    """Scale ``delta`` down to norm ``l_max`` when it is longer; direction kept."""
    delta = np.asarray(delta, dtype=float)
    length = np.linalg.norm(delta, axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(length > l_max, l_max / length, 1.0)
    return delta * scale


def min_step(r, alpha):
    """Weighted-average step ``alpha * R``."""
    return alpha * np.asarray(r, dtype=float)


def orthonormalize(vectors):
    """Gram-Schmidt over the columns of ``(..., n, n)`` arrays.

    Modified Gram-Schmidt with one re-orthogonalisation pass. Returns
    ``(q, degenerate)`` where ``degenerate`` flags inputs whose columns were
    (numerically) linearly dependent; their ``q`` is meaningless.
    """
    q = np.array(vectors, dtype=float, copy=True)
    n = q.shape[-1]
    degenerate = np.zeros(q.shape[:-2], dtype=bool)
    for j in range(n):
        v = q[..., :, j]
        norm0 = np.linalg.norm(v, axis=-1)
        for _ in range(2):
            for i in range(j):
                qi = q[..., :, i]
                v -= np.sum(qi * v, axis=-1, keepdims=True) * qi
        nv = np.linalg.norm(v, axis=-1)
        bad = ~(nv > DEGENERATE_REL * norm0)
        degenerate |= bad
        q[..., :, j] = v / np.where(bad, 1.0, nv)[..., None]
    return q, degenerate


def random_frame(n, rng=None, size=None):
    """Random orthonormal basis (columns) from Gram-Schmidt on Gaussian columns.

    The result is Haar-distributed on O(n). Degenerate draws are redrawn in
    index order, so the output is a deterministic function of the stream.
    """
    n = _check_dim(n)
    rng = np.random.default_rng() if rng is None else rng
    shape = _shape(size)
    q, bad = orthonormalize(rng.standard_normal(shape + (n, n)))
    if np.any(bad):
        for idx in map(tuple, np.argwhere(bad)):
            while True:
                qi, b = orthonormalize(rng.standard_normal((n, n)))
                if not b:
                    q[idx] = qi
                    break
    return q


def _check_frame(frame, v):
    if frame.shape[-1] != v.shape[-1] or frame.shape[-2] != v.shape[-1]:
        raise DimensionMismatchError(
            f"frame is {frame.shape[-2]}x{frame.shape[-1]} but vector has {v.shape[-1]} components"
        )


def frame_to(frame, r):
    """Coordinates of ``r`` in the frame, ``A^T r``."""
    frame = np.asarray(frame, dtype=float)
    r = np.asarray(r, dtype=float)
    _check_frame(frame, r)
    return np.einsum("...ji,...j->...i", frame, r)


def frame_from(frame, delta_prime):
    """Standard-basis vector from frame coordinates, ``A delta'``."""
    frame = np.asarray(frame, dtype=float)
    delta_prime = np.asarray(delta_prime, dtype=float)
    _check_frame(frame, delta_prime)
    return np.einsum("...ij,...j->...i", frame, delta_prime)


def satisfaction_z(r, sigma_big):
    """Gaussian satisfaction ``exp(-r**2 / (2 Sigma))``, in (0, 1]."""
    return np.exp(-np.square(r) / (2.0 * sigma_big))


def delta_z(r, sigma_big):
    """Gap to the top, ``1 - z``; accurate for tiny ``r``."""
    return -np.expm1(-np.square(r) / (2.0 * sigma_big))


def propose_step(r, frame, beta, params):
    """One full step for a single agent.

    Parameters
    ----------
    r : (n,) array
        Difference vector ``D - X`` in the standard basis.
    frame : (n, n) array
        Orthonormal basis, one vector per column.
    beta : (n,) array
        Allocation weights.
    params : StepParams

    Returns
    -------
    delta : (n,) array
        Clipped displacement in the standard basis.
    l_raw : float
        Step length before clipping.
    """
    r = np.asarray(r, dtype=float)
    if np.linalg.norm(r) < AT_DESTINATION:
        return np.zeros_like(r), 0.0
    r_prime = frame_to(frame, r)
    eta = eta_weights(beta, r_prime, params.gamma)
    d_prime = raw_step(r_prime, eta, params.alpha)
    l_raw = float(np.linalg.norm(d_prime))
    return frame_from(frame, clip_step(d_prime, params.l_max)), l_raw
