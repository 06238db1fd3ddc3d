"""Per-step destination draws.

Two protocols:

* ``sim1`` -- the agent searches its own surroundings: ``D = X + r u`` with
  ``r ~ Exponential(rate=lam)`` and ``u`` a uniform unit vector.
* ``sim2`` -- a fixed true destination (``anchor``, origin by default) seen
  through isotropic Gaussian identification error of scale ``sigma``.
"""

from dataclasses import dataclass

import numpy as np

from .core import _check_dim, _shape

MODES = ("sim1", "sim2")


@dataclass(frozen=True)
class DestinationSpec:
    mode: str = "sim1"
    lam: float = 1000.0
    sigma: float = 0.001
    anchor: tuple | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"destination mode must be one of {MODES}, got {self.mode!r}")
        if not (self.lam > 0):
            raise ValueError("lambda must be positive")
        if not (self.sigma > 0):
            raise ValueError("sigma must be positive")
        if self.anchor is not None:
            object.__setattr__(self, "anchor", tuple(float(a) for a in self.anchor))

    @property
    def relative(self):
        """True when draws are offsets from the current position."""
        return self.mode == "sim1"

    def anchor_vector(self, n):
        if self.anchor is None:
            return np.zeros(n)
        a = np.asarray(self.anchor, dtype=float)
        if a.shape != (n,):
            raise ValueError(f"anchor has {a.size} components, expected {n}")
        return a

    def draw(self, n, size, rng):
        """Draw ``size`` destinations.

        For ``sim1`` these are offsets ``D - X`` (position independent); for
        ``sim2`` they are absolute destinations.
        """
        if self.relative:
            return sim1_offsets(n, self.lam, rng, size)
        return sim2_destination(self.anchor_vector(n), self.sigma, rng, size)


def uniform_direction(n, rng, size=None):
    """Unit vector(s) with a rotation-invariant distribution."""
    n = _check_dim(n)
    shape = _shape(size)
    g = rng.standard_normal(shape + (n,))
    norm = np.linalg.norm(g, axis=-1)
    # an exactly-zero Gaussian vector has probability zero; redraw if it happens
    for idx in map(tuple, np.argwhere(norm == 0.0)):
        while norm[idx] == 0.0:
            g[idx] = rng.standard_normal(n)
            norm[idx] = np.linalg.norm(g[idx])
    return g / norm[..., None]


def sim1_offsets(n, lam, rng, size=None):
    """``r u`` with ``r ~ Exponential(lam)``; distances are drawn before directions."""
    shape = _shape(size)
    r = rng.exponential(1.0 / lam, size=shape)
    u = uniform_direction(n, rng, shape)
    return np.asarray(r)[..., None] * u


def sim1_destination(x, lam, rng, size=None):
    x = np.asarray(x, dtype=float)
    return x + sim1_offsets(x.shape[-1], lam, rng, size)


def sim2_destination(anchor, sigma, rng, size=None):
    anchor = np.asarray(anchor, dtype=float)
    shape = _shape(size)
    return anchor + sigma * rng.standard_normal(shape + anchor.shape)
