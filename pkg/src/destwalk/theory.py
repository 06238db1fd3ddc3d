"""Closed-form step-length laws for the one-hot, gamma = 0 walker.

With all weight on axis ``k`` the step length is ``a / |cos theta_k|`` where
``a = alpha * r`` and ``theta_k`` is the angle between the chosen axis and
``R``. For uniformly distributed ``theta_k`` (exact in two dimensions) the
conditional density on ``[a, inf)`` is

    f(l | r) = (2 / pi) * a / (l * sqrt(l**2 - a**2)),

with CDF ``(2 / pi) * arccos(a / l)``. Truncating at ``l_cap`` renormalises
by ``arccos(a / l_cap)``; clipping instead puts the excess mass in an atom
at ``l_cap``. Far above ``a`` the density falls as ``1 / l**2``.

For ``n > 2`` the angle to a Haar-random axis is not uniform, so these
formulas are only indicative there.
"""

from dataclasses import dataclass

import numpy as np

from .errors import OutOfSupportError


@dataclass(frozen=True)
class ConditionalStepLaw:
    a: float  # minimum step, alpha * r
    l_cap: float  # truncation / clip length

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("a must be positive")
        if not self.l_cap > self.a:
            raise ValueError("l_cap must exceed a")

    @property
    def norm(self):
        return float(np.arccos(self.a / self.l_cap))


def _in_support(l, law, include_lower):
    l = np.asarray(l, dtype=float)
    low_ok = l >= law.a if include_lower else l > law.a
    if np.any(~(low_ok & (l <= law.l_cap))):
        raise OutOfSupportError(f"l outside ({law.a:g}, {law.l_cap:g}]")
    return l


def conditional_density(l, law):
    """Density of the step length truncated to ``(a, l_cap]``."""
    l = _in_support(l, law, include_lower=False)
    out = law.a / (law.norm * l * np.sqrt(l * l - law.a * law.a))
    return out if out.ndim else float(out)


def conditional_cdf(l, law):
    """``arccos(a / l) / arccos(a / l_cap)`` on ``[a, l_cap]``."""
    l = _in_support(l, law, include_lower=True)
    out = np.arccos(law.a / l) / law.norm
    return out if out.ndim else float(out)


def clip_mass(law):
    """Mass the untruncated 2-D law puts beyond ``l_cap``: ``1 - (2/pi) arccos(a/l_cap)``."""
    return 1.0 - 2.0 / np.pi * law.norm


def clipped_cdf(l, law):
    """CDF of ``min(l, l_cap)`` in 2-D: continuous part below ``l_cap``, atom at it."""
    l = _in_support(l, law, include_lower=True)
    out = np.where(l < law.l_cap, (1.0 - clip_mass(law)) * np.arccos(law.a / l) / law.norm, 1.0)
    return out if out.ndim else float(out)


def marginal_tail_density(l, a):
    """Unnormalised asymptotic density ``1 / l**2``, valid for ``l >= 10 a``."""
    l = np.asarray(l, dtype=float)
    if np.any(l < 10.0 * a):
        raise OutOfSupportError("l must be at least 10*a for the 1/l^2 asymptote")
    out = 1.0 / (l * l)
    return out if out.ndim else float(out)
