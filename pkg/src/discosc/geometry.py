"""Unit-disc geometry: Mobius maps, pseudohyperbolic distance, Carleson boxes.

Points are plain complex numbers inside the open unit disc.  A thin
validating wrapper (DiscPoint) is provided for call sites that want the
membership check enforced at construction time; every function below also
accepts raw complex input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numutil import one_minus_conj_mul, wrap_angle

__all__ = [
    "DiscPoint",
    "CarlesonBox",
    "mobius_map",
    "pseudo_distance",
    "box_contains",
    "carleson_box_table",
    "carleson_norm_estimate",
]


@dataclass(frozen=True)
class DiscPoint:
    """A point of the open unit disc; construction rejects |value| >= 1."""

    value: complex

    def __post_init__(self):
        v = complex(self.value)
        if not np.isfinite(v.real) or not np.isfinite(v.imag):
            raise ValueError("disc point must be finite")
        if abs(v) >= 1.0:
            raise ValueError(f"|z| = {abs(v):.17g} is not inside the unit disc")
        object.__setattr__(self, "value", v)


def _val(z):
    return z.value if isinstance(z, DiscPoint) else z


def mobius_map(z, w):
    """Disc automorphism (z - w) / (1 - conj(z) w).

    As a function of w this exchanges 0 and z; it maps the disc onto itself.
    Vectorized over either argument.
    """
    z, w = _val(z), _val(w)
    return (z - w) / one_minus_conj_mul(z, w)


def pseudo_distance(z, w):
    """Pseudohyperbolic distance |z - w| / |1 - conj(z) w|, in [0, 1)."""
    z, w = _val(z), _val(w)
    return np.abs(z - w) / np.abs(one_minus_conj_mul(z, w))


@dataclass(frozen=True)
class CarlesonBox:
    """Boundary box of depth delta at boundary angle phi.

    The box is {zeta in closed disc : |zeta| >= 1 - delta,
    |arg(zeta) - phi| <= pi*delta}, angular distance taken mod 2*pi.
    Requires delta in (0, 1] and phi in [0, 2*pi).
    """

    delta: float
    phi: float

    def __post_init__(self):
        if not (0.0 < self.delta <= 1.0):
            raise ValueError(f"box depth must lie in (0, 1], got {self.delta!r}")
        if not (0.0 <= self.phi < 2.0 * np.pi):
            raise ValueError(f"box angle must lie in [0, 2*pi), got {self.phi!r}")

    def contains(self, zeta) -> bool:
        return bool(box_contains(self, zeta))


def box_contains(box: CarlesonBox, zeta):
    """Membership test for a Carleson box; vectorized over zeta.

    The angular gap is reduced to its representative in (-pi, pi], so boxes
    straddling angle 0 behave correctly.
    """
    zeta = np.asarray(_val(zeta))
    radial = np.abs(zeta) >= 1.0 - box.delta
    # arg of 0 is irrelevant: the radial test already fails for delta < 1
    ang = np.abs(wrap_angle(np.angle(zeta) - box.phi)) <= np.pi * box.delta
    inside = np.abs(zeta) <= 1.0 + 1e-15
    return radial & ang & inside


def _box_mass(density, delta: float, phi: float, radial_cells: int,
              angular_cells: int) -> float:
    """Midpoint-rule mass of density * dA over one box, polar coordinates.

    Midpoints keep the rule clear of |zeta| = 1 where densities may blow up.
    """
    dt = delta / radial_cells
    dth = 2.0 * np.pi * delta / angular_cells
    t = 1.0 - delta + (np.arange(radial_cells) + 0.5) * dt
    th = phi - np.pi * delta + (np.arange(angular_cells) + 0.5) * dth
    zeta = t[:, None] * np.exp(1j * th[None, :])
    vals = np.asarray(density(zeta), dtype=float)
    if not np.all(np.isfinite(vals)) or np.any(vals < 0.0):
        raise ValueError("density returned a negative or non-finite sample")
    return float(np.sum(vals * t[:, None]) * dt * dth)


def carleson_box_table(density, deltas, angular_samples: int = 8,
                       radial_cells: int = 64, angular_cells: int = 64):
    """Per-depth Carleson ratios max_phi mass(Q_delta) / delta.

    density maps an array of disc points to nonnegative reals.  For each
    delta the boundary angle phi runs over a uniform grid of
    angular_samples positions and the worst box is kept.  Returns a list of
    (delta, ratio) pairs in the order given.
    """
    if angular_samples < 1:
        raise ValueError("need at least one boundary angle")
    out = []
    for delta in deltas:
        best = 0.0
        for j in range(angular_samples):
            phi = 2.0 * np.pi * j / angular_samples
            CarlesonBox(delta, phi)  # validates delta
            best = max(best, _box_mass(density, delta, phi, radial_cells,
                                       angular_cells) / delta)
        out.append((float(delta), best))
    return out


def carleson_norm_estimate(density, deltas, angular_samples: int = 8,
                           radial_cells: int = 64, angular_cells: int = 64) -> float:
    """Largest sampled Carleson ratio over the given depth ladder."""
    table = carleson_box_table(density, deltas, angular_samples,
                               radial_cells, angular_cells)
    return max(v for _, v in table)
