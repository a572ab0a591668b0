"""Zero sequences in the disc: generators, counting functions, separation,
and density diagnostics.

A ZeroSequence is a finite multiset-free list of distinct disc points kept
sorted by modulus.  Generators attach their parameters (and closed-form
tail information where available) to the sequence metadata so downstream
reports can echo them.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .numutil import one_minus_abs, one_minus_abs2, one_minus_conj_mul

__all__ = [
    "ZeroSequence",
    "SharpnessParams",
    "BlaschkeSum",
    "ConditionReport",
    "generate_sharpness",
    "generate_radial_geometric",
    "generate_rho_lattice",
    "count_near",
    "log_integrated_count",
    "separation_constant",
    "uniform_separation_constant",
    "uniform_density_estimate",
    "rho_density_estimate",
    "rho_separation",
    "blaschke_sum",
    "condition_report",
]

LN3 = math.log(3.0)


class ZeroSequence:
    """Distinct points of the open unit disc, sorted by increasing modulus."""

    def __init__(self, points, label: str = "", meta: dict | None = None):
        pts = np.asarray(list(points), dtype=complex)
        if pts.ndim != 1:
            raise ValueError("points must form a one-dimensional list")
        if pts.size and not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        if pts.size and np.max(np.abs(pts)) >= 1.0:
            k = int(np.argmax(np.abs(pts)))
            raise ValueError(
                f"point {k} has modulus {abs(pts[k]):.17g} >= 1")
        order = np.argsort(np.abs(pts), kind="stable")
        pts = pts[order]
        dup = _duplicate_pairs(pts)
        if dup:
            raise ValueError(f"duplicate points at sorted indices {dup[:8]}")
        self.points = pts
        self.label = label
        self.meta = dict(meta or {})

    def __len__(self) -> int:
        return int(self.points.size)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, k):
        return self.points[k]

    def moduli(self) -> np.ndarray:
        return np.abs(self.points)

    def gaps(self) -> np.ndarray:
        """1 - |z_k|, boundary-stable."""
        return one_minus_abs(self.points)

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "points": [{"re": float(z.real), "im": float(z.imag)}
                       for z in self.points],
            "meta": self.meta,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ZeroSequence":
        try:
            pts = [complex(p["re"], p["im"]) for p in obj["points"]]
            label = str(obj.get("label", ""))
            meta = obj.get("meta", {})
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed sequence object: {exc}") from exc
        return cls(pts, label=label, meta=meta)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "ZeroSequence":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def _duplicate_pairs(pts: np.ndarray) -> list[tuple[int, int]]:
    if pts.size < 2:
        return []
    diff = np.abs(pts[:, None] - pts[None, :])
    iu = np.triu_indices(pts.size, k=1)
    hits = np.flatnonzero(diff[iu] == 0.0)
    return [(int(iu[0][h]), int(iu[1][h])) for h in hits]


@dataclass(frozen=True)
class SharpnessParams:
    """Parameters for the clustered-block family used in sharpness runs.

    Block n sits at distance 3^-n from the boundary and carries
    m_n = floor((n log 3)^eta1) points spread over a window of width
    eps_n = exp(-(n log 3)^(1+eta2)).
    """

    eta1: float
    eta2: float
    n_max: int

    def __post_init__(self):
        if not (self.eta1 > 0.0 and self.eta2 > 0.0):
            raise ValueError("eta1 and eta2 must be positive")
        if not (1 <= self.n_max <= 30):
            raise ValueError("n_max must lie in 1..30")

    def block_count(self, n: int) -> int:
        return int(math.floor((n * LN3) ** self.eta1))

    def block_width(self, n: int) -> float:
        return math.exp(-((n * LN3) ** (1.0 + self.eta2)))


def generate_sharpness(params: SharpnessParams) -> ZeroSequence:
    """Clustered blocks z_{n,k} = 1 - 3^-n + k*eps_n/m_n, k = 0..m_n-1.

    Blocks with m_n = 0 are skipped and recorded in metadata (with the
    natural log in the defining formula this cannot occur for n >= 1, but
    the guard keeps degenerate parameter choices from silently producing a
    wrong sequence).
    """
    pts: list[float] = []
    blocks = []
    skipped = []
    for n in range(1, params.n_max + 1):
        m = params.block_count(n)
        if m == 0:
            skipped.append(n)
            continue
        eps = params.block_width(n)
        base = 1.0 - 3.0 ** (-n)
        # Deep blocks request widths below the binary64 grid near base; widen
        # to keep the m points distinct (>= 64 ulp between neighbours).
        floor_width = m * 64.0 * float(np.spacing(base))
        if floor_width > eps and floor_width > 0.25 * 3.0 ** (-n):
            raise ValueError(
                f"block {n} cannot hold {m} distinct binary64 points "
                f"within a quarter of its boundary gap"
            )
        eps_eff = max(eps, floor_width)
        zs = [base + k * eps_eff / m for k in range(m)]
        pts.extend(zs)
        blocks.append(
            {
                "n": n,
                "m": m,
                "eps": eps,
                "eps_eff": eps_eff,
                "base": base,
                "clamped": eps_eff > eps,
            }
        )
    seq = ZeroSequence(
        [complex(p) for p in pts],
        label=f"sharpness(eta1={params.eta1:g},eta2={params.eta2:g},n_max={params.n_max})",
        meta={
            "generator": "sharpness",
            "eta1": params.eta1,
            "eta2": params.eta2,
            "n_max": params.n_max,
            "blocks": blocks,
            "skipped_blocks": skipped,
        },
    )
    return seq


def generate_radial_geometric(ratio: float, count: int) -> ZeroSequence:
    """Radial points z_k = 1 - ratio^k, k = 1..count.

    Consecutive points have pseudohyperbolic distance
    (1-ratio)/(1+ratio-ratio^(k+1)) -> (1-ratio)/(1+ratio), so the family
    is uniformly separated at every count.
    """
    if not (0.0 < ratio < 1.0):
        raise ValueError("ratio must lie in (0, 1)")
    if count < 1:
        raise ValueError("count must be positive")
    vals = 1.0 - ratio ** np.arange(1, count + 1, dtype=float)
    if np.any(vals >= 1.0) or np.any(np.diff(vals) <= 0.0):
        raise ValueError(
            f"ratio^k underflows binary64 before k = {count}; "
            "reduce count or move ratio toward 1")
    return ZeroSequence(
        vals.astype(complex),
        label=f"geometric(ratio={ratio:g},count={count})",
        meta={"generator": "geometric", "ratio": ratio, "count": count},
    )


def generate_rho_lattice(rho: Callable[[np.ndarray], np.ndarray], spacing: float,
                         r_max: float, label: str = "rho-lattice") -> ZeroSequence:
    """Polar lattice with local mesh proportional to a radius function rho.

    Rings are placed at r_{j+1} = r_j + spacing * rho(r_j) starting from a
    single point at the origin; ring j holds points spaced roughly
    spacing * rho(r_j) along the circle.  Stops at r_max; raises if the
    radial step underflows first.
    """
    if spacing <= 0.0:
        raise ValueError("spacing must be positive")
    if not (0.0 < r_max < 1.0):
        raise ValueError("r_max must lie in (0, 1)")
    pts: list[complex] = [0j]
    rings = [{"r": 0.0, "count": 1}]
    r = 0.0
    while True:
        step = spacing * float(np.asarray(rho(np.asarray([r])))[0])
        if not (step > 0.0 and np.isfinite(step)):
            raise ValueError(f"rho produced a nonpositive step at r = {r:g}")
        r_next = r + step
        if r_next == r:
            raise ValueError(
                f"radial step underflowed at r = {r:.17g} before reaching r_max")
        if r_next > r_max:
            break
        # angular mesh follows rho at the ring's own radius
        step_ang = spacing * float(np.asarray(rho(np.asarray([r_next])))[0])
        n_ang = max(1, int(math.floor(2.0 * math.pi * r_next / step_ang)))
        # stagger rings so neighbours are not radially aligned
        offset = 2.0 * math.pi * ((len(rings) * 0.381966) % 1.0)
        angles = offset + 2.0 * math.pi * np.arange(n_ang) / n_ang
        pts.extend(r_next * np.exp(1j * angles))
        rings.append({"r": r_next, "count": n_ang})
        r = r_next
    seq = ZeroSequence(pts, label=label,
                       meta={"generator": "rho-lattice", "spacing": spacing,
                             "r_max": r_max, "rings": rings})
    if len(seq) >= 2:
        seq.meta["rho_separation"] = rho_separation(seq, rho)
    return seq


# ---------------------------------------------------------------------------
# counting functions


def count_near(seq: ZeroSequence, center: complex, t: float) -> int:
    """Number of sequence points with |z_k - center| <= t (closed ball)."""
    if t < 0.0:
        raise ValueError("radius must be nonnegative")
    return int(np.count_nonzero(np.abs(seq.points - center) <= t))


def log_integrated_count(seq: ZeroSequence, center: complex, r: float) -> float:
    """Integral of (count_near(t) - 1)+ / t over 0 < t <= r.

    Equals sum_{j >= 2, d_j <= r} log(r / d_j) over the sorted distances
    d_1 <= d_2 <= ... from center to the sequence; the closest point is
    exempt, so the integrand vanishes near t = 0 and the integral is finite.
    """
    if r <= 0.0:
        raise ValueError("radius must be positive")
    d = np.sort(np.abs(seq.points - center))
    d = d[1:]  # drop the closest point
    d = d[d <= r]
    if d.size == 0:
        return 0.0
    if d[0] == 0.0:
        raise ValueError("two sequence points coincide with the center")
    return float(np.sum(np.log(r / d)))


# ---------------------------------------------------------------------------
# separation


def _pairwise_pseudo(seq: ZeroSequence) -> np.ndarray:
    """Condensed upper-triangle pseudohyperbolic distances."""
    z = seq.points
    num = np.abs(z[:, None] - z[None, :])
    den = np.abs(one_minus_conj_mul(z[:, None], z[None, :]))
    iu = np.triu_indices(len(seq), k=1)
    return num[iu] / den[iu]


def separation_constant(seq: ZeroSequence) -> float:
    """Smallest pairwise pseudohyperbolic distance."""
    if len(seq) < 2:
        raise ValueError("separation needs at least two points")
    return float(np.min(_pairwise_pseudo(seq)))


def uniform_separation_constant(seq: ZeroSequence) -> float:
    """inf_j prod_{n != j} sigma(z_n, z_j), evaluated in log space."""
    if len(seq) < 2:
        raise ValueError("uniform separation needs at least two points")
    z = seq.points
    num = np.abs(z[:, None] - z[None, :])
    den = np.abs(one_minus_conj_mul(z[:, None], z[None, :]))
    with np.errstate(divide="ignore"):
        logs = np.log(num / den)
    np.fill_diagonal(logs, 0.0)
    return float(np.exp(np.min(np.sum(logs, axis=1))))


# ---------------------------------------------------------------------------
# densities


def _boundary_grid(n_radii: int, n_angles: int, gap_hi: float = 0.5,
                   gap_lo: float = 0.005) -> np.ndarray:
    """Polar probe grid accumulating geometrically toward |z| = 1."""
    gaps = np.geomspace(gap_hi, gap_lo, n_radii)
    radii = 1.0 - gaps
    th = 2.0 * np.pi * np.arange(n_angles) / n_angles
    return (radii[:, None] * np.exp(1j * th[None, :])).ravel()


def uniform_density_estimate(seq: ZeroSequence, r_ladder,
                             n_radii: int = 32, n_angles: int = 64):
    """Finite-r lower estimates of the uniform (Seip-type) density.

    For each r in the ladder returns
    sup_z sum_{1/2 < sigma(z, z_j) < r} log(1/sigma) / log(1/(1-r)),
    the sup running over the sequence itself plus a boundary-accumulating
    polar grid.  Values at moderate r understate the r -> 1 limit; the
    ladder is reported as-is rather than extrapolated.
    """
    r_ladder = list(r_ladder)
    if not r_ladder:
        raise ValueError("density ladder is empty")
    for r in r_ladder:
        if not (0.5 < r < 1.0):
            raise ValueError("density ladder radii must lie in (1/2, 1)")
    centers = np.concatenate([seq.points, _boundary_grid(n_radii, n_angles)])
    z = seq.points
    num = np.abs(centers[:, None] - z[None, :])
    den = np.abs(one_minus_conj_mul(centers[:, None], z[None, :]))
    sig = num / den
    out = []
    with np.errstate(divide="ignore"):
        neglog = -np.log(sig)
    for r in r_ladder:
        mask = (sig > 0.5) & (sig < r)
        sums = np.sum(np.where(mask, neglog, 0.0), axis=1)
        out.append((float(r), float(np.max(sums) / math.log(1.0 / (1.0 - r)))))
    return out


def rho_density_estimate(seq: ZeroSequence, rho, R_ladder,
                         n_radii: int = 16, n_angles: int = 32):
    """Counting density card(Z cap U(z, R*rho(|z|))) / R^2 along an R ladder.

    The sup runs over sequence points and a polar grid reaching the largest
    sequence modulus.  A finite sequence undercounts any disc that spills
    past its truncation radius, which turns the sup into a pure N/R^2
    saturation artifact once R*rho exceeds the headroom; centers are
    therefore restricted, per R, to those whose counting disc stays inside
    the sampled support.  When no center qualifies the unrestricted sup is
    reported (the caller sees the saturation regime explicitly).
    """
    if len(seq) == 0:
        raise ValueError("empty sequence has no density")
    top = float(np.max(seq.moduli()))
    grid = _boundary_grid(n_radii, n_angles, gap_hi=0.5,
                          gap_lo=max(1e-3, 1.0 - top))
    centers = np.concatenate([seq.points, grid])
    rad = np.asarray(rho(np.abs(centers)), dtype=float)
    dist = np.abs(centers[:, None] - seq.points[None, :])
    out = []
    for R in R_ladder:
        if R <= 0.0:
            raise ValueError("R ladder must be positive")
        counts = np.count_nonzero(dist <= R * rad[:, None], axis=1)
        contained = np.abs(centers) + R * rad <= top
        pool = counts[contained] if np.any(contained) else counts
        out.append((float(R), float(np.max(pool) / R ** 2)))
    return out


def rho_separation(seq: ZeroSequence, rho) -> float:
    """inf over pairs of |z_k - z_n| / min(rho(|z_k|), rho(|z_n|))."""
    if len(seq) < 2:
        raise ValueError("separation needs at least two points")
    z = seq.points
    rad = np.asarray(rho(np.abs(z)), dtype=float)
    if np.any(rad <= 0.0):
        raise ValueError("rho must be positive on the sequence moduli")
    dist = np.abs(z[:, None] - z[None, :])
    floor = np.minimum(rad[:, None], rad[None, :])
    iu = np.triu_indices(len(seq), k=1)
    return float(np.min(dist[iu] / floor[iu]))


# ---------------------------------------------------------------------------
# convergence-exponent material


class BlaschkeSum(NamedTuple):
    value: float
    tail: float | None


def blaschke_sum(seq: ZeroSequence, s: int) -> BlaschkeSum:
    """sum_k (1 - |z_k|)^(s+1), plus a generator tail estimate if available.

    The tail field bounds the mass the generator would add beyond the stored
    truncation (None when no closed form is attached).
    """
    if s < 0:
        raise ValueError("genus must be nonnegative")
    value = float(np.sum(seq.gaps() ** (s + 1)))
    tail = None
    g = seq.meta.get("generator")
    if g == "geometric":
        q = float(seq.meta["ratio"]) ** (s + 1)
        n = int(seq.meta["count"])
        tail = q ** (n + 1) / (1.0 - q)
    elif g == "sharpness":
        eta1 = float(seq.meta["eta1"])
        n0 = int(seq.meta["n_max"])
        # m_n <= (n log 3)^eta1 and 1 - z_{n,k} <= 3^-n
        tail = 0.0
        for n in range(n0 + 1, n0 + 200):
            tail += (n * LN3) ** eta1 * 3.0 ** (-n * (s + 1))
    return BlaschkeSum(value, tail)


# ---------------------------------------------------------------------------
# hypothesis constants


@dataclass
class ConditionReport:
    """Empirical constants tying local counting to a growth scale.

    c_hat_n bounds count_near at radius (1-|z_k|)/2 against psi(1/(1-|z_k|));
    c_hat_N does the same for the integrated count against psi_tilde.
    Per-point tables are kept for CSV emission.
    """

    c_hat_n: float
    c_hat_N: float
    table: list = field(default_factory=list)

    def finite(self) -> bool:
        return math.isfinite(self.c_hat_n) and math.isfinite(self.c_hat_N)


def condition_report(seq: ZeroSequence, scale) -> ConditionReport:
    if len(seq) == 0:
        raise ValueError("empty sequence has no condition constants")
    gaps = seq.gaps()
    xs = 1.0 / gaps
    psi = np.asarray(scale.psi(xs), dtype=float)
    psit = np.asarray(scale.psi_tilde(xs), dtype=float)
    rows = []
    worst_n = 0.0
    worst_N = 0.0
    for k, z in enumerate(seq.points):
        r = 0.5 * gaps[k]
        nk = count_near(seq, z, r)
        Nk = log_integrated_count(seq, z, r)
        ratio_n = nk / psi[k] if psi[k] > 0.0 else (math.inf if nk > 0 else 0.0)
        ratio_N = Nk / psit[k] if psit[k] > 0.0 else (math.inf if Nk > 0 else 0.0)
        worst_n = max(worst_n, ratio_n)
        worst_N = max(worst_N, ratio_N)
        rows.append({"k": k, "z": complex(z), "radius": float(r),
                     "count": int(nk), "integrated": float(Nk),
                     "ratio_n": float(ratio_n), "ratio_N": float(ratio_N)})
    return ConditionReport(float(worst_n), float(worst_N), rows)
