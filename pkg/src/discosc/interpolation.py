"""Node-interpolation series built on a canonical product.

Given nodes z_n, target values b_n, and per-node damping exponents s_n, the
series is

    f(z) = sum_n  b_n / (z - z_n) * P(z) / P'(z_n) * w_n(z)^(s_n - 1),

with w_n(z) = (1 - |z_n|^2)/(1 - conj(z_n) z).  Each term vanishes at every
node except its own, where it equals b_n, so f interpolates the targets.
The exponents are chosen so the tail is summable and the growth of log|f|
stays a bounded multiple of the integrated growth scale.

All term arithmetic happens on logs: a term's log is

    log b_n - log P'(z_n) - log(z - z_n) + (s_n - 1) log w_n(z)

plus the shared log P(z), and the sum over n is exponentiated under a
per-point scale so no intermediate product can overflow or underflow.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .numutil import golden_section_max, one_minus_conj_mul
from .products import CanonicalProduct
from .scales import GrowthScale
from .sequences import ZeroSequence

__all__ = [
    "TargetData",
    "InterpolationSeries",
    "GrowthRow",
    "choose_exponents",
    "target_bound_constant",
]

_CHUNK = 1024


def target_bound_constant(zeros: ZeroSequence, values, scale: GrowthScale) -> float:
    """sup_k log(1 + |b_k|) / max(psi_tilde(1/(1 - |z_k|)), 1).

    Clamping the denominator at 1 keeps shallow nodes (where the integrated
    scale is still below 1) from blowing the constant up; for the deep nodes
    that drive exponent growth the clamp is inactive.
    """
    vals = np.asarray(values, dtype=complex)
    if vals.shape != zeros.points.shape:
        raise ValueError("one target value per node is required")
    if not np.all(np.isfinite(vals)):
        raise ValueError("target values must be finite")
    x = 1.0 / zeros.gaps()
    denom = np.maximum(np.asarray([scale.psi_tilde(v) for v in x]), 1.0)
    return float(np.max(np.log1p(np.abs(vals)) / denom)) if vals.size else 0.0


class TargetData:
    """Target values pinned to a zero sequence, plus their growth budget."""

    def __init__(self, zeros: ZeroSequence, values, scale: GrowthScale):
        self.zeros = zeros
        self.values = np.asarray(values, dtype=complex)
        self.scale = scale
        self.bound_constant = target_bound_constant(zeros, self.values, scale)

    def __len__(self) -> int:
        return self.values.size


def choose_exponents(product: CanonicalProduct, targets: TargetData,
                     margin: float = 10.0,
                     balance_constant: float | None = None) -> np.ndarray:
    """Per-node damping exponents.

    s_n = s + ceil((margin + C * psi_tilde(1/(1-|z_n|)) + 2 log(n+1)) / log 2)

    with n counted from 1 in modulus order and C the sum of the target
    bound constant and the deleted-product balance constant.  The first
    piece of C absorbs log|b_n|, the second absorbs log(1/|P'(z_n)|) up to
    the bounded convergence sum, and the 2 log(n+1) gives a summable tail.
    Exponents are nondecreasing because the gaps are sorted.
    """
    if margin <= 0.0:
        raise ValueError("margin must be positive")
    if balance_constant is None:
        balance_constant = product.balance_constant(0.5)
    c_hat = targets.bound_constant + balance_constant
    gaps = product.zeros.gaps()
    n_idx = np.arange(1, gaps.size + 1, dtype=float)
    tilde = np.asarray([targets.scale.psi_tilde(1.0 / g) for g in gaps])
    raw = (margin + c_hat * tilde + 2.0 * np.log(n_idx + 1.0)) / math.log(2.0)
    s_n = product.genus + np.ceil(raw).astype(int)
    return s_n


class GrowthRow(NamedTuple):
    r: float
    log_max: float
    growth_integral: float
    ratio: float


class InterpolationSeries:
    """Evaluable interpolation series; construct through build()."""

    def __init__(self, product: CanonicalProduct, targets: TargetData,
                 exponents):
        if targets.zeros is not product.zeros and \
                not np.array_equal(targets.zeros.points, product.zeros.points):
            raise ValueError("targets are pinned to a different zero sequence")
        exps = np.asarray(exponents)
        if exps.shape != product.z.shape:
            raise ValueError("one exponent per node is required")
        if not np.issubdtype(exps.dtype, np.integer):
            raise ValueError("exponents must be integers")
        if np.any(exps < 1):
            raise ValueError("exponents must be at least 1")
        if np.any(np.diff(exps) < 0):
            raise ValueError("exponents must be nondecreasing in modulus order")
        self.product = product
        self.targets = targets
        self.exponents = exps.astype(int)
        with np.errstate(divide="ignore"):
            self._log_b = np.log(targets.values.astype(complex))
        self._log_dp = np.asarray(
            [product.log_derivative_at_zero(k) for k in range(product.z.size)],
            dtype=complex)
        if not np.all(np.isfinite(self._log_dp)):
            raise ValueError("product derivative vanishes at a node; the "
                             "series is undefined")

    @classmethod
    def build(cls, product: CanonicalProduct, targets: TargetData,
              margin: float = 10.0, exponents=None,
              balance_constant: float | None = None) -> "InterpolationSeries":
        if exponents is None:
            exponents = choose_exponents(product, targets, margin,
                                         balance_constant)
        return cls(product, targets, exponents)

    # -- evaluation --------------------------------------------------------

    def _log_parts(self, pts: np.ndarray):
        """(log P, per-point scaled term sum, log scale) for generic points."""
        prod = self.product
        z = prod.z
        log_p = prod._raw_log_eval(pts)
        smax = np.full(pts.shape, -math.inf)
        total = np.zeros(pts.shape, dtype=complex)
        if z.size == 0:
            return log_p, total, smax
        for lo in range(0, pts.size, _CHUNK):
            p = pts[lo:lo + _CHUNK, None]
            den = one_minus_conj_mul(z[None, :], p)
            w = prod._gap2[None, :] / den
            with np.errstate(divide="ignore", invalid="ignore"):
                t = (self._log_b[None, :] - self._log_dp[None, :]
                     - np.log(p - z[None, :])
                     + (self.exponents[None, :] - 1) * np.log(w))
            re = np.where(np.isnan(np.real(t)), -math.inf, np.real(t))
            sm = np.max(re, axis=1)
            smax[lo:lo + _CHUNK] = sm
            with np.errstate(invalid="ignore"):
                e = np.exp(t - sm[:, None])
            e = np.where(np.isfinite(t), e, 0.0)
            total[lo:lo + _CHUNK] = np.sum(e, axis=1)
        return log_p, total, smax

    def _near_node_term_logs(self, k: int, pts: np.ndarray):
        """Per-term logs at points inside the exclusion disc of node k.

        Term k switches to the factored removable form: with
        1 - w_k(z) = -conj(z_k)(z - z_k)/(1 - conj(z_k) z),

            E(w_k, s)/(z - z_k)
                = -conj(z_k)/(1 - conj(z_k) z) * exp(sum_{j<=s} w_k^j / j)

        so the 0/0 at the node never forms; the remaining terms keep the
        generic shape, with log P taken from the same stable per-factor
        logs (relative gaps enter exactly, never as a difference of
        near-equal products).  At z = z_k every other term carries
        log P = -inf and drops out, leaving b_k times a ratio of two
        evaluations of the same closed form.
        """
        prod = self.product
        zn = prod.z
        zk = zn[k]
        rows = prod._offset_factor_logs(k, pts - zk)
        log_ek = rows[:, k].copy()
        rows[:, k] = 0.0
        log_bk = np.sum(rows, axis=1)
        den = one_minus_conj_mul(zn[None, :], pts[:, None])
        w = prod._gap2[None, :] / den
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (self._log_b[None, :] - self._log_dp[None, :]
                 - np.log(pts[:, None] - zn[None, :])
                 + (self.exponents[None, :] - 1) * np.log(w)
                 + (log_bk + log_ek)[:, None])
            wk = w[:, k]
            if zk == 0.0:
                fact = np.zeros(pts.shape, dtype=complex)
            else:
                s = prod.genus
                fact = np.log(-np.conj(zk) / den[:, k])
                acc = np.zeros(pts.shape, dtype=complex)
                pw = np.ones(pts.shape, dtype=complex)
                for j in range(1, s + 1):
                    pw = pw * wk
                    acc = acc + pw / j
                fact = fact + acc
            t[:, k] = (self._log_b[k] - self._log_dp[k] + log_bk + fact
                       + (self.exponents[k] - 1) * np.log(wk))
        return t

    def _near_node_reduce(self, k: int, pts: np.ndarray):
        """(scaled term sum, log scale) for near-node points."""
        t = self._near_node_term_logs(k, pts)
        re = np.where(np.isnan(np.real(t)), -math.inf, np.real(t))
        sm = np.max(re, axis=1)
        with np.errstate(invalid="ignore"):
            e = np.exp(t - sm[:, None])
        e = np.where(np.isfinite(t), e, 0.0)
        return np.sum(e, axis=1), sm

    def evaluate(self, z):
        """Series values; near-node points (inside an exclusion disc,
        including the nodes themselves) go through the factored removable
        form of their own term."""
        arr = np.atleast_1d(np.asarray(z, dtype=complex))
        if np.any(np.abs(arr) >= 1.0):
            raise ValueError("evaluation point outside the open disc")
        out = np.empty(arr.shape, dtype=complex)
        bad, idx = self.product.in_exclusion(arr)
        rest = ~bad
        with np.errstate(invalid="ignore", over="raise"):
            try:
                if np.any(rest):
                    log_p, total, smax = self._log_parts(arr[rest])
                    vals = np.exp(log_p + smax) * total
                    if not np.all(np.isfinite(vals)):
                        raise ValueError("series evaluation produced a "
                                         "non-finite value")
                    out[rest] = vals
                for k in (np.unique(idx[bad]) if np.any(bad) else ()):
                    sel = bad & (idx == k)
                    total, sm = self._near_node_reduce(int(k), arr[sel])
                    out[sel] = np.exp(sm) * total
            except FloatingPointError:
                raise ValueError("series value overflows binary64; use "
                                 "log_abs_evaluate for growth work")
        return out if np.ndim(z) else complex(out[0])

    def evaluate_derivative(self, z, log_derivative=None):
        """Series derivative via per-term logarithmic differentiation.

        Each term's derivative is the term itself times

            P'/P - 1/(z - z_n) + (s_n - 1) conj(z_n)/(1 - conj(z_n) z),

        summed in the same scaled log space as evaluate().  P'/P may be
        passed in when the caller already holds it; otherwise it is computed
        from the product, which requires the points to sit outside every
        exclusion disc.  Exact nodes are rejected: the removable values
        there are derivative data this class does not carry.
        """
        arr = np.atleast_1d(np.asarray(z, dtype=complex))
        if np.any(np.abs(arr) >= 1.0):
            raise ValueError("evaluation point outside the open disc")
        _, dist = self.product.nearest_node(arr)
        if np.any(dist == 0.0):
            raise ValueError("series derivative at an exact node is not "
                             "provided")
        prod = self.product
        zn = prod.z
        if zn.size == 0:
            out = np.zeros(arr.shape, dtype=complex)
            return out if np.ndim(z) else complex(out[0])
        if log_derivative is None:
            lam, _ = prod.log_derivative_sums(arr)
        else:
            lam = np.atleast_1d(np.asarray(log_derivative, dtype=complex))
        log_p = prod._raw_log_eval(arr)
        out = np.empty(arr.shape, dtype=complex)
        for lo in range(0, arr.size, _CHUNK):
            p = arr[lo:lo + _CHUNK, None]
            den = one_minus_conj_mul(zn[None, :], p)
            w = prod._gap2[None, :] / den
            diff = p - zn[None, :]
            with np.errstate(divide="ignore", invalid="ignore"):
                t = (self._log_b[None, :] - self._log_dp[None, :]
                     - np.log(diff)
                     + (self.exponents[None, :] - 1) * np.log(w))
                factor = (lam[lo:lo + _CHUNK, None] - 1.0 / diff
                          + (self.exponents[None, :] - 1)
                          * (prod._zc[None, :] / den))
            re = np.where(np.isnan(np.real(t)), -math.inf, np.real(t))
            sm = np.max(re, axis=1)
            with np.errstate(invalid="ignore"):
                e = np.exp(t - sm[:, None]) * factor
            e = np.where(np.isfinite(t), e, 0.0)
            tot = np.sum(e, axis=1)
            with np.errstate(invalid="ignore", over="raise"):
                try:
                    out[lo:lo + _CHUNK] = \
                        np.exp(log_p[lo:lo + _CHUNK] + sm) * tot
                except FloatingPointError:
                    raise ValueError("series derivative overflows binary64")
        if not np.all(np.isfinite(out)):
            raise ValueError("series derivative produced a non-finite value")
        return out if np.ndim(z) else complex(out[0])

    def log_abs_evaluate(self, z):
        """log|f(z)| computed without leaving log space (-inf at exact
        zeros of the series)."""
        arr = np.atleast_1d(np.asarray(z, dtype=complex))
        if np.any(np.abs(arr) >= 1.0):
            raise ValueError("evaluation point outside the open disc")
        out = np.empty(arr.shape, dtype=float)
        bad, idx = self.product.in_exclusion(arr)
        rest = ~bad
        if np.any(rest):
            log_p, total, smax = self._log_parts(arr[rest])
            with np.errstate(divide="ignore"):
                out[rest] = np.real(log_p) + smax + np.log(np.abs(total))
        for k in (np.unique(idx[bad]) if np.any(bad) else ()):
            sel = bad & (idx == k)
            total, sm = self._near_node_reduce(int(k), arr[sel])
            with np.errstate(divide="ignore"):
                out[sel] = sm + np.log(np.abs(total))
        return out if np.ndim(z) else float(out[0])

    # -- growth ------------------------------------------------------------

    def growth_table(self, r_ladder, samples: int = 1024) -> list[GrowthRow]:
        """Circle maxima of log|f| against the integrated growth scale.

        Each row is (r, max log|f| on |z| = r, psi_tilde(1/(1-r)), ratio);
        the maximum combines a uniform angular scan with a golden-section
        refinement around the best sample.
        """
        rows = []
        for r in np.asarray(r_ladder, dtype=float):
            if not (0.0 < r < 1.0):
                raise ValueError("ladder radii must lie in (0, 1)")
            theta = 2.0 * np.pi * np.arange(samples) / samples
            vals = self.log_abs_evaluate(r * np.exp(1j * theta))
            j = int(np.argmax(vals))
            lo = theta[j] - 2.0 * np.pi / samples
            hi = theta[j] + 2.0 * np.pi / samples

            def f(t, _r=r):
                return self.log_abs_evaluate(_r * np.exp(1j * t))

            _, best = golden_section_max(f, lo, hi)
            log_max = max(float(vals[j]), float(best))
            tilde = self.targets.scale.psi_tilde(1.0 / (1.0 - r))
            ratio = log_max / tilde if tilde > 0.0 else math.nan
            rows.append(GrowthRow(float(r), log_max, float(tilde), ratio))
        return rows
