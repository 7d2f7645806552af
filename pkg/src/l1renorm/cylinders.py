"""Digit-constraint dyadic sets and certified integrals against singular weights.

A set cut out by fixing finitely many binary digits of x (a cylinder) is
a union of level-n dyadic cells for n = the finest constrained digit.
The weighted splitting construction needs such sets at resolutions far
beyond explicit cell enumeration: a weight with mass decaying like
1/log(1/x) near 0 balances a last-digit split only at levels in the
hundreds to tens of thousands.  Cylinders stay O(k) to store, and their
weight integrals reduce to signed cell sums that converge like 1/j^2
away from the origin, so truncating after `head_cells` cells leaves a
certified tail bound.

All cell arithmetic runs in log coordinates (u = log x), so resolutions
beyond the float underflow threshold (level > 1074) remain exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LN2 = math.log(2.0)

__all__ = [
    "BitConstraints",
    "SplitLevelCapError",
    "WalshCache",
    "split_error_bound",
    "find_min_split_level",
    "band_fractions",
    "BandCutTable",
]


class SplitLevelCapError(RuntimeError):
    """The certified split level exceeds the configured resolution cap."""


@dataclass(frozen=True)
class BitConstraints:
    """Constraints digit(x, b_i) = s_i on binary digits of x in [0, 1).

    digit b counts from 1 at scale 2^-1; bits are strictly increasing.
    The empty constraint list is the whole interval.
    """

    bits: tuple[int, ...] = ()
    signs: tuple[int, ...] = ()

    def __post_init__(self):
        if len(self.bits) != len(self.signs):
            raise ValueError("bits and signs must have equal length")
        if any(b2 <= b1 for b1, b2 in zip(self.bits, self.bits[1:])):
            raise ValueError("bits must be strictly increasing")
        if any(s not in (0, 1) for s in self.signs):
            raise ValueError("signs must be 0 or 1")

    @property
    def depth(self) -> int:
        return len(self.bits)

    @property
    def resolution(self) -> int:
        """Finest constrained digit (0 for the whole interval)."""
        return self.bits[-1] if self.bits else 0

    @property
    def measure(self) -> float:
        return 2.0 ** -self.depth

    @property
    def contains_origin(self) -> bool:
        """Whether the set contains an interval (0, 2^-resolution)."""
        return all(s == 0 for s in self.signs)

    @property
    def log_min_point(self) -> float:
        """log of the smallest positive element (-inf if origin included)."""
        ones = [b for b, s in zip(self.bits, self.signs) if s == 1]
        if not ones:
            return -math.inf
        b0 = min(ones)
        extra = sum(2.0 ** (b0 - b) for b in ones if b != b0)
        return -b0 * LN2 + math.log1p(extra)

    def child(self, bit: int, sign: int) -> "BitConstraints":
        if bit <= self.resolution:
            raise ValueError("child digit must be finer than the resolution")
        return BitConstraints(self.bits + (bit,), self.signs + (sign,))

    def cell_indices(self, level: int, limit: int = 1 << 22) -> np.ndarray:
        """Explicit level-`level` cell indices (small levels only)."""
        if level < self.resolution:
            raise ValueError("level below the set's resolution")
        count = 2 ** (level - self.depth)
        if count > limit:
            raise ValueError("explicit enumeration too large")
        j = np.arange(2 ** level, dtype=np.int64)
        keep = np.ones(j.shape, dtype=bool)
        for b, s in zip(self.bits, self.signs):
            keep &= ((j >> (level - b)) & 1) == s
        return j[keep]


# ---------------------------------------------------------------------------
# Truncated signed cell sums


def _cell_sign(j: np.ndarray, level: int, bits: tuple[int, ...]) -> np.ndarray:
    """Sign of prod r_b over level-`level` cells j (r_b flips digit b)."""
    sign = np.ones(j.shape, dtype=float)
    for b in bits:
        p = level - b
        if p >= 62:
            continue    # head cells have zero digits at such coarse scales
        sign *= 1.0 - 2.0 * ((j >> p) & 1)
    return sign


def _tail_variation_bound(weight, level: int, head_cells: int) -> float:
    """Bound on |sum_{j >= J} +-dU_j| when signs alternate at the finest scale.

    Adjacent-cell pairing telescopes into h * TV(f) over [J 2^-level, 1]:
    the decreasing branch contributes h*(f(Jh) - fmin), the increasing
    one h*(f(1) - fmin).
    """
    fmin = weight.min_value
    log_h = -level * LN2
    log_jh = math.log(head_cells) + log_h
    # h * f(Jh) = (Jh * f(Jh)) / J
    dec = float(weight.x_times_value_log(log_jh)) / head_cells
    inc = math.exp(log_h) * (weight.right_value - fmin) if log_h > -745 else 0.0
    return 2.0 * (dec + inc)


class WalshCache:
    """Signed-sum coefficients int f * prod r_b for one weight.

    `coefficient(bits)` returns (value, certified absolute error); the
    empty product is the total mass with zero error.
    """

    def __init__(self, weight, head_cells: int = 1 << 20):
        if head_cells % 2:
            raise ValueError("head_cells must be even")
        if weight.mass_between_log_delta is None or weight.x_times_value_log is None:
            raise ValueError("weight lacks the log-scale hooks needed here")
        self.weight = weight
        self.head_cells = int(head_cells)
        self._cache: dict[tuple[int, ...], tuple[float, float]] = {}

    def coefficient(self, bits: tuple[int, ...]) -> tuple[float, float]:
        bits = tuple(sorted(bits))
        if not bits:
            return self.weight.total_mass, 0.0
        hit = self._cache.get(bits)
        if hit is not None:
            return hit
        level = bits[-1]
        exact = level <= 40 and 2 ** level <= self.head_cells
        count = 2 ** level if exact else self.head_cells
        j = np.arange(1, count)
        log_lo = np.log(j) - level * LN2
        dlog = np.log1p(1.0 / j)
        du = self.weight.mass_between_log_delta(log_lo, dlog)
        signs = _cell_sign(j, level, bits)
        value = float(du @ signs)
        value += float(self.weight.mass_below_log(-level * LN2))  # cell 0, sign +1
        err = 0.0 if exact else _tail_variation_bound(self.weight, level, count)
        err += 1e-15 * (1.0 + math.log2(count))    # float summation cushion
        self._cache[bits] = (value, err)
        return value, err

    def node_integral(self, node: BitConstraints) -> tuple[float, float]:
        """(integral of f over the cylinder, certified absolute error)."""
        k = node.depth
        total = 0.0
        err = 0.0
        for mask in range(2 ** k):
            sub = tuple(node.bits[i] for i in range(k) if (mask >> i) & 1)
            sigma = 1.0
            for i in range(k):
                if (mask >> i) & 1 and node.signs[i] == 1:
                    sigma = -sigma
            w, e = self.coefficient(sub)
            total += sigma * w
            err += e
        scale = 2.0 ** -k
        return scale * total, scale * err


# ---------------------------------------------------------------------------
# Certified split-level search


def split_error_bound(weight, node: BitConstraints, level: int) -> float:
    """Certified upper bound of int_node |f - E_level f|.

    Head cell (origin nodes only): int |f - avg| <= 2 int_cell f.
    All other cells: (h/2) * oscillation, telescoping to (h/2) * TV(f)
    over the node's span.
    """
    if level < node.resolution:
        raise ValueError("level below the node's resolution")
    log_h = -level * LN2
    fmin = weight.min_value
    bound = 0.0
    if node.contains_origin:
        bound += 2.0 * float(weight.mass_below_log(log_h))
        # (h/2) f(h) = (x f(x))/2 at x = h
        bound += 0.5 * float(weight.x_times_value_log(log_h))
    else:
        lmp = node.log_min_point
        expo = log_h - lmp
        if expo > -745.0:
            bound += 0.5 * math.exp(expo) * float(weight.x_times_value_log(lmp))
    if log_h > -745.0:
        bound += 0.5 * math.exp(log_h) * (weight.right_value - fmin)
    return bound


def find_min_split_level(weight, node: BitConstraints, delta_abs: float,
                         lo: int, cap: int) -> int:
    """Smallest level kappa in [lo, cap] with split_error_bound < delta_abs.

    The bound is nonincreasing in the level, so binary search applies.
    """
    if delta_abs <= 0.0:
        raise ValueError("delta_abs must be positive")
    lo = max(lo, node.resolution)
    if split_error_bound(weight, node, lo) < delta_abs:
        return lo
    if split_error_bound(weight, node, cap) >= delta_abs:
        raise SplitLevelCapError(
            f"no level <= {cap} meets the approximation target {delta_abs:.3e}")
    a, b = lo, cap        # bound(a) >= delta, bound(b) < delta
    while b - a > 1:
        mid = (a + b) // 2
        if split_error_bound(weight, node, mid) < delta_abs:
            b = mid
        else:
            a = mid
    return b


# ---------------------------------------------------------------------------
# Band decomposition for cut integrals over cylinder partitions

# The 2^K nodes of a constraint tree on digits n_1 < ... < n_K partition
# [0,1).  Between consecutive constraint scales the digits finer than the
# band vary fast and spread every eligible node uniformly, so integrals
# over {x < cut} within a node reduce to clipped antiderivative
# differences per band plus a certified misassignment bound.


def band_fractions(prefix_zeros: np.ndarray, depth: int) -> np.ndarray:
    """fractions[j, s]: share of band j owned by node s.

    Band K is (0, 2^-n_K) (all-zero node only); band j in K-1..1 is
    [2^-n_{j+1}, 2^-n_j) shared by nodes whose first j signs are zero;
    band 0 is [2^-n_1, 1) shared by all nodes.
    """
    n_nodes = prefix_zeros.shape[0]
    frac = np.zeros((depth + 1, n_nodes))
    frac[0, :] = 2.0 ** -depth
    for j in range(1, depth):
        frac[j, prefix_zeros >= j] = 2.0 ** -(depth - j)
    frac[depth, prefix_zeros >= depth] = 1.0
    return frac


@dataclass
class BandCutTable:
    """Precomputed band data for one (weight, indices) pair.

    Nodes are indexed s = 0..2^K-1 with bit i-1 of s the sign at digit
    n_i (bit 0 <-> n_1).  `mass_cut`/`length_cut` return, per node, the
    weight mass and Lebesgue measure of {x < cut} inside the node, up to
    a misassignment error bounded by `wobble` (mass) per unit node
    weight; measure errors are below 2^{1-n_1}.
    """

    weight: object
    indices: tuple[int, ...]

    def __post_init__(self):
        w = self.weight
        K = len(self.indices)
        self.depth = K
        n_nodes = 2 ** K
        sbits = np.arange(n_nodes, dtype=np.int64)
        pz = np.zeros(n_nodes, dtype=np.int64)
        for i, _ in enumerate(self.indices):
            still = pz == i
            zero_here = ((sbits >> i) & 1) == 0
            pz[still & zero_here] = i + 1
        self.prefix_zeros = pz
        self.fractions = band_fractions(pz, K)              # (K+1, nodes)
        # band j in 0..K has lower edge 2^-n_{j+1} (2^-n_1 for j=0 ... 0 for j=K)
        louts = []
        for j in range(K + 1):
            if j == K:
                louts.append(-math.inf)
            else:
                louts.append(-self.indices[j] * LN2)        # log of 2^-n_{j+1}
        self.log_lo_edges = louts
        # cumulative weight mass below each band's lower edge
        self.mass_lo = np.array([
            0.0 if le == -math.inf else float(w.mass_below_log(le))
            for le in louts])
        hi = [0.0] + louts[:-1]                             # log upper edges
        self.mass_hi = np.array([
            float(w.mass_below_log(le)) if le != 0.0 else w.total_mass
            for le in hi])
        self.len_lo = np.array([0.0 if le == -math.inf else math.exp(le)
                                if le > -745 else 0.0 for le in louts])
        self.len_hi = np.array([math.exp(le) if -745 < le < 0 else
                                (1.0 if le == 0.0 else 0.0) for le in hi])
        # misassignment bound per node per cut, per unit |coefficient|
        wob = 0.0
        for j, n in enumerate(self.indices, start=1):
            block = float(w.mass_between_log_delta(np.array([-n * LN2]),
                                                   np.array([LN2]))[0])
            wob += 2.0 ** (j - K) * block
        self.wobble = 2.0 * wob

    def mass_cut(self, cut_mass_at_x: np.ndarray) -> np.ndarray:
        """Weight mass of {x < cut} per node.

        `cut_mass_at_x` is antiderivative(cut) broadcast over (..., nodes).
        """
        out = np.zeros(np.broadcast_shapes(cut_mass_at_x.shape,
                                           (self.fractions.shape[1],)))
        for j in range(self.depth + 1):
            part = np.clip(cut_mass_at_x - self.mass_lo[j], 0.0,
                           self.mass_hi[j] - self.mass_lo[j])
            out = out + self.fractions[j] * part
        return out

    def length_cut(self, cut_x: np.ndarray) -> np.ndarray:
        """Lebesgue measure of {x < cut} per node."""
        out = np.zeros(np.broadcast_shapes(cut_x.shape,
                                           (self.fractions.shape[1],)))
        for j in range(self.depth + 1):
            part = np.clip(cut_x - self.len_lo[j], 0.0,
                           self.len_hi[j] - self.len_lo[j])
            out = out + self.fractions[j] * part
        return out
