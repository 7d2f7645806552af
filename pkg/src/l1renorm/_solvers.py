"""Shared numeric helpers: deterministic seeding, bisection, golden section."""

from __future__ import annotations

import hashlib
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np


def stable_seed(base_seed: int, *tags) -> np.random.SeedSequence:
    """Child seed stream derived from a base seed and hashable tags.

    The split is content-hashed, so the same (seed, tags) pair yields the
    same stream in any process.
    """
    digest = hashlib.blake2b(repr(tags).encode("utf-8"), digest_size=8).digest()
    word = int.from_bytes(digest, "big")
    return np.random.SeedSequence([int(base_seed) & 0xFFFFFFFFFFFFFFFF, word])


def worker_count() -> int:
    """Worker cap from RENORM_THREADS (default 1)."""
    raw = os.environ.get("RENORM_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        n = 1
    return max(1, n)


def chunk_spans(n_items: int, chunk: int) -> list[tuple[int, int]]:
    return [(s, min(s + chunk, n_items)) for s in range(0, n_items, chunk)]


def chunked_reduce(fn: Callable, n_items: int, chunk: int, reduce_fn: Callable):
    """Apply fn(start, stop) over fixed chunks and fold left-to-right.

    Chunk boundaries depend only on (n_items, chunk); the fold order is
    fixed, so results do not depend on the worker count.
    """
    spans = chunk_spans(n_items, chunk)
    workers = worker_count()
    if workers == 1 or len(spans) == 1:
        parts = [fn(s, e) for s, e in spans]
    else:
        with ThreadPoolExecutor(max_workers=min(workers, len(spans))) as pool:
            parts = list(pool.map(lambda se: fn(se[0], se[1]), spans))
    out = parts[0]
    for p in parts[1:]:
        out = reduce_fn(out, p)
    return out


def bisect_scalar(fn: Callable[[float], float], lo: float, hi: float, *,
                  target: float = 0.0, tol: float = 1e-13,
                  max_iter: int = 200) -> float:
    """Bisection for a continuous scalar function crossing `target` once.

    Stops when |fn(mid) - target| <= tol or the bracket shrinks to
    relative machine width.
    """
    flo = fn(lo) - target
    fhi = fn(hi) - target
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise ValueError("bisection bracket does not straddle the target")
    mid = 0.5 * (lo + hi)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = fn(mid) - target
        if abs(fm) <= tol or (hi - lo) <= 4e-16 * max(abs(lo), abs(hi)):
            return mid
        if (fm > 0.0) == (flo > 0.0):
            lo, flo = mid, fm
        else:
            hi = mid
    return mid


def bisect_batch(fn: Callable[[np.ndarray], np.ndarray], lo, hi, *,
                 target: float = 0.0, tol: float = 1e-12,
                 max_iter: int = 200) -> np.ndarray:
    """Componentwise bisection of a vectorized function.

    Every component of fn(lo) - target and fn(hi) - target must have
    opposite (or zero) signs; components may be increasing or decreasing.
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    flo = fn(lo) - target
    fhi = fn(hi) - target
    bad = flo * fhi > 0.0
    if np.any(bad):
        raise ValueError("bisection bracket does not straddle the target")
    mid = 0.5 * (lo + hi)
    active = np.ones(lo.shape, dtype=bool)
    for _ in range(max_iter):
        mid = np.where(active, 0.5 * (lo + hi), mid)
        fm = fn(mid) - target
        active &= np.abs(fm) > tol
        active &= (hi - lo) > 4e-16 * np.maximum(np.abs(lo), np.abs(hi))
        if not np.any(active):
            break
        same = (fm > 0.0) == (flo > 0.0)
        move_lo = active & same
        move_hi = active & ~same
        lo = np.where(move_lo, mid, lo)
        flo = np.where(move_lo, fm, flo)
        hi = np.where(move_hi, mid, hi)
    return mid


_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


def golden_section(fn: Callable[[float], float], lo: float, hi: float,
                   iters: int = 32) -> tuple[float, float]:
    """Golden-section minimum of a scalar function on [lo, hi]."""
    a, b = float(lo), float(hi)
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = fn(d)
    return (c, fc) if fc <= fd else (d, fd)
