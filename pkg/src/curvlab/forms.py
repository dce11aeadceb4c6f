"""Coefficient algebra for (p, q)-forms in a single chart.

A (p, q)-form is stored as a full complex array with p holomorphic index
axes followed by q antiholomorphic ones, antisymmetric within each group,
under the 1/(p! q!) summation convention

    F = (1 / p! q!) sum F[i1..ip, j1..jq] dz^i1 ^ .. ^ dzbar^jq.

Arrays carry arbitrary leading batch axes; only the trailing p + q axes
are form indices.  Degrees stay tiny (p, q <= n <= 3), so wedge products
are assembled by explicit permutation sums.
"""

from __future__ import annotations

from itertools import permutations
from math import factorial

import numpy as np

_LETTERS = "abcdefghijkl"


def _perm_sign(p) -> int:
    sign = 1
    seen = [False] * len(p)
    for i in range(len(p)):
        if seen[i]:
            continue
        j = i
        cyc = 0
        while not seen[j]:
            seen[j] = True
            j = p[j]
            cyc += 1
        if cyc % 2 == 0:
            sign = -sign
    return sign


def wedge(a: np.ndarray, pa: int, qa: int, b: np.ndarray, pb: int, qb: int) -> np.ndarray:
    """Wedge product of coefficient arrays; returns the (pa+pb, qa+qb) array."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    p, q = pa + pb, qa + qb
    if p + q == 0:
        return a * b
    la = _LETTERS[: pa + qa]
    lb = _LETTERS[pa + qa : pa + qa + pb + qb]
    aI, aJ = la[:pa], la[pa:]
    bI, bJ = lb[:pb], lb[pb:]
    T = np.einsum(f"...{aI}{aJ},...{bI}{bJ}->...{aI}{bI}{aJ}{bJ}", a, b)
    nb = T.ndim - (p + q)
    out = np.zeros_like(T)
    for sig in permutations(range(p)):
        ssig = _perm_sign(sig)
        for tau in permutations(range(q)):
            stau = _perm_sign(tau)
            # target holo axis m reads T's holo axis sig[m], same for anti
            axes = (
                list(range(nb))
                + [nb + sig[m] for m in range(p)]
                + [nb + p + tau[m] for m in range(q)]
            )
            out += ssig * stau * np.transpose(T, axes)
    out *= (-1) ** (pb * qa) / (factorial(pa) * factorial(pb) * factorial(qa) * factorial(qb))
    return out


def wedge_power(a: np.ndarray, pa: int, qa: int, k: int):
    """k-fold wedge power (k >= 1) of a form; returns (array, p, q)."""
    if k < 1:
        raise ValueError("wedge_power needs k >= 1; handle k = 0 at the call site")
    out, p, q = a, pa, qa
    for _ in range(k - 1):
        out = wedge(out, p, q, a, pa, qa)
        p += pa
        q += qa
    return out, p, q


def top_component(arr: np.ndarray, n: int) -> np.ndarray:
    """Coefficient of dz^1^..^dz^n ^ dzbar^1^..^dzbar^n in an (n, n) array."""
    idx = (Ellipsis,) + tuple(range(n)) * 2
    return arr[idx]


def omega_array(H: np.ndarray) -> np.ndarray:
    """Coefficient array of the fundamental form omega = i h_{i jbar} dz^i ^ dzbar^j."""
    return 1j * np.asarray(H, dtype=complex)


def volume_top(H: np.ndarray) -> np.ndarray:
    """Top coefficient of omega^n / n!; equals det(H) i^n (-1)^(n(n-1)/2)."""
    n = H.shape[-1]
    arr, _, _ = wedge_power(omega_array(H), 1, 1, n)
    return top_component(arr, n) / factorial(n)


def density(arr: np.ndarray, H: np.ndarray) -> np.ndarray:
    """Ratio of a top (n, n)-form to the volume form omega^n / n!."""
    n = H.shape[-1]
    return top_component(arr, n) / volume_top(H)
