"""Second-order Wirtinger jets.

A :class:`Jet2` carries the value of a field together with its first and
second derivatives with respect to the 2n letters (d/dz^1 .. d/dz^n,
d/dzbar^1 .. d/dzbar^n).  Arithmetic propagates derivatives by the product
and chain rules, so any field composed from coordinate jets comes with
exact analytic derivatives.  All components broadcast over leading batch
axes, which lets a single expression evaluate a field on a whole grid.

Slot convention: index A in [0, n) is the holomorphic derivative d/dz^A,
index n + A is the antiholomorphic derivative d/dzbar^A.
"""

from __future__ import annotations

import numpy as np


def _outer(a, b):
    return np.einsum("...a,...b->...ab", a, b)


class Jet2:
    """Value, gradient and Hessian of a scalar field in Wirtinger slots."""

    __slots__ = ("n", "val", "d1", "d2")

    def __init__(self, n: int, val, d1, d2):
        self.n = n
        self.val = np.asarray(val, dtype=complex)
        self.d1 = np.asarray(d1, dtype=complex)
        self.d2 = np.asarray(d2, dtype=complex)

    # -- constructors -------------------------------------------------

    @classmethod
    def constant(cls, n: int, c, batch_shape=()):
        val = np.broadcast_to(np.asarray(c, dtype=complex), batch_shape).copy()
        d1 = np.zeros(batch_shape + (2 * n,), dtype=complex)
        d2 = np.zeros(batch_shape + (2 * n, 2 * n), dtype=complex)
        return cls(n, val, d1, d2)

    @classmethod
    def coordinate(cls, z, k: int):
        """Jet of the coordinate function z^k at the points z (..., n)."""
        z = np.asarray(z, dtype=complex)
        n = z.shape[-1]
        batch = z.shape[:-1]
        d1 = np.zeros(batch + (2 * n,), dtype=complex)
        d1[..., k] = 1.0
        d2 = np.zeros(batch + (2 * n, 2 * n), dtype=complex)
        return cls(n, z[..., k], d1, d2)

    @classmethod
    def coordinate_conj(cls, z, k: int):
        """Jet of the conjugate coordinate zbar^k."""
        z = np.asarray(z, dtype=complex)
        n = z.shape[-1]
        batch = z.shape[:-1]
        d1 = np.zeros(batch + (2 * n,), dtype=complex)
        d1[..., n + k] = 1.0
        d2 = np.zeros(batch + (2 * n, 2 * n), dtype=complex)
        return cls(n, np.conj(z[..., k]), d1, d2)

    # -- helpers -------------------------------------------------------

    def _lift(self, other):
        if isinstance(other, Jet2):
            return other
        return Jet2.constant(self.n, other, np.shape(np.asarray(other)))

    def _chain(self, f0, f1, f2):
        """Jet of F(self) given F, F', F'' evaluated at self.val."""
        d1 = f1[..., None] * self.d1
        d2 = f1[..., None, None] * self.d2 + f2[..., None, None] * _outer(self.d1, self.d1)
        return Jet2(self.n, f0, d1, d2)

    # -- algebra -------------------------------------------------------

    def __add__(self, other):
        o = self._lift(other)
        return Jet2(self.n, self.val + o.val, self.d1 + o.d1, self.d2 + o.d2)

    __radd__ = __add__

    def __neg__(self):
        return Jet2(self.n, -self.val, -self.d1, -self.d2)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._lift(other)
        val = self.val * o.val
        d1 = self.d1 * o.val[..., None] + o.d1 * self.val[..., None]
        d2 = (
            self.d2 * o.val[..., None, None]
            + o.d2 * self.val[..., None, None]
            + _outer(self.d1, o.d1)
            + _outer(o.d1, self.d1)
        )
        return Jet2(self.n, val, d1, d2)

    __rmul__ = __mul__

    def reciprocal(self):
        v = self.val
        return self._chain(1.0 / v, -1.0 / v**2, 2.0 / v**3)

    def __truediv__(self, other):
        return self * self._lift(other).reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, int) and p >= 0:
            out = Jet2.constant(self.n, 1.0, self.val.shape)
            for _ in range(p):
                out = out * self
            return out
        v = self.val
        return self._chain(v**p, p * v ** (p - 1), p * (p - 1) * v ** (p - 2))

    def exp(self):
        e = np.exp(self.val)
        return self._chain(e, e, e)

    def log(self):
        v = self.val
        return self._chain(np.log(v), 1.0 / v, -1.0 / v**2)

    def sqrt(self):
        r = np.sqrt(self.val)
        return self._chain(r, 0.5 / r, -0.25 / (r * self.val))

    def conj(self):
        """Jet of the conjugate field; swaps holomorphic slots."""
        n = self.n
        idx = np.concatenate([np.arange(n, 2 * n), np.arange(n)])
        d1 = np.conj(self.d1[..., idx])
        d2 = np.conj(self.d2[..., idx, :][..., :, idx])
        return Jet2(n, np.conj(self.val), d1, d2)

    def real(self):
        return (self + self.conj()) * 0.5

    def imag(self):
        return (self - self.conj()) * (-0.5j)


def coordinate_jets(z):
    """All 2n coordinate jets (z^1..z^n, zbar^1..zbar^n) at points z."""
    z = np.asarray(z, dtype=complex)
    n = z.shape[-1]
    zs = [Jet2.coordinate(z, k) for k in range(n)]
    zbs = [Jet2.coordinate_conj(z, k) for k in range(n)]
    return zs, zbs


def squared_radius(z):
    """Jet of |z|^2 = sum_k z^k zbar^k."""
    zs, zbs = coordinate_jets(z)
    out = zs[0] * zbs[0]
    for k in range(1, len(zs)):
        out = out + zs[k] * zbs[k]
    return out


def exp_linear(z, a, b, coeff=1.0):
    """Jet of coeff * exp(a . z + b . zbar); the workhorse for periodic modes."""
    z = np.asarray(z, dtype=complex)
    n = z.shape[-1]
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    ab = np.concatenate([a, b])
    phase = z @ a + np.conj(z) @ b
    val = coeff * np.exp(phase)
    d1 = val[..., None] * ab
    d2 = val[..., None, None] * np.einsum("a,b->ab", ab, ab)
    return Jet2(n, val, d1, d2)
