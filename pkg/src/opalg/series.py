"""Truncated formal power series in a real coupling parameter g.

Coefficients are complex scalars or complex arrays of one fixed shape.
A series of order N stores the N+1 coefficients of 1, g, ..., g^N; every
operation truncates at the smallest order among its operands.  Values are
immutable after construction and safe to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "FormalSeries",
    "PositivityVerdict",
    "ShapeMismatchError",
    "series_add",
    "series_mul",
    "series_star",
    "is_positive",
]

DEFAULT_TOL = 1e-10


class ShapeMismatchError(ValueError):
    """Coefficient shapes are inconsistent or incompatible for a product."""


class FormalSeries:
    """Immutable truncated power series with scalar or array coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence):
        if len(coeffs) == 0:
            raise ValueError("a series needs at least the order-0 coefficient")
        normalized = []
        shape = None
        for c in coeffs:
            if np.isscalar(c) or (isinstance(c, np.ndarray) and c.ndim == 0):
                normalized.append(complex(c))
            else:
                arr = np.asarray(c, dtype=complex)
                arr.setflags(write=False)
                if shape is None:
                    shape = arr.shape
                elif arr.shape != shape:
                    raise ShapeMismatchError(
                        f"coefficient shapes differ: {shape} vs {arr.shape}")
                normalized.append(arr)
        if shape is not None and any(not isinstance(c, np.ndarray) for c in normalized):
            raise ShapeMismatchError("cannot mix scalar and array coefficients")
        object.__setattr__(self, "coeffs", tuple(normalized))

    def __setattr__(self, name, value):
        raise AttributeError("FormalSeries is immutable")

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_scalar(self) -> bool:
        return not isinstance(self.coeffs[0], np.ndarray)

    @property
    def shape(self):
        return None if self.is_scalar else self.coeffs[0].shape

    @classmethod
    def zero(cls, order: int, shape=None) -> "FormalSeries":
        if shape is None:
            return cls([0.0] * (order + 1))
        return cls([np.zeros(shape, dtype=complex)] * (order + 1))

    @classmethod
    def constant(cls, value, order: int) -> "FormalSeries":
        tail = 0.0 if np.isscalar(value) else np.zeros(np.asarray(value).shape, complex)
        return cls([value] + [tail] * order)

    def truncate(self, order: int) -> "FormalSeries":
        if order >= self.order:
            return self
        return FormalSeries(self.coeffs[: order + 1])

    def max_abs(self) -> float:
        return max(float(np.max(np.abs(c))) if isinstance(c, np.ndarray) else abs(c)
                   for c in self.coeffs)

    def isclose(self, other: "FormalSeries", tol: float = DEFAULT_TOL) -> bool:
        if self.order != other.order or self.is_scalar != other.is_scalar:
            return False
        return (self - other).max_abs() <= tol

    def __add__(self, other: "FormalSeries") -> "FormalSeries":
        return series_add(self, other)

    def __sub__(self, other: "FormalSeries") -> "FormalSeries":
        return series_add(self, other.scale(-1.0))

    def __mul__(self, other: "FormalSeries") -> "FormalSeries":
        return series_mul(self, other)

    def scale(self, factor: complex) -> "FormalSeries":
        return FormalSeries([factor * c for c in self.coeffs])

    def star(self) -> "FormalSeries":
        return series_star(self)

    def __repr__(self):
        kind = "scalar" if self.is_scalar else f"array{self.shape}"
        return f"FormalSeries(order={self.order}, {kind})"


def series_add(a: FormalSeries, b: FormalSeries) -> FormalSeries:
    order = min(a.order, b.order)
    return FormalSeries([a.coeffs[n] + b.coeffs[n] for n in range(order + 1)])


def _coeff_mul(x, y):
    xa, ya = isinstance(x, np.ndarray), isinstance(y, np.ndarray)
    if xa and ya:
        if x.ndim >= 1 and y.ndim >= 1 and x.shape[-1] != y.shape[0]:
            raise ShapeMismatchError(
                f"shapes {x.shape} and {y.shape} incompatible for a product")
        return x @ y
    return x * y


def series_mul(a: FormalSeries, b: FormalSeries) -> FormalSeries:
    """Cauchy product truncated at the smaller of the two orders."""
    order = min(a.order, b.order)
    out = []
    for n in range(order + 1):
        acc = _coeff_mul(a.coeffs[0], b.coeffs[n])
        for k in range(1, n + 1):
            acc = acc + _coeff_mul(a.coeffs[k], b.coeffs[n - k])
        out.append(acc)
    return FormalSeries(out)


def series_star(a: FormalSeries) -> FormalSeries:
    """Coefficient-wise conjugate (conjugate transpose for arrays)."""
    out = []
    for c in a.coeffs:
        if isinstance(c, np.ndarray):
            out.append(c.conj().T if c.ndim == 2 else c.conj())
        else:
            out.append(c.conjugate())
    return FormalSeries(out)


@dataclass(frozen=True)
class PositivityVerdict:
    """Outcome of the order-by-order square-root decision for a scalar series.

    ``positive`` implies a ``witness`` c with star(c)*c matching the input at
    every stored order; otherwise ``failure_order`` is the first order at
    which no solution exists.
    """

    positive: bool
    witness: Optional[FormalSeries] = None
    failure_order: Optional[int] = None

    def __bool__(self):
        return self.positive


def is_positive(b: FormalSeries, tol: float = DEFAULT_TOL) -> PositivityVerdict:
    """Decide whether b equals star(c)*c for some scalar series c.

    The witness is gauged by taking every solved coefficient real: with
    b0 > 0 the order-n equation 2*c0*Re(c_n) = b_n - sum_{k=1}^{n-1}
    conj(c_k) c_{n-k} fixes c_n once Im(c_n) := 0.  A vanishing leading
    coefficient forces b1 = 0 and recurses on the g^2-shifted series.
    """
    if not b.is_scalar:
        raise ValueError("positivity is decided for scalar series only")
    coeffs = list(b.coeffs)
    order = b.order

    for n, c in enumerate(coeffs):
        if abs(c.imag) > tol:
            return PositivityVerdict(positive=False, failure_order=n)
    real = [c.real for c in coeffs]

    shift = 0
    while True:
        remaining = real[2 * shift:]
        if not remaining or all(abs(r) <= tol for r in remaining):
            witness = FormalSeries.zero(order)
            return PositivityVerdict(positive=True, witness=witness)
        b0 = remaining[0]
        if b0 < -tol:
            return PositivityVerdict(positive=False, failure_order=2 * shift)
        if b0 <= tol:
            if len(remaining) > 1 and abs(remaining[1]) > tol:
                return PositivityVerdict(positive=False, failure_order=2 * shift + 1)
            shift += 1
            continue
        # b0 > 0: solve order by order with real coefficients
        c = [np.sqrt(b0)]
        for n in range(1, len(remaining)):
            conv = sum(c[k] * c[n - k] for k in range(1, n))
            c.append((remaining[n] - conv) / (2.0 * c[0]))
        lifted = [0.0] * shift + c
        lifted += [0.0] * (order + 1 - len(lifted))
        witness = FormalSeries(lifted[: order + 1])
        return PositivityVerdict(positive=True, witness=witness)
