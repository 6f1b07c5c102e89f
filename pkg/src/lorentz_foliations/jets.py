"""Truncated multivariate Taylor arithmetic (forward-mode derivatives to order 3).

A :class:`Jet` carries an array value together with its first, second and
third partial derivatives with respect to a fixed set of ``nvar`` chart
variables.  Derivative axes are appended *after* the value axes, so a jet
whose value has shape ``S`` stores ``partials`` of shape ``S + (nvar,)``,
``second_partials`` of shape ``S + (nvar, nvar)`` and so on.  Keeping the
derivative axes trailing lets value broadcasting (including leading batch
axes of sample points) carry over to every derivative array unchanged.

Metric and time-function expressions are written once against the
functions in this module (``exp``, ``sin``, ``stack`` ...) and then work
on plain floats, numpy arrays and jets alike.
"""

from __future__ import annotations

import itertools

import numpy as np

MAX_ORDER = 3
_DERIV_LETTERS = "tuvw"


class Jet:
    """Array value plus partial derivatives up to ``order`` (0..3)."""

    __slots__ = ("value", "partials", "second_partials", "third_partials")
    __array_priority__ = 1000

    def __init__(self, value, partials=None, second_partials=None, third_partials=None):
        self.value = np.asarray(value, dtype=float)
        self.partials = partials
        self.second_partials = second_partials if partials is not None else None
        self.third_partials = third_partials if self.second_partials is not None else None

    # -- construction -----------------------------------------------------

    @classmethod
    def variable(cls, point, order: int = 1) -> "Jet":
        """Seed jet for the chart coordinates themselves: d x_a / d x_b = delta_ab."""
        point = np.asarray(point, dtype=float)
        if not 0 <= order <= MAX_ORDER:
            raise ValueError(f"order must be in 0..{MAX_ORDER}, got {order}")
        nvar = point.shape[-1]
        derivs = []
        if order >= 1:
            derivs.append(np.broadcast_to(np.eye(nvar), point.shape + (nvar,)).copy())
        for k in range(2, order + 1):
            derivs.append(np.zeros(point.shape + (nvar,) * k))
        return cls(point, *derivs)

    @classmethod
    def constant(cls, value, nvar: int, order: int) -> "Jet":
        value = np.asarray(value, dtype=float)
        derivs = [np.zeros(value.shape + (nvar,) * k) for k in range(1, order + 1)]
        return cls(value, *derivs)

    # -- introspection ----------------------------------------------------

    @property
    def derivs(self) -> list:
        return [d for d in (self.partials, self.second_partials, self.third_partials) if d is not None]

    @property
    def order(self) -> int:
        return len(self.derivs)

    @property
    def nvar(self) -> int:
        return self.partials.shape[-1] if self.partials is not None else 0

    @property
    def shape(self) -> tuple:
        return self.value.shape

    @property
    def ndim(self) -> int:
        return self.value.ndim

    def __repr__(self) -> str:
        return f"Jet(shape={self.shape}, order={self.order}, nvar={self.nvar})"

    # -- structural -------------------------------------------------------

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise ValueError(f"cannot raise jet order {self.order} to {order}")
        return Jet(self.value, *self.derivs[:order])

    def gradient(self) -> "Jet":
        """Jet of the gradient: value axes gain one trailing derivative axis, order drops by one."""
        if self.order == 0:
            raise ValueError("order-0 jet has no gradient")
        return Jet(*self.derivs)

    def __getitem__(self, key) -> "Jet":
        if not isinstance(key, tuple):
            key = (key,)
        if any(k is Ellipsis for k in key):
            pos = next(i for i, k in enumerate(key) if k is Ellipsis)
            derivs = [
                d[key[:pos] + (Ellipsis,) + key[pos + 1 :] + (slice(None),) * (i + 1)]
                for i, d in enumerate(self.derivs)
            ]
        else:
            derivs = [d[key] for d in self.derivs]
        return Jet(self.value[key], *derivs)

    def broadcast_to(self, shape) -> "Jet":
        shape = tuple(shape)
        return Jet(
            np.broadcast_to(self.value, shape),
            *[np.broadcast_to(d, shape + d.shape[-(i + 1) :]) for i, d in enumerate(self.derivs)],
        )

    def swapaxes(self, a: int, b: int) -> "Jet":
        nd = self.ndim
        a, b = a % nd, b % nd
        return Jet(np.swapaxes(self.value, a, b), *[np.swapaxes(d, a, b) for d in self.derivs])

    # -- arithmetic -------------------------------------------------------

    def __neg__(self):
        return Jet(-self.value, *[-d for d in self.derivs])

    def __pos__(self):
        return self

    def __add__(self, other):
        if not isinstance(other, Jet):
            other = np.asarray(other, dtype=float)
            shape = np.broadcast_shapes(self.shape, other.shape)
            out = self.broadcast_to(shape)
            return Jet(out.value + other, *out.derivs)
        order = min(self.order, other.order)
        derivs = [a + b for a, b in zip(self.derivs[:order], other.derivs[:order])]
        return Jet(self.value + other.value, *derivs)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            other = np.asarray(other, dtype=float)
            return Jet(self.value * other, *[d * other[(...,) + (None,) * (i + 1)] for i, d in enumerate(self.derivs)])
        return einsum("...,...->...", self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return self * (1.0 / np.asarray(other, dtype=float))
        return self * reciprocal(other)

    def __rtruediv__(self, other):
        return reciprocal(self) * other

    def __pow__(self, p):
        if isinstance(p, Jet):
            return exp(log(self) * p)
        p = float(p)
        if p == 2.0:
            return self * self
        v = self.value
        return _unary(
            self,
            v**p,
            p * v ** (p - 1),
            p * (p - 1) * v ** (p - 2),
            p * (p - 1) * (p - 2) * v ** (p - 3),
        )


# ---------------------------------------------------------------------------
# unary functions


def _unary(x: Jet, f0, f1, f2, f3) -> Jet:
    """Chain rule for an elementwise function with derivatives f1, f2, f3 at x.value."""
    derivs = []
    u1, u2, u3 = x.partials, x.second_partials, x.third_partials
    if u1 is not None:
        derivs.append(f1[..., None] * u1)
    if u2 is not None:
        derivs.append(f1[..., None, None] * u2 + f2[..., None, None] * np.einsum("...i,...j->...ij", u1, u1))
    if u3 is not None:
        mixed = np.einsum("...i,...jk->...ijk", u1, u2)
        mixed = mixed + np.einsum("...ijk->...jik", mixed) + np.einsum("...ijk->...jki", mixed)
        derivs.append(
            f1[..., None, None, None] * u3
            + f2[..., None, None, None] * mixed
            + f3[..., None, None, None] * np.einsum("...i,...j,...k->...ijk", u1, u1, u1)
        )
    return Jet(f0, *derivs)


def _dispatch(numpy_fn, jet_fn):
    def fn(x):
        if isinstance(x, Jet):
            return jet_fn(x)
        return numpy_fn(x)

    fn.__name__ = numpy_fn.__name__
    return fn


def _exp(x):
    e = np.exp(x.value)
    return _unary(x, e, e, e, e)


def _log(x):
    v = x.value
    return _unary(x, np.log(v), 1 / v, -1 / v**2, 2 / v**3)


def _sin(x):
    s, c = np.sin(x.value), np.cos(x.value)
    return _unary(x, s, c, -s, -c)


def _cos(x):
    s, c = np.sin(x.value), np.cos(x.value)
    return _unary(x, c, -s, -c, s)


def _tan(x):
    t = np.tan(x.value)
    s2 = 1 + t * t
    return _unary(x, t, s2, 2 * t * s2, 2 * s2 * (1 + 3 * t * t))


def _tanh(x):
    t = np.tanh(x.value)
    s2 = 1 - t * t
    return _unary(x, t, s2, -2 * t * s2, 2 * s2 * (3 * t * t - 1))


def _sinh(x):
    s, c = np.sinh(x.value), np.cosh(x.value)
    return _unary(x, s, c, s, c)


def _cosh(x):
    s, c = np.sinh(x.value), np.cosh(x.value)
    return _unary(x, c, s, c, s)


def _sqrt(x):
    r = np.sqrt(x.value)
    return _unary(x, r, 0.5 / r, -0.25 / r**3, 0.375 / r**5)


def _reciprocal(x):
    v = x.value
    return _unary(x, 1 / v, -1 / v**2, 2 / v**3, -6 / v**4)


exp = _dispatch(np.exp, _exp)
log = _dispatch(np.log, _log)
sin = _dispatch(np.sin, _sin)
cos = _dispatch(np.cos, _cos)
tan = _dispatch(np.tan, _tan)
tanh = _dispatch(np.tanh, _tanh)
sinh = _dispatch(np.sinh, _sinh)
cosh = _dispatch(np.cosh, _cosh)
sqrt = _dispatch(np.sqrt, _sqrt)
reciprocal = _dispatch(np.reciprocal, _reciprocal)


def apply(x, f0, f1, f2, f3):
    """Apply a user function given as callables for its value and first three derivatives."""
    if isinstance(x, Jet):
        v = x.value
        return _unary(x, f0(v), f1(v), f2(v), f3(v))
    return f0(np.asarray(x, dtype=float))


# ---------------------------------------------------------------------------
# multilinear contractions


def _split_spec(spec: str):
    lhs, out = spec.replace(" ", "").split("->")
    return lhs.split(","), out


def einsum(spec: str, *operands):
    """``np.einsum`` over jets and arrays with Leibniz-rule derivative propagation.

    The spec must be explicit (contain ``->``).  Plain arrays act as
    constants.  Derivative letters ``t u v w`` are reserved.
    """
    jets = [op for op in operands if isinstance(op, Jet)]
    if not jets:
        return np.einsum(spec, *operands)
    ins, out = _split_spec(spec)
    if any(c in spec for c in _DERIV_LETTERS):
        raise ValueError(f"einsum spec may not use reserved letters {_DERIV_LETTERS!r}")
    order = min(j.order for j in jets)
    nvar = jets[0].nvar

    def deriv(op, k):
        if isinstance(op, Jet):
            return op.value if k == 0 else op.derivs[k - 1]
        return op if k == 0 else None

    values = [op.value if isinstance(op, Jet) else np.asarray(op, dtype=float) for op in operands]
    result_value = np.einsum(spec, *values)
    derivs = []
    letters = _DERIV_LETTERS[1:]
    for k in range(1, order + 1):
        dl = letters[:k]
        acc = None
        # each derivative letter goes to exactly one operand
        for assign in itertools.product(range(len(operands)), repeat=k):
            arrays, subs = [], []
            for idx, op in enumerate(operands):
                mine = "".join(dl[j] for j in range(k) if assign[j] == idx)
                a = deriv(op, len(mine))
                if a is None:
                    break
                arrays.append(a)
                subs.append(ins[idx] + mine)
            else:
                term = np.einsum(",".join(subs) + "->" + out + dl, *arrays)
                acc = term if acc is None else acc + term
        if acc is None:
            acc = np.zeros(result_value.shape + (nvar,) * k)
        derivs.append(acc)
    return Jet(result_value, *derivs)


def inv(m):
    """Matrix inverse over the last two value axes."""
    if not isinstance(m, Jet):
        return np.linalg.inv(m)
    vi = np.linalg.inv(m.value)
    m1, m2, m3 = m.partials, m.second_partials, m.third_partials
    derivs = []
    if m1 is not None:
        x1 = -np.einsum("...ab,...bcu,...cd->...adu", vi, m1, vi)
        derivs.append(x1)
    if m2 is not None:
        t = np.einsum("...abuv,...bc->...acuv", m2, vi)
        t = t + np.einsum("...abu,...bcv->...acuv", m1, x1)
        t = t + np.einsum("...abv,...bcu->...acuv", m1, x1)
        x2 = -np.einsum("...ab,...bcuv->...acuv", vi, t)
        derivs.append(x2)
    if m3 is not None:
        t = np.einsum("...abuvw,...bc->...acuvw", m3, vi)
        for p, q, r in (("uv", "w", "uvw"), ("uw", "v", "uvw"), ("vw", "u", "uvw")):
            t = t + np.einsum(f"...ab{p},...bc{q}->...ac{r}", m2, x1)
            t = t + np.einsum(f"...ab{q},...bc{p}->...ac{r}", m1, x2)
        derivs.append(-np.einsum("...ab,...bcuvw->...acuvw", vi, t))
    return Jet(vi, *derivs)


def stack(items, axis: int = -1):
    """Stack jets/arrays/floats along a new value axis."""
    if not any(isinstance(it, Jet) for it in items):
        return np.stack([np.asarray(it, dtype=float) for it in items], axis=axis)
    jets = [it for it in items if isinstance(it, Jet)]
    order = min(j.order for j in jets)
    nvar = jets[0].nvar
    shape = np.broadcast_shapes(*[np.shape(it.value if isinstance(it, Jet) else it) for it in items])
    full = []
    for it in items:
        if not isinstance(it, Jet):
            it = Jet.constant(np.broadcast_to(np.asarray(it, dtype=float), shape), nvar, order)
        full.append(it.truncate(order).broadcast_to(shape))
    vaxis = axis if axis >= 0 else axis + len(shape) + 1
    derivs = [np.stack([f.derivs[k] for f in full], axis=vaxis) for k in range(order)]
    return Jet(np.stack([f.value for f in full], axis=vaxis), *derivs)


def matrix(rows):
    """Build a matrix (last two value axes) from nested lists of entries."""
    return stack([stack(list(row), axis=-1) for row in rows], axis=-2)


def value_of(x) -> np.ndarray:
    return x.value if isinstance(x, Jet) else np.asarray(x, dtype=float)


def is_jet(x) -> bool:
    return isinstance(x, Jet)


# Name used by the chart-metric layer for derivative-carrying scalars.
DualScalar = Jet

__all__ = [
    "Jet",
    "DualScalar",
    "apply",
    "cos",
    "cosh",
    "einsum",
    "exp",
    "inv",
    "is_jet",
    "log",
    "matrix",
    "reciprocal",
    "sin",
    "sinh",
    "sqrt",
    "stack",
    "tan",
    "tanh",
    "value_of",
]
