"""Named test functions on a chart, addressable from config files.

Spec strings look like ``sqnorm``, ``neg_sqnorm``, ``constant:2.5``,
``linear:1,-2`` or ``sphere_sqdist``.
"""

import numpy as np


def sqnorm(x):
    return float(np.dot(x, x))


def neg_sqnorm(x):
    return -float(np.dot(x, x))


def sphere_sqdist(x):
    """Squared great-circle distance to the chart centre of the stereographic chart."""
    return (2.0 * float(np.arctan(np.linalg.norm(x)))) ** 2


def quadratic(a, b, c=0.0):
    """``a |x|^2 + <b, x> + c``."""
    b = np.asarray(b, dtype=float)

    def f(x):
        return a * float(np.dot(x, x)) + float(np.dot(b, x)) + c
    return f


def constant(c):
    return lambda x: float(c)


def linear(a):
    a = np.asarray(a, dtype=float)
    return lambda x: float(np.dot(a, x))


def parse_function(spec: str):
    name, _, arg = spec.strip().partition(":")
    values = [float(v) for v in arg.split(",") if v.strip()] if arg else []
    if name == "sqnorm":
        return sqnorm
    if name == "neg_sqnorm":
        return neg_sqnorm
    if name == "sphere_sqdist":
        return sphere_sqdist
    if name == "constant" and len(values) == 1:
        return constant(values[0])
    if name == "linear" and values:
        return linear(values)
    raise ValueError(f"unknown function spec {spec!r}")
