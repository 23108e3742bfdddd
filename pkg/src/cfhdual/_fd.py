"""Fourth-order central difference operators on functions of (x, y, z)."""
import numpy as np

_D1 = ((-2, -1, 1, 2), np.array([1.0, -8.0, 8.0, -1.0]) / 12.0)
_D2 = ((-2, -1, 0, 1, 2), np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0)


def _shift(x, y, z, axis, t):
    p = [x, y, z]
    p[axis] = p[axis] + t
    return p


def partial(fun, axis, h, order=1):
    """Return a callable evaluating d^order fun / d(axis)^order."""
    offsets, weights = _D1 if order == 1 else _D2

    def g(x, y, z):
        acc = 0.0
        for o, w in zip(offsets, weights):
            acc = acc + w * fun(*_shift(x, y, z, axis, o * h))
        return acc / h**order

    return g


def mixed(fun, a1, a2, h):
    if a1 == a2:
        return partial(fun, a1, h, order=2)
    return partial(partial(fun, a2, h), a1, h)


def fit_order(h, r, floor=1e-300):
    """Least-squares slope of log r against log h; nan if any r is at the floor."""
    h = np.asarray(h, dtype=float)
    r = np.asarray(r, dtype=float)
    if len(h) < 2 or np.any(r <= floor) or not np.all(np.isfinite(r)):
        return np.nan
    return float(np.polyfit(np.log(h), np.log(r), 1)[0])
