"""Scalar time signals and piecewise polynomial space profiles.

Time dependence of the data is a sum of signals, each with an exact
derivative, so that derivative data never has to be formed from difference
quotients.
"""

import numpy as np
from numpy.polynomial import polynomial as P


class Signal:
    """Scalar function of time with an analytic derivative."""

    def __call__(self, t):
        raise NotImplementedError

    def derivative(self):
        raise NotImplementedError

    def to_json(self):
        raise NotImplementedError


class Poly(Signal):
    """Polynomial in t, coefficients in ascending order."""

    def __init__(self, coeffs):
        c = np.atleast_1d(np.asarray(coeffs, dtype=np.float64))
        c = np.trim_zeros(c, "b") if c.size > 1 else c
        self.coeffs = c if c.size else np.zeros(1)

    @property
    def degree(self):
        return self.coeffs.size - 1

    def __call__(self, t):
        return P.polyval(t, self.coeffs)

    def derivative(self):
        return Poly(P.polyder(self.coeffs) if self.coeffs.size > 1 else [0.0])

    def is_zero(self):
        return not np.any(self.coeffs)

    def to_json(self):
        c = [float(x) for x in self.coeffs]
        return c[0] if len(c) == 1 else c

    def __eq__(self, other):
        return isinstance(other, Poly) and np.array_equal(self.coeffs, other.coeffs)

    def __repr__(self):
        return f"Poly({self.coeffs.tolist()})"


class Sine(Signal):
    """amplitude * sin(omega t + phase) + offset."""

    def __init__(self, amplitude=1.0, omega=1.0, phase=0.0, offset=0.0):
        self.amplitude = float(amplitude)
        self.omega = float(omega)
        self.phase = float(phase)
        self.offset = float(offset)

    def __call__(self, t):
        return self.amplitude * np.sin(self.omega * np.asarray(t) + self.phase) + self.offset

    def derivative(self):
        return Sine(self.amplitude * self.omega, self.omega, self.phase + np.pi / 2, 0.0)

    def is_zero(self):
        return self.amplitude == 0.0 and self.offset == 0.0

    def to_json(self):
        return {"kind": "sin", "amplitude": self.amplitude, "omega": self.omega,
                "phase": self.phase, "offset": self.offset}

    def __eq__(self, other):
        return isinstance(other, Sine) and self.to_json() == other.to_json()

    def __repr__(self):
        return f"Sine({self.amplitude}, {self.omega}, {self.phase}, {self.offset})"


def signal_from_json(obj):
    if isinstance(obj, Signal):
        return obj
    if isinstance(obj, (int, float)):
        return Poly([obj])
    if isinstance(obj, list):
        return Poly(obj)
    if isinstance(obj, dict):
        kind = obj.get("kind", "poly")
        if kind == "sin":
            return Sine(obj.get("amplitude", 1.0), obj.get("omega", 1.0),
                        obj.get("phase", 0.0), obj.get("offset", 0.0))
        if kind == "poly":
            return Poly(obj["coeffs"])
    raise ValueError(f"cannot parse time signal {obj!r}")


class PiecewisePoly:
    """Piecewise polynomial on [breaks[0], breaks[-1]] in the edge coordinate.

    ``coeffs[i]`` holds ascending coefficients in the global coordinate x for
    the piece [breaks[i], breaks[i+1]].
    """

    def __init__(self, breaks, coeffs):
        self.breaks = np.asarray(breaks, dtype=np.float64)
        self.coeffs = [np.atleast_1d(np.asarray(c, dtype=np.float64)) for c in coeffs]
        if self.breaks.size != len(self.coeffs) + 1:
            raise ValueError("need one coefficient list per piece")
        if np.any(np.diff(self.breaks) <= 0):
            raise ValueError("breakpoints must be strictly increasing")

    @classmethod
    def constant(cls, value, length):
        return cls([0.0, length], [[float(value)]])

    @classmethod
    def poly(cls, coeffs, length):
        return cls([0.0, length], [coeffs])

    @property
    def degree(self):
        return max(c.size for c in self.coeffs) - 1

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        idx = np.clip(np.searchsorted(self.breaks, x, side="right") - 1, 0, len(self.coeffs) - 1)
        out = np.empty_like(x)
        for i, c in enumerate(self.coeffs):
            sel = idx == i
            out[sel] = P.polyval(x[sel], c)
        return out

    def bounds(self):
        """Exact minimum and maximum over the domain."""
        lo, hi = np.inf, -np.inf
        for i, c in enumerate(self.coeffs):
            a, b = self.breaks[i], self.breaks[i + 1]
            pts = [a, b]
            if c.size > 2:
                r = P.polyroots(P.polyder(c))
                r = r[np.abs(r.imag) < 1e-12].real
                pts.extend(r[(r > a) & (r < b)])
            v = P.polyval(np.asarray(pts), c)
            lo, hi = min(lo, v.min()), max(hi, v.max())
        return lo, hi

    def is_zero(self):
        return all(not np.any(c) for c in self.coeffs)

    def integrate(self, a, b, weight_coeffs=None):
        """Exact integral over [a, b] of self times an optional polynomial weight."""
        total = 0.0
        for i, c in enumerate(self.coeffs):
            lo, hi = max(a, self.breaks[i]), min(b, self.breaks[i + 1])
            if hi <= lo:
                continue
            cc = c if weight_coeffs is None else P.polymul(c, weight_coeffs)
            anti = P.polyint(cc)
            total += P.polyval(hi, anti) - P.polyval(lo, anti)
        return total

    def to_json(self):
        if len(self.coeffs) == 1:
            c = [float(x) for x in self.coeffs[0]]
            return c[0] if len(c) == 1 else c
        return {"breaks": self.breaks.tolist(), "coeffs": [c.tolist() for c in self.coeffs]}

    def __eq__(self, other):
        return (isinstance(other, PiecewisePoly) and np.array_equal(self.breaks, other.breaks)
                and len(self.coeffs) == len(other.coeffs)
                and all(np.array_equal(a, b) for a, b in zip(self.coeffs, other.coeffs)))

    def __repr__(self):
        return f"PiecewisePoly({self.breaks.tolist()}, {[c.tolist() for c in self.coeffs]})"


def profile_from_json(obj, length):
    if isinstance(obj, PiecewisePoly):
        return obj
    if isinstance(obj, (int, float)):
        return PiecewisePoly.constant(obj, length)
    if isinstance(obj, list):
        return PiecewisePoly.poly(obj, length)
    if isinstance(obj, dict):
        return PiecewisePoly(obj["breaks"], obj["coeffs"])
    raise ValueError(f"cannot parse space profile {obj!r}")
