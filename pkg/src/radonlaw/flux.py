"""Flux catalog, structural constants and hypothesis checks.

A :class:`Flux` is ``phi(u) = sign * base(u) + drift * u`` where ``base`` is
one of the catalog shapes below (all increasing and concave, ``base(0) = 0``)
or a user table.  Catalog constants are closed-form; nothing is inferred by
sampling except for tabulated fluxes.

    kind          base(u)                     (H, K)            gamma
    power(p)      sgn p [(1+u)^p - 1]         (p/(1-p), |H|)    1 if p<0 else inf
    exponential   1 - exp(-alpha u)           (-1, 1)           1
    logarithmic   log(1+u)                    (0, 1)            inf
    loglog        1 - 1/log(e+u)              (0, 1)            1
    linear(C)     0            (phi = C u)    absent            0
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Mapping

import mpmath
import numpy as np
from scipy import integrate, optimize
from scipy.interpolate import PchipInterpolator

from .errors import DomainError, SingularityError, UnsupportedFluxError

U_MAX = 1.0e6
HYPOTHESIS_GRID_POINTS = 2048

_CATALOG = ("power", "exponential", "logarithmic", "loglog", "linear")


# --- catalog shapes, written once for numpy and mpmath namespaces -----------

def _power(u, prm, m, order):
    p = prm["p"]
    lu = m.log1p(u)
    if order == 0:
        return math.copysign(1.0, p) * m.expm1(p * lu)
    if order == 1:
        return abs(p) * m.exp((p - 1) * lu)
    return abs(p) * (p - 1) * m.exp((p - 2) * lu)


def _exponential(u, prm, m, order):
    a = prm["alpha"]
    if order == 0:
        return -m.expm1(-a * u)
    if order == 1:
        return a * m.exp(-a * u)
    return -a * a * m.exp(-a * u)


def _logarithmic(u, prm, m, order):
    if order == 0:
        return m.log1p(u)
    if order == 1:
        return 1 / (1 + u)
    return -1 / (1 + u) ** 2


def _loglog(u, prm, m, order):
    s = m.e + u
    L = m.log(s)
    if order == 0:
        return 1 - 1 / L
    if order == 1:
        return 1 / (s * L * L)
    return -(L + 2) / (s * s * L ** 3)


def _linear(u, prm, m, order):
    return 0 * u


def _tail(kind, prm, u, m):
    """``1 - base(u)`` for the bounded shapes, computed without cancellation."""
    if kind == "power" and prm["p"] < 0:
        return m.exp(prm["p"] * m.log1p(u))
    if kind == "exponential":
        return m.exp(-prm["alpha"] * u)
    if kind == "loglog":
        return 1 / m.log(m.e + u)
    return None


_SHAPES = {
    "power": _power,
    "exponential": _exponential,
    "logarithmic": _logarithmic,
    "loglog": _loglog,
    "linear": _linear,
}


@dataclass(frozen=True, eq=False)
class Flux:
    """Evaluable flux with cached structural constants.

    Use the constructors :func:`power`, :func:`exponential`, ... rather than
    instantiating directly.  Instances are immutable.
    """

    kind: str
    params: Mapping = field(default_factory=dict)
    sign: int = 1
    drift: float = 0.0
    u_max: float = U_MAX

    def __post_init__(self):
        if self.kind not in _CATALOG + ("custom", "shifted"):
            raise DomainError(f"unknown flux kind {self.kind!r}")
        if self.sign not in (1, -1):
            raise DomainError("sign must be +1 or -1")
        if self.kind == "power":
            p = self.params["p"]
            if not (p < 1 and p != 0):
                raise DomainError(f"power flux needs p < 1, p != 0 (got {p})")
        if self.kind == "exponential" and not self.params["alpha"] > 0:
            raise DomainError("exponential flux needs alpha > 0")

    # -- evaluation ---------------------------------------------------------

    @cached_property
    def _table(self):
        u = np.asarray(self.params["u"], dtype=float)
        phi = np.asarray(self.params["phi"], dtype=float)
        if u[0] != 0.0 or phi[0] != 0.0:
            raise DomainError("tabulated flux must start at (0, 0)")
        return PchipInterpolator(u, phi, extrapolate=False)

    def _base(self, u, order):
        if self.kind == "shifted":
            inner, k = self.params["inner"], self.params["k"]
            if order == 0:
                return inner._signed(u + k, 0) - inner._signed(np.asarray(k), 0)
            return inner._signed(u + k, order)
        if self.kind == "custom":
            tab = self._table
            top = tab.x[-1]
            inside = np.minimum(u, top)
            val = tab(inside, nu=order)
            if order == 0:
                # beyond the table, continue with the terminal slope
                val = val + self._table_slope * np.maximum(u - top, 0.0)
            elif order == 1:
                val = np.where(u > top, self._table_slope, val)
            else:
                val = np.where(u > top, 0.0, val)
            return val
        return _SHAPES[self.kind](u, self.params, np, order)

    def _signed(self, u, order):
        out = self.sign * self._base(u, order)
        if order == 0:
            out = out + self.drift * u
        elif order == 1:
            out = out + self.drift
        return out

    @cached_property
    def _table_slope(self):
        return float(self._table(self._table.x[-1], nu=1))

    def _prepare(self, u):
        arr = np.asarray(u, dtype=float)
        if not np.all(np.isfinite(arr)):
            raise DomainError("flux argument must be finite")
        return np.maximum(arr, 0.0)

    def __call__(self, u):
        arr = self._prepare(u)
        out = self._signed(arr, 0)
        return float(out) if np.ndim(out) == 0 else out

    def deriv(self, u):
        arr = self._prepare(u)
        out = self._signed(arr, 1)
        return float(out) if np.ndim(out) == 0 else out

    def deriv2(self, u):
        arr = self._prepare(u)
        out = self._signed(arr, 2)
        return float(out) if np.ndim(out) == 0 else out

    def mp(self, u, order=0):
        """High-precision value of ``phi`` or a derivative at a scalar ``u``.

        Catalog kinds are evaluated in mpmath; tables fall back to floats.
        """
        if self.kind in _CATALOG:
            uu = mpmath.mpf(u)
            base = _SHAPES[self.kind](uu, self.params, mpmath, order)
        elif self.kind == "shifted":
            inner, k = self.params["inner"], mpmath.mpf(self.params["k"])
            base = inner.mp(mpmath.mpf(u) + k, order)
            if order == 0:
                base -= inner.mp(k, 0)
        else:
            return mpmath.mpf(float(self._signed(np.asarray(float(u)), order)))
        out = self.sign * base
        if order == 0:
            out += self.drift * mpmath.mpf(u)
        elif order == 1:
            out += self.drift
        return out

    def mp_affine(self, u, H, K):
        """``H [phi(u) - C_phi u] + K`` in mpmath, cancellation-free for the
        bounded catalog shapes (where ``H phi + K`` decays like the tail)."""
        uu = mpmath.mpf(u)
        kind, prm, shift = self.kind, self.params, None
        if kind == "shifted":
            kind, prm, shift = self.params["inner"].kind, self.params["inner"].params, self.params["k"]
        if kind in _CATALOG:
            if shift is None:
                tail = _tail(kind, prm, uu, mpmath)
                if tail is not None:
                    return (H * self.sign + K) - H * self.sign * tail
            else:
                tail = _tail(kind, prm, uu + shift, mpmath)
                if tail is not None:
                    t0 = _tail(kind, prm, mpmath.mpf(shift), mpmath)
                    return (H * self.sign * t0 + K) - H * self.sign * tail
        return H * (self.mp(uu, 0) - self.cphi * uu) + K

    # -- structural constants ------------------------------------------------

    @cached_property
    def cphi(self):
        """Linear growth rate ``lim phi(u)/u``."""
        if self.kind == "custom":
            base_c = self.params.get("cphi", self._table_slope)
            return self.sign * base_c + self.drift
        if self.kind == "shifted":
            return self.sign * self.params["inner"].cphi + self.drift
        return self.drift

    @cached_property
    def lipschitz(self):
        """Global Lipschitz constant ``M = sup |phi'|``."""
        if self.kind in _CATALOG:
            d0 = abs(float(self._signed(np.asarray(0.0), 1)))
            return max(d0, abs(self.drift))
        if self.kind == "shifted":
            inner = self.params["inner"]
            d0 = abs(float(self._signed(np.asarray(0.0), 1)))
            return max(d0, abs(self.sign * inner.cphi + self.drift))
        grid = hypothesis_grid(self.u_max)
        return 1.05 * float(np.max(np.abs(self.deriv(grid))))

    @cached_property
    def gamma(self):
        """``lim |phi(u) - C_phi u|`` as u -> infinity (``inf`` if unbounded)."""
        k = self.kind
        if k == "power":
            return 1.0 if self.params["p"] < 0 else math.inf
        if k in ("exponential", "loglog"):
            return 1.0
        if k == "logarithmic":
            return math.inf
        if k == "linear":
            return 0.0
        if k == "shifted":
            inner, kk = self.params["inner"], self.params["k"]
            if math.isinf(inner.gamma):
                return math.inf
            base_inf = inner.sign * inner.gamma  # catalog bases increase to +gamma
            shifted_part = inner(kk) - inner.cphi * kk
            return abs(base_inf - shifted_part)
        if "gamma" in self.params:
            return float(self.params["gamma"])
        top = self._table.x[-1]
        return abs(float(self(top)) - self.cphi * top)

    @cached_property
    def shifted_sup(self):
        """``||phi - C_phi u||`` in L-infinity on (0, inf)."""
        if self.kind in _CATALOG or self.kind == "shifted":
            return self.gamma
        grid = hypothesis_grid(self.u_max)
        vals = np.abs(self(grid) - self.cphi * grid)
        return max(float(np.max(vals)), self.gamma)

    @property
    def bounded(self):
        return math.isfinite(self.shifted_sup)

    @cached_property
    def monotone_sign(self):
        """Sign of ``phi' - C_phi`` when constant on (0, inf), else 0."""
        if self.kind == "linear":
            return 0
        if self.kind in _CATALOG or self.kind == "shifted":
            return self.sign
        grid = hypothesis_grid(self.u_max)
        d = self.deriv(grid) - self.cphi
        if np.all(d > 0):
            return 1
        if np.all(d < 0):
            return -1
        return 0

    @cached_property
    def h2_params(self):
        """Catalog ``(H, K)`` pair, or ``None`` when absent.

        For ``sign = -1`` the pair is reported for ``phi`` itself, i.e. with
        ``K`` negated.
        """
        k = self.kind
        if k == "power":
            p = self.params["p"]
            H = p / (1 - p)
            pair = (H, abs(H))
        elif k == "exponential":
            pair = (-1.0, 1.0)
        elif k in ("logarithmic", "loglog"):
            pair = (0.0, 1.0)
        elif k == "shifted":
            pair = self.params.get("HK")
            if pair is None:
                return None
        elif "H" in self.params and "K" in self.params:
            return (float(self.params["H"]), float(self.params["K"]))
        else:
            return None
        return (pair[0], self.sign * pair[1])

    def shifted(self, k):
        """The flux ``phi_k(u) = phi(u + k) - phi(k)`` with its catalog pair."""
        if k <= 0:
            raise DomainError("shift k must be positive")
        HK = None
        kind = self.kind
        if kind == "power":
            p = self.params["p"]
            H = p / (1 - p)
            HK = (H, (1 + k) ** p * abs(H))
        elif kind == "exponential":
            HK = (-1.0, math.exp(-self.params["alpha"] * k))
        elif kind == "logarithmic":
            HK = (0.0, 1.0)
        elif kind == "loglog":
            HK = (0.0, math.log(math.e + k) ** -2)
        params = {"inner": Flux(self.kind, self.params, 1, 0.0, self.u_max), "k": float(k), "HK": HK}
        return Flux("shifted", params, self.sign, self.drift, self.u_max)

    def normalized(self):
        """``sign' * (phi - C_phi u)``, increasing with zero growth rate."""
        s = self.monotone_sign
        if s == 0:
            raise UnsupportedFluxError("flux has no monotone normalization")
        return Flux(self.kind, self.params, self.sign * s, (self.drift - self.cphi) * s, self.u_max)

    def minus_linear(self, c):
        """``phi(u) - c u``."""
        return Flux(self.kind, self.params, self.sign, self.drift - c, self.u_max)

    @property
    def concave(self):
        """True/False for catalog curvature, None when unknown."""
        if self.kind == "linear":
            return None
        if self.kind in _CATALOG or self.kind == "shifted":
            return self.sign > 0
        return None

    def to_config(self):
        out = {"kind": self.kind}
        if self.kind == "linear":
            out["C"] = self.drift
            return out
        if self.kind == "shifted":
            raise DomainError("shifted fluxes are derived, not configurable")
        out.update(self.params)
        if self.sign != 1:
            out["sign"] = self.sign
        if self.drift:
            out["drift"] = self.drift
        return out

    def __repr__(self):
        prm = {k: v for k, v in self.params.items() if k not in ("u", "phi", "inner")}
        return f"Flux({self.kind}, {prm}, sign={self.sign}, drift={self.drift})"


# --- constructors ------------------------------------------------------------

def power(p, **kw):
    return Flux("power", {"p": float(p)}, **kw)


def exponential(alpha=1.0, **kw):
    return Flux("exponential", {"alpha": float(alpha)}, **kw)


def logarithmic(**kw):
    return Flux("logarithmic", {}, **kw)


def loglog(**kw):
    return Flux("loglog", {}, **kw)


def linear(C):
    return Flux("linear", {}, drift=float(C))


def tabulated(u, phi, **constants):
    """Shape-preserving cubic interpolant of a sampled flux.

    ``constants`` may carry ``cphi``, ``gamma``, ``H`` and ``K``; the
    ``(H, K)`` pair is only ever taken from here.
    """
    params = {"u": list(map(float, u)), "phi": list(map(float, phi))}
    params.update({k: float(v) for k, v in constants.items()})
    return Flux("custom", params)


def from_config(spec):
    """Build a flux from ``{"kind": ..., **params}``."""
    spec = dict(spec)
    kind = spec.pop("kind")
    sign = int(spec.pop("sign", 1))
    drift = float(spec.pop("drift", 0.0))
    if kind == "power":
        return power(spec["p"], sign=sign, drift=drift)
    if kind == "exponential":
        return exponential(spec.get("alpha", 1.0), sign=sign, drift=drift)
    if kind == "logarithmic":
        return logarithmic(sign=sign, drift=drift)
    if kind == "loglog":
        return loglog(sign=sign, drift=drift)
    if kind == "linear":
        return linear(spec["C"])
    if kind == "custom":
        u, phi = spec.pop("u"), spec.pop("phi")
        return tabulated(u, phi, **spec)
    raise DomainError(f"unknown flux kind {kind!r}")


def parse_flux(text):
    """Parse the compact CLI form ``power:-1``, ``exponential:2``, ``linear:0.5``."""
    name, _, arg = text.partition(":")
    if name == "power":
        return power(float(arg))
    if name == "exponential":
        return exponential(float(arg) if arg else 1.0)
    if name in ("log", "logarithmic"):
        return logarithmic()
    if name == "loglog":
        return loglog()
    if name == "linear":
        return linear(float(arg))
    raise DomainError(f"cannot parse flux {text!r}")


# --- hypotheses ---------------------------------------------------------------

def hypothesis_grid(u_max=U_MAX, n=HYPOTHESIS_GRID_POINTS):
    """0 followed by ``n - 1`` log-spaced points up to ``u_max``."""
    return np.concatenate(([0.0], np.geomspace(1e-4, u_max, n - 1)))


@dataclass
class HypothesisResult:
    name: str
    holds: bool
    margin: float  # worst signed slack; >= 0 means satisfied
    equality: float = math.nan  # max relative distance from equality
    detail: str = ""


@dataclass
class HypothesisReport:
    flux: str
    results: dict

    def __getitem__(self, name):
        return self.results[name]

    def to_dict(self):
        return {
            "flux": self.flux,
            "results": {k: vars(v) for k, v in self.results.items()},
        }


def _h2_test(flux, samples, HK, cphi, name, rtol):
    """Relative slack of ``phi''{H[phi - c u] + K} <= -(phi' - c)^2``."""
    if HK is None:
        return HypothesisResult(name, False, -math.inf, detail="(H, K) absent")
    H, K = HK
    if H < -1:
        return HypothesisResult(name, False, -math.inf, detail="H < -1")
    worst, eq, negative = math.inf, 0.0, True
    with mpmath.workdps(40):
        for u in samples:
            d1 = flux.mp(u, 1) - cphi
            d2 = flux.mp(u, 2)
            lhs = d2 * flux.mp_affine(u, H, K)
            rhs = -(d1 * d1)
            if not lhs < 0 or rhs == 0:
                negative = False
            scale = abs(rhs) if rhs != 0 else mpmath.mpf(1)
            rel = float((rhs - lhs) / scale)
            worst = min(worst, rel)
            eq = max(eq, abs(rel))
    holds = negative and worst >= -rtol
    return HypothesisResult(name, holds, worst, eq, "" if negative else "lhs not strictly negative")


def check_hypotheses(flux, samples=None, shifts=(1.0,), rtol=1e-9):
    """Evaluate the structural hypotheses on a sample grid.

    Returns a :class:`HypothesisReport` with entries ``H1``, ``H2``,
    ``H2prime``, ``H2k[k]`` for each shift and ``H3``.
    """
    if samples is None:
        samples = hypothesis_grid(flux.u_max)
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0 or np.any(np.diff(samples) < 0) or samples[0] < 0:
        raise DomainError("samples must be nonempty, sorted and nonnegative")
    res = {}

    vals = flux(samples)
    d1 = flux.deriv(samples)
    lip = float(np.max(np.abs(d1)))
    h1 = flux(0.0) == 0.0 and lip <= flux.lipschitz * (1 + 1e-12)
    res["H1"] = HypothesisResult("H1", bool(h1), flux.lipschitz - lip, detail=f"phi(0)={flux(0.0)}")

    HK = flux.h2_params
    if flux.cphi != 0:
        res["H2"] = HypothesisResult("H2", False, -math.inf, detail="C_phi != 0")
    else:
        res["H2"] = _h2_test(flux, samples, HK, 0.0, "H2", rtol)
    res["H2prime"] = _h2_test(flux, samples, HK, flux.cphi, "H2prime", rtol)
    for k in shifts:
        name = f"H2k[{k:g}]"
        fk = flux.shifted(k) if flux.kind != "shifted" else None
        if fk is None or flux.cphi != 0:
            res[name] = HypothesisResult(name, False, -math.inf, detail="not applicable")
        else:
            res[name] = _h2_test(fk, samples, fk.h2_params, 0.0, name, rtol)

    if HK is None:
        res["H3"] = HypothesisResult("H3", False, -math.inf, detail="(H, K) absent")
    else:
        H, K = HK
        top = H * vals + K
        bottom = (1 + samples) * d1
        if np.any((bottom <= 0) & (top > 0)):
            res["H3"] = HypothesisResult("H3", False, -math.inf, detail="infeasible")
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(bottom > 0, top / bottom, 0.0)
            L = float(np.max(ratio))
            res["H3"] = HypothesisResult("H3", True, L, detail=f"smallest feasible L = {L:.6g}")
    return HypothesisReport(repr(flux), res)


# --- blow-up profile ------------------------------------------------------------

@dataclass
class BlowupProfile:
    """``g = (H phi + K) / phi'`` and ``Psi(y) = int_0^y phi'/g`` for the
    normalized (increasing, zero growth rate) flux."""

    flux: Flux
    H: float
    K: float
    closed: Callable | None
    closed_inv: Callable | None
    psi_inf: float

    def g(self, u):
        f = self.flux
        d = f.deriv(u)
        if np.any(np.asarray(d) == 0):
            raise SingularityError("phi' vanishes")
        return (self.H * f(u) + self.K) / d

    def _integrand(self, u):
        f = self.flux
        d = f.deriv(u)
        den = self.H * f(u) + self.K
        # den cancels to <= 0 only once the integrand is below double precision
        return d * d / den if den > 0 else 0.0

    def psi_numeric(self, y):
        if y <= 0:
            return 0.0
        if math.isinf(y):
            return integrate.quad(self._integrand, 0, np.inf, epsabs=1e-14, epsrel=1e-13, limit=500)[0]
        # split at 1 and use log-spaced breakpoints for long intervals
        pts = [0.0] + [b for b in np.geomspace(1.0, y, 8) if b < y] + [y]
        return sum(
            integrate.quad(self._integrand, a, b, epsabs=1e-15, epsrel=1e-13, limit=200)[0]
            for a, b in zip(pts[:-1], pts[1:])
        )

    def psi(self, y):
        if self.closed is not None:
            return float(self.closed(np.asarray(y, dtype=float)))
        return self.psi_numeric(y)

    def psi_inv(self, s):
        """Inverse of ``psi``; 0 for ``s <= 0`` and ``inf`` for ``s >= psi_inf``."""
        if s <= 0:
            return 0.0
        if s >= self.psi_inf:
            return math.inf
        if self.closed_inv is not None:
            return float(self.closed_inv(s))
        hi = 1.0
        while self.psi(hi) < s:
            hi *= 4.0
            if hi > 1e300:
                return math.inf
        return optimize.brentq(lambda y: self.psi(y) - s, 0.0, hi, xtol=1e-14, rtol=1e-14)


def blowup_profile(flux):
    """Return the :class:`BlowupProfile` of ``flux`` after normalization."""
    if flux.h2_params is None:
        raise UnsupportedFluxError("blow-up profile needs an (H, K) pair")
    H, K = flux.h2_params
    if flux.monotone_sign == 0:
        raise SingularityError("phi' - C_phi changes sign or vanishes")
    base = flux.normalized()
    K = K * flux.monotone_sign
    closed = inv = None
    kind = base.kind
    if kind == "power":
        p = base.params["p"]
        a = abs(p)
        closed = lambda y: -a * np.expm1((p - 1) * np.log1p(y))  # noqa: E731
        inv = lambda s: math.expm1(math.log1p(-s / a) / (p - 1))  # noqa: E731
        psi_inf = a
    elif kind == "exponential":
        al = base.params["alpha"]
        closed = lambda y: -al * np.expm1(-al * y)  # noqa: E731
        inv = lambda s: -math.log1p(-s / al) / al  # noqa: E731
        psi_inf = al
    elif kind == "logarithmic":
        closed = lambda y: y / (1 + y)  # noqa: E731
        inv = lambda s: s / (1 - s)  # noqa: E731
        psi_inf = 1.0
    else:
        psi_inf = None
    prof = BlowupProfile(base, H, K, closed, inv, psi_inf if psi_inf is not None else math.nan)
    if psi_inf is None:
        prof.psi_inf = prof.psi_numeric(math.inf)
    d0 = base.deriv(0.0)
    if d0 == 0:
        raise SingularityError("phi'(0) = 0")
    return prof
