"""Synthetic oscillatory signals and piecewise locally stationary noise.

The mean of a simulated series is a sum of sinusoidal components whose
cosine/sine amplitudes switch at given sample indices (bursts, onsets,
phase flips), plus a smooth trend evaluated on rescaled time t = i/n.
The noise is an AR(1)-type recursion whose coefficient is a piecewise
smooth function of rescaled time, so its generating mechanism drifts
slowly between abrupt break points.

Sample indices are 1-based throughout the public API: the i-th sample
carries phase omega*i and trend value f(i/n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidSpecError, UnstableModelError

# Philox context ids; keep innovation streams disjoint from the
# bootstrap multiplier streams even when both use the same user seed.
_NOISE_CONTEXT = 0x6E6F6973

DEFAULT_BURN_IN = 200


def philox_rng(seed: int, context: int) -> np.random.Generator:
    """Counter-based generator for the (seed, context) stream."""
    key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF), np.uint64(context)])
    return np.random.Generator(np.random.Philox(key=key))


def as_series(values) -> np.ndarray:
    """Validate and return a 1-D float64 sample array (n >= 4, finite)."""
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1:
        raise InvalidSpecError(f"series must be 1-D, got shape {x.shape}")
    if x.size < 4:
        raise InvalidSpecError(f"series too short: n={x.size} < 4")
    if not np.all(np.isfinite(x)):
        raise InvalidSpecError("series contains non-finite values")
    return x


@dataclass(frozen=True)
class Trend:
    """Smooth baseline f(t) on [0, 1]: zero, linear slope*t, or polynomial."""

    kind: str = "zero"
    coeffs: tuple = ()

    @classmethod
    def zero(cls) -> "Trend":
        return cls("zero")

    @classmethod
    def linear(cls, slope: float) -> "Trend":
        return cls("linear", (float(slope),))

    @classmethod
    def polynomial(cls, coeffs) -> "Trend":
        # coeffs[k] multiplies t**k
        return cls("poly", tuple(float(c) for c in coeffs))

    def __post_init__(self):
        if self.kind not in ("zero", "linear", "poly"):
            raise InvalidSpecError(f"unknown trend kind {self.kind!r}")
        if self.kind == "linear" and len(self.coeffs) != 1:
            raise InvalidSpecError("linear trend takes exactly one slope")
        if any(not math.isfinite(c) for c in self.coeffs):
            raise InvalidSpecError("trend coefficients must be finite")

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        if self.kind == "zero" or not self.coeffs:
            return np.zeros_like(t)
        if self.kind == "linear":
            return self.coeffs[0] * t
        return np.polynomial.polynomial.polyval(t, np.asarray(self.coeffs))


@dataclass(frozen=True)
class OscillatoryComponent:
    """One oscillation at angular frequency omega with segmented amplitudes.

    ``segments`` is an ordered tuple of (start_index, amp_cos, amp_sin).
    Segment r spans samples i with start[r] < i <= start[r+1]; the first
    start index must be 0 and the last segment extends to the series end.
    A component that is silent outside a burst is expressed with zero
    amplitudes on the flanking segments.
    """

    omega: float
    segments: tuple

    def __post_init__(self):
        if not (0.0 < self.omega < math.pi):
            raise InvalidSpecError(f"omega must lie in (0, pi), got {self.omega}")
        segs = tuple((int(b), float(a), float(c)) for b, a, c in self.segments)
        if not segs:
            raise InvalidSpecError("component needs at least one segment")
        if segs[0][0] != 0:
            raise InvalidSpecError("first segment must start at index 0")
        starts = [s[0] for s in segs]
        if any(b2 <= b1 for b1, b2 in zip(starts, starts[1:])):
            raise InvalidSpecError("segment start indices must be strictly increasing")
        if any(not (math.isfinite(a) and math.isfinite(c)) for _, a, c in segs):
            raise InvalidSpecError("segment amplitudes must be finite")
        object.__setattr__(self, "segments", segs)

    @classmethod
    def burst(cls, omega, start, stop, amp_cos, amp_sin=0.0) -> "OscillatoryComponent":
        """Component that oscillates only on samples start < i <= stop."""
        return cls(omega, ((0, 0.0, 0.0), (int(start), amp_cos, amp_sin), (int(stop), 0.0, 0.0)))

    @classmethod
    def tone(cls, omega, amp_cos, amp_sin=0.0) -> "OscillatoryComponent":
        """Component with constant amplitudes over the whole series."""
        return cls(omega, ((0, amp_cos, amp_sin),))


@dataclass(frozen=True)
class MeanSpec:
    """Deterministic mean: oscillatory components plus a smooth trend."""

    components: tuple = ()
    trend: Trend = field(default_factory=Trend.zero)

    def __post_init__(self):
        comps = tuple(self.components)
        omegas = [c.omega for c in comps]
        if len(set(omegas)) != len(omegas):
            raise InvalidSpecError("component frequencies must be pairwise distinct")
        object.__setattr__(self, "components", comps)


def eval_mean(spec: MeanSpec, n: int) -> np.ndarray:
    """Evaluate the mean at samples i = 1..n.

    mu_i = sum_k sum_r (A_rk cos(omega_k i) + B_rk sin(omega_k i))
           * 1{b_r < i <= b_{r+1}} + f(i/n).
    """
    n = int(n)
    if n < 4:
        raise InvalidSpecError(f"n must be >= 4, got {n}")
    i = np.arange(1, n + 1, dtype=np.float64)
    mu = spec.trend(i / n)
    for comp in spec.components:
        starts = [s[0] for s in comp.segments]
        if starts[-1] >= n:
            raise InvalidSpecError(
                f"segment start {starts[-1]} out of range for n={n}"
            )
        bounds = starts + [n]
        for r, (_, amp_cos, amp_sin) in enumerate(comp.segments):
            if amp_cos == 0.0 and amp_sin == 0.0:
                continue
            lo, hi = bounds[r], bounds[r + 1]  # samples lo < i <= hi
            phase = comp.omega * i[lo:hi]
            mu[lo:hi] += amp_cos * np.cos(phase) + amp_sin * np.sin(phase)
    return mu


def _coef_m1(t):
    return 0.5 * np.cos(t)


def _coef_m2(t):
    t = np.asarray(t, dtype=np.float64)
    return np.where(t < 0.75, 0.5 * np.cos(t), t - 0.5)


def _coef_m3(t):
    t = np.asarray(t, dtype=np.float64)
    return np.select(
        [t < 0.3, t < 0.75],
        [0.5 * np.cos(t), (t - 0.3) ** 2],
        default=0.3 * np.sin(t),
    )


def _coef_m4(t):
    return 0.6 * np.cos(t)


_BUILTIN_COEFS = {"M1": _coef_m1, "M2": _coef_m2, "M3": _coef_m3, "M4": _coef_m4}
_BUILTIN_BREAKS = {"M1": (), "M2": (0.75,), "M3": (0.3, 0.75), "M4": ()}

_EXPR_NAMES = {
    "cos": np.cos, "sin": np.sin, "tan": np.tan, "exp": np.exp,
    "log": np.log, "sqrt": np.sqrt, "abs": np.abs, "pi": math.pi,
}


def _compile_expr(expr: str):
    code = compile(expr, "<noise-coefficient>", "eval")
    for name in code.co_names:
        if name not in _EXPR_NAMES and name != "t":
            raise InvalidSpecError(f"unknown name {name!r} in coefficient expression")

    def f(t):
        return np.asarray(eval(code, {"__builtins__": {}}, {**_EXPR_NAMES, "t": t}),
                          dtype=np.float64)

    return f


@dataclass(frozen=True)
class NoiseModel:
    """AR(1)-type recursion eps_k = a(k/n) eps_{k-1} + e_k.

    The coefficient a(t) is piecewise smooth on (0, 1] with break points
    ``breaks``; piece j applies on (s_j, s_{j+1}] with s_0 = 0 and the
    last bound 1. Built-in kinds M1-M4 cover the standard benchmark
    models; ``custom`` takes per-piece closed-form expressions in t.
    Innovations are standard normal or Student-t (raw, df > 2).
    """

    kind: str = "M1"
    breaks: tuple = ()
    coef_exprs: tuple = ()
    innovation: str = "standard_normal"
    df: float = 5.0

    def __post_init__(self):
        if self.kind in _BUILTIN_COEFS:
            object.__setattr__(self, "breaks", _BUILTIN_BREAKS[self.kind])
        elif self.kind == "custom":
            br = tuple(float(s) for s in self.breaks)
            if any(not (0.0 < s < 1.0) for s in br):
                raise InvalidSpecError("break points must lie strictly inside (0, 1)")
            if any(s2 <= s1 for s1, s2 in zip(br, br[1:])):
                raise InvalidSpecError("break points must be strictly increasing")
            if len(self.coef_exprs) != len(br) + 1:
                raise InvalidSpecError(
                    f"need {len(br) + 1} coefficient expressions for {len(br)} breaks"
                )
            object.__setattr__(self, "breaks", br)
            object.__setattr__(self, "coef_exprs", tuple(self.coef_exprs))
        else:
            raise InvalidSpecError(f"unknown noise kind {self.kind!r}")
        if self.innovation == "student_t":
            if not self.df > 2:
                raise InvalidSpecError("student_t innovations need df > 2")
        elif self.innovation != "standard_normal":
            raise InvalidSpecError(f"unknown innovation law {self.innovation!r}")

    @classmethod
    def m1(cls):
        return cls("M1")

    @classmethod
    def m2(cls):
        return cls("M2")

    @classmethod
    def m3(cls):
        return cls("M3")

    @classmethod
    def m4(cls):
        return cls("M4", innovation="student_t", df=5.0)

    @classmethod
    def named(cls, name: str) -> "NoiseModel":
        try:
            return {"M1": cls.m1, "M2": cls.m2, "M3": cls.m3, "M4": cls.m4}[name.upper()]()
        except KeyError:
            raise InvalidSpecError(f"unknown noise model {name!r}") from None

    @classmethod
    def custom(cls, breaks, coef_exprs, innovation="standard_normal", df=5.0):
        return cls("custom", tuple(breaks), tuple(coef_exprs), innovation, df)

    def coefficient(self, t) -> np.ndarray:
        """Evaluate a(t) elementwise on (0, 1]."""
        t = np.asarray(t, dtype=np.float64)
        if self.kind in _BUILTIN_COEFS:
            return np.asarray(_BUILTIN_COEFS[self.kind](t), dtype=np.float64)
        funcs = [_compile_expr(e) for e in self.coef_exprs]
        bounds = (0.0,) + self.breaks + (1.0,)
        out = np.empty_like(t, dtype=np.float64)
        for j, f in enumerate(funcs):
            piece = (bounds[j] < t) & (t <= bounds[j + 1]) if j else (t <= bounds[1])
            if np.any(piece):
                out[piece] = f(t[piece])
        return out

    def stability_margin(self, probe_points: int = 4096) -> float:
        """sup |a(t)| probed on a uniform grid of (0, 1]."""
        t = np.linspace(0.0, 1.0, probe_points + 1)[1:]
        return float(np.max(np.abs(self.coefficient(t))))


def simulate_noise(model: NoiseModel, n: int, seed: int,
                   burn_in: int = DEFAULT_BURN_IN, innovations=None) -> np.ndarray:
    """Simulate eps_1..eps_n from the time-varying AR recursion.

    The state starts at 0 and runs ``burn_in`` warm-up steps with the
    coefficient frozen at t = 1/n before the n recorded samples; the
    warm-up output is discarded. Identical (model, n, seed, burn_in)
    give bit-identical output. ``innovations`` overrides the RNG with
    an explicit array of length burn_in + n (testing hook).
    """
    n = int(n)
    if n < 4:
        raise InvalidSpecError(f"n must be >= 4, got {n}")
    if model.stability_margin() >= 1.0:
        raise UnstableModelError("sup |a(t)| >= 1; recursion would be unstable")
    total = burn_in + n
    if innovations is not None:
        e = np.asarray(innovations, dtype=np.float64)
        if e.shape != (total,):
            raise InvalidSpecError(
                f"innovations must have shape ({total},), got {e.shape}"
            )
    else:
        rng = philox_rng(seed, _NOISE_CONTEXT)
        if model.innovation == "student_t":
            e = rng.standard_t(model.df, size=total)
        else:
            e = rng.standard_normal(total)
    coef = np.empty(total)
    coef[:burn_in] = model.coefficient(1.0 / n)
    coef[burn_in:] = model.coefficient(np.arange(1, n + 1) / n)
    eps = 0.0
    out = np.empty(total)
    for k in range(total):
        eps = coef[k] * eps + e[k]
        out[k] = eps
    return out[burn_in:]


def simulate_series(mean: MeanSpec, noise: NoiseModel, n: int, seed: int,
                    burn_in: int = DEFAULT_BURN_IN, innovations=None) -> np.ndarray:
    """Mean plus simulated noise, elementwise."""
    return eval_mean(mean, n) + simulate_noise(noise, n, seed, burn_in, innovations)
