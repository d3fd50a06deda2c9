"""Exceptional weights of the Laplacian on cones and Fredholm bookkeeping.

A rate gamma is exceptional for an end with link spectrum {e_n} when the cone
carries a harmonic function r^gamma sigma(theta), which happens exactly when
gamma (gamma + m - 2) = e_n for some link eigenvalue e_n.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

from .errors import (
    CompletenessWarning,
    CutoffInsufficientError,
    ExceptionalRateError,
    InvalidInputError,
)
from .spectra import Spectrum

DEFAULT_TOL = 1e-9
MESH_TOL = 1e-6

CASES = ("compact", "AC", "CS", "CSAC")


@dataclass(frozen=True)
class ConeEnd:
    """One end of a conifold.

    ``rate`` is the geometric convergence rate (mu for CS, lambda for AC) and
    may be left out when only the asymptotic cone matters.
    """

    kind: str
    spectrum: Spectrum
    rate: float | None = None
    sym_dim: int | None = None

    def __post_init__(self):
        if self.kind not in ("CS", "AC"):
            raise InvalidInputError(f"end kind must be 'CS' or 'AC', got {self.kind!r}")
        if self.rate is not None:
            if self.kind == "CS" and not self.rate > 2:
                raise InvalidInputError(f"CS rate must exceed 2, got {self.rate}")
            if self.kind == "AC" and not self.rate < 2:
                raise InvalidInputError(f"AC rate must be below 2, got {self.rate}")
        if self.sym_dim is not None and self.sym_dim < 0:
            raise InvalidInputError(f"sym_dim must be nonnegative, got {self.sym_dim}")

    def check_sym_dim(self, m: int) -> None:
        if self.sym_dim is not None and self.sym_dim > m * m - 1:
            raise InvalidInputError(
                f"symmetry group of dimension {self.sym_dim} does not fit in SU({m})"
            )


@dataclass(frozen=True)
class Window:
    lo: float
    hi: float
    include_lo: bool = True
    include_hi: bool = True

    @classmethod
    def coerce(cls, w) -> "Window":
        if isinstance(w, Window):
            return w
        lo, hi = w
        return cls(float(lo), float(hi))

    @classmethod
    def open(cls, lo, hi) -> "Window":
        return cls(float(lo), float(hi), False, False)

    def __contains__(self, g: float) -> bool:
        above = g >= self.lo if self.include_lo else g > self.lo
        below = g <= self.hi if self.include_hi else g < self.hi
        return above and below

    def covers(self, g: float) -> bool:
        return self.lo <= g <= self.hi

    def required_cutoff(self, m: int) -> float:
        """Largest link eigenvalue whose roots can land in the window."""
        return max(0.0, self.lo * (self.lo + m - 2), self.hi * (self.hi + m - 2))


def _check_m(m: int) -> None:
    if int(m) != m or m < 3:
        raise InvalidInputError(f"ambient dimension must be an integer >= 3, got {m}")


def roots_for_eigenvalue(e: float, m: int) -> tuple[float, float]:
    """Both rates gamma with gamma (gamma + m - 2) = e, largest first."""
    _check_m(m)
    if not e >= 0:
        raise InvalidInputError(f"eigenvalue must be nonnegative, got {e}")
    disc = math.sqrt((2 - m) ** 2 + 4 * e)
    return ((2 - m) + disc) / 2, ((2 - m) - disc) / 2


def eigenvalue_for_rate(gamma: float, m: int) -> float:
    return gamma * (gamma + m - 2)


@dataclass(frozen=True)
class ExceptionalWeightSet:
    per_end: tuple[tuple[tuple[float, int], ...], ...]
    window: Window
    complete: tuple[bool, ...]
    m: int
    cutoffs: tuple[float, ...] = ()

    @property
    def all_complete(self) -> bool:
        return all(self.complete)

    def weights(self, j: int) -> tuple[float, ...]:
        return tuple(g for g, _ in self.per_end[j])

    def multiplicity(self, j: int, gamma: float, tol: float = DEFAULT_TOL) -> int:
        for g, k in self.per_end[j]:
            if abs(g - gamma) <= tol * max(1.0, abs(gamma)):
                return k
        return 0

    def between(self, j: int, lo: float, hi: float, include_lo=False, include_hi=False) -> int:
        """Total multiplicity of end j's exceptional weights between lo and hi."""
        w = Window(lo, hi, include_lo, include_hi)
        return sum(k for g, k in self.per_end[j] if g in w)


def _spectrum_of(end) -> Spectrum:
    return end.spectrum if isinstance(end, ConeEnd) else end


def exceptional_set(ends: Sequence, m: int, window, strict: bool = False) -> ExceptionalWeightSet:
    """Exceptional weights of every end that fall inside ``window``.

    With ``strict`` an end whose spectrum cutoff cannot certify the window
    raises; otherwise the end is marked incomplete and a warning is issued.
    """
    _check_m(m)
    window = Window.coerce(window)
    need = window.required_cutoff(m)
    per_end, complete, cutoffs = [], [], []
    for j, end in enumerate(ends):
        spec = _spectrum_of(end)
        found = []
        for e, k in spec.entries:
            for g in roots_for_eigenvalue(e, m):
                if g in window:
                    found.append((g, k))
        found.sort()
        ok = spec.cutoff >= need
        if not ok:
            msg = (
                f"end {j}: spectrum cutoff {spec.cutoff:g} is below {need:g}, "
                f"needed to certify weights in [{window.lo:g}, {window.hi:g}]"
            )
            if strict:
                raise CutoffInsufficientError(msg)
            warnings.warn(msg, CompletenessWarning, stacklevel=2)
        per_end.append(tuple(found))
        complete.append(ok)
        cutoffs.append(spec.cutoff)
    return ExceptionalWeightSet(tuple(per_end), window, tuple(complete), m, tuple(cutoffs))


def _require_cover(ws: ExceptionalWeightSet, j: int, g: float) -> None:
    if not ws.window.covers(g):
        raise CutoffInsufficientError(
            f"rate {g} on end {j} lies outside the computed window "
            f"[{ws.window.lo:g}, {ws.window.hi:g}]"
        )


def total_multiplicity(ws: ExceptionalWeightSet, gamma, tol: float = DEFAULT_TOL) -> int:
    """m(gamma) = sum over ends of dim of the homogeneous harmonic functions of rate gamma_j."""
    gamma = list(gamma)
    if len(gamma) != len(ws.per_end):
        raise InvalidInputError(f"expected {len(ws.per_end)} rates, got {len(gamma)}")
    total = 0
    for j, g in enumerate(gamma):
        _require_cover(ws, j, g)
        total += ws.multiplicity(j, g, tol)
    return total


@dataclass(frozen=True)
class NearestWeight:
    gamma: float | None
    distance: float


@dataclass(frozen=True)
class ExceptionalCheck:
    exceptional: bool
    nearest: tuple[NearestWeight, ...]

    def __bool__(self):
        return self.exceptional


def is_exceptional(ws: ExceptionalWeightSet, rates, tol: float = DEFAULT_TOL) -> ExceptionalCheck:
    rates = list(rates)
    if len(rates) != len(ws.per_end):
        raise InvalidInputError(f"expected {len(ws.per_end)} rates, got {len(rates)}")
    nearest = []
    hit = False
    for j, r in enumerate(rates):
        _require_cover(ws, j, r)
        best = NearestWeight(None, math.inf)
        for g in ws.weights(j):
            d = abs(g - r)
            # ties go to the larger weight; weights are sorted ascending
            if d <= best.distance:
                best = NearestWeight(g, d)
        nearest.append(best)
        if best.distance <= tol:
            hit = True
    return ExceptionalCheck(hit, tuple(nearest))


@dataclass(frozen=True)
class FredholmData:
    ker_dim: int
    coker_dim: int
    case: str

    @property
    def index(self) -> int:
        return self.ker_dim - self.coker_dim


def _split_ends(ends):
    cs = [j for j, e in enumerate(ends) if e.kind == "CS"]
    ac = [j for j, e in enumerate(ends) if e.kind == "AC"]
    return cs, ac


def rate_window(m: int, rates) -> Window:
    """Smallest closed window holding the reference band [2-m, 0] and every rate."""
    rates = list(rates)
    return Window(min([2 - m] + rates), max([0.0] + rates))


def guard_non_exceptional(ws, rates, tol):
    check = is_exceptional(ws, rates, tol)
    if check:
        bad = [
            (j, r, n.gamma) for j, (r, n) in enumerate(zip(rates, check.nearest))
            if n.distance <= tol
        ]
        j, r, g = bad[0]
        raise ExceptionalRateError(f"rate {r} on end {j} is the exceptional weight {g}")


def fredholm_data(
    case: str,
    m: int,
    ends: Sequence[ConeEnd] = (),
    rates: Sequence[float] = (),
    tol: float = DEFAULT_TOL,
    strict: bool = True,
) -> FredholmData:
    """Kernel and cokernel dimensions of the weighted Laplacian.

    Implements the closed forms available for compact, AC, CS and CS/AC
    conifolds. AC rates below 2-m and CS/AC rates with lambda < 2-m use the
    same injectivity statement, with the cokernel extended by the weights
    crossed below 2-m.
    """
    _check_m(m)
    if case not in CASES:
        raise InvalidInputError(f"unknown case {case!r}")
    ends = list(ends)
    rates = [float(r) for r in rates]
    if case == "compact":
        if ends or rates:
            raise InvalidInputError("the compact case has no ends")
        return FredholmData(1, 1, case)
    if not ends:
        raise InvalidInputError(f"case {case} needs at least one end")
    if len(rates) != len(ends):
        raise InvalidInputError(f"expected {len(ends)} rates, got {len(rates)}")
    cs, ac = _split_ends(ends)
    if (case == "AC" and cs) or (case == "CS" and ac) or (case == "CSAC" and not (cs and ac)):
        raise InvalidInputError(f"end kinds {[e.kind for e in ends]} do not match case {case}")

    ws = exceptional_set(ends, m, rate_window(m, rates), strict=strict)
    guard_non_exceptional(ws, rates, tol)
    band = Window.open(2 - m, 0)

    def below_band(j):
        # weights in (rate_j, 2-m]
        return ws.between(j, rates[j], 2 - m, include_hi=True)

    if case == "AC":
        if all(r > 2 - m for r in rates):
            ker = sum(ws.between(j, 2 - m, rates[j]) for j in ac)
            return FredholmData(ker, 0, case)
        if all(r < 0 for r in rates):
            return FredholmData(0, sum(below_band(j) for j in ac), case)
        raise InvalidInputError("AC rates straddle the band (2-m, 0) in both directions")

    if case == "CS":
        if all(r in band for r in rates):
            return FredholmData(1, 1, case)
        if all(r > 0 for r in rates):
            coker = len(cs) + sum(ws.between(j, 0, rates[j]) for j in cs)
            return FredholmData(0, coker, case)
        raise InvalidInputError("CS rates must all lie in (2-m, 0) or all be positive")

    mu = [rates[j] for j in cs]
    lam = [rates[j] for j in ac]
    if all(r in band for r in rates):
        return FredholmData(0, 0, case)
    if all(r > 0 for r in mu) and all(r < 0 for r in lam):
        coker = len(cs) + sum(ws.between(j, 0, rates[j]) for j in cs)
        coker += sum(below_band(j) for j in ac)
        return FredholmData(0, coker, case)
    raise InvalidInputError(
        "kernel and cokernel are only determined for (mu, lambda) in (2-m, 0) "
        "or mu > 0 > lambda; use index_jump for other rates"
    )


def index_jump(
    ends: Sequence[ConeEnd],
    m: int,
    rate_from: Sequence[float],
    rate_to: Sequence[float],
    tol: float = DEFAULT_TOL,
    strict: bool = True,
) -> int:
    """Change of Fredholm index when the rate moves from ``rate_from`` to ``rate_to``.

    Each exceptional weight crossed upward adds its multiplicity on an AC end
    and subtracts it on a CS end; downward crossings reverse the sign.
    """
    _check_m(m)
    ends = list(ends)
    a = [float(r) for r in rate_from]
    b = [float(r) for r in rate_to]
    if not (len(a) == len(b) == len(ends)):
        raise InvalidInputError("rate vectors must have one entry per end")
    ws = exceptional_set(ends, m, Window(min(a + b), max(a + b)), strict=strict)
    guard_non_exceptional(ws, a, tol)
    guard_non_exceptional(ws, b, tol)
    jump = 0
    for j, end in enumerate(ends):
        lo, hi = sorted((a[j], b[j]))
        crossed = ws.between(j, lo, hi)
        sign = 1 if b[j] >= a[j] else -1
        jump += sign * crossed if end.kind == "AC" else -sign * crossed
    return jump


def stable_rate_ceiling(spectrum: Spectrum, m: int) -> tuple[float | None, float]:
    """Smallest exceptional weight strictly above 2 and the largest rate the cutoff certifies.

    Returns ``(gamma, certified)``; ``gamma`` is None when no such weight lies
    below the spectrum cutoff.
    """
    _check_m(m)
    certified = roots_for_eigenvalue(spectrum.cutoff, m)[0]
    above = [roots_for_eigenvalue(e, m)[0] for e, _ in spectrum.entries]
    above = [g for g in above if g > 2]
    return (min(above) if above else None), certified
