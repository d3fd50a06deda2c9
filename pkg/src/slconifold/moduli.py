"""Stability of special Lagrangian cones and expected dimensions of moduli spaces.

The dimension of the parameter space I is always reported as a list of named
additive terms, so that every contribution (topological blocks, harmonic
functions on AC ends, the quotient by constants) can be audited.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from . import weights as W
from .errors import (
    CrossCheckError,
    CutoffInsufficientError,
    InvalidInputError,
    StabilityViolationError,
)
from .spectra import Spectrum
from .topology import (
    ConifoldTopology,
    decomposition_block_dims,
    require_consistent,
    tilde_h0bullet_dim,
    tilde_hc1_dim,
)


@dataclass(frozen=True)
class ConeData:
    """Asymptotic cone at a singular point: its link spectrum and symmetry group dimension."""

    spectrum: Spectrum
    m: int
    sym_dim: int = 0
    link_is_sphere: bool | None = None
    link_b0: int = 1

    def __post_init__(self):
        if self.link_is_sphere is None:
            object.__setattr__(self, "link_is_sphere", self.spectrum.source == "sphere")
        if self.m < 3:
            raise InvalidInputError(f"ambient dimension must be >= 3, got {self.m}")
        if self.link_b0 != 1:
            raise InvalidInputError("cone links must be connected")
        if not 0 <= self.sym_dim <= self.m**2 - 1:
            raise InvalidInputError(
                f"symmetry group dimension {self.sym_dim} does not fit in SU({self.m})"
            )

    def end(self, rate: float | None = None) -> W.ConeEnd:
        return W.ConeEnd("CS", self.spectrum, rate, self.sym_dim)


def expected_stable_multiplicities(m: int, sym_dim: int) -> dict[int, int]:
    """Harmonic functions every SL cone carries: constants, translations, rotations."""
    if m < 3:
        raise InvalidInputError(f"ambient dimension must be >= 3, got {m}")
    if not 0 <= sym_dim <= m * m - 1:
        raise InvalidInputError(f"symmetry group dimension {sym_dim} does not fit in SU({m})")
    return {0: 1, 1: 2 * m, 2: m * m - 1 - sym_dim}


@dataclass(frozen=True)
class StabilityVerdict:
    stable: bool
    found: dict
    expected: dict
    extra_weights: tuple[tuple[float, int], ...]
    flags: dict

    def as_dict(self) -> dict:
        return {
            "stable": self.stable,
            "found": {str(k): v for k, v in self.found.items()},
            "expected": {str(k): v for k, v in self.expected.items()},
            "extra_weights": [[g, k] for g, k in self.extra_weights],
            "flags": {str(k): v for k, v in self.flags.items()},
        }


def stability_check(cone: ConeData, tol: float = W.DEFAULT_TOL) -> StabilityVerdict:
    m = cone.m
    if cone.link_is_sphere:
        raise InvalidInputError("the link is a round sphere: the cone is a plane, not singular")
    if cone.spectrum.cutoff < 2 * m:
        raise CutoffInsufficientError(
            f"stability needs the link spectrum up to 2m = {2 * m}, cutoff is {cone.spectrum.cutoff:g}"
        )
    ws = W.exceptional_set([cone.spectrum], m, (0.0, 2.0), strict=True)
    expected = expected_stable_multiplicities(m, cone.sym_dim)
    found = {g: ws.multiplicity(0, g, tol) for g in expected}
    extra = tuple(
        (g, k) for g, k in ws.per_end[0] if all(abs(g - x) > tol for x in expected)
    )
    flags = {}
    for g in expected:
        if found[g] == expected[g]:
            flags[g] = "ok"
        else:
            flags[g] = "deficit" if found[g] < expected[g] else "excess"
    stable = all(f == "ok" for f in flags.values()) and not extra
    return StabilityVerdict(stable, found, expected, extra, flags)


def slice_dim(m: int, sym_dim: int) -> int:
    """Dimension of a slice to the symmetry orbits in C^m x SU(m)."""
    return m * m + 2 * m - 1 - sym_dim


def lagrangian_slice_dim(m: int, sym_dim: int) -> int:
    """Same slice taken in C^m x U(m), before reducing to SU(m)."""
    return m * m + 2 * m - sym_dim


def obstruction_dim_stable(cones: Sequence[ConeData], tol: float = W.DEFAULT_TOL) -> int:
    """Number of cokernel directions the moving singularities must absorb."""
    d = 0
    for i, cone in enumerate(cones):
        if not stability_check(cone, tol).stable:
            raise StabilityViolationError(f"cone {i} is not stable")
        d += 1 + 2 * cone.m + cone.m**2 - 1 - cone.sym_dim
    return d


def _matched_dim(cones: Sequence[ConeData]) -> int:
    return sum(slice_dim(c.m, c.sym_dim) + 1 for c in cones)


@dataclass(frozen=True)
class RateCeiling:
    next_weight: float | None
    certified: float

    def admits(self, mu: float) -> bool:
        limit = self.next_weight if self.next_weight is not None else self.certified
        if self.next_weight is None:
            return 2 < mu <= limit
        return 2 < mu < limit


def rate_ceiling(cone: ConeData) -> RateCeiling:
    g, cert = W.stable_rate_ceiling(cone.spectrum, cone.m)
    return RateCeiling(g, cert)


@dataclass(frozen=True)
class Term:
    name: str
    value: int
    meaning: str


@dataclass
class ModuliReport:
    case: str
    rate_regime: str
    dim_I: int
    dim_O: int
    breakdown: list[Term]
    dim_O_is_bound: bool = False
    stability_required: bool = False
    stability_verdicts: list[StabilityVerdict] = field(default_factory=list)
    smooth: bool = True
    mu: tuple[float, ...] = ()
    lam: tuple[float, ...] = ()
    epsilon_max: tuple[float | None, ...] = ()
    notes: list[str] = field(default_factory=list)

    def breakdown_total(self) -> int:
        return sum(t.value for t in self.breakdown)

    def term(self, name: str) -> int:
        for t in self.breakdown:
            if t.name == name:
                return t.value
        raise KeyError(name)


NOT_SMOOTH = "zero set of a map I -> O; smoothness not guaranteed"


def moduli_dim_compact(b1: int) -> ModuliReport:
    if b1 < 0:
        raise InvalidInputError("b1 must be nonnegative")
    return ModuliReport(
        "Compact", "none", b1, 0, [Term("H1", b1, "harmonic 1-forms, H^1(L)")]
    )


def _regime(m: int, lam: Sequence[float]) -> str:
    band = W.Window.open(2 - m, 0)
    if all(x in band for x in lam):
        return "decay"
    if all(0 < x < 2 for x in lam):
        return "growth"
    raise InvalidInputError(
        f"AC rates {list(lam)} must all lie in (2-m, 0) = ({2 - m}, 0) or all in (0, 2)"
    )


def _reference_lambda(m: int) -> float:
    """A rate inside (2-m, 0); (3-m)/2 when that is not the weight 0, else the band midpoint."""
    ref = (3 - m) / 2
    return ref if 2 - m < ref < 0 else (2 - m) / 2


def _ac_harmonic_count(ac_ends, m, lam, strict, tol) -> list[int]:
    """d_i: harmonic functions r^gamma sigma on AC end i with gamma in [0, lambda_i]."""
    ws = W.exceptional_set(ac_ends, m, (0.0, max(lam)), strict=strict)
    W.guard_non_exceptional(ws, lam, tol)
    return [ws.between(i, 0.0, lam[i], include_lo=True, include_hi=True) for i in range(len(lam))]


def _decay_terms(top: ConifoldTopology) -> list[Term]:
    return [
        Term("h_tilde_block", tilde_hc1_dim(top.b1_c, top.e), "Im(H^1_c(L) -> H^1(L))"),
        Term("e_block", top.l - 1, "d(E'), locally constant functions on AC ends mod E_0 + R"),
    ]


def _growth_terms(top: ConifoldTopology, d: Sequence[int]) -> list[Term]:
    if top.s:
        if top.b1_c_bullet is None:
            raise InvalidInputError("lambda in (0, 2) needs b1_c_bullet")
        h = Term(
            "h_tilde_block",
            tilde_h0bullet_dim(top.b1_c_bullet, top.s),
            "Im(H^1_c,bullet(L) -> H^1(L)) = Ker(H^1(L) -> H^1(Sigma_0))",
        )
    else:
        h = Term("h_tilde_block", top.b1, "H^1(L); no singularities to restrict to")
    return [
        h,
        Term("index_block", sum(d), "harmonic r^gamma sigma on AC ends, gamma in [0, lambda_i]"),
        Term("e_block", -1, "translations by constants act trivially"),
    ]


def _check_ac(ac_ends, top, m):
    if top.m != m:
        raise InvalidInputError(f"topology has m = {top.m}, expected {m}")
    for e in ac_ends:
        if e.kind != "AC":
            raise InvalidInputError("expected AC ends")


def moduli_dim_AC(
    top: ConifoldTopology,
    ends: Sequence[W.ConeEnd],
    lam: Sequence[float],
    tol: float = W.DEFAULT_TOL,
    strict: bool = True,
) -> ModuliReport:
    m = top.m
    ends, lam = list(ends), [float(x) for x in lam]
    _check_ac(ends, top, m)
    if top.s != 0 or top.l != len(ends) or len(lam) != len(ends) or not ends:
        raise InvalidInputError("AC case needs one rate per AC end and s = 0")
    require_consistent(top)
    regime = _regime(m, lam)
    if regime == "decay":
        terms = _decay_terms(top)
        if sum(t.value for t in terms) != top.b1_c:
            raise CrossCheckError("AC decay blocks do not add up to b1_c")
    else:
        fd = W.fredholm_data("AC", m, ends, lam, tol=tol, strict=strict)
        terms = [
            Term("h_tilde_block", top.b1, "H^1(L); no singularities to restrict to"),
            Term("index_block", fd.ker_dim, "kernel of the weighted Laplacian"),
            Term("e_block", -1, "translations by constants act trivially"),
        ]
    dim = sum(t.value for t in terms)
    return ModuliReport("AC", regime, dim, 0, terms, lam=tuple(lam))


def _verdicts(cones, tol, require_stable, mu):
    verdicts, ceilings, in_regime = [], [], True
    for i, (cone, x) in enumerate(zip(cones, mu)):
        v = stability_check(cone, tol)
        c = rate_ceiling(cone)
        verdicts.append(v)
        ceilings.append(None if c.next_weight is None else c.next_weight - 2)
        ok = c.admits(x)
        in_regime &= ok
        if require_stable:
            if not v.stable:
                raise StabilityViolationError(
                    f"cone {i} is unstable: flags {v.flags}, extra weights {list(v.extra_weights)}"
                )
            if not ok:
                if c.next_weight is None and x > c.certified:
                    raise CutoffInsufficientError(
                        f"cone {i}: spectrum cutoff only certifies rates up to {c.certified:.6g}, "
                        f"mu = {x}"
                    )
                raise StabilityViolationError(
                    f"cone {i}: mu = {x} is outside the 2 + epsilon range "
                    f"(2, {c.next_weight if c.next_weight is not None else c.certified:.6g})"
                )
    stable = all(v.stable for v in verdicts) and in_regime
    return verdicts, tuple(ceilings), stable


def _check_cones(cones, m):
    for c in cones:
        if c.m != m:
            raise InvalidInputError(f"cone has m = {c.m}, topology has m = {m}")


def moduli_dim_CS(
    top: ConifoldTopology,
    cones: Sequence[ConeData],
    mu: Sequence[float],
    require_stable: bool = True,
    tol: float = W.DEFAULT_TOL,
    strict: bool = True,
) -> ModuliReport:
    m = top.m
    cones, mu = list(cones), [float(x) for x in mu]
    _check_cones(cones, m)
    if top.l != 0 or top.s != len(cones) or len(mu) != len(cones) or not cones:
        raise InvalidInputError("CS case needs one rate per CS cone and l = 0")
    require_consistent(top)
    ends = [c.end(x) for c, x in zip(cones, mu)]
    fd = W.fredholm_data("CS", m, ends, mu, tol=tol, strict=strict)
    verdicts, eps, stable = _verdicts(cones, tol, require_stable, mu)
    terms = [Term("ker_rho", tilde_hc1_dim(top.b1_c, top.s), "Ker(H^1(L) -> H^1(Sigma_0))")]
    # range restricted to mean-zero functions; T E~ and d(E_0) absorb the rest
    unmatched = fd.coker_dim - 1 - sum(slice_dim(c.m, c.sym_dim) for c in cones) - (top.s - 1)
    report = ModuliReport(
        "CS", "mu=2+eps" if stable else "general", terms[0].value, 0, terms,
        stability_required=require_stable, stability_verdicts=verdicts, mu=tuple(mu),
        epsilon_max=eps,
    )
    if stable:
        if unmatched != 0:
            raise CrossCheckError(f"stable CS scenario leaves {unmatched} unmatched cokernel directions")
    else:
        report.dim_O = max(0, unmatched)
        report.dim_O_is_bound = True
        report.smooth = report.dim_O == 0
        report.notes.append(NOT_SMOOTH)
    return report


def moduli_dim_CSAC(
    top: ConifoldTopology,
    cs_cones: Sequence[ConeData],
    ac_ends: Sequence[W.ConeEnd],
    mu: Sequence[float],
    lam: Sequence[float],
    require_stable: bool = True,
    tol: float = W.DEFAULT_TOL,
    strict: bool = True,
) -> ModuliReport:
    m = top.m
    cs_cones, ac_ends = list(cs_cones), list(ac_ends)
    mu, lam = [float(x) for x in mu], [float(x) for x in lam]
    _check_cones(cs_cones, m)
    _check_ac(ac_ends, top, m)
    if top.s != len(cs_cones) or top.l != len(ac_ends) or not ac_ends:
        raise InvalidInputError("topology end counts do not match the cones and AC ends given")
    if len(mu) != len(cs_cones) or len(lam) != len(ac_ends):
        raise InvalidInputError("need one rate per end")
    require_consistent(top)
    regime = _regime(m, lam)
    ends = [c.end(x) for c, x in zip(cs_cones, mu)] + ac_ends
    lam_ref = [_reference_lambda(m)] * len(lam)

    if cs_cones:
        all_rates = mu + lam
        check_ws = W.exceptional_set(ends, m, W.rate_window(m, all_rates), strict=strict)
        W.guard_non_exceptional(check_ws, all_rates, tol)
        verdicts, eps, stable = _verdicts(cs_cones, tol, require_stable, mu)
    else:
        verdicts, eps, stable = [], (), True

    if regime == "decay":
        terms = _decay_terms(top)
    else:
        d = _ac_harmonic_count(ac_ends, m, lam, strict, tol)
        terms = _growth_terms(top, d)
    dim = sum(t.value for t in terms)
    report = ModuliReport(
        "CSAC", regime if not cs_cones else f"{regime}, {'mu=2+eps' if stable else 'general'}",
        dim, 0, terms, stability_required=require_stable, stability_verdicts=verdicts,
        mu=tuple(mu), lam=tuple(lam), epsilon_max=eps,
    )
    if not cs_cones:
        return report

    matched = _matched_dim(cs_cones)
    if regime == "decay":
        # the restricted linearization is injective, so the obstruction space is exactly the excess
        fd = W.fredholm_data("CSAC", m, ends, mu + lam, tol=tol, strict=strict)
        excess = fd.coker_dim - matched
        report.dim_O = max(0, excess)
        if excess < 0:
            report.notes.append(
                f"link spectra carry {-excess} fewer harmonic functions than an SL cone must"
            )
    else:
        fd = W.fredholm_data("CSAC", m, ends, mu + lam_ref, tol=tol, strict=strict)
        report.dim_O = max(0, fd.coker_dim - matched)
        report.dim_O_is_bound = not stable
    if stable and report.dim_O != 0:
        raise CrossCheckError("stable scenario produced a nonzero obstruction space")
    report.smooth = stable or (report.dim_O == 0 and not report.dim_O_is_bound)
    if not stable:
        report.notes.append(NOT_SMOOTH)
    return report


def cross_check(
    report: ModuliReport,
    top: ConifoldTopology,
    cs_cones: Sequence[ConeData] = (),
    ac_ends: Sequence[W.ConeEnd] = (),
    tol: float = W.DEFAULT_TOL,
    strict: bool = True,
) -> list[str]:
    """Re-derive the report's dimensions along independent routes.

    Returns the list of identities verified; raises CrossCheckError on the
    first mismatch.
    """
    done = []

    def verify(label, lhs, rhs):
        if lhs != rhs:
            raise CrossCheckError(f"{label}: {lhs} != {rhs}")
        done.append(f"{label}: {lhs} == {rhs}")

    verify("dim_I equals the sum of its breakdown", report.dim_I, report.breakdown_total())
    if report.case == "Compact":
        return done

    m = top.m
    cs_cones, ac_ends = list(cs_cones), list(ac_ends)
    mu, lam = list(report.mu), list(report.lam)

    decay = report.case in ("AC", "CSAC") and report.rate_regime.startswith("decay")
    growth = report.case in ("AC", "CSAC") and report.rate_regime.startswith("growth")

    if decay:
        verify(
            "H~ block equals b1_c - e + 1",
            report.term("h_tilde_block"),
            tilde_hc1_dim(top.b1_c, top.e),
        )
        verify("H~ block + E' block equals b1_c - s", report.dim_I, top.b1_c - top.s)
        if top.s and top.l:
            blocks = decomposition_block_dims(top, "CSAC_mixed")
            verify("Ker(H^1_bullet,c -> H^1(Sigma_0)) block", report.dim_I, blocks.dim_ker_rho)

    if growth:
        ends = [c.end(x) for c, x in zip(cs_cones, mu)] + ac_ends
        ref = [_reference_lambda(m)] * len(lam)
        jump = W.index_jump(ends, m, mu + ref, mu + lam, tol=tol, strict=strict)
        base = tilde_h0bullet_dim(top.b1_c_bullet, top.s) if top.s else top.b1
        verify("dim_I equals Ker-block + index jump - 1", report.dim_I, base + jump - 1)
        if report.case == "AC":
            fd = W.fredholm_data("AC", m, ac_ends, lam, tol=tol, strict=strict)
            verify("kernel dimension equals index jump from the band", fd.ker_dim, jump)

    if report.case == "CS":
        verify("Ker(rho) block equals b1_c - s + 1", report.dim_I, tilde_hc1_dim(top.b1_c, top.s))

    stable_cs = cs_cones and "mu=2+eps" in report.rate_regime
    if stable_cs:
        d = obstruction_dim_stable(cs_cones, tol)
        verify("d equals dim(T E~ + E_0)", d, _matched_dim(cs_cones))
        if report.case == "CS":
            ends = [c.end(x) for c, x in zip(cs_cones, mu)]
            fd = W.fredholm_data("CS", m, ends, mu, tol=tol, strict=strict)
        else:
            ends = [c.end(x) for c, x in zip(cs_cones, mu)] + ac_ends
            ref = [_reference_lambda(m)] * len(lam)
            fd = W.fredholm_data("CSAC", m, ends, mu + ref, tol=tol, strict=strict)
        verify("d equals the cokernel dimension at mu = 2 + eps, lambda < 0", d, fd.coker_dim)
        verify("obstruction space vanishes", report.dim_O, 0)
    return done
