"""Cohomological dimension counts for manifolds with ends.

Betti numbers are inputs. This module derives the dimensions of the spaces
that appear in the closed 1-form decompositions and polices the rank bounds
forced by the long exact sequences of the pairs (L, Sigma) and (L, Sigma_0).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InconsistentTopologyError, InvalidInputError

BLOCK_CASES = ("compact", "AC_decay", "AC_growth", "CS_growth", "CSAC_mixed", "CSAC_growth")


@dataclass(frozen=True)
class ConifoldTopology:
    m: int
    s: int = 0
    l: int = 0
    b1: int = 0
    b1_c: int = 0
    b1_c_bullet: int | None = None
    link_b1: tuple[int, ...] = ()
    connected: bool = True

    def __post_init__(self):
        object.__setattr__(self, "link_b1", tuple(int(b) for b in self.link_b1))
        for name in ("s", "l", "b1", "b1_c"):
            if getattr(self, name) < 0:
                raise InvalidInputError(f"{name} must be nonnegative")
        if self.b1_c_bullet is not None and self.b1_c_bullet < 0:
            raise InvalidInputError("b1_c_bullet must be nonnegative")
        if self.m < 3:
            raise InvalidInputError(f"ambient dimension must be >= 3, got {self.m}")

    @property
    def e(self) -> int:
        return self.s + self.l

    @property
    def is_compact(self) -> bool:
        return self.e == 0


def tilde_hc1_dim(b1_c: int, e: int) -> int:
    """Dimension of the image of H^1_c(L) in H^1(L), i.e. of Ker(H^1(L) -> H^1(Sigma))."""
    if e < 1:
        raise InvalidInputError("the count needs at least one end")
    d = b1_c - e + 1
    if d < 0:
        raise InconsistentTopologyError(
            f"b1_c = {b1_c} with {e} ends violates b1_c >= e - 1 (exactness of (L, Sigma))"
        )
    return d


def tilde_h0bullet_dim(b1_c_bullet: int, s: int) -> int:
    """Dimension of Ker(H^1(L) -> H^1(Sigma_0)) from the sequence of the pair (L, Sigma_0)."""
    if s < 1:
        raise InvalidInputError("the count needs at least one CS end")
    d = b1_c_bullet - s + 1
    if d < 0:
        raise InconsistentTopologyError(
            f"b1_c_bullet = {b1_c_bullet} with {s} CS ends violates b1_c_bullet >= s - 1"
        )
    return d


@dataclass(frozen=True)
class CohomologyReport:
    case: str
    blocks: dict = field(default_factory=dict)
    dim_tilde_Hc1: int | None = None
    dim_E0_d: int | None = None
    dim_ker_rho: int | None = None

    @property
    def total(self) -> int:
        return sum(self.blocks.values())


def decomposition_block_dims(top: ConifoldTopology, case: str) -> CohomologyReport:
    """Dimensions of the topological summands in the closed 1-form decomposition."""
    if case not in BLOCK_CASES:
        raise InvalidInputError(f"unknown decomposition case {case!r}")
    s, l, e = top.s, top.l, top.e

    if case == "compact":
        if e:
            raise InvalidInputError("compact case needs a manifold without ends")
        return CohomologyReport(case, {"H1": top.b1})
    if case in ("AC_decay", "AC_growth"):
        if s or not l:
            raise InvalidInputError("AC cases need only AC ends")
        t = tilde_hc1_dim(top.b1_c, e)
        if case == "AC_decay":
            return CohomologyReport(case, {"H1_c": top.b1_c}, dim_tilde_Hc1=t, dim_E0_d=e - 1)
        return CohomologyReport(case, {"H1": top.b1}, dim_tilde_Hc1=t)
    if case == "CS_growth":
        if l or not s:
            raise InvalidInputError("CS case needs only CS ends")
        t = tilde_hc1_dim(top.b1_c, e)
        return CohomologyReport(
            case, {"ker_rho": t, "d_E0": s - 1}, dim_tilde_Hc1=t, dim_E0_d=s - 1, dim_ker_rho=t
        )
    if not (s and l):
        raise InvalidInputError("CS/AC cases need both CS and AC ends")
    if case == "CSAC_mixed":
        t = tilde_hc1_dim(top.b1_c, e)
        ker = top.b1_c - s
        if t + (l - 1) != ker:
            raise InconsistentTopologyError(
                f"H~_c block {t} plus E' block {l - 1} does not match Ker block {ker}"
            )
        return CohomologyReport(
            case,
            {"tilde_Hc1": t, "d_E_prime": l - 1, "d_E0": s},
            dim_tilde_Hc1=t,
            dim_E0_d=s,
            dim_ker_rho=ker,
        )
    if top.b1_c_bullet is None:
        raise InvalidInputError("CSAC_growth needs b1_c_bullet")
    k = tilde_h0bullet_dim(top.b1_c_bullet, s)
    return CohomologyReport(
        case, {"ker_rho_0": k, "d_E0": s - 1}, dim_tilde_Hc1=tilde_hc1_dim(top.b1_c, e),
        dim_E0_d=s - 1, dim_ker_rho=k,
    )


def validate(top: ConifoldTopology) -> list[str]:
    """Violated constraints, each naming the sequence it comes from. Empty means consistent."""
    out = []
    s, e = top.s, top.e
    if not top.connected:
        out.append("L must be connected (H^0(L) = R is assumed by every count)")
    if top.link_b1 and len(top.link_b1) != e:
        out.append(f"link_b1 lists {len(top.link_b1)} links but there are {e} ends")
    if e == 0:
        if top.b1_c != top.b1:
            out.append(f"compact L has H^1_c = H^1, but b1_c = {top.b1_c} != b1 = {top.b1}")
        return out

    # sequence of (L, Sigma): H^0(L) -> H^0(Sigma) -> H^1_c -> H^1(L) -> H^1(Sigma)
    if top.b1_c < e - 1:
        out.append(f"(L, Sigma): b1_c = {top.b1_c} < e - 1 = {e - 1}")
    else:
        ker = top.b1_c - e + 1
        if top.b1 < ker:
            out.append(f"(L, Sigma): Ker(rho) of dimension {ker} exceeds b1 = {top.b1}")
        if len(top.link_b1) == e and top.b1 - ker > sum(top.link_b1):
            out.append(
                f"(L, Sigma): Im(rho) of dimension {top.b1 - ker} exceeds "
                f"b1(Sigma) = {sum(top.link_b1)}"
            )

    if top.b1_c_bullet is not None:
        if s == 0:
            if top.b1_c_bullet != top.b1:
                out.append(
                    f"without CS ends H^1_c,bullet = H^1, but b1_c_bullet = "
                    f"{top.b1_c_bullet} != b1 = {top.b1}"
                )
        elif top.b1_c_bullet < s - 1:
            out.append(f"(L, Sigma_0): b1_c_bullet = {top.b1_c_bullet} < s - 1 = {s - 1}")
        else:
            ker0 = top.b1_c_bullet - s + 1
            if top.b1 < ker0:
                out.append(f"(L, Sigma_0): Ker(rho_0) of dimension {ker0} exceeds b1 = {top.b1}")
            if len(top.link_b1) == e:
                cs_b1 = sum(top.link_b1[:s])
                if top.b1 - ker0 > cs_b1:
                    out.append(
                        f"(L, Sigma_0): Im(rho_0) of dimension {top.b1 - ker0} exceeds "
                        f"b1(Sigma_0) = {cs_b1}"
                    )
    return out


def require_consistent(top: ConifoldTopology) -> None:
    problems = validate(top)
    if problems:
        raise InconsistentTopologyError("; ".join(problems), problems)


def cone_topology(m: int, link_b1: int = 0) -> ConifoldTopology:
    """Topology of a cone Sigma x (0, inf) over a connected oriented link.

    One CS end and one AC end; H^1(C) = H^1(Sigma), H^1_c(C) is dual to
    H^{m-1}(Sigma) = R, and H^1_c,bullet(C) = 0 because restriction to the
    singular link is an isomorphism.
    """
    b_top = 1  # b^{m-1}(Sigma) = b^0(Sigma) by Poincare duality on the link
    return ConifoldTopology(
        m=m, s=1, l=1, b1=link_b1, b1_c=b_top, b1_c_bullet=0, link_b1=(link_b1, link_b1)
    )
