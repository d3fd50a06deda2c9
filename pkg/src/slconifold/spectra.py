"""Laplacian spectra of links: round spheres, flat tori, explicit lists, meshes."""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from pathlib import Path
from typing import Iterable, Mapping, Union

import numpy as np

from .errors import InvalidInputError

SOURCES = ("sphere", "torus", "explicit", "mesh")

ANALYTIC_RTOL = 1e-9


@dataclass(frozen=True)
class Spectrum:
    """Sorted (eigenvalue, multiplicity) pairs, certified complete up to ``cutoff``."""

    entries: tuple[tuple[float, int], ...]
    cutoff: float
    source: str = "explicit"

    def __post_init__(self):
        entries = tuple((float(e), int(k)) for e, k in self.entries)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "cutoff", float(self.cutoff))
        if self.source not in SOURCES:
            raise InvalidInputError(f"unknown spectrum source {self.source!r}")
        if not self.cutoff >= 0:
            raise InvalidInputError(f"cutoff must be nonnegative, got {self.cutoff}")
        if not entries:
            raise InvalidInputError("spectrum must contain eigenvalue 0")
        if entries[0][0] != 0.0:
            raise InvalidInputError(
                f"lowest eigenvalue must be 0 (constants), got {entries[0][0]}"
            )
        prev = None
        for value, mult in entries:
            if not np.isfinite(value) or value < 0:
                raise InvalidInputError(f"eigenvalue {value} is not a nonnegative real")
            if mult < 1:
                raise InvalidInputError(f"multiplicity {mult} at {value} is not positive")
            if prev is not None and value <= prev:
                raise InvalidInputError("eigenvalues must be strictly increasing")
            if value > self.cutoff:
                raise InvalidInputError(
                    f"eigenvalue {value} exceeds the cutoff {self.cutoff}"
                )
            prev = value

    @classmethod
    def from_mapping(cls, mapping: Mapping[float, int], cutoff=None, source="explicit"):
        entries = sorted((float(e), int(k)) for e, k in mapping.items())
        if cutoff is None:
            cutoff = entries[-1][0] if entries else 0.0
        return cls(tuple(entries), cutoff, source)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([e for e, _ in self.entries])

    @property
    def multiplicities(self) -> np.ndarray:
        return np.array([k for _, k in self.entries], dtype=int)

    @property
    def b0(self) -> int:
        return self.entries[0][1]

    def as_dict(self) -> dict[float, int]:
        return dict(self.entries)

    def multiplicity(self, value: float, rtol: float = ANALYTIC_RTOL) -> int:
        for e, k in self.entries:
            if abs(e - value) <= rtol * max(1.0, abs(value)):
                return k
        return 0

    def truncate(self, cutoff: float) -> "Spectrum":
        cutoff = min(cutoff, self.cutoff)
        return Spectrum(
            tuple((e, k) for e, k in self.entries if e <= cutoff), cutoff, self.source
        )

    def with_eigenvalue(self, value: float, mult: int = 1) -> "Spectrum":
        """Return a copy with ``mult`` extra copies of ``value`` merged in."""
        d = self.as_dict()
        for e in d:
            if abs(e - value) <= ANALYTIC_RTOL * max(1.0, abs(value)):
                d[e] += mult
                break
        else:
            d[float(value)] = mult
        return Spectrum.from_mapping(d, cutoff=max(self.cutoff, value), source=self.source)


def group_eigenvalues(values: Iterable[float], rtol: float = ANALYTIC_RTOL):
    """Group sorted reals into (value, count) pairs; near-equal values collapse."""
    out: list[list] = []
    for v in sorted(values):
        if out and abs(v - out[-1][0]) <= rtol * max(1.0, abs(v)):
            out[-1][1] += 1
        else:
            out.append([float(v), 1])
    return tuple((v, k) for v, k in out)


def harmonic_dim(d: int, k: int) -> int:
    """Dimension of degree-k spherical harmonics on S^d."""
    return comb(d + k, k) - (comb(d + k - 2, k - 2) if k >= 2 else 0)


def sphere_spectrum(d: int, cutoff: float) -> Spectrum:
    if d < 2:
        raise InvalidInputError(f"sphere dimension must be >= 2, got {d}")
    if not cutoff >= 0:
        raise InvalidInputError(f"cutoff must be nonnegative, got {cutoff}")
    entries = []
    k = 0
    while k * (k + d - 1) <= cutoff:
        entries.append((float(k * (k + d - 1)), harmonic_dim(d, k)))
        k += 1
    return Spectrum(tuple(entries), cutoff, "sphere")


def dual_basis(basis) -> np.ndarray:
    """Rows of the returned matrix generate the dual of the lattice spanned by the rows of ``basis``."""
    B = np.atleast_2d(np.asarray(basis, dtype=float))
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise InvalidInputError(f"lattice basis must be square, got shape {B.shape}")
    if not np.all(np.isfinite(B)):
        raise InvalidInputError("lattice basis has non-finite entries")
    cond = np.linalg.cond(B)
    if not np.isfinite(cond) or cond > 1e12:
        raise InvalidInputError("lattice basis is singular")
    return np.linalg.inv(B).T


def torus_spectrum(basis, cutoff: float) -> Spectrum:
    """Spectrum of the flat torus R^n / (Z^n basis), eigenvalues 4 pi^2 |xi|^2."""
    if not cutoff >= 0:
        raise InvalidInputError(f"cutoff must be nonnegative, got {cutoff}")
    D = dual_basis(basis)
    n = D.shape[0]
    gram = D @ D.T
    radius2 = cutoff / (4 * np.pi**2)
    lam_min = np.linalg.eigvalsh(gram)[0]
    # k G k^T >= lam_min |k|^2, so every admissible k lies in this cube
    r = int(np.floor(np.sqrt(radius2 / lam_min) + 1e-9))
    axis = np.arange(-r, r + 1)
    ks = np.stack(np.meshgrid(*([axis] * n), indexing="ij"), axis=-1).reshape(-1, n)
    xi = ks @ D
    vals = 4 * np.pi**2 * np.einsum("ij,ij->i", xi, xi)
    vals = vals[vals <= cutoff * (1 + 1e-12)]
    vals[np.abs(vals) < 1e-14 * max(1.0, cutoff)] = 0.0
    entries = group_eigenvalues(vals)
    entries = tuple((min(e, cutoff), k) for e, k in entries)
    return Spectrum(entries, cutoff, "torus")


@dataclass(frozen=True)
class RoundSphere:
    dim: int


@dataclass(frozen=True)
class FlatTorus:
    basis: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "basis", tuple(tuple(float(x) for x in row) for row in self.basis)
        )

    @property
    def dim(self) -> int:
        return len(self.basis)


@dataclass(frozen=True)
class Explicit:
    spectrum: Spectrum


@dataclass(frozen=True)
class MeshLink:
    path: Path
    tol: float = 1e-8
    strict: bool = False


LinkVariant = Union[RoundSphere, FlatTorus, Explicit, MeshLink]


@dataclass(frozen=True)
class LinkDescriptor:
    variant: LinkVariant
    b0: int = 1
    b1: int = 0

    def __post_init__(self):
        if self.b0 != 1:
            raise InvalidInputError(f"links must be connected (b0 = 1), got b0 = {self.b0}")
        if self.b1 < 0:
            raise InvalidInputError(f"b1 must be nonnegative, got {self.b1}")

    @property
    def is_sphere(self) -> bool:
        return isinstance(self.variant, RoundSphere)


def resolve_link(descriptor: LinkDescriptor, cutoff: float, m: int | None = None) -> Spectrum:
    """Produce the spectrum of a link up to ``min(cutoff, achievable)``."""
    v = descriptor.variant
    if isinstance(v, RoundSphere):
        if m is not None and v.dim != m - 1:
            raise InvalidInputError(f"sphere link must have dimension m-1 = {m - 1}, got {v.dim}")
        spec = sphere_spectrum(v.dim, cutoff)
    elif isinstance(v, FlatTorus):
        if m is not None and v.dim != m - 1:
            raise InvalidInputError(f"torus basis must have order m-1 = {m - 1}, got {v.dim}")
        spec = torus_spectrum(v.basis, cutoff)
    elif isinstance(v, Explicit):
        spec = v.spectrum.truncate(cutoff)
    elif isinstance(v, MeshLink):
        if m is not None and m != 3:
            raise InvalidInputError("mesh links are only supported for m = 3")
        from .mesh import eigensolve, load_off

        mesh = load_off(v.path)
        spec = eigensolve(mesh, max(cutoff, 1e-6), tol=v.tol, strict=v.strict).spectrum
        spec = spec.truncate(cutoff)
    else:
        raise InvalidInputError(f"unknown link variant {v!r}")
    if spec.b0 != descriptor.b0:
        raise InvalidInputError(
            f"eigenvalue 0 has multiplicity {spec.b0}, expected b0 = {descriptor.b0}"
        )
    return spec
