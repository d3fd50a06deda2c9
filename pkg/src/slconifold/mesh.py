"""Low Laplace-Beltrami spectrum of closed triangulated surfaces.

The discretization is the cotangent stiffness matrix with a lumped
(barycentric) mass matrix. The generalized problem K x = lam M x is turned
into a symmetric standard problem with the M^{-1/2} scaling and solved by
shift-invert Lanczos.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
import scipy.sparse.csgraph as csgraph
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .errors import (
    BoundaryEdgeError,
    ConvergenceError,
    DegenerateFaceError,
    InvalidInputError,
    NonManifoldEdgeError,
    NonTriangleFaceError,
    OffParseError,
    OrientationError,
)
from .spectra import Spectrum

DEFAULT_TOL = 1e-8
MIN_ANGLE_DEG = 1.0
CLUSTER_RTOL = 0.02
DENSE_LIMIT = 600


class MeshConditioningWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class TriangleMesh:
    vertices: np.ndarray
    faces: np.ndarray

    def __post_init__(self):
        V = np.asarray(self.vertices, dtype=float)
        F = np.asarray(self.faces, dtype=np.int64)
        if V.ndim != 2 or V.shape[1] != 3:
            raise InvalidInputError(f"vertices must be an (n, 3) array, got {V.shape}")
        if F.ndim != 2 or F.shape[1] != 3:
            raise NonTriangleFaceError(f"faces must be an (f, 3) array, got {F.shape}")
        object.__setattr__(self, "vertices", V)
        object.__setattr__(self, "faces", F)
        _validate(V, F)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def edges(self) -> np.ndarray:
        e = np.sort(self.faces[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2), axis=1)
        return np.unique(e, axis=0)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_faces

    @property
    def n_components(self) -> int:
        e = self.edges
        n = self.n_vertices
        adj = sp.coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n, n))
        return int(csgraph.connected_components(adj, directed=False)[0])

    def face_areas(self) -> np.ndarray:
        p = self.vertices[self.faces]
        return 0.5 * np.linalg.norm(np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1)

    def angles(self) -> np.ndarray:
        """Interior angles, column i is the angle at corner i of each face."""
        p = self.vertices[self.faces]
        out = np.empty((self.n_faces, 3))
        for i in range(3):
            a = p[:, (i + 1) % 3] - p[:, i]
            b = p[:, (i + 2) % 3] - p[:, i]
            cos = np.einsum("ij,ij->i", a, b) / (
                np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1)
            )
            out[:, i] = np.arccos(np.clip(cos, -1.0, 1.0))
        return out

    def stats(self) -> dict:
        return {
            "vertices": self.n_vertices,
            "faces": self.n_faces,
            "edges": self.n_edges,
            "components": self.n_components,
            "euler_characteristic": self.euler_characteristic,
            "min_angle_deg": float(np.degrees(self.angles().min())),
        }


def _validate(V: np.ndarray, F: np.ndarray) -> None:
    n = len(V)
    if len(F) == 0:
        raise InvalidInputError("mesh has no faces")
    if F.min() < 0 or F.max() >= n:
        raise InvalidInputError("face references a vertex index out of range")
    if np.any((F[:, 0] == F[:, 1]) | (F[:, 1] == F[:, 2]) | (F[:, 2] == F[:, 0])):
        raise DegenerateFaceError("face repeats a vertex")
    p = V[F]
    area2 = np.linalg.norm(np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1)
    scale = max(np.ptp(V, axis=0).max(), 1e-300)
    bad = np.flatnonzero(area2 <= 1e-14 * scale**2)
    if len(bad):
        raise DegenerateFaceError(f"face {bad[0]} has zero area")

    directed = F[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2)
    undirected = np.sort(directed, axis=1)
    _, inverse, counts = np.unique(undirected, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.ravel()
    if np.any(counts > 2):
        e = undirected[np.flatnonzero(counts[inverse] > 2)[0]]
        raise NonManifoldEdgeError(f"edge {tuple(e)} is shared by more than two faces")
    if np.any(counts == 1):
        e = undirected[np.flatnonzero(counts[inverse] == 1)[0]]
        raise BoundaryEdgeError(f"edge {tuple(e)} belongs to a single face (mesh has boundary)")
    _, dcounts = np.unique(directed, axis=0, return_counts=True)
    if np.any(dcounts > 1):
        raise OrientationError("faces are not consistently oriented")


def load_off(path) -> TriangleMesh:
    """Parse an ASCII OFF file into a validated closed triangle mesh."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OffParseError(f"cannot read {path}: {exc}") from exc
    lines = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    if not lines or not lines[0].startswith("OFF"):
        raise OffParseError(f"{path}: missing OFF header")
    head = lines[0][3:].split()
    body = lines[1:]
    if head:
        counts_tokens, rest = head, body
    else:
        if not body:
            raise OffParseError(f"{path}: missing counts line")
        counts_tokens, rest = body[0].split(), body[1:]
    try:
        nv, nf = int(counts_tokens[0]), int(counts_tokens[1])
    except (IndexError, ValueError) as exc:
        raise OffParseError(f"{path}: malformed counts line") from exc
    if len(rest) < nv + nf:
        raise OffParseError(f"{path}: expected {nv} vertices and {nf} faces, file is truncated")
    try:
        V = np.array([[float(t) for t in rest[i].split()[:3]] for i in range(nv)])
    except ValueError as exc:
        raise OffParseError(f"{path}: malformed vertex line") from exc
    if nv and V.shape != (nv, 3):
        raise OffParseError(f"{path}: every vertex line needs three coordinates")
    faces = []
    for j in range(nf):
        toks = rest[nv + j].split()
        try:
            arity = int(toks[0])
            idx = [int(t) for t in toks[1 : 1 + arity]]
        except (IndexError, ValueError) as exc:
            raise OffParseError(f"{path}: malformed face line {j}") from exc
        if arity != 3:
            raise NonTriangleFaceError(f"{path}: face {j} has {arity} vertices")
        if len(idx) != 3:
            raise OffParseError(f"{path}: face {j} lists fewer than 3 indices")
        faces.append(idx)
    return TriangleMesh(V.reshape(nv, 3), np.array(faces, dtype=np.int64).reshape(nf, 3))


def write_off(mesh: TriangleMesh, path) -> None:
    lines = ["OFF", f"{mesh.n_vertices} {mesh.n_faces} {mesh.n_edges}"]
    lines += [" ".join(repr(float(x)) for x in v) for v in mesh.vertices]
    lines += ["3 " + " ".join(str(int(i)) for i in f) for f in mesh.faces]
    Path(path).write_text("\n".join(lines) + "\n")


def octahedron() -> TriangleMesh:
    V = np.array([[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]], float)
    F = [[0, 2, 4], [2, 1, 4], [1, 3, 4], [3, 0, 4], [2, 0, 5], [1, 2, 5], [3, 1, 5], [0, 3, 5]]
    return TriangleMesh(V, np.array(F))


def icosphere(subdivisions: int = 0, radius: float = 1.0, center=(0.0, 0.0, 0.0)) -> TriangleMesh:
    """Icosahedron refined by repeated 4-to-1 splitting, projected onto the sphere."""
    t = (1 + 5**0.5) / 2
    V = [[-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
         [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
         [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1]]
    F = [[0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
         [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
         [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
         [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1]]
    verts = [np.array(v, float) / np.linalg.norm(v) for v in V]
    faces = F
    for _ in range(subdivisions):
        cache: dict[tuple[int, int], int] = {}

        def midpoint(a, b):
            key = (min(a, b), max(a, b))
            if key not in cache:
                p = verts[a] + verts[b]
                verts.append(p / np.linalg.norm(p))
                cache[key] = len(verts) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        faces = new
    V = radius * np.array(verts) + np.asarray(center, float)
    return TriangleMesh(V, np.array(faces))


def disjoint_union(*meshes: TriangleMesh) -> TriangleMesh:
    V, F, offset = [], [], 0
    for mesh in meshes:
        V.append(mesh.vertices)
        F.append(mesh.faces + offset)
        offset += mesh.n_vertices
    return TriangleMesh(np.vstack(V), np.vstack(F))


def assemble(mesh: TriangleMesh, strict: bool = False, min_angle_deg: float = MIN_ANGLE_DEG):
    """Cotangent stiffness matrix and lumped mass diagonal.

    Returns ``(K, mass)`` with ``K`` a symmetric CSR matrix and ``mass`` a
    1-D array of barycentric vertex areas.
    """
    angles = mesh.angles()
    min_angle = np.degrees(angles.min())
    if min_angle < min_angle_deg:
        msg = f"minimum triangle angle {min_angle:.3g} deg is below {min_angle_deg} deg"
        if strict:
            raise DegenerateFaceError(msg)
        warnings.warn(msg, MeshConditioningWarning, stacklevel=2)

    n = mesh.n_vertices
    F = mesh.faces
    cot = 1.0 / np.tan(angles)
    rows, cols, vals = [], [], []
    for i in range(3):
        # the angle at corner i is opposite the edge (i+1, i+2)
        a, b = F[:, (i + 1) % 3], F[:, (i + 2) % 3]
        w = 0.5 * cot[:, i]
        rows += [a, b, a, b]
        cols += [b, a, a, b]
        vals += [-w, -w, w, w]
    K = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    ).tocsr()
    K.sum_duplicates()
    area = mesh.face_areas()
    mass = np.bincount(F.ravel(), weights=np.repeat(area / 3.0, 3), minlength=n)
    return K, mass


@dataclass(frozen=True)
class EigResult:
    spectrum: Spectrum
    residuals: tuple[float, ...]
    eigenvalues: tuple[float, ...]
    mesh_stats: dict = field(default_factory=dict)


def cluster(values, tol: float = DEFAULT_TOL, rtol: float = CLUSTER_RTOL):
    """Group sorted eigenvalues; neighbours join when their gap <= max(rtol*value, 10*tol)."""
    groups: list[list[float]] = []
    for v in sorted(values):
        if groups and v - groups[-1][-1] <= max(rtol * abs(v), 10 * tol):
            groups[-1].append(v)
        else:
            groups.append([v])
    return groups


def _start_vector(n: int) -> np.ndarray:
    v = np.cos(np.arange(n) * 0.7548776662466927) + 1.5
    return v / np.linalg.norm(v)


def _lowest_pairs(A, k: int, maxiter: int):
    n = A.shape[0]
    if n <= DENSE_LIMIT or k >= n - 1:
        w, Y = np.linalg.eigh(A.toarray())
        return w[: min(k, n)], Y[:, : min(k, n)]
    # shift below the spectrum so A - sigma I is positive definite
    return eigsh(A, k=k, sigma=-1.0, which="LM", v0=_start_vector(n), maxiter=maxiter, tol=0)


def eigensolve(
    mesh: TriangleMesh,
    cutoff: float,
    tol: float = DEFAULT_TOL,
    strict: bool = False,
    margin: float = 0.1,
) -> EigResult:
    """All generalized eigenpairs of (K, M) up to ``cutoff``, clustered into multiplicities."""
    if not cutoff > 0:
        raise InvalidInputError(f"cutoff must be positive, got {cutoff}")
    if not 0 < tol < 1:
        raise InvalidInputError(f"tol must lie in (0, 1), got {tol}")
    K, mass = assemble(mesh, strict=strict)
    if np.any(mass <= 0):
        raise DegenerateFaceError("vertex with nonpositive lumped mass")
    n = mesh.n_vertices
    s = 1.0 / np.sqrt(mass)
    A = sp.diags(s) @ K @ sp.diags(s)
    A = ((A + A.T) * 0.5).tocsc()

    upper = cutoff * (1 + margin)
    area = mass.sum()
    n_comp = mesh.n_components
    # Weyl: N(lam) ~ area * lam / (4 pi) on a surface
    k = int(min(n, max(8, 2 * area * upper / (4 * np.pi) + 4 * n_comp + 8)))
    while True:
        maxiter = int(10 * k * np.sqrt(n))
        try:
            w, Y = _lowest_pairs(A, k, maxiter)
        except ArpackNoConvergence as exc:
            res = _residuals(K, mass, s, exc.eigenvalues, exc.eigenvectors)
            raise ConvergenceError(
                f"eigensolver did not converge within {maxiter} iterations", res
            ) from exc
        order = np.argsort(w)
        w, Y = w[order], Y[:, order]
        if w[-1] > upper or k >= n:
            break
        k = min(n, 2 * k)

    res = _residuals(K, mass, s, w, Y)
    if np.any(res > tol):
        raise ConvergenceError(
            f"eigenpair residual {res.max():.3g} exceeds tolerance {tol}", res.tolist()
        )
    if np.any(w < -tol * max(1.0, np.abs(w).max())):
        raise ConvergenceError(f"negative eigenvalue {w.min():.3g} from a PSD problem", res.tolist())

    groups = cluster(w, tol)
    if len(w) < n:
        # the top cluster may continue past the computed range
        groups = groups[:-1]
    entries = []
    for g in groups:
        mean = float(np.mean(g))
        if mean > cutoff:
            break
        if not entries and abs(mean) <= max(1e-6, 10 * tol):
            mean = 0.0
        entries.append((max(mean, 0.0), len(g)))
    if not entries or entries[0][0] != 0.0:
        raise ConvergenceError("no zero eigenvalue found; constants must lie in the kernel", res.tolist())
    return EigResult(
        spectrum=Spectrum(tuple(entries), cutoff, "mesh"),
        residuals=tuple(float(r) for r in res),
        eigenvalues=tuple(float(x) for x in w),
        mesh_stats=mesh.stats(),
    )


def _residuals(K, mass, s, w, Y) -> np.ndarray:
    """||K x - lam M x|| / ||x||_M for x = M^{-1/2} y."""
    if w is None or len(w) == 0:
        return np.array([])
    X = Y * s[:, None]
    R = K @ X - (mass[:, None] * X) * np.asarray(w)[None, :]
    norm_m = np.sqrt(np.einsum("ij,ij->j", X, mass[:, None] * X))
    return np.linalg.norm(R, axis=0) / norm_m
