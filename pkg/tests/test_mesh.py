import math

import numpy as np
import pytest

from slconifold import mesh as M
from slconifold.errors import (
    BoundaryEdgeError,
    NonManifoldEdgeError,
    NonTriangleFaceError,
    OffParseError,
    OrientationError,
)
from slconifold.spectra import LinkDescriptor, MeshLink, resolve_link


def write(tmp_path, text, name="m.off"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_octahedron_topology():
    o = M.octahedron()
    assert o.euler_characteristic == 2
    assert o.n_components == 1


def test_off_round_trip(tmp_path):
    p = tmp_path / "ico.off"
    M.write_off(M.icosphere(1), p)
    back = M.load_off(p)
    assert back.n_vertices == M.icosphere(1).n_vertices
    assert back.euler_characteristic == 2


@pytest.mark.parametrize(
    "text,err",
    [
        ("OFF\n3 1 0\n0 0 0\n1 0 0\n", OffParseError),
        ("NOPE\n", OffParseError),
        ("OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n", NonTriangleFaceError),
        ("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n", BoundaryEdgeError),
    ],
)
def test_off_errors(tmp_path, text, err):
    with pytest.raises(err):
        M.load_off(write(tmp_path, text))


def test_flipped_face_detected():
    o = M.octahedron()
    F = o.faces.copy()
    F[0] = F[0][::-1]
    with pytest.raises(OrientationError):
        M.TriangleMesh(o.vertices, F)


def test_nonmanifold_edge():
    o = M.octahedron()
    F = np.vstack([o.faces, o.faces[:1]])
    with pytest.raises((NonManifoldEdgeError, OrientationError)):
        M.TriangleMesh(o.vertices, F)


def test_stiffness_kills_constants_and_mass_is_area():
    mesh = M.icosphere(2)
    K, mass = M.assemble(mesh)
    assert np.abs(K @ np.ones(mesh.n_vertices)).max() < 1e-10
    assert math.isclose(mass.sum(), mesh.face_areas().sum(), rel_tol=1e-12)
    assert (K - K.T).nnz == 0 or abs(K - K.T).max() < 1e-12


def test_icosphere_area_converges():
    errs = [abs(M.icosphere(k).face_areas().sum() - 4 * math.pi) for k in range(4)]
    assert all(a > b for a, b in zip(errs, errs[1:]))


def test_refinement_improves_eigenvalues():
    errs = []
    for k in (2, 3, 4):
        ent = M.eigensolve(M.icosphere(k), 7.0).spectrum.entries
        errs.append(abs(ent[1][0] - 2) + abs(ent[2][0] - 6))
    assert errs[0] > errs[1] > errs[2]


def test_octahedron_spectrum():
    res = M.eigensolve(M.octahedron(), 3.0)
    assert [k for _, k in res.spectrum.entries] == [1, 3, 2]
    assert max(res.residuals) < 1e-8


def test_disconnected_mesh_has_two_constants():
    res = M.eigensolve(M.disjoint_union(M.icosphere(1), M.icosphere(1, center=(5, 0, 0))), 0.5)
    assert res.spectrum.entries[0] == (0.0, 2)


def test_residuals_reported():
    res = M.eigensolve(M.icosphere(3), 13.0)
    assert [k for _, k in res.spectrum.entries] == [1, 3, 5, 7]
    assert len(res.residuals) == len(res.eigenvalues)
    assert max(res.residuals) < 1e-8


def test_cluster_gap_rule():
    assert [len(g) for g in M.cluster([0, 1e-12, 2.0, 2.01, 6.0])] == [2, 2, 1]


def test_mesh_link_resolves(tmp_path):
    p = tmp_path / "s.off"
    M.write_off(M.icosphere(3), p)
    spec = resolve_link(LinkDescriptor(MeshLink(p)), 7.0, m=3)
    assert spec.source == "mesh"
    assert [k for _, k in spec.entries] == [1, 3, 5]
