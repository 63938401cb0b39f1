import numpy as np
import pytest

from trisymp import mesh


def test_flat_torus_counts():
    t = mesh.flat_torus(6)
    assert (t.n_vertices, t.n_edges, t.n_faces) == (36, 108, 72)
    assert t.genus == 1 and t.euler_characteristic == 0
    np.testing.assert_allclose(t.areas.sum(), 1.0)


def test_octagon_is_genus_two_with_one_cone_point():
    o = mesh.octagon_surface(4)
    assert o.genus == 2
    # all octagon corners glue to one vertex of angle 6 pi
    assert np.isclose(o.cone_angles().max(), 6 * np.pi)
    np.testing.assert_allclose(np.sort(o.cone_angles())[:-1], 2 * np.pi)


def test_face_edges_close_up():
    for s in (mesh.flat_torus(5), mesh.octagon_surface(3), mesh.jiggled_torus(5, 0.2, 1)):
        np.testing.assert_allclose(s.face_edges.sum(axis=1), 0, atol=1e-12)
        assert np.all(s.areas > 0)


def test_jiggled_torus_keeps_combinatorics():
    a, b = mesh.flat_torus(6), mesh.jiggled_torus(6, 0.15, 3)
    np.testing.assert_array_equal(a.triangles, b.triangles)
    assert a.n_edges == b.n_edges
    np.testing.assert_allclose(b.areas.sum(), 1.0)
    assert not np.allclose(a.face_edges, b.face_edges)


def test_off_round_trip(tmp_path):
    t = mesh.flat_torus(4)
    p = tmp_path / "t.off"
    mesh.write_off(t, p)
    back = mesh.read_off(p)
    # the combinatorics survive; the metric comes from the planar positions
    np.testing.assert_array_equal(back.triangles, t.triangles)
    assert back.genus == 1 and not back.translation


def test_off_tetrahedron(tmp_path):
    p = tmp_path / "tet.off"
    p.write_text("OFF\n4 4 6\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 2 1\n3 0 1 3\n3 0 3 2\n3 1 2 3\n")
    s = mesh.read_off(p)
    assert s.genus == 0 and not s.translation
    q = tmp_path / "tet2.off"
    mesh.write_off(s, q)
    s2 = mesh.read_off(q)
    np.testing.assert_allclose(s2.edge_lengths, s.edge_lengths)


@pytest.mark.parametrize("text", ["", "OFF\n4 4\n0 0 0\n", "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n4 0 1 2 0\n",
                                  "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n"])
def test_off_errors(tmp_path, text):
    p = tmp_path / "bad.off"
    p.write_text(text)
    with pytest.raises(mesh.MeshError):
        mesh.read_off(p)


def test_polygon_gluing_file(tmp_path):
    lines = ["# square torus", "vertices", "0 0", "1 0", "1 1", "0 1", "pairs", "0 2", "1 3"]
    p = tmp_path / "sq.txt"
    p.write_text("\n".join(lines) + "\n")
    s = mesh.read_polygon_gluing(p)
    assert s.genus == 1
    p.write_text("0 0\n")
    with pytest.raises(mesh.MeshError):
        mesh.read_polygon_gluing(p)


def test_edge_lengths(tmp_path):
    t = mesh.flat_torus(4)
    p = tmp_path / "len.txt"
    p.write_text("# id length\n0 0.3\n")
    lengths = mesh.read_edge_lengths(p)
    s = mesh.apply_edge_lengths(t, lengths)
    assert s.edge_lengths[0] == pytest.approx(0.3)
    assert not s.translation
    with pytest.raises(mesh.MeshError):
        mesh.apply_edge_lengths(t, {0: 10.0})
    with pytest.raises(mesh.MeshError):
        mesh.apply_edge_lengths(t, {10**6: 1.0})
    p.write_text("0 -1\n")
    with pytest.raises(mesh.MeshError):
        mesh.read_edge_lengths(p)
