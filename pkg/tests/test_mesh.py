import numpy as np
import pytest

import phssfem as pf
from phssfem.mesh import MeshFormatError, boundary_edges

SQUARE_NODE = """4 2 0 1
1 0.0 0.0 1
2 1.0 0.0 1
3 1.0 1.0 1
4 0.0 1.0 1
"""
SQUARE_ELE = """2 3 0
1 1 2 3
2 1 3 4
"""

FIVE_NODE = """5 2 0 1
1 0.0 0.0 1
2 1.0 0.0 1
3 1.0 1.0 1
4 0.0 1.0 1
5 0.5 0.5 0
"""
FIVE_ELE = """4 3 0
1 1 2 5
2 2 3 5
3 3 4 5
4 4 1 5
"""


def test_structured_counts_paper_sizes():
    mesh = pf.structured_unit_square(10)
    assert mesh.n_nodes == 121
    assert mesh.n_triangles == 200
    assert mesh.n_interior == 81
    assert pf.structured_unit_square(40).n_interior == 1521


def test_structured_smallest_grid():
    mesh = pf.structured_unit_square(2)
    assert mesh.n_interior == 1
    assert mesh.n_triangles == 8
    assert mesh.interior_index[4] == 0  # center node of the 3x3 lattice


@pytest.mark.parametrize("bad", [1, 0, -3])
def test_structured_rejects_small_n(bad):
    with pytest.raises(ValueError):
        pf.structured_unit_square(bad)


@pytest.mark.parametrize("n_sub", [2, 5, 10])
def test_structured_geometry(n_sub):
    mesh = pf.structured_unit_square(n_sub)
    assert mesh.h == pytest.approx(np.sqrt(2) / n_sub, rel=1e-14)
    areas = mesh.areas()
    assert np.allclose(areas, 1.0 / (2 * n_sub ** 2), rtol=1e-13)
    assert (areas > 0).all()


def test_interior_index_bijection():
    mesh = pf.structured_unit_square(7)
    inner = mesh.interior_index[mesh.interior_index >= 0]
    assert sorted(inner) == list(range(mesh.n_interior))
    assert (mesh.interior_index[mesh.boundary_flags] == -1).all()
    on_edge = ((mesh.nodes[:, 0] == 0) | (mesh.nodes[:, 0] == 1)
               | (mesh.nodes[:, 1] == 0) | (mesh.nodes[:, 1] == 1))
    assert np.array_equal(on_edge, mesh.boundary_flags)


def _triangle_coordinate_set(mesh, decimals=12):
    pts = np.round(mesh.nodes, decimals)
    return {frozenset(map(tuple, pts[tri])) for tri in mesh.triangles}


def test_refine_matches_structured():
    refined = pf.refine(pf.structured_unit_square(10))
    target = pf.structured_unit_square(20)
    assert refined.n_triangles == target.n_triangles
    assert refined.n_interior == target.n_interior
    node_set = {tuple(p) for p in np.round(refined.nodes, 12)}
    assert node_set == {tuple(p) for p in np.round(target.nodes, 12)}
    assert _triangle_coordinate_set(refined) == _triangle_coordinate_set(target)
    assert refined.h == pytest.approx(target.h, rel=1e-14)


def test_refine_two_triangle_square():
    mesh = pf.load_triangle_mesh(SQUARE_NODE, SQUARE_ELE)
    refined = pf.refine(mesh)
    assert refined.n_triangles == 8
    assert refined.n_nodes == 9
    assert refined.areas().sum() == pytest.approx(1.0, rel=1e-12)
    # midpoint of the interior diagonal is the only interior node
    assert refined.n_interior == 1


def test_refine_quadruples_and_preserves_area(unstructured_mesh):
    refined = pf.refine(unstructured_mesh)
    assert refined.n_triangles == 4 * unstructured_mesh.n_triangles
    assert refined.areas().sum() == pytest.approx(unstructured_mesh.areas().sum(), rel=1e-12)
    assert refined.h == pytest.approx(unstructured_mesh.h / 2, rel=1e-12)


def test_parse_square_all_boundary():
    mesh = pf.load_triangle_mesh(SQUARE_NODE, SQUARE_ELE)
    assert mesh.n_interior == 0
    assert mesh.boundary_flags.all()


def test_parse_five_node_center_interior():
    mesh = pf.load_triangle_mesh(FIVE_NODE, FIVE_ELE)
    assert mesh.n_interior == 1
    assert mesh.interior_index[4] == 0


def test_parse_unstructured_sizes(unstructured_mesh):
    node_text, ele_text = pf.dump_triangle_mesh(unstructured_mesh)
    mesh = pf.load_triangle_mesh(node_text, ele_text)
    assert mesh.n_interior == 41


def test_triangle_roundtrip(unstructured_mesh):
    for mesh in (pf.structured_unit_square(6), unstructured_mesh):
        node_text, ele_text = pf.dump_triangle_mesh(mesh)
        back = pf.load_triangle_mesh(node_text, ele_text)
        assert np.array_equal(back.nodes, mesh.nodes)
        assert np.array_equal(back.triangles, mesh.triangles)
        assert np.array_equal(back.boundary_flags, mesh.boundary_flags)
        again_node, again_ele = pf.dump_triangle_mesh(back)
        assert (again_node, again_ele) == (node_text, ele_text)


def test_parse_zero_based_indexing():
    node = "3 2 0 1\n0 0.0 0.0 1\n1 1.0 0.0 1\n2 0.0 1.0 1\n"
    ele = "1 3 0\n0 0 1 2\n"
    mesh = pf.load_triangle_mesh(node, ele)
    assert mesh.n_nodes == 3 and mesh.n_triangles == 1


def test_parse_reorients_clockwise():
    ele_cw = "2 3 0\n1 1 3 2\n2 1 4 3\n"
    mesh = pf.load_triangle_mesh(SQUARE_NODE, ele_cw)
    assert (mesh.areas() > 0).all()


def test_parse_derives_boundary_without_markers():
    node = FIVE_NODE.replace("5 2 0 1", "5 2 0 0")
    node = "\n".join(line.rsplit(" ", 1)[0] for line in node.strip().splitlines()) + "\n"
    node = node.replace("5 2 0", "5 2 0 0", 1)  # restore header marker flag
    mesh = pf.load_triangle_mesh(node, FIVE_ELE)
    assert list(mesh.boundary_flags) == [True, True, True, True, False]


def test_parse_errors_carry_line_numbers():
    with pytest.raises(MeshFormatError, match="line 1"):
        pf.load_triangle_mesh("x 2 0 1\n", SQUARE_ELE)
    with pytest.raises(MeshFormatError, match="dimension"):
        pf.load_triangle_mesh("4 3 0 1\n", SQUARE_ELE)
    bad_index = SQUARE_ELE.replace("2 1 3 4", "2 1 3 9")
    with pytest.raises(MeshFormatError, match="out of range"):
        pf.load_triangle_mesh(SQUARE_NODE, bad_index)
    degenerate = SQUARE_ELE.replace("2 1 3 4", "2 1 1 3")
    with pytest.raises(MeshFormatError, match="line 3.*zero-area"):
        pf.load_triangle_mesh(SQUARE_NODE, degenerate)
    with pytest.raises(MeshFormatError, match="expected 4 node rows"):
        pf.load_triangle_mesh("4 2 0 1\n1 0.0 0.0 1\n", SQUARE_ELE)


def test_comments_and_blank_lines_ignored():
    node = "# a comment\n" + SQUARE_NODE.replace("1 0.0 0.0 1", "1 0.0 0.0 1  # corner\n")
    mesh = pf.load_triangle_mesh(node, SQUARE_ELE)
    assert mesh.n_nodes == 4


def test_json_roundtrip_and_determinism(unstructured_mesh):
    text = pf.mesh_to_json(unstructured_mesh)
    assert text == pf.mesh_to_json(unstructured_mesh)
    back = pf.mesh_from_json(text)
    assert np.array_equal(back.nodes, unstructured_mesh.nodes)
    assert np.array_equal(back.triangles, unstructured_mesh.triangles)
    assert np.array_equal(back.boundary_flags, unstructured_mesh.boundary_flags)


def test_duplicate_nodes_warn_but_load():
    nodes = [[0, 0], [1, 0], [0, 1], [0, 0]]
    with pytest.warns(UserWarning, match="duplicate"):
        pf.TriangularMesh(nodes, [[0, 1, 2]], [True, True, True, True])


def test_boundary_edges_of_square():
    mesh = pf.load_triangle_mesh(SQUARE_NODE, SQUARE_ELE)
    edges = boundary_edges(mesh.triangles)
    assert edges == {(0, 1), (1, 2), (2, 3), (0, 3)}


def test_file_io_roundtrip(tmp_path, unstructured_mesh):
    node_path = tmp_path / "m.node"
    ele_path = tmp_path / "m.ele"
    pf.write_triangle_files(unstructured_mesh, node_path, ele_path)
    back = pf.read_triangle_files(node_path, ele_path)
    assert np.array_equal(back.nodes, unstructured_mesh.nodes)


def test_mesh_arrays_immutable():
    mesh = pf.structured_unit_square(3)
    with pytest.raises(ValueError):
        mesh.nodes[0, 0] = 5.0
