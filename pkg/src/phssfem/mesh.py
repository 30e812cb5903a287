"""Triangular meshes of the unit square.

Provides the structured uniform triangulation (each grid cell split along the
SW-NE diagonal, so the constant-coefficient stiffness matrix is the classical
5-point stencil), a reader/writer for the Triangle .node/.ele text format,
uniform red refinement, and a canonical JSON dump used for golden tests.
"""
from __future__ import annotations

import json
import warnings

import numpy as np


class MeshFormatError(ValueError):
    """A Triangle .node/.ele file could not be parsed.

    Carries the 1-based line number of the offending line when known.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class TriangularMesh:
    """Immutable conforming triangulation with boundary flags.

    Attributes
    ----------
    nodes : (n_nodes, 2) float array
        Vertex coordinates.
    triangles : (n_triangles, 3) int array
        Vertex indices per element, counterclockwise.
    boundary_flags : (n_nodes,) bool array
        True for nodes on the domain boundary.
    interior_index : (n_nodes,) int array
        Dense 0..n_interior-1 numbering of interior nodes, -1 on the boundary.
    interior_nodes : (n_interior,) int array
        Inverse map: node id of each interior index.
    h : float
        Mesh fineness, the maximum element diameter (longest edge).
    """

    def __init__(self, nodes, triangles, boundary_flags):
        nodes = np.ascontiguousarray(nodes, dtype=float)
        triangles = np.ascontiguousarray(triangles, dtype=np.int64)
        boundary_flags = np.ascontiguousarray(boundary_flags, dtype=bool)
        if nodes.ndim != 2 or nodes.shape[1] != 2:
            raise ValueError("nodes must be an (n, 2) array")
        if triangles.ndim != 2 or triangles.shape[1] != 3:
            raise ValueError("triangles must be an (m, 3) array")
        if boundary_flags.shape != (len(nodes),):
            raise ValueError("boundary_flags must have one entry per node")
        if triangles.size and (triangles.min() < 0 or triangles.max() >= len(nodes)):
            raise ValueError("triangle vertex index out of range")

        # enforce counterclockwise orientation; zero area is a hard error
        area2 = _signed_area2(nodes, triangles)
        flipped = area2 < 0
        if np.any(flipped):
            triangles = triangles.copy()
            triangles[flipped] = triangles[flipped][:, [0, 2, 1]]
            area2 = np.abs(area2)
        if np.any(area2 == 0):
            bad = int(np.flatnonzero(area2 == 0)[0])
            raise ValueError(f"triangle {bad} has zero area")

        dup = len(nodes) - len(np.unique(nodes, axis=0)) if len(nodes) else 0
        if dup:
            warnings.warn(f"mesh contains {dup} duplicate node coordinate(s)", stacklevel=2)

        self.nodes = nodes
        self.triangles = triangles
        self.boundary_flags = boundary_flags
        self.interior_index = np.full(len(nodes), -1, dtype=np.int64)
        self.interior_nodes = np.flatnonzero(~boundary_flags)
        self.interior_index[self.interior_nodes] = np.arange(len(self.interior_nodes))
        self.h = float(_edge_lengths(nodes, triangles).max()) if len(triangles) else 0.0
        for arr in (self.nodes, self.triangles, self.boundary_flags,
                    self.interior_index, self.interior_nodes):
            arr.setflags(write=False)

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @property
    def n_interior(self):
        """Dimension n(h) of the assembled systems."""
        return len(self.interior_nodes)

    def areas(self):
        """Element areas (all positive)."""
        return _signed_area2(self.nodes, self.triangles) / 2.0

    def __repr__(self):
        return (f"TriangularMesh(nodes={self.n_nodes}, triangles={self.n_triangles}, "
                f"interior={self.n_interior}, h={self.h:.4g})")


def _signed_area2(nodes, triangles):
    p = nodes[triangles]
    return ((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
            - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1]))


def _edge_lengths(nodes, triangles):
    p = nodes[triangles]
    out = np.empty((len(triangles), 3))
    for k, (i, j) in enumerate(((0, 1), (1, 2), (2, 0))):
        out[:, k] = np.hypot(p[:, i, 0] - p[:, j, 0], p[:, i, 1] - p[:, j, 1])
    return out


def structured_unit_square(n_subdivisions):
    """Uniform triangulation of [0,1]^2 with n_subdivisions cells per side.

    Each cell is split along its SW-NE diagonal.  The mesh has
    (n_subdivisions+1)^2 nodes, 2*n_subdivisions^2 right triangles and
    (n_subdivisions-1)^2 interior nodes.
    """
    N = int(n_subdivisions)
    if N < 2:
        raise ValueError(f"need at least 2 subdivisions per side, got {n_subdivisions}")
    xs = np.linspace(0.0, 1.0, N + 1)
    X, Y = np.meshgrid(xs, xs, indexing="xy")
    nodes = np.column_stack([X.ravel(), Y.ravel()])  # node id = i + j*(N+1)
    i, j = np.meshgrid(np.arange(N), np.arange(N), indexing="xy")
    ll = (i + j * (N + 1)).ravel()
    lr = ll + 1
    ul = ll + (N + 1)
    ur = ul + 1
    lower = np.column_stack([ll, lr, ur])
    upper = np.column_stack([ll, ur, ul])
    triangles = np.empty((2 * N * N, 3), dtype=np.int64)
    triangles[0::2] = lower
    triangles[1::2] = upper
    onb = (nodes[:, 0] == 0.0) | (nodes[:, 0] == 1.0) | (nodes[:, 1] == 0.0) | (nodes[:, 1] == 1.0)
    return TriangularMesh(nodes, triangles, onb)


def boundary_edges(triangles):
    """Set of undirected edges incident to exactly one triangle."""
    edges = {}
    for tri in np.asarray(triangles):
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            key = (int(a), int(b)) if a < b else (int(b), int(a))
            edges[key] = edges.get(key, 0) + 1
    return {e for e, count in edges.items() if count == 1}


def refine(mesh):
    """Split every triangle into 4 via edge midpoints (uniform red refinement).

    Midpoints of boundary edges are flagged as boundary nodes; h halves.
    """
    nodes = [tuple(p) for p in mesh.nodes]
    flags = list(mesh.boundary_flags)
    on_boundary = boundary_edges(mesh.triangles)
    midpoint = {}

    def mid(a, b):
        key = (a, b) if a < b else (b, a)
        idx = midpoint.get(key)
        if idx is None:
            idx = len(nodes)
            nodes.append(tuple((mesh.nodes[a] + mesh.nodes[b]) / 2.0))
            flags.append(key in on_boundary)
            midpoint[key] = idx
        return idx

    children = np.empty((4 * mesh.n_triangles, 3), dtype=np.int64)
    for t, (v0, v1, v2) in enumerate(mesh.triangles):
        m01 = mid(v0, v1)
        m12 = mid(v1, v2)
        m02 = mid(v0, v2)
        children[4 * t:4 * t + 4] = [(v0, m01, m02), (m01, v1, m12),
                                     (m02, m12, v2), (m01, m12, m02)]
    return TriangularMesh(np.array(nodes), children, np.array(flags, dtype=bool))


# ---------------------------------------------------------------------------
# Triangle .node/.ele text format
# ---------------------------------------------------------------------------

def _content_lines(text):
    """Yield (line_number, tokens) for non-empty, non-comment lines."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if stripped:
            yield lineno, stripped.split()


def _parse_ints(tokens, count, lineno, what):
    try:
        values = [int(t) for t in tokens[:count]]
    except ValueError as exc:
        raise MeshFormatError(f"malformed {what}: {exc}", line=lineno) from None
    if len(values) < count:
        raise MeshFormatError(f"malformed {what}: expected {count} fields", line=lineno)
    return values


def load_triangle_mesh(node_text, ele_text):
    """Build a mesh from Triangle .node and .ele file contents.

    Indexing base (0 or 1) is auto-detected from the first data row.  Node
    attributes beyond the boundary marker are ignored.  If the .node file
    carries no boundary markers, boundary nodes are derived from the mesh
    topology (edges incident to exactly one triangle).  Triangles are
    reoriented counterclockwise when needed; a zero-area triangle is a
    MeshFormatError naming the offending .ele line.
    """
    rows = _content_lines(node_text)
    try:
        lineno, tokens = next(rows)
    except StopIteration:
        raise MeshFormatError("empty .node file") from None
    n_nodes, dim, n_attr, marker_flag = _parse_ints(tokens, 4, lineno, ".node header")
    if dim != 2:
        raise MeshFormatError(f"expected dimension 2, got {dim}", line=lineno)
    if n_nodes <= 0:
        raise MeshFormatError(f"nonpositive node count {n_nodes}", line=lineno)

    coords = np.zeros((n_nodes, 2))
    markers = np.zeros(n_nodes, dtype=bool)
    seen = np.zeros(n_nodes, dtype=bool)
    base = None
    for _ in range(n_nodes):
        try:
            lineno, tokens = next(rows)
        except StopIteration:
            raise MeshFormatError(f"expected {n_nodes} node rows") from None
        if len(tokens) < 3 + n_attr + marker_flag:
            raise MeshFormatError("truncated node row", line=lineno)
        idx = _parse_ints(tokens, 1, lineno, "node index")[0]
        if base is None:
            if idx not in (0, 1):
                raise MeshFormatError(f"first node index must be 0 or 1, got {idx}", line=lineno)
            base = idx
        row = idx - base
        if not 0 <= row < n_nodes:
            raise MeshFormatError(f"node index {idx} out of range", line=lineno)
        try:
            coords[row] = (float(tokens[1]), float(tokens[2]))
        except ValueError as exc:
            raise MeshFormatError(f"malformed coordinate: {exc}", line=lineno) from None
        if marker_flag:
            markers[row] = int(tokens[3 + n_attr]) != 0
        seen[row] = True
    if not seen.all():
        raise MeshFormatError("duplicate or missing node indices in .node file")

    rows = _content_lines(ele_text)
    try:
        lineno, tokens = next(rows)
    except StopIteration:
        raise MeshFormatError("empty .ele file") from None
    n_tri, per_tri, _ = _parse_ints(tokens, 3, lineno, ".ele header")
    if per_tri != 3:
        raise MeshFormatError(f"expected 3 nodes per triangle, got {per_tri}", line=lineno)
    if n_tri <= 0:
        raise MeshFormatError(f"nonpositive triangle count {n_tri}", line=lineno)

    tris = np.zeros((n_tri, 3), dtype=np.int64)
    tri_lines = np.zeros(n_tri, dtype=np.int64)
    seen = np.zeros(n_tri, dtype=bool)
    ebase = None
    for _ in range(n_tri):
        try:
            lineno, tokens = next(rows)
        except StopIteration:
            raise MeshFormatError(f"expected {n_tri} triangle rows") from None
        vals = _parse_ints(tokens, 4, lineno, "triangle row")
        if ebase is None:
            if vals[0] not in (0, 1):
                raise MeshFormatError(f"first triangle index must be 0 or 1, got {vals[0]}",
                                      line=lineno)
            ebase = vals[0]
        row = vals[0] - ebase
        if not 0 <= row < n_tri:
            raise MeshFormatError(f"triangle index {vals[0]} out of range", line=lineno)
        verts = [v - base for v in vals[1:4]]
        if min(verts) < 0 or max(verts) >= n_nodes:
            raise MeshFormatError(f"vertex index out of range in {vals[1:4]}", line=lineno)
        tris[row] = verts
        tri_lines[row] = lineno
        seen[row] = True
    if not seen.all():
        raise MeshFormatError("duplicate or missing triangle indices in .ele file")

    area2 = _signed_area2(coords, tris)
    if np.any(area2 == 0):
        bad = int(np.flatnonzero(area2 == 0)[0])
        raise MeshFormatError("zero-area triangle", line=int(tri_lines[bad]))

    if not marker_flag:
        markers = np.zeros(n_nodes, dtype=bool)
        for a, b in boundary_edges(tris):
            markers[a] = markers[b] = True
    return TriangularMesh(coords, tris, markers)


def dump_triangle_mesh(mesh):
    """Serialize a mesh to Triangle (node_text, ele_text), 1-based, with markers."""
    lines = [f"{mesh.n_nodes} 2 0 1"]
    for k, (x, y) in enumerate(mesh.nodes, start=1):
        lines.append(f"{k} {float(x)!r} {float(y)!r} {int(mesh.boundary_flags[k - 1])}")
    node_text = "\n".join(lines) + "\n"
    lines = [f"{mesh.n_triangles} 3 0"]
    for k, (a, b, c) in enumerate(mesh.triangles, start=1):
        lines.append(f"{k} {a + 1} {b + 1} {c + 1}")
    return node_text, "\n".join(lines) + "\n"


def read_triangle_files(node_path, ele_path):
    with open(node_path) as fh:
        node_text = fh.read()
    with open(ele_path) as fh:
        ele_text = fh.read()
    return load_triangle_mesh(node_text, ele_text)


def write_triangle_files(mesh, node_path, ele_path):
    node_text, ele_text = dump_triangle_mesh(mesh)
    with open(node_path, "w") as fh:
        fh.write(node_text)
    with open(ele_path, "w") as fh:
        fh.write(ele_text)


# ---------------------------------------------------------------------------
# canonical JSON dump
# ---------------------------------------------------------------------------

def mesh_to_json(mesh):
    """Canonical JSON string for golden tests (round-trips exactly)."""
    payload = {
        "nodes": [[x, y] for x, y in mesh.nodes],
        "triangles": [[int(a), int(b), int(c)] for a, b, c in mesh.triangles],
        "boundary_flags": [bool(f) for f in mesh.boundary_flags],
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def mesh_from_json(text):
    payload = json.loads(text)
    return TriangularMesh(np.array(payload["nodes"], dtype=float),
                          np.array(payload["triangles"], dtype=np.int64),
                          np.array(payload["boundary_flags"], dtype=bool))
