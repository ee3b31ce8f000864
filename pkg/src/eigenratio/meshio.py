"""ASCII readers and writers: OFF, an OBJ subset, and node/ele tet pairs."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .mesh import MeshError, SurfaceMesh, TetMesh


def _tokens(path):
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            yield line.split()


def read_off(path) -> SurfaceMesh:
    lines = _tokens(path)
    try:
        header = next(lines)
        if header[0] != "OFF":
            raise MeshError(f"{path}: missing OFF header")
        counts = header[1:] if len(header) > 1 else next(lines)
        nv, nf = int(counts[0]), int(counts[1])
        verts = [[float(x) for x in next(lines)[:3]] for _ in range(nv)]
        faces = []
        for _ in range(nf):
            rec = next(lines)
            if int(rec[0]) != 3:
                raise MeshError(f"{path}: only triangular faces are supported")
            faces.append([int(x) for x in rec[1:4]])
    except (StopIteration, ValueError, IndexError) as exc:
        if isinstance(exc, MeshError):
            raise
        raise MeshError(f"{path}: OFF parse failure ({exc.__class__.__name__})") from exc
    return SurfaceMesh(np.array(verts).reshape(-1, 3), np.array(faces, dtype=np.int64).reshape(-1, 3))


def write_off(mesh: SurfaceMesh, path) -> None:
    out = ["OFF", f"{mesh.n_vertices} {mesh.n_faces} 0"]
    out += [f"{x!r} {y!r} {z!r}" for x, y, z in mesh.vertices.tolist()]
    out += [f"3 {a} {b} {c}" for a, b, c in mesh.faces.tolist()]
    Path(path).write_text("\n".join(out) + "\n")


def read_obj(path) -> SurfaceMesh:
    verts, faces = [], []
    try:
        for rec in _tokens(path):
            if rec[0] == "v":
                verts.append([float(x) for x in rec[1:4]])
            elif rec[0] == "f":
                if len(rec) != 4:
                    raise MeshError(f"{path}: only triangular faces are supported")
                faces.append([int(x.split("/")[0]) - 1 for x in rec[1:]])
    except ValueError as exc:
        if isinstance(exc, MeshError):
            raise
        raise MeshError(f"{path}: OBJ parse failure") from exc
    return SurfaceMesh(np.array(verts).reshape(-1, 3), np.array(faces, dtype=np.int64).reshape(-1, 3))


def write_obj(mesh: SurfaceMesh, path) -> None:
    out = [f"v {x!r} {y!r} {z!r}" for x, y, z in mesh.vertices.tolist()]
    out += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.faces.tolist()]
    Path(path).write_text("\n".join(out) + "\n")


def load_surface(path, format: str | None = None) -> SurfaceMesh:
    fmt = (format or Path(path).suffix.lstrip(".")).lower()
    if fmt == "off":
        return read_off(path)
    if fmt == "obj":
        return read_obj(path)
    raise MeshError(f"unsupported surface format {fmt!r}")


def save_surface(mesh: SurfaceMesh, path, format: str | None = None) -> None:
    fmt = (format or Path(path).suffix.lstrip(".")).lower()
    if fmt == "off":
        write_off(mesh, path)
    elif fmt == "obj":
        write_obj(mesh, path)
    else:
        raise MeshError(f"unsupported surface format {fmt!r}")


def _node_ele_paths(path):
    base = Path(path)
    if base.suffix in (".node", ".ele"):
        base = base.with_suffix("")
    return base.with_suffix(".node"), base.with_suffix(".ele")


def _read_table(path, width):
    lines = _tokens(path)
    try:
        count = int(next(lines)[0])
        rows = [next(lines) for _ in range(count)]
        index = np.array([int(r[0]) for r in rows], dtype=np.int64)
        data = np.array([r[1:1 + width] for r in rows], dtype=float).reshape(-1, width)
    except (StopIteration, ValueError, IndexError) as exc:
        raise MeshError(f"{path}: parse failure ({exc.__class__.__name__})") from exc
    if not np.array_equal(index, np.arange(1, count + 1)):
        raise MeshError(f"{path}: records must be numbered 1..{count}")
    return data


def load_tet(path) -> TetMesh:
    """Read ``base.node`` / ``base.ele`` (1-based); boundary is inferred."""
    node, ele = _node_ele_paths(path)
    verts = _read_table(node, 3)
    tets = _read_table(ele, 4).astype(np.int64) - 1
    return TetMesh(verts, tets)


def save_tet(tet: TetMesh, path) -> None:
    node, ele = _node_ele_paths(path)
    out = [str(tet.n_vertices)]
    out += [f"{i} {x!r} {y!r} {z!r}" for i, (x, y, z) in enumerate(tet.vertices.tolist(), 1)]
    node.write_text("\n".join(out) + "\n")
    out = [str(len(tet.tets))]
    out += [f"{i} {a + 1} {b + 1} {c + 1} {d + 1}" for i, (a, b, c, d) in enumerate(tet.tets.tolist(), 1)]
    ele.write_text("\n".join(out) + "\n")
