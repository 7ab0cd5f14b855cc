"""Plain-text file formats: .crv curves, OBJ quad meshes, multiresolution archives."""

from __future__ import annotations

import os

import numpy as np

from ..errors import ConfigError, StructuralError
from .mesh import CLOSED, OPEN, QUAD, ControlMesh
from .multires import MultiresModel

_FMT = "%.17g"
_AXES = "xyz"


def _fmt_row(row):
    return " ".join(_FMT % v for v in row)


def _frozen_lines(mesh):
    lines = []
    for i, row in enumerate(mesh.frozen):
        if row.any():
            mask = "".join(_AXES[k] for k in np.nonzero(row)[0])
            lines.append(f"frozen {i}" if row.all() else f"frozen {i} {mask}")
    return lines


def write_crv(path, mesh, vectors=None):
    """Write a curve; ``vectors`` (same shape as vertices) go in a ``vectors`` section."""
    if not mesh.is_curve:
        raise StructuralError("write_crv needs a curve")
    lines = [f"crv {mesh.dim} {mesh.n_vertices} {int(mesh.kind == CLOSED)}"]
    lines += [_fmt_row(v) for v in mesh.vertices]
    tags = [f"corner {c}" for c in sorted(mesh.corners)] + _frozen_lines(mesh)
    if mesh.level:
        tags.append(f"level {mesh.level}")
    if tags:
        lines += ["tags"] + tags
    if vectors is not None:
        lines += ["vectors"] + [_fmt_row(v) for v in np.asarray(vectors)]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _content_lines(path):
    with open(path) as fh:
        for no, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if line:
                yield no, line


def read_crv(path, with_vectors=False):
    lines = list(_content_lines(path))
    if not lines:
        raise ConfigError(f"{path}: empty curve file")
    no, head = lines[0]
    parts = head.split()
    if len(parts) != 4 or parts[0] != "crv":
        raise ConfigError("expected 'crv <dim> <n> <closed>' header", no)
    try:
        dim, n, closed = int(parts[1]), int(parts[2]), int(parts[3])
    except ValueError:
        raise ConfigError("malformed crv header", no) from None
    if len(lines) < n + 1:
        raise ConfigError(f"expected {n} coordinate lines", lines[-1][0])
    coords = []
    for no, line in lines[1:n + 1]:
        try:
            row = [float(t) for t in line.split()]
        except ValueError:
            raise ConfigError(f"bad coordinate line {line!r}", no) from None
        if len(row) != dim:
            raise ConfigError(f"expected {dim} coordinates", no)
        coords.append(row)
    corners, frozen, vectors, level = [], {}, [], 0
    section = None
    for no, line in lines[n + 1:]:
        tok = line.split()
        if tok[0] in ("tags", "vectors") and len(tok) == 1:
            section = tok[0]
        elif section == "tags" and tok[0] == "corner" and len(tok) == 2:
            corners.append(int(tok[1]))
        elif section == "tags" and tok[0] == "frozen" and len(tok) in (2, 3):
            frozen[int(tok[1])] = tok[2] if len(tok) == 3 else _AXES[:dim]
        elif section == "tags" and tok[0] == "level" and len(tok) == 2:
            level = int(tok[1])
        elif section == "vectors":
            vectors.append([float(t) for t in tok])
        else:
            raise ConfigError(f"unexpected line {line!r}", no)
    mesh = ControlMesh(coords, CLOSED if closed else OPEN, corners=corners,
                       frozen=frozen, level=level)
    if with_vectors:
        return mesh, (np.array(vectors) if vectors else None)
    return mesh


def write_obj(path, mesh):
    """Quad mesh as OBJ plus a ``.tags`` sidecar (1-based face indices in OBJ only)."""
    if mesh.kind != QUAD:
        raise StructuralError("write_obj needs a quad mesh")
    lines = ["v " + _fmt_row(v) for v in mesh.vertices]
    lines += ["f " + " ".join(str(i + 1) for i in f) for f in mesh.faces]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    tags = [f"crease {a} {b}" for a, b in sorted(mesh.creases)]
    tags += [f"corner {c}" for c in sorted(mesh.corners)] + _frozen_lines(mesh)
    if mesh.level:
        tags.append(f"level {mesh.level}")
    if tags:
        with open(_tags_path(path), "w") as fh:
            fh.write("\n".join(tags) + "\n")


def _tags_path(path):
    return os.path.splitext(path)[0] + ".tags"


def read_obj(path):
    verts, faces = [], []
    for no, line in _content_lines(path):
        tok = line.split()
        if tok[0] == "v":
            verts.append([float(t) for t in tok[1:4]])
        elif tok[0] == "f":
            if len(tok) != 5:
                raise ConfigError("only quad faces are supported", no)
            faces.append([int(t.split("/")[0]) - 1 for t in tok[1:]])
    creases, corners, frozen, level = [], [], {}, 0
    tags = _tags_path(path)
    if os.path.exists(tags):
        for no, line in _content_lines(tags):
            tok = line.split()
            if tok[0] == "crease" and len(tok) == 3:
                creases.append((int(tok[1]), int(tok[2])))
            elif tok[0] == "corner" and len(tok) == 2:
                corners.append(int(tok[1]))
            elif tok[0] == "frozen" and len(tok) in (2, 3):
                frozen[int(tok[1])] = tok[2] if len(tok) == 3 else "xyz"
            elif tok[0] == "level" and len(tok) == 2:
                level = int(tok[1])
            else:
                raise ConfigError(f"unexpected tag line {line!r}", no)
    return ControlMesh(verts, QUAD, faces, corners, frozen, creases, level)


def read_mesh(path):
    return read_obj(path) if path.lower().endswith(".obj") else read_crv(path)


def write_mesh(path, mesh):
    if mesh.kind == QUAD:
        write_obj(path, mesh)
    else:
        write_crv(path, mesh)


def write_archive(directory, model):
    os.makedirs(directory, exist_ok=True)
    base = model.base
    name = "base.obj" if base.kind == QUAD else "base.crv"
    write_mesh(os.path.join(directory, name), base)
    for k, d in enumerate(model.details):
        np.savetxt(os.path.join(directory, f"detail_{model.base_level + k}.txt"), d, fmt=_FMT)
    scheme = "catmull-clark" if base.kind == QUAD else "cubic-bspline"
    with open(os.path.join(directory, "meta.txt"), "w") as fh:
        fh.write(f"scheme = {scheme}\nbase_level = {model.base_level}\n"
                 f"levels = {len(model.details)}\n")


def read_archive(directory):
    meta = {}
    for no, line in _content_lines(os.path.join(directory, "meta.txt")):
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"expected 'key = value', got {line!r}", no)
        meta[key.strip()] = value.strip()
    obj = os.path.join(directory, "base.obj")
    base = read_obj(obj) if os.path.exists(obj) else read_crv(os.path.join(directory, "base.crv"))
    base_level = int(meta.get("base_level", base.level))
    base = base.with_vertices(base.vertices, level=base_level)
    details = []
    for k in range(int(meta.get("levels", 0))):
        d = np.loadtxt(os.path.join(directory, f"detail_{base_level + k}.txt"), ndmin=2)
        details.append(d)
    return MultiresModel(base, details)
