"""Height-field sampling, branch-aware triangulation and text export.

Meshes are built sheet by sheet from row-major samples (y outer, x inner).
Each grid cell becomes two triangles ``(v00, v10, v11)`` and
``(v00, v11, v01)`` unless one of its corners is a flagged core node or the
heights across the cell spread by more than the jump threshold, i.e. the
cell straddles a branch cut. Such cells are dropped and counted; no vertical
walls are fabricated.

All writers produce LF-terminated text with fixed formatting so identical
inputs give identical bytes.
"""

from __future__ import annotations

import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from . import surface
from .differential import HeightFunction, ResidualReport, scherk_function
from .energy import EnergyScan
from .errors import EmptyGrid, IoFailure
from .surface import PRINCIPAL, BranchPolicy, GrainAngle, HeightSample, Point, Window

#: fixed decimals of OBJ coordinates (round trip to better than 1e-9)
OBJ_DECIMALS = 9
CSV_FORMAT = "%.17e"

Destination = Union[str, os.PathLike, io.IOBase, None]


@dataclass(frozen=True)
class HeightField:
    """Samples of one sheet on an ``nx x ny`` grid, row-major (index ``j*nx + i``).

    Flagged nodes (within the exclusion radius of a core, or non-finite)
    carry ``z = nan``.
    """

    window: Window
    nx: int
    ny: int
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    flagged: np.ndarray
    branch: BranchPolicy = PRINCIPAL
    quantum: float = math.nan

    @property
    def sheet(self) -> int:
        return self.branch.sheet

    def __len__(self):
        return self.nx * self.ny

    @property
    def samples(self) -> list[HeightSample]:
        return [HeightSample(Point(float(a), float(b)), float(c), self.branch, bool(f))
                for a, b, c, f in zip(self.x, self.y, self.z, self.flagged)]


@dataclass(frozen=True)
class Mesh:
    """Vertices, 0-based triangles and per-triangle sheet labels."""

    vertices: np.ndarray
    triangles: np.ndarray
    sheets: np.ndarray
    dropped: int = 0
    name: str = "mesh"
    dropped_per_sheet: dict = field(default_factory=dict)

    @classmethod
    def empty(cls, name: str = "empty") -> "Mesh":
        return cls(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64), np.zeros(0, dtype=np.int64), 0, name)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def validate(self):
        if not np.all(np.isfinite(self.vertices)):
            raise ValueError("mesh has non-finite vertex coordinates")
        if self.triangles.size and (self.triangles.min() < 0 or self.triangles.max() >= self.n_vertices):
            raise ValueError("triangle index out of range")


# ---------------------------------------------------------------------------
# sampling


def sample_grid(h: HeightFunction, window: Window, nx: int, ny: int,
                b: BranchPolicy = PRINCIPAL, quantum: Optional[float] = None,
                exclusion_radius: float = surface.NEAR_CORE_RADIUS,
                threads: int = 1) -> HeightField:
    """Sample ``h`` (plus ``b.sheet`` jump quanta) on a row-major grid.

    ``quantum`` is the height jump between sheets; it is needed for sheets
    other than 0 and sets the default cut threshold of :func:`triangulate`.
    """
    if nx < 2 or ny < 2:
        raise EmptyGrid(f"grid needs at least 2x2 nodes, got {nx}x{ny}")
    if b.sheet and quantum is None:
        raise ValueError("a jump quantum is required to sample a sheet other than 0")
    xs = np.linspace(window.xmin, window.xmax, nx)
    ys = np.linspace(window.ymin, window.ymax, ny)

    def row(yj):
        y = np.full(nx, yj)
        with np.errstate(all="ignore"):
            z = np.asarray(h.value(xs, y), dtype=float) * np.ones(nx)
        dist = np.full(nx, np.inf) if h.core_distance is None else h.core_distance(xs, y)
        return z, dist

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(row, ys))
    else:
        rows = [row(yj) for yj in ys]
    z = np.concatenate([r[0] for r in rows])
    dist = np.concatenate([r[1] for r in rows])
    flagged = (dist <= exclusion_radius) | ~np.isfinite(z)
    if flagged.all():
        raise EmptyGrid("every grid node is core-adjacent")
    if b.sheet:
        z = z + b.sheet * quantum
    z = np.where(flagged, np.nan, z)
    X, Y = np.meshgrid(xs, ys)
    q = math.nan if quantum is None else float(quantum)
    return HeightField(window, nx, ny, X.ravel(), Y.ravel(), z, flagged, b, q)


def scherk_field(g: GrainAngle, window: Window, nx: int, ny: int, sheet: int = 0,
                 threads: int = 1) -> HeightField:
    return sample_grid(scherk_function(g), window, nx, ny, BranchPolicy(sheet), g.jump, threads=threads)


# ---------------------------------------------------------------------------
# triangulation


def _cell_triangles(f: HeightField, threshold: float):
    nx, ny = f.nx, f.ny
    bad = f.flagged.reshape(ny, nx)
    z = np.where(bad, 0.0, f.z.reshape(ny, nx))  # flagged cells are dropped regardless
    corners = np.stack([z[:-1, :-1], z[:-1, 1:], z[1:, :-1], z[1:, 1:]])
    spread = corners.max(axis=0) - corners.min(axis=0)
    flagged = bad[:-1, :-1] | bad[:-1, 1:] | bad[1:, :-1] | bad[1:, 1:]
    keep = ~flagged & ~(spread > threshold)
    jj, ii = np.nonzero(keep)  # row-major cell order
    v00 = jj * nx + ii
    v10 = v00 + 1
    v01 = v00 + nx
    v11 = v01 + 1
    tris = np.empty((2 * len(v00), 3), dtype=np.int64)
    tris[0::2] = np.stack([v00, v10, v11], axis=1)
    tris[1::2] = np.stack([v00, v11, v01], axis=1)
    return tris, int(keep.size - keep.sum())


def triangulate(fields: Union[HeightField, Sequence[HeightField]],
                jump_threshold: Optional[float] = None, name: str = "mesh") -> Mesh:
    """Two triangles per grid cell, dropping cut and core cells.

    ``jump_threshold`` defaults to half the jump quantum of each field (no
    cutting if the quantum is unknown); ``inf`` disables cutting. Several
    fields are merged into one mesh with per-triangle sheet labels. Flagged
    vertices are kept (so each sheet has ``nx * ny`` vertices) at the sheet's
    base height, which lies on the vertical core line; no triangle uses them.
    """
    if isinstance(fields, HeightField):
        fields = [fields]
    verts, tris, labels = [], [], []
    dropped, per_sheet = 0, {}
    offset = 0
    for f in fields:
        thr = jump_threshold
        if thr is None:
            thr = 0.5 * f.quantum if math.isfinite(f.quantum) else math.inf
        t, d = _cell_triangles(f, thr)
        base = f.sheet * f.quantum if f.sheet else 0.0
        z = np.where(f.flagged, base, f.z)
        verts.append(np.stack([f.x, f.y, z], axis=1))
        tris.append(t + offset)
        labels.append(np.full(len(t), f.sheet, dtype=np.int64))
        dropped += d
        per_sheet[f.sheet] = per_sheet.get(f.sheet, 0) + d
        offset += len(f)
    if not verts:
        return Mesh.empty(name)
    return Mesh(np.concatenate(verts), np.concatenate(tris), np.concatenate(labels),
                dropped, name, per_sheet)


# ---------------------------------------------------------------------------
# writers


def _fmt(v: float, decimals: int = OBJ_DECIMALS) -> str:
    s = f"{v:.{decimals}f}"
    if s.startswith("-") and not s.strip("-0."):
        s = s[1:]
    return s


def obj_text(m: Mesh) -> str:
    """Wavefront OBJ text; ``g sheet_k`` groups appear only for multi-sheet meshes."""
    m.validate()
    out = [f"# {m.name}: {m.n_vertices} vertices, {m.n_triangles} triangles, "
           f"{m.dropped} cells dropped\n"]
    if m.n_vertices == 0:
        return out[0]
    for x, y, z in m.vertices.tolist():
        out.append(f"v {_fmt(x)} {_fmt(y)} {_fmt(z)}\n")
    grouped = len(np.unique(m.sheets)) > 1
    current = None
    for (a, b, c), s in zip((m.triangles + 1).tolist(), m.sheets.tolist()):
        if grouped and s != current:
            out.append(f"g sheet_{s}\n")
            current = s
        out.append(f"f {a} {b} {c}\n")
    return "".join(out)


def _emit(text: str, destination: Destination) -> bytes:
    data = text.encode("ascii")
    if destination is None:
        return data
    try:
        if hasattr(destination, "write"):
            try:
                destination.write(data)
            except TypeError:
                destination.write(text)
        else:
            with open(destination, "wb") as fh:
                fh.write(data)
    except OSError as exc:
        raise IoFailure(f"cannot write output: {exc}") from exc
    return data


def export_obj(m: Mesh, destination: Destination = None) -> bytes:
    """Write ``m`` as OBJ to a path or stream; returns the bytes written."""
    return _emit(obj_text(m), destination)


def parse_obj(text: Union[str, bytes]) -> tuple[np.ndarray, np.ndarray]:
    """Vertices and 0-based triangles of an OBJ produced by :func:`export_obj`."""
    if isinstance(text, bytes):
        text = text.decode("ascii")
    verts, faces = [], []
    for line in text.splitlines():
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        if parts[0] == "v":
            verts.append([float(p) for p in parts[1:4]])
        elif parts[0] == "f":
            faces.append([int(p.split("/")[0]) - 1 for p in parts[1:4]])
    return np.array(verts, dtype=float).reshape(-1, 3), np.array(faces, dtype=np.int64).reshape(-1, 3)


def _csv_row(values) -> str:
    cells = []
    for v in values:
        if isinstance(v, (bool, np.bool_)):
            cells.append("1" if v else "0")
        elif isinstance(v, (int, np.integer)):
            cells.append(str(int(v)))
        else:
            cells.append(CSV_FORMAT % v)
    return ",".join(cells) + "\n"


def csv_text(obj) -> str:
    """CSV for a HeightField, EnergyScan or ResidualReport.

    Columns:
      HeightField     x, y, z, sheet, flagged
      EnergyScan      <parameter>, energy
      ResidualReport  x, y, residual, excluded
    Flagged/excluded rows are kept with ``nan`` values.
    """
    if isinstance(obj, HeightField):
        rows = ["x,y,z,sheet,flagged\n"]
        rows += [_csv_row((a, b, c, obj.sheet, bool(f)))
                 for a, b, c, f in zip(obj.x.tolist(), obj.y.tolist(), obj.z.tolist(), obj.flagged)]
    elif isinstance(obj, EnergyScan):
        rows = [f"{obj.parameter},energy\n"]
        rows += [_csv_row((v, e)) for v, e in zip(obj.values, obj.energies)]
    elif isinstance(obj, ResidualReport):
        rows = ["x,y,residual,excluded\n"]
        rows += [_csv_row((a, b, r, bool(e)))
                 for a, b, r, e in zip(obj.x.tolist(), obj.y.tolist(), obj.residuals.tolist(), obj.excluded)]
    else:
        raise TypeError(f"no CSV layout for {type(obj).__name__}")
    return "".join(rows)


def export_csv(obj, destination: Destination = None) -> bytes:
    return _emit(csv_text(obj), destination)


# ---------------------------------------------------------------------------
# stacked-sheet preset

FIGURE1_ALPHA = 0.5 * math.pi
FIGURE1_NODES = 97
FIGURE1_SHEETS = (-1, 0, 1)


def figure1_window(g: GrainAngle) -> Window:
    return Window(-4.0, 4.0, -2.0 * g.ell, 2.0 * g.ell)


def figure1_mesh(threads: int = 1, nodes: int = FIGURE1_NODES,
                 sheets: Sequence[int] = FIGURE1_SHEETS) -> Mesh:
    """Three stacked sheets of the right-angle surface over two periods."""
    g = GrainAngle(FIGURE1_ALPHA)
    w = figure1_window(g)
    fields = [scherk_field(g, w, nodes, nodes, k, threads) for k in sheets]
    return triangulate(fields, name=f"scherk alpha=pi/2 sheets={tuple(sheets)}")
