"""Plain-text file formats.

Matrix::

    symmat m
    a11 a12 ... a1m
    ...

Graph (0-indexed vertices, one edge per line)::

    graph m
    u v

Dataset::

    pairs n m
    u v y
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from simkernel.graph import Graph
from simkernel.sampling import Dataset
from simkernel.symmat import as_symmetric


def _lines(path):
    with open(path) as fh:
        return [ln.strip() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]


def _header(line: str, tag: str, nfields: int, path) -> list:
    parts = line.split()
    if len(parts) != nfields + 1 or parts[0] != tag:
        raise ValueError(f"{path}: expected header '{tag} ...', got {line!r}")
    return [int(x) for x in parts[1:]]


def write_symmat(path, M) -> None:
    M = np.asarray(M, dtype=float)
    m = M.shape[0]
    with open(path, "w") as fh:
        fh.write(f"symmat {m}\n")
        for row in M:
            fh.write(" ".join(repr(float(x)) for x in row) + "\n")


def read_symmat(path) -> np.ndarray:
    lines = _lines(path)
    if not lines:
        raise ValueError(f"{path}: empty file")
    (m,) = _header(lines[0], "symmat", 1, path)
    if len(lines) != m + 1:
        raise ValueError(f"{path}: expected {m} rows, found {len(lines) - 1}")
    M = np.array([[float(x) for x in ln.split()] for ln in lines[1:]])
    if M.shape != (m, m):
        raise ValueError(f"{path}: matrix is not {m}x{m}")
    if np.max(np.abs(M - M.T)) > 1e-12:
        raise ValueError(f"{path}: matrix is not symmetric within 1e-12")
    return as_symmetric(M)


def write_graph(path, g: Graph) -> None:
    with open(path, "w") as fh:
        fh.write(f"graph {g.m}\n")
        for u, v in g.sorted_edges():
            fh.write(f"{u} {v}\n")


def read_graph(path) -> Graph:
    lines = _lines(path)
    if not lines:
        raise ValueError(f"{path}: empty file")
    (m,) = _header(lines[0], "graph", 1, path)
    edges = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise ValueError(f"{path}: bad edge line {ln!r}")
        edges.append((int(parts[0]), int(parts[1])))
    return Graph.from_edges(m, edges)


def write_dataset(path, ds: Dataset) -> None:
    with open(path, "w") as fh:
        fh.write(f"pairs {ds.n} {ds.m}\n")
        for u, v, y in zip(ds.u, ds.v, ds.y):
            fh.write(f"{u} {v} {y}\n")


def read_dataset(path) -> Dataset:
    lines = _lines(path)
    if not lines:
        raise ValueError(f"{path}: empty file")
    n, m = _header(lines[0], "pairs", 2, path)
    if len(lines) != n + 1:
        raise ValueError(f"{path}: expected {n} observations, found {len(lines) - 1}")
    arr = np.array([[int(x) for x in ln.split()] for ln in lines[1:]], dtype=np.int64).reshape(n, 3)
    return Dataset(m, arr[:, 0].copy(), arr[:, 1].copy(), arr[:, 2].copy(), 0)


def ensure_parent(path) -> Path:
    p = Path(path)
    if p.parent and not p.parent.exists():
        p.parent.mkdir(parents=True)
    return p
