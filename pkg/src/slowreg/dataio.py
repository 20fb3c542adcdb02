"""File formats: observation CSV, edge-list text, and key-value metadata.

The observation file is a CSV with header `vertex,y,x0,...,x{D-1}`, one row
per observation, vertices numbered from 0. Per-vertex row counts may differ.
Floats are written with `repr`, which round-trips exactly, so a dataset
survives dump/load bit-for-bit. The graph file holds one `s t` edge per
line (0-based); the metadata sidecar holds `key=value` lines.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .graph import SimilarityGraph
from .problem import ProblemInstance


def write_data_csv(path, x_blocks, y_blocks) -> None:
    """One row per observation, grouped by vertex, full float precision."""
    x_blocks = [np.asarray(x, dtype=np.float64) for x in x_blocks]
    y_blocks = [np.asarray(y, dtype=np.float64).ravel() for y in y_blocks]
    if len(x_blocks) != len(y_blocks):
        raise ValueError("need one y block per x block")
    d = x_blocks[0].shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["vertex", "y"] + [f"x{j}" for j in range(d)])
        for v, (x, y) in enumerate(zip(x_blocks, y_blocks)):
            for i in range(x.shape[0]):
                writer.writerow(
                    [str(v), repr(float(y[i]))]
                    + [repr(float(val)) for val in x[i]]
                )


def read_data_csv(path):
    """Parse the observation CSV back into per-vertex (x, y) blocks.

    Vertices must cover 0..T-1 with at least one row each; row order within
    a vertex follows file order.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty data file") from None
        if len(header) < 3 or header[0] != "vertex" or header[1] != "y":
            raise ValueError(
                f"{path}: header must start with vertex,y,x0,... got {header[:3]}"
            )
        d = len(header) - 2
        want = [f"x{j}" for j in range(d)]
        if header[2:] != want:
            raise ValueError(f"{path}: feature columns must be x0..x{d - 1} in order")
        rows_by_vertex: dict[int, list] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != d + 2:
                raise ValueError(
                    f"{path}:{lineno}: expected {d + 2} fields, got {len(row)}"
                )
            try:
                v = int(row[0])
                vals = [float(c) for c in row[1:]]
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            if v < 0:
                raise ValueError(f"{path}:{lineno}: negative vertex id {v}")
            rows_by_vertex.setdefault(v, []).append(vals)
    if not rows_by_vertex:
        raise ValueError(f"{path}: no data rows")
    t = max(rows_by_vertex) + 1
    missing = [v for v in range(t) if v not in rows_by_vertex]
    if missing:
        raise ValueError(f"{path}: vertices {missing} have no rows")
    x_blocks, y_blocks = [], []
    for v in range(t):
        block = np.asarray(rows_by_vertex[v], dtype=np.float64)
        y_blocks.append(block[:, 0].copy())
        x_blocks.append(block[:, 1:].copy())
    return x_blocks, y_blocks


def write_edge_list(path, graph: SimilarityGraph) -> None:
    with open(path, "w") as fh:
        for s, t in graph.edges:
            fh.write(f"{s} {t}\n")


def read_edge_list(path, vertex_count: int) -> SimilarityGraph:
    """Edge-per-line text file into a graph over the given vertex range."""
    path = Path(path)
    edges = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise ValueError(
                    f"{path}:{lineno}: expected 's t', got {line.strip()!r}"
                )
            try:
                s, t = int(parts[0]), int(parts[1])
            except ValueError:
                raise ValueError(
                    f"{path}:{lineno}: non-integer vertex in {line.strip()!r}"
                ) from None
            edges.append((s, t))
    return SimilarityGraph(vertex_count, tuple(edges))


def write_metadata(path, mapping: dict) -> None:
    """Flat key=value sidecar; None values are omitted."""
    with open(path, "w") as fh:
        for key, value in mapping.items():
            if value is None:
                continue
            if isinstance(value, float):
                fh.write(f"{key}={value!r}\n")
            else:
                fh.write(f"{key}={value}\n")


def read_metadata(path) -> dict:
    """The sidecar back as a string-to-string mapping."""
    path = Path(path)
    out: dict[str, str] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, _, value = stripped.partition("=")
            out[key.strip()] = value.strip()
    return out


def write_beta_csv(path, beta: np.ndarray, vertex_count: int) -> None:
    """True or fitted coefficients, one row per vertex."""
    beta = np.asarray(beta, dtype=np.float64).reshape(vertex_count, -1)
    d = beta.shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["vertex"] + [f"beta{j}" for j in range(d)])
        for v in range(vertex_count):
            writer.writerow([str(v)] + [repr(float(val)) for val in beta[v]])


def read_beta_csv(path) -> np.ndarray:
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        d = len(header) - 1
        rows = {}
        for row in reader:
            if not row:
                continue
            rows[int(row[0])] = [float(c) for c in row[1:]]
    t = max(rows) + 1
    out = np.zeros((t, d))
    for v in range(t):
        out[v] = rows[v]
    return out.ravel()


def load_instance(
    data_path,
    lambda_beta: float,
    lambda_delta: float,
    graph_path=None,
    chain: bool = False,
) -> ProblemInstance:
    """Observation CSV plus either an edge-list file or an implied chain."""
    x_blocks, y_blocks = read_data_csv(data_path)
    t = len(x_blocks)
    if chain and graph_path is not None:
        raise ValueError("give either a graph file or the chain flag, not both")
    if chain:
        graph = SimilarityGraph.chain(t)
    elif graph_path is not None:
        graph = read_edge_list(graph_path, t)
    else:
        raise ValueError("a graph file or the chain flag is required")
    return ProblemInstance(
        graph=graph,
        x_blocks=tuple(x_blocks),
        y_blocks=tuple(y_blocks),
        lambda_beta=lambda_beta,
        lambda_delta=lambda_delta,
    )


def dump_dataset(prefix, dataset) -> dict:
    """Write train/test/beta/graph/meta files sharing one path prefix.

    Returns the path of every file written, keyed by role.
    """
    prefix = str(prefix)
    params = dataset.params
    paths = {
        "train": f"{prefix}_train.csv",
        "test": f"{prefix}_test.csv",
        "beta": f"{prefix}_beta.csv",
        "graph": f"{prefix}_graph.txt",
        "meta": f"{prefix}_meta.txt",
    }
    write_data_csv(paths["train"], dataset.instance.x_blocks, dataset.instance.y_blocks)
    write_data_csv(
        paths["test"],
        [x for x, _ in dataset.test_blocks],
        [y for _, y in dataset.test_blocks],
    )
    write_beta_csv(paths["beta"], dataset.beta_true, params.t)
    write_edge_list(paths["graph"], dataset.instance.graph)
    meta = dict(params.to_dict())
    meta.update(dataset.metadata)
    write_metadata(paths["meta"], meta)
    return paths
