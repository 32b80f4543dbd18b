"""Readers and writers for networks, profiles and result tables."""

import csv
import json
from pathlib import Path

import numpy as np

from .exceptions import ParameterError
from .network import WeightedNetwork


def fmt(x):
    """Shortest round-tripping text for a float (stable across runs)."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return repr(float(x))


def read_network_csv(path):
    """CSV adjacency: first row holds ``n``, then ``n`` rows of ``n`` weights."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise ParameterError(f"{path}: empty network file")
    try:
        n = int(float(rows[0][0]))
        g = np.array([[float(c) for c in r] for r in rows[1:]], dtype=float)
    except ValueError as exc:
        raise ParameterError(f"{path}: {exc}") from exc
    if g.shape != (n, n):
        raise ParameterError(f"{path}: header says n={n} but matrix is {g.shape}")
    return WeightedNetwork(g)


def write_network_csv(path, net):
    g = net.weights if isinstance(net, WeightedNetwork) else np.asarray(net)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([g.shape[0]])
        for row in g:
            w.writerow([fmt(v) for v in row])


def read_network_json(path, normalize=False):
    """``{"n": n, "edges": [[i, j, w], ...]}`` with 0-based agent ids."""
    with open(path) as fh:
        doc = json.load(fh)
    return network_from_edges(doc["n"], doc.get("edges", []), normalize=normalize)


def network_from_edges(n, edges, normalize=False):
    g = np.zeros((int(n), int(n)))
    for e in edges:
        i, j, w = int(e[0]), int(e[1]), float(e[2])
        g[i, j] += w
    if normalize:
        return WeightedNetwork.from_adjacency(g)
    return WeightedNetwork(g)


def write_network_json(path, net):
    g = net.weights
    edges = [[int(i), int(j), float(g[i, j])] for i, j in zip(*np.nonzero(g))]
    with open(path, "w") as fh:
        json.dump({"n": int(g.shape[0]), "edges": edges}, fh, indent=1)


def read_network(path, normalize=False):
    path = Path(path)
    if path.suffix.lower() == ".json":
        return read_network_json(path, normalize=normalize)
    net = read_network_csv(path)
    return net


def read_vector_csv(path):
    """Single-column CSV; a non-numeric first row is treated as a header."""
    values = []
    with open(path, newline="") as fh:
        for k, row in enumerate(csv.reader(fh)):
            if not row or not row[0].strip():
                continue
            try:
                values.append(float(row[0]))
            except ValueError:
                if k == 0:
                    continue
                raise ParameterError(f"{path}: non-numeric value {row[0]!r} on line {k + 1}")
    return np.array(values, dtype=float)


def write_vector_csv(path, values, header="alpha"):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([header])
        for v in values:
            w.writerow([fmt(v)])


def write_table(path, header, rows):
    """Plain CSV with ``repr`` floats so identical inputs give identical bytes."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def read_table(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(to_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if np.isfinite(x) else str(x)
    if isinstance(obj, Path):
        return str(obj)
    return obj
