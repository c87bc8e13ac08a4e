"""JSON bundles and CSV outputs.

Every document carries ``"schema": "sqw/1"``. Complex numbers are ``[re, im]``
pairs and floats are written in shortest round-trip form, so loading a dumped
bundle reproduces the in-memory values exactly.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .graph import BipartiteGraph, EdgeBijection, Graph
from .szegedy import SzegedyInstance
from .tessellation import Polygon, Tessellation

SCHEMA = "sqw/1"


class SchemaError(ValueError):
    """Input document does not match the expected layout."""


@dataclass(eq=True)
class Bundle:
    """One JSON document describing a complete run input."""

    graph: Graph | None = None
    bipartite: BipartiteGraph | None = None
    labels: list[str] | None = None
    tessellations: list[Tessellation] = field(default_factory=list)
    szegedy: SzegedyInstance | None = None
    chain: np.ndarray | None = None
    krausz: list[list[int]] | None = None
    options: dict[str, Any] = field(default_factory=dict)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Bundle):
            return NotImplemented
        chains_equal = (self.chain is None and other.chain is None) or (
            self.chain is not None and other.chain is not None and np.array_equal(self.chain, other.chain)
        )
        return (
            self.graph == other.graph
            and self.bipartite == other.bipartite
            and self.labels == other.labels
            and self.tessellations == other.tessellations
            and self.szegedy == other.szegedy
            and chains_equal
            and self.krausz == other.krausz
            and self.options == other.options
        )


def parse_complex(value) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise SchemaError(f"expected a number or an [re, im] pair, got {value!r}")


def complex_to_json(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def _require(doc: dict, key: str, where: str):
    if key not in doc:
        raise SchemaError(f"{where}: missing field {key!r}")
    return doc[key]


def graph_to_dict(g: Graph, labels: Sequence[str] | None = None) -> dict:
    out: dict[str, Any] = {"n": g.n, "edges": [list(e) for e in g.edges]}
    if labels is not None:
        out["labels"] = list(labels)
    return out


def graph_from_dict(doc: dict) -> tuple[Graph, list[str] | None]:
    n = _require(doc, "n", "graph")
    edges = _require(doc, "edges", "graph")
    labels = doc.get("labels")
    if labels is not None and len(labels) != n:
        raise SchemaError(f"graph: {len(labels)} labels for {n} vertices")
    return Graph(int(n), tuple((int(i), int(j)) for i, j in edges)), labels


def bipartite_to_dict(b: BipartiteGraph) -> dict:
    return {"x": b.x_count, "y": b.y_count, "edges": [list(e) for e in b.edges]}


def bipartite_from_dict(doc: dict) -> BipartiteGraph:
    return BipartiteGraph(
        int(_require(doc, "x", "bipartite")),
        int(_require(doc, "y", "bipartite")),
        tuple((int(x), int(y)) for x, y in _require(doc, "edges", "bipartite")),
    )


def tessellation_to_dict(t: Tessellation) -> dict:
    polys = []
    for p in t.polygons:
        entry: dict[str, Any] = {"vertices": list(p.vertices)}
        if p != Polygon.uniform(p.vertices):
            entry["amplitudes"] = [complex_to_json(a) for a in p.amplitudes]
        polys.append(entry)
    return {"polygons": polys, "partial": t.partial}


def tessellation_from_dict(doc: dict, n: int) -> Tessellation:
    """Read a tessellation; zero amplitudes are allowed only when ``partial``."""
    declared = bool(doc.get("partial", False))
    polys = []
    for k, entry in enumerate(_require(doc, "polygons", "tessellation")):
        vertices = [int(v) for v in _require(entry, "vertices", f"polygon {k}")]
        if "amplitudes" not in entry:
            polys.append(Polygon.uniform(vertices))
            continue
        amps = [parse_complex(a) for a in entry["amplitudes"]]
        if len(amps) != len(vertices):
            raise SchemaError(f"polygon {k}: {len(vertices)} vertices but {len(amps)} amplitudes")
        keep = [i for i, a in enumerate(amps) if a != 0]
        if len(keep) != len(amps) and not declared:
            raise SchemaError(f"polygon {k}: zero amplitude in a tessellation not marked partial")
        if not keep:
            continue
        polys.append(Polygon(tuple(vertices[i] for i in keep), [amps[i] for i in keep]))
    t = Tessellation(tuple(polys), n)
    if t.partial != declared:
        state = "leaves vertices uncovered" if t.partial else "covers every vertex"
        raise SchemaError(f"tessellation declared partial={declared} but {state}")
    return t


def szegedy_to_dict(inst: SzegedyInstance) -> dict:
    out: dict[str, Any] = {
        "x": inst.m,
        "y": inst.n,
        "P": inst.P.tolist(),
        "Q": inst.Q.tolist(),
    }
    if inst.theta is not None:
        out["theta"] = inst.theta.tolist()
    if inst.theta_prime is not None:
        out["theta_prime"] = inst.theta_prime.tolist()
    return out


def szegedy_from_dict(doc: dict) -> SzegedyInstance:
    m = int(_require(doc, "x", "szegedy"))
    n = int(_require(doc, "y", "szegedy"))
    p = np.array(_require(doc, "P", "szegedy"), dtype=float)
    q = np.array(_require(doc, "Q", "szegedy"), dtype=float)
    if p.shape != (m, n):
        raise SchemaError(f"szegedy: P has shape {p.shape}, expected ({m}, {n})")
    return SzegedyInstance.from_matrices(p, q, doc.get("theta"), doc.get("theta_prime"))


def bundle_from_dict(doc: dict) -> Bundle:
    if not isinstance(doc, dict):
        raise SchemaError("bundle must be a JSON object")
    if doc.get("schema") != SCHEMA:
        raise SchemaError(f"unsupported schema {doc.get('schema')!r}, expected {SCHEMA!r}")
    b = Bundle()
    if "graph" in doc:
        b.graph, b.labels = graph_from_dict(doc["graph"])
    if "bipartite" in doc:
        b.bipartite = bipartite_from_dict(doc["bipartite"])
    if "tessellations" in doc:
        if b.graph is None:
            raise SchemaError("tessellations need a graph")
        b.tessellations = [tessellation_from_dict(t, b.graph.n) for t in doc["tessellations"]]
    if "szegedy" in doc:
        b.szegedy = szegedy_from_dict(doc["szegedy"])
    if "chain" in doc:
        b.chain = np.array(_require(doc["chain"], "P", "chain"), dtype=float)
    if "krausz" in doc:
        b.krausz = [[int(v) for v in c] for c in doc["krausz"]]
    b.options = dict(doc.get("options", {}))
    return b


def bundle_to_dict(b: Bundle) -> dict:
    out: dict[str, Any] = {"schema": SCHEMA}
    if b.graph is not None:
        out["graph"] = graph_to_dict(b.graph, b.labels)
    if b.bipartite is not None:
        out["bipartite"] = bipartite_to_dict(b.bipartite)
    if b.tessellations:
        out["tessellations"] = [tessellation_to_dict(t) for t in b.tessellations]
    if b.szegedy is not None:
        out["szegedy"] = szegedy_to_dict(b.szegedy)
    if b.chain is not None:
        out["chain"] = {"P": b.chain.tolist()}
    if b.krausz is not None:
        out["krausz"] = [list(c) for c in b.krausz]
    if b.options:
        out["options"] = b.options
    return out


def load_bundle(path: str | Path) -> Bundle:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from exc
    return bundle_from_dict(doc)


def dumps(doc: Any) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def bijection_to_list(bij: EdgeBijection) -> list[list[int]]:
    return [list(e) for e in bij.backward]


def _fmt(x: float) -> str:
    return repr(float(x))


def operator_to_csv(u: np.ndarray) -> str:
    """Row-major complex matrix, one ``"re,im"`` cell per entry."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in np.asarray(u, dtype=complex):
        writer.writerow(f"{_fmt(z.real)},{_fmt(z.imag)}" for z in row)
    return buf.getvalue()


def operator_from_csv(text: str) -> np.ndarray:
    rows = []
    for row in csv.reader(io.StringIO(text)):
        if not row:
            continue
        rows.append([complex(*map(float, cell.split(","))) for cell in row])
    return np.array(rows, dtype=complex)


def table_to_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row)
    return buf.getvalue()
