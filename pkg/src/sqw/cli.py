"""Command-line front end: ``sqw <command> bundle.json [options]``.

Exit status: 0 success, 2 malformed input, 3 validation failure,
4 conversion obstruction, 5 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .dynamics import basis_state, evolve, hitting_time, uniform_state, vertex_distribution
from .graph import GraphError, RootGraphError, line_graph, validate_krausz_partition
from .serialize import (
    SCHEMA,
    Bundle,
    SchemaError,
    bijection_to_list,
    bipartite_to_dict,
    bundle_to_dict,
    dumps,
    graph_to_dict,
    load_bundle,
    operator_to_csv,
    parse_complex,
    szegedy_to_dict,
    table_to_csv,
)
from .spectral import spectral_decomposition, verify_eigensystem
from .staggered import NotUnitaryError, NumericMismatchError, evolution_operator, search_operator
from .szegedy import (
    ConversionObstruction,
    SzegedyError,
    polygon_observable_measure,
    staggered_to_szegedy,
    szegedy_search_instance,
    szegedy_to_staggered,
)
from .tessellation import TessellationError, marked_vertices, validate_tessellation_family

EXIT_OK = 0
EXIT_MALFORMED = 2
EXIT_INVALID = 3
EXIT_OBSTRUCTION = 4
EXIT_NUMERIC = 5

COMMANDS = ("validate", "operator", "evolve", "search", "hitting-time", "spectrum", "convert", "line-graph")


class ValidationFailure(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    input_path: Path
    output_path: Path | None = None
    steps: int | None = None
    t_max: int | None = None
    tol: float | None = None
    marked: list[int] | None = None
    to: str | None = None
    trajectory_path: Path | None = None
    probabilities: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise SchemaError(f"unknown command {self.command!r}")
        if self.tol is not None and self.tol <= 0:
            raise SchemaError("tolerance must be positive")
        if self.command == "convert" and self.to not in ("szegedy", "staggered"):
            raise SchemaError("convert needs --to szegedy or --to staggered")


def _option(cfg: RunConfig, bundle: Bundle, name: str, default=None):
    value = getattr(cfg, name)
    if value is not None:
        return value
    return bundle.options.get(name.replace("_", "-"), bundle.options.get(name, default))


def _marked(cfg: RunConfig, bundle: Bundle) -> list[int]:
    return sorted(set(int(v) for v in _option(cfg, bundle, "marked", []) or []))


def _initial_state(bundle: Bundle, n: int) -> np.ndarray:
    choice = bundle.options.get("initial_state", "uniform")
    if choice == "uniform":
        return uniform_state(n)
    if isinstance(choice, dict) and "basis" in choice:
        return basis_state(n, int(choice["basis"]))
    if isinstance(choice, list):
        psi = np.array([parse_complex(z) for z in choice], dtype=complex)
        if psi.size != n:
            raise SchemaError(f"initial_state has {psi.size} entries, expected {n}")
        return psi / np.linalg.norm(psi)
    raise SchemaError(f"unrecognized initial_state {choice!r}")


def _need_tessellations(bundle: Bundle, exactly_two: bool = False):
    if bundle.graph is None or len(bundle.tessellations) < 2:
        raise SchemaError("this command needs a graph and at least two tessellations")
    if exactly_two and len(bundle.tessellations) != 2:
        raise SchemaError(
            f"{len(bundle.tessellations)} tessellations given; the search operator and the "
            "discriminant spectrum need exactly two (diagonalize the evolution operator directly)"
        )
    return bundle.graph, bundle.tessellations


def _write(cfg: RunConfig, text: str) -> None:
    if cfg.output_path is None:
        sys.stdout.write(text)
    else:
        Path(cfg.output_path).write_text(text)


def cmd_validate(cfg: RunConfig, bundle: Bundle) -> int:
    out: dict[str, Any] = {"schema": SCHEMA}
    failed = False
    if bundle.tessellations:
        g, ts = _need_tessellations(bundle)
        rep = validate_tessellation_family(g, ts)
        out.update(
            valid=rep.valid,
            violations=list(rep.violations),
            uncovered_edges=[list(e) for e in rep.uncovered_edges],
            max_intersection=rep.max_intersection,
            multi_vertex_intersections=[
                {"tessellations": [i, j], "polygons": [k, kk], "shared": list(s)}
                for i, j, k, kk, s in rep.multi_vertex_intersections
            ],
            marked=sorted(marked_vertices(g, ts)),
        )
        failed |= not rep.valid
    if bundle.krausz is not None:
        if bundle.graph is None:
            raise SchemaError("a Krausz partition needs a graph")
        kr = validate_krausz_partition(bundle.graph, bundle.krausz)
        out["krausz"] = {
            "valid": kr.valid,
            "violations": list(kr.violations),
            "two_colorable": kr.two_colorable,
        }
        failed |= not kr.valid
    if len(out) == 1:
        raise SchemaError("nothing to validate: bundle has neither tessellations nor a Krausz partition")
    _write(cfg, dumps(out))
    return EXIT_INVALID if failed else EXIT_OK


def _checked_family(bundle: Bundle):
    g, ts = _need_tessellations(bundle)
    rep = validate_tessellation_family(g, ts)
    if not rep.valid:
        raise ValidationFailure("; ".join(rep.violations))
    return g, ts


def _walk_operator(cfg: RunConfig, bundle: Bundle, marked: list[int]) -> np.ndarray:
    g, ts = _checked_family(bundle)
    if marked:
        _need_tessellations(bundle, exactly_two=True)
        return search_operator(ts[0], ts[1], marked)
    return evolution_operator(ts)


def _search_setup(cfg: RunConfig, bundle: Bundle) -> tuple[np.ndarray, list[int]]:
    """Operator and marked set for a search.

    A partial family marks vertices by leaving them out of some tessellation, so
    its plain evolution operator is the search operator. A full family needs an
    explicit marked set and uses ``U_M``.
    """
    g, ts = _checked_family(bundle)
    marked = _marked(cfg, bundle)
    implied = sorted(marked_vertices(g, ts))
    if implied:
        if marked and marked != implied:
            raise SchemaError(
                f"the partial tessellations already mark {implied}; --marked {marked} disagrees"
            )
        return evolution_operator(ts), implied
    if not marked:
        raise SchemaError(f"{cfg.command} needs marked vertices (--marked or options.marked)")
    return _walk_operator(cfg, bundle, marked), marked


def cmd_operator(cfg: RunConfig, bundle: Bundle) -> int:
    _write(cfg, operator_to_csv(_walk_operator(cfg, bundle, _marked(cfg, bundle))))
    return EXIT_OK


def cmd_evolve(cfg: RunConfig, bundle: Bundle) -> int:
    u = _walk_operator(cfg, bundle, [])
    steps = int(_option(cfg, bundle, "steps", 10))
    states = evolve(u, _initial_state(bundle, len(u)), steps)
    header = ["t"] + [f"p{k}" for k in range(len(u))]
    rows = ([t, *map(float, vertex_distribution(s))] for t, s in enumerate(states))
    _write(cfg, table_to_csv(header, rows))
    return EXIT_OK


def cmd_search(cfg: RunConfig, bundle: Bundle) -> int:
    steps = int(_option(cfg, bundle, "steps", 10))
    marked = _marked(cfg, bundle)
    if bundle.chain is not None and not bundle.tessellations:
        if bundle.graph is None:
            raise SchemaError("a chain needs a graph")
        inst = szegedy_search_instance(bundle.graph, bundle.chain, marked)
        states = evolve(inst.operator(), inst.psi0, steps)
        header = ["t", "marked_probability"] + [f"x{x}" for x in inst.alpha_labels]
        rows = []
        for t, s in enumerate(states):
            r = polygon_observable_measure(s, inst.alpha)
            rows.append([t, r.remainder, *map(float, r.probabilities)])
        _write(cfg, table_to_csv(header, rows))
        return EXIT_OK
    u, marked = _search_setup(cfg, bundle)
    states = evolve(u, _initial_state(bundle, len(u)), steps)
    header = ["t", "marked_probability"] + [f"p{k}" for k in range(len(u))]
    rows = []
    for t, s in enumerate(states):
        p = vertex_distribution(s)
        rows.append([t, float(p[marked].sum()), *map(float, p)])
    _write(cfg, table_to_csv(header, rows))
    return EXIT_OK


def cmd_hitting_time(cfg: RunConfig, bundle: Bundle) -> int:
    u, marked = _search_setup(cfg, bundle)
    n = len(u)
    t_max = _option(cfg, bundle, "t_max")
    psi0 = _initial_state(bundle, n)
    res = hitting_time(u, psi0, len(marked), n, None if t_max is None else int(t_max))
    doc = {"schema": SCHEMA, **res.to_dict(), "n": n, "marked": marked}
    _write(cfg, dumps(doc))
    if cfg.trajectory_path is not None:
        states = evolve(u, psi0, len(res.trace) - 1)
        header = ["t", "F"] + ([f"p{k}" for k in range(n)] if cfg.probabilities else [])
        rows = []
        for t, (f, s) in enumerate(zip(res.trace, states)):
            row = [t, float(f)]
            if cfg.probabilities:
                row.extend(map(float, vertex_distribution(s)))
            rows.append(row)
        Path(cfg.trajectory_path).write_text(table_to_csv(header, rows))
    return EXIT_OK


def cmd_spectrum(cfg: RunConfig, bundle: Bundle) -> int:
    _checked_family(bundle)
    g, (alpha, beta) = _need_tessellations(bundle, exactly_two=True)
    marked = _marked(cfg, bundle)
    tol = _option(cfg, bundle, "tol")
    dec = spectral_decomposition(alpha, beta, marked) if tol is None else spectral_decomposition(
        alpha, beta, marked, float(tol)
    )
    rep = verify_eigensystem(search_operator(alpha, beta, marked), dec)
    if not rep.ok:
        raise ArithmeticError("; ".join(rep.failures))
    rows = [
        [float(lam.real), float(lam.imag), src, "" if np.isnan(th) else float(th)]
        for lam, src, th in zip(dec.eigenvalues, dec.sources, dec.pair_angles)
    ]
    rows += [[1.0, 0.0, "residual", ""] for _ in range(dec.residual_subspace_dim)]
    _write(cfg, table_to_csv(["re", "im", "source", "theta"], rows))
    return EXIT_OK


def cmd_convert(cfg: RunConfig, bundle: Bundle) -> int:
    if cfg.to == "szegedy":
        g, ts = _checked_family(bundle)
        _need_tessellations(bundle, exactly_two=True)
        inst, bij = staggered_to_szegedy(g, ts[0], ts[1])
        doc = {
            "schema": SCHEMA,
            "szegedy": szegedy_to_dict(inst),
            "bipartite": bipartite_to_dict(inst.bipartite),
            "bijection": bijection_to_list(bij),
        }
        _write(cfg, dumps(doc))
        return EXIT_OK
    if bundle.szegedy is None:
        raise SchemaError("convert --to staggered needs a 'szegedy' instance")
    lg, alpha, beta, bij = szegedy_to_staggered(bundle.szegedy)
    out = Bundle(
        graph=lg,
        labels=[f"x{x}-y{y}" for x, y in bij.backward],
        tessellations=[alpha, beta],
    )
    doc = bundle_to_dict(out)
    doc["bijection"] = bijection_to_list(bij)
    _write(cfg, dumps(doc))
    return EXIT_OK


def cmd_line_graph(cfg: RunConfig, bundle: Bundle) -> int:
    if bundle.bipartite is not None:
        lg, bij = line_graph(bundle.bipartite)
        labels = [f"x{x}-y{y}" for x, y in bij.backward]
    elif bundle.graph is not None:
        lg, bij = line_graph(bundle.graph)
        names = bundle.labels or [str(v) for v in range(bundle.graph.n)]
        labels = [f"{names[i]}-{names[j]}" for i, j in bij.backward]
    else:
        raise SchemaError("line-graph needs a 'graph' or a 'bipartite' graph")
    doc = {"schema": SCHEMA, "graph": graph_to_dict(lg, labels), "bijection": bijection_to_list(bij)}
    _write(cfg, dumps(doc))
    return EXIT_OK


HANDLERS = {
    "validate": cmd_validate,
    "operator": cmd_operator,
    "evolve": cmd_evolve,
    "search": cmd_search,
    "hitting-time": cmd_hitting_time,
    "spectrum": cmd_spectrum,
    "convert": cmd_convert,
    "line-graph": cmd_line_graph,
}


def _error(kind: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")


def run(cfg: RunConfig) -> int:
    try:
        bundle = load_bundle(cfg.input_path)
        return HANDLERS[cfg.command](cfg, bundle)
    except ConversionObstruction as exc:
        sys.stderr.write(json.dumps({**exc.to_dict(), "message": str(exc)}) + "\n")
        return EXIT_OBSTRUCTION
    except ValidationFailure as exc:
        _error("validation", str(exc))
        return EXIT_INVALID
    except (NotUnitaryError, NumericMismatchError, ArithmeticError, np.linalg.LinAlgError) as exc:
        _error("numeric", str(exc))
        return EXIT_NUMERIC
    except (SchemaError, GraphError, TessellationError, SzegedyError, RootGraphError, OSError) as exc:
        _error("malformed", str(exc))
        return EXIT_MALFORMED
    except (KeyError, TypeError, ValueError) as exc:
        _error("malformed", f"{type(exc).__name__}: {exc}")
        return EXIT_MALFORMED


def _marked_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad marked list {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sqw", description="Staggered quantum walk simulator.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("bundle", type=Path, help="input bundle (JSON, schema sqw/1)")
    parser.add_argument("-o", "--output", type=Path, help="output file (default: stdout)")
    parser.add_argument("--steps", type=int)
    parser.add_argument("--t-max", type=int, dest="t_max")
    parser.add_argument("--marked", type=_marked_list, help="comma-separated vertex list, e.g. 0,3")
    parser.add_argument("--tol", type=float, help="singular-value classification tolerance")
    parser.add_argument("--to", choices=("szegedy", "staggered"))
    parser.add_argument("--trajectory", type=Path, help="hitting-time: also write t,F(t) CSV here")
    parser.add_argument("--probabilities", action="store_true", help="add per-vertex columns to the trajectory")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(
            command=args.command,
            input_path=args.bundle,
            output_path=args.output,
            steps=args.steps,
            t_max=args.t_max,
            tol=args.tol,
            marked=args.marked,
            to=args.to,
            trajectory_path=args.trajectory,
            probabilities=args.probabilities,
        )
    except SchemaError as exc:
        _error("malformed", str(exc))
        return EXIT_MALFORMED
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
