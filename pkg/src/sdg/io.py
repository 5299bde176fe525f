"""JSON encodings shared by the library and the command line.

Complex matrices (``cmat``) are row-major nested lists of ``[re, im]`` pairs.
Game files::

    {"schema_version": 1,
     "players": [{"dim": 2}, ...],
     "edges": [{"i": 0, "j": 1, "R_ij": cmat, "R_ji": cmat}, ...]}

Profile files hold ``{"schema_version": 1, "strategies": [cmat, ...]}`` and LCP
candidate files ``{"schema_version": 1, "blocks": [cmat, ...]}``.  Classical
polymatrix files (input of the ``embed`` generator) hold
``{"actions": [n_0, ...], "edges": [{"i", "j", "A_ij", "A_ji"}, ...]}`` with
real payoff tables.
"""

from __future__ import annotations

import functools
import hashlib
import json
from importlib import resources

import numpy as np
from jsonschema import Draft202012Validator
from jsonschema.exceptions import best_match
from referencing import Registry, Resource

from .game import Edge, NetworkGame

SCHEMA_VERSION = 1


class SchemaError(ValueError):
    """Malformed input; ``path`` locates the offending JSON node."""

    def __init__(self, path: str, msg: str):
        super().__init__(f"{path}: {msg}")
        self.path = path


def encode_cmat(a) -> list:
    a = np.asarray(a, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def decode_cmat(obj, path: str = "$") -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise SchemaError(path, "expected a non-empty list of rows")
    n = len(obj)
    out = np.zeros((n, n), dtype=complex)
    for r, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != n:
            raise SchemaError(f"{path}[{r}]", f"expected a row of length {n}")
        for c, z in enumerate(row):
            if (
                not isinstance(z, list)
                or len(z) != 2
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in z)
            ):
                raise SchemaError(f"{path}[{r}][{c}]", "expected a [re, im] pair of numbers")
            out[r, c] = complex(z[0], z[1])
    return out


@functools.cache
def _validators() -> dict:
    pkg = resources.files(__package__) / "schemas"
    schemas = {
        f.name: json.loads(f.read_text()) for f in pkg.iterdir() if f.name.endswith(".json")
    }
    registry = Registry().with_resources(
        (name, Resource.from_contents(body)) for name, body in schemas.items()
    )
    return {
        name.removesuffix(".schema.json"): Draft202012Validator(body, registry=registry)
        for name, body in schemas.items()
    }


def schema(name: str) -> dict:
    """The shipped JSON schema ``name`` (game, matrices, polymatrix, report, cmat)."""
    return _validators()[name].schema


def validate(obj, name: str) -> None:
    """Raise :class:`SchemaError` at the first (deepest) violation of schema ``name``."""
    err = best_match(_validators()[name].iter_errors(obj))
    if err is not None:
        raise SchemaError(err.json_path, err.message)


def game_to_dict(game: NetworkGame) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "players": [{"dim": d} for d in game.dims],
        "edges": [
            {"i": e.i, "j": e.j, "R_ij": encode_cmat(e.R_ij), "R_ji": encode_cmat(e.R_ji)}
            for e in game.edges
        ],
    }


def game_from_dict(obj) -> NetworkGame:
    validate(obj, "game")
    dims = tuple(p["dim"] for p in obj["players"])
    edges = []
    for k, e in enumerate(obj.get("edges", [])):
        path = f"$.edges[{k}]"
        for name in ("i", "j"):
            if e[name] >= len(dims):
                raise SchemaError(f"{path}.{name}", f"player index {e[name]} out of range")
        r_ij = decode_cmat(e["R_ij"], f"{path}.R_ij")
        r_ji = decode_cmat(e["R_ji"], f"{path}.R_ji")
        edges.append(Edge(e["i"], e["j"], r_ij, r_ji))
    try:
        return NetworkGame(dims, tuple(edges))
    except ValueError as exc:
        msg = str(exc)
        if msg.startswith("edge "):
            k = int(msg.split()[1].rstrip(":"))
            raise SchemaError(f"$.edges[{k}]", msg) from exc
        raise SchemaError("$", msg) from exc


def matrices_from_dict(obj, key: str) -> list[np.ndarray]:
    validate(obj, "matrices")
    mats = obj.get(key)
    if mats is None:
        raise SchemaError("$", f"missing key {key!r}")
    return [decode_cmat(m, f"$.{key}[{k}]") for k, m in enumerate(mats)]


def matrices_to_dict(mats, key: str) -> dict:
    return {"schema_version": SCHEMA_VERSION, key: [encode_cmat(m) for m in mats]}


def polymatrix_from_dict(obj):
    """Classical polymatrix description -> ``(actions, edges)`` for :func:`embed_polymatrix`."""
    validate(obj, "polymatrix")
    actions = obj["actions"]
    edges = []
    for k, e in enumerate(obj.get("edges", [])):
        path = f"$.edges[{k}]"
        i, j = e["i"], e["j"]
        try:
            a_ij = np.asarray(e["A_ij"], dtype=float)
            a_ji = np.asarray(e["A_ji"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(path, f"bad payoff table ({exc})") from exc
        edges.append((i, j, a_ij, a_ji))
    return actions, edges


def dumps(obj) -> str:
    """Canonical JSON text: sorted keys, fixed separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()
