"""JSON formats for problem instances and certificates.

Integers are written exactly; rationals as ``[numerator, denominator]``
pairs.  Serialization is key-sorted so equal objects give identical bytes.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Union

import jsonschema

from .engine import ENGINE_VERSION, Block, Certificate, InvalidInstanceError, ProblemInstance
from .padic import PadicContext, PadicMatrix

INSTANCE_FORMAT = "tatelattice-instance/1"
CERTIFICATE_FORMAT = "tatelattice-certificate/1"

_int_matrix = {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}}
_rat_matrix = {
    "type": "array",
    "items": {"type": "array", "items": {
        "type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2}},
}

INSTANCE_SCHEMA = {
    "type": "object",
    "required": ["n", "p", "blocks", "S", "precision", "locals"],
    "properties": {
        "format": {"const": INSTANCE_FORMAT},
        "n": {"type": "integer", "minimum": 1},
        "g": {"type": "integer", "minimum": 1},
        "p": {"type": "integer", "minimum": 0},
        "blocks": {"type": "array", "minItems": 1, "items": {
            "type": "object",
            "required": ["r", "f"],
            "properties": {
                "r": {"type": "integer", "minimum": 1},
                "h": {"type": "integer", "minimum": 1},
                "f": {"type": "array", "items": {"type": "integer"}, "minItems": 2},
            },
        }},
        "S": {"type": "array", "items": {"type": "integer", "minimum": 2}},
        "precision": {"type": "integer", "minimum": 1},
        "locals": {"type": "object", "additionalProperties": _int_matrix},
    },
}

CERTIFICATE_SCHEMA = {
    "type": "object",
    "required": ["A", "conjugators", "basis", "precision"],
    "properties": {
        "format": {"const": CERTIFICATE_FORMAT},
        "engine": {"type": "string"},
        "status": {"type": "string"},
        "precision": {"type": "integer", "minimum": 1},
        "A": _int_matrix,
        "basis": _rat_matrix,
        "conjugators": {"type": "object", "additionalProperties": {
            "type": "object",
            "required": ["matrix", "precision"],
            "properties": {"matrix": _int_matrix, "precision": {"type": "integer", "minimum": 1}},
        }},
    },
}


def instance_to_dict(inst: ProblemInstance) -> dict:
    out = {
        "format": INSTANCE_FORMAT,
        "n": inst.n,
        "p": inst.p,
        "blocks": [{"r": b.r, "h": b.h, "f": list(b.f)} for b in inst.blocks],
        "S": sorted(inst.S),
        "precision": inst.precision,
        "locals": {str(ell): inst.locals[ell].rows for ell in sorted(inst.locals)},
    }
    if inst.g is not None:
        out["g"] = inst.g
    return out


def instance_from_dict(data: dict) -> ProblemInstance:
    try:
        jsonschema.validate(data, INSTANCE_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise InvalidInstanceError(f"schema: {exc.message}") from exc
    n = data["n"]
    raw_blocks = data["blocks"]
    blocks = []
    for b in raw_blocks:
        f = tuple(b["f"])
        d = len(f) - 1
        h = b.get("h")
        if h is None:
            if len(raw_blocks) > 1:
                raise InvalidInstanceError("multi-block instances must give h for every block")
            if n % (b["r"] * d):
                raise InvalidInstanceError("block rank does not divide n")
            h = n // (b["r"] * d)
        blocks.append(Block(b["r"], f, h))
    N = data["precision"]
    locs = {}
    for key, rows in data["locals"].items():
        ell = int(key)
        try:
            ctx = PadicContext(ell, N)
        except ValueError as exc:
            raise InvalidInstanceError(str(exc)) from exc
        if any(not 0 <= x < ctx.modulus for row in rows for x in row):
            raise InvalidInstanceError(f"local operator at {ell} has unreduced residues")
        if len(rows) != n or any(len(r) != n for r in rows):
            raise InvalidInstanceError(f"local operator at {ell} is not {n}x{n}")
        locs[ell] = PadicMatrix.from_rows(ctx, rows)
    inst = ProblemInstance(n, data["p"], tuple(blocks), tuple(sorted(data["S"])), N, locs,
                           g=data.get("g"))
    return inst


def certificate_to_dict(cert: Certificate) -> dict:
    return {
        "format": CERTIFICATE_FORMAT,
        "engine": cert.version,
        "status": cert.status,
        "precision": cert.precision,
        "A": [[int(x) for x in row] for row in cert.A],
        "basis": [[[Fraction(x).numerator, Fraction(x).denominator] for x in row]
                  for row in cert.basis],
        "conjugators": {str(ell): {"matrix": P.rows, "precision": P.ctx.N}
                        for ell, P in sorted(cert.conjugators.items())},
    }


def certificate_from_dict(data: dict) -> Certificate:
    jsonschema.validate(data, CERTIFICATE_SCHEMA)
    basis = [[Fraction(a, b) if b != 1 else a for a, b in row] for row in data["basis"]]
    conj = {int(k): PadicMatrix.from_rows(PadicContext(int(k), v["precision"]), v["matrix"])
            for k, v in data["conjugators"].items()}
    return Certificate(data["A"], conj, data["precision"], basis,
                       status=data.get("status", "unverified"),
                       version=data.get("engine", ENGINE_VERSION))


def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def load_json(path: Union[str, Path]) -> dict:
    return json.loads(Path(path).read_text())


def load_instance(path) -> ProblemInstance:
    return instance_from_dict(load_json(path))


def load_certificate(path) -> Certificate:
    return certificate_from_dict(load_json(path))
