"""Canonical JSON encoding for shifts, codes, entropy data, and reports.

Every value the package emits is written through here so equal values
produce byte-identical files: keys are sorted, indentation is fixed,
rationals are exact "p/q" strings, and containers are plain lists.
The reverse direction rebuilds values through the public constructors,
so a hand-edited file cannot smuggle in an unvalidated object.
"""

import json
import os
import tempfile
from fractions import Fraction

from . import algebra
from . import codes
from . import shiftspace as ss
from .errors import ParseError

FORMAT_VERSION = "1"


def fraction_to_str(value):
    """Exact decimal-free rational text, "p/q" or plain "p" for integers."""
    f = Fraction(value)
    if f.denominator == 1:
        return str(f.numerator)
    return "%d/%d" % (f.numerator, f.denominator)


def fraction_from_str(text):
    try:
        return Fraction(str(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError("bad rational %r: %s" % (text, exc))


def shift_to_data(shift):
    if isinstance(shift, ss.EdgeShift):
        return {
            "kind": "edge_shift",
            "matrix": [list(row) for row in shift.matrix],
        }
    if isinstance(shift, ss.SftForbidden):
        return {
            "kind": "sft",
            "alphabet": list(shift.alphabet),
            "forbidden": [list(w) for w in shift.forbidden],
        }
    if isinstance(shift, ss.SoficPresentation):
        return {
            "kind": "sofic",
            "states": list(shift.states),
            "edges": [
                {"from": src, "to": dst, "label": label}
                for src, dst, label in shift.edges
            ],
        }
    raise ParseError("cannot serialize %r as a shift" % (shift,))


def shift_from_data(data):
    if not isinstance(data, dict):
        raise ParseError("a shift description must be a JSON object")
    kind = data.get("kind")
    if kind == "edge_shift":
        return ss.edge_shift(_need(data, "matrix"))
    if kind == "sft":
        return ss.sft(_need(data, "alphabet"), _need(data, "forbidden"))
    if kind == "sofic":
        edges = []
        for e in _need(data, "edges"):
            if not isinstance(e, dict):
                raise ParseError("sofic edges must be objects")
            edges.append((_need(e, "from"), _need(e, "to"), _need(e, "label")))
        return ss.sofic(_need(data, "states"), edges)
    raise ParseError("unknown shift kind %r" % (kind,))


def code_to_data(code, with_domain=False):
    """Code file payload; the domain is included only on request.

    Plain code files leave the domain to the accompanying shift file,
    while codes embedded in reports carry their domain inline so the
    report can be re-checked on its own.
    """
    data = {
        "memory": code.memory,
        "anticipation": code.anticipation,
        "table": [
            {"window": list(w), "out": code.table[w]}
            for w in sorted(code.table)
        ],
    }
    if with_domain:
        data["domain"] = shift_to_data(code.domain)
    return data


def code_from_data(data, domain=None):
    if not isinstance(data, dict):
        raise ParseError("a code description must be a JSON object")
    if domain is None:
        if "domain" not in data:
            raise ParseError("code has no inline domain and none was given")
        domain = shift_from_data(data["domain"])
    table = {}
    for entry in _need(data, "table"):
        if not isinstance(entry, dict):
            raise ParseError("code table entries must be objects")
        table[tuple(_need(entry, "window"))] = _need(entry, "out")
    return codes.block_map(
        _need(data, "memory"), _need(data, "anticipation"), domain, table
    )


def chain_to_data(chain):
    return {"stages": [code_to_data(c, with_domain=True) for c in chain.stages]}


def chain_from_data(data):
    return codes.CodeChain(
        tuple(code_from_data(c) for c in _need(data, "stages"))
    )


def algebraic_to_data(value):
    return {
        "poly": list(value.poly),
        "interval": [
            fraction_to_str(value.lo),
            fraction_to_str(value.hi),
        ],
    }


def algebraic_from_data(data):
    poly = tuple(int(c) for c in _need(data, "poly"))
    interval = _need(data, "interval")
    if not isinstance(interval, (list, tuple)) or len(interval) != 2:
        raise ParseError("interval must be a [lo, hi] pair")
    return algebra.AlgebraicReal(
        poly, fraction_from_str(interval[0]), fraction_from_str(interval[1])
    )


def entropy_to_data(value):
    data = algebraic_to_data(value.base)
    data["approx"] = value.approx
    return data


def entropy_from_data(data):
    """Rebuild from the exact fields; the stored double is display-only."""
    return algebra.entropy_from_base(algebraic_from_data(data))


def census_to_data(census):
    return {
        "horizon": census.horizon,
        "q": {
            str(k): census.counts[k]
            for k in sorted(census.counts)
            if census.counts[k]
        },
    }


def census_from_data(data):
    counts = {}
    for key, value in _need(data, "q").items():
        counts[int(key)] = int(value)
    return algebra.PeriodicCensus(counts, int(_need(data, "horizon")))


def tol_to_data(tol):
    return {
        "nats": fraction_to_str(tol.nats),
        "log2": fraction_to_str(tol.log2),
    }


def tol_from_data(data):
    return algebra.Tol(
        fraction_from_str(_need(data, "nats")),
        fraction_from_str(_need(data, "log2")),
    )


def structure_to_data(facts):
    return {
        "irreducible": facts.irreducible,
        "mixing": facts.mixing,
        "period": facts.period,
        "note": facts.nonwandering_note,
    }


def jsonable(obj):
    """Best-effort canonical form for mixed certificate and trace data."""
    if obj is None or isinstance(obj, (bool, int, str, float)):
        return obj
    if isinstance(obj, Fraction):
        return fraction_to_str(obj)
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, algebra.EntropyValue):
        return entropy_to_data(obj)
    if isinstance(obj, algebra.AlgebraicReal):
        return algebraic_to_data(obj)
    if isinstance(obj, algebra.Tol):
        return tol_to_data(obj)
    if isinstance(obj, algebra.PeriodicCensus):
        return census_to_data(obj)
    if isinstance(obj, codes.BlockMap):
        return code_to_data(obj, with_domain=True)
    if isinstance(obj, codes.CodeChain):
        return chain_to_data(obj)
    if isinstance(obj, ss.StructureFacts):
        return structure_to_data(obj)
    if isinstance(
        obj, (ss.EdgeShift, ss.SftForbidden, ss.SoficPresentation)
    ):
        return shift_to_data(obj)
    raise ParseError("cannot serialize %r" % (obj,))


def dumps(obj):
    """Canonical text: sorted keys, two-space indent, trailing newline."""
    return (
        json.dumps(jsonable(obj), sort_keys=True, indent=2, ensure_ascii=False)
        + "\n"
    )


def load_path(path):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except OSError as exc:
        raise ParseError("cannot read %s: %s" % (path, exc))
    except json.JSONDecodeError as exc:
        raise ParseError(
            "%s: invalid JSON at line %d column %d: %s"
            % (path, exc.lineno, exc.colno, exc.msg)
        )


def dump_path(path, obj):
    """Atomic write: the file appears complete or not at all."""
    text = dumps(obj)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-report-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except OSError:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return text


def _need(data, key):
    if key not in data:
        raise ParseError("missing required field %r" % key)
    return data[key]
