"""Batch command-line frontend for the decomposition library.

Subcommands parse JSON shift and code files, run the library pipelines
and oracles, and write one canonical report to stdout or to the --out
path.  A short human summary and the elapsed time go to stderr, so the
report bytes depend only on the configuration, never on the clock.

Exit codes: 0 success, 1 parse failure, 2 violated precondition,
3 exhausted search budget, 4 unresolvable approximate target,
5 failed certificate.
"""

import argparse
import json
import math
import os
import sys
import time
from fractions import Fraction

from . import algebra
from . import codes
from . import embedding
from . import factor
from . import serialize
from . import shiftspace as ss
from .algebra import EQ, GT, LT
from .errors import (
    CensusMismatch,
    InexactTarget,
    IterationCap,
    Mismatch,
    NotFound,
    ParseError,
    SearchExhausted,
    ShiftError,
    UnboundedSearch,
)

_BUDGET_DEFAULTS = {
    "rounds": 64,
    "m": 24,
    "n": 12,
    "states": 200000,
    "candidates": 3,
    "horizon": 10,
    "word": 8,
    "step": 12,
}


def _exit_code_for(err):
    if isinstance(err, ParseError):
        return 1
    if isinstance(err, InexactTarget):
        return 4
    if isinstance(err, (SearchExhausted, NotFound, IterationCap, UnboundedSearch)):
        return 3
    if isinstance(err, (Mismatch, CensusMismatch)):
        return 5
    return 2


def _error_details(err):
    out = {}
    for field in ("witness", "closest", "trace", "searched_bound"):
        value = getattr(err, field, None)
        if value not in (None, [], ()):
            out[field] = value
    return out


# ---------------------------------------------------------------------------
# Input parsing
# ---------------------------------------------------------------------------


def _parse_inline_or_path(text, what):
    """JSON object from inline text (starts with '{') or from a file."""
    text = text.strip()
    if text.startswith("{"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(
                "inline %s: invalid JSON at line %d column %d: %s"
                % (what, exc.lineno, exc.colno, exc.msg)
            )
    return serialize.load_path(text)


def _parse_epsilon(text):
    """Tolerance text: 'p/q' nats, 'p/q*log2', or a '+' sum of both."""
    nats = Fraction(0)
    log2 = Fraction(0)
    for part in text.replace(" ", "").split("+"):
        if part.endswith("*log2"):
            log2 += serialize.fraction_from_str(part[: -len("*log2")])
        elif part == "log2":
            log2 += 1
        else:
            nats += serialize.fraction_from_str(part)
    if nats < 0 or log2 < 0:
        raise ParseError("the tolerance must be nonnegative")
    return algebra.Tol(nats, log2)


def _isolated_root(data):
    """The one real root of the given polynomial inside the interval."""
    raw = serialize.algebraic_from_data(data)
    lo = algebra.alg_rational(raw.lo)
    hi = algebra.alg_rational(raw.hi)
    hits = [
        root
        for root in algebra.real_roots(raw.poly)
        if algebra.compare(root, lo) != LT and algebra.compare(root, hi) != GT
    ]
    if len(hits) != 1:
        raise ParseError(
            "the interval [%s, %s] isolates %d real roots instead of one"
            % (data["interval"][0], data["interval"][1], len(hits))
        )
    return hits[0]


def _log_close(base, amount, tol):
    """Whether |log(base) - amount| <= tol, for a rational amount of nats."""
    upper = algebra.compare_scaled(base, algebra.ONE, nats=amount + tol)
    lower = algebra.compare_scaled(base, algebra.ONE, nats=amount - tol)
    return upper != GT and lower != LT


def _realize_approx(approx, tol, anchors, allow_nats):
    """Deterministic exact realization of a float target, or InexactTarget.

    Candidates are tried in a fixed order: the entropies of the input
    shifts, then bases 2^(p/q) with denominators up to 32, then (when
    the caller can consume them) plain rationals p/q of nats with
    denominators up to 64.  The first candidate whose exact log lies
    within tol of the float wins.
    """
    amount = Fraction(approx)
    if tol <= 0:
        raise ParseError("an approximate target needs a positive tol")
    for anchor in anchors:
        if _log_close(anchor.base, amount, tol):
            return ("base", anchor.base)
    ratio = approx / math.log(2.0)
    for q in range(1, 33):
        p = round(ratio * q)
        exponent = Fraction(p, q)
        candidate = algebra.two_pow(exponent)
        if _log_close(candidate, amount, tol):
            return ("base", candidate)
    if allow_nats:
        for q in range(1, 65):
            p = round(amount * q)
            value = Fraction(p, q)
            if abs(value - amount) <= tol:
                return ("nats", value)
    raise InexactTarget(
        "no exact realization found within %s of %.12g" % (tol, approx)
    )


def _resolve_target(text, anchors, allow_nats):
    """Exact target from the --target text, echoed alongside the spec.

    Accepts rational shorthand ('p/q' nats or 'p/q*log2'), an exact
    {"poly", "interval"} description, or {"approx", "tol"} resolved
    against the known realizations.  Returns (kind, value, echo) with
    kind "base" (an algebraic base e^h) or "nats" (a rational h).
    """
    stripped = text.strip()
    if not stripped.startswith("{") and not os.path.exists(stripped):
        spec = {"rational": stripped.replace(" ", "")}
    else:
        spec = _parse_inline_or_path(stripped, "target")
    if "rational" in spec:
        raw = spec["rational"]
        if raw.endswith("*log2"):
            exponent = serialize.fraction_from_str(raw[: -len("*log2")])
            kind, value = "base", algebra.two_pow(exponent)
        else:
            amount = serialize.fraction_from_str(raw)
            if allow_nats:
                kind, value = "nats", amount
            elif amount == 0:
                kind, value = "base", algebra.ONE
            else:
                raise InexactTarget(
                    "a plain rational amount of nats has no algebraic "
                    "base; write it as 'p/q*log2' or give a polynomial"
                )
    elif "poly" in spec:
        kind, value = "base", _isolated_root(spec)
    elif "approx" in spec:
        tol = serialize.fraction_from_str(spec.get("tol", "0"))
        kind, value = _realize_approx(
            float(spec["approx"]), tol, anchors, allow_nats
        )
    else:
        raise ParseError(
            "a target needs 'poly'+'interval', 'approx'+'tol', "
            "or rational shorthand"
        )
    if kind == "base":
        echo = {"spec": spec, "resolved": {"base": serialize.algebraic_to_data(value)}}
    else:
        echo = {"spec": spec, "resolved": {"nats": serialize.fraction_to_str(value)}}
    return kind, value, echo


def _resolved_value(echo):
    """Rebuild the exact target from a config echo written above."""
    resolved = echo["resolved"]
    if "base" in resolved:
        return "base", serialize.algebraic_from_data(resolved["base"])
    return "nats", serialize.fraction_from_str(resolved["nats"])


def _parse_word(text):
    """One word from '--word a,b,c' or a JSON array of symbols."""
    text = text.strip()
    if text.startswith("["):
        try:
            parts = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError("bad word %r: %s" % (text, exc.msg))
        if not isinstance(parts, list):
            raise ParseError("a JSON word must be an array of symbols")
        return tuple(str(s) for s in parts)
    return tuple(s for s in text.split(",") if s != "")


# ---------------------------------------------------------------------------
# Shift and code loading
# ---------------------------------------------------------------------------


def _load_inputs(args, count=None, at_least=None):
    paths = args.input or []
    if count is not None and len(paths) != count:
        raise ParseError(
            "%s expects exactly %d --input file(s), got %d"
            % (args.command, count, len(paths))
        )
    if at_least is not None and len(paths) < at_least:
        raise ParseError(
            "%s expects at least %d --input file(s), got %d"
            % (args.command, at_least, len(paths))
        )
    loaded = []
    for path in paths:
        data = serialize.load_path(path)
        loaded.append((path, serialize.shift_from_data(data)))
    return loaded


def _input_echo(loaded):
    return [
        {"path": path, "value": serialize.shift_to_data(shift)}
        for path, shift in loaded
    ]


def _load_code(args, domain, index=0):
    paths = args.code or []
    if len(paths) <= index:
        raise ParseError("%s needs a --code file" % args.command)
    data = serialize.load_path(paths[index])
    code = serialize.code_from_data(data, domain)
    echo = {"path": paths[index], "value": serialize.code_to_data(code)}
    return code, echo


def _need_epsilon(args):
    if not args.epsilon:
        raise ParseError("%s needs --epsilon" % args.command)
    return _parse_epsilon(args.epsilon)


def _need_target_texts(args, count=None):
    targets = args.target or []
    if count is not None and len(targets) != count:
        raise ParseError(
            "%s expects exactly %d --target value(s), got %d"
            % (args.command, count, len(targets))
        )
    if not targets:
        raise ParseError("%s needs --target" % args.command)
    return targets


def _budget(args, name):
    value = getattr(args, "budget_" + name, None)
    if value is None:
        return _BUDGET_DEFAULTS[name]
    if value < 1:
        raise ParseError("--budget-%s must be positive" % name)
    return value


def _base_config(args, command):
    return {"command": command, "seed": args.seed}


# ---------------------------------------------------------------------------
# Command implementations
# ---------------------------------------------------------------------------


def _run_entropy(args):
    loaded = _load_inputs(args, at_least=1)
    entries = []
    summary = []
    for path, shift in loaded:
        value = algebra.entropy(shift)
        facts = ss.structure(shift)
        entries.append({
            "path": path,
            "entropy": serialize.entropy_to_data(value),
            "structure": serialize.structure_to_data(facts),
        })
        summary.append(
            "%s: h = log %.6f, period %d%s"
            % (
                path,
                value.approx,
                facts.period,
                ", mixing" if facts.mixing else "",
            )
        )
    config = _base_config(args, "entropy")
    config["inputs"] = _input_echo(loaded)
    return config, {"entries": entries}, {}, summary


def _recompute_entropy(config):
    entries = []
    for entry in config["inputs"]:
        shift = serialize.shift_from_data(entry["value"])
        entries.append({
            "path": entry["path"],
            "entropy": serialize.entropy_to_data(algebra.entropy(shift)),
            "structure": serialize.structure_to_data(ss.structure(shift)),
        })
    return {"entries": entries}, {}


def _run_census(args):
    loaded = _load_inputs(args, count=1)
    horizon = _budget(args, "horizon")
    census = algebra.q_census(loaded[0][1], horizon)
    config = _base_config(args, "census")
    config["inputs"] = _input_echo(loaded)
    config["budgets"] = {"horizon": horizon}
    payload = {"census": serialize.census_to_data(census)}
    nonzero = sum(1 for v in census.counts.values() if v)
    summary = ["census to horizon %d: %d period(s) populated" % (horizon, nonzero)]
    return config, payload, {}, summary


def _recompute_census(config):
    shift = serialize.shift_from_data(config["inputs"][0]["value"])
    census = algebra.q_census(shift, config["budgets"]["horizon"])
    return {"census": serialize.census_to_data(census)}, {}


def _run_structure(args):
    loaded = _load_inputs(args, count=1)
    facts = ss.structure(loaded[0][1])
    config = _base_config(args, "structure")
    config["inputs"] = _input_echo(loaded)
    payload = {"structure": serialize.structure_to_data(facts)}
    summary = [
        "irreducible: %s, mixing: %s, period: %d"
        % (facts.irreducible, facts.mixing, facts.period)
    ]
    return config, payload, {}, summary


def _recompute_structure(config):
    shift = serialize.shift_from_data(config["inputs"][0]["value"])
    return {"structure": serialize.structure_to_data(ss.structure(shift))}, {}


def _run_higher_block(args):
    loaded = _load_inputs(args, count=1)
    if args.n is None:
        raise ParseError("higher-block needs --n")
    result = ss.higher_block(loaded[0][1], args.n)
    config = _base_config(args, "higher-block")
    config["inputs"] = _input_echo(loaded)
    config["n"] = args.n
    payload = {"shift": serialize.shift_to_data(result)}
    return config, payload, {}, ["recoded to %d-blocks" % args.n]


def _recompute_higher_block(config):
    shift = serialize.shift_from_data(config["inputs"][0]["value"])
    result = ss.higher_block(shift, config["n"])
    return {"shift": serialize.shift_to_data(result)}, {}


def _run_forbid(args):
    loaded = _load_inputs(args, count=1)
    if not args.word:
        raise ParseError("forbid needs at least one --word")
    words = tuple(_parse_word(w) for w in args.word)
    result = ss.forbid(loaded[0][1], words)
    config = _base_config(args, "forbid")
    config["inputs"] = _input_echo(loaded)
    config["words"] = [list(w) for w in words]
    payload = {"shift": serialize.shift_to_data(result)}
    return config, payload, {}, ["forbade %d word(s)" % len(words)]


def _recompute_forbid(config):
    shift = serialize.shift_from_data(config["inputs"][0]["value"])
    words = tuple(tuple(w) for w in config["words"])
    return {"shift": serialize.shift_to_data(ss.forbid(shift, words))}, {}


def _run_image(args):
    loaded = _load_inputs(args, count=1)
    code, code_echo = _load_code(args, loaded[0][1])
    result = codes.image(code)
    config = _base_config(args, "image")
    config["inputs"] = _input_echo(loaded)
    config["code"] = code_echo
    payload = {"shift": serialize.shift_to_data(result)}
    return config, payload, {}, ["image computed"]


def _recompute_image(config):
    shift = serialize.shift_from_data(config["inputs"][0]["value"])
    code = serialize.code_from_data(config["code"]["value"], shift)
    return {"shift": serialize.shift_to_data(codes.image(code))}, {}


def _run_compose(args):
    loaded = _load_inputs(args, count=1)
    if not args.code or len(args.code) != 2:
        raise ParseError("compose expects exactly two --code files")
    inner, inner_echo = _load_code(args, loaded[0][1], index=0)
    outer_domain = codes.image(inner)
    outer, outer_echo = _load_code(args, outer_domain, index=1)
    composed = codes.compose(outer, inner)
    config = _base_config(args, "compose")
    config["inputs"] = _input_echo(loaded)
    config["codes"] = [inner_echo, outer_echo]
    payload = {"code": serialize.code_to_data(composed, with_domain=True)}
    certificates = {"window": composed.window}
    return config, payload, certificates, [
        "composed window %d" % composed.window
    ]


def _recompute_compose(config):
    shift = serialize.shift_from_data(config["inputs"][0]["value"])
    inner = serialize.code_from_data(config["codes"][0]["value"], shift)
    outer = serialize.code_from_data(
        config["codes"][1]["value"], codes.image(inner)
    )
    composed = codes.compose(outer, inner)
    payload = {"code": serialize.code_to_data(composed, with_domain=True)}
    return payload, {"window": composed.window}


def _run_verify_code(args):
    loaded = _load_inputs(args, count=1)
    code, code_echo = _load_code(args, loaded[0][1])
    img = codes.image(code)
    embeds = codes.is_embedding(code)
    config = _base_config(args, "verify-code")
    config["inputs"] = _input_echo(loaded)
    config["code"] = code_echo
    payload = {
        "memory": code.memory,
        "anticipation": code.anticipation,
        "window_count": len(code.table),
        "image": serialize.shift_to_data(img),
        "embedding": embeds,
    }
    certificates = {"table_complete": True}
    summary = [
        "valid %d+1+%d code over %d windows, embedding: %s"
        % (code.memory, code.anticipation, len(code.table), embeds)
    ]
    return config, payload, certificates, summary


def _recompute_verify_code(config):
    shift = serialize.shift_from_data(config["inputs"][0]["value"])
    code = serialize.code_from_data(config["code"]["value"], shift)
    payload = {
        "memory": code.memory,
        "anticipation": code.anticipation,
        "window_count": len(code.table),
        "image": serialize.shift_to_data(codes.image(code)),
        "embedding": codes.is_embedding(code),
    }
    return payload, {"table_complete": True}


def _decomposition_payload(report):
    return {
        "phi": serialize.code_to_data(report.phi, with_domain=True),
        "phi1": serialize.chain_to_data(report.phi1),
        "phi2": serialize.code_to_data(report.phi2, with_domain=True),
        "stages": [
            {
                "name": st.name,
                "code": serialize.code_to_data(st.code, with_domain=True),
                "back": serialize.code_to_data(st.back, with_domain=True),
            }
            for st in report.stages
        ],
        "intermediate": serialize.shift_to_data(report.intermediate),
        "intermediate_entropy": serialize.entropy_to_data(
            report.intermediate_entropy
        ),
        "target": serialize.jsonable(report.target),
        "epsilon": serialize.tol_to_data(report.epsilon),
        "trace": serialize.jsonable(report.trace),
    }


def _run_decompose_factor(args):
    loaded = _load_inputs(args, count=2)
    domain, target_shift = loaded[0][1], loaded[1][1]
    code, code_echo = _load_code(args, domain)
    eps = _need_epsilon(args)
    anchors = (algebra.entropy(domain), algebra.entropy(target_shift))
    kind, value, target_echo = _resolve_target(
        _need_target_texts(args, count=1)[0], anchors, allow_nats=False
    )
    budgets = {
        "rounds": _budget(args, "rounds"),
        "states": _budget(args, "states"),
        "candidates": _budget(args, "candidates"),
    }
    report = factor.decompose_dense(
        code,
        target_shift,
        value,
        eps,
        max_rounds=budgets["rounds"],
        flat_budget=budgets["states"],
        max_candidates=budgets["candidates"],
    )
    config = _base_config(args, "decompose-factor")
    config["inputs"] = _input_echo(loaded)
    config["code"] = code_echo
    config["target"] = target_echo
    config["epsilon"] = serialize.tol_to_data(eps)
    config["budgets"] = budgets
    certificates = serialize.jsonable(report.certificates)
    summary = [
        "decomposed through %s intermediate, h = log %.6f"
        % (report.certificates["kind"], report.intermediate_entropy.approx)
    ]
    return config, _decomposition_payload(report), certificates, summary


def _run_decompose_sft(args):
    loaded = _load_inputs(args, count=2)
    domain, target_shift = loaded[0][1], loaded[1][1]
    code, code_echo = _load_code(args, domain)
    eps = _need_epsilon(args)
    budgets = {"m": _budget(args, "m"), "n": _budget(args, "n")}
    report = factor.split_sft(
        code,
        target_shift,
        eps,
        max_m=budgets["m"],
        max_block_multiple=budgets["n"],
    )
    config = _base_config(args, "decompose-sft")
    config["inputs"] = _input_echo(loaded)
    config["code"] = code_echo
    config["epsilon"] = serialize.tol_to_data(eps)
    config["budgets"] = budgets
    certificates = serialize.jsonable(report.certificates)
    summary = [
        "finite-type intermediate at claimed step %s"
        % report.certificates["step"]["claimed"]
    ]
    return config, _decomposition_payload(report), certificates, summary


def _run_sample_s0(args):
    loaded = _load_inputs(args, count=2)
    domain, target_shift = loaded[0][1], loaded[1][1]
    code, code_echo = _load_code(args, domain)
    eps = _need_epsilon(args)
    anchors = (algebra.entropy(domain), algebra.entropy(target_shift))
    grid = []
    echoes = []
    for text in _need_target_texts(args):
        kind, value, echo = _resolve_target(text, anchors, allow_nats=False)
        grid.append(value)
        echoes.append(echo)
    budgets = {
        "rounds": _budget(args, "rounds"),
        "states": _budget(args, "states"),
        "candidates": _budget(args, "candidates"),
    }
    rows = factor.sample_S0(
        code,
        target_shift,
        tuple(grid),
        eps,
        max_rounds=budgets["rounds"],
        flat_budget=budgets["states"],
        max_candidates=budgets["candidates"],
    )
    config = _base_config(args, "sample-s0")
    config["inputs"] = _input_echo(loaded)
    config["code"] = code_echo
    config["targets"] = echoes
    config["epsilon"] = serialize.tol_to_data(eps)
    config["budgets"] = budgets
    payload = {"rows": serialize.jsonable(rows)}
    done = sum(1 for row in rows if row["status"] == "ok")
    summary = ["%d/%d grid points decomposed" % (done, len(rows))]
    return config, payload, {}, summary


def _recompute_sample_s0(config):
    domain = serialize.shift_from_data(config["inputs"][0]["value"])
    target_shift = serialize.shift_from_data(config["inputs"][1]["value"])
    code = serialize.code_from_data(config["code"]["value"], domain)
    eps = serialize.tol_from_data(config["epsilon"])
    grid = tuple(_resolved_value(echo)[1] for echo in config["targets"])
    budgets = config["budgets"]
    rows = factor.sample_S0(
        code,
        target_shift,
        grid,
        eps,
        max_rounds=budgets["rounds"],
        flat_budget=budgets["states"],
        max_candidates=budgets["candidates"],
    )
    return {"rows": serialize.jsonable(rows)}, {}


def _blowup_certificates(shift, spec, result):
    before = ss.structure(shift)
    after = ss.structure(result)
    horizon = len(spec.orbit) * max(spec.multipliers) + 2
    return {
        "horizon": horizon,
        "census_before": serialize.census_to_data(
            algebra.q_census(shift, horizon)
        ),
        "census_after": serialize.census_to_data(
            algebra.q_census(result, horizon)
        ),
        "entropy": serialize.entropy_to_data(algebra.entropy(result)),
        "entropy_preserved": algebra.compare(
            algebra.entropy(shift).base, algebra.entropy(result).base
        ) == EQ,
        "structure": serialize.structure_to_data(after),
        "mixing_preserved": before.mixing == after.mixing,
    }


def _run_blowup(args):
    loaded = _load_inputs(args, count=1)
    if not args.spec:
        raise ParseError("blowup needs --spec with an orbit and multipliers")
    raw = _parse_inline_or_path(args.spec, "blow-up instructions")
    orbit = tuple(str(s) for s in raw.get("orbit", ()))
    multipliers = tuple(int(m) for m in raw.get("multipliers", ()))
    spec = embedding.BlowupSpec(orbit, multipliers)
    result = embedding.blow_up(loaded[0][1], spec)
    config = _base_config(args, "blowup")
    config["inputs"] = _input_echo(loaded)
    config["spec"] = {"orbit": list(orbit), "multipliers": list(multipliers)}
    payload = {"shift": serialize.shift_to_data(result)}
    certificates = _blowup_certificates(loaded[0][1], spec, result)
    summary = [
        "blown up along %s with multipliers %s"
        % (".".join(orbit), list(multipliers))
    ]
    return config, payload, certificates, summary


def _recompute_blowup(config):
    shift = serialize.shift_from_data(config["inputs"][0]["value"])
    spec = embedding.BlowupSpec(
        tuple(config["spec"]["orbit"]),
        tuple(int(m) for m in config["spec"]["multipliers"]),
    )
    result = embedding.blow_up(shift, spec)
    payload = {"shift": serialize.shift_to_data(result)}
    return payload, _blowup_certificates(shift, spec, result)


def _run_build_bn(args):
    loaded = _load_inputs(args, count=1)
    shift = loaded[0][1]
    if not isinstance(shift, ss.EdgeShift):
        raise ParseError("build-bn expects an edge_shift input")
    if args.n is None:
        raise ParseError("build-bn needs --n")
    result = embedding.build_Bn(shift.matrix, args.n)
    config = _base_config(args, "build-bn")
    config["inputs"] = _input_echo(loaded)
    config["n"] = args.n
    payload = {"shift": serialize.shift_to_data(result)}
    certificates = {
        "period": ss.structure(result).period,
        "entropy": serialize.entropy_to_data(algebra.entropy(result)),
        "entropy_preserved": algebra.compare(
            algebra.entropy(shift).base, algebra.entropy(result).base
        ) == EQ,
    }
    summary = ["staged %d copies, period %d" % (args.n, certificates["period"])]
    return config, payload, certificates, summary


def _recompute_build_bn(config):
    shift = serialize.shift_from_data(config["inputs"][0]["value"])
    result = embedding.build_Bn(shift.matrix, config["n"])
    payload = {"shift": serialize.shift_to_data(result)}
    certificates = {
        "period": ss.structure(result).period,
        "entropy": serialize.entropy_to_data(algebra.entropy(result)),
        "entropy_preserved": algebra.compare(
            algebra.entropy(shift).base, algebra.entropy(result).base
        ) == EQ,
    }
    return payload, certificates


def _run_embed_preconditions(args):
    loaded = _load_inputs(args, count=2)
    report = embedding.embedding_preconditions(loaded[0][1], loaded[1][1])
    config = _base_config(args, "embed-preconditions")
    config["inputs"] = _input_echo(loaded)
    payload = {
        "entropy_ok": report.entropy_ok,
        "census_horizon": report.census_horizon,
        "census_ok": report.census_ok,
        "witnesses": list(report.witnesses),
    }
    verdict = report.entropy_ok and report.census_ok
    summary = [
        "embeddable: %s (entropy %s, census %s to %d)"
        % (verdict, report.entropy_ok, report.census_ok, report.census_horizon)
    ]
    return config, payload, {}, summary


def _recompute_embed_preconditions(config):
    low = serialize.shift_from_data(config["inputs"][0]["value"])
    high = serialize.shift_from_data(config["inputs"][1]["value"])
    report = embedding.embedding_preconditions(low, high)
    payload = {
        "entropy_ok": report.entropy_ok,
        "census_horizon": report.census_horizon,
        "census_ok": report.census_ok,
        "witnesses": list(report.witnesses),
    }
    return payload, {}


def _oracle_query(config, low, high):
    kind, value = _resolved_value(config["target"])
    return embedding.EntropySetQuery(
        set_id=config["set"],
        h=value,
        hX=algebra.entropy(low),
        hY=algebra.entropy(high),
        p=config["p"],
        q=config["q"],
        r_bound=config["r_bound"],
        X_irreducible=ss.structure(low).irreducible,
        nonwandering=config["nonwandering"],
    )


def _run_embed_oracle(args):
    loaded = _load_inputs(args, count=2)
    low, high = loaded[0][1], loaded[1][1]
    if not args.set:
        raise ParseError("embed-oracle needs --set")
    anchors = (algebra.entropy(low), algebra.entropy(high))
    kind, value, target_echo = _resolve_target(
        _need_target_texts(args, count=1)[0], anchors, allow_nats=True
    )
    config = _base_config(args, "embed-oracle")
    config["inputs"] = _input_echo(loaded)
    config["target"] = target_echo
    config["set"] = args.set
    config["p"] = args.p
    config["q"] = args.q
    config["r_bound"] = args.r_bound
    config["nonwandering"] = bool(args.nonwandering)
    verdict, witness = embedding.membership(_oracle_query(config, low, high))
    payload = {"set": args.set, "verdict": verdict, "witness": witness}
    summary = ["%s membership: %s, witness %s" % (args.set, verdict, witness)]
    return config, payload, {}, summary


def _recompute_embed_oracle(config):
    low = serialize.shift_from_data(config["inputs"][0]["value"])
    high = serialize.shift_from_data(config["inputs"][1]["value"])
    verdict, witness = embedding.membership(_oracle_query(config, low, high))
    payload = {"set": config["set"], "verdict": verdict, "witness": witness}
    return payload, {}


def _close_to_target(base, resolved, tol):
    kind, value = resolved
    if kind == "base":
        above = algebra.compare_scaled(base, value, log2=tol.log2, nats=tol.nats)
        below = algebra.compare_scaled(base, value, log2=-tol.log2, nats=-tol.nats)
        return above != GT and below != LT
    upper = algebra.compare_scaled(
        base, algebra.ONE, log2=tol.log2, nats=value + tol.nats
    )
    lower = algebra.compare_scaled(
        base, algebra.ONE, log2=-tol.log2, nats=value - tol.nats
    )
    return upper != GT and lower != LT


def _run_between_search(args):
    loaded = _load_inputs(args, count=2)
    low, high = loaded[0][1], loaded[1][1]
    eps = _need_epsilon(args)
    anchors = (algebra.entropy(low), algebra.entropy(high))
    kind, value, target_echo = _resolve_target(
        _need_target_texts(args, count=1)[0], anchors, allow_nats=True
    )
    budgets = {"word": _budget(args, "word"), "step": _budget(args, "step")}
    candidate = embedding.subshift_between_search(
        low,
        high,
        value,
        eps,
        require=args.require,
        max_word=budgets["word"],
        step_cap=budgets["step"],
    )
    config = _base_config(args, "between-search")
    config["inputs"] = _input_echo(loaded)
    config["target"] = target_echo
    config["epsilon"] = serialize.tol_to_data(eps)
    config["require"] = args.require
    config["budgets"] = budgets
    entropy = algebra.entropy(candidate)
    if args.require == "sft" and not isinstance(
        candidate, (ss.EdgeShift, ss.SftForbidden)
    ):
        step = ss.least_step(candidate, budgets["step"])
    else:
        step = None
    payload = {"shift": serialize.shift_to_data(candidate)}
    certificates = {
        "entropy": serialize.entropy_to_data(entropy),
        "irreducible": True,
        "step": step,
    }
    summary = ["found intermediate with h = log %.6f" % entropy.approx]
    return config, payload, certificates, summary


def _run_verify(args):
    report = serialize.load_path(args.report)
    _check_envelope(report)
    command = report["command"]
    try:
        _CHECKERS[command](report)
    except ShiftError as err:
        raise Mismatch("report failed verification: %s" % err)
    return None, None, None, ["report verified: %s" % command]


# ---------------------------------------------------------------------------
# Report verification
# ---------------------------------------------------------------------------


def _check_envelope(report):
    if not isinstance(report, dict):
        raise ParseError("a report must be a JSON object")
    version = report.get("format_version")
    if version != serialize.FORMAT_VERSION:
        raise ParseError(
            "unsupported report format version %r; this build reads %s"
            % (version, serialize.FORMAT_VERSION)
        )
    for key in ("command", "config", "result", "certificates"):
        if key not in report:
            raise ParseError("report is missing the %r field" % key)
    if report["command"] not in _CHECKERS:
        raise ParseError("report names unknown command %r" % report["command"])


def _must_match(expected, actual, what):
    if serialize.dumps(expected) != serialize.dumps(actual):
        raise Mismatch("recomputed %s differs from the report" % what)


def _replay_checker(recompute):
    """Checker that re-derives result and certificates from the config."""

    def check(report):
        payload, certificates = recompute(report["config"])
        _must_match(payload, report["result"], "result")
        _must_match(certificates, report["certificates"], "certificates")

    return check


_REQUIRED_CERTS = {
    "endpoint": ("rounds", "stages", "onto_target", "entropy_within_target"),
    "absorption": ("rounds", "stages", "onto_target", "entropy_within_target"),
    "absorption-finite": (
        "rounds",
        "stages",
        "onto_target",
        "entropy_within_target",
        "step",
    ),
    "window-filter": (
        "stages",
        "onto_target",
        "entropy_within_target",
        "step",
        "block_length",
        "window_radius",
        "classes",
        "family_bound_holds",
    ),
    "two-stage": (
        "stages",
        "onto_target",
        "entropy_within_target",
        "step",
        "first_stage_rounds",
        "block_length",
        "window_radius",
        "classes",
    ),
}


def _target_from_payload(data):
    if isinstance(data, dict) and "approx" in data:
        return serialize.entropy_from_data(data)
    return serialize.algebraic_from_data(data)


def _check_decomposition(report):
    """Independent certificate re-check of a decomposition report.

    Replays the per-stage window-table identities, the onto check of
    the back map, the exact entropy of the intermediate against the
    target window, and the claimed step, all from the serialized data.
    """
    config, result, certs = (
        report["config"],
        report["result"],
        report["certificates"],
    )
    kind = certs.get("kind")
    if kind not in _REQUIRED_CERTS:
        raise Mismatch("certificates claim unknown kind %r" % (kind,))
    for key in _REQUIRED_CERTS[kind]:
        if key not in certs:
            raise Mismatch("required certificate %r is missing" % key)
    domain = serialize.shift_from_data(config["inputs"][0]["value"])
    final = serialize.shift_from_data(config["inputs"][1]["value"])
    declared = serialize.code_from_data(config["code"]["value"], domain)
    phi = serialize.code_from_data(result["phi"])
    if phi != declared:
        raise Mismatch("the report's code differs from the configured one")
    stages = [
        (
            entry["name"],
            serialize.code_from_data(entry["code"]),
            serialize.code_from_data(entry["back"]),
        )
        for entry in result["stages"]
    ]
    if not stages:
        raise Mismatch("a decomposition needs at least one stage")
    previous = phi
    for name, code, back in stages:
        codes.verify_decomposition(previous, code, back, 1)
        previous = back
    phi2 = serialize.code_from_data(result["phi2"])
    if phi2 != stages[-1][2]:
        raise Mismatch("phi2 differs from the final stage's back map")
    chain = serialize.chain_from_data(result["phi1"])
    if list(chain.stages) != [code for _, code, _ in stages]:
        raise Mismatch("phi1 differs from the recorded stage codes")
    intermediate = serialize.shift_from_data(result["intermediate"])
    if not ss.same_language(phi2.domain, intermediate):
        raise Mismatch("the intermediate differs from the domain of phi2")
    recomputed = algebra.entropy(intermediate)
    _must_match(
        serialize.entropy_to_data(recomputed),
        result["intermediate_entropy"],
        "intermediate entropy",
    )
    target = _target_from_payload(result["target"])
    eps = serialize.tol_from_data(result["epsilon"])
    if eps.is_zero():
        if algebra.compare_scaled(recomputed, target) != EQ:
            raise Mismatch("intermediate entropy differs from the target")
    elif not algebra.entropy_within(recomputed, target, eps):
        raise Mismatch("intermediate entropy is outside the target window")
    if certs.get("onto_target") is not True:
        raise Mismatch("the onto certificate is not affirmative")
    img = codes.image(phi2)
    if ss.contains(final, img) is not None or ss.contains(img, final) is not None:
        raise Mismatch("the back map is not onto the declared image")
    if "step" in certs:
        step = certs["step"]
        claimed = step.get("claimed") if isinstance(step, dict) else None
        if not isinstance(claimed, int) or step.get("verified") is not True:
            raise Mismatch("the step certificate is malformed")
        if not ss.is_k_step(intermediate, claimed):
            raise Mismatch(
                "the intermediate is not %d-step as claimed" % claimed
            )


def _check_between_search(report):
    config, result, certs = (
        report["config"],
        report["result"],
        report["certificates"],
    )
    for key in ("entropy", "irreducible", "step"):
        if key not in certs:
            raise Mismatch("required certificate %r is missing" % key)
    low = serialize.shift_from_data(config["inputs"][0]["value"])
    high = serialize.shift_from_data(config["inputs"][1]["value"])
    candidate = serialize.shift_from_data(result["shift"])
    if ss.contains(low, candidate) is not None:
        raise Mismatch("the candidate does not contain the low shift")
    if ss.contains(candidate, high) is not None:
        raise Mismatch("the candidate is not inside the high shift")
    if not ss.structure(candidate).irreducible:
        raise Mismatch("the candidate is not irreducible")
    entropy = algebra.entropy(candidate)
    _must_match(
        serialize.entropy_to_data(entropy), certs["entropy"], "entropy"
    )
    resolved = _resolved_value(config["target"])
    eps = serialize.tol_from_data(config["epsilon"])
    if not _close_to_target(entropy.base, resolved, eps):
        raise Mismatch("the candidate entropy is outside the target window")
    if config["require"] == "sft" and not isinstance(
        candidate, (ss.EdgeShift, ss.SftForbidden)
    ):
        cap = config["budgets"]["step"]
        if ss.least_step(candidate, cap) is None:
            raise Mismatch("the candidate is not certified finite type")


_CHECKERS = {
    "entropy": _replay_checker(_recompute_entropy),
    "census": _replay_checker(_recompute_census),
    "structure": _replay_checker(_recompute_structure),
    "higher-block": _replay_checker(_recompute_higher_block),
    "forbid": _replay_checker(_recompute_forbid),
    "image": _replay_checker(_recompute_image),
    "compose": _replay_checker(_recompute_compose),
    "verify-code": _replay_checker(_recompute_verify_code),
    "decompose-factor": _check_decomposition,
    "decompose-sft": _check_decomposition,
    "sample-s0": _replay_checker(_recompute_sample_s0),
    "blowup": _replay_checker(_recompute_blowup),
    "build-bn": _replay_checker(_recompute_build_bn),
    "embed-preconditions": _replay_checker(_recompute_embed_preconditions),
    "embed-oracle": _replay_checker(_recompute_embed_oracle),
    "between-search": _check_between_search,
}

_COMMANDS = {
    "entropy": _run_entropy,
    "census": _run_census,
    "structure": _run_structure,
    "higher-block": _run_higher_block,
    "forbid": _run_forbid,
    "image": _run_image,
    "compose": _run_compose,
    "verify-code": _run_verify_code,
    "decompose-factor": _run_decompose_factor,
    "decompose-sft": _run_decompose_sft,
    "sample-s0": _run_sample_s0,
    "blowup": _run_blowup,
    "build-bn": _run_build_bn,
    "embed-preconditions": _run_embed_preconditions,
    "embed-oracle": _run_embed_oracle,
    "between-search": _run_between_search,
    "verify": _run_verify,
}


# ---------------------------------------------------------------------------
# Argument parsing and entry point
# ---------------------------------------------------------------------------


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="shiftdecomp",
        description="Exact decompositions of sliding block codes: "
        "pipelines, oracles, and certified reports.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--input",
        action="append",
        metavar="PATH",
        help="shift description file; repeat for commands taking several",
    )
    common.add_argument(
        "--code",
        action="append",
        metavar="PATH",
        help="code file over the (first) input shift",
    )
    common.add_argument(
        "--target",
        action="append",
        metavar="SPEC",
        help="entropy target: 'p/q*log2', 'p/q' nats, inline JSON, or a path",
    )
    common.add_argument(
        "--epsilon", metavar="TOL", help="tolerance, 'p/q' or 'p/q*log2'"
    )
    common.add_argument(
        "--require",
        choices=("none", "sofic", "sft"),
        default="none",
        help="class required of a searched intermediate",
    )
    common.add_argument("--seed", type=int, default=0, help="echoed into the report")
    common.add_argument("--out", metavar="PATH", help="write the report here")
    common.add_argument("--n", type=int, help="block or stage count")
    common.add_argument(
        "--word",
        action="append",
        metavar="WORD",
        help="word as 'a,b,c' or a JSON array; repeatable",
    )
    common.add_argument(
        "--spec",
        metavar="JSON",
        help="blow-up instructions {\"orbit\": [...], \"multipliers\": [...]}",
    )
    common.add_argument(
        "--set",
        choices=("T_prime", "T0", "T1_prime"),
        help="entropy set for the membership oracle",
    )
    common.add_argument("--p", type=int, default=1, help="period of the point to embed")
    common.add_argument("--q", type=int, default=1, help="required divisor of the exponent")
    common.add_argument("--r-bound", type=int, default=None, help="cap on the witness exponent")
    common.add_argument(
        "--nonwandering",
        action="store_true",
        help="assert the low shift must sit inside the nonwandering set",
    )
    for name in ("rounds", "m", "n", "states", "candidates", "horizon", "word", "step"):
        common.add_argument(
            "--budget-" + name,
            dest="budget_" + name,
            type=int,
            help="budget: max %s (default %d)" % (name, _BUDGET_DEFAULTS[name]),
        )
    descriptions = {
        "entropy": "exact entropy and structure facts per input shift",
        "census": "least-period point counts up to the horizon budget",
        "structure": "irreducibility, mixing, and period of one shift",
        "higher-block": "recode one shift to its --n block presentation",
        "forbid": "remove the given words from one shift's language",
        "image": "image shift of a code over the input shift",
        "compose": "compose two codes, the first applied first",
        "verify-code": "validate a code file against its domain",
        "decompose-factor": "two-stage split of a factor code near a target entropy",
        "decompose-sft": "split with a finite-type intermediate at a certified step",
        "sample-s0": "decompose toward each target, tabulating the results",
        "blowup": "multiply one periodic orbit while preserving entropy",
        "build-bn": "period-n staging of an edge shift",
        "embed-preconditions": "entropy and census tests for a proper embedding",
        "embed-oracle": "membership in the constrained entropy sets",
        "between-search": "search for an intermediate subshift at a target entropy",
    }
    for name, description in descriptions.items():
        sub.add_parser(name, parents=[common], help=description, description=description)
    verify = sub.add_parser(
        "verify",
        help="re-check a previously emitted report",
        description="re-check every certificate of a report from its own bytes",
    )
    verify.add_argument("report", help="path of the report to verify")
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--out", default=None)
    return parser


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    started = time.monotonic()
    try:
        config, payload, certificates, summary = _COMMANDS[args.command](args)
    except ShiftError as err:
        sys.stderr.write("error[%s]: %s\n" % (type(err).__name__, err))
        details = _error_details(err)
        if details:
            sys.stderr.write(serialize.dumps(details))
        return _exit_code_for(err)
    if config is not None:
        report = {
            "format_version": serialize.FORMAT_VERSION,
            "command": args.command,
            "config": config,
            "result": payload,
            "certificates": certificates,
            "timing": {
                "note": "elapsed time goes to stderr so the report bytes "
                "depend only on the configuration"
            },
        }
        if args.out:
            serialize.dump_path(args.out, report)
        else:
            sys.stdout.write(serialize.dumps(report))
    for line in summary:
        sys.stderr.write(line + "\n")
    sys.stderr.write("elapsed: %.3fs\n" % (time.monotonic() - started))
    return 0


if __name__ == "__main__":
    sys.exit(main())
