"""Sliding block codes as first-class values.

A BlockMap carries an explicit window table: every word of length
memory + anticipation + 1 of the domain is assigned an output symbol.
Two codes are equal exactly when their windows and tables agree, which
makes verification a finite check.

Index convention: applying a code with memory m and anticipation a to a
word produces output aligned with input position m, so the output has
length |w| - m - a.  Compositions add memories and anticipations, and
recode_one_block returns a conjugacy with the same memory and
anticipation as the input code, so composing the two reproduces the
input with zero offset.
"""

from dataclasses import dataclass

from . import graphs
from .errors import (
    ImageNotInDomain,
    Mismatch,
    ParseError,
    WordNotInDomain,
    WordTooShort,
)
from .shiftspace import (
    alphabet_of,
    block_symbol_map,
    canonical_presentation,
    contains,
    higher_block,
    same_language,
    sofic,
    words,
)


@dataclass(frozen=True, eq=False)
class BlockMap:
    memory: int
    anticipation: int
    domain: object
    target_alphabet: tuple
    table: dict

    def __eq__(self, other):
        if not isinstance(other, BlockMap):
            return NotImplemented
        return (
            self.memory == other.memory
            and self.anticipation == other.anticipation
            and self.domain == other.domain
            and self.table == other.table
        )

    @property
    def window(self):
        return self.memory + self.anticipation + 1


@dataclass(frozen=True)
class CodeChain:
    stages: tuple


def block_map(memory, anticipation, domain, table, target_alphabet=None):
    """Validated BlockMap; the table must cover the window words exactly."""
    memory = int(memory)
    anticipation = int(anticipation)
    if memory < 0 or anticipation < 0:
        raise ParseError("memory and anticipation must be >= 0")
    clean = {}
    for window, out in table.items():
        clean[tuple(str(s) for s in window)] = str(out)
    needed = words(domain, memory + anticipation + 1)
    missing = [w for w in needed if w not in clean]
    if missing:
        raise ParseError(
            "table is missing %d window(s): %s"
            % (len(missing), ", ".join(".".join(w) for w in missing[:20]))
        )
    extra = sorted(set(clean) - set(needed))
    if extra:
        raise ParseError(
            "table has %d window(s) outside the domain language: %s"
            % (len(extra), ", ".join(".".join(w) for w in extra[:20]))
        )
    outputs = tuple(sorted(set(clean.values())))
    if target_alphabet is None:
        target = outputs
    else:
        target = tuple(sorted({str(s) for s in target_alphabet}))
        stray = [s for s in outputs if s not in target]
        if stray:
            raise ParseError(
                "table outputs %s missing from the target alphabet" % stray
            )
    return BlockMap(memory, anticipation, domain, target, clean)


def identity_code(shift):
    """The 1-block code sending every symbol to itself."""
    return block_map(0, 0, shift, {(s,): s for s in alphabet_of(shift)})


def one_block_code(shift, mapping):
    """1-block code from a plain symbol-to-symbol mapping."""
    return block_map(
        0, 0, shift, {(s,): mapping[s] for s in alphabet_of(shift)}
    )


def _slide(code, word):
    """Raw window slide; callers guarantee word is in the domain."""
    m, a = code.memory, code.anticipation
    return tuple(
        code.table[word[i - m : i + a + 1]]
        for i in range(m, len(word) - a)
    )


def _in_language(shift, word):
    g = canonical_presentation(shift)
    table = graphs.transition_table(g)
    return bool(graphs.run_word(table, frozenset(g.states), word))


def apply(code, w):
    """Image word of w under the code; length |w| - memory - anticipation."""
    word = tuple(str(s) for s in w)
    if len(word) < code.window:
        raise WordTooShort(
            "word of length %d is shorter than the window %d"
            % (len(word), code.window)
        )
    if not _in_language(code.domain, word):
        raise WordNotInDomain("%s is not in the domain" % ".".join(word))
    return _slide(code, word)


def compose(g, f):
    """The code computing g after f; memories and anticipations add.

    Every window of the combined length is pushed through f and looked up
    in g's table, which verifies on the way that the image of f stays
    inside the domain of g at the combined window length.
    """
    memory = f.memory + g.memory
    anticipation = f.anticipation + g.anticipation
    table = {}
    for w in words(f.domain, memory + anticipation + 1):
        mid = _slide(f, w)
        if mid not in g.table:
            raise ImageNotInDomain(
                "image word %s is not in the domain of the outer code"
                % ".".join(mid)
            )
        table[w] = g.table[mid]
    return block_map(
        memory, anticipation, f.domain, table, g.target_alphabet
    )


def compose_chain(chain):
    """Single BlockMap equal to the chain applied first-stage-first."""
    stages = chain.stages if isinstance(chain, CodeChain) else tuple(chain)
    if not stages:
        raise ParseError("cannot compose an empty chain")
    combined = stages[0]
    for stage in stages[1:]:
        combined = compose(stage, combined)
    return combined


def code_chain(stages):
    """Validated chain: each stage's image covers the next stage's domain."""
    stages = tuple(stages)
    if not stages:
        raise ParseError("a chain needs at least one code")
    for first, second in zip(stages, stages[1:]):
        witness = contains(second.domain, image(first))
        if witness is not None:
            raise ImageNotInDomain(
                "stage image misses the word %s needed by the next domain"
                % ".".join(witness)
            )
    return CodeChain(stages)


def recode_one_block(code):
    """(1-block code, conjugacy) pair reproducing the code by composition.

    The conjugacy is the higher-block code onto the window-length block
    shift, built with the same memory and anticipation as the input, so
    compose(one_block, conjugacy) equals the input code exactly.
    """
    n = code.window
    if n == 1:
        return code, identity_code(code.domain)
    blocked = higher_block(code.domain, n)
    name_to_word = block_symbol_map(code.domain, n)
    table = {
        (name,): code.table[word] for name, word in name_to_word.items()
    }
    one = block_map(0, 0, blocked, table, code.target_alphabet)
    beta = block_map(
        code.memory,
        code.anticipation,
        code.domain,
        {word: name for name, word in name_to_word.items()},
    )
    return one, beta


_image_cache = {}


def image(code):
    """Sofic presentation of everything the code can output.

    Built on the window graph of the domain's right-resolving
    presentation: a state is a path of window-minus-one edges, every
    outgoing edge completes one window, and that edge is relabeled with
    the table entry for the window it completes.  The reading frame is
    shifted by the memory, which leaves the image shift unchanged.  The
    relabeled graph is trimmed, determinized, and renamed.  Results are
    cached per code object; certificates image the same codes their
    pipeline already imaged, and wide windows make that costly.
    """
    hit = _image_cache.get(id(code))
    if hit is not None and hit[0] is code:
        return hit[1]
    g = canonical_presentation(code.domain)
    n = code.window
    out = g.out_map()
    paths = [(q,) for q in g.states]
    for _ in range(n - 1):
        paths = [
            p + ((label, dst),)
            for p in paths
            for label, dst in out[p[-1][1] if len(p) > 1 else p[0]]
        ]
    index = {p: "p%d" % i for i, p in enumerate(sorted(paths))}
    edges = set()
    for p in paths:
        last = p[-1][1] if len(p) > 1 else p[0]
        prefix = tuple(step[0] for step in p[1:])
        for label, dst in out[last]:
            succ = ((p[1][1],) + p[2:] + ((label, dst),)) if n > 1 else (dst,)
            edges.add((index[p], index[succ], code.table[prefix + (label,)]))
    relabeled = graphs.make_graph(index.values(), edges)
    h = graphs.rename_canonical(graphs.determinize(graphs.trim(relabeled)))
    result = sofic(h.states, h.edges)
    if len(_image_cache) > 512:
        _image_cache.clear()
    _image_cache[id(code)] = (code, result)
    return result


def extend_code(code, memory, anticipation):
    """The same sliding map expressed over a larger window.

    Every new window is answered by looking up its central old window,
    so the code is unchanged as a map on points.
    """
    if memory < code.memory or anticipation < code.anticipation:
        raise ParseError("extending a code cannot shrink its window")
    if memory == code.memory and anticipation == code.anticipation:
        return code
    table, bad = _extend_table(
        code, memory, anticipation, words(code.domain, memory + anticipation + 1)
    )
    if table is None:
        raise WordNotInDomain(
            "window %s has no central entry in the table" % ".".join(bad)
        )
    return block_map(
        memory, anticipation, code.domain, table, code.target_alphabet
    )


def is_factor_onto(code, target):
    """Whether the code maps its domain onto exactly the target language."""
    return same_language(image(code), target)


def is_embedding(code):
    """Whether the code is injective on the points of its domain.

    Decided on the pair graph of the recoded 1-block presentation: the
    code collapses two distinct points exactly when some pair edge with
    different input labels but equal outputs sits on a bi-infinite pair
    path, i.e. is reachable from a cycle and can reach a cycle.
    """
    one, _ = recode_one_block(code)
    g = canonical_presentation(one.domain)
    out = g.out_map()
    pair_succ = {}
    unequal = []
    for u in g.states:
        for v in g.states:
            succ = set()
            for lu, du in out[u]:
                for lv, dv in out[v]:
                    if one.table[(lu,)] != one.table[(lv,)]:
                        continue
                    succ.add((du, dv))
                    if lu != lv:
                        unequal.append(((u, v), (du, dv)))
            pair_succ[(u, v)] = sorted(succ)
    if not unequal:
        return True
    named = graphs.make_graph(
        ["%s|%s" % p for p in pair_succ],
        {
            ("%s|%s" % p, "%s|%s" % q, "")
            for p, succ in pair_succ.items()
            for q in succ
        },
    )
    succ_map = {}
    pred_map = {}
    self_loops = set()
    for src, dst, _ in named.edges:
        succ_map.setdefault(src, set()).add(dst)
        pred_map.setdefault(dst, set()).add(src)
        if src == dst:
            self_loops.add(src)
    cyclic = set()
    for comp in graphs.strongly_connected_components(named):
        if len(comp) > 1 or comp[0] in self_loops:
            cyclic.update(comp)
    from_cycle = _reach(cyclic, succ_map)
    to_cycle = _reach(cyclic, pred_map)
    for p, q in unequal:
        if "%s|%s" % p in from_cycle and "%s|%s" % q in to_cycle:
            return False
    return True


def _reach(start, adjacency):
    seen = set(start)
    queue = list(start)
    while queue:
        cur = queue.pop()
        for nxt in adjacency.get(cur, ()):
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return seen


def _extend_table(code, target_memory, target_anticipation, windows):
    dm = target_memory - code.memory
    da = target_anticipation - code.anticipation
    table = {}
    for w in windows:
        inner = w[dm : len(w) - da] if da else w[dm:]
        hit = code.table.get(inner)
        if hit is None:
            return None, w
        table[w] = hit
    return table, None


def verify_decomposition(phi, phi1, phi2, length):
    """Certificate that phi2 after phi1 equals phi and both stages are onto.

    Tables are recoded to a common window of at least `length` and compared
    entry by entry; equal window tables force equal codes everywhere, so
    the certificate records the checked window.  Stage one must map onto
    the domain of stage two, and stage two must map onto the image of phi.
    Raises Mismatch with a witness word on any failure.
    """
    combined = compose(phi2, phi1)
    target_memory = max(phi.memory, combined.memory)
    target_anticipation = max(phi.anticipation, combined.anticipation)
    window = target_memory + target_anticipation + 1
    if window < length:
        target_anticipation += length - window
        window = length
    window_words = words(phi.domain, window)
    left, bad = _extend_table(
        phi, target_memory, target_anticipation, window_words
    )
    if left is None:
        raise Mismatch(
            "window %s is outside the claimed code's table" % ".".join(bad),
            witness=bad,
        )
    right, bad = _extend_table(
        combined, target_memory, target_anticipation, window_words
    )
    if right is None:
        raise Mismatch(
            "window %s is outside the composed table" % ".".join(bad),
            witness=bad,
        )
    for w in window_words:
        if left[w] != right[w]:
            raise Mismatch(
                "tables differ on window %s" % ".".join(w), witness=w
            )
    stage1_image = image(phi1)
    witness = contains(phi2.domain, stage1_image)
    if witness is None:
        witness = contains(stage1_image, phi2.domain)
    if witness is not None:
        raise Mismatch(
            "stage one is not onto the intermediate shift near %s"
            % ".".join(witness),
            witness=witness,
        )
    full_image = image(phi)
    stage2_image = image(phi2)
    witness = contains(full_image, stage2_image)
    if witness is None:
        witness = contains(stage2_image, full_image)
    if witness is not None:
        raise Mismatch(
            "stage two is not onto the final image near %s"
            % ".".join(witness),
            witness=witness,
        )
    return {
        "checked_window": window,
        "window_count": len(window_words),
        "tables_equal": True,
        "stage1_onto": True,
        "stage2_onto": True,
    }
