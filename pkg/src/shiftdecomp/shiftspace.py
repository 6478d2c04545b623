"""Shift spaces and the operations shared by every higher layer.

Three descriptions are supported: EdgeShift (a square nonnegative integer
matrix whose bi-infinite edge walks form the shift), SftForbidden (a finite
alphabet with finitely many forbidden words), and SoficPresentation (an
essential labeled graph read along bi-infinite paths).

All three are immutable and hashable; derived presentations are memoized
per value.
"""

from dataclasses import dataclass

from . import graphs
from .errors import EmptyShift, ParseError


@dataclass(frozen=True)
class EdgeShift:
    matrix: tuple


@dataclass(frozen=True)
class SftForbidden:
    alphabet: tuple
    forbidden: tuple


@dataclass(frozen=True)
class SoficPresentation:
    states: tuple
    edges: tuple


@dataclass(frozen=True)
class StructureFacts:
    irreducible: bool
    mixing: bool
    period: int
    nonwandering_note: str


def edge_shift(matrix):
    rows = []
    for row in matrix:
        rows.append(tuple(int(x) for x in row))
    mat = tuple(rows)
    if not mat:
        raise ParseError("edge shift matrix must be nonempty")
    n = len(mat)
    for row in mat:
        if len(row) != n:
            raise ParseError("edge shift matrix must be square")
        for x in row:
            if x < 0:
                raise ParseError("edge shift matrix entries must be >= 0")
    return EdgeShift(mat)


def sft(alphabet, forbidden):
    alpha = tuple(sorted({str(a) for a in alphabet}))
    if not alpha:
        raise ParseError("alphabet must be nonempty")
    words_ = set()
    for w in forbidden:
        word = tuple(str(s) for s in w)
        for s in word:
            if s not in alpha:
                raise ParseError("forbidden word uses unknown symbol %r" % s)
        words_.add(word)
    return SftForbidden(alpha, tuple(sorted(words_)))


def sofic(states, edges):
    sts = tuple(sorted({str(s) for s in states}))
    if not sts:
        raise ParseError("sofic presentation needs at least one state")
    es = set()
    for src, dst, label in edges:
        src, dst, label = str(src), str(dst), str(label)
        if src not in sts or dst not in sts:
            raise ParseError("edge %r-%r references unknown state" % (src, dst))
        es.add((src, dst, label))
    if not es:
        raise ParseError("sofic presentation needs at least one edge")
    return SoficPresentation(sts, tuple(sorted(es)))


def step_size(shift):
    """Length bound k such that the SFT description is k-step."""
    if isinstance(shift, EdgeShift):
        return 1
    if isinstance(shift, SftForbidden):
        longest = max((len(w) for w in shift.forbidden), default=1)
        return max(longest - 1, 0)
    raise ParseError("step size is defined for finite-type descriptions only")


_presentation_cache = {}
_canonical_cache = {}
_analyzer_cache = {}


def presentation(shift):
    """Essential labeled graph presenting the shift; raises EmptyShift."""
    if shift in _presentation_cache:
        return _presentation_cache[shift]
    if isinstance(shift, EdgeShift):
        g = graphs.trim(graphs.edge_shift_graph(shift.matrix))
    elif isinstance(shift, SftForbidden):
        g = graphs.build_word_automaton(shift.alphabet, shift.forbidden)
    elif isinstance(shift, SoficPresentation):
        g = graphs.trim(graphs.make_graph(shift.states, shift.edges))
    else:
        raise ParseError("unknown shift description %r" % (shift,))
    _presentation_cache[shift] = g
    return g


def canonical_presentation(shift):
    """Right-resolving essential presentation with follower-equal states
    merged and stable q0, q1, ... names."""
    if shift not in _canonical_cache:
        _canonical_cache[shift] = graphs.canonical(presentation(shift))
    return _canonical_cache[shift]


def _analyzer(shift):
    if shift not in _analyzer_cache:
        _analyzer_cache[shift] = graphs.StepAnalyzer(canonical_presentation(shift))
    return _analyzer_cache[shift]


def alphabet_of(shift):
    """Symbols that actually occur, i.e. the length-one words."""
    return canonical_presentation(shift).labels()


def trim(shift):
    """Equivalent description whose presentation is essential.

    EdgeShift comes back as the principal submatrix on surviving states,
    SftForbidden unchanged (after confirming nonemptiness), and a sofic
    presentation with stranded states removed.
    """
    if isinstance(shift, EdgeShift):
        g = presentation(shift)
        survivors = sorted(int(s[1:]) for s in g.states)
        mat = tuple(
            tuple(shift.matrix[i][j] for j in survivors) for i in survivors
        )
        return EdgeShift(mat)
    if isinstance(shift, SftForbidden):
        presentation(shift)
        return shift
    g = presentation(shift)
    return SoficPresentation(g.states, g.edges)


def words(shift, n):
    """Sorted list of the length-n words (tuples of symbols)."""
    if n < 0:
        raise ParseError("word length must be >= 0")
    return sorted(graphs.words_of_length(canonical_presentation(shift), n))


def word_count(shift, n):
    return graphs.word_count(canonical_presentation(shift), n)


def structure(shift):
    """Irreducibility, mixing, and period of the shift.

    Edge shifts and forbidden-word descriptions are read off their own
    faithful presentations; sofic presentations are determinized first.
    Period is the gcd of cycle lengths over all strongly connected
    components; mixing means irreducible with period one.
    """
    if isinstance(shift, SoficPresentation):
        g = canonical_presentation(shift)
    else:
        g = presentation(shift)
    irreducible = graphs.is_strongly_connected(g)
    period = graphs.graph_period(g)
    mixing = irreducible and period == 1
    if irreducible:
        note = "irreducible: every point is nonwandering"
    else:
        note = "reducible: wandering points may exist between components"
    return StructureFacts(irreducible, mixing, period, note)


def _as_finite_type(shift):
    """(alphabet, forbidden words) describing the same finite-type shift."""
    if isinstance(shift, SftForbidden):
        return shift.alphabet, shift.forbidden
    if isinstance(shift, EdgeShift):
        g = presentation(shift)
        heads = {label: dst for _, dst, label in g.edges}
        tails = {label: src for src, _, label in g.edges}
        labels = g.labels()
        pairs = tuple(
            (e, f) for e in labels for f in labels if heads[e] != tails[f]
        )
        return tuple(labels), pairs
    raise ParseError("not a finite-type description")


def _contains_factor(word, factor):
    k = len(factor)
    return any(word[i : i + k] == factor for i in range(len(word) - k + 1))


def block_symbol_map(shift, n):
    """Map from n-block symbol names back to the underlying words."""
    return {".".join(w): w for w in words(shift, n)}


def higher_block(shift, n):
    """The n-block recoding: alphabet is the length-n words of the shift.

    Finite-type inputs come back as a 1-step-per-window SftForbidden over
    dotted window names; sofic inputs come back as a sofic presentation
    whose labels are dotted windows.
    """
    if n < 1:
        raise ParseError("block length must be >= 1")
    if isinstance(shift, SoficPresentation):
        g = graphs.higher_block_graph(canonical_presentation(shift), n)
        return sofic(g.states, g.edges)
    alpha, forbidden = _as_finite_type(shift)
    blocks = words(shift, n)
    name = {w: ".".join(w) for w in blocks}
    new_forbidden = set()
    short = [f for f in forbidden if len(f) <= n + 1]
    for u in blocks:
        for v in blocks:
            if u[1:] != v[:-1]:
                new_forbidden.add((name[u], name[v]))
                continue
            joined = u + (v[-1],)
            if any(_contains_factor(joined, f) for f in short):
                new_forbidden.add((name[u], name[v]))
    for f in forbidden:
        if len(f) <= n + 1:
            continue
        windows = [tuple(f[i : i + n]) for i in range(len(f) - n + 1)]
        if all(w in name for w in windows):
            new_forbidden.add(tuple(name[w] for w in windows))
    return trim(sft(name.values(), new_forbidden))


def forbid(shift, extra):
    """Largest subshift avoiding every word in `extra`.

    Finite-type inputs stay finite-type; sofic inputs go through a product
    with the word-avoiding automaton and are determinized.
    """
    extra = {tuple(str(s) for s in w) for w in extra}
    if not extra:
        return shift
    alpha = set(alphabet_of(shift))
    for w in extra:
        for s in w:
            if s not in alpha:
                raise ParseError("forbidden word uses unknown symbol %r" % s)
    if isinstance(shift, (EdgeShift, SftForbidden)):
        base_alpha, base_forbidden = _as_finite_type(shift)
        return trim(sft(base_alpha, set(base_forbidden) | extra))
    g = canonical_presentation(shift)
    avoid = graphs.build_word_automaton(sorted(alpha), extra)
    product_edges = []
    avoid_out = avoid.out_map()
    for src, dst, label in g.edges:
        for a_src in avoid.states:
            for a_label, a_dst in avoid_out[a_src]:
                if a_label == label:
                    product_edges.append(
                        ("%s|%s" % (src, a_src), "%s|%s" % (dst, a_dst), label)
                    )
    states = {"%s|%s" % (s, a) for s in g.states for a in avoid.states}
    product = graphs.trim(graphs.make_graph(states, product_edges))
    h = graphs.rename_canonical(graphs.determinize(product))
    return sofic(h.states, h.edges)


def determinize(p):
    """Right-resolving sofic presentation of the same language."""
    if not isinstance(p, SoficPresentation):
        raise ParseError("determinize expects a sofic presentation")
    g = graphs.rename_canonical(graphs.determinize(graphs.trim(
        graphs.make_graph(p.states, p.edges))))
    return SoficPresentation(g.states, g.edges)


def is_k_step(shift, k):
    """Whether every length-k word forces the same continuations
    regardless of what preceded it."""
    if k < 0:
        raise ParseError("k must be >= 0")
    return _analyzer(shift).is_k_step(k)


def least_step(shift, cap):
    """Smallest k <= cap for which is_k_step holds, else None."""
    return _analyzer(shift).least_step(cap)


def is_synchronizing(shift, w):
    """Whether the word forces a unique follower set wherever it occurs."""
    return _analyzer(shift).is_synchronizing(tuple(str(s) for s in w))


def has_fixed_point(shift):
    """True iff some symbol a satisfies a^k in the language for every k."""
    g = canonical_presentation(shift)
    return any(
        graphs.word_cycle_exists(g, (a,)) for a in alphabet_of(shift)
    )


def orbit_in_shift(shift, word):
    """True iff the periodic repetition of `word` lies in the shift."""
    if not word:
        raise ParseError("orbit word must be nonempty")
    return graphs.word_cycle_exists(
        canonical_presentation(shift), tuple(str(s) for s in word)
    )


def contains(small, big):
    """None when language(small) is contained in language(big), else a
    witness word realized in `small` but not in `big`."""
    return graphs.contains_language(
        canonical_presentation(small), canonical_presentation(big)
    )


def same_language(a, b):
    return contains(a, b) is None and contains(b, a) is None
