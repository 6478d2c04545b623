"""Census surgery and entropy-set oracles for embeddings between shifts.

Given shift spaces X inside Y with room between their entropies, the
operations here answer which intermediate subshifts exist and build
witnesses with prescribed periodic-point counts:

* ``blow_up`` replaces one periodic orbit of a finite-type shift by
  longer orbits without disturbing any other periodic point, the basic
  census-editing move.  The exact effect on the least-period counts is
  re-verified after every surgery.
* ``build_Bn`` arranges n copies of an irreducible matrix in a cycle,
  giving a shift of the same entropy whose period is exactly n when the
  input is primitive.
* ``embedding_preconditions`` checks the entropy gap and the census
  domination that embedding properly into a mixing finite-type shift
  requires, with a finite certified horizon.
* ``membership`` decides whether a value is the entropy of some
  intermediate subshift of a requested kind (arbitrary, finite type, or
  sofic), using exact interval comparisons plus Perron and weak-Perron
  arithmetic.
* ``subshift_between_search`` enumerates small forbidden-word
  restrictions of the big shift looking for an intermediate subshift
  with entropy near a target.
* ``census_sandwich`` builds a mixing finite-type shift W with entropy
  equal to a Perron-log target whose census fits between those of X and
  Y, certified by a pair of precondition reports.

Everything is exact: entropies are algebraic numbers with certified
isolating intervals, censuses are integers, tolerances are rationals.
"""

from dataclasses import dataclass
from fractions import Fraction

from sympy import divisors

from . import algebra, graphs
from . import shiftspace as ss
from .algebra import EQ, GT, LT
from .errors import (
    CensusMismatch,
    EmptyShift,
    EntropyNotSeparated,
    IterationCap,
    NotAlgebraicInteger,
    NotFound,
    NotIrreducible,
    NotMixingTarget,
    OrbitNotFound,
    ParseError,
    RealizationUnavailable,
    UnboundedSearch,
    WordNotInLanguage,
)


@dataclass(frozen=True)
class BlowupSpec:
    """One period of a designated orbit plus the replacement multipliers.

    ``orbit`` spells the orbit once (a word whose length n is the least
    period).  ``multipliers`` lists k integers M_1, ..., M_k >= 1; the
    surgery removes the designated orbit and creates one fresh orbit of
    length n * M_i per multiplier.
    """

    orbit: tuple
    multipliers: tuple


@dataclass(frozen=True)
class EmbedPreconditionReport:
    """Entropy gap and census domination checks for a proper embedding.

    ``entropy_ok`` records the strict inequality h(X) < h(Y), decided
    exactly.  When it holds, the least-period counts are compared for
    every k up to ``census_horizon``, a crossover bound beyond which
    domination follows from the entropy gap, and ``witnesses`` lists the
    periods k with q_k(X) > q_k(Y).  Both checks passing certifies that
    X embeds properly into the mixing finite-type Y.
    """

    entropy_ok: bool
    census_horizon: int
    census_ok: bool
    witnesses: tuple


@dataclass(frozen=True)
class EntropySetQuery:
    """A membership question about one set of intermediate entropies.

    ``set_id`` picks the set: "T_prime" (entropies of arbitrary
    subshifts strictly between X and Y), "T0" (finite-type middles,
    decided by Perron arithmetic), or "T1_prime" (sofic middles, decided
    by weak-Perron arithmetic).  ``h`` is the candidate value and
    ``hX``/``hY`` the endpoint entropies.  ``p`` and ``q`` are the
    periods of X and Y feeding the exponent search for "T0"; ``r_bound``
    optionally caps that search.  ``X_irreducible`` closes the left
    endpoint for "T_prime" and "T1_prime" (an irreducible X attains its
    own entropy); ``nonwandering`` opens the left endpoint for "T0"
    (the nonwandering variant of the finite-type set).
    """

    set_id: str
    h: object
    hX: object
    hY: object
    p: int = 1
    q: int = 1
    r_bound: int = None
    X_irreducible: bool = False
    nonwandering: bool = False


# ---------------------------------------------------------------------------
# Entropy value plumbing shared by the oracles and searches
# ---------------------------------------------------------------------------


def _as_entropy(value):
    """Normalize an entropy input to ("base", algebraic) or ("nats", rational).

    EntropyValue and AlgebraicReal inputs are exact bases e^h; plain
    numbers are read as rational values of h itself in nats.
    """
    if isinstance(value, algebra.EntropyValue):
        return ("base", value.base)
    if isinstance(value, algebra.AlgebraicReal):
        return ("base", value)
    try:
        return ("nats", Fraction(value))
    except (TypeError, ValueError):
        raise ParseError("cannot read %r as an entropy" % (value,))


def _cmp_entropy(a, b):
    """Exact three-way comparison of two normalized entropies."""
    kind_a, val_a = a
    kind_b, val_b = b
    if kind_a == "base" and kind_b == "base":
        return algebra.compare(val_a, val_b)
    if kind_a == "nats" and kind_b == "nats":
        return LT if val_a < val_b else GT if val_a > val_b else EQ
    if kind_a == "base":
        return algebra.compare_to_exp(val_a, val_b)
    flipped = algebra.compare_to_exp(val_b, val_a)
    return LT if flipped == GT else GT if flipped == LT else EQ


def _within_tolerance(base, target, tol):
    """Whether |log(base) - target| <= tol, decided exactly.

    The tolerance may be a plain rational number of nats or a Tol
    carrying separate nats and log-2 parts; both are handled without
    rounding.
    """
    if isinstance(tol, algebra.Tol):
        nats, log2 = tol.nats, tol.log2
    else:
        nats, log2 = Fraction(tol), Fraction(0)
    kind, value = target
    if kind == "base":
        above = algebra.compare_scaled(base, value, log2=log2, nats=nats)
        below = algebra.compare_scaled(base, value, log2=-log2, nats=-nats)
        return above != GT and below != LT
    high = algebra.compare_scaled(
        base, algebra.ONE, log2=log2, nats=value + nats
    )
    low = algebra.compare_scaled(
        base, algebra.ONE, log2=-log2, nats=value - nats
    )
    return high != GT and low != LT


def _perron_safe(x):
    """is_perron, with non-algebraic-integers counting as plainly not."""
    try:
        return algebra.is_perron(x)
    except NotAlgebraicInteger:
        return False


def _weak_perron_safe(x):
    """is_weak_perron, with non-algebraic-integers counting as not."""
    try:
        return algebra.is_weak_perron(x)
    except NotAlgebraicInteger:
        return False, None


_ENTROPY_CACHE = {}


def _cached_entropy(shift):
    """entropy(shift), memoized on the shift description."""
    value = _ENTROPY_CACHE.get(shift)
    if value is None:
        value = algebra.entropy(shift)
        _ENTROPY_CACHE[shift] = value
    return value


# ---------------------------------------------------------------------------
# Orbit blow-up
# ---------------------------------------------------------------------------

_BLOCK_LIMIT = 20000
_LENGTH_PROBES = 24

_BLOCK_CACHE = {}


def _least_rotation_period(word):
    """Smallest d dividing len(word) with word equal to its own d-rotation."""
    n = len(word)
    for d in range(1, n):
        if n % d == 0 and word[d:] + word[:d] == word:
            return d
    return n


def _pattern_run(block, orbit):
    """Longest suffix of a block lying on the periodic orbit, with phase.

    Returns (run, phase): run is the length of the longest suffix of the
    block that occurs in the bi-infinite repetition of the orbit word,
    phase is the orbit position (mod n) of the block's last symbol under
    the best alignment, None when run is 0.  Ties pick the smallest
    phase; for run >= 2n the alignment is unique, the only regime the
    surgery relies on.
    """
    n = len(orbit)
    length = len(block)
    best = 0
    best_phase = None
    for phase in range(n):
        run = 0
        for back in range(length):
            if block[length - 1 - back] != orbit[(phase - back) % n]:
                break
            run += 1
        if run > best:
            best = run
            best_phase = phase
    return best, best_phase


def _block_graph(shift, orbit, length):
    """Graph of legal length-L blocks with their orbit-shadowing runs.

    Vertices are the legal L-words; u feeds v when they overlap in L - 1
    symbols and the joined (L + 1)-word is legal.  Each block carries the
    run and phase of its longest orbit-shadowing suffix.  Cached per
    (shift, orbit, length) because the surgery sweeps many multiplier
    lists over the same base graph.
    """
    key = (shift, orbit, length)
    cached = _BLOCK_CACHE.get(key)
    if cached is not None:
        return cached
    blocks = list(ss.words(shift, length))
    longer = set(ss.words(shift, length + 1))
    alphabet = ss.alphabet_of(shift)
    succ = {}
    for block in blocks:
        succ[block] = [
            block[1:] + (symbol,)
            for symbol in alphabet
            if block + (symbol,) in longer
        ]
    runs = {}
    phases = {}
    for block in blocks:
        runs[block], phases[block] = _pattern_run(block, orbit)
    data = {"blocks": blocks, "succ": succ, "run": runs, "phase": phases}
    _BLOCK_CACHE[key] = data
    return data


def blow_up(shift, spec):
    """Replace one periodic orbit by longer ones, exactly on the census.

    The orbit of least period n spelled by ``spec.orbit`` disappears and
    one fresh orbit of length n * M_i appears per multiplier, while every
    other periodic point of every period is preserved.  Writing q for the
    least-period counts, the output satisfies exactly

    * q_n changes by -n + n * (number of multipliers equal to 1),
    * q_{n * M} grows by n * M for each multiplier M > 1,
    * every other count is unchanged,

    and a mixing input gives a mixing output.  The result is an edge
    shift.  The construction works on the graph of legal L-blocks: a
    block whose suffix shadows the orbit for at least 2n symbols is
    tagged with a multiplier index and a lap counter, blocks entering
    that regime are distributed round-robin over the k multipliers, and
    a block that breaks off the orbit drops its tag (a break always
    lands below the 2n threshold, so the tag rules are consistent).
    Forever-shadowing points, exactly the designated orbit, become the k
    wound-up cycles; everything else lifts uniquely and length
    preservingly.  The census contract, irreducibility, and preserved
    mixing are re-verified on the output, so a construction bug raises
    CensusMismatch rather than returning a wrong shift.
    """
    if not isinstance(shift, (ss.EdgeShift, ss.SftForbidden)):
        raise ParseError("blow_up needs a finite-type shift")
    orbit = tuple(spec.orbit)
    multipliers = tuple(spec.multipliers)
    if not orbit:
        raise ParseError("the orbit word must be nonempty")
    if not multipliers:
        raise ParseError("at least one multiplier is required")
    if any(not isinstance(m, int) or m < 1 for m in multipliers):
        raise ParseError("multipliers must be integers >= 1")
    n = len(orbit)
    least = _least_rotation_period(orbit)
    if least != n:
        raise OrbitNotFound(
            "the orbit word has least period %d, not %d" % (least, n)
        )
    alphabet = set(ss.alphabet_of(shift))
    if any(symbol not in alphabet for symbol in orbit):
        raise OrbitNotFound("the orbit word uses symbols outside the alphabet")
    if not ss.orbit_in_shift(shift, orbit):
        raise OrbitNotFound("the designated orbit is not in the shift")
    facts = ss.structure(shift)
    if not facts.irreducible:
        raise NotIrreducible("blow_up needs an irreducible shift")
    if algebra.compare(_cached_entropy(shift).base, algebra.ONE) != GT:
        raise EntropyNotSeparated(
            "blow_up needs positive entropy so traffic off the orbit exists"
        )

    k = len(multipliers)
    threshold = 2 * n
    presentation = ss.canonical_presentation(shift)
    base_length = max(threshold + 1, ss.step_size(shift) + 1)
    data = None
    length = base_length
    for length in range(base_length, base_length + _LENGTH_PROBES):
        if graphs.word_count(presentation, length) > _BLOCK_LIMIT:
            raise UnboundedSearch(
                "the block graph would exceed %d states" % _BLOCK_LIMIT
            )
        candidate = _block_graph(shift, orbit, length)
        entries = [
            block
            for block in candidate["blocks"]
            if candidate["run"][block] == threshold
        ]
        if len(entries) >= k:
            data = candidate
            break
    if data is None:
        raise UnboundedSearch(
            "no block length yields %d distinct orbit entries" % k
        )

    blocks = data["blocks"]
    succ = data["succ"]
    run = data["run"]
    phase = data["phase"]
    deep = [block for block in blocks if run[block] == length]
    if len(deep) != n:
        raise CensusMismatch(
            "expected %d deep blocks, found %d" % (n, len(deep))
        )
    entries = sorted(block for block in blocks if run[block] == threshold)
    cycle_of = {block: index % k for index, block in enumerate(entries)}

    def versions(block):
        if run[block] < threshold:
            return (("u", block),)
        return tuple(
            ("t", block, i, lap)
            for i in range(k)
            for lap in range(multipliers[i])
        )

    arrows = []
    for block in blocks:
        tagged = run[block] >= threshold
        for target in succ[block]:
            target_run = run[target]
            if target_run < threshold:
                for source in versions(block):
                    arrows.append((source, ("u", target)))
            elif target_run == threshold:
                if tagged:
                    raise CensusMismatch(
                        "an entry block was reached from a tagged block"
                    )
                arrows.append(
                    (("u", block), ("t", target, cycle_of[target], 0))
                )
            else:
                if not tagged:
                    raise CensusMismatch("a run jumped past the entry level")
                tick = phase[target] == 0
                for i in range(k):
                    m = multipliers[i]
                    for lap in range(m):
                        next_lap = (lap + 1) % m if tick else lap
                        arrows.append(
                            (("t", block, i, lap), ("t", target, i, next_lap))
                        )
    states = sorted({state for arrow in arrows for state in arrow})
    labeled = [
        (source, target, "e%d" % index)
        for index, (source, target) in enumerate(arrows)
    ]
    graph = graphs.trim(graphs.make_graph(states, labeled))
    if not graphs.is_strongly_connected(graph):
        raise CensusMismatch("the surgery broke irreducibility")
    if facts.mixing and graphs.graph_period(graph) != 1:
        raise CensusMismatch("the surgery broke mixing")
    matrix, _ = graphs.adjacency_matrix(graph)
    result = ss.edge_shift(matrix)

    horizon = n * max(multipliers) + 2
    before = algebra.q_census(shift, horizon)
    after = algebra.q_census(result, horizon)
    expected = dict(before.counts)
    units = sum(1 for m in multipliers if m == 1)
    expected[n] = expected.get(n, 0) - n + n * units
    for m in multipliers:
        if m > 1:
            expected[n * m] = expected.get(n * m, 0) + n * m
    for period in range(1, horizon + 1):
        if after.q(period) != expected.get(period, 0):
            raise CensusMismatch(
                "period %d count is %d, expected %d"
                % (period, after.q(period), expected.get(period, 0))
            )
    return result


# ---------------------------------------------------------------------------
# Block-cyclic period construction
# ---------------------------------------------------------------------------


def build_Bn(matrix, n):
    """Cyclic arrangement of n copies of an irreducible matrix.

    The output edge shift runs on n stages, each a copy of the input
    state set, with the input matrix feeding stage i into stage i + 1
    (mod n).  Entropy is preserved exactly (the n-th power of the new
    spectral radius equals the n-th power of the old one) and for a
    primitive input the result is irreducible with period exactly n,
    which is the standard witness that every entropy class contains
    irreducible shifts of every finite period.
    """
    if not isinstance(n, int) or n < 1:
        raise ParseError("the number of stages must be a positive integer")
    base = ss.edge_shift(matrix)
    rows = base.matrix
    m = len(rows)
    arrows = [
        ("s%d" % i, "s%d" % j, "b%d_%d" % (i, j))
        for i in range(m)
        for j in range(m)
        if rows[i][j]
    ]
    states = ["s%d" % i for i in range(m)]
    if not arrows or not graphs.is_strongly_connected(
        graphs.make_graph(states, arrows)
    ):
        raise NotIrreducible("build_Bn needs an irreducible matrix")
    if n == 1:
        return base
    size = m * n
    big = [[0] * size for _ in range(size)]
    for stage in range(n):
        offset = stage * m
        target = ((stage + 1) % n) * m
        for i in range(m):
            for j in range(m):
                big[offset + i][target + j] = rows[i][j]
    return ss.edge_shift(big)


# ---------------------------------------------------------------------------
# Embedding preconditions
# ---------------------------------------------------------------------------


def embedding_preconditions(low_shift, high_shift):
    """Check h(X) < h(Y) and q_k(X) <= q_k(Y) for all k, with witnesses.

    The high shift must be mixing finite type.  A failed entropy gap
    short-circuits (census_horizon 0, census not checked); otherwise the
    crossover bound K* is computed, domination is automatic past K*, and
    every period up to K* is compared exactly.  Both checks passing is
    the classical criterion for a proper embedding, so the report
    certifies embeddability without constructing the embedding.
    """
    if not isinstance(high_shift, (ss.EdgeShift, ss.SftForbidden)):
        raise NotMixingTarget("the containing shift must be finite type")
    if not ss.structure(high_shift).mixing:
        raise NotMixingTarget("the containing shift must be mixing")
    low_entropy = _cached_entropy(low_shift)
    high_entropy = _cached_entropy(high_shift)
    if algebra.compare(low_entropy.base, high_entropy.base) != LT:
        return EmbedPreconditionReport(False, 0, False, ())
    bound = algebra.crossover_bound(low_shift, high_shift)
    if bound < 1:
        return EmbedPreconditionReport(True, bound, True, ())
    low_counts = algebra.q_census(low_shift, bound)
    high_counts = algebra.q_census(high_shift, bound)
    witnesses = tuple(
        period
        for period in range(1, bound + 1)
        if low_counts.q(period) > high_counts.q(period)
    )
    return EmbedPreconditionReport(True, bound, not witnesses, witnesses)


# ---------------------------------------------------------------------------
# Entropy-set membership oracles
# ---------------------------------------------------------------------------


def membership(query):
    """Decide one entropy-set membership question exactly.

    Returns (answer, witness).  For "T0" the witness is the exponent r
    (a divisor of p and multiple of q with e^{r h} Perron) and for
    "T1_prime" it is the weak-Perron power; otherwise None.  Interval
    endpoints follow the query flags: the right endpoint h(Y) is always
    included, the left endpoint h(X) is included for "T_prime" and
    "T1_prime" exactly when X_irreducible is set, and for "T0" unless
    nonwandering is set.
    """
    if query.set_id not in ("T_prime", "T0", "T1_prime"):
        raise ParseError("unknown set_id %r" % (query.set_id,))
    if query.set_id == "T0":
        if not isinstance(query.p, int) or query.p < 1:
            raise ParseError("p must be a positive integer")
        if not isinstance(query.q, int) or query.q < 1:
            raise ParseError("q must be a positive integer")
    value = _as_entropy(query.h)
    low = _as_entropy(query.hX)
    high = _as_entropy(query.hY)
    if query.set_id == "T0":
        closed_left = not query.nonwandering
    else:
        closed_left = query.X_irreducible
    against_low = _cmp_entropy(value, low)
    if against_low == LT or (against_low == EQ and not closed_left):
        return False, None
    if _cmp_entropy(value, high) == GT:
        return False, None
    if query.set_id == "T_prime":
        return True, None
    kind, payload = value
    if query.set_id == "T0":
        for r in divisors(query.p):
            if r % query.q:
                continue
            if query.r_bound is not None and r > query.r_bound:
                continue
            if kind == "nats":
                scaled_is_perron = payload == 0
            else:
                scaled_is_perron = _perron_safe(algebra.alg_pow(payload, r))
            if scaled_is_perron:
                return True, r
        return False, None
    if kind == "nats":
        if payload == 0:
            return True, 1
        return False, None
    ok, power = _weak_perron_safe(payload)
    return (True, power) if ok else (False, None)


# ---------------------------------------------------------------------------
# Restriction search for intermediate subshifts
# ---------------------------------------------------------------------------


def subshift_between_search(
    low_shift,
    high_shift,
    target,
    tol,
    require="none",
    *,
    max_word=8,
    step_cap=12,
):
    """First small restriction of the high shift hitting a target entropy.

    Candidates are the high shift itself followed by forbid(high, {w})
    for single words w of length 1..max_word in (length, lexicographic)
    order; words of the low shift are skipped, which keeps the low shift
    inside every candidate.  A candidate is returned when it is
    irreducible (an intermediate subshift here always means an
    irreducible one, matching the decomposition semantics), its entropy
    is within tol of the target (closed inequality, exact arithmetic),
    and it meets the required class: "none" and "sofic" accept anything
    produced here, "sft" accepts finite-type descriptions directly and a
    sofic description only when some step size at most step_cap
    certifies finite type (an exact accept; the reject is conservative
    for finite-type shifts with memory beyond step_cap).  Exhausting the
    budget raises NotFound carrying the searched bound, a meaningful
    negative answer.
    """
    if require not in ("none", "sofic", "sft"):
        raise ParseError("unknown require class %r" % (require,))
    if not isinstance(tol, algebra.Tol):
        tol = algebra.Tol(Fraction(tol), Fraction(0))
    if tol.nats < 0 or tol.log2 < 0:
        raise ParseError("the tolerance must be nonnegative")
    if not isinstance(max_word, int) or max_word < 1:
        raise ParseError("max_word must be a positive integer")
    witness = ss.contains(low_shift, high_shift)
    if witness is not None:
        raise WordNotInLanguage(
            "the low shift is not inside the high shift, witness %r"
            % (witness,)
        )
    goal = _as_entropy(target)
    low_entropy = _cached_entropy(low_shift)
    high_entropy = _cached_entropy(high_shift)
    if _cmp_entropy(("base", low_entropy.base), goal) != LT:
        raise EntropyNotSeparated("the target must exceed the low entropy")
    if _cmp_entropy(goal, ("base", high_entropy.base)) == GT:
        raise EntropyNotSeparated("the target must not exceed the high entropy")

    def candidates():
        yield high_shift
        for length in range(1, max_word + 1):
            low_words = set(ss.words(low_shift, length))
            for word in ss.words(high_shift, length):
                if word in low_words:
                    continue
                try:
                    yield ss.forbid(high_shift, (word,))
                except EmptyShift:
                    continue

    for candidate in candidates():
        entropy = _cached_entropy(candidate)
        if not _within_tolerance(entropy.base, goal, tol):
            continue
        if not ss.structure(candidate).irreducible:
            continue
        if require == "sft" and not _certified_finite_type(candidate, step_cap):
            continue
        return candidate
    raise NotFound(
        "no restriction by at most one forbidden word hit the target",
        searched_bound=max_word,
    )


def _certified_finite_type(shift, step_cap):
    """True when the shift is certified k-step for some k <= step_cap."""
    if isinstance(shift, (ss.EdgeShift, ss.SftForbidden)):
        return True
    return ss.least_step(shift, step_cap) is not None


# ---------------------------------------------------------------------------
# Census sandwich
# ---------------------------------------------------------------------------

_WORD_SEARCH_LIMIT = 200000


def _orbit_word(shift, period):
    """A word spelling an orbit of the given least period, if any."""
    presentation = ss.canonical_presentation(shift)
    if graphs.word_count(presentation, period) > _WORD_SEARCH_LIMIT:
        raise UnboundedSearch(
            "too many words of length %d to scan for an orbit" % period
        )
    for word in ss.words(shift, period):
        if _least_rotation_period(word) != period:
            continue
        if ss.orbit_in_shift(shift, word):
            return word
    return None


def _companion_realization(base):
    """Mixing edge shift with Perron root base and a fixed point.

    Accepts bases whose minimal polynomial is a dominant companion
    x^d - a_1 x^{d-1} - ... - a_d with every a_i >= 0, a_d >= 1, and
    a_1 >= 1 (the a_1 loop is the fixed point the census adjustments
    lean on).  Such a companion matrix is nonnegative, irreducible
    because of the a_d feedback edge, and primitive because of the a_1
    loop.
    """
    if not _perron_safe(base):
        raise RealizationUnavailable(
            "the target is not the log of a Perron number"
        )
    poly = list(base.poly)
    degree = len(poly) - 1
    top_row = [-poly[degree - j] for j in range(1, degree + 1)]
    if any(entry < 0 for entry in top_row) or top_row[-1] < 1:
        raise RealizationUnavailable(
            "the minimal polynomial is not a dominant companion"
        )
    if top_row[0] < 1:
        raise RealizationUnavailable(
            "the companion realization has no fixed point"
        )
    matrix = [[0] * degree for _ in range(degree)]
    for j in range(degree):
        matrix[0][j] = int(top_row[j])
    for i in range(1, degree):
        matrix[i][i - 1] = 1
    witness = ss.edge_shift(matrix)
    if algebra.compare(_cached_entropy(witness).base, base) != EQ:
        raise CensusMismatch(
            "the companion realization has the wrong Perron root"
        )
    return witness


def _raise_census(witness, period, deficit):
    """Blow up an orbit so q_{period} grows by exactly the deficit.

    Finds an orbit of some least period d dividing the target period and
    replaces it by itself (unit multiplier) plus deficit / period fresh
    orbits of length exactly the target period.  The deficit is always a
    multiple of the period because least-period points come in whole
    orbits.
    """
    count = deficit // period
    for d in divisors(period):
        word = _orbit_word(witness, d)
        if word is None:
            continue
        multipliers = (1,) + (period // d,) * count
        return blow_up(witness, BlowupSpec(word, multipliers))
    raise RealizationUnavailable(
        "no orbit is available to raise the period-%d census" % period
    )


def _lower_census(witness, high_shift, period):
    """Blow one orbit of the given least period out past the crossover.

    Removes one orbit and lands its replacement at a period beyond the
    linear-slack crossover bound against the high shift, where the
    census of the high shift has room for the new orbit by at least its
    own length.  One orbit per call; the adjustment loop drives repeats
    so every step is re-certified against fresh bounds.
    """
    word = _orbit_word(witness, period)
    if word is None:
        raise CensusMismatch(
            "period-%d orbits disappeared during lowering" % period
        )
    slack_bound = algebra.crossover_bound(
        witness, high_shift, linear_slack=True
    )
    multiplier = max(2, slack_bound // period + 1)
    return blow_up(witness, BlowupSpec(word, (multiplier,)))


def census_sandwich(
    low_shift, high_shift, target, *, realization=None, max_rounds=20
):
    """Mixing finite-type W with h(W) = target and census between X and Y.

    The target must be the log of a Perron number strictly between the
    endpoint entropies.  A starting realization is taken from the
    supplied matrix (which must be primitive with the right entropy and
    a fixed point) or derived from the dominant-companion form of the
    target's minimal polynomial.  Blow-up surgeries then adjust the
    census: deficits against X are raised through the fixed point or a
    divisor-period orbit, excesses against Y are pushed out past a
    crossover bound with linear slack, where domination absorbs them.
    Returns (W, (report_low, report_high)), the two precondition reports
    certifying q_k(X) <= q_k(W) <= q_k(Y) for all k alongside the strict
    entropy inequalities.  Exceeding max_rounds raises IterationCap with
    the adjustment trace.
    """
    if not isinstance(high_shift, (ss.EdgeShift, ss.SftForbidden)):
        raise NotMixingTarget("the containing shift must be finite type")
    if not ss.structure(high_shift).mixing:
        raise NotMixingTarget("the containing shift must be mixing")
    kind, payload = _as_entropy(target)
    if kind == "nats" and payload != 0:
        raise RealizationUnavailable(
            "a nonzero rational-nats target is not the log of a Perron number"
        )
    low_entropy = _cached_entropy(low_shift)
    high_entropy = _cached_entropy(high_shift)
    if kind == "nats":
        raise EntropyNotSeparated("need h(X) < target < h(Y)")
    base = payload
    if (
        algebra.compare(low_entropy.base, base) != LT
        or algebra.compare(base, high_entropy.base) != LT
    ):
        raise EntropyNotSeparated("need h(X) < target < h(Y)")
    if realization is not None:
        witness = ss.edge_shift(realization)
        facts = ss.structure(witness)
        if not facts.mixing:
            raise RealizationUnavailable("the supplied matrix is not primitive")
        if algebra.compare(_cached_entropy(witness).base, base) != EQ:
            raise RealizationUnavailable(
                "the supplied matrix has the wrong entropy"
            )
        if all(witness.matrix[i][i] == 0 for i in range(len(witness.matrix))):
            raise RealizationUnavailable(
                "the supplied matrix has no fixed point"
            )
    else:
        witness = _companion_realization(base)
    trace = []
    for round_index in range(max_rounds + 1):
        report_low = embedding_preconditions(low_shift, witness)
        report_high = embedding_preconditions(witness, high_shift)
        if not (report_low.entropy_ok and report_high.entropy_ok):
            raise CensusMismatch("an adjustment changed the entropy")
        if report_low.census_ok and report_high.census_ok:
            return witness, (report_low, report_high)
        if round_index == max_rounds:
            break
        if not report_low.census_ok:
            period = report_low.witnesses[0]
            deficit = algebra.q_census(low_shift, period).q(
                period
            ) - algebra.q_census(witness, period).q(period)
            trace.append(("raise", period, deficit))
            witness = _raise_census(witness, period, deficit)
        else:
            period = report_high.witnesses[0]
            excess = algebra.q_census(witness, period).q(
                period
            ) - algebra.q_census(high_shift, period).q(period)
            trace.append(("lower", period, excess))
            witness = _lower_census(witness, high_shift, period)
    raise IterationCap(
        "census adjustment did not converge within %d rounds" % max_rounds,
        trace=trace,
    )
