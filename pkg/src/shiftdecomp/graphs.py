"""Labeled directed graphs backing every shift-space presentation.

A LabeledGraph is a finite directed multigraph with string state names and
string edge labels. Edge shifts use globally unique labels, forbidden-word
shifts of finite type go through a word automaton, and sofic shifts carry
their presentation directly.

All constructions walk states and labels in sorted order, so outputs are
reproducible bit for bit.
"""

from dataclasses import dataclass
from math import gcd

from .errors import EmptyShift, WordNotInLanguage

# Guard against pathological subset-construction blowups; generous for
# every presentation this library builds.
MAX_SUBSETS = 200_000


@dataclass(frozen=True)
class LabeledGraph:
    states: tuple
    edges: tuple  # of (src, dst, label) triples

    def out_map(self):
        """Map src -> sorted list of (label, dst)."""
        out = {s: [] for s in self.states}
        for src, dst, label in self.edges:
            out[src].append((label, dst))
        for s in out:
            out[s].sort()
        return out

    def labels(self):
        return sorted({label for _, _, label in self.edges})


def make_graph(states, edges):
    return LabeledGraph(tuple(sorted(states)), tuple(sorted(edges)))


def edge_shift_graph(matrix):
    """Graph of the edge shift of a nonnegative integer matrix.

    Every edge gets a unique label, so the labeled paths are exactly the
    edge sequences.
    """
    n = len(matrix)
    states = ["v%d" % i for i in range(n)]
    edges = []
    for i in range(n):
        for j in range(n):
            for t in range(matrix[i][j]):
                edges.append((states[i], states[j], "e%d_%d_%d" % (i, j, t)))
    return make_graph(states, edges)


def trim(g):
    """Largest subgraph in which every state has in- and out-degree >= 1.

    Raises EmptyShift when nothing survives.
    """
    alive = set(g.states)
    edges = list(g.edges)
    while True:
        outs = {s: 0 for s in alive}
        ins = {s: 0 for s in alive}
        kept = []
        for src, dst, label in edges:
            if src in alive and dst in alive:
                kept.append((src, dst, label))
                outs[src] += 1
                ins[dst] += 1
        dead = {s for s in alive if outs[s] == 0 or ins[s] == 0}
        if not dead:
            if not alive:
                raise EmptyShift("no bi-infinite path survives trimming")
            return make_graph(alive, kept)
        alive -= dead
        edges = kept
        if not alive:
            raise EmptyShift("no bi-infinite path survives trimming")


def strongly_connected_components(g):
    """Tarjan's algorithm, iterative; components in deterministic order."""
    out = g.out_map()
    index = {}
    low = {}
    on_stack = set()
    stack = []
    comps = []
    counter = [0]
    for root in g.states:
        if root in index:
            continue
        work = [(root, iter([dst for _, dst in out[root]]))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for dst in it:
                if dst not in index:
                    index[dst] = low[dst] = counter[0]
                    counter[0] += 1
                    stack.append(dst)
                    on_stack.add(dst)
                    work.append((dst, iter([d for _, d in out[dst]])))
                    advanced = True
                    break
                if dst in on_stack:
                    low[node] = min(low[node], index[dst])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    s = stack.pop()
                    on_stack.discard(s)
                    comp.append(s)
                    if s == node:
                        break
                comps.append(sorted(comp))
    return sorted(comps)


def is_strongly_connected(g):
    return len(strongly_connected_components(g)) == 1


def graph_period(g):
    """gcd of all cycle lengths, computed per strongly connected component.

    Returns 0 when the graph has no cycle at all.
    """
    out = g.out_map()
    overall = 0
    for comp in strongly_connected_components(g):
        members = set(comp)
        internal = [(s, d) for s in comp for _, d in out[s] if d in members]
        if not internal:
            continue
        root = comp[0]
        level = {root: 0}
        queue = [root]
        succ = {s: [d for _, d in out[s] if d in members] for s in comp}
        while queue:
            nxt = []
            for u in queue:
                for v in succ[u]:
                    if v not in level:
                        level[v] = level[u] + 1
                        nxt.append(v)
            queue = nxt
        comp_gcd = 0
        for u, v in internal:
            comp_gcd = gcd(comp_gcd, level[u] + 1 - level[v])
        overall = gcd(overall, abs(comp_gcd))
    return overall


def is_right_resolving(g):
    seen = set()
    for src, _, label in g.edges:
        if (src, label) in seen:
            return False
        seen.add((src, label))
    return True


def determinize(g):
    """Right-resolving presentation of the same sofic language.

    A presentation that is already right-resolving comes back unchanged
    after trimming.  Anything else goes through the follower-subset
    construction seeded from the full state set, so the subsets reached
    are exactly the follower sets of words; their number tracks the
    minimal presentation instead of the input size.  States are named in
    discovery order because follower sets can hold most of a large input
    graph, which would make membership-based names enormous.
    """
    g = trim(g)
    if is_right_resolving(g):
        return g
    out = g.out_map()
    trans = {}
    for src in g.states:
        for label, dst in out[src]:
            trans.setdefault(label, {}).setdefault(src, []).append(dst)
    labels = sorted(trans)
    full = frozenset(g.states)
    names = {full: "d0"}
    queue = [full]
    edges = []
    while queue:
        cur = queue.pop(0)
        for label in labels:
            tmap = trans[label]
            nxt = frozenset(
                d for s in cur if s in tmap for d in tmap[s]
            )
            if not nxt:
                continue
            if nxt not in names:
                names[nxt] = "d%d" % len(names)
                queue.append(nxt)
                if len(names) > MAX_SUBSETS:
                    raise RuntimeError(
                        "subset construction exceeded state budget"
                    )
            edges.append((names[cur], names[nxt], label))
    return trim(make_graph(names.values(), edges))


def reduce_right_resolving(g):
    """Merge states with equal follower languages (partition refinement).

    Requires a right-resolving essential graph; language is preserved.
    """
    out = g.out_map()
    signature = {s: tuple(lab for lab, _ in out[s]) for s in g.states}
    block = {}
    for s in g.states:
        block.setdefault(signature[s], []).append(s)
    cls = {}
    for i, key in enumerate(sorted(block)):
        for s in block[key]:
            cls[s] = i
    while True:
        refined = {}
        for s in g.states:
            key = (cls[s], tuple((lab, cls[dst]) for lab, dst in out[s]))
            refined.setdefault(key, []).append(s)
        if len(refined) == len(set(cls.values())):
            break
        cls = {}
        for i, key in enumerate(sorted(refined)):
            for s in refined[key]:
                cls[s] = i
    rep = {}
    for s in sorted(g.states):
        rep.setdefault(cls[s], s)
    name = {c: "{%s}" % rep[c] for c in rep}
    edges = {(name[cls[src]], name[cls[dst]], label) for src, dst, label in g.edges}
    return make_graph(set(name.values()), edges)


def rename_canonical(g):
    """Stable q0, q1, ... naming by breadth-first discovery order."""
    out = g.out_map()
    order = []
    seen = set()
    for root in g.states:
        if root in seen:
            continue
        queue = [root]
        seen.add(root)
        while queue:
            s = queue.pop(0)
            order.append(s)
            for _, dst in out[s]:
                if dst not in seen:
                    seen.add(dst)
                    queue.append(dst)
    name = {s: "q%d" % i for i, s in enumerate(order)}
    edges = [(name[src], name[dst], label) for src, dst, label in g.edges]
    return make_graph(name.values(), edges)


def canonical(g):
    """trim -> determinize -> merge equal followers -> trim -> rename."""
    return rename_canonical(trim(reduce_right_resolving(determinize(trim(g)))))


def transition_table(g):
    """(state, label) -> state table for a right-resolving graph."""
    table = {}
    for src, dst, label in g.edges:
        if (src, label) in table:
            raise ValueError("graph is not right-resolving")
        table[(src, label)] = dst
    return table


def subset_step(table, subset, label):
    return frozenset(
        table[(s, label)] for s in subset if (s, label) in table
    )


def adjacency_matrix(g):
    """(matrix, state order): entry [i][j] counts edges i -> j."""
    states = list(g.states)
    pos = {s: i for i, s in enumerate(states)}
    n = len(states)
    mat = [[0] * n for _ in range(n)]
    for src, dst, _ in g.edges:
        mat[pos[src]][pos[dst]] += 1
    return mat, states


def word_count(g, n):
    """Number of distinct label words of length n (right-resolving input)."""
    table = transition_table(g)
    labels = g.labels()
    full = frozenset(g.states)
    nodes = {full: 0}
    trans = []
    queue = [full]
    while queue:
        cur = queue.pop(0)
        i = nodes[cur]
        for label in labels:
            nxt = subset_step(table, cur, label)
            if not nxt:
                continue
            if nxt not in nodes:
                nodes[nxt] = len(nodes)
                queue.append(nxt)
                if len(nodes) > MAX_SUBSETS:
                    raise RuntimeError("subset construction exceeded budget")
            trans.append((i, nodes[nxt]))
    counts = [0] * len(nodes)
    counts[0] = 1
    for _ in range(n):
        nxt_counts = [0] * len(nodes)
        for i, j in trans:
            nxt_counts[j] += counts[i]
        counts = nxt_counts
    return sum(counts)


def words_of_length(g, n):
    """Set of label words (tuples) of length n; right-resolving input."""
    table = transition_table(g)
    labels = g.labels()
    frontier = {(): frozenset(g.states)}
    for _ in range(n):
        nxt = {}
        for word, subset in frontier.items():
            for label in labels:
                stepped = subset_step(table, subset, label)
                if stepped:
                    nxt[word + (label,)] = stepped
        frontier = nxt
    return set(frontier)


def run_word(table, subset, word):
    cur = subset
    for label in word:
        cur = subset_step(table, cur, label)
        if not cur:
            return cur
    return cur


def word_cycle_exists(g, word):
    """True iff the periodic repetition of `word` has a bi-infinite run."""
    table = transition_table(g)
    fun = {}
    for s in g.states:
        cur = s
        ok = True
        for label in word:
            if (cur, label) not in table:
                ok = False
                break
            cur = table[(cur, label)]
        if ok:
            fun[s] = cur
    for start in fun:
        index = set()
        cur = start
        while cur in fun:
            if cur in index:
                return True
            index.add(cur)
            cur = fun[cur]
    return False


def contains_language(g_small, g_big):
    """None if every word of g_small is a word of g_big, else a witness word.

    Both graphs must be right-resolving and essential.
    """
    t_small = transition_table(g_small)
    t_big = transition_table(g_big)
    labels = sorted(set(g_small.labels()) | set(g_big.labels()))
    start = (frozenset(g_small.states), frozenset(g_big.states))
    seen = {start}
    queue = [(start, ())]
    while queue:
        (sa, sb), word = queue.pop(0)
        for label in labels:
            na = subset_step(t_small, sa, label)
            if not na:
                continue
            nb = subset_step(t_big, sb, label)
            if not nb:
                return word + (label,)
            key = (na, nb)
            if key not in seen:
                seen.add(key)
                queue.append((key, word + (label,)))
    return None


def languages_equal(g1, g2):
    return contains_language(g1, g2) is None and contains_language(g2, g1) is None


class StepAnalyzer:
    """Decides the k-step property and synchronizing words on one graph.

    Works on a right-resolving essential presentation. The language is
    k-step exactly when for every word v of length k, any two occurrences
    of v admit the same continuations; this is decided on subset pairs
    (follower sets of u·v versus of v alone), whose evolution is eventually
    periodic in k.
    """

    def __init__(self, g):
        self.g = g
        self.table = transition_table(g)
        self.labels = g.labels()
        self.full = frozenset(g.states)
        self._reachable = None
        self._pair_levels = None
        self._pair_cycle = None
        self._bad_cache = {}

    def reachable_subsets(self):
        if self._reachable is not None:
            return self._reachable
        seen = {self.full}
        queue = [self.full]
        while queue:
            cur = queue.pop(0)
            for label in self.labels:
                nxt = subset_step(self.table, cur, label)
                if nxt and nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
                    if len(seen) > MAX_SUBSETS:
                        raise RuntimeError("subset family exceeded budget")
        self._reachable = seen
        return seen

    def pair_is_bad(self, a, b):
        """True iff some word dies from `a` but survives from `b`."""
        if a == b:
            return False
        key = (a, b)
        if key in self._bad_cache:
            return self._bad_cache[key]
        seen = {key}
        queue = [key]
        bad = False
        while queue and not bad:
            ca, cb = queue.pop(0)
            for label in self.labels:
                nb = subset_step(self.table, cb, label)
                if not nb:
                    continue
                na = subset_step(self.table, ca, label)
                if not na:
                    bad = True
                    break
                if na != nb and (na, nb) not in seen:
                    seen.add((na, nb))
                    queue.append((na, nb))
        if bad:
            self._bad_cache[key] = True
        else:
            for pair in seen:
                self._bad_cache[pair] = False
        return bad

    def _pair_sets(self):
        """Levels P_0, P_1, ... of (follower of u·v, follower of v) pairs,
        with the (preperiod, period) of their eventual cycle."""
        if self._pair_levels is not None:
            return self._pair_levels, self._pair_cycle
        start = frozenset(
            (a, self.full) for a in self.reachable_subsets()
        )
        levels = [start]
        seen_at = {start: 0}
        while True:
            cur = levels[-1]
            nxt = set()
            for a, b in cur:
                for label in self.labels:
                    nb = subset_step(self.table, b, label)
                    if not nb:
                        continue
                    na = subset_step(self.table, a, label)
                    if not na:
                        continue
                    nxt.add((na, nb))
            nxt = frozenset(nxt)
            if nxt in seen_at:
                self._pair_levels = levels
                self._pair_cycle = (seen_at[nxt], len(levels) - seen_at[nxt])
                return self._pair_levels, self._pair_cycle
            seen_at[nxt] = len(levels)
            levels.append(nxt)

    def is_k_step(self, k):
        levels, (pre, period) = self._pair_sets()
        if k < len(levels):
            idx = k
        else:
            idx = pre + (k - pre) % period
        return all(not self.pair_is_bad(a, b) for a, b in levels[idx])

    def least_step(self, cap):
        """Smallest k <= cap with is_k_step true, else None."""
        levels, (pre, period) = self._pair_sets()
        good = [all(not self.pair_is_bad(a, b) for a, b in lv) for lv in levels]
        for k in range(min(cap, len(levels) - 1) + 1):
            idx = k if k < len(levels) else pre + (k - pre) % period
            if good[idx]:
                return k
        for k in range(len(levels), cap + 1):
            idx = pre + (k - pre) % period
            if good[idx]:
                return k
        return None

    def is_synchronizing(self, word):
        target = run_word(self.table, self.full, word)
        if not target:
            raise WordNotInLanguage("word %r is not in the language" % (word,))
        if len(target) == 1:
            return True
        for a in self.reachable_subsets():
            landed = run_word(self.table, a, word)
            if landed and self.pair_is_bad(landed, target):
                return False
        return True


def build_word_automaton(alphabet, forbidden):
    """Deterministic presentation of the subshift avoiding `forbidden`.

    States are the live proper prefixes of forbidden words (the classic
    failure-link automaton); reading any max-length window synchronizes the
    state, so this presentation generates each point by exactly one run and
    its cycle counts equal the shift's periodic-point counts.
    Raises EmptyShift if nothing survives.
    """
    forbidden = {tuple(w) for w in forbidden}
    if () in forbidden:
        raise EmptyShift("the empty word is forbidden")
    prefixes = {()}
    for w in forbidden:
        for i in range(1, len(w) + 1):
            prefixes.add(w[:i])
    nodes = sorted(prefixes, key=lambda p: (len(p), p))
    fail = {(): ()}
    order = sorted(nodes, key=len)
    for node in order:
        if not node:
            continue
        if len(node) == 1:
            fail[node] = ()
            continue
        cur = fail[node[:-1]]
        while True:
            cand = cur + (node[-1],)
            if cand in prefixes:
                fail[node] = cand
                break
            if not cur:
                fail[node] = ()
                break
            cur = fail[cur]
    dead = set()
    for node in order:
        if node in forbidden or fail[node] in dead:
            dead.add(node)

    def goto(node, symbol):
        cur = node
        while True:
            cand = cur + (symbol,)
            if cand in prefixes:
                return cand
            if not cur:
                return ()
            cur = fail[cur]

    live = [n for n in nodes if n not in dead]
    name = {n: "n%d" % i for i, n in enumerate(live)}
    edges = []
    for node in live:
        for symbol in alphabet:
            tgt = goto(node, symbol)
            if tgt in dead:
                continue
            edges.append((name[node], name[tgt], symbol))
    return trim(make_graph(name.values(), edges))


def higher_block_graph(g, n):
    """Presentation of the n-block recoding: states are (n-1)-edge paths,
    labels are the length-n label windows joined with '.'."""
    if n == 1:
        return g
    out = g.out_map()
    paths = [((s,), ()) for s in g.states]
    for _ in range(n - 1):
        grown = []
        for states_seq, labels_seq in paths:
            last = states_seq[-1]
            for label, dst in out[last]:
                grown.append((states_seq + (dst,), labels_seq + (label,)))
        paths = grown
    name = {p: "p%d" % i for i, p in enumerate(sorted(paths))}
    edges = []
    for states_seq, labels_seq in paths:
        last = states_seq[-1]
        for label, dst in out[last]:
            nxt = (states_seq[1:] + (dst,), labels_seq[1:] + (label,))
            window = ".".join(labels_seq + (label,))
            edges.append((name[(states_seq, labels_seq)], name[nxt], window))
    return trim(make_graph(name.values(), edges))
