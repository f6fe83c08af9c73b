"""Multi-step robust partial parsing.

Step 1 builds a chart bottom-up and extracts, for every anchor position,
the maximal grammatical structures starting there (local analysis).  Step 2
collects scored domain concepts from concept-level structures.  Step 3
selects the maximum-score mutually compatible concept subset.  Step 4
assembles the case frame.  The pipeline is total: out-of-vocabulary tokens
simply break spans and analysis proceeds around them.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .grammar import Production, SemanticGrammar
from .lexicon import Lexicon
from .values import ValueError_, parse_date_tokens, parse_time_tokens

log = logging.getLogger(__name__)

EXACT_SEARCH_LIMIT = 20
_SCORE_SLACK = 1e-9

CITY_KINDS = ("departure-city", "arrival-city", "unanchored-city", "correction")
MARKER_KINDS = ("negation", "confirmation", "correction")


@dataclass(frozen=True)
class Concept:
    kind: str
    value: object
    span: tuple[int, int]
    score: float


def _canonical_key(c: Concept) -> tuple:
    return (c.span[0], c.span[1], c.kind, repr(c.value))


@dataclass
class DerivNode:
    nt: str
    production: Production
    span: tuple[int, int]
    children: tuple  # DerivNode for non-terminals, token index for terminals


@dataclass
class LocalAnalysis:
    tokens: tuple[str, ...]
    # (non-terminal, anchor) -> maximal derivation starting at that anchor
    items: dict[tuple[str, int], DerivNode]
    # per token: non-terminals (with spans) on root paths of trees covering it
    per_token: tuple[frozenset, ...]


@dataclass
class ResolutionResult:
    concepts: tuple[Concept, ...]
    exact: bool


@dataclass
class CaseFrame:
    slots: dict[str, object]
    speech_act: str  # inform | confirm | deny | correct | empty
    residue: tuple[tuple[int, int], ...]
    concepts: tuple[Concept, ...] = ()

    def slot_view(self) -> dict[str, str]:
        return {k: render_value(v) for k, v in sorted(self.slots.items())}


def render_value(value) -> str:
    if hasattr(value, "render"):
        return value.render()
    return str(value)


def _build_chart(tokens: list[str], grammar: SemanticGrammar,
                 lexicon: Lexicon) -> dict[tuple[str, int, int], DerivNode]:
    n = len(tokens)
    classes = [lexicon.class_id_of(t) for t in tokens]
    chart: dict[tuple[str, int, int], DerivNode] = {}

    def match(prod: Production, i: int, j: int) -> tuple | None:
        """First (leftmost, shortest-NT-first) assignment of rhs over [i, j)."""

        def step(idx: int, pos: int) -> list | None:
            if idx == len(prod.rhs):
                return [] if pos == j else None
            sym = prod.rhs[idx]
            if sym.kind == "literal":
                if pos < j and tokens[pos] == sym.name:
                    rest = step(idx + 1, pos + 1)
                    if rest is not None:
                        return [pos] + rest
                return None
            if sym.kind == "class":
                if pos < j and classes[pos] == sym.name:
                    rest = step(idx + 1, pos + 1)
                    if rest is not None:
                        return [pos] + rest
                return None
            for end in range(pos + 1, j + 1):
                child = chart.get((sym.name, pos, end))
                if child is not None:
                    rest = step(idx + 1, end)
                    if rest is not None:
                        return [child] + rest
            return None

        children = step(0, i)
        return tuple(children) if children is not None else None

    for length in range(1, n + 1):
        for i in range(0, n - length + 1):
            j = i + length
            changed = True
            while changed:  # settle unit chains within the cell
                changed = False
                for nt, prods in grammar.productions.items():
                    if (nt, i, j) in chart:
                        continue
                    for prod in prods:
                        children = match(prod, i, j)
                        if children is not None:
                            chart[(nt, i, j)] = DerivNode(nt, prod, (i, j), children)
                            changed = True
                            break
    return chart


def local_analysis(tokens: list[str], grammar: SemanticGrammar,
                   lexicon: Lexicon) -> LocalAnalysis:
    chart = _build_chart(tokens, grammar, lexicon)
    best: dict[tuple[str, int], DerivNode] = {}
    for (nt, i, j), node in chart.items():
        key = (nt, i)
        cur = best.get(key)
        if cur is None or j > cur.span[1]:
            best[key] = node
    per_token: list[set] = [set() for _ in tokens]

    def walk(node: DerivNode) -> None:
        for t in range(node.span[0], node.span[1]):
            per_token[t].add((node.nt, node.span))
        for child in node.children:
            if isinstance(child, DerivNode):
                walk(child)

    for node in best.values():
        walk(node)
    return LocalAnalysis(tokens=tuple(tokens), items=best,
                         per_token=tuple(frozenset(s) for s in per_token))


def _node_yield(node: DerivNode, tokens: tuple[str, ...]) -> list[str]:
    return list(tokens[node.span[0]:node.span[1]])


def _node_has_literal(node: DerivNode) -> bool:
    for sym, child in zip(node.production.rhs, node.children):
        if sym.kind == "literal":
            return True
        if isinstance(child, DerivNode) and _node_has_literal(child):
            return True
    return False


def _normalize_value(kind: str, words: list[str], lexicon: Lexicon):
    if kind in CITY_KINDS:
        cities = [w for w in words
                  if (cls := lexicon.class_of(w)) and cls.semantic_tag == "city"]
        if len(cities) != 1:
            raise ValueError_(f"expected one city word in {words!r}")
        return cities[0]
    if kind == "date":
        return parse_date_tokens(words)
    if kind == "time":
        return parse_time_tokens(words)
    if kind == "confirmation":
        return True
    if kind == "negation":
        return False
    raise ValueError_(f"no normalizer for concept kind {kind!r}")


def collect_concepts(analysis: LocalAnalysis, grammar: SemanticGrammar,
                     lexicon: Lexicon) -> tuple[Concept, ...]:
    merged: dict[tuple, Concept] = {}
    for (nt, _anchor), node in sorted(analysis.items.items()):
        decl = grammar.concepts.get(nt)
        if decl is None:
            continue
        if decl.value_index is not None:
            target = node.children[decl.value_index - 1]
            if isinstance(target, DerivNode):
                words = _node_yield(target, analysis.tokens)
            else:
                words = [analysis.tokens[target]]
        else:
            words = _node_yield(node, analysis.tokens)
        try:
            value = _normalize_value(decl.kind, words, lexicon)
        except ValueError_ as exc:
            log.debug("discarding %s concept at %s: %s", decl.kind, node.span, exc)
            continue
        if decl.bare:
            marker = 0.0
        elif _node_has_literal(node) or not grammar.literal_possible[nt]:
            marker = 1.0
        else:
            marker = 0.0
        span_len = node.span[1] - node.span[0]
        content = span_len / grammar.max_production_yield(node.production)
        concept = Concept(kind=decl.kind, value=value, span=node.span,
                          score=0.5 * marker + 0.5 * content)
        key = (decl.kind, repr(value), node.span)
        cur = merged.get(key)
        if cur is None or concept.score > cur.score:
            merged[key] = concept
    return tuple(sorted(merged.values(), key=_canonical_key))


def compatible(a: Concept, b: Concept) -> bool:
    disjoint = a.span[1] <= b.span[0] or b.span[1] <= a.span[0]
    return disjoint and a.kind != b.kind


def resolve_conflicts(concepts) -> ResolutionResult:
    """Maximum-total-score pairwise-compatible subset.

    Exact depth-first search up to EXACT_SEARCH_LIMIT concepts, greedy by
    score above it.  Ties on total score resolve to the canonically
    smallest subset.
    """
    items = sorted(concepts, key=_canonical_key)
    if not items:
        return ResolutionResult(concepts=(), exact=True)
    if len(items) > EXACT_SEARCH_LIMIT:
        chosen: list[Concept] = []
        for c in sorted(items, key=lambda c: (-c.score, _canonical_key(c))):
            if all(compatible(c, p) for p in chosen):
                chosen.append(c)
        return ResolutionResult(
            concepts=tuple(sorted(chosen, key=_canonical_key)), exact=False)

    n = len(items)
    suffix = [0.0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1] + items[i].score
    best_total = -1.0
    best_key: tuple | None = None
    best_subset: tuple[Concept, ...] = ()

    def dfs(i: int, chosen: list[Concept], total: float) -> None:
        nonlocal best_total, best_key, best_subset
        if total + suffix[i] + _SCORE_SLACK < best_total:
            return
        if i == n:
            key = tuple(_canonical_key(c) for c in chosen)
            if total > best_total or (total == best_total
                                      and (best_key is None or key < best_key)):
                best_total, best_key, best_subset = total, key, tuple(chosen)
            return
        cand = items[i]
        if all(compatible(cand, p) for p in chosen):
            chosen.append(cand)
            dfs(i + 1, chosen, total + cand.score)
            chosen.pop()
        dfs(i + 1, chosen, total)

    dfs(0, [], 0.0)
    return ResolutionResult(concepts=best_subset, exact=True)


def build_case_frame(concepts, tokens: list[str]) -> CaseFrame:
    slots: dict[str, object] = {}
    kinds = set()
    for c in concepts:
        kinds.add(c.kind)
        if c.kind not in MARKER_KINDS:
            slots[c.kind] = c.value
    if "correction" in kinds:
        act = "correct"
    elif "negation" in kinds:
        act = "deny"
    elif "confirmation" in kinds:
        act = "confirm"
    elif slots:
        act = "inform"
    else:
        act = "empty"
    covered = [False] * len(tokens)
    for c in concepts:
        for t in range(c.span[0], c.span[1]):
            covered[t] = True
    residue: list[tuple[int, int]] = []
    start = None
    for t, flag in enumerate(covered + [True]):
        if not flag and start is None:
            start = t
        elif flag and start is not None:
            residue.append((start, t))
            start = None
    return CaseFrame(slots=slots, speech_act=act, residue=tuple(residue),
                     concepts=tuple(concepts))


@dataclass
class ParseResult:
    analysis: LocalAnalysis
    concepts: tuple[Concept, ...]
    resolution: ResolutionResult
    frame: CaseFrame


def parse_utterance(tokens: list[str], grammar: SemanticGrammar,
                    lexicon: Lexicon) -> ParseResult:
    analysis = local_analysis(tokens, grammar, lexicon)
    concepts = collect_concepts(analysis, grammar, lexicon)
    resolution = resolve_conflicts(concepts)
    frame = build_case_frame(resolution.concepts, list(tokens))
    return ParseResult(analysis=analysis, concepts=concepts,
                       resolution=resolution, frame=frame)
