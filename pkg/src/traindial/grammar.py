"""Semantic grammar: context-free productions whose non-terminals carry
domain meaning, plus concept declarations mapping non-terminals to scored
domain concepts.

File format, one declaration per line (``#`` starts a comment):

    NT -> sym sym ...            production; symbols are non-terminals,
                                 @class_id terminals, or "literal" words
    concept NT : kind            concept-level non-terminal of the given kind
    concept NT : kind bare       bare concepts carry no case marker and are
                                 scored accordingly
    concept NT : kind { value <- $2 }
                                 extract the value from the 2nd right-hand
                                 side constituent instead of the full yield

Grammars must be non-recursive so every non-terminal has a finite maximal
yield, which the concept score formula depends on.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

_CONCEPT_RE = re.compile(
    r"^concept\s+(\w+)\s*:\s*([\w-]+)(\s+bare)?"
    r"(?:\s*\{\s*value\s*<-\s*\$(\d+)\s*\})?\s*$")
_LITERAL_RE = re.compile(r'^"([^"\s]+)"$')
_CLASS_RE = re.compile(r"^@([\w<>-]+)$")
_NT_RE = re.compile(r"^\w+$")


class GrammarError(Exception):
    """Raised on DSL syntax errors and structural validation failures."""


@dataclass(frozen=True)
class Symbol:
    kind: str  # "nt" | "class" | "literal"
    name: str


@dataclass(frozen=True)
class Production:
    lhs: str
    rhs: tuple[Symbol, ...]
    line: int


@dataclass(frozen=True)
class ConceptDecl:
    nt: str
    kind: str
    bare: bool
    value_index: int | None  # 1-based RHS constituent; None = full yield
    line: int


@dataclass
class SemanticGrammar:
    productions: dict[str, tuple[Production, ...]]
    concepts: dict[str, ConceptDecl]
    max_yield: dict[str, int] = field(default_factory=dict)          # per NT
    production_yield: dict[int, int] = field(default_factory=dict)   # id(prod) keyed
    literal_possible: dict[str, bool] = field(default_factory=dict)  # per NT

    def max_production_yield(self, prod: Production) -> int:
        return self.production_yield[id(prod)]


def _parse_symbol(token: str, line: int) -> Symbol:
    m = _LITERAL_RE.match(token)
    if m:
        return Symbol("literal", m.group(1).lower())
    m = _CLASS_RE.match(token)
    if m:
        return Symbol("class", m.group(1))
    if _NT_RE.match(token):
        return Symbol("nt", token)
    raise GrammarError(f"line {line}: unparseable symbol {token!r}")


def load_grammar(path) -> SemanticGrammar:
    productions: dict[str, list[Production]] = {}
    concepts: dict[str, ConceptDecl] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("concept"):
                m = _CONCEPT_RE.match(line)
                if not m:
                    raise GrammarError(f"line {lineno}: malformed concept declaration")
                nt, kind, bare, idx = m.groups()
                if nt in concepts:
                    raise GrammarError(f"line {lineno}: duplicate concept for {nt!r}")
                concepts[nt] = ConceptDecl(
                    nt=nt, kind=kind, bare=bare is not None,
                    value_index=int(idx) if idx else None, line=lineno)
                continue
            if "->" not in line:
                raise GrammarError(f"line {lineno}: expected a production or "
                                   f"concept declaration")
            lhs, _, rhs_text = line.partition("->")
            lhs = lhs.strip()
            if not _NT_RE.match(lhs):
                raise GrammarError(f"line {lineno}: bad non-terminal name {lhs!r}")
            rhs = tuple(_parse_symbol(tok, lineno) for tok in rhs_text.split())
            if not rhs:
                raise GrammarError(f"line {lineno}: empty right-hand side")
            productions.setdefault(lhs, []).append(Production(lhs, rhs, lineno))

    grammar = SemanticGrammar(
        productions={nt: tuple(ps) for nt, ps in productions.items()},
        concepts=concepts)
    _validate(grammar)
    _compute_yields(grammar)
    _compute_literal_reach(grammar)
    return grammar


def _validate(grammar: SemanticGrammar) -> None:
    if not grammar.concepts:
        raise GrammarError("grammar declares no concept-level symbols")
    for nt, decl in grammar.concepts.items():
        if nt not in grammar.productions:
            raise GrammarError(f"line {decl.line}: concept symbol {nt!r} has "
                               f"no productions")
    for nt, prods in grammar.productions.items():
        for prod in prods:
            for sym in prod.rhs:
                if sym.kind == "nt" and sym.name not in grammar.productions:
                    raise GrammarError(f"line {prod.line}: undefined "
                                       f"non-terminal {sym.name!r}")
    # concept value indices must be valid for every production of the symbol
    for nt, decl in grammar.concepts.items():
        if decl.value_index is None:
            continue
        for prod in grammar.productions[nt]:
            if decl.value_index < 1 or decl.value_index > len(prod.rhs):
                raise GrammarError(
                    f"line {decl.line}: value index ${decl.value_index} exceeds "
                    f"the production at line {prod.line}")
    _check_unit_cycles(grammar)
    _check_recursion(grammar)
    _check_reachability(grammar)


def _check_unit_cycles(grammar: SemanticGrammar) -> None:
    unit_edges: dict[str, set[str]] = {}
    for nt, prods in grammar.productions.items():
        for prod in prods:
            if len(prod.rhs) == 1 and prod.rhs[0].kind == "nt":
                unit_edges.setdefault(nt, set()).add(prod.rhs[0].name)
    for start in unit_edges:
        stack, seen = [start], set()
        while stack:
            node = stack.pop()
            for succ in unit_edges.get(node, ()):
                if succ == start:
                    raise GrammarError(f"cyclic unit-production chain through "
                                       f"{start!r}")
                if succ not in seen:
                    seen.add(succ)
                    stack.append(succ)


def _check_recursion(grammar: SemanticGrammar) -> None:
    WHITE, GREY, BLACK = 0, 1, 2
    color = {nt: WHITE for nt in grammar.productions}

    def visit(nt: str) -> None:
        color[nt] = GREY
        for prod in grammar.productions[nt]:
            for sym in prod.rhs:
                if sym.kind != "nt":
                    continue
                if color[sym.name] == GREY:
                    raise GrammarError(f"recursive non-terminal {sym.name!r}: "
                                       f"maximal yields must be finite")
                if color[sym.name] == WHITE:
                    visit(sym.name)
        color[nt] = BLACK

    for nt in grammar.productions:
        if color[nt] == WHITE:
            visit(nt)


def _check_reachability(grammar: SemanticGrammar) -> None:
    reached: set[str] = set()
    stack = list(grammar.concepts)
    while stack:
        nt = stack.pop()
        if nt in reached:
            continue
        reached.add(nt)
        for prod in grammar.productions[nt]:
            for sym in prod.rhs:
                if sym.kind == "nt":
                    stack.append(sym.name)
    orphans = sorted(set(grammar.productions) - reached)
    if orphans:
        raise GrammarError(f"non-terminals unreachable from any concept "
                           f"symbol: {', '.join(orphans)}")


def _compute_yields(grammar: SemanticGrammar) -> None:
    def nt_yield(nt: str) -> int:
        cached = grammar.max_yield.get(nt)
        if cached is not None:
            return cached
        best = 0
        for prod in grammar.productions[nt]:
            total = prod_yield(prod)
            best = max(best, total)
        grammar.max_yield[nt] = best
        return best

    def prod_yield(prod: Production) -> int:
        cached = grammar.production_yield.get(id(prod))
        if cached is not None:
            return cached
        total = 0
        for sym in prod.rhs:
            total += nt_yield(sym.name) if sym.kind == "nt" else 1
        grammar.production_yield[id(prod)] = total
        return total

    for nt in grammar.productions:
        nt_yield(nt)


def _compute_literal_reach(grammar: SemanticGrammar) -> None:
    def possible(nt: str) -> bool:
        cached = grammar.literal_possible.get(nt)
        if cached is not None:
            return cached
        grammar.literal_possible[nt] = False  # non-recursive, safe placeholder
        result = False
        for prod in grammar.productions[nt]:
            for sym in prod.rhs:
                if sym.kind == "literal" or (sym.kind == "nt" and possible(sym.name)):
                    result = True
        grammar.literal_possible[nt] = result
        return result

    for nt in grammar.productions:
        possible(nt)
