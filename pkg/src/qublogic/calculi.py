"""Hilbert calculi: side-condition oracles, schema matching, proof checking.

Axiom schemas are stored as patterns with metavariables and matched against
desugared formulas; side conditions (classical provability, BD validity)
are discharged by the exact oracles.  Derivations may use coarse
"outer-logic" steps the way research papers do; those are verified by a
sound order-fact engine over the modal atoms, with the exact grid decision
as a fallback for small steps.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from . import bd, decide, qp, syntax
from .syntax import Formula, LanguageError, desugar, mk, parse, print_formula, vars_of

CALCULI = ("HBIG", "HG2ORD", "HG2NEL", "HQG", "HQPG", "HQPG_TOP",
           "HQP", "HMCB", "HNMCB", "RFDE")

CALC_LANG = {
    "HBIG": "BIG", "HG2ORD": "G2ORD", "HG2NEL": "G2NEL",
    "HQG": "QG", "HQPG": "QG", "HQPG_TOP": "QG",
    "HQP": "QP", "HMCB": "MCB", "HNMCB": "NMCB", "RFDE": "BD",
}

_IMP_KIND = {
    "HBIG": "gimp", "HQG": "gimp", "HQPG": "gimp", "HQPG_TOP": "gimp",
    "HG2ORD": "gimp", "HMCB": "gimp",
    "HG2NEL": "nimp", "HNMCB": "nimp",
    "HQP": "matimp",
}

MAX_KPS_M = 4
MAX_CPL_VARS = 20


# ---------------------------------------------------------------------------
# Classical and BD oracles
# ---------------------------------------------------------------------------

def truth_table(f: Formula, names: Sequence[str]) -> int:
    """Truth table of a CPL formula as a bitmask over assignments to names.

    Bit a is set iff the assignment making names[i] true exactly when
    ``a >> i & 1`` satisfies the formula.
    """
    k = len(names)
    if k > MAX_CPL_VARS:
        raise ValueError(f"too many variables (> {MAX_CPL_VARS})")
    full = (1 << (1 << k)) - 1
    index = {p: i for i, p in enumerate(names)}
    pattern = [sum(1 << a for a in range(1 << k) if a >> i & 1) for i in range(k)]

    def rec(g: Formula) -> int:
        kind = g.kind
        if kind == "var":
            try:
                return pattern[index[g.var]]
            except KeyError:
                raise KeyError(f"variable {g.var!r} not among {names}") from None
        if kind == "top":
            return full
        if kind == "bot":
            return 0
        if kind == "not":
            return full & ~rec(g.children[0])
        a = rec(g.children[0])
        b = rec(g.children[1])
        if kind == "and":
            return a & b
        if kind == "or":
            return a | b
        if kind == "matimp":
            return (full & ~a) | b
        if kind == "iff":
            return full & ~(a ^ b)
        raise ValueError(f"kind {kind!r} is not classical")

    return rec(f)


def cpl_valid(f: Formula) -> bool:
    """Classical validity by truth table (at most 20 variables)."""
    names = sorted(vars_of(f))
    return truth_table(f, names) == (1 << (1 << len(names))) - 1


def qp_tautology(f: Formula) -> bool:
    """Propositional tautology over QP formulas, comparisons abstracted."""
    atoms: dict[Formula, str] = {}

    def abstract(g: Formula) -> Formula:
        if g.kind == "leq":
            name = atoms.setdefault(g, f"qcmpatom{len(atoms)}")
            return mk("CPL", "var", var=name)
        if g.kind == "var":
            return mk("CPL", "var", var=g.var)
        return mk("CPL", g.kind, *(abstract(c) for c in g.children))

    return cpl_valid(abstract(desugar(f)))


def bd_valid_sequent(phi: Formula, chi: Formula) -> bool:
    return bd.bd_entails(phi, chi)[0]


# ---------------------------------------------------------------------------
# Patterns and matching
# ---------------------------------------------------------------------------

_META_PREFIX = "mv_"


def _meta(lang: str, name: str) -> Formula:
    return Formula(lang, "var", (), _META_PREFIX + name)


def _match(pattern: Formula, cand: Formula, binding: dict[str, Formula]) -> bool:
    if pattern.kind == "var" and pattern.var.startswith(_META_PREFIX):
        if cand.lang != pattern.lang:
            return False
        seen = binding.get(pattern.var)
        if seen is not None:
            return seen == cand
        binding[pattern.var] = cand
        return True
    if pattern.kind != cand.kind or pattern.lang != cand.lang:
        return False
    if pattern.kind == "var":
        return pattern.var == cand.var
    if len(pattern.children) != len(cand.children):
        return False
    return all(_match(p, c, binding) for p, c in zip(pattern.children, cand.children))


@dataclass(frozen=True)
class Schema:
    name: str
    pattern: Formula  # desugared, used for matching
    side: Callable[[Mapping[str, Formula]], bool] | None = None
    sugared: Formula | None = None  # surface form, used for instantiation


def _schemas_bi_goedel(lang: str, imp: str, coimp: str) -> list[Schema]:
    a, b, c = (_meta(lang, n) for n in "abc")

    def I(x, y):
        return mk(lang, imp, x, y)

    def CO(x, y):
        return mk(lang, coimp, x, y)

    def AND(x, y):
        return mk(lang, "and", x, y)

    def OR(x, y):
        return mk(lang, "or", x, y)

    def SN(x):
        return mk(lang, "snot", x)

    top = mk(lang, "top")
    raw = [
        ("biG1", I(I(a, b), I(I(b, c), I(a, c)))),
        ("biG2a", I(a, OR(a, b))),
        ("biG2b", I(b, OR(a, b))),
        ("biG3", I(I(a, c), I(I(b, c), I(OR(a, b), c)))),
        ("biG4a", I(AND(a, b), a)),
        ("biG4b", I(AND(a, b), b)),
        ("biG5", I(I(a, b), I(I(a, c), I(a, AND(b, c))))),
        ("biG6a", I(I(a, I(b, c)), I(AND(a, b), c))),
        ("biG6b", I(I(AND(a, b), c), I(a, I(b, c)))),
        ("biG7", I(I(a, b), I(SN(b), SN(a)))),
        ("biG8a", I(CO(a, b), CO(top, I(a, b)))),
        ("biG8b", I(SN(CO(a, b)), I(a, b))),
        ("biG9a", I(a, OR(b, CO(a, b)))),
        ("biG9b", I(CO(CO(a, b), c), CO(a, OR(b, c)))),
        ("prel1", OR(I(a, b), I(b, a))),
        ("prel2", CO(top, AND(CO(a, b), CO(b, a)))),
    ]
    return [Schema(n, desugar(p), None, p) for n, p in raw]


def _schemas_de_morgan(lang: str, imp: str, coimp: str, nelson: bool) -> list[Schema]:
    a, b = _meta(lang, "a"), _meta(lang, "b")

    def N(x):
        return mk(lang, "dneg", x)

    def IFF(x, y):
        return mk(lang, "iff", x, y)

    raw = [
        ("neg", IFF(N(N(a)), a)),
        ("dem_and", IFF(N(mk(lang, "and", a, b)), mk(lang, "or", N(a), N(b)))),
        ("dem_or", IFF(N(mk(lang, "or", a, b)), mk(lang, "and", N(a), N(b)))),
    ]
    if nelson:
        raw += [
            ("dem_imp", IFF(N(mk(lang, imp, a, b)), mk(lang, "and", a, N(b)))),
            ("dem_coimp", IFF(N(mk(lang, coimp, a, b)), mk(lang, "or", N(a), b))),
        ]
    else:
        raw += [
            ("dem_imp", IFF(N(mk(lang, imp, a, b)), mk(lang, coimp, N(b), N(a)))),
            ("dem_coimp", IFF(N(mk(lang, coimp, a, b)), mk(lang, imp, N(b), N(a)))),
        ]
    return [Schema(n, desugar(p), None, p) for n, p in raw]


def _schemas_qg(calc: str) -> list[Schema]:
    phi, chi = _meta("CPL", "phi"), _meta("CPL", "chi")
    bphi = mk("QG", "bmod", phi)
    bchi = mk("QG", "bmod", chi)
    out = _schemas_bi_goedel("QG", "gimp", "gcoimp")
    nontriv = mk("QG", "snot", mk("QG", "delta", mk("QG", "gimp", bphi, bchi)))
    out.append(Schema(
        "nontriv", desugar(nontriv),
        lambda b: cpl_valid(b["phi"]) and cpl_valid(mk("CPL", "not", b["chi"])),
        nontriv,
    ))
    reg = mk("QG", "gimp", bphi, bchi)
    out.append(Schema(
        "reg", desugar(reg),
        lambda b: cpl_valid(mk("CPL", "matimp", b["phi"], b["chi"])),
        reg,
    ))
    if calc == "HQPG_TOP":
        out.append(Schema("cap1", desugar(bphi), lambda b: cpl_valid(b["phi"]), bphi))
        snot_bphi = mk("QG", "snot", bphi)
        out.append(Schema(
            "cap2", desugar(snot_bphi),
            lambda b: cpl_valid(mk("CPL", "not", b["phi"])),
            snot_bphi,
        ))
    return out


def _schemas_qp() -> list[Schema]:
    a, b, c, d = (_meta("QP", n) for n in "abcd")
    top = mk("QP", "top")
    raw = [
        ("A0", mk("QP", "matimp",
                  mk("QP", "and",
                     mk("QP", "approx", mk("QP", "iff", a, b), top),
                     mk("QP", "approx", mk("QP", "iff", c, d), top)),
                  mk("QP", "iff", mk("QP", "leq", a, c), mk("QP", "leq", b, d)))),
        ("A1", mk("QP", "leq", mk("QP", "bot"), a)),
        ("A2", mk("QP", "or", mk("QP", "leq", a, b), mk("QP", "leq", b, a))),
        ("A3", mk("QP", "less", mk("QP", "bot"), top)),
    ]
    return [Schema(n, desugar(p), None, p) for n, p in raw]


def _schemas_layer(calc: str) -> list[Schema]:
    lang = CALC_LANG[calc]
    nelson = calc == "HNMCB"
    imp, coimp = ("nimp", "ncoimp") if nelson else ("gimp", "gcoimp")
    phi, chi = _meta("BD", "phi"), _meta("BD", "chi")
    cphi = mk(lang, "cmod", phi)
    cchi = mk(lang, "cmod", chi)
    out = _schemas_bi_goedel(lang, imp, coimp)
    out += _schemas_de_morgan(lang, imp, coimp, nelson)
    bd_side = lambda b: bd_valid_sequent(b["phi"], b["chi"])
    if nelson:
        bd_ax = mk(lang, "simp", cphi, cchi)
        neg_ax = mk(lang, "siff", mk(lang, "cmod", mk("BD", "dneg", phi)),
                    mk(lang, "dneg", cphi))
        out.append(Schema("nmcb_bd", desugar(bd_ax), bd_side, bd_ax))
        out.append(Schema("nmcb_neg", desugar(neg_ax), None, neg_ax))
    else:
        bd_ax = mk(lang, "gimp", cphi, cchi)
        neg_ax = mk(lang, "iff", mk(lang, "cmod", mk("BD", "dneg", phi)),
                    mk(lang, "dneg", cphi))
        out.append(Schema("mcb_bd", desugar(bd_ax), bd_side, bd_ax))
        out.append(Schema("mcb_neg", desugar(neg_ax), None, neg_ax))
    return out


_SCHEMA_CACHE: dict[str, list[Schema]] = {}


def schema_table(calc: str) -> list[Schema]:
    if calc not in CALCULI:
        raise ValueError(f"unknown calculus {calc!r}")
    if calc not in _SCHEMA_CACHE:
        if calc == "HBIG":
            table = _schemas_bi_goedel("BIG", "gimp", "gcoimp")
        elif calc == "HG2ORD":
            table = _schemas_bi_goedel("G2ORD", "gimp", "gcoimp") \
                + _schemas_de_morgan("G2ORD", "gimp", "gcoimp", False)
        elif calc == "HG2NEL":
            table = _schemas_bi_goedel("G2NEL", "nimp", "ncoimp") \
                + _schemas_de_morgan("G2NEL", "nimp", "ncoimp", True)
        elif calc in ("HQG", "HQPG", "HQPG_TOP"):
            table = _schemas_qg(calc)
        elif calc == "HQP":
            table = _schemas_qp()
        elif calc in ("HMCB", "HNMCB"):
            table = _schemas_layer(calc)
        else:
            table = []
        _SCHEMA_CACHE[calc] = table
    return _SCHEMA_CACHE[calc]


def _flatten_and(f: Formula) -> list[Formula]:
    """Left-associated conjunction chain as a list."""
    parts: list[Formula] = []
    while f.kind == "and":
        parts.append(f.children[1])
        f = f.children[0]
    parts.append(f)
    parts.reverse()
    return parts


def _match_kps(f: Formula) -> tuple[str, dict] | None:
    """Recognize canonical KPS_m instances for m <= MAX_KPS_M."""
    if f.kind != "gimp":
        return None
    concl = f.children[1]
    if not (concl.kind == "delta" and concl.children[0].kind == "gimp"
            and all(c.kind == "bmod" for c in concl.children[0].children)):
        return None
    parts = _flatten_and(f.children[0])
    m = len(parts) - 1
    if m > MAX_KPS_M or m < 0:
        return None
    phis: list[Formula] = []
    chis: list[Formula] = []
    for part in parts[1:]:
        if not (part.kind == "delta" and part.children[0].kind == "gimp"
                and all(c.kind == "bmod" for c in part.children[0].children)):
            return None
        phis.append(part.children[0].children[0].children[0])
        chis.append(part.children[0].children[1].children[0])
    chis.append(concl.children[0].children[0].children[0])
    phis.append(concl.children[0].children[1].children[0])
    try:
        rebuilt = qp.kps_instance(m, phis, chis)
    except (ValueError, LanguageError):
        return None
    if rebuilt == f:
        return "KPS", {"m": m, "phis": phis, "chis": chis}
    return None


def _match_a4(f: Formula) -> tuple[str, dict] | None:
    if f.kind != "matimp" or f.children[1].kind != "leq":
        return None
    concl = f.children[1]
    parts = _flatten_and(f.children[0])
    m = len(parts)
    if m > MAX_KPS_M + 1:
        return None
    phis: list[Formula] = []
    psis: list[Formula] = []
    for part in parts[1:]:
        if part.kind != "leq":
            return None
        phis.append(part.children[0])
        psis.append(part.children[1])
    psis.append(concl.children[0])
    phis.append(concl.children[1])
    try:
        rebuilt = qp.a4_instance(m, phis, psis)
    except (ValueError, LanguageError):
        return None
    if rebuilt == f:
        return "A4", {"m": m, "phis": phis, "psis": psis}
    return None


def match_axiom(calc: str, f: Formula) -> tuple[str, dict] | None:
    """Identify ``f`` as an axiom instance of the calculus, if it is one.

    Returns the schema name and the matching substitution.  KPS and A4
    instances are recognized in their canonical generated shape for
    m <= 4 only; PC (for the QP calculus) matches any propositional
    tautology over comparison-abstracted atoms.
    """
    if calc not in CALCULI:
        raise ValueError(f"unknown calculus {calc!r}")
    lang = CALC_LANG[calc]
    if f.lang != lang:
        raise LanguageError(f"{calc} checks {lang} formulas, got {f.lang}")
    if calc == "RFDE":
        return None
    cand = desugar(f)
    for schema in schema_table(calc):
        binding: dict[str, Formula] = {}
        if _match(schema.pattern, cand, binding):
            clean = {k[len(_META_PREFIX):]: v for k, v in binding.items()}
            if schema.side is None or schema.side(clean):
                return schema.name, clean
    if calc in ("HQPG", "HQPG_TOP"):
        hit = _match_kps(f)
        if hit:
            return hit
    if calc == "HQP":
        hit = _match_a4(f)
        if hit:
            return hit
        if qp_tautology(f):
            return "PC", {}
    return None


# ---------------------------------------------------------------------------
# Order-fact engine for outer-logic steps (QG family and plain biG)
# ---------------------------------------------------------------------------

class _Facts:
    """Sound consequences about atom values: order, zero/one, strictness."""

    def __init__(self, n: int):
        self.n = n
        self.le: set[tuple[int, int]] = {(i, i) for i in range(n)}
        self.lt: set[tuple[int, int]] = set()
        self.one: set[int] = set()
        self.zero: set[int] = set()
        self.notone: set[int] = set()
        self.notzero: set[int] = set()
        self.contradiction = False

    def add(self, facts: Iterable[tuple]) -> None:
        for fact in facts:
            kind = fact[0]
            if kind == "contradiction":
                self.contradiction = True
            elif kind == "le":
                self.le.add((fact[1], fact[2]))
            elif kind == "lt":
                self.lt.add((fact[1], fact[2]))
            elif kind == "one":
                self.one.add(fact[1])
            elif kind == "zero":
                self.zero.add(fact[1])
            elif kind == "notone":
                self.notone.add(fact[1])
            elif kind == "notzero":
                self.notzero.add(fact[1])
        self.close()

    def close(self) -> None:
        changed = True
        while changed:
            changed = False
            for a in self.one:
                for x in range(self.n):
                    if (x, a) not in self.le:
                        self.le.add((x, a))
                        changed = True
            for a in self.zero:
                for x in range(self.n):
                    if (a, x) not in self.le:
                        self.le.add((a, x))
                        changed = True
            for (a, b) in list(self.le):
                for (c, d) in list(self.le):
                    if b == c and (a, d) not in self.le:
                        self.le.add((a, d))
                        changed = True
                for (c, d) in list(self.lt):
                    if b == c and (a, d) not in self.lt:
                        self.lt.add((a, d))
                        changed = True
                    if d == a and (c, b) not in self.lt:
                        self.lt.add((c, b))
                        changed = True
                if a in self.one and b not in self.one:
                    self.one.add(b)
                    changed = True
                if b in self.zero and a not in self.zero:
                    self.zero.add(a)
                    changed = True
            for (a, b) in list(self.lt):
                if (a, b) not in self.le:
                    self.le.add((a, b))
                    changed = True
                if b not in self.notzero:
                    self.notzero.add(b)
                    changed = True
                if a not in self.notone:
                    self.notone.add(a)
                    changed = True
            for a in self.one:
                if a not in self.notzero:
                    self.notzero.add(a)
                    changed = True
            for a in self.zero:
                if a not in self.notone:
                    self.notone.add(a)
                    changed = True
            if not self.contradiction:
                if any((a, a) in self.lt for a in range(self.n)) \
                        or self.one & self.notone or self.zero & self.notzero:
                    self.contradiction = True
                    changed = True

    def eq(self, a: int, b: int) -> bool:
        return (a, b) in self.le and (b, a) in self.le


class _OuterEngine:
    """Verify one outer-logic step of a QG-family (or biG) derivation."""

    def __init__(self, calc: str, premises: Sequence[Formula], target: Formula):
        self.calc = calc
        self.with_cap = calc == "HQPG_TOP"
        if CALC_LANG[calc] == "QG":
            atoms, mapping, reps = decide.qg_merge_atoms([*premises, target])
            self.premises = [decide._rewrite_atoms(g, mapping) for g in premises]
            self.target = decide._rewrite_atoms(target, mapping)
            self.reps = reps
        else:
            keys = decide._atom_keys([*premises, target])
            self.premises = list(premises)
            self.target = target
            self.reps = [mk("BIG", "var", var=k) for k in keys]
        self.index = {print_formula(r): i for i, r in enumerate(self.reps)}
        self.facts = _Facts(len(self.reps))
        if CALC_LANG[calc] == "QG":
            self._bake_qg_facts()

    def _bake_qg_facts(self) -> None:
        inners = [r.children[0] for r in self.reps]
        taut = [cpl_valid(g) for g in inners]
        contr = [cpl_valid(mk("CPL", "not", g)) for g in inners]
        seed: list[tuple] = []
        for i in range(len(self.reps)):
            for j in range(len(self.reps)):
                if i != j and cpl_valid(mk("CPL", "matimp", inners[i], inners[j])):
                    seed.append(("le", i, j))
                if taut[i] and contr[j]:
                    seed.append(("lt", j, i))
            if self.with_cap:
                if taut[i]:
                    seed.append(("one", i))
                if contr[i]:
                    seed.append(("zero", i))
        self.facts.add(seed)

    def _idx(self, f: Formula) -> int | None:
        return self.index.get(print_formula(f))

    def _atom(self, f: Formula) -> bool:
        return f.kind in ("bmod", "var") and self._idx(f) is not None

    # --- forcing premise values -------------------------------------------
    def force_true(self, g: Formula) -> list[tuple] | None:
        kind = g.kind
        if self._atom(g):
            return [("one", self._idx(g))]
        if kind == "top":
            return []
        if kind == "bot":
            return [("contradiction",)]
        if kind == "and":
            parts = [self.force_true(c) for c in g.children]
            return None if any(p is None for p in parts) else [f for p in parts for f in p]
        if kind == "delta":
            return self.force_true(g.children[0])
        if kind == "snot":
            return self.force_zero(g.children[0])
        if kind == "gimp" and all(self._atom(c) for c in g.children):
            return [("le", self._idx(g.children[0]), self._idx(g.children[1]))]
        if kind == "iff" and all(self._atom(c) for c in g.children):
            i, j = (self._idx(c) for c in g.children)
            return [("le", i, j), ("le", j, i)]
        return None

    def force_zero(self, g: Formula) -> list[tuple] | None:
        kind = g.kind
        if self._atom(g):
            return [("zero", self._idx(g))]
        if kind == "bot":
            return []
        if kind == "top":
            return [("contradiction",)]
        if kind == "delta":
            return self.force_notone(g.children[0])
        if kind == "snot":
            inner = g.children[0]
            if self._atom(inner):
                return [("notzero", self._idx(inner))]
            return None
        if kind == "gimp" and all(self._atom(c) for c in g.children):
            i, j = (self._idx(c) for c in g.children)
            return [("zero", j), ("lt", j, i)]
        if kind == "or":
            parts = [self.force_zero(c) for c in g.children]
            return None if any(p is None for p in parts) else [f for p in parts for f in p]
        return None

    def force_notone(self, g: Formula) -> list[tuple] | None:
        kind = g.kind
        if self._atom(g):
            return [("notone", self._idx(g))]
        if kind == "bot":
            return []
        if kind == "top":
            return [("contradiction",)]
        if kind == "gimp" and all(self._atom(c) for c in g.children):
            i, j = (self._idx(c) for c in g.children)
            return [("lt", j, i)]
        if kind == "delta":
            return self.force_notone(g.children[0])
        if kind == "snot":
            inner = g.children[0]
            if self._atom(inner):
                return [("notzero", self._idx(inner))]
            return None
        if kind == "or":
            parts = [self.force_notone(c) for c in g.children]
            return None if any(p is None for p in parts) else [f for p in parts for f in p]
        return None

    # --- deriving forced values -------------------------------------------
    def congruent(self, x: Formula, y: Formula) -> bool:
        if self._atom(x) and self._atom(y):
            return self.facts.eq(self._idx(x), self._idx(y))
        if x.kind != y.kind or len(x.children) != len(y.children):
            return False
        if x.kind == "var":
            return x.var == y.var
        if not x.children:
            return x == y
        return all(self.congruent(a, b) for a, b in zip(x.children, y.children))

    def derives(self, g: Formula) -> bool:
        if self.facts.contradiction:
            return True
        kind = g.kind
        if self._atom(g):
            return self._idx(g) in self.facts.one
        if kind == "top":
            return True
        if kind == "bot":
            return False
        if kind == "and":
            return all(self.derives(c) for c in g.children)
        if kind == "or":
            return any(self.derives(c) for c in g.children)
        if kind == "delta":
            return self.derives(g.children[0])
        if kind == "snot":
            return self.derives_zero(g.children[0])
        if kind == "gimp":
            x, y = g.children
            if self._atom(x) and self._atom(y):
                return (self._idx(x), self._idx(y)) in self.facts.le
            return self.derives(y) or self.derives_zero(x) or self.congruent(x, y)
        if kind == "iff":
            x, y = g.children
            if self._atom(x) and self._atom(y):
                return self.facts.eq(self._idx(x), self._idx(y))
            if self.derives(x) and self.derives(y):
                return True
            if self.derives_zero(x) and self.derives_zero(y):
                return True
            return self.congruent(x, y)
        return False

    def derives_zero(self, g: Formula) -> bool:
        if self.facts.contradiction:
            return True
        kind = g.kind
        if self._atom(g):
            return self._idx(g) in self.facts.zero
        if kind == "bot":
            return True
        if kind == "top":
            return False
        if kind == "delta":
            return self.derives_notone(g.children[0])
        if kind == "snot":
            return self.derives_notzero(g.children[0])
        if kind == "and":
            return any(self.derives_zero(c) for c in g.children)
        if kind == "or":
            return all(self.derives_zero(c) for c in g.children)
        if kind == "gimp":
            x, y = g.children
            if self._atom(x) and self._atom(y):
                i, j = self._idx(x), self._idx(y)
                return j in self.facts.zero and (j, i) in self.facts.lt
            return False
        return False

    def derives_notone(self, g: Formula) -> bool:
        if self.facts.contradiction:
            return True
        kind = g.kind
        if self._atom(g):
            return self._idx(g) in self.facts.notone
        if kind == "bot":
            return True
        if kind == "top":
            return False
        if kind == "delta":
            return self.derives_notone(g.children[0])
        if kind == "snot":
            return self.derives_notzero(g.children[0])
        if kind == "and":
            return any(self.derives_notone(c) for c in g.children)
        if kind == "or":
            return all(self.derives_notone(c) for c in g.children)
        if kind == "gimp":
            x, y = g.children
            if self._atom(x) and self._atom(y):
                return (self._idx(y), self._idx(x)) in self.facts.lt
            return False
        if kind == "iff":
            x, y = g.children
            if self._atom(x) and self._atom(y):
                i, j = self._idx(x), self._idx(y)
                return (i, j) in self.facts.lt or (j, i) in self.facts.lt
            return False
        return False

    def derives_notzero(self, g: Formula) -> bool:
        if self.facts.contradiction:
            return True
        if self._atom(g):
            return self._idx(g) in self.facts.notzero
        if g.kind == "top":
            return True
        return False

    # --- main entry ---------------------------------------------------------
    def check(self) -> bool:
        pending = list(self.premises)
        progress = True
        while progress:
            progress = False
            remaining: list[Formula] = []
            for g in pending:
                facts = self.force_true(g)
                if facts is not None:
                    self.facts.add(facts)
                    progress = True
                    continue
                if g.kind == "gimp" and self.derives(g.children[0]):
                    got = self.force_true(g.children[1])
                    if got is not None:
                        self.facts.add(got)
                        progress = True
                        continue
                remaining.append(g)
            pending = remaining
        return self.derives(self.target)

    def canonical_refutation(self) -> dict[str, Fraction] | None:
        """A valuation built from the fact closure that refutes the step.

        Fact-equal atoms share a value; the remaining classes are spread
        strictly along a linear extension of the facts, zeros pinned to 0
        and ones to 1.  Such a valuation satisfies every baked axiom
        instance, so when it makes the premises exceed the target it is a
        genuine countervaluation.
        """
        if self.facts.contradiction:
            return None
        n = len(self.reps)
        rep_of = list(range(n))
        for i in range(n):
            for j in range(i):
                if self.facts.eq(i, j):
                    rep_of[i] = rep_of[j]
                    break
        quotient = sorted(set(rep_of))
        order: list[int] = []
        remaining = set(quotient)
        while remaining:
            nxt = min(q for q in remaining
                      if all((r, q) not in self.facts.le or r == q
                             for r in remaining if r != q))
            order.append(nxt)
            remaining.remove(nxt)
        interior = [q for q in order
                    if q not in self.facts.zero and q not in self.facts.one]
        spread = {q: Fraction(i + 1, len(interior) + 1) for i, q in enumerate(interior)}
        value: dict[int, Fraction] = {}
        for q in order:
            if q in self.facts.zero:
                value[q] = Fraction(0)
            elif q in self.facts.one:
                value[q] = Fraction(1)
            else:
                value[q] = spread[q]
        env = {print_formula(self.reps[i]): value[rep_of[i]] for i in range(n)}
        from .algebra import eval_big

        target_v = eval_big(self.target, env)
        premise_v = min((eval_big(g, env) for g in self.premises), default=Fraction(1))
        if premise_v > target_v:
            return env
        return None


_MAX_OUTER_FALLBACK_ATOMS = 6


def _outer_step_ok(calc: str, cited: Sequence[Formula], instances: Sequence[Formula],
                   target: Formula) -> tuple[bool, str]:
    lang = CALC_LANG[calc]
    premises = [*cited, *instances]
    if lang in ("QG", "BIG"):
        engine = _OuterEngine(calc, premises, target)
        if engine.check():
            return True, "order facts"
        if engine.canonical_refutation() is not None:
            return False, "not an outer-logic consequence of the cited steps"
        if len(engine.reps) <= _MAX_OUTER_FALLBACK_ATOMS:
            if lang == "QG":
                verdict = decide.qg_entails(list(cited), target,
                                            with_cap=(calc == "HQPG_TOP"),
                                            extra=list(instances))
            else:
                verdict = decide.big_entails(premises, target)
            if verdict.holds:
                return True, "grid entailment"
            return False, "not an outer-logic consequence of the cited steps"
        return False, "outer step not derivable by the fact engine (too large for exact check)"
    if lang in ("MCB", "NMCB", "G2ORD", "G2NEL"):
        variant = "G2NEL" if lang in ("NMCB", "G2NEL") else "G2ORD"
        sat = _layer_saturation(lang, premises + [target]) if lang in ("MCB", "NMCB") else []
        keys = decide._atom_keys([*premises, *sat, target])
        if len(keys) > 3:
            return False, "outer step has too many atoms for the exact twist check"
        verdict = decide.g2_entails(variant, [*premises, *sat], target)
        if verdict.holds:
            return True, "grid entailment"
        return False, "not an outer-logic consequence of the cited steps"
    return False, f"outer steps are not supported for {calc}"


def _layer_saturation(lang: str, formulas: Sequence[Formula]) -> list[Formula]:
    """Value-forcing axiom instances over the C-atoms present."""
    atoms: set[Formula] = set()
    for f in formulas:
        atoms |= syntax.modal_atoms(f)
    atom_list = sorted(atoms, key=print_formula)
    force = "deltan" if lang == "NMCB" else "delta1"
    imp = "nimp" if lang == "NMCB" else "gimp"
    eq = "siff" if lang == "NMCB" else "iff"
    sat: list[Formula] = []
    for a in atom_list:
        for b in atom_list:
            if a is not b and bd_valid_sequent(a.children[0], b.children[0]):
                sat.append(mk(lang, force, mk(lang, imp, a, b)))
            if b.children[0] == mk("BD", "dneg", a.children[0]):
                sat.append(mk(lang, force, mk(lang, eq, b, mk(lang, "dneg", a))))
    return sat


# ---------------------------------------------------------------------------
# Derivations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Step:
    formula: Formula | None
    sequent: tuple[Formula, Formula] | None
    just: Mapping


@dataclass(frozen=True)
class Derivation:
    calculus: str
    premises: tuple = ()
    steps: tuple[Step, ...] = ()

    @classmethod
    def from_json(cls, obj: dict) -> "Derivation":
        calc = obj["calculus"]
        if calc not in CALCULI:
            raise ValueError(f"unknown calculus {calc!r}")
        lang = CALC_LANG[calc]
        if calc == "RFDE":
            premises = tuple((parse(lang, l), parse(lang, r))
                             for l, r in obj.get("premises", []))
            steps = tuple(Step(None, (parse(lang, s["lhs"]), parse(lang, s["rhs"])), s["just"])
                          for s in obj["steps"])
        else:
            premises = tuple(parse(lang, t) for t in obj.get("premises", []))
            steps = tuple(Step(parse(lang, s["formula"]), None, s["just"])
                          for s in obj["steps"])
        return cls(calc, premises, steps)

    @classmethod
    def from_text(cls, text: str) -> "Derivation":
        return cls.from_json(json.loads(text))


@dataclass
class CheckReport:
    accepted: bool
    steps: list[dict] = field(default_factory=list)
    first_failure: int | None = None

    def to_json(self) -> dict:
        return {"accepted": self.accepted, "steps": self.steps,
                "first_failure": self.first_failure}


def _axiom_from_params(calc: str, params: Mapping) -> Formula:
    """Build the axiom instance named by explicit parameters (KPS/A4)."""
    name = params.get("schema") or params.get("axiom")
    m = params.get("m")
    if name == "KPS":
        if m is None or m > MAX_KPS_M:
            raise ValueError(f"KPS instances are recognized for m <= {MAX_KPS_M} only")
        phis = [parse("CPL", t) for t in params["phis"]]
        chis = [parse("CPL", t) for t in params["chis"]]
        return qp.kps_instance(m, phis, chis)
    if name == "A4":
        if m is None or m > MAX_KPS_M + 1:
            raise ValueError(f"A4 instances are recognized for m <= {MAX_KPS_M + 1} only")
        phis = [parse("QP", t) for t in params["phis"]]
        psis = [parse("QP", t) for t in params["psis"]]
        return qp.a4_instance(m, phis, psis)
    raise ValueError(f"cannot build an instance of schema {name!r} from parameters")


def check_derivation(calc: str, derivation: Derivation,
                     premises: Sequence | None = None) -> CheckReport:
    """Verify a Hilbert derivation step by step.

    Each step is checked against the *stated* formulas of the steps it
    cites, so verdicts are per-step and failures do not cascade.  The
    necessitation rule is restricted to theorem lines (premise-tainted
    lines are rejected), mirroring the completeness-theorem proviso.
    """
    if calc != derivation.calculus:
        raise ValueError("calculus mismatch")
    if calc == "RFDE":
        return _check_rfde(derivation, premises)
    prem: list[Formula] = list(premises if premises is not None else derivation.premises)
    report = CheckReport(True)
    tainted: list[bool] = []
    imp_kind = _IMP_KIND[calc]

    def fail(i: int, reason: str) -> None:
        report.steps.append({"step": i + 1, "status": "fail", "reason": reason})
        if report.accepted:
            report.first_failure = i + 1
        report.accepted = False

    def cited(i: int, refs: Iterable[int]) -> list[Formula] | None:
        out = []
        for r in refs:
            if not 1 <= r <= i:
                return None
            out.append(derivation.steps[r - 1].formula)
        return out

    for i, step in enumerate(derivation.steps):
        f = step.formula
        just = dict(step.just)
        taint = False
        if f is None:
            fail(i, "missing formula")
            tainted.append(True)
            continue
        try:
            if "premise" in just:
                ref = just["premise"]
                ok = (1 <= ref <= len(prem) and prem[ref - 1] == f) if isinstance(ref, int) \
                    else f in prem
                taint = True
                if not ok:
                    fail(i, "formula is not among the declared premises")
                    tainted.append(taint)
                    continue
            elif "axiom" in just and "outer" not in just:
                if isinstance(just["axiom"], str) and "m" not in just:
                    hit = match_axiom(calc, f)
                    if hit is None or (just["axiom"] not in ("", "any") and hit[0] != just["axiom"]):
                        fail(i, f"not an instance of axiom {just['axiom']!r}")
                        tainted.append(taint)
                        continue
                else:
                    params = dict(just)
                    params["schema"] = just["axiom"] if isinstance(just["axiom"], str) \
                        else just["axiom"].get("schema")
                    if isinstance(just["axiom"], dict):
                        params.update(just["axiom"])
                    instance = _axiom_from_params(calc, params)
                    if instance != f:
                        fail(i, "formula differs from the named axiom instance")
                        tainted.append(taint)
                        continue
            elif "mp" in just:
                refs = cited(i, just["mp"])
                if refs is None or len(refs) != 2:
                    fail(i, "modus ponens cites unavailable steps")
                    tainted.append(True)
                    continue
                a, b = refs
                ok = (b.kind == imp_kind and b.children[0] == a and b.children[1] == f) or \
                     (a.kind == imp_kind and a.children[0] == b and a.children[1] == f)
                taint = any(tainted[r - 1] for r in just["mp"])
                if not ok:
                    fail(i, "modus ponens does not apply to the cited steps")
                    tainted.append(taint)
                    continue
            elif "nec" in just:
                ref = just["nec"]
                refs = cited(i, [ref])
                if refs is None:
                    fail(i, "necessitation cites an unavailable step")
                    tainted.append(True)
                    continue
                if tainted[ref - 1]:
                    fail(i, "necessitation applied to a premise-dependent line")
                    tainted.append(True)
                    continue
                if desugar(f) != desugar(_nec_image(calc, refs[0])):
                    fail(i, "formula is not the necessitation of the cited step")
                    tainted.append(taint)
                    continue
            elif "outer" in just:
                refs = cited(i, just["outer"])
                if refs is None:
                    fail(i, "outer step cites unavailable steps")
                    tainted.append(True)
                    continue
                instances: list[Formula] = []
                if "axiom" in just:
                    params = dict(just["axiom"]) if isinstance(just["axiom"], dict) else {}
                    params.setdefault("schema", params.get("axiom"))
                    instances.append(_axiom_from_params(calc, params))
                taint = any(tainted[r - 1] for r in just["outer"])
                ok, how = _outer_step_ok(calc, refs, instances, f)
                if not ok:
                    fail(i, how)
                    tainted.append(taint)
                    continue
            else:
                fail(i, f"unknown justification {sorted(just)!r}")
                tainted.append(True)
                continue
        except (ValueError, LanguageError, KeyError) as exc:
            fail(i, f"malformed justification: {exc}")
            tainted.append(True)
            continue
        report.steps.append({"step": i + 1, "status": "ok"})
        tainted.append(taint)
    return report


def _nec_image(calc: str, f: Formula) -> Formula:
    lang = CALC_LANG[calc]
    if lang in ("BIG", "QG"):
        return mk(lang, "delta", f)
    if lang in ("G2ORD", "MCB"):
        return mk(lang, "gimp", mk(lang, "gcoimp", mk(lang, "top"), f), mk(lang, "bot"))
    if lang in ("G2NEL", "NMCB"):
        return mk(lang, "nimp", mk(lang, "ncoimp", mk(lang, "top"), f), mk(lang, "bot"))
    if lang == "QP":
        return mk(lang, "approx", f, mk(lang, "top"))
    raise ValueError(f"no necessitation rule in {calc}")


# ---------------------------------------------------------------------------
# R_fde sequent derivations
# ---------------------------------------------------------------------------

def _rfde_axioms() -> list[tuple[str, Formula, Formula]]:
    a, b, c = (_meta("BD", n) for n in "abc")

    def N(x):
        return mk("BD", "dneg", x)

    def AND(x, y):
        return mk("BD", "and", x, y)

    def OR(x, y):
        return mk("BD", "or", x, y)

    return [
        ("and_elim_l", AND(a, b), a),
        ("and_elim_r", AND(a, b), b),
        ("or_intro_l", a, OR(a, b)),
        ("or_intro_r", b, OR(a, b)),
        ("dem_and_l", N(AND(a, b)), OR(N(a), N(b))),
        ("dem_and_r", OR(N(a), N(b)), N(AND(a, b))),
        ("dem_or_l", N(OR(a, b)), AND(N(a), N(b))),
        ("dem_or_r", AND(N(a), N(b)), N(OR(a, b))),
        ("dneg_elim", N(N(a)), a),
        ("dneg_intro", a, N(N(a))),
        ("distrib", AND(a, OR(b, c)), OR(AND(a, b), AND(a, c))),
    ]


_RFDE_TABLE = None


def match_sequent_axiom(lhs: Formula, rhs: Formula) -> str | None:
    global _RFDE_TABLE
    if _RFDE_TABLE is None:
        _RFDE_TABLE = _rfde_axioms()
    for name, pl, pr in _RFDE_TABLE:
        binding: dict[str, Formula] = {}
        if _match(pl, lhs, binding) and _match(pr, rhs, binding):
            return name
    return None


def _check_rfde(derivation: Derivation, premises: Sequence | None) -> CheckReport:
    prem = list(premises if premises is not None else derivation.premises)
    report = CheckReport(True)

    def fail(i: int, reason: str) -> None:
        report.steps.append({"step": i + 1, "status": "fail", "reason": reason})
        if report.accepted:
            report.first_failure = i + 1
        report.accepted = False

    seqs = [s.sequent for s in derivation.steps]
    for i, step in enumerate(derivation.steps):
        if step.sequent is None:
            fail(i, "missing sequent")
            continue
        lhs, rhs = step.sequent
        just = dict(step.just)
        if "premise" in just:
            if (lhs, rhs) not in prem:
                fail(i, "sequent is not among the declared premises")
                continue
        elif "axiom" in just:
            name = match_sequent_axiom(lhs, rhs)
            if name is None or (just["axiom"] not in ("", "any") and name != just["axiom"]):
                fail(i, f"not an instance of sequent axiom {just['axiom']!r}")
                continue
        elif "rule" in just:
            refs = just.get("from", [])
            if not all(1 <= r <= i for r in refs) or len(refs) != 2:
                fail(i, "rule cites unavailable steps")
                continue
            s1, s2 = (seqs[r - 1] for r in refs)
            if s1 is None or s2 is None:
                fail(i, "rule cites malformed steps")
                continue
            if just["rule"] == "or_elim":
                ok = any(
                    x[1] == y[1] == rhs and lhs == mk("BD", "or", x[0], y[0])
                    for x, y in ((s1, s2), (s2, s1))
                )
            elif just["rule"] == "and_intro":
                ok = any(
                    x[0] == y[0] == lhs and rhs == mk("BD", "and", x[1], y[1])
                    for x, y in ((s1, s2), (s2, s1))
                )
            else:
                fail(i, f"unknown sequent rule {just['rule']!r}")
                continue
            if not ok:
                fail(i, "sequent rule does not apply to the cited steps")
                continue
        else:
            fail(i, f"unknown justification {sorted(just)!r}")
            continue
        report.steps.append({"step": i + 1, "status": "ok"})
    return report
