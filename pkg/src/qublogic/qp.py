"""Gaerdenfors-style qualitative probability: semantics, translation, LP.

A Gaerdenfors model carries one probability measure per state, given by
atom weights; the comparison connective may nest, and its truth set at a
state compares the measures of the operands' truth sets.  The simple
inequality fragment translates into the Goedel two-layered language, and
order representability by a probability measure is decided by an exact
rational LP with maximized strictness slack.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from . import lp
from .algebra import ONE, ZERO
from .measures import UncertaintyModel
from .syntax import Formula, LanguageError, desugar, is_sif, mk, retag


@dataclass(frozen=True)
class GardenforsModel:
    """States with per-state probability weights and a classical valuation."""

    states: int
    weights: Mapping[int, tuple[Fraction, ...]]
    v: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.states < 1:
            raise ValueError("at least one state required")
        if set(self.weights) != set(range(self.states)):
            raise ValueError("one weight vector per state required")
        for x, w in self.weights.items():
            if len(w) != self.states:
                raise ValueError(f"weight vector at state {x} has wrong length")
            if any(q < 0 for q in w):
                raise ValueError("weights must be nonnegative")
            if sum(w) != ONE:
                raise ValueError(f"weights at state {x} do not sum to 1")
        for name, mask in self.v.items():
            if mask >> self.states:
                raise ValueError(f"valuation of {name!r} references unknown states")

    @property
    def full(self) -> int:
        return (1 << self.states) - 1

    def prob(self, x: int, mask: int) -> Fraction:
        w = self.weights[x]
        return sum((w[i] for i in range(self.states) if mask >> i & 1), ZERO)

    def to_json(self) -> dict:
        return {
            "states": self.states,
            "weights": {str(x): [str(q) for q in w] for x, w in sorted(self.weights.items())},
            "v": {p: [i for i in range(self.states) if m >> i & 1]
                  for p, m in sorted(self.v.items())},
        }

    @classmethod
    def from_json(cls, obj: dict) -> "GardenforsModel":
        weights = {int(x): tuple(Fraction(q) for q in w) for x, w in obj["weights"].items()}
        v = {}
        for p, states in obj.get("v", {}).items():
            mask = 0
            for s in states:
                mask |= 1 << s
            v[p] = mask
        return cls(obj["states"], weights, v)


def truth_set_qp(m: GardenforsModel, f: Formula) -> int:
    """States where ``f`` holds; comparisons may nest arbitrarily."""
    kind = f.kind
    if kind == "var":
        try:
            return m.v[f.var]
        except KeyError:
            raise KeyError(f"variable {f.var!r} unbound in model") from None
    if kind == "top":
        return m.full
    if kind == "bot":
        return 0
    if kind == "not":
        return m.full & ~truth_set_qp(m, f.children[0])
    a = truth_set_qp(m, f.children[0])
    b = truth_set_qp(m, f.children[1])
    if kind == "and":
        return a & b
    if kind == "or":
        return a | b
    if kind == "matimp":
        return (m.full & ~a) | b
    if kind == "iff":
        return m.full & ~(a ^ b)
    if kind == "leq":
        return sum(1 << x for x in range(m.states) if m.prob(x, a) <= m.prob(x, b))
    if kind == "approx":
        return sum(1 << x for x in range(m.states) if m.prob(x, a) == m.prob(x, b))
    if kind == "less":
        return sum(1 << x for x in range(m.states) if m.prob(x, a) < m.prob(x, b))
    raise ValueError(f"kind {kind!r} is not a QP connective")


def qp_sat(m: GardenforsModel, x: int, f: Formula) -> bool:
    """Truth at a state (pointed-model satisfaction)."""
    if not 0 <= x < m.states:
        raise IndexError(f"state {x} out of range")
    if f.lang != "QP":
        raise LanguageError("qp_sat expects a QP formula")
    return bool(truth_set_qp(m, f) >> x & 1)


def qp_true(m: GardenforsModel, f: Formula) -> bool:
    """Truth in the model: the truth set is the whole carrier."""
    if f.lang != "QP":
        raise LanguageError("qp_true expects a QP formula")
    return truth_set_qp(m, f) == m.full


# ---------------------------------------------------------------------------
# SIF translation
# ---------------------------------------------------------------------------

def translate_sif(f: Formula) -> Formula:
    """Translate a simple inequality formula into the QG language."""
    if not is_sif(f):
        raise LanguageError("formula is not a simple inequality formula")
    return _translate(desugar(f))


def _translate(f: Formula) -> Formula:
    if f.kind == "leq":
        chi, chi2 = (retag(c, "CPL") for c in f.children)
        return mk("QG", "delta",
                  mk("QG", "gimp", mk("QG", "bmod", chi), mk("QG", "bmod", chi2)))
    if f.kind == "not":
        return mk("QG", "snot", _translate(f.children[0]))
    if f.kind == "and":
        return mk("QG", "and", *(_translate(c) for c in f.children))
    if f.kind == "or":
        return mk("QG", "or", *(_translate(c) for c in f.children))
    if f.kind == "matimp":
        return mk("QG", "gimp", *(_translate(c) for c in f.children))
    raise LanguageError(f"unexpected kind {f.kind!r} in a SIF")


# ---------------------------------------------------------------------------
# E-notation and axiom-instance generators
# ---------------------------------------------------------------------------

def _conj(lang: str, parts: Sequence[Formula]) -> Formula:
    out = parts[0]
    for p in parts[1:]:
        out = mk(lang, "and", out, p)
    return out


def _disj(lang: str, parts: Sequence[Formula]) -> Formula:
    out = parts[0]
    for p in parts[1:]:
        out = mk(lang, "or", out, p)
    return out


def _balanced_disjunction(lang: str, phis: Sequence[Formula], chis: Sequence[Formula]) -> Formula:
    """Disjunction over equally sized negation patterns of the two lists.

    Each disjunct negates the members indexed by K in the first list and by
    L in the second, with |K| = |L|; conjuncts stay in list order.
    """
    m = len(phis)
    idx = list(range(m))
    disjuncts: list[Formula] = []
    for size in range(m + 1):
        for k_set in _ksubsets(idx, size):
            for l_set in _ksubsets(idx, size):
                parts = [mk(lang, "not", phis[i]) if i in k_set else phis[i] for i in idx]
                parts += [mk(lang, "not", chis[i]) if i in l_set else chis[i] for i in idx]
                disjuncts.append(_conj(lang, parts))
    return _disj(lang, disjuncts)


def _ksubsets(idx: Sequence[int], size: int) -> Iterable[frozenset[int]]:
    from itertools import combinations

    for combo in combinations(idx, size):
        yield frozenset(combo)


def e_notation(phis: Sequence[Formula], chis: Sequence[Formula]) -> Formula:
    """The QP abbreviation ``phi_1,..,phi_m E chi_1,..,chi_m``."""
    if not phis or len(phis) != len(chis):
        raise ValueError("E-notation needs equally long nonempty lists")
    for g in [*phis, *chis]:
        if g.lang != "QP":
            raise LanguageError("E-notation operands must be QP formulas")
    return mk("QP", "approx", _balanced_disjunction("QP", phis, chis), mk("QP", "top"))


def e_g_notation(phis: Sequence[Formula], chis: Sequence[Formula]) -> Formula:
    """The QG abbreviation: the balanced disjunction is as likely as Top."""
    if not phis or len(phis) != len(chis):
        raise ValueError("E_G-notation needs equally long nonempty lists")
    for g in [*phis, *chis]:
        if g.lang != "CPL":
            raise LanguageError("E_G-notation operands must be CPL formulas")
    disj = _balanced_disjunction("CPL", phis, chis)
    return mk("QG", "delta",
              mk("QG", "iff", mk("QG", "bmod", disj), mk("QG", "bmod", mk("CPL", "top"))))


def a4_instance(m: int, phis: Sequence[Formula], psis: Sequence[Formula]) -> Formula:
    """The m-th comparison axiom of the QP calculus (lists indexed 1..m)."""
    if m < 1 or len(phis) != m or len(psis) != m:
        raise ValueError("a4 instance needs lists of length m")
    parts = [e_notation(phis, psis)]
    parts += [mk("QP", "leq", phis[i], psis[i]) for i in range(m - 1)]
    return mk("QP", "matimp", _conj("QP", parts), mk("QP", "leq", psis[m - 1], phis[m - 1]))


def kps_instance(m: int, phis: Sequence[Formula], chis: Sequence[Formula]) -> Formula:
    """The m-th KPS axiom of the Goedel calculus (lists indexed 0..m)."""
    if m < 0 or len(phis) != m + 1 or len(chis) != m + 1:
        raise ValueError("kps instance needs lists of length m+1")
    parts: list[Formula] = [e_g_notation(phis, chis)]
    for i in range(m):
        parts.append(mk("QG", "delta",
                        mk("QG", "gimp", mk("QG", "bmod", phis[i]), mk("QG", "bmod", chis[i]))))
    conclusion = mk("QG", "delta",
                    mk("QG", "gimp", mk("QG", "bmod", chis[m]), mk("QG", "bmod", phis[m])))
    return mk("QG", "gimp", _conj("QG", parts), conclusion)


# ---------------------------------------------------------------------------
# Counterparts
# ---------------------------------------------------------------------------

def g_counterpart(m: GardenforsModel, x: int) -> UncertaintyModel:
    """Two-layered model with the same carrier and measure P_x."""
    if not 0 <= x < m.states:
        raise IndexError(f"state {x} out of range")
    mu = {mask: m.prob(x, mask) for mask in range(1 << m.states)}
    return UncertaintyModel(m.states, dict(m.v), mu)


@dataclass(frozen=True)
class OrderInstance:
    """A total preorder on the subsets of a ground set, as a rank map."""

    ground_size: int
    rank: Mapping[int, int]

    def __post_init__(self):
        if self.ground_size < 1:
            raise ValueError("ground set must be nonempty")
        if set(self.rank) != set(range(1 << self.ground_size)):
            raise ValueError("rank map must be total on all subsets")
        ranks = sorted(set(self.rank.values()))
        if ranks != list(range(len(ranks))):
            raise ValueError("ranks must form an initial segment of the naturals")

    def classes(self) -> list[list[int]]:
        out: dict[int, list[int]] = {}
        for mask in sorted(self.rank):
            out.setdefault(self.rank[mask], []).append(mask)
        return [out[r] for r in sorted(out)]

    def consecutive_pairs(self) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
        """(strict, equal) pairs whose conjunction pins the whole order."""
        classes = self.classes()
        equal = [(cls[i], cls[i + 1]) for cls in classes for i in range(len(cls) - 1)]
        strict = [(classes[i][-1], classes[i + 1][0]) for i in range(len(classes) - 1)]
        return strict, equal

    @classmethod
    def from_measure(cls, states: int, mu: Mapping[int, Fraction]) -> "OrderInstance":
        values = sorted(set(mu.values()))
        pos = {v: i for i, v in enumerate(values)}
        return cls(states, {mask: pos[mu[mask]] for mask in mu})


@dataclass(frozen=True)
class MeasureWitness:
    """Atom weights of a strictly order-agreeing probability measure."""

    weights: tuple[Fraction, ...]
    eps: Fraction

    def measure(self, mask: int) -> Fraction:
        return sum((self.weights[i] for i in range(len(self.weights)) if mask >> i & 1), ZERO)

    def verifies(self, strict: Iterable[tuple[int, int]], equal: Iterable[tuple[int, int]]) -> bool:
        if any(w < 0 for w in self.weights) or sum(self.weights) != ONE or self.eps <= 0:
            return False
        for x, y in strict:
            if not self.measure(x) + self.eps <= self.measure(y):
                return False
        return all(self.measure(x) == self.measure(y) for x, y in equal)

    def to_json(self) -> dict:
        return {"weights": [str(w) for w in self.weights], "eps": str(self.eps)}


def represent_order_lp(order: OrderInstance,
                       strict_pairs: Sequence[tuple[int, int]] | None = None,
                       equal_pairs: Sequence[tuple[int, int]] | None = None,
                       ) -> MeasureWitness | None:
    """Probability weights strictly agreeing with the order, or None.

    Solves max eps subject to weights >= 0 summing to 1, equalities for
    ties, and measure(X) + eps <= measure(Y) for strict pairs; a witness is
    returned iff the optimum eps is positive (strict agreement).
    """
    n = order.ground_size
    if n > 12:
        raise ValueError("ground sets beyond 12 atoms are not supported")
    if strict_pairs is None or equal_pairs is None:
        strict, equal = order.consecutive_pairs()
        strict_pairs = strict if strict_pairs is None else list(strict_pairs)
        equal_pairs = equal if equal_pairs is None else list(equal_pairs)

    def row(mask_lo: int, mask_hi: int, eps_coeff: Fraction) -> list[Fraction]:
        coeffs = [ZERO] * (n + 1)
        for i in range(n):
            if mask_lo >> i & 1:
                coeffs[i] += ONE
            if mask_hi >> i & 1:
                coeffs[i] -= ONE
        coeffs[n] = eps_coeff
        return coeffs

    a_ub = [row(x, y, ONE) for x, y in strict_pairs]
    b_ub = [ZERO] * len(strict_pairs)
    a_ub.append([ZERO] * n + [ONE])  # eps <= 1 keeps the LP bounded
    b_ub.append(ONE)
    a_eq = [row(x, y, ZERO) for x, y in equal_pairs]
    b_eq = [ZERO] * len(equal_pairs)
    a_eq.append([ONE] * n + [ZERO])
    b_eq.append(ONE)
    objective = [ZERO] * n + [ONE]
    status, x, value = lp.solve_lp(objective, a_ub, b_ub, a_eq, b_eq)
    if status != "optimal" or value is None or value <= 0:
        return None
    witness = MeasureWitness(tuple(x[:n]), value)
    if not witness.verifies(strict_pairs, equal_pairs):
        raise AssertionError("LP witness failed re-verification")
    return witness


def qp_counterpart(m: UncertaintyModel) -> tuple[GardenforsModel, int] | None:
    """Pointed Gaerdenfors model whose measure agrees with the model's order.

    The same probability measure is used at every state, which suffices for
    pointed-model claims.  Returns None when the order induced by the
    measure is not probability-representable.
    """
    order = OrderInstance.from_measure(m.states, m.mu)
    witness = represent_order_lp(order)
    if witness is None:
        return None
    weights = {x: witness.weights for x in range(m.states)}
    return GardenforsModel(m.states, weights, dict(m.v)), 0
