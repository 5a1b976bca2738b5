"""Two-layered models over uncertainty measures.

An uncertainty model pairs a classical valuation with a measure given
extensionally on every subset of the (small) state space; a belief model
pairs a Belnap-Dunn valuation with such a measure.  Storing the measure
densely is what lets the property checkers quantify over arbitrary subsets
rather than just definable ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Iterator, Mapping, Sequence

from . import bd
from .algebra import ONE, ZERO, TwistValue, eval_big, eval_g2, unit
from .syntax import Formula, LanguageError, mk, print_formula, vars_of

MAX_DENSE_STATES = 16


def _mask_key(mask: int) -> str:
    return "[" + ",".join(str(i) for i in range(mask.bit_length()) if mask >> i & 1) + "]"


def _key_mask(key: str) -> int:
    body = key.strip()[1:-1].strip()
    if not body:
        return 0
    out = 0
    for part in body.split(","):
        out |= 1 << int(part)
    return out


def _check_measure(states: int, mu: Mapping[int, Fraction]) -> None:
    if not 1 <= states <= MAX_DENSE_STATES:
        raise ValueError(f"state count must be in 1..{MAX_DENSE_STATES}")
    if set(mu) != set(range(1 << states)):
        raise ValueError("measure must be total on all subsets")
    for v in mu.values():
        unit(v)


def measure_monotone(states: int, mu: Mapping[int, Fraction]) -> tuple[bool, tuple | None]:
    """Monotonicity w.r.t. inclusion; checks one-element extensions."""
    for x in range(1 << states):
        for i in range(states):
            if not x >> i & 1:
                y = x | 1 << i
                if mu[x] > mu[y]:
                    return False, (x, y)
    return True, None


def measure_nontrivial(states: int, mu: Mapping[int, Fraction]) -> tuple[bool, tuple | None]:
    full = (1 << states) - 1
    return (True, None) if mu[full] > mu[0] else (False, (0, full))


def measure_capacity(states: int, mu: Mapping[int, Fraction]) -> tuple[bool, tuple | None]:
    ok, wit = measure_monotone(states, mu)
    if not ok:
        return ok, wit
    full = (1 << states) - 1
    if mu[0] != ZERO:
        return False, (0,)
    if mu[full] != ONE:
        return False, (full,)
    return True, None


@dataclass(frozen=True)
class UncertaintyModel:
    """Classical inner valuation plus a dense measure over subsets."""

    states: int
    v: Mapping[str, int] = field(default_factory=dict)
    mu: Mapping[int, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        _check_measure(self.states, self.mu)
        for name, mask in self.v.items():
            if mask >> self.states:
                raise ValueError(f"valuation of {name!r} references unknown states")

    @property
    def full(self) -> int:
        return (1 << self.states) - 1

    def flags(self) -> dict[str, bool]:
        return {
            "monotone": measure_monotone(self.states, self.mu)[0],
            "nontrivial": measure_nontrivial(self.states, self.mu)[0],
            "capacity": measure_capacity(self.states, self.mu)[0],
        }

    def to_json(self) -> dict:
        return {
            "states": self.states,
            "v": {p: bd._mask_to_list(m) for p, m in sorted(self.v.items())},
            "mu": {_mask_key(m): str(q) for m, q in sorted(self.mu.items())},
        }

    @classmethod
    def from_json(cls, obj: dict) -> "UncertaintyModel":
        return cls(
            states=obj["states"],
            v={p: bd._list_to_mask(s) for p, s in obj.get("v", {}).items()},
            mu={_key_mask(k): Fraction(q) for k, q in obj["mu"].items()},
        )


@dataclass(frozen=True)
class BeliefModel:
    """BD inner valuation plus a dense measure over subsets."""

    states: int
    vplus: Mapping[str, int] = field(default_factory=dict)
    vminus: Mapping[str, int] = field(default_factory=dict)
    pi: Mapping[int, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        _check_measure(self.states, self.pi)
        for name, mask in dict(self.vplus, **self.vminus).items():
            if mask >> self.states:
                raise ValueError(f"valuation of {name!r} references unknown states")

    @property
    def full(self) -> int:
        return (1 << self.states) - 1

    def bd_model(self) -> bd.BDModel:
        return bd.BDModel(self.states, self.vplus, self.vminus)

    def flags(self) -> dict[str, bool]:
        return {
            "monotone": measure_monotone(self.states, self.pi)[0],
            "nontrivial": measure_nontrivial(self.states, self.pi)[0],
            "capacity": measure_capacity(self.states, self.pi)[0],
        }

    def to_json(self) -> dict:
        return {
            "states": self.states,
            "v": {p: bd._mask_to_list(m) for p, m in sorted(self.vplus.items())},
            "vminus": {p: bd._mask_to_list(m) for p, m in sorted(self.vminus.items())},
            "mu": {_mask_key(m): str(q) for m, q in sorted(self.pi.items())},
        }

    @classmethod
    def from_json(cls, obj: dict) -> "BeliefModel":
        return cls(
            states=obj["states"],
            vplus={p: bd._list_to_mask(s) for p, s in obj.get("v", obj.get("vplus", {})).items()},
            vminus={p: bd._list_to_mask(s) for p, s in obj.get("vminus", {}).items()},
            pi={_key_mask(k): Fraction(q) for k, q in obj["mu"].items()},
        )


# ---------------------------------------------------------------------------
# Inner-layer truth sets and two-layered evaluation
# ---------------------------------------------------------------------------

def truth_set(m: UncertaintyModel, f: Formula) -> int:
    """States satisfying a CPL formula, as a bitmask."""
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
        return m.full & ~truth_set(m, f.children[0])
    a = truth_set(m, f.children[0])
    b = truth_set(m, f.children[1])
    if kind == "and":
        return a & b
    if kind == "or":
        return a | b
    if kind == "matimp":
        return (m.full & ~a) | b
    if kind == "iff":
        return m.full & ~(a ^ b)
    raise ValueError(f"kind {kind!r} is not a CPL connective")


def eval_qg(m: UncertaintyModel, alpha: Formula) -> Fraction:
    """Value of a QG formula: B-atoms get the measure of their truth set."""
    if alpha.lang != "QG":
        raise LanguageError("eval_qg expects a QG formula")
    env = {print_formula(a): m.mu[truth_set(m, a.children[0])]
           for a in _modal_atoms(alpha)}
    return eval_big(alpha, env)


def eval_layer(m: BeliefModel, variant: str, alpha: Formula) -> TwistValue:
    """Value of an MCB/NMCB formula over a belief model."""
    if variant not in ("MCB", "NMCB"):
        raise ValueError("variant must be MCB or NMCB")
    if alpha.lang != variant:
        raise LanguageError(f"eval_layer expects an {variant} formula")
    inner = m.bd_model()
    env: dict[str, TwistValue] = {}
    for a in _modal_atoms(alpha):
        pos, neg = bd.truth_sets(inner, a.children[0])
        env[print_formula(a)] = TwistValue(m.pi[pos], m.pi[neg])
    return eval_g2(alpha, env, variant)


def _modal_atoms(f: Formula) -> set[Formula]:
    from .syntax import modal_atoms

    return modal_atoms(f)


# ---------------------------------------------------------------------------
# Measure properties
# ---------------------------------------------------------------------------

def _subsets(states: int) -> range:
    return range(1 << states)


def _cond_i(states, mu):
    full = (1 << states) - 1
    for x in _subsets(states):
        if (mu[x] == ONE) != (mu[full & ~x] == ZERO):
            return False, (x,)
    return True, None


def _cond_ii(states, mu):
    for y in _subsets(states):
        for y2 in _subsets(states):
            if mu[y & y2] == ZERO and mu[y] > ZERO and mu[y2] > ZERO:
                if not (mu[y | y2] > mu[y] and mu[y | y2] > mu[y2]):
                    return False, (y, y2)
    return True, None


def _cond_iii(states, mu):
    for y in _subsets(states):
        if mu[y] != ZERO:
            continue
        for y2 in _subsets(states):
            if mu[y | y2] != mu[y2]:
                return False, (y, y2)
    return True, None


def _mu_pm(states, mu):
    for x in _subsets(states):
        for y in _subsets(states):
            if x & ~y or x == y or mu[x] >= mu[y]:
                continue
            for z in _subsets(states):
                if y & z:
                    continue
                if mu[x | z] >= mu[y | z]:
                    return False, (x, y, z)
    return True, None


def _vec(states: int, mask: int) -> tuple[int, ...]:
    return tuple(1 if mask >> i & 1 else 0 for i in range(states))


def _mu_kps(states: int, mu, m: int):
    """KPS_m: search for a balanced violating tuple via sums of pair vectors.

    A violation is one pair with mu(X) < mu(Y) plus m pairs with
    mu(X_j) <= mu(Y_j) whose membership-count difference vectors cancel.
    """
    if states > 6 or m > 8 or (2 * m + 3) ** states > 2_000_000:
        raise ValueError("muKPS bounds exceeded (states <= 6, m <= 8, joint cost bound)")
    le_vecs: dict[tuple[int, ...], tuple[int, int]] = {}
    lt_vecs: dict[tuple[int, ...], tuple[int, int]] = {}
    for x in _subsets(states):
        for y in _subsets(states):
            d = tuple(a - b for a, b in zip(_vec(states, x), _vec(states, y)))
            if mu[x] <= mu[y]:
                le_vecs.setdefault(d, (x, y))
            if mu[x] < mu[y]:
                lt_vecs.setdefault(d, (x, y))
    # sums of exactly m vectors from le_vecs (the zero vector is always
    # present, so this includes shorter sums)
    frontier: dict[tuple[int, ...], tuple] = {tuple(0 for _ in range(states)): ()}
    for _ in range(m):
        nxt: dict[tuple[int, ...], tuple] = {}
        for s, path in frontier.items():
            for d, pair in le_vecs.items():
                t = tuple(a + b for a, b in zip(s, d))
                if t not in nxt:
                    nxt[t] = path + (pair,)
        frontier = nxt
    for d, pair in lt_vecs.items():
        need = tuple(-a for a in d)
        if need in frontier:
            premises = frontier[need]
            return False, (pair, premises)
    return True, None


def _belief_pairs(states: int) -> Iterator[tuple[int, int, int, int]]:
    for x in _subsets(states):
        for y in _subsets(states):
            for x2 in _subsets(states):
                for y2 in _subsets(states):
                    yield x, y, x2, y2


def _mcb_i(states, pi):
    """Exact frame condition of the paraconsistent disj+ axiom.

    X/Y are the positive/negative sets of one variable, X'/Y' of the other;
    the hypothesis and conclusion mirror the axiom's delta-structure.
    """
    for x, y, x2, y2 in _belief_pairs(states):
        if pi[x & x2] == ZERO and pi[y | y2] == ONE \
                and not (pi[x] == ZERO and pi[y] == ONE) \
                and not (pi[x2] == ZERO and pi[y2] == ONE):
            if not ((pi[x | x2] > pi[x] or pi[y & y2] < pi[y])
                    and (pi[x | x2] > pi[x2] or pi[y & y2] < pi[y2])):
                return False, (x, y, x2, y2)
    return True, None


def _mcb_ii(states, pi):
    for x, y, x2, y2 in _belief_pairs(states):
        if pi[x] == ZERO and pi[y] == ONE:
            if pi[x | x2] != pi[x2] or pi[y & y2] != pi[y2]:
                return False, (x, y, x2, y2)
    return True, None


def _mcb_iii(states, pi):
    for y in _subsets(states):
        for y2 in _subsets(states):
            if pi[y & y2] == ZERO and pi[y] > ZERO and pi[y2] > ZERO:
                if not (pi[y | y2] > pi[y] and pi[y | y2] > pi[y2]):
                    return False, (y, y2)
    return True, None


def _mcb_iv(states, pi):
    for y in _subsets(states):
        if pi[y] != ZERO:
            continue
        for y2 in _subsets(states):
            if pi[y | y2] != pi[y2]:
                return False, (y, y2)
    return True, None


_PROPS: dict[str, Callable] = {
    "monotone": measure_monotone,
    "nontrivial": measure_nontrivial,
    "capacity": measure_capacity,
    "cond_i": _cond_i,
    "cond_ii": _cond_ii,
    "cond_iii": _cond_iii,
    "cond_iv": measure_capacity,
    "mupm": _mu_pm,
    "mcb_i": _mcb_i,
    "mcb_ii": _mcb_ii,
    "mcb_iii": _mcb_iii,
    "mcb_iv": _mcb_iv,
}


def check_property(states: int, measure: Mapping[int, Fraction], prop: str,
                   m: int | None = None) -> tuple[bool, tuple | None]:
    """Exhaustively check a named measure property; returns a violating tuple."""
    _check_measure(states, measure)
    if prop == "mukps":
        if m is None:
            raise ValueError("mukps needs the parameter m")
        return _mu_kps(states, measure, m)
    try:
        fn = _PROPS[prop]
    except KeyError:
        raise ValueError(f"unknown property {prop!r}") from None
    return fn(states, measure)


# ---------------------------------------------------------------------------
# Frame validity and correspondence
# ---------------------------------------------------------------------------

_MAX_FRAME_VARS = 4


def frame_validates(states: int, measure: Mapping[int, Fraction], formula: Formula,
                    layer: str) -> tuple[bool, dict | None]:
    """Validity of a two-layered formula on the frame (all inner valuations)."""
    names = sorted(vars_of(formula))
    if len(names) > _MAX_FRAME_VARS:
        raise ValueError(f"too many variables for frame validation (> {_MAX_FRAME_VARS})")
    subsets = list(_subsets(states))
    if layer == "QG":
        for combo in product(subsets, repeat=len(names)):
            model = UncertaintyModel(states, dict(zip(names, combo)), measure)
            if eval_qg(model, formula) != ONE:
                return False, {"v": dict(zip(names, combo))}
        return True, None
    if layer in ("MCB", "NMCB"):
        for combo in product(subsets, repeat=2 * len(names)):
            vplus = {p: combo[2 * i] for i, p in enumerate(names)}
            vminus = {p: combo[2 * i + 1] for i, p in enumerate(names)}
            model = BeliefModel(states, vplus, vminus, measure)
            value = eval_layer(model, layer, formula)
            ok = value.truth == ONE if layer == "NMCB" else value == (ONE, ZERO)
            if not ok:
                return False, {"vplus": vplus, "vminus": vminus}
        return True, None
    raise ValueError(f"unknown layer {layer!r}")


#: frame-condition name -> (layer, named formula text, property name)
CORRESPONDENCES: dict[str, tuple[str, str, str]] = {
    "cond_i": ("QG", "delta B(p) <-> snot B(~p)", "cond_i"),
    "cond_ii": ("QG",
                "(snot B(p & q) & snot snot B(p) & snot snot B(q)) -> "
                "(snot delta(B(p | q) -> B(p)) & snot delta(B(p | q) -> B(q)))",
                "cond_ii"),
    "cond_iii": ("QG", "snot B(p) -> delta(B(q) <-> B(p | q))", "cond_iii"),
    "cond_iv": ("QG", "B(Top) & snot B(Bot)", "cond_iv"),
    "mcb_i": ("MCB",
              "(delta1 snot C(p & q) & snot delta1 snot C(p) & snot delta1 snot C(q)) -> "
              "(snot delta1(C(p | q) -> C(p)) & snot delta1(C(p | q) -> C(q)))",
              "mcb_i"),
    "mcb_ii": ("MCB", "delta1 snot C(p) -> delta1(C(q) <-> C(p | q))", "mcb_ii"),
    "mcb_iii": ("NMCB",
                "(deltaN snot C(p & q) & snot snot C(p) & snot snot C(q)) ~> "
                "(snot deltaN(C(p | q) ~> C(p)) & snot deltaN(C(p | q) ~> C(q)))",
                "mcb_iii"),
    "mcb_iv": ("NMCB", "deltaN snot C(p) ~> deltaN(C(q) <-> C(p | q))", "mcb_iv"),
}


def iter_monotone_measures(states: int, denominator: int, *, nontrivial: bool = True,
                           capacity: bool = False) -> Iterator[dict[int, Fraction]]:
    """All monotone measures with values on the given grid, by recursion in
    popcount order (a subset's value is at least each one-smaller subset's)."""
    values = [Fraction(i, denominator) for i in range(denominator + 1)]
    order = sorted(_subsets(states), key=lambda x: (bin(x).count("1"), x))
    full = (1 << states) - 1

    def rec(idx: int, mu: dict[int, Fraction]) -> Iterator[dict[int, Fraction]]:
        if idx == len(order):
            if nontrivial and not mu[full] > mu[0]:
                return
            yield dict(mu)
            return
        x = order[idx]
        lo = max((mu[x & ~(1 << i)] for i in range(states) if x >> i & 1), default=ZERO)
        for val in values:
            if val < lo:
                continue
            if capacity and x == 0 and val != ZERO:
                continue
            if capacity and x == full and val != ONE:
                continue
            mu[x] = val
            yield from rec(idx + 1, mu)
        del mu[x]

    yield from rec(0, {})


def correspondence_test(cond: str, max_states: int, denominator: int) -> dict:
    """Compare frame validity of the named formula with its measure property
    on every monotone nontrivial frame within the bounds."""
    from .syntax import parse

    layer, text, prop = CORRESPONDENCES[cond]
    formula = parse(layer, text)
    checked = 0
    mismatches: list[dict] = []
    for states in range(1, max_states + 1):
        for mu in iter_monotone_measures(states, denominator):
            checked += 1
            valid, _ = frame_validates(states, mu, formula, layer)
            holds, wit = check_property(states, mu, prop)
            if valid != holds:
                mismatches.append({
                    "states": states,
                    "mu": {_mask_key(k): str(v) for k, v in mu.items()},
                    "frame_validates": valid,
                    "property": holds,
                })
    return {"condition": cond, "frames": checked, "mismatches": mismatches,
            "equivalent": not mismatches}


# ---------------------------------------------------------------------------
# Countermodel search
# ---------------------------------------------------------------------------

def _refuted_on(models_value, xi_values: list, alpha_value, layer: str) -> bool:
    if layer == "QG":
        return min(xi_values, default=ONE) > alpha_value
    if layer == "NMCB":
        return min((v.truth for v in xi_values), default=ONE) > alpha_value.truth
    inf1 = min((v.truth for v in xi_values), default=ONE)
    sup2 = max((v.falsity for v in xi_values), default=ZERO)
    return inf1 > alpha_value.truth or sup2 < alpha_value.falsity


def find_frame_countermodel(xi: Sequence[Formula], alpha: Formula, layer: str,
                            max_states: int = 4, denominator: int = 4,
                            *, nontrivial: bool = True,
                            capacity: bool = False) -> UncertaintyModel | BeliefModel | None:
    """Iterative-deepening search for a model refuting ``xi |= alpha``.

    Deterministic order: ascending state count, then grid denominator, then
    lexicographic measures and valuations.  Returns the first hit or None.
    """
    names = sorted(set().union(*(vars_of(f) for f in [*xi, alpha])))
    for states in range(1, max_states + 1):
        for denom in range(1, denominator + 1):
            for mu in iter_monotone_measures(states, denom, nontrivial=nontrivial,
                                             capacity=capacity):
                subsets = list(_subsets(states))
                if layer == "QG":
                    for combo in product(subsets, repeat=len(names)):
                        model = UncertaintyModel(states, dict(zip(names, combo)), mu)
                        if _refuted_on(model, [eval_qg(model, g) for g in xi],
                                       eval_qg(model, alpha), layer):
                            return model
                else:
                    for combo in product(subsets, repeat=2 * len(names)):
                        vplus = {p: combo[2 * i] for i, p in enumerate(names)}
                        vminus = {p: combo[2 * i + 1] for i, p in enumerate(names)}
                        model = BeliefModel(states, vplus, vminus, mu)
                        if _refuted_on(model, [eval_layer(model, layer, g) for g in xi],
                                       eval_layer(model, layer, alpha), layer):
                            return model
    return None


# ---------------------------------------------------------------------------
# Canonical models
# ---------------------------------------------------------------------------

class CanonicalModelError(ValueError):
    """The given valuation cannot come from any measure (reg violated)."""


def canonical_qg_model(e: Mapping[str, Fraction], formulas: Sequence[Formula]) -> UncertaintyModel:
    """Replay the completeness construction: states are variable subsets.

    ``e`` maps printed B-atoms to values and must respect reg-monotonicity
    on the definable sets; elsewhere the measure takes the supremum of
    definable subsets (0 when none).
    """
    atoms: set[Formula] = set()
    for f in formulas:
        atoms |= _modal_atoms(f)
    names = sorted(set().union(*(vars_of(a.children[0]) for a in atoms)) | set())
    states = 1 << len(names)
    if states > MAX_DENSE_STATES:
        raise ValueError("too many inner variables for a dense canonical model")
    v = {p: sum(1 << w for w in range(states) if w >> i & 1)
         for i, p in enumerate(names)}
    stub = UncertaintyModel(states, v, {x: ZERO for x in range(1 << states)})
    defined: dict[int, Fraction] = {}
    for a in sorted(atoms, key=print_formula):
        key = print_formula(a)
        if key not in e:
            raise KeyError(f"no value for atom {key!r}")
        x = truth_set(stub, a.children[0])
        val = unit(e[key])
        if x in defined and defined[x] != val:
            raise CanonicalModelError(
                f"atoms with the same truth set got values {defined[x]} and {val}")
        defined[x] = val
    for x, vx in defined.items():
        for y, vy in defined.items():
            if x & ~y == 0 and vx > vy:
                raise CanonicalModelError(
                    f"values violate reg-monotonicity on {_mask_key(x)} vs {_mask_key(y)}")
    mu: dict[int, Fraction] = {}
    for x in range(1 << states):
        mu[x] = max((vy for y, vy in defined.items() if y & ~x == 0), default=ZERO)
    return UncertaintyModel(states, v, mu)


def canonical_mcb_model(e: Mapping[str, TwistValue], formulas: Sequence[Formula]) -> BeliefModel:
    """Canonical belief model: states are subsets of the literals in play.

    The literal set is closed under the De Morgan negation, so positive and
    negative interpretations of inner formulas are never the empty or full
    set and the end points pi(W)=1, pi(0)=0 can be imposed safely.
    """
    atoms: set[Formula] = set()
    for f in formulas:
        atoms |= _modal_atoms(f)
    names = sorted(set().union(*(vars_of(a.children[0]) for a in atoms)) if atoms else set())
    literals = [var_ for p in names
                for var_ in (mk("BD", "var", var=p), mk("BD", "dneg", mk("BD", "var", var=p)))]
    lit_list = sorted(literals, key=print_formula)
    states = 1 << len(lit_list)
    if states > MAX_DENSE_STATES:
        raise ValueError("too many literals for a dense canonical model")
    vplus: dict[str, int] = {}
    vminus: dict[str, int] = {}
    for i, lit in enumerate(lit_list):
        mask = sum(1 << w for w in range(states) if w >> i & 1)
        if lit.kind == "var":
            vplus[lit.var] = vplus.get(lit.var, 0) | mask
        else:
            vminus[lit.children[0].var] = vminus.get(lit.children[0].var, 0) | mask
    for a in atoms:
        for name in vars_of(a.children[0]):
            vplus.setdefault(name, 0)
            vminus.setdefault(name, 0)
    inner = bd.BDModel(max(states, 1), vplus, vminus)
    defined: dict[int, Fraction] = {}

    def define(x: int, val: Fraction, what: str) -> None:
        if x in defined and defined[x] != val:
            raise CanonicalModelError(f"conflicting values for {what}")
        defined[x] = unit(val)

    for a in sorted(atoms, key=print_formula):
        key = print_formula(a)
        if key not in e:
            raise KeyError(f"no value for atom {key!r}")
        pos, neg = bd.truth_sets(inner, a.children[0])
        define(pos, e[key][0], f"|{print_formula(a.children[0])}|+")
        define(neg, e[key][1], f"|{print_formula(a.children[0])}|-")
    full = (1 << states) - 1
    define(full, ONE, "the full set")
    define(0, ZERO, "the empty set")
    for x, vx in defined.items():
        for y, vy in defined.items():
            if x & ~y == 0 and vx > vy:
                raise CanonicalModelError("values violate monotonicity")
    pi = {x: max((vy for y, vy in defined.items() if y & ~x == 0), default=ZERO)
          for x in range(1 << states)}
    return BeliefModel(states, vplus, vminus, pi)
