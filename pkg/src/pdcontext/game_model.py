"""The three-state context game, the strategy automata, and the payoff compiler.

The game starts in ``G0`` (associate or break up), moves to the prisoner's
dilemma ``G1`` when both players associate, and falls into the absorbing
loner state ``G2`` as soon as anyone breaks up.  After ``G1`` play returns
to ``G0``.  Survival after ``G0`` is certain; after ``G1`` and ``G2`` it is
``beta``, so survival acts as a discount factor on lifetime payoffs.

Payoffs and survival probabilities are stored in the game as *labels*
(``"r"``, ``"z"``, ``"beta"`` ...) or plain numbers, and are resolved
against :class:`GameParams` only when lifetime payoffs are summed.  That
keeps :func:`play_sequence` purely structural.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence, Union

import numpy as np

from .errors import (
    BetaOutOfRange,
    CycleNotFound,
    IllegalAction,
    MalformedTransition,
    OrderingViolation,
    ValidationError,
)

Label = Union[str, float]
ActionPair = tuple[str, str]

G0, G1, G2 = "G0", "G1", "G2"


@dataclass(frozen=True)
class PdPayoffs:
    t: float = 5.0
    r: float = 3.0
    p: float = 1.0
    s: float = 0.0

    def __post_init__(self):
        check_ordering(self)

    @property
    def is_default(self) -> bool:
        return (self.t, self.r, self.p, self.s) == (5.0, 3.0, 1.0, 0.0)


def check_ordering(pd: PdPayoffs) -> None:
    values = (pd.t, pd.r, pd.p, pd.s)
    if not all(math.isfinite(v) for v in values):
        raise OrderingViolation(f"payoffs must be finite, got {values}")
    if not (pd.t > pd.r > pd.p > pd.s >= 0):
        raise OrderingViolation(
            f"prisoner's dilemma needs t > r > p > s >= 0, got t={pd.t}, r={pd.r}, p={pd.p}, s={pd.s}"
        )


@dataclass(frozen=True)
class GameParams:
    """Payoffs of the dilemma, the loner payoff ``z`` and the survival probability ``beta``."""

    z: float = 2.5
    beta: float = 0.75
    pd: PdPayoffs = field(default_factory=PdPayoffs)
    gamma: float = field(init=False)

    def __post_init__(self):
        check_params(self)
        object.__setattr__(self, "gamma", 1.0 - self.beta)

    def resolve(self, label: Label) -> float:
        """Value of a payoff/survival label; numbers pass through unchanged."""
        if not isinstance(label, str):
            return float(label)
        if label in ("t", "r", "p", "s"):
            return getattr(self.pd, label)
        if label == "z":
            return self.z
        if label == "beta":
            return self.beta
        raise ValidationError(f"unknown payoff label {label!r}")


def check_params(p: GameParams) -> None:
    check_ordering(p.pd)
    if not (isinstance(p.beta, (int, float)) and 0.0 <= p.beta < 1.0):
        raise BetaOutOfRange(f"survival probability must satisfy 0 <= beta < 1, got {p.beta}")
    if not math.isfinite(p.z):
        raise ValidationError(f"outside option z must be finite, got {p.z}")


class Step(NamedTuple):
    state: str
    actions: ActionPair
    payoffs: tuple[Label, Label]
    survival: Label


@dataclass(frozen=True)
class StochasticGame:
    states: tuple[str, ...]
    actions: Mapping[str, tuple[str, ...]]
    payoffs: Mapping[tuple[str, ActionPair], tuple[Label, Label]]
    transitions: Mapping[tuple[str, ActionPair], tuple[float, ...]]
    survival: Mapping[str, Label]
    initial: str = G0

    def action_pairs(self, state: str):
        acts = self.actions[state]
        return itertools.product(acts, acts)


def context_game() -> StochasticGame:
    """The multi-state game: payoffs, deterministic transitions and survival labels."""
    payoffs = {}
    transitions = {}
    for a1, a2 in itertools.product("AB", repeat=2):
        payoffs[(G0, (a1, a2))] = (0.0, 0.0)
        transitions[(G0, (a1, a2))] = (0.0, 1.0, 0.0) if a1 == a2 == "A" else (0.0, 0.0, 1.0)
    pd_table = {
        ("C", "C"): ("r", "r"),
        ("C", "D"): ("s", "t"),
        ("D", "C"): ("t", "s"),
        ("D", "D"): ("p", "p"),
    }
    for pair, pay in pd_table.items():
        payoffs[(G1, pair)] = pay
        transitions[(G1, pair)] = (1.0, 0.0, 0.0)
    payoffs[(G2, ("L", "L"))] = ("z", "z")
    transitions[(G2, ("L", "L"))] = (0.0, 0.0, 1.0)
    return StochasticGame(
        states=(G0, G1, G2),
        actions={G0: ("A", "B"), G1: ("C", "D"), G2: ("L",)},
        payoffs=payoffs,
        transitions=transitions,
        survival={G0: 1.0, G1: "beta", G2: "beta"},
    )


def validate_game(g: StochasticGame, p: GameParams) -> StochasticGame:
    """Return ``g`` unchanged if the game and parameters are consistent, else raise."""
    check_params(p)
    n = len(g.states)
    for state in g.states:
        for pair in g.action_pairs(state):
            key = (state, pair)
            if key not in g.payoffs or key not in g.transitions:
                raise MalformedTransition(f"no payoff/transition for {state} {pair}")
            triple = g.transitions[key]
            if len(triple) != n:
                raise MalformedTransition(f"{state} {pair}: expected {n} probabilities, got {len(triple)}")
            if any(q < 0 or not math.isfinite(q) for q in triple) or abs(sum(triple) - 1.0) > 1e-12:
                raise MalformedTransition(f"{state} {pair}: {triple} is not a probability distribution")
            for label in g.payoffs[key]:
                p.resolve(label)
        q = p.resolve(g.survival[state])
        if not 0.0 <= q <= 1.0:
            raise MalformedTransition(f"survival in {state} is {q}")
    if g.initial not in g.states:
        raise MalformedTransition(f"initial state {g.initial!r} is not a state")
    return g


@dataclass(frozen=True)
class StrategyAutomaton:
    """Deterministic behaviour rule.

    ``action_rule`` maps (internal state, context game) to an action and
    ``update_rule`` maps (internal state, context game, opponent action) to
    the next internal state.  Both must be total over the reachable keys.
    """

    name: str
    initial: str
    action_rule: Mapping[tuple[str, str], str]
    update_rule: Mapping[tuple[str, str, str], str]

    @property
    def internal_states(self) -> frozenset[str]:
        return frozenset(k[0] for k in self.action_rule) | {self.initial}


def _automaton(name, rules, triggers=()):
    """Build an automaton whose internal state only changes on ``triggers``.

    ``rules`` maps internal state -> {context game: action}.
    ``triggers`` holds (internal, game, opponent action, next internal) tuples.
    """
    game = context_game()
    action_rule = {}
    update_rule = {}
    for internal, by_state in rules.items():
        for state in game.states:
            action_rule[(internal, state)] = by_state[state]
            for opp in game.actions[state]:
                update_rule[(internal, state, opp)] = internal
    for internal, state, opp, nxt in triggers:
        update_rule[(internal, state, opp)] = nxt
    return StrategyAutomaton(name, next(iter(rules)), action_rule, update_rule)


# Conditional cooperator: associates and cooperates until it sees D in G1
# or B in G0, then breaks up forever.
SIGMA_C = _automaton(
    "C",
    {"trust": {G0: "A", G1: "C", G2: "L"}, "spurned": {G0: "B", G1: "C", G2: "L"}},
    triggers=[("trust", G1, "D", "spurned"), ("trust", G0, "B", "spurned")],
)
SIGMA_D = _automaton("D", {"defect": {G0: "A", G1: "D", G2: "L"}})
SIGMA_S = _automaton("S", {"sucker": {G0: "A", G1: "C", G2: "L"}})
# The G1 action is never reached because B always ends the association.
SIGMA_B = _automaton("B", {"alone": {G0: "B", G1: "C", G2: "L"}})

STRATEGIES = {a.name: a for a in (SIGMA_C, SIGMA_D, SIGMA_S, SIGMA_B)}
THREE_STRATEGY_SET = (SIGMA_C, SIGMA_D, SIGMA_B)
FOUR_STRATEGY_SET = (SIGMA_C, SIGMA_D, SIGMA_S, SIGMA_B)


def strategy_set(n: int) -> tuple[StrategyAutomaton, ...]:
    if n == 3:
        return THREE_STRATEGY_SET
    if n == 4:
        return FOUR_STRATEGY_SET
    raise ValidationError(f"strategy set must be 3 or 4, got {n}")


@dataclass(frozen=True)
class PlaySequence:
    preperiod: tuple[Step, ...]
    cycle: tuple[Step, ...]

    def rounds(self):
        """Iterate the infinite play."""
        yield from self.preperiod
        while True:
            yield from self.cycle


def play_sequence(a: StrategyAutomaton, b: StrategyAutomaton, g: StochasticGame | None = None) -> PlaySequence:
    """Unroll the joint play of two automata into preperiod + repeating cycle."""
    g = g or context_game()
    state, ia, ib = g.initial, a.initial, b.initial
    seen: dict[tuple[str, str, str], int] = {}
    steps: list[Step] = []
    bound = len(g.states) * len(a.internal_states) * len(b.internal_states) + 1
    for _ in range(bound):
        key = (state, ia, ib)
        if key in seen:
            start = seen[key]
            return PlaySequence(tuple(steps[:start]), tuple(steps[start:]))
        seen[key] = len(steps)
        try:
            act_a = a.action_rule[(ia, state)]
            act_b = b.action_rule[(ib, state)]
        except KeyError as exc:
            raise CycleNotFound(f"action rule is not total: missing {exc}") from None
        legal = g.actions[state]
        for who, act in ((a.name, act_a), (b.name, act_b)):
            if act not in legal:
                raise IllegalAction(f"strategy {who} played {act!r} in {state}; legal actions are {legal}")
        pair = (act_a, act_b)
        steps.append(Step(state, pair, g.payoffs[(state, pair)], g.survival[state]))
        triple = g.transitions[(state, pair)]
        hits = [i for i, q in enumerate(triple) if q == 1.0]
        if len(hits) != 1 or sum(1 for q in triple if q != 0.0) != 1:
            raise CycleNotFound(f"transition {triple} from {state} {pair} is not deterministic")
        try:
            ia, ib = a.update_rule[(ia, state, act_b)], b.update_rule[(ib, state, act_a)]
        except KeyError as exc:
            raise CycleNotFound(f"update rule is not total: missing {exc}") from None
        state = g.states[hits[0]]
    raise CycleNotFound(f"no repeated joint state within {bound} rounds")


def lifetime_payoff(seq: PlaySequence, p: GameParams) -> tuple[float, float]:
    """Expected total payoffs, summed in closed form over preperiod and cycle.

    Round ``k`` is reached with probability equal to the product of the
    survival probabilities of rounds ``0..k-1``.
    """
    check_params(p)
    reach = 1.0
    total = [0.0, 0.0]
    for step in seq.preperiod:
        for i in (0, 1):
            total[i] += reach * p.resolve(step.payoffs[i])
        reach *= p.resolve(step.survival)

    cyc = [0.0, 0.0]
    rho = 1.0
    for step in seq.cycle:
        for i in (0, 1):
            cyc[i] += rho * p.resolve(step.payoffs[i])
        rho *= p.resolve(step.survival)
    if rho >= 1.0:
        if cyc == [0.0, 0.0]:
            return total[0], total[1]
        raise BetaOutOfRange("cycle has survival probability 1; lifetime payoffs diverge")
    scale = reach / (1.0 - rho)
    return total[0] + scale * cyc[0], total[1] + scale * cyc[1]


@dataclass(frozen=True)
class PayoffMatrix:
    strategies: tuple[str, ...]
    entries: np.ndarray

    def __post_init__(self):
        n = len(self.strategies)
        if self.entries.shape != (n, n):
            raise ValidationError(f"{n} strategies need an {n}x{n} matrix, got {self.entries.shape}")

    def to_dict(self) -> dict:
        return {"strategies": list(self.strategies), "entries": self.entries.tolist()}


def compile_payoff_matrix(
    strategies: Sequence[StrategyAutomaton], p: GameParams, g: StochasticGame | None = None
) -> PayoffMatrix:
    g = validate_game(g or context_game(), p)
    n = len(strategies)
    entries = np.empty((n, n))
    for i, j in itertools.product(range(n), repeat=2):
        entries[i, j] = lifetime_payoff(play_sequence(strategies[i], strategies[j], g), p)[0]
    return PayoffMatrix(tuple(s.name for s in strategies), entries)


def closed_form_matrix(p: GameParams, n: int = 3) -> PayoffMatrix:
    """Repeated-game payoff matrix written out by hand, for C, D, [S,] B."""
    t, r, pp, s = p.pd.t, p.pd.r, p.pd.p, p.pd.s
    g, b, z = p.gamma, p.beta, p.z
    if n == 3:
        rows = [[r, s * g + b * z, z], [t * g + b * z, pp, z], [z, z, z]]
        names = ("C", "D", "B")
    elif n == 4:
        rows = [
            [r, s * g + b * z, r, z],
            [t * g + b * z, pp, t, z],
            [r, s, r, z],
            [z, z, z, z],
        ]
        names = ("C", "D", "S", "B")
    else:
        raise ValidationError(f"closed forms exist for 3 or 4 strategies, got {n}")
    return PayoffMatrix(names, np.array(rows, dtype=float) / g)


def parse_config(text: str) -> dict[str, float]:
    """Parse ``key=value`` lines; ``#`` starts a comment."""
    known = {"t", "r", "p", "s", "z", "beta"}
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in known:
            raise ValidationError(f"line {lineno}: unknown key {key!r}")
        try:
            out[key] = float(value)
        except ValueError:
            raise ValidationError(f"line {lineno}: {key} is not a number: {value!r}") from None
    return out


def params_from_mapping(values: Mapping[str, float]) -> GameParams:
    pd = PdPayoffs(**{k: float(values[k]) for k in ("t", "r", "p", "s") if k in values})
    kwargs = {k: float(values[k]) for k in ("z", "beta") if k in values}
    return GameParams(pd=pd, **kwargs)
