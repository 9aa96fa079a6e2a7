"""Moment closure: the worklist construction of the closed linear moment ODE.

Starting from a target exponent vector alpha, repeatedly apply the generator
to every discovered monomial and enqueue any new monomials appearing in the
image.  If the process closes, the result is the finite linear system

    d/dt m(t) = A m(t) + c,      m(0) from the initial condition,

over the ordered index set S = [alpha, ...].  If the model is not closeable
for alpha (e.g. a cubic drift feeding back into its own variable), the set
grows forever; a budget turns that into a DivergenceReport with a witness
chain of strictly increasing degrees.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .generator import Generator, GeneratorImage
from .model import SdeModel, initial_moment
from .poly import Monomial


@dataclass(frozen=True)
class ClosureBudget:
    """Caps that convert non-termination into a reported divergence."""

    max_monomials: int = 10000
    max_total_degree: int = 200

    def __post_init__(self) -> None:
        if self.max_monomials <= 0 or self.max_total_degree <= 0:
            raise ValueError("budget limits must be positive")


@dataclass(frozen=True)
class DivergenceReport:
    """Budget exhaustion evidence: which cap tripped and a growth witness."""

    exceeded: str  # "monomial-count" | "degree"
    witness_chain: tuple[Monomial, ...]
    visited_count: int

    def describe(self) -> str:
        shown = self.witness_chain
        if len(shown) > 8:
            head = " -> ".join(str(m) for m in shown[:6])
            chain = f"{head} -> ... -> {shown[-1]} ({len(shown)} monomials)"
        else:
            chain = " -> ".join(str(m) for m in shown)
        return (
            f"closure exceeded the {self.exceeded} budget after visiting "
            f"{self.visited_count} monomials; growth witness: {chain}"
        )


@dataclass(frozen=True)
class MomentSystem:
    """The closed linear ODE dm/dt = A m + c with m(0), over ordered indices."""

    model_name: str
    indices: tuple[Monomial, ...]
    matrix_a: tuple[tuple[Fraction, ...], ...]
    vector_c: tuple[Fraction, ...]
    m0: tuple[Fraction, ...]
    seed_count: int = 1

    @property
    def dimension(self) -> int:
        return len(self.indices)

    def index_of(self, mono: Monomial) -> int:
        try:
            return self.indices.index(mono)
        except ValueError:
            raise KeyError(f"monomial {mono} is not in the closure") from None

    def to_json_dict(self) -> dict:
        return {
            "model": self.model_name,
            "indices": [list(m.exponents) for m in self.indices],
            "matrix": [[str(v) for v in row] for row in self.matrix_a],
            "constant": [str(v) for v in self.vector_c],
            "initial": [str(v) for v in self.m0],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)


def _witness_chain(
    offender: Monomial, parents: dict[Monomial, Monomial | None]
) -> tuple[Monomial, ...]:
    """Parent-link chain ending at `offender`, trimmed to the maximal suffix
    with strictly increasing total degree (the Example-2-style growth tail)."""
    chain = [offender]
    node = parents.get(offender)
    while node is not None:
        chain.append(node)
        node = parents.get(node)
    chain.reverse()
    start = len(chain) - 1
    while start > 0 and chain[start - 1].degree < chain[start].degree:
        start -= 1
    return tuple(chain[start:])


def build_closure_multi(
    model: SdeModel,
    alphas: Sequence[Monomial],
    budget: ClosureBudget | None = None,
    order: str = "fifo",
) -> MomentSystem | DivergenceReport:
    """Closure seeded by several target monomials at once (their union).

    The seeds occupy the leading positions of `indices` in the given order;
    `seed_count` records how many there are.
    """
    if budget is None:
        budget = ClosureBudget()
    if order not in ("fifo", "lifo"):
        raise ValueError(f"unknown worklist order {order!r}")
    seeds: list[Monomial] = []
    for alpha in alphas:
        if alpha.dimension != model.dimension:
            raise ValueError(
                f"target {alpha} has dimension {alpha.dimension}, model has {model.dimension}"
            )
        if alpha.degree < 1:
            raise ValueError("target monomials must have total degree >= 1")
        if alpha not in seeds:
            seeds.append(alpha)
    if not seeds:
        raise ValueError("at least one target monomial is required")
    if len(seeds) > budget.max_monomials or any(
        s.degree > budget.max_total_degree for s in seeds
    ):
        raise ValueError("targets already exceed the closure budget")

    gen = Generator(model)
    discovered: list[Monomial] = list(seeds)
    member = set(seeds)
    parents: dict[Monomial, Monomial | None] = {s: None for s in seeds}
    images: dict[Monomial, GeneratorImage] = {}
    worklist: deque[Monomial] = deque(seeds)
    pop = worklist.popleft if order == "fifo" else worklist.pop

    while worklist:
        beta = pop()
        image = gen.apply(beta)
        images[beta] = image
        # New monomials enter in descending graded-lex order within one image.
        for gamma in sorted(image.linear_part, reverse=True):
            if gamma in member:
                continue
            if gamma.degree > budget.max_total_degree:
                parents[gamma] = beta
                return DivergenceReport(
                    exceeded="degree",
                    witness_chain=_witness_chain(gamma, parents),
                    visited_count=len(discovered),
                )
            if len(discovered) >= budget.max_monomials:
                parents[gamma] = beta
                return DivergenceReport(
                    exceeded="monomial-count",
                    witness_chain=_witness_chain(gamma, parents),
                    visited_count=len(discovered),
                )
            member.add(gamma)
            parents[gamma] = beta
            discovered.append(gamma)
            worklist.append(gamma)

    indices = tuple(discovered)
    position = {mono: i for i, mono in enumerate(indices)}
    size = len(indices)
    matrix = []
    constants = []
    for beta in indices:
        row = [Fraction(0)] * size
        image = images[beta]
        for gamma, coeff in image.linear_part.items():
            row[position[gamma]] = coeff
        matrix.append(tuple(row))
        constants.append(image.constant)
    m0 = tuple(initial_moment(model.initial, mono) for mono in indices)
    return MomentSystem(
        model_name=model.name,
        indices=indices,
        matrix_a=tuple(matrix),
        vector_c=tuple(constants),
        m0=m0,
        seed_count=len(seeds),
    )


def build_closure(
    model: SdeModel,
    alpha: Monomial,
    budget: ClosureBudget | None = None,
    order: str = "fifo",
) -> MomentSystem | DivergenceReport:
    """Close the moment system for a single target monomial alpha."""
    return build_closure_multi(model, [alpha], budget=budget, order=order)


def system_rows(
    ms: MomentSystem,
) -> list[tuple[Monomial, dict[Monomial, Fraction], Fraction]]:
    """Human-auditable dump: (index, {index: coefficient}, constant) per row."""
    rows = []
    for r, beta in enumerate(ms.indices):
        combo = {
            ms.indices[s]: ms.matrix_a[r][s]
            for s in range(ms.dimension)
            if ms.matrix_a[r][s]
        }
        rows.append((beta, combo, ms.vector_c[r]))
    return rows


def check_closedness(model: SdeModel, ms: MomentSystem) -> bool:
    """Post-hoc verification of the closedness invariant (used by tests/CLI).

    Every monomial in every generator image must be present in the index set,
    with matrix/constant entries exactly equal to the image coefficients.
    """
    gen = Generator(model)
    position = {mono: i for i, mono in enumerate(ms.indices)}
    if len(position) != len(ms.indices):
        return False
    for r, beta in enumerate(ms.indices):
        image = gen.apply(beta)
        if image.constant != ms.vector_c[r]:
            return False
        expected = dict(image.linear_part)
        for s in range(ms.dimension):
            coeff = ms.matrix_a[r][s]
            if coeff != expected.pop(ms.indices[s], Fraction(0)):
                return False
        if expected:  # image mentions a monomial outside the closure
            return False
    return True
