"""Infinitesimal generator of a polynomial diffusion, applied to monomials.

For dX = b(X) dt + sigma(X) dW the generator acts on smooth f as

    A f = sum_i b_i d_i f + 1/2 sum_{i,j} (sigma sigma^T)_{ij} d_i d_j f.

Applied to a monomial x^beta the result is again a polynomial; splitting off
the constant term gives the row of the moment ODE system:

    d/dt E[X^beta] = sum_gamma a_{beta gamma} E[X^gamma] + c_beta.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Mapping

from .model import SdeModel
from .poly import Monomial, Polynomial


@dataclass(frozen=True)
class GeneratorImage:
    """A x^beta as linear part over non-constant monomials plus a constant."""

    linear_part: Mapping[Monomial, Fraction]
    constant: Fraction

    def as_polynomial(self, dimension: int) -> Polynomial:
        terms: dict[Monomial, Fraction] = dict(self.linear_part)
        if self.constant:
            terms[Monomial.constant(dimension)] = self.constant
        return Polynomial(dimension, terms)


def diffusion_product(model: SdeModel) -> tuple[tuple[Polynomial, ...], ...]:
    """The n x n matrix sigma sigma^T, entry (i,j) = sum_k sigma_ik * sigma_jk."""
    n = model.dimension
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = Polynomial.zero(n)
            for k in range(model.brownian_dim):
                acc = acc + model.diffusion[i][k] * model.diffusion[j][k]
            row.append(acc)
        rows.append(tuple(row))
    return tuple(rows)


class Generator:
    """Caches sigma sigma^T so repeated applications on one model stay cheap."""

    def __init__(self, model: SdeModel):
        self.model = model
        self._ssT = diffusion_product(model)
        self._half = Fraction(1, 2)

    def apply(self, beta: Monomial) -> GeneratorImage:
        model = self.model
        n = model.dimension
        if beta.dimension != n:
            raise ValueError(f"monomial {beta} has dimension {beta.dimension}, model has {n}")
        f = Polynomial.monomial(beta)
        image = Polynomial.zero(n)
        firsts = [f.partial(i) for i in range(n)]
        for i in range(n):
            if not firsts[i].is_zero():
                image = image + model.drift[i] * firsts[i]
        # Full ordered double sum, relying on symmetry of sigma sigma^T.
        for i in range(n):
            if firsts[i].is_zero():
                continue
            for j in range(n):
                second = firsts[i].partial(j)
                if second.is_zero():
                    continue
                entry = self._ssT[i][j]
                if not entry.is_zero():
                    image = image + self._half * (entry * second)
        constant = image.constant_term()
        linear = {
            mono: coeff for mono, coeff in image.terms.items() if mono.degree > 0
        }
        return GeneratorImage(linear_part=MappingProxyType(linear), constant=constant)

    def apply_polynomial(self, p: Polynomial) -> Polynomial:
        """Extension of A to polynomials by linearity."""
        acc = Polynomial.zero(p.dimension)
        for mono, coeff in p.terms.items():
            acc = acc + coeff * self.apply(mono).as_polynomial(p.dimension)
        return acc


def apply_generator(model: SdeModel, beta: Monomial) -> GeneratorImage:
    return Generator(model).apply(beta)
