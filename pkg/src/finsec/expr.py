"""Operator expression trees.

Sequence-level expressions describe elements of the algebra generated by
the constant sequences (aI) with a piecewise constant, (W0(b)) with b a
composite symbol, and the truncation sequence (P_tau).  Concrete-operator
expressions are the same trees without the ``ProjSeq`` node; they are what
the spatial-image homomorphisms produce and what the discretizer consumes.

``Prod`` children compose left to right as operators: Prod(A, B) applies B
first, i.e. its matrix is mat(A) @ mat(B).

A light normalizer expands any concrete expression into a sum of products
of atoms {Mult(step), Conv(symbol)} with complex coefficients.  Adjacent
atoms of the same kind are merged through the step/symbol algebra, and
constant atoms are folded into the coefficient; multiplication and
convolution atoms are never commuted past each other.
"""

from __future__ import annotations

from dataclasses import dataclass

from .symbols import PCSOSymbol, StepFunction

__all__ = [
    "OperatorExpr",
    "Ident",
    "ProjSeq",
    "Mult",
    "Conv",
    "Scale",
    "Sum",
    "Prod",
    "contains_projseq",
    "conv_symbols",
    "normalize",
    "NormalTerm",
]


class OperatorExpr:
    """Base class for expression nodes."""

    def __add__(self, other):
        return Sum((self, other))

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return Scale(complex(other), self)
        return Prod((self, other))

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return Scale(complex(other), self)
        return Prod((other, self))

    def __sub__(self, other):
        return Sum((self, Scale(-1.0 + 0j, other)))


@dataclass(frozen=True)
class Ident(OperatorExpr):
    pass


@dataclass(frozen=True)
class ProjSeq(OperatorExpr):
    """The truncation sequence (P_tau); sequence-level only."""


@dataclass(frozen=True)
class Mult(OperatorExpr):
    """Multiplication by a piecewise constant function."""

    coeff: StepFunction


@dataclass(frozen=True)
class Conv(OperatorExpr):
    """Convolution with a composite multiplier symbol."""

    symbol: PCSOSymbol


@dataclass(frozen=True)
class Scale(OperatorExpr):
    factor: complex
    child: OperatorExpr


@dataclass(frozen=True)
class Sum(OperatorExpr):
    children: tuple[OperatorExpr, ...]


@dataclass(frozen=True)
class Prod(OperatorExpr):
    children: tuple[OperatorExpr, ...]


def contains_projseq(expr: OperatorExpr) -> bool:
    if isinstance(expr, ProjSeq):
        return True
    if isinstance(expr, Scale):
        return contains_projseq(expr.child)
    if isinstance(expr, (Sum, Prod)):
        return any(contains_projseq(c) for c in expr.children)
    return False


def conv_symbols(expr: OperatorExpr) -> list[PCSOSymbol]:
    """All convolution symbols appearing in the tree, in syntactic order."""
    out: list[PCSOSymbol] = []

    def walk(e):
        if isinstance(e, Conv):
            out.append(e.symbol)
        elif isinstance(e, Scale):
            walk(e.child)
        elif isinstance(e, (Sum, Prod)):
            for c in e.children:
                walk(c)

    walk(expr)
    return out


# ---------------------------------------------------------------------------
# sum-of-products normal form
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NormalTerm:
    """coeff * atom_1 ... atom_k with atoms in {Mult, Conv}."""

    coeff: complex
    atoms: tuple[OperatorExpr, ...]


def normalize(expr: OperatorExpr) -> list[NormalTerm]:
    """Expand a concrete expression to sum-of-products normal form.

    Raises ValueError on ProjSeq: the normal form is for concrete
    operators only.
    """
    terms = _expand(expr)
    return [_simplify(t) for t in terms]


def _expand(expr: OperatorExpr) -> list[NormalTerm]:
    if isinstance(expr, ProjSeq):
        raise ValueError("cannot normalize a sequence-level expression")
    if isinstance(expr, Ident):
        return [NormalTerm(1.0 + 0j, ())]
    if isinstance(expr, (Mult, Conv)):
        return [NormalTerm(1.0 + 0j, (expr,))]
    if isinstance(expr, Scale):
        return [NormalTerm(expr.factor * t.coeff, t.atoms) for t in _expand(expr.child)]
    if isinstance(expr, Sum):
        out: list[NormalTerm] = []
        for c in expr.children:
            out.extend(_expand(c))
        return out
    if isinstance(expr, Prod):
        acc = [NormalTerm(1.0 + 0j, ())]
        for c in expr.children:
            rhs = _expand(c)
            acc = [
                NormalTerm(a.coeff * b.coeff, a.atoms + b.atoms)
                for a in acc
                for b in rhs
            ]
        return acc
    raise TypeError(f"not an operator expression: {expr!r}")


def _simplify(term: NormalTerm) -> NormalTerm:
    coeff = term.coeff
    atoms: list[OperatorExpr] = []
    for atom in term.atoms:
        # fold constants into the coefficient
        if isinstance(atom, Mult) and atom.coeff.is_constant():
            coeff *= atom.coeff.values[0]
            continue
        if isinstance(atom, Conv):
            c = atom.symbol.constant_value()
            if c is not None:
                coeff *= c
                continue
        if atoms and type(atoms[-1]) is type(atom):
            prev = atoms.pop()
            if isinstance(atom, Mult):
                merged = Mult(prev.coeff * atom.coeff)
            else:
                merged = Conv(prev.symbol * atom.symbol)
            # the merge may have produced a constant; re-run the fold
            if isinstance(merged, Mult) and merged.coeff.is_constant():
                coeff *= merged.coeff.values[0]
            elif isinstance(merged, Conv) and merged.symbol.constant_value() is not None:
                coeff *= merged.symbol.constant_value()
            else:
                atoms.append(merged)
            continue
        atoms.append(atom)
    return NormalTerm(coeff, tuple(atoms))
