"""Equivariant Schubert calculus on a flag variety via fixed-point restrictions.

Classes are held in two representations: Schubert-basis coefficients and
restrictions to the torus-fixed points indexed by minimal coset
representatives.  Restrictions are values of polynomials in the equivariant
parameters h_1..h_r, one variable per simple coroot; a coroot is the linear
form sum(d_i * h_i) of its coordinates.  Billey's subword formula fills the
(triangular) restriction matrix, products are computed pointwise in the
restriction picture, and integration is the fixed-point localization sum.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from .lie import ParabolicData, RootSystem, WeylElement


class SchubertError(ValueError):
    pass


class WallProximityError(SchubertError):
    """Numeric h too close to a root hyperplane for stable localization."""


class TruncationNotice(UserWarning):
    """Nonequivariant product truncated past the top cohomological degree."""


# ---------------------------------------------------------------------------
# polynomials in the equivariant parameters


class EquivPoly:
    """Polynomial in h_1..h_r with exact (or float) coefficients.

    Stored as {exponent tuple: coefficient}.  Each h_i carries cohomological
    degree 2, so a polynomial homogeneous of h-degree d sits in degree 2d.
    """

    __slots__ = ("rank", "terms")

    def __init__(self, rank: int, terms: dict | None = None):
        self.rank = rank
        self.terms = {}
        if terms:
            for e, c in terms.items():
                if c != 0:
                    self.terms[tuple(e)] = c

    @classmethod
    def zero(cls, rank: int) -> "EquivPoly":
        return cls(rank)

    @classmethod
    def const(cls, rank: int, c) -> "EquivPoly":
        return cls(rank, {(0,) * rank: c})

    @classmethod
    def linear_form(cls, coeffs) -> "EquivPoly":
        """The linear form sum(coeffs[i] * h_i), e.g. a coroot."""
        rank = len(coeffs)
        terms = {}
        for i, c in enumerate(coeffs):
            if c:
                e = tuple(1 if j == i else 0 for j in range(rank))
                terms[e] = Fraction(c) if isinstance(c, int) else c
        return cls(rank, terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if not isinstance(other, EquivPoly):
            return self.is_zero() if other == 0 else NotImplemented
        return self.rank == other.rank and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other: "EquivPoly") -> "EquivPoly":
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return EquivPoly(self.rank, out)

    def __sub__(self, other: "EquivPoly") -> "EquivPoly":
        return self + other.scale(-1)

    def scale(self, c) -> "EquivPoly":
        return EquivPoly(self.rank, {e: c * v for e, v in self.terms.items()})

    def __mul__(self, other: "EquivPoly") -> "EquivPoly":
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return EquivPoly(self.rank, out)

    def degree(self) -> int:
        """Maximal h-degree (cohomological degree is twice this)."""
        return max((sum(e) for e in self.terms), default=-1)

    def homogeneous_part(self, d: int) -> "EquivPoly":
        return EquivPoly(self.rank, {e: c for e, c in self.terms.items() if sum(e) == d})

    def is_homogeneous(self) -> bool:
        degs = {sum(e) for e in self.terms}
        return len(degs) <= 1

    def evaluate(self, h):
        """Value at a numeric parameter vector."""
        total = 0
        for e, c in self.terms.items():
            v = c
            for i, p in enumerate(e):
                if p:
                    v = v * h[i] ** p
            total = total + v
        return total

    def constant(self):
        return self.terms.get((0,) * self.rank, 0)

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        bits = []
        for e, c in sorted(self.terms.items(), key=lambda t: (sum(t[0]), t[0])):
            mon = "*".join(f"h{i+1}^{p}" if p > 1 else f"h{i+1}" for i, p in enumerate(e) if p)
            bits.append(f"{c}" + (f"*{mon}" if mon else ""))
        return " + ".join(bits)


# ---------------------------------------------------------------------------
# flag variety fixed-point data


@dataclass
class CohClass:
    """An equivariant class on the flag space, in one or both representations."""

    space: "FlagSpace"
    basis_coeffs: list | None = None  # indexed like space.reps, entries EquivPoly
    restrictions: list | None = None

    def coeffs(self) -> list:
        if self.basis_coeffs is None:
            self.basis_coeffs = self.space.restrictions_to_coeffs(self.restrictions)
        return self.basis_coeffs

    def restr(self) -> list:
        if self.restrictions is None:
            self.restrictions = self.space.coeffs_to_restrictions(self.basis_coeffs)
        return self.restrictions


class FlagSpace:
    """Schubert-calculus engine for one flag variety G/P.

    Wraps the parabolic data with cached Billey restrictions, Euler classes
    of fixed points, the duality solve and the nonequivariant limits.
    """

    def __init__(self, parabolic: ParabolicData, wall_margin: float = 1e-3):
        self.parabolic = parabolic
        self.system: RootSystem = parabolic.system
        self.group = parabolic.group
        self.reps: list[WeylElement] = list(parabolic.minimal_reps)
        self.index = {w: k for k, w in enumerate(self.reps)}
        self.rank = self.system.rank
        self.ell = parabolic.ell
        self.wall_margin = wall_margin
        self.tangent_roots = parabolic.complement_positive_roots()
        self._billey_cache: dict[tuple[WeylElement, WeylElement], EquivPoly] = {}
        self._dual_coeffs: list[list[EquivPoly]] | None = None
        self._e_w: list[EquivPoly] | None = None

    # -- Billey restrictions ------------------------------------------

    def billey_restriction(self, v: WeylElement, w: WeylElement,
                           word: tuple[int, ...] | None = None) -> EquivPoly:
        """Restriction of the Schubert class of v at the fixed point w.

        Sum over reduced subwords of a reduced word of w multiplying to v, of
        the products of reflected simple coroots seen at the subword letters.
        """
        if v not in self.index or w not in self.index:
            raise SchubertError("billey_restriction arguments must be minimal coset representatives")
        if word is None:
            cached = self._billey_cache.get((v, w))
            if cached is not None:
                return cached
            word = w.word
        prefix_coroots = []
        for k in range(len(word)):
            vec = self.system.simple_coroot(word[k])
            for i in reversed(word[:k]):
                vec = self.system.reflect_coroot(i, vec)
            prefix_coroots.append(EquivPoly.linear_form(vec))
        total = EquivPoly.zero(self.rank)
        target = v
        m = len(word)
        for positions in combinations(range(m), v.length):
            g = self.group.identity()
            for p in positions:
                g = self.group.multiply(g, self.group.simple_reflection(word[p]))
            if g != target:
                continue
            # subword must be reduced; length v.length == number of letters ensures it
            prod = EquivPoly.const(self.rank, Fraction(1))
            for p in positions:
                prod = prod * prefix_coroots[p]
            total = total + prod
        if word == w.word:
            self._billey_cache[(v, w)] = total
        return total

    def restriction_matrix(self) -> list[list[EquivPoly]]:
        """B[w-index][v-index] = restriction of class v at fixed point w."""
        return [[self.billey_restriction(v, w) for v in self.reps] for w in self.reps]

    # -- representation changes ---------------------------------------

    def coeffs_to_restrictions(self, coeffs: list) -> list:
        out = []
        for w in self.reps:
            acc = EquivPoly.zero(self.rank)
            for v, c in zip(self.reps, coeffs):
                if isinstance(c, EquivPoly):
                    if c.is_zero():
                        continue
                    acc = acc + c * self.billey_restriction(v, w)
                elif c != 0:
                    acc = acc + self.billey_restriction(v, w).scale(c)
            out.append(acc)
        return out

    def restrictions_to_coeffs(self, restrictions: list) -> list:
        """Triangular solve against the Billey matrix (exact)."""
        coeffs: list[EquivPoly] = [EquivPoly.zero(self.rank)] * len(self.reps)
        residual = list(restrictions)
        # reps sorted by length; класс v restricts at v to a nonzero product of coroots,
        # and vanishes at any w of smaller or equal length except itself
        for k, v in enumerate(self.reps):
            pivot = self.billey_restriction(v, v)
            num = residual[k]
            c = _poly_divide(num, pivot, self.rank)
            coeffs[k] = c
            if not c.is_zero():
                for m, w in enumerate(self.reps):
                    residual[m] = residual[m] - c * self.billey_restriction(v, w)
        for m, r in enumerate(residual):
            if not r.is_zero():
                raise SchubertError(
                    f"restriction data is not in the span of Schubert classes (residual at {self.reps[m].label()})"
                )
        return coeffs

    # -- fixed point weights and integration ---------------------------

    def euler_classes(self) -> list[EquivPoly]:
        """Product of tangent weights {w(-alpha^vee)} at each fixed point w."""
        if self._e_w is None:
            out = []
            for w in self.reps:
                prod = EquivPoly.const(self.rank, Fraction(1))
                for root in self.tangent_roots:
                    coroot = self.system.coroot_of(root)
                    vec = self.group.act_on_coroot(w, tuple(-c for c in coroot))
                    prod = prod * EquivPoly.linear_form(vec)
                out.append(prod)
            self._e_w = out
        return self._e_w

    def fixed_point_weights(self, w: WeylElement) -> list[tuple[int, ...]]:
        """Multiset {w(alpha^vee) : alpha in -(R+ \\ R+_P)} as coroot vectors."""
        out = []
        for root in self.tangent_roots:
            coroot = self.system.coroot_of(root)
            out.append(self.group.act_on_coroot(w, tuple(-c for c in coroot)))
        return out

    def integrate(self, a: CohClass) -> EquivPoly:
        """Localization sum of a|_w / e_w; denominators cancel to a polynomial."""
        restrictions = a.restr()
        euler = self.euler_classes()
        num = EquivPoly.zero(self.rank)
        den = EquivPoly.const(self.rank, Fraction(1))
        for rw, ew in zip(restrictions, euler):
            # num/den += rw/ew
            num = num * ew + rw * den
            den = den * ew
        return _poly_divide(num, den, self.rank)

    # -- products -------------------------------------------------------

    def cup(self, a: CohClass, b: CohClass) -> CohClass:
        ra, rb = a.restr(), b.restr()
        return CohClass(self, restrictions=[x * y for x, y in zip(ra, rb)])

    def schubert_class(self, v: WeylElement) -> CohClass:
        coeffs = [EquivPoly.const(self.rank, Fraction(1)) if w == v else EquivPoly.zero(self.rank)
                  for w in self.reps]
        return CohClass(self, basis_coeffs=coeffs)

    def unit(self) -> CohClass:
        return self.schubert_class(self.reps[0])

    # -- duality ---------------------------------------------------------

    def pairing_matrix(self) -> list[list[EquivPoly]]:
        g = []
        for v in self.reps:
            row = []
            cv = self.schubert_class(v)
            for u in self.reps:
                row.append(self.integrate(self.cup(cv, self.schubert_class(u))))
            g.append(row)
        return g

    def dual_classes(self) -> list[list[EquivPoly]]:
        """Coefficient vectors of the classes dual to the Schubert basis.

        The pairing matrix is unitriangular against complementary lengths, so
        the solve stays polynomial: no rational functions appear.
        """
        if self._dual_coeffs is not None:
            return self._dual_coeffs
        n = len(self.reps)
        g = self.pairing_matrix()
        order = sorted(range(n), key=lambda k: -self.reps[k].length)
        duals = []
        for v_idx in range(n):
            coeffs = [EquivPoly.zero(self.rank) for _ in range(n)]
            # solve sum_u g[u][k] coeffs[u] = delta_{v,k}, eliminating u by descending length
            rhs = [EquivPoly.const(self.rank, Fraction(1)) if k == v_idx else EquivPoly.zero(self.rank)
                   for k in range(n)]
            for u in order:
                # the pairing of u against its complementary-length partner is a nonzero constant
                k_piv = next(
                    k for k in range(n)
                    if self.reps[k].length == self.ell - self.reps[u].length
                    and not g[u][k].is_zero()
                    and g[u][k].degree() == 0
                )
                c = _poly_divide(rhs[k_piv], g[u][k_piv], self.rank)
                coeffs[u] = c
                if not c.is_zero():
                    for k in range(n):
                        rhs[k] = rhs[k] - c * g[u][k]
            if any(not r.is_zero() for r in rhs):
                raise SchubertError("duality solve failed: pairing matrix is not unimodular")
            duals.append(coeffs)
        self._dual_coeffs = duals
        return duals

    def dual_class(self, v: WeylElement) -> CohClass:
        return CohClass(self, basis_coeffs=list(self.dual_classes()[self.index[v]]))

    # -- nonequivariant limit ---------------------------------------------

    def nonequivariant_coeffs(self, a: CohClass) -> list:
        out = []
        for c in a.coeffs():
            if isinstance(c, EquivPoly):
                out.append(c.constant())
            else:
                out.append(c)
        return out

    def cup_nonequivariant(self, ca: list, cb: list) -> list:
        """Product of nonequivariant coefficient vectors, warning on truncation."""
        a = CohClass(self, basis_coeffs=[EquivPoly.const(self.rank, x) for x in ca])
        b = CohClass(self, basis_coeffs=[EquivPoly.const(self.rank, x) for x in cb])
        deg_a = max((2 * w.length for w, x in zip(self.reps, ca) if x), default=0)
        deg_b = max((2 * w.length for w, x in zip(self.reps, cb) if x), default=0)
        if deg_a + deg_b > 2 * self.ell:
            warnings.warn(
                f"product of degrees {deg_a} and {deg_b} truncated past {2*self.ell}",
                TruncationNotice,
                stacklevel=2,
            )
        prod = self.cup(a, b)
        return self.nonequivariant_coeffs(prod)

    def structure_constants(self) -> np.ndarray:
        """Nonequivariant cup structure constants N[u,v,w] as a float array."""
        if getattr(self, "_structure", None) is None:
            n = len(self.reps)
            out = np.zeros((n, n, n))
            for iu, u in enumerate(self.reps):
                cu = self.schubert_class(u)
                for iv, v in enumerate(self.reps):
                    if u.length + v.length > self.ell:
                        continue
                    prod = self.cup(cu, self.schubert_class(v))
                    for iw, c in enumerate(prod.coeffs()):
                        val = c.constant()
                        if val:
                            out[iu, iv, iw] = float(val)
            self._structure = out
        return self._structure

    # -- numeric h mode ----------------------------------------------------

    def check_wall_margin(self, h) -> None:
        scale = max(1.0, float(max(abs(complex(x)) for x in h)) if len(h) else 1.0)
        for root in self.system.positive_roots:
            coroot = self.system.coroot_of(root)
            val = sum(complex(h[i]) * c for i, c in enumerate(coroot))
            if abs(val) < self.wall_margin * scale:
                raise WallProximityError(
                    f"h lies within {self.wall_margin} of the wall of coroot {coroot}"
                )

    def numeric(self, h) -> "NumericFlagData":
        return NumericFlagData(self, h)


class NumericFlagData:
    """All fixed-point data of a FlagSpace evaluated at one numeric h."""

    def __init__(self, space: FlagSpace, h):
        # h = 0 lies on every wall; nonequivariant work must go through the
        # structure-constant path instead of localization
        space.check_wall_margin(h)
        self.space = space
        self.h = np.asarray([complex(x) for x in h])
        n = len(space.reps)
        self.billey = np.zeros((n, n), dtype=complex)
        for iw, w in enumerate(space.reps):
            for iv, v in enumerate(space.reps):
                self.billey[iw, iv] = complex(space.billey_restriction(v, w).evaluate(self.h))
        self.euler = np.array([complex(e.evaluate(self.h)) for e in space.euler_classes()])
        self.dual_vectors = np.array(
            [[complex(c.evaluate(self.h)) for c in row] for row in space.dual_classes()]
        )

    def coeffs_to_restrictions(self, coeffs: np.ndarray) -> np.ndarray:
        return self.billey @ coeffs

    def restrictions_to_coeffs(self, restrictions: np.ndarray) -> np.ndarray:
        return np.linalg.solve(self.billey, restrictions)

    def integrate_restrictions(self, restrictions: np.ndarray) -> complex:
        return complex(np.sum(restrictions / self.euler))

    def cup_matrix(self, g_restr: np.ndarray) -> np.ndarray:
        """Matrix of cup product by the class with the given restriction vector."""
        return np.linalg.solve(self.billey, g_restr[:, None] * self.billey)


def _poly_divide(num: EquivPoly, den: EquivPoly, rank: int) -> EquivPoly:
    """Exact division num/den, raising if the remainder is nonzero."""
    if num.is_zero():
        return EquivPoly.zero(rank)
    if den.degree() == 0:
        return num.scale(Fraction(1, 1) / den.constant())
    # graded lex division; denominators here are products of linear forms
    quotient = EquivPoly.zero(rank)
    rem = num
    den_lead = max(den.terms, key=lambda e: (sum(e), e))
    den_c = den.terms[den_lead]
    while not rem.is_zero():
        lead = max(rem.terms, key=lambda e: (sum(e), e))
        exp = tuple(a - b for a, b in zip(lead, den_lead))
        if any(x < 0 for x in exp):
            raise SchubertError("polynomial division left a remainder")
        c = rem.terms[lead] / den_c
        mono = EquivPoly(rank, {exp: c})
        quotient = quotient + mono
        rem = rem - mono * den
    return quotient


def class_from_restrictions(space: FlagSpace, restrictions: list) -> CohClass:
    """Build a class from fixed-point data; coefficients solve triangularly."""
    cls = CohClass(space, restrictions=list(restrictions))
    cls.coeffs()  # force the consistency check
    return cls


def restriction_table_csv(space: FlagSpace) -> str:
    """CSV of the full Billey restriction table (rows: fixed points)."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["fixed_point"] + [v.label() for v in space.reps])
    for w in space.reps:
        writer.writerow([w.label()] + [repr(space.billey_restriction(v, w)) for v in space.reps])
    return buf.getvalue()


def pairing_matrix_csv(space: FlagSpace) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow([""] + [v.label() for v in space.reps])
    for v, row in zip(space.reps, space.pairing_matrix()):
        writer.writerow([v.label()] + [repr(x) for x in row])
    return buf.getvalue()
