"""Root systems, Weyl groups and parabolic combinatorics for the simple types.

Everything here is exact integer arithmetic.  Roots are stored as integer
coordinate vectors in the simple-root basis, coroots in the simple-coroot
basis, and the pairing coroot(root) goes through the Cartan matrix.  Weyl
group elements are identified by their action on simple-coroot coordinates,
which makes equality and hashing cheap.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

DEFAULT_WEYL_CAP = 10**6

# Number of positive roots per type, used to sanity-check enumeration.
_POSITIVE_ROOT_COUNT = {
    "A": lambda r: r * (r + 1) // 2,
    "B": lambda r: r * r,
    "C": lambda r: r * r,
    "D": lambda r: r * (r - 1),
    "E": {6: 36, 7: 63, 8: 120},
    "F": {4: 24},
    "G": {2: 6},
}

_WEYL_ORDER = {
    "A": lambda r: _factorial(r + 1),
    "B": lambda r: 2**r * _factorial(r),
    "C": lambda r: 2**r * _factorial(r),
    "D": lambda r: 2 ** (r - 1) * _factorial(r),
    "E": {6: 51840, 7: 2903040, 8: 696729600},
    "F": {4: 1152},
    "G": {2: 12},
}


def _factorial(n: int) -> int:
    out = 1
    for k in range(2, n + 1):
        out *= k
    return out


class LieError(ValueError):
    """Invalid Cartan data or combinatorial request."""


class EnumerationCapError(LieError):
    """Weyl group larger than the configured enumeration cap."""


@dataclass(frozen=True)
class CartanDatum:
    """A simple type letter, a rank and the Cartan matrix ``a[i][j] = coroot_i(root_j)``."""

    type_letter: str
    rank: int
    cartan_matrix: tuple[tuple[int, ...], ...]

    @property
    def index_set(self) -> range:
        return range(self.rank)

    def pairing(self, i: int, j: int) -> int:
        """Pairing of the i-th simple coroot against the j-th simple root."""
        return self.cartan_matrix[i][j]


def cartan_datum(type_letter: str, rank: int) -> CartanDatum:
    """Build the Cartan datum of the given simple type, validating it."""
    t = type_letter.upper()
    if t not in "ABCDEFG" or len(t) != 1:
        raise LieError(f"unknown type letter {type_letter!r}")
    valid = {
        "A": rank >= 1,
        "B": rank >= 2,
        "C": rank >= 2,
        "D": rank >= 4,
        "E": rank in (6, 7, 8),
        "F": rank == 4,
        "G": rank == 2,
    }[t]
    if not valid:
        raise LieError(f"rank {rank} is not valid for type {t}")
    a = [[0] * rank for _ in range(rank)]
    for i in range(rank):
        a[i][i] = 2
    # chain bonds i <-> i+1, then type-specific corrections
    for i in range(rank - 1):
        a[i][i + 1] = a[i + 1][i] = -1
    if t == "B":
        # last simple root short: coroot_{r-1}(root_r) = -1 stays, coroot_r(root_{r-1}) = -2
        a[rank - 1][rank - 2] = -2
    elif t == "C":
        a[rank - 2][rank - 1] = -2
    elif t == "D":
        a[rank - 2][rank - 1] = a[rank - 1][rank - 2] = 0
        a[rank - 3][rank - 1] = a[rank - 1][rank - 3] = -1
    elif t == "E":
        # chain on nodes 0..rank-2, branch node rank-1 attached to node 2
        a = [[0] * rank for _ in range(rank)]
        for i in range(rank):
            a[i][i] = 2
        for i in range(rank - 2):
            a[i][i + 1] = a[i + 1][i] = -1
        a[2][rank - 1] = a[rank - 1][2] = -1
    elif t == "F":
        a[1][2] = -2
        a[2][1] = -1
    elif t == "G":
        a[0][1] = -3
        a[1][0] = -1
    datum = CartanDatum(t, rank, tuple(tuple(row) for row in a))
    _validate_cartan(datum)
    return datum


def _validate_cartan(datum: CartanDatum) -> None:
    a = datum.cartan_matrix
    r = datum.rank
    for i in range(r):
        if a[i][i] != 2:
            raise LieError("Cartan matrix diagonal must be 2")
        for j in range(r):
            if i != j and a[i][j] > 0:
                raise LieError("off-diagonal Cartan entries must be <= 0")
            if i != j and (a[i][j] == 0) != (a[j][i] == 0):
                raise LieError("Cartan matrix zero pattern must be symmetric")
    if _int_det([list(row) for row in a]) <= 0:
        raise LieError("Cartan matrix must have positive determinant")


def _int_det(m: list[list[int]]) -> int:
    """Fraction-free determinant (Bareiss)."""
    from fractions import Fraction

    n = len(m)
    mat = [[Fraction(x) for x in row] for row in m]
    det = Fraction(1)
    for c in range(n):
        piv = next((k for k in range(c, n) if mat[k][c] != 0), None)
        if piv is None:
            return 0
        if piv != c:
            mat[c], mat[piv] = mat[piv], mat[c]
            det = -det
        det *= mat[c][c]
        for k in range(c + 1, n):
            f = mat[k][c] / mat[c][c]
            for j in range(c, n):
                mat[k][j] -= f * mat[c][j]
    return int(det) if det.denominator == 1 else det


def weyl_order(datum: CartanDatum) -> int:
    spec = _WEYL_ORDER[datum.type_letter]
    return spec(datum.rank) if callable(spec) else spec[datum.rank]


def positive_root_count(datum: CartanDatum) -> int:
    spec = _POSITIVE_ROOT_COUNT[datum.type_letter]
    return spec(datum.rank) if callable(spec) else spec[datum.rank]


@dataclass(frozen=True)
class RootSystem:
    """All positive roots/coroots of a simple type with the root<->coroot bijection.

    ``positive_roots[k]`` and ``positive_coroots[k]`` are matched: they are the
    images of a simple pair under the same Weyl word.
    """

    datum: CartanDatum
    positive_roots: tuple[tuple[int, ...], ...]
    positive_coroots: tuple[tuple[int, ...], ...]

    @property
    def rank(self) -> int:
        return self.datum.rank

    def pairing(self, coroot: Sequence[int], root: Sequence[int]):
        """coroot(root) computed through the Cartan matrix."""
        a = self.datum.cartan_matrix
        return sum(
            coroot[i] * a[i][j] * root[j]
            for i in range(self.rank)
            for j in range(self.rank)
            if coroot[i] and a[i][j] and root[j]
        )

    def reflect_root(self, i: int, root: Sequence[int]) -> tuple[int, ...]:
        """s_i(root) in simple-root coordinates."""
        a = self.datum.cartan_matrix
        c = sum(a[i][j] * root[j] for j in range(self.rank))
        out = list(root)
        out[i] -= c
        return tuple(out)

    def reflect_coroot(self, i: int, coroot: Sequence[int]) -> tuple[int, ...]:
        """s_i(coroot) in simple-coroot coordinates."""
        a = self.datum.cartan_matrix
        c = sum(coroot[k] * a[k][i] for k in range(self.rank))
        out = list(coroot)
        out[i] -= c
        return tuple(out)

    def simple_root(self, i: int) -> tuple[int, ...]:
        return tuple(1 if j == i else 0 for j in range(self.rank))

    simple_coroot = simple_root

    def coroot_of(self, root: tuple[int, ...]) -> tuple[int, ...]:
        try:
            k = self.positive_roots.index(root)
            return self.positive_coroots[k]
        except ValueError:
            neg = tuple(-c for c in root)
            k = self.positive_roots.index(neg)
            return tuple(-c for c in self.positive_coroots[k])

    def height(self, vec: Sequence[int]) -> int:
        return sum(vec)


def build_root_system(datum: CartanDatum) -> RootSystem:
    """Enumerate all positive roots and coroots by reflection closure."""
    rank = datum.rank
    seeds = [(tuple(1 if j == i else 0 for j in range(rank)),) * 2 for i in range(rank)]
    seen: dict[tuple[int, ...], tuple[int, ...]] = {}
    frontier = list(seeds)
    while frontier:
        root, coroot = frontier.pop()
        if root in seen:
            continue
        seen[root] = coroot
        rs_tmp = RootSystem(datum, (), ())
        for i in range(rank):
            new_root = rs_tmp.reflect_root(i, root)
            if all(c >= 0 for c in new_root) and new_root not in seen:
                frontier.append((new_root, rs_tmp.reflect_coroot(i, coroot)))
    roots = sorted(seen, key=lambda v: (sum(v), v))
    system = RootSystem(datum, tuple(roots), tuple(seen[v] for v in roots))
    expected = positive_root_count(datum)
    if len(system.positive_roots) != expected:
        raise LieError(
            f"enumerated {len(system.positive_roots)} positive roots for "
            f"{datum.type_letter}{datum.rank}, expected {expected}"
        )
    return system


@dataclass(frozen=True)
class WeylElement:
    """A Weyl group element, canonically the matrix of its action on simple-coroot coordinates.

    ``word`` is one reduced word (lexicographically smallest among shortest,
    as produced by the group enumeration); the canonical form alone decides
    equality and hashing.
    """

    word: tuple[int, ...]
    coroot_matrix: tuple[tuple[int, ...], ...]  # columns = images of simple coroots

    def __eq__(self, other) -> bool:
        return isinstance(other, WeylElement) and self.coroot_matrix == other.coroot_matrix

    def __hash__(self) -> int:
        return hash(self.coroot_matrix)

    @property
    def length(self) -> int:
        return len(self.word)

    def label(self) -> str:
        return "e" if not self.word else "".join(str(i + 1) for i in self.word)


class WeylGroup:
    """Enumerated Weyl group of a root system, with parabolic helpers."""

    def __init__(self, system: RootSystem, cap: int = DEFAULT_WEYL_CAP):
        self.system = system
        order = weyl_order(system.datum)
        if order > cap:
            raise EnumerationCapError(
                f"|W| = {order} exceeds enumeration cap {cap} for "
                f"{system.datum.type_letter}{system.datum.rank}"
            )
        self._elements = self._enumerate()
        self._by_matrix = {w.coroot_matrix: w for w in self._elements}

    # -- construction -------------------------------------------------

    def _simple_coroot_matrix(self, i: int) -> tuple[tuple[int, ...], ...]:
        rank = self.system.rank
        cols = []
        for j in range(rank):
            cols.append(self.system.reflect_coroot(i, self.system.simple_coroot(j)))
        # store as rows of the matrix acting on coordinate columns: m[k][j] = (s_i a_j^vee)_k
        return tuple(tuple(cols[j][k] for j in range(rank)) for k in range(rank))

    @staticmethod
    def _mat_mul(a, b):
        n = len(a)
        return tuple(
            tuple(sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n)) for i in range(n)
        )

    def _enumerate(self) -> list[WeylElement]:
        rank = self.system.rank
        ident = tuple(tuple(1 if i == j else 0 for j in range(rank)) for i in range(rank))
        gens = [self._simple_coroot_matrix(i) for i in range(rank)]
        found: dict[tuple, tuple[int, ...]] = {ident: ()}
        layer = [ident]
        while layer:
            next_layer = []
            # ascending i with first-assignment-wins makes each stored word the
            # lex-minimal reduced word (smallest left descent first, recursively)
            for i in range(rank):
                for mat in layer:
                    new = self._mat_mul(gens[i], mat)  # s_i * w
                    if new not in found:
                        found[new] = (i,) + found[mat]
                        next_layer.append(new)
            layer = next_layer
        elements = [WeylElement(found[m], m) for m in found]
        elements.sort(key=lambda w: (w.length, w.word))
        return elements

    # -- basic group ops ----------------------------------------------

    @property
    def elements(self) -> list[WeylElement]:
        return list(self._elements)

    def identity(self) -> WeylElement:
        return self._elements[0]

    def simple_reflection(self, i: int) -> WeylElement:
        return self._by_matrix[self._simple_coroot_matrix(i)]

    def from_word(self, word: Iterable[int]) -> WeylElement:
        out = self.identity()
        for i in word:
            out = self.multiply(out, self.simple_reflection(i))
        return out

    def multiply(self, a: WeylElement, b: WeylElement) -> WeylElement:
        return self._by_matrix[self._mat_mul(a.coroot_matrix, b.coroot_matrix)]

    def inverse(self, a: WeylElement) -> WeylElement:
        return self._by_matrix[_int_matrix_inverse(a.coroot_matrix)]

    def act_on_coroot(self, w: WeylElement, coroot: Sequence[int]) -> tuple[int, ...]:
        m = w.coroot_matrix
        n = len(m)
        return tuple(sum(m[k][j] * coroot[j] for j in range(n)) for k in range(n))

    def act_on_root(self, w: WeylElement, root: Sequence[int]) -> tuple[int, ...]:
        out = tuple(root)
        for i in reversed(w.word):
            out = self.system.reflect_root(i, out)
        return out

    def length_by_inversions(self, w: WeylElement) -> int:
        """|{positive roots sent to negative ones}|; equals len(reduced word)."""
        count = 0
        for root in self.system.positive_roots:
            img = self.act_on_root(w, root)
            if all(c <= 0 for c in img):
                count += 1
        return count

    def is_right_descent(self, w: WeylElement, i: int) -> bool:
        img = self.act_on_root(w, self.system.simple_root(i))
        return all(c <= 0 for c in img)

    def is_left_descent(self, w: WeylElement, i: int) -> bool:
        inv = self.inverse(w)
        return self.is_right_descent(inv, i)

    def longest_element(self) -> WeylElement:
        return max(self._elements, key=lambda w: w.length)

    def reflection(self, root: Sequence[int]) -> WeylElement:
        """s_alpha for a (positive) root alpha, as a group element."""
        coroot = self.system.coroot_of(tuple(root))
        rank = self.system.rank
        a = self.system.datum.cartan_matrix
        # s_alpha(a_j^vee-coords u) = u - coroot * <u, alpha> with <u, alpha> = sum u_k a[k][m] root_m
        cols = []
        for j in range(rank):
            u = [1 if k == j else 0 for k in range(rank)]
            c = sum(a[j][m] * root[m] for m in range(rank))
            img = tuple(u[k] - c * coroot[k] for k in range(rank))
            cols.append(img)
        mat = tuple(tuple(cols[j][k] for j in range(rank)) for k in range(rank))
        return self._by_matrix[mat]

    def all_reduced_words(self, w: WeylElement) -> list[tuple[int, ...]]:
        """Every reduced word of w, by left-descent recursion."""
        if w.length == 0:
            return [()]
        out = []
        for i in range(self.system.rank):
            if self.is_left_descent(w, i):
                rest = self.multiply(self.simple_reflection(i), w)
                out.extend((i,) + tail for tail in self.all_reduced_words(rest))
        return out


def _int_matrix_inverse(m):
    from fractions import Fraction

    n = len(m)
    a = [[Fraction(m[i][j]) for j in range(n)] + [Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]
    for c in range(n):
        piv = next(k for k in range(c, n) if a[k][c] != 0)
        a[c], a[piv] = a[piv], a[c]
        p = a[c][c]
        a[c] = [x / p for x in a[c]]
        for k in range(n):
            if k != c and a[k][c] != 0:
                f = a[k][c]
                a[k] = [x - f * y for x, y in zip(a[k], a[c])]
    inv = tuple(tuple(int(a[i][n + j]) for j in range(n)) for i in range(n))
    return inv


@dataclass
class ParabolicData:
    """Minimal coset representatives and the longest-coset data for a parabolic subset."""

    system: RootSystem
    group: WeylGroup
    subset: tuple[int, ...]  # I_P
    minimal_reps: list[WeylElement] = field(default_factory=list)
    w_P: WeylElement | None = None

    @property
    def ell(self) -> int:
        return self.w_P.length

    def parabolic_positive_roots(self) -> list[tuple[int, ...]]:
        """R^+_P: positive roots supported on I_P."""
        ip = set(self.subset)
        return [
            root
            for root in self.system.positive_roots
            if all(c == 0 for j, c in enumerate(root) if j not in ip)
        ]

    def complement_positive_roots(self) -> list[tuple[int, ...]]:
        """R^+ minus R^+_P, the tangent directions of the flag variety."""
        par = set(self.parabolic_positive_roots())
        return [root for root in self.system.positive_roots if root not in par]

    def minimize(self, w: WeylElement) -> WeylElement:
        """The minimal representative of the coset w W_P."""
        out = w
        moved = True
        while moved:
            moved = False
            for i in self.subset:
                if self.group.is_right_descent(out, i):
                    out = self.group.multiply(out, self.group.simple_reflection(i))
                    moved = True
        return out


def weyl_elements(system: RootSystem, cap: int = DEFAULT_WEYL_CAP) -> list[WeylElement]:
    """All Weyl group elements, sorted by (length, word)."""
    return WeylGroup(system, cap=cap).elements


def minimal_reps(system: RootSystem, subset: Sequence[int], cap: int = DEFAULT_WEYL_CAP,
                 group: WeylGroup | None = None) -> ParabolicData:
    """Build ParabolicData for I_P = subset (0-based indices), excluding I_P = I."""
    subset = tuple(sorted(set(subset)))
    if any(i < 0 or i >= system.rank for i in subset):
        raise LieError(f"parabolic subset {subset} out of range for rank {system.rank}")
    if len(subset) == system.rank:
        raise LieError("the full subset I_P = I is excluded")
    group = group or WeylGroup(system, cap=cap)
    reps = [
        w
        for w in group.elements
        if all(not group.is_right_descent(w, i) for i in subset)
    ]
    reps.sort(key=lambda w: (w.length, w.word))

    w0 = group.longest_element()
    sub_elements = [w for w in group.elements if set(w.word) <= set(subset)]
    w0p = max(sub_elements, key=lambda w: w.length)
    wp = group.multiply(w0p, w0)

    data = ParabolicData(system, group, subset, reps, wp)
    expected = len(group.elements) // len(sub_elements)
    if len(reps) != expected:
        raise LieError("minimal coset representative count mismatch")
    if wp.length != len(data.complement_positive_roots()):
        raise LieError("length of w_P does not match |R+ \\ R+_P|")
    return data


def w_P(system: RootSystem, subset: Sequence[int], cap: int = DEFAULT_WEYL_CAP) -> WeylElement:
    return minimal_reps(system, subset, cap=cap).w_P


def beta_sequence(system: RootSystem, word: Sequence[int], group: WeylGroup | None = None,
                  expect: WeylElement | None = None) -> list[tuple[int, ...]]:
    """The coroots beta_k = -s_{i_1}...s_{i_{k-1}}(coroot_{i_k}) of a reduced word.

    Rejects non-reduced input; if ``expect`` is given the word must multiply
    to it.
    """
    group = group or WeylGroup(system)
    w = group.from_word(word)
    if w.length != len(word):
        raise LieError(f"word {tuple(word)} is not reduced")
    if expect is not None and w != expect:
        raise LieError("word does not represent the expected element")
    out = []
    for k, ik in enumerate(word):
        vec = system.simple_coroot(ik)
        for i in reversed(word[:k]):
            vec = system.reflect_coroot(i, vec)
        out.append(tuple(-c for c in vec))
    return out


def inversion_coroots(system: RootSystem, group: WeylGroup, w: WeylElement) -> list[tuple[int, ...]]:
    """{alpha^vee : alpha in w R^+ and -alpha in R^+}, the beta-multiset identity's right side."""
    out = []
    for root, coroot in zip(system.positive_roots, system.positive_coroots):
        img = group.act_on_root(w, root)
        if all(c <= 0 for c in img):
            out.append(tuple(group.act_on_coroot(w, coroot)))
    return out


def serialize(system: RootSystem, parabolic: ParabolicData | None = None) -> str:
    """JSON document with the root data and, optionally, the W^P words."""
    doc = {
        "type": system.datum.type_letter,
        "rank": system.datum.rank,
        "cartan_matrix": [list(r) for r in system.datum.cartan_matrix],
        "positive_roots": [list(r) for r in system.positive_roots],
        "positive_coroots": [list(r) for r in system.positive_coroots],
    }
    if parabolic is not None:
        doc["I_P"] = [i + 1 for i in parabolic.subset]
        doc["WP_words"] = [w.label() for w in parabolic.minimal_reps]
        doc["w_P"] = parabolic.w_P.label()
        doc["ell"] = parabolic.ell
    return json.dumps(doc, indent=2)
