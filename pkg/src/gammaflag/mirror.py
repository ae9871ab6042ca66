"""The parabolic geometric crystal of a type A flag variety, as matrices.

Everything lives in (r+1)x(r+1) matrices for the adjoint group, so equality
is always up to a scalar.  Exact arithmetic (Fractions) drives the chart
recovery, positivity checks and crystal identities; the oscillatory
integrals evaluate the recovered Laurent closed forms with numpy.

The chart of a reduced word i sends (t, a) to t * twist(x_{i_1}(a_1) ...
x_{i_l}(a_l)), the twist being the Bruhat factorization b from
x * wbar^{-1} = b * u followed by the inversion anti-automorphism.  Its
superpotential is the sum of the chart coordinates plus one positive
Laurent polynomial per quantum direction, recovered once by exact
interpolation and reused by all quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product

import numpy as np

from .lie import beta_sequence
from .schubert import FlagSpace


class MirrorError(ValueError):
    pass


class CellMembershipError(MirrorError):
    """Matrix not in the required Bruhat cell / big cell."""


# ---------------------------------------------------------------------------
# small exact matrix helpers (entries Fraction, float or complex)


def mat_mul(a, b):
    n = len(a)
    return [[sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n)] for i in range(n)]


def mat_identity(n, one=Fraction(1)):
    zero = one - one
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def mat_inv(m):
    n = len(m)
    one = m[0][0] / m[0][0] if m[0][0] != 0 else Fraction(1)
    aug = [list(row) + [one if i == j else one - one for j in range(n)] for i, row in enumerate(m)]
    for c in range(n):
        piv = next((k for k in range(c, n) if aug[k][c] != 0), None)
        if piv is None:
            raise MirrorError("singular matrix")
        aug[c], aug[piv] = aug[piv], aug[c]
        p = aug[c][c]
        aug[c] = [x / p for x in aug[c]]
        for k in range(n):
            if k != c and aug[k][c] != 0:
                f = aug[k][c]
                aug[k] = [x - f * y for x, y in zip(aug[k], aug[c])]
    return [row[n:] for row in aug]


def proportional(a, b, tol: float = 0.0) -> bool:
    """Equality in the adjoint group: a = scalar * b."""
    n = len(a)
    ratio = None
    for i in range(n):
        for j in range(n):
            if b[i][j] != 0:
                ratio = a[i][j] / b[i][j]
                break
        if ratio is not None:
            break
    if ratio is None:
        return all(all(x == 0 for x in row) for row in a)
    for i in range(n):
        for j in range(n):
            diff = a[i][j] - ratio * b[i][j]
            if tol == 0.0:
                if diff != 0:
                    return False
            elif abs(complex(diff)) > tol * max(1.0, abs(complex(ratio))):
                return False
    return True


def gauss_decompose(g):
    """g = u_plus * t * u_minus (trailing principal minors must not vanish)."""
    n = len(g)
    rev = list(range(n - 1, -1, -1))
    flipped = [[g[i][j] for j in rev] for i in rev]
    lo, di, up = _ldu(flipped)
    u_plus = [[lo[i][j] for j in rev] for i in rev]
    t = [[di[i][j] for j in rev] for i in rev]
    u_minus = [[up[i][j] for j in rev] for i in rev]
    return u_plus, t, u_minus


def gauss_decompose_ltu(g):
    """g = u_minus * t * u_plus (leading principal minors must not vanish)."""
    return _ldu(g)


def _ldu(g):
    n = len(g)
    zero = g[0][0] - g[0][0]
    work = [list(row) for row in g]
    lo = mat_identity(n, one=_unit_like(g))
    for c in range(n):
        if work[c][c] == 0:
            raise CellMembershipError(f"principal minor {c + 1} vanishes; not in the big cell")
        for r in range(c + 1, n):
            f = work[r][c] / work[c][c]
            lo[r][c] = f
            if f != 0:
                for j in range(c, n):
                    work[r][j] = work[r][j] - f * work[c][j]
    di = [[work[i][i] if i == j else zero for j in range(len(g))] for i in range(n)]
    up = [[work[i][j] / work[i][i] if j >= i else zero for j in range(n)] for i in range(n)]
    return lo, di, up


def _unit_like(g):
    for row in g:
        for x in row:
            if x != 0:
                return x / x
    return Fraction(1)


def total_nonneg_mod_scalar(m, tol: float = 0.0) -> bool:
    """Total nonnegativity of a matrix representative, up to one global sign."""
    n = len(m)
    for sign in (1, -1):
        ok = True
        for k in range(1, n + 1):
            for rows in combinations(range(n), k):
                for cols in combinations(range(n), k):
                    minor = _det([[sign * m[i][j] for j in cols] for i in rows])
                    val = minor if tol == 0.0 else complex(minor).real
                    if (tol == 0.0 and minor < 0) or (tol != 0.0 and val < -tol):
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                break
        if ok:
            return True
    return False


def _det(m):
    n = len(m)
    if n == 1:
        return m[0][0]
    work = [list(r) for r in m]
    det = _unit_like(m)
    sign = 1
    for c in range(n):
        piv = next((k for k in range(c, n) if work[k][c] != 0), None)
        if piv is None:
            return m[0][0] - m[0][0]
        if piv != c:
            work[c], work[piv] = work[piv], work[c]
            sign = -sign
        det = det * work[c][c]
        for k in range(c + 1, n):
            f = work[k][c] / work[c][c]
            for j in range(c, n):
                work[k][j] = work[k][j] - f * work[c][j]
    return det * sign


# ---------------------------------------------------------------------------
# the mirror of one type A flag space


@dataclass
class LaurentData:
    """One Laurent polynomial as parallel arrays of exponents and coefficients."""

    exponents: np.ndarray  # shape (terms, ell), integer
    coefficients: np.ndarray  # shape (terms,), float


class MirrorSpace:
    """Matrix realization of the parabolic geometric crystal for type A."""

    def __init__(self, space: FlagSpace, exponent_bound: int = 3):
        if space.system.datum.type_letter != "A":
            raise MirrorError("the matrix mirror is implemented for type A only")
        self.space = space
        self.system = space.system
        self.group = space.group
        self.rank = space.rank
        self.n = space.rank + 1
        self.subset = set(space.parabolic.subset)
        self.divisor_indices = [i for i in range(self.rank) if i not in self.subset]
        self.word = space.parabolic.w_P.word  # pinned reduced word
        self.ell = space.ell
        self.betas = beta_sequence(self.system, self.word, group=self.group)
        self.wbar = self._wbar(self.word)
        self.wbar_inv = mat_inv(self.wbar)
        # bar representative of the INVERSE element; differs from the matrix
        # inverse by a torus sign, which is not central once the rank exceeds one
        self.wbar_of_inverse = self._wbar(tuple(reversed(self.word)))
        self._charts: dict | None = None
        self._exponent_bound = exponent_bound

    # -- generators -----------------------------------------------------

    def x_elem(self, i: int, a):
        m = mat_identity(self.n, one=_coerce_one(a))
        m[i][i + 1] = a
        return m

    def y_elem(self, i: int, a):
        m = mat_identity(self.n, one=_coerce_one(a))
        m[i + 1][i] = a
        return m

    def coweight_elem(self, i: int, c):
        one = _coerce_one(c)
        m = mat_identity(self.n, one=one)
        m[i][i] = c
        m[i + 1][i + 1] = one / c
        return m

    def sbar(self, i: int):
        m = mat_identity(self.n)
        m[i][i] = Fraction(0)
        m[i + 1][i + 1] = Fraction(0)
        m[i][i + 1] = Fraction(-1)
        m[i + 1][i] = Fraction(1)
        return m

    def _wbar(self, word):
        m = mat_identity(self.n)
        for i in word:
            m = mat_mul(m, self.sbar(i))
        return m

    def torus(self, t_coords):
        """Center-of-Levi element with alpha_i(t) = t_coords (divisor order)."""
        alpha = {}
        for i in range(self.rank):
            alpha[i] = _coerce_one(t_coords[0])
        for i, v in zip(self.divisor_indices, t_coords):
            alpha[i] = v
        one = _coerce_one(t_coords[0])
        diag = [one] * self.n
        for i in range(self.n - 2, -1, -1):
            diag[i] = diag[i + 1] * alpha[i]
        m = mat_identity(self.n, one=one)
        for i in range(self.n):
            m[i][i] = diag[i]
        return m

    def iota(self, g):
        """The anti-automorphism fixing the x_i and y_i and inverting the torus."""
        inv = mat_inv(g)
        return [
            [inv[i][j] * ((-1) ** ((i + j) % 2)) for j in range(self.n)]
            for i in range(self.n)
        ]

    # -- torus charts -----------------------------------------------------

    def theta_plus(self, a_coords, word=None):
        word = self.word if word is None else word
        m = mat_identity(self.n, one=_coerce_one(a_coords[0]))
        for i, a in zip(word, a_coords):
            m = mat_mul(m, self.x_elem(i, a))
        return m

    def theta_minus(self, a_coords, word=None):
        word = self.word if word is None else word
        m = mat_identity(self.n, one=_coerce_one(a_coords[0]))
        for i, a in zip(word, a_coords):
            m = mat_mul(m, mat_mul(self.y_elem(i, a), self.coweight_elem(i, 1 / a)))
        return m

    def twist_map(self, x):
        """The isomorphism from the unipotent cell onto the opposite Bruhat cell."""
        g = mat_mul(x, self.wbar_of_inverse)
        try:
            lo, di, up = gauss_decompose_ltu(g)
        except CellMembershipError as exc:
            raise CellMembershipError(f"twist factorization failed: {exc}") from exc
        b = mat_mul(lo, di)
        return self.iota(b)

    def chart_point(self, t_coords, a_coords, word=None):
        """The chart: t times the twisted positive-unipotent word product."""
        return mat_mul(self.torus(t_coords), self.twist_map(self.theta_plus(a_coords, word)))

    # -- crystal structure maps ---------------------------------------------

    def crystal_decompose(self, x):
        """(u1, t, u2) with x = u1 * t * wbar * u2; raises off the cell."""
        g = mat_mul(self.wbar_inv, x)
        lo, di, up = gauss_decompose_ltu(g)
        u1 = mat_mul(self.wbar, mat_mul(lo, self.wbar_inv))
        t = mat_mul(self.wbar, mat_mul(di, self.wbar_inv))
        return u1, t, up

    def superpotential(self, x):
        """Decoration: additive characters of the two unipotent parts."""
        u1, _, u2 = self.crystal_decompose(x)
        chi = sum(u1[i][i + 1] for i in range(self.n - 1))
        chi = chi + sum(u2[i][i + 1] for i in range(self.n - 1))
        return chi

    def highest_weight_values(self, x):
        """alpha_i(pi(x)) for the divisor directions."""
        _, t, _ = self.crystal_decompose(x)
        return [t[i][i] / t[i + 1][i + 1] for i in self.divisor_indices]

    def weight_diag_values(self, x):
        """alpha_i(gamma(x)) for all i, read off the triangular diagonal."""
        return [x[i][i] / x[i + 1][i + 1] for i in range(self.rank)]

    def weight_map_chart(self, t_coords, a_coords):
        """Chart closed form of the weight map: t times the beta-monomials."""
        out = []
        for i in range(self.rank):
            val = _coerce_one(a_coords[0])
            if i in self.divisor_indices:
                val = val * t_coords[self.divisor_indices.index(i)]
            for beta, a in zip(self.betas, a_coords):
                # alpha_i(beta^vee(a)) = a ** <beta^vee, alpha_i>
                e = sum(b * self.system.datum.cartan_matrix[k][i] for k, b in enumerate(beta))
                val = val * a**e
            out.append(val)
        return out

    def phi(self, i: int, x):
        if x[i][i] == 0:
            raise MirrorError("phi undefined: zero diagonal")
        return x[i + 1][i] / x[i][i]

    def epsilon(self, i: int, x):
        return x[i + 1][i] / x[i + 1][i + 1]

    def e_crystal(self, i: int, c, x):
        """The multiplicative crystal action e_i^c."""
        ph = self.phi(i, x)
        ep = self.epsilon(i, x)
        if ph == 0 or ep == 0:
            raise MirrorError(f"crystal action undefined: phi_{i + 1} vanishes")
        one = _coerce_one(c)
        left = self.x_elem(i, (c - one) / ph)
        right = self.x_elem(i, (one / c - one) / ep)
        return mat_mul(left, mat_mul(x, right))

    def weyl_crystal(self, i: int, x):
        """The birational Weyl action s_i = e_i at the inverse diagonal ratio."""
        ratio = x[i][i] / x[i + 1][i + 1]
        return self.e_crystal(i, 1 / ratio, x)

    # -- the Appendix-style coordinate route ---------------------------------

    def y_form_matrix(self, a_coords, t_diag):
        """Product of y_i(a'_k) along the pinned word times a torus element."""
        m = mat_identity(self.n, one=_coerce_one(a_coords[0]))
        for i, a in zip(self.word, a_coords):
            m = mat_mul(m, self.y_elem(i, a))
        return mat_mul(m, t_diag)

    def e_crystal_coordinates(self, i: int, c, a_coords, t_diag):
        """Coordinate-level crystal action on the y-form data.

        Returns the interleaved generator data (new a, b factors) and the
        resulting matrix; positivity is manifest when c and the inputs are
        positive.
        """
        positions = [k for k, letter in enumerate(self.word) if letter == i]
        if not positions:
            raise MirrorError("letter absent from the pinned word")
        total = sum(a_coords[k] for k in positions)
        one = _coerce_one(c)
        c_run = (c - one) / total
        new_a = list(a_coords)
        b_factors = [one] * len(a_coords)
        for k, letter in enumerate(self.word):
            if letter != i:
                continue
            denom = one + a_coords[k] * c_run
            new_a[k] = a_coords[k] / denom
            b_factors[k] = denom
            c_run = c_run / denom
        m = mat_identity(self.n, one=one)
        for k, letter in enumerate(self.word):
            m = mat_mul(m, self.y_elem(letter, new_a[k]))
            if b_factors[k] != one:
                m = mat_mul(m, self.coweight_elem(i, b_factors[k]))
        m = mat_mul(m, t_diag)
        return new_a, b_factors, m

    # -- chart closed forms ----------------------------------------------

    def charts(self):
        """Superpotential Laurent data: exponents and coefficients per direction."""
        if self._charts is None:
            self._charts = self._recover_charts()
        return self._charts

    def _recover_charts(self):
        bound = 1
        rng = np.random.default_rng(20240811)
        while bound <= self._exponent_bound:
            try:
                data = self._interpolate(bound)
            except MirrorError:
                bound += 1
                continue
            if self._verify_charts(data, rng):
                return data
            bound += 1
        raise MirrorError(
            f"chart interpolation failed within exponent bound {self._exponent_bound}"
        )

    def _f_of_chart(self, t_coords, a_coords):
        return self.superpotential(self.chart_point(t_coords, a_coords))

    def _interpolate(self, bound: int):
        m = len(self.divisor_indices)
        width = 2 * bound + 1
        nodes = [Fraction(p) for p in (2, 3, 5, 7, 11, 13, 17)][:width]
        grids = list(product(nodes, repeat=self.ell))
        ones = [Fraction(1)] * m
        f_base = {}
        p_values = [dict() for _ in range(m)]
        for a in grids:
            base = self._f_of_chart(ones, a)
            f_base[a] = base
            for j in range(m):
                t = list(ones)
                t[j] = Fraction(2)
                p_values[j][a] = self._f_of_chart(t, a) - base
            # linearity in each t direction is re-checked on a corner point
        corner = grids[0]
        for j in range(m):
            t = list(ones)
            t[j] = Fraction(3)
            lhs = self._f_of_chart(t, corner) - f_base[corner]
            if lhs != 2 * p_values[j][corner]:
                raise MirrorError("superpotential is not affine in the torus direction")
        # the constant part must be the plain sum of chart coordinates
        for a in (grids[0], grids[-1]):
            if f_base[a] - sum(p_values[j][a] for j in range(m)) != sum(a):
                raise MirrorError("chart constant part mismatch")
        charts = []
        exact = []
        for j in range(m):
            coeffs = _tensor_laurent_fit(nodes, grids, p_values[j], bound, self.ell)
            terms = [(e, c) for e, c in coeffs.items() if c != 0]
            if any(c < 0 for _, c in terms):
                raise MirrorError("negative Laurent coefficient recovered")
            exact.append(dict(terms))
            charts.append(
                LaurentData(
                    exponents=np.array([t[0] for t in terms], dtype=float),
                    coefficients=np.array([float(t[1]) for t in terms]),
                )
            )
        self._charts_exact = exact
        return charts

    def _verify_charts(self, charts, rng) -> bool:
        for _ in range(12):
            a = [Fraction(int(x), 16) for x in rng.integers(3, 48, size=self.ell)]
            t = [Fraction(int(x), 8) for x in rng.integers(2, 24, size=len(self.divisor_indices))]
            direct = self._f_of_chart(t, a)
            model = sum(a)
            for j, chart in enumerate(self._charts_exact):
                term = Fraction(0)
                for e, c in chart.items():
                    mono = Fraction(1)
                    for ek, ak in zip(e, a):
                        mono *= ak**ek
                    term += c * mono
                model += t[j] * term
            if direct != model:
                return False
        return True

    def laurent_exact(self):
        self.charts()
        return self._charts_exact

    # -- superpotential on the positive chart --------------------------------

    def f_values_log(self, t_coords, x: np.ndarray) -> np.ndarray:
        """f at a = exp(x) for numpy batches; x shape (..., ell)."""
        charts = self.charts()
        total = np.sum(np.exp(x), axis=-1)
        for tj, chart in zip(t_coords, charts):
            total = total + tj * (np.exp(x @ chart.exponents.T) @ chart.coefficients)
        return total

    def f_gradient_log(self, t_coords, x: np.ndarray) -> np.ndarray:
        charts = self.charts()
        grad = np.exp(x)
        for tj, chart in zip(t_coords, charts):
            vals = np.exp(chart.exponents @ x) * chart.coefficients
            grad = grad + float(tj) * (chart.exponents.T @ vals)
        return grad

    def f_hessian_log(self, t_coords, x: np.ndarray) -> np.ndarray:
        charts = self.charts()
        hess = np.diag(np.exp(x))
        for tj, chart in zip(t_coords, charts):
            vals = np.exp(chart.exponents @ x) * chart.coefficients
            hess = hess + float(tj) * (chart.exponents.T * vals) @ chart.exponents
        return hess


def _coerce_one(v):
    if isinstance(v, Fraction):
        return Fraction(1)
    if isinstance(v, complex):
        return 1.0 + 0j
    return 1.0


def _tensor_laurent_fit(nodes, grids, values, bound: int, ell: int):
    """Exact tensor-product Laurent interpolation on the node grid."""
    width = 2 * bound + 1
    # one-dimensional inverse Vandermonde against monomials a^e, e in [-bound, bound]
    vand = [[node**e for e in range(-bound, bound + 1)] for node in nodes]
    inv = mat_inv(vand)
    # peel one axis at a time
    current = {a: values[a] for a in grids}
    for axis in range(ell):
        new: dict = {}
        # group keys by the other coordinates
        groups: dict = {}
        for key, val in current.items():
            prefix = key[:axis]
            suffix = key[axis + 1:]
            groups.setdefault((prefix, suffix), {})[key[axis]] = val
        for (prefix, suffix), column in groups.items():
            col_vals = [column[node] for node in nodes]
            for e_idx in range(width):
                c = sum(inv[e_idx][k] * col_vals[k] for k in range(width))
                e = e_idx - bound
                new[prefix + (e,) + suffix] = c
        current = new
    return current


# ---------------------------------------------------------------------------
# critical points


@dataclass
class CriticalPoint:
    a_star: np.ndarray
    f_star: float
    hessian: np.ndarray
    gradient_norm: float

    @property
    def hessian_det(self) -> float:
        return float(np.linalg.det(self.hessian))


def critical_point(mspace: MirrorSpace, t_coords, tol: float = 1e-13,
                   max_iter: int = 200, linear_shift=None) -> CriticalPoint:
    """Newton in log coordinates; the superpotential is convex there."""
    t = [float(v) for v in t_coords]
    if any(v <= 0 for v in t):
        raise MirrorError("critical point search needs a positive torus point")
    x = np.zeros(mspace.ell)
    shift = np.zeros(mspace.ell) if linear_shift is None else np.asarray(linear_shift, dtype=float)
    for _ in range(max_iter):
        grad = mspace.f_gradient_log(t, x) - shift
        if np.linalg.norm(grad) < tol:
            break
        hess = mspace.f_hessian_log(t, x)
        step = np.linalg.solve(hess, grad)
        # damped Newton keeps the iterate in the convex basin
        lam = 1.0
        base = mspace.f_values_log(t, x) - shift @ x
        for _ in range(40):
            trial = x - lam * step
            if mspace.f_values_log(t, trial) - shift @ trial < base + 1e-12:
                break
            lam /= 2
        x = x - lam * step
    grad = mspace.f_gradient_log(t, x) - shift
    gnorm = float(np.linalg.norm(grad))
    if gnorm > 1e-10:
        raise MirrorError(f"Newton did not converge: |grad| = {gnorm:.2e} at {x}")
    hess = mspace.f_hessian_log(t, x)
    vals = np.linalg.eigvalsh(hess)
    if np.any(vals <= 0):
        raise MirrorError("critical point is not a nondegenerate minimum")
    return CriticalPoint(
        a_star=np.exp(x),
        f_star=float(mspace.f_values_log(t, x)),
        hessian=hess,
        gradient_norm=gnorm,
    )


def complex_critical_values(mspace: MirrorSpace, t_coords) -> list[complex]:
    """All torus critical values of the superpotential, for fibers of dimension <= 2."""
    if mspace.ell > 2:
        raise MirrorError("polynomial elimination is wired for fiber dimension <= 2")
    import sympy

    avars = sympy.symbols(f"a1:{mspace.ell + 1}", nonzero=True)
    f = sum(avars)
    for tj, chart in zip(t_coords, mspace.laurent_exact()):
        term = 0
        for e, c in chart.items():
            mono = sympy.Integer(1)
            for ek, av in zip(e, avars):
                mono *= av**ek
            term += sympy.Rational(c) * mono
        f += sympy.Rational(Fraction(tj)) * term
    eqs = []
    for av in avars:
        expr = sympy.together(sympy.diff(f, av) * av)
        num, _ = sympy.fraction(expr)
        eqs.append(sympy.expand(num))
    if mspace.ell == 1:
        poly = sympy.Poly(eqs[0], avars[0])
        roots = [complex(r) for r in poly.nroots(n=30)]
        sols = [(r,) for r in roots if abs(r) > 1e-12]
    else:
        res = sympy.resultant(eqs[0], eqs[1], avars[1])
        poly = sympy.Poly(sympy.expand(res), avars[0])
        sols = []
        for r1 in poly.nroots(n=30):
            if abs(complex(r1)) < 1e-12:
                continue
            sub = sympy.Poly(eqs[1].subs(avars[0], r1), avars[1])
            for r2 in sub.nroots(n=30):
                if abs(complex(r2)) < 1e-12:
                    continue
                g1 = complex(eqs[0].subs({avars[0]: r1, avars[1]: r2}))
                if abs(g1) < 1e-6:
                    sols.append((complex(r1), complex(r2)))
    values = []
    for sol in sols:
        subs = {av: s for av, s in zip(avars, sol)}
        values.append(complex(f.subs(subs)))
    return values


# ---------------------------------------------------------------------------
# oscillatory integrals


@dataclass
class IBResult:
    value: complex
    error: float
    nodes_used: int
    window: float


def _h_exponents(mspace: MirrorSpace, h, hbar: float) -> np.ndarray:
    """The exponents beta_k(h)/hbar of the chart monomials in the integrand."""
    if h is None:
        return np.zeros(mspace.ell, dtype=complex)
    out = []
    for beta in mspace.betas:
        out.append(sum(complex(h[i]) * b for i, b in enumerate(beta)) / hbar)
    return np.array(out)


def _h_log_t_pairing(mspace: MirrorSpace, h, t_coords) -> complex:
    """<h, log t> through the inverse transpose of the Cartan matrix."""
    if h is None:
        return 0.0
    a = mspace.system.datum.cartan_matrix
    n = mspace.rank
    rhs = [0.0] * n
    for i, tv in zip(mspace.divisor_indices, t_coords):
        rhs[i] = float(np.log(float(tv)))
    aug = [[float(a[r][c]) for r in range(n)] for c in range(n)]  # transpose
    u = np.linalg.solve(np.array(aug), np.array(rhs))
    return sum(complex(h[i]) * u[i] for i in range(n))


def ib_integral(mspace: MirrorSpace, hbar: float, h, t_coords, power: int = 0,
                rel_tol: float = 1e-10, max_nodes: int = 80,
                mc_samples: int = 200000, seed: int = 11) -> IBResult:
    """The oscillatory integral over the totally positive fiber.

    In log coordinates the integrand is exp(-f/hbar + sum c_k x_k) times an
    optional superpotential power; quadrature is tensor Gauss-Legendre in a
    window centered at the critical point of the full exponent, grown until
    the value stops moving.  Fibers of dimension five and up fall back to
    seeded importance sampling.
    """
    if hbar <= 0:
        raise MirrorError("the oscillatory integral runs over the positive hbar ray")
    t = [float(v) for v in t_coords]
    cs = _h_exponents(mspace, h, hbar)
    prefactor = np.exp(_h_log_t_pairing(mspace, h, t) / hbar)
    center = critical_point(mspace, t, linear_shift=hbar * np.real(cs))
    x0 = np.log(center.a_star)
    hess = mspace.f_hessian_log(t, x0) / hbar
    sigma = np.sqrt(np.diag(np.linalg.inv(hess)))
    log_shift = -center.f_star / hbar + float(np.real(x0 @ cs))

    def integrand(points: np.ndarray) -> np.ndarray:
        out = np.empty(points.shape[0], dtype=complex)
        for lo in range(0, points.shape[0], 1 << 18):
            chunk = points[lo:lo + (1 << 18)]
            f = mspace.f_values_log(t, chunk)
            base = np.exp(-f / hbar + chunk @ cs - log_shift)
            if power:
                base = base * f**power
            out[lo:lo + (1 << 18)] = base
        return out

    if mspace.ell >= 5:
        rng = np.random.default_rng(seed)
        pts = rng.standard_normal((mc_samples, mspace.ell)) @ np.diag(sigma) + x0
        dens = np.exp(-0.5 * np.sum(((pts - x0) / sigma) ** 2, axis=1)) / (
            (2 * np.pi) ** (mspace.ell / 2) * np.prod(sigma)
        )
        vals = integrand(pts) / dens
        est = complex(np.mean(vals))
        err = float(np.std(vals) / np.sqrt(mc_samples))
        scale = np.exp(log_shift)
        return IBResult(prefactor * est * scale, abs(prefactor) * err * scale,
                        mc_samples, float("nan"))

    base_nodes = {1: 96, 2: 96, 3: 56, 4: 36}.get(mspace.ell, 32)
    base_nodes = min(base_nodes, max_nodes)
    schedule = [(7.0, base_nodes), (10.0, base_nodes + base_nodes // 3),
                (14.0, base_nodes + base_nodes // 2), (19.0, 2 * base_nodes)]
    prev = None
    est = None
    err = float("nan")
    nodes_used = 0
    window_used = 0.0
    for window, nodes in schedule:
        nodes = min(nodes, max_nodes) if mspace.ell >= 3 else nodes
        xs, ws = np.polynomial.legendre.leggauss(nodes)
        axes = [x0[k] + window * sigma[k] * xs for k in range(mspace.ell)]
        wts = [window * sigma[k] * ws for k in range(mspace.ell)]
        grids = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([g.reshape(-1) for g in grids], axis=-1)
        weight = wts[0]
        for k in range(1, mspace.ell):
            weight = np.multiply.outer(weight, wts[k])
        vals = integrand(pts).reshape(weight.shape)
        est = complex(np.sum(vals * weight))
        nodes_used = nodes ** mspace.ell
        window_used = window
        if prev is not None:
            err = abs(est - prev) / max(abs(est), 1e-300)
            if err < rel_tol:
                break
        prev = est
    scale = np.exp(log_shift)
    return IBResult(prefactor * est * scale,
                    abs(prefactor * est * scale) * (err if np.isfinite(err) else 1.0),
                    nodes_used, window_used)


@dataclass
class StationaryPhaseReport:
    hbar_grid: list[float]
    scaled_values: list[float]
    predicted: list[float]
    slope: float
    max_rel_dev: float
    passes: bool


def stationary_phase_check(mspace: MirrorSpace, t_coords, hbar_grid,
                           rel_tol: float = 0.02) -> StationaryPhaseReport:
    """Laplace-method check: e^{f*/hbar} I^B against the Gaussian prefactor."""
    cp = critical_point(mspace, t_coords)
    det = np.linalg.det(cp.hessian)
    scaled = []
    predicted = []
    for hb in hbar_grid:
        val = ib_integral(mspace, float(hb), None, t_coords).value
        scaled.append(float(np.real(np.exp(cp.f_star / hb) * val)))
        predicted.append(float((2 * np.pi * hb) ** (mspace.ell / 2) / np.sqrt(det)))
    xs = np.log(np.asarray(hbar_grid, dtype=float))
    ys = np.log(np.abs(np.asarray(scaled)))
    a = np.vstack([xs, np.ones_like(xs)]).T
    coef, *_ = np.linalg.lstsq(a, ys, rcond=None)
    devs = [abs(s / p - 1.0) for s, p in zip(scaled, predicted)]
    passes = max(devs) < rel_tol
    return StationaryPhaseReport(
        hbar_grid=[float(x) for x in hbar_grid],
        scaled_values=scaled,
        predicted=predicted,
        slope=float(coef[0]),
        max_rel_dev=float(max(devs)),
        passes=passes,
    )
