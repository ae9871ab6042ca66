"""Quantum multiplication by divisor classes and its Perron-Frobenius spectra.

The divisor operators follow the equivariant quantum Chevalley rule for G/P.
For a minimal representative u and a divisor index i outside the parabolic
subset, the product of the i-th Schubert divisor with the class of u is

  restriction(divisor at u) * sigma_u                         (equivariant)
  + sum over roots alpha outside the parabolic with
        l(u s_alpha) = l(u) + 1 and u s_alpha minimal:
        coeff_i(alpha) * sigma_{u s_alpha}                    (classical)
  + sum over roots alpha outside the parabolic with
        l(u s_alpha) = l(u) + 1 - 2 height(alpha)  and
        l(min(u s_alpha)) = l(u s_alpha) + pairing(2 rho_P part):
        coeff_i(alpha) * q^{deg(alpha)} * sigma_{min(u s_alpha)}   (quantum)

where coeff_i(alpha) is the i-th simple-root coordinate of alpha and
deg(alpha) collects the coordinates outside the parabolic subset.  The rule's
quantum coefficients carry no equivariant correction.  Every output is
checked for homogeneity in the quantum grading, and the whole rule is
cross-validated against ring presentations and connection flatness in the
test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .lie import WeylElement
from .schubert import EquivPoly, FlagSpace


class QHError(ValueError):
    pass


@dataclass
class ChevalleyTerm:
    target: WeylElement
    coefficient: int
    degree: tuple[int, ...]  # quantum degree over I \ I_P; all zero = classical


class QuantumData:
    """Divisor quantum-multiplication operators for one flag space."""

    def __init__(self, space: FlagSpace):
        self.space = space
        self.parabolic = space.parabolic
        self.group = space.group
        self.system = space.system
        self.subset = set(self.parabolic.subset)
        self.divisor_indices = [i for i in range(space.rank) if i not in self.subset]
        self._omega_inv = None
        self._terms_cache: dict[tuple[int, WeylElement], list[ChevalleyTerm]] = {}
        self._quantum_parts: dict[int, dict[tuple[int, ...], np.ndarray]] = {}
        self._classical_int: dict[int, np.ndarray] = {}

    # -- gradings -------------------------------------------------------

    def c1_pairing(self, i: int) -> int:
        """<c1, beta_i> = sum of coroot(alpha_i) over tangent roots; half of deg q_i."""
        total = 0
        for root in self.parabolic.complement_positive_roots():
            coroot = self.system.coroot_of(root)
            total += self.system.pairing(coroot, self.system.simple_root(i))
        return total

    def quantum_degree(self, degree: tuple[int, ...]) -> int:
        return sum(2 * d * self.c1_pairing(i) for d, i in zip(degree, self.divisor_indices))

    def fundamental_coweight_form(self, i: int) -> list[Fraction]:
        """Coefficients of the fundamental weight omega_i^vee as a linear form in h."""
        if self._omega_inv is None:
            a = self.system.datum.cartan_matrix
            n = self.system.rank
            aug = [[Fraction(a[r][c]) for c in range(n)] + [Fraction(int(r == c)) for c in range(n)]
                   for r in range(n)]
            for c in range(n):
                piv = next(k for k in range(c, n) if aug[k][c] != 0)
                aug[c], aug[piv] = aug[piv], aug[c]
                p = aug[c][c]
                aug[c] = [x / p for x in aug[c]]
                for k in range(n):
                    if k != c and aug[k][c] != 0:
                        f = aug[k][c]
                        aug[k] = [x - f * y for x, y in zip(aug[k], aug[c])]
            self._omega_inv = [[aug[r][n + c] for c in range(n)] for r in range(n)]
        # omega_i^vee = sum_k inv[i][k] coroot_k as forms on the h coordinates
        return list(self._omega_inv[i])

    # -- the Chevalley rule ----------------------------------------------

    def chevalley_terms(self, i: int, u: WeylElement) -> list[ChevalleyTerm]:
        if i not in self.divisor_indices:
            raise QHError(f"index {i} is not a divisor direction")
        if u not in self.space.index:
            raise QHError("u must be a minimal coset representative")
        key = (i, u)
        if key in self._terms_cache:
            return self._terms_cache[key]
        group, system = self.group, self.system
        par = self.parabolic
        zero_deg = (0,) * len(self.divisor_indices)
        parabolic_coroots = [system.coroot_of(r) for r in par.parabolic_positive_roots()]
        terms: list[ChevalleyTerm] = []
        for root in par.complement_positive_roots():
            coeff = root[i]
            if coeff == 0:
                continue
            refl = group.reflection(root)
            us = group.multiply(u, refl)
            # classical cover
            if us.length == u.length + 1 and us in self.space.index:
                terms.append(ChevalleyTerm(us, coeff, zero_deg))
                continue
            # quantum term: maximal length drop, with the parabolic part of the
            # drop exactly accounted for by the Levi height of the root
            if us.length != u.length + 1 - 2 * system.height(root):
                continue
            target = par.minimize(us)
            levi_drop = -sum(system.pairing(c, root) for c in parabolic_coroots)
            if target.length != us.length - levi_drop:
                continue
            degree = tuple(root[j] for j in self.divisor_indices)
            term = ChevalleyTerm(target, coeff, degree)
            lhs = target.length + sum(d * self.c1_pairing(j) for d, j in zip(degree, self.divisor_indices))
            assert lhs == u.length + 1, "quantum Chevalley term violates the grading"
            terms.append(term)
        self._terms_cache[key] = terms
        return terms

    def quantum_chevalley(self, i: int, v: WeylElement):
        """(equivariant coefficient on sigma_v itself, list of ChevalleyTerm)."""
        eq = self.space.billey_restriction(self._divisor_rep(i), v)
        return eq, self.chevalley_terms(i, v)

    def _divisor_rep(self, i: int) -> WeylElement:
        s = self.group.simple_reflection(i)
        if s not in self.space.index:
            raise QHError(f"s_{i+1} is not in W^P")
        return s

    # -- operator matrices -------------------------------------------------

    def quantum_parts(self, i: int) -> dict[tuple[int, ...], np.ndarray]:
        """Degree-tagged integer matrices of the divisor operator (columns act)."""
        if i not in self._quantum_parts:
            n = len(self.space.reps)
            classical = np.zeros((n, n))
            parts: dict[tuple[int, ...], np.ndarray] = {}
            zero_deg = (0,) * len(self.divisor_indices)
            for iu, u in enumerate(self.space.reps):
                for term in self.chevalley_terms(i, u):
                    iw = self.space.index[term.target]
                    if term.degree == zero_deg:
                        classical[iw, iu] += term.coefficient
                    else:
                        parts.setdefault(term.degree, np.zeros((n, n)))[iw, iu] += term.coefficient
            self._classical_int[i] = classical
            self._quantum_parts[i] = parts
        return self._quantum_parts[i]

    def classical_integer_matrix(self, i: int) -> np.ndarray:
        self.quantum_parts(i)
        return self._classical_int[i]

    def divisor_restriction_diag(self, i: int, h) -> np.ndarray:
        s = self._divisor_rep(i)
        return np.array(
            [complex(self.space.billey_restriction(s, u).evaluate(h)) for u in self.space.reps]
        )

    def divisor_operator(self, i: int, q, h=None, line_bundle: bool = True) -> np.ndarray:
        """Matrix of quantum multiplication by the i-th divisor at numeric (q, h).

        With ``line_bundle`` the operator is twisted to the equivariant first
        Chern class of the i-th nef line bundle, i.e. shifted by the value of
        the fundamental coweight form at h; at h = 0 there is no difference.
        """
        qv = self._q_dict(q)
        n = len(self.space.reps)
        out = np.array(self.classical_integer_matrix(i), dtype=complex)
        for degree, mat in self.quantum_parts(i).items():
            out = out + self._q_power(qv, degree) * mat
        if h is not None and any(complex(x) != 0 for x in h):
            out = out + np.diag(self.divisor_restriction_diag(i, h))
            if line_bundle:
                omega = self.fundamental_coweight_form(i)
                shift = sum(complex(h[k]) * float(c) for k, c in enumerate(omega))
                out = out - shift * np.eye(n)
        return out

    def c1_matrix(self, q, h=None) -> np.ndarray:
        n = len(self.space.reps)
        out = np.zeros((n, n), dtype=complex)
        for i in self.divisor_indices:
            out = out + self.c1_pairing(i) * self.divisor_operator(i, q, h)
        if h is None or all(complex(x) == 0 for x in h):
            out = out.real
        return out

    c1_operator = c1_matrix

    def _q_dict(self, q) -> dict[int, complex]:
        if np.isscalar(q):
            q = [q] * len(self.divisor_indices)
        if len(q) != len(self.divisor_indices):
            raise QHError(f"expected {len(self.divisor_indices)} quantum parameters")
        if any(complex(x) == 0 for x in q):
            raise QHError("quantum parameters must be nonzero")
        return {i: complex(x) for i, x in zip(self.divisor_indices, q)}

    def _q_power(self, qv: dict[int, complex], degree: tuple[int, ...]) -> complex:
        out = 1.0 + 0j
        for d, i in zip(degree, self.divisor_indices):
            if d:
                out *= qv[i] ** d
        return out

    # -- exact polynomial operators (for flatness) --------------------------

    def operator_poly(self, i: int, h_exact=None) -> dict[tuple[int, ...], list[list[Fraction]]]:
        """The divisor operator as {q-degree: exact matrix}, h an exact vector or None."""
        n = len(self.space.reps)
        zero_deg = (0,) * len(self.divisor_indices)
        out: dict[tuple[int, ...], list[list[Fraction]]] = {}
        classical = [[Fraction(0)] * n for _ in range(n)]
        cmat = self.classical_integer_matrix(i)
        for r in range(n):
            for c in range(n):
                classical[r][c] = Fraction(int(cmat[r, c]))
        if h_exact is not None:
            s = self._divisor_rep(i)
            omega = self.fundamental_coweight_form(i)
            shift = sum(Fraction(h) * c for h, c in zip(h_exact, omega))
            for iu, u in enumerate(self.space.reps):
                val = self.space.billey_restriction(s, u).evaluate(h_exact)
                classical[iu][iu] += Fraction(val) - shift
        out[zero_deg] = classical
        for degree, mat in self.quantum_parts(i).items():
            out[degree] = [[Fraction(int(mat[r, c])) for c in range(n)] for r in range(n)]
        return out


# ---------------------------------------------------------------------------
# flatness of the quantum connection


def _poly_mat_mul(a: dict, b: dict, n: int) -> dict:
    out: dict = {}
    for da, ma in a.items():
        for db, mb in b.items():
            d = tuple(x + y for x, y in zip(da, db))
            tgt = out.setdefault(d, [[Fraction(0)] * n for _ in range(n)])
            for r in range(n):
                mar = ma[r]
                for k in range(n):
                    if mar[k]:
                        f = mar[k]
                        row_b = mb[k]
                        trg = tgt[r]
                        for c in range(n):
                            if row_b[c]:
                                trg[c] += f * row_b[c]
    return out


def check_flatness_exact(qdata: QuantumData, h_exact=None) -> bool:
    """[C_i, C_j] = 0 and q_j d_j C_i = q_i d_i C_j, exactly in the q-variables."""
    n = len(qdata.space.reps)
    ops = {i: qdata.operator_poly(i, h_exact) for i in qdata.divisor_indices}
    idxs = qdata.divisor_indices
    for a_pos, i in enumerate(idxs):
        for j in idxs[a_pos + 1:]:
            ab = _poly_mat_mul(ops[i], ops[j], n)
            ba = _poly_mat_mul(ops[j], ops[i], n)
            for d in set(ab) | set(ba):
                ma = ab.get(d)
                mb = ba.get(d)
                for r in range(n):
                    for c in range(n):
                        va = ma[r][c] if ma else Fraction(0)
                        vb = mb[r][c] if mb else Fraction(0)
                        if va != vb:
                            raise QHError(f"divisor operators {i+1},{j+1} fail to commute at degree {d}")
    # q_j d_j C_i = q_i d_i C_j, degree by degree
    pos = {i: k for k, i in enumerate(idxs)}
    for a_pos, i in enumerate(idxs):
        for j in idxs[a_pos + 1:]:
            degs = set(ops[i]) | set(ops[j])
            for d in degs:
                mi = ops[i].get(d)
                mj = ops[j].get(d)
                for r in range(n):
                    for c in range(n):
                        vi = mi[r][c] if mi else Fraction(0)
                        vj = mj[r][c] if mj else Fraction(0)
                        if d[pos[j]] * vi != d[pos[i]] * vj:
                            raise QHError(f"mixed q-derivative identity fails at degree {d}")
    return True


# ---------------------------------------------------------------------------
# spectra and positive points


@dataclass
class SpectralReport:
    space_label: str
    q: list
    eigenvalues: list[complex]
    E_O: float
    multiplicity: int
    gap: float
    maximal_modulus_set: list[complex]
    status: str
    residual: float

    def as_dict(self) -> dict:
        return {
            "space": self.space_label,
            "q": [float(x) for x in self.q],
            "eigenvalues": [{"re": z.real, "im": z.imag} for z in self.eigenvalues],
            "E_O": self.E_O,
            "multiplicity": self.multiplicity,
            "gap": self.gap,
            "maximal_modulus_set": [{"re": z.real, "im": z.imag} for z in self.maximal_modulus_set],
            "status": self.status,
            "residual": self.residual,
        }


def conjecture_O_certify(qdata: QuantumData, q, atol: float = 1e-8,
                         label: str = "") -> SpectralReport:
    """Check that the top modulus eigenvalue of c1* is real, positive and simple."""
    qv = np.atleast_1d(np.asarray(q, dtype=float))
    if np.any(qv <= 0):
        raise QHError("conjecture O certification needs q > 0")
    m = qdata.c1_matrix(list(qv))
    vals, vecs = np.linalg.eig(m)
    order = np.argsort(-np.abs(vals))
    vals = vals[order]
    vecs = vecs[:, order]
    scale = max(np.max(np.abs(vals)), 1.0)
    e_o = float(np.max(np.abs(vals)))
    real_pos = [
        k for k, z in enumerate(vals)
        if abs(abs(z) - e_o) <= atol * scale and abs(z.imag) <= atol * scale and z.real > 0
    ]
    status = "certified"
    if not real_pos:
        status = "failed"
        mult = 0
        residual = float("nan")
    else:
        pf = vals[real_pos[0]]
        cluster = [z for z in vals if abs(z - pf) <= atol * scale]
        boundary = [z for z in vals if atol * scale < abs(z - pf) <= 10 * atol * scale]
        mult = len(cluster)
        if boundary:
            status = "inconclusive"
        elif mult != 1:
            status = "failed"
        v = vecs[:, real_pos[0]]
        residual = float(np.linalg.norm(m @ v - pf * v) / np.linalg.norm(v))
        if residual > 1e3 * atol * scale:
            status = "inconclusive"
    max_set = [complex(z) for z in vals if abs(abs(z) - e_o) <= atol * scale]
    outside = [abs(z) for z in vals if abs(abs(z) - e_o) > atol * scale]
    gap = float(e_o - max(outside)) if outside else 0.0
    return SpectralReport(
        space_label=label,
        q=list(qv),
        eigenvalues=[complex(z) for z in vals],
        E_O=e_o,
        multiplicity=mult,
        gap=gap,
        maximal_modulus_set=max_set,
        status=status,
        residual=residual,
    )


def is_indecomposable(qdata: QuantumData, q) -> bool:
    """Strong connectivity of the support digraph of the c1 operator at h=0."""
    m = np.abs(qdata.c1_matrix(q)) > 1e-14
    n = m.shape[0]

    def reachable(start: int, mat) -> set[int]:
        seen = {start}
        stack = [start]
        while stack:
            k = stack.pop()
            for j in range(n):
                if mat[j, k] and j not in seen:
                    seen.add(j)
                    stack.append(j)
        return seen

    return len(reachable(0, m)) == n and len(reachable(0, m.T)) == n


@dataclass
class PositivePointReport:
    space_label: str
    q: list
    values: dict[str, float]
    E_O: float
    c1_value: float
    power_cutoff_used: int
    hom_residual: float
    status: str = "ok"

    def as_dict(self) -> dict:
        return {
            "space": self.space_label,
            "q": [float(x) for x in self.q],
            "schubert_positive": self.values,
            "E_O": self.E_O,
            "lambda_c1": self.c1_value,
            "abs_err": abs(self.c1_value - self.E_O),
            "power_cutoff_used": self.power_cutoff_used,
            "hom_residual": self.hom_residual,
            "status": self.status,
        }


def schubert_positive_point(qdata: QuantumData, q, power_cap: int = 64,
                            label: str = "") -> PositivePointReport:
    """Evaluate all Schubert classes at the Perron point of the quantum ring.

    The witness sum of c1-star powers applied to the unit must become
    entrywise positive below the power cap; the evaluation itself pairs the
    Perron eigenvector with the Poincare duality permutation.
    """
    space = qdata.space
    qv = np.atleast_1d(np.asarray(q, dtype=float))
    if np.any(qv <= 0):
        raise QHError("the Schubert positive point needs q > 0")
    m = qdata.c1_matrix(list(qv)).real
    n = m.shape[0]
    x = np.zeros(n)
    x[0] = 1.0
    acc = x.copy()
    cutoff = 0
    while not np.all(acc > 0):
        cutoff += 1
        if cutoff > power_cap:
            raise QHError(
                f"sum of c1 powers not positive after {power_cap} terms; "
                "operator may be decomposable"
            )
        x = m @ x
        acc = acc + x
    vals, vecs = np.linalg.eig(m)
    scale = max(1.0, float(np.max(np.abs(vals))))
    real_idx = [k for k in range(n) if abs(vals[k].imag) < 1e-8 * scale]
    k = max(real_idx, key=lambda j: vals[j].real)
    pf_val = float(vals[k].real)
    vec = vecs[:, k].real
    if vec[np.argmax(np.abs(vec))] < 0:
        vec = -vec
    if not np.all(vec > 0):
        raise QHError("Perron eigenvector is not entrywise positive")
    # pairing permutation g[u][v] = nonequivariant integral of sigma_u cup sigma_v
    g = np.zeros((n, n))
    for iu, u in enumerate(space.reps):
        cu = space.schubert_class(u)
        for iv, w in enumerate(space.reps):
            if u.length + w.length != space.ell:
                continue
            g[iu, iv] = float(space.integrate(space.cup(cu, space.schubert_class(w))).constant())
    gv = g @ vec
    lam = gv / gv[0]
    values = {w.label(): float(lam[i]) for i, w in enumerate(space.reps)}
    if not np.all(lam > 0):
        raise QHError("Schubert positivity failed at the Perron point")
    c1_value = 0.0
    for i in qdata.divisor_indices:
        s = qdata._divisor_rep(i)
        c1_value += qdata.c1_pairing(i) * lam[space.index[s]]
    # ring homomorphism spot checks on divisor products
    qdict = {i: float(x) for i, x in zip(qdata.divisor_indices, qv)}
    hom_resid = 0.0
    for i in qdata.divisor_indices:
        s = qdata._divisor_rep(i)
        for u in space.reps:
            total = 0.0
            for term in qdata.chevalley_terms(i, u):
                qpow = 1.0
                for d, j in zip(term.degree, qdata.divisor_indices):
                    qpow *= qdict[j] ** d
                total += term.coefficient * qpow * lam[space.index[term.target]]
            hom_resid = max(hom_resid, abs(total - lam[space.index[s]] * lam[space.index[u]]))
    return PositivePointReport(
        space_label=label,
        q=list(qv),
        values=values,
        E_O=pf_val,
        c1_value=float(c1_value),
        power_cutoff_used=cutoff,
        hom_residual=float(hom_resid),
    )
