"""Flat sections of the quantum connection: series solver, J-function, I^A.

The fundamental solution is built by the commutator recurrence at a regular
singular point: with A_{j,0} the log-part operators and A_{j,nu} the quantum
corrections, the shell matrices satisfy

    |nu| S_nu + S_nu A_0 - A_0 S_nu = sum over nu1 + nu2 = nu, nu1 != 0
                                       of A_{nu1} S_{nu2},

solved shell by shell through a Sylvester system.  Everything downstream
(J-function, Gamma-limit extraction, the oscillatory pairing I^A, asymptotic
class membership) evaluates this series, continues it along the
anticanonical ray by an adaptive 8th order integrator when it leaves the
comfortable range, and localizes integrals over the fixed points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from .gammaclass import (
    GammaClassData,
    c1_coeff_vector,
    c1_restriction,
    gamma_class,
    normalize_equivariant_restrictions,
    normalize_nonequivariant,
)
from .qh import QuantumData
from .schubert import FlagSpace


class FlatSectionError(ValueError):
    pass


class ResonanceError(FlatSectionError):
    """Two log-part eigenvalues differ by a positive integer."""


class RadiusError(FlatSectionError):
    """Equivariant parameter outside the guaranteed convergence region."""


RESONANCE_TOL = 1e-9


# ---------------------------------------------------------------------------
# generic Frobenius-method solver


@dataclass
class FrobeniusSystem:
    """Finitely many operator coefficients A_{j,nu} with commuting log parts."""

    a0: list[np.ndarray]
    parts: list[dict[tuple[int, ...], np.ndarray]]

    def __post_init__(self):
        for a in self.a0:
            for b in self.a0:
                if np.max(np.abs(a @ b - b @ a)) > 1e-10 * max(1.0, np.max(np.abs(a)) * np.max(np.abs(b))):
                    raise FlatSectionError("log-part operators do not commute")

    @property
    def dims(self) -> int:
        return len(self.a0)

    @property
    def size(self) -> int:
        return self.a0[0].shape[0]

    def total_a0(self) -> np.ndarray:
        return sum(self.a0)

    def total_part(self, nu: tuple[int, ...]) -> np.ndarray:
        out = np.zeros_like(self.a0[0])
        for p in self.parts:
            if nu in p:
                out = out + p[nu]
        return out

    def max_part_degree(self) -> int:
        degs = [sum(nu) for p in self.parts for nu in p]
        return max(degs, default=0)


@dataclass
class SeriesSolution:
    """Shells stored as unit-scale matrices with explicit log factors.

    S_nu = exp(log_scales[nu]) * shells[nu]; the split keeps deep shells
    representable even when their true norm underflows double precision,
    which matters exactly where large q powers must cancel them.
    """

    system: FrobeniusSystem
    shells: dict[tuple[int, ...], np.ndarray]
    log_scales: dict[tuple[int, ...], float]
    order: int
    tail_ratio: float

    def shell_value(self, nu: tuple[int, ...]) -> np.ndarray:
        return np.exp(self.log_scales[nu]) * self.shells[nu]

    def series_matrix(self, qv) -> np.ndarray:
        out = np.zeros_like(self.shells[(0,) * self.system.dims], dtype=complex)
        logs = [np.log(complex(q)) for q in qv]
        for nu, mat in self.shells.items():
            g = self.log_scales[nu]
            if g == -np.inf:
                continue
            log_mono = sum(d * lg for d, lg in zip(nu, logs)) + g
            if log_mono.real < -745.0:
                continue
            out = out + np.exp(log_mono) * mat
        return out

    def log_part(self, qv) -> np.ndarray:
        acc = np.zeros_like(self.system.a0[0], dtype=complex)
        for a, q in zip(self.system.a0, qv):
            acc = acc + np.log(complex(q)) * a
        return expm(acc)

    def full_matrix(self, qv) -> np.ndarray:
        return self.series_matrix(qv) @ self.log_part(qv)

    def apply(self, qv, x) -> np.ndarray:
        return self.full_matrix(qv) @ np.asarray(x, dtype=complex)

    def derivative_residual(self, qv) -> float:
        """Max over directions of the connection residual of the truncated series.

        Uses the termwise derivative of the series; the residual is the tail
        left by truncation, so it doubles as a convergence diagnostic.
        """
        sys = self.system
        m = self.series_matrix(qv)
        logs = [np.log(complex(q)) for q in qv]
        scale = max(1.0, float(np.max(np.abs(m))))
        worst = 0.0
        for j in range(sys.dims):
            d = np.zeros_like(m)
            for nu, mat in self.shells.items():
                g = self.log_scales[nu]
                if g == -np.inf:
                    continue
                log_mono = sum(dd * lg for dd, lg in zip(nu, logs)) + g
                if log_mono.real < -745.0:
                    continue
                d = d + np.exp(log_mono) * (nu[j] * mat + mat @ sys.a0[j])
            cj = np.array(sys.a0[j], dtype=complex)
            for nu, mat in sys.parts[j].items():
                mono = 1.0 + 0j
                for dd, q in zip(nu, qv):
                    if dd:
                        mono *= complex(q) ** dd
                cj = cj + mono * mat
            worst = max(worst, float(np.max(np.abs(d - cj @ m))) / scale)
        return worst


def _resonance_guard(a0_total: np.ndarray, order: int) -> None:
    vals = np.linalg.eigvals(a0_total)
    scale = max(1.0, float(np.max(np.abs(vals))))
    for ia, la in enumerate(vals):
        for ib, lb in enumerate(vals):
            diff = la - lb
            k = round(diff.real)
            if 1 <= k <= order and abs(diff - k) < RESONANCE_TOL * scale:
                raise ResonanceError(
                    f"log-part eigenvalues {la:.6g} and {lb:.6g} differ by the integer {k}"
                )


def _shells_up_to(dims: int, order: int):
    if dims == 1:
        for k in range(1, order + 1):
            yield (k,)
        return
    # all nu with 1 <= |nu| <= order, graded
    def rec(prefix, remaining, slots):
        if slots == 1:
            yield prefix + (remaining,)
            return
        for v in range(remaining + 1):
            yield from rec(prefix + (v,), remaining - v, slots - 1)

    for k in range(1, order + 1):
        yield from rec((), k, dims)


def frobenius_solve(system: FrobeniusSystem, order: int) -> SeriesSolution:
    """Solve the shell recurrence up to total order, guarding against resonance.

    Shells are renormalized as they are produced; the running log factors keep
    the recurrence valid far past the underflow threshold of raw doubles.
    """
    n = system.size
    a0 = np.asarray(system.total_a0(), dtype=complex)
    _resonance_guard(a0, order)
    eye = np.eye(n, dtype=complex)
    ad_op = np.kron(eye, a0.T) - np.kron(a0, eye)  # vec(X A0 - A0 X), row-major
    zero = (0,) * system.dims
    shells: dict[tuple[int, ...], np.ndarray] = {zero: np.eye(n, dtype=complex)}
    log_scales: dict[tuple[int, ...], float] = {zero: 0.0}
    log_shell_norm: dict[int, float] = {0: 0.0}
    for nu in _shells_up_to(system.dims, order):
        k = sum(nu)
        contribs = []
        for nu2, m2 in shells.items():
            nu1 = tuple(a - b for a, b in zip(nu, nu2))
            if any(x < 0 for x in nu1) or not any(nu1):
                continue
            if log_scales[nu2] == -np.inf:
                continue
            a1 = system.total_part(nu1)
            if np.any(a1):
                contribs.append((log_scales[nu2], a1 @ m2))
        if not contribs:
            shells[nu] = np.zeros((n, n), dtype=complex)
            log_scales[nu] = -np.inf
            continue
        g_ref = max(g for g, _ in contribs)
        rhs = np.zeros((n, n), dtype=complex)
        for g, m in contribs:
            w = np.exp(g - g_ref)
            if w > 0:
                rhs = rhs + w * m
        mat = k * np.eye(n * n, dtype=complex) + ad_op
        s_nu = np.linalg.solve(mat, rhs.reshape(-1)).reshape(n, n)
        norm = float(np.max(np.abs(s_nu)))
        if norm == 0.0:
            shells[nu] = s_nu
            log_scales[nu] = -np.inf
            continue
        shells[nu] = s_nu / norm
        log_scales[nu] = g_ref + float(np.log(norm))
        prev = log_shell_norm.get(k, -np.inf)
        log_shell_norm[k] = max(prev, log_scales[nu])
    ks = sorted(log_shell_norm)
    tail = 0.0
    if len(ks) >= 2 and np.isfinite(log_shell_norm[ks[-2]]):
        tail = float(np.exp(min(700.0, log_shell_norm[ks[-1]] - log_shell_norm[ks[-2]])))
    return SeriesSolution(system=system, shells=shells, log_scales=log_scales,
                          order=order, tail_ratio=tail)


def frobenius_solve_exact(a0, parts, order: int):
    """One-variable exact-arithmetic variant; returns {k: Fraction matrix}.

    a0 and parts entries are Fraction matrices (lists of lists); used by the
    tests to confirm the recurrence holds exactly order by order.
    """
    n = len(a0)
    shells = {0: [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]}
    for k in range(1, order + 1):
        rhs = [[Fraction(0)] * n for _ in range(n)]
        for k2 in range(k):
            k1 = k - k2
            if k1 not in parts:
                continue
            a1 = parts[k1]
            s2 = shells[k2]
            for r in range(n):
                for m in range(n):
                    if a1[r][m]:
                        for c in range(n):
                            rhs[r][c] += a1[r][m] * s2[m][c]
        # solve k X + X a0 - a0 X = rhs as an n^2 linear system
        big = [[Fraction(0)] * (n * n) for _ in range(n * n)]
        vec = [Fraction(0)] * (n * n)
        for r in range(n):
            for c in range(n):
                row = r * n + c
                vec[row] = rhs[r][c]
                big[row][row] += k
                for m in range(n):
                    big[row][r * n + m] += a0[m][c]  # (X a0)_{rc}
                    big[row][m * n + c] -= a0[r][m]  # (a0 X)_{rc}
        sol = _exact_solve(big, vec)
        shells[k] = [[sol[r * n + c] for c in range(n)] for r in range(n)]
    return shells


def _exact_solve(a, b):
    n = len(a)
    m = [row[:] + [b[i]] for i, row in enumerate(a)]
    for c in range(n):
        piv = next((k for k in range(c, n) if m[k][c] != 0), None)
        if piv is None:
            raise ResonanceError("exact shell system is singular")
        m[c], m[piv] = m[piv], m[c]
        p = m[c][c]
        m[c] = [x / p for x in m[c]]
        for k in range(n):
            if k != c and m[k][c] != 0:
                f = m[k][c]
                m[k] = [x - f * y for x, y in zip(m[k], m[c])]
    return [m[k][n] for k in range(n)]


# ---------------------------------------------------------------------------
# the fundamental solution of the quantum connection


class QuantumSystem:
    """Frobenius data of one quantum connection at fixed (hbar, h)."""

    def __init__(self, qdata: QuantumData, hbar, h=None, radius: float = 0.5):
        self.qdata = qdata
        self.space = qdata.space
        self.hbar = complex(hbar)
        if self.hbar == 0:
            raise FlatSectionError("hbar must be nonzero")
        self.h = None if h is None or not any(complex(x) != 0 for x in h) else list(h)
        if self.h is not None:
            norm = max(abs(complex(x)) for x in self.h)
            if norm / abs(self.hbar) > radius:
                raise RadiusError(
                    f"|h| / |hbar| = {norm / abs(self.hbar):.3g} outside the radius {radius}"
                )
        n = len(self.space.reps)
        a0 = []
        parts = []
        for i in qdata.divisor_indices:
            classical = np.array(qdata.classical_integer_matrix(i), dtype=complex)
            if self.h is not None:
                classical = classical + np.diag(qdata.divisor_restriction_diag(i, self.h))
                omega = qdata.fundamental_coweight_form(i)
                shift = sum(complex(self.h[k]) * float(c) for k, c in enumerate(omega))
                classical = classical - shift * np.eye(n)
            a0.append(-classical / self.hbar)
            parts.append({d: -np.array(m, dtype=complex) / self.hbar
                          for d, m in qdata.quantum_parts(i).items()})
        self.system = FrobeniusSystem(a0=a0, parts=parts)
        self._solutions: dict[int, SeriesSolution] = {}

    def solution(self, order: int) -> SeriesSolution:
        if order not in self._solutions:
            self._solutions[order] = frobenius_solve(self.system, order)
        return self._solutions[order]


def fundamental_solution(qdata: QuantumData, hbar, h=None, order: int = 40,
                         radius: float = 0.5) -> tuple[QuantumSystem, SeriesSolution]:
    qs = QuantumSystem(qdata, hbar, h, radius=radius)
    return qs, qs.solution(order)


def weyl_transform_h(space: FlagSpace, w, h):
    """The action of w on the equivariant parameters h."""
    group = space.group
    winv = group.inverse(w)
    out = []
    for i in range(space.rank):
        vec = group.act_on_coroot(winv, space.system.simple_coroot(i))
        out.append(sum(complex(h[k]) * c for k, c in enumerate(vec)))
    return out


# ---------------------------------------------------------------------------
# J-function along the anticanonical line


class JFunction:
    """J(s) on the anticanonical ray q_i = s^{<c1, beta_i>}, hbar = -1 convention."""

    def __init__(self, qdata: QuantumData, order: int = 80, series_cap: float = 1e240):
        self.qdata = qdata
        self.space = qdata.space
        self.order = order
        self.series_cap = series_cap
        self.exponents = [qdata.c1_pairing(i) for i in qdata.divisor_indices]
        self.top_index = max(range(len(self.space.reps)), key=lambda k: self.space.reps[k].length)
        self.qsys = QuantumSystem(qdata, hbar=-1.0)
        self.sol = self.qsys.solution(order)
        duals = self.space.dual_classes()
        self.dual_matrix = np.array(
            [[complex(c.constant()) for c in row] for row in duals]
        ).T  # columns are the dual classes sigma^v

    def q_of_s(self, s: float):
        return [complex(s) ** e for e in self.exponents]

    def _series_ok(self, s: float) -> bool:
        # largest shell magnitude must stay within range and the tail must close,
        # all judged in log space to dodge monomial overflow
        qv = self.q_of_s(s)
        logs = [np.log(abs(complex(q))) for q in qv]
        log_top = -np.inf
        log_tail = -np.inf
        last_shell = max(sum(nu) for nu in self.sol.shells)
        for nu, g in self.sol.log_scales.items():
            if g == -np.inf:
                continue
            log_term = sum(d * lg for d, lg in zip(nu, logs)) + g
            log_top = max(log_top, log_term)
            if sum(nu) == last_shell:
                log_tail = max(log_tail, log_term)
        return log_top < np.log(self.series_cap) and log_tail < log_top - 46.0

    def values_series(self, s: float) -> np.ndarray:
        y = self.sol.full_matrix(self.q_of_s(s)) @ self.dual_matrix
        return y[self.top_index, :]

    def values(self, s: float, rtol: float = 1e-10) -> tuple[np.ndarray, float]:
        """(component vector of J at s, log of the factored-out scale)."""
        if s <= 0:
            raise FlatSectionError("the anticanonical ray needs s > 0")
        if self._series_ok(s):
            return self.values_series(s), 0.0
        # seed with the series at a safe point, continue by the matrix ODE
        s0 = 1.0
        if not self._series_ok(s0):
            raise FlatSectionError("series seed point is already out of range")
        y0 = self.sol.full_matrix(self.q_of_s(s0)) @ self.dual_matrix
        y, log_scale = self._continue(y0, np.log(s0), np.log(s), rtol=rtol)
        return y[self.top_index, :], log_scale

    def _rhs(self, u: float) -> np.ndarray:
        q = [np.exp(u) ** e for e in self.exponents]
        return self.qdata.c1_matrix(q)

    def _continue(self, y0: np.ndarray, u0: float, u1: float, rtol: float):
        log_scale = 0.0
        y = np.array(y0, dtype=complex)
        u = u0
        while u < u1 - 1e-14:
            rate = float(np.max(np.abs(self._rhs(u1))))
            du = min(u1 - u, max(40.0 / max(rate, 1.0), 1e-3))

            def odef(t, flat):
                m = self._rhs(t)
                return (m @ flat.reshape(y.shape)).reshape(-1)

            res = solve_ivp(odef, (u, u + du), y.reshape(-1), method="DOP853",
                            rtol=rtol, atol=1e-300)
            if not res.success:
                raise FlatSectionError(f"continuation failed near log s = {res.t[-1]:.3f}")
            y = res.y[:, -1].reshape(y.shape)
            u = float(res.t[-1])
            norm = float(np.max(np.abs(y)))
            if not np.isfinite(norm):
                raise FlatSectionError("continuation overflowed despite rescaling")
            if norm > 1e120:
                y = y / norm
                log_scale += np.log(norm)
        return y, log_scale


def j_function(qdata: QuantumData, s: float, order: int = 80) -> np.ndarray:
    vals, _ = JFunction(qdata, order=order).values(s)
    return vals


# ---------------------------------------------------------------------------
# the Gamma-class limit of the normalized J-function


@dataclass
class GammaLimitReport:
    s_grid: list[float]
    raw: np.ndarray  # normalized J components, rows per grid point
    estimate: np.ndarray
    error_bars: np.ndarray
    expected: np.ndarray
    status: str

    def max_abs_err(self) -> float:
        return float(np.max(np.abs(self.estimate - self.expected)))


def _neville_at_zero(us: np.ndarray, ys: np.ndarray) -> tuple[float, float]:
    """Polynomial extrapolation of y(u) to u = 0 with a noise-aware stop.

    The full tableau is built, but the reported value is the entry whose
    last correction was smallest: deeper columns amplify data noise once the
    true error is exhausted, so the minimum-correction entry wins.
    """
    n = len(us)
    tab = [np.asarray(ys, dtype=float).copy()]
    best = tab[0][-1]
    best_err = abs(tab[0][-1] - tab[0][-2]) if n >= 2 else 0.0
    for m in range(1, n):
        prev = tab[-1]
        cur = np.empty(n - m)
        for i in range(n - m):
            cur[i] = prev[i + 1] + (prev[i + 1] - prev[i]) * us[i + m] / (us[i] - us[i + m])
        tab.append(cur)
        step = abs(cur[-1] - prev[-1])
        if step < best_err or m == 1:
            best = cur[-1]
            best_err = step
    return float(best), float(best_err)


def gamma_limit(qdata: QuantumData, s_grid, order: int = 240,
                gamma: GammaClassData | None = None) -> GammaLimitReport:
    """Accelerated limit of J normalized by its unit component, against the Gamma class."""
    jf = JFunction(qdata, order=order)
    rows = []
    for s in s_grid:
        vals, _ = jf.values(float(s))
        if vals[0] == 0:
            raise FlatSectionError(f"unit-component pairing vanishes at s = {s}")
        rows.append(vals / vals[0])
    raw = np.array(rows)
    us = 1.0 / np.asarray(s_grid, dtype=float)
    order_idx = np.argsort(-us)  # decreasing u, so the tableau ends nearest the limit
    us_sorted = us[order_idx]
    estimates = []
    bars = []
    for comp in range(raw.shape[1]):
        est, bar = _neville_at_zero(us_sorted, raw[order_idx, comp].real)
        estimates.append(est)
        bars.append(bar)
    gamma = gamma or gamma_class(qdata.space)
    estimate = np.array(estimates)
    error_bars = np.array(bars)
    # convergent when the extrapolation bars beat the raw spread decisively
    spread = float(np.max(np.abs(raw[-1] - raw[0])))
    status = "convergent" if np.all(error_bars < 0.05 * max(spread, 1e-12) + 1e-6) else "inconclusive"
    return GammaLimitReport(
        s_grid=[float(s) for s in s_grid],
        raw=raw,
        estimate=estimate,
        error_bars=error_bars,
        expected=gamma.noneq_coeffs,
        status=status,
    )


# ---------------------------------------------------------------------------
# the oscillatory pairing I^A


class IAIntegrator:
    """Evaluates the pairing of the fundamental solution with the normalized Gamma class."""

    def __init__(self, qdata: QuantumData, gamma: GammaClassData | None = None,
                 order: int = 60):
        self.qdata = qdata
        self.space = qdata.space
        self.gamma = gamma or gamma_class(qdata.space)
        self.order = order
        self._systems: dict = {}

    def _system(self, hbar: float, h_key) -> QuantumSystem:
        key = (hbar, h_key)
        if key not in self._systems:
            h = None if h_key is None else list(h_key)
            self._systems[key] = QuantumSystem(self.qdata, hbar, h)
        return self._systems[key]

    def value(self, hbar: float, h, q, y_coeffs) -> complex:
        """I^A(hbar, h, q, y) for y given by Schubert coefficients."""
        if hbar <= 0:
            raise FlatSectionError("the oscillatory pairing is used on the positive hbar ray")
        space = self.space
        n = len(space.reps)
        qv = [complex(x) for x in (q if np.ndim(q) else [q] * len(self.qdata.divisor_indices))]
        y = np.asarray(y_coeffs, dtype=complex)
        equivariant = h is not None and any(complex(x) != 0 for x in h)
        if not equivariant:
            x = normalize_nonequivariant(space, hbar, self.gamma.noneq_coeffs)
            sol = self._system(hbar, None).solution(self.order)
            v = sol.apply(qv, x)
            struct = space.structure_constants()
            g = self._pairing_permutation()
            cup = np.einsum("u,v,uvw->w", v, y, struct.astype(complex))
            return hbar ** (space.ell / 2.0) * complex(cup @ g)
        h = [complex(x) for x in h]
        numeric = space.numeric(h)
        restr = normalize_equivariant_restrictions(
            space, hbar, self.gamma.restriction, h
        )
        x = numeric.restrictions_to_coeffs(restr)
        sol = self._system(hbar, tuple(h)).solution(self.order)
        v = sol.apply(qv, x)
        rv = numeric.coeffs_to_restrictions(v)
        ry = numeric.coeffs_to_restrictions(y)
        return hbar ** (space.ell / 2.0) * numeric.integrate_restrictions(rv * ry)

    def _pairing_permutation(self) -> np.ndarray:
        space = self.space
        n = len(space.reps)
        g = np.zeros(n)
        for iw, w in enumerate(space.reps):
            if w.length == space.ell:
                g[iw] = 1.0
        # integral of sigma_w is 1 exactly at the top class; duality fixes the rest
        return g

    def unit_value(self, hbar: float, h, q) -> complex:
        unit = np.zeros(len(self.space.reps))
        unit[0] = 1.0
        return self.value(hbar, h, q, unit)


def limit_exponents(qdata: QuantumData, hbar: float, h, lam, cap: float = 2.2) -> list[float]:
    """Decay exponents of s^{-lam(h)/hbar} I(q_lam(s)) as s -> 0+.

    The flat-section expansion contributes (lam(w^{-1}h) - lam(h)) / hbar per
    fixed point w, shifted by the nonnegative-integer lattice generated by
    the lam(alpha_i); everything up to the cap is returned, smallest first.
    """
    space = qdata.space
    lam_full = [0.0] * space.rank
    for v, i in zip(lam, qdata.divisor_indices):
        lam_full[i] = float(v)

    def lam_eval(hv) -> complex:
        total = 0.0 + 0j
        for i in range(space.rank):
            if lam_full[i]:
                omega = qdata.fundamental_coweight_form(i)
                total += lam_full[i] * sum(complex(hv[k]) * float(c) for k, c in enumerate(omega))
        return total

    lam_h = lam_eval(h)
    thetas = set()
    for w in space.reps:
        winv = space.group.inverse(w)
        th = (lam_eval(weyl_transform_h(space, winv, h)) - lam_h) / hbar
        thetas.add(round(float(th.real), 12))
    base = sorted({t for t in thetas if 0 <= t <= cap})
    steps = [float(v) for v in lam if v > 0]
    out = set()
    frontier = set(base)
    while frontier:
        e = frontier.pop()
        if e > cap or round(e, 10) in out:
            continue
        out.add(round(e, 10))
        for st in steps:
            frontier.add(e + st)
    return sorted(out)


def fit_limit(s_grid, values, exponents) -> tuple[complex, float]:
    """Least-squares fit sum c_j s^(e_j) with e_0 = 0; returns (c_0, residual)."""
    s = np.asarray(s_grid, dtype=float)
    vals = np.asarray(values, dtype=complex)
    exps = sorted(set(round(float(e), 10) for e in exponents) | {0.0})
    design = np.array([[ss**e for e in exps] for ss in s])
    coef, *_ = np.linalg.lstsq(design, vals, rcond=None)
    resid = float(np.max(np.abs(design @ coef - vals)))
    return complex(coef[exps.index(0.0)]), resid


def ia_integral(qdata: QuantumData, hbar: float, h, q, y_coeffs,
                gamma: GammaClassData | None = None, order: int = 60) -> complex:
    """One-shot evaluation of the oscillatory pairing; see IAIntegrator."""
    return IAIntegrator(qdata, gamma=gamma, order=order).value(hbar, h, q, y_coeffs)


def ia_equivariant_limit_expected(space: FlagSpace, hbar: float, h) -> complex:
    """Closed form of the small-q limit: a power of hbar times Gamma values at the identity weights."""
    from .gammaclass import _gamma_cached

    rho_pairing = -c1_restriction(space, 0, h)  # (2rho - 2rho_P)(h)
    out = complex(hbar) ** (-rho_pairing / hbar)
    for weight in space.fixed_point_weights(space.reps[0]):
        arg = sum(complex(h[i]) * c for i, c in enumerate(weight)) / hbar
        out *= _gamma_cached(arg)
    return out


# ---------------------------------------------------------------------------
# asymptotic class membership


@dataclass
class AsymptoticReport:
    passes: bool
    slope: float
    intercept: float
    fit_residual: float
    flat_residual: float
    grid: list[float]
    log_norms: list[float]
    notes: str = ""


def mu_matrix(space: FlagSpace) -> np.ndarray:
    return np.diag([w.length - space.ell / 2.0 for w in space.reps])


def asymptotic_class_test(qdata: QuantumData, section, e_value: float, hbar_grid,
                          slope_cap: float = 15.0, fit_tol: float = 0.1,
                          flat_tol: float = 1e-5) -> AsymptoticReport:
    """Decide membership in the exponentially-decaying class at the given level.

    ``section`` is a callable hbar -> coefficient vector.  It must satisfy
    the hbar-direction connection (checked by finite differences), and
    log || e^{E/hbar} s || must fit a line in log hbar.
    """
    space = qdata.space
    c1 = qdata.c1_matrix([1.0] * len(qdata.divisor_indices)).real
    mu = mu_matrix(space)
    grid = sorted(float(x) for x in hbar_grid)
    # flatness residual by Richardson-extrapolated central differences
    mid = grid[len(grid) // 2]
    flat_res = 0.0
    for hb in (mid, grid[-1]):
        delta = 1e-3 * hb
        d1 = (np.asarray(section(hb + delta)) - np.asarray(section(hb - delta))) / (2 * delta)
        d2 = (np.asarray(section(hb + delta / 2)) - np.asarray(section(hb - delta / 2))) / delta
        deriv = (4 * d2 - d1) / 3
        target = (c1 @ np.asarray(section(hb))) / hb**2 - (mu @ np.asarray(section(hb))) / hb
        denom = max(float(np.linalg.norm(target)), 1e-30)
        flat_res = max(flat_res, float(np.linalg.norm(deriv - target)) / denom)
    log_norms = []
    kept = []
    notes = ""
    for hb in grid:
        vec = np.asarray(section(hb), dtype=complex)
        scaled = np.exp(e_value / hb) * np.linalg.norm(vec)
        if not np.isfinite(scaled) or scaled == 0:
            notes = "grid trimmed at underflow/overflow points"
            continue
        kept.append(hb)
        log_norms.append(float(np.log(scaled)))
    if len(kept) < 4:
        return AsymptoticReport(False, float("nan"), float("nan"), float("inf"),
                                flat_res, kept, log_norms, notes or "grid too short")
    xs = np.log(np.array(kept))
    ys = np.array(log_norms)
    a = np.vstack([xs, np.ones_like(xs)]).T
    coef, *_ = np.linalg.lstsq(a, ys, rcond=None)
    fit = a @ coef
    resid = float(np.sqrt(np.mean((ys - fit) ** 2)))
    slope, intercept = float(coef[0]), float(coef[1])
    passes = (
        np.isfinite(slope)
        and abs(slope) <= slope_cap
        and resid <= fit_tol
        and flat_res <= flat_tol
    )
    return AsymptoticReport(passes, slope, intercept, resid, flat_res, kept, log_norms, notes)


def perturbed_section(qdata: QuantumData, section, hbar_max: float, epsilon: float = 1e-6):
    """Contaminate a flat section with a downward-continued generic flat solution.

    Downward integration amplifies the dominant growth mode, which is exactly
    the contamination the membership test must reject.
    """
    space = qdata.space
    c1 = qdata.c1_matrix([1.0] * len(qdata.divisor_indices)).real
    mu = mu_matrix(space)
    n = len(space.reps)
    seed = np.ones(n) / np.sqrt(n)
    base = np.asarray(section(hbar_max), dtype=complex)
    scale0 = float(np.linalg.norm(base))

    cache: dict[float, np.ndarray] = {hbar_max: seed * scale0}

    def phi(hb: float) -> np.ndarray:
        if hb not in cache:
            def odef(t, yv):
                return (c1 @ yv) / t**2 - (mu @ yv) / t

            res = solve_ivp(odef, (hbar_max, hb), cache[hbar_max].real,
                            method="DOP853", rtol=1e-10, atol=1e-280)
            if not res.success:
                raise FlatSectionError("perturbation continuation failed")
            cache[hb] = res.y[:, -1]
        return cache[hb]

    def contaminated(hb: float) -> np.ndarray:
        return np.asarray(section(hb), dtype=complex) + epsilon * phi(float(hb))

    return contaminated


# ---------------------------------------------------------------------------
# the inverse mirror transform on the c1-generated span


@dataclass
class MirSpanReport:
    powers: list[dict]  # A_k as {degree tuple: coefficient vector}
    coefficients: np.ndarray  # rows v, columns k with sigma^v = sum_k c A_k at the given q
    status: str  # "full" or "partial"
    rank: int


def _c1_connection_polynomial(qdata: QuantumData, h=None) -> dict[tuple, np.ndarray]:
    """sum_i <c1,beta_i> C_i(q) as {q-degree: matrix} at numeric h (or 0)."""
    out: dict[tuple, np.ndarray] = {}
    n = len(qdata.space.reps)
    zero = (0,) * len(qdata.divisor_indices)
    for i in qdata.divisor_indices:
        w = qdata.c1_pairing(i)
        classical = np.array(qdata.classical_integer_matrix(i), dtype=complex)
        if h is not None and any(complex(x) != 0 for x in h):
            classical = classical + np.diag(qdata.divisor_restriction_diag(i, h))
            omega = qdata.fundamental_coweight_form(i)
            shift = sum(complex(h[k]) * float(c) for k, c in enumerate(omega))
            classical = classical - shift * np.eye(n)
        out[zero] = out.get(zero, np.zeros((n, n), dtype=complex)) + w * classical
        for d, m in qdata.quantum_parts(i).items():
            out[d] = out.get(d, np.zeros((n, n), dtype=complex)) + w * np.array(m, dtype=complex)
    return out


def mir_inverse_on_c1_span(qdata: QuantumData, hbar_formal: complex, q, h=None,
                           k_max: int | None = None, rank_tol: float = 1e-9) -> MirSpanReport:
    """Express the dual Schubert classes through the mirror images of f^k volumes.

    A_0 is the unit; each next class applies the anticanonical derivation
    hbar nabla_V minus k hbar.  The returned coefficients are taken at the
    formal-parameter value supplied by the caller (the oscillatory side
    evaluates its integrands at the negated parameter).
    """
    space = qdata.space
    n = len(space.reps)
    k_max = space.ell if k_max is None else k_max
    weights = [qdata.c1_pairing(i) for i in qdata.divisor_indices]
    c1_poly = _c1_connection_polynomial(qdata, h)
    zero = (0,) * len(qdata.divisor_indices)
    unit = np.zeros(n, dtype=complex)
    unit[0] = 1.0
    powers: list[dict] = [{zero: unit}]
    for k in range(k_max):
        prev = powers[-1]
        new: dict[tuple, np.ndarray] = {}
        for d, vec in prev.items():
            euler_weight = sum(di * wi for di, wi in zip(d, weights))
            _accumulate(new, d, hbar_formal * euler_weight * vec)
            for dd, mat in c1_poly.items():
                _accumulate(new, tuple(a + b for a, b in zip(d, dd)), mat @ vec)
            _accumulate(new, d, -k * hbar_formal * vec)
        powers.append({d: v for d, v in new.items() if np.any(np.abs(v) > 0)})
    qv = [complex(x) for x in (q if np.ndim(q) else [q] * len(qdata.divisor_indices))]
    cols = []
    for p in powers:
        acc = np.zeros(n, dtype=complex)
        for d, vec in p.items():
            mono = np.prod([qq**dd for qq, dd in zip(qv, d)]) if any(d) else 1.0
            acc = acc + mono * vec
        cols.append(acc)
    w_matrix = np.array(cols).T  # n x (k_max + 1)
    if h is not None and any(complex(x) != 0 for x in h):
        duals = np.array(
            [[complex(c.evaluate(h)) for c in row] for row in space.dual_classes()]
        )
    else:
        duals = np.array(
            [[complex(c.constant()) for c in row] for row in space.dual_classes()]
        )
    sol, residues, rank, _ = np.linalg.lstsq(w_matrix, duals.T, rcond=rank_tol)
    reconstructed = w_matrix @ sol
    status = "full" if np.allclose(reconstructed, duals.T, atol=1e-8) else "partial"
    return MirSpanReport(powers=powers, coefficients=sol.T, status=status,
                         rank=int(rank))


def _accumulate(store: dict, key: tuple, val: np.ndarray) -> None:
    if key in store:
        store[key] = store[key] + val
    else:
        store[key] = np.array(val, dtype=complex)


@dataclass
class FlatSection:
    """A section of the hbar-direction connection with provenance."""

    evaluate: object  # callable hbar -> coefficient vector
    provenance: str  # "series" | "ODE-continued" | "integral-backed"
    label: str = ""

    def __call__(self, hbar: float) -> np.ndarray:
        return np.asarray(self.evaluate(hbar), dtype=complex)


def gamma_flat_section(qdata: QuantumData, mirror_space=None) -> FlatSection:
    """The integral-backed Gamma section at q = 1, h = 0, from the oscillatory side."""
    from . import mirror as mirror_mod

    space = qdata.space
    if mirror_space is None:
        mirror_space = mirror_mod.MirrorSpace(space)
    n = len(space.reps)
    t_one = [1.0] * len(qdata.divisor_indices)

    def evaluate(hbar: float) -> np.ndarray:
        span = mir_inverse_on_c1_span(qdata, hbar_formal=-hbar, q=[1.0] * len(qdata.divisor_indices))
        if span.status != "full":
            raise FlatSectionError("cohomology not generated by c1; cannot back the section by integrals")
        k_max = span.coefficients.shape[1] - 1
        moments = np.array(
            [mirror_mod.ib_integral(mirror_space, hbar, None, t_one, power=k).value
             for k in range(k_max + 1)]
        )
        comps = span.coefficients @ moments
        return hbar ** (-space.ell / 2.0) * comps

    return FlatSection(evaluate=evaluate, provenance="integral-backed", label="gamma-section")
