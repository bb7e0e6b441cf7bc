"""Thermodynamics of finite-truncation subshifts of finite type.

Letters are 1-based integers. Potentials are locally constant at a chosen
cylinder depth k, which makes every transfer operator an exact finite matrix
on depth-k cylinder indicators; the Hoelder remainder of a general potential
is carried as an explicit error bound, never discretized silently. Infinite
alphabets enter by truncation with a declared tail-mass certificate.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetExceeded, DivergentSeries, NoConvergence, SummabilityViolated
from .rng import uniform_stream
from .spectral import SpectralData, leading_spectral_data

Word = tuple


class SymbolicSystem:
    """Finite-alphabet subshift: alphabet {1..M} and a 0/1 incidence matrix.

    incidence[a-1][b-1] = 1 means the two-letter word "ab" is admissible.
    """

    def __init__(self, incidence: np.ndarray):
        A = np.asarray(incidence, dtype=np.uint8)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("incidence must be square")
        if np.any(A.sum(axis=1) == 0):
            raise ValueError("every letter needs an outgoing edge")
        self.incidence = A
        self.alphabet_size = A.shape[0]
        self.primitivity_witness = None
        self._word_cache: dict[int, list[Word]] = {}

    @staticmethod
    def full_shift(m: int) -> "SymbolicSystem":
        return SymbolicSystem(np.ones((m, m), dtype=np.uint8))

    @property
    def is_full(self) -> bool:
        return bool(np.all(self.incidence == 1))

    def allows(self, a: int, b: int) -> bool:
        return bool(self.incidence[a - 1, b - 1])

    def word_admissible(self, w: Word) -> bool:
        return all(self.allows(w[i], w[i + 1]) for i in range(len(w) - 1))

    def cylinder_words(self, depth: int) -> list[Word]:
        """All admissible words of the given length, lexicographic order."""
        if depth < 1:
            raise ValueError("depth must be >= 1")
        if depth not in self._word_cache:
            if self.alphabet_size**depth > 10**6:
                raise BudgetExceeded("cylinder basis would exceed 1e6 words")
            letters = range(1, self.alphabet_size + 1)
            words = [w for w in itertools.product(letters, repeat=depth)
                     if self.word_admissible(w)]
            self._word_cache[depth] = words
        return self._word_cache[depth]

    def label(self) -> str:
        kind = "full" if self.is_full else "sft"
        return f"{kind}[{self.alphabet_size}]"


@dataclass(frozen=True)
class PrimitivityWitness:
    length: int
    words: tuple

    @property
    def found(self) -> bool:
        return True


@dataclass(frozen=True)
class PrimitivityFailure:
    searched_up_to: int

    @property
    def found(self) -> bool:
        return False


def check_finitely_primitive(S: SymbolicSystem, max_len: int = 8):
    """Smallest common length of connecting words, by exhaustive search.

    For each length l <= max_len, checks whether for every letter pair (a, b)
    some word tau of length l makes a|tau|b admissible; the number of paths
    of length l+1 from a to b is (A^(l+1))[a][b], and a witness word is
    reconstructed per pair when the count is positive. Failure is reported,
    not asserted as non-primitivity.
    """
    if max_len > 8:
        raise ValueError("max_len must be <= 8")
    A = S.incidence.astype(np.int64)
    power = A.copy()
    for length in range(1, max_len + 1):
        power = power @ A  # paths of length `length` + 1
        if np.all(power > 0):
            letters = range(1, S.alphabet_size + 1)
            words = tuple(sorted(
                tau for tau in S.cylinder_words(length)
                if any(S.word_admissible((a,) + tau + (b,))
                       for a in letters for b in letters)))
            witness = PrimitivityWitness(length=length, words=words)
            S.primitivity_witness = witness
            return witness
    return PrimitivityFailure(searched_up_to=max_len)


# ---------------------------------------------------------------------------
# potentials
# ---------------------------------------------------------------------------

@dataclass
class PotentialSpec:
    """Locally constant potential on depth-k cylinders.

    values maps each admissible depth-k word to a real number. The Hoelder
    data (exponent alpha, level-1 constant v_alpha) and the truncation
    tail_mass are carried as certificates for error reporting.
    """

    depth: int
    values: dict
    alpha: float = 1.0
    v_alpha: float = 0.0
    tail_mass: float = 0.0

    def __post_init__(self):
        self.values = {tuple(k): float(v) for k, v in self.values.items()}
        if max(self.values.values()) >= 0:
            raise ValueError("potential must be negative: sup psi < 0")

    def value(self, w: Word) -> float:
        return self.values[tuple(w[: self.depth])]

    def vector(self, basis: list[Word]) -> np.ndarray:
        return np.array([self.values[w] for w in basis])

    def shifted(self, c: float) -> "PotentialSpec":
        return PotentialSpec(self.depth, {w: v + c for w, v in self.values.items()},
                             self.alpha, self.v_alpha, self.tail_mass)

    @staticmethod
    def constant(S: SymbolicSystem, value: float, depth: int = 1) -> "PotentialSpec":
        return PotentialSpec(depth, {w: value for w in S.cylinder_words(depth)})

    @staticmethod
    def from_letter_values(S: SymbolicSystem, per_letter: dict) -> "PotentialSpec":
        return PotentialSpec(1, {(a,): v for a, v in per_letter.items()})


def calibrate(S: SymbolicSystem, psi: PotentialSpec) -> PotentialSpec:
    """Shift the potential by a constant so that its pressure vanishes."""
    lam = spectral_data(S, psi, 1.0, want_gap=False).lam.real
    return psi.shifted(-math.log(lam))


# ---------------------------------------------------------------------------
# transfer matrices on the cylinder basis
# ---------------------------------------------------------------------------

@dataclass
class CylinderMatrix:
    """Exact matrix of g -> sum_a psi^p e^{s psi}(a omega) g(a omega)."""

    s: complex
    p: float
    matrix: np.ndarray
    basis: list
    index: dict
    meta: dict = field(default_factory=dict)

    def apply(self, vec: np.ndarray) -> np.ndarray:
        return self.matrix @ vec


def _weight(x: float, s: complex, p: float) -> complex:
    if p == 0:
        return np.exp(s * x)
    return x**p * np.exp(s * x) if p == int(p) else abs(x) ** p * np.exp(s * x)


def cylinder_operator(S: SymbolicSystem, psi: PotentialSpec, s: complex = 1.0,
                      p: float = 0.0) -> CylinderMatrix:
    """Assemble the transfer matrix on depth-k cylinder indicators.

    For a word w, the predecessors are w' = a + w[:k-1]; the entry is the
    weight at w', which is exact because psi is locally constant at depth k.
    """
    k = psi.depth
    basis = S.cylinder_words(k)
    index = {w: i for i, w in enumerate(basis)}
    n = len(basis)
    mat = np.zeros((n, n), dtype=complex)
    for i, w in enumerate(basis):
        for a in range(1, S.alphabet_size + 1):
            if not S.allows(a, w[0]):
                continue
            wp = (a,) + w[:-1] if k > 1 else (a,)
            j = index.get(wp)
            if j is None:
                continue
            mat[i, j] += _weight(psi.values[wp], s, p)
    return CylinderMatrix(s=complex(s), p=float(p), matrix=mat, basis=basis,
                          index=index, meta={"system": S.label(), "depth": k})


def spectral_data(S: SymbolicSystem, psi: PotentialSpec, s: complex = 1.0,
                  tol: float = 1e-14, want_gap: bool = True) -> SpectralData:
    """Leading eigendata of L_{s psi} on the cylinder basis.

    For complex s the returned lam is the dominant eigenvalue found by power
    iteration; `peripheral` flags a modulus matching the real-parameter
    eigenvalue at Re(s) within 1e-9, the signature of a lattice potential.
    """
    if complex(s).real < 1.0 - 1e-12:
        raise ValueError("spectral data is defined on the half-plane Re s >= 1")
    M = cylinder_operator(S, psi, s, 0.0)
    data = leading_spectral_data(M.matrix, tol=tol, want_gap=want_gap)
    if abs(complex(s).imag) > 0:
        ref = cylinder_operator(S, psi, complex(s).real, 0.0)
        lam_ref = leading_spectral_data(ref.matrix, tol=tol, want_gap=False).lam.real
        data.peripheral = abs(abs(data.lam) - lam_ref) < 1e-9 * max(1.0, lam_ref)
    data.meta.update(M.meta)
    return data


def summability_stats(S: SymbolicSystem, psi: PotentialSpec, s: float = 1.0,
                      p: float = 0.0):
    """(inf_sum, sup_sum, integral) of |psi^p e^{s psi}| data per letter.

    inf_sum and sup_sum run over depth-1 cylinders; the integral is of
    |psi|^p against the conformal measure at parameter s. The three are
    comparable for level-1 Hoelder potentials, which the tests check.
    """
    basis = S.cylinder_words(psi.depth)
    vals = psi.vector(basis)
    weights = np.abs(vals) ** p * np.exp(s * vals)
    inf_sum = sup_sum = 0.0
    for a in range(1, S.alphabet_size + 1):
        sel = [i for i, w in enumerate(basis) if w[0] == a]
        if not sel:
            continue
        inf_sum += float(np.min(weights[sel]))
        sup_sum += float(np.max(weights[sel]))
    data = spectral_data(S, psi, s, want_gap=False)
    integral = float(np.dot(data.weights, np.abs(vals) ** p))
    if not (np.isfinite(inf_sum) and np.isfinite(sup_sum) and np.isfinite(integral)):
        raise SummabilityViolated("summability quantities are not finite")
    return inf_sum, sup_sum, integral


def equilibrium_cylinder_masses(S: SymbolicSystem, psi: PotentialSpec,
                                s: float = 1.0) -> tuple[list, np.ndarray, SpectralData]:
    """(basis, mu([w]) for each w, spectral data); mu = rho * m."""
    data = spectral_data(S, psi, s, want_gap=False)
    mu = (data.rho * data.weights).real
    mu = mu / np.sum(mu)
    return S.cylinder_words(psi.depth), mu, data


# ---------------------------------------------------------------------------
# pressure derivatives along real s
# ---------------------------------------------------------------------------

@dataclass
class ShiftPressureReport:
    dp: float
    ddp: float
    mean_integral: float        # int psi d(mu_1), the first-derivative prediction
    variance_gk: float          # Green-Kubo variance of psi - mean, second-derivative prediction
    nodes: dict


def _gk_variance_shift(S, psi, lam, rho, weights, k_max: int = 400) -> float:
    basis = S.cylinder_words(psi.depth)
    vals = psi.vector(basis)
    mu = rho * weights
    mu = mu / np.sum(mu)
    phi = vals - float(np.dot(mu, vals))
    M = cylinder_operator(S, psi, 1.0, 0.0).matrix.real
    total = float(np.dot(mu, phi * phi))
    u = rho * phi
    prev = abs(total)
    for _ in range(k_max):
        u = (M @ u) / lam
        term = float(np.dot(weights, phi * u))
        total += 2.0 * term
        if abs(term) < 1e-16 * max(1.0, abs(total)):
            break
        prev = max(abs(term), 0.5 * prev)
    return total


def pressure_derivs_shift(S: SymbolicSystem, psi: PotentialSpec,
                          h: float = 1e-3) -> ShiftPressureReport:
    """One-sided derivatives of P(s) = log lambda_s at s = 1, with Richardson.

    Second-order one-sided stencils at steps h and h/2 are combined to third
    order. The independent predictions (integral of psi and the Green-Kubo
    variance of its centered part) ride along for cross-checking.
    """
    svals = sorted({1.0, 1.0 + h / 2, 1.0 + h, 1.0 + 3 * h / 2, 1.0 + 2 * h, 1.0 + 3 * h})
    P = {}
    for sv in svals:
        lam = spectral_data(S, psi, sv, want_gap=False).lam.real
        if lam <= 0:
            raise NoConvergence("nonpositive leading eigenvalue on the real axis")
        P[sv] = math.log(lam)

    def d1(step):
        return (-3 * P[1.0] + 4 * P[1.0 + step] - P[1.0 + 2 * step]) / (2 * step)

    def d2(step):
        return (2 * P[1.0] - 5 * P[1.0 + step] + 4 * P[1.0 + 2 * step]
                - P[1.0 + 3 * step]) / step**2

    dp = (4 * d1(h / 2) - d1(h)) / 3
    ddp = (4 * d2(h / 2) - d2(h)) / 3
    basis, mu, data = equilibrium_cylinder_masses(S, psi, 1.0)
    vals = psi.vector(basis)
    mean_integral = float(np.dot(mu, vals))
    var_gk = _gk_variance_shift(S, psi, data.lam.real, data.rho.real,
                                data.weights.real)
    return ShiftPressureReport(dp=dp, ddp=ddp, mean_integral=mean_integral,
                               variance_gk=var_gk, nodes=P)


# ---------------------------------------------------------------------------
# Poincare series
# ---------------------------------------------------------------------------

@dataclass
class EtaResult:
    series: complex        # partial sums of L_s^n f_s at the seed
    resolvent: complex     # (1 - lam)^{-1} R f_s + sum Delta^n f_s at the seed
    terms: int

    @property
    def agreement(self) -> float:
        return abs(self.series - self.resolvent)


def _offset_vector(S, psi, offset, basis) -> np.ndarray:
    if offset is None:
        return np.zeros(len(basis))
    if isinstance(offset, PotentialSpec):
        return offset.vector(basis)
    if isinstance(offset, dict):
        return np.array([offset.get(w, 0.0) for w in basis])
    arr = np.asarray(offset, dtype=float)
    if arr.shape != (len(basis),):
        raise ValueError("offset vector does not match the cylinder basis")
    return arr


def poincare_eta(S: SymbolicSystem, psi: PotentialSpec, offset, s: complex,
                 xi: Word, tail_tol: float = 1e-12,
                 max_doublings: int = 60) -> EtaResult:
    """eta(s) at the seed xi, by operator partial sums and by the resolvent.

    The series route accumulates partial sums of L_s^n f_s at dyadic
    truncation lengths via the doubling identity
    sum_{n < 2K} M^n = (I + M^K) sum_{n < K} M^n, stopping once the last
    doubling changed the seed value by less than tail_tol. The resolvent
    route splits off the rank-one eigenprojection:
    (1 - lam_s)^{-1} R_s f_s plus the geometric remainder sum. Both values
    are returned; they must agree for a convergent series.
    """
    k = psi.depth
    if len(xi) < k:
        raise ValueError(f"seed must supply at least {k} letters")
    if not S.word_admissible(tuple(xi[: k + 1])):
        raise ValueError("seed word is not admissible")
    basis = S.cylinder_words(k)
    index = {w: i for i, w in enumerate(basis)}
    i_seed = index[tuple(xi[:k])]
    f = np.exp(complex(s) * _offset_vector(S, psi, offset, basis)).astype(complex)
    M = cylinder_operator(S, psi, s, 0.0).matrix

    partial = f.copy()          # sum_{n < K} M^n f with K = 2^j
    power = M.copy()            # M^K
    terms = 1
    converged = False
    for _ in range(max_doublings):
        nxt = partial + power @ partial
        delta = abs(nxt[i_seed] - partial[i_seed])
        grew = np.max(np.abs(nxt)) > 1e6 * max(1.0, np.max(np.abs(f)))
        partial = nxt
        power = power @ power
        terms *= 2
        if grew:
            raise DivergentSeries("operator series grows; no spectral gap here")
        if delta < tail_tol * max(1.0, abs(partial[i_seed])):
            converged = True
            break
    if not converged:
        raise DivergentSeries("operator series failed to settle within budget")
    total = partial[i_seed]
    n = terms

    data = leading_spectral_data(M, want_gap=False)
    lam = data.lam
    if abs(1.0 - lam) < 1e-14:
        raise DivergentSeries("leading eigenvalue is 1; eta has a pole here")
    rho, w = data.rho, data.weights
    proj = rho * np.dot(w, f)
    res_total = proj[i_seed] / (1.0 - lam)
    u = f - proj
    for _ in range(100_000):
        res_total += u[i_seed]
        u = M @ u - lam * rho * np.dot(w, u)
        if np.max(np.abs(u)) < 1e-15 * max(1.0, abs(res_total)):
            break
    return EtaResult(series=complex(total), resolvent=complex(res_total), terms=n)


# ---------------------------------------------------------------------------
# counting on the shift
# ---------------------------------------------------------------------------

def count_words(S: SymbolicSystem, psi: PotentialSpec, xi: Word, T: float,
                B=None, node_budget: int = 10**7):
    """Exact DFS count of prefix words with Birkhoff sum of -psi at most T.

    Events are pairs (S_{|w|}(-psi)(w xi), w); prepending a letter increases
    the sum by at least min(-psi) > 0, which prunes the tree. B is a list of
    cylinder words; membership of w xi in [tau] compares letters of w padded
    by xi. Returns a counting ledger whose member mask reflects B.
    """
    from .counting import CountingLedger

    k = psi.depth
    if len(xi) < max(1, k - 1) + 1:
        raise ValueError("seed too short for the potential depth")
    xi = tuple(xi)
    cylinders = [tuple(t) for t in B] if B is not None else None
    max_tau = max((len(t) for t in cylinders), default=0) if cylinders else 0

    def member(word):
        if cylinders is None:
            return True
        stream = word + xi
        return any(stream[: len(t)] == t for t in cylinders)

    head = xi[: max(1, k - 1)]
    values = []
    members = []
    nodes = 0
    stack = [((), head, 0.0)] if T >= 0.0 else []
    while stack:
        word, state, acc = stack.pop()
        nodes += 1
        if nodes > node_budget:
            raise BudgetExceeded("word enumeration exceeded the node budget")
        values.append(acc)
        members.append(member(word))
        for a in range(S.alphabet_size, 0, -1):
            if not S.allows(a, state[0]):
                continue
            key = ((a,) + state)[:k] if k > 1 else (a,)
            inc = -psi.values[key]
            if acc + inc <= T:
                new_state = ((a,) + state)[: max(1, k - 1)]
                stack.append(((a,) + word[: max(max_tau - 1, 0)], new_state, acc + inc))
    return CountingLedger.from_events(
        np.array(values), member_mask=np.array(members, dtype=bool),
        T_max=T, space="shift",
        meta={"system": S.label(), "seed": xi[:8], "B": cylinders})


# ---------------------------------------------------------------------------
# D-genericity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LatticeVerdict:
    kind: str                 # "lattice" | "generic"
    generator: float | None
    periods_scanned: int
    n_values: int

    @property
    def is_lattice(self) -> bool:
        return self.kind == "lattice"


def periodic_birkhoff_values(S: SymbolicSystem, psi: PotentialSpec,
                             max_period: int, node_budget: int = 10**7) -> np.ndarray:
    """S_n(psi) over all cyclic admissible words of period n <= max_period."""
    k = psi.depth
    out = []
    total = 0
    for n in range(1, max_period + 1):
        total += S.alphabet_size**n
        if total > node_budget:
            raise BudgetExceeded("periodic-word scan exceeds the node budget")
        for w in itertools.product(range(1, S.alphabet_size + 1), repeat=n):
            if not all(S.allows(w[i], w[(i + 1) % n]) for i in range(n)):
                continue
            ext = tuple(w[(i) % n] for i in range(n + k))
            out.append(sum(psi.values[ext[j: j + k]] for j in range(n)))
    return np.array(out)


def lattice_verdict(values, max_period: int, tol: float = 1e-9) -> LatticeVerdict:
    """Decide whether the given Birkhoff values lie in a*Z for some a > 0.

    A floating-point Euclidean cascade extracts the candidate generator g.
    The verdict is lattice only when g stays on the scale of the values
    (g > 1e-4 * min value): for incommensurable values the cascade runs the
    continued-fraction expansion down to the cutoff instead, which is the
    rationality test. tol is the cascade's absolute termination tolerance.
    """
    vals = np.sort(np.abs(np.asarray(values, dtype=float)))
    vals = vals[vals > 10 * tol]
    if len(vals) == 0:
        return LatticeVerdict("lattice", None, max_period, 0)
    scale = float(vals[0])
    floor = max(tol, 1e-4 * scale)

    def fold(a, b):
        while b > tol:
            r = math.fmod(a, b)
            r = min(r, abs(b - r))
            a, b = b, r
        return a

    g = scale
    for v in vals[1:]:
        g = fold(max(g, v), min(g, v))
        if g <= floor:
            return LatticeVerdict("generic", None, max_period, len(vals))
    mults = np.abs(vals / g - np.round(vals / g)) * g
    if np.all(mults < max(100 * tol, 1e-7 * scale)):
        return LatticeVerdict("lattice", float(g), max_period, len(vals))
    return LatticeVerdict("generic", None, max_period, len(vals))


def d_genericity(S: SymbolicSystem, psi: PotentialSpec, max_period: int = 8,
                 tol: float = 1e-9) -> LatticeVerdict:
    """Lattice-or-generic verdict from the periodic Birkhoff values."""
    if max_period > 12:
        raise ValueError("max_period must be <= 12")
    return lattice_verdict(periodic_birkhoff_values(S, psi, max_period),
                           max_period, tol)


# ---------------------------------------------------------------------------
# empirical Hoelder modulus of s -> L_{s,q}
# ---------------------------------------------------------------------------

def _holder_norm_data(basis, alpha: float):
    """Pairwise weights 2^(alpha * common_prefix_length) for the variation."""
    n = len(basis)
    cp = np.zeros((n, n))
    for i in range(n):
        wi = basis[i]
        for j in range(i + 1, n):
            wj = basis[j]
            c = 0
            for x, y in zip(wi, wj):
                if x != y:
                    break
                c += 1
            cp[i, j] = cp[j, i] = c
    return 2.0 ** (alpha * cp)


def _holder_norm(vec, weight_mat) -> float:
    v = np.abs(vec[:, None] - vec[None, :]) * weight_mat
    return float(np.max(np.abs(vec)) + np.max(v))


def holder_modulus_in_s(S: SymbolicSystem, psi: PotentialSpec, q: float,
                        s0: complex = 1.0, radius: float = 0.5,
                        levels: int = 8, probes: int = 32, seed: int = 0):
    """Fit ||L_{s,q} - L_{t,q}|| ~ C |s - t|^eps along the critical line.

    Pairs t = s0 + i * radius * 2^{-j}; the operator-norm estimate maximizes
    the Hoelder-norm amplification over cylinder indicators and seeded random
    probe vectors. Returns (C_fit, eps_fit) from the log-log least squares.
    """
    basis = S.cylinder_words(psi.depth)
    n = len(basis)
    wmat = _holder_norm_data(basis, psi.alpha)
    probe_set = [np.eye(n)[i] for i in range(min(n, 64))]
    for i in range(probes):
        probe_set.append(uniform_stream(seed, n, offset=i * n) - 0.5)
    base = cylinder_operator(S, psi, s0, q).matrix
    gaps = []
    deltas = []
    for j in range(1, levels + 1):
        t = complex(s0) + 1j * radius * 2.0 ** (-j)
        other = cylinder_operator(S, psi, t, q).matrix
        D = other - base
        best = 0.0
        for g in probe_set:
            ng = _holder_norm(g, wmat)
            if ng < 1e-300:
                continue
            best = max(best, _holder_norm(D @ g, wmat) / ng)
        gaps.append(radius * 2.0 ** (-j))
        deltas.append(max(best, 1e-300))
    logx = np.log(np.array(gaps))
    logy = np.log(np.array(deltas))
    eps_fit, logC = np.polyfit(logx, logy, 1)
    return float(np.exp(logC)), float(eps_fit)
