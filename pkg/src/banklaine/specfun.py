"""Model meromorphic functions g(z) = R(e^z) * exp(e^z) and their calculus.

The rational factor R = P/Q is indexed by a pair (m, n): Q has degree m with
positive factorial-ratio coefficients, P has degree 2n with alternating ones.
Both model families used downstream (plain and half-shifted) evaluate through
the log-polar ScaledComplex type, so moduli like exp(exp(40)) stay exact in
log space and phases stay exact on the real axis.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from math import lgamma
from typing import Callable, Optional, Sequence

import mpmath as mp
import numpy as np

from . import contour
from .scaledcx import ScaledComplex, wrap_phase

TWO_PI = 2.0 * math.pi

PAIR_CAP = 10_000
SINGULAR_TOL = 1e-13  # Newton distance |T/(dT/dz)| below this => root hit (zero/pole)
CANCEL_TOL = 1e-4     # |T|/max-term below this => redo the sum at high precision

PLAIN = "plain"
HALF = "half"
VARIANTS = (PLAIN, HALF)


class EvalDomainError(ValueError):
    """Evaluation requested outside the representable domain."""


@dataclass(frozen=True, order=True)
class PairIndex:
    """Index (m, n) of a model function; N = m + 2n + 1 is its left slope."""

    m: int
    n: int

    def __post_init__(self):
        for v, name in ((self.m, "m"), (self.n, "n")):
            if not isinstance(v, int) or v < 0 or v > PAIR_CAP:
                raise ValueError(f"{name} must be an integer in [0, {PAIR_CAP}], got {v!r}")

    @property
    def N(self) -> int:
        return self.m + 2 * self.n + 1

    def __str__(self) -> str:
        return f"({self.m},{self.n})"


@dataclass(frozen=True)
class CoefficientTable:
    """Coefficients of P (numerator, degree 2n) and Q (denominator, degree m).

    Exact values are Fractions; float and log-magnitude mirrors are kept for
    the stable log-sum evaluation path.  ``log_norm`` is
    log(binom(m+2n, m) * (m+2n)!), the constant in the closed-form derivative.
    """

    pair: PairIndex
    log_abs_numer: np.ndarray = field(repr=False)
    log_abs_denom: np.ndarray = field(repr=False)
    log_norm: float = 0.0

    @cached_property
    def numer(self) -> tuple[Fraction, ...]:
        m, n2 = self.pair.m, 2 * self.pair.n
        top = math.factorial(m + n2)
        return tuple(
            Fraction(
                (-1) ** j * math.factorial(n2) * math.factorial(m + n2 - j),
                math.factorial(j) * math.factorial(n2 - j) * top,
            )
            for j in range(n2 + 1)
        )

    @cached_property
    def denom(self) -> tuple[Fraction, ...]:
        m, n2 = self.pair.m, 2 * self.pair.n
        top = math.factorial(m + n2)
        return tuple(
            Fraction(
                math.factorial(m) * math.factorial(m + n2 - i),
                math.factorial(i) * math.factorial(m - i) * top,
            )
            for i in range(m + 1)
        )

    @property
    def identity_product(self) -> Fraction:
        """Exact product |A_m * B_{2n}| of the two extreme coefficients."""
        return self.denom[-1] * abs(self.numer[-1])

    @property
    def identity_expected(self) -> Fraction:
        m, n = self.pair.m, self.pair.n
        s = math.factorial(m + 2 * n)
        return Fraction(math.factorial(m) * math.factorial(2 * n), s * s)

    def identity_holds(self) -> bool:
        """Exact check of A_m * B_{2n} = m!(2n)!/((m+2n)!)^2 in big rationals."""
        return self.identity_product == self.identity_expected


@lru_cache(maxsize=256)
def build_coefficients(pair: PairIndex) -> CoefficientTable:
    """Coefficient table for the pair, with log-magnitudes built from lgamma.

    The values solve the two-term recursions forced by the underlying linear
    ODE:  A_i = m!(m+2n-i)!/(i!(m-i)!(m+2n)!)  and
    B_j = (-1)^j (2n)!(m+2n-j)!/(j!(2n-j)!(m+2n)!).  For m = 0 the numerator
    is the truncated series of exp(-w).
    """
    m, n2 = pair.m, 2 * pair.n
    lg_top = lgamma(m + n2 + 1)
    log_num = np.array(
        [
            lgamma(n2 + 1) + lgamma(m + n2 - j + 1) - lgamma(j + 1) - lgamma(n2 - j + 1) - lg_top
            for j in range(n2 + 1)
        ]
    )
    log_den = np.array(
        [
            lgamma(m + 1) + lgamma(m + n2 - i + 1) - lgamma(i + 1) - lgamma(m - i + 1) - lg_top
            for i in range(m + 1)
        ]
    )
    log_norm = 2.0 * lgamma(m + n2 + 1) - lgamma(m + 1) - lgamma(n2 + 1)
    return CoefficientTable(pair, log_num, log_den, log_norm)


# ---------------------------------------------------------------------------
# core evaluation
# ---------------------------------------------------------------------------

def _reduce_turns(t: float) -> float:
    """Fractional part of t (in turns) in [-1/2, 1/2], snapping seam hits to 0."""
    k = round(t)
    frac = t - k
    if abs(frac) <= 1e-12 or abs(frac) <= 8.0 * 2.220446049250313e-16 * abs(t):
        return 0.0
    return frac


def _poly_logsum(
    logc: np.ndarray, alternating: bool, x: float, yr: float
) -> tuple[complex, complex, float]:
    """log T(w) and T'(w)/T(w) at w = e^(x + i*yr), by scaled term summation.

    T(w) = sum_j c_j w^j with |c_j| = exp(logc[j]) and signs (+1)^j or (-1)^j.
    Working with log-magnitudes term by term keeps the sum finite for any x;
    returns (logT, ratio, tiny) where tiny = |T| / max_j |c_j w^j|.  A zero
    polynomial value comes back as tiny == 0.0.
    """
    deg = len(logc) - 1
    if deg == 0:
        return 0j, 0j, 1.0
    jj = np.arange(deg + 1, dtype=float)
    logs = logc + jj * x
    L = float(np.max(logs))
    mags = np.exp(logs - L)
    if alternating:
        mags = mags * np.where(np.arange(deg + 1) % 2 == 0, 1.0, -1.0)
    if yr == 0.0:
        terms = mags.astype(complex)
    else:
        terms = mags * np.exp(1j * (jj * yr))
    T = complex(np.sum(terms))
    D = complex(np.sum(jj * terms))  # = w T'(w) / scale
    tiny = abs(T)
    if T == 0:
        return complex(-math.inf, 0.0), 0j, 0.0
    ratio = (D / T) * cmath.exp(complex(-x, -yr))  # T'(w)/T(w)
    logT = L + cmath.log(T)
    return logT, ratio, tiny


def _poly_logsum_mp(
    table: CoefficientTable, numer: bool, x: float, yr: float, lost_digits: float
) -> tuple[complex, complex, float]:
    """High-precision fallback for the cancellation-prone alternating sum."""
    dps = min(300, 30 + int(lost_digits))
    m = table.pair.m
    n2 = 2 * table.pair.n
    deg = n2 if numer else m
    with mp.workdps(dps):
        w = mp.exp(mp.mpc(x, yr))
        lg_top = mp.loggamma(m + n2 + 1)
        if numer:
            coeffs = [
                (-1) ** j
                * mp.exp(
                    mp.loggamma(n2 + 1) + mp.loggamma(m + n2 - j + 1)
                    - mp.loggamma(j + 1) - mp.loggamma(n2 - j + 1) - lg_top
                )
                for j in range(deg + 1)
            ]
        else:
            coeffs = [
                mp.exp(
                    mp.loggamma(m + 1) + mp.loggamma(m + n2 - i + 1)
                    - mp.loggamma(i + 1) - mp.loggamma(m - i + 1) - lg_top
                )
                for i in range(deg + 1)
            ]
        T = mp.mpc(0)
        D = mp.mpc(0)
        scale = mp.mpf(0)
        wk = mp.mpc(1)
        for k, c in enumerate(coeffs):
            term = c * wk
            T += term
            D += k * term
            scale = max(scale, abs(term))
            wk *= w
        if T == 0:
            return complex(-math.inf, 0.0), 0j, 0.0
        tiny = float(abs(T) / scale)
        logT = complex(mp.log(T))
        ratio = complex(D / (T * w))
    return logT, ratio, tiny


def _poly_eval(
    table: CoefficientTable, numer: bool, x: float, yr: float
) -> tuple[complex, complex, bool]:
    """(log T(w), T'(w)/T(w), singular) for T = P or Q at w = e^(x+i*yr).

    'singular' means the Newton distance |T / (w T')| from z to the nearest
    root is below SINGULAR_TOL, i.e. the point is a zero/pole hit for all
    practical purposes.  Cancellation-depleted sums are recomputed with
    mpmath first, so the distance test sees accurate values even when the
    double sum lost every digit.
    """
    logc = table.log_abs_numer if numer else table.log_abs_denom
    logT, ratio, tiny = _poly_logsum(logc, numer, x, yr)
    if tiny < CANCEL_TOL:
        lost = -math.log10(tiny) if tiny > 0 else 60.0
        logT, ratio, tiny = _poly_logsum_mp(table, numer, x, yr, lost + 10)
    if tiny == 0.0:
        return logT, ratio, True
    r = abs(ratio)
    singular = r > 0.0 and (x + math.log(r)) > -math.log(SINGULAR_TOL)
    return logT, ratio, singular


def _check_re(x: float) -> None:
    if not math.isfinite(x):
        raise EvalDomainError(f"non-finite Re z: {x!r}")
    if x > 709.0:
        raise EvalDomainError(
            f"Re z = {x:.3g}: exp(e^z) exceeds the representable log range"
        )


def eval_model_turns(
    pair: PairIndex, x: float, turns: float, variant: str = PLAIN
) -> ScaledComplex:
    """Evaluate the model at z = x + 2*pi*i*turns.

    Working directly in turn units lets strip assemblies hit their seams
    exactly: an integer ``turns`` reduces to a real-axis evaluation with
    phase identically zero.
    """
    _check_re(x)
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    table = build_coefficients(pair)
    frac = _reduce_turns(turns)
    yr = TWO_PI * frac
    logP, _, psing = _poly_eval(table, True, x, yr)
    logQ, _, qsing = _poly_eval(table, False, x, yr)
    if qsing:
        return ScaledComplex.pole()
    if psing:
        if variant == PLAIN:
            return ScaledComplex.zero()
        return ScaledComplex.from_complex(0.5)
    ez = cmath.exp(complex(x, yr))
    sc = ScaledComplex.from_log(ez + logP - logQ)
    if variant == HALF:
        sc = sc.add_real(1.0).times_real(0.5)
    return sc


def eval_model(pair: PairIndex, z: complex, variant: str = PLAIN) -> ScaledComplex:
    """Evaluate g (plain) or (g+1)/2 (half) at a complex point, log-polar result."""
    z = complex(z)
    return eval_model_turns(pair, z.real, z.imag / TWO_PI, variant)


def eval_model_derivative(pair: PairIndex, z: complex, variant: str = PLAIN) -> ScaledComplex:
    """dg/dz in log-polar form, via the closed-form monomial identity.

    P'Q - PQ' + PQ collapses to w^(m+2n) / (binom(m+2n,m) (m+2n)!), so the
    derivative needs no numerator evaluation at all:
    log g' = e^z + N z - log_norm - 2 log Q(e^z),  N = m + 2n + 1.
    The half variant just halves it.
    """
    z = complex(z)
    _check_re(z.real)
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    table = build_coefficients(pair)
    frac = _reduce_turns(z.imag / TWO_PI)
    yr = TWO_PI * frac
    logQ, _, qsing = _poly_eval(table, False, z.real, yr)
    if qsing:
        return ScaledComplex.pole()
    ez = cmath.exp(complex(z.real, yr))
    zred = complex(z.real, yr)
    sc = ScaledComplex.from_log(ez + pair.N * zred - table.log_norm - 2.0 * logQ)
    if variant == HALF:
        sc = sc.times_real(0.5)
    return sc


def log_derivative(pair: PairIndex, z: complex, variant: str = PLAIN) -> complex:
    """The value g'/g (plain) or g'/(g+1) (half) as an ordinary complex number."""
    z = complex(z)
    _check_re(z.real)
    table = build_coefficients(pair)
    frac = _reduce_turns(z.imag / TWO_PI)
    yr = TWO_PI * frac
    zred = complex(z.real, yr)
    ez = cmath.exp(zred)
    logQ, rQ, qsing = _poly_eval(table, False, z.real, yr)
    if qsing:
        raise EvalDomainError(f"log-derivative requested at a pole near z={z}")
    if variant == PLAIN:
        logP, rP, psing = _poly_eval(table, True, z.real, yr)
        if psing:
            raise EvalDomainError(f"log-derivative requested at a zero near z={z}")
        return ez * (1.0 + rP - rQ)
    # half: (g+1)'/(g+1) = g'/(g+1), via logs to dodge zeros of g
    log_gp = ez + pair.N * zred - table.log_norm - 2.0 * logQ
    g_sc = eval_model_turns(pair, z.real, z.imag / TWO_PI, PLAIN)
    gp1 = g_sc.add_real(1.0)
    if gp1.is_zero:
        raise EvalDomainError(f"log-derivative of half variant at its zero near z={z}")
    expo = log_gp - gp1.logpolar
    if expo.real > 709.0:
        raise EvalDomainError("half-variant log-derivative overflows")
    return cmath.exp(expo)


# ---------------------------------------------------------------------------
# real-axis fast paths (used heavily by the conjugacy solver)
# ---------------------------------------------------------------------------

@lru_cache(maxsize=256)
def _gap_tail(pair: PairIndex, terms: int = 70) -> np.ndarray:
    """Taylor coefficients c_N..c_{N+terms-1} of g(z)-1 in w = e^z, exact then floated.

    c_k = sum_j B_j/(k-j)! - A_k vanishes identically for k < N = m+2n+1; a
    nonzero early coefficient would mean the coefficient tables are corrupt,
    so that is checked here once per pair.
    """
    table = build_coefficients(pair)
    B, A = table.numer, table.denom
    N = pair.N
    out = []
    for k in range(N + terms):
        c = Fraction(0)
        for j in range(0, min(k, len(B) - 1) + 1):
            c += B[j] * Fraction(1, math.factorial(k - j))
        if k < len(A):
            c -= A[k]
        if k < N:
            if c != 0:
                raise ArithmeticError(f"gap coefficient c_{k} nonzero for pair {pair}")
        else:
            out.append(float(c))
    return np.array(out)


def real_log_value(pair: PairIndex, x: float, variant: str = PLAIN) -> float:
    """log g(x) or log((g(x)+1)/2) for real x; always finite and positive.

    Below log g ~ 1e-3 the direct log-polar evaluation has cancelled down to
    rounding noise (it can even come back negative), so the value is rebuilt
    from the exact gap series instead.
    """
    sc = eval_model_turns(pair, x, 0.0, variant)
    if sc.log_modulus >= 1e-3:
        return sc.log_modulus
    return math.log1p(math.exp(real_log_gap(pair, x, variant)))


def real_log_gap(pair: PairIndex, x: float, variant: str = PLAIN) -> float:
    """F(x) = log(g(x) - 1), minus log 2 for the half variant.

    Far to the left g - 1 underflows below the resolution of log g, so the
    evaluation switches to the exact tail series of g - 1 in powers of e^x.
    """
    _check_re(x)
    logg = eval_model_turns(pair, x, 0.0, PLAIN).log_modulus
    if logg > 1e-3:
        out = logg + math.log(-math.expm1(-logg))
    else:
        tail = _gap_tail(pair)
        w = math.exp(x)
        s = 0.0
        for c in tail[::-1]:
            s = s * w + c
        if s <= 0.0:
            raise EvalDomainError(f"gap series lost positivity at x={x}")
        table = build_coefficients(pair)
        logQ, _, _ = _poly_eval(table, False, x, 0.0)
        out = pair.N * x + math.log(s) - logQ.real
    if variant == HALF:
        out -= math.log(2.0)
    return out


def real_log_gap_deriv(pair: PairIndex, x: float) -> float:
    """dF/dx = g'(x)/(g(x)-1); identical for both variants.

    Two regimes, each dodging a different cancellation: to the right both
    log g' and F are ~e^x, so their float difference is ulp noise and the
    product form g'/g * g/(g-1) is used instead (g/(g-1) = 1 there to double
    precision); to the left g'/g itself cancels to O(e^{Nx}) and the
    log-difference form is the stable one.
    """
    if x > 15.0:
        table = build_coefficients(pair)
        _, rP, _ = _poly_eval(table, True, x, 0.0)
        _, rQ, _ = _poly_eval(table, False, x, 0.0)
        return math.exp(x) * (1.0 + rP - rQ).real
    table = build_coefficients(pair)
    logQ, _, _ = _poly_eval(table, False, x, 0.0)
    log_gp = math.exp(x) + pair.N * x - table.log_norm - 2.0 * logQ.real
    return math.exp(log_gp - real_log_gap(pair, x, PLAIN))


def real_log_value_deriv(pair: PairIndex, x: float, variant: str = PLAIN) -> float:
    """d/dx of log g (plain) or of log((g+1)/2) (half) at real x."""
    return log_derivative(pair, complex(x, 0.0), variant).real


# ---------------------------------------------------------------------------
# roots, handles, residual diagnostics
# ---------------------------------------------------------------------------

_ROOT_DEGREE_CAP = 64


def _poly_roots(coeffs: Sequence[Fraction]) -> tuple[complex, ...]:
    deg = len(coeffs) - 1
    if deg == 0:
        return ()
    if deg > _ROOT_DEGREE_CAP:
        raise NotImplementedError(f"root registry capped at degree {_ROOT_DEGREE_CAP}")
    cf = np.array([float(c) for c in coeffs])
    roots = np.roots(cf[::-1])
    # Newton polish on the exact coefficients
    out = []
    for r in roots:
        w = complex(r)
        for _ in range(8):
            p = complex(0)
            dp = complex(0)
            for c in cf[::-1]:
                dp = dp * w + p
                p = p * w + c
            if dp == 0:
                break
            step = p / dp
            w -= step
            if abs(step) < 1e-15 * max(1.0, abs(w)):
                break
        out.append(w)
    return tuple(sorted(out, key=lambda c: (c.real, c.imag)))


@lru_cache(maxsize=256)
def numer_roots(pair: PairIndex) -> tuple[complex, ...]:
    """Roots of P in the w-plane (zeros of the model live at log w + 2*pi*i*k)."""
    return _poly_roots(build_coefficients(pair).numer)


@lru_cache(maxsize=256)
def denom_roots(pair: PairIndex) -> tuple[complex, ...]:
    """Roots of Q in the w-plane (poles of the model)."""
    return _poly_roots(build_coefficients(pair).denom)


def solve_value_negative_one(pair: PairIndex, w_seed: complex, iters: int = 60) -> complex | None:
    """Newton solve of P(w) e^w + Q(w) = 0 (i.e. g = -1) from a w-plane seed."""
    table = build_coefficients(pair)
    B = np.array([float(b) for b in table.numer])
    A = np.array([float(a) for a in table.denom])

    def h_and_hp(w: complex) -> tuple[complex, complex]:
        p = complex(0)
        dp = complex(0)
        for c in B[::-1]:
            dp = dp * w + p
            p = p * w + c
        q = complex(0)
        dq = complex(0)
        for c in A[::-1]:
            dq = dq * w + q
            q = q * w + c
        ew = cmath.exp(w)
        return p * ew + q, (dp + p) * ew + dq

    w = complex(w_seed)
    for _ in range(iters):
        h, hp = h_and_hp(w)
        if hp == 0:
            return None
        step = h / hp
        w -= step
        if abs(step) < 1e-13 * max(1.0, abs(w)):
            return w
    return None


@dataclass
class FunctionHandle:
    """An evaluatable function plus the analyticity facts callers may rely on.

    ``eval`` returns ScaledComplex.  ``logderiv`` (if given) returns plain
    complex values of f'/f.  ``poles_in``/``zeros_in`` (if given) list exact
    singularity positions inside a rectangle (x0, x1, y0, y1) and give the
    counting machinery its second, independent route.
    """

    eval: Callable[[complex], ScaledComplex]
    name: str = ""
    logderiv: Optional[Callable[[complex], complex]] = None
    poles_in: Optional[Callable[[tuple[float, float, float, float]], list[complex]]] = None
    zeros_in: Optional[Callable[[tuple[float, float, float, float]], list[complex]]] = None
    entire: bool = False
    region: Optional[Callable[[complex], bool]] = None


def _instances_in_rect(wroots: Sequence[complex], rect: tuple[float, float, float, float]) -> list[complex]:
    x0, x1, y0, y1 = rect
    out = []
    for wr in wroots:
        base = cmath.log(wr)
        if not (x0 <= base.real <= x1):
            continue
        k_lo = math.ceil((y0 - base.imag) / TWO_PI)
        k_hi = math.floor((y1 - base.imag) / TWO_PI)
        for k in range(k_lo, k_hi + 1):
            out.append(base + 2j * math.pi * k)
    return out


def model_handle(pair: PairIndex, variant: str = PLAIN) -> FunctionHandle:
    """FunctionHandle for the model pair; registries are exact root images."""
    zeros = None
    if variant == PLAIN:
        zeros = lambda rect: _instances_in_rect(numer_roots(pair), rect)
    return FunctionHandle(
        eval=lambda z: eval_model(pair, z, variant),
        name=f"g{pair}" if variant == PLAIN else f"ghalf{pair}",
        logderiv=lambda z: log_derivative(pair, z, variant),
        poles_in=lambda rect: _instances_in_rect(denom_roots(pair), rect),
        zeros_in=zeros,
        entire=False,
    )


def tail_expansion_residual(pair: PairIndex, y: float) -> float:
    """Gap between log(h(y)-1) and its leading closed-form tail at real y > 0.

    h(y) = (P(y)/Q(y)) e^y; the comparison term is
    y + N log y - log(binom(m+2n,m) N!) - 2 log Q(y) - log(1 + y/N).
    Evaluated at 40 significant digits so the caller can trust ~1e-20.
    """
    if y <= 0:
        raise ValueError("tail residual needs y > 0")
    m, n = pair.m, pair.n
    N = pair.N
    table = build_coefficients(pair)
    with mp.workdps(40):
        yy = mp.mpf(y)
        P = mp.mpf(0)
        for b in reversed(table.numer):
            P = P * yy + mp.mpf(b.numerator) / mp.mpf(b.denominator)
        Q = mp.mpf(0)
        for a in reversed(table.denom):
            Q = Q * yy + mp.mpf(a.numerator) / mp.mpf(a.denominator)
        h = P / Q * mp.exp(yy)
        norm = mp.mpf(math.comb(m + 2 * n, m)) * mp.factorial(N)
        lead = yy + N * mp.log(yy) - mp.log(norm) - 2 * mp.log(Q) - mp.log(1 + yy / N)
        return float(mp.log(h - 1) - lead)


# ---------------------------------------------------------------------------
# differential operators through contour derivatives
# ---------------------------------------------------------------------------

def _complex_eval(handle: FunctionHandle) -> Callable[[complex], complex]:
    def f(z: complex) -> complex:
        return handle.eval(z).to_complex()

    return f


def apply_B(handle: FunctionHandle, z: complex, radius: float = 0.25) -> complex:
    """The coefficient functional -2E''/E + (E'/E)^2 - 1/E^2 at z.

    Derivatives come from Cauchy integrals on |zeta - z| = radius; if the
    winding of E around that circle is nonzero the disk contains a zero or
    pole of E and the request violates the benign-point contract.
    """
    (e0, e1, e2), winding = contour.circle_derivatives(_complex_eval(handle), z, radius, 2)
    if winding != 0:
        raise ValueError(f"disk of radius {radius} at {z} contains a zero/pole (winding {winding})")
    return -2.0 * e2 / e0 + (e1 / e0) ** 2 - 1.0 / (e0 * e0)


def apply_schwarzian(handle: FunctionHandle, z: complex, radius: float = 0.25) -> complex:
    """Schwarzian derivative F'''/F' - (3/2)(F''/F')^2 at z via contour derivatives."""
    (f0, f1, f2, f3), winding = contour.circle_derivatives(_complex_eval(handle), z, radius, 3)
    if winding != 0:
        raise ValueError(f"disk of radius {radius} at {z} contains a zero/pole (winding {winding})")
    scale = abs(f2) * radius + abs(f0) / radius
    if abs(f1) < 1e-10 * max(scale, 1e-300):
        raise ValueError("F' vanishes inside the working disk; point is not benign")
    return f3 / f1 - 1.5 * (f2 / f1) ** 2
