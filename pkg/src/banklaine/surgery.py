"""Glued quasiregular model maps and their dilatation accounting.

The assemblies here paste the 2*pi*i-periodic model functions of
:mod:`banklaine.specfun` together along strips, spirals, sectors, and
power-map wedges, interpolating with the conjugating diffeomorphisms of
:mod:`banklaine.diffeo` inside transition bands.  Each assembled map
carries seam-residual sweeps, a closed-form Beltrami coefficient, and a
polar midpoint quadrature of (K-1)/|z|^2 -- the integrand whose finite
tail is what makes the glued map a quasiconformal deformation of a
meromorphic one.

Four flavors are built by :func:`assemble`:

``spiral``
    two models glued across a logarithmic spiral via the chart z^mu,
``strips``
    horizontal strips of height 2*pi*N_k in both half-planes (with an
    optional z^n sector extension),
``power``
    a wedge pair |arg z| <= pi/(2*rho) / |arg(-z)| <= pi/(2*sigma) glued
    through the radial interpolation Q and the outer maps z^rho, -(-z)^sigma,
``mixed``
    the strip layout with half-model pieces in the upper half-plane.
"""

from __future__ import annotations

import cmath
import csv
import io
import json
import math
import threading
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .diffeo import LEFT, RIGHT, DiffeoSpec, PhiSolver, PsiMap, solve_shift
from .scaledcx import ScaledComplex, wrap_phase
from .sequences import ProfileBundle, build_graded_slopes, build_paired_slopes, select_case
from .specfun import HALF, PLAIN, PairIndex, eval_model, eval_model_turns

TWO_PI = 2.0 * math.pi

SPIRAL = "spiral"
STRIPS = "strips"
POWER = "power"
MIXED = "mixed"

_FLAVORS = (SPIRAL, STRIPS, POWER, MIXED)


class UninterpolatedRegion(ValueError):
    """Raised where a sector assembly is deliberately left undefined.

    The z^n extensions interpolate nothing inside |Im z^n| <= 2*pi around
    the sector rays; evaluation there has no formula to offer.
    """


class ResolutionError(ValueError):
    """Quadrature grid too coarse: seam-straddling cells exceed 20% of area."""


# ---------------------------------------------------------------------------
# small helpers
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _shift_value(pair: PairIndex, variant: str) -> float:
    return solve_shift(pair, variant).value


def affine_beltrami(x_div: float, y_div: float) -> complex:
    """Beltrami coefficient of chi(x+iy) = x/x_div + i y/y_div.

    For the strip charts this is (N-l)/(N+l) up to sign; zero when the two
    scales agree.
    """
    alpha = 0.5 * (1.0 / x_div + 1.0 / y_div)
    beta = 0.5 * (1.0 / x_div - 1.0 / y_div)
    return complex(beta / alpha, 0.0)


def _compose_affine(x_div: float, y_div: float, a: float, b: float) -> complex:
    # mu of chi o q with q_z = 1+a-ib, q_zbar = a+ib and chi = alpha w + beta wbar
    alpha = 0.5 * (1.0 / x_div + 1.0 / y_div)
    beta = 0.5 * (1.0 / x_div - 1.0 / y_div)
    num = beta + (alpha + beta) * complex(a, b)
    den = alpha + (alpha + beta) * complex(a, -b)
    if den == 0:
        return complex("nan")
    return num / den


def _band_mu(a: float, b: float) -> complex:
    den = complex(1.0 + a, -b)
    if den == 0:
        return complex("nan")
    return complex(a, b) / den


def _k_of_mu(mu_abs: float) -> float:
    if not math.isfinite(mu_abs) or mu_abs >= 1.0:
        return math.inf
    return (1.0 + mu_abs) / (1.0 - mu_abs)


def _log_gap(a: ScaledComplex, b: ScaledComplex) -> float:
    """Log-space distance between two values; inf across kind mismatches."""
    if a.is_zero or a.is_pole or b.is_zero or b.is_pole:
        return 0.0 if (a.is_zero == b.is_zero and a.is_pole == b.is_pole) else math.inf
    return max(abs(a.log_modulus - b.log_modulus), abs(wrap_phase(a.phase - b.phase)))


# ---------------------------------------------------------------------------
# spiral charts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpiralCharts:
    """The pair p(z) = z^mu, h = p^{-1} used to wrap a half-plane gluing.

    ``mu`` is chosen so that the two edges of the cut along the negative
    reals are identified with a stretch by ``kappa``:  p(x+i0) = p(kappa x - i0)
    for x < 0, which follows from mu*(log kappa - 2 pi i) = -2 pi i.  The
    inverse chart lives on the complement of the logarithmic spiral
    Gamma = p((-inf, 0]).
    """

    kappa: float
    mu: complex

    @property
    def beta0(self) -> float:
        """log(kappa)/(2 pi); the imaginary part of 1/mu."""
        return math.log(self.kappa) / TWO_PI

    @property
    def order(self) -> float:
        """1/Re(mu) = 1 + log^2(kappa)/(4 pi^2), the growth order scale."""
        return 1.0 + self.beta0 * self.beta0

    def p(self, z: complex) -> complex:
        """z^mu with the principal branch (cut along the negative reals)."""
        z = complex(z)
        if z == 0:
            return 0j
        return cmath.exp(self.mu * cmath.log(z))

    def _xi(self, w: complex) -> float:
        # the argument of h(w); also the branch-adjusted phase of w
        return wrap_phase(math.atan2(w.imag, w.real) + self.beta0 * math.log(abs(w)))

    def h(self, w: complex) -> complex:
        """The inverse chart, branch fixed so arg h(w) lands in (-pi, pi].

        Writes h = exp((1/mu)(log|w| + i theta)) with 1/mu = 1 + i beta0 and
        theta the lift of arg w for which the image leaves the cut plane
        exactly along Gamma.
        """
        w = complex(w)
        if w == 0:
            return 0j
        logr = math.log(abs(w))
        xi = self._xi(w)
        lm = (1.0 + self.beta0 * self.beta0) * logr - self.beta0 * xi
        return cmath.exp(complex(lm, xi))

    def h_prime(self, w: complex) -> complex:
        """dh/dw = h(w)/(mu w) on the cut complement."""
        w = complex(w)
        return self.h(w) / (self.mu * w)

    def modulus_band(self, r: float) -> tuple[float, float]:
        """Sharp bounds for |h| on the circle |w| = r.

        |h| = r^{1/Re mu} e^{-beta0 xi} with xi in (-pi, pi], so the image
        of the circle spans exactly r^{1/Re mu} * [kappa^{-1/2}, kappa^{1/2}]
        (endpoints approached at the spiral cut).
        """
        s = math.exp(abs(self.beta0) * math.pi)  # = max(sqrt(kappa), 1/sqrt(kappa))
        base = r ** self.order
        return base / s, base * s

    def boundary_gap(self, x: float, eps: float = 1e-8) -> float:
        """|p(x + i eps) - p(kappa x - i eps)| for x < 0; -> 0 with eps."""
        if x >= 0:
            raise ValueError("the edge identification lives on x < 0")
        return abs(self.p(complex(x, eps)) - self.p(complex(self.kappa * x, -eps)))


def spiral_charts(kappa: float) -> SpiralCharts:
    """Construct the chart pair for a given edge stretch kappa > 0."""
    kappa = float(kappa)
    if not (kappa > 0 and math.isfinite(kappa)):
        raise ValueError(f"kappa must be positive and finite, got {kappa}")
    lk = math.log(kappa)
    den = TWO_PI * TWO_PI + lk * lk
    mu = complex(TWO_PI * TWO_PI / den, -TWO_PI * lk / den)
    return SpiralCharts(kappa=kappa, mu=mu)


# ---------------------------------------------------------------------------
# the strip homeomorphism on Pi = {|Im z| < 1}
# ---------------------------------------------------------------------------

class StripHomeo:
    """Interpolation of a conjugating diffeomorphism across a unit strip.

    Identity for |Im z| >= 1; on the real axis psi(x) = phi(x) for x > 0 and
    psi(kappa x) = phi(x) for x < 0, linearly interpolated in |Im z|.  The
    Jacobian tends to the identity as x -> +inf and to a unit upper-triangular
    matrix with off-diagonal -sign(y) c as x -> -inf.
    """

    def __init__(self, spec: DiffeoSpec):
        self.spec = spec
        self._solver = PhiSolver(spec)
        self._lock = threading.Lock()

    @property
    def kappa(self) -> float:
        return self.spec.kappa

    def _base(self, x: float) -> float:
        arg = x if x >= 0 else x / self.kappa
        with self._lock:
            return self._solver.value(arg)

    def _base_deriv(self, x: float) -> float:
        if x >= 0:
            with self._lock:
                return self._solver.deriv(x)
        with self._lock:
            return self._solver.deriv(x / self.kappa) / self.kappa

    def __call__(self, z: complex) -> complex:
        z = complex(z)
        x, y = z.real, z.imag
        if abs(y) >= 1.0:
            return z
        base = self._base(x)
        return complex(base + abs(y) * (x - base), y)

    def jacobian(self, z: complex) -> tuple[float, float, float, float]:
        """(u_x, u_y, v_x, v_y) of the interpolation; identity off the strip."""
        z = complex(z)
        x, y = z.real, z.imag
        if abs(y) >= 1.0:
            return 1.0, 0.0, 0.0, 1.0
        dp = self._base_deriv(x)
        base = self._base(x)
        sgn = 1.0 if y >= 0 else -1.0
        u_x = dp * (1.0 - abs(y)) + abs(y)
        u_y = sgn * (x - base)
        return u_x, u_y, 0.0, 1.0

    def mu(self, z: complex) -> complex:
        """Beltrami coefficient; zero off the strip."""
        z = complex(z)
        if abs(z.imag) >= 1.0:
            return 0j
        u_x, u_y, _, _ = self.jacobian(z)
        den = complex(u_x + 1.0, -u_y)
        if den == 0:
            return complex("nan")
        return complex(u_x - 1.0, u_y) / den


def build_strip_homeo(spec: DiffeoSpec) -> StripHomeo:
    """The strip interpolation for one diffeomorphism spec."""
    return StripHomeo(spec)


# ---------------------------------------------------------------------------
# one half-plane side of a strip assembly
# ---------------------------------------------------------------------------

class _StripSystem:
    """Strip-indexed evaluator on one horizontal side of a half-plane.

    Strip k occupies local heights [Y_{k-1}, Y_k) with Y_k - Y_{k-1}
    = 2 pi y_div(k), carries the model pair (m_k, n_k) scaled by
    chi = x/x_div + i y/y_div, and interpolates toward strip k+1 through
    q = x + i y + t (psi_k(x) - x) with t the normalized strip height.
    Evaluation feeds t straight into the exact-turn model evaluator, so
    the top edge of strip k and the bottom edge of strip k+1 agree to the
    accuracy of the conjugacy solve.
    """

    def __init__(self, m_seq, n_seq, side: str, l: int, heights: str,
                 variant_rule: Callable[[int], str], tag: str):
        if heights not in ("slope", "unit"):
            raise ValueError("heights must be 'slope' or 'unit'")
        self._m, self._n = m_seq, n_seq
        self.side = side
        self.l = int(l)
        self.heights = heights
        self.variant_rule = variant_rule
        self.tag = tag
        self._lock = threading.RLock()
        self._bounds: list[float] = [0.0]
        self._psis: dict[int, Optional[PsiMap]] = {}
        self._quad: dict[int, _PsiCache] = {}

    # -- sequence-indexed structure ------------------------------------
    def pair(self, k: int) -> PairIndex:
        return PairIndex(self._m.entry(k), self._n.entry(k))

    def variant(self, k: int) -> str:
        return self.variant_rule(k)

    def x_div(self, k: int) -> float:
        return float(self.l) if self.side == RIGHT else float(self.pair(k).N)

    def y_div(self, k: int) -> float:
        return 1.0 if self.heights == "unit" else float(self.pair(k).N)

    def shift(self, k: int) -> float:
        return _shift_value(self.pair(k), self.variant(k))

    def boundary(self, k: int) -> float:
        """Y_k, the top edge of strip k (Y_0 = 0)."""
        with self._lock:
            while len(self._bounds) <= k:
                j = len(self._bounds)
                self._bounds.append(self._bounds[-1] + TWO_PI * self.y_div(j))
            return self._bounds[k]

    def locate(self, y: float) -> tuple[int, float]:
        """Strip index and normalized height for y >= 0."""
        if y < 0:
            raise ValueError("strip systems cover y >= 0")
        with self._lock:
            while self._bounds[-1] <= y:
                j = len(self._bounds)
                self._bounds.append(self._bounds[-1] + TWO_PI * self.y_div(j))
            k = bisect_right(self._bounds, y)
            t = (y - self._bounds[k - 1]) / (TWO_PI * self.y_div(k))
        return k, t

    def psi(self, k: int) -> Optional[PsiMap]:
        """The interpolation map of strip k toward k+1; None when trivial."""
        with self._lock:
            if k not in self._psis:
                p0, p1 = self.pair(k), self.pair(k + 1)
                v0, v1 = self.variant(k), self.variant(k + 1)
                spec = DiffeoSpec(p0, p1, v0, v1)
                pm = PsiMap(spec, _shift_value(p0, v0), _shift_value(p1, v1),
                            self.x_div(k + 1), self.x_div(k))
                self._psis[k] = None if pm.exact_identity else pm
            return self._psis[k]

    def seam_at(self, k: int) -> bool:
        """Whether the boundary Y_k separates two different piece formulas."""
        return self.psi(k) is not None

    def active(self, k: int) -> bool:
        """Whether strip k carries any dilatation at all."""
        return self.psi(k) is not None or self.x_div(k) != self.y_div(k)

    # -- evaluation ------------------------------------------------------
    def displaced(self, k: int, x: float, t: float) -> float:
        pm = self.psi(k)
        if pm is None:
            return x
        with self._lock:
            return x + t * (pm(x) - x)

    def value(self, k: int, x: float, t: float) -> ScaledComplex:
        xt = self.displaced(k, x, t)
        return eval_model_turns(self.pair(k), xt / self.x_div(k) + self.shift(k),
                                t, self.variant(k))

    def eval_xy(self, x: float, y: float) -> ScaledComplex:
        k, t = self.locate(y)
        return self.value(k, x, t)

    # -- dilatation ------------------------------------------------------
    def ab(self, k: int, x: float, t: float) -> tuple[float, float, float, float]:
        """(a, b, psi', psi(x)-x) of the band chart in strip k."""
        pm = self.psi(k)
        if pm is None:
            return 0.0, 0.0, 1.0, 0.0
        with self._lock:
            px = pm(x)
            dp = pm.deriv(x)
        a = 0.5 * t * (dp - 1.0)
        b = (px - x) / (2.0 * TWO_PI * self.y_div(k))
        return a, b, dp, px - x

    def mu_xy(self, x: float, y: float) -> complex:
        k, t = self.locate(y)
        a, b, _, _ = self.ab(k, x, t)
        return _compose_affine(self.x_div(k), self.y_div(k), a, b)

    def ab_quad(self, k: int, x: float, t: float) -> tuple[float, float]:
        """(a, b) through the Hermite table; quadrature accuracy only."""
        pm = self.psi(k)
        if pm is None:
            return 0.0, 0.0
        with self._lock:
            cache = self._quad.get(k)
            if cache is None:
                span = _PsiCache.SPAN
                lo, hi = (0.0, span) if self.side == RIGHT else (-span, 0.0)
                cache = self._quad[k] = _PsiCache(pm, lo, hi)
            px, dp = cache.eval(x)
        return 0.5 * t * (dp - 1.0), (px - x) / (2.0 * TWO_PI * self.y_div(k))

    def mu_xy_quad(self, x: float, y: float) -> complex:
        k, t = self.locate(y)
        a, b = self.ab_quad(k, x, t)
        return _compose_affine(self.x_div(k), self.y_div(k), a, b)

    def seam_distance(self, x: float, y: float) -> float:
        k, _ = self.locate(y)
        d = math.inf
        if self.seam_at(k):
            d = min(d, self.boundary(k) - y)
        if k > 1 and self.seam_at(k - 1):
            d = min(d, y - self.boundary(k - 1))
        if self.active(k):
            d = min(d, abs(x))  # the imaginary axis separates the two sides
        return d

    def active_windows(self, y_max: float) -> list[tuple[float, float, int]]:
        """(y_lo, y_hi, k) of strips with dilatation, up to height y_max."""
        out = []
        k = 1
        while self.boundary(k - 1) < y_max:
            if self.active(k):
                out.append((self.boundary(k - 1), self.boundary(k), k))
            k += 1
        return out

    def seam_ys(self, y_max: float) -> list[tuple[float, int]]:
        out = []
        k = 1
        while self.boundary(k) <= y_max:
            if self.seam_at(k):
                out.append((self.boundary(k), k))
            k += 1
        return out


def _plain_rule(_k: int) -> str:
    return PLAIN


class _PsiCache:
    """Cubic-Hermite table over one psi's transition zone, for quadrature.

    Outside |x| <= SPAN the map is affine to well below quadrature accuracy
    (the conjugacy approaches kappa x + c double-exponentially), so the two
    tails are frozen constants.  Value/derivative pairs at the nodes make
    the interpolant C^1 with error far under the midpoint-rule floor.

    Nodes are solved on first touch rather than in bulk: an annulus often
    grazes a seam's transition zone instead of sweeping it, and every node
    is a full Newton solve on the underlying conjugacy.

    Tables that start at x = 0 (right-side seams pin psi(0) = 0) fall back
    to exact solves on (0, 2): psi turns over there within a few multiples
    of 1/N, and no fixed grid keeps the *derivative* honest at the knee.
    """

    SPAN = 24.0
    STEP = 0.25

    def __init__(self, pm: PsiMap, lo: float, hi: float):
        self.pm = pm
        step = self.STEP
        self._exact_below = 2.0 if lo == 0.0 else -math.inf
        self.xs = np.arange(max(lo, self._exact_below), hi + step / 2.0, step)
        self._node: dict[int, tuple[float, float]] = {}
        self._c_hi: Optional[float] = None
        self._c_lo: Optional[float] = None
        self._lock = threading.RLock()

    def _at(self, i: int) -> tuple[float, float]:
        got = self._node.get(i)
        if got is None:
            with self._lock:
                got = self._node.get(i)
                if got is None:
                    x = float(self.xs[i])
                    got = (self.pm(x), self.pm.deriv(x))
                    self._node[i] = got
        return got

    def eval(self, x: float) -> tuple[float, float]:
        """(psi(x), psi'(x)) to interpolation accuracy."""
        xs = self.xs
        if x >= xs[-1]:
            if self._c_hi is None:
                with self._lock:
                    self._c_hi = self.pm(self.SPAN + 2.0) - (self.SPAN + 2.0)
            return x + self._c_hi, 1.0
        if x <= xs[0] or x < self._exact_below:
            if x <= -self.SPAN:
                if self._c_lo is None:
                    with self._lock:
                        self._c_lo = self.pm(-self.SPAN - 2.0) + (self.SPAN + 2.0)
                return x + self._c_lo, 1.0
            return self.pm(x), self.pm.deriv(x)
        i = int(np.searchsorted(xs, x, side="right")) - 1
        v0, d0 = self._at(i)
        v1, d1 = self._at(i + 1)
        h = float(xs[i + 1] - xs[i])
        s = (x - float(xs[i])) / h
        s2 = s * s
        val = ((1 + 2 * s) * (1 - s) ** 2 * v0 + h * s * (1 - s) ** 2 * d0
               + s2 * (3 - 2 * s) * v1 + h * s2 * (s - 1) * d1)
        der = (v0 * (6 * s2 - 6 * s) + h * d0 * (3 * s2 - 4 * s + 1)
               + v1 * (6 * s - 6 * s2) + h * d1 * (3 * s2 - 2 * s)) / h
        return float(val), float(der)


# ---------------------------------------------------------------------------
# classification / sampling records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PieceInfo:
    """Where a point landed inside an assembled map."""

    label: str
    region: str
    pair: Optional[PairIndex] = None
    variant: Optional[str] = None
    k: Optional[int] = None
    t: Optional[float] = None
    x_div: Optional[float] = None
    y_div: Optional[float] = None
    band: bool = False
    conformal: bool = True
    seam_distance: float = math.inf
    uninterpolated: bool = False


@dataclass(frozen=True)
class SeamCheck:
    """Max log-space residual of one declared seam over a sample sweep."""

    name: str
    samples: int
    max_gap: float
    argmax: complex


@dataclass(frozen=True)
class BeltramiSample:
    """Closed-form Beltrami data of the glued map at one point.

    ``mu``/``K`` include every affine pre-map and holomorphic outer twist;
    ``mu_band``/``K_band`` keep only the interpolation chart q itself, the
    object the pointwise distortion bound 4(1+r)r/min(1, psi') controls.
    """

    z: complex
    piece: str
    mu: complex
    K: float
    mu_band: complex
    K_band: float
    a: float
    b: float
    psi_prime: Optional[float]
    psi_gap: Optional[float]
    indeterminate: bool


# ---------------------------------------------------------------------------
# engines: strips / mixed
# ---------------------------------------------------------------------------

class _StripsEngine:
    """Half-plane strip assembly; upper and lower systems per side.

    The plain flavor commutes with conjugation, so the lower half-plane
    reuses the upper systems; the mixed flavor runs half-model pieces above
    the real axis (wherever n_k = 1) and plain ones below.
    """

    flavor = STRIPS

    def __init__(self, lam1: float, lam2: float, mixed: bool):
        sel = select_case(lam1, lam2)
        self.case = sel.case
        self.l = sel.l
        self.m_seq, self.n_seq = sel.m_seq, sel.n_seq
        self.mixed = mixed
        if mixed:
            self.flavor = MIXED
            n_seq = self.n_seq

            def upper_rule(k: int) -> str:
                return HALF if n_seq.entry(k) == 1 else PLAIN
        else:
            upper_rule = _plain_rule
        self.up = {
            RIGHT: _StripSystem(self.m_seq, self.n_seq, RIGHT, self.l, "slope", upper_rule, "R"),
            LEFT: _StripSystem(self.m_seq, self.n_seq, LEFT, self.l, "slope", upper_rule, "L"),
        }
        if mixed:
            self.lo = {
                RIGHT: _StripSystem(self.m_seq, self.n_seq, RIGHT, self.l, "slope", _plain_rule, "R"),
                LEFT: _StripSystem(self.m_seq, self.n_seq, LEFT, self.l, "slope", _plain_rule, "L"),
            }
        else:
            self.lo = self.up

    def _system(self, x: float, y: float) -> _StripSystem:
        table = self.up if y >= 0 else self.lo
        return table[RIGHT if x >= 0 else LEFT]

    def eval(self, z: complex) -> ScaledComplex:
        x, y = z.real, z.imag
        sys = self._system(x, y)
        if y >= 0:
            return sys.eval_xy(x, y)
        return sys.eval_xy(x, -y).conj()

    def mu(self, z: complex) -> complex:
        x, y = z.real, z.imag
        sys = self._system(x, y)
        if y >= 0:
            return sys.mu_xy(x, y)
        return sys.mu_xy(x, -y).conjugate()

    def mu_quad(self, z: complex) -> complex:
        x, y = z.real, z.imag
        sys = self._system(x, y)
        if y >= 0:
            return sys.mu_xy_quad(x, y)
        return sys.mu_xy_quad(x, -y).conjugate()

    def mu_parts(self, z: complex):
        x, y = z.real, z.imag
        sys = self._system(x, y)
        k, t = sys.locate(abs(y))
        a, b, dp, gap = sys.ab(k, x, t)
        mu_band = _band_mu(a, b)
        mu = _compose_affine(sys.x_div(k), sys.y_div(k), a, b)
        if y < 0:
            mu, mu_band = mu.conjugate(), mu_band.conjugate()
        return mu, mu_band, a, b, dp, gap

    def classify(self, z: complex) -> PieceInfo:
        x, y = z.real, z.imag
        sys = self._system(x, y)
        k, t = sys.locate(abs(y))
        return PieceInfo(
            label=f"{sys.tag}{k}",
            region=("upper" if y >= 0 else "lower") + ("-right" if x >= 0 else "-left"),
            pair=sys.pair(k), variant=sys.variant(k), k=k, t=t,
            x_div=sys.x_div(k), y_div=sys.y_div(k),
            band=sys.psi(k) is not None,
            conformal=not sys.active(k),
            seam_distance=sys.seam_distance(x, abs(y)),
        )

    def cell_state(self, z: complex) -> tuple[str, bool, bool]:
        x, y = z.real, z.imag
        sys = self._system(x, y)
        k, _ = sys.locate(abs(y))
        return f"{sys.tag}{k}", not sys.active(k), False

    def piece_labels(self) -> tuple[str, ...]:
        return ("right", "left")

    def piece_value(self, label: str, z: complex) -> ScaledComplex:
        if label not in self.piece_labels():
            raise KeyError(label)
        x, y = z.real, z.imag
        table = self.up if y >= 0 else self.lo
        sys = table[RIGHT if label == "right" else LEFT]
        if y >= 0:
            return sys.eval_xy(x, y)
        return sys.eval_xy(x, -y).conj()

    # -- dilatation hooks -------------------------------------------------
    def fine_size(self, _r_max: float) -> float:
        return TWO_PI / 8.0

    def _all_windows(self, y_max: float) -> list[tuple[float, float]]:
        wins: list[tuple[float, float]] = []
        margin = 4.0 * self.fine_size(y_max)
        for table in (self.up, self.lo) if self.mixed else (self.up,):
            for sys in (table[RIGHT], table[LEFT]):
                for lo, hi, _k in sys.active_windows(y_max):
                    wins.append((max(0.0, lo - margin), hi + margin))
        wins.sort()
        merged: list[tuple[float, float]] = []
        for lo, hi in wins:
            if merged and lo <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(hi, merged[-1][1]))
            else:
                merged.append((lo, hi))
        return merged

    def theta_windows(self, r0: float, r1: float) -> list[tuple[float, float]]:
        out: list[tuple[float, float]] = []
        for lo, hi in self._all_windows(r1):
            if lo >= r1:
                continue
            s_lo = min(1.0, lo / r1)
            s_hi = min(1.0, hi / r0)
            if s_lo >= s_hi and s_lo >= 1.0:
                continue
            a, b = math.asin(s_lo), math.asin(s_hi)
            for w in ((a, b), (math.pi - b, math.pi - a), (-b, -a), (-math.pi + a, -math.pi + b)):
                out.append(w)
        return out

    def seam_functions_upto(self, r_max: float):
        fns = []
        seen: set[float] = set()
        for table in (self.up, self.lo) if self.mixed else (self.up,):
            for sys in (table[RIGHT], table[LEFT]):
                for yv, k in sys.seam_ys(r_max):
                    if yv in seen:
                        continue
                    seen.add(yv)
                    fns.append((lambda z, yv=yv: abs(z.imag) - yv, None, f"|y|={yv:.6g}"))
        wins = self._all_windows(r_max)

        def axis_gate(z, wins=wins):
            ay = abs(z.imag)
            return any(lo <= ay <= hi for lo, hi in wins)

        fns.append((lambda z: z.real, axis_gate, "axis"))
        return fns

    def straddle_tester(self, r_max: float):
        """Fast corner test: |y| seam crossings and gated axis crossings."""
        seams: set[float] = set()
        for table in (self.up, self.lo) if self.mixed else (self.up,):
            for sys in (table[RIGHT], table[LEFT]):
                for yv, _k in sys.seam_ys(r_max):
                    seams.add(yv)
        seam_list = sorted(seams)
        wins = self._all_windows(r_max)

        def test(corners, _zc) -> bool:
            ys = [abs(c.imag) for c in corners]
            lo, hi = min(ys), max(ys)
            i = bisect_right(seam_list, lo)
            if i < len(seam_list) and seam_list[i] < hi:
                return True
            xs = [c.real for c in corners]
            if min(xs) < 0.0 < max(xs):
                return any(lo <= wh and hi >= wl for wl, wh in wins)
            return False

        return test

    def seam_distance(self, z: complex) -> float:
        x, y = z.real, z.imag
        return self._system(x, y).seam_distance(x, abs(y))

    # -- seam residuals ----------------------------------------------------
    def seam_residuals(self, samples: int = 64, strips: int = 6) -> list[SeamCheck]:
        checks = []
        xs_r = np.linspace(0.5, 6.0, samples)
        xs_l = np.linspace(-40.0, -0.5, samples)
        for table, hemi in ((self.up, "upper"), (self.lo, "lower")) if self.mixed else ((self.up, "upper"),):
            for sys, xs in ((table[RIGHT], xs_r), (table[LEFT], xs_l)):
                k = 1
                found = 0
                while found < strips and k < 400:
                    if sys.seam_at(k):
                        gaps = [
                            _log_gap(sys.value(k, float(x), 1.0), sys.value(k + 1, float(x), 0.0))
                            for x in xs
                        ]
                        i = int(np.argmax(gaps))
                        checks.append(SeamCheck(
                            name=f"{hemi}:{sys.tag}{k}|{sys.tag}{k+1}",
                            samples=samples, max_gap=float(gaps[i]),
                            argmax=complex(xs[i], sys.boundary(k)),
                        ))
                        found += 1
                    k += 1
        # the imaginary axis: both sides reduce to the same turn evaluation
        gaps = []
        pts = []
        for k in range(1, strips + 1):
            y = 0.5 * (self.up[RIGHT].boundary(k - 1) + self.up[RIGHT].boundary(k))
            gaps.append(_log_gap(self.up[RIGHT].eval_xy(0.0, y), self.up[LEFT].eval_xy(0.0, y)))
            pts.append(complex(0.0, y))
        i = int(np.argmax(gaps))
        checks.append(SeamCheck("axis", len(gaps), float(gaps[i]), pts[i]))
        if self.mixed:
            xs = np.linspace(-8.0, 8.0, samples)
            gaps = [_log_gap(self.eval(complex(x, 0.0)), self.lo[RIGHT if x >= 0 else LEFT].eval_xy(float(x), 0.0)) for x in xs]
            i = int(np.argmax(gaps))
            checks.append(SeamCheck("real-axis", samples, float(gaps[i]), complex(xs[i], 0.0)))
        return checks

    def to_dict(self) -> dict:
        return {"case": self.case, "l": self.l}


class _SectorEngine:
    """z^n pullback of a strip assembly with the reciprocal boundary sheets.

    Sectors adjacent to the positive real axis use the flipped sheet
    G_1 (equal to 1/G_0 on the base strip 0 <= Im <= 2 pi); everything
    within |Im z^n| <= 2 pi stays uninterpolated by design.
    """

    flavor = STRIPS

    def __init__(self, base: _StripsEngine, n: int):
        if n < 2:
            raise ValueError("sector extension needs n >= 2")
        for k in (1, 2):
            if base.up[RIGHT].pair(k) != PairIndex(0, 0):
                raise ValueError("sector extension requires a plain (0,0) prefix")
        self.base = base
        self.n = int(n)
        self.case = base.case
        self.l = base.l

    def _chi1(self, w: complex) -> complex:
        if w.real >= 0:
            return complex(w.real / self.l, w.imag)
        return w

    def _s0(self) -> float:
        return _shift_value(PairIndex(0, 0), PLAIN)

    def base_value(self, w: complex) -> ScaledComplex:
        return self.base.eval(w)

    def flipped_value(self, w: complex) -> ScaledComplex:
        if abs(w.imag) >= math.pi:
            shift = complex(0.0, -math.pi if w.imag > 0 else math.pi)
            return self.base.eval(w + shift)
        zeta = self._chi1(w)
        return eval_model_turns(PairIndex(0, 0), zeta.real + self._s0(),
                                zeta.imag / TWO_PI, PLAIN).recip()

    def _sector(self, z: complex) -> tuple[int, complex]:
        az = math.atan2(z.imag, z.real) % TWO_PI
        j = min(int(az // (math.pi / self.n)) + 1, 2 * self.n)
        w = z ** self.n
        return j, w

    def eval(self, z: complex) -> ScaledComplex:
        z = complex(z)
        j, w = self._sector(z)
        if abs(w.imag) <= TWO_PI:
            raise UninterpolatedRegion(
                f"|Im z^{self.n}| <= 2 pi at z={z:.6g}: no interpolation is defined here")
        if j in (1, 2 * self.n):
            return self.flipped_value(w)
        return self.base.eval(w)

    def mu(self, z: complex) -> complex:
        z = complex(z)
        j, w = self._sector(z)
        if abs(w.imag) <= TWO_PI:
            raise UninterpolatedRegion(f"uninterpolated at z={z:.6g}")
        if j in (1, 2 * self.n):
            if abs(w.imag) < math.pi:
                return 0j
            w = w + complex(0.0, -math.pi if w.imag > 0 else math.pi)
        mu0 = self.base.mu(w)
        dp = self.n * z ** (self.n - 1)
        return mu0 * dp.conjugate() / dp

    def mu_quad(self, z: complex) -> complex:
        z = complex(z)
        j, w = self._sector(z)
        if abs(w.imag) <= TWO_PI:
            raise UninterpolatedRegion(f"uninterpolated at z={z:.6g}")
        if j in (1, 2 * self.n):
            if abs(w.imag) < math.pi:
                return 0j
            w = w + complex(0.0, -math.pi if w.imag > 0 else math.pi)
        mu0 = self.base.mu_quad(w)
        dp = self.n * z ** (self.n - 1)
        return mu0 * dp.conjugate() / dp

    def mu_parts(self, z: complex):
        j, w = self._sector(z)
        if abs(w.imag) <= TWO_PI:
            raise UninterpolatedRegion(f"uninterpolated at z={z:.6g}")
        wq = w
        if j in (1, 2 * self.n) and abs(w.imag) >= math.pi:
            wq = w + complex(0.0, -math.pi if w.imag > 0 else math.pi)
        mu0, mu_band, a, b, dp_, gap = self.base.mu_parts(wq)
        dpz = self.n * z ** (self.n - 1)
        tw = dpz.conjugate() / dpz
        return mu0 * tw, mu_band, a, b, dp_, gap

    def classify(self, z: complex) -> PieceInfo:
        z = complex(z)
        j, w = self._sector(z)
        if abs(w.imag) <= TWO_PI:
            return PieceInfo(label=f"sector{j}:uninterpolated", region=f"sector{j}",
                             conformal=False, uninterpolated=True)
        info = self.base.classify(w)
        sheet = "flipped" if j in (1, 2 * self.n) else "base"
        return PieceInfo(
            label=f"sector{j}:{sheet}:{info.label}", region=f"sector{j}",
            pair=info.pair, variant=info.variant, k=info.k, t=info.t,
            x_div=info.x_div, y_div=info.y_div, band=info.band,
            conformal=info.conformal,
            seam_distance=info.seam_distance,
        )

    def cell_state(self, z: complex) -> tuple[str, bool, bool]:
        j, w = self._sector(z)
        if abs(w.imag) <= TWO_PI:
            return f"sector{j}:uninterpolated", True, True
        label, conf, _ = self.base.cell_state(w)
        return f"sector{j}:{label}", conf, False

    def piece_labels(self) -> tuple[str, ...]:
        return ("base", "flipped")

    def piece_value(self, label: str, z: complex) -> ScaledComplex:
        if label == "base":
            return self.base_value(complex(z))
        if label == "flipped":
            return self.flipped_value(complex(z))
        raise KeyError(label)

    def fine_size(self, r_max: float) -> float:
        # pullback strip thickness ~ 2 pi / (n r^{n-1})
        return max(0.05, TWO_PI / (self.n * r_max ** (self.n - 1)) / 8.0)

    def theta_windows(self, _r0: float, _r1: float) -> list[tuple[float, float]]:
        return [(-math.pi, math.pi)]  # refine everywhere; sector tests stay small

    def seam_functions_upto(self, r_max: float):
        inner = self.base.seam_functions_upto(r_max ** self.n)
        out = []
        for f, gate, label in inner:
            out.append((
                lambda z, f=f: f(z ** self.n),
                (lambda z, g=gate: g(z ** self.n)) if gate is not None else None,
                f"pullback:{label}",
            ))
        return out

    def seam_distance(self, z: complex) -> float:
        j, w = self._sector(z)
        if abs(w.imag) <= TWO_PI:
            return math.inf
        if j in (1, 2 * self.n) and abs(w.imag) >= math.pi:
            w = w + complex(0.0, -math.pi if w.imag > 0 else math.pi)
        # scale the base distance back through |d z^n/dz|
        return self.base.seam_distance(w) / max(1e-300, self.n * abs(z) ** (self.n - 1))

    def seam_residuals(self, samples: int = 64, strips: int = 6) -> list[SeamCheck]:
        checks = self.base.seam_residuals(samples, strips)
        # the two sheets are reciprocal on the base strip 0 <= Im w <= 2 pi
        gaps = []
        pts = []
        for x in np.linspace(-6.0, 6.0, samples):
            w = complex(float(x), 1.0 + 0.007 * float(x))
            prod = self.base_value(w).mul(self.flipped_value(w))
            gaps.append(max(abs(prod.log_modulus), abs(wrap_phase(prod.phase))))
            pts.append(w)
        i = int(np.argmax(gaps))
        checks.append(SeamCheck("sheet-inverse", samples, float(gaps[i]), pts[i]))
        return checks

    def to_dict(self) -> dict:
        return {"case": self.case, "l": self.l, "sectors": self.n}


# ---------------------------------------------------------------------------
# engine: spiral
# ---------------------------------------------------------------------------

class _SpiralEngine:
    """Two models glued across a logarithmic spiral by the chart z^mu."""

    flavor = SPIRAL

    class _BaseShim:
        """Adapter letting _PsiCache tabulate the homeo's axis profile."""

        def __init__(self, homeo: StripHomeo):
            self._h = homeo

        def __call__(self, x: float) -> float:
            return self._h._base(x)

        def deriv(self, x: float) -> float:
            return self._h._base_deriv(x)

    def __init__(self, lower: PairIndex, upper: PairIndex):
        self.lower, self.upper = lower, upper
        self.spec = DiffeoSpec(lower, upper)
        self.charts = spiral_charts(self.spec.kappa)
        self.homeo = build_strip_homeo(self.spec)
        self._qlock = threading.Lock()
        self._qcache = _PsiCache(self._BaseShim(self.homeo),
                                 -_PsiCache.SPAN, _PsiCache.SPAN)

    def eval(self, w: complex) -> ScaledComplex:
        w = complex(w)
        if w == 0:
            return eval_model(self.upper, 0j)
        h = self.charts.h(w)
        if h.imag >= 0:
            return eval_model(self.upper, h)
        return eval_model(self.lower, self.homeo(h))

    def mu(self, w: complex) -> complex:
        w = complex(w)
        if w == 0:
            return 0j
        h = self.charts.h(w)
        if h.imag >= 0 or h.imag <= -1.0:
            return 0j
        hp = self.charts.h_prime(w)
        return self.homeo.mu(h) * hp.conjugate() / hp

    def mu_quad(self, w: complex) -> complex:
        w = complex(w)
        if w == 0:
            return 0j
        h = self.charts.h(w)
        y = h.imag
        if y >= 0 or y <= -1.0:
            return 0j
        with self._qlock:
            base, dbase = self._qcache.eval(h.real)
        ay = -y
        u_x = dbase * (1.0 - ay) + ay
        u_y = -(h.real - base)
        den = complex(u_x + 1.0, -u_y)
        if den == 0:
            return complex("nan")
        hp = self.charts.h_prime(w)
        return (complex(u_x - 1.0, u_y) / den) * hp.conjugate() / hp

    def mu_parts(self, w: complex):
        w = complex(w)
        h = self.charts.h(w)
        if w == 0 or h.imag >= 0 or h.imag <= -1.0:
            return 0j, 0j, 0.0, 0.0, None, None
        u_x, u_y, _, _ = self.homeo.jacobian(h)
        a, b = 0.5 * (u_x - 1.0), 0.5 * u_y
        mu_band = _band_mu(a, b)
        hp = self.charts.h_prime(w)
        return mu_band * hp.conjugate() / hp, mu_band, a, b, None, None

    def classify(self, w: complex) -> PieceInfo:
        w = complex(w)
        if w == 0:
            return PieceInfo(label="origin", region="origin", pair=self.upper,
                             variant=PLAIN, seam_distance=0.0)
        h = self.charts.h(w)
        upper = h.imag >= 0
        band = -1.0 < h.imag < 0.0
        return PieceInfo(
            label="upper" if upper else ("lower-band" if band else "lower"),
            region="spiral-upper" if upper else "spiral-lower",
            pair=self.upper if upper else self.lower, variant=PLAIN,
            band=band, conformal=not band,
            seam_distance=abs(h.imag),
        )

    def cell_state(self, w: complex) -> tuple[str, bool, bool]:
        h = self.charts.h(complex(w))
        if -1.0 < h.imag < 0.0:
            return "cut-band", False, False
        return "regular", True, False

    def piece_labels(self) -> tuple[str, ...]:
        return ("upper", "lower")

    def piece_value(self, label: str, w: complex) -> ScaledComplex:
        h = self.charts.h(complex(w))
        if label == "upper":
            return eval_model(self.upper, h)
        if label == "lower":
            return eval_model(self.lower, self.homeo(h))
        raise KeyError(label)

    def fine_size(self, _r_max: float) -> float:
        return 0.125

    def theta_windows(self, r0: float, _r1: float) -> list[tuple[float, float]]:
        q = self.charts.beta0 * math.log(max(r0, 1e-12))
        hi_edge = r0 ** self.charts.order * math.exp(abs(self.charts.beta0) * math.pi)
        lo_edge = r0 ** self.charts.order / math.exp(abs(self.charts.beta0) * math.pi)
        du_cut = min(0.5 * math.pi, 2.5 / max(1.0, lo_edge))
        du_ray = min(0.5 * math.pi, 2.5 / max(1.0, lo_edge))
        wins = []
        for xi_lo, xi_hi in ((-math.pi - du_cut, -math.pi + du_cut), (-du_ray, du_ray)):
            a, b = xi_lo - q, xi_hi - q
            # wrap the window into (-pi, pi], splitting at the branch point
            a = math.remainder(a, TWO_PI)
            b = a + (xi_hi - xi_lo)
            if b > math.pi:
                wins.append((a, math.pi))
                wins.append((-math.pi, b - TWO_PI))
            else:
                wins.append((a, b))
        return wins

    def seam_functions_upto(self, _r_max: float):
        return [(lambda z: math.sin(self.charts._xi(z)) if z != 0 else 0.0, None, "cut")]

    def seam_distance(self, w: complex) -> float:
        if w == 0:
            return 0.0
        return abs(self.charts.h(complex(w)).imag)

    def seam_residuals(self, samples: int = 64, strips: int = 0) -> list[SeamCheck]:
        del strips
        checks = []
        # positive ray: upper g2(x) against lower g1(psi(x))
        xs = np.linspace(0.5, 6.0, samples)
        gaps = [
            _log_gap(eval_model(self.upper, complex(float(x), 0.0)),
                     eval_model(self.lower, self.homeo(complex(float(x), 0.0))))
            for x in xs
        ]
        i = int(np.argmax(gaps))
        checks.append(SeamCheck("positive-ray", samples, float(gaps[i]), complex(xs[i], 0)))
        # spiral cut: the two h-edges x and kappa x
        xs = np.linspace(-40.0, -0.5, samples)
        gaps = [
            _log_gap(eval_model(self.upper, complex(float(x), 0.0)),
                     eval_model(self.lower, self.homeo(complex(self.charts.kappa * float(x), 0.0))))
            for x in xs
        ]
        i = int(np.argmax(gaps))
        checks.append(SeamCheck("spiral-cut", samples, float(gaps[i]), complex(xs[i], 0)))
        return checks

    def to_dict(self) -> dict:
        return {"lower": (self.lower.m, self.lower.n),
                "upper": (self.upper.m, self.upper.n),
                "kappa": self.charts.kappa, "order": self.charts.order}


# ---------------------------------------------------------------------------
# engine: power
# ---------------------------------------------------------------------------

class _PowerEngine:
    """Wedge gluing through z^rho / -(-z)^sigma and the radial map Q.

    The right wedge evaluates U(Q(z^rho)) on unit-height strips, the left
    wedge V(-(-z)^sigma) on strips of height 2 pi N_k; the piecewise map Q
    pre-distorts the imaginary axis so that both wedges meet the rays
    arg z = +-pi/(2 rho) with the same values V(+-i r^sigma).
    """

    flavor = POWER

    def __init__(self, rho: float, delta: float,
                 gamma: Optional[float] = None, sigma: Optional[float] = None):
        rho_q = Fraction(rho)
        if not (Fraction(1, 2) < rho_q < 1):
            raise ValueError(f"rho must lie in (1/2, 1), got {rho}")
        gamma_q = 1 / (2 * rho_q - 1)
        sigma_q = rho_q * gamma_q
        if gamma is not None and Fraction(gamma) != gamma_q:
            raise ValueError(f"gamma={gamma} inconsistent with rho={rho} (need {gamma_q})")
        if sigma is not None and Fraction(sigma) != sigma_q:
            raise ValueError(f"sigma={sigma} inconsistent with rho={rho} (need {sigma_q})")
        # 1/rho + 1/(rho*gamma) = 2 holds exactly in rational arithmetic
        assert 1 / rho_q + 1 / sigma_q == 2
        self.rho_q, self.gamma_q, self.sigma_q = rho_q, gamma_q, sigma_q
        self.rho, self.gamma, self.sigma = float(rho_q), float(gamma_q), float(sigma_q)
        self.delta = float(delta)
        self.m_seq = build_graded_slopes(self.gamma, self.delta)
        self.n_seq = build_paired_slopes(self.gamma, self.m_seq)
        self.bundle = ProfileBundle(self.m_seq, self.n_seq, target_exponent=self.gamma)
        self._g_cache: tuple[Optional[np.ndarray], Optional[np.ndarray]] = (None, None)

        def upper_rule(k: int) -> str:
            return HALF if k >= 3 else PLAIN

        self.U = {
            "up": _StripSystem(self.m_seq, self.n_seq, RIGHT, 1, "unit", upper_rule, "U"),
            "lo": _StripSystem(self.m_seq, self.n_seq, RIGHT, 1, "unit", _plain_rule, "U"),
        }
        self.V = {
            "up": _StripSystem(self.m_seq, self.n_seq, LEFT, 1, "slope", upper_rule, "V"),
            "lo": _StripSystem(self.m_seq, self.n_seq, LEFT, 1, "slope", _plain_rule, "V"),
        }
        self.ray = math.pi / (2.0 * self.rho)

    # -- the radial interpolation Q --------------------------------------
    def _g_table(self, target: float) -> tuple[np.ndarray, np.ndarray]:
        """Cached (cumulative heights, slopes) for the piecewise inverse.

        ``bundle.g`` rebuilds its slope table on every call, which is fine
        for vectorised work but dominates the cost of scalar quadrature
        loops.  Grow the cache geometrically and reuse it.
        """
        cum, slopes = self._g_cache
        if cum is None or cum[-1] < target:
            kmax = 64
            while True:
                slopes = self.bundle.slopes_N(kmax).astype(float)
                cum = np.concatenate([[0.0], TWO_PI * np.cumsum(slopes)])
                if cum[-1] >= target or kmax >= 1 << 22:
                    break
                kmax *= 2
            self._g_cache = (cum, slopes)
        return self._g_cache

    def g_axis(self, y: float) -> float:
        if y < 0.0:
            raise ValueError("g is defined on [0, infinity)")
        t = y**self.gamma
        cum, slopes = self._g_table(t)
        i = min(max(int(np.searchsorted(cum, t, side="right")) - 1, 0), len(slopes) - 1)
        return TWO_PI * i + (t - cum[i]) / slopes[i]

    def _g_prime(self, y: float) -> float:
        gy = self.g_axis(y)
        k = int(gy // TWO_PI) + 1
        nk = PairIndex(self.m_seq.entry(k), self.n_seq.entry(k)).N
        return self.gamma * y ** (self.gamma - 1.0) / nk

    def q_label(self, w: complex) -> str:
        x, y = w.real, w.imag
        if x >= 1.0:
            return "q-identity"
        if abs(y) >= 1.0:
            return "q-band"
        if x * x + y * y < 1.0:
            return "q-disk"
        return "q-square"

    def q_value(self, w: complex) -> complex:
        label = self.q_label(w)
        if label in ("q-identity", "q-square"):
            return w
        x, y = w.real, w.imag
        if label == "q-band":
            s = 1.0 if y >= 0 else -1.0
            ay = abs(y)
            return complex(x, s * ((1.0 - x) * self.g_axis(ay) + x * ay))
        if w == 0:
            return 0j
        return w * abs(w) ** (self.gamma - 1.0)

    def q_wirtinger(self, w: complex) -> tuple[complex, complex]:
        label = self.q_label(w)
        if label in ("q-identity", "q-square"):
            return 1.0 + 0j, 0j
        x, y = w.real, w.imag
        if label == "q-band":
            s = 1.0 if y >= 0 else -1.0
            ay = abs(y)
            gp, gv = self._g_prime(ay), self.g_axis(ay)
            qw = complex(0.5 * (1.0 + (1.0 - x) * gp + x), 0.5 * s * (ay - gv))
            qwb = complex(0.5 * (1.0 - (1.0 - x) * gp - x), 0.5 * s * (ay - gv))
            return qw, qwb
        r = abs(w)
        qw = complex(r ** (self.gamma - 1.0) * (self.gamma + 1.0) / 2.0, 0.0)
        qwb = 0.5 * (self.gamma - 1.0) * r ** (self.gamma - 3.0) * w * w
        return qw, qwb

    # -- wedge coordinates -------------------------------------------------
    def _right(self, z: complex) -> bool:
        return abs(math.atan2(z.imag, z.real)) <= self.ray

    def _w(self, z: complex) -> complex:
        return cmath.exp(self.rho * cmath.log(z))

    def _v(self, z: complex) -> complex:
        return -cmath.exp(self.sigma * cmath.log(-z))

    def _sys_value(self, table, q: complex) -> ScaledComplex:
        x, y = q.real, q.imag
        if y >= 0:
            return table["up"].eval_xy(x, y)
        return table["lo"].eval_xy(x, -y).conj()

    def _sys_mu(self, table, q: complex) -> complex:
        x, y = q.real, q.imag
        if y >= 0:
            return table["up"].mu_xy(x, y)
        return table["lo"].mu_xy(x, -y).conjugate()

    def eval(self, z: complex) -> ScaledComplex:
        z = complex(z)
        if z == 0:
            return self._sys_value(self.U, 0j)
        if self._right(z):
            return self._sys_value(self.U, self.q_value(self._w(z)))
        return self._sys_value(self.V, self._v(z))

    def mu(self, z: complex) -> complex:
        return self.mu_parts(z)[0]

    def mu_quad(self, z: complex) -> complex:
        z = complex(z)
        if z == 0:
            return 0j
        if self._right(z):
            w = self._w(z)
            q = self.q_value(w)
            sys = self.U["up" if q.imag >= 0 else "lo"]
            k, t = sys.locate(abs(q.imag))
            a, b = sys.ab_quad(k, q.real, t)
            mu_s = _compose_affine(sys.x_div(k), sys.y_div(k), a, b)
            if q.imag < 0:
                mu_s = mu_s.conjugate()
            qw, qwb = self.q_wirtinger(w)
            den = qw + mu_s * qwb.conjugate()
            mu_f = complex("nan") if den == 0 else (qwb + mu_s * qw.conjugate()) / den
            dp = self.rho * cmath.exp((self.rho - 1.0) * cmath.log(z))
            return mu_f * dp.conjugate() / dp
        v = self._v(z)
        sys = self.V["up" if v.imag >= 0 else "lo"]
        k, t = sys.locate(abs(v.imag))
        a, b = sys.ab_quad(k, v.real, t)
        mu_s = _compose_affine(sys.x_div(k), sys.y_div(k), a, b)
        if v.imag < 0:
            mu_s = mu_s.conjugate()
        dp = self.sigma * cmath.exp((self.sigma - 1.0) * cmath.log(-z))
        return mu_s * dp.conjugate() / dp

    def mu_parts(self, z: complex):
        z = complex(z)
        if z == 0:
            return 0j, 0j, 0.0, 0.0, None, None
        if self._right(z):
            w = self._w(z)
            q = self.q_value(w)
            table, sys_key = self.U, ("up" if q.imag >= 0 else "lo")
            sys = table[sys_key]
            k, t = sys.locate(abs(q.imag))
            a, b, dpsi, gap = sys.ab(k, q.real, t)
            mu_s = _compose_affine(sys.x_div(k), sys.y_div(k), a, b)
            mu_band = _band_mu(a, b)
            if q.imag < 0:
                mu_s, mu_band = mu_s.conjugate(), mu_band.conjugate()
            qw, qwb = self.q_wirtinger(w)
            den = qw + mu_s * qwb.conjugate()
            mu_f = complex("nan") if den == 0 else (qwb + mu_s * qw.conjugate()) / den
            dp = self.rho * cmath.exp((self.rho - 1.0) * cmath.log(z))
            return mu_f * dp.conjugate() / dp, mu_band, a, b, dpsi, gap
        v = self._v(z)
        sys = self.V["up" if v.imag >= 0 else "lo"]
        k, t = sys.locate(abs(v.imag))
        a, b, dpsi, gap = sys.ab(k, v.real, t)
        mu_s = _compose_affine(sys.x_div(k), sys.y_div(k), a, b)
        mu_band = _band_mu(a, b)
        if v.imag < 0:
            mu_s, mu_band = mu_s.conjugate(), mu_band.conjugate()
        dp = self.sigma * cmath.exp((self.sigma - 1.0) * cmath.log(-z))
        return mu_s * dp.conjugate() / dp, mu_band, a, b, dpsi, gap

    def classify(self, z: complex) -> PieceInfo:
        z = complex(z)
        if z == 0:
            return PieceInfo(label="origin", region="power-right", pair=PairIndex(0, 0),
                             variant=PLAIN, seam_distance=0.0)
        if self._right(z):
            w = self._w(z)
            q = self.q_value(w)
            qlab = self.q_label(w)
            sys = self.U["up" if q.imag >= 0 else "lo"]
            k, t = sys.locate(abs(q.imag))
            band = sys.psi(k) is not None
            conf = (not sys.active(k)) and qlab in ("q-identity", "q-square")
            return PieceInfo(
                label=f"U{k}|{qlab}", region="power-right",
                pair=sys.pair(k), variant=sys.variant(k), k=k, t=t,
                x_div=sys.x_div(k), y_div=sys.y_div(k), band=band,
                conformal=conf, seam_distance=self.seam_distance(z),
            )
        v = self._v(z)
        sys = self.V["up" if v.imag >= 0 else "lo"]
        k, t = sys.locate(abs(v.imag))
        return PieceInfo(
            label=f"V{k}", region="power-left",
            pair=sys.pair(k), variant=sys.variant(k), k=k, t=t,
            x_div=sys.x_div(k), y_div=sys.y_div(k),
            band=sys.psi(k) is not None, conformal=not sys.active(k),
            seam_distance=self.seam_distance(z),
        )

    def cell_state(self, z: complex) -> tuple[str, bool, bool]:
        # quadrature hot path: skip PieceInfo/seam-distance construction
        z = complex(z)
        if z == 0:
            return "q-disk", False, False
        if self._right(z):
            w = self._w(z)
            qlab = self.q_label(w)
            q = w if qlab in ("q-identity", "q-square") else self.q_value(w)
            sys = self.U["up" if q.imag >= 0 else "lo"]
            k, _ = sys.locate(abs(q.imag))
            conf = (not sys.active(k)) and qlab in ("q-identity", "q-square")
            return qlab, conf, False
        v = self._v(z)
        sys = self.V["up" if v.imag >= 0 else "lo"]
        k, _ = sys.locate(abs(v.imag))
        return f"V{k}", not sys.active(k), False

    def piece_labels(self) -> tuple[str, ...]:
        return ("wedge", "left-wedge")

    def piece_value(self, label: str, z: complex) -> ScaledComplex:
        z = complex(z)
        if label == "wedge":
            return self._sys_value(self.U, self.q_value(self._w(z)))
        if label == "left-wedge":
            return self._sys_value(self.V, self._v(z))
        raise KeyError(label)

    def fine_size(self, r_max: float) -> float:
        spacing = TWO_PI * r_max ** (1.0 - self.rho) / self.rho
        return min(TWO_PI, spacing) / 8.0

    def theta_windows(self, _r0: float, _r1: float) -> list[tuple[float, float]]:
        return [(-math.pi, math.pi)]

    def seam_functions_upto(self, r_max: float):
        fns = [
            (lambda z: math.atan2(z.imag, z.real) - self.ray, None, "ray+"),
            (lambda z: math.atan2(z.imag, z.real) + self.ray, None, "ray-"),
        ]
        if r_max > 1.0:
            fns.append((lambda z: abs(z) - 1.0, lambda z: self._right(z), "q-circle"))

        def right_gate(z):
            return self._right(z)

        def left_gate(z):
            return not self._right(z)

        w_top = r_max ** self.rho
        k = 1
        while self.U["up"].boundary(k) <= w_top:
            if self.U["up"].seam_at(k) or self.U["lo"].seam_at(k):
                yk = self.U["up"].boundary(k)
                fns.append((lambda z, yk=yk: abs(self._w(z).imag) - yk, right_gate, f"U|y|={yk:.6g}"))
            k += 1
        k = 1
        while self.V["up"].boundary(k) <= r_max ** self.sigma:
            if self.V["up"].seam_at(k) or self.V["lo"].seam_at(k):
                yk = self.V["up"].boundary(k)
                fns.append((lambda z, yk=yk: abs(self._v(z).imag) - yk, left_gate, f"V|y|={yk:.6g}"))
            k += 1
        return fns

    def seam_distance(self, z: complex) -> float:
        z = complex(z)
        if z == 0:
            return 0.0
        th = math.atan2(z.imag, z.real)
        d = abs(z) * min(abs(th - self.ray), abs(th + self.ray))
        if self._right(z):
            w = self._w(z)
            q = self.q_value(w)
            scale = self.rho * abs(z) ** (self.rho - 1.0)
            sys = self.U["up" if q.imag >= 0 else "lo"]
            d = min(d, sys.seam_distance(q.real, abs(q.imag)) / max(scale, 1e-300))
            if self.q_label(w) != "q-identity":
                d = min(d, abs(abs(w) - 1.0) / max(scale, 1e-300))
        else:
            v = self._v(z)
            scale = self.sigma * abs(z) ** (self.sigma - 1.0)
            sys = self.V["up" if v.imag >= 0 else "lo"]
            d = min(d, sys.seam_distance(v.real, abs(v.imag)) / max(scale, 1e-300))
        return d

    def seam_residuals(self, samples: int = 64, strips: int = 4) -> list[SeamCheck]:
        checks = []
        # imaginary-axis identity U(i g(y)) = V(i y^gamma)
        ys = np.linspace(0.37, 9.11, 32)
        gaps = []
        for y in ys:
            u = self._sys_value(self.U, complex(0.0, self.g_axis(float(y))))
            v = self._sys_value(self.V, complex(0.0, float(y) ** self.gamma))
            gaps.append(_log_gap(u, v))
        i = int(np.argmax(gaps))
        checks.append(SeamCheck("axis-identity", len(ys), float(gaps[i]), complex(0, ys[i])))
        # the glued rays
        for sgn, name in ((1.0, "ray+"), (-1.0, "ray-")):
            rs = np.linspace(1.1, 7.3, samples)
            gaps = []
            pts = []
            for r in rs:
                zr = float(r) * cmath.exp(1j * sgn * self.ray)
                gaps.append(_log_gap(self.piece_value("wedge", zr),
                                     self.piece_value("left-wedge", zr)))
                pts.append(zr)
            i = int(np.argmax(gaps))
            checks.append(SeamCheck(name, samples, float(gaps[i]), pts[i]))
        # strip seams of both wedge systems
        xs_r = np.linspace(0.5, 6.0, samples)
        xs_l = np.linspace(-40.0, -0.5, samples)
        for table, xs, tag in ((self.U, xs_r, "U"), (self.V, xs_l, "V")):
            for key in ("up", "lo"):
                sys = table[key]
                k, found = 1, 0
                while found < strips and k < 200:
                    if sys.seam_at(k):
                        gaps = [_log_gap(sys.value(k, float(x), 1.0), sys.value(k + 1, float(x), 0.0))
                                for x in xs]
                        i = int(np.argmax(gaps))
                        checks.append(SeamCheck(f"{tag}:{key}:{k}|{k+1}", samples,
                                                float(gaps[i]), complex(xs[i], sys.boundary(k))))
                        found += 1
                    k += 1
        return checks

    def to_dict(self) -> dict:
        return {"rho": self.rho, "gamma": self.gamma, "sigma": self.sigma,
                "delta": self.delta}


# ---------------------------------------------------------------------------
# the public map object
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GluedMap:
    """An assembled quasiregular map; immutable, safe for parallel scans.

    Calling the map returns a :class:`~banklaine.scaledcx.ScaledComplex`
    (poles are tagged, not raised).  Points whose chart coordinate exceeds
    the double-exponential overflow horizon raise
    :class:`~banklaine.specfun.EvalDomainError`; sector assemblies raise
    :class:`UninterpolatedRegion` inside |Im z^n| <= 2 pi.
    """

    flavor: str
    params: tuple[tuple[str, object], ...]
    _impl: object = field(repr=False, compare=False)

    def __call__(self, z: complex) -> ScaledComplex:
        return self._impl.eval(complex(z))

    def classify(self, z: complex) -> PieceInfo:
        return self._impl.classify(complex(z))

    def piece_labels(self) -> tuple[str, ...]:
        return self._impl.piece_labels()

    def piece_value(self, label: str, z: complex) -> ScaledComplex:
        """Evaluate one named piece formula in its own chart, ignoring gating."""
        return self._impl.piece_value(label, complex(z))

    def seam_residuals(self, samples: int = 64, **kw) -> list[SeamCheck]:
        """Log-space residual sweeps across every declared seam."""
        return self._impl.seam_residuals(samples, **kw)

    @property
    def params_dict(self) -> dict:
        return dict(self.params)

    def to_dict(self) -> dict:
        d = {"flavor": self.flavor, "params": self.params_dict}
        d.update(self._impl.to_dict())
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _as_pair(value) -> PairIndex:
    if isinstance(value, PairIndex):
        return value
    m, n = value
    return PairIndex(int(m), int(n))


def assemble(flavor: str, params: Optional[dict] = None, **kw) -> GluedMap:
    """Build a glued map.

    Parameters by flavor:

    - ``spiral``: ``lower=(m1, n1)``, ``upper=(m2, n2)``
    - ``strips``: ``lam1``, ``lam2`` in [0, 1], optional ``sectors=n``
    - ``mixed``: ``lam1``, ``lam2``
    - ``power``: ``rho`` in (1/2, 1), ``delta``; optional ``gamma``/``sigma``
      are cross-checked exactly against 1/(2 rho - 1) and rho/(2 rho - 1)
    """
    opts = dict(params or {})
    opts.update(kw)
    if flavor == SPIRAL:
        lower = _as_pair(_take(flavor, opts, "lower"))
        upper = _as_pair(_take(flavor, opts, "upper"))
        _no_extras(flavor, opts)
        eng = _SpiralEngine(lower, upper)
        shown = {"lower": (lower.m, lower.n), "upper": (upper.m, upper.n),
                 "kappa": eng.charts.kappa}
    elif flavor in (STRIPS, MIXED):
        lam1 = float(_take(flavor, opts, "lam1"))
        lam2 = float(_take(flavor, opts, "lam2"))
        sectors = int(opts.pop("sectors", 1))
        if sectors < 1:
            raise ValueError("sectors must be a positive integer")
        if flavor == MIXED and sectors != 1:
            raise ValueError("sector extension applies to the strips flavor only")
        _no_extras(flavor, opts)
        eng = _StripsEngine(lam1, lam2, mixed=(flavor == MIXED))
        shown = {"lam1": lam1, "lam2": lam2}
        if sectors > 1:
            eng = _SectorEngine(eng, sectors)
            shown["sectors"] = sectors
    elif flavor == POWER:
        rho = _take(flavor, opts, "rho")
        delta = float(_take(flavor, opts, "delta"))
        gamma = opts.pop("gamma", None)
        sigma = opts.pop("sigma", None)
        _no_extras(flavor, opts)
        eng = _PowerEngine(rho, delta, gamma, sigma)
        shown = {"rho": eng.rho, "gamma": eng.gamma, "sigma": eng.sigma, "delta": delta}
    else:
        raise ValueError(f"unknown flavor {flavor!r}; expected one of {_FLAVORS}")
    return GluedMap(flavor=flavor, params=tuple(sorted(shown.items())), _impl=eng)


def _take(flavor: str, opts: dict, name: str):
    try:
        return opts.pop(name)
    except KeyError:
        raise ValueError(f"flavor {flavor!r} requires parameter {name!r}") from None


def _no_extras(flavor: str, opts: dict) -> None:
    if opts:
        raise ValueError(f"unexpected parameters for {flavor!r}: {sorted(opts)}")


# ---------------------------------------------------------------------------
# Beltrami sampling
# ---------------------------------------------------------------------------

def beltrami_at(gmap: GluedMap, z: complex, seam_tol: float = 1e-9) -> BeltramiSample:
    """Closed-form Beltrami coefficient of the glued map at z.

    Points closer than ``seam_tol`` (in the piece's own chart units) to a
    declared seam, or at a chart singularity, come back flagged
    ``indeterminate`` -- the coefficient is still the one-sided value.
    """
    z = complex(z)
    info = gmap.classify(z)
    if info.uninterpolated:
        raise UninterpolatedRegion(f"no formula at z={z:.6g}")
    mu, mu_band, a, b, dpsi, gap = gmap._impl.mu_parts(z)
    mu_abs = abs(mu)
    indeterminate = info.seam_distance < seam_tol or not math.isfinite(mu_abs) or mu_abs >= 1.0
    return BeltramiSample(
        z=z, piece=info.label, mu=mu, K=_k_of_mu(mu_abs),
        mu_band=mu_band, K_band=_k_of_mu(abs(mu_band)),
        a=a, b=b, psi_prime=dpsi, psi_gap=gap,
        indeterminate=indeterminate,
    )


# ---------------------------------------------------------------------------
# dilatation quadrature
# ---------------------------------------------------------------------------

_CELL_DTYPE = np.dtype([
    ("z", np.complex128), ("mu_abs", np.float64), ("k_minus_1", np.float64),
    ("area", np.float64), ("contribution", np.float64), ("straddle", np.bool_),
])


@dataclass
class DilatationReport:
    """Midpoint-rule account of int (K-1)/|z|^2 over an annulus.

    ``strip_sums`` aggregates by gluing strip; ``cumulative`` runs over the
    radial shells, whose increments serve as the Cauchy tail diagnostic.
    ``cells`` holds every cell that was actually evaluated (conformal cells
    are classified analytically and skipped).
    """

    flavor: str
    r_min: float
    r_max: float
    total: float
    strip_sums: dict
    shell_edges: np.ndarray
    shell_sums: np.ndarray
    cumulative: np.ndarray
    straddle_fraction: float
    straddled_cells: int
    evaluated_cells: int
    conformal_cells: int
    skipped_cells: int
    cells: np.ndarray
    shell_strip_sums: dict = field(default_factory=dict, repr=False)

    def tail_increment(self, r0: float) -> float:
        """Largest shell increment beyond radius r0 (the Cauchy tail gauge)."""
        mask = self.shell_edges[1:] > r0
        if not np.any(mask):
            return 0.0
        return float(np.max(np.abs(self.shell_sums[mask])))

    @property
    def tail_ok(self) -> bool:
        """Cauchy flag: increments past the annulus midpoint below 1e-3."""
        return self.tail_increment(0.5 * (self.r_min + self.r_max)) < 1e-3

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["r", "strip", "sum"])
        for (i, label), s in sorted(self.shell_strip_sums.items()):
            w.writerow([f"{self.shell_edges[i + 1]:.17g}", label, f"{s:.17g}"])
        return buf.getvalue()

    def to_csv(self, dest) -> None:
        text = self.csv_text()
        if hasattr(dest, "write"):
            dest.write(text)
        else:
            with open(dest, "w") as fh:
                fh.write(text)

    def to_dict(self) -> dict:
        return {
            "flavor": self.flavor, "r_min": self.r_min, "r_max": self.r_max,
            "total": self.total, "strip_sums": dict(sorted(self.strip_sums.items())),
            "straddle_fraction": self.straddle_fraction,
            "straddled_cells": self.straddled_cells,
            "evaluated_cells": self.evaluated_cells,
            "conformal_cells": self.conformal_cells,
            "skipped_cells": self.skipped_cells,
            "tail_ok": self.tail_ok,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _merge_intervals(spans: list[tuple[float, float]]) -> list[tuple[float, float]]:
    spans = sorted((max(lo, -math.pi), min(hi, math.pi)) for lo, hi in spans if hi > lo)
    out: list[tuple[float, float]] = []
    for lo, hi in spans:
        if out and lo <= out[-1][1] + 1e-12:
            out[-1] = (out[-1][0], max(hi, out[-1][1]))
        else:
            out.append((lo, hi))
    return [(lo, hi) for lo, hi in out if hi > lo]


def dilatation_integral(gmap: GluedMap, r_min: float, r_max: float,
                        resolution=None) -> DilatationReport:
    """Midpoint quadrature of (K_G - 1)/|z|^2 over r_min < |z| < r_max.

    ``resolution`` is either None (cells sized to an eighth of the thinnest
    gluing strip, refined inside the active windows), a float cell-size
    target, or an explicit ``(n_r, n_theta)`` uniform grid.  Grids whose
    seam-straddling cells exceed 20% of the annulus area raise
    :class:`ResolutionError`.
    """
    if not (0 < r_min < r_max):
        raise ValueError("need 0 < r_min < r_max")
    eng = gmap._impl
    uniform = isinstance(resolution, (tuple, list))
    if uniform:
        n_r, n_th = int(resolution[0]), int(resolution[1])
        if n_r < 1 or n_th < 1:
            raise ValueError("grid counts must be positive")
        edges = np.linspace(r_min, r_max, n_r + 1)
        fine = None
    else:
        fine = float(resolution) if resolution is not None else eng.fine_size(r_max)
        if fine <= 0:
            raise ValueError("cell size must be positive")
        n_r = max(1, int(math.ceil((r_max - r_min) / fine)))
        edges = np.linspace(r_min, r_max, n_r + 1)
    coarse_arc = None if uniform else max(8.0 * fine, (r_max - r_min) / 48.0)

    tester = getattr(eng, "straddle_tester", None)
    if tester is not None:
        straddle_fn = tester(r_max)
    else:
        seam_fns = eng.seam_functions_upto(r_max)

        def straddle_fn(corners, zc) -> bool:
            for f, gate, _label in seam_fns:
                if gate is not None and not gate(zc):
                    continue
                signs = set()
                for c in corners:
                    v = f(c)
                    if v > 0:
                        signs.add(1)
                    elif v < 0:
                        signs.add(-1)
                if len(signs) == 2:
                    return True
            return False

    mu_fn = getattr(eng, "mu_quad", eng.mu)
    annulus_area = math.pi * (r_max * r_max - r_min * r_min)
    straddle_area = 0.0
    straddled = evaluated = conformal = skipped = 0
    shell_sums = np.zeros(n_r)
    strip_lists: dict = {}
    shell_strip_lists: dict = {}
    recs: list = []

    for i in range(n_r):
        r0, r1 = float(edges[i]), float(edges[i + 1])
        rc = 0.5 * (r0 + r1)
        if uniform:
            th_edges = np.linspace(-math.pi, math.pi, n_th + 1)
            pieces = [(float(th_edges[j]), float(th_edges[j + 1])) for j in range(n_th)]
        else:
            wins = _merge_intervals(eng.theta_windows(r0, r1))
            pieces = []
            cursor = -math.pi
            for lo, hi in wins + [(math.pi, math.pi)]:
                if lo > cursor:
                    pieces.append((cursor, lo, False))
                if hi > lo:
                    pieces.append((lo, hi, True))
                cursor = max(cursor, hi)
            pieces = [(a, b, f) for a, b, f in pieces if b > a]
        ring_contribs: list[float] = []
        for piece in pieces:
            if uniform:
                a, b = piece
                target = (b - a) * rc  # one cell per slot
            else:
                a, b, is_fine = piece
                target = fine if is_fine else coarse_arc
            m = max(1, int(math.ceil((b - a) * rc / target)))
            dth = (b - a) / m
            for j in range(m):
                t0, t1 = a + j * dth, a + (j + 1) * dth
                tc = 0.5 * (t0 + t1)
                zc = rc * complex(math.cos(tc), math.sin(tc))
                area = 0.5 * (r1 * r1 - r0 * r0) * dth
                corners = [
                    r0 * complex(math.cos(t0), math.sin(t0)),
                    r0 * complex(math.cos(t1), math.sin(t1)),
                    r1 * complex(math.cos(t0), math.sin(t0)),
                    r1 * complex(math.cos(t1), math.sin(t1)),
                ]
                is_straddle = straddle_fn(corners, zc)
                if is_straddle:
                    straddled += 1
                    straddle_area += area
                label, conf, uninterp = eng.cell_state(zc)
                if uninterp:
                    skipped += 1
                    continue
                if conf and not is_straddle:
                    conformal += 1
                    continue
                mu = mu_fn(zc)
                mu_abs = abs(mu)
                km1 = _k_of_mu(mu_abs) - 1.0
                if not math.isfinite(km1):
                    km1 = 0.0  # degenerate midpoint; the straddle flag records it
                contrib = km1 / (rc * rc) * area
                evaluated += 1
                ring_contribs.append(contrib)
                strip_lists.setdefault(label, []).append(contrib)
                shell_strip_lists.setdefault((i, label), []).append(contrib)
                recs.append((zc, mu_abs, km1, area, contrib, is_straddle))
        shell_sums[i] = math.fsum(ring_contribs)

    straddle_fraction = straddle_area / annulus_area
    if straddle_fraction > 0.20:
        raise ResolutionError(
            f"straddling cells cover {straddle_fraction:.1%} of the annulus; "
            "refine the grid (>20% is past the reliability cutoff)")
    cells = np.array(recs, dtype=_CELL_DTYPE) if recs else np.empty(0, dtype=_CELL_DTYPE)
    strip_sums = {k: math.fsum(v) for k, v in strip_lists.items()}
    shell_strip_sums = {k: math.fsum(v) for k, v in shell_strip_lists.items()}
    return DilatationReport(
        flavor=gmap.flavor, r_min=r_min, r_max=r_max,
        total=math.fsum(shell_sums.tolist()),
        strip_sums=strip_sums,
        shell_edges=edges, shell_sums=shell_sums,
        cumulative=np.cumsum(shell_sums),
        straddle_fraction=straddle_fraction,
        straddled_cells=straddled, evaluated_cells=evaluated,
        conformal_cells=conformal, skipped_cells=skipped,
        cells=cells, shell_strip_sums=shell_strip_sums,
    )
