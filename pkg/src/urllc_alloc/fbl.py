"""Finite-blocklength error model.

Normal approximation of the coding rate at blocklength ``m``::

    f(gamma, m, D) = ln2 * sqrt(m / V) * (log2(1 + gamma) - D / m)
    eps = Q(f),   V = 1 - (1 + gamma) ** -2

Everything inside the numeric kernels is carried as the natural log of the
error probability so that errors far below the float64 range stay
comparable. The public functions wrap kernel results in :class:`ErrorProb`.
"""

import math
from dataclasses import dataclass

from ._jit import jit
from .exceptions import NumericError

LN2 = math.log(2.0)
SQRT2 = math.sqrt(2.0)
HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
TAIL_SWITCH = 8.0
MAX_ITER = 200
INF = math.inf
NAN = math.nan


@dataclass(frozen=True)
class ErrorProb:
    """A probability together with its natural logarithm.

    ``log_value`` stays finite (and accurate) when ``value`` underflows.
    """

    value: float
    log_value: float

    @classmethod
    def from_log(cls, log_value):
        log_value = min(float(log_value), 0.0)
        return cls(math.exp(log_value), log_value)

    @classmethod
    def one(cls):
        return cls(1.0, 0.0)


# --------------------------------------------------------------------------
# Gaussian tail kernels
# --------------------------------------------------------------------------


@jit
def _log_mills(x):
    # Mills ratio Q(x)/phi(x) = 1/(x + 1/(x + 2/(x + 3/(x + ...)))), x > 0.
    u = x
    for k in range(80, 0, -1):
        u = x + k / u
    return -math.log(u)


@jit
def _q(x):
    if x != x:
        return NAN
    if x > TAIL_SWITCH:
        if x == INF:
            return 0.0
        return math.exp(-0.5 * x * x - HALF_LOG_2PI + _log_mills(x))
    return 0.5 * math.erfc(x / SQRT2)


@jit
def _log_q(x):
    if x != x:
        return NAN
    if x > TAIL_SWITCH:
        if x == INF:
            return -INF
        return -0.5 * x * x - HALF_LOG_2PI + _log_mills(x)
    if x >= 0.0:
        return math.log(0.5 * math.erfc(x / SQRT2))
    # log(1 - Q(-x)) without cancellation
    return math.log1p(-_q(-x))


@jit
def _q_inv(p):
    """Safeguarded Newton on log Q(x) = log p; NaN outside (0, 1)."""
    if not (p > 0.0 and p < 1.0):
        return NAN
    target = math.log(p)
    lo = -40.0
    hi = 40.0
    # cheap start from the leading tail term
    if p < 0.5:
        t = math.sqrt(-2.0 * math.log(p))
        x = t - (2.515517 + 0.802853 * t + 0.010328 * t * t) / (
            1.0 + 1.432788 * t + 0.189269 * t * t + 0.001308 * t * t * t
        )
    else:
        t = math.sqrt(-2.0 * math.log1p(-p))
        x = -(t - (2.515517 + 0.802853 * t + 0.010328 * t * t) / (
            1.0 + 1.432788 * t + 0.189269 * t * t + 0.001308 * t * t * t
        ))
    for _ in range(MAX_ITER):
        lq = _log_q(x)
        r = lq - target
        if r > 0.0:
            lo = x  # Q(x) too large -> move right
        else:
            hi = x
        if r == 0.0:
            return x
        # d/dx log Q = -phi/Q
        slope = -math.exp(-0.5 * x * x - HALF_LOG_2PI - lq)
        step = -r / slope
        x_new = x + step
        if not (x_new > lo and x_new < hi):
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= 1e-15 * max(1.0, abs(x)):
            return x_new
        x = x_new
    return NAN


# --------------------------------------------------------------------------
# Rate margin / decoding error kernels
# --------------------------------------------------------------------------


@jit
def _margin(gamma, m, d, high_snr):
    """f(gamma, m, d); -inf for gamma <= 0 (no signal, certain failure)."""
    if not gamma > 0.0:
        return -INF
    lg = math.log1p(gamma)
    cap = lg - d * LN2 / m
    if high_snr:
        return math.sqrt(m) * cap
    v = -math.expm1(-2.0 * lg)
    return math.sqrt(m / v) * cap


@jit
def _log_eps(gamma, m, d, high_snr):
    return _log_q(_margin(gamma, m, d, high_snr))


@jit
def _log_success(gamma, m, d, high_snr):
    """log(1 - eps) = log Q(-f)."""
    return _log_q(-_margin(gamma, m, d, high_snr))


@jit
def _log_add(a, b):
    if a < b:
        a, b = b, a
    if b == -INF:
        return a
    return a + math.log1p(math.exp(b - a))


@jit
def _pmin(h, m, d):
    return math.expm1(d * LN2 / m) / h


@jit
def _g_energy(m, d, h):
    """Energy m * (2^(d/m) - 1) / h needed for a positive rate margin."""
    return m * math.expm1(d * LN2 / m) / h


@jit
def _power_for_error(h, m, d, x_target, high_snr):
    """Smallest p with f(p*h, m, d) >= x_target, by bisection; NaN on failure."""
    lo = _pmin(h, m, d)
    if not lo < INF:
        return NAN
    lo = lo * (1.0 + 1e-15)
    hi = 2.0 * lo
    n = 0
    while _margin(hi * h, m, d, high_snr) < x_target:
        hi *= 2.0
        n += 1
        if n > 2000 or not hi < INF:
            return NAN
    for _ in range(MAX_ITER):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            return hi
        if _margin(mid * h, m, d, high_snr) < x_target:
            lo = mid
        else:
            hi = mid
    return NAN


@jit
def _min_blocklength(energy, d, h, lo, hi, strict):
    """Smallest integer m in [lo, hi] with g(m) < energy (<= if not strict).

    g is decreasing in m, so the predicate is monotone. Returns hi + 1 when
    no integer in range qualifies.
    """
    if hi < lo:
        return hi + 1
    ghi = _g_energy(float(hi), d, h)
    ok = ghi < energy if strict else ghi <= energy
    if not ok:
        return hi + 1
    a = lo - 1  # predicate false (virtually) at a
    b = hi  # predicate true at b
    while b - a > 1:
        c = (a + b) // 2
        gc = _g_energy(float(c), d, h)
        if (gc < energy) if strict else (gc <= energy):
            b = c
        else:
            a = c
    return b


# --------------------------------------------------------------------------
# Public API
# --------------------------------------------------------------------------


def q_tail(x):
    """Standard Gaussian upper tail Q(x)."""
    x = float(x)
    if x > TAIL_SWITCH:
        lv = _log_q(x)
        return ErrorProb(math.exp(lv), lv)
    return ErrorProb(_q(x), _log_q(x))


def q_tail_inv(p):
    """Inverse of :func:`q_tail` on (0, 1)."""
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ValueError(f"q_tail_inv needs 0 < p < 1, got {p!r}")
    x = _q_inv(p)
    if math.isnan(x):
        raise NumericError(f"q_tail_inv did not converge for p={p!r}")
    return x


def dispersion(gamma):
    gamma = float(gamma)
    if gamma <= -1.0:
        raise ValueError("dispersion needs gamma > -1")
    return -math.expm1(-2.0 * math.log1p(gamma))


def rate_margin(gamma, m, d_bits, high_snr=False):
    """f(gamma, m, D), or the V = 1 variant when ``high_snr`` is set."""
    if not gamma > 0:
        raise ValueError(f"rate_margin needs gamma > 0, got {gamma!r}")
    return _margin(float(gamma), float(m), float(d_bits), bool(high_snr))


def decode_error(gamma, m, d_bits, high_snr=False):
    """Decoding error probability Q(f(gamma, m, D))."""
    return q_tail(rate_margin(gamma, m, d_bits, high_snr))


def min_power_for_rate(h, m, d_bits):
    """(2^(D/m) - 1) / h: below this power the error is at least 1/2."""
    return _pmin(float(h), float(m), float(d_bits))


def power_for_error(h, m, d_bits, eps_target, high_snr=False):
    """Power p at which decode_error(p*h, m, D) equals ``eps_target``."""
    if not 0.0 < eps_target < 0.5:
        raise ValueError(f"eps_target must lie in (0, 0.5), got {eps_target!r}")
    x = q_tail_inv(eps_target)
    p = _power_for_error(float(h), float(m), float(d_bits), x, bool(high_snr))
    if math.isnan(p):
        raise NumericError(
            f"power_for_error failed (h={h!r}, m={m!r}, D={d_bits!r}, eps={eps_target!r})"
        )
    return p
