"""Certified arithmetic for rotation numbers on the unit circle.

A rotation number omega in (0, 1) is held exactly (quadratic surd,
partial-quotient list with optional periodic tail, or a named generator
rule for the quotients) or approximately (decimal string plus an explicit
error bound).  Every numeric answer is a :class:`BigReal` ball: an mpf
midpoint together with an mpf radius bounding the true error.  Consumers
compare balls only when the gap certifies the inequality and escalate
the working precision otherwise.

Enclosures of omega are exact rational intervals obtained from two
consecutive convergents of the continued fraction, so the certification
chain bottoms out in integer arithmetic.
"""

from __future__ import annotations

import math
import os
from fractions import Fraction

from mpmath import mp, mpf, mpmathify

from .errors import PrecisionExhausted, RationalInput

DEFAULT_PREC = 256
_DEFAULT_PREC_CAP = 8192

# Hard limit on the decimal size of a partial quotient we will write down
# as an exact integer.  Generator rules can blow past any such limit in a
# couple of steps; beyond it only logarithms of quotients are tracked.
MATERIALIZE_DIGIT_CAP = 1500

# Multiplicative slack applied to every computed radius.  mpmath rounds
# to nearest, so a radius computed at >= 53 bits can undershoot by at
# most 2^-52 relative; 1e-6 dominates that by ten orders of magnitude.
_RAD_SLACK = mpf("1.000001")

# Largest log q_k from which the log layer may take another step.  One
# step past this would need exp(log q) with an exponent too large to
# hold as a machine-size integer.
LOG_EXTEND_CAP = 1e12


def _exp_upper(x, prec):
    """Representable upper bound for exp(x); exact direction for slop terms.

    exp(x) for x below -(8 prec + 64) is replaced by exp at that floor,
    still an upper bound and utterly negligible against working radii.
    """
    floor = -(8 * prec + 64)
    with mp.workprec(prec + 8):
        if x < floor:
            return mp.exp(mpf(floor))
        return mp.exp(x) * _RAD_SLACK


def precision_cap() -> int:
    """Current escalation ceiling in bits (env override wins)."""
    return int(os.environ.get("SIEGELAB_PREC_CAP", _DEFAULT_PREC_CAP))


# ---------------------------------------------------------------------------
# balls


class BigReal:
    """A real number known to lie in [mid - rad, mid + rad].

    ``mid`` is an mpf (sign, mantissa, unbounded exponent), ``rad`` a
    non-negative mpf.  ``prec`` records the working precision the value
    was produced at; arithmetic helpers run at that precision.
    """

    __slots__ = ("mid", "rad", "prec")

    def __init__(self, mid, rad, prec=DEFAULT_PREC):
        # conversions at the stated precision; already-built mpf values are
        # kept as-is (mpf(x) would re-round at the ambient context)
        with mp.workprec(prec + 16):
            self.mid = mid if type(mid) is mp.mpf else mpf(mid)
            self.rad = rad if type(rad) is mp.mpf else mpf(rad)
        self.prec = prec

    # -- constructors -------------------------------------------------

    @classmethod
    def exact(cls, value, prec=DEFAULT_PREC):
        """Ball of radius zero (value must convert to mpf exactly)."""
        with mp.workprec(prec):
            v = mpmathify(value)
        return cls(v, mpf(0), prec)

    @classmethod
    def from_interval(cls, lo, hi, prec=DEFAULT_PREC):
        """Ball covering the exact rational interval [lo, hi]."""
        if hi < lo:
            raise ValueError("interval endpoints out of order")
        with mp.workprec(prec + 16):
            mid = mpmathify(Fraction(lo + hi) / 2)
            half = mpmathify(Fraction(hi - lo) / 2)
            rad = half * _RAD_SLACK + abs(mid) * mpf(2) ** (-(prec + 8))
        return cls(mid, rad, prec)

    # -- views ---------------------------------------------------------

    def lower(self):
        with mp.workprec(self.prec + 16):
            return self.mid - self.rad

    def upper(self):
        with mp.workprec(self.prec + 16):
            return self.mid + self.rad

    def contains(self, x) -> bool:
        x = mpmathify(x)
        return self.lower() <= x <= self.upper()

    def __repr__(self):
        return f"BigReal({mp.nstr(self.mid, 12)} +/- {mp.nstr(self.rad, 3)})"

    def __float__(self):
        return float(self.mid)

    # -- certified comparisons ----------------------------------------
    # True/False only when the balls are disjoint; None means undecided.

    def lt(self, other):
        lo, hi = _as_bounds(other, self.prec)
        if self.upper() < lo:
            return True
        if self.lower() >= hi:
            return False
        return None

    def le(self, other):
        lo, hi = _as_bounds(other, self.prec)
        if self.upper() <= lo:
            return True
        if self.lower() > hi:
            return False
        return None

    def gt(self, other):
        r = self.le(other)
        return None if r is None else not r

    def ge(self, other):
        r = self.lt(other)
        return None if r is None else not r

    # -- arithmetic -----------------------------------------------------

    def _eps(self):
        return mpf(2) ** (4 - self.prec)

    def __neg__(self):
        return BigReal(-self.mid, self.rad, self.prec)

    def __add__(self, other):
        o = _coerce(other, self.prec)
        prec = max(self.prec, o.prec)
        with mp.workprec(prec + 8):
            mid = self.mid + o.mid
            rad = (self.rad + o.rad + abs(mid) * mpf(2) ** (-prec)) * _RAD_SLACK
        return BigReal(mid, rad, prec)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_coerce(other, self.prec))

    def __rsub__(self, other):
        return _coerce(other, self.prec) + (-self)

    def __mul__(self, other):
        o = _coerce(other, self.prec)
        prec = max(self.prec, o.prec)
        with mp.workprec(prec + 8):
            mid = self.mid * o.mid
            rad = (
                abs(self.mid) * o.rad
                + abs(o.mid) * self.rad
                + self.rad * o.rad
                + abs(mid) * mpf(2) ** (-prec)
            ) * _RAD_SLACK
        return BigReal(mid, rad, prec)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce(other, self.prec)
        prec = max(self.prec, o.prec)
        with mp.workprec(prec + 8):
            dlo = abs(o.mid) - o.rad
            if dlo <= 0:
                raise ZeroDivisionError("divisor ball contains zero")
            mid = self.mid / o.mid
            rad = ((self.rad + abs(mid) * o.rad) / dlo + abs(mid) * mpf(2) ** (-prec)) * _RAD_SLACK
        return BigReal(mid, rad, prec)

    def exp(self):
        with mp.workprec(self.prec + 8):
            mid = mp.exp(self.mid)
            # exp is 1-Lipschitz in relative terms: widen by expm1(rad)
            rad = (mid * mp.expm1(self.rad) + abs(mid) * mpf(2) ** (2 - self.prec)) * _RAD_SLACK
        return BigReal(mid, rad, self.prec)

    def log(self):
        with mp.workprec(self.prec + 8):
            lo = self.mid - self.rad
            if lo <= 0:
                raise ValueError("log of ball touching zero")
            mid = mp.log(self.mid)
            rad = (self.rad / lo + abs(mid) * mpf(2) ** (2 - self.prec)) * _RAD_SLACK
        return BigReal(mid, rad, self.prec)


def _coerce(x, prec) -> BigReal:
    if isinstance(x, BigReal):
        return x
    return BigReal.exact(x, prec)


def _as_bounds(x, prec=DEFAULT_PREC):
    if isinstance(x, BigReal):
        return x.lower(), x.upper()
    if isinstance(x, Fraction):
        with mp.workprec(prec + 32):
            v = mpmathify(x)
            pad = (abs(v) + 1) * mpf(2) ** (-(prec + 16))
            return v - pad, v + pad
    with mp.workprec(prec + 32):
        v = mpmathify(x)
    return v, v


def log_ball_of_int(n: int, prec=DEFAULT_PREC) -> BigReal:
    """Ball enclosing log(n) for a positive integer n."""
    if n <= 0:
        raise ValueError("need a positive integer")
    with mp.workprec(prec + 8):
        mid = mp.log(n)
        rad = (abs(mid) + 1) * mpf(2) ** (2 - prec)
    return BigReal(mid, rad, prec)


# ---------------------------------------------------------------------------
# quotient generator rules

_RULES = {}


def _register_rule(name):
    def deco(cls):
        _RULES[name] = cls
        return cls

    return deco


def _digits_of_bits(bits: float) -> float:
    return bits * math.log10(2)


def _exact_ceil_exp_ratio(exponent_num, exponent_den, q: int) -> int:
    """ceil(e^(p/r) / q) decided by interval evaluation at escalating precision.

    e^(p/r) is irrational for nonzero rational p/r, so the ceiling is
    eventually unambiguous.
    """
    bits = int(exponent_num / exponent_den / math.log(2)) + 64
    while True:
        with mp.workprec(bits):
            t = mp.exp(mpf(exponent_num) / exponent_den) / q
            slack = abs(t) * mpf(2) ** (8 - bits)
            lo, hi = t - slack, t + slack
            clo, chi = mp.ceil(lo), mp.ceil(hi)
            if clo == chi:
                return int(clo)
        bits *= 2
        if bits > 1 << 26:
            raise PrecisionExhausted("cannot resolve ceiling of exponential quotient")


class _QuotientRule:
    """Produces partial quotients a_{k+1} from convergent state (q_{k-1}, q_k).

    ``next_quotient`` returns an exact integer or None when the quotient
    would exceed the materialization cap; ``log_next`` then supplies a
    ball for log a_{k+1} so diagnostics can keep walking in log space.
    """

    bounded_quotients = None  # sup over k of a_k when known finite

    def next_quotient(self, k, q_prev, q):
        raise NotImplementedError

    def log_next(self, k, log_q_prev: BigReal, log_q: BigReal, prec) -> BigReal:
        raise NotImplementedError

    def params(self):
        return {}


@_register_rule("const")
class ConstantRule(_QuotientRule):
    """a_k = a for all k >= 1 (a = 1 gives the golden mean)."""

    def __init__(self, a=1):
        self.a = int(a)
        if self.a < 1:
            raise ValueError("constant quotient must be >= 1")
        self.bounded_quotients = self.a

    def next_quotient(self, k, q_prev, q):
        return self.a

    def params(self):
        return {"a": self.a}


@_register_rule("expq")
class ExpQRule(_QuotientRule):
    """a_{k+1} = ceil(e^(sigma q_k) / q_k), forcing q_{k+1} = Theta(e^(sigma q_k))."""

    def __init__(self, sigma="1"):
        self.sigma = Fraction(str(sigma))
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")

    def next_quotient(self, k, q_prev, q):
        exponent = self.sigma * q
        if _digits_of_bits(float(exponent) / math.log(2)) > MATERIALIZE_DIGIT_CAP:
            return None
        return max(1, _exact_ceil_exp_ratio(exponent.numerator, exponent.denominator, q))

    def log_next(self, k, log_q_prev, log_q, prec):
        # log a = sigma*q - log q + [0, log(1 + q e^{-sigma q})]
        qball = log_q.exp()
        base = qball * Fraction(self.sigma) - log_q
        ceil_slop = _exp_upper(log_q.upper() - base.lower(), prec)
        return BigReal(base.mid, base.rad + ceil_slop + mpf(2) ** (-prec), prec)

    def params(self):
        return {"sigma": str(self.sigma)}


@_register_rule("expqpow")
class ExpQPowRule(_QuotientRule):
    """a_{k+1} = ceil(e^(alpha q_k^beta) / q_k) for sub-exponential denominator growth."""

    def __init__(self, alpha="1", beta="1.5"):
        self.alpha = Fraction(str(alpha))
        self.beta = Fraction(str(beta))
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be positive")

    def _exponent(self, q: int) -> Fraction:
        # exact when beta is an integer; otherwise a certified upper-digit probe
        if self.beta.denominator == 1:
            return self.alpha * Fraction(q) ** self.beta.numerator
        return None

    def next_quotient(self, k, q_prev, q):
        expo_bits = self.alpha * math.pow(q, float(self.beta)) / math.log(2)
        if _digits_of_bits(float(expo_bits)) > MATERIALIZE_DIGIT_CAP:
            return None
        # resolve ceil(e^(alpha q^beta)/q) with interval evaluation
        bits = int(float(expo_bits)) + 64
        while True:
            with mp.workprec(bits):
                e = mpf(self.alpha.numerator) / self.alpha.denominator * mp.power(q, mpf(self.beta.numerator) / self.beta.denominator)
                t = mp.exp(e) / q
                slack = abs(t) * mpf(2) ** (10 - bits)
                lo, hi = t - slack, t + slack
                clo, chi = mp.ceil(lo), mp.ceil(hi)
                if clo == chi:
                    return max(1, int(clo))
            bits *= 2
            if bits > 1 << 26:
                raise PrecisionExhausted("cannot resolve expqpow quotient")

    def log_next(self, k, log_q_prev, log_q, prec):
        # q^beta = exp(beta log q); log a = alpha q^beta - log q + ceil slop
        powball = (log_q * Fraction(self.beta)).exp()
        base = powball * Fraction(self.alpha) - log_q
        ceil_slop = _exp_upper(log_q.upper() - base.lower(), prec)
        return BigReal(base.mid, base.rad + ceil_slop + mpf(2) ** (-prec), prec)

    def params(self):
        return {"alpha": str(self.alpha), "beta": str(self.beta)}


@_register_rule("square")
class SquareRule(_QuotientRule):
    """Smallest realizable quotients with q_{k+1} >= (q_k + 1)^2.

    a_{k+1} = ceil(((q_k+1)^2 - q_{k-1}) / q_k) lands q_{k+1} inside
    [(q_k+1)^2, (q_k+1)^2 + q_k), so every denominator joins the set
    {q_j : q_{j+1} >= (q_j+1)^2} and the growth stays as slow as that
    set permits.
    """

    def next_quotient(self, k, q_prev, q):
        target = (q + 1) ** 2 - q_prev
        a = -((-target) // q)  # ceil div
        if len(str(a)) > MATERIALIZE_DIGIT_CAP:
            return None
        return max(1, a)

    def log_next(self, k, log_q_prev, log_q, prec):
        # log a = log((q+1)^2 - q_prev) - log q + ceil correction
        with mp.workprec(prec + 8):
            two_log = log_q * 2
            # (q+1)^2 - q_prev = q^2 (1 + 2/q + (1 - q_prev)/q^2); corrections
            # are below 4/q, and q is astronomically large on this branch.
            corr = 4 * mp.exp(-log_q.lower())
            mid = two_log.mid - log_q.mid
            rad = two_log.rad + log_q.rad + abs(corr) + mpf(2) ** (-prec)
        return BigReal(mid, rad, prec)


@_register_rule("qq")
class QPowQRule(_QuotientRule):
    """a_{k+1} = q_k^(q_k - 1), forcing q_{k+1} close to q_k^(q_k)."""

    def next_quotient(self, k, q_prev, q):
        if (q - 1) * math.log10(max(q, 2)) > MATERIALIZE_DIGIT_CAP:
            return None
        return max(1, q ** (q - 1))

    def log_next(self, k, log_q_prev, log_q, prec):
        qball = log_q.exp()
        return (qball - 1) * log_q

    def params(self):
        return {}


def make_rule(name, **params) -> _QuotientRule:
    if name not in _RULES:
        raise ValueError(f"unknown quotient rule {name!r} (have {sorted(_RULES)})")
    return _RULES[name](**params)


# ---------------------------------------------------------------------------
# rotation-number specifications


class IrrationalSpec:
    """Single source of arithmetic truth for a rotation number in (0, 1).

    Kinds:

    * ``surd``: fractional part of sqrt(d), d a non-square positive integer;
    * ``quotient-list``: explicit partial quotients, optional periodic tail;
    * ``generator-rule``: a named rule produces a_{k+1} from (q_{k-1}, q_k);
    * ``decimal``: a decimal string with an explicit error bound (second
      class: certification fails loudly once the digits run out).

    Partial quotients are materialized lazily and cached; the caches are
    append-only, so concurrent readers are safe.
    """

    def __init__(self, kind, **params):
        self.kind = kind
        self.params = params
        self.normalized = True
        self._a = []  # exact partial quotients, a[0] == 0
        self._p = []  # p[k], q[k] aligned with _a
        self._q = []
        self._log_q = []  # BigReal balls for log q_k, may extend past _a
        self._log_prec = 0
        self._exhausted = False  # no more exact quotients will come
        self._exhaust_reason = None
        self._init_kind()

    # -- constructors ---------------------------------------------------

    @classmethod
    def surd(cls, d: int) -> "IrrationalSpec":
        d = int(d)
        if d <= 0 or math.isqrt(d) ** 2 == d:
            raise ValueError("surd parameter must be a positive non-square integer")
        return cls("surd", d=d)

    @classmethod
    def from_quotients(cls, quotients, period=None) -> "IrrationalSpec":
        quotients = [int(a) for a in quotients]
        if not quotients or quotients[0] != 0:
            raise ValueError("normalized quotient lists start with a_0 = 0")
        if any(a < 1 for a in quotients[1:]):
            raise ValueError("partial quotients a_k must be >= 1 for k >= 1")
        if period is not None:
            period = [int(a) for a in period]
            if not period or any(a < 1 for a in period):
                raise ValueError("periodic tail entries must be >= 1")
        return cls("quotient-list", quotients=quotients, period=period)

    @classmethod
    def golden(cls) -> "IrrationalSpec":
        """(sqrt(5) - 1)/2 = [0; 1, 1, 1, ...]."""
        return cls.from_quotients([0], period=[1])

    @classmethod
    def rule(cls, name, **params) -> "IrrationalSpec":
        return cls("generator-rule", name=name, rule=make_rule(name, **params))

    @classmethod
    def decimal(cls, value: str, err) -> "IrrationalSpec":
        v = Fraction(str(value))
        e = Fraction(str(err))
        if e <= 0:
            raise ValueError("decimal error bound must be positive")
        if not (0 < v - e and v + e < 1):
            raise ValueError("decimal value must lie in (0, 1) with its error bar")
        return cls("decimal", value=v, err=e)

    # -- kind-specific state ---------------------------------------------

    def _init_kind(self):
        self._a = [0]
        self._p = [0]
        self._q = [1]
        if self.kind == "surd":
            d = self.params["d"]
            a0 = math.isqrt(d)
            # state (m_k, den_k) of the Gauss walk on sqrt(d); a_0 frozen
            self._surd_state = (0, 1)
            self._surd_a0 = a0
        elif self.kind == "decimal":
            v, e = self.params["value"], self.params["err"]
            self._dec_interval = (v - e, v + e)

    def __repr__(self):
        if self.kind == "generator-rule":
            return f"IrrationalSpec(rule:{self.params['name']} {self.params['rule'].params()})"
        if self.kind == "decimal":
            return f"IrrationalSpec(decimal {float(self.params['value'])} +/- {float(self.params['err'])})"
        if self.kind == "surd":
            return f"IrrationalSpec(frac(sqrt({self.params['d']})))"
        period = self.params.get("period")
        tail = f", period={period}" if period else ""
        return f"IrrationalSpec(quotients={self.params['quotients']}{tail})"

    @property
    def is_exact(self) -> bool:
        return self.kind != "decimal"

    def is_rational(self) -> bool:
        return self.kind == "quotient-list" and self.params.get("period") is None

    def sup_quotient(self):
        """sup over k >= 1 of a_k when provably finite, else None."""
        if self.kind == "quotient-list":
            period = self.params.get("period")
            if period is None:
                return None  # rational; callers reject earlier
            return max(self.params["quotients"][1:] + period)
        if self.kind == "surd":
            return max(self._surd_period())
        if self.kind == "generator-rule":
            return self.params["rule"].bounded_quotients
        return None

    @staticmethod
    def _surd_step(d, a0, m, den):
        """One Gauss step on sqrt(d): state (m_k, den_k) -> (a_{k+1}, m', den')."""
        a_cur = (a0 + m) // den
        m_next = den * a_cur - m
        den_next = (d - m_next * m_next) // den
        a_next = (a0 + m_next) // den_next
        return a_next, m_next, den_next

    def _surd_period(self):
        d = self.params["d"]
        a0 = self._surd_a0
        m, den = 0, 1
        seen = {}
        quots = []
        while (m, den) not in seen:
            seen[(m, den)] = len(quots)
            a, m, den = self._surd_step(d, a0, m, den)
            quots.append(a)
        start = seen[(m, den)]
        return quots[start:]

    # -- quotient materialization ----------------------------------------

    def _next_exact_quotient(self, k):
        """Exact a_k for k >= 1, or None when materialization must stop."""
        if self.kind == "quotient-list":
            quotients, period = self.params["quotients"], self.params.get("period")
            if k < len(quotients):
                return quotients[k]
            if period is None:
                raise RationalInput("finite quotient list: the expansion terminates")
            return period[(k - len(quotients)) % len(period)]
        if self.kind == "surd":
            m, den = self._surd_state
            a, m_next, den_next = self._surd_step(self.params["d"], self._surd_a0, m, den)
            self._surd_state = (m_next, den_next)
            return a
        if self.kind == "generator-rule":
            rule = self.params["rule"]
            return rule.next_quotient(k - 1, self._q[k - 2] if k >= 2 else 0, self._q[k - 1])
        if self.kind == "decimal":
            return self._next_decimal_quotient(k)
        raise AssertionError(self.kind)

    def _next_decimal_quotient(self, k):
        lo, hi = self._dec_interval
        if lo <= 0:
            # interval reached zero: the center expansion has terminated
            raise RationalInput("decimal value is consistent only with a rational at this depth")
        inv_lo, inv_hi = 1 / hi, 1 / lo
        a_lo, a_hi = inv_lo.numerator // inv_lo.denominator, inv_hi.numerator // inv_hi.denominator
        if a_lo != a_hi:
            center = (lo + hi) / 2
            inv_center = 1 / center
            if inv_center.denominator == 1:
                raise RationalInput("decimal value is exactly rational at the stated precision")
            raise PrecisionExhausted(
                f"decimal error bound too coarse to certify partial quotient a_{k}"
            )
        a = int(a_lo)
        self._dec_interval = (inv_lo - a, inv_hi - a)
        return a

    def extend_to(self, k: int) -> int:
        """Materialize exact quotients up to index k; returns the last index reached."""
        while len(self._a) <= k and not self._exhausted:
            idx = len(self._a)
            try:
                a = self._next_exact_quotient(idx)
            except (RationalInput, PrecisionExhausted) as exc:
                self._exhausted = True
                self._exhaust_reason = exc
                raise
            if a is None:
                self._exhausted = True
                self._exhaust_reason = "quotient beyond materialization cap"
                break
            self._a.append(a)
            if idx == 1:
                self._p.append(1)
                self._q.append(a)
            else:
                self._p.append(a * self._p[idx - 1] + self._p[idx - 2])
                self._q.append(a * self._q[idx - 1] + self._q[idx - 2])
        return len(self._a) - 1

    def exact_depth(self) -> int:
        return len(self._a) - 1

    def quotients_upto(self, k: int):
        last = self.extend_to(k)
        if last < k:
            raise PrecisionExhausted(
                f"only {last} exact partial quotients are materializable ({self._exhaust_reason})"
            )
        return list(self._a[: k + 1])

    def convergents_upto(self, k: int):
        last = self.extend_to(k)
        if last < k:
            raise PrecisionExhausted(
                f"only {last} exact convergents are materializable ({self._exhaust_reason})"
            )
        return list(self._p[: k + 1]), list(self._q[: k + 1])

    # -- log-layer extension ----------------------------------------------

    def log_q_ball(self, k: int, prec=DEFAULT_PREC) -> BigReal:
        """Ball for log q_k, valid past the exact materialization horizon."""
        if self._log_prec < prec:
            self._log_q = []
            self._log_prec = prec
        while len(self._log_q) <= k:
            idx = len(self._log_q)
            try:
                exact_avail = self.extend_to(idx) >= idx
            except (RationalInput, PrecisionExhausted):
                exact_avail = False
            if exact_avail:
                self._log_q.append(log_ball_of_int(self._q[idx], prec) if self._q[idx] > 1 else BigReal.exact(0, prec))
                continue
            if self.kind != "generator-rule":
                raise PrecisionExhausted("log-layer extension only exists for generator rules")
            rule = self.params["rule"]
            log_q = self._log_q[idx - 1]
            log_q_prev = self._log_q[idx - 2] if idx >= 2 else BigReal.exact(0, prec)
            log_a = rule.log_next(idx - 1, log_q_prev, log_q, prec)
            # log q_{k+1} = log a + log q_k + log1p(q_{k-1} / (a q_k))
            tail = log_q_prev.mid - log_a.mid - log_q.mid
            with mp.workprec(prec + 8):
                slop = mp.exp(tail) if tail < 64 else mpf("inf")
            combined = log_a + log_q
            self._log_q.append(BigReal(combined.mid, combined.rad + abs(slop) + mpf(2) ** (-prec), prec))
        return self._log_q[k]

    # -- exact rational enclosures ------------------------------------------

    def enclosure(self, width: Fraction):
        """Exact rationals lo < omega < hi with hi - lo <= width."""
        width = Fraction(width)
        if width <= 0:
            raise ValueError("width must be positive")
        if self.is_rational():
            raise RationalInput("rotation number is exactly rational")
        if self.kind == "decimal":
            lo, hi = self.params["value"] - self.params["err"], self.params["value"] + self.params["err"]
            if hi - lo > width:
                raise PrecisionExhausted(
                    "decimal spec carries less information than the requested enclosure"
                )
            return lo, hi
        k = max(self.exact_depth(), 1)
        while True:
            try:
                reached = self.extend_to(k + 1)
            except RationalInput:
                raise
            if reached >= k + 1:
                qk, qk1 = self._q[k], self._q[k + 1]
                if qk * qk1 * width >= 1:
                    lo = Fraction(self._p[k], qk)
                    hi = Fraction(self._p[k + 1], qk1)
                    return (lo, hi) if lo < hi else (hi, lo)
                k += 1
                continue
            # Materialization stopped: the unseen quotient a_{K+1} exceeds the
            # digit cap, so |omega - p_K/q_K| < 1 / (10^cap * q_K^2).
            K = reached
            a_min = 10 ** MATERIALIZE_DIGIT_CAP
            qK = self._q[K]
            half = Fraction(1, a_min * qK * qK)
            if 2 * half > width:
                raise PrecisionExhausted(
                    "enclosure request is below what the materialized expansion certifies"
                )
            center = Fraction(self._p[K], qK)
            return center - half, center + half

    def ball(self, prec=DEFAULT_PREC) -> BigReal:
        lo, hi = self.enclosure(Fraction(1, 2 ** (prec + 8)))
        return BigReal.from_interval(lo, hi, prec)


# ---------------------------------------------------------------------------
# distance to the nearest integer and small divisors


def _dist_to_nearest_int(x: Fraction, y: Fraction):
    """Range of dist-to-nearest-integer over the rational interval [x, y].

    Returns (dlo, dhi, hits_integer).
    """
    if y - x >= 1:
        return Fraction(0), Fraction(1, 2), True
    n0 = (2 * x + 1) // 2  # floor(x + 1/2)
    n1 = (2 * y + 1) // 2
    dx = abs(x - n0)
    dy = abs(y - n1)
    if n0 == n1:
        if x <= n0 <= y:
            return Fraction(0), max(dx, dy), True
        return min(dx, dy), max(dx, dy), False
    if n1 == n0 + 1:
        hits = x <= n0 <= y or x <= n1 <= y
        dlo = Fraction(0) if hits else min(dx, dy)
        return dlo, Fraction(1, 2), hits
    return Fraction(0), Fraction(1, 2), True


def fractional_distance_interval(omega: IrrationalSpec, m: int, width: Fraction):
    """Exact rational interval for ||m omega|| from an enclosure of width <= width/m."""
    if m == 0:
        return Fraction(0), Fraction(0)
    lo, hi = omega.enclosure(Fraction(width, m))
    return _dist_to_nearest_int(m * lo, m * hi)[:2]


def nearest_integer_distance(omega: IrrationalSpec, m: int, prec: int = DEFAULT_PREC) -> BigReal:
    """||m omega||, certified to absolute error below 2^-prec.

    The distance from m*omega to the nearest integer, computed from an
    exact rational enclosure of omega deep enough that the interval image
    determines the answer.  Escalates the enclosure until the certified
    radius fits, and raises PrecisionExhausted when the spec cannot
    support the request.
    """
    if m < 0:
        raise ValueError("m must be non-negative")
    if omega.is_rational():
        raise RationalInput("rotation number is exactly rational")
    if m == 0:
        return BigReal.exact(0, prec)
    width = Fraction(1, 2 ** (prec + 4))
    cap_width = Fraction(1, 2 ** (precision_cap() + 64))
    while True:
        lo, hi = omega.enclosure(Fraction(width, m))
        dlo, dhi, hits = _dist_to_nearest_int(m * lo, m * hi)
        if not hits and dhi - dlo <= Fraction(1, 2 ** (prec + 1)):
            ball = BigReal.from_interval(dlo, dhi, prec)
            return ball
        if hits and dhi <= Fraction(1, 2 ** (prec + 1)):
            # the distance is certified tiny even though the enclosure
            # still straddles the integer
            return BigReal.from_interval(Fraction(0), dhi, prec)
        width /= 2 ** 64
        if width < cap_width:
            raise PrecisionExhausted(
                f"cannot separate ||{m} omega|| from an integer within the precision cap"
            )


def resonance_gap(omega: IrrationalSpec, n: int, prec: int = DEFAULT_PREC) -> BigReal:
    """|lambda^n - 1| = 2 sin(pi ||n omega||) for lambda = e^(2 pi i omega)."""
    if n == 0:
        return BigReal.exact(0, prec)
    d = nearest_integer_distance(omega, n, prec + 8)
    return sin_pi_ball(d, prec)


def small_divisor(omega: IrrationalSpec, n: int, prec: int = DEFAULT_PREC) -> BigReal:
    """|lambda^n - lambda| = 2 sin(pi ||(n-1) omega||), exactly 0 at n = 1.

    Evaluated through the nearest-integer distance and a single sine so
    no cancellation occurs even when (n-1) omega is very close to an
    integer.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return BigReal.exact(0, prec)
    return resonance_gap(omega, n - 1, prec)


def sin_pi_ball(d: BigReal, prec: int = DEFAULT_PREC) -> BigReal:
    """2 sin(pi d) for a ball d inside [0, 1/2]; monotone endpoint evaluation."""
    with mp.workprec(prec + 16):
        lo = max(d.lower(), mpf(0))
        hi = min(d.upper(), mpf("0.5"))
        slop = mpf(2) ** (4 - prec)
        vlo = 2 * mp.sinpi(lo)
        vhi = 2 * mp.sinpi(hi)
        vlo = vlo * (1 - slop)
        vhi = vhi * (1 + slop)
        mid = (vlo + vhi) / 2
        rad = (vhi - vlo) / 2 + abs(mid) * slop
    return BigReal(mid, rad, prec)
