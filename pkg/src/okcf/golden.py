"""Continued fraction expansion over Q(sqrt(5)) for real quartic
irrationals with all-real conjugates.

The pair (xi_n, xi'_n) is tracked exactly; each partial quotient is the
first lattice point v(a) = (a, sigma(a)) among the four floor/ceil corner
candidates whose squared distance to the pair is below 9/10 (the
circumradius bound of the fundamental cell of v(O_K)).  Cycle detection
on exact quotient-state keys yields an ultimately periodic expansion.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import floor as _floor
from .cf import CFExpansion, eval_periodic
from .field import (
    FieldSpec,
    KElement,
    SurdElement,
    is_square_in_k,
    reals_equal,
    sign_of,
    surd_is_zero,
)
from .intervals import DEFAULT_BITS, MAX_BITS, PrecisionError, RealInterval
from .quartic import QuadraticPolyK, QuotientState, make_state, step_state

RADIUS_SQ = Fraction(9, 10)
LOWER_BOUND_SQ = Fraction(10, 9)

CANDIDATE_ORDER = (("floor", "floor"), ("floor", "ceil"), ("ceil", "floor"), ("ceil", "ceil"))


class ExpansionError(RuntimeError):
    pass


class NoCandidateError(ExpansionError):
    """No corner candidate satisfied the distance bound.

    The circumradius argument guarantees a candidate exists, so this is an
    internal-consistency failure, not an input error.
    """


class MaxStepsError(ExpansionError):
    def __init__(self, message: str, quotients: list[KElement], keys: list[tuple]):
        super().__init__(message)
        self.quotients = quotients
        self.keys = keys


class GoldenPreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class RealPair:
    """An exact real u + v with u, v surds over two (possibly different)
    families.  When the product of the deltas is a square in K the second
    component is folded into the first family and v is None."""

    u: SurdElement
    v: SurdElement | None

    @property
    def is_zero(self) -> bool:
        if self.v is None:
            return surd_is_zero(self.u)
        return self.u.y.is_zero and self.v.y.is_zero and (self.u.x + self.v.x).is_zero

    def __neg__(self) -> RealPair:
        return RealPair(-self.u, None if self.v is None else -self.v)

    def __add__(self, other: RealPair) -> RealPair:
        if (self.v is None) != (other.v is None):
            raise ValueError("mismatched pair structure")
        if self.v is None:
            return RealPair(self.u + other.u, None)
        return RealPair(self.u + other.u, self.v + other.v)

    def shift(self, k: KElement | Fraction | int) -> RealPair:
        return RealPair(self.u + k, self.v)

    def scale(self, k: KElement | Fraction | int) -> RealPair:
        return RealPair(self.u * k, None if self.v is None else self.v * k)

    def interval(self, bits: int = DEFAULT_BITS) -> RealInterval:
        iv = self.u.embed(bits)
        if self.v is not None:
            iv = iv + self.v.embed(bits)
        return iv

    def sign(self) -> int:
        if self.is_zero:
            return 0
        bits = DEFAULT_BITS
        while True:
            s = self.interval(bits).sign
            if s is not None:
                return s
            if bits >= MAX_BITS:
                raise PrecisionError("pair sign refinement exceeded the cap")
            bits *= 2

    def _as_rational(self) -> Fraction | None:
        if self.v is None:
            if self.u.y.is_zero and self.u.x.is_rational:
                return self.u.x.a
            return None
        if self.u.y.is_zero and self.v.y.is_zero:
            k = self.u.x + self.v.x
            if k.is_rational:
                return k.a
        return None

    def floor(self) -> int:
        q = self._as_rational()
        if q is not None:
            return q.numerator // q.denominator
        # Any other shape is irrational, so refinement terminates.
        bits = DEFAULT_BITS
        while True:
            iv = self.interval(bits)
            f_lo, f_hi = _floor(iv.lo), _floor(iv.hi)
            if f_lo == f_hi:
                return f_lo
            if bits >= MAX_BITS:
                raise PrecisionError("floor refinement exceeded the cap")
            bits *= 2

    def ceil(self) -> int:
        return -((-self).floor())


@dataclass(frozen=True)
class PairContext:
    """Session constants for one expansion: the two discriminant families
    and the exact lattice geometry of Q(sqrt(5))."""

    spec: FieldSpec
    delta: KElement
    delta_prime: KElement
    link: KElement | None

    @staticmethod
    def create(seed: QuadraticPolyK) -> PairContext:
        spec = seed.spec
        delta = seed.delta
        delta_prime = delta.conj()
        return PairContext(spec, delta, delta_prime, is_square_in_k(delta * delta_prime))

    def pair(self, a: SurdElement, b: SurdElement) -> RealPair:
        """The real a + b with a over delta and b over delta_prime."""
        if self.link is not None:
            # sqrt(delta_prime) = link / sqrt(delta): fold b into a's family.
            folded_y = b.y * self.link / self.delta
            return RealPair(
                SurdElement(self.spec, self.delta, a.x + b.x, a.y + folded_y), None
            )
        return RealPair(a, b)

    @property
    def beta(self) -> KElement:
        return self.spec.omega

    @property
    def inv_sqrt5(self) -> KElement:
        # 1/sqrt(5) = (2*beta - 1)/5
        return self.spec.element(Fraction(-1, 5), Fraction(2, 5))


@dataclass(frozen=True)
class PairState:
    xi: QuotientState
    xi_prime: QuotientState
    index: int

    @property
    def key(self) -> tuple:
        """Exact value-level key of the pair, used for cycle detection."""
        return (*self.xi.canonical_key, *self.xi_prime.canonical_key)


@dataclass(frozen=True)
class ExpansionConfig:
    max_steps: int = 10_000
    precision_bits: int = DEFAULT_BITS
    # Candidate order is deliberately fixed for reproducibility.
    candidate_order: tuple[tuple[str, str], ...] = CANDIDATE_ORDER

    def __post_init__(self) -> None:
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


@dataclass(frozen=True)
class LatticeCoords:
    x: RealPair
    y: RealPair
    x_interval: RealInterval
    y_interval: RealInterval


@dataclass(frozen=True)
class RoundTrip:
    ok: bool
    forward_ok: bool
    sigma_ok: bool
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class ExpansionResult:
    expansion: CFExpansion
    keys: tuple[tuple, ...]
    cycle_start: int
    verified: bool
    seed: QuadraticPolyK
    branch: int
    conj_branch: int

    @property
    def steps(self) -> int:
        return len(self.expansion.preperiod) + len(self.expansion.period)


def lattice_coords(p: PairState, ctx: PairContext, precision_bits: int = DEFAULT_BITS) -> LatticeCoords:
    """Exact solution of x + y*beta = xi_n, x - y/beta = xi'_n.

    Subtracting the equations gives y = (xi_n - xi'_n)/sqrt(5) since
    beta + 1/beta = sqrt(5) = 2*beta - 1 lies in K.
    """
    if ctx.spec.d != 5:
        raise GoldenPreconditionError("lattice rounding requires D = 5")
    xi = p.xi.value
    xip = p.xi_prime.value
    inv = ctx.inv_sqrt5
    y = ctx.pair(xi * inv, -(xip * inv))
    x = ctx.pair(xi * (ctx.spec.one - inv * ctx.beta), xip * (inv * ctx.beta))
    return LatticeCoords(x, y, x.interval(precision_bits), y.interval(precision_bits))


def choose_quotient(
    p: PairState, ctx: PairContext, cfg: ExpansionConfig = ExpansionConfig()
) -> tuple[KElement, RealInterval]:
    """First corner candidate a = x + y*beta with
    |xi_n - a|^2 + |xi'_n - sigma(a)|^2 < 9/10, decided exactly."""
    coords = lattice_coords(p, ctx, cfg.precision_bits)
    xf, xc = coords.x.floor(), coords.x.ceil()
    yf, yc = coords.y.floor(), coords.y.ceil()
    corners = {"floor": (xf, yf), "ceil": (xc, yc)}
    seen: set[tuple[int, int]] = set()
    xi = p.xi.value
    xip = p.xi_prime.value
    for cx, cy in cfg.candidate_order:
        x = corners[cx][0]
        y = corners[cy][1]
        if (x, y) in seen:
            continue
        seen.add((x, y))
        a = ctx.spec.element(x, y)
        d1 = (xi - a) * (xi - a)
        d2 = (xip - a.conj()) * (xip - a.conj())
        dist = ctx.pair(d1, d2)
        if dist.shift(-RADIUS_SQ).sign() < 0:
            return a, dist.interval(cfg.precision_bits)
    raise NoCandidateError(
        f"no corner candidate within the circumradius bound at index {p.index}"
    )


def _check_preconditions(seed: QuadraticPolyK) -> None:
    if seed.spec.d != 5:
        raise GoldenPreconditionError(
            f"expansion requires K = Q(sqrt(5)): for D = {seed.spec.d} the covering "
            "radius of v(O_K) exceeds 1 and the rounding step has no guarantee"
        )
    delta = seed.delta
    if sign_of(delta) <= 0:
        raise GoldenPreconditionError("discriminant must be positive")
    if is_square_in_k(delta) is not None:
        raise GoldenPreconditionError(
            "discriminant is a square in K: the root is quadratic, not quartic"
        )
    sdelta = delta.conj()
    if sign_of(sdelta) <= 0:
        msg = (
            "sigma(discriminant) <= 0: the conjugates of the root are not all real, "
            "so the pair expansion does not apply"
        )
        if sign_of(sdelta + 4) < 0:
            msg += (
                "; moreover sigma(discriminant) < -4, so no ultimately periodic "
                "expansion over K exists at all (the even-period constraint fails)"
            )
        raise GoldenPreconditionError(msg)
    if is_square_in_k(sdelta) is not None:
        raise GoldenPreconditionError("sigma(discriminant) is a square in K")


def expand_pair(
    seed: QuadraticPolyK,
    branch: int,
    conj_branch: int,
    cfg: ExpansionConfig = ExpansionConfig(),
) -> ExpansionResult:
    """Run the pair expansion until the exact state key repeats.

    Returns the pre-period and period, the visited state keys and the
    round-trip verification flag.
    """
    _check_preconditions(seed)
    ctx = PairContext.create(seed)
    s = make_state(seed, branch)
    sp = make_state(seed.sigma(), conj_branch)
    seen: dict[tuple, int] = {}
    keys: list[tuple] = []
    quotients: list[KElement] = []
    n = 0
    while n <= cfg.max_steps:
        state = PairState(s, sp, n)
        key = state.key
        if key in seen:
            m = seen[key]
            expansion = CFExpansion(
                ctx.spec, tuple(quotients[:m]), tuple(quotients[m:n])
            )
            result = ExpansionResult(
                expansion=expansion,
                keys=tuple(keys),
                cycle_start=m,
                verified=False,
                seed=seed,
                branch=branch,
                conj_branch=conj_branch,
            )
            rt = verify_roundtrip(result, seed, branch)
            return ExpansionResult(
                expansion=expansion,
                keys=tuple(keys),
                cycle_start=m,
                verified=bool(rt),
                seed=seed,
                branch=branch,
                conj_branch=conj_branch,
            )
        seen[key] = n
        keys.append(key)
        if n >= 1:
            # Both complete quotients must stay above sqrt(10/9) in modulus.
            if sign_of(s.value * s.value - LOWER_BOUND_SQ) <= 0:
                raise ExpansionError("complete quotient modulus invariant violated")
            if sign_of(sp.value * sp.value - LOWER_BOUND_SQ) <= 0:
                raise ExpansionError("conjugate quotient modulus invariant violated")
        a, _ = choose_quotient(state, ctx, cfg)
        quotients.append(a)
        s = step_state(s, a)
        sp = step_state(sp, a.conj())
        n += 1
    raise MaxStepsError(
        f"no state repetition within {cfg.max_steps} steps", quotients, keys
    )


def verify_roundtrip(r: ExpansionResult, seed: QuadraticPolyK, branch: int) -> RoundTrip:
    """Evaluate the expansion and its sigma image back to the seed pair."""
    details = []
    xi = make_state(seed, branch).value
    res = eval_periodic(r.expansion)
    if res.value is not None:
        forward = reals_equal(res.value, xi)
    elif res.value_in_k is not None:
        forward = False
        details.append("expansion evaluates into K, not to the quartic root")
    else:
        forward = False
        details.append(f"expansion has no value: {res.failure.value}")
    if not forward and not details:
        details.append("expansion value differs from the seed root")

    xip = make_state(seed.sigma(), r.conj_branch).value
    sres = eval_periodic(r.expansion.sigma())
    if sres.value is not None:
        sigma_ok = reals_equal(sres.value, xip)
    elif sres.value_in_k is not None:
        sigma_ok = False
        details.append("sigma expansion evaluates into K")
    else:
        sigma_ok = False
        details.append(f"sigma expansion has no value: {sres.failure.value}")
    if not sigma_ok and len(details) == 0:
        details.append("sigma expansion value differs from the chosen conjugate root")
    return RoundTrip(
        ok=forward and sigma_ok,
        forward_ok=forward,
        sigma_ok=sigma_ok,
        detail="; ".join(details),
    )


@dataclass(frozen=True)
class CoveringRadius:
    d: int
    r_squared: Fraction
    interval: RealInterval
    usable: bool


def covering_radius(d: int, precision_bits: int = DEFAULT_BITS) -> CoveringRadius:
    """Covering radius of the lattice v(O_K) in R^2.

    r^2 = (d+1)/2 for d = 2, 3 (mod 4) and r^2 = (d+1)^2/(8d) for
    d = 1 (mod 4); the rounding step of the expansion needs r < 1, which
    holds only for d = 5.
    """
    spec = FieldSpec(d)  # validates squarefree d > 1
    if d % 4 == 1:
        r_sq = Fraction((d + 1) ** 2, 8 * d)
    else:
        r_sq = Fraction(d + 1, 2)
    iv = RealInterval.point(r_sq).sqrt(precision_bits)
    return CoveringRadius(d=spec.d, r_squared=r_sq, interval=iv, usable=r_sq < 1)
