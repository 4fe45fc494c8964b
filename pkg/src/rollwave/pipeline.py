"""Lemma-level drivers, box subdivision, and machine-checkable certificates.

Each driver subdivides its parameter box, invokes the stability machinery,
decides signs rigorously, and appends records to a Certificate.  A record
is VERIFIED only when interval arithmetic proves the predicate; failure to
prove yields INCONCLUSIVE (one-sided verification can never prove a strict
inequality false).  Analytic facts from the underlying theory enter as
AXIOM records paired with numeric consistency sub-checks.
"""

from __future__ import annotations

import hashlib
import math
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .cheb import cheb_nodes, interp_error_bound, stadium_from_semimajor
from .elliptic import (
    EllipticFrame,
    TailPolicy,
    build_frame,
    frame_from_q,
    kappa_sq,
    kappa_sq_dk,
    kc_sq_from_decimal,
    lambda_kdv,
    wp_family,
    xi_floquet,
    xi_raw,
)
from .errors import (
    DenominatorContainsZero,
    DomainViolation,
    VerifierError,
)
from .interval import (
    ComplexInterval,
    HALF_PI,
    Interval,
    PI,
    SignResult,
    certify_imag,
    certify_real,
    iv_sign,
    iv_subdivide,
)
from .stability import (
    AlphaLine,
    ChebConfig,
    FactoredModels,
    StabilityQuantities,
    WEvaluator,
    build_factored_models,
    build_stability_models,
    factored_f_eval,
    h_surface,
    poly_root_bound,
    realify,
    whitham_b,
    xi_scaled,
    xi_scaled_dpsi,
)

# ----------------------------------------------------------------------
# certificates
# ----------------------------------------------------------------------

VERIFIED = "VERIFIED"
FAILED = "FAILED"
INCONCLUSIVE = "INCONCLUSIVE"
AXIOM = "AXIOM"
INFO = "INFO"

_CERT_VERSION = "rollwave-cert-v1"


@dataclass
class Record:
    claim_id: str
    predicate: str
    box: tuple[tuple[str, Interval], ...]
    status: str
    witness: tuple[Interval, ...] = ()
    deps: tuple[str, ...] = ()
    meta: tuple[tuple[str, str], ...] = ()
    wall_time: float = 0.0


@dataclass
class Certificate:
    """Append-only verification log."""

    config_digest: str
    records: list[Record] = field(default_factory=list)

    def add(self, rec: Record) -> Record:
        if any(r.claim_id == rec.claim_id for r in self.records):
            raise DomainViolation(f"duplicate claim id {rec.claim_id}")
        self.records.append(rec)
        return rec

    def find(self, claim_id: str) -> Record:
        for r in self.records:
            if r.claim_id == claim_id:
                return r
        raise KeyError(claim_id)

    def status_of(self, claim_id: str) -> str:
        return self.find(claim_id).status

    def all_verified(self, ids: Iterable[str]) -> bool:
        return all(self.status_of(i) in (VERIFIED, AXIOM) for i in ids)

    # -- serialization ---------------------------------------------------

    def dumps(self, include_wall_time: bool = False) -> str:
        lines = [_CERT_VERSION, f"digest {self.config_digest}"]
        for r in self.records:
            box = ";".join(f"{n}:{iv.lo!r},{iv.hi!r}" for n, iv in r.box)
            wit = ";".join(f"{iv.lo!r},{iv.hi!r}" for iv in r.witness)
            meta = ";".join(f"{k}={v}" for k, v in r.meta)
            wall = repr(r.wall_time) if include_wall_time else "-"
            lines.append(
                "|".join(
                    (
                        "record",
                        r.claim_id,
                        r.predicate,
                        box,
                        r.status,
                        wit,
                        ",".join(r.deps),
                        meta,
                        wall,
                    )
                )
            )
        return "\n".join(lines) + "\n"

    def save(self, path: str, include_wall_time: bool = False) -> None:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(self.dumps(include_wall_time))

    @staticmethod
    def loads(text: str) -> "Certificate":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0] != _CERT_VERSION:
            raise DomainViolation("unrecognized certificate header")
        if not lines[1].startswith("digest "):
            raise DomainViolation("missing digest line")
        cert = Certificate(config_digest=lines[1].split(" ", 1)[1])
        for ln in lines[2:]:
            parts = ln.split("|")
            if len(parts) != 9 or parts[0] != "record":
                raise DomainViolation(f"bad record line: {ln!r}")
            _, cid, pred, box_s, status, wit_s, deps_s, meta_s, wall_s = parts
            box = []
            if box_s:
                for item in box_s.split(";"):
                    name, vals = item.split(":")
                    lo, hi = vals.split(",")
                    box.append((name, Interval(float(lo), float(hi))))
            wit = []
            if wit_s:
                for item in wit_s.split(";"):
                    lo, hi = item.split(",")
                    wit.append(Interval(float(lo), float(hi)))
            meta = []
            if meta_s:
                for item in meta_s.split(";"):
                    k, v = item.split("=", 1)
                    meta.append((k, v))
            cert.records.append(
                Record(
                    claim_id=cid,
                    predicate=pred,
                    box=tuple(box),
                    status=status,
                    witness=tuple(wit),
                    deps=tuple(deps_s.split(",")) if deps_s else (),
                    meta=tuple(meta),
                    wall_time=0.0 if wall_s == "-" else float(wall_s),
                )
            )
        return cert

    @staticmethod
    def load(path: str) -> "Certificate":
        with open(path, "r", encoding="ascii") as fh:
            return Certificate.loads(fh.read())


def config_digest(text: str) -> str:
    return hashlib.sha256(text.encode("ascii")).hexdigest()[:16]


# -- audit ---------------------------------------------------------------


def _aud_pos(w):
    return len(w) >= 1 and w[0].lo > 0.0


def _aud_neg(w):
    return len(w) >= 1 and w[0].hi < 0.0


def _aud_contains_zero(w):
    return len(w) >= 1 and w[0].contains_zero()


def _aud_disjoint(w):
    for i in range(len(w)):
        for j in range(i + 1, len(w)):
            if w[i].intersects(w[j]):
                return False
    return True


def _aud_less(w):
    return len(w) >= 2 and w[0].hi < w[1].lo


def _aud_true(w):
    return True


AUDIT_CHECKS: dict[str, Callable[[Sequence[Interval]], bool]] = {
    "positive": _aud_pos,
    "negative": _aud_neg,
    "contains_zero": _aud_contains_zero,
    "pairwise_disjoint": _aud_disjoint,
    "strictly_less": _aud_less,
    "dependencies": _aud_true,
    "info": _aud_true,
    "axiom": _aud_true,
}


def audit(cert: Certificate) -> list[str]:
    """Re-check record arithmetic and dependency closure.

    Returns a list of problems (empty = clean).  Each VERIFIED record's
    witness bounds must satisfy the inequality class named by its
    predicate suffix, by direct interval re-evaluation.
    """
    problems = []
    ids = set()
    for r in cert.records:
        if r.claim_id in ids:
            problems.append(f"{r.claim_id}: duplicate id")
        ids.add(r.claim_id)
    for r in cert.records:
        for d in r.deps:
            if d not in ids:
                problems.append(f"{r.claim_id}: missing dependency {d}")
        if r.status == VERIFIED:
            kind = dict(r.meta).get("check", "")
            fn = AUDIT_CHECKS.get(kind)
            if fn is None:
                problems.append(f"{r.claim_id}: unknown check kind {kind!r}")
            elif not fn(r.witness):
                problems.append(
                    f"{r.claim_id}: witness fails re-check of {kind!r}"
                )
            dep_bad = [
                d
                for d in r.deps
                if cert.status_of(d) not in (VERIFIED, AXIOM)
            ]
            if dep_bad:
                problems.append(
                    f"{r.claim_id}: VERIFIED with non-verified deps {dep_bad}"
                )
    return problems


# ----------------------------------------------------------------------
# subdivision engine
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class VerifyConfig:
    depth: int = 24
    workers: int = 0
    n_scan: int = 2000
    cheb: ChebConfig = field(default_factory=ChebConfig)
    initial_pieces: int = 4
    tail: TailPolicy = field(default_factory=TailPolicy)


@dataclass
class SweepResult:
    ok: bool
    worst: Interval | None
    pieces: int
    failing_box: tuple[Interval, ...] | None = None


def certify_sign_1d(
    fn: Callable[[Interval], Interval],
    box: Interval,
    want: int,
    threshold: float = 0.0,
    depth: int = 24,
    initial_pieces: int = 1,
) -> SweepResult:
    """Certify sign(fn) = want on every point of box, by adaptive bisection.

    want=+1 demands fn > threshold, want=-1 demands fn < -threshold.
    worst carries the weakest certified bound encountered.
    """
    stack = [(p, 0) for p in reversed(iv_subdivide(box, initial_pieces))]
    worst = None
    pieces = 0
    while stack:
        piece, d = stack.pop()
        try:
            v = fn(piece)
        except VerifierError:
            v = None
        ok = v is not None and (
            (want > 0 and v.lo > threshold) or (want < 0 and v.hi < -threshold)
        )
        if ok:
            pieces += 1
            bound = Interval(v.lo) if want > 0 else Interval(v.hi)
            if worst is None or (
                want > 0 and bound.lo < worst.lo
            ) or (want < 0 and bound.hi > worst.hi):
                worst = bound
            continue
        if d >= depth or piece.width <= 5e-16 * max(1.0, abs(piece.mid)):
            return SweepResult(False, worst, pieces, (piece,))
        mid = piece.mid
        stack.append((Interval(mid, piece.hi), d + 1))
        stack.append((Interval(piece.lo, mid), d + 1))
    return SweepResult(True, worst, pieces)


def certify_sign_2d(
    fn: Callable[[Interval, Interval], Interval],
    box_x: Interval,
    box_y: Interval,
    want: int,
    depth: int = 24,
    initial: tuple[int, int] = (4, 4),
) -> SweepResult:
    px = iv_subdivide(box_x, initial[0])
    py = iv_subdivide(box_y, initial[1])
    stack = [(x, y, 0) for x in reversed(px) for y in reversed(py)]
    worst = None
    pieces = 0
    while stack:
        x, y, d = stack.pop()
        try:
            v = fn(x, y)
        except VerifierError:
            v = None
        ok = v is not None and ((want > 0 and v.lo > 0.0) or (want < 0 and v.hi < 0.0))
        if ok:
            pieces += 1
            bound = Interval(v.lo) if want > 0 else Interval(v.hi)
            if worst is None or (
                want > 0 and bound.lo < worst.lo
            ) or (want < 0 and bound.hi > worst.hi):
                worst = bound
            continue
        if d >= depth:
            return SweepResult(False, worst, pieces, (x, y))
        if x.width >= y.width:
            m = x.mid
            stack.append((Interval(m, x.hi), y, d + 1))
            stack.append((Interval(x.lo, m), y, d + 1))
        else:
            m = y.mid
            stack.append((x, Interval(m, y.hi), d + 1))
            stack.append((x, Interval(y.lo, m), d + 1))
    return SweepResult(True, worst, pieces)


# ----------------------------------------------------------------------
# rational k boxes
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class KBox:
    """Exact-rational modulus box; keeps 1-k^2 cancellation-free."""

    lo: Fraction
    hi: Fraction

    @staticmethod
    def from_decimal(lo: str, hi: str | None = None) -> "KBox":
        flo = Fraction(lo)
        fhi = Fraction(hi) if hi is not None else flo
        if not (0 < flo <= fhi < 1):
            raise DomainViolation("k box must satisfy 0 < lo <= hi < 1")
        return KBox(flo, fhi)

    def interval(self) -> Interval:
        return Interval(
            Interval.from_fraction(self.lo).lo, Interval.from_fraction(self.hi).hi
        )

    def kc_sq(self) -> Interval:
        a = 1 - self.hi * self.hi
        b = 1 - self.lo * self.lo
        return Interval(
            Interval.from_fraction(a).lo, Interval.from_fraction(b).hi
        )

    def split(self) -> tuple["KBox", "KBox"]:
        mid = (self.lo + self.hi) / 2
        return KBox(self.lo, mid), KBox(mid, self.hi)

    def width(self) -> Fraction:
        return self.hi - self.lo

    def frame(self, tail: TailPolicy = TailPolicy()) -> EllipticFrame:
        return build_frame(self.interval(), self.kc_sq(), tail)


def certify_sign_kboxes(
    fn: Callable[[KBox], Interval],
    box: KBox,
    want: int,
    threshold: float = 0.0,
    depth: int = 40,
    initial_pieces: int = 8,
) -> SweepResult:
    """Adaptive sign certification over exact-rational k pieces."""
    pieces0 = []
    for i in range(initial_pieces):
        lo = box.lo + (box.hi - box.lo) * i / initial_pieces
        hi = box.lo + (box.hi - box.lo) * (i + 1) / initial_pieces
        pieces0.append(KBox(lo, hi))
    stack = [(p, 0) for p in reversed(pieces0)]
    worst = None
    count = 0
    while stack:
        piece, d = stack.pop()
        try:
            v = fn(piece)
        except VerifierError:
            v = None
        ok = v is not None and (
            (want > 0 and v.lo > threshold) or (want < 0 and v.hi < -threshold)
        )
        if ok:
            count += 1
            bound = Interval(v.lo) if want > 0 else Interval(v.hi)
            if worst is None or (
                want > 0 and bound.lo < worst.lo
            ) or (want < 0 and bound.hi > worst.hi):
                worst = bound
            continue
        if d >= depth:
            return SweepResult(False, worst, count, (piece.interval(),))
        a, b = piece.split()
        stack.append((b, d + 1))
        stack.append((a, d + 1))
    return SweepResult(True, worst, count)


def _box_of(**kwargs) -> tuple[tuple[str, Interval], ...]:
    return tuple((k, v) for k, v in kwargs.items())


# ----------------------------------------------------------------------
# driver: kappa monotonicity
# ----------------------------------------------------------------------

KAPPA_MONO_BOUND = -2.248783289537847


def verify_kappa_monotone(
    cert: Certificate,
    kbox: KBox,
    bound: float = KAPPA_MONO_BOUND,
    prefix: str = "kappa-mono",
    depth: int = 48,
) -> Record:
    """d(kappa^2)/dk <= bound < 0 on the box (selection-principle slope)."""
    t0 = time.time()

    def fn(piece: KBox) -> Interval:
        return kappa_sq_dk(piece.interval(), piece.kc_sq()) - bound

    res = certify_sign_kboxes(fn, kbox, want=-1, depth=depth, initial_pieces=16)
    status = VERIFIED if res.ok else INCONCLUSIVE
    wit = (res.worst + bound,) if res.worst is not None else ()
    return cert.add(
        Record(
            claim_id=prefix,
            predicate="kappa_sq_dk_below_bound",
            box=_box_of(k=kbox.interval()),
            status=status,
            witness=wit,
            meta=(
                ("check", "negative" if res.ok else "info"),
                ("bound", repr(bound)),
                ("pieces", str(res.pieces)),
            ),
            wall_time=time.time() - t0,
        )
    )


# ----------------------------------------------------------------------
# driver: (A2) Whitham velocities distinct
# ----------------------------------------------------------------------


def verify_A2(
    cert: Certificate,
    kbox: KBox,
    prefix: str = "A2",
    depth: int = 40,
    initial_pieces: int = 8,
) -> Record:
    t0 = time.time()
    worst_gap = None
    pieces0 = []
    for i in range(initial_pieces):
        lo = kbox.lo + (kbox.hi - kbox.lo) * i / initial_pieces
        hi = kbox.lo + (kbox.hi - kbox.lo) * (i + 1) / initial_pieces
        pieces0.append(KBox(lo, hi))
    stack = [(p, 0) for p in reversed(pieces0)]
    count = 0
    failing = None
    bs = None
    while stack:
        piece, d = stack.pop()
        ok = False
        try:
            frame = piece.frame()
            b1, b2, b3 = whitham_b(frame.k, frame)
            gap = min(
                b2.lo - b1.hi, b3.lo - b2.hi
            )  # ordering b1 < b2 < b3 observed; verify disjointness directly
            ok = (
                not b1.intersects(b2)
                and not b2.intersects(b3)
                and not b1.intersects(b3)
            )
            if ok:
                bs = (b1, b2, b3)
                if worst_gap is None or gap < worst_gap:
                    worst_gap = gap
        except VerifierError:
            ok = False
        if ok:
            count += 1
            continue
        if d >= depth:
            failing = piece
            break
        a, b = piece.split()
        stack.append((b, d + 1))
        stack.append((a, d + 1))
    status = VERIFIED if failing is None else INCONCLUSIVE
    wit = bs if bs is not None else ()
    return cert.add(
        Record(
            claim_id=prefix,
            predicate="whitham_velocities_pairwise_disjoint",
            box=_box_of(k=kbox.interval()),
            status=status,
            witness=wit,
            meta=(
                ("check", "pairwise_disjoint" if status == VERIFIED else "info"),
                ("pieces", str(count)),
            ),
            wall_time=time.time() - t0,
        )
    )


# ----------------------------------------------------------------------
# driver: (A1) simplicity
# ----------------------------------------------------------------------


def verify_A1(
    cert: Certificate,
    kbox: KBox,
    psi0: str = "0.98",
    prefix: str = "A1",
    cfg: VerifyConfig = VerifyConfig(),
    xi_slope_bound: float = 0.0,
    hxx_bound: float = 0.0,
    hdet_bound: float = 0.0,
) -> Record:
    """Simplicity of the nonzero limiting eigenvalues for one modulus box.

    Numeric checks: (1) |L0(w+i psi w')| < |L0(i psi0 w')| for psi in
    [-1,0]; (2) w xi(i psi0 w') < 3pi/2; (3) strict convexity of h on
    [0,1] x [psi0, 1]; (4) d/dpsi [w xi(w + i psi w')] > 0 on [0,1].
    The reduction from these to simplicity is an analytic dependency,
    recorded as an axiom with its own numeric anchors.
    """
    t0 = time.time()
    frame = kbox.frame(cfg.tail)
    psi0_iv = Interval.from_fraction(Fraction(psi0))
    deps = []

    # axiom: analytic reduction (xi anchors and oddness/monotonicity facts)
    anchor1 = xi_floquet(ComplexInterval(frame.omega, Interval(0.0)), frame)
    anchor2 = (
        xi_floquet(ComplexInterval(Interval(0.0), frame.omega_p), frame)
        * frame.omega
        - PI
    )
    ok_anchors = anchor1.contains_zero() and anchor2.contains_zero()
    deps.append(
        cert.add(
            Record(
                claim_id=f"{prefix}.axiom-reduction",
                predicate="analytic_reduction_simplicity",
                box=_box_of(k=kbox.interval()),
                status=AXIOM if ok_anchors else FAILED,
                witness=(anchor1, anchor2),
                meta=(("check", "axiom"), ("subcheck", "xi_anchors_zero_pi")),
            )
        ).claim_id
    )

    # (1) magnitude separation of the two spectral branches
    lam0 = lambda_kdv(
        ComplexInterval(Interval(0.0), psi0_iv * frame.omega_p), frame
    )
    m0 = certify_imag(lam0, "lambda0(i psi0 w')").abs()

    def branch_mag(psi: Interval) -> Interval:
        a = ComplexInterval(frame.omega, psi * frame.omega_p)
        v = lambda_kdv(a, frame)
        return m0 - v.abs()  # want > 0

    r1 = certify_sign_1d(branch_mag, Interval(-1.0, 0.0), +1, depth=cfg.depth,
                         initial_pieces=8)
    deps.append(
        cert.add(
            Record(
                claim_id=f"{prefix}.branch-separation",
                predicate="lambda0_omega_line_below_axis_value",
                box=_box_of(k=kbox.interval(), psi=Interval(-1.0, 0.0)),
                status=VERIFIED if r1.ok else INCONCLUSIVE,
                witness=(r1.worst,) if r1.worst else (),
                meta=(
                    ("check", "positive" if r1.ok else "info"),
                    ("m0", repr(m0.lo)),
                    ("pieces", str(r1.pieces)),
                ),
            )
        ).claim_id
    )

    # (2) w xi(i psi0 w') < 3 pi / 2
    val = (
        xi_floquet(
            ComplexInterval(Interval(0.0), psi0_iv * frame.omega_p), frame
        )
        * frame.omega
    )
    lim = PI * 1.5
    ok2 = val.hi < lim.lo
    deps.append(
        cert.add(
            Record(
                claim_id=f"{prefix}.xi-below-3pi2",
                predicate="omega_xi_at_psi0_below_3pi_over_2",
                box=_box_of(k=kbox.interval(), psi0=psi0_iv),
                status=VERIFIED if ok2 else INCONCLUSIVE,
                witness=(val, lim),
                meta=(("check", "strictly_less"),),
            )
        ).claim_id
    )

    # (3) strict convexity of h on [0,1] x [psi0, 1]
    ybox = Interval(psi0_iv.lo, 1.0)

    def hxx(x: Interval, y: Interval) -> Interval:
        return h_surface(x, y, frame, "hxx") - hxx_bound

    def hdet(x: Interval, y: Interval) -> Interval:
        a = h_surface(x, y, frame, "hxx")
        c = h_surface(x, y, frame, "hyy")
        b = h_surface(x, y, frame, "hxy")
        return a * c - b.sqr() - hdet_bound

    r3a = certify_sign_2d(hxx, Interval(0.0, 1.0), ybox, +1, depth=cfg.depth,
                          initial=(8, 2))
    r3b = certify_sign_2d(hdet, Interval(0.0, 1.0), ybox, +1, depth=cfg.depth,
                          initial=(8, 2))
    deps.append(
        cert.add(
            Record(
                claim_id=f"{prefix}.h-convex",
                predicate="h_strictly_convex",
                box=_box_of(k=kbox.interval(), x=Interval(0.0, 1.0), y=ybox),
                status=VERIFIED if (r3a.ok and r3b.ok) else INCONCLUSIVE,
                witness=tuple(
                    w + b for w, b in ((r3a.worst, hxx_bound),
                                       (r3b.worst, hdet_bound))
                    if w is not None
                ),
                meta=(
                    ("check", "positive" if (r3a.ok and r3b.ok) else "info"),
                    ("pieces", str(r3a.pieces + r3b.pieces)),
                ),
            )
        ).claim_id
    )

    # h(1,1) = 0 consistency anchor
    h11 = h_surface(Interval(1.0), Interval(1.0), frame, "value")
    deps.append(
        cert.add(
            Record(
                claim_id=f"{prefix}.h-corner",
                predicate="h_at_corner_encloses_zero",
                box=_box_of(k=kbox.interval()),
                status=VERIFIED if h11.contains_zero() else FAILED,
                witness=(h11,),
                meta=(("check", "contains_zero"),),
            )
        ).claim_id
    )

    # (4) d/dpsi [w xi(w+i psi w')] > 0 on [0,1] (100 even pieces + bisection)
    def dxi(psi: Interval) -> Interval:
        line = AlphaLine(1, psi)
        return xi_scaled_dpsi(line, frame)

    r4 = certify_sign_1d(dxi, Interval(0.0, 1.0), +1, depth=cfg.depth,
                         initial_pieces=100, threshold=xi_slope_bound)
    deps.append(
        cert.add(
            Record(
                claim_id=f"{prefix}.xi-monotone-omega-line",
                predicate="omega_xi_derivative_positive",
                box=_box_of(k=kbox.interval(), psi=Interval(0.0, 1.0)),
                status=VERIFIED if r4.ok else INCONCLUSIVE,
                witness=(r4.worst,) if r4.worst else (),
                meta=(
                    ("check", "positive" if r4.ok else "info"),
                    ("pieces", str(r4.pieces)),
                    ("threshold", repr(xi_slope_bound)),
                ),
            )
        ).claim_id
    )

    ok = cert.all_verified(deps)
    return cert.add(
        Record(
            claim_id=prefix,
            predicate="A1_simplicity",
            box=_box_of(k=kbox.interval()),
            status=VERIFIED if ok else INCONCLUSIVE,
            deps=tuple(deps),
            meta=(("check", "dependencies"), ("psi0", psi0)),
            wall_time=time.time() - t0,
        )
    )


# ----------------------------------------------------------------------
# driver: (S1) single wave
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class SingleWaveRegions:
    """psi-region split for the omega-line sign pattern and the n=0 line."""

    a: float = 0.1
    b: float = 0.9
    root_excl: float = 1e-3
    mid_split: float = 0.5
    direct_b: float = 0.9


def _model_sign_records(
    cert: Certificate,
    prefix: str,
    name: str,
    fn,
    box: Interval,
    want: int,
    kiv: Interval,
    depth: int,
    extra_meta: tuple = (),
    threshold: float = 0.0,
) -> str:
    res = certify_sign_1d(fn, box, want, depth=depth, initial_pieces=8,
                          threshold=threshold)
    rec = cert.add(
        Record(
            claim_id=f"{prefix}.{name}",
            predicate=name,
            box=_box_of(k=kiv, psi=box),
            status=VERIFIED if res.ok else INCONCLUSIVE,
            witness=(res.worst,) if res.worst else (),
            meta=(
                ("check", ("positive" if want > 0 else "negative") if res.ok else "info"),
                ("pieces", str(res.pieces)),
            )
            + extra_meta,
        )
    )
    return rec.claim_id


def verify_S1_single(
    cert: Certificate,
    kbox: KBox,
    cfg: VerifyConfig = VerifyConfig(),
    regions: SingleWaveRegions = SingleWaveRegions(),
    prefix: str = "S1",
    margins: dict | None = None,
) -> Record:
    """Full stability condition at a single modulus enclosure.

    ``margins`` maps region-check names to strict thresholds (the check
    then certifies |value| beyond the margin rather than bare positivity).
    """
    t0 = time.time()
    margins = margins or {}
    frame = kbox.frame(cfg.tail)
    kiv = kbox.interval()
    deps: list[str] = []

    # ----- omega line: direct models --------------------------------
    sq1 = build_stability_models(frame, 1, cfg.cheb)
    a, b = regions.a, regions.b
    deps.append(
        _model_sign_records(
            cert, prefix, "f_pos_omega_line_mid",
            lambda p: sq1.f(p), Interval(a, b), +1, kiv, cfg.depth,
            (("n_x", str(sq1.n_x)),),
            threshold=margins.get("f_pos_omega_line_mid", 0.0),
        )
    )
    deps.append(
        _model_sign_records(
            cert, prefix, "g_neg_omega_line_mid",
            lambda p: sq1.g(p), Interval(a, b), -1, kiv, cfg.depth,
            threshold=margins.get("g_neg_omega_line_mid", 0.0),
        )
    )
    deps.append(
        _model_sign_records(
            cert, prefix, "f_psi_pos_omega_line_left",
            lambda p: sq1.f(p, deriv=1), Interval(0.0, a), +1, kiv, cfg.depth,
            threshold=margins.get("f_psi_pos_omega_line_left", 0.0),
        )
    )
    deps.append(
        _model_sign_records(
            cert, prefix, "g_psi_neg_omega_line_left",
            lambda p: sq1.g(p, deriv=1), Interval(0.0, a), -1, kiv, cfg.depth,
        )
    )
    deps.append(
        _model_sign_records(
            cert, prefix, "f_psi_neg_omega_line_right",
            lambda p: sq1.f(p, deriv=1), Interval(b, 1.0), -1, kiv, cfg.depth,
        )
    )
    deps.append(
        _model_sign_records(
            cert, prefix, "g_psi_pos_omega_line_right",
            lambda p: sq1.g(p, deriv=1), Interval(b, 1.0), +1, kiv, cfg.depth,
        )
    )

    # zero anchors at psi = 0, 1 (axiom + consistency: models enclose 0)
    f0 = sq1.f(Interval(0.0))
    f1v = sq1.f(Interval(1.0))
    g0 = sq1.g(Interval(0.0))
    g1v = sq1.g(Interval(1.0))
    anchors_ok = all(v.contains_zero() for v in (f0, f1v, g0, g1v))
    deps.append(
        cert.add(
            Record(
                claim_id=f"{prefix}.zero-anchors",
                predicate="f_g_vanish_at_half_periods",
                box=_box_of(k=kiv),
                status=AXIOM if anchors_ok else FAILED,
                witness=(f0, f1v, g0, g1v),
                meta=(("check", "axiom"), ("subcheck", "model_encloses_zero")),
            )
        ).claim_id
    )

    # ----- n = 0 line ------------------------------------------------
    fm = build_factored_models(frame, cfg.cheb)

    # root exclusion on (0, root_excl]
    excl = Interval(0.0, regions.root_excl)
    coeffs = fm.coeffs(excl)
    try:
        rbound = poly_root_bound(coeffs)
        xi_a = xi_scaled(AlphaLine(0, Interval(regions.root_excl)), frame)
        omega_ge_1 = frame.omega.lo >= 1.0
        # xi decreasing on the line (analytic) => Xi(psi) >= Xi(root_excl)
        # for psi <= root_excl; omega >= 1 lifts the root bound from the
        # scaled to the unscaled comparison.
        root_ok = omega_ge_1 and xi_a.lo > rbound.hi
        root_wit = (rbound, xi_a)
    except VerifierError:
        root_ok = False
        root_wit = ()
    deps.append(
        cert.add(
            Record(
                claim_id=f"{prefix}.root-exclusion",
                predicate="factored_root_exclusion_near_zero",
                box=_box_of(k=kiv, psi=excl),
                status=VERIFIED if root_ok else INCONCLUSIVE,
                witness=root_wit,
                meta=(
                    ("check", "strictly_less" if root_ok else "info"),
                    ("n_x", str(fm.n_x)),
                ),
            )
        ).claim_id
    )
    # xi monotonicity on the axis line is the analytic ingredient
    deps.append(
        cert.add(
            Record(
                claim_id=f"{prefix}.axiom-xi-decreasing",
                predicate="xi_decreasing_on_axis_line",
                box=_box_of(k=kiv),
                status=AXIOM,
                witness=(),
                meta=(("check", "axiom"), ("source", "series_negativity")),
            )
        ).claim_id
    )

    # assembled factored f > 0 on [root_excl, mid_split]
    def f_fact(p: Interval) -> Interval:
        _, v = factored_f_eval(p, frame, fm)
        return v

    deps.append(
        _model_sign_records(
            cert, prefix, "f_pos_axis_factored",
            f_fact, Interval(regions.root_excl, regions.mid_split), +1,
            kiv, cfg.depth,
        )
    )

    # direct models on [mid_split, 1]
    sq0 = build_stability_models(
        frame, 0, cfg.cheb, psi_domain=(regions.mid_split, 1.0),
        psi_pole_guard=0.0,
    )
    deps.append(
        _model_sign_records(
            cert, prefix, "f_pos_axis_direct",
            lambda p: sq0.f(p), Interval(regions.mid_split, regions.direct_b),
            +1, kiv, cfg.depth,
        )
    )
    deps.append(
        _model_sign_records(
            cert, prefix, "f_psi_neg_axis_right",
            lambda p: sq0.f(p, deriv=1), Interval(regions.direct_b, 1.0),
            -1, kiv, cfg.depth,
        )
    )
    f1_axis = sq0.f(Interval(1.0))
    deps.append(
        cert.add(
            Record(
                claim_id=f"{prefix}.zero-anchor-axis",
                predicate="f_vanishes_at_i_omega_p",
                box=_box_of(k=kiv),
                status=AXIOM if f1_axis.contains_zero() else FAILED,
                witness=(f1_axis,),
                meta=(("check", "axiom"), ("subcheck", "model_encloses_zero")),
            )
        ).claim_id
    )

    # g < 0 on the axis line: analytic lemma, with a pointwise sign spot
    # check of the integrand's imaginary part at a few sample points
    spot_ok = True
    ev = WEvaluator(frame, 0)
    for ps, xs in ((0.3, 0.2), (0.7, -0.4)):
        w = ev.w_derivs(Interval(xs), Interval(ps))
        val = w[0] * w[1].conj()
        line = AlphaLine(0, Interval(ps))
        gamma_im = xi_scaled(line, frame)
        ww = w[0] * w[0].conj()
        im_part = val.im - gamma_im * ww.re  # Im(V conj(V'))
        if im_part.lo > 0.0:
            spot_ok = False
    deps.append(
        cert.add(
            Record(
                claim_id=f"{prefix}.axiom-g-negative-axis",
                predicate="g_negative_on_axis_line",
                box=_box_of(k=kiv),
                status=AXIOM if spot_ok else FAILED,
                witness=(),
                meta=(("check", "axiom"), ("subcheck", "pointwise_sign")),
            )
        ).claim_id
    )

    ok = cert.all_verified(deps)
    return cert.add(
        Record(
            claim_id=prefix,
            predicate="S1_stability_single_wave",
            box=_box_of(k=kiv),
            status=VERIFIED if ok else INCONCLUSIVE,
            deps=tuple(deps),
            meta=(("check", "dependencies"),),
            wall_time=time.time() - t0,
        )
    )


# ----------------------------------------------------------------------
# driver: lower instability rows
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class LowerRow:
    """One row of the lower-instability campaign (nome-parametrized)."""

    k_lo: str
    k_hi: str
    q_lo: float
    q_hi: float
    rho_q: float
    n_q: int
    m_lambda_ref: float


def verify_unstable_lower(
    cert: Certificate,
    row: LowerRow,
    cfg: VerifyConfig = VerifyConfig(),
    prefix: str = "lower",
    q_eval_pieces: int = 200,
) -> Record:
    """Re(lambda_1(w+iw')) > 0 over one nome row.

    At psi = 1 both f~ and g~ vanish (zero-anchor axiom), so the real part
    of lambda_1 continues as f~_psi / g~_psi; both derivatives are
    interpolated in the nome and the ratio is certified positive on
    subdivided nome boxes, with the 1/omega^2 factor enclosed at exact
    modulus endpoints through the monotonicity of the selection principle.
    """
    from .stability import build_q_deriv_models

    t0 = time.time()
    deps = []
    models = build_q_deriv_models(
        row.q_lo, row.q_hi, row.n_q, row.rho_q, cfg.cheb
    )
    deps.append(
        cert.add(
            Record(
                claim_id=f"{prefix}.axiom-anchors",
                predicate="f_g_vanish_at_psi_1",
                box=_box_of(q=Interval(row.q_lo, row.q_hi)),
                status=AXIOM,
                meta=(("check", "axiom"), ("source", "periodic_antiderivative")),
            )
        ).claim_id
    )
    # coverage: the row's k range maps into the q range
    kb = KBox.from_decimal(row.k_lo, row.k_hi)
    fr_lo = KBox.from_decimal(row.k_lo).frame(cfg.tail)
    fr_hi = KBox.from_decimal(row.k_hi).frame(cfg.tail)
    q_of_k = fr_lo.q.hull(fr_hi.q)
    covered = row.q_lo <= fr_lo.q.lo and fr_hi.q.hi <= row.q_hi
    deps.append(
        cert.add(
            Record(
                claim_id=f"{prefix}.coverage",
                predicate="k_range_maps_into_q_row",
                box=_box_of(k=kb.interval(), q=Interval(row.q_lo, row.q_hi)),
                status=VERIFIED if covered else FAILED,
                witness=(q_of_k,),
                meta=(("check", "info"),),
            )
        ).claim_id
    )

    # 1/omega^2 endpoints (monotone decreasing in k; q increasing in k)
    inv_lo = kappa_sq(fr_hi.k, fr_hi.kc_sq, (fr_hi.K, fr_hi.E)) / PI.sqr()
    inv_hi = kappa_sq(fr_lo.k, fr_lo.kc_sq, (fr_lo.K, fr_lo.E)) / PI.sqr()
    inv_w2_row = Interval(max(inv_lo.lo, 0.0), inv_hi.hi)

    worst = None
    failing = None
    for qpiece in iv_subdivide(Interval(fr_lo.q.lo, fr_hi.q.hi), q_eval_pieces):
        f1d = models.f1_model.eval(qpiece)
        f2d = models.f2_model.eval(qpiece)
        g0d = models.g0_model.eval(qpiece)
        num = f1d + f2d * inv_w2_row
        if g0d.contains_zero():
            failing = qpiece
            break
        lam = num / g0d  # omega^2 > 0 cancels in the sign
        if lam.lo <= 0.0:
            failing = qpiece
            break
        if worst is None or lam.lo < worst.lo:
            worst = Interval(lam.lo)
    status = VERIFIED if failing is None else INCONCLUSIVE
    deps.append(
        cert.add(
            Record(
                claim_id=f"{prefix}.ratio-positive",
                predicate="re_lambda1_positive_at_corner",
                box=_box_of(q=Interval(fr_lo.q.lo, fr_hi.q.hi)),
                status=status,
                witness=(worst,) if worst is not None else (),
                meta=(
                    ("check", "positive" if status == VERIFIED else "info"),
                    ("n_q", str(row.n_q)),
                    ("eps_q", repr(models.eps_q.hi)),
                ),
            )
        ).claim_id
    )
    ok = cert.all_verified(deps)
    return cert.add(
        Record(
            claim_id=prefix,
            predicate="lower_instability_row",
            box=_box_of(k=kb.interval()),
            status=VERIFIED if ok else INCONCLUSIVE,
            deps=tuple(deps),
            meta=(("check", "dependencies"),),
            wall_time=time.time() - t0,
        )
    )


# ----------------------------------------------------------------------
# driver: upper instability and the transition pinpoint
# ----------------------------------------------------------------------


def _f_direct_on_box(
    frame: EllipticFrame,
    psi: Interval,
    xb,
    xnodes,
    eps_x: Interval,
    m_x: Interval,
    ev=None,
) -> Interval:
    """f~ enclosure at one psi box by direct x-interpolation (n = 0 line)."""
    from .stability import line_integrals

    big_c1, big_c2, _ = line_integrals(
        frame, 0, psi, xnodes, eps_x, xb.spec, m_x, ev
    )
    line = AlphaLine(0, psi)
    xiv = xi_scaled(line, frame)
    inv_w2 = 1.0 / frame.omega.sqr()
    acc = Interval(0.0)
    xp = Interval(1.0)
    for n in range(6):
        v = big_c2[n] * inv_w2
        if n < 4:
            v = v + big_c1[n]
        acc = acc + realify(n, v) * xp
        xp = xp * xiv
    return acc


def _axis_f_scanner(frame: EllipticFrame, cfg: VerifyConfig):
    from .stability import WEvaluator, nodes_for_target, x_stage_bounds

    xb = x_stage_bounds(frame, 0, cfg.cheb.margin_x, cfg.n_scan, psi_sup=1.0)
    m_x = xb.parts.overall
    n_x = cfg.cheb.n_x or nodes_for_target(
        m_x, xb.spec, cfg.cheb.target_eps_x, cfg.cheb.max_nodes
    )
    eps_x = interp_error_bound(m_x, xb.spec, n_x, "zeros")
    xnodes = cheb_nodes(n_x, "zeros")
    ev = WEvaluator(frame, 0)

    def fn(psi: Interval) -> Interval:
        return _f_direct_on_box(frame, psi, xb, xnodes, eps_x, m_x, ev)

    return fn, n_x


def verify_upper_witness(
    cert: Certificate,
    kbox: KBox,
    cfg: VerifyConfig = VerifyConfig(),
    psi_grid: int = 100,
    prefix: str = "upper-witness",
) -> Record:
    """Find one psi in [0.6, 0.8] with certified f~ < 0 (instability).

    With g~ < 0 on the axis line (analytic), f~ < 0 forces lambda_1 > 0.
    """
    t0 = time.time()
    frame = kbox.frame(cfg.tail)
    fn, n_x = _axis_f_scanner(frame, cfg)
    found = None
    val = None
    for j in range(psi_grid):
        psi = Interval(0.6 + 0.2 * (j + 0.5) / psi_grid)
        try:
            v = fn(psi)
        except VerifierError:
            continue
        if v.hi < 0.0:
            found = psi
            val = v
            break
    status = VERIFIED if found is not None else INCONCLUSIVE
    deps = [
        cert.add(
            Record(
                claim_id=f"{prefix}.axiom-g-negative-axis",
                predicate="g_negative_on_axis_line",
                box=_box_of(k=kbox.interval()),
                status=AXIOM,
                meta=(("check", "axiom"),),
            )
        ).claim_id
    ]
    deps.append(
        cert.add(
            Record(
                claim_id=f"{prefix}.f-negative-witness",
                predicate="f_negative_at_witness_psi",
                box=_box_of(
                    k=kbox.interval(),
                    psi=found if found is not None else Interval(0.6, 0.8),
                ),
                status=status,
                witness=(val,) if val is not None else (),
                meta=(
                    ("check", "negative" if status == VERIFIED else "info"),
                    ("grid", str(psi_grid)),
                    ("n_x", str(n_x)),
                ),
            )
        ).claim_id
    )
    ok = cert.all_verified(deps)
    return cert.add(
        Record(
            claim_id=prefix,
            predicate="upper_instability_witness",
            box=_box_of(k=kbox.interval()),
            status=VERIFIED if ok else INCONCLUSIVE,
            deps=tuple(deps),
            meta=(("check", "dependencies"),),
            wall_time=time.time() - t0,
        )
    )


def verify_unstable_upper(
    cert: Certificate,
    kbox: KBox,
    cfg: VerifyConfig = VerifyConfig(),
    psi_grid: int = 100,
    k_pieces: int = 8,
    prefix: str = "upper",
) -> Record:
    """Instability witnesses across a modulus range, piecewise in k."""
    t0 = time.time()
    deps = []
    pieces = []
    for i in range(k_pieces):
        lo = kbox.lo + (kbox.hi - kbox.lo) * i / k_pieces
        hi = kbox.lo + (kbox.hi - kbox.lo) * (i + 1) / k_pieces
        pieces.append(KBox(lo, hi))
    for i, piece in enumerate(pieces):
        rec = verify_upper_witness(
            cert, piece, cfg, psi_grid, prefix=f"{prefix}.piece{i}"
        )
        deps.append(rec.claim_id)
    ok = cert.all_verified(deps)
    return cert.add(
        Record(
            claim_id=prefix,
            predicate="upper_instability_range",
            box=_box_of(k=kbox.interval()),
            status=VERIFIED if ok else INCONCLUSIVE,
            deps=tuple(deps),
            meta=(("check", "dependencies"), ("pieces", str(k_pieces))),
            wall_time=time.time() - t0,
        )
    )


def verify_upper_pinpoint(
    cert: Certificate,
    k_stable: str,
    k_unstable: str,
    cfg: VerifyConfig = VerifyConfig(),
    psi_window: tuple[float, float] = (0.7, 0.8),
    psi_grid: int = 100,
    prefix: str = "pinpoint",
) -> Record:
    """Refined transition bracket: f~ > 0 on the whole psi window at
    k_stable; a certified f~ < 0 witness at k_unstable."""
    t0 = time.time()
    deps = []
    # stable side
    kb_s = KBox.from_decimal(k_stable)
    frame_s = kb_s.frame(cfg.tail)
    fn_s, n_x_s = _axis_f_scanner(frame_s, cfg)
    res = certify_sign_1d(
        fn_s, Interval(*psi_window), +1, depth=cfg.depth, initial_pieces=16
    )
    deps.append(
        cert.add(
            Record(
                claim_id=f"{prefix}.stable-side",
                predicate="f_positive_on_window",
                box=_box_of(k=kb_s.interval(), psi=Interval(*psi_window)),
                status=VERIFIED if res.ok else INCONCLUSIVE,
                witness=(res.worst,) if res.worst else (),
                meta=(
                    ("check", "positive" if res.ok else "info"),
                    ("pieces", str(res.pieces)),
                    ("n_x", str(n_x_s)),
                ),
            )
        ).claim_id
    )
    # unstable side
    kb_u = KBox.from_decimal(k_unstable)
    frame_u = kb_u.frame(cfg.tail)
    fn_u, _ = _axis_f_scanner(frame_u, cfg)
    found = None
    val = None
    lo, hi = psi_window
    for j in range(psi_grid):
        psi = Interval(lo + (hi - lo) * (j + 0.5) / psi_grid)
        try:
            v = fn_u(psi)
        except VerifierError:
            continue
        if v.hi < 0.0:
            found = psi
            val = v
            break
    deps.append(
        cert.add(
            Record(
                claim_id=f"{prefix}.unstable-side",
                predicate="f_negative_witness_on_window",
                box=_box_of(k=kb_u.interval(), psi=Interval(*psi_window)),
                status=VERIFIED if found is not None else INCONCLUSIVE,
                witness=(val,) if val is not None else (),
                meta=(
                    ("check", "negative" if found is not None else "info"),
                    ("grid", str(psi_grid)),
                ),
            )
        ).claim_id
    )
    ok = cert.all_verified(deps)
    return cert.add(
        Record(
            claim_id=prefix,
            predicate="upper_transition_pinpoint",
            box=_box_of(
                k=Interval(kb_s.interval().lo, kb_u.interval().hi)
            ),
            status=VERIFIED if ok else INCONCLUSIVE,
            deps=tuple(deps),
            meta=(("check", "dependencies"),),
            wall_time=time.time() - t0,
        )
    )


# ----------------------------------------------------------------------
# driver: large Floquet exponents
# ----------------------------------------------------------------------


def verify_large_xi(
    cert: Certificate,
    frame: EllipticFrame,
    m_lower: Interval,
    m_upper: Sequence[Interval],
    xi0: Interval,
    rho_psi: Interval,
    prefix: str = "large-xi",
) -> Record:
    """No instability from psi in (0, rho]: for xi >= xi0 both quadratic
    forms are negative.

    numer: 2(M0 M1 - xi ML^2); denom: -ML^2 xi^5 + xi^4 M0 M1 +
    (M1 + M0 xi)(4 M1 xi^3 + 6 M2 xi^2 + 4 M3 xi + M4 + M0 xi^2
    + 2 M1 xi + M2).
    """
    t0 = time.time()
    if m_lower.lo <= 0.0:
        return cert.add(
            Record(
                claim_id=prefix,
                predicate="large_xi_exclusion",
                box=_box_of(xi0=xi0),
                status=INCONCLUSIVE,
                meta=(("check", "info"), ("reason", "ML_not_positive")),
                wall_time=time.time() - t0,
            )
        )
    m0, m1, m2, m3, m4 = m_upper
    ml2 = m_lower.sqr()
    numer_at = m0 * m1 * 2.0 - xi0 * ml2 * 2.0
    # polynomial coefficients of the denominator bound in xi
    c0 = m1 * m4 + m1 * m2
    c1 = m1 * 4.0 * m3 + m0 * m4 + m0 * m2 + m1 * (m1 * 2.0)
    c2 = m1 * 6.0 * m2 + m0 * (m3 * 4.0) + m0 * (m1 * 2.0) + m1 * m0
    c3 = m1 * (m1 * 4.0) + m0 * (m2 * 6.0) + m0 * m0
    c4 = m0 * m1 + m0 * (m1 * 4.0)
    c5 = -ml2 + m0 * m0 * 0.0
    # for xi >= xi0: p(xi) <= xi^5 (c5 + sum_{i<5} max(ci,0)/xi0^{5-i})
    bracket = c5
    for i, ci in enumerate((c0, c1, c2, c3, c4)):
        pos = Interval(0.0, max(ci.hi, 0.0))
        bracket = bracket + pos / xi0.pow_int(5 - i)
    ok = numer_at.hi < 0.0 and bracket.hi < 0.0 and xi0.lo > 0.0
    # rho consistency: xi at i*rho_psi*omega' exceeds xi0
    try:
        xi_rho = (
            xi_floquet(
                ComplexInterval(Interval(0.0), rho_psi * frame.omega_p), frame
            )
            * frame.omega
        )
        rho_ok = xi_rho.lo >= xi0.lo
    except VerifierError:
        rho_ok = False
    status = VERIFIED if (ok and rho_ok) else INCONCLUSIVE
    return cert.add(
        Record(
            claim_id=prefix,
            predicate="large_xi_exclusion",
            box=_box_of(k=frame.k, psi=Interval(0.0, rho_psi.hi)),
            status=status,
            witness=(numer_at, bracket),
            meta=(
                ("check", "negative" if status == VERIFIED else "info"),
                ("xi0", repr(xi0.lo)),
            ),
            wall_time=time.time() - t0,
        )
    )


# ----------------------------------------------------------------------
# modulus derivative of the nome
# ----------------------------------------------------------------------


def comp_KE(kbox: KBox, tail: TailPolicy = TailPolicy()):
    """(K, E, K', E') at exact-rational modulus endpoints."""
    from .elliptic import ellint_KE
    from .interval import iv_sqrt

    k = kbox.interval()
    kc2 = kbox.kc_sq()
    bigk, bige, bigk_p = ellint_KE(k, kc2, tail)
    kprime = iv_sqrt(kc2)
    _, bige_p, _ = ellint_KE(kprime, k.sqr(), tail)
    return bigk, bige, bigk_p, bige_p


def dq_dk(kbox: KBox, frame: EllipticFrame) -> Interval:
    """d/dk of the nome q = exp(-pi K'/K), via the Legendre derivatives."""
    bigk, bige, bigk_p, bige_p = comp_KE(kbox, frame.tail)
    k = kbox.interval()
    kc2 = kbox.kc_sq()
    num = bigk_p * (bige - kc2 * bigk) + bigk * (bige_p - k.sqr() * bigk_p)
    return frame.q * PI * num / (bigk.sqr() * k * kc2)


# ----------------------------------------------------------------------
# driver: middle stability range (one row)
# ----------------------------------------------------------------------


def verify_S1_row(
    cert: Certificate,
    q_lo: float,
    q_hi: float,
    row_cfg: dict,
    cfg: VerifyConfig = VerifyConfig(),
    prefix: str = "S1-row",
    regions=None,
) -> Record:
    """Stability condition over one nome range via 2D range models.

    omega line: sign pattern of f~, g~ and their psi derivatives on the
    node-aligned region split; axis line: factored root exclusion near 0,
    assembled positivity through the middle, derivative sign near 1.
    """
    from .schedules import MIDDLE_PSI_LEFT, MIDDLE_PSI_RIGHT
    from .stability import build_range_models

    t0 = time.time()
    qiv = Interval(q_lo, q_hi)
    deps = []
    psi_a = MIDDLE_PSI_LEFT.interval()
    psi_b = MIDDLE_PSI_RIGHT.interval()
    kb_lo = row_cfg.get("kb_lo")
    kb_hi = row_cfg.get("kb_hi")
    inv_w2 = _inv_w2_for_range(kb_lo, kb_hi, cfg)

    n_q = row_cfg.get("n_q", 24)
    rho_q = row_cfg["rho_q"]

    # ----- omega line -------------------------------------------------
    rm1 = build_range_models(
        q_lo, q_hi, 1, "direct", n_q, rho_q, cfg.cheb,
        deriv_orders=((0, 1),),
    )

    def sweep2(name, fn, psi_box, want):
        res = certify_sign_2d(
            fn, qiv, psi_box, want, depth=cfg.depth, initial=(2, 4)
        )
        kind = ("positive" if want > 0 else "negative") if res.ok else "info"
        rec = cert.add(
            Record(
                claim_id=f"{prefix}.{name}",
                predicate=name,
                box=_box_of(q=qiv, psi=psi_box),
                status=VERIFIED if res.ok else INCONCLUSIVE,
                witness=(res.worst,) if res.worst else (),
                meta=(("check", kind), ("pieces", str(res.pieces))),
            )
        )
        return rec.claim_id

    mid_box = Interval(psi_a.lo, psi_b.hi)
    deps.append(sweep2(
        "f_pos_omega_mid",
        lambda q, p: rm1.f_direct(q, p, inv_w2), mid_box, +1,
    ))
    deps.append(sweep2(
        "g_neg_omega_mid", lambda q, p: rm1.g0(q, p), mid_box, -1,
    ))
    deps.append(sweep2(
        "f_psi_pos_omega_left",
        lambda q, p: rm1.f_direct(q, p, inv_w2, deriv=(0, 1)),
        Interval(0.0, psi_a.hi), +1,
    ))
    deps.append(sweep2(
        "g_psi_neg_omega_left",
        lambda q, p: rm1.g0(q, p, deriv=(0, 1)),
        Interval(0.0, psi_a.hi), -1,
    ))
    deps.append(sweep2(
        "f_psi_neg_omega_right",
        lambda q, p: rm1.f_direct(q, p, inv_w2, deriv=(0, 1)),
        Interval(psi_b.lo, 1.0), -1,
    ))
    deps.append(sweep2(
        "g_psi_pos_omega_right",
        lambda q, p: rm1.g0(q, p, deriv=(0, 1)),
        Interval(psi_b.lo, 1.0), +1,
    ))

    # ----- axis line (factored) ----------------------------------------
    rmf = build_range_models(
        q_lo, q_hi, 0, "factored", n_q, rho_q, cfg.cheb,
        deriv_orders=((0, 1),),
    )
    excl = Interval(0.0, 1e-3)
    root_ok = True
    worst_r = None
    for qpiece in iv_subdivide(qiv, 8):
        try:
            coeffs = rmf.factored_coeffs(qpiece, excl, inv_w2)
            rb = poly_root_bound(coeffs)
            frame_piece = frame_from_q(qpiece)
            xi_a = xi_scaled(AlphaLine(0, Interval(1e-3)), frame_piece)
            if not (frame_piece.omega.lo >= 1.0 and xi_a.lo > rb.hi):
                root_ok = False
                break
            worst_r = rb if worst_r is None else worst_r.hull(rb)
        except VerifierError:
            root_ok = False
            break
    deps.append(
        cert.add(
            Record(
                claim_id=f"{prefix}.root-exclusion",
                predicate="factored_root_exclusion_near_zero",
                box=_box_of(q=qiv, psi=excl),
                status=VERIFIED if root_ok else INCONCLUSIVE,
                witness=(worst_r,) if worst_r is not None else (),
                meta=(("check", "info"),),
            )
        ).claim_id
    )

    def f_fact(q: Interval, p: Interval) -> Interval:
        frame_piece = frame_from_q(q)
        xiv = xi_scaled(AlphaLine(0, p), frame_piece)
        coeffs = rmf.factored_coeffs(q, p, inv_w2)
        acc = Interval(0.0)
        xp = Interval(1.0)
        for n in range(6):
            acc = acc + coeffs.p[n] * xp
            xp = xp * xiv
        return acc

    deps.append(sweep2(
        "f_pos_axis_factored", f_fact, Interval(1e-3, 0.9), +1,
    ))

    def f_fact_dpsi(q: Interval, p: Interval) -> Interval:
        frame_piece = frame_from_q(q)
        xiv = xi_scaled(AlphaLine(0, p), frame_piece)
        dxiv = xi_scaled_dpsi(AlphaLine(0, p), frame_piece)
        acc = Interval(0.0)
        for n in range(6):
            pn = rmf.p_coeff(n, q, p, inv_w2)
            dpn = rmf.p_coeff(n, q, p, inv_w2, deriv=(0, 1))
            acc = acc + dpn * xiv.pow_int(n)
            if n:
                acc = acc + pn * float(n) * xiv.pow_int(n - 1) * dxiv
        return acc

    deps.append(sweep2(
        "f_psi_neg_axis_right", f_fact_dpsi, Interval(0.9, 1.0), -1,
    ))
    deps.append(
        cert.add(
            Record(
                claim_id=f"{prefix}.axioms",
                predicate="zero_anchors_and_axis_g_sign",
                box=_box_of(q=qiv),
                status=AXIOM,
                meta=(("check", "axiom"),),
            )
        ).claim_id
    )
    ok = cert.all_verified(deps)
    return cert.add(
        Record(
            claim_id=prefix,
            predicate="S1_stability_row",
            box=_box_of(q=qiv),
            status=VERIFIED if ok else INCONCLUSIVE,
            deps=tuple(deps),
            meta=(("check", "dependencies"),),
            wall_time=time.time() - t0,
        )
    )


def _inv_w2_for_range(
    kb_lo: KBox | None, kb_hi: KBox | None, cfg: VerifyConfig
) -> Interval:
    """Tight 1/omega^2 enclosure over a modulus range from the endpoint
    values and the monotonicity of the selection principle."""
    if kb_lo is None or kb_hi is None:
        raise DomainViolation("range drivers need exact modulus endpoints")
    fr_lo = kb_lo.frame(cfg.tail)
    fr_hi = kb_hi.frame(cfg.tail)
    lo_v = kappa_sq(fr_hi.k, fr_hi.kc_sq, (fr_hi.K, fr_hi.E)) / PI.sqr()
    hi_v = kappa_sq(fr_lo.k, fr_lo.kc_sq, (fr_lo.K, fr_lo.E)) / PI.sqr()
    return Interval(max(lo_v.lo, 0.0), hi_v.hi)


# ----------------------------------------------------------------------
# driver: sharp transitions
# ----------------------------------------------------------------------


def verify_sharp_upper(
    cert: Certificate,
    cfg: VerifyConfig = VerifyConfig(),
    j_lo: str | None = None,
    j_hi: str | None = None,
    prefix: str = "sharp-upper",
    n_q: int = 8,
    with_pinpoint: bool = False,
) -> Record:
    """Uniqueness pattern of the upper stability transition on J.

    Axis line: f~ > 0 on R1 (root exclusion), R2, R3, R5; f~_psi < 0 on
    R6; f~_k < 0 and f~_psipsi > 0 on R4 = J x [0.7, 0.8].
    """
    from . import schedules
    from .stability import build_range_models

    t0 = time.time()
    j_lo = j_lo or schedules.UPPER_TRANSITION_J[0]
    j_hi = j_hi or schedules.UPPER_TRANSITION_J[1]
    kb_lo = KBox.from_decimal(j_lo)
    kb_hi = KBox.from_decimal(j_hi)
    fr_lo = kb_lo.frame(cfg.tail)
    fr_hi = kb_hi.frame(cfg.tail)
    q_lo = fr_lo.q.lo
    q_hi = fr_hi.q.hi
    qiv = Interval(q_lo, q_hi)
    inv_w2 = _inv_w2_for_range(kb_lo, kb_hi, cfg)
    deps = []

    # the nome grows with the modulus (positive derivative), so k-signs
    # follow q-signs
    qk = dq_dk(KBox(kb_lo.lo, kb_hi.hi), fr_lo)
    deps.append(
        cert.add(
            Record(
                claim_id=f"{prefix}.dq-dk-positive",
                predicate="nome_increasing_in_modulus",
                box=_box_of(k=KBox(kb_lo.lo, kb_hi.hi).interval()),
                status=VERIFIED if qk.lo > 0.0 else INCONCLUSIVE,
                witness=(qk,),
                meta=(("check", "positive"),),
            )
        ).claim_id
    )

    # margin so the q stadium fits strictly between 0 and 1
    center = 0.5 * (q_lo + q_hi)
    halfw = 0.5 * (q_hi - q_lo)
    rho_q = _auto_rho_q(center, halfw)
    rmf = build_range_models(
        q_lo, q_hi, 0, "factored", n_q, rho_q, cfg.cheb,
        deriv_orders=((0, 1), (0, 2), (1, 0)),
    )

    def f_fact(q: Interval, p: Interval) -> Interval:
        frame_piece = frame_from_q(q)
        xiv = xi_scaled(AlphaLine(0, p), frame_piece)
        coeffs = rmf.factored_coeffs(q, p, inv_w2)
        acc = Interval(0.0)
        xp = Interval(1.0)
        for n in range(6):
            acc = acc + coeffs.p[n] * xp
            xp = xp * xiv
        return acc

    def f_fact_dpsi(q: Interval, p: Interval) -> Interval:
        frame_piece = frame_from_q(q)
        xiv = xi_scaled(AlphaLine(0, p), frame_piece)
        dxiv = xi_scaled_dpsi(AlphaLine(0, p), frame_piece)
        acc = Interval(0.0)
        for n in range(6):
            pn = rmf.p_coeff(n, q, p, inv_w2)
            dpn = rmf.p_coeff(n, q, p, inv_w2, deriv=(0, 1))
            acc = acc + dpn * xiv.pow_int(n)
            if n:
                acc = acc + pn * float(n) * xiv.pow_int(n - 1) * dxiv
        return acc

    def f_fact_dpsipsi(q: Interval, p: Interval) -> Interval:
        frame_piece = frame_from_q(q)
        xiv = xi_scaled(AlphaLine(0, p), frame_piece)
        dxiv = xi_scaled_dpsi(AlphaLine(0, p), frame_piece)
        # d2 Xi / d psi2 = (omega omega'^2) d2xi/dbeta2 = 2 w w'^2 p'(a) i
        from .elliptic import wp_family
        from .interval import certify_real as _cr

        alpha = AlphaLine(0, p).alpha(frame_piece)
        ddxi = _cr(
            wp_family("pp", alpha, frame_piece)
            * ComplexInterval(Interval(0.0), Interval(2.0))
            * frame_piece.omega
            * frame_piece.omega_p.sqr(),
            "xi_psipsi",
        )
        acc = Interval(0.0)
        for n in range(6):
            pn = rmf.p_coeff(n, q, p, inv_w2)
            d1 = rmf.p_coeff(n, q, p, inv_w2, deriv=(0, 1))
            d2 = rmf.p_coeff(n, q, p, inv_w2, deriv=(0, 2))
            acc = acc + d2 * xiv.pow_int(n)
            if n >= 1:
                acc = acc + (
                    d1 * (2.0 * n) * xiv.pow_int(n - 1) * dxiv
                    + pn * float(n) * xiv.pow_int(n - 1) * ddxi
                )
            if n >= 2:
                acc = acc + pn * float(n * (n - 1)) * xiv.pow_int(n - 2) * dxiv.sqr()
        return acc

    def f_fact_dk(q: Interval, p: Interval) -> Interval:
        # d/dk f~ = qk [dq(p1) + dq(p2) inv_w2] + f2 d(inv_w2)/dk
        frame_piece = frame_from_q(q)
        xiv = xi_scaled(AlphaLine(0, p), frame_piece)
        # xi depends on q only through the frame; bound d Xi/dq through the
        # q-derivative of the factored models would double count, so the
        # assembled p_n models absorb all q dependence except Xi(q, psi).
        # d Xi/dq is obtained from the analytic form below.
        dxi_dq = _xi_scaled_dq(p, frame_piece)
        kappa2_dk = kappa_sq_dk(frame_piece.k, frame_piece.kc_sq,
                                (frame_piece.K, frame_piece.E))
        qk_loc = dq_dk(KBox(kb_lo.lo, kb_hi.hi), frame_piece)
        acc = Interval(0.0)
        f2v = Interval(0.0)
        for n in range(6):
            pn = rmf.p_coeff(n, q, p, inv_w2)
            dpq = rmf.p_coeff(n, q, p, inv_w2, deriv=(1, 0))
            acc = acc + dpq * qk_loc * xiv.pow_int(n)
            if n:
                acc = acc + pn * float(n) * xiv.pow_int(n - 1) * dxi_dq * qk_loc
            p2n = rmf.models[f"p2_{n}"].eval(q, p)
            f2v = f2v + p2n * xiv.pow_int(n)
        acc = acc + f2v * (kappa2_dk / PI.sqr())
        return acc

    regions = (
        ("f_pos_R2", f_fact, Interval(1e-3, 0.5), +1, (2, 6)),
        ("f_pos_R3", f_fact, Interval(0.5, 0.7), +1, (2, 4)),
        ("f_pos_R5", f_fact, Interval(0.8, 0.9), +1, (2, 2)),
        ("f_psi_neg_R6", f_fact_dpsi, Interval(0.9, 1.0), -1, (2, 2)),
        ("f_k_neg_R4", f_fact_dk, Interval(0.7, 0.8), -1, (2, 2)),
        ("f_psipsi_pos_R4", f_fact_dpsipsi, Interval(0.7, 0.8), +1, (2, 2)),
    )
    for name, fn, box, want, init in regions:
        res = certify_sign_2d(fn, qiv, box, want, depth=cfg.depth, initial=init)
        deps.append(
            cert.add(
                Record(
                    claim_id=f"{prefix}.{name}",
                    predicate=name,
                    box=_box_of(q=qiv, psi=box),
                    status=VERIFIED if res.ok else INCONCLUSIVE,
                    witness=(res.worst,) if res.worst else (),
                    meta=(
                        (
                            "check",
                            ("positive" if want > 0 else "negative")
                            if res.ok
                            else "info",
                        ),
                        ("pieces", str(res.pieces)),
                    ),
                )
            ).claim_id
        )
    # R1: root exclusion near psi = 0
    excl = Interval(0.0, 1e-3)
    root_ok = True
    try:
        coeffs = rmf.factored_coeffs(qiv, excl, inv_w2)
        rb = poly_root_bound(coeffs)
        xi_a = xi_scaled(AlphaLine(0, Interval(1e-3)), fr_hi)
        root_ok = fr_lo.omega.lo >= 1.0 and xi_a.lo > rb.hi
        wit = (rb, xi_a)
    except VerifierError:
        root_ok = False
        wit = ()
    deps.append(
        cert.add(
            Record(
                claim_id=f"{prefix}.f_pos_R1_root_exclusion",
                predicate="factored_root_exclusion_near_zero",
                box=_box_of(q=qiv, psi=excl),
                status=VERIFIED if root_ok else INCONCLUSIVE,
                witness=wit,
                meta=(("check", "strictly_less" if root_ok else "info"),),
            )
        ).claim_id
    )
    if with_pinpoint:
        from . import schedules as sch

        rec = verify_upper_pinpoint(
            cert, sch.UPPER_PINPOINT[0], sch.UPPER_PINPOINT[1], cfg,
            prefix=f"{prefix}.pinpoint",
        )
        deps.append(rec.claim_id)
    ok = cert.all_verified(deps)
    return cert.add(
        Record(
            claim_id=prefix,
            predicate="sharp_upper_transition",
            box=_box_of(k=Interval(kb_lo.interval().lo, kb_hi.interval().hi)),
            status=VERIFIED if ok else INCONCLUSIVE,
            deps=tuple(deps),
            meta=(("check", "dependencies"),),
            wall_time=time.time() - t0,
        )
    )


def _auto_rho_q(center: float, halfw: float, margin: float = 0.9) -> float:
    # keep |q| within [0.05, 0.75] on the stadium so the product-form
    # theta lower bounds stay usable
    d = margin * min(center / halfw, (1.0 - center) / halfw)
    if center > 0.75:
        raise DomainViolation("q range too close to 1 for range models")
    d = min(d, (0.75 - center) / halfw)
    if center > 0.06:
        d = min(d, max((center - 0.05) / halfw, 1.5))
    if d <= 1.0:
        raise DomainViolation("no admissible q stadium")
    return d + math.sqrt(d * d - 1.0)


def _xi_scaled_dq(psi: Interval, frame: EllipticFrame) -> Interval:
    """d Xi / dq on the axis line at fixed psi.

    Xi(psi, q) = 2i[(pi/2) cot(i psi L/2) + 2 pi S], L = -log q,
    S = sum q^{2k}/(1-q^{2k}) sin(i k psi L).  Differentiating in q:
    dL/dq = -1/q; the cot term gives (pi/2)(-csc^2)(i psi/2)(-1/q); each
    series term differentiates through both the coefficient and the sine.
    """
    from .interval import iv_cosh, iv_exp, iv_sinh

    ell = frame.log_q_neg
    q = frame.q
    psl = psi * ell
    # cot(i y) = -i coth(y); d/dq [2i (pi/2) cot(i psi L / 2)]
    #   = pi coth'(psi L / 2) * (psi / (2q)) ... computed via real forms:
    # Xi_cot = pi coth(psi L / 2); d/dq = pi (-csch^2)(psi L/2) psi dL/dq /2
    y = psl * 0.5
    sh = iv_sinh(y)
    if sh.contains_zero():
        raise XiUnavailable("xi derivative at the pole")
    d_cot = PI * (psi / (q * 2.0)) / sh.sqr()
    # series: Xi_S = -4 pi sum q^{2k}/(1-q^{2k}) sinh(k psi L)
    # d/dq term_k = -4pi [ (2k q^{2k-1}/(1-q^{2k})^2) sinh(k psi L)
    #                     - q^{2k}/(1-q^{2k}) cosh(k psi L) k psi / q ]
    acc = Interval(0.0)
    k = 0
    q2 = q.sqr()
    q2k = Interval(1.0)
    rate = (q2 * iv_exp(psl)).hi
    if rate >= 1.0:
        raise XiUnavailable("xi q-derivative series diverges")
    while True:
        k += 1
        q2k = q2k * q2
        den = 1.0 - q2k
        shk = iv_sinh(psl * float(k))
        chk = iv_cosh(psl * float(k))
        t1 = (q2k * (2.0 * k) / (q * den.sqr())) * shk
        t2 = (q2k / den) * chk * (psi * float(k) / q)
        acc = acc + (t1 - t2) * PI * -4.0
        r_poly = rate * (k + 1.0) / k
        if r_poly < 1.0:
            nxt = (
                (q2k * q2).mag * math.exp((k + 1) * psl.hi)
                * (4.0 * (k + 1) / (q.lo * (1.0 - q2.hi) ** 2))
            )
            t = nxt / (1.0 - r_poly)
            if t <= 1e-15 * max(abs(acc.lo) + abs(acc.hi), 1e-6):
                pad = t * 4.0 * PI.hi
                acc = acc + Interval(-pad, pad)
                break
        if k > 400:
            raise XiUnavailable("xi q-derivative series did not converge")
    return d_cot + acc


def verify_sharp_lower(
    cert: Certificate,
    cfg: VerifyConfig = VerifyConfig(),
    j_lo: str | None = None,
    j_hi: str | None = None,
    prefix: str = "sharp-lower",
    n_q: int = 8,
    k_subintervals: int = 5,
    endpoint_deps: tuple[str, ...] = (),
) -> Record:
    """Strictness of the lower stability transition on J.

    omega-line sign pattern on R1..R3, and on R4 = J x [0.99, 1] the
    derivative d(lambda_1)/dk < 0 through second-order Taylor expansion
    about the double zero at psi = 1 with the half-width interval z.
    """
    from . import schedules
    from .interval import iv_cos
    from .stability import build_range_models

    t0 = time.time()
    j_lo = j_lo or schedules.LOWER_TRANSITION_J[0]
    j_hi = j_hi or schedules.LOWER_TRANSITION_J[1]
    kb_lo = KBox.from_decimal(j_lo)
    kb_hi = KBox.from_decimal(j_hi)
    fr_lo = kb_lo.frame(cfg.tail)
    fr_hi = kb_hi.frame(cfg.tail)
    q_lo = fr_lo.q.lo
    q_hi = fr_hi.q.hi
    qiv = Interval(q_lo, q_hi)
    inv_w2 = _inv_w2_for_range(kb_lo, kb_hi, cfg)
    deps = list(endpoint_deps)

    center = 0.5 * (q_lo + q_hi)
    halfw = max(0.5 * (q_hi - q_lo), 1e-9)
    rho_q = _auto_rho_q(center, halfw)
    rm = build_range_models(
        q_lo, q_hi, 1, "direct", n_q, rho_q, cfg.cheb,
        deriv_orders=((0, 1), (0, 2), (1, 1), (1, 2)),
    )

    psi_a = schedules.MIDDLE_PSI_LEFT.interval()
    psi_c = (1.0 + iv_cos(PI / 5.0)) * 0.5  # (1+cos(pi/5))/2

    def sweep2(name, fn, psi_box, want, init=(2, 4)):
        res = certify_sign_2d(fn, qiv, psi_box, want, depth=cfg.depth,
                              initial=init)
        kind = ("positive" if want > 0 else "negative") if res.ok else "info"
        rec = cert.add(
            Record(
                claim_id=f"{prefix}.{name}",
                predicate=name,
                box=_box_of(q=qiv, psi=psi_box),
                status=VERIFIED if res.ok else INCONCLUSIVE,
                witness=(res.worst,) if res.worst else (),
                meta=(("check", kind), ("pieces", str(res.pieces))),
            )
        )
        return rec.claim_id

    f_of = lambda q, p, d=(0, 0): rm.f_direct(q, p, inv_w2, deriv=d)
    g_of = lambda q, p, d=(0, 0): rm.g0(q, p, deriv=d)
    deps.append(sweep2("f_psi_pos_R1", lambda q, p: f_of(q, p, (0, 1)),
                       Interval(0.0, psi_a.hi), +1))
    deps.append(sweep2("g_psi_neg_R1", lambda q, p: g_of(q, p, (0, 1)),
                       Interval(0.0, psi_a.hi), -1))
    deps.append(sweep2("f_pos_R2", f_of, Interval(psi_a.lo, psi_c.hi), +1))
    deps.append(sweep2("g_neg_R2", g_of, Interval(psi_a.lo, psi_c.hi), -1))
    deps.append(sweep2("f_psi_pos_R3", lambda q, p: f_of(q, p, (0, 1)),
                       Interval(psi_c.lo, 0.99), +1))
    deps.append(sweep2("g_psi_pos_R3R4", lambda q, p: g_of(q, p, (0, 1)),
                       Interval(psi_c.lo, 1.0), +1))

    # ----- R4: d lambda_1 / dk < 0 via the half-width interval device ----
    zint = Interval(-0.005, 0.005)
    r4 = Interval(0.99, 1.0)
    one = Interval(1.0)
    ok4 = True
    worst4 = None
    k_pieces = []
    for i in range(k_subintervals):
        lo = kb_lo.lo + (kb_hi.lo - kb_lo.lo) * i / k_subintervals
        hi = kb_lo.lo + (kb_hi.lo - kb_lo.lo) * (i + 1) / k_subintervals
        k_pieces.append(KBox(lo, hi if i < k_subintervals - 1 else kb_hi.hi))
    for piece in k_pieces:
        try:
            plo = piece.frame(cfg.tail)
            phi = KBox.from_decimal(str(float(piece.hi))).frame(cfg.tail) \
                if False else piece.frame(cfg.tail)
            qp = Interval(plo.q.lo, plo.q.hi)
            s = _inv_w2_for_range(KBox(piece.lo, piece.lo),
                                  KBox(piece.hi, piece.hi), cfg)
            sd = kappa_sq_dk(plo.k, piece.kc_sq(),
                             (plo.K, plo.E)) / PI.sqr()
            qk = dq_dk(piece, plo)
            hwq = rm.qmap.halfwidth

            def dmodel(nm, d):
                return rm.models[nm].eval(qp, one, deriv=d)

            f1p = dmodel("f1", (0, 1))
            f2p = dmodel("f2", (0, 1))
            g0p = dmodel("g0", (0, 1))
            f1qp = dmodel("f1", (1, 1))
            f2qp = dmodel("f2", (1, 1))
            g0qp = dmodel("g0", (1, 1))
            f2v = dmodel("f2", (0, 0))
            f_psi = f1p + f2p * s
            f_kpsi = qk * (f1qp + f2qp * s) + f2p * sd
            g_psi = g0p
            g_kpsi = qk * g0qp

            def sup_on(nm, d):
                worst = None
                for pp in iv_subdivide(r4, 4):
                    v = rm.models[nm].eval(qp, pp, deriv=d).abs()
                    worst = v if worst is None else worst.hull(v)
                return Interval(0.0, worst.hi)

            m_f = sup_on("f1", (0, 2)) + sup_on("f2", (0, 2)) * s.abs()
            m_g = sup_on("g0", (0, 2))
            m_fk = (
                qk.abs() * (sup_on("f1", (1, 2)) + sup_on("f2", (1, 2)) * s.abs())
                + sup_on("f2", (0, 2)) * sd.abs()
            )
            m_gk = qk.abs() * sup_on("g0", (1, 2))
            den = g_psi + m_g * zint
            if den.contains_zero():
                ok4 = False
                break
            ratio = (f_psi + m_f * zint) / den
            dratio = (f_kpsi + m_fk * zint) / den - ratio * (
                (g_kpsi + m_gk * zint) / den
            )
            dlam = sd * ratio + s * dratio
            if dlam.hi >= 0.0:
                ok4 = False
                worst4 = dlam
                break
            worst4 = dlam if worst4 is None else worst4.hull(dlam)
        except VerifierError:
            ok4 = False
            break
    deps.append(
        cert.add(
            Record(
                claim_id=f"{prefix}.dlambda_dk_neg_R4",
                predicate="dlambda1_dk_negative_R4",
                box=_box_of(k=KBox(kb_lo.lo, kb_hi.hi).interval(), psi=r4),
                status=VERIFIED if ok4 else INCONCLUSIVE,
                witness=(worst4,) if worst4 is not None else (),
                meta=(
                    ("check", "negative" if ok4 else "info"),
                    ("subintervals", str(k_subintervals)),
                ),
            )
        ).claim_id
    )
    deps.append(
        cert.add(
            Record(
                claim_id=f"{prefix}.axioms",
                predicate="zero_anchors_and_transition_lemma",
                box=_box_of(q=qiv),
                status=AXIOM,
                meta=(("check", "axiom"), ("source", "intermediate_value")),
            )
        ).claim_id
    )
    ok = cert.all_verified(
        [d for d in deps if d not in endpoint_deps]
    ) and all(
        cert.status_of(d) in (VERIFIED, AXIOM, INFO) for d in endpoint_deps
    )
    return cert.add(
        Record(
            claim_id=prefix,
            predicate="sharp_lower_transition",
            box=_box_of(k=Interval(kb_lo.interval().lo, kb_hi.interval().hi)),
            status=VERIFIED if ok else INCONCLUSIVE,
            deps=tuple(deps),
            meta=(("check", "dependencies"),),
            wall_time=time.time() - t0,
        )
    )


# ----------------------------------------------------------------------
# campaign
# ----------------------------------------------------------------------


def run_campaign(
    plan: Sequence[dict],
    parallelism: int = 0,
    digest_text: str | None = None,
) -> Certificate:
    """Execute an ordered driver plan and assemble the theorem record.

    Step dicts: {"driver": name, "id": claim prefix, **params}.  Driver
    dependencies must appear earlier in the plan (DAG order).
    """
    from . import schedules

    text = digest_text if digest_text is not None else repr(
        [sorted(step.items()) for step in plan]
    )
    cert = Certificate(config_digest=config_digest(text))
    cfg = VerifyConfig(workers=parallelism)
    produced: list[str] = []
    for step in plan:
        driver = step["driver"]
        cid = step.get("id", driver)
        params = {
            k: v for k, v in step.items() if k not in ("driver", "id")
        }
        if driver == "kappa-monotone":
            rec = verify_kappa_monotone(
                cert, KBox.from_decimal(params["k_lo"], params["k_hi"]),
                prefix=cid,
            )
        elif driver == "A1":
            rec = verify_A1(
                cert, KBox.from_decimal(params["k_lo"], params.get("k_hi")),
                psi0=params.get("psi0", "0.98"), prefix=cid, cfg=cfg,
            )
        elif driver == "A2":
            rec = verify_A2(
                cert, KBox.from_decimal(params["k_lo"], params["k_hi"]),
                prefix=cid,
            )
        elif driver == "S1-single":
            rec = verify_S1_single(
                cert, KBox.from_decimal(params["k_lo"]), cfg=cfg, prefix=cid,
            )
        elif driver == "S1-row":
            rec = verify_S1_row(
                cert, params["q_lo"], params["q_hi"],
                {
                    "rho_q": params["rho_q"],
                    "n_q": params.get("n_q", 16),
                    "kb_lo": KBox.from_decimal(params["k_lo"]),
                    "kb_hi": KBox.from_decimal(params["k_hi"]),
                },
                cfg=cfg, prefix=cid,
            )
        elif driver == "lower-row":
            rec = verify_unstable_lower(
                cert,
                LowerRow(
                    k_lo=params["k_lo"], k_hi=params["k_hi"],
                    q_lo=params["q_lo"], q_hi=params["q_hi"],
                    rho_q=params["rho_q"], n_q=params.get("n_q", 16),
                    m_lambda_ref=params.get("m_lambda_ref", 0.0),
                ),
                cfg=cfg, prefix=cid,
            )
        elif driver == "upper-range":
            rec = verify_unstable_upper(
                cert, KBox.from_decimal(params["k_lo"], params["k_hi"]),
                cfg=cfg, psi_grid=params.get("psi_grid", 100),
                k_pieces=params.get("k_pieces", 4), prefix=cid,
            )
        elif driver == "pinpoint":
            rec = verify_upper_pinpoint(
                cert, params.get("k_stable", schedules.UPPER_PINPOINT[0]),
                params.get("k_unstable", schedules.UPPER_PINPOINT[1]),
                cfg=cfg, prefix=cid,
            )
        elif driver == "sharp-lower":
            rec = verify_sharp_lower(cert, cfg=cfg, prefix=cid,
                                     n_q=params.get("n_q", 8))
        elif driver == "sharp-upper":
            rec = verify_sharp_upper(cert, cfg=cfg, prefix=cid,
                                     n_q=params.get("n_q", 8))
        else:
            raise DomainViolation(f"unknown driver {driver!r}")
        produced.append(rec.claim_id)
    if produced:
        ok = cert.all_verified(produced)
        k_l = Interval(
            float(schedules.LOWER_TRANSITION_J[0]),
            float(schedules.LOWER_TRANSITION_J[1]),
        )
        k_r = Interval(
            float(schedules.UPPER_PINPOINT[0]),
            float(schedules.UPPER_TRANSITION_J[1]),
        )
        cert.add(
            Record(
                claim_id="theorem",
                predicate="stability_partition",
                box=_box_of(
                    k=Interval(
                        float(schedules.K_MIN), float(schedules.K_MAX)
                    ),
                ),
                status=VERIFIED if ok else INCONCLUSIVE,
                witness=(k_l, k_r),
                deps=tuple(produced),
                meta=(("check", "dependencies"),),
            )
        )
    return cert
