"""Command-line front end.

Subcommands
    verify     run a proof driver and write a certificate
    plot-data  emit column-text data (midpoint and radius per point)
    audit      re-check a certificate without re-running the analysis

Exit codes: 0 full verification, 1 invalid input or audit failure,
2 INCONCLUSIVE (the computation could not certify the claim).
"""

from __future__ import annotations

import argparse
import os
import sys

from . import schedules
from .elliptic import frame_from_decimal
from .errors import VerifierError
from .interval import Interval
from .pipeline import (
    AXIOM,
    Certificate,
    INCONCLUSIVE,
    KBox,
    Record,
    VERIFIED,
    VerifyConfig,
    audit,
    config_digest,
    run_campaign,
    verify_A1,
    verify_A2,
    verify_kappa_monotone,
    verify_S1_single,
    verify_sharp_lower,
    verify_sharp_upper,
    verify_unstable_lower,
    verify_unstable_upper,
    verify_upper_pinpoint,
    LowerRow,
)
from .stability import AlphaLine, ChebConfig, u0_profile, xi_scaled
from .elliptic import lambda_kdv
from .interval import ComplexInterval


def _cfg_from_args(args) -> VerifyConfig:
    cheb = ChebConfig(
        n_x=args.nodes_x,
        n_psi=args.nodes_psi,
    )
    return VerifyConfig(
        depth=args.depth,
        workers=args.workers,
        cheb=cheb,
    )


def _digest_of_args(args, keys) -> str:
    payload = ";".join(f"{k}={getattr(args, k, None)}" for k in sorted(keys))
    return config_digest(payload)


def cmd_verify(args) -> int:
    cfg = _cfg_from_args(args)
    keys = [
        "target", "k", "k_min", "k_max", "psi0", "nodes_x", "nodes_q",
        "nodes_psi", "depth",
    ]
    cert = Certificate(config_digest=_digest_of_args(args, keys))
    try:
        if args.target == "single-wave":
            if not args.k:
                print("single-wave requires --k", file=sys.stderr)
                return 1
            rec = verify_S1_single(cert, KBox.from_decimal(args.k), cfg)
        elif args.target == "a1":
            rec = verify_A1(
                cert, KBox.from_decimal(args.k or "0.99"),
                psi0=args.psi0 or "0.98", cfg=cfg,
            )
        elif args.target == "a2":
            rec = verify_A2(
                cert,
                KBox.from_decimal(args.k_min or args.k, args.k_max or args.k),
            )
        elif args.target == "kappa-monotone":
            rec = verify_kappa_monotone(
                cert,
                KBox.from_decimal(args.k_min or "0.9",
                                  args.k_max or "0.9999999"),
            )
        elif args.target == "middle":
            plan = []
            k_lo = args.k_min or schedules.MIDDLE_RANGE[0]
            k_hi = args.k_max or schedules.MIDDLE_RANGE[1]
            fr_lo = frame_from_decimal(k_lo)
            fr_hi = frame_from_decimal(k_hi)
            from .pipeline import verify_S1_row

            rec = verify_S1_row(
                cert, fr_lo.q.lo, fr_hi.q.hi,
                {
                    "rho_q": args.rho_q or 1.5,
                    "n_q": args.nodes_q or 16,
                    "kb_lo": KBox.from_decimal(k_lo),
                    "kb_hi": KBox.from_decimal(k_hi),
                },
                cfg=cfg,
            )
        elif args.target == "lower-instability":
            rows = schedules.TABLE_LOWER
            if args.row is not None:
                rows = (rows[args.row],)
            recs = []
            for i, r in enumerate(rows):
                recs.append(
                    verify_unstable_lower(
                        cert,
                        LowerRow(r.k_lo, r.k_hi, r.q_lo, r.q_hi, r.rho_q,
                                 args.nodes_q or r.n_q, r.m_lambda_ref),
                        cfg, prefix=f"lower-row{i}",
                    )
                )
            rec = recs[-1]
        elif args.target == "upper-instability":
            rec = verify_unstable_upper(
                cert,
                KBox.from_decimal(args.k_min or "0.99999839",
                                  args.k_max or "0.9999985"),
                cfg, k_pieces=args.pieces or 4,
            )
        elif args.target == "sharp-lower":
            rec = verify_sharp_lower(cert, cfg)
        elif args.target == "sharp-upper":
            rec = verify_sharp_upper(cert, cfg)
        elif args.target == "pinpoint":
            rec = verify_upper_pinpoint(
                cert,
                args.k_min or schedules.UPPER_PINPOINT[0],
                args.k_max or schedules.UPPER_PINPOINT[1],
                cfg,
            )
        elif args.target == "large-xi":
            from .pipeline import verify_large_xi
            from .stability import theta_scan_lower

            frame = frame_from_decimal(args.k or "0.99")
            # conservative demonstration bounds for the small-psi window
            from .stability import w_majorants, theta_segment_lower

            rho = Interval(float(args.psi0 or "0.05"))
            den = theta_segment_lower(frame, 200)
            ell = frame.log_q_neg.hi
            wm = w_majorants(frame, (1.0 + rho.hi) * ell * 0.5,
                             ell * 0.5, den)
            m_upper = list(wm.w)
            # |w| >= 1 - |w - 1| is not tracked; use the crude positive
            # lower bound from the ratio of theta bounds at small psi
            m_lower = Interval(0.25)
            xi0 = Interval(float(args.xi0 or "200.0"))
            rec = verify_large_xi(cert, frame, m_lower, m_upper, xi0, rho)
        elif args.target == "theorem":
            plan = default_theorem_plan(args)
            cert = run_campaign(plan, parallelism=args.workers)
            rec = cert.find("theorem")
        else:
            print(f"unknown verify target {args.target!r}", file=sys.stderr)
            return 1
    except VerifierError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out = args.out or f"certificate-{args.target}.txt"
    cert.save(out)
    for r in cert.records:
        wit = " ".join(f"[{w.lo!r},{w.hi!r}]" for w in r.witness[:2])
        print(f"{r.status:12s} {r.claim_id:40s} {r.predicate} {wit}")
    print(f"certificate written to {out}")
    if rec.status == VERIFIED:
        return 0
    if rec.status == INCONCLUSIVE:
        return 2
    return 2


def default_theorem_plan(args) -> list[dict]:
    """Full campaign mirroring the published tables (not desk-scale)."""
    plan = []
    for i, r in enumerate(schedules.TABLE_LOWER):
        plan.append(
            dict(driver="lower-row", id=f"lower{i}", k_lo=r.k_lo, k_hi=r.k_hi,
                 q_lo=r.q_lo, q_hi=r.q_hi, rho_q=r.rho_q, n_q=r.n_q)
        )
    fr_rows = schedules.TABLE_OMEGA_DIRECT
    mid_lo, mid_hi = schedules.MIDDLE_RANGE
    for i, r in enumerate(fr_rows):
        plan.append(
            dict(driver="S1-row", id=f"middle{i}", q_lo=r.q_lo, q_hi=r.q_hi,
                 rho_q=r.rho_q, n_q=r.n_q, k_lo=mid_lo, k_hi=mid_hi)
        )
    plan.append(dict(driver="A2", id="A2",
                     k_lo=schedules.A2_MIDDLE_RANGE[0],
                     k_hi=schedules.A2_MIDDLE_RANGE[1]))
    plan.append(dict(driver="A1", id="A1", k_lo="0.99", psi0="0.95"))
    plan.append(dict(driver="upper-range", id="upper",
                     k_lo="0.99999839", k_hi=schedules.K_MAX))
    plan.append(dict(driver="sharp-lower", id="sharp-lower"))
    plan.append(dict(driver="sharp-upper", id="sharp-upper"))
    plan.append(dict(driver="pinpoint", id="pinpoint"))
    return plan


def cmd_plot_data(args) -> int:
    try:
        frame = frame_from_decimal(args.k)
    except (VerifierError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    n = args.points
    rows = []
    if args.plot == "profile":
        period = frame.X
        for j in range(n):
            y = period * ((j + 0.5) / n)
            v = u0_profile(y, Interval(0.0), frame)
            rows.append((y.mid, v.mid, v.rad))
    elif args.plot == "xi":
        for j in range(n):
            psi = Interval((j + 0.5) / n)
            line = AlphaLine(args.line, psi)
            try:
                v = xi_scaled(line, frame)
            except VerifierError:
                continue
            rows.append((psi.mid, v.mid, v.rad))
    elif args.plot == "lambda_kdv":
        for j in range(n):
            psi = Interval((j + 0.5) / n)
            alpha = AlphaLine(args.line, psi).alpha(frame)
            v = lambda_kdv(alpha, frame)
            rows.append((psi.mid, v.im.mid, v.im.rad))
    elif args.plot in ("ftilde", "gtilde"):
        from .stability import build_stability_models

        cfg = ChebConfig(n_psi=args.nodes_psi)
        domain = (0.5, 1.0) if args.line == 0 else (0.0, 1.0)
        sq = build_stability_models(frame, args.line, cfg, psi_domain=domain)
        for j in range(n):
            psi = Interval(domain[0] + (domain[1] - domain[0]) * (j + 0.5) / n)
            v = sq.f(psi) if args.plot == "ftilde" else sq.g(psi)
            rows.append((psi.mid, v.mid, v.rad))
    else:
        print(f"unknown plot target {args.plot!r}", file=sys.stderr)
        return 1
    out = args.out or f"{args.plot}-{args.k}.dat"
    with open(out, "w", encoding="ascii") as fh:
        fh.write(f"# {args.plot} k={args.k}\n# x midpoint radius\n")
        for x, m, r in rows:
            fh.write(f"{x!r} {m!r} {r!r}\n")
    print(f"wrote {len(rows)} points to {out}")
    return 0


def cmd_audit(args) -> int:
    try:
        cert = Certificate.load(args.certificate)
    except (OSError, VerifierError, ValueError) as exc:
        print(f"audit: cannot read certificate: {exc}", file=sys.stderr)
        return 1
    problems = audit(cert)
    if problems:
        for p in problems:
            print(f"audit: {p}", file=sys.stderr)
        return 1
    print(f"audit clean: {len(cert.records)} records")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="rollwave",
        description="Validated verifier for roll-wave spectral stability",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run a verification driver")
    v.add_argument("target", choices=[
        "single-wave", "middle", "lower-instability", "upper-instability",
        "sharp-lower", "sharp-upper", "pinpoint", "large-xi", "theorem",
        "a1", "a2", "kappa-monotone",
    ])
    v.add_argument("--k")
    v.add_argument("--k-min", dest="k_min")
    v.add_argument("--k-max", dest="k_max")
    v.add_argument("--psi0")
    v.add_argument("--xi0")
    v.add_argument("--row", type=int)
    v.add_argument("--rho-q", dest="rho_q", type=float)
    v.add_argument("--pieces", type=int)
    v.add_argument("--nodes-x", dest="nodes_x", type=int)
    v.add_argument("--nodes-q", dest="nodes_q", type=int)
    v.add_argument("--nodes-psi", dest="nodes_psi", type=int)
    v.add_argument("--depth", type=int, default=24)
    v.add_argument("--workers", type=int, default=0)
    v.add_argument("--plan", help="plan directory override")
    v.add_argument("--out")
    v.set_defaults(fn=cmd_verify)

    p = sub.add_parser("plot-data", help="emit plot data columns")
    p.add_argument("plot", choices=["profile", "ftilde", "gtilde", "xi",
                                    "lambda_kdv"])
    p.add_argument("--k", required=True)
    p.add_argument("--line", type=int, default=1, choices=[0, 1])
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--nodes-psi", dest="nodes_psi", type=int)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_plot_data)

    a = sub.add_parser("audit", help="re-check a certificate")
    a.add_argument("certificate")
    a.set_defaults(fn=cmd_audit)
    return ap


def main(argv=None) -> int:
    env_plan = os.environ.get("ROLLWAVE_PLAN_DIR")
    args = build_parser().parse_args(argv)
    if env_plan and getattr(args, "plan", None) is None:
        args.plan = env_plan
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
