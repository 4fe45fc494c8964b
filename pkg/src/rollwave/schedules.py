"""Campaign configuration: interpolation schedules and region splits.

The default rows mirror the published campaign tables; they are plain
key=value text shipped with the package so a run is reproducible from
recorded configuration alone.  Region boundaries that are meant to sit on
interpolation nodes are stored as cosine expressions and evaluated as
intervals on demand, avoiding decimal rounding drift.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from importlib import resources

from .interval import Interval, PI, iv_cos


# ----------------------------------------------------------------------
# symbolic node-aligned boundaries
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class CosBoundary:
    """psi = (1 + cos(num pi / den)) / 2, stored symbolically."""

    num: int
    den: int

    def interval(self) -> Interval:
        return (1.0 + iv_cos(PI * self.num / self.den)) * 0.5

    def __str__(self) -> str:
        return f"cos:{self.num}/{self.den}"

    @staticmethod
    def parse(text: str) -> "CosBoundary":
        body = text.split(":", 1)[1]
        num, den = body.split("/")
        return CosBoundary(int(num), int(den))


MIDDLE_PSI_LEFT = CosBoundary(9, 10)  # (1+cos(9 pi/10))/2 ~ 0.0245
MIDDLE_PSI_RIGHT = CosBoundary(1, 10)  # (1+cos(pi/10))/2 ~ 0.9755


# ----------------------------------------------------------------------
# rows
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class RangeRow:
    """One nome range of the middle-stability campaign."""

    q_lo: float
    q_hi: float
    rho_x: float
    rho_q: float
    rho_psi: float
    n_x: int
    n_q: int
    n_psi: int
    m_x_ref: float
    m_q_ref: float
    m_psi_ref: float


@dataclass(frozen=True)
class LowerRowData:
    k_lo: str
    k_hi: str
    q_lo: float
    q_hi: float
    rho_q: float
    n_x: int
    n_q: int
    m_x_ref: float
    m_q_ref: float
    m_lambda_ref: float


# direct interpolation, axis line (alpha = i psi omega')
TABLE_AXIS_DIRECT = (
    RangeRow(0.10, 0.40, 1.30, 2.73, 2.81, 447, 108, 102, 2.78e30, 1.82e28, 1.29e27),
    RangeRow(0.35, 0.50, 1.22, 10.1, 5.57, 581, 48, 72, 4.86e29, 9.14e29, 1.01e28),
    RangeRow(0.49, 0.538, 1.19, 36.4, 8.05, 678, 34, 76, 6.26e31, 2.15e35, 2.06e30),
    RangeRow(0.53, 0.60, 1.16, 22.3, 9.02, 867, 42, 80, 3.37e34, 4.76e38, 1.77e33),
    RangeRow(0.59, 0.66, 1.13, 19.2, 10.8, 1170, 49, 88, 3.46e39, 5.31e44, 2.1e38),
    RangeRow(0.65, 0.71, 1.10, 19.2, 13.2, 1650, 57, 104, 3.32e49, 2.45e55, 2.25e48),
)

# direct interpolation, omega line (alpha = omega + i psi omega')
TABLE_OMEGA_DIRECT = (
    RangeRow(0.10, 0.40, 1.30, 2.73, 2.81, 446, 108, 102, 2.73e30, 1.8e28, 1.21e27),
    RangeRow(0.35, 0.50, 1.22, 10.1, 5.57, 579, 48, 72, 3.04e29, 9.27e29, 4.61e27),
    RangeRow(0.49, 0.538, 1.19, 36.4, 8.05, 666, 34, 74, 6.9e30, 2.09e35, 1.02e29),
    RangeRow(0.53, 0.60, 1.16, 22.3, 9.02, 859, 42, 79, 1.02e34, 4.54e38, 2.66e32),
    RangeRow(0.59, 0.66, 1.13, 19.2, 10.8, 1170, 49, 88, 3.47e39, 5.15e44, 1.52e38),
    RangeRow(0.65, 0.71, 1.10, 19.2, 13.2, 1650, 57, 104, 3.32e49, 2.44e55, 2.25e48),
)

# factored coefficients, axis line
TABLE_AXIS_FACTORED = (
    RangeRow(0.10, 0.40, 1.30, 2.73, 2.81, 437, 102, 100, 2.61e29, 4.43e25, 1.35e26),
    RangeRow(0.35, 0.50, 1.22, 10.1, 5.57, 579, 46, 71, 2.87e29, 9.3e27, 2.74e27),
    RangeRow(0.49, 0.538, 1.19, 36.4, 8.05, 665, 33, 74, 6.59e30, 3.14e33, 9.21e28),
    RangeRow(0.53, 0.60, 1.16, 22.3, 9.02, 859, 41, 79, 9.98e33, 3.47e37, 2.52e32),
    RangeRow(0.59, 0.66, 1.13, 19.2, 10.8, 1170, 48, 88, 3.44e39, 1.46e44, 1.5e38),
    RangeRow(0.65, 0.71, 1.10, 19.2, 13.2, 1650, 57, 104, 3.32e49, 2.04e55, 2.24e48),
)

TABLE_LOWER = (
    LowerRowData("0.9299", "0.9422", 0.122, 0.139, 27.6, 130, 25, 1.53e77, 1.3e18, 4.41e-07),
    LowerRowData("0.89892", "0.93008", 0.1, 0.2, 5.26, 140, 51, 1.24e85, 1e18, 0.342),
    LowerRowData("0.74993", "0.90005", 0.05, 0.11, 4.64, 126, 56, 4.04e74, 1.11e19, 0.708),
    LowerRowData("0.39992", "0.75108", 0.01, 0.06, 2.18, 120, 118, 8.14e69, 9.82e20, 0.399),
    LowerRowData("0.29993", "0.40007", 0.005, 0.011, 4.64, 111, 64, 5.43e63, 1.03e24, 0.211),
    LowerRowData("0.23991", "0.30009", 0.003, 0.006, 5.26, 111, 61, 2.58e63, 2.1e25, 0.14),
    LowerRowData("0.19991", "0.24009", 0.002, 0.0038, 5.67, 111, 59, 2.52e63, 2.13e26, 0.0943),
)

# theorem-level constants
K_MIN = "0.199910210210210"
K_MAX = "0.999999999997"
LOWER_TRANSITION_J = ("0.942197747747748", "0.9426")
UPPER_TRANSITION_J = ("0.9999983", "0.99999839")
UPPER_PINPOINT = ("0.999998385205026", "0.999998385263233")
MIDDLE_RANGE = ("0.9426", "0.9999983")
A1_MIDDLE_RANGE = ("0.942", "0.9999984")
A2_MIDDLE_RANGE = ("0.9", "0.9999995")
LOWER_RHO_X = 5.460277197252352


# ----------------------------------------------------------------------
# text round trip
# ----------------------------------------------------------------------


def rows_to_text(name: str, rows) -> str:
    lines = [f"schedule {name}"]
    for i, r in enumerate(rows):
        fields = " ".join(
            f"{k}={getattr(r, k)}" for k in r.__dataclass_fields__
        )
        lines.append(f"row {i} {fields}")
    return "\n".join(lines) + "\n"


def rows_from_text(text: str):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    name = lines[0].split(" ", 1)[1]
    rows = []
    for ln in lines[1:]:
        parts = ln.split()
        kv = dict(p.split("=", 1) for p in parts[2:])
        if "rho_psi" in kv:
            rows.append(
                RangeRow(
                    q_lo=float(kv["q_lo"]),
                    q_hi=float(kv["q_hi"]),
                    rho_x=float(kv["rho_x"]),
                    rho_q=float(kv["rho_q"]),
                    rho_psi=float(kv["rho_psi"]),
                    n_x=int(kv["n_x"]),
                    n_q=int(kv["n_q"]),
                    n_psi=int(kv["n_psi"]),
                    m_x_ref=float(kv["m_x_ref"]),
                    m_q_ref=float(kv["m_q_ref"]),
                    m_psi_ref=float(kv["m_psi_ref"]),
                )
            )
        else:
            rows.append(
                LowerRowData(
                    k_lo=kv["k_lo"],
                    k_hi=kv["k_hi"],
                    q_lo=float(kv["q_lo"]),
                    q_hi=float(kv["q_hi"]),
                    rho_q=float(kv["rho_q"]),
                    n_x=int(kv["n_x"]),
                    n_q=int(kv["n_q"]),
                    m_x_ref=float(kv["m_x_ref"]),
                    m_q_ref=float(kv["m_q_ref"]),
                    m_lambda_ref=float(kv["m_lambda_ref"]),
                )
            )
    return name, tuple(rows)


def write_default_schedules(directory: str) -> list[str]:
    os.makedirs(directory, exist_ok=True)
    written = []
    for name, rows in (
        ("axis_direct", TABLE_AXIS_DIRECT),
        ("omega_direct", TABLE_OMEGA_DIRECT),
        ("axis_factored", TABLE_AXIS_FACTORED),
        ("lower_instability", TABLE_LOWER),
    ):
        path = os.path.join(directory, f"{name}.txt")
        with open(path, "w", encoding="ascii") as fh:
            fh.write(rows_to_text(name, rows))
        written.append(path)
    return written
