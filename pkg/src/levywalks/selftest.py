"""Fast oracle checks run by ``levywalks selftest``.

Each check is a named callable returning (passed, detail).  Faults can be
injected by name to confirm that a broken constant is caught by the check
that is supposed to catch it.
"""

from __future__ import annotations

import contextlib
import math
import time
from dataclasses import dataclass
from unittest import mock

import numpy as np
from scipy import special

from . import densities
from .densities import phi_r, phi_r_d3_closed
from .fractional import HalfIntegralSpec, half_integral_jet, power_taylor
from .hyper import CutSide, gauss_2f1
from .model import make_params

CLOSED_FORM_RTOL = 1e-8
POWER_RULE_TOL = 1e-8
HYPER_TOL = 1e-12


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _closed_form(kind, alpha, grid):
    def check():
        params = make_params(kind, alpha, 3)
        got = phi_r(params, grid)
        want = phi_r_d3_closed(kind, alpha, grid, corrected=True)
        err = float(np.max(np.abs(got / want - 1.0)))
        return err <= CLOSED_FORM_RTOL, f"max relative error {err:.2e}"

    return check


def _power_rule(mu, derivative):
    b = 1.0
    ys = np.linspace(0.05, 0.9, 9)

    def check():
        spec = HalfIntegralSpec(power_taylor(mu), b, order_n=0)
        jet = half_integral_jet(spec, ys, 1)
        if derivative:
            got = -jet.derivative(1)
            want = math.gamma(mu + 1) / math.gamma(mu + 0.5) * (b - ys) ** (mu - 0.5)
        else:
            got = jet.value
            want = math.gamma(mu + 1) / math.gamma(mu + 1.5) * (b - ys) ** (mu + 0.5)
        err = float(np.max(np.abs(np.real(got) - want)))
        return err <= POWER_RULE_TOL, f"max abs error {err:.2e}"

    return check


def _hyper_real():
    cases = [(-0.3, 0.35, 1.5), (0.2, 0.7, 2.5), (-0.45, 0.05, 3.0), (0.35, 0.85, 2.0)]
    zs = np.array([-50.0, -3.0, -0.9, -0.2, 0.3, 0.7, 0.95, 0.999])

    def check():
        err = 0.0
        for a, b, c in cases:
            got = np.real(gauss_2f1(a, b, c, zs))
            want = special.hyp2f1(a, b, c, zs)
            err = max(err, float(np.max(np.abs(got - want) / (1 + np.abs(want)))))
        return err <= HYPER_TOL, f"max error against scipy {err:.2e}"

    return check


def _hyper_euler():
    # 2F1(a, b; c; z) = (1 - z)^(c - a - b) 2F1(c - a, c - b; c; z), checked on both sides of the cut
    cases = [(-0.3, 0.35, 1.5), (0.2, 0.7, 2.5), (-0.45, 0.05, 3.0)]
    zs = np.array([1.2, 2.0, 5.0, 40.0])

    def check():
        err = 0.0
        for a, b, c in cases:
            for side in CutSide:
                lhs = gauss_2f1(a, b, c, zs, side)
                log_w = np.log(zs - 1.0) + 1j * side.arg
                rhs = np.exp((c - a - b) * log_w) * gauss_2f1(c - a, c - b, c, zs, side)
                err = max(err, float(np.max(np.abs(lhs - rhs) / (1 + np.abs(lhs)))))
        return err <= HYPER_TOL, f"max Euler residual {err:.2e}"

    return check


def _checks():
    inner = np.linspace(0.05, 0.95, 7)
    outer = np.array([1.05, 1.5, 3.0, 10.0, 40.0])
    return {
        "closed_form_d3_standard": _closed_form("standard", 0.6, inner),
        "closed_form_d3_undershoot": _closed_form("undershoot", 0.6, inner),
        "closed_form_d3_overshoot_inner": _closed_form("overshoot", 0.6, inner),
        "closed_form_d3_overshoot_outer": _closed_form("overshoot", 0.6, outer),
        "half_integral_power_rule": _power_rule(1.7, False),
        "half_derivative_power_rule": _power_rule(2.3, True),
        "hyp2f1_real_axis": _hyper_real(),
        "hyp2f1_euler_on_cut": _hyper_euler(),
    }


CHECK_NAMES = tuple(_checks())
FAULTS = ("gamma-constant",)


@contextlib.contextmanager
def _inject(fault):
    if fault is None:
        yield
        return
    if fault == "gamma-constant":
        original = densities.radius_prefactor
        with mock.patch.object(densities, "radius_prefactor", lambda p: original(p) * (1.0 + 1e-3)):
            yield
        return
    raise ValueError(f"unknown fault {fault!r}; choose from {FAULTS}")


def run_selftest(fault: str | None = None, only=None) -> list[CheckResult]:
    """Run every check (or those named in ``only``), optionally with an injected fault."""
    results = []
    with _inject(fault):
        for name, check in _checks().items():
            if only and name not in only:
                continue
            t0 = time.perf_counter()
            try:
                passed, detail = check()
            except Exception as exc:  # a crash is a failed check, reported by name
                passed, detail = False, f"{type(exc).__name__}: {exc}"
            results.append(CheckResult(name, bool(passed), detail, time.perf_counter() - t0))
    return results
