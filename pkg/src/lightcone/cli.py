"""Command-line surface: evaluation, verification suites, reference tables,
and point counting, with JSON/CSV output.

Commands
--------
* ``eval``   — evaluate the series at (s, z) by the Fourier expansion and,
  when Re s is safely inside the convergent range, by the direct lattice
  sum, reporting both values and their relative difference.
* ``verify`` — run one of the named check suites (or ``all``); exit code 0
  only if every check passes.
* ``table``  — regenerate the residue / cusp-volume / square-series tables.
* ``count``  — sharp or smoothed point counts against the main term.

Exit codes: 0 success (all checks pass), 1 a check failed, 2 usage or
precondition error.  ``--json`` prints a single document with the schema
``{command, params, results[], checks[]}``; ``--csv`` prints rows with a
header line.  Complex numbers are written ``a+bi`` (e.g. ``3.5+0.5i``);
points z are comma-separated ``x1,...,xn,y``.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Sequence

from . import arith, counting, eisenstein, expsums, lfunc, localzeta

USAGE_ERROR = 2
CHECK_ERROR = 1


@dataclass
class RunReport:
    """Outcome of one CLI command: input summary, named numeric results,
    and named pass/fail checks."""

    command: str
    params: dict
    results: list[dict] = field(default_factory=list)
    checks: list[dict] = field(default_factory=list)

    def add_result(self, name: str, **values) -> None:
        self.results.append({"name": name, **values})

    def add_check(self, name: str, passed: bool, measured: float, tolerance: float) -> None:
        self.checks.append(
            {
                "name": name,
                "pass": bool(passed),
                "measured": float(measured),
                "tolerance": float(tolerance),
            }
        )

    @property
    def all_pass(self) -> bool:
        return all(c["pass"] for c in self.checks)

    def to_json(self) -> str:
        return json.dumps(
            {
                "command": self.command,
                "params": self.params,
                "results": self.results,
                "checks": self.checks,
            },
            indent=2,
            default=_jsonable,
        )

    def to_csv(self) -> str:
        lines = ["section,name,field,value"]
        for rec in self.results:
            for key, val in rec.items():
                if key == "name":
                    continue
                lines.append(f"result,{rec['name']},{key},{_csv_scalar(val)}")
        for c in self.checks:
            lines.append(f"check,{c['name']},pass,{c['pass']}")
            lines.append(f"check,{c['name']},measured,{_csv_scalar(c['measured'])}")
            lines.append(f"check,{c['name']},tolerance,{_csv_scalar(c['tolerance'])}")
        return "\n".join(lines)

    def to_text(self) -> str:
        lines = [f"command: {self.command}"]
        if self.params:
            lines.append("params: " + ", ".join(f"{k}={v}" for k, v in self.params.items()))
        for rec in self.results:
            body = ", ".join(f"{k}={_fmt(v)}" for k, v in rec.items() if k != "name")
            lines.append(f"  {rec['name']}: {body}")
        for c in self.checks:
            status = "PASS" if c["pass"] else "FAIL"
            lines.append(
                f"  [{status}] {c['name']}: measured {c['measured']:.3e}"
                f" (tolerance {c['tolerance']:.3e})"
            )
        return "\n".join(lines)


def _jsonable(value):
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, (list, tuple)):
        return list(value)
    return str(value)


def _fmt(value) -> str:
    if isinstance(value, complex):
        return format_complex(value)
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _csv_scalar(value) -> str:
    if isinstance(value, complex):
        return f"{format_complex(value)}"
    return f"{value}"


def parse_complex(text: str) -> complex:
    """Parse ``a+bi`` / ``a-bi`` / plain real literals."""
    cleaned = text.strip().replace(" ", "")
    if not cleaned:
        raise ValueError("empty complex literal")
    pythonic = cleaned.replace("i", "j")
    try:
        return complex(pythonic)
    except ValueError as exc:
        raise ValueError(f"cannot parse complex number {text!r}") from exc


def format_complex(value: complex) -> str:
    if value.imag == 0:
        return f"{value.real:.12g}"
    sign = "+" if value.imag >= 0 else "-"
    return f"{value.real:.12g}{sign}{abs(value.imag):.12g}i"


def parse_point(text: str, n: int) -> tuple[float, ...]:
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != n + 1:
        raise ValueError(
            f"point must have {n} coordinates plus a height (got {len(parts)} fields)"
        )
    vals = tuple(float(p) for p in parts)
    if not vals[-1] > 0:
        raise ValueError("height (last field) must be positive")
    return vals


def _truncation(args, params: eisenstein.FormParams, s: complex, y: float):
    if args.lambda_bound is None and args.height_bound is None:
        return None
    lam = args.lambda_bound if args.lambda_bound is not None else eisenstein._lambda_bound(
        params, s, y
    )
    height = args.height_bound if args.height_bound is not None else eisenstein._default_height(
        params
    )
    return eisenstein.TruncationConfig(
        lambda_norm_bound=lam,
        zeta_terms=100,
        direct_height_bound=height,
        pole_guard=1e-8,
    )


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------


def cmd_eval(args) -> tuple[RunReport, int]:
    params = eisenstein.FormParams(args.n, args.d)
    s = parse_complex(args.s)
    z = parse_point(args.z, args.n)
    report = RunReport(
        "eval",
        {"n": args.n, "d": args.d, "s": format_complex(s), "z": args.z},
    )
    cfg = _truncation(args, params, s, z[-1])
    try:
        value_f = eisenstein.eisenstein_fourier(params, s, z, cfg)
    except ValueError as exc:
        report.add_result("pole", message=str(exc))
        return report, USAGE_ERROR
    lam_bound = (
        cfg.lambda_norm_bound
        if cfg is not None
        else eisenstein._lambda_bound(params, s, z[-1])
    )
    report.add_result(
        "fourier",
        value=value_f,
        lambda_norm_bound=lam_bound,
    )
    if s.real > params.n + 0.3:
        height = (
            cfg.direct_height_bound
            if cfg is not None
            else eisenstein._default_height(params)
        )
        value_d, tail = eisenstein.eisenstein_direct(params, s, z, cfg, with_tail=True)
        completed = value_d + tail
        rel = abs(value_f - completed) / (abs(completed) + 1e-300)
        report.add_result(
            "direct",
            value=completed,
            truncated_sum=value_d,
            tail_estimate=tail,
            height_bound=height,
        )
        report.add_result("comparison", relative_difference=rel)
    return report, 0


# ---------------------------------------------------------------------------
# verify suites
# ---------------------------------------------------------------------------


def _suite_expsums(report: RunReport) -> None:
    from .expsums import dual_vector

    worst = 0.0
    cases = 0
    for p in (2, 3, 5):
        for n in range(1, 4):
            for k in range(1, 4 if p == 2 else 3):
                t = p ** k
                vecs = [
                    (0,) * n,
                    (1,) + (0,) * (n - 1),
                    (p - 1,) * n,
                    (p,) + (1,) * (n - 1),
                ]
                for m in vecs:
                    closed = expsums.phi_prime_power(n, p, k, m)
                    brute = expsums.phi_brute(n, t, m)
                    worst = max(worst, abs(closed - brute))
                    cases += 1
    worst_nd = 0.0
    cases_nd = 0
    for d in (1, 3):
        for n in (1, 2, 3):
            lams = [None, dual_vector((2,) + (0,) * (n - 1)), dual_vector((1,) * n)]
            for t in (1, 2, 3, 4, 6):
                for lam in lams:
                    closed = expsums.phi_nd(n, d, t, lam, method="closed")
                    brute = expsums.phi_nd(n, d, t, lam, method="brute")
                    worst_nd = max(worst_nd, abs(closed - brute))
                    cases_nd += 1
    report.add_result("grid", cases=cases, composite_cases=cases_nd)
    report.add_check("prime-power sums closed vs brute", worst <= 1e-10, worst, 1e-10)
    report.add_check("composite sums closed vs brute", worst_nd <= 1e-10, worst_nd, 1e-10)


def _suite_localzeta(report: RunReport) -> None:
    from .expsums import dual_vector

    worst = 0.0
    for n in (2, 3, 4):
        for p in (3, 5):
            s = complex(n + 0.5)
            closed = localzeta.Z_const_closed(n, p, s)
            series = localzeta.Z_series(n, p, s, 1, None, kmax=120)
            worst = max(worst, abs(closed - series))
    for n in (2, 3):
        for m in ((2,) + (0,) * (n - 1), (1,) * n, (3,) * n):
            dv = dual_vector(m)
            s = complex(n + 1, 0.7)
            for p in (2, 3):
                if p == 2:
                    closed = localzeta.Z2_closed(n, s, dv)
                else:
                    closed = localzeta.Z_ramified_closed(n, p, s, dv)
                series = localzeta.Z_series(n, p, s, 1, dv)
                worst = max(worst, abs(closed - series))
    report.add_check("local factors closed vs series", worst <= 1e-10, worst, 1e-10)


def _suite_lfunc(report: RunReport) -> None:
    chi4 = arith.char_from_D(-4)
    worst_xi = 0.0
    for s in (0.3 + 0.4j, 1.7 - 2.2j, 2.5, -1.2 + 1.0j):
        s = complex(s)
        worst_xi = max(worst_xi, abs(lfunc.xi(s) - lfunc.xi(1 - s)))
    worst_L = 0.0
    for s in (0.4 + 1.1j, 1.3, 2.2 - 0.8j):
        s = complex(s)
        worst_L = max(
            worst_L, abs(lfunc.Lstar(s, chi4) - lfunc.Lstar(1 - s, chi4))
        )
    x = 1.7
    closed = math.sqrt(math.pi / (2 * x)) * math.exp(-x)
    half = abs(lfunc.bessel_K(0.5, x) - closed)
    report.add_check("xi reflection", worst_xi <= 1e-9, worst_xi, 1e-9)
    report.add_check("Lstar reflection", worst_L <= 1e-9, worst_L, 1e-9)
    report.add_check("K_{1/2} closed form", half <= 1e-10, half, 1e-10)


def _suite_funceq(report: RunReport) -> None:
    import random

    rng = random.Random(20240803)
    for n in range(1, 12):
        params = eisenstein.FormParams(n, 1)
        s = complex(n / 2 + 0.7, 0.9)
        y = 1.0 if n <= 4 else 3.0
        x = tuple(rng.uniform(-0.5, 0.5) for _ in range(n))
        res = eisenstein.functional_eq_residual(params, s, x + (y,))
        if n % 8 == 0:
            report.add_check(f"reflection failure n={n}", res >= 1e-2, res, 1e-2)
        else:
            report.add_check(f"reflection n={n}", res <= 1e-5, res, 1e-5)


def _suite_poles(report: RunReport) -> None:
    for n in (2, 3, 4, 9):
        params = eisenstein.FormParams(n, 1)
        found = eisenstein.pole_scan(params, (n / 2 + 0.02, n - 0.02))
        expected = 1 if n == 9 else 0
        report.add_check(
            f"interior poles n={n}",
            len(found) == expected,
            float(len(found)),
            float(expected),
        )


def _suite_identities(report: RunReport) -> None:
    for k, s in ((2, 5.0), (3, 5.0), (4, 5.0), (6, 7.0)):
        closed = eisenstein.R_closed(k, s)
        s2 = eisenstein.R_series(k, s, 2000)
        s1 = eisenstein.R_series(k, s, 1000)
        extrap = s2 + (s2 - s1) / (2 ** (s + 1 - k) - 1)
        rel = abs(extrap - closed) / abs(closed)
        report.add_check(f"square series k={k}", rel <= 1e-7, rel, 1e-7)
    for n in (1, 2, 3):
        params = eisenstein.FormParams(n, 1)
        z0 = tuple([0.0] * n + [1.0])
        s = float(n + 2)
        lhs = lfunc.zeta(complex(s)) * eisenstein.eisenstein_direct(params, s, z0)
        rhs = eisenstein.R_closed(n + 1, s)
        rel = abs(lhs - rhs) / abs(rhs)
        report.add_check(f"special point n={n}", rel <= 1e-5, rel, 1e-5)


def _suite_counting(report: RunReport) -> None:
    res = counting.count_sharp(eisenstein.FormParams(2, 1), 300.0)
    report.add_check(
        "sharp n=2 T=300", abs(res.relative_error) <= 0.03, abs(res.relative_error), 0.03
    )
    res1 = counting.count_sharp(eisenstein.FormParams(1, 1), 1000.0)
    report.add_check(
        "sharp n=1 T=1000", abs(res1.relative_error) <= 0.05, abs(res1.relative_error), 0.05
    )
    value, main = counting.count_smoothed(eisenstein.FormParams(2, 1), counting.Bump(), 200.0)
    rel = abs(value - main) / main
    report.add_check("smoothed n=2 T=200", rel <= 0.02, rel, 0.02)
    for row in counting.secondary_term_slopes(dims=(2, 3)):
        report.add_result(
            "secondary-term slope",
            n=row[0],
            slope=row[1],
            threshold=row[2],
            flagged=row[3],
        )


_SUITES = {
    "expsums": _suite_expsums,
    "localzeta": _suite_localzeta,
    "lfunc": _suite_lfunc,
    "funceq": _suite_funceq,
    "poles": _suite_poles,
    "identities": _suite_identities,
    "counting": _suite_counting,
}


def cmd_verify(args) -> tuple[RunReport, int]:
    names = list(_SUITES) if args.suite == "all" else [args.suite]
    report = RunReport("verify", {"suite": args.suite})
    for name in names:
        _SUITES[name](report)
    return report, (0 if report.all_pass else CHECK_ERROR)


# ---------------------------------------------------------------------------
# table
# ---------------------------------------------------------------------------


def cmd_table(args) -> tuple[RunReport, int]:
    report = RunReport("table", {"which": args.which})
    if args.which == "omega":
        for n in range(1, 13):
            report.add_result(
                "omega", n=n, value=eisenstein.omega(eisenstein.FormParams(n, 1))
            )
    elif args.which == "cusp-volume":
        for n in range(1, 13):
            frac = eisenstein.cusp_volume_vP1(eisenstein.FormParams(n, 1))
            report.add_result(
                "cusp-volume",
                n=n,
                numerator=frac.numerator,
                denominator=frac.denominator,
            )
    else:  # R-series
        for k, s in ((2, 5.0), (3, 5.0), (4, 5.0), (6, 7.0), (8, 9.0)):
            closed = eisenstein.R_closed(k, s)
            series = eisenstein.R_series(k, s, 2000)
            report.add_result(
                "square-series", k=k, s=s, closed=closed.real, series=series.real
            )
    return report, 0


# ---------------------------------------------------------------------------
# count
# ---------------------------------------------------------------------------


def cmd_count(args) -> tuple[RunReport, int]:
    params = eisenstein.FormParams(args.n, args.d)
    report = RunReport(
        "count",
        {"n": args.n, "d": args.d, "T": args.T, "smoothed": bool(args.smoothed)},
    )
    if args.smoothed:
        value, main = counting.count_smoothed(params, counting.Bump(), args.T)
        rel = (value - main) / main if main else 0.0
        report.add_result(
            "smoothed", T=args.T, value=value, main_term=main, relative_error=rel
        )
    else:
        res = counting.count_sharp(params, args.T)
        report.add_result(
            "sharp",
            T=res.T,
            count=res.count,
            main_term=res.main_term,
            relative_error=res.relative_error,
        )
    return report, 0


# ---------------------------------------------------------------------------
# argument parsing and entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lightcone",
        description="Light-cone Eisenstein series: evaluation, verification, tables, counting.",
    )
    parser.add_argument("--json", action="store_true", help="emit a JSON report")
    parser.add_argument("--csv", action="store_true", help="emit CSV rows")
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="evaluate the series at (s, z)")
    p_eval.add_argument("-n", type=int, required=True, help="dimension n >= 1")
    p_eval.add_argument("-d", type=int, default=1, help="odd square-free level")
    p_eval.add_argument("-s", type=str, required=True, help="complex s as a+bi")
    p_eval.add_argument("-z", type=str, required=True, help="point x1,...,xn,y")
    p_eval.add_argument("--lambda-bound", type=float, default=None,
                        help="override frequency-ball radius")
    p_eval.add_argument("--height-bound", type=int, default=None,
                        help="override direct-sum shell bound")

    p_verify = sub.add_parser("verify", help="run a verification suite")
    p_verify.add_argument("suite", choices=sorted(_SUITES) + ["all"])

    p_table = sub.add_parser("table", help="regenerate reference tables")
    p_table.add_argument("which", choices=["omega", "cusp-volume", "R-series"])

    p_count = sub.add_parser("count", help="count rational points up to height T")
    p_count.add_argument("-n", type=int, required=True)
    p_count.add_argument("-d", type=int, default=1)
    p_count.add_argument("-T", type=float, required=True)
    p_count.add_argument("--smoothed", action="store_true")
    return parser


_COMMANDS = {
    "eval": cmd_eval,
    "verify": cmd_verify,
    "table": cmd_table,
    "count": cmd_count,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors already; normalize other codes
        return USAGE_ERROR if exc.code not in (0,) else 0
    try:
        report, code = _COMMANDS[args.command](args)
    except (ValueError, arith.BudgetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    if args.json:
        print(report.to_json())
    elif args.csv:
        print(report.to_csv())
    else:
        print(report.to_text())
    return code


if __name__ == "__main__":
    sys.exit(main())
