"""Command line front end: sweeps over ``ak``, method comparison, presets.

Configuration is INI-style with four sections::

    [potential]
    family = coulomb-like          ; zero | coulomb-like | square-barrier | tabulated
    g_over_a = -5                  ; or g = ...
    z = star                       ; or a complex literal such as 5-1i
    a = 1

    [sweep]
    ak = 5:60:56                   ; min:max:count
    spacing = linear               ; linear | log
    vary = k                       ; k (a fixed) | a (k fixed, needs k = ...)

    [methods]
    methods = exact, pert0         ; subset of exact, ode, pert0, pert1
    tol = 1e-10
    max_gap = 0.05                 ; compare fails (exit 3) above this
    form = corrected               ; corrected | literal (first order without -i)
    epsilon = 0.5                  ; admissibility margin for the cut

    [output]
    path = out.csv
    format = csv
    plot = out.gp                  ; optional gnuplot script

Exit codes: 0 ok, 1 usage or configuration error, 2 numerical failure,
3 tolerance exceeded in ``compare``.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import itertools
import json
import math
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ScatteringError
from .evolution import ScatteringAmplitudes, transfer_numeric
from .perturb import coefficient_gaps, loglog_slope, script_amplitudes, transfer_plus_perturbative
from .potential import CoulombLike, Potential, SquareBarrier, ZeroPotential, load_tabulated_csv
from .decomp import decompose
from .solvable import ExactCoulombModel, exact_transfer, star_constants

__all__ = [
    "ConfigError",
    "SweepConfig",
    "SweepRow",
    "SweepResult",
    "CSV_COLUMNS",
    "METHODS",
    "PRESETS",
    "parse_complex",
    "parse_config",
    "run_sweep",
    "compare",
    "rows_to_csv",
    "gnuplot_script",
    "selftest",
    "main",
]

CSV_COLUMNS = ("ak", "method", "re_rl", "im_rl", "re_rr", "im_rr", "re_t", "im_t",
               "abs2_rl", "abs2_rr", "abs2_t", "det_drift", "err_est", "error")
METHODS = ("exact", "ode", "pert0", "pert1")
FAMILIES = ("zero", "coulomb-like", "square-barrier", "tabulated")
ODE_DRIFT_LIMIT = 1e-8
# preferred reference when two methods are compared
_REFERENCE_RANK = {"exact": 0, "ode": 1, "pert1": 2, "pert0": 3}

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_TOLERANCE = 0, 1, 2, 3

_ALLOWED = {
    "potential": {"family", "g", "g_over_a", "z", "a", "height", "lo", "hi", "path", "decay_alpha"},
    "sweep": {"ak", "spacing", "vary", "k"},
    "methods": {"methods", "tol", "max_gap", "form", "epsilon"},
    "output": {"path", "format", "plot"},
}


class ConfigError(ValueError):
    """Invalid configuration; ``errors`` lists every problem found."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class SweepConfig:
    family: str
    ak: tuple[float, ...]
    methods: tuple[str, ...]
    a: float = 1.0
    g: float = 0.0
    z: complex | None = None  # None means z = z_star(g, k)
    height: complex = 0j
    lo: float = 0.0
    hi: float = 1.0
    path: str | None = None
    decay_alpha: float = math.inf
    vary: str = "k"
    k: float | None = None
    tol: float = 1e-10
    max_gap: float | None = None
    form: str = "corrected"
    epsilon: float = 0.5
    output: str | None = None
    fmt: str = "csv"
    plot: str | None = None

    def point(self, ak: float) -> tuple[float, float]:
        """``(a, k)`` at one grid value."""
        if self.vary == "a":
            return ak / self.k, self.k
        return self.a, ak / self.a


@dataclass(frozen=True)
class SweepRow:
    ak: float
    method: str
    r_left: complex = complex("nan")
    r_right: complex = complex("nan")
    t: complex = complex("nan")
    det_drift: float = math.nan
    err_est: float = math.nan
    error: str = ""

    @property
    def abs2(self) -> tuple[float, float, float]:
        return abs(self.r_left) ** 2, abs(self.r_right) ** 2, abs(self.t) ** 2

    @property
    def ok(self) -> bool:
        return not self.error

    def amplitudes(self) -> ScatteringAmplitudes:
        return ScatteringAmplitudes(self.r_left, self.r_right, self.t)


@dataclass
class SweepResult:
    config: SweepConfig
    rows: list[SweepRow]
    summary: dict = field(default_factory=dict)

    def by_method(self, method: str) -> list[SweepRow]:
        return [r for r in self.rows if r.method == method]

    @property
    def failed(self) -> bool:
        return any(not r.ok for r in self.rows)


# -- parsing -------------------------------------------------------------------

_COMPLEX_RE = re.compile(r"^[+-]?[0-9.eE+-]*[ij]?$")


def parse_complex(text: str) -> complex:
    """Parse ``5``, ``-1.5e-3``, ``5-1i``, ``2i`` or ``5-1j``."""
    s = text.strip().replace(" ", "")
    if not s or not _COMPLEX_RE.match(s):
        raise ValueError(f"not a number: {text!r}")
    if s.endswith("i"):
        s = s[:-1] + "j"
    if s.endswith("j") and s[:-1] in ("", "+", "-"):
        s = s[:-1] + "1j"
    return complex(s)


def _real(text: str) -> float:
    z = parse_complex(text)
    if z.imag != 0:
        raise ValueError(f"expected a real number: {text!r}")
    return z.real


def _grid(text: str, spacing: str) -> tuple[float, ...]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError("ak must be min:max:count")
    lo, hi = _real(parts[0]), _real(parts[1])
    count = int(parts[2])
    if count < 1:
        raise ValueError("ak count must be at least 1")
    if not (lo > 0 and hi >= lo) or (count > 1 and hi == lo):
        raise ValueError("ak grid must be positive and strictly increasing")
    if count == 1:
        return (lo,)
    if spacing == "log":
        pts = np.geomspace(lo, hi, count)
    else:
        pts = np.linspace(lo, hi, count)
    return tuple(float(x) for x in pts)


def parse_config(text: str) -> SweepConfig:
    """Parse and validate a configuration; raise :class:`ConfigError` with all problems."""
    errors: list[str] = []
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([f"malformed configuration: {exc}"]) from exc
    for sec in cp.sections():
        if sec not in _ALLOWED:
            errors.append(f"unknown section [{sec}]")
            continue
        for key in cp[sec]:
            if key not in _ALLOWED[sec]:
                errors.append(f"unknown key {key!r} in [{sec}]")

    def get(sec: str, key: str, default=None):
        if cp.has_section(sec) and key in cp[sec]:
            return cp[sec][key].strip()
        return default

    def num(sec: str, key: str, conv, default=None, required=False):
        raw = get(sec, key)
        if raw is None:
            if required:
                errors.append(f"missing required key {key!r} in [{sec}]")
            return default
        try:
            return conv(raw)
        except (ValueError, TypeError):
            errors.append(f"non-numeric value for {key!r} in [{sec}]: {raw!r}")
            return default

    kw: dict = {}
    family = get("potential", "family")
    if family is None:
        errors.append("missing required key 'family' in [potential]")
    elif family not in FAMILIES:
        errors.append(f"unknown family {family!r}")
    kw["family"] = family or "zero"
    a = num("potential", "a", _real, 1.0)
    if a is not None and not a > 0:
        errors.append("a must be positive")
    kw["a"] = a

    if family == "coulomb-like":
        g, gbar = get("potential", "g"), get("potential", "g_over_a")
        if g is not None and gbar is not None:
            errors.append("give either g or g_over_a, not both")
        elif g is None and gbar is None:
            errors.append("missing required key 'g' or 'g_over_a' in [potential]")
        elif g is not None:
            kw["g"] = num("potential", "g", _real, 0.0)
        else:
            val = num("potential", "g_over_a", _real, 0.0)
            kw["g"] = val / a if a and a > 0 else 0.0
        zraw = get("potential", "z", "0")
        if zraw.lower() == "star":
            kw["z"] = None
        else:
            kw["z"] = num("potential", "z", parse_complex, 0j)
    else:
        zraw = get("potential", "z")
        if zraw is not None and zraw.lower() == "star":
            errors.append("z = star is only defined for the coulomb-like family")
    if family == "square-barrier":
        kw["height"] = num("potential", "height", parse_complex, 0j, required=True)
        kw["lo"] = num("potential", "lo", _real, 0.0, required=True)
        kw["hi"] = num("potential", "hi", _real, 1.0, required=True)
        if kw["lo"] is not None and kw["hi"] is not None and not kw["lo"] < kw["hi"]:
            errors.append("square barrier needs lo < hi")
    if family == "tabulated":
        path = get("potential", "path")
        if path is None:
            errors.append("missing required key 'path' in [potential]")
        kw["path"] = path
        kw["decay_alpha"] = num("potential", "decay_alpha", _real, math.inf)

    spacing = get("sweep", "spacing", "linear")
    if spacing not in ("linear", "log"):
        errors.append(f"spacing must be linear or log, not {spacing!r}")
        spacing = "linear"
    ak_raw = get("sweep", "ak")
    if ak_raw is None:
        errors.append("missing required key 'ak' in [sweep]")
    else:
        try:
            kw["ak"] = _grid(ak_raw, spacing)
        except ValueError as exc:
            errors.append(f"grid violation: {exc}")
    vary = get("sweep", "vary", "k")
    if vary not in ("k", "a"):
        errors.append(f"vary must be k or a, not {vary!r}")
    kw["vary"] = vary
    kw["k"] = num("sweep", "k", _real, None, required=(vary == "a"))
    if kw["k"] is not None and not kw["k"] > 0:
        errors.append("k must be positive")

    mraw = get("methods", "methods")
    if mraw is None:
        errors.append("missing required key 'methods' in [methods]")
        methods: list[str] = []
    else:
        methods = [m.strip() for m in mraw.split(",") if m.strip()]
        if not methods:
            errors.append("at least one method is required")
        for m in methods:
            if m not in METHODS:
                errors.append(f"unknown method {m!r}")
        if len(set(methods)) != len(methods):
            errors.append("duplicate method")
    kw["methods"] = tuple(m for m in METHODS if m in methods)
    if "exact" in methods and family not in (None, "zero", "coulomb-like"):
        errors.append("method exact needs the zero or coulomb-like family")
    if "exact" in methods and family == "coulomb-like" and kw.get("z", 0j) is not None:
        errors.append("method exact needs z = star")
    kw["tol"] = num("methods", "tol", _real, 1e-10)
    if kw["tol"] is not None and not kw["tol"] > 0:
        errors.append("tol must be positive")
    kw["max_gap"] = num("methods", "max_gap", _real, None)
    if kw["max_gap"] is not None and not kw["max_gap"] > 0:
        errors.append("max_gap must be positive")
    form = get("methods", "form", "corrected")
    if form not in ("corrected", "literal"):
        errors.append(f"form must be corrected or literal, not {form!r}")
    kw["form"] = form
    kw["epsilon"] = num("methods", "epsilon", _real, 0.5)

    kw["output"] = get("output", "path")
    kw["fmt"] = get("output", "format", "csv")
    if kw["fmt"] != "csv":
        errors.append(f"unsupported output format {kw['fmt']!r}")
    kw["plot"] = get("output", "plot")

    if errors:
        raise ConfigError(errors)
    return SweepConfig(**kw)


# -- evaluation ----------------------------------------------------------------

def _potential(cfg: SweepConfig, a: float, k: float) -> Potential:
    if cfg.family == "zero":
        return ZeroPotential()
    if cfg.family == "coulomb-like":
        z = star_constants(cfg.g, k)[1] if cfg.z is None else cfg.z
        return CoulombLike(cfg.g, z, a)
    if cfg.family == "square-barrier":
        return SquareBarrier(cfg.height, cfg.lo, cfg.hi)
    return load_tabulated_csv(cfg.path, cfg.decay_alpha)


def _row(ak: float, method: str, amp: ScatteringAmplitudes, drift: float, err: float,
         error: str = "") -> SweepRow:
    return SweepRow(ak, method, complex(amp.r_left), complex(amp.r_right), complex(amp.t),
                    float(drift), float(err), error)


def evaluate_point(cfg: SweepConfig, ak: float, method: str) -> SweepRow:
    """One ``(ak, method)`` cell; numerical failures end up in the ``error`` field."""
    try:
        a, k = cfg.point(ak)
        if cfg.family == "zero" and method in ("exact", "pert0", "pert1"):
            return _row(ak, method, ScatteringAmplitudes(0j, 0j, 1 + 0j), 0.0, 0.0)
        model = _potential(cfg, a, k)
        if method == "exact":
            em = ExactCoulombModel(cfg.g, a, k)
            return _row(ak, method, em.amplitudes, exact_transfer(em).det_drift, 0.0)
        if method == "ode":
            tm = transfer_numeric(model, k, tol=cfg.tol)
            drift = tm.det_drift
            note = "" if drift <= ODE_DRIFT_LIMIT else f"det drift {drift:.3e} exceeds {ODE_DRIFT_LIMIT:g}"
            return _row(ak, method, script_amplitudes(tm), drift, tm.err_est, note)
        order = 0 if method == "pert0" else 1
        dec = decompose(model, k, a, epsilon=cfg.epsilon)
        res = transfer_plus_perturbative(dec, order, form=cfg.form, tol=cfg.tol)
        err = math.nan if order == 0 else res.second_order_gap
        return _row(ak, method, script_amplitudes(res.M_approx), res.M_approx.det_drift, err)
    except (ScatteringError, ValueError, ArithmeticError, OSError) as exc:
        msg = f"{type(exc).__name__}: {exc}".replace("\n", " ")
        return SweepRow(ak, method, error=msg)


def _evaluate_task(task: tuple[SweepConfig, float, str]) -> SweepRow:
    return evaluate_point(*task)


def _pair_gaps(rows: list[SweepRow], m1: str, m2: str) -> list[tuple[float, np.ndarray]]:
    """Relative coefficient gaps of ``m1`` against the reference ``m2`` per ``ak``."""
    ref = {r.ak: r for r in rows if r.method == m2 and r.ok}
    out = []
    for r in rows:
        if r.method == m1 and r.ok and r.ak in ref:
            out.append((r.ak, coefficient_gaps(r.amplitudes(), ref[r.ak].amplitudes())))
    return out


def _ordered_pair(m1: str, m2: str) -> tuple[str, str]:
    """``(tested, reference)``; the more trusted method is the reference."""
    return (m1, m2) if _REFERENCE_RANK[m1] > _REFERENCE_RANK[m2] else (m2, m1)


def summarize(rows: list[SweepRow], methods: tuple[str, ...]) -> dict:
    """Aggregate gaps and log-log slopes for every pair of methods."""
    summary: dict = {"version": __version__, "points": len({r.ak for r in rows}),
                     "failures": sum(not r.ok for r in rows), "pairs": []}
    for m1, m2 in itertools.combinations(methods, 2):
        tested, ref = _ordered_pair(m1, m2)
        gaps = _pair_gaps(rows, tested, ref)
        entry: dict = {"method": tested, "reference": ref, "count": len(gaps)}
        if gaps:
            ak = np.array([g[0] for g in gaps])
            G = np.array([g[1] for g in gaps])
            worst = G.max(axis=1)
            entry["max_gap"] = float(worst.max())
            entry["max_gap_by_coefficient"] = dict(zip(("abs2_rl", "abs2_rr", "abs2_t"),
                                                       (float(v) for v in G.max(axis=0))))
            entry["per_ak"] = [[float(x), float(y)] for x, y in zip(ak, worst)]
            pos = worst > 0
            if np.count_nonzero(pos) >= 2 and np.unique(ak[pos]).size >= 2:
                fit = loglog_slope(ak[pos], worst[pos])
                entry["slope"] = {"slope": fit.slope, "intercept": fit.intercept,
                                  "stderr": fit.stderr, "ci95": [fit.ci_low, fit.ci_high], "n": fit.n}
        summary["pairs"].append(entry)
    return summary


def run_sweep(cfg: SweepConfig, threads: int = 1) -> SweepResult:
    """Evaluate every ``(ak, method)`` pair; rows come back in ``ak``-then-method order."""
    tasks = [(cfg, ak, m) for ak in cfg.ak for m in cfg.methods]
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_evaluate_task, tasks, chunksize=max(1, len(tasks) // (4 * threads))))
    else:
        rows = [_evaluate_task(t) for t in tasks]
    return SweepResult(cfg, rows, summarize(rows, cfg.methods))


def compare(cfg: SweepConfig, threads: int = 1, max_gap: float | None = None) -> tuple[SweepResult, int]:
    """Sweep and check pairwise gaps; returns the result and an exit status."""
    if len(cfg.methods) < 2:
        raise ConfigError(["compare needs at least two methods"])
    res = run_sweep(cfg, threads)
    limit = cfg.max_gap if max_gap is None else max_gap
    exceeded = []
    if limit is not None:
        for p in res.summary["pairs"]:
            if p.get("max_gap", 0.0) > limit:
                exceeded.append(f"{p['method']} vs {p['reference']}: {p['max_gap']:.3e} > {limit:g}")
    res.summary["tolerance"] = limit
    res.summary["exceeded"] = exceeded
    if res.failed:
        return res, EXIT_NUMERIC
    return res, EXIT_TOLERANCE if exceeded else EXIT_OK


# -- output --------------------------------------------------------------------

def _fmt(x: float) -> str:
    return "%.17g" % x


def rows_to_csv(rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        a2 = r.abs2
        w.writerow([_fmt(r.ak), r.method,
                    _fmt(r.r_left.real), _fmt(r.r_left.imag),
                    _fmt(r.r_right.real), _fmt(r.r_right.imag),
                    _fmt(r.t.real), _fmt(r.t.imag),
                    _fmt(a2[0]), _fmt(a2[1]), _fmt(a2[2]),
                    _fmt(r.det_drift), _fmt(r.err_est), r.error])
    return buf.getvalue()


def read_csv(text: str) -> list[SweepRow]:
    """Inverse of :func:`rows_to_csv` (amplitudes only)."""
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        rows.append(SweepRow(float(rec["ak"]), rec["method"],
                             complex(float(rec["re_rl"]), float(rec["im_rl"])),
                             complex(float(rec["re_rr"]), float(rec["im_rr"])),
                             complex(float(rec["re_t"]), float(rec["im_t"])),
                             float(rec["det_drift"]), float(rec["err_est"]), rec["error"]))
    return rows


def gnuplot_script(csv_path: str, methods: tuple[str, ...]) -> str:
    """Gnuplot commands plotting the three coefficients against ``ak`` per method."""
    lines = ["set datafile separator ','", "set key autotitle columnhead",
             "set xlabel 'ak'", "set multiplot layout 3,1"]
    for col, label in ((9, "|R^l|^2"), (10, "|R^r|^2"), (11, "|T|^2")):
        lines.append(f"set ylabel '{label}'")
        plots = [f"'{csv_path}' using 1:(strcol(2) eq '{m}' ? ${col} : 1/0) with linespoints title '{m}'"
                 for m in methods]
        lines.append("plot " + ", \\\n     ".join(plots))
    lines.append("unset multiplot")
    return "\n".join(lines) + "\n"


# -- presets and selftest ------------------------------------------------------

PRESETS = {
    "fig1": """\
[potential]
family = coulomb-like
g_over_a = -1
z = 5-1i
a = 1
[sweep]
ak = 5:40:36
[methods]
methods = pert0, pert1
""",
    "fig2": """\
[potential]
family = coulomb-like
g_over_a = -5
z = star
a = 1
[sweep]
ak = 5:60:56
[methods]
methods = exact, pert0
""",
    "zero": """\
[potential]
family = zero
[sweep]
ak = 5:60:12
[methods]
methods = exact, ode, pert0, pert1
""",
}


def selftest(verbose: bool = True) -> bool:
    """Quick invariant checks that need nothing beyond the installed package."""
    from .evolution import Convention, hamiltonian_breve
    from .mat2 import I2, K, pseudo_adjoint
    from .phase import phase_profile
    from .solvable import I0_representations

    checks: list[tuple[str, bool]] = []
    z = transfer_numeric(ZeroPotential(), 3.0)
    checks.append(("free propagation is the identity", bool(np.allclose(z.matrix, I2, atol=1e-12))))
    checks.append(("K is nilpotent", bool(np.all(K @ K == 0))))
    sq = SquareBarrier(1.0, 0.0, 1.0)
    tm = transfer_numeric(sq, 2.0, Convention.STANDARD)
    checks.append(("square barrier is unimodular", tm.det_drift < 1e-8))
    cl = CoulombLike(-1.0, 5.0, 1.0)
    prof = phase_profile(cl, 4.0)
    H = hamiltonian_breve(cl, 4.0, prof, 2.5)
    checks.append(("real potential gives a pseudo-Hermitian Hamiltonian",
                   bool(np.allclose(pseudo_adjoint(H), H, atol=1e-14))))
    em = ExactCoulombModel(-5.0, 1.0, 5.0)
    t2 = em.amplitudes.abs2[2]
    checks.append(("exact |T|^2 at ak = 5", abs(t2 - 1 / 1.05 ** 2) < 1e-12))
    r1, r2 = I0_representations(em)
    checks.append(("two routes to I0 agree", abs(r1 - r2) <= 1e-9 * abs(r1)))
    ode = script_amplitudes(transfer_numeric(em.potential, em.k))
    gaps = coefficient_gaps(ode, em.amplitudes)
    checks.append(("ODE reproduces the exact amplitudes", float(gaps.max()) < 1e-6))
    if verbose:
        for name, ok in checks:
            print(f"{'PASS' if ok else 'FAIL'}  {name}")
    return all(ok for _, ok in checks)


# -- entry point ---------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lrtm", description="Transfer matrices of long-range potentials.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None,
                        help="tolerance on pairwise relative gaps (overrides max_gap)")
    common.add_argument("--threads", type=int, default=1, help="worker processes for the sweep")
    common.add_argument("--format", choices=["csv"], default="csv")
    common.add_argument("--out", default=None, help="CSV output path (default: [output] path or stdout)")
    common.add_argument("--plot", default=None, help="write a gnuplot script here")
    sub = p.add_subparsers(dest="verb", required=True)
    s = sub.add_parser("sweep", parents=[common], help="run a parameter sweep")
    s.add_argument("config")
    c = sub.add_parser("compare", parents=[common], help="sweep and check pairwise method gaps")
    c.add_argument("config")
    pr = sub.add_parser("preset", parents=[common], help="run a built-in sweep")
    pr.add_argument("name", choices=sorted(PRESETS))
    pr.add_argument("--compare", action="store_true", help="also apply the gap tolerance")
    sub.add_parser("selftest", help="run the built-in invariant checks")
    return p


def _emit(res: SweepResult, out: str | None, plot: str | None) -> None:
    text = rows_to_csv(res.rows)
    report = json.dumps(res.summary, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text, encoding="utf-8")
        print(report)
    else:
        sys.stdout.write(text)
        print(report, file=sys.stderr)
    if plot:
        Path(plot).write_text(gnuplot_script(out or "sweep.csv", res.config.methods), encoding="utf-8")


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if args.verb == "selftest":
        return EXIT_OK if selftest() else EXIT_NUMERIC
    if args.threads < 1 or (args.tol is not None and not args.tol > 0):
        print("error: --threads must be >= 1 and --tol positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.verb == "preset":
            text = PRESETS[args.name]
        else:
            text = Path(args.config).read_text(encoding="utf-8")
        cfg = parse_config(text)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return EXIT_USAGE
    out = args.out or cfg.output
    plot = args.plot or cfg.plot
    if args.verb == "compare" or (args.verb == "preset" and args.compare):
        try:
            res, status = compare(cfg, args.threads, args.tol)
        except ConfigError as exc:
            for e in exc.errors:
                print(f"config error: {e}", file=sys.stderr)
            return EXIT_USAGE
        _emit(res, out, plot)
        for line in res.summary["exceeded"]:
            print(f"tolerance exceeded: {line}", file=sys.stderr)
        return status
    res = run_sweep(cfg, args.threads)
    _emit(res, out, plot)
    return EXIT_NUMERIC if res.failed else EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
