"""Command-line interface.

Subcommands write CSV (or JSON) with 12 significant digits.  Module errors exit with
status 1 and a JSON error record on stderr; invalid configurations exit with status 2.
"""
from __future__ import annotations

import argparse
import dataclasses
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import constants, phase, resonances, scatdet, uniform
from .modes import Funnel, Model

RADIUS_BUDGET = 60.0
XI_BUDGET = 200.0


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    model: str | None = None
    ell: float = 2 * math.pi
    r0: float = 0.0
    b: float = 0.0
    eta: float = 0.5
    radius: float | None = None
    t_max: float | None = None
    xi_max: float | None = None
    abs_tol: float = 1e-9
    rel_tol: float = 1e-9
    grid_step: float = 1.0
    step: float = 0.25
    n_points: int = 50
    a_values: list = field(default_factory=list)
    n_theta: int = 16
    mc_samples: int = 0
    figure_id: str | None = None
    suite: str = "quick"
    output_path: str | None = None
    format: str = "csv"

    def validate(self):
        for name in ("abs_tol", "rel_tol", "grid_step", "step", "eta"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if not self.ell > 0:
            raise ConfigError("ell must be positive")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        for name in ("radius", "t_max"):
            v = getattr(self, name)
            if v is not None and not 0 < v <= RADIUS_BUDGET:
                raise ConfigError(f"{name} must lie in (0, {RADIUS_BUDGET}]")
        if self.xi_max is not None and not 0 <= self.xi_max <= XI_BUDGET:
            raise ConfigError(f"xi_max must lie in [0, {XI_BUDGET}]")
        if self.eta > 1:
            raise ConfigError("eta must not exceed 1")


# ---------------------------------------------------------------- output

def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    return str(v)


def _round(v):
    if isinstance(v, (float, np.floating)):
        return float(f"{float(v):.12g}")
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return int(v)
    return v


def emit(cfg: RunConfig, header, rows):
    if cfg.format == "json":
        text = json.dumps([{h: _round(v) for h, v in zip(header, row)} for row in rows], indent=1) + "\n"
    else:
        buf = io.StringIO()
        buf.write(",".join(header) + "\n")
        for row in rows:
            buf.write(",".join(fmt(v) for v in row) + "\n")
        text = buf.getvalue()
    if cfg.output_path:
        with open(cfg.output_path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- commands

def _funnel(cfg: RunConfig, model: str) -> Funnel:
    if model == "truncated" and not cfg.r0 > 0:
        raise ConfigError("truncated model needs r0 > 0")
    if model == "extended" and not cfg.r0 < 0:
        raise ConfigError("extended model needs r0 < 0")
    return Funnel(cfg.ell, cfg.r0)


def _resonance_set(cfg: RunConfig, radius: float):
    model = cfg.model or "truncated"
    if model == "funnel":
        return resonances.background_lattice(Model.standard_funnel, radius, cfg.ell)
    if model == "plane":
        return resonances.background_lattice(Model.hyperbolic_plane, radius)
    if model in ("truncated", "extended"):
        return resonances.resonance_set(_funnel(cfg, model), radius, grid_step=cfg.grid_step)
    raise ConfigError(f"unknown model {model}")


def _resonance_rows(rset):
    entries = sorted(rset.entries, key=lambda e: (round(abs(e.s - 0.5), 12), e.s.imag, e.s.real, e.mode))
    return [(e.s.real, e.s.imag, e.multiplicity, e.mode) for e in entries]


def cmd_resonances(cfg: RunConfig):
    if cfg.radius is None:
        raise ConfigError("--radius is required")
    emit(cfg, ("re", "im", "multiplicity", "mode"), _resonance_rows(_resonance_set(cfg, cfg.radius)))


def cmd_counts(cfg: RunConfig):
    if cfg.t_max is None:
        raise ConfigError("--t-max is required")
    cf = resonances.counting_functions(_resonance_set(cfg, cfg.t_max))
    ts = np.linspace(cfg.t_max / cfg.n_points, cfg.t_max, cfg.n_points)
    emit(cfg, ("t", "N", "Ntilde"), [(t, cf.N(t), cf.Ntilde(t)) for t in ts])


def cmd_constant(cfg: RunConfig):
    spec = constants.QuadratureSpec(cfg.abs_tol, cfg.rel_tol)
    model = cfg.model or "funnel"
    rows = []
    if model == "funnel":
        v, e = constants.A_funnel_with_error(cfg.ell, cfg.r0, spec)
        rows.append(("A_funnel", v, e))
        if cfg.mc_samples:
            m, se = constants.A_funnel_monte_carlo(cfg.ell, cfg.r0, cfg.mc_samples)
            rows.append(("A_funnel_monte_carlo", m, se))
    elif model == "obstacle":
        v, e = constants.A_obstacle_with_error(cfg.r0, spec)
        rows.append(("A_obstacle", v, e))
        if cfg.mc_samples:
            m, se = constants.A_obstacle_monte_carlo(cfg.r0, cfg.mc_samples)
            rows.append(("A_obstacle_monte_carlo", m, se))
    elif model == "bfunnel":
        v, e = constants.B_end_with_error(constants.EndDescriptor("funnel", cfg.ell, cfg.r0), spec)
        rows.append(("B_funnel", v, e))
    elif model == "bplanar":
        v, e = constants.B_end_with_error(constants.EndDescriptor("planar", b=cfg.r0), spec)
        rows.append(("B_planar", v, e))
    else:
        raise ConfigError(f"unknown constant model {model}")
    emit(cfg, ("name", "value", "error_estimate"), rows)


def cmd_detsamples(cfg: RunConfig):
    fun = _funnel(cfg, "truncated" if cfg.r0 > 0 else "extended")
    a_vals = cfg.a_values or [cfg.radius or 10.0]
    # panel midpoints: theta = 0 is a degenerate point of the mode elements when a is an integer
    thetas = (np.arange(cfg.n_theta) + 0.5) * (np.pi / 2) / cfg.n_theta
    rows = []
    for a in a_vals:
        for smp in scatdet.det_samples(a, thetas, fun):
            rows.append((smp.a, smp.theta, smp.log_abs_tau))
    emit(cfg, ("a", "theta", "log_abs_tau"), rows)


def cmd_phase(cfg: RunConfig):
    if cfg.xi_max is None:
        raise ConfigError("--xi-max is required")
    fun = _funnel(cfg, "truncated" if cfg.r0 > 0 else "extended")
    samples = scatdet.sigma_phase(cfg.xi_max, fun, step=cfg.step)
    emit(cfg, ("xi", "sigma"), [(p.xi, p.sigma) for p in samples])


def cmd_figure(cfg: RunConfig):
    fid = cfg.figure_id
    if fid == "resplot":
        # extended funnel resonances (default ell = 2 pi, r0 = -1)
        r0 = cfg.r0 if cfg.r0 < 0 else -1.0
        rset = resonances.resonance_set(Funnel(cfg.ell, r0), cfg.radius or 10.0, grid_step=cfg.grid_step)
        emit(cfg, ("re", "im", "multiplicity", "mode"), _resonance_rows(rset))
    elif fid == "aplot":
        spec = constants.QuadratureSpec(cfg.abs_tol, cfg.rel_tol)
        rows = []
        for r0 in np.linspace(-2.0, 2.0, cfg.n_points if cfg.n_points <= 81 else 81):
            v, e = constants.A_funnel_with_error(cfg.ell, float(r0), spec)
            rows.append((r0, v, e))
        emit(cfg, ("r0", "A_funnel", "error_estimate"), rows)
    elif fid == "nplot":
        r0 = cfg.r0 if cfg.r0 > 0 else 1.0
        t_max = cfg.t_max or 25.0
        cf = resonances.counting_functions(resonances.resonance_set(Funnel(cfg.ell, r0), t_max))
        A = constants.A_funnel(cfg.ell, r0)
        ts = np.linspace(t_max / cfg.n_points, t_max, cfg.n_points)
        emit(cfg, ("t", "N", "N_over_t2", "A_funnel"), [(t, cf.N(t), cf.N(t) / t ** 2, A) for t in ts])
    elif fid == "phicurve":
        r0 = cfg.r0 if cfg.r0 > 0 else 1.0
        k = 7
        fun = Funnel(cfg.ell, r0)
        rows = []
        for th in np.linspace(0, np.pi / 2, cfg.n_points + 1)[:-1]:
            rho = phase.zero_curve(th, cfg.ell, r0)
            if math.isfinite(rho):
                # Re phi((1/2 - s)/k) = 0 with (1/2 - s)/k = rho e^{i theta}, and its conjugate
                for sgn in (1, -1):
                    s = 0.5 - k * rho * np.exp(1j * sgn * th)
                    rows.append(("curve", s.real, s.imag))
        region = resonances.SearchRegion(0.5 - (cfg.radius or 20.0), 0.5, 0.0, cfg.radius or 20.0)
        for e in resonances.find_mode_zeros(fun, k, region):
            for w in sorted({e.s, e.s.conjugate()}, key=lambda w: w.imag):
                rows.append(("zero", w.real, w.imag))
        emit(cfg, ("kind", "re", "im"), rows)
    else:
        raise ConfigError("figure --id must be one of resplot, aplot, nplot, phicurve")


# ---------------------------------------------------------------- verify

def _check(name, fn):
    t0 = time.perf_counter()
    try:
        ok, value = fn()
        rec = {"name": name, "pass": bool(ok), "value": _round(value)}
    except Exception as exc:  # reported, not raised: the suite lists every invariant
        rec = {"name": name, "pass": False, "error": f"{type(exc).__name__}: {exc}"}
    rec["seconds"] = round(time.perf_counter() - t0, 3)
    return rec


def _suite(which: str):
    from . import modes, specfun
    f1 = Funnel(2 * math.pi, 1.0)
    fe = Funnel(2 * math.pi, -1.0)
    rng = np.random.default_rng(7)
    checks = []

    def wronskian():
        s = rng.uniform(-3, 4, 20) + 1j * rng.uniform(-6, 6, 20)
        k = rng.integers(0, 6, 20)
        r = rng.uniform(0, 3, 20)
        dev = 0.0
        for si, ki, ri in zip(s, k, r):
            b = modes.mode_basis(modes.ModeContext(int(ki), complex(si)), Funnel(2 * math.pi), float(ri))
            # relative to the size of the two products, which cancel when the solutions are large
            size = math.cosh(ri) * (abs(b.w_plus * b.dw_minus) + abs(b.dw_plus * b.w_minus))
            dev = max(dev, abs(math.cosh(ri) * b.wronskian() - 2 / math.pi) / max(1.0, size))
        return dev <= 1e-12, dev

    def log_gamma_oracle():
        import mpmath as mp
        z = rng.uniform(-20, 20, 40) + 1j * rng.uniform(-30, 30, 40)
        got = specfun.log_gamma(z)
        dev = max(abs(complex(got[i]) - complex(mp.loggamma(complex(z[i])))) for i in range(len(z)))
        return dev <= 1e-12, dev

    def phase_identity():
        a = rng.uniform(0.05, 5, 50) * np.exp(1j * rng.uniform(0, np.pi / 2, 50))
        r = rng.uniform(-3, 3, 50)
        dev = float(np.max(np.abs(phase.I_arrays(a, 2 * math.pi, r) - 2 * phase.phi_arrays(a, 1.0, r).real)))
        return dev <= 1e-12, dev

    def unimodular():
        xi = rng.uniform(0.1, 20, 10)
        dev = 0.0
        for k in range(4):
            s = 0.5 + 1j * xi
            for val in (modes.s_funnel_arrays(s, k, 1.0), modes.s_truncated_arrays(s, k, 1.0, 1.0),
                        modes.s_extended_arrays(s, k, 1.0, -1.0), modes.s_plane(complex(s[0]), k).value):
                dev = max(dev, float(np.max(np.abs(np.abs(val) - 1))))
        return dev <= 1e-9, dev

    def standard_constant():
        v = constants.A_funnel(2 * math.pi, 0.0)
        return abs(v - math.pi / 2) <= 1e-4, v

    def lattice_weyl():
        cf = resonances.counting_functions(resonances.background_lattice(Model.standard_funnel, 200, 2 * math.pi))
        v = cf.N(200) / 200 ** 2
        return abs(v / (math.pi / 2) - 1) <= 0.05, v

    def critical_log_tau():
        v = max(abs(scatdet.log_tau(0.5 + 1j * x, f1)) for x in (2.0, 9.0, 17.0))
        return v <= 1e-8, v

    def sigma_odd():
        sp = scatdet.sigma_phase(4.0, f1, step=0.5, symmetric=True)
        d = {p.xi: p.sigma for p in sp}
        v = max(abs(d[x] + d[-x]) for x in d)
        return v == 0 and d[0.0] == 0, v

    def zeta_identity():
        a = 1.3 * np.exp(0.7j)
        r = np.linspace(0, 3, 13)
        z = np.array([uniform.liouville_zeta(a, 1.0, x) for x in r])
        v = float(np.max(np.abs(2 / 3 * z ** 1.5 - phase.phi_arrays(a, 1.0, r))))
        return v <= 1e-10, v

    def mode_zero_winding():
        # every zero found must be a zero of the mode function
        zs = resonances.find_mode_zeros(f1, 3, resonances.SearchRegion(-6.5, 0.5, 0.0, 6.0))
        target = resonances.precise_target(f1, 3)
        v = max(float(np.real(target(np.array([e.s]))[0])) for e in zs) if zs else math.inf
        return len(zs) > 0 and v < -20, v

    checks = [("log_gamma_vs_mpmath", log_gamma_oracle), ("wronskian_invariant", wronskian),
              ("phase_identity", phase_identity), ("critical_line_unimodularity", unimodular),
              ("critical_line_log_tau", critical_log_tau), ("sigma_oddness", sigma_odd),
              ("liouville_identity", zeta_identity), ("lattice_weyl_law", lattice_weyl),
              ("mode_zero_search", mode_zero_winding)]
    if which == "all":
        checks.append(("standard_funnel_constant", standard_constant))
    return checks


def cmd_verify(cfg: RunConfig):
    if cfg.suite not in ("quick", "all"):
        raise ConfigError("--suite must be quick or all")
    report = [_check(name, fn) for name, fn in _suite(cfg.suite)]
    ok = all(r["pass"] for r in report)
    text = json.dumps({"suite": cfg.suite, "pass": ok, "checks": report}, indent=1) + "\n"
    if cfg.output_path:
        with open(cfg.output_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if ok else 1


COMMANDS = {"resonances": cmd_resonances, "counts": cmd_counts, "constant": cmd_constant,
            "detsamples": cmd_detsamples, "phase": cmd_phase, "figure": cmd_figure, "verify": cmd_verify}


# ---------------------------------------------------------------- parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _error_record("ConfigError", message, None)
        sys.exit(2)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hypres", description="Resonances and scattering data of hyperbolic funnels.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, model_choices=None):
        if model_choices:
            sp.add_argument("--model", choices=model_choices)
        sp.add_argument("--ell", type=float)
        sp.add_argument("--r0", type=float)
        sp.add_argument("--abs-tol", type=float)
        sp.add_argument("--rel-tol", type=float)
        sp.add_argument("--config", help="JSON file whose keys override RunConfig fields")
        sp.add_argument("--out", dest="output_path")
        sp.add_argument("--format", choices=("csv", "json"))

    sp = sub.add_parser("resonances")
    common(sp, ("truncated", "extended", "funnel", "plane"))
    sp.add_argument("--radius", type=float)
    sp.add_argument("--grid-step", type=float)
    sp = sub.add_parser("counts")
    common(sp, ("truncated", "extended", "funnel", "plane"))
    sp.add_argument("--t-max", type=float)
    sp.add_argument("--n-points", type=int)
    sp.add_argument("--grid-step", type=float)
    sp = sub.add_parser("constant")
    common(sp, ("funnel", "obstacle", "bfunnel", "bplanar"))
    sp.add_argument("--mc-samples", type=int)
    sp = sub.add_parser("detsamples")
    common(sp)
    sp.add_argument("--a", dest="a_values", type=float, nargs="+")
    sp.add_argument("--n-theta", type=int)
    sp = sub.add_parser("phase")
    common(sp)
    sp.add_argument("--xi-max", type=float)
    sp.add_argument("--step", type=float)
    sp = sub.add_parser("figure")
    common(sp)
    sp.add_argument("--id", dest="figure_id", choices=("resplot", "aplot", "nplot", "phicurve"), required=True)
    sp.add_argument("--radius", type=float)
    sp.add_argument("--t-max", type=float)
    sp.add_argument("--n-points", type=int)
    sp.add_argument("--grid-step", type=float)
    sp = sub.add_parser("verify")
    sp.add_argument("--suite", default="quick")
    sp.add_argument("--out", dest="output_path")
    return p


def make_config(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=ns.command)
    names = {f.name for f in dataclasses.fields(RunConfig)}
    if getattr(ns, "config", None):
        try:
            with open(ns.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(data) - names - {"command"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for k, v in data.items():
            if k != "command":
                setattr(cfg, k, v)
    for k, v in vars(ns).items():
        if k in names and k != "command" and v is not None:
            setattr(cfg, k, v)
    cfg.validate()
    return cfg


def _error_record(kind, message, command):
    sys.stderr.write(json.dumps({"error": kind, "message": str(message), "command": command}) + "\n")


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = make_config(ns)
    except (ConfigError, TypeError, ValueError) as exc:
        _error_record("ConfigError", exc, ns.command)
        return 2
    try:
        status = COMMANDS[cfg.command](cfg)
    except ConfigError as exc:
        _error_record("ConfigError", exc, cfg.command)
        return 2
    except Exception as exc:
        _error_record(type(exc).__name__, exc, cfg.command)
        return 1
    return int(status or 0)


if __name__ == "__main__":
    sys.exit(main())
