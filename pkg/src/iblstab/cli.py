"""Batch front end.

    iblstab analyze   --profile P [--out REPORT]
    iblstab trace     --profile P [--eta X] [--k N] --out CURVE.csv
    iblstab eigen     {pdt,ibl,strong,ts} --profile P [--k N] [--nu X] [--gamma X] [--out ROWS.csv]
    iblstab construct --mu a,b --target {pdt,ibl0,ibl:G} --out PREFIX

Exit codes: 0 success, 1 config error, 2 domain or validation error,
3 numeric error, 4 validated absence of a root.
"""

import argparse
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import constructor, roots, shear_flow, viscous, winding
from .errors import ConfigError, DomainError, IblStabError, NoRootError


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


@dataclass
class RunConfig:
    command: str
    profile: str = None
    model: str = None
    eta: float = 1e-3
    k: float = None
    nu: float = None
    gamma: float = None
    alpha: float = None
    mu: complex = None
    target: str = None
    eps: float = 0.02
    tol: float = None
    out: str = None
    extra: dict = field(default_factory=dict)

    def check(self):
        for name in ("eta", "k", "nu", "tol", "eps"):
            v = getattr(self, name)
            if v is not None and not (np.isfinite(v) and v > 0.0):
                raise ConfigError(f"--{name} must be positive")
        if self.gamma is not None and not np.isfinite(self.gamma):
            raise ConfigError("--gamma must be finite")
        return self


def _parse_mu(text):
    try:
        a, b = (float(t) for t in text.split(","))
    except ValueError:
        raise ConfigError(f"--mu expects 'a,b', got {text!r}") from None
    return complex(a, b)


def build_parser():
    p = _Parser(prog="iblstab", description="Instability analysis of boundary-layer shear flows.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, profile=True):
        if profile:
            sp.add_argument("--profile", required=True, metavar="PATH", help="profile config file")
            sp.add_argument("--alpha", type=float, help="inverse_family parameter (overrides the config)")
        sp.add_argument("--out", metavar="PATH")
        sp.add_argument("--tol", type=float)

    a = sub.add_parser("analyze", help="validation report, crossing table and criteria")
    common(a)
    t = sub.add_parser("trace", help="trace the dispersion curve along the contour")
    common(t)
    t.add_argument("--eta", type=float, default=1e-3)
    t.add_argument("--k", type=float, help="trace the viscous dispersion function at this k")
    t.add_argument("--samples", type=int, default=100, help="contour samples per unit length")
    e = sub.add_parser("eigen", help="find an unstable eigenvalue")
    e.add_argument("model", choices=("pdt", "ibl", "strong", "ts"))
    common(e)
    e.add_argument("--k", type=float)
    e.add_argument("--nu", type=float)
    e.add_argument("--gamma", type=float)
    e.add_argument("--eta", type=float, default=1e-3)
    c = sub.add_parser("construct", help="synthesise a profile with a prescribed dispersion value")
    common(c, profile=False)
    c.add_argument("--mu", required=True, type=_parse_mu, metavar="a,b")
    c.add_argument("--target", required=True, metavar="{pdt,ibl0,ibl:G}")
    c.add_argument("--eps", type=float, default=0.02, help="bump half-width")
    c.add_argument("--k", type=float, default=1e4, help="wavenumber of the loop-closure check")
    return p


def parse_args(argv):
    ns = build_parser().parse_args(argv)
    cfg = RunConfig(ns.command)
    for name in ("profile", "model", "eta", "k", "nu", "gamma", "alpha", "mu", "target",
                 "eps", "tol", "out"):
        if hasattr(ns, name):
            setattr(cfg, name, getattr(ns, name))
    if hasattr(ns, "samples"):
        cfg.extra["samples"] = ns.samples
    return cfg.check()


def load_profile(cfg):
    path = cfg.profile
    try:
        text = open(path, encoding="utf-8").read()
    except OSError as exc:
        raise ConfigError(f"cannot read profile config {path}: {exc.strerror}") from None
    conf = shear_flow.parse_config(text)
    if cfg.alpha is not None:
        conf["alpha"] = repr(cfg.alpha)
    return shear_flow.profile_from_config(conf, os.path.dirname(os.path.abspath(path)))


def _write(path, text):
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# --------------------------------------------------------------------------
# commands


def cmd_analyze(cfg):
    prof = load_profile(cfg)
    rep = shear_flow.validate_assumptions(prof)
    lines = [f"kind = {prof.kind}", f"delta_s = {prof.delta_s!r}",
             f"validation = {'pass' if rep.ok else 'fail'}"]
    lines += [f"  {k} = {'true' if v else 'false'}" for k, v in rep.flags.items()]
    lines.append(f"window = {rep.window[0]!r},{rep.window[1]!r}")
    data = winding.crossing_data(prof)
    lines.append(f"inflections = {len(data)}")
    for y, a, c, sign in data:
        lines.append(f"  y = {y!r}, u = {a!r}, chi = {c!r}, sign = {sign}")
    for which in (1, 2, 3):
        r = winding.check_criterion(prof, which, data=data)
        lines.append(f"criterion{which} = {'true' if r.verdict else 'false'}")
        if r.window is not None:
            lines.append(f"  window = {r.window[0]!r},{r.window[1]!r}")
    _write(cfg.out, "\n".join(lines) + "\n")
    return 0 if rep.ok else 2


def cmd_trace(cfg):
    prof = load_profile(cfg)
    if not 0.0 < cfg.eta < 0.5:
        raise DomainError("--eta must lie in (0, 0.5)")
    contour = winding.standard_contour(cfg.eta, cfg.extra.get("samples", 100))
    if cfg.k is None:
        ev, tag = winding.inviscid_evaluator(prof), "inviscid"
    else:
        ev, tag = viscous.viscous_evaluator(prof, cfg.k), f"viscous(k={cfg.k!r})"
    curve = winding.trace_curve(ev, contour, 0.0, tag=tag)
    if cfg.out is None:
        raise ConfigError("missing --out for trace")
    curve.to_csv(cfg.out)
    print(f"{tag}: {len(curve.mu)} samples written to {cfg.out}")
    if curve.flagged:
        print(f"warning: {len(curve.flagged)} edges reached the refinement cap", file=sys.stderr)
    return 0


def _need(cfg, *names):
    for n in names:
        if getattr(cfg, n) is None:
            raise ConfigError(f"missing --{n} for eigen {cfg.model}")


def cmd_eigen(cfg):
    prof = load_profile(cfg)
    m = cfg.model
    if m == "pdt":
        _need(cfg, "k")
        res = roots.find_pdt_eigenvalue(prof, cfg.k, tol=cfg.tol or 1e-8, eta=cfg.eta)
    elif m == "ibl":
        if cfg.nu is None and cfg.gamma is not None and cfg.k is not None:
            if not cfg.gamma > 0.0:
                raise DomainError("ibl needs gamma > 0")
            cfg.nu = 1.0 / (cfg.gamma * cfg.k) ** 2
        _need(cfg, "k", "nu")
        res = roots.find_ibl_eigenvalue(prof, cfg.k, cfg.nu, tol=cfg.tol or 1e-8, eta=cfg.eta)
    elif m == "strong":
        _need(cfg, "k", "nu")
        res = roots.find_strong_instability(prof, cfg.k, cfg.nu, tol=cfg.tol)
    else:
        _need(cfg, "nu")
        res = roots.find_ts_mode(prof.beta, cfg.nu, tol=cfg.tol or 1e-10)
    row = res.csv_row()
    if cfg.out is not None:
        new = not os.path.exists(cfg.out) or os.path.getsize(cfg.out) == 0
        with open(cfg.out, "a", encoding="utf-8", newline="\n") as fh:
            if new:
                fh.write(roots.RootResult.CSV_HEADER + "\n")
            fh.write(row + "\n")
    print(roots.RootResult.CSV_HEADER)
    print(row)
    return 0


def cmd_construct(cfg):
    if cfg.out is None:
        raise ConfigError("missing --out for construct")
    res = constructor.construct_flow(cfg.mu, cfg.target, eps=cfg.eps, tol=cfg.tol or 1e-6)
    prefix = cfg.out
    table, conf, report = prefix + ".csv", prefix + ".cfg", prefix + ".report.txt"
    constructor.export_profile(res, table, conf)
    # loop closure: reload the emitted files and recheck
    emitted = shear_flow.load_config(conf)
    rep = shear_flow.validate_assumptions(emitted)
    from .inviscid import phi_inv_value
    phi_table = phi_inv_value(emitted, res.mu)
    lines = [f"target = {res.target}", f"mu = {res.mu.real!r},{res.mu.imag!r}",
             f"gamma = {res.gamma!r}", f"achieved = {res.achieved.real!r},{res.achieved.imag!r}",
             f"defect = {res.defect!r}", f"delta_s = {res.delta_s!r}",
             f"table_defect = {abs(phi_table - res.gamma)!r}",
             f"table_validation = {'pass' if rep.ok else 'fail'}"]
    if res.target == "pdt":
        try:
            root = roots.find_pdt_eigenvalue(res.profile, cfg.k)
            lines += [f"loop_k = {cfg.k!r}", f"loop_mu = {root.mu.real!r},{root.mu.imag!r}",
                      f"loop_distance = {abs(root.mu - res.mu)!r}"]
        except NoRootError as exc:
            lines.append(f"loop_closure = no root ({exc})")
    _write(report, "\n".join(lines) + "\n")
    print("\n".join(lines))
    return 0 if rep.ok else 2


COMMANDS = {"analyze": cmd_analyze, "trace": cmd_trace, "eigen": cmd_eigen, "construct": cmd_construct}


def main(argv=None):
    try:
        cfg = parse_args(sys.argv[1:] if argv is None else argv)
        return COMMANDS[cfg.command](cfg)
    except NoRootError as exc:
        print(f"no root: {exc}", file=sys.stderr)
        for key, val in exc.info.items():
            print(f"  {key} = {val}", file=sys.stderr)
        return exc.exit_code
    except IblStabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
