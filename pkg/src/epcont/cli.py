"""Command-line interface: ``epcont {potential,boundstates,scattering,evolve,verify}``.

Exit codes: 0 success, 1 verification failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .potential import ModelParams, SingularPotentialError, require_no_singularity

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2

_FLOAT_KEYS = ("alpha", "beta", "q", "k", "k_min", "k_max", "r_max", "t_max")
_INT_KEYS = ("n", "seed")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    alpha: float = 1.0
    beta: float = 3.0
    q: float = 1.0
    k: float | None = None
    k_min: float | None = None
    k_max: float | None = None
    r_max: float | None = None
    t_max: float | None = None
    n: int | None = None
    out: str = "-"
    seed: int = 0
    criteria: str | None = None
    no_oracle: bool = False

    def params(self) -> ModelParams:
        return ModelParams(self.alpha, self.beta, self.q)


# -- config ---------------------------------------------------------------


def read_config_file(path: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment; dashes in keys become underscores."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _coerce(key, value):
    if key in _FLOAT_KEYS:
        x = float(value)
        if not math.isfinite(x):
            raise ConfigError(f"{key} must be finite, got {value!r}")
        return x
    if key in _INT_KEYS:
        return int(value)
    if key == "no_oracle":
        return str(value).lower() in ("1", "true", "yes", "on")
    return value


def build_config(ns: argparse.Namespace) -> RunConfig:
    merged = {}
    if ns.config:
        try:
            merged.update(read_config_file(ns.config))
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
    for key, value in vars(ns).items():
        if key in ("config", "command") or value is None:
            continue
        if key == "no_oracle" and value is False:
            continue
        merged[key] = value  # flags win over the file
    known = set(RunConfig.__dataclass_fields__) - {"command"}
    unknown = set(merged) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    try:
        values = {k: _coerce(k, v) for k, v in merged.items()}
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return RunConfig(command=ns.command, **values)


# -- CSV ------------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    return repr(float(x))  # shortest round-trip decimal


def write_csv(path: str, command: str, params: ModelParams, columns, rows, extra=()):
    lines = [
        f"# epcont {__version__} {command}",
        f"# alpha = {params.alpha!r}, beta = {params.beta!r}, q = {params.q!r}",
        "# units: hbar = 1, 2m = 1, E = k^2",
    ]
    lines += [f"# {e}" for e in extra]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])
    text = "\n".join(lines) + "\n" + buf.getvalue()
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def read_csv(path: str):
    """(comment lines, {column: array}); numeric columns become float arrays."""
    comments, body = [], []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            (comments if line.startswith("#") else body).append(line)
    reader = csv.reader(body)
    header = next(reader)
    cols = list(zip(*reader)) or [() for _ in header]
    table = {}
    for name, values in zip(header, cols):
        try:
            table[name] = np.array([float(v) for v in values])
        except ValueError:
            table[name] = np.array(values)
    return comments, table


# -- subcommands ----------------------------------------------------------


def _r_grid(cfg: RunConfig, params: ModelParams, r_max=30.0, n=3000):
    r_max = cfg.r_max if cfg.r_max is not None else r_max / params.q
    n = cfg.n if cfg.n is not None else n
    if n < 2 or r_max <= 0:
        raise ConfigError("need --n >= 2 and --r-max > 0")
    return np.linspace(0.0, r_max, n)


def cmd_potential(cfg: RunConfig, params: ModelParams) -> int:
    from .potential import potential_v4, w1

    r = _r_grid(cfg, params)
    write_csv(cfg.out, "potential", params, ["r", "V4", "W1"], zip(r, potential_v4(params, r), w1(params, r)))
    return EXIT_OK


def cmd_boundstates(cfg: RunConfig, params: ModelParams) -> int:
    from .boundstates import chi_b, jordan_chain_residuals, psi_b

    r = _r_grid(cfg, params)
    r1, r2, s1, s2 = jordan_chain_residuals(params)
    extra = [f"chain residuals on [0.5, 30], h = 1e-3: psi_B {r1 / s1!r}, chi_B {r2 / s2!r} (relative)"]
    write_csv(cfg.out, "boundstates", params, ["r", "psi_B", "chi_B"], zip(r, psi_b(params, r), chi_b(params, r)), extra)
    return EXIT_OK


def cmd_scattering(cfg: RunConfig, params: ModelParams) -> int:
    from .scattering import POLE_WINDOW, psi_irregular, psi_regular, scattering_sweep

    if cfg.k is not None:
        if cfg.k <= 0:
            raise ConfigError("--k must be positive")
        r = _r_grid(cfg, params)
        ps = psi_regular(params, cfg.k, r)
        if abs(cfg.k - params.q) < POLE_WINDOW * params.q:
            pis = np.full(r.shape, np.nan + 0j)
        else:
            pis = psi_irregular(params, cfg.k, r)
        cols = ["r", "Re(psi_s)", "Im(psi_s)", "Re(psi_is)", "Im(psi_is)"]
        rows = zip(r, ps.real, ps.imag, pis.real, pis.imag)
        write_csv(cfg.out, "scattering", params, cols, rows, [f"k = {cfg.k!r}"])
        return EXIT_OK
    k_min = 0.0 if cfg.k_min is None else cfg.k_min
    k_max = 4.0 * params.q if cfg.k_max is None else cfg.k_max
    n = 401 if cfg.n is None else cfg.n
    if not 0 <= k_min < k_max or n < 2:
        raise ConfigError("need 0 <= --k-min < --k-max and --n >= 2")
    ks = np.linspace(k_min, k_max, n)
    s, d, branch = scattering_sweep(params, ks)
    cols = ["k", "Re(S)", "Im(S)", "Delta", "branch"]
    write_csv(cfg.out, "scattering", params, cols, zip(ks, s.real, s.imag, d, branch))
    return EXIT_OK


def cmd_evolve(cfg: RunConfig, params: ModelParams) -> int:
    from .boundstates import psi_b
    from .checks import cn_doublet_states
    from .evolution import PacketPropagator, evolve_doublet, gaussian_packet, l2_norm
    from .oracle import CrankNicolson
    from .potential import potential_v4

    q = params.q
    t_max = 10.0 if cfg.t_max is None else cfg.t_max
    n = 11 if cfg.n is None else cfg.n
    k0 = 2.0 * q if cfg.k is None else cfg.k
    R = 100.0 / q if cfg.r_max is None else cfg.r_max
    if t_max <= 0 or n < 2 or k0 <= 0 or R <= 0:
        raise ConfigError("need --t-max > 0, --n >= 2, --k > 0 and --r-max > 0")
    times = np.linspace(0.0, t_max, n)
    h = 0.01 / q
    r = np.arange(1, int(round(R / h))) * h
    pk = gaussian_packet(k0, 0.15 * q, n=201, t0=t_max / 2)
    prop = PacketPropagator(params, pk, r)
    pb = psi_b(params, r)
    pb2 = float(np.sum(pb * pb))

    rows = []
    for t in times:
        ps, ch = evolve_doublet(params, r, t)
        rows.append([t, l2_norm(prop(t), r), l2_norm(ch, r), abs(np.sum(pb * ps)) / pb2])

    extra = [f"packet: Gaussian C(k), k0 = {k0!r}, sigma_k = {0.15 * q!r}, t0 = {t_max / 2!r}; norms on [0, {R!r}]"]
    if cfg.no_oracle:
        for row in rows:
            row += [math.nan] * 3
    else:
        dt = 1e-3 / max(1.0, (k0 + 0.9 * q) ** 2)
        cn = CrankNicolson(potential_v4(params, r), dt, h)
        state, t_now = prop(0.0), 0.0
        reg = []
        for t in times:
            state = cn.evolve(state, int(round((t - t_now) / dt)))
            t_now = t
            reg.append(l2_norm(state, r))
        rin, psis, chis = cn_doublet_states(params, times, R, h=h)
        pbi = psi_b(params, rin)
        for row, nr, ps, ch in zip(rows, reg, psis, chis):
            row += [nr, l2_norm(ch, rin), abs(np.sum(pbi * ps)) / float(np.sum(pbi * pbi))]
        extra.append("*_cn columns: Crank-Nicolson from the same initial states")
    cols = ["t", "norm_regular", "norm_chi", "overlap_psiB", "norm_regular_cn", "norm_chi_cn", "overlap_psiB_cn"]
    write_csv(cfg.out, "evolve", params, cols, rows, extra)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, params: ModelParams) -> int:
    from .checks import config_checks, run_criteria

    if cfg.criteria:
        try:
            which = sorted({int(x) for x in cfg.criteria.split(",")})
        except ValueError as exc:
            raise ConfigError(f"--criteria takes comma-separated numbers, got {cfg.criteria!r}") from exc
        if not set(which) <= set(range(1, 11)):
            raise ConfigError("criteria are numbered 1..10")
    else:
        which = None
    results = [("config", config_checks(params))]
    results += [(f"criterion {n}", res) for n, res in run_criteria(cfg.seed, which).items()]
    ok = True
    lines = []
    for label, res in results:
        for r in res:
            ok &= r.passed or not r.gating
            lines.append(r.line())
    text = "\n".join(lines) + f"\n{'ALL PASS' if ok else 'FAILURES'} (seed {cfg.seed})\n"
    if cfg.out == "-":
        sys.stdout.write(text)
    else:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {
    "potential": cmd_potential,
    "boundstates": cmd_boundstates,
    "scattering": cmd_scattering,
    "evolve": cmd_evolve,
    "verify": cmd_verify,
}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="epcont", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"epcont {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--alpha", type=float)
        p.add_argument("--beta", type=float)
        p.add_argument("--q", type=float)
        p.add_argument("--k", type=float, help="wave number (scattering) or packet centre (evolve)")
        p.add_argument("--k-min", type=float)
        p.add_argument("--k-max", type=float)
        p.add_argument("--r-max", type=float)
        p.add_argument("--t-max", type=float)
        p.add_argument("--n", type=int, help="number of samples")
        p.add_argument("--out", help="output path, '-' for stdout")
        p.add_argument("--seed", type=int)
        p.add_argument("--config", help="key = value file; flags take precedence")
        if name == "verify":
            p.add_argument("--criteria", help="comma-separated subset of 1..10")
        if name == "evolve":
            p.add_argument("--no-oracle", action="store_true", help="skip the Crank-Nicolson columns")
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on bad usage already
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        cfg = build_config(ns)
        params = require_no_singularity(cfg.params())
        return COMMANDS[cfg.command](cfg, params)
    except SingularPotentialError as exc:
        print(f"epcont: invalid parameters: {exc} (r* = {exc.r_star!r})", file=sys.stderr)
        return EXIT_INVALID
    except (ConfigError, ValueError) as exc:
        print(f"epcont: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
