"""Command-line front end: region sweeps, saturation rate, figure data, checks.

Commands read a flat key=value config file plus --set overrides and emit
deterministic CSV (12 significant digits) and SVG (fixed 800x600 canvas,
no timestamps), so repeated runs are byte-identical.

Exit codes: 0 success, 1 config error, 2 input-file error, 3 verification
failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, fields, replace

import numpy as np

from . import discrete, gaussian
from .conferencing import macce_from_maccm
from .geometry import Frontier2

GAUSSIAN_SCENARIOS = ("maccm-nc", "maccm-c", "macce-nc", "macce-c")
DISCRETE_SCENARIOS = ("discrete-nc", "discrete-c")


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    scenario: str | None = None
    p1: float | None = None
    p2: float | None = None
    ps: float = 0.0
    pz: float | None = None
    c12: float = 0.0
    c21: float = 0.0
    r0: float = 0.0
    grid_beta: int = 101
    grid_alpha: int = 101
    resolution: int = 512
    channel_file: str | None = None
    nu: int = 2
    nv1: int = 2
    nv2: int = 2
    quant_k: int = 4
    c_values: tuple = (0.0, 0.5, 1.0, 2.0, 3.5)
    out: str | None = None
    svg: str | None = None


def _parse_float(key, raw, where, lo=None, strict_lo=None):
    try:
        v = float(raw)
    except ValueError:
        raise ConfigError(f"{where}: malformed number for {key}: {raw!r}") from None
    if not np.isfinite(v):
        raise ConfigError(f"{where}: {key} must be finite")
    if lo is not None and v < lo:
        raise ConfigError(f"{where}: {key} must be >= {lo}")
    if strict_lo is not None and v <= strict_lo:
        raise ConfigError(f"{where}: {key} must be > {strict_lo}")
    return v


def _parse_int(key, raw, where, lo, hi=None):
    try:
        v = int(raw)
    except ValueError:
        raise ConfigError(f"{where}: malformed integer for {key}: {raw!r}") from None
    if v < lo or (hi is not None and v > hi):
        rng = f">= {lo}" if hi is None else f"in {lo}..{hi}"
        raise ConfigError(f"{where}: {key} must be {rng}")
    return v


def _assign(cfg: RunConfig, key: str, raw: str, where: str):
    if key == "scenario":
        if raw not in GAUSSIAN_SCENARIOS + DISCRETE_SCENARIOS:
            raise ConfigError(f"{where}: unknown scenario {raw!r}")
        cfg.scenario = raw
    elif key in ("p1", "p2", "ps", "c12", "c21", "r0"):
        setattr(cfg, key, _parse_float(key, raw, where, lo=0.0))
    elif key == "pz":
        cfg.pz = _parse_float(key, raw, where, strict_lo=0.0)
    elif key in ("grid_beta", "grid_alpha", "resolution"):
        setattr(cfg, key, _parse_int(key, raw, where, lo=2))
    elif key in ("nu", "nv1", "nv2"):
        setattr(cfg, key, _parse_int(key, raw, where, lo=1, hi=3))
    elif key == "quant_k":
        cfg.quant_k = _parse_int(key, raw, where, lo=1, hi=8)
    elif key == "c_values":
        vals = [v for v in (tok.strip() for tok in raw.split(",")) if v]
        if not vals:
            raise ConfigError(f"{where}: c_values must list at least one value")
        cfg.c_values = tuple(_parse_float("c_values", v, where, lo=0.0) for v in vals)
    elif key in ("channel_file", "out", "svg"):
        setattr(cfg, key, raw)
    else:
        raise ConfigError(f"{where}: unknown key {key!r}")


def parse_config(text: str) -> RunConfig:
    """Parse key=value lines; `#` starts a comment, unknown keys are errors."""
    cfg = RunConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise ConfigError(f"line {lineno}: expected key=value, got {content!r}")
        key, _, value = content.partition("=")
        _assign(cfg, key.strip(), value.strip(), f"line {lineno}")
    return cfg


def apply_overrides(cfg: RunConfig, sets: list[str]) -> RunConfig:
    for item in sets:
        if "=" not in item:
            raise ConfigError(f"--set {item!r}: expected key=value")
        key, _, value = item.partition("=")
        _assign(cfg, key.strip(), value.strip(), f"--set {item!r}")
    return cfg


def _require(cfg: RunConfig, keys):
    for key in keys:
        if getattr(cfg, key) is None:
            raise ConfigError(f"missing required key: {key}")


def _gaussian_params(cfg: RunConfig) -> gaussian.GaussianMacParams:
    _require(cfg, ("p1", "p2", "pz"))
    return gaussian.GaussianMacParams(
        p1=cfg.p1, p2=cfg.p2, ps=cfg.ps, pz=cfg.pz, c12=cfg.c12, c21=cfg.c21
    )


# ---------------------------------------------------------------------------
# output writers
# ---------------------------------------------------------------------------


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def _frontier_rows(frontier: Frontier2, causal: bool, discrete_mode: bool):
    for r1, r2, meta in zip(frontier.r1, frontier.r2, frontier.params):
        if discrete_mode:
            cols = ["", "", "", ""]
        elif causal:
            cols = [_fmt(meta[0]), _fmt(meta[1]), _fmt(meta[2]), _fmt(meta[3])]
        else:
            cols = [_fmt(meta[0]), _fmt(meta[1]), "", ""]
        yield [_fmt(float(r1)), _fmt(float(r2))] + cols


def _write_text(path: str | None, text: str):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2")


def _svg_plot(curves: list[tuple[str, Frontier2]], title: str) -> str:
    """Fixed-canvas polyline plot; purely a function of the curve data."""
    W, H, L, R, T, B = 800, 600, 70, 20, 20, 50
    xmax = max([1e-9] + [float(f.r1[-1]) for _, f in curves if len(f)]) * 1.05
    ymax = max([1e-9] + [float(np.max(f.r2)) for _, f in curves if len(f)]) * 1.05
    px = lambda x: L + x / xmax * (W - L - R)
    py = lambda y: H - B - y / ymax * (H - T - B)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<text x="{(L + W - R) / 2:.1f}" y="16" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">{title}</text>',
    ]
    for k in range(6):
        xv, yv = xmax * k / 5, ymax * k / 5
        out.append(
            f'<line x1="{px(xv):.2f}" y1="{H - B}" x2="{px(xv):.2f}" y2="{H - B + 5}" '
            'stroke="black"/>'
        )
        out.append(
            f'<text x="{px(xv):.2f}" y="{H - B + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{xv:.3g}</text>'
        )
        out.append(
            f'<line x1="{L - 5}" y1="{py(yv):.2f}" x2="{L}" y2="{py(yv):.2f}" stroke="black"/>'
        )
        out.append(
            f'<text x="{L - 8}" y="{py(yv) + 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{yv:.3g}</text>'
        )
    out.append(f'<line x1="{L}" y1="{H - B}" x2="{W - R}" y2="{H - B}" stroke="black"/>')
    out.append(f'<line x1="{L}" y1="{T}" x2="{L}" y2="{H - B}" stroke="black"/>')
    out.append(
        f'<text x="{(L + W - R) / 2:.1f}" y="{H - 12}" text-anchor="middle" '
        'font-family="sans-serif" font-size="13">R1 (bits)</text>'
    )
    out.append(
        f'<text x="18" y="{(T + H - B) / 2:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 18 {(T + H - B) / 2:.1f})">R2 (bits)</text>'
    )
    for i, (label, f) in enumerate(curves):
        color = _PALETTE[i % len(_PALETTE)]
        if len(f):
            pts = " ".join(f"{px(float(a)):.2f},{py(float(b)):.2f}" for a, b in zip(f.r1, f.r2))
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        if label:
            yleg = T + 16 + 16 * i
            out.append(
                f'<line x1="{W - R - 150}" y1="{yleg - 4}" x2="{W - R - 120}" y2="{yleg - 4}" '
                f'stroke="{color}" stroke-width="1.5"/>'
            )
            out.append(
                f'<text x="{W - R - 114}" y="{yleg}" font-family="sans-serif" '
                f'font-size="12">{label}</text>'
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _compute_frontier(cfg: RunConfig) -> tuple[Frontier2, bool, bool]:
    _require(cfg, ("scenario",))
    if cfg.scenario in DISCRETE_SCENARIOS:
        _require(cfg, ("channel_file",))
        ch = discrete.read_channel_file(cfg.channel_file)
        report = discrete.validate_channel(ch)
        if report:
            raise discrete.ChannelFormatError(
                f"invalid channel file {cfg.channel_file}: " + "; ".join(report)
            )
        frontier = discrete.brute_force_frontier(
            ch,
            nu=cfg.nu,
            nv1=cfg.nv1,
            nv2=cfg.nv2,
            k=cfg.quant_k,
            causal=cfg.scenario == "discrete-c",
            resolution=cfg.resolution,
        )
        return frontier, False, True
    params = _gaussian_params(cfg)
    frontier = gaussian.sweep_region(
        cfg.scenario,
        params,
        grid_beta=cfg.grid_beta,
        grid_alpha=cfg.grid_alpha,
        resolution=cfg.resolution,
        r0=cfg.r0,
    )
    return frontier, cfg.scenario.endswith("-c"), False


def cmd_region(cfg: RunConfig) -> int:
    frontier, causal, discrete_mode = _compute_frontier(cfg)
    lines = ["r1,r2,beta1,beta2,alpha1,alpha2"]
    lines += [",".join(row) for row in _frontier_rows(frontier, causal, discrete_mode)]
    _write_text(cfg.out, "\n".join(lines) + "\n")
    if len(frontier) == 0:
        print("warning: empty region (r0 exceeds every achievable total rate)", file=sys.stderr)
    if cfg.svg:
        _write_text(cfg.svg, _svg_plot([("", frontier)], f"rate region: {cfg.scenario}"))
    return 0


def cmd_cstar(cfg: RunConfig) -> int:
    value, a1, a2 = gaussian.cstar_opt(_gaussian_params(cfg))
    out = f"cstar {value:.9f}\nalpha1 {a1:.9f}\nalpha2 {a2:.9f}\n"
    _write_text(cfg.out, out) if cfg.out else sys.stdout.write(out)
    return 0


def fig3_curves(cfg: RunConfig) -> list[tuple[float, Frontier2]]:
    """Causal conferencing frontier per capacity value, on shared abscissas.

    Sharing the abscissa grid across capacities makes nestedness checks
    exact node lookups instead of interpolations.
    """
    base = _gaussian_params(cfg)
    cmax = max(cfg.c_values)
    probe = gaussian.sweep_region(
        "macce-c",
        replace(base, c12=cmax, c21=cmax),
        grid_beta=cfg.grid_beta,
        grid_alpha=cfg.grid_alpha,
        resolution=cfg.resolution,
    )
    span = float(probe.r1[-1]) if len(probe) else 0.0
    curves = []
    for c in cfg.c_values:
        f = gaussian.sweep_region(
            "macce-c",
            replace(base, c12=c, c21=c),
            grid_beta=cfg.grid_beta,
            grid_alpha=cfg.grid_alpha,
            resolution=cfg.resolution,
            r1_max=span,
        )
        curves.append((c, f))
    return curves


def cmd_fig3(cfg: RunConfig) -> int:
    curves = fig3_curves(cfg)
    lines = ["c,r1,r2,beta1,beta2,alpha1,alpha2"]
    for c, f in curves:
        lines += [",".join([_fmt(c)] + row) for row in _frontier_rows(f, True, False)]
    _write_text(cfg.out, "\n".join(lines) + "\n")
    if cfg.svg:
        labels = [(f"C={_fmt(c)}", f) for c, f in curves]
        _write_text(cfg.svg, _svg_plot(labels, "conferencing regions, causal interference"))
    return 0


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------


def run_verification(params, grid=21, closed_form=gaussian.maccm_nc_bounds):
    """Cross-module consistency checks; returns (name, gap, tol, pass) rows.

    `closed_form` exists so tests can inject a wrong formula and watch the
    oracle comparison fail.
    """
    rng = np.random.default_rng(20211101)
    checks = []

    gap = 0.0
    for b1, b2 in ((1.0, 1.0), (0.4, 0.8), (0.0, 0.6)):
        ref = closed_form(params, b1, b2)
        _, got = gaussian.oracle_optimize(params, b1, b2)
        gap = max(
            gap,
            abs(got.a1 - ref.a1),
            abs(got.a2 - ref.a2),
            abs(got.a12 - ref.a12),
            abs(got.atot - ref.atot),
        )
    checks.append(("oracle-vs-closed-form", gap, 1e-6))

    gap = 0.0
    for b1 in np.linspace(0, 1, grid):
        for b2 in np.linspace(0, 1, grid):
            lhs = macce_from_maccm(gaussian.maccm_nc_bounds(params, b1, b2), params.c12, params.c21)
            rhs = gaussian.macce_nc_bounds(params, b1, b2)
            gap = max(
                gap,
                abs(lhs.b1 - rhs.b1),
                abs(lhs.b2 - rhs.b2),
                abs(lhs.bsum_conf - rhs.bsum_conf),
                abs(lhs.bsum_tot - rhs.bsum_tot),
            )
    checks.append(("reduction-equality-noncausal", gap, 1e-12))

    gap = 0.0
    amax1 = np.sqrt(params.p1 / params.ps) if params.ps else 0.0
    amax2 = np.sqrt(params.p2 / params.ps) if params.ps else 0.0
    splits = [
        gaussian.PowerSplit(
            beta1=rng.uniform(),
            beta2=rng.uniform(),
            alpha1=rng.uniform(-amax1, amax1) if params.ps else 0.0,
            alpha2=rng.uniform(-amax2, amax2) if params.ps else 0.0,
        )
        for _ in range(50)
    ]
    for sp in splits:
        lhs = macce_from_maccm(gaussian.maccm_c_bounds(params, sp), params.c12, params.c21)
        rhs = gaussian.macce_c_bounds(params, sp)
        gap = max(
            gap,
            abs(lhs.b1 - rhs.b1),
            abs(lhs.b2 - rhs.b2),
            abs(lhs.bsum_conf - rhs.bsum_conf),
            abs(lhs.bsum_tot - rhs.bsum_tot),
        )
    checks.append(("reduction-equality-causal", gap, 1e-12))

    margin = 0.0
    if params.ps > 0:
        for sp in splits:
            c = gaussian.maccm_c_bounds(params, sp)
            n = gaussian.maccm_nc_bounds(params, sp.beta1, sp.beta2)
            margin = max(
                margin, c.a1 - n.a1, c.a2 - n.a2, c.a12 - n.a12, c.atot - n.atot
            )
    checks.append(("causal-within-noncausal", margin, 1e-12))

    cs = gaussian.cstar(params)
    big = replace(params, c12=cs + 1.0, c21=cs + 1.0)
    f = gaussian.sweep_region("macce-c", big, grid_beta=grid, grid_alpha=grid, resolution=128)
    gap = float(np.max(np.abs(f.r1 + f.r2 - cs))) if len(f) else np.inf
    checks.append(("saturation-line", gap, 1e-6))

    return [(name, gap, tol, gap <= tol) for name, gap, tol in checks]


def cmd_verify(cfg: RunConfig) -> int:
    params = _gaussian_params(cfg)
    rows = run_verification(params)
    ok = True
    for name, gap, tol, passed in rows:
        ok &= passed
        print(f"{name}: gap {gap:.3e} tolerance {tol:.1e} {'PASS' if passed else 'FAIL'}")
    return 0 if ok else 3


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _build_parser():
    p = argparse.ArgumentParser(prog="macregions", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("region", "cstar", "fig3", "verify"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="path to key=value config file")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
        sp.add_argument("--out", help="CSV/report output path (default stdout)")
        sp.add_argument("--svg", help="optional SVG plot path")
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = RunConfig()
        if args.config:
            try:
                with open(args.config, "r", encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                raise ConfigError(f"cannot read config file {args.config}: {exc}") from exc
            cfg = parse_config(text)
        cfg = apply_overrides(cfg, args.set)
        if args.out:
            cfg.out = args.out
        if args.svg:
            cfg.svg = args.svg
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        handler = {
            "region": cmd_region,
            "cstar": cmd_cstar,
            "fig3": cmd_fig3,
            "verify": cmd_verify,
        }[args.command]
        return handler(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except discrete.ChannelFormatError as exc:
        print(f"channel file error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
