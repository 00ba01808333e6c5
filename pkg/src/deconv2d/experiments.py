"""Experiment drivers and the command-line front end.

Two numerical studies back up the certified theory: singular-value
conditioning of the measurement matrix as the spike lattice shrinks, and
Monte-Carlo recovery phase diagrams over (separation, grid spacing) for the
three kernel models.  Everything is exposed through argparse subcommands
that write plain CSV (header row, LF endings, shortest-repr floats) so any
plotting tool can consume the output.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys

import numpy as np

from .certify import CertifyConfig, recovery_sweep
from .envelope import (
    EnvelopeGridSpec,
    build_envelopes,
    save_envelope_set,
    zeta_band,
)
from .kernels import KernelModel
from .schur import numeric_certificate, svd_small
from .solver import SampleGrid, assemble_operator, recovery_trial

SVD_LATTICE = 8      # conditioning study uses an 8x8 spike lattice
SVD_MARGIN = 3.0     # sample-grid margin in kernel units


def _kernel_model(name: str) -> KernelModel:
    if name == "gaussian":
        return KernelModel.gaussian()
    if name == "microscopy":
        return KernelModel.microscopy()
    if name == "airy":
        return KernelModel.airy()
    raise ValueError(f"unknown kernel {name!r}")


def svd_conditioning(dprime_grid, zeta_grid) -> list:
    """Rows (dprime, zeta, sigma_min, sigma_med) for an 8x8 spike lattice.

    sigma_med is the singular value at index ceil(n/2) in descending order
    (the 32nd of 64); it tracks the bulk while sigma_min tracks the
    ill-posedness of the finest separations.
    """
    n = SVD_LATTICE
    model = KernelModel.gaussian()
    rows = []
    for dp in dprime_grid:
        ii, jj = np.meshgrid(np.arange(n), np.arange(n))
        T = dp * np.stack([ii.ravel(), jj.ravel()], axis=1).astype(float)
        for zeta in zeta_grid:
            grid = SampleGrid.covering(T, zeta, SVD_MARGIN * model.unit)
            sv = svd_small(assemble_operator(T, grid, model))
            med = sv[math.ceil(len(sv) / 2) - 1]
            rows.append((float(dp), float(zeta), float(sv[-1]), float(med)))
    return rows


def _trial_seed(seed: int, cell: int, trial: int) -> int:
    # fold (master seed, cell, trial) into one independent stream id
    return int(np.random.SeedSequence([seed, cell, trial]).generate_state(1)[0])


def phase_diagram(kernel: str, delta_grid, zeta_grid, trials: int, seed: int,
                  pattern: str = "full_grid", n_spikes: int = 25) -> list:
    """Recovery rate per (delta, zeta) cell, in kernel units.

    Returns rows (delta, zeta, kernel, pattern, trials, successes, rate);
    deterministic for a fixed seed.
    """
    model = _kernel_model(kernel)
    u = model.unit
    rows = []
    for ci, (delta, zeta) in enumerate(
            (d, z) for d in delta_grid for z in zeta_grid):
        succ = sum(
            recovery_trial(delta * u, zeta * u, n_spikes, pattern,
                           _trial_seed(seed, ci, t), model=model)
            for t in range(trials))
        rows.append((float(delta), float(zeta), kernel, pattern, trials,
                     succ, succ / trials))
    return rows


# -- CSV / config plumbing ---------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(float(v))  # plain shortest repr even for numpy scalars
    return str(v)


def write_csv(path: str, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def parse_config(path: str) -> dict:
    """``key = value`` lines, ``#`` comments, UTF-8."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, val = line.split("=", 1)
            out[key.strip().replace("-", "_")] = val.strip()
    return out


def _resolution_spec(k1: int, resolution: str) -> EnvelopeGridSpec:
    res = {"paper": 40, "desk": 10}.get(resolution)
    if res is None:
        res = int(resolution)
    return EnvelopeGridSpec(k1=k1, tres=res, ures=res)


def _certify_config(k1_set, resolution: str, cache: str | None) -> CertifyConfig:
    if cache:
        return CertifyConfig.from_cache(cache, k1_set)
    return CertifyConfig({k1: build_envelopes(_resolution_spec(k1, resolution))
                          for k1 in k1_set})


# -- subcommand bodies -------------------------------------------------------

def _cmd_envelopes(args) -> int:
    envs = build_envelopes(_resolution_spec(args.k1, args.resolution))
    paths = save_envelope_set(args.out, envs)
    print(f"wrote {len(paths)} envelope files to {args.out}")
    return 0


def _cmd_certify(args) -> int:
    deltas = np.arange(args.delta_min, args.delta_max + 1e-12, args.delta_step)
    config = _certify_config(args.zeta_bands, args.resolution,
                             args.envelope_cache)
    sweep = recovery_sweep(deltas, args.zeta_bands, config)
    rows = []
    for k1 in args.zeta_bands:
        zlo, zhi = zeta_band(k1)
        for r in sweep[k1]["reports"]:
            rows.append((k1, zlo, zhi, r.delta, r.verdict, r.u1, r.u2,
                         r.schur.alpha_inf, r.schur.beta_inf,
                         r.schur.gamma_inf, r.schur.alpha_lb, r.stage))
    write_csv(args.out,
              ["k1", "zeta_lo", "zeta_hi", "delta", "verdict", "u1", "u2",
               "alpha_inf", "beta_inf", "gamma_inf", "alpha_lb", "stage"],
              rows)
    return 0


def _cmd_recover(args) -> int:
    model = _kernel_model(args.kernel)
    u = model.unit
    succ = sum(
        recovery_trial(args.delta * u, args.zeta * u, args.n_spikes,
                       args.pattern, _trial_seed(args.seed, 0, t), model=model)
        for t in range(args.trials))
    write_csv(args.out,
              ["delta", "zeta", "kernel", "pattern", "trials", "successes",
               "rate"],
              [(args.delta, args.zeta, args.kernel, args.pattern, args.trials,
                succ, succ / args.trials)])
    return 0


def _cmd_svd(args) -> int:
    rows = svd_conditioning(args.dprime, args.zeta)
    write_csv(args.out, ["dprime", "zeta", "sigma_min", "sigma_med"], rows)
    return 0


def _cmd_phase_diagram(args) -> int:
    rows = phase_diagram(args.kernel, args.delta, args.zeta, args.trials,
                         args.seed, pattern=args.pattern)
    write_csv(args.out,
              ["delta", "zeta", "kernel", "pattern", "trials", "successes",
               "rate"],
              rows)
    return 0


def _cmd_certificate_demo(args) -> int:
    rng = np.random.default_rng(args.seed)
    pts = []
    while len(pts) < args.n_spikes:
        p = rng.uniform(-1.5 * args.delta, 1.5 * args.delta, 2)
        if all(np.hypot(*(p - q)) >= args.delta for q in pts):
            pts.append(p)
    T = np.array(pts)
    tau = rng.choice([-1.0, 1.0], args.n_spikes)
    cert = numeric_certificate(T, tau, args.zeta)
    lo, hi = T.min() - 2.0, T.max() + 2.0
    xs = np.arange(lo, hi + 1e-12, args.step)
    G = np.stack(np.meshgrid(xs, xs), axis=-1)
    Q = cert.evaluate(G)
    rows = [(float(G[i, j, 0]), float(G[i, j, 1]), float(Q[i, j]))
            for i in range(G.shape[0]) for j in range(G.shape[1])]
    write_csv(args.out, ["x", "y", "q"], rows)
    return 0


# -- argument parsing --------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="deconv2d")
    p.add_argument("--config", help="key = value defaults file")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("envelopes", help="build one band's envelope cache")
    sp.add_argument("--k1", type=int, required=True)
    sp.add_argument("--resolution", default="desk")
    sp.add_argument("--out", required=True)
    sp.set_defaults(run=_cmd_envelopes)

    sp = sub.add_parser("certify", help="sweep the recovery certifier")
    sp.add_argument("--delta-min", type=float, required=True)
    sp.add_argument("--delta-max", type=float, required=True)
    sp.add_argument("--delta-step", type=float, default=0.05)
    sp.add_argument("--zeta-bands", type=int, nargs="+", required=True)
    sp.add_argument("--resolution", default="desk")
    sp.add_argument("--envelope-cache")
    sp.add_argument("--out", required=True)
    sp.set_defaults(run=_cmd_certify)

    sp = sub.add_parser("recover", help="seeded exact-recovery trials")
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--zeta", type=float, required=True)
    sp.add_argument("--n-spikes", type=int, default=25)
    sp.add_argument("--pattern", default="full_grid",
                    choices=["full_grid", "three_nearest"])
    sp.add_argument("--trials", type=int, default=10)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--kernel", default="gaussian",
                    choices=["gaussian", "microscopy", "airy"])
    sp.add_argument("--out", required=True)
    sp.set_defaults(run=_cmd_recover)

    sp = sub.add_parser("svd", help="conditioning of the measurement matrix")
    sp.add_argument("--dprime", type=float, nargs="+", required=True)
    sp.add_argument("--zeta", type=float, nargs="+", required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(run=_cmd_svd)

    sp = sub.add_parser("phase-diagram", help="recovery-rate table")
    sp.add_argument("--kernel", default="gaussian",
                    choices=["gaussian", "microscopy", "airy"])
    sp.add_argument("--delta", type=float, nargs="+", required=True)
    sp.add_argument("--zeta", type=float, nargs="+", required=True)
    sp.add_argument("--trials", type=int, default=10)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--pattern", default="full_grid",
                    choices=["full_grid", "three_nearest"])
    sp.add_argument("--out", required=True)
    sp.set_defaults(run=_cmd_phase_diagram)

    sp = sub.add_parser("certificate-demo",
                        help="dump Q on a grid for contour plotting")
    sp.add_argument("--n-spikes", type=int, default=3)
    sp.add_argument("--delta", type=float, default=4.5)
    sp.add_argument("--zeta", type=float, default=0.5)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--step", type=float, default=0.1)
    sp.add_argument("--out", required=True)
    sp.set_defaults(run=_cmd_certificate_demo)

    return p


def cli_main(argv) -> int:
    parser = _build_parser()
    config = {}
    if "--config" in argv:
        try:
            config = parse_config(argv[argv.index("--config") + 1])
        except (OSError, ValueError, IndexError) as exc:
            print(f"error: bad config file: {exc}", file=sys.stderr)
            return 1
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse prints its own synopsis; fold --help into success
        return 0 if exc.code == 0 else 1
    for key, val in config.items():
        if hasattr(args, key) and f"--{key.replace('_', '-')}" not in argv:
            cur = getattr(args, key)
            if isinstance(cur, bool):
                setattr(args, key, val.lower() in ("1", "true", "yes"))
            elif isinstance(cur, int):
                setattr(args, key, int(val))
            elif isinstance(cur, float):
                setattr(args, key, float(val))
            elif isinstance(cur, list):
                setattr(args, key, [type(cur[0])(v) for v in val.split()])
            else:
                setattr(args, key, val)
    try:
        return args.run(args)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 2


def cli_entry() -> None:
    sys.exit(cli_main(sys.argv[1:]))
