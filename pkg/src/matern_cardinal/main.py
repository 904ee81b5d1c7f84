#!/usr/bin/env python3
"""Matern Cardinal - command line front end for symbols, Lagrange functions and studies."""

import argparse
import logging
import math
import sys
import traceback
from functools import partial
from pathlib import Path

import numpy as np

from .app.cardinal.lagrange import lagrange_function, fit_decay
from .app.cardinal.symbol import build_symbol, synthesis_condition
from .app.core.errors import (
    AccuracyError, DomainError, InsufficientDataError, InvalidSpecError,
    MaternCardinalError, UsageError,
)
from .app.interp.interpolation import WindowConfig, make_test_function
from .app.interp.lebesgue import SamplingConfig
from .app.interp.studies import compact_kernel_study, convergence_study
from .app.interp.sweep import build_all, decay_sweep, lebesgue_sweep, map_ordered
from .app.kernels.kernels import (
    KernelFamily, compact_spec, decay_certificate, kernel_profile, knot_smoothness,
    matern_rho, matern_rho_closed_form,
)
from .app.kernels.radial import fit_perturbation, radial_ft, radial_ft_error, sobolev_bounds
from .app.utils.file_io import report_filename, write_csv, write_json
from .app.utils.logger import get_logger, setup_logging
from .app.utils.settings import RunConfig, Settings

log = get_logger("main")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ACCURACY = 2

COMMANDS = ("symbol", "lagrange", "lebesgue", "converge", "kernels")

# F psi(r) r^4 = prefactor (1 + sum_j c_j B(j r)), nodes 1 and 2
PERTURBATION_FORMS = {
    KernelFamily.ETA2: (2, 4.0, (-4.0 / 3.0, 1.0 / 3.0)),
    KernelFamily.PSI2: (3, 144.0 * math.sqrt(2.0 / math.pi),
                        (-4.0 / 3.0 * math.sqrt(math.pi / 2.0), 1.0 / 3.0 * math.sqrt(math.pi / 2.0))),
    KernelFamily.PSI32: (3, 144.0 * math.sqrt(2.0 / math.pi),
                         (-4.0 / 3.0 * math.sqrt(math.pi / 2.0), 1.0 / 3.0 * math.sqrt(math.pi / 2.0))),
}


class ArgumentParser(argparse.ArgumentParser):
    """argparse parser that raises UsageError instead of exiting."""

    def error(self, message):
        raise UsageError(message)


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="matern_cardinal",
                            description="Cardinal interpolation with Matern kernels on h Z^d")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--kernel", help="kernel id, e.g. matern:m=2,d=2 or eta2")
    parser.add_argument("--h", help="scales: 0.5,0.25 or 1/32 or 1..1/32")
    parser.add_argument("--grid", type=int, help="symbol grid size per axis")
    parser.add_argument("--tol", type=float, help="evaluation tolerance")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--threads", type=int, help="worker threads for sweeps")
    parser.add_argument("--config", help="INI or JSON settings file")
    parser.add_argument("--log-level", default="INFO",
                        choices=("DEBUG", "INFO", "WARNING", "ERROR"))
    return parser


def _out(cfg: RunConfig, name: str) -> Path:
    return Path(cfg.output_dir) / name


def _build_options(cfg: RunConfig) -> dict:
    return dict(grid_size=cfg.grid_size, coeff_tol=cfg.coeff_tol, symbol_tol=cfg.symbol_tol,
                max_grid=cfg.max_grid, spatial_cap=cfg.spatial_cap, poisson_cap=cfg.poisson_cap)


def _builder(cfg: RunConfig, cardinal_tol: float | None = None):
    return partial(lagrange_function, route=cfg.route, cardinal_tol=cardinal_tol, **_build_options(cfg))


def cmd_symbol(cfg: RunConfig) -> list[Path]:
    """Symbol and inverse symbol tables for every h."""
    spec = cfg.spec()

    def one(h):
        return build_symbol(spec, h, cfg.grid_size, cfg.symbol_tol, route=cfg.route,
                            spatial_cap=cfg.spatial_cap, poisson_cap=cfg.poisson_cap)

    grids = map_ordered(one, cfg.h_list, cfg.threads)
    rows = [(grid.h, *row) for grid in grids for row in grid.table_rows()]
    header = ["h"] + grids[0].table_header()

    entries = []
    for grid in grids:
        entry = grid.metadata()
        if spec.family == KernelFamily.MATERN and grid.h > 0:
            synthesis = synthesis_condition(spec, grid.h, cfg.synthesis_delta, cfg.synthesis_terms)
            entry["synthesis"] = {"measured_sup": synthesis.measured_sup,
                                  "proof_bound": synthesis.proof_bound, "holds": synthesis.holds}
        entries.append(entry)

    stem = spec.file_stem
    return [
        write_csv(_out(cfg, report_filename(stem, spec.d, spec.m, "symbol", "csv")), header, rows),
        write_json(_out(cfg, report_filename(stem, spec.d, spec.m, "symbol", "json")),
                   {"config": cfg.to_dict(), "grids": entries}),
    ]


def cmd_lagrange(cfg: RunConfig) -> list[Path]:
    """Lagrange coefficients and decay fits for every h.

    Raises:
        AccuracyError: After writing, if a cardinal residual exceeds cardinal_tol
    """
    spec = cfg.spec()
    functions = build_all(_builder(cfg), spec, cfg.h_list, cfg.threads)

    rows, entries = [], []
    for L in functions:
        rows.extend((L.h, *row) for row in L.coefficient_table())
        entry = L.metadata()
        try:
            entry["decay"] = fit_decay(L).to_dict()
        except InsufficientDataError as e:
            log.warning(f"No decay fit at h={L.h:g}: {e}")
            entry["decay"] = None
        entries.append(entry)

    header = ["h"] + [f"k{i + 1}" for i in range(spec.d)] + ["a", "a_uncertainty"]
    stem = spec.file_stem
    paths = [
        write_csv(_out(cfg, report_filename(stem, spec.d, spec.m, "lagrange", "csv")), header, rows),
        write_json(_out(cfg, report_filename(stem, spec.d, spec.m, "lagrange", "json")),
                   {"config": cfg.to_dict(), "functions": entries}),
    ]
    worst = max(L.cardinal_residual for L in functions)
    if worst > cfg.cardinal_tol:
        raise AccuracyError(f"Cardinal residual {worst:.2e} above {cfg.cardinal_tol:g}", achieved=worst)
    return paths


def cmd_lebesgue(cfg: RunConfig) -> list[Path]:
    """Lebesgue constants and decay fits over h with uniformity verdicts."""
    spec = cfg.spec()
    functions = build_all(_builder(cfg, cfg.cardinal_tol), spec, cfg.h_list, cfg.threads)
    sampling = SamplingConfig(cfg.lebesgue_samples, cfg.refine_rounds, cfg.eval_tol)
    lebesgue = lebesgue_sweep(functions, sampling, cfg.threads, cfg.lebesgue_ratio_max, cfg.lebesgue_max)
    decay = decay_sweep(functions, cfg.threads, cfg.decay_b_min, cfg.decay_a_ratio_max)

    header = ["h", "lebesgue", "uncertainty", "halo", "decay_A", "decay_A_uncertainty",
              "decay_B", "decay_B_uncertainty", "decay_residual", "finite_support"]
    rows = [(e.h, e.value, e.uncertainty, e.halo, fit.amplitude, fit.amplitude_uncertainty,
             fit.rate, fit.rate_uncertainty, fit.residual, fit.finite_support)
            for e, fit in zip(lebesgue.estimates, decay.fits)]
    stem = spec.file_stem
    return [
        write_csv(_out(cfg, report_filename(stem, spec.d, spec.m, "lebesgue", "csv")), header, rows),
        write_json(_out(cfg, report_filename(stem, spec.d, spec.m, "lebesgue", "json")), {
            "config": cfg.to_dict(),
            "estimates": [e.to_dict() for e in lebesgue.estimates],
            "lebesgue_ratio": lebesgue.ratio,
            "lebesgue_uniform": lebesgue.uniform,
            "decay": decay.summary,
            "decay_uniform": decay.uniform,
        }),
    ]


def cmd_converge(cfg: RunConfig) -> list[Path]:
    """Convergence study (or its compact-kernel variant) over h."""
    spec = cfg.spec()
    f = make_test_function(cfg.test_function, spec.d, spec, cfg.h_list[-1])
    window = WindowConfig(cfg.eval_radius, cfg.eval_tol, cfg.error_offsets, cfg.decay_radius)
    sampling = SamplingConfig(cfg.lebesgue_samples, cfg.refine_rounds, cfg.eval_tol)
    if spec.is_compact:
        report = compact_kernel_study(spec, f, cfg.h_list, window, sampling, cfg.threads,
                                      cardinal_tol=cfg.cardinal_tol, **_build_options(cfg))
    else:
        report = convergence_study(spec, f, cfg.h_list, window, sampling, _builder(cfg, cfg.cardinal_tol), cfg.threads)

    data = report.to_dict()
    data["config"] = cfg.to_dict()
    return [
        write_csv(_out(cfg, report.filename("csv")), report.csv_header(), report.csv_rows()),
        write_json(_out(cfg, report.filename("json")), data),
    ]


def _compact_battery(spec, profile, radii) -> dict:
    family = spec.family
    lower, upper = sobolev_bounds(profile, spec.m, radii[radii > 0])
    knots = knot_smoothness(family)
    d_form, prefactor, expected = PERTURBATION_FORMS[family]
    fit = fit_perturbation(profile, d_form, spec.m, (1.0, 2.0), prefactor=prefactor)
    battery = {
        "positivity": {"lower": lower, "upper": upper, "holds": lower > 0},
        "knots": [{"knot": k.knot, "jumps": list(k.jumps), "max_jump": k.max_jump} for k in knots],
        "perturbation": {
            "dimension": d_form,
            "prefactor": fit.prefactor,
            "coefficients": list(fit.coefficients),
            "expected": list(expected),
            "residual": fit.residual,
            "limit_beta": fit.limit_beta,
        },
    }
    if family == KernelFamily.PSI32:
        walk = kernel_profile(compact_spec(KernelFamily.PSI2))
        r = radii[radii > 0]
        difference = np.abs(radial_ft(profile, 3, r) - radial_ft(walk, 1, r))
        battery["dimension_walk"] = {"max_difference": float(np.max(difference))}
    return battery


def cmd_kernels(cfg: RunConfig) -> list[Path]:
    """Kernel profile table and the verification battery of the kernel."""
    spec = cfg.spec()
    radii = np.linspace(0.0, cfg.profile_radius, cfg.profile_points)
    stem = spec.file_stem

    if spec.family == KernelFamily.M_HARMONIC:
        rows = [(r, v, u, math.nan, math.nan)
                for r, v, u in zip(radii, spec.radial(radii), spec.radial_uncertainty(radii))]
        battery = {}
    else:
        profile = kernel_profile(spec)
        transform = radial_ft(profile, spec.d, radii)
        rows = list(zip(radii, spec.radial(radii), spec.radial_uncertainty(radii),
                        transform, radial_ft_error(profile, spec.d, radii)))
        certificate = decay_certificate(spec)
        battery = {"decay": {"alpha": certificate.alpha, "amplitude": certificate.amplitude,
                             "max_ratio": certificate.max_ratio, "holds": certificate.holds}}
        if spec.is_compact:
            battery.update(_compact_battery(spec, profile, radii))
        else:
            rho, closed = matern_rho(spec.m, spec.d), matern_rho_closed_form(spec.m, spec.d)
            battery["rho"] = {"numeric": rho, "closed_form": closed,
                              "relative_error": abs(rho - closed) / closed}

    header = ["r", "phi", "phi_uncertainty", "radial_ft", "radial_ft_uncertainty"]
    return [
        write_csv(_out(cfg, report_filename(stem, spec.d, spec.m, "kernels", "csv")), header, rows),
        write_json(_out(cfg, report_filename(stem, spec.d, spec.m, "kernels", "json")),
                   {"config": cfg.to_dict(), "kernel": spec.kernel_id, "battery": battery}),
    ]


HANDLERS = {
    "symbol": cmd_symbol,
    "lagrange": cmd_lagrange,
    "lebesgue": cmd_lebesgue,
    "converge": cmd_converge,
    "kernels": cmd_kernels,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE

    setup_logging(console_level=getattr(logging, args.log_level))
    log.info(f"Starting matern_cardinal {args.command}...")

    try:
        settings = Settings(args.config)
        cfg = RunConfig.resolve(settings, {
            "kernel": args.kernel, "h": args.h, "grid": args.grid,
            "tol": args.tol, "out": args.out, "threads": args.threads,
        })
        cfg.spec()
        paths = HANDLERS[args.command](cfg)
    except AccuracyError as e:
        log.error(f"Accuracy budget not met: {e} (achieved {e.achieved})")
        return EXIT_ACCURACY
    except (UsageError, DomainError, InvalidSpecError) as e:
        log.error(str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except MaternCardinalError as e:
        log.error(f"{type(e).__name__}: {e}")
        return EXIT_USAGE
    except Exception as e:
        log.critical(f"Unhandled exception: {e}")
        log.critical(traceback.format_exc())
        return EXIT_USAGE

    for path in paths:
        log.info(f"Output: {path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
