import logging
import sys
from collections.abc import Callable
from pathlib import Path

import numpy as np
import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.progress import BarColumn, Progress, SpinnerColumn, TaskProgressColumn, TextColumn

from . import __version__
from .asymptotics import asymptotic_table
from .calibrate import calibrate_beta
from .config import Command, OutputFormat, RunConfig, Settings
from .curves import CurveVariant, critical_values, eval_r, eval_rho
from .errors import AorcError, ExactEngineError, InputFileError, SizeCapError
from .exact_du import MAX_EXACT_N, DuConfig, fdr_upper_bound, su_rejection_pmf, worst_case_scan
from .file_operations import error_document, read_pvalues, write_csv, write_json
from .montecarlo import DataModel, ModelKind, compare_power, estimate, replicate
from .stepwise import StepKind, decide

console = Console(stderr=True)
log = logging.getLogger(__name__)

EXIT_INPUT = 2
EXIT_DOMAIN = 3
EXIT_SIZE_CAP = 4


def create_progress() -> Progress:
    return Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        TaskProgressColumn(),
        console=console,
        transient=True,
    )


def configure_logging(level: str):
    logger = logging.getLogger("aorc")
    logger.setLevel(level)
    if not any(isinstance(handler, RichHandler) for handler in logger.handlers):
        logger.addHandler(RichHandler(console=console, show_path=False))


def version_callback(value: bool):
    if value:
        console.print(f"[green]aorc version {__version__}[/]")
        raise typer.Exit()


app = typer.Typer(
    help="[bold]aorc[/] - FDR-controlling stepwise procedures based on the asymptotically optimal rejection curve",
    rich_markup_mode="rich",
)


@app.callback()
def main(
    ctx: typer.Context,
    version: bool = typer.Option(
        None,
        "--version",
        "-v",
        help="Show version and exit.",
        callback=version_callback,
        is_eager=True,
    ),
    verbose: bool = typer.Option(
        False,
        "--verbose",
        help="Log progress of long-running computations.",
    ),
):
    """
    [bold]aorc[/] computes critical values, runs SU/SD/SUD decisions, evaluates exact and
    asymptotic FDR under Dirac-uniform configurations, simulates and calibrates.
    """
    ctx.obj = {"verbose": verbose}


def exit_code(error: Exception) -> int:
    if isinstance(error, InputFileError):
        return EXIT_INPUT
    if isinstance(error, SizeCapError):
        return EXIT_SIZE_CAP
    return EXIT_DOMAIN


def fail(error: AorcError) -> int:
    sys.stderr.write(error_document(error))
    return exit_code(error)


# Shared options

CONFIG_OPTION = typer.Option(
    None,
    "--config",
    "-c",
    help="Path to settings file",
    exists=True,
    dir_okay=False,
    file_okay=True,
)
CURVE_OPTION = typer.Option(CurveVariant.AORC, "--curve", help="Rejection curve")
ALPHA_OPTION = typer.Option(None, "--alpha", help="FDR level (settings default 0.05)")
KAPPA_OPTION = typer.Option(None, "--kappa", help="Junction or truncation point κ")
XSTAR_OPTION = typer.Option(None, "--xstar", help="Point where an adjusted curve reaches 1; sets κ")
BETA_OPTION = typer.Option(None, "--beta", help="Finite-n adjustment β of the beta-adjusted curve")
KIND_OPTION = typer.Option(StepKind.SU, "--kind", help="Stepwise procedure")
LAMBDA_OPTION = typer.Option(None, "--lambda", help="Start parameter λ of an SUD procedure")
WORKERS_OPTION = typer.Option(None, "--workers", "-w", help="Worker processes (settings default)")
OUTPUT_OPTION = typer.Option(None, "--output", "-o", help="Output file (stdout when omitted)")


def load_settings(ctx: typer.Context, config: Path | None) -> Settings:
    settings = Settings.load(config) if config else Settings.default()
    verbose = bool(ctx.obj and ctx.obj.get("verbose"))
    configure_logging("INFO" if verbose else settings.log_level)
    return settings


def curve_options(
    settings: Settings,
    curve: CurveVariant,
    alpha: float | None,
    kappa: float | None,
    xstar: float | None,
    beta: float | None,
) -> dict:
    return {
        "curve": curve,
        "alpha": settings.alpha if alpha is None else alpha,
        "kappa": kappa,
        "xstar": xstar,
        "beta": beta,
    }


def dispatch(ctx: typer.Context, config: Path | None, build: Callable[[Settings], dict]):
    """Load settings, validate the run configuration and execute it."""
    try:
        settings = load_settings(ctx, config)
        run_config = RunConfig.build(**build(settings))
    except AorcError as e:
        raise typer.Exit(fail(e)) from e
    status = run(run_config)
    if status:
        raise typer.Exit(status)


def run(config: RunConfig) -> int:
    """Execute one command; returns the process exit status."""
    try:
        HANDLERS[config.command](config)
    except AorcError as e:
        log.debug("%s failed", config.command.value, exc_info=True)
        return fail(e)
    return 0


def _check_exact_size(config: RunConfig):
    cap = min(config.exact_max_n, MAX_EXACT_N)
    if config.n > cap:
        raise SizeCapError(f"exact computation is limited to n <= {cap}, got n={config.n}; use simulate instead")


def _run_decide(config: RunConfig):
    sample = read_pvalues(config.input_path)
    spec = config.curve_spec(sample.n)
    decision = decide(sample, critical_values(spec, sample.n), config.procedure())
    log.info("%s rejected %d of %d hypotheses", config.procedure().label(), decision.n_rejected, sample.n)
    rows = zip(range(1, sample.n + 1), sample.values, decision.rejected, strict=True)
    write_csv(("index", "p", "rejected"), rows, config.output_path)
    # stdout carries the decision CSV only
    write_json(
        {**decision.summary(), "n": sample.n, "procedure": config.procedure().label(), "curve": spec.to_dict()},
        config.summary_path,
        sys.stderr,
    )


def _run_critvals(config: RunConfig):
    spec = config.curve_spec()
    c = critical_values(spec, config.n)
    if config.output_format == OutputFormat.JSON:
        write_json({"curve": spec.to_dict(), "n": c.n, "critical_values": c.values.tolist()}, config.output_path)
        return
    write_csv(("i", "alpha_i"), zip(range(1, c.n + 1), c.values, strict=True), config.output_path)


def _run_exact_fdr(config: RunConfig):
    _check_exact_size(config)
    spec = config.curve_spec()
    if config.scan:
        with create_progress() as progress:
            progress.add_task(f"[cyan]Scanning n0 = 0..{config.n}...", total=None)
            scan = worst_case_scan(spec, config.n, config.procedure(), workers=config.workers)
        log.info("Largest exact FDR %.8g at n0=%d", scan.fdr_star, scan.n0_star)
        rows = [(row.n0, row.exact_fdr, row.bound) for row in scan.rows]
        write_csv(("n0", "exact_fdr", "bound_4_9"), rows, config.output_path)
        return

    if config.kind != StepKind.SU:
        raise ExactEngineError(f"exact Dirac-uniform FDR supports step-up only, not {config.procedure().label()}")
    c = critical_values(spec, config.n)
    cfg = DuConfig(config.n, config.n0)
    pmf = su_rejection_pmf(c, cfg)
    bound = fdr_upper_bound(c, spec, cfg) if cfg.n0 > 0 else None
    write_json(
        {
            "curve": spec.to_dict(),
            "n": cfg.n,
            "n0": cfg.n0,
            "exact_fdr": pmf.fdr,
            "bound_4_9": bound,
            "expected_rejections": pmf.mean,
        },
        config.output_path,
    )


def _run_calibrate(config: RunConfig):
    _check_exact_size(config)
    with create_progress() as progress:
        progress.add_task(f"[cyan]Calibrating beta for n={config.n}...", total=None)
        result = calibrate_beta(
            config.n, config.curve.alpha, tol=config.tol, workers=config.workers, check_beta=config.check_beta
        )
    write_json(result.model_dump(), config.output_path)
    if config.extra_path is not None:
        write_csv(("beta", "max_fdr"), result.trace, config.extra_path)


def _data_model(config: RunConfig) -> DataModel:
    return DataModel(config.model, config.n0, mu=config.mu, rho=config.rho)


def _run_simulate(config: RunConfig):
    spec = config.curve_spec()
    model = _data_model(config)
    kind = config.procedure()
    with create_progress() as progress:
        progress.add_task(f"[cyan]Simulating {config.reps} replications...", total=None)
        c = critical_values(spec, config.n)
        records = replicate(model, c, kind, config.n, config.reps, config.seed, config.workers)
    result = estimate(model, spec, kind, config.n, config.reps, config.seed, records=records)
    write_json(
        {
            **result.model_dump(),
            "model": {"kind": model.kind.value, "n": config.n, "n0": model.n0, "mu": model.mu, "rho": model.rho},
            "curve": spec.to_dict(),
            "procedure": kind.label(),
        },
        config.output_path,
    )
    if config.extra_path is not None:
        rows = zip(range(records.reps), records.r, records.v, records.fdp, records.power, strict=True)
        write_csv(("rep", "R", "V", "fdp", "power"), rows, config.extra_path)


def _run_compare_power(config: RunConfig):
    spec_a, spec_b = config.curve_spec(), config.baseline_spec()
    kind = config.procedure()
    with create_progress() as progress:
        progress.add_task(f"[cyan]Comparing power over {config.reps} replications...", total=None)
        result = compare_power(
            _data_model(config), spec_a, spec_b, kind, config.n, config.reps, config.seed, config.workers
        )
    write_json(
        {**result.model_dump(), "curve_a": spec_a.to_dict(), "curve_b": spec_b.to_dict(), "procedure": kind.label()},
        config.output_path,
    )


def _run_asymptotics(config: RunConfig):
    spec = config.curve_spec()
    zetas = config.zetas if config.zetas else np.linspace(0.0, 1.0, config.points).tolist()
    rows = [(row.zeta, row.t_zeta, row.r_star, row.limiting_fdr, row.g) for row in asymptotic_table(spec, zetas)]
    write_csv(("zeta", "t_zeta", "r_star", "limiting_fdr", "g"), rows, config.output_path)


def _run_curve_table(config: RunConfig):
    spec = config.curve_spec()
    grid = np.linspace(0.0, 1.0, config.points)
    rows = zip(grid, eval_rho(spec, grid), eval_r(spec, grid), strict=True)
    write_csv(("u", "rho", "r"), rows, config.output_path)


HANDLERS: dict[Command, Callable[[RunConfig], None]] = {
    Command.DECIDE: _run_decide,
    Command.CRITVALS: _run_critvals,
    Command.EXACT_FDR: _run_exact_fdr,
    Command.CALIBRATE: _run_calibrate,
    Command.SIMULATE: _run_simulate,
    Command.ASYMPTOTICS: _run_asymptotics,
    Command.CURVE_TABLE: _run_curve_table,
    Command.COMPARE_POWER: _run_compare_power,
}


@app.command("decide")
def decide_command(
    ctx: typer.Context,
    pvalues: Path = typer.Argument(
        ...,
        help="CSV file with header 'p' and one p-value per row",
        exists=True,
        dir_okay=False,
        file_okay=True,
        resolve_path=True,
    ),
    curve: CurveVariant = CURVE_OPTION,
    alpha: float | None = ALPHA_OPTION,
    kappa: float | None = KAPPA_OPTION,
    xstar: float | None = XSTAR_OPTION,
    beta: float | None = BETA_OPTION,
    kind: StepKind = KIND_OPTION,
    lam: float | None = LAMBDA_OPTION,
    output: Path | None = OUTPUT_OPTION,
    summary: Path | None = typer.Option(None, "--summary", "-s", help="JSON summary file (stderr when omitted)"),
    config: Path | None = CONFIG_OPTION,
):
    """Run an SU, SD or SUD procedure on a file of p-values."""
    dispatch(
        ctx,
        config,
        lambda settings: {
            "command": Command.DECIDE,
            "curve": curve_options(settings, curve, alpha, kappa, xstar, beta),
            "kind": kind,
            "lam": lam,
            "input_path": pvalues,
            "output_path": output,
            "summary_path": summary,
        },
    )


@app.command("critvals")
def critvals_command(
    ctx: typer.Context,
    n: int = typer.Option(..., "--n", help="Number of hypotheses"),
    curve: CurveVariant = CURVE_OPTION,
    alpha: float | None = ALPHA_OPTION,
    kappa: float | None = KAPPA_OPTION,
    xstar: float | None = XSTAR_OPTION,
    beta: float | None = BETA_OPTION,
    output_format: OutputFormat = typer.Option(OutputFormat.CSV, "--format", "-f", help="Output format"),
    output: Path | None = OUTPUT_OPTION,
    config: Path | None = CONFIG_OPTION,
):
    """Print the critical values α_{i:n} = ρ(i/n) of a curve."""
    dispatch(
        ctx,
        config,
        lambda settings: {
            "command": Command.CRITVALS,
            "curve": curve_options(settings, curve, alpha, kappa, xstar, beta),
            "n": n,
            "output_format": output_format,
            "output_path": output,
        },
    )


@app.command("exact-fdr")
def exact_fdr_command(
    ctx: typer.Context,
    n: int = typer.Option(..., "--n", help="Number of hypotheses"),
    n0: int | None = typer.Option(None, "--n0", help="Number of true nulls"),
    scan: bool = typer.Option(False, "--scan", help="Tabulate every n0 = 0..n"),
    curve: CurveVariant = CURVE_OPTION,
    alpha: float | None = ALPHA_OPTION,
    kappa: float | None = KAPPA_OPTION,
    xstar: float | None = XSTAR_OPTION,
    beta: float | None = BETA_OPTION,
    kind: StepKind = KIND_OPTION,
    workers: int | None = WORKERS_OPTION,
    output: Path | None = OUTPUT_OPTION,
    config: Path | None = CONFIG_OPTION,
):
    """Exact step-up FDR under Dirac-uniform configurations."""
    dispatch(
        ctx,
        config,
        lambda settings: {
            "command": Command.EXACT_FDR,
            "curve": curve_options(settings, curve, alpha, kappa, xstar, beta),
            "n": n,
            "n0": n0,
            "scan": scan,
            "kind": kind,
            "workers": settings.workers if workers is None else workers,
            "exact_max_n": settings.exact_max_n,
            "output_path": output,
        },
    )


@app.command("calibrate")
def calibrate_command(
    ctx: typer.Context,
    n: int = typer.Option(..., "--n", help="Number of hypotheses"),
    alpha: float | None = ALPHA_OPTION,
    tol: float | None = typer.Option(None, "--tol", help="Bisection tolerance on β (settings default 1e-3)"),
    check_beta: float | None = typer.Option(None, "--check-beta", help="Also report the worst-case FDR at this β"),
    trace: Path | None = typer.Option(None, "--trace", help="Write the (beta, max_fdr) bisection trace as CSV"),
    workers: int | None = WORKERS_OPTION,
    output: Path | None = OUTPUT_OPTION,
    config: Path | None = CONFIG_OPTION,
):
    """Smallest β whose β-adjusted step-up procedure controls the FDR for n hypotheses."""
    dispatch(
        ctx,
        config,
        lambda settings: {
            "command": Command.CALIBRATE,
            "curve": {"curve": CurveVariant.BETA_ADJUSTED, "alpha": settings.alpha if alpha is None else alpha},
            "n": n,
            "tol": settings.calibration_tol if tol is None else tol,
            "check_beta": check_beta,
            "extra_path": trace,
            "workers": settings.workers if workers is None else workers,
            "exact_max_n": settings.exact_max_n,
            "output_path": output,
        },
    )


@app.command("simulate")
def simulate_command(
    ctx: typer.Context,
    model: ModelKind = typer.Option(ModelKind.DU, "--model", help="Data-generating model"),
    n: int = typer.Option(..., "--n", help="Number of hypotheses"),
    n0: int = typer.Option(..., "--n0", help="Number of true nulls"),
    mu: float | None = typer.Option(None, "--mu", help="Shift of false nulls (settings default 2.0)"),
    rho: float | None = typer.Option(None, "--rho", help="Equicorrelation (settings default 0.1)"),
    curve: CurveVariant = CURVE_OPTION,
    alpha: float | None = ALPHA_OPTION,
    kappa: float | None = KAPPA_OPTION,
    xstar: float | None = XSTAR_OPTION,
    beta: float | None = BETA_OPTION,
    kind: StepKind = KIND_OPTION,
    lam: float | None = LAMBDA_OPTION,
    reps: int = typer.Option(1000, "--reps", help="Number of replications"),
    seed: int | None = typer.Option(None, "--seed", help="Seed of the replication streams (required)"),
    per_rep: Path | None = typer.Option(None, "--per-rep", help="Write per-replication records as CSV"),
    workers: int | None = WORKERS_OPTION,
    output: Path | None = OUTPUT_OPTION,
    config: Path | None = CONFIG_OPTION,
):
    """Monte Carlo estimate of FDR and power."""
    dispatch(
        ctx,
        config,
        lambda settings: {
            "command": Command.SIMULATE,
            "curve": curve_options(settings, curve, alpha, kappa, xstar, beta),
            "model": model,
            "n": n,
            "n0": n0,
            "mu": settings.mu if mu is None else mu,
            "rho": settings.rho if rho is None else rho,
            "kind": kind,
            "lam": lam,
            "reps": reps,
            "seed": seed,
            "extra_path": per_rep,
            "workers": settings.workers if workers is None else workers,
            "output_path": output,
        },
    )


@app.command("compare-power")
def compare_power_command(
    ctx: typer.Context,
    model: ModelKind = typer.Option(ModelKind.SHIFT, "--model", help="Data-generating model"),
    n: int = typer.Option(..., "--n", help="Number of hypotheses"),
    n0: int = typer.Option(..., "--n0", help="Number of true nulls"),
    mu: float | None = typer.Option(None, "--mu", help="Shift of false nulls (settings default 2.0)"),
    rho: float | None = typer.Option(None, "--rho", help="Equicorrelation (settings default 0.1)"),
    curve: CurveVariant = CURVE_OPTION,
    alpha: float | None = ALPHA_OPTION,
    kappa: float | None = KAPPA_OPTION,
    xstar: float | None = XSTAR_OPTION,
    beta: float | None = BETA_OPTION,
    baseline: CurveVariant = typer.Option(CurveVariant.SIMES, "--baseline", help="Curve compared against"),
    baseline_kappa: float | None = typer.Option(None, "--baseline-kappa", help="κ of the baseline curve"),
    baseline_beta: float | None = typer.Option(None, "--baseline-beta", help="β of the baseline curve"),
    kind: StepKind = KIND_OPTION,
    lam: float | None = LAMBDA_OPTION,
    reps: int = typer.Option(1000, "--reps", help="Number of paired replications"),
    seed: int | None = typer.Option(None, "--seed", help="Seed of the replication streams (required)"),
    workers: int | None = WORKERS_OPTION,
    output: Path | None = OUTPUT_OPTION,
    config: Path | None = CONFIG_OPTION,
):
    """Paired power comparison of two curves on common datasets."""

    def build(settings: Settings) -> dict:
        options = curve_options(settings, curve, alpha, kappa, xstar, beta)
        return {
            "command": Command.COMPARE_POWER,
            "curve": options,
            "baseline": {
                "curve": baseline,
                "alpha": options["alpha"],
                "kappa": baseline_kappa,
                "beta": baseline_beta,
            },
            "model": model,
            "n": n,
            "n0": n0,
            "mu": settings.mu if mu is None else mu,
            "rho": settings.rho if rho is None else rho,
            "kind": kind,
            "lam": lam,
            "reps": reps,
            "seed": seed,
            "workers": settings.workers if workers is None else workers,
            "output_path": output,
        }

    dispatch(ctx, config, build)


@app.command("asymptotics")
def asymptotics_command(
    ctx: typer.Context,
    curve: CurveVariant = CURVE_OPTION,
    alpha: float | None = ALPHA_OPTION,
    kappa: float | None = KAPPA_OPTION,
    xstar: float | None = XSTAR_OPTION,
    beta: float | None = BETA_OPTION,
    n: int | None = typer.Option(None, "--n", help="Number of hypotheses (beta-adjusted curve only)"),
    zeta: list[float] | None = typer.Option(None, "--zeta", help="ζ values; repeat the option for several"),
    points: int = typer.Option(101, "--points", help="Size of the equispaced ζ grid when --zeta is omitted"),
    output: Path | None = OUTPUT_OPTION,
    config: Path | None = CONFIG_OPTION,
):
    """Tabulate t_ζ, r*, the limiting FDR and g(ζ) over ζ."""
    dispatch(
        ctx,
        config,
        lambda settings: {
            "command": Command.ASYMPTOTICS,
            "curve": curve_options(settings, curve, alpha, kappa, xstar, beta),
            "n": n,
            "zetas": zeta or None,
            "points": points,
            "output_path": output,
        },
    )


@app.command("curve-table")
def curve_table_command(
    ctx: typer.Context,
    curve: CurveVariant = CURVE_OPTION,
    alpha: float | None = ALPHA_OPTION,
    kappa: float | None = KAPPA_OPTION,
    xstar: float | None = XSTAR_OPTION,
    beta: float | None = BETA_OPTION,
    n: int | None = typer.Option(None, "--n", help="Number of hypotheses (beta-adjusted curve only)"),
    points: int = typer.Option(101, "--points", help="Size of the equispaced grid on [0, 1]"),
    output: Path | None = OUTPUT_OPTION,
    config: Path | None = CONFIG_OPTION,
):
    """Tabulate ρ(u) and r(u) on an equispaced grid."""
    dispatch(
        ctx,
        config,
        lambda settings: {
            "command": Command.CURVE_TABLE,
            "curve": curve_options(settings, curve, alpha, kappa, xstar, beta),
            "n": n,
            "points": points,
            "output_path": output,
        },
    )


if __name__ == "__main__":
    app()
