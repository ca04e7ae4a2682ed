"""Command-line interface for pq-eigen."""

import logging
import math
from pathlib import Path
from typing import Any, Dict, Optional

import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from pq_eigen.core.errors import ConfigError, InadmissiblePairError
from pq_eigen.loaders.config_loader import parse_config
from pq_eigen.services import orchestration

app = typer.Typer(help="pq-eigen - principal eigenpairs of coupled p-Laplacian systems")
console = Console()

# Shared options
DOMAIN = typer.Option(None, "--domain", help="interval, disc, square/rectangle, lshape or triangle")
MESH = typer.Option(None, "--mesh", help="Mesh file (NODES/ELEMENTS format)")
P = typer.Option(None, "--p", help="Exponent p")
Q = typer.Option(None, "--q", help="Exponent q (defaults to p)")
ALPHA = typer.Option(None, "--alpha", help="Coupling exponent alpha")
BETA = typer.Option(None, "--beta", help="Coupling exponent beta (derived when omitted)")
H = typer.Option(None, "--h", help="Mesh size (cell side)")
N = typer.Option(None, "--n", help="Element count for interval and radial meshes")
WIDTH = typer.Option(None, "--width", help="Rectangle width")
HEIGHT = typer.Option(None, "--height", help="Rectangle height")
EPS = typer.Option(None, "--eps", help="Outer tolerance on |lambda^k - lambda^(k-1)|")
MAX_OUTER = typer.Option(None, "--max-outer", help="Maximum outer iterations")
NEWTON_TOL = typer.Option(None, "--newton-tol", help="Absolute Newton residual tolerance")
CONTINUATION = typer.Option(None, "--continuation", help="Comma-separated exponent ladder")
WEIGHT = typer.Option(None, "--weight", help="Weight: 'step2' or a nodal-value file")
GUESS = typer.Option(None, "--guess", help="Initial guess name")
NO_FIELD = typer.Option(False, "--no-field", help="Skip the nodal field export")


@app.callback()
def main(
    ctx: typer.Context,
    config: Optional[Path] = typer.Option(None, "--config", help="key = value configuration file"),
    out: Optional[Path] = typer.Option(None, "--out", help="Output directory"),
    fmt: Optional[str] = typer.Option(None, "--format", help="csv or json"),
    threads: Optional[int] = typer.Option(None, "--threads", help="Worker threads"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging"),
):
    """Configure logging and collect the options shared by all commands."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )
    ctx.obj = {"config": str(config) if config else None,
               "overrides": {"out": out, "format": fmt, "threads": threads}}


def _execute(ctx: typer.Context, command: str, **options: Any):
    settings = ctx.obj or {"config": None, "overrides": {}}
    overrides: Dict[str, Any] = dict(settings["overrides"])
    overrides.update(options)
    overrides["command"] = command

    try:
        config = parse_config(settings["config"], overrides)
    except ConfigError as e:
        console.print(f"[red]Configuration error: {e}[/red]")
        raise typer.Exit(1)
    except OSError as e:
        console.print(f"[red]I/O error: {e}[/red]")
        raise typer.Exit(3)

    console.print(f"[cyan]Running {command}...[/cyan]")
    try:
        outcome = orchestration.run(config)
    except InadmissiblePairError as e:
        console.print(f"[red]Solver failed: {e}[/red]")
        raise typer.Exit(2)
    except OSError as e:
        console.print(f"[red]I/O error: {e}[/red]")
        raise typer.Exit(3)
    except ValueError as e:
        console.print(f"[red]Configuration error: {e}[/red]")
        raise typer.Exit(1)

    _report(command, outcome)
    if outcome.status != 0:
        raise typer.Exit(outcome.status)


def _format(value: Any) -> str:
    if isinstance(value, float):
        return "inf" if math.isinf(value) else f"{value:.10g}"
    if value is None:
        return "-"
    return str(value)


def _report(command: str, outcome: orchestration.RunOutcome):
    summary = outcome.summary
    if outcome.table is not None:
        header, rows = outcome.table
        table = Table(title=command)
        for name in header:
            table.add_column(name, style="cyan" if name == header[0] else "white")
        for row in rows:
            table.add_row(*[_format(v) for v in row])
        console.print(table)
    else:
        table = Table(title=f"{command} summary")
        table.add_column("Key", style="cyan")
        table.add_column("Value", style="green")
        for key in sorted(summary):
            if not isinstance(summary[key], (dict, list)):
                table.add_row(key, _format(summary[key]))
        console.print(table)

    bounds = summary.get("bounds")
    if isinstance(bounds, dict):
        flag = " (assumes the f(p) hypothesis)" if bounds.get("assumes_hypothesis_1") else ""
        console.print(f"[bold]Lower bound:[/bold] {_format(bounds['lower'])}")
        console.print(f"[bold]Upper bound ({bounds['upper_kind']}):[/bold] {_format(bounds['upper'])}{flag}")

    if outcome.status == 0:
        console.print("[green]✓ Done[/green]")
    elif "error" in summary:
        console.print(f"[red]{summary['error']}[/red]")
    else:
        console.print("[yellow]Outer iteration did not converge; history written[/yellow]")
    for path in outcome.artifacts:
        console.print(f"  • {path}")


@app.command("solve")
def solve(
    ctx: typer.Context,
    domain: Optional[str] = DOMAIN, mesh: Optional[Path] = MESH,
    p: Optional[float] = P, q: Optional[float] = Q,
    alpha: Optional[float] = ALPHA, beta: Optional[float] = BETA,
    h: Optional[float] = H, n: Optional[int] = N,
    width: Optional[float] = WIDTH, height: Optional[float] = HEIGHT,
    eps: Optional[float] = EPS, max_outer: Optional[int] = MAX_OUTER,
    newton_tol: Optional[float] = NEWTON_TOL, continuation: Optional[str] = CONTINUATION,
    weight: Optional[str] = WEIGHT, guess: Optional[str] = GUESS, no_field: bool = NO_FIELD,
):
    """Principal eigenpair of the coupled system on a 1D or 2D domain."""
    _execute(ctx, "solve", domain=domain, mesh=mesh, p=p, q=q, alpha=alpha, beta=beta, h=h, n=n,
             width=width, height=height, eps=eps, max_outer=max_outer, newton_tol=newton_tol,
             continuation=continuation, weight=weight, initial_guess=guess,
             export_field=False if no_field else None)


@app.command("scalar")
def scalar(
    ctx: typer.Context,
    domain: Optional[str] = DOMAIN, mesh: Optional[Path] = MESH,
    p: Optional[float] = P, h: Optional[float] = H, n: Optional[int] = N,
    eps: Optional[float] = EPS, max_outer: Optional[int] = MAX_OUTER,
    newton_tol: Optional[float] = NEWTON_TOL, continuation: Optional[str] = CONTINUATION,
    weight: Optional[str] = WEIGHT, guess: Optional[str] = GUESS, no_field: bool = NO_FIELD,
):
    """Principal eigenpair of the scalar (optionally weighted) p-Laplacian."""
    _execute(ctx, "scalar", domain=domain, mesh=mesh, p=p, h=h, n=n, eps=eps,
             max_outer=max_outer, newton_tol=newton_tol, continuation=continuation,
             weight=weight, initial_guess=guess, export_field=False if no_field else None)


@app.command("radial")
def radial(
    ctx: typer.Context,
    n: Optional[int] = N, p: Optional[float] = P, q: Optional[float] = Q,
    alpha: Optional[float] = ALPHA, beta: Optional[float] = BETA,
    eps: Optional[float] = EPS, max_outer: Optional[int] = MAX_OUTER,
    newton_tol: Optional[float] = NEWTON_TOL, continuation: Optional[str] = CONTINUATION,
    guess: Optional[str] = GUESS, no_field: bool = NO_FIELD,
):
    """Coupled system on the unit disc through its radial reduction."""
    _execute(ctx, "radial", n=n, p=p, q=q, alpha=alpha, beta=beta, eps=eps,
             max_outer=max_outer, newton_tol=newton_tol, continuation=continuation,
             initial_guess=guess, export_field=False if no_field else None)


@app.command("resonant")
def resonant(
    ctx: typer.Context,
    domain: Optional[str] = DOMAIN, mesh: Optional[Path] = MESH,
    p: Optional[float] = P, q: Optional[float] = Q,
    alpha: Optional[float] = ALPHA, beta: Optional[float] = BETA,
    h: Optional[float] = H, width: Optional[float] = WIDTH, height: Optional[float] = HEIGHT,
    eps: Optional[float] = EPS, max_outer: Optional[int] = MAX_OUTER,
    newton_tol: Optional[float] = NEWTON_TOL, weight: Optional[str] = WEIGHT,
    no_field: bool = NO_FIELD,
):
    """Resonant weighted system (weight 'step2' by default)."""
    _execute(ctx, "resonant", domain=domain, mesh=mesh, p=p, q=q, alpha=alpha, beta=beta, h=h,
             width=width, height=height, eps=eps, max_outer=max_outer, newton_tol=newton_tol,
             weight=weight, export_field=False if no_field else None)


@app.command("bounds")
def bounds(
    ctx: typer.Context,
    domain: Optional[str] = DOMAIN, mesh: Optional[Path] = MESH,
    p: Optional[float] = P, q: Optional[float] = Q,
    alpha: Optional[float] = ALPHA, beta: Optional[float] = BETA,
    h: Optional[float] = H, n: Optional[int] = N,
    eps: Optional[float] = EPS, max_outer: Optional[int] = MAX_OUTER,
    newton_tol: Optional[float] = NEWTON_TOL,
):
    """Eigenvalue together with its lower and upper bounds."""
    _execute(ctx, "bounds", domain=domain, mesh=mesh, p=p, q=q, alpha=alpha, beta=beta, h=h,
             n=n, eps=eps, max_outer=max_outer, newton_tol=newton_tol)


@app.command("eoc-study")
def eoc_study(
    ctx: typer.Context,
    domain: Optional[str] = DOMAIN,
    p: Optional[float] = P, q: Optional[float] = Q,
    alpha: Optional[float] = ALPHA, beta: Optional[float] = BETA,
    h_values: Optional[str] = typer.Option(None, "--h-values", help="Comma-separated mesh sizes"),
    eps: Optional[float] = EPS, max_outer: Optional[int] = MAX_OUTER,
    newton_tol: Optional[float] = NEWTON_TOL,
):
    """Eigenvalues on successively halved meshes and their convergence orders."""
    _execute(ctx, "eoc-study", domain=domain, p=p, q=q, alpha=alpha, beta=beta,
             h_values=h_values, eps=eps, max_outer=max_outer, newton_tol=newton_tol)


@app.command("fp-curve")
def fp_curve(
    ctx: typer.Context,
    n: Optional[int] = N,
    p_values: Optional[str] = typer.Option(None, "--p-values", help="Comma-separated p grid (inf allowed)"),
    eps: Optional[float] = EPS, newton_tol: Optional[float] = NEWTON_TOL,
):
    """The f(p) diagnostic on the unit interval."""
    _execute(ctx, "fp-curve", n=n, p_values=p_values, eps=eps, newton_tol=newton_tol)


if __name__ == "__main__":
    app()
