"""CLI-Befehle für mimolimits."""
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional

import typer
from pydantic import ValidationError
from rich.console import Console
from rich.progress import Progress, SpinnerColumn, TextColumn
from rich.table import Table

from ..config import get_logger, settings, setup_logging
from ..config.sweep_file import build_sweep_spec
from ..exceptions import ConfigFileError, InputValidationError, MimoLimitsError
from ..models import (
    Averaging,
    ChannelDistribution,
    ChannelSource,
    ImpairmentModel,
    ResultCurve,
    Scenario,
    SisoReference,
    SnrPoint,
    SweepSpec,
)
from ..processing.pipeline import SweepPipeline
from ..services import CapacityService, CsvExportService

app = typer.Typer(
    name="mimolimits",
    help="Kapazität und Multiplexing-Gewinn von MIMO-Kanälen mit Transceiver-Impairments",
    add_completion=False,
)

console = Console()
err_console = Console(stderr=True)
logger = get_logger("cli")

EXIT_USAGE = 2
EXIT_RUNTIME = 3


@contextmanager
def _exit_codes() -> Iterator[None]:
    """Bildet Fehler auf Exit-Codes ab: 2 Bedienung/Konfiguration, 3 Laufzeit."""
    try:
        yield
    except (ConfigFileError, ValidationError, InputValidationError) as e:
        err_console.print(f"[red]Fehler in der Konfiguration:[/red] {e}")
        raise typer.Exit(EXIT_USAGE)
    except (MimoLimitsError, OSError) as e:
        err_console.print(f"[red]Fehler:[/red] {e}")
        logger.debug("Details", exc_info=True)
        raise typer.Exit(EXIT_RUNTIME)


def _setup(verbose: bool) -> None:
    setup_logging(level="DEBUG" if verbose else settings.log_level, log_file=settings.log_file)


def _threads(threads: Optional[int]) -> int:
    """--threads hat Vorrang, sonst MIMOLIMITS_THREADS bzw. Standard."""
    return threads if threads is not None else settings.threads


def _grid_overrides(
    snr_db: Optional[float],
    snr_db_start: Optional[float],
    snr_db_stop: Optional[float],
    snr_db_step: Optional[float],
) -> Dict[str, Any]:
    if snr_db is not None:
        return {"snr_db_start": snr_db, "snr_db_stop": snr_db}
    return {"snr_db_start": snr_db_start, "snr_db_stop": snr_db_stop, "snr_db_step": snr_db_step}


# Flags, die nur bestimmte Szenarien auswerten
_CUSTOM_FLAGS = {
    "n_t": "--nt",
    "n_r": "--nr",
    "kappa": "--kappa",
    "alpha": "--alpha",
    "channel": "--channel",
    "channel_file": "--channel-file",
}
_FIG5_FLAGS = {"siso_reference": "--siso", "averaging": "--averaging"}


def _warn_ignored_flags(scenario: Scenario, overrides: Dict[str, Any]) -> None:
    """Warnt vor Flags, die das gewählte Szenario nicht auswertet."""
    if scenario == Scenario.CUSTOM:
        ignored = _FIG5_FLAGS
    elif scenario == Scenario.FIG5:
        ignored = _CUSTOM_FLAGS
    else:
        ignored = {**_CUSTOM_FLAGS, **_FIG5_FLAGS}

    flags = [flag for key, flag in ignored.items() if overrides.get(key) is not None]
    if flags:
        logger.warning(f"Szenario {scenario.value} ignoriert {', '.join(flags)}")


# Gemeinsame Optionen
NT_OPTION = typer.Option(None, "--nt", min=1, help="Sendeantennen N_t")
NR_OPTION = typer.Option(None, "--nr", min=1, help="Empfangsantennen N_r")
KAPPA_OPTION = typer.Option(None, "--kappa", min=0.0, help="Level of impairments kappa")
ALPHA_OPTION = typer.Option(None, "--alpha", min=0.0, max=1.0, help="Leakage-Parameter alpha")
TRIALS_OPTION = typer.Option(None, "--trials", min=1, help="Trials / Ensemblegröße")
SEED_OPTION = typer.Option(None, "--seed", min=0, help="Master-Seed")
THREADS_OPTION = typer.Option(
    None, "--threads", min=1, help="Worker (Standard: MIMOLIMITS_THREADS)"
)
CONFIG_OPTION = typer.Option(None, "--config", "-c", help="Sweep-Konfiguration (key=value)")
CHANNEL_OPTION = typer.Option(None, "--channel", help="Kanalquelle: identity, ensemble, rayleigh")
CHANNEL_FILE_OPTION = typer.Option(None, "--channel-file", help="CSV mit deterministischer Kanalmatrix")
VERBOSE_OPTION = typer.Option(False, "--verbose", "-v", help="Ausführliche Ausgabe")


@app.command()
def sweep(
    scenario: Optional[Scenario] = typer.Option(None, "--scenario", "-s", help="Experiment"),
    n_t: Optional[int] = NT_OPTION,
    n_r: Optional[int] = NR_OPTION,
    kappa: Optional[float] = KAPPA_OPTION,
    alpha: Optional[float] = ALPHA_OPTION,
    snr_db: Optional[float] = typer.Option(None, "--snr-db", help="Einzelner SNR-Punkt [dB]"),
    snr_db_start: Optional[float] = typer.Option(None, "--snr-db-start", help="Erster SNR-Punkt [dB]"),
    snr_db_stop: Optional[float] = typer.Option(None, "--snr-db-stop", help="Letzter SNR-Punkt [dB]"),
    snr_db_step: Optional[float] = typer.Option(None, "--snr-db-step", help="Schrittweite [dB]"),
    trials: Optional[int] = TRIALS_OPTION,
    seed: Optional[int] = SEED_OPTION,
    threads: Optional[int] = THREADS_OPTION,
    config: Optional[Path] = CONFIG_OPTION,
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Ziel-CSV"),
    channel: Optional[ChannelSource] = CHANNEL_OPTION,
    channel_file: Optional[Path] = CHANNEL_FILE_OPTION,
    siso: Optional[SisoReference] = typer.Option(None, "--siso", help="SISO-Referenz (fig5)"),
    averaging: Optional[Averaging] = typer.Option(None, "--averaging", help="Mittelung (fig5)"),
    verbose: bool = VERBOSE_OPTION,
) -> None:
    """
    Führt einen SNR-Sweep aus und schreibt eine CSV.

    fig2-fig5 verwenden feste Parametersätze; --nt, --nr, --kappa,
    --alpha und --channel gelten nur für custom, --siso und --averaging
    nur für fig5. Nicht ausgewertete Flags erzeugen eine Warnung.
    """
    _setup(verbose)

    with _exit_codes():
        overrides: Dict[str, Any] = {
            "scenario": scenario,
            "n_t": n_t,
            "n_r": n_r,
            "kappa": kappa,
            "alpha": alpha,
            "trials": trials,
            "seed": seed,
            "channel": channel,
            "channel_file": channel_file,
            "siso_reference": siso,
            "averaging": averaging,
            "output_path": out,
            **_grid_overrides(snr_db, snr_db_start, snr_db_stop, snr_db_step),
        }
        spec = build_sweep_spec(config, overrides)
        _warn_ignored_flags(spec.scenario, overrides)
        output_path = spec.output_path or settings.get_output_directory() / f"{spec.scenario.value}.csv"

        pipeline = SweepPipeline(threads=_threads(threads))
        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            console=err_console,
            transient=True,
        ) as progress:
            progress.add_task(f"Sweep {spec.scenario.value}...", total=None)
            curves = pipeline.run(spec)

        CsvExportService().write_curves(curves, spec, output_path)

    _display_summary(curves, spec)
    console.print(f"[green]✓[/green] CSV: {output_path}")


@app.command()
def limits(
    n_t: int = typer.Option(4, "--nt", min=1, help="Sendeantennen N_t"),
    n_r: int = typer.Option(4, "--nr", min=1, help="Empfangsantennen N_r"),
    kappa: float = typer.Option(0.05, "--kappa", min=0.0, help="Level of impairments kappa"),
    verbose: bool = VERBOSE_OPTION,
) -> None:
    """Zeigt die Kapazitätsgrenzen für SNR -> unendlich."""
    _setup(verbose)

    with _exit_codes():
        result = CapacityService.capacity_limits(n_t, n_r, ImpairmentModel(kappa=kappa))

    table = Table(title=f"Kapazitätsgrenzen {n_r}x{n_t}, kappa={kappa:g}")
    table.add_column("Größe", style="cyan")
    table.add_column("Wert", style="green", justify="right")
    table.add_column("Einheit")
    table.add_row("M = min(N_t, N_r)", str(result.m), "Ströme")
    table.add_row("lower", f"{result.lower:.4f}", "bit/Kanalnutzung")
    table.add_row("upper", f"{result.upper:.4f}", "bit/Kanalnutzung")
    console.print(table)


@app.command()
def muxgain(
    n_t: Optional[int] = NT_OPTION,
    n_r: Optional[int] = NR_OPTION,
    kappa: Optional[float] = KAPPA_OPTION,
    alpha: Optional[float] = ALPHA_OPTION,
    snr_db: float = typer.Option(..., "--snr-db", help="SNR [dB]"),
    trials: Optional[int] = TRIALS_OPTION,
    seed: Optional[int] = SEED_OPTION,
    threads: Optional[int] = THREADS_OPTION,
    config: Optional[Path] = CONFIG_OPTION,
    channel: Optional[ChannelSource] = CHANNEL_OPTION,
    channel_file: Optional[Path] = CHANNEL_FILE_OPTION,
    siso: Optional[SisoReference] = typer.Option(None, "--siso", help="SISO-Referenz"),
    averaging: Optional[Averaging] = typer.Option(None, "--averaging", help="Mittelung (ensemble)"),
    verbose: bool = VERBOSE_OPTION,
) -> None:
    """Berechnet den Multiplexing-Gewinn C_{N_t,N_r}(SNR) / C_{1,1}(SNR)."""
    _setup(verbose)

    with _exit_codes():
        spec = build_sweep_spec(
            config,
            {
                "scenario": Scenario.CUSTOM,
                "n_t": n_t,
                "n_r": n_r,
                "kappa": kappa,
                "alpha": alpha,
                "trials": trials,
                "seed": seed,
                "channel": channel,
                "channel_file": channel_file,
                "siso_reference": siso,
                "averaging": averaging,
                **_grid_overrides(snr_db, None, None, None),
            },
        )
        pipeline = SweepPipeline(threads=_threads(threads))
        model = ImpairmentModel(kappa=spec.kappa, alpha=spec.alpha)
        snr = SnrPoint.from_db(snr_db)
        mc = pipeline.monte_carlo(spec)
        dist = pipeline.channel_distribution(spec)

        if dist is None:
            estimate = pipeline.muxgain_service.ensemble_mux_gain(
                spec.n_t,
                spec.n_r,
                [snr],
                model,
                mc,
                siso_reference=spec.siso_reference,
                averaging=spec.averaging,
            )[0]
            label = ChannelSource.ENSEMBLE.value
        else:
            estimate = pipeline.muxgain_service.mux_gain_curve(
                dist, [snr], model, mc, siso_reference=spec.siso_reference
            )[0]
            label = str(dist)

    table = Table(title=f"Multiplexing-Gewinn bei {snr_db:g} dB ({label}, {model})")
    table.add_column("Wert", style="green", justify="right")
    table.add_column("Standardfehler", justify="right")
    table.add_column("Trials", justify="right")
    table.add_row(f"{estimate.mean:.4f}", f"{estimate.stderr:.4f}", str(estimate.trials))
    console.print(table)


@app.command()
def bounds(
    n_t: Optional[int] = NT_OPTION,
    n_r: Optional[int] = NR_OPTION,
    kappa: Optional[float] = KAPPA_OPTION,
    trials: Optional[int] = TRIALS_OPTION,
    seed: Optional[int] = SEED_OPTION,
    threads: Optional[int] = THREADS_OPTION,
    channel: Optional[ChannelSource] = CHANNEL_OPTION,
    channel_file: Optional[Path] = CHANNEL_FILE_OPTION,
    verbose: bool = VERBOSE_OPTION,
) -> None:
    """
    Zeigt die Grenzen des Multiplexing-Gewinns für SNR -> 0 und SNR -> unendlich.

    Für das Ensemble deterministischer Kanäle gelten die Erwartungswerte
    der Rayleigh-Verteilung.
    """
    _setup(verbose)

    with _exit_codes():
        spec = SweepSpec(
            **{
                key: value
                for key, value in {
                    "n_t": n_t,
                    "n_r": n_r,
                    "kappa": kappa,
                    "trials": trials,
                    "seed": seed,
                    "channel": channel,
                    "channel_file": channel_file,
                }.items()
                if value is not None
            }
        )
        pipeline = SweepPipeline(threads=_threads(threads))
        dist = pipeline.channel_distribution(spec) or ChannelDistribution.iid_rayleigh(
            spec.n_t, spec.n_r
        )
        result = pipeline.muxgain_service.mux_gain_bounds(
            dist, ImpairmentModel(kappa=spec.kappa), pipeline.monte_carlo(spec)
        )

    table = Table(title=f"Grenzen des Multiplexing-Gewinns ({dist}, kappa={spec.kappa:g})")
    table.add_column("SNR", style="cyan")
    table.add_column("untere Grenze", style="green", justify="right")
    table.add_column("obere Grenze", style="green", justify="right")
    table.add_row("-> 0", f"{result.low_snr_lower:.4f}", f"{result.low_snr_upper:.4f}")
    table.add_row("-> unendlich", f"{result.high_snr_lower:.4f}", f"{result.high_snr_upper:.4f}")
    console.print(table)


def _display_summary(curves: List[ResultCurve], spec: SweepSpec) -> None:
    """Zeigt den letzten SNR-Punkt jeder Reihe."""
    console.print(f"\n[bold blue]Zusammenfassung {spec.scenario.value}[/bold blue]\n")

    table = Table()
    table.add_column("Reihe", style="cyan")
    table.add_column("Art")
    table.add_column("SNR [dB]", justify="right")
    table.add_column("Wert", style="green", justify="right")
    table.add_column("Standardfehler", justify="right")

    for curve in curves:
        if not curve.values:
            continue
        table.add_row(
            curve.label,
            curve.kind.value,
            f"{curve.snr_db[-1]:g}",
            f"{curve.values[-1]:.4f}",
            f"{curve.stderr[-1]:.4f}",
        )
    console.print(table)
