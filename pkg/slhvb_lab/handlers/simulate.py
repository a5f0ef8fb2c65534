"""Handlers for simulation subcommands: simulate, sweep, scenario."""
import sys

from pydantic import ValidationError
from yaml import YAMLError

from slhvb_lab.console import (
    console,
    error,
    frame_table,
    info,
    status_console,
    success,
    warning,
)


def _exit_invalid(e: ValidationError, what: str) -> None:
    from slhvb_lab.config.config import validation_messages

    error(f"Invalid {what}:")
    for line in validation_messages(e):
        info(f"  {line}")
    sys.exit(1)


def _emit(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        success(f"Report written to {out}")


def handle_simulate(args) -> None:
    from slhvb_lab.config.config import load_experiment_config
    from slhvb_lab.errors import SlhvbError
    from slhvb_lab.harness.report import round_logs_frame, summaries_frame, write_report
    from slhvb_lab.harness.runner import run_replications

    try:
        config = load_experiment_config(args.config, seed=args.seed)
    except ValidationError as e:
        _exit_invalid(e, "config")
    except (OSError, ValueError, YAMLError) as e:
        error(f"Failed to load config: {e}")
        sys.exit(1)

    try:
        report = run_replications(
            config,
            parallelism=args.parallelism,
            keep_logs=bool(args.round_log),
        )
        out = args.out or config.output_path
        text = write_report(summaries_frame(report.summaries), out, args.format)
        if args.round_log:
            write_report(round_logs_frame(report.logs), args.round_log, "csv")
    except (SlhvbError, ValueError, OSError) as e:
        error(f"Simulation failed: {e}")
        sys.exit(1)

    _emit(text, out)
    flagged = sum(s.warnings for s in report.summaries)
    if flagged:
        warning(f"{flagged} policy warnings; rerun with -d for details")
    success(
        f"{report.replications} replications: mean loss "
        f"[metric]{report.mean_loss:.6g}[/metric] ± {report.loss_ci:.3g}, "
        f"[metric]{report.mean_pct_of_oracle:.2f}%[/metric] of oracle"
    )


def handle_sweep(args) -> None:
    from slhvb_lab.errors import SlhvbError
    from slhvb_lab.harness.report import write_report
    from slhvb_lab.harness.sweep import load_sweep_spec, run_sweep

    try:
        spec = load_sweep_spec(args.config, seed=args.seed)
    except ValidationError as e:
        _exit_invalid(e, "sweep spec")
    except (OSError, ValueError, YAMLError) as e:
        error(f"Failed to load sweep spec: {e}")
        sys.exit(1)

    try:
        status = f"[cyan]Sweeping {spec.axis} over {len(spec.values)} values...[/cyan]"
        with status_console.status(status):
            df = run_sweep(spec, parallelism=args.parallelism)
        text = write_report(df, args.out, args.format)
    except ValidationError as e:
        _exit_invalid(e, "sweep point")
    except (SlhvbError, ValueError, OSError) as e:
        error(f"Sweep failed: {e}")
        sys.exit(1)
    _emit(text, args.out)


def handle_scenario(args) -> None:
    import pandas as pd

    from slhvb_lab.errors import SlhvbError, UnknownScenario
    from slhvb_lab.harness.scenarios import (
        ScenarioOptions,
        describe_scenarios,
        run_scenario,
    )

    if args.list:
        scenarios = describe_scenarios()
        df = pd.DataFrame(
            {"scenario": list(scenarios), "description": list(scenarios.values())}
        )
        console.print(frame_table(df, title="Scenarios"))
        return
    if not args.name:
        error("Give a scenario name or --list")
        sys.exit(1)

    try:
        options = ScenarioOptions(
            out_dir=args.out_dir,
            replications=args.replications,
            horizon=args.horizon,
            n_values=args.n_values,
            k_values=args.k_values,
            levels=args.levels,
            parallelism=args.parallelism,
            seed=args.seed,
        )
    except ValidationError as e:
        _exit_invalid(e, "scenario options")

    try:
        paths = run_scenario(args.name, options)
    except UnknownScenario as e:
        error(str(e))
        sys.exit(1)
    except ValidationError as e:
        _exit_invalid(e, "scenario config")
    except (SlhvbError, ValueError, OSError) as e:
        error(f"Scenario {args.name} failed: {e}")
        sys.exit(1)

    for path in paths:
        success(f"Wrote {path}")
