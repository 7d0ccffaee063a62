"""Command-line front end for scenario generation, training, and runs."""

from __future__ import annotations

import logging
import sys
from pathlib import Path

import click
import numpy as np

from .backends import get_backend
from .benders import STRATEGIES, BendersConfig, run
from .cases import builtin_case, builtin_case_names
from .cuts import label_by_replay, load_cut_archive, save_label_records
from .nn import load_checkpoint, save_checkpoint
from .pipelines import (
    DEFAULT_BATCH,
    DEFAULT_EPOCHS,
    DEFAULT_HIDDEN,
    DEFAULT_LR,
    DEFAULT_VAL_FRAC,
    generate_dataset,
    train_classifier_from_file,
    train_regressor_from_file,
)
from .reports import benchmark_outputs, convergence_figure, write_run_report
from .scenarios import (
    ScenarioConfig,
    ScenarioError,
    draw_sample,
    draw_scenarios,
    load_scenarios,
    save_scenarios,
)
from .system import CaseError, build_shift_factors, load_case

log = logging.getLogger(__name__)


class CliError(click.ClickException):
    exit_code = 2


def _load_case(ref):
    """Case argument: a builtin name or a path to a case file."""
    try:
        if Path(ref).is_file():
            return load_case(ref)
        if ref in builtin_case_names():
            return builtin_case(ref)
    except CaseError as exc:
        raise CliError(str(exc)) from exc
    raise CliError(
        f"unknown case '{ref}'; use a file path or one of {builtin_case_names()}"
    )


def _scenario_options(fn):
    opts = [
        click.option("--scenarios", "n_scenarios", default=5, show_default=True,
                     help="Scenarios per sample."),
        click.option("--samples", "n_samples", default=1, show_default=True,
                     help="Demand profile samples."),
        click.option("--sample-low", default=0.70, show_default=True),
        click.option("--sample-high", default=1.30, show_default=True),
        click.option("--scenario-low", default=0.95, show_default=True),
        click.option("--scenario-high", default=1.05, show_default=True),
        click.option("--seed", default=0, show_default=True),
        click.option("--per-hour", is_flag=True,
                     help="One scenario factor per hour shared by all buses."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _scen_cfg(n_scenarios, n_samples, sample_low, sample_high,
              scenario_low, scenario_high, seed, per_hour) -> ScenarioConfig:
    cfg = ScenarioConfig(
        sample_low=sample_low, sample_high=sample_high,
        scenario_low=scenario_low, scenario_high=scenario_high,
        n_scenarios=n_scenarios, n_samples=n_samples,
        seed=seed, per_bus=not per_hour,
    )
    try:
        cfg.validate()
    except ScenarioError as exc:
        raise CliError(str(exc)) from exc
    return cfg


def _benders_options(fn):
    opts = [
        click.option("--epsilon", default=0.01, show_default=True,
                     help="Relative convergence tolerance."),
        click.option("--max-iterations", default=400, show_default=True),
        click.option("--delta", default=1.0, show_default=True,
                     help="Cut filtering threshold [$]."),
        click.option("--retain", default=2, show_default=True,
                     help="Force-kept cuts per iteration (highest load first)."),
        click.option("--slack-penalty", default=1e4, show_default=True),
        click.option("--alpha-eta", default=None, type=float,
                     help="Proxy floor shrink; defaults to the calibrated value."),
        click.option("--lazy-network", is_flag=True,
                     help="Add subproblem flow limits only when violated."),
        click.option("--backend", default="highs", show_default=True,
                     type=click.Choice(["highs", "internal"])),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _benders_cfg(epsilon, max_iterations, delta, retain, slack_penalty,
                 alpha_eta, lazy_network, backend) -> BendersConfig:
    return BendersConfig(
        epsilon=epsilon, max_iterations=max_iterations, delta=delta,
        retain=retain, slack_penalty=slack_penalty, alpha_eta=alpha_eta,
        lazy_network=lazy_network, backend=backend,
    )


def _draw(case, scen_cfg, sample_index):
    demand = draw_sample(case.base_demand, scen_cfg, sample_index)
    return draw_scenarios(demand, scen_cfg, sample_index)


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Debug logging.")
def main(verbose):
    """Stochastic unit commitment by learning-assisted Benders decomposition."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )


@main.command("gen-scenarios")
@click.option("--case", "case_ref", required=True,
              help="Builtin case name or case file path.")
@_scenario_options
@click.option("--sample-index", default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def gen_scenarios(case_ref, sample_index, out_path, **scen_kw):
    """Draw one demand sample plus its scenarios and write them to a file."""
    case = _load_case(case_ref)
    cfg = _scen_cfg(**scen_kw)
    scen = _draw(case, cfg, sample_index)
    save_scenarios(scen, case.buses, out_path)
    click.echo(f"wrote {scen.n} scenarios for sample {sample_index} to {out_path}")


@main.command("gen-dataset")
@click.option("--case", "case_ref", required=True)
@_scenario_options
@_benders_options
@click.option("--out-dir", required=True, type=click.Path())
@click.option("--no-labels", is_flag=True, help="Skip replay labeling of cuts.")
def gen_dataset(case_ref, out_dir, no_labels, epsilon, max_iterations, delta,
                retain, slack_penalty, alpha_eta, lazy_network, backend,
                **scen_kw):
    """Run conventional Benders per sample and write training data."""
    case = _load_case(case_ref)
    scen_cfg = _scen_cfg(**scen_kw)
    bd_cfg = _benders_cfg(epsilon, max_iterations, delta, retain, slack_penalty,
                          alpha_eta, lazy_network, backend)
    res = generate_dataset(case, scen_cfg, out_dir, bd_cfg,
                           label_cuts=not no_labels)
    click.echo(
        f"{res.samples_converged}/{res.samples_run} samples converged; "
        f"dataset at {res.dataset_path}"
    )
    if not no_labels:
        click.echo(f"{res.cuts_labeled} cuts labeled; table at {res.label_path}")
    if res.samples_converged == 0:
        raise CliError("no sample converged; dataset is empty")


def _train_options(fn):
    opts = [
        click.option("--hidden", default=DEFAULT_HIDDEN, show_default=True),
        click.option("--epochs", default=DEFAULT_EPOCHS, show_default=True),
        click.option("--lr", default=DEFAULT_LR, show_default=True),
        click.option("--batch-size", default=DEFAULT_BATCH, show_default=True),
        click.option("--val-frac", default=DEFAULT_VAL_FRAC, show_default=True),
        click.option("--train-seed", default=0, show_default=True),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


@main.command("train-regressor")
@click.option("--dataset", required=True, type=click.Path(exists=True))
@_train_options
@click.option("--out", "out_path", required=True, type=click.Path())
def train_regressor_cmd(dataset, out_path, hidden, epochs, lr, batch_size,
                        val_frac, train_seed):
    """Train the proxy-value regressor from a dataset file."""
    res = train_regressor_from_file(
        dataset, hidden=hidden, epochs=epochs, lr=lr, batch_size=batch_size,
        val_frac=val_frac, seed=train_seed,
    )
    save_checkpoint(res.model, out_path, "regressor")
    click.echo(
        f"train loss {res.train_loss:.6g}, validation MSE {res.val_metric:.6g}, "
        f"alpha_eta {res.model.alpha_eta:.4f}; saved to {out_path}"
    )


@main.command("train-classifier")
@click.option("--labels", required=True, type=click.Path(exists=True))
@_train_options
@click.option("--threshold", default=0.5, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def train_classifier_cmd(labels, out_path, hidden, epochs, lr, batch_size,
                         val_frac, train_seed, threshold):
    """Train the useful-cut classifier from a replay-label table."""
    res = train_classifier_from_file(
        labels, hidden=hidden, epochs=epochs, lr=lr, batch_size=batch_size,
        val_frac=val_frac, seed=train_seed, threshold=threshold,
    )
    save_checkpoint(res.model, out_path, "classifier")
    click.echo(
        f"train loss {res.train_loss:.6g}, validation F-score "
        f"{res.val_metric:.4f}; saved to {out_path}"
    )


def _load_models(strategy, regressor_path, classifier_path):
    regressor = classifier = None
    if strategy in ("r", "cr"):
        if not regressor_path:
            raise CliError(f"strategy '{strategy}' needs --regressor")
        regressor = load_checkpoint(regressor_path)
    if strategy in ("c", "cr"):
        if not classifier_path:
            raise CliError(f"strategy '{strategy}' needs --classifier")
        classifier = load_checkpoint(classifier_path)
    return regressor, classifier


@main.command("run")
@click.option("--case", "case_ref", required=True)
@click.option("--strategy", default="conventional", show_default=True,
              type=click.Choice(list(STRATEGIES)))
@_scenario_options
@_benders_options
@click.option("--scenario-file", type=click.Path(exists=True),
              help="Use scenarios from a file instead of drawing them.")
@click.option("--sample-index", default=0, show_default=True)
@click.option("--regressor", "regressor_path", type=click.Path(exists=True))
@click.option("--classifier", "classifier_path", type=click.Path(exists=True))
@click.option("--out-dir", required=True, type=click.Path())
@click.option("--no-timing", is_flag=True,
              help="Zero wall-clock columns for byte-reproducible output.")
def run_cmd(case_ref, strategy, scenario_file, sample_index, regressor_path,
            classifier_path, out_dir, no_timing, epsilon, max_iterations,
            delta, retain, slack_penalty, alpha_eta, lazy_network, backend,
            **scen_kw):
    """Solve one instance with the chosen strategy and write a run report."""
    case = _load_case(case_ref)
    scen_cfg = _scen_cfg(**scen_kw)
    if scenario_file:
        try:
            scen = load_scenarios(scenario_file, case.buses, case.horizon)
        except ScenarioError as exc:
            raise CliError(str(exc)) from exc
    else:
        scen = _draw(case, scen_cfg, sample_index)
    bd_cfg = _benders_cfg(epsilon, max_iterations, delta, retain, slack_penalty,
                          alpha_eta, lazy_network, backend)
    regressor, classifier = _load_models(strategy, regressor_path, classifier_path)
    rep = run(strategy, case, scen, bd_cfg, regressor=regressor,
              classifier=classifier)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_run_report(rep, out / f"report_{strategy}.tsv", not no_timing)
    convergence_figure(rep, out / f"convergence_{strategy}.png")
    click.echo(
        f"{strategy}: converged={rep.converged} iterations={rep.iterations} "
        f"objective={rep.final_objective:.6g}"
    )
    if not rep.converged:
        sys.exit(1)


@main.command("benchmark")
@click.option("--case", "case_ref", required=True)
@click.option("--strategies", default=",".join(STRATEGIES), show_default=True,
              help="Comma-separated subset of strategies.")
@_scenario_options
@_benders_options
@click.option("--sample-index", default=0, show_default=True)
@click.option("--regressor", "regressor_path", type=click.Path(exists=True))
@click.option("--classifier", "classifier_path", type=click.Path(exists=True))
@click.option("--out-dir", required=True, type=click.Path())
@click.option("--no-timing", is_flag=True,
              help="Zero wall-clock columns for byte-reproducible output.")
def benchmark_cmd(case_ref, strategies, sample_index, regressor_path,
                  classifier_path, out_dir, no_timing, epsilon, max_iterations,
                  delta, retain, slack_penalty, alpha_eta, lazy_network,
                  backend, **scen_kw):
    """Run several strategies on the same instance and compare them."""
    names = [s.strip() for s in strategies.split(",") if s.strip()]
    for s in names:
        if s not in STRATEGIES:
            raise CliError(f"unknown strategy '{s}'")
    case = _load_case(case_ref)
    scen_cfg = _scen_cfg(**scen_kw)
    scen = _draw(case, scen_cfg, sample_index)
    bd_cfg = _benders_cfg(epsilon, max_iterations, delta, retain, slack_penalty,
                          alpha_eta, lazy_network, backend)
    sf = build_shift_factors(case)
    reports = {}
    for s in names:
        try:
            regressor, classifier = _load_models(s, regressor_path, classifier_path)
            reports[s] = run(s, case, scen, bd_cfg, sf, regressor=regressor,
                             classifier=classifier)
        except CliError:
            raise
        except Exception:
            log.exception("strategy %s failed", s)
            reports[s] = None
    benchmark_outputs(reports, Path(out_dir), include_timing=not no_timing)
    for s, rep in reports.items():
        if rep is None:
            click.echo(f"{s}: failed")
        else:
            click.echo(
                f"{s}: converged={rep.converged} iterations={rep.iterations} "
                f"objective={rep.final_objective:.6g} "
                f"retained={rep.pool.retained_count}/{rep.pool.total}"
            )
    if any(r is None for r in reports.values()):
        sys.exit(1)


@main.command("replay-label")
@click.option("--case", "case_ref", required=True)
@click.option("--cuts", "cuts_path", required=True, type=click.Path(exists=True))
@_scenario_options
@click.option("--sample-index", default=0, show_default=True)
@click.option("--alpha-min", default=-1e6, show_default=True,
              help="Constant proxy floor used in the replayed masters.")
@click.option("--out", "out_path", required=True, type=click.Path())
def replay_label_cmd(case_ref, cuts_path, sample_index, alpha_min, out_path,
                     **scen_kw):
    """Label an archived cut pool by incremental master replay."""
    case = _load_case(case_ref)
    cfg = _scen_cfg(**scen_kw)
    scen = _draw(case, cfg, sample_index)
    pool = load_cut_archive(cuts_path)
    floors = np.full(scen.n, alpha_min)
    counter = {}
    records = label_by_replay(case, scen, pool, floors, get_backend("highs"),
                              counter=counter)
    save_label_records(records, out_path)
    useful = sum(1 for r in records if r.label == "useful")
    click.echo(
        f"labeled {len(records)} cuts ({useful} useful) with "
        f"{counter.get('solves', 0)} master solves; wrote {out_path}"
    )


if __name__ == "__main__":
    main()
