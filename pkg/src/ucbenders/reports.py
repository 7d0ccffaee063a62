"""Run/benchmark report files and the matplotlib figures that go with them.

All delimited output uses fixed float formatting so identical runs produce
byte-identical files; wall-clock columns can be zeroed for reproducible
artifacts.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .benders import cost_gap

_F = "{:.10g}".format
_PNG_META = {"Software": None}  # keep PNG output independent of the mpl version


def _fmt_time(value, include_timing):
    return f"{value:.6f}" if include_timing else "0.000000"


def write_run_report(report, path, include_timing=True):
    """Per-iteration TSV with a commented summary header."""
    stats = report.stats
    with open(path, "w") as fh:
        fh.write(f"# strategy\t{report.strategy}\n")
        fh.write(f"# converged\t{int(report.converged)}\n")
        fh.write(f"# iterations\t{report.iterations}\n")
        fh.write(f"# objective\t{_F(report.final_objective)}\n")
        fh.write(f"# total_cuts\t{stats['total']}\n")
        fh.write(f"# retained_cuts\t{report.pool.retained_count}\n")
        fh.write(f"# est_cut_bytes\t{stats['est_bytes']}\n")
        fh.write("k\tlb\tub\tgap\tcuts_added\tcuts_retained\tmp_time\tsp_time\n")
        for r in report.rows:
            fh.write(
                f"{r.k}\t{_F(r.lb)}\t{_F(r.ub)}\t{_F(r.gap)}\t"
                f"{r.cuts_added}\t{r.cuts_retained}\t"
                f"{_fmt_time(r.mp_time, include_timing)}\t"
                f"{_fmt_time(r.sp_time, include_timing)}\n"
            )


def write_benchmark_table(reports, path, include_timing=True):
    """One row per strategy; cost gaps are against the conventional run."""
    f_bd = None
    if "conventional" in reports and reports["conventional"] is not None:
        f_bd = reports["conventional"].final_objective
    with open(path, "w") as fh:
        fh.write(
            "strategy\tconverged\titerations\tobjective\tcostgap_pct\t"
            "total_cuts\tretained_cuts\test_cut_bytes\tmp_time\tsp_time\terror\n"
        )
        for name, rep in reports.items():
            if rep is None:
                fh.write(f"{name}\t0\t0\tnan\tnan\t0\t0\t0\t0.000000\t0.000000\tfailed\n")
                continue
            stats = rep.stats
            gap = cost_gap(rep.final_objective, f_bd) if f_bd else float("nan")
            fh.write(
                f"{name}\t{int(rep.converged)}\t{rep.iterations}\t"
                f"{_F(rep.final_objective)}\t{_F(gap)}\t"
                f"{stats['total']}\t{rep.pool.retained_count}\t{stats['est_bytes']}\t"
                f"{_fmt_time(rep.total_mp_time, include_timing)}\t"
                f"{_fmt_time(rep.total_sp_time, include_timing)}\t-\n"
            )


def convergence_figure(report, path):
    """Lower/upper bound trajectory of one run."""
    ks = [r.k for r in report.rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ks, [r.lb for r in report.rows], marker="o", ms=3, label="lower bound")
    ax.plot(ks, [r.ub for r in report.rows], marker="s", ms=3, label="upper bound")
    ax.set_xlabel("iteration")
    ax.set_ylabel("objective [$]")
    ax.set_title(f"{report.strategy} Benders convergence")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_PNG_META)
    plt.close(fig)


def iterations_figure(reports, path):
    names = [n for n, r in reports.items() if r is not None]
    iters = [reports[n].iterations for n in names]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.bar(names, iters, color="tab:blue")
    ax.set_ylabel("iterations to convergence")
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_PNG_META)
    plt.close(fig)


def memory_figure(reports, path):
    names = [n for n, r in reports.items() if r is not None]
    mem = [reports[n].stats["est_bytes"] / 1024.0 for n in names]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.bar(names, mem, color="tab:orange")
    ax.set_ylabel("estimated cut memory [KiB]")
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_PNG_META)
    plt.close(fig)


def cumulative_cuts_figure(reports, path):
    fig, ax = plt.subplots(figsize=(6, 4))
    for name, rep in reports.items():
        if rep is None:
            continue
        ks = [r.k for r in rep.rows]
        ax.plot(ks, [r.cuts_retained for r in rep.rows], marker=".", label=name)
    ax.set_xlabel("iteration")
    ax.set_ylabel("cuts in master")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_PNG_META)
    plt.close(fig)


def benchmark_outputs(reports, out_dir, include_timing=True):
    """Delimited table plus the three comparison figures."""
    out_dir.mkdir(parents=True, exist_ok=True)
    write_benchmark_table(reports, out_dir / "benchmark.tsv", include_timing)
    for name, rep in reports.items():
        if rep is not None:
            write_run_report(rep, out_dir / f"report_{name}.tsv", include_timing)
            convergence_figure(rep, out_dir / f"convergence_{name}.png")
    iterations_figure(reports, out_dir / "iterations.png")
    memory_figure(reports, out_dir / "memory.png")
    cumulative_cuts_figure(reports, out_dir / "cumulative_cuts.png")
