"""Figure rendering for protocol reports.

Each saver writes one PNG per report into an output directory and returns
the written paths.  Figures are a convenience view of the CSV contents;
the CSV stays the canonical, deterministic output.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .protocols import ESTIMATORS, EvalReport, OptReport, ShiftReport  # noqa: E402

_COLORS = {"dm": "#888888", "ips": "#d95f02", "dr": "#1b9e77"}


def save_eval_figure(report: EvalReport, outdir) -> Path:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    fig, (ax_bias, ax_rmse) = plt.subplots(1, 2, figsize=(8, 3.2))
    xs = range(len(ESTIMATORS))
    colors = [_COLORS[e] for e in ESTIMATORS]
    ax_bias.bar(xs, [abs(report.bias[e]) for e in ESTIMATORS], color=colors)
    ax_bias.set_title("|bias|")
    ax_rmse.bar(xs, [report.rmse[e] for e in ESTIMATORS], color=colors)
    ax_rmse.set_title("rmse")
    for ax in (ax_bias, ax_rmse):
        ax.set_xticks(list(xs))
        ax.set_xticklabels([e.upper() for e in ESTIMATORS])
    fig.suptitle(f"{report.dataset}: policy-value estimation (truth={report.truth:.3f})")
    fig.tight_layout()
    path = outdir / f"eval_{report.dataset}.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_opt_figure(report: OptReport, outdir) -> Path:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    keys = sorted(report.mean_error)
    labels = [f"{learner}/{method}" for learner, method in keys]
    means = [report.mean_error[key] for key in keys]
    stds = [report.std_error[key] for key in keys]
    colors = [_COLORS.get(method, "#555555") for _, method in keys]
    fig, ax = plt.subplots(figsize=(1.4 * len(keys) + 2, 3.2))
    ax.bar(range(len(keys)), means, yerr=stds, color=colors, capsize=3)
    ax.set_xticks(range(len(keys)))
    ax.set_xticklabels(labels)
    ax.set_ylabel("test error")
    ax.set_title(f"{report.dataset}: learned-policy test error")
    fig.tight_layout()
    path = outdir / f"learn_{report.dataset}.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_shift_figure(report: ShiftReport, outdir) -> Path:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    fig, (ax_rmse, ax_bias) = plt.subplots(1, 2, figsize=(8, 3.2))
    for method in ("ips", "dr"):
        ax_rmse.plot(report.fractions, report.rmse[method], "o-",
                     color=_COLORS[method], label=method.upper())
        ax_bias.plot(report.fractions, [abs(b) for b in report.bias[method]], "o-",
                     color=_COLORS[method], label=method.upper())
    for ax, title in ((ax_rmse, "rmse"), (ax_bias, "|bias|")):
        ax.set_xscale("log")
        ax.set_xlabel("subsample fraction")
        ax.set_title(title)
        ax.legend()
    fig.suptitle(f"{report.dataset}: mean-visit estimation error")
    fig.tight_layout()
    path = outdir / f"shift_{report.dataset}.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
