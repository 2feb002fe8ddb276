"""Matplotlib figures written to files (Agg backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def plot_overlap_study(study, path) -> None:
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.6), sharey=True)
    for (spec, form) in study.estimates:
        for ax, kind in zip(axes, ("amplitude", "ratio")):
            ax.loglog(study.prefixes, study.mae(spec, form, kind), "o-", label=f"{spec} ({form})")
    n = np.array(study.prefixes, dtype=float)
    ref = study.rows[0]["amplitude_mae"] * np.sqrt(n[0] / n)
    for ax, title in zip(axes, ("overlap amplitudes", f"{study.n_ratios} overlap ratios")):
        ax.loglog(n, ref, "k:", lw=1, label=r"$N^{-1/2}$")
        ax.set_xlabel("circuits")
        ax.set_title(title)
    axes[0].set_ylabel("MAE")
    axes[1].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_energy_traces(traces: dict, path, reference: float | None = None) -> None:
    fig, ax = plt.subplots(figsize=(6, 3.6))
    for label, tr in traces.items():
        ax.plot(tr.tau, tr.energy.real, lw=1, label=label)
    if reference is not None:
        ax.axhline(reference, color="k", ls="--", lw=1, label="FCI")
    ax.set_xlabel(r"imaginary time $\tau$ (1/Ha)")
    ax.set_ylabel("energy (Ha)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_calibration(record, path) -> None:
    from .robust import ratio_to_noiseless

    ratio, err = ratio_to_noiseless(record)
    ls = np.arange(ratio.size)
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.errorbar(ls, ratio, yerr=err, fmt="o", capsize=3)
    ax.axhline(1.0, color="k", ls=":", lw=1)
    ax.set_xlabel("l")
    ax.set_ylabel(r"$\tilde f_{2l} / f_{2l}$")
    ax.set_title(f"calibration ({record.variant})")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
