"""Static figures written next to the CSV/JSON reports.

Figures are rendered with the Agg canvas directly, so importing this module
never touches the global pyplot state or needs a display.
"""

from __future__ import annotations

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 7,
    "lines.linewidth": 1.2,
}


def _figure(width=4.5, height=3.2):
    fig = Figure(figsize=(width, height), dpi=150)
    FigureCanvasAgg(fig)
    return fig


def _save(fig, path):
    fig.tight_layout()
    # empty metadata keeps PNG bytes stable across runs
    fig.savefig(path, metadata={"Software": None} if str(path).endswith(".png") else None)


def plot_sweep(sweep, path, from_levels=(0, 1), max_level=4):
    """Transition frequencies versus flux."""
    import matplotlib as mpl

    with mpl.rc_context(RC):
        fig = _figure()
        ax = fig.add_subplot()
        flux = np.array([f.f for f, _ in sweep])
        for i in from_levels:
            for j in range(i + 1, max_level + 1):
                if j >= sweep[0][1].n_levels:
                    continue
                freq = np.array([t.freq[i, j] for _, t in sweep])
                ax.plot(flux, freq, label=f"{i}-{j}")
        ax.set_xlabel(r"flux ($\Phi_0$)")
        ax.set_ylabel("transition frequency (GHz)")
        ax.legend(ncol=2, frameon=False)
        _save(fig, path)


def plot_table1(rows, path, columns=None):
    """Relative deviation from the reference values, one marker per device and column."""
    import matplotlib as mpl

    columns = columns or [
        "f01_GHz", "ratio_12_01", "chi01_MHz", "tan_delta_C",
        "tan_delta_AlOx", "x_qp", "tan_delta_L_formula",
    ]
    with mpl.rc_context(RC):
        fig = _figure(6.0, 3.4)
        ax = fig.add_subplot()
        x = np.arange(len(columns))
        width = 0.8 / max(len(rows), 1)
        for k, row in enumerate(rows):
            dev = [row.get(f"{c}_rel_dev") for c in columns]
            dev = [np.nan if d is None else 100 * d for d in dev]
            ax.bar(x + (k - len(rows) / 2) * width, dev, width, label=row["device"])
        ax.axhline(0, color="k", lw=0.6)
        ax.set_xticks(x)
        ax.set_xticklabels(columns, rotation=30, ha="right")
        ax.set_ylabel("deviation from reference (%)")
        ax.set_yscale("symlog", linthresh=10)
        ax.legend(ncol=4, frameon=False)
        _save(fig, path)


def plot_fit(data, result, path, f_readout=7.5, n_grid=201):
    """Measured lines with the fitted model overlaid."""
    import matplotlib as mpl

    from .fitting import model_frequencies

    with mpl.rc_context(RC):
        fig = _figure()
        ax = fig.add_subplot()
        labels = sorted(set(data.labels))
        bias = data.bias
        grid = np.linspace(bias.min(), bias.max(), n_grid)
        for k, label in enumerate(labels):
            mask = np.array([lab == label for lab in data.labels])
            color = f"C{k % 10}"
            ax.errorbar(bias[mask], data.freq[mask], yerr=data.sigma[mask], fmt="o", ms=3,
                        color=color, label=label)
            model = model_frequencies(result.params, result.calib, grid, [label] * len(grid), f_readout)
            ax.plot(grid, model, color=color)
        ax.set_xlabel("bias (arb. units)")
        ax.set_ylabel("frequency (GHz)")
        ax.legend(frameon=False)
        _save(fig, path)
