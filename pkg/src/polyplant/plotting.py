"""Time-series plots of simulation logs as deterministic SVG files.

Simulated channels are drawn dashed, measured overlays solid, sharing one
color per channel name.  SVG output is made byte-stable by pinning the
hash salt used for element ids and stripping the wall-clock timestamp from
the file metadata, so repeated runs of the same command produce identical
files.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import InvalidInputError

_HASHSALT = "polyplant"


def plot_channels(path: str, t_sim, sim_channels: dict,
                  measured: dict = None, title: str = None) -> None:
    """Write one SVG panel of the given channels over time.

    sim_channels maps channel name to values on t_sim (seconds).  measured,
    when given, maps channel name to a (times, values) pair drawn solid on
    top of the dashed simulated line of the same color.
    """
    if not sim_channels:
        raise InvalidInputError("no channels selected for plotting")

    with plt.rc_context({"svg.hashsalt": _HASHSALT}):
        fig, ax = plt.subplots(figsize=(9.0, 5.0))
        t_min = np.asarray(t_sim, dtype=float) / 60.0
        cycle = plt.rcParams["axes.prop_cycle"].by_key()["color"]
        for i, (name, values) in enumerate(sim_channels.items()):
            color = cycle[i % len(cycle)]
            ax.plot(t_min, np.asarray(values, dtype=float),
                    linestyle="--", color=color, label=f"{name} (sim)")
            if measured and name in measured:
                tm, vm = measured[name]
                ax.plot(np.asarray(tm, dtype=float) / 60.0,
                        np.asarray(vm, dtype=float),
                        linestyle="-", color=color, label=f"{name} (meas)")
        ax.set_xlabel("time (min)")
        ax.grid(True, alpha=0.3)
        if title:
            ax.set_title(title)
        ax.legend(loc="best", fontsize="small")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
