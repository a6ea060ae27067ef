"""Figure rendering for experiment and diagnostic outputs.

SVGs must be byte-identical across runs with the same inputs, so every
save pins the SVG id hash salt, keeps text as text instead of paths
(fonts enter the file by name only), and strips the creation date.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_RC = {"svg.hashsalt": "mlrsolve", "svg.fonttype": "none"}
_FLOOR = 1e-16  # display floor so exact zeros survive the log axis


def _save(fig, path) -> None:
    with matplotlib.rc_context(_RC):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def save_error_figure(path, n_values, errors_by_cluster, title="coefficient error vs n") -> None:
    """Log-log polyline per cluster of matched coefficient error vs n.

    errors_by_cluster maps a cluster index to one error value per entry
    of n_values (typically the mean over trials).
    """
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    for kk in sorted(errors_by_cluster):
        ys = [max(float(e), _FLOOR) for e in errors_by_cluster[kk]]
        ax.plot(list(n_values), ys, marker="o", label=f"cluster {kk}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("coefficient error")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    _save(fig, path)


def save_rate_figure(path, rows, title="single-cluster rate diagnostics") -> None:
    """Log-log empirical error curve plus the three bound shapes.

    Rows with missing bounds (NaN) simply leave gaps in those curves.
    """
    ns = [r.n for r in rows]
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    ax.plot(ns, [max(r.error, _FLOOR) for r in rows], marker="o", label="error")
    ax.plot(ns, [r.bound_thm2 for r in rows], linestyle="--", label="bound_thm2")
    ax.plot(ns, [r.bound_thm3 for r in rows], linestyle="--", label="bound_thm3")
    ax.plot(ns, [r.bound_classical for r in rows], linestyle=":", label="bound_classical")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("value (bounds drawn with constant 1)")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    _save(fig, path)
