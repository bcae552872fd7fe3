"""Optional matplotlib rendering for the CLI report paths.

Figures are written next to the delimited output when the user passes
--plot; nothing here runs on the default code path.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

plt.rcParams["figure.figsize"] = (5.5, 3.5)
plt.rcParams["figure.dpi"] = 150
plt.rcParams["savefig.bbox"] = "tight"
plt.rcParams["font.size"] = 9


def render_sweep(rows, limits, path):
    """Eigenvalue branches vs s with the local reference levels.

    rows: dicts with keys s, l, k, mu; limits: {(l, k): mu_local}.
    """
    fig, ax = plt.subplots()
    branches = {}
    for row in rows:
        branches.setdefault((row["l"], row["k"]), []).append((row["s"], row["mu"]))
    for (l, k), pts in sorted(branches.items()):
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts], "o-", ms=3,
                label=f"l={l}, k={k}")
    for (l, k), mu in sorted(limits.items()):
        ax.axhline(mu, color="gray", lw=0.6, ls="--")
    ax.set_xlabel("s")
    ax.set_ylabel("eigenvalue")
    ax.legend(fontsize=7, ncol=2)
    fig.savefig(path)
    plt.close(fig)


def render_bbm(table, target, path):
    """(1-s)-scaled energies against the local Dirichlet-energy target."""
    fig, ax = plt.subplots()
    svals = [row["s"] for row in table]
    lhs = [row["scaled_energy"] for row in table]
    ax.semilogx([1.0 - s for s in svals], lhs, "o-", label="(1-s) [u]^2")
    ax.axhline(target, color="gray", lw=0.8, ls="--", label="local target")
    ax.set_xlabel("1 - s")
    ax.set_ylabel("scaled energy")
    ax.invert_xaxis()
    ax.legend(fontsize=8)
    fig.savefig(path)
    plt.close(fig)


def render_extension(radii, values, path):
    fig, ax = plt.subplots()
    ax.plot(radii, values, "o-", ms=3)
    ax.set_xlabel("r")
    ax.set_ylabel("extension value")
    fig.savefig(path)
    plt.close(fig)
