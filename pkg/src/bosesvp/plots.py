"""Static SVG figures for experiment outputs (needs matplotlib)."""
from __future__ import annotations

from collections import defaultdict
from pathlib import Path


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "bosesvp"  # stable element ids
    return plt


def _series(rows, key_cols, x_col, y_col):
    out = defaultdict(list)
    for r in rows:
        out[tuple(r[c] for c in key_cols)].append((r[x_col], r[y_col]))
    return out


def render(output, out_dir) -> list[Path]:
    """One SVG per table, with a layout picked from the table's columns."""
    plt = _pyplot()
    written = []
    for name, (header, rows) in sorted(output.tables.items()):
        if not rows:
            continue
        col = {h: i for i, h in enumerate(header)}
        fig, ax = plt.subplots(figsize=(6, 4))
        if name == "band_heat":
            n = int(max(r[0] for r in rows)) + 1
            grid = [[0.0] * n for _ in range(n)]
            for i, j, v in rows:
                grid[i][j] = v
            im = ax.imshow(grid, cmap="viridis")
            fig.colorbar(im, ax=ax, label="mean |entry| / mean |diagonal|")
        elif "hnf_inf_mean" in col:
            for key, label in (("hnf_inf", "HNF"), ("lll_inf", "LLL"), ("k", "|sum x|")):
                ax.errorbar([r[0] for r in rows], [r[col[key + "_mean"]] for r in rows],
                            yerr=[r[col[key + "_se"]] for r in rows], marker="o", label=label)
            ax.set_xlabel("N")
            ax.legend()
        elif "quantity" in col:
            for (dim, q), pts in sorted(_series(rows, (col["dim"], col["quantity"]), col["T"], col["mean"]).items()):
                ax.plot(*zip(*pts), marker="o", label=f"N={dim} {q}")
            for (dim, q), pts in sorted(_series(rows, (col["dim"], col["quantity"]), col["T"], col["p10"]).items()):
                ax.plot(*zip(*pts), linestyle="--")
            ax.set_xscale("log")
            ax.set_xlabel("T")
            ax.legend()
        elif "rank" in col:
            pts = [(r[col["rank"]], r[col["mean"]]) for r in rows if r[col["rank"]] != "tail"]
            ax.bar(*zip(*pts))
            ax.set_xlabel("rank")
            ax.set_ylabel("mean probability")
        elif header[:2] == ["t", "index_or_rank"]:
            for (i,), pts in sorted(_series(rows, (1,), 0, 2).items()):
                ax.plot(*zip(*pts), label=str(i))
            ax.set_xlabel("t")
            ax.legend()
        else:
            plt.close(fig)
            continue
        ax.set_title(name)
        p = Path(out_dir) / f"{name}.svg"
        fig.savefig(p, format="svg", metadata={"Date": None})
        plt.close(fig)
        written.append(p)
    return written
