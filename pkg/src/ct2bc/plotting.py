"""Figure rendering for attack reports.

Takes the same records that go into the JSON-lines report and writes one PNG
per report kind: point estimates with Wilson interval bars against m, one
series per (scheme, n).
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_ESTIMATE_FIELDS = {"binding": "equivocable_fraction", "concealment": "guess_advantage"}
_YLABELS = {
    "binding": "equivocable fraction (both-instance payloads)",
    "concealment": "guess advantage over 1/2",
}


def render_attack_figures(records: list[dict], out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for kind, estimate_field in _ESTIMATE_FIELDS.items():
        rows = [r for r in records if r.get("report") == kind]
        if not rows:
            continue
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        for key in sorted({(r["scheme"], r["n"]) for r in rows}):
            series = sorted((r for r in rows if (r["scheme"], r["n"]) == key),
                            key=lambda r: r["m"])
            xs = [r["m"] for r in series]
            ys = [r[estimate_field] for r in series]
            yerr = [[y - r["interval_lo"] for y, r in zip(ys, series)],
                    [r["interval_hi"] - y for y, r in zip(ys, series)]]
            ax.errorbar(xs, ys, yerr=yerr, marker="o", capsize=3,
                        label=f"{key[0]}, n={key[1]}")
        ax.set_xlabel("m")
        ax.set_ylabel(_YLABELS[kind])
        ax.set_title(f"{kind} estimate vs instance size")
        ax.legend(fontsize=8)
        ax.grid(True, alpha=0.3)
        path = out_dir / f"{kind}.png"
        fig.savefig(path, dpi=150, bbox_inches="tight")
        plt.close(fig)
        written.append(path)
    return written
