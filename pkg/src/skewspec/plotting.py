"""Plot-ready outputs for sampled spectral densities.

The primary artefacts are CSV tables and a gnuplot script that renders them;
a PNG can additionally be drawn with matplotlib when it is installed.
"""
from __future__ import annotations

import csv
import os

import numpy as np

from .verify.density import DensityHistogram

__all__ = ["DENSITY2D_COLUMNS", "DENSITY_REAL_COLUMNS", "density_rows", "write_density_csv",
           "gnuplot_script", "render_png"]

DENSITY2D_COLUMNS = ("x", "y", "density", "count")
DENSITY_REAL_COLUMNS = ("x", "density", "count")


def density_rows(hist: DensityHistogram):
    """(2D rows, real-axis rows) with bin centres, densities and raw counts."""
    d2 = hist.density2d
    rows2 = [
        (float(x), float(y), float(d2[i, j]), int(hist.counts2d[i, j]))
        for i, x in enumerate(hist.x_centers)
        for j, y in enumerate(hist.y_centers)
    ]
    dr = hist.density_real
    rows1 = [(float(x), float(dr[i]), int(hist.counts_real[i])) for i, x in enumerate(hist.real_centers)]
    return rows2, rows1


def write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in r])


def write_density_csv(hist: DensityHistogram, path2d, path_real):
    rows2, rows1 = density_rows(hist)
    write_csv(path2d, DENSITY2D_COLUMNS, rows2)
    write_csv(path_real, DENSITY_REAL_COLUMNS, rows1)


def gnuplot_script(csv2d: str, csv_real: str, png: str, title: str = "") -> str:
    """Script drawing the 2D density as an image and the real-axis density as boxes."""
    c2, cr, out = (os.path.basename(p) for p in (csv2d, csv_real, png))
    return "\n".join([
        "# spectral density of sampled eigenvalues",
        "set datafile separator comma",
        "set terminal pngcairo size 1200,520",
        f"set output '{out}'",
        "set multiplot layout 1,2" + (f" title '{title}'" if title else ""),
        "set xlabel 'Re z'",
        "set ylabel 'Im z'",
        "set size ratio -1",
        "set palette rgbformulae 33,13,10",
        f"plot '{c2}' skip 1 using 1:2:3 with image notitle",
        "unset size",
        "set xlabel 'x'",
        "set ylabel 'real eigenvalue density'",
        "set style fill solid 0.5",
        f"plot '{cr}' skip 1 using 1:2 with boxes notitle",
        "unset multiplot",
        "",
    ])


def render_png(hist: DensityHistogram, path, title: str = "") -> None:
    """Draw both densities with matplotlib (Agg backend, no timestamp metadata)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, (a1, a2) = plt.subplots(1, 2, figsize=(12, 5.2))
    ext = [hist.x_edges[0], hist.x_edges[-1], hist.y_edges[0], hist.y_edges[-1]]
    im = a1.imshow(hist.density2d.T, origin="lower", extent=ext, aspect="equal", cmap="viridis")
    fig.colorbar(im, ax=a1)
    a1.set_xlabel("Re z")
    a1.set_ylabel("Im z")
    a2.bar(hist.real_centers, hist.density_real, width=np.diff(hist.real_edges), alpha=0.6)
    a2.set_xlabel("x")
    a2.set_ylabel("real eigenvalue density")
    if title:
        fig.suptitle(title)
    fig.savefig(path, dpi=80, metadata={"Software": None})
    plt.close(fig)
