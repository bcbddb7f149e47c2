"""Histograms of sampled spectra."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..ensembles import EnsembleSpec
from ..errors import DomainError
from .mc import draw_samples

__all__ = ["DensityHistogram", "mc_density_histogram", "mirror_chi2"]


@dataclass(frozen=True)
class DensityHistogram:
    """Normalised spectral densities from ``samples`` matrices.

    ``density2d[i, j]`` is the density of all eigenvalues at
    (x_centers[i], y_centers[j]); it integrates to the matrix size n.
    ``density_real[i]`` is the density of real eigenvalues, integrating to the
    mean number of real eigenvalues.  The y bins are symmetric about 0 and odd
    in number, so real eigenvalues fill the central row.
    """

    x_edges: np.ndarray
    y_edges: np.ndarray
    counts2d: np.ndarray
    real_edges: np.ndarray
    counts_real: np.ndarray
    samples: int
    n: int
    real_fraction: float

    @property
    def x_centers(self):
        return 0.5 * (self.x_edges[1:] + self.x_edges[:-1])

    @property
    def y_centers(self):
        return 0.5 * (self.y_edges[1:] + self.y_edges[:-1])

    @property
    def real_centers(self):
        return 0.5 * (self.real_edges[1:] + self.real_edges[:-1])

    @property
    def density2d(self):
        area = np.outer(np.diff(self.x_edges), np.diff(self.y_edges))
        return self.counts2d / (self.samples * area)

    @property
    def density_real(self):
        return self.counts_real / (self.samples * np.diff(self.real_edges))


def mc_density_histogram(spec: EnsembleSpec, samples: int, bins: int, seed: int = 0,
                         extent: float | None = None, tol_scale: float = 1e-9,
                         threads: int = 1) -> DensityHistogram:
    """2D histogram of all eigenvalues and 1D histogram of the real ones.

    An eigenvalue counts as real when |Im| <= tol_scale (1 + |lambda|), the
    rule used for classifying single spectra.  ``extent`` is the half width
    of the square window; by default the 99.9th percentile of |lambda|.
    """
    if bins < 1:
        raise DomainError("bins must be positive")
    S = draw_samples(spec, spec.n, samples, seed, 0, threads)
    ev = S.eigs.ravel()
    if extent is None:
        extent = float(np.quantile(np.abs(ev), 0.999)) if ev.size else 1.0
        extent = max(extent, 1e-12)
    x_edges = np.linspace(-extent, extent, bins + 1)
    ny = bins if bins % 2 else bins + 1
    y_edges = np.linspace(-extent, extent, ny + 1)
    counts2d, _, _ = np.histogram2d(ev.real, ev.imag, bins=[x_edges, y_edges])
    is_real = np.abs(ev.imag) <= tol_scale * (1 + np.abs(ev))
    counts_real, _ = np.histogram(ev[is_real].real, bins=x_edges)
    frac = float(is_real.mean()) if ev.size else 0.0
    return DensityHistogram(x_edges, y_edges, counts2d, x_edges.copy(), counts_real, S.size, spec.n, frac)


def mirror_chi2(hist: DensityHistogram) -> dict:
    """Chi-square of the 2D counts against their reflection y -> -y.

    Pairs (i, j) and (i, ny-1-j) above the central row are compared with
    (a - b)^2 / (a + b); empty pairs are skipped.  Degrees of freedom = number
    of nonempty pairs.
    """
    c = hist.counts2d
    ny = c.shape[1]
    top = c[:, ny // 2 + 1:]
    bot = c[:, : ny // 2][:, ::-1]
    s = top + bot
    mask = s > 0
    chi2 = float(np.sum((top[mask] - bot[mask]) ** 2 / s[mask]))
    dof = int(mask.sum())
    return {"chi2": chi2, "dof": dof, "reduced": chi2 / dof if dof else 0.0}
