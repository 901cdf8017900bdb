"""Fields on the periodic box [0, 2pi)^d and their Fourier images.

Real fields are numpy arrays whose trailing ``dim`` axes are the spatial axes
(x, y[, z]) indexed ``ij``; leading axes hold components, e.g. ``(3, N, N)``
for a director on a 2D grid or ``(3, 3, N, N)`` for a stress. Spectral fields
are the matching half-spectrum arrays from a real FFT normalised so that the
k = 0 coefficient is the mean.

Velocity-gradient convention used everywhere in the package::

    grad_v[i, j] = d v_j / d x_i

so that ``D = (grad_v + grad_v^T)/2`` and ``Omega = (grad_v - grad_v^T)/2``,
and the divergence of a tensor contracts its first index,
``(div sigma)_j = sum_i d sigma_ij / d x_i``. Tensors are always 3x3; in 2D
the rows and columns belonging to z are zero.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft

from .errors import ShapeMismatch


def fft_workers() -> int:
    """Thread count for FFTs taken from ``ELFLOW_THREADS`` (0 or unset = all cores)."""
    raw = os.environ.get("ELFLOW_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


@dataclass(frozen=True)
class GridSpec:
    dim: int
    n: int

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")
        if self.n < 8 or self.n % 2:
            raise ValueError(f"n_per_axis must be even and >= 8, got {self.n}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def spectral_shape(self) -> tuple[int, ...]:
        return (self.n,) * (self.dim - 1) + (self.n // 2 + 1,)

    @property
    def axes(self) -> tuple[int, ...]:
        return tuple(range(-self.dim, 0))

    @property
    def cell_volume(self) -> float:
        return (2 * np.pi / self.n) ** self.dim

    @property
    def volume(self) -> float:
        return (2 * np.pi) ** self.dim

    @property
    def default_cutoff(self) -> float:
        """Two-thirds rule radius, (2/3)(N/2)."""
        return self.n / 3.0

    def coords(self) -> tuple[np.ndarray, ...]:
        x = 2 * np.pi * np.arange(self.n) / self.n
        return tuple(np.meshgrid(*([x] * self.dim), indexing="ij"))

    @cached_property
    def k(self) -> tuple[np.ndarray, ...]:
        """Integer wavenumbers, one broadcastable array per axis."""
        full = np.fft.fftfreq(self.n, 1.0 / self.n)
        half = np.fft.rfftfreq(self.n, 1.0 / self.n)
        out = []
        for ax in range(self.dim):
            vals = half if ax == self.dim - 1 else full
            shape = [1] * self.dim
            shape[ax] = vals.size
            out.append(vals.reshape(shape))
        return tuple(out)

    @cached_property
    def k2(self) -> np.ndarray:
        return sum(kk * kk for kk in self.k) * np.ones(self.spectral_shape)

    @cached_property
    def kmag(self) -> np.ndarray:
        return np.sqrt(self.k2)

    @cached_property
    def nyquist_free(self) -> np.ndarray:
        """1 on modes with no component at the Nyquist wavenumber, else 0."""
        mask = np.ones(self.spectral_shape)
        for kk in self.k:
            mask = mask * (np.abs(kk) != self.n // 2)
        return mask

    @cached_property
    def ik(self) -> tuple[np.ndarray, ...]:
        """Derivative multipliers ``i k`` with Nyquist modes removed."""
        return tuple(1j * kk * self.nyquist_free for kk in self.k)

    @cached_property
    def parseval_weight(self) -> np.ndarray:
        """Multiplicity of each stored mode in the full (two-sided) spectrum."""
        w = np.full(self.spectral_shape, 2.0)
        w[..., 0] = 1.0
        w[..., self.n // 2] = 1.0
        return w

    def friedrichs_mask(self, cutoff: float) -> np.ndarray:
        return (self.kmag <= cutoff).astype(float)

    def check_real(self, f: np.ndarray) -> None:
        if f.shape[-self.dim:] != self.shape:
            raise ShapeMismatch(f"field shape {f.shape} does not end with grid shape {self.shape}")

    def check_spectral(self, f_hat: np.ndarray) -> None:
        if f_hat.shape[-self.dim:] != self.spectral_shape:
            raise ShapeMismatch(
                f"spectrum shape {f_hat.shape} does not end with {self.spectral_shape}")


def transform(grid: GridSpec, f: np.ndarray) -> np.ndarray:
    grid.check_real(f)
    return scipy.fft.rfftn(f, axes=grid.axes, norm="forward", workers=fft_workers())


def inverse_transform(grid: GridSpec, f_hat: np.ndarray) -> np.ndarray:
    grid.check_spectral(f_hat)
    return scipy.fft.irfftn(f_hat, s=grid.shape, axes=grid.axes, norm="forward",
                            workers=fft_workers())


# spectral-space operators -------------------------------------------------

def gradient_hat(grid: GridSpec, f_hat: np.ndarray) -> np.ndarray:
    """``out[i, ...] = d_i f`` for every component of ``f``, padded to 3 rows."""
    out = np.zeros((3,) + f_hat.shape, dtype=complex)
    for i, ik in enumerate(grid.ik):
        out[i] = ik * f_hat
    return out


def divergence_hat(grid: GridSpec, f_hat: np.ndarray) -> np.ndarray:
    """Contract the first index: ``sum_i d_i f[i, ...]`` over the grid axes."""
    return sum(ik * f_hat[i] for i, ik in enumerate(grid.ik))


def laplacian_hat(grid: GridSpec, f_hat: np.ndarray) -> np.ndarray:
    return -grid.k2 * grid.nyquist_free * f_hat


def leray_project(grid: GridSpec, v_hat: np.ndarray) -> np.ndarray:
    """Remove the gradient part mode by mode; the mean mode is left alone."""
    d = grid.dim
    if v_hat.shape[0] != d:
        raise ShapeMismatch(f"expected {d} velocity components, got {v_hat.shape[0]}")
    grid.check_spectral(v_hat)
    k2 = np.where(grid.k2 == 0, 1.0, grid.k2)
    kdotv = sum(grid.k[i] * v_hat[i] for i in range(d))
    return np.stack([v_hat[i] - grid.k[i] * kdotv / k2 for i in range(d)])


def friedrichs_project(grid: GridSpec, f_hat: np.ndarray, cutoff: float) -> np.ndarray:
    """Zero every mode with ``|k| > cutoff`` (Euclidean norm)."""
    if not cutoff > 0:
        raise ValueError("cutoff must be positive")
    grid.check_spectral(f_hat)
    return f_hat * grid.friedrichs_mask(cutoff)


def spectral_inner(grid: GridSpec, a_hat: np.ndarray, b_hat: np.ndarray) -> float:
    """L2 inner product over the box of every component, via Parseval."""
    prod = np.real(a_hat * np.conj(b_hat)) * grid.parseval_weight
    return float(grid.volume * prod.sum())


def spectral_norm_sq(grid: GridSpec, a_hat: np.ndarray) -> float:
    return spectral_inner(grid, a_hat, a_hat)


# real-space conveniences --------------------------------------------------

def gradient(grid: GridSpec, f: np.ndarray) -> np.ndarray:
    """Gradient of a scalar field, shape ``(dim, *grid)``.

    For a field with components the result carries the derivative index first
    and always has 3 rows (``grad_f[i, ...] = d_i f[...]``).
    """
    g = inverse_transform(grid, gradient_hat(grid, transform(grid, f)))
    return g[: grid.dim] if f.ndim == grid.dim else g


def divergence(grid: GridSpec, f: np.ndarray) -> np.ndarray:
    return inverse_transform(grid, divergence_hat(grid, transform(grid, f)))


def laplacian(grid: GridSpec, f: np.ndarray) -> np.ndarray:
    return inverse_transform(grid, laplacian_hat(grid, transform(grid, f)))


def curl_hat(grid: GridSpec, v_hat: np.ndarray) -> np.ndarray:
    ik = grid.ik
    if grid.dim == 2:
        return ik[0] * v_hat[1] - ik[1] * v_hat[0]
    return np.stack([ik[1] * v_hat[2] - ik[2] * v_hat[1],
                     ik[2] * v_hat[0] - ik[0] * v_hat[2],
                     ik[0] * v_hat[1] - ik[1] * v_hat[0]])


def curl(grid: GridSpec, v: np.ndarray) -> np.ndarray:
    """Vorticity: a scalar in 2D, a vector in 3D."""
    return inverse_transform(grid, curl_hat(grid, transform(grid, v)))


def velocity_gradient_hat(grid: GridSpec, v_hat: np.ndarray) -> np.ndarray:
    """3x3 spectral tensor ``d_i v_j`` with zero z rows/columns in 2D."""
    out = np.zeros((3, 3) + grid.spectral_shape, dtype=complex)
    for i, ik in enumerate(grid.ik):
        for j in range(v_hat.shape[0]):
            out[i, j] = ik * v_hat[j]
    return out


def velocity_gradient(grid: GridSpec, v: np.ndarray) -> np.ndarray:
    return inverse_transform(grid, velocity_gradient_hat(grid, transform(grid, v)))


def split_gradient(grad_v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    gT = np.swapaxes(grad_v, 0, 1)
    return 0.5 * (grad_v + gT), 0.5 * (grad_v - gT)


def strain_rotation(grid: GridSpec, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Strain ``D`` and rotation ``Omega`` as 3x3 tensor fields."""
    return split_gradient(velocity_gradient(grid, v))


def embed3(grid: GridSpec, v: np.ndarray) -> np.ndarray:
    """Pad a d-component vector field to 3 components."""
    if v.shape[0] == 3:
        return v
    out = np.zeros((3,) + v.shape[1:])
    out[: v.shape[0]] = v
    return out


# snapshot files -----------------------------------------------------------

_MAGIC = "ELFIELD v1"


def write_snapshot(path, grid: GridSpec, t: float, values: np.ndarray) -> None:
    """``ELFIELD v1`` header line then float64 little-endian data.

    Components are written one after another; within a component x varies
    fastest.
    """
    grid.check_real(values)
    values = values.reshape((-1,) + grid.shape)
    header = f"{_MAGIC} dim={grid.dim} n={grid.n} comps={values.shape[0]} t={float(t)!r}\n"
    # x-fastest ordering is Fortran order over the spatial axes
    body = np.concatenate([np.asarray(c, dtype="<f8").ravel(order="F") for c in values])
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(body.tobytes())


def read_snapshot(path) -> tuple[GridSpec, float, np.ndarray]:
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii").strip()
        data = fh.read()
    if not header.startswith(_MAGIC):
        raise ValueError(f"{path}: not an ELFIELD v1 file")
    meta = dict(item.split("=", 1) for item in header[len(_MAGIC):].split())
    grid = GridSpec(int(meta["dim"]), int(meta["n"]))
    comps = int(meta["comps"])
    npts = grid.n ** grid.dim
    if len(data) != 8 * comps * npts:
        raise ValueError(f"{path}: expected {8 * comps * npts} data bytes, found {len(data)}")
    flat = np.frombuffer(data, dtype="<f8").astype(float)
    values = np.stack([flat[c * npts:(c + 1) * npts].reshape(grid.shape, order="F")
                       for c in range(comps)])
    return grid, float(meta["t"]), values
