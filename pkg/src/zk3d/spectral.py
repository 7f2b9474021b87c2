"""
Periodic 3D Fourier grids, transforms, derivatives and quadrature.

The box is ``[-pi*l_x, pi*l_x) x [-pi*l_y, pi*l_y) x [-pi*l_z, pi*l_z)`` with
``n`` uniform nodes per axis. A field is represented by its trigonometric
interpolant

    u(x, y, z) = sum_k  u_hat(k) * exp(i (xi_x x + xi_y y + xi_z z)),
    xi_axis = k_axis / l_axis,  k_axis in {-n/2+1, ..., n/2}

so coefficients are referenced to the origin, not to the first node: a
constant ``c`` has zero mode ``c`` and ``cos(x)`` has modes ``+-1`` equal to
1/2. Real data is stored as a half spectrum along z (``rfftn`` layout),
shape ``(n_x, n_y, n_z//2 + 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from .errors import DimensionError, InvalidGridError

_AXES = {"x": 0, "y": 1, "z": 2, 0: 0, 1: 1, 2: 2}

# Passed to scipy.fft as ``workers``; None means single threaded.
_fft_workers: int | None = None


def set_threads(n: int | None) -> None:
    """Hint for the number of threads the FFTs may use."""
    global _fft_workers
    _fft_workers = None if n is None or n <= 1 else int(n)


def _axis(axis) -> int:
    try:
        return _AXES[axis]
    except KeyError:
        raise ValueError(f"axis must be one of x, y, z (got {axis!r})") from None


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid with ``n`` nodes and scale factor ``l`` per axis."""

    n: tuple[int, int, int]
    l: tuple[float, float, float]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.n

    @property
    def spectral_shape(self) -> tuple[int, int, int]:
        return (self.n[0], self.n[1], self.n[2] // 2 + 1)

    @property
    def size(self) -> int:
        return self.n[0] * self.n[1] * self.n[2]

    @property
    def spacing(self) -> tuple[float, float, float]:
        return tuple(2 * np.pi * l / n for n, l in zip(self.n, self.l))

    @property
    def periods(self) -> tuple[float, float, float]:
        return tuple(2 * np.pi * l for l in self.l)

    @property
    def cell_volume(self) -> float:
        dx, dy, dz = self.spacing
        return dx * dy * dz

    @property
    def box_volume(self) -> float:
        return (2 * np.pi) ** 3 * self.l[0] * self.l[1] * self.l[2]

    def nodes(self, axis) -> np.ndarray:
        a = _axis(axis)
        n, l = self.n[a], self.l[a]
        return -np.pi * l + 2 * np.pi * l * np.arange(n) / n

    @cached_property
    def coords(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Node coordinates as broadcastable open-mesh arrays."""
        x, y, z = (self.nodes(a) for a in range(3))
        return x[:, None, None], y[None, :, None], z[None, None, :]

    def mode_indices(self, axis) -> np.ndarray:
        """Integer mode numbers in storage order, Nyquist taken as +n/2."""
        a = _axis(axis)
        n = self.n[a]
        if a == 2:
            return np.arange(n // 2 + 1)
        k = np.fft.fftfreq(n, 1.0 / n).astype(int)
        k[n // 2] = n // 2
        return k

    def wavenumbers(self, axis) -> np.ndarray:
        """Physical wavenumbers xi = k / l in storage order."""
        a = _axis(axis)
        return self.mode_indices(a) / self.l[a]

    def _broadcast(self, vec: np.ndarray, a: int) -> np.ndarray:
        shape = [1, 1, 1]
        shape[a] = vec.size
        return vec.reshape(shape)

    @cached_property
    def xi(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return tuple(self._broadcast(self.wavenumbers(a), a) for a in range(3))

    @cached_property
    def xi_odd(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Wavenumbers with the unpaired Nyquist entry zeroed (odd operators)."""
        out = []
        for a in range(3):
            k = self.wavenumbers(a).copy()
            k[self.n[a] // 2] = 0.0
            out.append(self._broadcast(k, a))
        return tuple(out)

    @cached_property
    def xi_squared(self) -> np.ndarray:
        kx, ky, kz = self.xi
        return kx**2 + ky**2 + kz**2

    @cached_property
    def _sign(self) -> np.ndarray:
        # (-1)^(kx+ky+kz): moves the phase reference from the first node to the origin
        s = [self._broadcast(1 - 2 * (self.mode_indices(a) % 2), a) for a in range(3)]
        return (s[0] * s[1] * s[2]).astype(np.float64)

    @cached_property
    def hermitian_weights(self) -> np.ndarray:
        """Multiplicity of each stored half-spectrum mode in the full cube."""
        w = np.full(self.n[2] // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        return w[None, None, :]

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """2/3-rule mask: True where every |k_axis| <= n_axis/3."""
        m = np.ones(self.spectral_shape, dtype=bool)
        for a in range(3):
            keep = np.abs(self.mode_indices(a)) <= self.n[a] // 3
            m &= self._broadcast(keep, a)
        return m

    def __repr__(self):
        return f"Grid(n={self.n}, l={self.l})"


def make_grid(n, l) -> Grid:
    """Build a grid; ``n`` and ``l`` may be scalars or 3-sequences."""
    n = tuple(np.broadcast_to(np.asarray(n), (3,)).tolist())
    l = tuple(float(v) for v in np.broadcast_to(np.asarray(l, dtype=float), (3,)))
    for v in n:
        if int(v) != v or v < 4 or int(v) % 2:
            raise InvalidGridError(f"mode counts must be even integers >= 4, got {n}")
    for v in l:
        if not np.isfinite(v) or v <= 0:
            raise InvalidGridError(f"scale factors must be positive, got {l}")
    return Grid(tuple(int(v) for v in n), l)


@dataclass(frozen=True, eq=False)
class RealField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise DimensionError(
                f"values of shape {self.values.shape} do not match grid {self.grid.shape}"
            )

    def max(self) -> float:
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True, eq=False)
class SpectralField:
    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        if self.coeffs.shape != self.grid.spectral_shape:
            raise DimensionError(
                f"coefficients of shape {self.coeffs.shape} do not match "
                f"half spectrum {self.grid.spectral_shape}"
            )

    def full_cube(self) -> np.ndarray:
        """Coefficients over the whole (n_x, n_y, n_z) index cube, FFT ordering."""
        g = self.grid
        nz = g.n[2]
        full = np.empty(g.shape, dtype=complex)
        h = self.coeffs
        full[:, :, : nz // 2 + 1] = h
        # c(-k) = conj(c(k)) for the missing negative kz
        neg = np.conj(h[:, :, 1 : nz // 2][::-1, ::-1, ::-1])
        full[:, :, nz // 2 + 1 :] = np.roll(neg, (1, 1), axis=(0, 1))
        return full


# raw transforms: coefficients referenced to the first node, used in hot loops


def rfft_raw(values: np.ndarray) -> np.ndarray:
    return sfft.rfftn(values, norm="forward", workers=_fft_workers)


def irfft_raw(coeffs: np.ndarray, shape) -> np.ndarray:
    return sfft.irfftn(coeffs, s=shape, norm="forward", workers=_fft_workers)


def forward_transform(u: RealField) -> SpectralField:
    g = u.grid
    if u.values.shape != g.shape:
        raise DimensionError("field shape does not match its grid")
    return SpectralField(g, rfft_raw(u.values) * g._sign)


def inverse_transform(uh: SpectralField) -> RealField:
    g = uh.grid
    if uh.coeffs.shape != g.spectral_shape:
        raise DimensionError("coefficient shape does not match its grid")
    return RealField(g, irfft_raw(uh.coeffs * g._sign, g.shape))


def spectral_derivative(uh: SpectralField, axis, order: int = 1) -> SpectralField:
    """Multiply by (i xi_axis)^order; odd orders drop the Nyquist mode."""
    a = _axis(axis)
    g = uh.grid
    k = g.xi_odd[a] if order % 2 else g.xi[a]
    return SpectralField(g, uh.coeffs * (1j * k) ** order)


def gradient(u: RealField) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Physical-space partial derivatives (u_x, u_y, u_z)."""
    g = u.grid
    raw = rfft_raw(u.values)
    return tuple(irfft_raw(raw * (1j * g.xi_odd[a]), g.shape) for a in range(3))


def integrate(u) -> float:
    """Periodic rectangle rule over the box. Accepts a RealField."""
    return float(u.grid.cell_volume * np.sum(u.values))


def spectral_inner(a: SpectralField, b: SpectralField) -> float:
    """Real inner product sum over the full index cube of conj(a) * b."""
    w = a.grid.hermitian_weights
    return float(np.sum(w * (a.coeffs.real * b.coeffs.real + a.coeffs.imag * b.coeffs.imag)))


def spectral_norm(a: SpectralField) -> float:
    """l2 norm of the full coefficient cube; equals the RMS of the field."""
    return float(np.sqrt(spectral_inner(a, a)))


def _shift_phase(g: Grid, a: int, shift: float) -> np.ndarray:
    k = g.mode_indices(a)
    turns = np.mod(k * (shift / g.periods[a]), 1.0)
    ph = np.exp(-2j * np.pi * turns)
    # Nyquist behaves as cos(xi x); its shift is the real factor cos(xi a)
    nyq = g.n[a] // 2
    ph[nyq] = np.cos(2 * np.pi * turns[nyq])
    return g._broadcast(ph, a)


def translate(field, shift):
    """Shift a field by ``shift`` = (a_x, a_y, a_z): returns u(x - a).

    Works on SpectralField (pure phase multiplication, exact for band-limited
    fields) or RealField (via transforms).
    """
    if isinstance(field, RealField):
        return inverse_transform(translate(forward_transform(field), shift))
    g = field.grid
    c = field.coeffs
    for a, s in enumerate(shift):
        if s != 0:
            c = c * _shift_phase(g, a, float(s))
    return SpectralField(g, c)


def _eval_matrix(g: Grid, a: int, points: np.ndarray) -> np.ndarray:
    n = g.n[a]
    k = np.fft.fftfreq(n, 1.0 / n)
    xi = k / g.l[a]
    m = np.exp(1j * np.outer(points, xi))
    m[:, n // 2] = np.cos(points * (n // 2) / g.l[a])
    return m


def evaluate_tensor(uh: SpectralField, px, py, pz) -> np.ndarray:
    """Evaluate the trigonometric interpolant on the tensor grid px x py x pz."""
    c = uh.full_cube()
    g = uh.grid
    for a, p in enumerate((px, py, pz)):
        m = _eval_matrix(g, a, np.asarray(p, dtype=float))
        c = np.moveaxis(np.tensordot(c, m, axes=([a], [1])), -1, a)
    return c.real


def _deriv_rows(g: Grid, a: int, x: float) -> np.ndarray:
    n = g.n[a]
    xi = np.fft.fftfreq(n, 1.0 / n) / g.l[a]
    e = np.exp(1j * xi * x)
    rows = np.stack([e, 1j * xi * e, -(xi * xi) * e])
    k = xi[n // 2]
    rows[:, n // 2] = [np.cos(k * x), -k * np.sin(k * x), -k * k * np.cos(k * x)]
    return rows


def point_jet(full: np.ndarray, g: Grid, point) -> np.ndarray:
    """Derivatives of the interpolant at one point, up to second order per axis.

    ``full`` is ``SpectralField.full_cube()``. Entry (i, j, k) of the result
    is d^i/dx^i d^j/dy^j d^k/dz^k u at ``point``, for i, j, k in {0, 1, 2}.
    """
    mx, my, mz = (_deriv_rows(g, a, float(point[a])) for a in range(3))
    t = np.tensordot(full, mz, axes=([2], [1]))
    t = np.tensordot(t, my, axes=([1], [1]))
    t = np.tensordot(t, mx, axes=([0], [1]))
    return np.transpose(t, (2, 1, 0)).real


def field_from_function(grid: Grid, f) -> RealField:
    """Sample ``f(x, y, z)`` (broadcasting open mesh) at the grid nodes."""
    x, y, z = grid.coords
    vals = np.broadcast_to(np.asarray(f(x, y, z), dtype=float), grid.shape)
    return RealField(grid, np.ascontiguousarray(vals))


def node_coordinates(grid: Grid, index) -> tuple[float, float, float]:
    return tuple(float(grid.nodes(a)[i]) for a, i in enumerate(index))
