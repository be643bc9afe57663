"""Fourier-space fields and linear operators on the periodic box [0, L]^3.

Conventions used throughout:

  * A scalar field is stored as the full complex coefficient array of shape
    (n, n, n) in numpy FFT ordering, with integer mode index m per axis and
    physical wavevector k = 2*pi*m / L.
  * Coefficients are normalized so that u(x) = sum_m c_m exp(i k.x), i.e.
    c = fftn(samples) / n^3.  With this normalization Parseval reads
    integral |u|^2 dx = L^3 * sum_m |c_m|^2.
  * Dealiasing keeps mode indices with |m_i| <= floor(dealias_fraction*n/2)
    on every axis (2/3-rule truncation by default).
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "GridSpec",
    "SpectralField",
    "VectorField",
    "PhysParams",
    "NormBundle",
    "forward_transform",
    "inverse_transform",
    "helmholtz_filter",
    "leray_project",
    "gradient",
    "divergence",
    "laplacian",
    "dealias",
    "norms",
    "h1alpha_inner",
    "pressure_from_velocity",
]

DIV_FREE_TOL = 1e-10


@dataclass(frozen=True)
class GridSpec:
    """Cubic periodic grid: n modes per dimension on the box [0, box_len]^3."""

    n: int
    box_len: float = 2.0 * np.pi
    dealias_fraction: float = 2.0 / 3.0

    def __post_init__(self):
        if self.n < 4 or self.n % 2 != 0:
            raise ValueError(f"grid size must be even and >= 4, got {self.n}")
        if not self.box_len > 0:
            raise ValueError(f"box length must be positive, got {self.box_len}")
        if not 0.0 < self.dealias_fraction <= 1.0:
            raise ValueError(
                f"dealias fraction must lie in (0, 1], got {self.dealias_fraction}"
            )

    @property
    def dx(self):
        return self.box_len / self.n

    @property
    def dealias_cutoff(self):
        """Largest retained |m_i| after dealiasing."""
        return int(np.floor(self.dealias_fraction * self.n / 2))


@lru_cache(maxsize=32)
def mode_indices(grid):
    """Integer mode index m along one axis, in FFT ordering."""
    return np.fft.fftfreq(grid.n, 1.0 / grid.n).astype(np.int64)


@lru_cache(maxsize=32)
def wavevectors(grid):
    """Physical wavevector components, shape (3, n, n, n)."""
    k1 = 2.0 * np.pi * mode_indices(grid) / grid.box_len
    kx, ky, kz = np.meshgrid(k1, k1, k1, indexing="ij")
    return np.stack([kx, ky, kz])


@lru_cache(maxsize=32)
def wavenumber_sq(grid):
    k = wavevectors(grid)
    return k[0] ** 2 + k[1] ** 2 + k[2] ** 2


@lru_cache(maxsize=32)
def dealias_mask(grid):
    """Boolean mask of retained modes: |m_i| <= cutoff on every axis."""
    m = mode_indices(grid)
    keep = np.abs(m) <= grid.dealias_cutoff
    return keep[:, None, None] & keep[None, :, None] & keep[None, None, :]


@dataclass
class SpectralField:
    """One real scalar field as complex Fourier coefficients on a grid."""

    grid: GridSpec
    coeffs: np.ndarray

    def __post_init__(self):
        n = self.grid.n
        if self.coeffs.shape != (n, n, n):
            raise ValueError(
                f"coefficient array shape {self.coeffs.shape} does not match grid n={n}"
            )

    def copy(self):
        return SpectralField(self.grid, self.coeffs.copy())

    def hermitian_defect(self):
        """Max |c(-m) - conj(c(m))| relative to the largest coefficient."""
        flipped = _reverse_modes(self.coeffs)
        scale = max(np.abs(self.coeffs).max(), 1e-300)
        return np.abs(flipped - np.conj(self.coeffs)).max() / scale


@dataclass
class VectorField:
    """Three scalar spectral fields on a shared grid, forming a vector field."""

    grid: GridSpec
    coeffs: np.ndarray  # shape (3, n, n, n)
    div_free: bool = False

    def __post_init__(self):
        n = self.grid.n
        if self.coeffs.shape != (3, n, n, n):
            raise ValueError(
                f"vector coefficient shape {self.coeffs.shape} does not match grid n={n}"
            )
        if self.div_free:
            d = self.div_defect()
            if d > DIV_FREE_TOL:
                raise ValueError(
                    f"div_free certificate violated: max mode divergence {d:.3e}"
                )

    def component(self, i):
        return SpectralField(self.grid, self.coeffs[i])

    def copy(self):
        return VectorField(self.grid, self.coeffs.copy(), self.div_free)

    def div_defect(self):
        """Max over modes of |k . u_hat(k)| / max(1, |u_hat(k)|)."""
        k = wavevectors(self.grid)
        kdotu = np.abs(np.sum(k * self.coeffs, axis=0))
        mag = np.sqrt(np.sum(np.abs(self.coeffs) ** 2, axis=0))
        return (kdotu / np.maximum(1.0, mag)).max()

    def hermitian_defect(self):
        flipped = _reverse_modes(self.coeffs)
        scale = max(np.abs(self.coeffs).max(), 1e-300)
        return np.abs(flipped - np.conj(self.coeffs)).max() / scale


@dataclass(frozen=True)
class PhysParams:
    """Filter length alpha, damping rate beta, viscosity nu, and the
    configurable numerical constant entering the eta(beta) quantity."""

    alpha: float
    beta: float
    nu: float
    eta_c: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "beta", "nu", "eta_c"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass(frozen=True)
class NormBundle:
    """Squared L2, homogeneous H1/H2 seminorms and the H1_alpha energy norm."""

    l2_sq: float
    h1dot_sq: float
    h2dot_sq: float
    h1alpha_sq: float


def _reverse_modes(coeffs):
    """Map coefficient index m -> -m on the last three axes."""
    out = np.flip(coeffs, axis=(-3, -2, -1))
    return np.roll(out, 1, axis=(-3, -2, -1))


def forward_transform(physical_samples, grid=None):
    """Physical samples on the n^3 grid -> SpectralField."""
    samples = np.asarray(physical_samples, dtype=np.float64)
    if samples.ndim != 3 or len(set(samples.shape)) != 1:
        raise ValueError(f"expected a cubic sample array, got shape {samples.shape}")
    n = samples.shape[0]
    if n % 2 != 0:
        raise ValueError(f"sample array size must be even, got {n}")
    if grid is None:
        grid = GridSpec(n)
    elif grid.n != n:
        raise ValueError(f"sample array size {n} does not match grid n={grid.n}")
    coeffs = np.fft.fftn(samples) / n**3
    return SpectralField(grid, coeffs)


def inverse_transform(field):
    """SpectralField -> real physical samples on the n^3 grid."""
    n = field.grid.n
    return np.real(np.fft.ifftn(field.coeffs) * n**3)


def vector_from_physical(samples, grid, div_free=False):
    """Stack of 3 physical component arrays -> VectorField."""
    coeffs = np.stack(
        [forward_transform(samples[i], grid).coeffs for i in range(3)]
    )
    return VectorField(grid, coeffs, div_free=div_free)


def vector_to_physical(v):
    """VectorField -> physical component arrays, shape (3, n, n, n)."""
    return np.stack([inverse_transform(v.component(i)) for i in range(3)])


def _check_shared_grid(*fields):
    g = fields[0].grid
    for f in fields[1:]:
        if f.grid != g:
            raise ValueError("fields do not share a grid")
    return g


def helmholtz_filter(v, alpha):
    """Bessel-potential smoothing: per-mode division by (1 + alpha^2 |k|^2)."""
    ksq = wavenumber_sq(v.grid)
    sym = 1.0 / (1.0 + alpha**2 * ksq)
    if isinstance(v, SpectralField):
        return SpectralField(v.grid, v.coeffs * sym)
    return VectorField(v.grid, v.coeffs * sym, div_free=v.div_free)


def leray_project(v):
    """Project onto divergence-free fields: u_hat -> u_hat - k (k.u_hat)/|k|^2."""
    grid = v.grid
    k = wavevectors(grid)
    ksq = wavenumber_sq(grid).copy()
    ksq[0, 0, 0] = 1.0  # k=0 acts as the identity
    kdotu = np.sum(k * v.coeffs, axis=0)
    out = v.coeffs - k * (kdotu / ksq)
    return VectorField(grid, out, div_free=True)


def gradient(field):
    """Scalar field -> vector field with components i k_j * f_hat."""
    k = wavevectors(field.grid)
    return VectorField(field.grid, 1j * k * field.coeffs)


def divergence(v):
    """Vector field -> scalar field i k . u_hat."""
    k = wavevectors(v.grid)
    return SpectralField(v.grid, 1j * np.sum(k * v.coeffs, axis=0))


def laplacian(field):
    """Multiply by -|k|^2 (works for scalar and vector fields)."""
    ksq = wavenumber_sq(field.grid)
    if isinstance(field, SpectralField):
        return SpectralField(field.grid, -ksq * field.coeffs)
    return VectorField(field.grid, -ksq * field.coeffs, div_free=field.div_free)


def dealias(v):
    """Zero every mode with any |m_i| beyond the dealias cutoff."""
    mask = dealias_mask(v.grid)
    if isinstance(v, SpectralField):
        return SpectralField(v.grid, v.coeffs * mask)
    return VectorField(v.grid, v.coeffs * mask, div_free=v.div_free)


def norms(v, alpha):
    """Parseval norms of a vector field: L^3 * sum |k|^{2s} |u_hat|^2."""
    grid = v.grid
    vol = grid.box_len**3
    ksq = wavenumber_sq(grid)
    mag2 = np.sum(np.abs(v.coeffs) ** 2, axis=0)
    l2 = vol * float(np.sum(mag2))
    h1 = vol * float(np.sum(ksq * mag2))
    h2 = vol * float(np.sum(ksq**2 * mag2))
    return NormBundle(l2, h1, h2, l2 + alpha**2 * h1)


def h1alpha_inner(v, w, alpha):
    """Energy-space inner product (v,w)_L2 + alpha^2 (grad v, grad w)_L2."""
    grid = _check_shared_grid(v, w)
    vol = grid.box_len**3
    ksq = wavenumber_sq(grid)
    dots = np.sum(np.conj(v.coeffs) * w.coeffs, axis=0)
    return vol * float(np.real(np.sum((1.0 + alpha**2 * ksq) * dots)))


def l2_inner(v, w):
    grid = _check_shared_grid(v, w)
    vol = grid.box_len**3
    return vol * float(np.real(np.sum(np.conj(v.coeffs) * w.coeffs)))


def tensor_product_spectra(u):
    """Dealiased spectra of the products u_i u_j, shape (3, 3, n, n, n).

    Products are formed in physical space; with the 2/3-rule truncation the
    result is the exact Galerkin projection of u (x) u.
    """
    grid = u.grid
    n = grid.n
    phys = vector_to_physical(dealias(u))
    mask = dealias_mask(grid)
    out = np.empty((3, 3, n, n, n), dtype=np.complex128)
    for i in range(3):
        for j in range(i, 3):
            cij = np.fft.fftn(phys[i] * phys[j]) / n**3 * mask
            out[i, j] = cij
            if j != i:
                out[j, i] = cij
    return out


def pressure_from_velocity(u, alpha):
    """Recover the pressure from the velocity via the Riesz-transform formula:
    p_hat(k) = sum_ij (-k_i k_j / |k|^2) (1 + alpha^2 |k|^2)^{-1} (u_i u_j)_hat,
    with p_hat(0) = 0."""
    grid = u.grid
    k = wavevectors(grid)
    ksq = wavenumber_sq(grid).copy()
    ksq[0, 0, 0] = 1.0
    tensor = tensor_product_spectra(u)
    bessel = 1.0 / (1.0 + alpha**2 * wavenumber_sq(grid))
    p = np.zeros((grid.n,) * 3, dtype=np.complex128)
    for i in range(3):
        for j in range(3):
            p += (-k[i] * k[j] / ksq) * bessel * tensor[i, j]
    p[0, 0, 0] = 0.0
    return SpectralField(grid, p)
