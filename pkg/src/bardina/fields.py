"""Deterministic generators of divergence-free initial data and forces."""

from dataclasses import dataclass

import numpy as np

from .spectral import (
    GridSpec,
    VectorField,
    dealias,
    dealias_mask,
    leray_project,
    mode_indices,
    norms,
    vector_from_physical,
    wavevectors,
)

__all__ = ["FieldRecipe", "generate"]

KINDS = ("shear", "taylor_green", "abc", "random_band")


@dataclass(frozen=True)
class FieldRecipe:
    """Recipe for a divergence-free vector field.

    amplitude scales the physical field for the analytic kinds; for
    random_band it is the target H^1_alpha norm of the result (alpha taken
    from the companion parameter set at generation time, see generate).
    """

    kind: str
    amplitude: float = 1.0
    seed: int = 0
    k_min: int = 1
    k_max: int = 2

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown field kind {self.kind!r}, expected one of {KINDS}")
        if not np.isfinite(self.amplitude):
            raise ValueError("amplitude must be finite")
        if self.kind == "random_band" and self.k_min > self.k_max:
            raise ValueError(f"empty band: k_min={self.k_min} > k_max={self.k_max}")


def _axes(grid):
    x = np.arange(grid.n) * grid.dx
    return np.meshgrid(x, x, x, indexing="ij")


def generate(recipe, grid, alpha=1.0):
    """Build the vector field described by a recipe on a grid.

    All outputs are real, divergence-free (certificate set) and dealiased.
    For random_band, alpha enters the target-norm rescaling.
    """
    if recipe.kind == "shear":
        return _shear(recipe, grid)
    if recipe.kind == "taylor_green":
        return _taylor_green(recipe, grid)
    if recipe.kind == "abc":
        return _abc(recipe, grid)
    return _random_band(recipe, grid, alpha)


def _shear(recipe, grid):
    x, y, z = _axes(grid)
    two_pi_l = 2.0 * np.pi / grid.box_len
    u = np.stack(
        [
            recipe.amplitude * np.sin(two_pi_l * y),
            np.zeros_like(y),
            np.zeros_like(y),
        ]
    )
    return dealias(vector_from_physical(u, grid, div_free=True))


def _taylor_green(recipe, grid):
    x, y, z = _axes(grid)
    q = 2.0 * np.pi / grid.box_len
    a = recipe.amplitude
    u = np.stack(
        [
            a * np.cos(q * x) * np.sin(q * y) * np.sin(q * z),
            -a * np.sin(q * x) * np.cos(q * y) * np.sin(q * z),
            np.zeros_like(x),
        ]
    )
    return dealias(vector_from_physical(u, grid, div_free=True))


def _abc(recipe, grid):
    x, y, z = _axes(grid)
    q = 2.0 * np.pi / grid.box_len
    a = recipe.amplitude
    u = np.stack(
        [
            a * (np.sin(q * z) + np.cos(q * y)),
            a * (np.sin(q * x) + np.cos(q * z)),
            a * (np.sin(q * y) + np.cos(q * x)),
        ]
    )
    return dealias(vector_from_physical(u, grid, div_free=True))


def _random_band(recipe, grid, alpha):
    cutoff = grid.dealias_cutoff
    if recipe.k_max > cutoff or recipe.k_min < 0:
        raise ValueError(
            f"band [{recipe.k_min}, {recipe.k_max}] outside retained modes "
            f"(cutoff {cutoff})"
        )
    rng = np.random.default_rng(recipe.seed)
    m = mode_indices(grid)
    mag = np.sqrt(
        m[:, None, None] ** 2 + m[None, :, None] ** 2 + m[None, None, :] ** 2
    )
    band = (mag >= recipe.k_min) & (mag <= recipe.k_max) & dealias_mask(grid)
    shape = (3, grid.n, grid.n, grid.n)
    coeffs = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * band
    # Hermitian-symmetrize so the field is real in physical space
    flipped = np.conj(np.roll(np.flip(coeffs, axis=(1, 2, 3)), 1, axis=(1, 2, 3)))
    coeffs = 0.5 * (coeffs + flipped)
    v = leray_project(VectorField(grid, coeffs))
    current = norms(v, alpha).h1alpha_sq
    if current > 0:
        v = VectorField(
            grid, v.coeffs * (recipe.amplitude / np.sqrt(current)), div_free=True
        )
    return dealias(v)
