"""Double-phase potentials, their fluxes, and the lower-order nonlinearity.

Three built-in potential densities A(x, xi):

  typical    1/p(x) |xi|^p(x) + 1/q(x) - 1/p(x)  for |xi| > 1,
             1/q(x) |xi|^q(x)                     for |xi| <= 1
             (continuous with continuous flux across the |xi| = 1 seam)
  weighted   a(x)/p(x) |xi|^p(x) + b(x)/q(x) |xi|^q(x), a, b >= 0
  bcm        |xi|^p(x) + a(x) |xi|^q(x), a >= 0
             (the coefficient-driven double-phase density)

The built-in lower-order term is
  f(x, u) = lam a(x) |u|^(delta(x)-2) u + mu w(x) |u|^(gamma(x)-2) u
with primitive F(x, u) = lam a |u|^delta / delta + mu w |u|^gamma / gamma.
Sign truncation keeps only the part of f pointing in the chosen direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from dphase import _kernels as kern
from dphase.exponents import ExponentField
from dphase.grid import Grid, GridFunction

__all__ = [
    "WeightField",
    "PotentialSpec",
    "NonlinearitySpec",
    "potential_value",
    "flux",
    "nonlinearity_value",
    "truncate_plus",
    "truncate_minus",
    "check_growth_sandwich",
    "check_flux_consistency",
    "check_structural_s",
    "check_uniform_convexity",
    "check_ar_condition",
]

POTENTIAL_KINDS = ("typical", "weighted", "bcm")


class WeightField:
    """A nonnegative coefficient sampled on the full node lattice."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: Grid, values):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != grid.full_shape:
            raise ValueError(f"values shape {values.shape} != {grid.full_shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("weight values must be finite")
        if np.any(values < 0):
            raise ValueError("weight values must be nonnegative")
        self.grid = grid
        self.values = values

    @classmethod
    def constant(cls, grid: Grid, value: float) -> "WeightField":
        return cls(grid, np.full(grid.full_shape, float(value)))

    @classmethod
    def gaussian(cls, grid: Grid, scale: float = 1.0) -> "WeightField":
        """scale * exp(-|x|^2): smooth, positive, integrable against any
        exponent on the truncated box."""
        mesh = grid.full_mesh()
        r2 = sum(m**2 for m in mesh)
        return cls(grid, scale * np.exp(-r2))

    @classmethod
    def from_callable(cls, grid: Grid, fn) -> "WeightField":
        return cls(grid, fn(*grid.full_mesh()) * np.ones(grid.full_shape))

    def interior(self) -> np.ndarray:
        return self.values[(slice(1, -1),) * self.grid.dim]

    def cells(self) -> np.ndarray:
        return self.values[(slice(0, -1),) * self.grid.dim]

    def as_grid_function(self) -> GridFunction:
        return GridFunction(self.grid, self.interior().copy())


@dataclass(frozen=True)
class PotentialSpec:
    kind: str
    p: ExponentField
    q: ExponentField
    a_coef: Optional[WeightField] = None
    b_coef: Optional[WeightField] = None

    def __post_init__(self):
        if self.kind not in POTENTIAL_KINDS:
            raise ValueError(f"kind must be one of {POTENTIAL_KINDS}")
        if not self.p.same_grid(self.q):
            raise ValueError("p and q sampled on different grids")
        if self.kind == "weighted":
            if self.a_coef is None or self.b_coef is None:
                raise ValueError("weighted potential needs a_coef and b_coef")
            if np.any(self.a_coef.values + self.b_coef.values <= 0):
                raise ValueError("weighted potential needs a + b > 0 everywhere")
        if self.kind == "bcm" and self.a_coef is None:
            raise ValueError("bcm potential needs a_coef")

    @property
    def grid(self) -> Grid:
        return self.p.grid

    # -- vectorized density/flux over sampled exponent arrays --------------

    def density_array(self, gmag, pv, qv, av=None, bv=None):
        if self.kind == "typical":
            return kern.typical_potential(gmag, pv, qv)
        if self.kind == "weighted":
            return kern.weighted_potential(gmag, pv, qv, av, bv)
        return kern.bcm_potential(gmag, pv, qv, av)

    def flux_factor_array(self, gmag, pv, qv, av=None, bv=None):
        if self.kind == "typical":
            return kern.typical_flux_factor(gmag, pv, qv)
        if self.kind == "weighted":
            return kern.weighted_flux_factor(gmag, pv, qv, av, bv)
        return kern.bcm_flux_factor(gmag, pv, qv, av)

    def cell_fields(self):
        """(p, q, a, b) sampled at cell anchors, for energy assembly."""
        pv = self.p.cells().ravel()
        qv = self.q.cells().ravel()
        av = self.a_coef.cells().ravel() if self.a_coef is not None else None
        bv = self.b_coef.cells().ravel() if self.b_coef is not None else None
        return pv, qv, av, bv

    def _at_node(self, x):
        idx = _nearest_node(self.grid, x)
        pv = float(self.p.values[idx])
        qv = float(self.q.values[idx])
        av = float(self.a_coef.values[idx]) if self.a_coef is not None else None
        bv = float(self.b_coef.values[idx]) if self.b_coef is not None else None
        return pv, qv, av, bv


def _nearest_node(grid: Grid, x):
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if x.shape != (grid.dim,):
        raise ValueError(f"point must have {grid.dim} components")
    h = grid.spacing
    idx = np.clip(np.rint((x + grid.radius) / h).astype(int), 0,
                  grid.nodes_per_axis - 1)
    return tuple(idx)


def potential_value(spec: PotentialSpec, x, xi) -> float:
    """Branch-selected potential density at a point; exponents and
    coefficients are resolved at the nearest lattice node."""
    xi = np.atleast_1d(np.asarray(xi, dtype=np.float64))
    g = float(np.sqrt(np.sum(xi**2)))
    pv, qv, av, bv = spec._at_node(x)
    if spec.kind == "typical":
        if g <= 1.0:
            return g**qv / qv
        return g**pv / pv + 1.0 / qv - 1.0 / pv
    if spec.kind == "weighted":
        out = 0.0
        if av:
            out += av / pv * g**pv
        if bv:
            out += bv / qv * g**qv
        return out
    out = g**pv
    if av:
        out += av * g**qv
    return out


def flux(spec: PotentialSpec, x, xi) -> np.ndarray:
    """The flux vector, i.e. the xi-derivative of the potential density."""
    xi = np.atleast_1d(np.asarray(xi, dtype=np.float64))
    g = float(np.sqrt(np.sum(xi**2)))
    if g == 0.0:
        return np.zeros_like(xi)
    pv, qv, av, bv = spec._at_node(x)
    if spec.kind == "typical":
        fac = g ** (pv - 2.0) if g > 1.0 else g ** (qv - 2.0)
    elif spec.kind == "weighted":
        fac = 0.0
        if av:
            fac += av * g ** (pv - 2.0)
        if bv:
            fac += bv * g ** (qv - 2.0)
    else:
        fac = pv * g ** (pv - 2.0)
        if av:
            fac += av * qv * g ** (qv - 2.0)
    return fac * xi


# ---------------------------------------------------------------------------
# lower-order nonlinearity


@dataclass(frozen=True)
class NonlinearitySpec:
    lam: float
    mu: float
    a_weight: WeightField
    w_weight: WeightField
    delta: ExponentField
    gamma: ExponentField
    theta: float
    sign_mode: str = "full"  # "full" | "plus" | "minus"

    def __post_init__(self):
        if self.lam < 0 or self.mu < 0:
            raise ValueError("lam must be >= 0 and mu >= 0")
        if self.theta <= 0:
            raise ValueError("theta must be positive")
        if self.sign_mode not in ("full", "plus", "minus"):
            raise ValueError(f"unknown sign_mode {self.sign_mode!r}")

    def _sign_mask(self, u):
        if self.sign_mode == "plus":
            return u > 0.0
        if self.sign_mode == "minus":
            return u < 0.0
        return None

    def force_interior(self, u_interior) -> np.ndarray:
        """f(x, u) at interior nodes, flattened lexicographically."""
        u = np.ascontiguousarray(u_interior, dtype=np.float64).ravel()
        out = np.zeros_like(u)
        if self.lam:
            out += self.lam * self.a_weight.interior().ravel() * \
                kern.signed_power(u, self.delta.interior().ravel())
        if self.mu:
            out += self.mu * self.w_weight.interior().ravel() * \
                kern.signed_power(u, self.gamma.interior().ravel())
        mask = self._sign_mask(u)
        if mask is not None:
            out = np.where(mask, out, 0.0)
        return out

    def primitive_interior(self, u_interior) -> np.ndarray:
        """F(x, u) at interior nodes, flattened lexicographically."""
        u = np.ascontiguousarray(u_interior, dtype=np.float64).ravel()
        out = np.zeros_like(u)
        if self.lam:
            out += self.lam * self.a_weight.interior().ravel() * \
                kern.power_density(u, self.delta.interior().ravel())
        if self.mu:
            out += self.mu * self.w_weight.interior().ravel() * \
                kern.power_density(u, self.gamma.interior().ravel())
        mask = self._sign_mask(u)
        if mask is not None:
            out = np.where(mask, out, 0.0)
        return out


def nonlinearity_value(nl: NonlinearitySpec, x, u: float):
    """(f, F) at a point; weights and exponents at the nearest node."""
    idx = _nearest_node(nl.delta.grid, x)
    a = float(nl.a_weight.values[idx])
    w = float(nl.w_weight.values[idx])
    d = float(nl.delta.values[idx])
    g = float(nl.gamma.values[idx])
    au = abs(u)
    sg = math.copysign(1.0, u) if u != 0 else 0.0
    f = nl.lam * a * au ** (d - 1.0) * sg + nl.mu * w * au ** (g - 1.0) * sg
    F = nl.lam * a * au**d / d + nl.mu * w * au**g / g
    if nl.sign_mode == "plus" and u <= 0:
        # truncated force vanishes off the positive half-line; its primitive
        # integrates the clamped integrand, hence vanishes there too
        f, F = 0.0, 0.0
    if nl.sign_mode == "minus" and u >= 0:
        f, F = 0.0, 0.0
    return f, F


def truncate_plus(nl: NonlinearitySpec) -> NonlinearitySpec:
    """Clamp f below at zero.  The built-in f has the sign of u, so the
    truncation keeps exactly the u > 0 part and the primitive vanishes for
    u < 0."""
    return replace(nl, sign_mode="plus")


def truncate_minus(nl: NonlinearitySpec) -> NonlinearitySpec:
    """Mirror truncation keeping the u < 0 part."""
    return replace(nl, sign_mode="minus")


# ---------------------------------------------------------------------------
# structural check batteries


def _json_float(v):
    return float(v) if math.isfinite(v) else None


def _sample_nodes(grid: Grid, n: int, rng: np.random.Generator):
    flat = rng.integers(0, grid.nodes_per_axis**grid.dim, size=n)
    return np.unravel_index(flat, grid.full_shape)


def _sample_xi(dim: int, n: int, rng: np.random.Generator,
               mag_low=1e-3, mag_high=1e3):
    mags = np.exp(rng.uniform(np.log(mag_low), np.log(mag_high), size=n))
    dirs = rng.normal(size=(n, dim))
    norms = np.sqrt(np.sum(dirs**2, axis=1))
    norms[norms == 0] = 1.0
    return dirs / norms[:, None] * mags[:, None], mags


def _spec_samples(spec: PotentialSpec, samples: int, rng):
    idx = _sample_nodes(spec.grid, samples, rng)
    pv = spec.p.values[idx]
    qv = spec.q.values[idx]
    av = spec.a_coef.values[idx] if spec.a_coef is not None else None
    bv = spec.b_coef.values[idx] if spec.b_coef is not None else None
    return pv, qv, av, bv


@dataclass
class GrowthSandwichReport:
    samples: int
    violations: int
    c1_admissible: float
    c2_admissible: float
    passed: bool

    def to_json_obj(self) -> dict:
        return {
            "condition": "potential growth sandwich",
            "samples": self.samples,
            "violations": self.violations,
            "c1_admissible": _json_float(self.c1_admissible),
            "c2_admissible": _json_float(self.c2_admissible),
            "passed": self.passed,
        }


def check_growth_sandwich(spec: PotentialSpec, samples: int,
                          rng=None) -> GrowthSandwichReport:
    """Against random (x, xi): potential <= flux.xi pointwise, and report the
    extremal constants sandwiching both between the branch envelope
    |xi|^p (|xi| > 1) / |xi|^q (|xi| <= 1)."""
    rng = np.random.default_rng(0) if rng is None else rng
    pv, qv, av, bv = _spec_samples(spec, samples, rng)
    xi, g = _sample_xi(spec.grid.dim, samples, rng)

    dens = spec.density_array(g, pv, qv, av, bv)
    fac = spec.flux_factor_array(g, pv, qv, av, bv)
    flux_dot = fac * g**2

    big = g > 1.0
    envelope = np.where(big, g**pv, g**qv)
    violations = int(np.sum(dens > flux_dot * (1 + 1e-9) + 1e-300))
    lower_ratio = dens / envelope
    upper_ratio = flux_dot / envelope
    c1 = float(np.min(lower_ratio))
    c2 = float(np.max(upper_ratio))
    return GrowthSandwichReport(
        samples=samples, violations=violations,
        c1_admissible=c1, c2_admissible=c2, passed=violations == 0,
    )


@dataclass
class FluxConsistencyReport:
    samples: int
    tested: int
    max_rel_error: float
    seam_band: float
    passed: bool

    def to_json_obj(self) -> dict:
        return {
            "condition": "flux matches potential derivative",
            "samples": self.samples,
            "tested": self.tested,
            "max_rel_error": self.max_rel_error,
            "seam_band": self.seam_band,
            "passed": self.passed,
        }


def check_flux_consistency(spec: PotentialSpec, samples: int, rng=None,
                           seam_band: float = 1e-4,
                           tol: float = 1e-6) -> FluxConsistencyReport:
    """Central finite differences of the potential reproduce the flux to
    ``tol`` relative, away from a thin band around the |xi| = 1 seam where
    the flux may have a kink."""
    rng = np.random.default_rng(0) if rng is None else rng
    idx = _sample_nodes(spec.grid, samples, rng)
    xs = [m[idx] for m in spec.grid.full_mesh()]
    xi, g = _sample_xi(spec.grid.dim, samples, rng, mag_low=1e-2, mag_high=1e2)

    max_rel = 0.0
    tested = 0
    for j in range(samples):
        mag = g[j]
        if abs(mag - 1.0) < seam_band:
            continue
        x = np.array([c[j] for c in xs])
        v = xi[j]
        a = flux(spec, x, v)
        fd = np.empty_like(v)
        step = 1e-6 * max(1.0, mag)
        if abs(mag - 1.0) < 2 * step:
            continue
        for k in range(v.size):
            e = np.zeros_like(v)
            e[k] = step
            fd[k] = (potential_value(spec, x, v + e)
                     - potential_value(spec, x, v - e)) / (2 * step)
        scale = max(float(np.max(np.abs(a))), 1e-12)
        rel = float(np.max(np.abs(a - fd))) / scale
        max_rel = max(max_rel, rel)
        tested += 1
    return FluxConsistencyReport(
        samples=samples, tested=tested, max_rel_error=max_rel,
        seam_band=seam_band, passed=max_rel < tol,
    )


@dataclass
class StructuralSReport:
    samples: int
    violations: int
    max_ratio: float
    passed: bool

    def to_json_obj(self) -> dict:
        return {
            "condition": "flux.xi <= s(x) * potential",
            "samples": self.samples,
            "violations": self.violations,
            "max_ratio": _json_float(self.max_ratio),
            "passed": self.passed,
        }


def check_structural_s(spec: PotentialSpec, s: ExponentField, samples: int,
                       rng=None) -> StructuralSReport:
    """flux.xi <= s(x) * potential over random samples; reports the largest
    observed ratio flux.xi / potential."""
    rng = np.random.default_rng(0) if rng is None else rng
    idx = _sample_nodes(spec.grid, samples, rng)
    pv = spec.p.values[idx]
    qv = spec.q.values[idx]
    av = spec.a_coef.values[idx] if spec.a_coef is not None else None
    bv = spec.b_coef.values[idx] if spec.b_coef is not None else None
    sv = s.values[idx]
    _, g = _sample_xi(spec.grid.dim, samples, rng)

    dens = spec.density_array(g, pv, qv, av, bv)
    flux_dot = spec.flux_factor_array(g, pv, qv, av, bv) * g**2
    pos = dens > 0
    ratio = np.zeros_like(dens)
    ratio[pos] = flux_dot[pos] / dens[pos]
    violations = int(np.sum(flux_dot > sv * dens * (1 + 1e-9) + 1e-300))
    return StructuralSReport(
        samples=samples, violations=violations,
        max_ratio=float(np.max(ratio)) if samples else 0.0,
        passed=violations == 0,
    )


@dataclass
class UniformConvexityReport:
    entries: list  # (eps, delta_hat, pairs_used)
    passed: bool

    def to_json_obj(self) -> dict:
        return {
            "condition": "uniform convexity modulus",
            "entries": [
                {"eps": e, "delta_hat": _json_float(d), "pairs": n}
                for e, d, n in self.entries
            ],
            "passed": self.passed,
        }


def check_uniform_convexity(spec: PotentialSpec, eps_list, samples: int,
                            rng=None) -> UniformConvexityReport:
    """Empirical convexity modulus: for pairs separated by
    |u - v| > eps max(|u|, |v|), the midpoint defect
    1 - 2 A(x, (u+v)/2) / (A(x,u) + A(x,v)) stays positive; its sampled
    minimum is reported per eps.

    The density depends on xi only through its magnitude, so pairs are
    sampled in the plane regardless of the grid dimension; a block of
    near-extremal pairs (equal magnitudes, separation barely above the
    eps cut) is mixed in so the reported modulus tracks the infimum."""
    rng = np.random.default_rng(0) if rng is None else rng
    entries = []
    for eps in eps_list:
        if not 0 < eps < 1:
            raise ValueError("eps values must lie in (0, 1)")
        idx = _sample_nodes(spec.grid, samples, rng)
        pv = spec.p.values[idx]
        qv = spec.q.values[idx]
        av = spec.a_coef.values[idx] if spec.a_coef is not None else None
        bv = spec.b_coef.values[idx] if spec.b_coef is not None else None
        u, _ = _sample_xi(2, samples, rng, mag_low=1e-2, mag_high=1e2)
        v, _ = _sample_xi(2, samples, rng, mag_low=1e-2, mag_high=1e2)
        # near-extremal block: |v| = |u|, rotated so |u - v| = eps |u| (1+)
        k = samples // 4
        sep = eps * (1 + 1e-9)
        phi = 2.0 * np.arcsin(sep / 2.0)
        cos_p, sin_p = np.cos(phi), np.sin(phi)
        v[:k, 0] = cos_p * u[:k, 0] - sin_p * u[:k, 1]
        v[:k, 1] = sin_p * u[:k, 0] + cos_p * u[:k, 1]

        mu_ = np.sqrt(np.sum(u**2, axis=1))
        mv = np.sqrt(np.sum(v**2, axis=1))
        dd = np.sqrt(np.sum((u - v) ** 2, axis=1))
        keep = dd > eps * np.maximum(mu_, mv)
        mid = np.sqrt(np.sum(((u + v) / 2) ** 2, axis=1))

        du = spec.density_array(mu_[keep], pv[keep], qv[keep],
                                None if av is None else av[keep],
                                None if bv is None else bv[keep])
        dv = spec.density_array(mv[keep], pv[keep], qv[keep],
                                None if av is None else av[keep],
                                None if bv is None else bv[keep])
        dm = spec.density_array(mid[keep], pv[keep], qv[keep],
                                None if av is None else av[keep],
                                None if bv is None else bv[keep])
        denom = du + dv
        ok = denom > 0
        defect = 1.0 - 2.0 * dm[ok] / denom[ok]
        delta_hat = float(np.min(defect)) if defect.size else math.nan
        entries.append((float(eps), delta_hat, int(np.sum(keep))))
    passed = all(math.isfinite(d) and d > 0 for _, d, _ in entries)
    return UniformConvexityReport(entries=entries, passed=passed)


@dataclass
class ARReport:
    samples: int
    primitive_violations: int
    scaling_violations: int
    theta: float
    gamma_inf: float
    threshold_ok: bool
    passed: bool

    def to_json_obj(self) -> dict:
        return {
            "condition": "superlinear growth of the odd power term",
            "samples": self.samples,
            "primitive_violations": self.primitive_violations,
            "scaling_violations": self.scaling_violations,
            "theta": self.theta,
            "gamma_inf": self.gamma_inf,
            "threshold_ok": self.threshold_ok,
            "passed": self.passed,
        }


def check_ar_condition(nl: NonlinearitySpec, samples: int,
                       rng=None) -> ARReport:
    """Two displays for the built-in odd power term g = |u|^(gamma-2) u:

      0 < G(x, t) <= (1/theta) t g(x, t)     for t != 0
      G(x, t u)  >= t^theta G(x, u)          for t >= 1

    Both reduce to theta <= gamma(x); the battery samples them directly.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    grid = nl.gamma.grid
    idx = _sample_nodes(grid, samples, rng)
    gv = nl.gamma.values[idx]
    u = np.exp(rng.uniform(np.log(1e-3), np.log(1e3), size=samples))
    u *= rng.choice([-1.0, 1.0], size=samples)
    t = np.exp(rng.uniform(0.0, np.log(50.0), size=samples))  # t >= 1

    G = np.abs(u) ** gv / gv
    ug = np.abs(u) ** gv
    primitive_violations = int(np.sum(nl.theta * G > ug * (1 + 1e-9)))
    G_tu = np.abs(t * u) ** gv / gv
    scaling_violations = int(np.sum(G_tu * (1 + 1e-9) < t**nl.theta * G))
    threshold_ok = nl.theta <= nl.gamma.inf_val + 1e-12
    return ARReport(
        samples=samples,
        primitive_violations=primitive_violations,
        scaling_violations=scaling_violations,
        theta=nl.theta,
        gamma_inf=nl.gamma.inf_val,
        threshold_ok=threshold_ok,
        passed=(primitive_violations == 0 and scaling_violations == 0
                and threshold_ok),
    )
