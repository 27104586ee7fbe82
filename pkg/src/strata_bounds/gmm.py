"""Stacked estimating-equation (GMM) asymptotic variance for the bound
endpoints, via the sandwich V = H^-1 Sigma H^-T and the delta method.

The eleven moment conditions stack the trimmed-mean block (moments 1-6,
parameters theta = (mu12, mu02, mu0, c1, kappa1, kappa2)) on top of the
share block (moments 7-11, parameters gamma = (pi00, pi02, pi12, pi22,
kappa3)).  H is assembled analytically from plug-in cell probabilities,
CDF values, and kernel density estimates at the cutpoint; Sigma is the
weighted empirical second moment of the stacked conditions.

Covariates/blocks are ignored here, as in the derivation: parameters are
plain weighted cell statistics, which coincide with the package's
estimators on single-block samples.  The cutpoint indicator includes the
boundary atom fractionally, so the fitted moment means are exactly zero
on discrete data.

The four targets are handled by symmetry transforms: negating the outcome
maps the upper bound into a lower-bound problem, and swapping take-up
codes 0 and 1 maps the substitutor bound into the complier machinery.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import EstimateReport, Sample, UnitRecord
from .errors import EmptyCell, SingularJacobian, WeakShare, ZeroDensity
from .estimators import DEFAULT_FLOOR

__all__ = ["GmmModel", "fit_gmm", "moment_conditions", "asymptotic_variance",
           "simplified_theta_variance", "TARGETS"]

TARGETS = ("tauL_02", "tauU_02", "tauL_12", "tauU_12")

THETA_NAMES = ("mu12", "mu02", "mu0", "c1", "kappa1", "kappa2")
GAMMA_NAMES = ("pi00", "pi02", "pi12", "pi22", "kappa3")

_DENSITY_FLOOR = 1e-6
_COND_LIMIT = 1e10


@dataclass
class GmmModel:
    theta: np.ndarray        # (6,)
    gamma: np.ndarray        # (5,)
    H: np.ndarray            # (11, 11) Jacobian, block triangular
    Sigma: np.ndarray        # (11, 11) moment covariance
    V: np.ndarray            # (11, 11) sandwich
    f21: float               # density of the treated program cell at c1
    f20: float               # density of the control program cell at c1
    bandwidths: tuple
    phi: float               # fractional inclusion of the atom at c1
    point: float             # the bound endpoint tau
    variance: float          # asymptotic variance of sqrt(N)(tau_hat - tau)
    n: int

    @property
    def se(self) -> float:
        return float(np.sqrt(self.variance / self.n))


def _wmean(w, x):
    return float(np.dot(w, x) / w.sum())


def _silverman_bandwidth(y, w):
    n_eff = w.sum() ** 2 / np.dot(w, w)
    mean = _wmean(w, y)
    sd = np.sqrt(max(_wmean(w, (y - mean) ** 2), 1e-300))
    order = np.argsort(y)
    cw = np.cumsum(w[order]) / w.sum()
    q25, q75 = np.interp([0.25, 0.75], cw, y[order])
    spread = min(sd, (q75 - q25) / 1.34) or sd
    return 0.9 * spread * n_eff ** (-0.2)


def _kde_at(y, w, point, bandwidth=None):
    h = bandwidth if bandwidth else _silverman_bandwidth(y, w)
    z = (point - y) / h
    dens = float(np.dot(w, np.exp(-0.5 * z * z)) / (w.sum() * h * np.sqrt(2 * np.pi)))
    return dens, h


def _fit_cutpoint(y, w, in21, in20, pi02, pi12, pi22):
    """c1 and the fractional tie weight phi, from the raw mixture CDF."""
    switch = pi02 + pi12
    lam = pi02 / switch
    ca = (switch + pi22) / switch
    cb = pi22 / switch

    if cb > 0:
        support = np.unique(np.concatenate([y[in21], y[in20]]))
    else:
        support = np.unique(y[in21])

    def cell_cdf(mask):
        vals, wts = y[mask], w[mask]
        order = np.argsort(vals, kind="stable")
        cw = np.cumsum(wts[order])
        idx = np.searchsorted(vals[order], support, side="right")
        return np.where(idx > 0, cw[np.maximum(idx - 1, 0)], 0.0) / cw[-1]

    f21_cdf = cell_cdf(in21)
    raw = ca * f21_cdf - (cb * cell_cdf(in20) if cb > 0 else 0.0)
    iso = np.minimum(np.maximum.accumulate(np.maximum(raw, 0.0)), 1.0)
    iso[-1] = 1.0
    j = min(int(np.searchsorted(iso, lam - 1e-12)), support.size - 1)
    c1 = float(support[j])
    below = raw[j - 1] if j > 0 else 0.0
    atom = raw[j] - below
    phi = (lam - below) / atom if atom > 0 else 1.0
    return c1, float(np.clip(phi, 0.0, 1.0))


def _indicator(y, c1, phi):
    return (y < c1).astype(float) + phi * (y == c1)


def _relabel_d(sample: Sample) -> Sample:
    d = sample.d.copy()
    swapped = np.where(d == 0, 1, np.where(d == 1, 0, d)).astype(d.dtype)
    return Sample(sample.label, sample.z, swapped, sample.y, sample.weight,
                  sample.cluster_ids, sample.block_ids, sample.unit_ids,
                  sample.aux)

def _negate_y(sample: Sample) -> Sample:
    return Sample(sample.label, sample.z, sample.d, -sample.y, sample.weight,
                  sample.cluster_ids, sample.block_ids, sample.unit_ids,
                  sample.aux)


def _moment_matrix(y, z, d, theta, gamma, phi):
    """(n, 11) matrix of the stacked moment conditions."""
    mu12, mu02, mu0, c1, k1, k2 = theta
    pi00, pi02, pi12, pi22, k3 = gamma
    a3 = pi02 + pi12 + pi22
    ind = _indicator(y, c1, phi)
    z1 = (z == 1).astype(float)
    z0 = 1.0 - z1
    d0 = (d == 0).astype(float)
    d1 = (d == 1).astype(float)
    d2 = (d == 2).astype(float)

    m = np.empty((y.size, 11))
    m[:, 0] = z1 * d2 * (ind * y - mu12)
    m[:, 1] = z0 * d2 * (ind * y - mu02)
    m[:, 2] = z0 * d2 * (k1 - ind)
    m[:, 3] = z1 * d2 * (pi22 * k1 + pi02 - a3 * ind)
    m[:, 4] = z0 * d0 * ((pi00 + pi02) * y - pi02 * mu0 - pi00 * k2)
    m[:, 5] = z1 * d0 * (y - k2)
    m[:, 6] = z1 * (pi00 - d0)
    m[:, 7] = z0 * (pi22 - d2)
    m[:, 8] = z0 * (pi02 + pi00 - d0)
    m[:, 9] = z0 * (pi12 + k3 - d1)
    m[:, 10] = z1 * (k3 - d1)
    return m


def moment_conditions(unit: UnitRecord, theta, gamma,
                      tie_fraction: float = 0.0) -> np.ndarray:
    """The eleven moment conditions evaluated at one unit.

    ``tie_fraction`` is the fractional weight of an outcome exactly at the
    cutpoint; the default 0 is the plain strict-inequality indicator.
    """
    return _moment_matrix(np.array([unit.y]), np.array([unit.z]),
                          np.array([unit.d]), np.asarray(theta, dtype=float),
                          np.asarray(gamma, dtype=float), tie_fraction)[0]


def fit_gmm(sample: Sample, target: str = "tauL_02",
            floor: float = DEFAULT_FLOOR, bandwidth=None) -> GmmModel:
    """Fit all eleven parameters and assemble the sandwich variance."""
    if target not in TARGETS:
        raise ValueError(f"target must be one of {TARGETS}")
    if target in ("tauL_12", "tauU_12"):
        return fit_gmm(_relabel_d(sample), target="tauL_02" if target == "tauL_12"
                       else "tauU_02", floor=floor, bandwidth=bandwidth)
    if target == "tauU_02":
        model = fit_gmm(_negate_y(sample), target="tauL_02", floor=floor,
                        bandwidth=bandwidth)
        model.point = -model.point
        return model

    y, z, d, w = sample.y, sample.z.astype(int), sample.d.astype(int), sample.weight
    W = w.sum()
    z1 = z == 1
    arm_w1, arm_w0 = w[z1].sum(), w[~z1].sum()
    if arm_w1 <= 0 or arm_w0 <= 0:
        raise EmptyCell("an assignment arm has no weight")

    def p_cell(dd, zz):
        mask = (d == dd) & (z == zz)
        return w[mask].sum() / (arm_w1 if zz == 1 else arm_w0)

    pi00 = p_cell(0, 1)
    pi02 = p_cell(0, 0) - pi00
    pi12 = p_cell(1, 0) - p_cell(1, 1)
    pi22 = p_cell(2, 0)
    k3 = p_cell(1, 1)
    if pi02 <= floor or pi02 + pi12 <= floor:
        raise WeakShare(f"pi(0,2) = {pi02:.4f} too small for the GMM fit")

    in21 = z1 & (d == 2)
    in20 = (~z1) & (d == 2)
    in00 = (~z1) & (d == 0)
    in01 = z1 & (d == 0)
    for mask, name in ((in21, "(z=1,d=2)"), (in00, "(z=0,d=0)"), (in01, "(z=1,d=0)")):
        if not np.any(mask):
            raise EmptyCell(f"cell {name} empty")
    if pi22 > 0 and not np.any(in20):
        raise EmptyCell("cell (z=0,d=2) empty but pi(2,2) > 0")

    c1, phi = _fit_cutpoint(y, w, in21, in20, pi02, pi12, pi22)
    ind = _indicator(y, c1, phi)

    mu12 = _wmean(w[in21], ind[in21] * y[in21])
    F21 = _wmean(w[in21], ind[in21])
    if np.any(in20):
        mu02 = _wmean(w[in20], ind[in20] * y[in20])
        k1 = _wmean(w[in20], ind[in20])
    else:
        mu02, k1 = 0.0, 0.0
    E00 = _wmean(w[in00], y[in00])
    k2 = _wmean(w[in01], y[in01])
    mu0 = ((pi00 + pi02) * E00 - pi00 * k2) / pi02

    theta = np.array([mu12, mu02, mu0, c1, k1, k2])
    gamma = np.array([pi00, pi02, pi12, pi22, k3])

    # plug-in probabilities for the Jacobian
    P = {(dd, zz): w[(d == dd) & (z == zz)].sum() / W
         for dd in (0, 1, 2) for zz in (0, 1)}
    P_Z1, P_Z0 = arm_w1 / W, arm_w0 / W
    a3 = pi02 + pi12 + pi22

    f21, h21 = _kde_at(y[in21], w[in21], c1, bandwidth)
    if np.any(in20):
        f20, h20 = _kde_at(y[in20], w[in20], c1, bandwidth)
    else:
        f20, h20 = 0.0, 0.0
    if f21 < _DENSITY_FLOOR:
        raise ZeroDensity(f"f21({c1}) = {f21:.2e} below floor {_DENSITY_FLOOR}")
    if pi22 > 0 and f20 < _DENSITY_FLOOR:
        raise ZeroDensity(f"f20({c1}) = {f20:.2e} below floor {_DENSITY_FLOOR}")

    G_theta = np.zeros((6, 6))
    G_theta[0, 0] = -P[2, 1]
    G_theta[0, 3] = P[2, 1] * c1 * f21
    G_theta[1, 1] = -P[2, 0]
    G_theta[1, 3] = P[2, 0] * c1 * f20
    G_theta[2, 3] = -P[2, 0] * f20
    G_theta[2, 4] = P[2, 0]
    G_theta[3, 3] = -P[2, 1] * a3 * f21
    G_theta[3, 4] = P[2, 1] * pi22
    G_theta[4, 2] = -P[0, 0] * pi02
    G_theta[4, 5] = -P[0, 0] * pi00
    G_theta[5, 5] = -P[0, 1]

    G_gamma = np.zeros((6, 5))
    G_gamma[3, 1] = P[2, 1] * (1.0 - F21)
    G_gamma[3, 2] = -P[2, 1] * F21
    G_gamma[3, 3] = P[2, 1] * (k1 - F21)
    G_gamma[4, 0] = P[0, 0] * (E00 - k2)
    G_gamma[4, 1] = P[0, 0] * (E00 - mu0)

    M_gamma = np.zeros((5, 5))
    M_gamma[0, 0] = P_Z1
    M_gamma[1, 3] = P_Z0
    M_gamma[2, 0] = P_Z0
    M_gamma[2, 1] = P_Z0
    M_gamma[3, 2] = P_Z0
    M_gamma[3, 4] = P_Z0
    M_gamma[4, 4] = P_Z1

    H = np.zeros((11, 11))
    H[:6, :6] = G_theta
    H[:6, 6:] = G_gamma
    H[6:, 6:] = M_gamma

    moments = _moment_matrix(y, z, d, theta, gamma, phi)
    Sigma = (moments.T * w) @ moments / W

    cond = np.linalg.cond(H)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise SingularJacobian(cond)
    Hinv = np.linalg.solve(H, np.eye(11))
    V = Hinv @ Sigma @ Hinv.T

    point = (a3 / pi02) * mu12 - (pi22 / pi02) * mu02 - mu0
    grad = np.array([
        a3 / pi02,
        -pi22 / pi02,
        -1.0,
        -(pi12 + pi22) * mu12 / pi02 ** 2 + pi22 * mu02 / pi02 ** 2,
        mu12 / pi02,
        (mu12 - mu02) / pi02,
    ])
    eta_idx = [0, 1, 2, 7, 8, 9]  # (mu12, mu02, mu0, pi02, pi12, pi22)
    V_eta = V[np.ix_(eta_idx, eta_idx)]
    variance = float(grad @ V_eta @ grad)

    return GmmModel(theta=theta, gamma=gamma, H=H, Sigma=Sigma, V=V,
                    f21=f21, f20=f20, bandwidths=(h21, h20), phi=phi,
                    point=float(point), variance=variance, n=sample.n)


def simplified_theta_variance(model: GmmModel) -> np.ndarray:
    """3x3 covariance of (mu12, mu02, mu0) treating the share block and the
    cutpoint as known: diagonal of the trimmed-moment variances over cell
    probabilities, with zero cross-covariances."""
    mu12, mu02, mu0 = model.theta[:3]
    pi00, pi02, _, _, _ = model.gamma
    # recover the plug-in probabilities from the Jacobian blocks
    P_D2Z1 = -model.H[0, 0]
    P_D2Z0 = -model.H[1, 1]
    P_D0Z0 = -model.H[4, 2] / pi02
    P_D0Z1 = -model.H[5, 5]
    out = np.zeros((3, 3))
    out[0, 0] = model.Sigma[0, 0] / P_D2Z1 ** 2
    out[1, 1] = model.Sigma[1, 1] / P_D2Z0 ** 2 if P_D2Z0 > 0 else 0.0
    var00 = model.Sigma[4, 4] / P_D0Z0  # = E00[(a4 y - a5)^2]
    var01 = model.Sigma[5, 5] / P_D0Z1  # = Var01[y]
    out[2, 2] = var00 / (P_D0Z0 * pi02 ** 2) + pi00 ** 2 * var01 / (P_D0Z1 * pi02 ** 2)
    return out


def asymptotic_variance(sample: Sample, target: str = "tauL_02",
                        floor: float = DEFAULT_FLOOR,
                        bandwidth=None) -> EstimateReport:
    """Delta-method asymptotic SE for one bound endpoint."""
    model = fit_gmm(sample, target=target, floor=floor, bandwidth=bandwidth)
    return EstimateReport(
        name=target, point=model.point, se=model.se, method="analytic",
        meta={"variance": model.variance, "n": model.n,
              "f21": model.f21, "f20": model.f20,
              "bandwidths": list(model.bandwidths)},
    )
