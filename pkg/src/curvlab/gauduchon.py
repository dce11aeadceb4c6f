"""Conformal changes, the Gauduchon factor equation, and verdicts.

The Gauduchon condition for e^f omega is linear in u = e^((n-1) f): the
top-form i d dbar (u omega^(n-1)) must vanish.  The solver discretizes
that operator over a basis of smooth functions on the manifold (Galerkin,
with quadrature inner products), finds the near-null vector by shifted
inverse-power iteration, and enforces positivity of u.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from . import forms
from .errors import (
    NonConvergence,
    NoPositiveNullVector,
    NotGauduchon,
    QuadratureUnsupported,
)
from .fields import ScalarField
from .geometry import (
    DerivativeEngine,
    HermitianMetricField,
    MetricJet,
    QuadratureGrid,
)
from .tensors import chern_ricci, chern_ricci_from_jet, scalar_and_torsion_from_jet

CHUNK = 2048


# ---------------------------------------------------------------------------
# conformal machinery
# ---------------------------------------------------------------------------


@dataclass
class ConformalFactor:
    """Mean-zero scalar factor f with omega_f = e^f omega.

    Carries both the node values on its grid and, when produced by the
    solver or built from a field, a smooth evaluator with analytic jets.
    """

    grid: Optional[QuadratureGrid]
    values: np.ndarray
    field: Optional[ScalarField] = None
    normalization: str = "mean-zero"

    @classmethod
    def from_field(cls, grid: QuadratureGrid, fld: ScalarField):
        vals = np.real(fld(grid.nodes).val)
        mean = float(np.mean(vals))
        return cls(grid, vals - mean, fld - mean)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(self.values)):
            raise ValueError("conformal factor has non-finite values")

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))


def compose_conformal_jet(base: MetricJet, uj) -> MetricJet:
    """Jet of u * h from the jets of the positive factor u and of h."""
    H = uj.val[..., None, None] * base.H
    d1 = (
        uj.d1[..., :, None, None] * base.H[..., None, :, :]
        + uj.val[..., None, None, None] * base.d1
    )
    d2 = (
        uj.d2[..., :, :, None, None] * base.H[..., None, None, :, :]
        + uj.d1[..., :, None, None, None] * base.d1[..., None, :, :, :]
        + uj.d1[..., None, :, None, None] * base.d1[..., :, None, :, :]
        + uj.val[..., None, None, None, None] * base.d2
    )
    return MetricJet(H, d1, d2)


def conformal_metric(metric: HermitianMetricField, factor) -> HermitianMetricField:
    """The metric e^f h with derivative evaluators composed by product rule."""
    fld = factor.field if isinstance(factor, ConformalFactor) else factor
    if fld is None:
        raise ValueError("conformal factor lacks a smooth field evaluator")

    def value(z):
        u = np.exp(np.real(fld(z).val))
        return u[..., None, None] * metric.value(z)

    jet_fn = None
    if metric.jet_fn is not None:

        def jet_fn(z):
            return compose_conformal_jet(metric.jet_fn(z), fld(z).exp())

    return HermitianMetricField(
        n=metric.n,
        value_fn=value,
        jet_fn=jet_fn,
        domain=metric.domain,
        name=f"conformal({metric.name})",
    )


# ---------------------------------------------------------------------------
# the Gauduchon operator u -> density of i d dbar (u omega^(n-1))
# ---------------------------------------------------------------------------


def _alpha_tower(jet: MetricJet):
    """Coefficient arrays of omega^(n-1) and its d, dbar, d dbar."""
    n = jet.n
    if n < 2:
        raise ValueError("the Gauduchon equation degenerates for n = 1")
    H, d1H, d2H = jet.H, jet.d1, jet.d2
    w = forms.omega_array(H)  # (1,1)
    dw = 1j * (d1H[..., :n, :, :] - np.einsum("...kij->...ikj", d1H[..., :n, :, :]))
    # dbar omega, stored (1,2): arr[i, l, j] = -i (d_lbar H[i,j] - d_jbar H[i,l])
    dbw = -1j * (
        np.einsum("...lij->...ilj", d1H[..., n:, :, :])
        - np.einsum("...jil->...ilj", d1H[..., n:, :, :])
    )
    # d dbar omega, stored (2,2): arr[k, i, l, j]
    M = d2H[..., :n, n:, :, :]  # M[k, l, i, j] = d_k d_lbar H[i, j]
    ddbw = -1j * (
        np.einsum("...klij->...kilj", M)
        - np.einsum("...ilkj->...kilj", M)
        - np.einsum("...kjil->...kilj", M)
        + np.einsum("...ijkl->...kilj", M)
    )

    if n == 2:
        alpha, pa, qa = w, 1, 1
        d_alpha, dbar_alpha, ddbar_alpha = dw, dbw, ddbw
        d_p, db_p, dd_p = (2, 1), (1, 2), (2, 2)
    else:
        wk, pk, qk = forms.wedge_power(w, 1, 1, n - 2)
        alpha = forms.wedge(w, 1, 1, wk, pk, qk)
        pa = qa = n - 1
        d_alpha = (n - 1) * forms.wedge(dw, 2, 1, wk, pk, qk)
        dbar_alpha = (n - 1) * forms.wedge(dbw, 1, 2, wk, pk, qk)
        first = forms.wedge(ddbw, 2, 2, wk, pk, qk)
        if n == 3:
            cross = forms.wedge(dbw, 1, 2, dw, 2, 1)
        else:
            wk3, p3, q3 = forms.wedge_power(w, 1, 1, n - 3)
            cross = forms.wedge(forms.wedge(dbw, 1, 2, dw, 2, 1), 3, 3, wk3, p3, q3)
        ddbar_alpha = (n - 1) * (first - (n - 2) * cross)
        d_p, db_p, dd_p = (pa + 1, qa), (pa, qa + 1), (pa + 1, qa + 1)
    return {
        "alpha": (alpha, pa, qa),
        "d": (d_alpha,) + d_p,
        "dbar": (dbar_alpha,) + db_p,
        "ddbar": (ddbar_alpha,) + dd_p,
    }


def gauduchon_operator_coefficients(jet: MetricJet):
    """Pointwise coefficients (a, b_holo, b_anti, c) of the scalar operator

    L u = sum a[i,j] d_i d_jbar u + sum b_holo[i] d_i u
          + sum b_anti[j] d_jbar u + c u,

    where L u is the density of i d dbar (u omega^(n-1)) against the
    volume form.
    """
    n = jet.n
    tower = _alpha_tower(jet)
    H = jet.H
    alpha, pa, qa = tower["alpha"]
    d_alpha, pd, qd = tower["d"]
    db_alpha, pb, qb = tower["dbar"]
    dd_alpha, _, _ = tower["ddbar"]

    batch = H.shape[:-2]
    a = np.zeros(batch + (n, n), dtype=complex)
    b_holo = np.zeros(batch + (n,), dtype=complex)
    b_anti = np.zeros(batch + (n,), dtype=complex)
    for i in range(n):
        ei = np.zeros(n, dtype=complex)
        ei[i] = 1.0
        for j in range(n):
            ej = np.zeros(n, dtype=complex)
            ej[j] = 1.0
            unit = 1j * np.einsum("i,j->ij", ei, ej)  # i dz^i ^ dzbar^j
            a[..., i, j] = forms.density(forms.wedge(unit, 1, 1, alpha, pa, qa), H)
        # i dz^i ^ dbar(alpha)
        b_holo[..., i] = forms.density(forms.wedge(1j * ei, 1, 0, db_alpha, pb, qb), H)
        # -i dzbar^i ^ d(alpha)
        b_anti[..., i] = forms.density(forms.wedge(-1j * ei, 0, 1, d_alpha, pd, qd), H)
    c = 1j * forms.density(dd_alpha, H)
    return a, b_holo, b_anti, c


def apply_gauduchon_operator(coeffs, ujet):
    """L u from precomputed coefficients and the Jet2 of u."""
    a, b_holo, b_anti, c = coeffs
    n = a.shape[-1]
    d1, d2 = ujet.d1, ujet.d2
    mixed = d2[..., :n, n:]
    out = (
        np.einsum("...ij,...ij->...", a, mixed)
        + np.einsum("...i,...i->...", b_holo, d1[..., :n])
        + np.einsum("...i,...i->...", b_anti, d1[..., n:])
        + c * ujet.val
    )
    return out


def gauduchon_residual(metric: HermitianMetricField, where, engine: Optional[DerivativeEngine] = None):
    """Normalized density of i d dbar omega^(n-1).

    On a quadrature grid the max over nodes is returned; for a plain point
    array (pointwise-only charts) the per-point values come back instead.
    """
    if isinstance(where, QuadratureGrid):
        nodes = where.nodes
        reduce_max = True
    else:
        nodes = np.asarray(where, dtype=complex)
        reduce_max = False
    vals = []
    for lo in range(0, len(nodes), CHUNK):
        jet = metric.jet(nodes[lo : lo + CHUNK], engine)
        tower = _alpha_tower(jet)
        dd_alpha, _, _ = tower["ddbar"]
        vals.append(np.real(1j * forms.density(dd_alpha, jet.H)))
    vals = np.concatenate(vals)
    if reduce_max:
        return float(np.max(np.abs(vals)))
    return vals


# ---------------------------------------------------------------------------
# solver
# ---------------------------------------------------------------------------


@dataclass
class GauduchonSolution:
    factor: ConformalFactor
    u_nodes: np.ndarray
    eigen_residual: float
    iterations: int
    converged: bool


def solve_gauduchon_factor(
    metric: HermitianMetricField,
    grid: QuadratureGrid,
    engine: Optional[DerivativeEngine] = None,
    tol: float = 1e-10,
    max_iter: int = 60,
    prune_tol: float = 1e-9,
    positivity_tol: float = 1e-8,
) -> ConformalFactor:
    """Gauduchon factor of the conformal class of `metric` on `grid`.

    The positive null vector of the discretized operator gives
    u = e^((n-1) f); f is returned mean-zero over the grid nodes.
    """
    sol = solve_gauduchon(metric, grid, engine, tol, max_iter, prune_tol, positivity_tol)
    return sol.factor


def solve_gauduchon(
    metric: HermitianMetricField,
    grid: QuadratureGrid,
    engine: Optional[DerivativeEngine] = None,
    tol: float = 1e-10,
    max_iter: int = 60,
    prune_tol: float = 1e-9,
    positivity_tol: float = 1e-8,
) -> GauduchonSolution:
    if grid is None or grid.basis is None:
        raise QuadratureUnsupported("manifold provides no quadrature grid / basis")
    n = metric.n
    if n < 2:
        raise ValueError("the Gauduchon factor is only determined for n >= 2")
    basis = grid.basis
    nodes = grid.nodes
    N = len(nodes)
    m = len(basis)

    w = _volume_weights(metric, grid, engine)

    coeff_chunks = []
    for lo in range(0, N, CHUNK):
        jet = metric.jet(nodes[lo : lo + CHUNK], engine)
        coeff_chunks.append(gauduchon_operator_coefficients(jet))

    vals = np.empty((m, N))
    lvals = np.empty((m, N))
    for ci, lo in enumerate(range(0, N, CHUNK)):
        pts = nodes[lo : lo + CHUNK]
        if grid.basis_batch is not None:
            jets = grid.basis_batch(pts)
        else:
            jets = [phi(pts) for phi in basis]
        for k, uj in enumerate(jets):
            vals[k, lo : lo + len(pts)] = np.real(uj.val)
            lvals[k, lo : lo + len(pts)] = np.real(
                apply_gauduchon_operator(coeff_chunks[ci], uj)
            )

    gram = (vals * w) @ vals.T
    evals, evecs = np.linalg.eigh(gram)
    keep = evals > prune_tol * np.max(evals)
    T = (evecs[:, keep] / np.sqrt(evals[keep])).T  # orthonormalizing transform
    M = T @ ((vals * w) @ lvals.T) @ T.T

    scale = np.linalg.norm(M, ord=np.inf) or 1.0
    shift = 1e-12 * scale
    x = T @ gram[:, 0]  # start at the projection of the constant function
    x /= np.linalg.norm(x)
    A = M + shift * np.eye(M.shape[0])
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        try:
            y = np.linalg.solve(A, x)
        except np.linalg.LinAlgError:
            A = M + (10.0 * shift) * np.eye(M.shape[0])
            y = np.linalg.solve(A, x)
        x_new = y / np.linalg.norm(y)
        if x_new @ x < 0:
            x_new = -x_new
        drift = float(np.linalg.norm(x_new - x))
        x = x_new
        if drift <= max(tol, 1e-13):
            converged = True
            break
    if not converged:
        raise NonConvergence(
            f"inverse-power iteration did not stabilize in {max_iter} iterations"
        )
    res = float(np.linalg.norm(M @ x)) / scale

    c_cand = T.T @ x
    u_nodes = c_cand @ vals
    dominant = int(np.argmax(np.abs(u_nodes)))
    if u_nodes[dominant] < 0:
        c_cand = -c_cand
        u_nodes = -u_nodes
    if np.min(u_nodes) <= positivity_tol * np.max(np.abs(u_nodes)):
        raise NoPositiveNullVector(
            f"null vector changes sign (min {np.min(u_nodes):.3e}, max {np.max(u_nodes):.3e}); "
            "discretization too coarse"
        )

    coeffs = np.asarray(c_cand, dtype=float)
    keep = np.abs(coeffs) > 1e-14 * np.max(np.abs(coeffs))
    terms = [(float(coeffs[k]), basis[k]) for k in np.nonzero(keep)[0]]

    def u_fn(z):
        out = terms[0][1](z) * terms[0][0]
        for ck, phik in terms[1:]:
            out = out + phik(z) * ck
        return out

    u_field = ScalarField(u_fn, "gauduchon-u")
    f_nodes = np.log(u_nodes) / (n - 1)
    mean = float(np.mean(f_nodes))
    f_field = u_field.log() * (1.0 / (n - 1)) - mean
    factor = ConformalFactor(grid, f_nodes - mean, f_field)
    return GauduchonSolution(factor, u_nodes, res, it, converged)


def _volume_weights(metric, grid, engine=None):
    H = metric.value(grid.nodes)
    dens = np.real(np.linalg.det(H)) * 2.0**metric.n
    return grid.lebesgue_w * dens


# ---------------------------------------------------------------------------
# totals and the conformal total-curvature identity
# ---------------------------------------------------------------------------


def total_chern_scalar(
    metric: HermitianMetricField,
    grid: QuadratureGrid,
    engine: Optional[DerivativeEngine] = None,
    residual_tol: float = 1e-4,
) -> float:
    """Integral of the Chern scalar curvature over the grid.

    Guarded by the Gauduchon residual: the total is the verdict-driving
    quantity only on a Gauduchon representative.
    """
    res = gauduchon_residual(metric, grid, engine)
    if res > residual_tol:
        raise NotGauduchon(f"residual {res:.3e} exceeds {residual_tol:g}")
    w = _volume_weights(metric, grid, engine)
    out = 0.0
    for lo in range(0, len(grid.nodes), CHUNK):
        _, s_c = chern_ricci(metric, grid.nodes[lo : lo + CHUNK], engine)
        out += float(np.sum(w[lo : lo + CHUNK] * s_c))
    return out


@dataclass
class TotalCurvatureCheck:
    lhs: float
    rhs: float
    residual: float
    gradient_term: float
    factor: ConformalFactor
    solver_converged: bool


def _total_identity(metric, grid, f: ConformalFactor, engine=None):
    """Both routes to the Gauduchon total: Chern side and Riemannian side.

    lhs = integral of s_C(omega_f) against the volume of omega_f;
    rhs = integral of e^((n-1) f) (s/2 + |T|^2/4) against the base volume
          plus (n-1)^2 ||df||^2 taken with respect to omega_f.
    Also returns the volume of omega_f.
    """
    n = metric.n
    w = _volume_weights(metric, grid, engine)
    nodes = grid.nodes
    lhs = 0.0
    rhs_bulk = 0.0
    grad_term = 0.0
    vol_f = 0.0
    for lo in range(0, len(nodes), CHUNK):
        pts = nodes[lo : lo + CHUNK]
        wi = w[lo : lo + CHUNK]
        fj = f.field(pts)
        fval = np.real(fj.val)
        base_jet = metric.jet(pts, engine)
        _, s_c_f = chern_ricci_from_jet(compose_conformal_jet(base_jet, fj.exp()))
        lhs += float(np.sum(wi * np.exp(n * fval) * s_c_f))
        vol_f += float(np.sum(wi * np.exp(n * fval)))
        s, tsq = scalar_and_torsion_from_jet(base_jet)
        rhs_bulk += float(np.sum(wi * np.exp((n - 1) * fval) * (0.5 * s + 0.25 * tsq)))
        Hinv = np.linalg.inv(base_jet.H)
        df2 = np.real(
            np.einsum("...i,...ji,...j->...", fj.d1[..., :n], Hinv, fj.d1[..., n:])
        )
        grad_term += float(np.sum(wi * np.exp((n - 1) * fval) * df2))
    grad_term *= (n - 1) ** 2
    return lhs, rhs_bulk + grad_term, grad_term, vol_f


def theorem_t_check(
    metric: HermitianMetricField,
    grid: QuadratureGrid,
    engine: Optional[DerivativeEngine] = None,
    **solver_kw,
) -> TotalCurvatureCheck:
    """Total Chern scalar curvature of the Gauduchon representative vs the
    conformally weighted Riemannian scalar / torsion integral.
    """
    sol = solve_gauduchon(metric, grid, engine, **solver_kw)
    lhs, rhs, grad_term, _ = _total_identity(metric, grid, sol.factor, engine)
    residual = abs(lhs - rhs) / (1.0 + abs(lhs))
    return TotalCurvatureCheck(lhs, rhs, residual, grad_term, sol.factor, sol.converged)


# ---------------------------------------------------------------------------
# verdicts
# ---------------------------------------------------------------------------


class KodairaStatement(str, Enum):
    NOT_PSEF = "NotPseudoEffective_KappaMinusInfinity"
    KAHLER_CY = "KahlerCalabiYau_RicciFlat"
    INDETERMINATE = "Indeterminate"


@dataclass
class Verdict:
    """Classification record driven by the Gauduchon total curvature sign."""

    manifold: str
    total_chern_scalar: float
    sign: str  # positive | zero | negative
    kodaira_statement: KodairaStatement
    notes: str = ""

    def __post_init__(self):
        if (self.kodaira_statement == KodairaStatement.NOT_PSEF) != (self.sign == "positive"):
            raise ValueError("verdict/sign invariant violated")
        if self.kodaira_statement == KodairaStatement.KAHLER_CY and self.sign != "zero":
            raise ValueError("Calabi-Yau verdict requires zero total curvature")


def classify(
    metric: HermitianMetricField,
    grid: QuadratureGrid,
    kahler_flag: bool,
    torsion_max: float,
    engine: Optional[DerivativeEngine] = None,
    manifold: str = "",
    eps_sign_scale: float = 1e-6,
    factor_tol: float = 1e-6,
    torsion_tol: float = 1e-8,
    certify_tol: float = 1e-3,
    **solver_kw,
) -> Verdict:
    """Sign-based verdict for the conformal class of `metric`.

    The total is computed along the Chern route and certified against the
    independently computed Riemannian route (the two sides of the
    total-curvature identity); a sign must clear both the band
    eps_sign_scale * volume and twice the measured identity gap.  An
    uncertified total (relative gap above `certify_tol`) stays
    Indeterminate: the discretization cannot support a sign claim there.
    """
    sol = solve_gauduchon(metric, grid, engine, **solver_kw)
    f = sol.factor
    total, rhs, _, vol = _total_identity(metric, grid, f, engine)
    gap = abs(total - rhs)
    if gap > certify_tol * (1.0 + abs(total)):
        return Verdict(
            manifold or metric.name,
            0.0,
            "zero",
            KodairaStatement.INDETERMINATE,
            f"total not certified: identity gap {gap:.3e} vs total {total:.3e}; "
            "refine the basis or grid",
        )
    eps = max(eps_sign_scale * vol, 2.0 * gap)
    if total > eps:
        sign = "positive"
    elif total < -eps:
        sign = "negative"
    else:
        sign = "zero"

    f_variation = float(np.max(np.abs(f.values)))
    notes = (
        f"total={total:.6e}, vol={vol:.6e}, identity_gap={gap:.3e}, "
        f"f_variation={f_variation:.3e}, torsion_max={torsion_max:.3e}"
    )
    if sign == "positive":
        statement = KodairaStatement.NOT_PSEF
    elif (
        sign == "zero"
        and kahler_flag
        and torsion_max <= torsion_tol
        and f_variation <= factor_tol
    ):
        statement = KodairaStatement.KAHLER_CY
    else:
        statement = KodairaStatement.INDETERMINATE
    return Verdict(manifold or metric.name, total, sign, statement, notes)
