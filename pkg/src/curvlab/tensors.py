"""Pointwise tensor calculus for Hermitian metrics.

Everything here works on the complexified 2n-letter index alphabet
(0..n-1 holomorphic, n..2n-1 antiholomorphic) built from a MetricJet.
The real-coordinate Levi-Civita pipeline at the bottom of the module is a
deliberately independent implementation used as the verification oracle
for the complexified route; the two must never share intermediate code.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import CrossCheckFailed, SingularMetric
from .geometry import DerivativeEngine, HermitianMetricField, MetricJet

HERMITIAN_SYMMETRY_TOL = 1e-10


@dataclass
class TensorBlock:
    """Indexed complex components of a tensor at a (batch of) point(s)."""

    kind: str
    indices: str
    components: np.ndarray
    point: np.ndarray


@dataclass
class ScalarReport:
    """Per-point scalar curvature bookkeeping for the identity check.

    identity_residual = s - (2 s_C - 2 adjoint_term - torsion_norm_sq / 2),
    stored exactly as computed.
    """

    point: np.ndarray
    s: np.ndarray
    s_c: np.ndarray
    torsion_norm_sq: np.ndarray
    adjoint_term: np.ndarray
    identity_residual: np.ndarray
    imag_defect: float = 0.0


# ---------------------------------------------------------------------------
# complexified blocks
# ---------------------------------------------------------------------------


class CxBlocks:
    """Complexified metric data over the 2n-letter alphabet."""

    def __init__(self, jet: MetricJet, need_second: bool = True):
        H = np.asarray(jet.H, dtype=complex)
        n = H.shape[-1]
        self.n = n
        self.H = H
        w = np.linalg.eigvalsh(H)
        if np.min(np.abs(w)) <= 1e-12 * max(float(np.max(np.abs(w))), 1.0):
            raise SingularMetric("metric not invertible to tolerance")
        self.Hinv = np.linalg.inv(H)
        self.d1H = np.asarray(jet.d1, dtype=complex)
        self.d2H = np.asarray(jet.d2, dtype=complex) if need_second else None
        batch = H.shape[:-2]

        hC = np.zeros(batch + (2 * n, 2 * n), dtype=complex)
        hC[..., :n, n:] = H
        hC[..., n:, :n] = np.swapaxes(H, -1, -2)
        self.hC = hC

        hCinv = np.zeros_like(hC)
        hCinv[..., :n, n:] = np.conj(self.Hinv)
        hCinv[..., n:, :n] = np.swapaxes(np.conj(self.Hinv), -1, -2)
        self.hCinv = hCinv

        dhC = np.zeros(batch + (2 * n, 2 * n, 2 * n), dtype=complex)
        dhC[..., :, :n, n:] = self.d1H
        dhC[..., :, n:, :n] = np.swapaxes(self.d1H, -1, -2)
        self.dhC = dhC

        if need_second:
            d2hC = np.zeros(batch + (2 * n, 2 * n, 2 * n, 2 * n), dtype=complex)
            d2hC[..., :, :, :n, n:] = self.d2H
            d2hC[..., :, :, n:, :n] = np.swapaxes(self.d2H, -1, -2)
            self.d2hC = d2hC
        else:
            self.d2hC = None

        # P[i, j] = h^{i jbar}, the mixed inverse pairing
        self.P = hCinv[..., :n, n:]

    # -- connection ----------------------------------------------------

    def christoffel(self) -> np.ndarray:
        """Gamma[..., C, A, B] = Gamma^C_{AB}, symmetric in (A, B)."""
        if not hasattr(self, "_gamma"):
            # term[A, B, E] = d_B h_{AE} + d_A h_{BE} - d_E h_{AB}
            term = (
                np.einsum("...bae->...abe", self.dhC)
                + self.dhC
                - np.einsum("...eab->...abe", self.dhC)
            )
            self._gamma = 0.5 * np.einsum("...ce,...abe->...cab", self.hCinv, term)
            self._term = term
        return self._gamma

    def christoffel_derivative(self) -> np.ndarray:
        """dG[..., B, C, A, D] = d_B Gamma^C_{AD}."""
        if self.d2hC is None:
            raise ValueError("second derivatives were not requested")
        if not hasattr(self, "_dgamma"):
            self.christoffel()
            dterm = (
                np.einsum("...bdae->...bade", self.d2hC)
                + self.d2hC
                - np.einsum("...bead->...bade", self.d2hC)
            )
            dhCinv = -np.einsum(
                "...cf,...bfg,...ge->...bce", self.hCinv, self.dhC, self.hCinv
            )
            self._dgamma = 0.5 * (
                np.einsum("...bce,...ade->...bcad", dhCinv, self._term)
                + np.einsum("...ce,...bade->...bcad", self.hCinv, dterm)
            )
        return self._dgamma

    # -- curvature -------------------------------------------------------

    def curvature_lowered(self, check_symmetry: bool = True) -> np.ndarray:
        """Rlow[..., A, B, C, D] = R(d_A, d_B, d_C, d_D), all letters."""
        if not hasattr(self, "_rlow"):
            G = self.christoffel()
            dG = self.christoffel_derivative()
            rup = -(
                np.einsum("...bdac->...dabc", dG)
                - np.einsum("...adbc->...dabc", dG)
                + np.einsum("...fac,...dfb->...dabc", G, G)
                - np.einsum("...fbc,...daf->...dabc", G, G)
            )
            self._rlow = np.einsum("...eabc,...ed->...abcd", rup, self.hC)
        if check_symmetry:
            res = self.hermitian_symmetry_residual(self._rlow)
            scale = 1.0 + float(np.max(np.abs(self._rlow)))
            if res > HERMITIAN_SYMMETRY_TOL * scale:
                raise CrossCheckFailed(
                    f"curvature Hermitian symmetry violated: {res:.3e} (scale {scale:.1e})"
                )
        return self._rlow

    def hermitian_symmetry_residual(self, rlow: Optional[np.ndarray] = None) -> float:
        """max |R_{i jbar k lbar} - conj(R_{j ibar l kbar})|."""
        r = self.curvature_lowered(check_symmetry=False) if rlow is None else rlow
        n = self.n
        a = r[..., :n, n:, :n, n:]  # a[i,j,k,l] = R_{i jbar k lbar}
        b = np.conj(np.einsum("...jilk->...ijkl", a))
        return float(np.max(np.abs(a - b)))


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def _jet(metric: HermitianMetricField, point, engine: Optional[DerivativeEngine]):
    return metric.jet(np.asarray(point, dtype=complex), engine)


def christoffel(metric, point, engine=None) -> TensorBlock:
    """Complexified Christoffel symbols Gamma^C_{AB} at a point.

    The slots forbidden by the Hermitian structure (Gamma^k_{ibar jbar} and
    its conjugate) vanish identically; they are zeroed structurally.
    """
    cx = CxBlocks(_jet(metric, point, engine), need_second=False)
    G = cx.christoffel().copy()
    n = cx.n
    G[..., :n, n:, n:] = 0.0
    G[..., n:, :n, :n] = 0.0
    return TensorBlock("christoffel", "C;AB", G, np.asarray(point))


def torsion(metric, point, engine=None):
    """Torsion T^k_{ij} and its squared norm |T|^2 >= 0."""
    cx = CxBlocks(_jet(metric, point, engine), need_second=False)
    n = cx.n
    Dh = cx.d1H[..., :n, :, :]  # d_i H[j, l]
    diff = Dh - np.einsum("...ijl->...jil", Dh)
    T = np.einsum("...kl,...ijl->...kij", cx.P, diff)
    nsq = np.einsum(
        "...ip,...jq,...kl,...kij,...lpq->...",
        cx.P,
        cx.P,
        cx.H,
        T,
        np.conj(T),
    )
    return TensorBlock("torsion", "k;ij", T, np.asarray(point)), np.real(nsq)


def curvature_complexified(metric, point, engine=None) -> TensorBlock:
    """Lowered complexified curvature R_{ABCD} over all index letters."""
    cx = CxBlocks(_jet(metric, point, engine))
    R = cx.curvature_lowered()
    return TensorBlock("curvature", "ABCD", R, np.asarray(point))


def chern_ricci(metric, point, engine=None):
    """Chern-Ricci form R_{i jbar} = -d_i d_jbar log det h and its trace."""
    return chern_ricci_from_jet(_jet(metric, point, engine))


def chern_ricci_from_jet(jet: MetricJet):
    cx = CxBlocks(jet)
    n = cx.n
    M2 = cx.d2H[..., :n, n:, :, :]  # d_i d_jbar H
    t1 = np.einsum("...kl,...ijlk->...ij", cx.Hinv, M2)
    t2 = np.einsum(
        "...ab,...ibc,...cd,...jda->...ij",
        cx.Hinv,
        cx.d1H[..., :n, :, :],
        cx.Hinv,
        cx.d1H[..., n:, :, :],
    )
    ricci = -(t1 - t2)
    s_c = np.einsum("...ij,...ji->...", ricci, cx.Hinv)
    return ricci, np.real(s_c)


def scalar_and_torsion_from_jet(jet: MetricJet):
    """(s, |T|^2) from a metric jet; the lean path for integral checks."""
    cx = CxBlocks(jet)
    s, _ = _scalar_from_blocks(cx)
    n = cx.n
    Dh = cx.d1H[..., :n, :, :]
    diff = Dh - np.einsum("...ijl->...jil", Dh)
    T = np.einsum("...kl,...ijl->...kij", cx.P, diff)
    tsq = np.real(
        np.einsum("...ip,...jq,...kl,...kij,...lpq->...", cx.P, cx.P, cx.H, T, np.conj(T))
    )
    return s, tsq


def riemannian_scalar(metric, point, engine=None):
    """Riemannian scalar curvature from the complexified curvature tensor."""
    cx = CxBlocks(_jet(metric, point, engine))
    return _scalar_from_blocks(cx)


def _scalar_from_blocks(cx: CxBlocks):
    n = cx.n
    A1 = cx.curvature_lowered()[..., :n, n:, :n, n:]  # A1[i,j,k,l] = R_{i jbar k lbar}
    sR = np.einsum("...ij,...kl,...ilkj->...", cx.P, cx.P, A1)
    sH = np.einsum("...ij,...kl,...ijkl->...", cx.P, cx.P, A1)
    s = 2.0 * (2.0 * sR - sH)
    return np.real(s), float(np.max(np.abs(np.imag(s))))


def riemannian_ricci(metric, point, X, Y, engine=None):
    """Ricci curvature Ric(X, Y) for real tangent vectors X, Y (length 2n)."""
    cx = CxBlocks(_jet(metric, point, engine))
    n = cx.n
    R = cx.curvature_lowered()
    Xc = _complexify_vector(np.asarray(X, dtype=float), n)
    Yc = _complexify_vector(np.asarray(Y, dtype=float), n)
    S = R[..., :n, :, :, n:]  # S[i, A, B, l]
    val = np.einsum("...il,...iABl,A,B->...", cx.P, S, Xc, Yc) + np.einsum(
        "...il,...iABl,A,B->...", cx.P, S, Yc, Xc
    )
    return np.real(val)


def _complexify_vector(X: np.ndarray, n: int) -> np.ndarray:
    """Coefficients of a real tangent vector on the complexified frame."""
    Xc = np.zeros(2 * n, dtype=complex)
    Xc[:n] = X[:n] + 1j * X[n:]
    Xc[n:] = X[:n] - 1j * X[n:]
    return Xc


def dbar_star_omega(metric, point, engine=None) -> TensorBlock:
    """The (1, 0)-form dbar*(omega) = 2i conj(Gamma^k_{ibar k}) dz^i."""
    cx = CxBlocks(_jet(metric, point, engine), need_second=False)
    theta = _dbar_star_omega_components(cx)
    return TensorBlock("one-form", "i", theta, np.asarray(point))


def _dbar_star_omega_components(cx: CxBlocks) -> np.ndarray:
    n = cx.n
    G = cx.christoffel()
    gsum = np.einsum("...kik->...i", G[..., :n, n:, :n])
    return 2j * np.conj(gsum)


def _dbar_star_omega_dbar(cx: CxBlocks) -> np.ndarray:
    """dtheta[..., j, i] = d_jbar of component i of dbar*(omega)."""
    n = cx.n
    dG = cx.christoffel_derivative()
    dgsum = np.einsum("...jkik->...ji", dG[..., :n, :n, n:, :n])
    return 2j * np.conj(dgsum)


def p_star_oneform(cx: CxBlocks, eta: np.ndarray, deta_anti: np.ndarray) -> np.ndarray:
    """Formal adjoint of d on (1, 0)-forms via the divergence closed form.

    eta[..., i] are the components; deta_anti[..., j, i] = d_jbar eta_i.
    Realizes d*(eta) = -(1/V) d_jbar(V h^{j ibar-pairing} eta_i) with
    V = det h; the integration-by-parts tests are its acceptance gate.
    """
    n = cx.n
    Hinv, d1H = cx.Hinv, cx.d1H
    dHinv_anti = -np.einsum("...ab,...jbc,...cd->...jad", Hinv, d1H[..., n:, :, :], Hinv)
    dlogdet_anti = np.einsum("...ab,...jba->...j", Hinv, d1H[..., n:, :, :])
    # d*eta = -sum_{i,j} [ (d_jbar eta_i) Hinv[j,i] + eta_i d_jbar Hinv[j,i]
    #                      + eta_i Hinv[j,i] d_jbar log det H ]
    return -(
        np.einsum("...ji,...ji->...", deta_anti, Hinv)
        + np.einsum("...i,...jji->...", eta, dHinv_anti)
        + np.einsum("...i,...ji,...j->...", eta, Hinv, dlogdet_anti)
    )


def adjoint_term(metric, point, engine=None):
    """The real scalar i d* dbar* omega entering the curvature identity."""
    cx = CxBlocks(_jet(metric, point, engine))
    return _adjoint_term_from_blocks(cx)


def _adjoint_term_from_blocks(cx: CxBlocks):
    theta = _dbar_star_omega_components(cx)
    dtheta = _dbar_star_omega_dbar(cx)
    val = 1j * p_star_oneform(cx, theta, dtheta)
    return np.real(val), float(np.max(np.abs(np.imag(val))))


def scalar_identity_residual(metric, point, engine=None) -> ScalarReport:
    """Evaluate both scalar curvatures and the relation between them.

    The report stores s, s_C, |T|^2, the adjoint term and the residual
    s - (2 s_C - 2 adj - |T|^2 / 2); for exact arithmetic the residual is
    identically zero on any Hermitian metric.
    """
    point = np.asarray(point, dtype=complex)
    cx = CxBlocks(_jet(metric, point, engine))
    s, im_s = _scalar_from_blocks(cx)
    n = cx.n
    Dh = cx.d1H[..., :n, :, :]
    diff = Dh - np.einsum("...ijl->...jil", Dh)
    T = np.einsum("...kl,...ijl->...kij", cx.P, diff)
    tsq = np.real(
        np.einsum("...ip,...jq,...kl,...kij,...lpq->...", cx.P, cx.P, cx.H, T, np.conj(T))
    )
    M2 = cx.d2H[..., :n, n:, :, :]
    t1 = np.einsum("...kl,...ijlk->...ij", cx.Hinv, M2)
    t2 = np.einsum(
        "...ab,...ibc,...cd,...jda->...ij",
        cx.Hinv,
        cx.d1H[..., :n, :, :],
        cx.Hinv,
        cx.d1H[..., n:, :, :],
    )
    s_c = np.real(np.einsum("...ij,...ji->...", -(t1 - t2), cx.Hinv))
    adj, im_a = _adjoint_term_from_blocks(cx)
    residual = s - (2.0 * s_c - 2.0 * adj - 0.5 * tsq)
    return ScalarReport(
        point=point,
        s=s,
        s_c=s_c,
        torsion_norm_sq=tsq,
        adjoint_term=adj,
        identity_residual=residual,
        imag_defect=max(im_s, im_a),
    )


# ---------------------------------------------------------------------------
# independent real-coordinate oracle (Levi-Civita in real coordinates)
# ---------------------------------------------------------------------------


_REAL_FROM_WIRTINGER_CACHE = {}


def _real_from_wirtinger(n: int) -> np.ndarray:
    """V[a, A]: real partial a as a combination of Wirtinger slots A."""
    if n not in _REAL_FROM_WIRTINGER_CACHE:
        V = np.zeros((2 * n, 2 * n), dtype=complex)
        for i in range(n):
            V[i, i] = 1.0
            V[i, n + i] = 1.0
            V[n + i, i] = 1j
            V[n + i, n + i] = -1j
        _REAL_FROM_WIRTINGER_CACHE[n] = V
    return _REAL_FROM_WIRTINGER_CACHE[n]


def _real_blocks(M: np.ndarray) -> np.ndarray:
    """Assemble [[2 Re M, 2 Im M], [-2 Im M, 2 Re M]] on the last two axes."""
    A = 2.0 * np.real(M)
    B = 2.0 * np.imag(M)
    top = np.concatenate([A, B], axis=-1)
    bot = np.concatenate([-B, A], axis=-1)
    return np.concatenate([top, bot], axis=-2)


def real_metric_jets(jet: MetricJet):
    """Real metric g and its first/second real-coordinate derivatives."""
    n = jet.n
    V = _real_from_wirtinger(n)
    dH = np.einsum("aA,...Aij->...aij", V, jet.d1)
    d2H = np.einsum("aA,bB,...ABij->...abij", V, V, jet.d2)
    G = _real_blocks(jet.H)
    dG = _real_blocks(dH)
    d2G = _real_blocks(d2H)
    return G, dG, d2G


def riemannian_scalar_real_oracle(metric, point, engine=None):
    """Scalar curvature computed entirely in real coordinates.

    Independent verification path: works on the induced real metric with
    standard Levi-Civita formulas and never touches the complexified code.
    """
    jet = _jet(metric, point, engine)
    G, dG, d2G = real_metric_jets(jet)
    return _real_scalar(G, dG, d2G)


def _brace(dG):
    # brace[b, c, d] = d_b G[c, d] + d_c G[b, d] - d_d G[b, c]
    return (
        dG
        + np.einsum("...cbd->...bcd", dG)
        - np.einsum("...dbc->...bcd", dG)
    )


def _real_riemann(G, dG, d2G):
    """Real Riemann tensor R^a_{bcd} and helpers from metric jets."""
    Ginv = np.linalg.inv(G)
    Gam = 0.5 * np.einsum("...ad,...bcd->...abc", Ginv, _brace(dG))
    dGinv = -np.einsum("...ae,...ceg,...gd->...cad", Ginv, dG, Ginv)
    dbrace = (
        d2G
        + np.einsum("...ecbd->...ebcd", d2G)
        - np.einsum("...edbc->...ebcd", d2G)
    )
    dGam = 0.5 * (
        np.einsum("...ead,...bcd->...eabc", dGinv, _brace(dG))
        + np.einsum("...ad,...ebcd->...eabc", Ginv, dbrace)
    )
    # R^a_{bcd} = d_c Gam^a_{db} - d_d Gam^a_{cb}
    #             + Gam^a_{ce} Gam^e_{db} - Gam^a_{de} Gam^e_{cb}
    riem = (
        np.einsum("...cadb->...abcd", dGam)
        - np.einsum("...dacb->...abcd", dGam)
        + np.einsum("...ace,...edb->...abcd", Gam, Gam)
        - np.einsum("...ade,...ecb->...abcd", Gam, Gam)
    )
    return riem, Ginv


def _real_scalar(G, dG, d2G):
    riem, Ginv = _real_riemann(G, dG, d2G)
    ricci = np.einsum("...abad->...bd", riem)
    return np.real(np.einsum("...bd,...bd->...", Ginv, ricci))


def real_curvature_lowered(jet: MetricJet):
    """Fully lowered real Riemann tensor, Ricci and metric, oracle-side."""
    G, dG, d2G = real_metric_jets(jet)
    riem, Ginv = _real_riemann(G, dG, d2G)
    rlow = np.einsum("...ae,...ebcd->...abcd", G, riem)
    ricci = np.einsum("...abad->...bd", riem)
    return rlow, ricci, G, Ginv
