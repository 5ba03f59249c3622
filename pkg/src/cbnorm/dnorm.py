"""Completely bounded norms via semidefinite programming, with certificates.

Two routes:

* the general route, for any super-operator given by a minimal Stinespring
  pair ``(A, B)``: the squared norm is the optimum of

      maximize <B B^dag, W>  s.t.  Tr_Y(W) <= Tr_Y(A X A^dag), Tr X <= 1

  with dual  minimize lambda  s.t.  lambda 1 >= A^dag(1 (x) Z)A,
  1 (x) Z >= B B^dag;

* the channel-difference route for ``phi0 - phi1`` with both channels:

      maximize <J(phi), W>  s.t.  W <= 1 (x) rho, Tr rho <= 1

  whose optimum is half the norm, with dual  minimize |Tr_Y(Z)|_inf
  s.t. Z >= J(phi).

Certificates returned to callers are repaired to be (numerically) exactly
feasible, so the reported lower/upper bounds are sound independent of the
solver's termination state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg, superop
from .errors import InvalidInputError, NumericalFailureError
from .linalg import (
    herm_eig,
    kron,
    max_eigenvalue,
    min_eigenvalue,
    partial_trace,
    spectral_norm,
)
from .sdp import (
    BlockStructure,
    SdpProblem,
    SdpSolution,
    SolveOptions,
    solve,
)
from .superop import StinespringPair, SuperOp, to_choi, to_stinespring

ZERO_MAP_TOL = 1e-14


@dataclass(frozen=True)
class GeneralCertificate:
    """Witness pair for the general route, tied to a Stinespring pair."""

    pair: StinespringPair
    rho: np.ndarray
    w: np.ndarray
    lam: float
    z: np.ndarray
    kind: str = "general"


@dataclass(frozen=True)
class ChannelDiffCertificate:
    rho: np.ndarray
    w: np.ndarray
    z: np.ndarray
    kind: str = "channel_diff"


@dataclass(frozen=True)
class SolverStats:
    status: str
    iterations: int
    gap: float
    primal_infeas: float
    dual_infeas: float

    @staticmethod
    def from_solution(sol: SdpSolution) -> "SolverStats":
        return SolverStats(sol.status, sol.iterations, sol.gap,
                           sol.primal_infeas, sol.dual_infeas)


@dataclass(frozen=True)
class NormResult:
    value: float
    lower_bound: float
    upper_bound: float
    method: str
    certificate: object
    solver_stats: SolverStats
    warnings: tuple = ()


@dataclass
class NormOptions:
    method: str = "auto"  # auto | general | channel-diff
    gap_tol: float = 1e-8
    feas_tol: float = 1e-8
    max_iter: int = 200
    rank_tol: float = superop.RANK_TOL
    verbose: bool = False


def build_general_sdp(pair: StinespringPair) -> SdpProblem:
    """Triple-form problem whose primal optimum is the squared norm."""
    a, b, r = pair.a, pair.b, pair.dim_env
    if a.shape != b.shape or a.shape[0] % r != 0:
        raise InvalidInputError("inconsistent Stinespring pair dimensions")
    m = a.shape[0] // r
    n = a.shape[1]
    var = BlockStructure((n, m * r))
    con = BlockStructure((1, r))
    bbdag = b @ b.conj().T
    eye_m = np.eye(m)

    def psi(blocks):
        x, w = blocks
        env = partial_trace(w - a @ x @ a.conj().T, (m, r), side="first")
        return [np.array([[np.trace(x)]]), env]

    def psi_adj(blocks):
        lam, z = blocks[0][0, 0], blocks[1]
        top = lam * np.eye(n) - a.conj().T @ kron(eye_m, z) @ a
        return [top, kron(eye_m, z)]

    obj = [np.zeros((n, n)), bbdag]
    rhs = [np.eye(1), np.zeros((r, r))]
    return SdpProblem.from_maps(var, con, psi, psi_adj, obj, rhs)


def build_channel_diff_sdp(phi0: SuperOp, phi1: SuperOp) -> SdpProblem:
    """Triple-form problem whose primal optimum is half the norm of
    ``phi0 - phi1``."""
    for name, phi in (("phi0", phi0), ("phi1", phi1)):
        rep = superop.is_channel(phi)
        if not (rep.is_cp and rep.is_tp):
            raise InvalidInputError(f"{name} fails the channel test")
    if (phi0.dim_in, phi0.dim_out) != (phi1.dim_in, phi1.dim_out):
        raise InvalidInputError("channel dims do not match")
    n, m = phi0.dim_in, phi0.dim_out
    j = to_choi(phi0) - to_choi(phi1)
    j = (j + j.conj().T) / 2
    var = BlockStructure((n, m * n))
    con = BlockStructure((1, m * n))
    eye_m = np.eye(m)

    def psi(blocks):
        rho, w = blocks
        return [np.array([[np.trace(rho)]]), w - kron(eye_m, rho)]

    def psi_adj(blocks):
        lam, z = blocks[0][0, 0], blocks[1]
        return [lam * np.eye(n) - partial_trace(z, (m, n), side="first"), z]

    obj = [np.zeros((n, n)), j]
    rhs = [np.eye(1), np.zeros((m * n, m * n))]
    return SdpProblem.from_maps(var, con, psi, psi_adj, obj, rhs)


def _psd_part(mat: np.ndarray) -> np.ndarray:
    vals, vecs = herm_eig(mat)
    return (vecs * np.maximum(vals, 0.0)) @ vecs.conj().T


def _normalized_state(x, n):
    rho = _psd_part(x)
    tr = float(np.trace(rho).real)
    if tr > 1e-8:
        return rho / tr
    return np.eye(n, dtype=complex) / n


def _ascent_primal(pair, rho0, max_iters=300, tol=1e-13):
    """Exactly feasible primal witness (rho, W) from alternating ascent.

    Any unit ``u`` on ``X (x) W`` and unitary ``U`` on ``Y (x) W`` give a
    feasible pair via ``W = Tr_W[(U^* (x) 1)(A (x) 1) u u^* ...]`` whose
    marginal equals ``Tr_Y(A rho A^dag)`` for ``rho = Tr_W(u u^dag)`` by
    unitary invariance, so feasibility holds to roundoff regardless of how
    close the ascent gets to the optimum.  Warm-started from the solver's
    near-optimal state, the value is within the solver gap of the optimum.
    """
    a, b, r = pair.a, pair.b, pair.dim_env
    m = a.shape[0] // r
    n = a.shape[1]
    nw = n  # ancilla of dimension dim(X) suffices for the optimum
    at = a.reshape(m, r, n)
    bt = b.reshape(m, r, n)

    vals, vecs = herm_eig(rho0)
    u_mat = vecs[:, :nw] * np.sqrt(np.maximum(vals[:nw], 0.0))
    nrm = np.linalg.norm(u_mat)
    if nrm < 1e-12:
        u_mat = np.zeros((n, nw), dtype=complex)
        u_mat[0, 0] = 1.0
    else:
        u_mat = u_mat / nrm
    v_mat = u_mat.copy()

    def cross_op(t, s):
        mm = np.einsum("yzw,YzW->ywYW", t, s.conj())
        return mm.reshape(m * nw, m * nw)

    prev = -np.inf
    u_fac = None
    for _ in range(max_iters):
        t = np.einsum("yzx,xw->yzw", at, u_mat)
        s = np.einsum("yzx,xw->yzw", bt, v_mat)
        p, sig, qh = np.linalg.svd(cross_op(t, s))
        u_fac = p @ qh
        uh = u_fac.conj().T.reshape(m, nw, m, nw)
        kmat = np.einsum(
            "Yzq,YWyw,yzx->qWxw", bt.conj(), uh, at
        ).reshape(n * nw, n * nw)
        pk, sk, qkh = np.linalg.svd(kmat)
        v_mat = pk[:, 0].reshape(n, nw)
        u_mat = qkh[0, :].conj().reshape(n, nw)
        obj = float(sk[0])
        if abs(obj - prev) <= tol * max(1.0, obj):
            break
        prev = obj

    # Final polar step keeps U consistent with the last (u, v).
    t = np.einsum("yzx,xw->yzw", at, u_mat)
    s = np.einsum("yzx,xw->yzw", bt, v_mat)
    p, sig, qh = np.linalg.svd(cross_op(t, s))
    u_fac = p @ qh
    uh = u_fac.conj().T.reshape(m, nw, m, nw)
    q = np.einsum("YWyw,yzw->YzW", uh, t)
    w = np.einsum("abW,cdW->abcd", q, q.conj()).reshape(m * r, m * r)
    w = (w + w.conj().T) / 2
    rho = u_mat @ u_mat.conj().T
    rho = (rho + rho.conj().T) / 2
    return rho, w


def _repair_general_certificate(pair, sol) -> GeneralCertificate:
    a, b, r = pair.a, pair.b, pair.dim_env
    m = a.shape[0] // r
    n = a.shape[1]
    rho, w = _ascent_primal(pair, _normalized_state(sol.X_opt[0], n))
    z = _psd_part(sol.Y_opt[1])
    shift = max(
        0.0, -min_eigenvalue(kron(np.eye(m), z) - b @ b.conj().T)
    )
    if shift > 0:
        z = z + shift * np.eye(r)
    lam = spectral_norm(a.conj().T @ kron(np.eye(m), z) @ a)
    return GeneralCertificate(pair=pair, rho=rho, w=w, lam=lam, z=z)


def _repair_channel_diff_certificate(j, n, m, sol) -> ChannelDiffCertificate:
    rho = _normalized_state(sol.X_opt[0], n)
    # Inner optimum for this rho in closed form: with
    # W = (1 (x) sqrt(rho)) P (1 (x) sqrt(rho)) and P the projector onto the
    # positive part of (1 (x) sqrt(rho)) J (1 (x) sqrt(rho)), the constraint
    # W <= 1 (x) rho is exact and <J, W> is maximal for this rho.
    vals, vecs = herm_eig(rho)
    root = (vecs * np.sqrt(np.maximum(vals, 0.0))) @ vecs.conj().T
    s = kron(np.eye(m), root)
    c = s @ j @ s
    cvals, cvecs = herm_eig((c + c.conj().T) / 2)
    keep = cvecs[:, cvals > 0]
    proj = keep @ keep.conj().T
    w = s @ proj @ s
    w = (w + w.conj().T) / 2
    z = _psd_part(sol.Y_opt[1])
    shift = max(0.0, -min_eigenvalue(z - j))
    if shift > 0:
        z = z + shift * np.eye(m * n)
    return ChannelDiffCertificate(rho=rho, w=w, z=z)


def _trivial_zero_result(phi: SuperOp, method: str) -> NormResult:
    n, m = phi.dim_in, phi.dim_out
    stats = SolverStats("optimal", 0, 0.0, 0.0, 0.0)
    if method == "channel_diff_sdp":
        cert = ChannelDiffCertificate(
            rho=np.eye(n) / n,
            w=np.zeros((m * n, m * n)),
            z=np.zeros((m * n, m * n)),
        )
    else:
        zero = np.zeros((m, n))
        cert = GeneralCertificate(
            pair=StinespringPair(zero, zero, 1),
            rho=np.eye(n) / n,
            w=np.zeros((m, m)),
            lam=0.0,
            z=np.zeros((1, 1)),
        )
    return NormResult(0.0, 0.0, 0.0, method, cert, stats)


def _general_certificate_bounds(cert: GeneralCertificate) -> tuple:
    a, b = cert.pair.a, cert.pair.b
    m = a.shape[0] // cert.pair.dim_env
    lower = np.sqrt(max(0.0, float(np.vdot(b @ b.conj().T, cert.w).real)))
    upper = np.sqrt(
        max(0.0, spectral_norm(a.conj().T @ kron(np.eye(m), cert.z) @ a))
    )
    return lower, upper


def _channel_diff_certificate_bounds(j, n, m, cert) -> tuple:
    lower = 2.0 * max(0.0, float(np.vdot(j, cert.w).real))
    upper = 2.0 * spectral_norm(partial_trace(cert.z, (m, n), side="first"))
    return lower, upper


def diamond_norm(phi: SuperOp, options: NormOptions | None = None) -> NormResult:
    """Completely bounded trace norm with a verifiable certificate."""
    opt = options or NormOptions()
    if opt.method not in ("auto", "general", "channel-diff"):
        raise InvalidInputError(f"unknown method {opt.method!r}")
    warnings = []

    use_channel_diff = False
    if isinstance(phi.rep, superop.ChannelDifference):
        use_channel_diff = opt.method in ("auto", "channel-diff")
    elif opt.method == "channel-diff":
        raise InvalidInputError(
            "channel-diff route requires a channel-difference representation"
        )

    j = to_choi(phi)
    if spectral_norm(j) <= ZERO_MAP_TOL:
        return _trivial_zero_result(
            phi, "channel_diff_sdp" if use_channel_diff else "general_sdp"
        )

    solver_opts = SolveOptions(
        gap_tol=opt.gap_tol,
        feas_tol=opt.feas_tol,
        max_iter=opt.max_iter,
        verbose=opt.verbose,
    )

    if use_channel_diff:
        rep = phi.rep
        try:
            problem = build_channel_diff_sdp(rep.phi0, rep.phi1)
        except InvalidInputError:
            warnings.append(
                "channel-difference members fail the channel test; "
                "falling back to the general route"
            )
            use_channel_diff = False
        if use_channel_diff:
            n, m = phi.dim_in, phi.dim_out
            jh = (j + j.conj().T) / 2
            sol = solve(problem, solver_opts)
            if sol.status == "numerical_failure":
                raise NumericalFailureError("interior-point solve failed")
            cert = _repair_channel_diff_certificate(jh, n, m, sol)
            lower, upper = _channel_diff_certificate_bounds(jh, n, m, cert)
            value = min(max(sol.primal_value + sol.dual_value, lower), upper)
            if sol.status != "optimal":
                warnings.append(f"solver status {sol.status}; bounds widened")
            return NormResult(
                value, lower, upper, "channel_diff_sdp", cert,
                SolverStats.from_solution(sol), tuple(warnings),
            )

    pair = to_stinespring(phi, rank_tol=opt.rank_tol)
    problem = build_general_sdp(pair)
    sol = solve(problem, solver_opts)
    if sol.status == "numerical_failure":
        raise NumericalFailureError("interior-point solve failed")
    cert = _repair_general_certificate(pair, sol)
    lower, upper = _general_certificate_bounds(cert)
    mid = np.sqrt(max(0.0, (sol.primal_value + sol.dual_value) / 2))
    value = min(max(mid, lower), upper)
    if sol.status != "optimal":
        warnings.append(f"solver status {sol.status}; bounds widened")
    return NormResult(
        value, lower, upper, "general_sdp", cert,
        SolverStats.from_solution(sol), tuple(warnings),
    )


def cb_spectral_norm(phi: SuperOp, options: NormOptions | None = None) -> NormResult:
    """Completely bounded spectral norm: the trace-norm value of the adjoint."""
    res = diamond_norm(superop.adjoint(phi), options)
    return NormResult(
        res.value, res.lower_bound, res.upper_bound,
        res.method + "_of_adjoint", res.certificate, res.solver_stats,
        res.warnings,
    )


@dataclass(frozen=True)
class CertificateCheck:
    valid: bool
    lower: float
    upper: float
    violations: tuple


def verify_certificate(phi: SuperOp, cert, tol: float = 1e-6) -> CertificateCheck:
    """Re-verify a certificate from scratch without solving.

    Only basic linear algebra is used; bounds come from the certificate by
    direct arithmetic and are valid whenever ``valid`` is true.
    """
    violations = []
    n, m = phi.dim_in, phi.dim_out
    if isinstance(cert, GeneralCertificate):
        a, b, r = cert.pair.a, cert.pair.b, cert.pair.dim_env
        if a.shape != (m * r, n) or cert.rho.shape != (n, n) or \
                cert.w.shape != (m * r, m * r) or cert.z.shape != (r, r):
            raise InvalidInputError("certificate dimensions do not match map")
        # The pair must actually represent phi.
        scale = 1.0 + spectral_norm(a) * spectral_norm(b)
        for i in range(n):
            for k in range(n):
                e = np.zeros((n, n))
                e[i, k] = 1.0
                lhs = partial_trace(
                    a @ e @ b.conj().T, (m, r), side="second"
                )
                if spectral_norm(lhs - superop.apply(phi, e)) > \
                        max(tol, superop.RECON_TOL) * scale:
                    violations.append(
                        f"stinespring pair does not reproduce the map on "
                        f"E[{i},{k}]"
                    )
        tr_dev = abs(float(np.trace(cert.rho).real) - 1.0)
        if tr_dev > tol:
            violations.append(f"Tr(rho) deviates from 1 by {tr_dev:.3e}")
        if min_eigenvalue(cert.rho) < -tol:
            violations.append("rho is not PSD")
        if min_eigenvalue(cert.w) < -tol:
            violations.append("W is not PSD")
        marg = partial_trace(cert.w, (m, r), side="first") - partial_trace(
            a @ cert.rho @ a.conj().T, (m, r), side="first"
        )
        if max_eigenvalue(marg) > tol:
            violations.append(
                f"Tr_Y(W) exceeds Tr_Y(A rho A^dag) by {max_eigenvalue(marg):.3e}"
            )
        if min_eigenvalue(cert.z) < -tol:
            violations.append("Z is not PSD")
        dual_marg = b @ b.conj().T - kron(np.eye(m), cert.z)
        if max_eigenvalue(dual_marg) > tol:
            violations.append(
                f"1 (x) Z fails to dominate B B^dag by "
                f"{max_eigenvalue(dual_marg):.3e}"
            )
        lower, upper = _general_certificate_bounds(cert)
        if cert.lam < upper ** 2 - tol * (1.0 + upper ** 2):
            violations.append("lambda is below |A^dag(1 (x) Z)A|_inf")
        return CertificateCheck(not violations, lower, upper, tuple(violations))

    if isinstance(cert, ChannelDiffCertificate):
        j = to_choi(phi)
        j = (j + j.conj().T) / 2
        if cert.rho.shape != (n, n) or cert.w.shape != (m * n, m * n) or \
                cert.z.shape != (m * n, m * n):
            raise InvalidInputError("certificate dimensions do not match map")
        tr_dev = abs(float(np.trace(cert.rho).real) - 1.0)
        if tr_dev > tol:
            violations.append(f"Tr(rho) deviates from 1 by {tr_dev:.3e}")
        if min_eigenvalue(cert.rho) < -tol:
            violations.append("rho is not PSD")
        if min_eigenvalue(cert.w) < -tol:
            violations.append("W is not PSD")
        marg = cert.w - kron(np.eye(m), cert.rho)
        if max_eigenvalue(marg) > tol:
            violations.append(
                f"W exceeds 1 (x) rho by {max_eigenvalue(marg):.3e}"
            )
        if min_eigenvalue(cert.z) < -tol:
            violations.append("Z is not PSD")
        if max_eigenvalue(j - cert.z) > tol:
            violations.append(
                f"Z fails to dominate J(phi) by {max_eigenvalue(j - cert.z):.3e}"
            )
        lower, upper = _channel_diff_certificate_bounds(j, n, m, cert)
        return CertificateCheck(not violations, lower, upper, tuple(violations))

    raise InvalidInputError(f"unknown certificate type {type(cert).__name__}")


def rebalance_stinespring(pair: StinespringPair, eps: float,
                          options: NormOptions | None = None) -> StinespringPair:
    """Rescale a Stinespring pair so the product of spectral norms is within
    ``eps`` of the completely bounded trace norm.

    Uses the dual witness ``Z`` of the general SDP, regularized to be
    positive definite, and returns
    ``((1 (x) Z^{1/2}) A, (1 (x) Z^{-1/2}) B)``.
    """
    if eps <= 0:
        raise InvalidInputError("eps must be positive")
    a, b, r = pair.a, pair.b, pair.dim_env
    a_norm = spectral_norm(a)
    if a_norm == 0.0 or spectral_norm(b) == 0.0:
        raise InvalidInputError("rebalancing requires a nonzero map")
    m = a.shape[0] // r
    # Solve the general SDP on the *given* pair: the dual witness must
    # dominate this pair's B B^dag, and strict dual feasibility holds for
    # any pair, minimal or not.
    opt = options or NormOptions()
    problem = build_general_sdp(pair)
    sol = solve(problem, SolveOptions(
        gap_tol=opt.gap_tol, feas_tol=opt.feas_tol,
        max_iter=opt.max_iter, verbose=opt.verbose,
    ))
    if sol.status == "numerical_failure":
        raise NumericalFailureError("interior-point solve failed")
    cert = _repair_general_certificate(pair, sol)
    z = cert.z
    delta = max(eps ** 2 / (4.0 * a_norm ** 2),
                1e-12 * spectral_norm(z))
    z_reg = z + delta * np.eye(r)
    vals, vecs = herm_eig(z_reg)
    z_half = (vecs * np.sqrt(vals)) @ vecs.conj().T
    z_inv_half = (vecs * (1.0 / np.sqrt(vals))) @ vecs.conj().T
    a_new = kron(np.eye(m), z_half) @ a
    b_new = kron(np.eye(m), z_inv_half) @ b
    return StinespringPair(a_new, b_new, r)
