"""Semidefinite programs in the triple form

    maximize    <A, X>
    subject to  Psi(X) <= B,   X >= 0

over block-diagonal Hermitian variables, together with a primal-dual
interior-point solver (Nesterov-Todd scaling, Mehrotra predictor-corrector).

The inequality is handled internally by a PSD slack block ``S`` with
``Psi(X) + S = B``; the dual variable ``Y`` lives on the constraint-image
structure and satisfies ``Psi^*(Y) >= A``, ``Y >= 0`` at optimality.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .linalg import max_eigenvalue, min_eigenvalue, spectral_norm

GAP_TOL = 1e-8
FEAS_TOL = 1e-8
MAX_ITER = 200
STEP_FRACTION = 0.98


@dataclass(frozen=True)
class BlockStructure:
    """Ordered dimensions of the Hermitian blocks of a variable."""

    blocks: tuple

    def __post_init__(self):
        if not self.blocks or any(d < 1 for d in self.blocks):
            raise InvalidInputError("block dimensions must be >= 1")

    @property
    def dof(self) -> int:
        """Real degrees of freedom: sum of squared block dimensions."""
        return int(sum(d * d for d in self.blocks))

    @property
    def total_dim(self) -> int:
        return int(sum(self.blocks))

    def zeros(self):
        return [np.zeros((d, d), dtype=complex) for d in self.blocks]

    def identity(self, scale: float = 1.0):
        return [scale * np.eye(d, dtype=complex) for d in self.blocks]

    def random_hermitian(self, rng):
        out = []
        for d in self.blocks:
            g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            out.append((g + g.conj().T) / 2)
        return out


def svec(blocks) -> np.ndarray:
    """Isometric real vectorization of a block Hermitian matrix.

    Per block: diagonal (real), then sqrt(2) * upper-triangle real parts,
    then sqrt(2) * upper-triangle imaginary parts, matching
    :func:`hermitian_basis` ordering.
    """
    parts = []
    for m in blocks:
        d = m.shape[0]
        iu = np.triu_indices(d, 1)
        parts.append(np.real(np.diag(m)))
        parts.append(np.sqrt(2.0) * np.real(m[iu]))
        parts.append(np.sqrt(2.0) * np.imag(m[iu]))
    return np.concatenate(parts) if parts else np.zeros(0)


def unsvec(vec: np.ndarray, structure: BlockStructure):
    blocks = []
    pos = 0
    for d in structure.blocks:
        seg = vec[pos:pos + d * d]
        pos += d * d
        m = np.zeros((d, d), dtype=complex)
        np.fill_diagonal(m, seg[:d])
        k = d * (d - 1) // 2
        iu = np.triu_indices(d, 1)
        re = seg[d:d + k] / np.sqrt(2.0)
        im = seg[d + k:d + 2 * k] / np.sqrt(2.0)
        m[iu] = re + 1j * im
        m[(iu[1], iu[0])] = re - 1j * im
        blocks.append(m)
    return blocks


def hermitian_basis(d: int):
    """Orthonormal Hermitian basis of dimension ``d*d`` in svec order."""
    mats = []
    for p in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[p, p] = 1.0
        mats.append(e)
    iu = np.triu_indices(d, 1)
    for p, q in zip(*iu):
        e = np.zeros((d, d), dtype=complex)
        e[p, q] = e[q, p] = 1.0 / np.sqrt(2.0)
        mats.append(e)
    for p, q in zip(*iu):
        e = np.zeros((d, d), dtype=complex)
        e[p, q] = 1j / np.sqrt(2.0)
        e[q, p] = -1j / np.sqrt(2.0)
        mats.append(e)
    return mats


def block_inner(a, b) -> float:
    """Real Hilbert-Schmidt inner product of block Hermitian matrices."""
    return float(sum(np.vdot(x, y).real for x, y in zip(a, b)))


@dataclass(frozen=True)
class SdpProblem:
    """Materialized triple-form problem.

    ``rows[b]`` has shape ``(con_dof, d_b, d_b)``; row ``j`` over all variable
    blocks is ``Psi^*(F_j)`` for the ``j``-th orthonormal Hermitian basis
    element ``F_j`` of the constraint image, so
    ``Psi(X) = sum_j <row_j, X> F_j``.
    """

    var_structure: BlockStructure
    con_structure: BlockStructure
    rows: tuple = field(repr=False)
    obj: tuple = field(repr=False)
    rhs: tuple = field(repr=False)

    @staticmethod
    def from_maps(var_structure, con_structure, psi, psi_adj, obj, rhs,
                  check_tol: float = 1e-11, rng_seed: int = 20260823):
        """Build a problem from callables for ``Psi`` and ``Psi^*``.

        Both are validated on random inputs: Hermiticity preservation of
        ``Psi`` and adjoint consistency against the materialized rows.
        """
        obj = tuple(np.asarray(m, dtype=complex) for m in obj)
        rhs = tuple(np.asarray(m, dtype=complex) for m in rhs)
        if len(obj) != len(var_structure.blocks):
            raise InvalidInputError("objective does not match var structure")
        if len(rhs) != len(con_structure.blocks):
            raise InvalidInputError("rhs does not match con structure")
        for m, d in zip(obj, var_structure.blocks):
            if m.shape != (d, d):
                raise InvalidInputError("objective block shape mismatch")
        for m, d in zip(rhs, con_structure.blocks):
            if m.shape != (d, d):
                raise InvalidInputError("rhs block shape mismatch")

        rows = [
            np.zeros((con_structure.dof, d, d), dtype=complex)
            for d in var_structure.blocks
        ]
        j = 0
        for ci, d in enumerate(con_structure.blocks):
            for f in hermitian_basis(d):
                fb = con_structure.zeros()
                fb[ci] = f
                g = psi_adj(fb)
                for b, gb in enumerate(g):
                    rows[b][j] = (gb + np.conj(gb).T) / 2
                j += 1

        rng = np.random.default_rng(rng_seed)
        for _ in range(3):
            h = var_structure.random_hermitian(rng)
            out = psi(h)
            scale = 1.0 + max(spectral_norm(x) for x in h)
            for o in out:
                if spectral_norm(o - np.conj(o).T) > check_tol * scale:
                    raise InvalidInputError(
                        "psi is not Hermiticity-preserving within tolerance"
                    )
            y = con_structure.random_hermitian(rng)
            lhs = block_inner(y, out)
            coeffs = svec(y)
            ax = np.array([
                sum(np.vdot(rows[b][k], h[b]).real for b in range(len(h)))
                for k in range(con_structure.dof)
            ])
            rhs_ip = float(coeffs @ ax)
            scale2 = (1.0 + abs(lhs) + abs(rhs_ip)) * (
                1.0 + max(spectral_norm(x) for x in y)
            )
            if abs(lhs - rhs_ip) > check_tol * scale2:
                raise InvalidInputError(
                    "psi and psi_adj are not adjoint within tolerance"
                )
        return SdpProblem(var_structure, con_structure,
                          tuple(rows), obj, rhs)

    def apply_psi(self, x):
        """Evaluate ``Psi(X)`` through the materialized rows."""
        vec = np.array([
            sum(np.vdot(self.rows[b][k], x[b]).real
                for b in range(len(self.rows)))
            for k in range(self.con_structure.dof)
        ])
        return unsvec(vec, self.con_structure)


@dataclass
class SolveOptions:
    gap_tol: float = GAP_TOL
    feas_tol: float = FEAS_TOL
    max_iter: int = MAX_ITER
    verbose: bool = False
    log_stream: object = None


@dataclass
class SdpSolution:
    status: str
    X_opt: list
    Y_opt: list
    primal_value: float
    dual_value: float
    gap: float
    primal_infeas: float
    dual_infeas: float
    iterations: int


def _max_step(chol_inv, delta) -> float:
    """Largest t with X + t * delta >= 0, given inv(L) for X = L L^dag."""
    w = chol_inv @ delta @ chol_inv.conj().T
    lam_min = float(np.linalg.eigvalsh((w + w.conj().T) / 2)[0])
    if lam_min >= -1e-16:
        return np.inf
    return -1.0 / lam_min


def solve(problem: SdpProblem, options: SolveOptions | None = None) -> SdpSolution:
    """Infeasible-start primal-dual interior-point solve.

    Deterministic: identical problems and options produce an identical
    iterate sequence.
    """
    opt = options or SolveOptions()
    var = problem.var_structure
    con = problem.con_structure
    nb_var = len(var.blocks)
    dims = list(var.blocks) + list(con.blocks)
    nb = len(dims)
    m_con = con.dof
    nu = float(sum(dims))

    # Standard form: variable blocks = (X blocks, slack blocks),
    # <row_hat_j, Xtilde> = b_j, objective C = (obj, 0).
    rows = [np.array(r) for r in problem.rows]
    basis_cache = {}
    for ci, d in enumerate(con.blocks):
        if d not in basis_cache:
            basis_cache[d] = np.stack(hermitian_basis(d))
    offset = 0
    for ci, d in enumerate(con.blocks):
        slab = np.zeros((m_con, d, d), dtype=complex)
        slab[offset:offset + d * d] = basis_cache[d]
        rows.append(slab)
        offset += d * d
    rows_flat = [r.reshape(m_con, -1) for r in rows]

    # Work on data normalized to unit spectral scale; solutions and
    # objectives are rescaled on exit.  Tolerances are relative, so this is
    # invisible to callers but keeps badly scaled instances on the path.
    c_scale = max(spectral_norm(m) for m in problem.obj) or 1.0
    b_scale = max(spectral_norm(m) for m in problem.rhs) or 1.0
    c_blocks = [m.astype(complex) / c_scale for m in problem.obj] + [
        np.zeros((d, d), dtype=complex) for d in con.blocks
    ]
    b = svec(problem.rhs) / b_scale
    c_norm = np.sqrt(sum(np.linalg.norm(cb) ** 2 for cb in c_blocks))

    tau = 2.0
    x = [tau * np.eye(d, dtype=complex) for d in dims]
    z = [tau * np.eye(d, dtype=complex) for d in dims]
    y = np.zeros(m_con)

    def a_op(xb):
        out = np.zeros(m_con)
        for bdx in range(nb):
            out += (rows_flat[bdx].conj() @ xb[bdx].reshape(-1)).real
        return out

    def a_adj(yv):
        return [np.einsum("j,jab->ab", yv, rows[bdx]) for bdx in range(nb)]

    def log(msg):
        stream = opt.log_stream or sys.stderr
        print(msg, file=stream)

    status = "max_iterations"
    it = 0
    pobj = dobj = 0.0
    rel_gap = pinf = dinf = np.inf

    for it in range(1, opt.max_iter + 1):
        rp = b - a_op(x)
        aty = a_adj(y)
        rd = [aty[bdx] - z[bdx] - c_blocks[bdx] for bdx in range(nb)]
        mu = sum(np.vdot(x[bdx], z[bdx]).real for bdx in range(nb)) / nu
        pobj = block_inner(c_blocks, x)
        dobj = float(b @ y)
        rel_gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        pinf = np.linalg.norm(rp) / (1.0 + np.linalg.norm(b))
        dinf = np.sqrt(sum(np.linalg.norm(m) ** 2 for m in rd)) / (1.0 + c_norm)
        if opt.verbose:
            log(f"iter {it - 1:3d}  pobj {pobj: .9e}  dobj {dobj: .9e}  "
                f"gap {rel_gap:.3e}  pinf {pinf:.3e}  dinf {dinf:.3e}")
        if rel_gap <= opt.gap_tol and pinf <= opt.feas_tol and dinf <= opt.feas_tol:
            status = "optimal"
            it -= 1
            break

        # Nesterov-Todd scaling per block.
        try:
            r_fac, r_inv, v_diag, w_mat = [], [], [], []
            for bdx in range(nb):
                lx = np.linalg.cholesky(x[bdx])
                t = lx.conj().T @ z[bdx] @ lx
                lam, q = np.linalg.eigh((t + t.conj().T) / 2)
                if lam[0] <= 0:
                    raise np.linalg.LinAlgError("scaling eigenvalues <= 0")
                rf = lx @ q * lam ** -0.25
                ri = (q * lam ** 0.25).conj().T @ np.linalg.inv(lx)
                r_fac.append(rf)
                r_inv.append(ri)
                v_diag.append(np.sqrt(lam))
                w_mat.append(rf @ rf.conj().T)
        except np.linalg.LinAlgError:
            status = "numerical_failure"
            break

        # Schur complement M[j,k] = <row_j, W row_k W>.
        schur = np.zeros((m_con, m_con))
        wrw = []
        for bdx in range(nb):
            t = np.matmul(np.matmul(w_mat[bdx][None], rows[bdx]), w_mat[bdx][None])
            wrw.append(t)
            schur += (rows_flat[bdx].conj() @ t.reshape(m_con, -1).T).real
        schur = (schur + schur.T) / 2

        try:
            cho = np.linalg.cholesky(
                schur + 1e-14 * np.trace(schur) / m_con * np.eye(m_con)
            )
        except np.linalg.LinAlgError:
            status = "numerical_failure"
            break

        def schur_solve(rhs_vec):
            t1 = np.linalg.solve(cho, rhs_vec)
            return np.linalg.solve(cho.conj().T, t1)

        def direction(rc):
            """Solve the Newton system for a given complementarity target."""
            wrdw = [w_mat[bdx] @ rd[bdx] @ w_mat[bdx] for bdx in range(nb)]
            rhs_vec = a_op(rc) - a_op(wrdw) - rp
            dy = schur_solve(rhs_vec)
            aty_d = a_adj(dy)
            dz = [aty_d[bdx] + rd[bdx] for bdx in range(nb)]
            dx = [rc[bdx] - w_mat[bdx] @ dz[bdx] @ w_mat[bdx] for bdx in range(nb)]
            dx = [(m + m.conj().T) / 2 for m in dx]
            dz = [(m + m.conj().T) / 2 for m in dz]
            return dx, dy, dz

        # Predictor (affine scaling).
        rc_aff = [-x[bdx] for bdx in range(nb)]
        dx_a, dy_a, dz_a = direction(rc_aff)

        lx_inv = []
        lz_inv = []
        ok = True
        for bdx in range(nb):
            try:
                lx_inv.append(np.linalg.inv(np.linalg.cholesky(x[bdx])))
                lz_inv.append(np.linalg.inv(np.linalg.cholesky(z[bdx])))
            except np.linalg.LinAlgError:
                ok = False
                break
        if not ok:
            status = "numerical_failure"
            break

        ap = min([1.0] + [_max_step(lx_inv[bdx], dx_a[bdx]) for bdx in range(nb)])
        ad = min([1.0] + [_max_step(lz_inv[bdx], dz_a[bdx]) for bdx in range(nb)])
        mu_aff = sum(
            np.vdot(x[bdx] + ap * dx_a[bdx], z[bdx] + ad * dz_a[bdx]).real
            for bdx in range(nb)
        ) / nu
        sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3)) if mu > 0 else 0.0

        # Corrector in the scaled space where Xhat = Zhat = diag(v).
        rc = []
        for bdx in range(nb):
            dxh = r_inv[bdx] @ dx_a[bdx] @ r_inv[bdx].conj().T
            dzh = r_fac[bdx].conj().T @ dz_a[bdx] @ r_fac[bdx]
            hcorr = (dxh @ dzh + dzh @ dxh) / 2
            v = v_diag[bdx]
            rc_hat = sigma * mu * np.eye(len(v)) - np.diag(v * v) - hcorr
            rc_hat = (rc_hat + rc_hat.conj().T) / 2
            denom = (v[:, None] + v[None, :]) / 2
            rc_hat = rc_hat / denom
            rc.append(r_fac[bdx] @ rc_hat @ r_fac[bdx].conj().T)
        dx, dy, dz = direction(rc)

        ap = min([1.0] + [
            STEP_FRACTION * _max_step(lx_inv[bdx], dx[bdx]) for bdx in range(nb)
        ])
        ad = min([1.0] + [
            STEP_FRACTION * _max_step(lz_inv[bdx], dz[bdx]) for bdx in range(nb)
        ])

        x = [(x[bdx] + ap * dx[bdx]) for bdx in range(nb)]
        z = [(z[bdx] + ad * dz[bdx]) for bdx in range(nb)]
        x = [(m + m.conj().T) / 2 for m in x]
        z = [(m + m.conj().T) / 2 for m in z]
        y = y + ad * dy
        if not all(np.all(np.isfinite(m)) for m in x + z) or not np.all(
            np.isfinite(y)
        ):
            status = "numerical_failure"
            break

    x_var = [b_scale * m for m in x[:nb_var]]
    y_blocks = unsvec(c_scale * y, con)
    pobj *= c_scale * b_scale
    dobj *= c_scale * b_scale
    return SdpSolution(
        status=status,
        X_opt=x_var,
        Y_opt=y_blocks,
        primal_value=pobj,
        dual_value=dobj,
        gap=abs(pobj - dobj),
        primal_infeas=float(pinf),
        dual_infeas=float(dinf),
        iterations=it,
    )


@dataclass(frozen=True)
class FeasibilityReport:
    max_violation: float
    min_eigenvalue: float


def check_feasibility(problem: SdpProblem, point, side: str) -> FeasibilityReport:
    """Spectral violation of the linear constraint and most negative
    eigenvalue of a candidate primal or dual point."""
    if side == "primal":
        img = problem.apply_psi(point)
        viol = max(
            max_eigenvalue(ib - rb) for ib, rb in zip(img, problem.rhs)
        )
        min_eig = min(min_eigenvalue(m) for m in point)
        return FeasibilityReport(max(0.0, viol), min_eig)
    if side == "dual":
        coeffs = svec(point)
        adj = [
            np.einsum("j,jab->ab", coeffs, problem.rows[bdx])
            for bdx in range(len(problem.rows))
        ]
        viol = max(
            max_eigenvalue(ob - ab) for ob, ab in zip(problem.obj, adj)
        )
        min_eig = min(min_eigenvalue(m) for m in point)
        return FeasibilityReport(max(0.0, viol), min_eig)
    raise InvalidInputError(f"side must be 'primal' or 'dual', got {side!r}")
