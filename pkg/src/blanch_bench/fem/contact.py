"""Displacement-controlled rigid flat-punch indentation with Coulomb friction.

The body is linear, and contact loads act only on surface nodes. The
unconstrained stiffness is therefore condensed onto the candidate contact
nodes once per solve: the compliance ``C = (K^-1)_cc`` is built from one
factorisation and inverted to the surface stiffness ``S``. Every load
increment then resolves the node-to-rigid-surface penalty contact on that
small dense system with a fixed-point iteration over the active set and
the stick/slip status. A single back-substitution with the converged
contact forces recovers the full displacement field.
"""

import logging
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import assemble_system

log = logging.getLogger(__name__)


# relative residual below which inner iterations switch to exact Newton steps
_EXACT_NEWTON_SWITCH = 1e-3


class ConvergenceError(RuntimeError):
    """Contact iteration or iterative linear solve did not converge."""


@dataclass(frozen=True)
class SolveConfig:
    load_steps: int = 20
    penalty_normal: float = None  # N/mm^3; None -> 1e3 * max modulus / target_edge
    penalty_tangent: float = None  # N/mm^3; None -> penalty_normal
    linear_tol: float = 1e-8
    max_outer_iters: int = 60
    max_newton_iters: int = 400
    newton_tol: float = 1e-8  # relative residual of each inner solve
    friction_tol: float = 1e-4  # relative friction-bound change, once the active set repeats
    linear_solver: str = "direct"  # or "pcg" (Jacobi-preconditioned CG)
    candidate_margin: float = 0.5  # mm beyond the punch edge

    def __post_init__(self):
        if self.load_steps < 1:
            raise ValueError("load_steps must be >= 1")
        for name in ("penalty_normal", "penalty_tangent"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.linear_tol < 1:
            raise ValueError("linear_tol must lie in (0, 1)")
        if self.max_outer_iters < 1 or self.max_newton_iters < 1:
            raise ValueError("iteration limits must be >= 1")
        for name in ("newton_tol", "friction_tol"):
            if not 0 < getattr(self, name) < 1:
                raise ValueError(f"{name} must lie in (0, 1)")
        if not self.candidate_margin > 0:
            raise ValueError("candidate_margin must be positive")
        if self.linear_solver not in ("direct", "pcg"):
            raise ValueError(f"unknown linear solver {self.linear_solver!r}")

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True, eq=False)
class IndentationSolution:
    displacement: np.ndarray  # (n, 2) mm
    contact_set: np.ndarray  # global node ids in contact, sorted by x
    normal_forces: np.ndarray  # N per mm thickness, one per contact node
    tangential_forces: np.ndarray
    contact_forces: np.ndarray  # (k, 2) force on the body at each contact node
    total_reaction: float  # N per mm thickness, pushing the punch up
    penalty_normal: float
    penetration: np.ndarray  # mm, one per contact node
    log: dict = field(default_factory=dict)


def _punch_gap(points, half_width, fillet, face_y):
    """Signed gap and unit normal (punch toward node) for a rounded flat punch.

    The punch is the set of points within ``fillet`` of the core half-strip
    ``|x| <= half_width - fillet, y >= face_y + fillet``.
    """
    core = half_width - fillet
    cx = np.clip(points[:, 0], -core, core)
    cy = np.maximum(points[:, 1], face_y + fillet)
    vec = points - np.column_stack([cx, cy])
    dist = np.hypot(vec[:, 0], vec[:, 1])
    gap = dist - fillet
    normal = np.zeros_like(points)
    normal[:, 1] = -1.0
    ok = dist > 1e-12 * max(fillet, 1.0)
    normal[ok] = vec[ok] / dist[ok, None]
    inside = ~ok
    gap[inside] = face_y - points[inside, 1]
    return gap, normal


class _LinearSolver:
    def __init__(self, K, tol, method):
        self.K = K
        self.tol = tol
        self.method = method
        if method == "direct":
            self._lu = spla.splu(K.tocsc())
        else:
            self._minv = 1.0 / K.diagonal()

    def solve(self, b):
        if self.method == "direct":
            return self._lu.solve(b)
        b = np.atleast_2d(b.T).T
        out = np.empty_like(b)
        M = spla.LinearOperator(self.K.shape, matvec=lambda v: self._minv * v)
        for j in range(b.shape[1]):
            x, info = spla.cg(self.K, b[:, j], rtol=self.tol, atol=0.0, M=M, maxiter=50 * self.K.shape[0])
            if info != 0:
                raise ConvergenceError(f"PCG did not converge (info={info})")
            out[:, j] = x
        return out if out.shape[1] > 1 else out[:, 0]


def _default_penalty(mesh, materials):
    used = np.unique(mesh.material)
    emax = max(materials[int(i)].elastic_modulus for i in used) / 1e6
    edge = mesh.target_edge or float(np.median(np.diff(np.sort(mesh.nodes[mesh.surface, 0]))))
    return 1e3 * emax / edge


def solve_indentation(mesh, materials, indenter, cfg=None, *, allow_wide=False):
    """Quasi-static indentation of ``mesh`` by a centred rigid flat punch.

    Parameters
    ----------
    mesh : Mesh
    materials : MaterialTable
    indenter : IndenterSpec
    cfg : SolveConfig, optional
    allow_wide : bool
        Permit a punch wider than the domain (confined compression).

    Returns
    -------
    IndentationSolution

    Raises
    ------
    ValueError
        If the punch is wider than the domain and ``allow_wide`` is false.
    ConvergenceError
        If the contact iteration does not settle within ``max_outer_iters``.
    """
    cfg = cfg or SolveConfig()
    half = mesh.half_width
    if indenter.width_d > 2.0 * half and not allow_wide:
        raise ValueError(f"indenter width {indenter.width_d} mm exceeds domain width {2 * half} mm")

    system = assemble_system(mesh, materials)
    kn = cfg.penalty_normal or _default_penalty(mesh, materials)
    kt = cfg.penalty_tangent or kn
    n = mesh.n_nodes

    if indenter.indent_depth_h == 0:
        empty = np.zeros(0)
        return IndentationSolution(
            np.zeros((n, 2)), np.zeros(0, dtype=np.int64), empty, empty, np.zeros((0, 2)), 0.0, kn, empty,
            {"steps": [], "penalty_normal": kn, "linear_residual": 0.0},
        )

    fixed = np.zeros(2 * n, dtype=bool)
    fixed[2 * mesh.bottom] = True
    fixed[2 * mesh.bottom + 1] = True
    fixed[2 * mesh.left] = True
    fixed[2 * mesh.right] = True
    free = np.nonzero(~fixed)[0]
    dof_to_free = np.full(2 * n, -1)
    dof_to_free[free] = np.arange(free.size)
    Kff = system.K[free][:, free].tocsr()
    solver = _LinearSolver(Kff, cfg.linear_tol, cfg.linear_solver)

    margin = cfg.candidate_margin
    for _attempt in range(4):
        result = _solve_condensed(mesh, indenter, cfg, kn, kt, solver, dof_to_free, margin)
        if result is not None:
            break
        margin *= 2.0
    else:
        raise ConvergenceError("contact region kept growing past the candidate set")

    cand, u_c, forces, lam, ft, pen, steps = result
    F = np.zeros(free.size)
    cdofs = np.column_stack([2 * cand, 2 * cand + 1])
    fidx = dof_to_free[cdofs]
    m = fidx >= 0
    F[fidx[m]] = forces.reshape(-1, 2)[m]
    u_free = solver.solve(F)
    res = float(np.linalg.norm(Kff @ u_free - F) / max(np.linalg.norm(F), 1e-300))
    if res > cfg.linear_tol:
        raise ConvergenceError(f"linear residual {res:.3e} exceeds tolerance {cfg.linear_tol:.1e}")
    u = np.zeros(2 * n)
    u[free] = u_free
    u = u.reshape(n, 2)
    u.setflags(write=False)

    active = lam > 0
    order = np.argsort(mesh.nodes[cand[active], 0], kind="stable")
    contact = cand[active][order]
    forces = forces.reshape(-1, 2)
    total = float(-forces[active, 1].sum()) if active.any() else 0.0
    return IndentationSolution(
        displacement=u,
        contact_set=contact,
        normal_forces=lam[active][order],
        tangential_forces=ft[active][order],
        contact_forces=forces[active][order],
        total_reaction=total,
        penalty_normal=kn,
        penetration=pen[active][order],
        log={
            "steps": steps,
            "penalty_normal": kn,
            "penalty_tangent": kt,
            "candidate_nodes": int(cand.size),
            "linear_residual": res,
            "total_reaction": total,
        },
    )


def _normal_terms(v, X0, a, r, delta, kn_i):
    """Normal penalty energy, force and stiffness at candidate displacements ``v``."""
    gap, nrm = _punch_gap(X0 + v, a, r, -delta)
    active = gap < 0
    pen = np.where(active, -gap, 0.0)
    lam = kn_i * pen
    energy = 0.5 * float(np.sum(kn_i * pen**2))
    force = lam[:, None] * nrm
    nn = nrm[:, :, None] * nrm[:, None, :]
    stiff = (kn_i * active)[:, None, None] * nn
    # the normal turns with position only around the fillet centres, not
    # along the flat face or the vertical sides
    p = X0 + v
    on_fillet = active & (np.abs(p[:, 0]) > a - r) & (p[:, 1] < -delta + r)
    dist = np.maximum(gap + r, 1e-12)
    curv = np.where(on_fillet, lam / dist, 0.0)
    stiff_curv = stiff - curv[:, None, None] * (np.eye(2)[None] - nn)
    return energy, force, (stiff, stiff_curv), lam, gap, nrm


def _line_search(gradient, v, dv, g0):
    """Step length along ``dv`` for a convex objective with gradient ``gradient``.

    Uses the monotone directional derivative (regula falsi, Illinois
    variant) rather than energy differences, which lose all precision near
    the minimum.
    """
    d0 = float(g0 @ dv.ravel())
    g1, K1 = gradient(v + dv)
    d1 = float(g1 @ dv.ravel())
    if d1 <= 0.0 or d0 >= 0.0:
        return 1.0, g1, K1
    lo, hi, dlo, dhi = 0.0, 1.0, d0, d1
    side = 0
    for _ in range(40):
        a = (lo * dhi - hi * dlo) / (dhi - dlo)
        ga, Ka = gradient(v + a * dv)
        da = float(ga @ dv.ravel())
        if abs(da) <= 1e-6 * abs(d0):
            break
        if da < 0:
            lo, dlo = a, da
            if side == -1:
                dhi *= 0.5
            side = -1
        else:
            hi, dhi = a, da
            if side == 1:
                dlo *= 0.5
            side = 1
    return a, ga, Ka


def _modified_newton_step(S, K_t, S_live, rhs):
    """Newton direction with the fillet curvature scaled down until SPD.

    The curvature of the penalty around a rounded corner makes the exact
    Hessian indefinite when a node is pressed hard into the fillet; the
    curvature share is halved until the Cholesky factorisation succeeds,
    falling back to the Gauss-Newton matrix.
    """
    base = S + _block_diag(K_t[0])[S_live]
    curv = _block_diag(K_t[1] - K_t[0])[S_live]
    theta = 1.0 if np.any(curv) else 0.0
    while True:
        try:
            factor = sla.cho_factor(base + theta * curv)
            return sla.cho_solve(factor, -rhs)
        except sla.LinAlgError:
            if theta == 0.0:
                raise
            theta = 0.0 if theta < 1.0 / 64 else 0.5 * theta


def _block_diag(blocks):
    m = blocks.shape[0]
    out = np.zeros((2 * m, 2 * m))
    idx = np.arange(m) * 2
    for i in range(2):
        for j in range(2):
            out[idx + i, idx + j] = blocks[:, i, j]
    return out


def _solve_condensed(mesh, indenter, cfg, kn, kt, solver, dof_to_free, margin):
    a = 0.5 * indenter.width_d
    r = indenter.corner_fillet
    surf = mesh.surface
    xs = mesh.nodes[surf, 0]
    trib = mesh.surface_tributary()
    sel = np.abs(xs) <= a + margin
    cand = surf[sel]
    kn_i = kn * trib[sel]
    kt_i = kt * trib[sel]
    mu = indenter.friction_mu
    X0 = mesh.nodes[cand]
    m = cand.size

    # compliance of the candidate dofs
    cdofs = np.column_stack([2 * cand, 2 * cand + 1]).ravel()
    cfree = dof_to_free[cdofs]
    live = cfree >= 0
    idx = cfree[live]
    nl = idx.size
    C = np.empty((nl, nl))
    chunk = 64
    for j0 in range(0, nl, chunk):
        cols = idx[j0 : j0 + chunk]
        B = np.zeros((solver.K.shape[0], cols.size))
        B[cols, np.arange(cols.size)] = 1.0
        C[:, j0 : j0 + cols.size] = np.asarray(solver.solve(B)).reshape(-1, cols.size)[idx]
    C = 0.5 * (C + C.T)
    S = sla.cho_solve(sla.cho_factor(C), np.eye(nl))
    S = 0.5 * (S + S.T)

    u = np.zeros((m, 2))
    ft = np.zeros(m)
    steps = []
    N = cfg.load_steps
    h = indenter.indent_depth_h
    ddelta = h / N
    S_live = np.ix_(live, live)
    for step in range(1, N + 1):
        delta = h * step / N
        u_prev = u.copy()
        ft_prev = ft.copy()

        # Friction acts along the punch face (x). With the Coulomb bound
        # b = mu * lam frozen, the return-mapped tangential force is the
        # derivative of a convex energy, so each inner solve is a convex
        # minimisation; the outer loop updates b from the normal forces.
        _, _, _, lam, gap, _ = _normal_terms(u, X0, a, r, delta, kn_i)
        bound = mu * lam
        v = u.copy()
        relax, prev_change, prev_state = 1.0, np.inf, None
        for outer in range(1, cfg.max_outer_iters + 1):
            s_lo = (ft_prev - bound) / kt_i
            s_hi = (ft_prev + bound) / kt_i

            def gradient(w):
                # gradient and Hessian blocks of the (convex) incremental energy
                _, f_n, K_n, *_ = _normal_terms(w, X0, a, r, delta, kn_i)
                sl = w[:, 0] - u_prev[:, 0]
                ft_w = np.clip(ft_prev - kt_i * sl, -bound, bound)
                grad = -f_n
                grad[:, 0] -= ft_w
                g = np.zeros(2 * m)
                g[live] = S @ w.ravel()[live] + grad.ravel()[live]
                k_stick = kt_i * ((sl > s_lo) & (sl < s_hi))
                K_t = tuple(k.copy() for k in K_n)
                for k in K_t:
                    k[:, 0, 0] += k_stick
                return g, K_t

            g, K_t = gradient(v)
            best, since_best = np.inf, 0
            rel = np.inf
            for newton in range(cfg.max_newton_iters):
                dv = np.zeros(2 * m)
                if rel < _EXACT_NEWTON_SWITCH:
                    # Close to equilibrium take exact Newton steps on the
                    # stationarity condition: a node wrapped around a fillet
                    # can sit at a saddle of the incremental energy, which a
                    # descent method only approaches linearly.
                    J = S + _block_diag(K_t[1])[S_live]
                    dv[live] = sla.solve(J, -g[live])
                    dvm = dv.reshape(m, 2)
                    g_try, K_try = gradient(v + dvm)
                    if np.abs(g_try).max() < np.abs(g).max():
                        alpha, g, K_t = 1.0, g_try, K_try
                    else:
                        dv[live] = _modified_newton_step(S, K_t, S_live, g[live])
                        dvm = dv.reshape(m, 2)
                        alpha, g, K_t = _line_search(gradient, v, dvm, g)
                else:
                    dv[live] = _modified_newton_step(S, K_t, S_live, g[live])
                    dvm = dv.reshape(m, 2)
                    alpha, g, K_t = _line_search(gradient, v, dvm, g)
                v = v + alpha * dvm
                gscale = max(float(np.abs(S @ v.ravel()[live]).max()), kn * h * 1e-12)
                rel = float(np.abs(g).max()) / gscale
                # near round-off the residual stops improving; accept once it
                # has not halved in a few iterations and is already small
                if rel < 0.5 * best:
                    best, since_best = rel, 0
                else:
                    since_best += 1
                if rel <= cfg.newton_tol or (since_best >= 5 and rel <= 1e-6):
                    break
            else:
                raise ConvergenceError(
                    f"contact Newton iteration did not converge at step {step}/{N} "
                    f"(relative residual {rel:.3e})"
                )

            _, _, _, lam, gap, nrm = _normal_terms(v, X0, a, r, delta, kn_i)
            new_bound = mu * lam
            change = float(np.abs(new_bound - bound).max()) if m else 0.0
            fscale = max(float(lam.max()) if m else 0.0, 1e-300)
            sl = v[:, 0] - u_prev[:, 0]
            state = np.concatenate([lam > 0, np.abs(ft_prev - kt_i * sl) < new_bound])
            stable = prev_state is not None and np.array_equal(state, prev_state)
            prev_state = state
            # The active set has settled once contact and stick states repeat
            # between outer iterations and the friction bounds have stopped moving.
            if mu == 0 or (stable and change <= cfg.friction_tol * fscale):
                bound = new_bound
                break
            # Plain substitution can lock into a cycle while the sets change;
            # under-relax whenever the bound change stops shrinking.
            if change > 0.9 * prev_change:
                relax = max(0.5 * relax, 0.05)
            prev_change = change
            bound = bound + relax * (new_bound - bound)
        else:
            raise ConvergenceError(
                f"friction iteration did not converge at step {step}/{N} "
                f"(bound change {change / fscale:.3e})"
            )

        active = lam > 0
        sl = v[:, 0] - u_prev[:, 0]
        trial = ft_prev - kt_i * sl
        stick = active & (np.abs(trial) <= bound)

        u = v
        ft = np.where(active, np.clip(trial, -bound, bound), 0.0)
        forces = lam[:, None] * nrm
        forces[:, 0] += ft
        total = float(-forces[:, 1].sum())
        steps.append(
            {
                "step": step,
                "indent_mm": delta,
                "outer_iterations": outer,
                "residual": float(np.abs(g).max()) / gscale,
                "contact_nodes": int(active.sum()),
                "stick_nodes": int(stick.sum()),
                "total_reaction": total,
            }
        )
        log.debug("step %d/%d: %d in contact, reaction %.4g N/mm", step, N, int(active.sum()), total)

    # the outermost candidates must stay clear, otherwise widen the set
    if (active[0] or active[-1]) and cand.size < mesh.surface.size:
        return None
    pen = np.maximum(-gap, 0.0)
    return cand, u, forces.ravel(), lam, ft, pen, steps


@dataclass(frozen=True)
class PressureSummary:
    mean_pressure: float  # MPa (N/mm^2) per unit thickness
    peak_pressure: float  # MPa, largest nodal normal force / tributary length
    contact_width: float  # mm
    total_reaction: float  # N per mm thickness

    def to_dict(self):
        return asdict(self)


def contact_pressure_summary(solution, indenter=None, mesh=None):
    """Mean and peak contact pressure for a solved indentation.

    Contact width is the reference-configuration extent of the contact set
    plus half the surface edge on either end, and pressures are force per
    mm of thickness over that width (N/mm^2 = MPa). Pass the mesh for the
    peak nodal pressure and contact width; without it, the width is taken
    from ``indenter.width_d``.
    """
    if solution.contact_set.size == 0:
        raise ValueError("empty contact set")
    if mesh is not None:
        trib_all = mesh.surface_tributary()
        pos = np.searchsorted(mesh.nodes[mesh.surface, 0], mesh.nodes[solution.contact_set, 0])
        trib = trib_all[pos]
        xc = mesh.nodes[solution.contact_set, 0]
        width = float(xc.max() - xc.min() + 0.5 * (trib[0] + trib[-1]))
        peak = float(np.max(solution.normal_forces / trib))
    else:
        width = float(indenter.width_d)
        peak = float("nan")
    return PressureSummary(solution.total_reaction / width, peak, width, solution.total_reaction)


def pressure_from_reaction(total_reaction, contact_width):
    """Mean pressure (MPa) for a reaction in N per mm thickness over ``contact_width`` mm."""
    if not contact_width > 0:
        raise ValueError("contact width must be positive")
    return total_reaction / contact_width
