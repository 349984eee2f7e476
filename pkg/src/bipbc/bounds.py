"""Certified momentum and control-effort bounds for IDA-PBC loops.

Starting from the closed-loop energy H_d as a Lyapunov function, the level
set {H_d <= H_d(t0)} traps the trajectory, which bounds the momenta:

    ||p||      <= sqrt(H_d(t0) / lam_min{M_d^-1})      = c_p1
    ||ptilde|| <= sqrt(H_d(t0) / lam_min{M_d})          = c_ptilde1

When R_2 is positive definite there are also ultimate bounds c_p2 and
c_ptilde2 driven by the dissipation rate. Each actuator's effort is then
bounded by summing the worst case of every term of the control law:

    |tau_i| <= c_V_i + c_Lambda_i c_Vd
               + (c_M_i + c_Lambda_i c_Md) c_p^2
               + c_J c_ptilde^2 + lam_max{K_v} c_ptilde

where the c_* constants dominate the gravity gradient, the desired-potential
gradient, the (quadratic-in-p) kinetic shaping terms, the interconnection
J_2, and the damping injection over the certification workspace. A more
conservative variant covers configuration-dependent G through
G_M >= ||(G^T G)^-1 G^T|| and G_m >= ||G||, and a minimum sigma of the
potential terms gives per-actuator lower bounds (tension-only actuators).

Constants are estimated by sampling the defining ratios over the declared
workspace box (plus its corners and center) and taking maxima, with a
configurable safety inflation on the suprema. Eigenvalue extremes are raw
per-sample extremes; this is a practical certificate, not interval
arithmetic, so the workspace declaration is part of the contract.
Estimation sweeps are pure and parallelizable over sample points; all
reports are immutable values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from .controller import TargetDynamics, kinetic_d_grad, mass_d_solve
from .errors import NonpositiveEigenvalue
from .matching import build_r2
from .phcore import MechanicalSystem, kinetic_energy_grad, mass_solve
from .sampling import Box


def unit_input_rows(g: np.ndarray, tol: float = 1e-12) -> Optional[np.ndarray]:
    """Actuated-row indices when G is a permutation-selected [I_m; 0] block.

    Returns the row index carrying the 1 of each column, or None when G is
    not of that 0/1 unit structure.
    """
    g = np.asarray(g, dtype=float)
    rows = np.full(g.shape[1], -1, dtype=int)
    for j in range(g.shape[1]):
        col = g[:, j]
        ones = np.flatnonzero(np.abs(col - 1.0) <= tol)
        zeros = np.flatnonzero(np.abs(col) <= tol)
        if ones.size != 1 or ones.size + zeros.size != col.size:
            return None
        rows[j] = ones[0]
    if np.unique(rows).size != rows.size:
        return None
    return rows


@dataclass(frozen=True)
class BoundConstants:
    """Workspace constants of the bounding assumptions.

    `c_V`, `c_M`, `c_Lambda`, `sigma` are per-actuator vectors. For plants
    whose G is a 0/1 unit-structure matrix they dominate the actuated rows
    of grad V, grad K, and M_d M^-1; for configuration-dependent G they
    dominate the same quantities pulled back through (G^T G)^-1 G^T (the
    form the general-G bound uses directly). `unit_structure` records which
    convention applies.
    """

    c_V: np.ndarray
    c_Vd: float
    c_M: np.ndarray
    c_Md: float
    c_J: float
    c_Lambda: np.ndarray
    lam_min_MdInv: float
    lam_max_MdInv: float
    lam_min_Md: float
    lam_max_Md: float
    lam_min_R2: float
    lam_max_Kv: float
    G_M: float
    G_m: float
    sigma: np.ndarray
    mu: float = 1e-6
    unit_structure: bool = True
    samples: int = 0

    def with_mu(self, mu: float) -> "BoundConstants":
        if mu <= 0:
            raise ValueError("mu must be positive")
        return replace(self, mu=mu)


def estimate_constants(
    sys: MechanicalSystem,
    tgt: TargetDynamics,
    momentum_cap: float = 2.0,
    samples: int = 1000,
    inflation: float = 1.05,
    mu: float = 1e-6,
    region: Box | None = None,
    vd_grad_region: Box | None = None,
) -> BoundConstants:
    """Estimate every bounding constant over the certification workspace.

    The kinetic-term and interconnection constants exploit homogeneity in p:
    grad_q K and grad_q K_d are quadratic in p and J_2 is linear in ptilde,
    so their defining ratios are evaluated on unit momenta only. Suprema get
    multiplied by `inflation` (grid maxima under-estimate the true suprema);
    eigenvalue extremes are reported raw.

    Args:
        momentum_cap: radius of the momentum ball the certificate covers
            (enters only through the sanity of the homogeneity sweep).
        region: overrides the system workspace for all constants.
        vd_grad_region: separate region for the grad V_d supremum, for
            designs whose grad V_d is confined by a level-set argument to a
            smaller region than the full workspace.
    """
    del momentum_cap  # ratios are p-scale invariant; kept for interface clarity
    box = region if region is not None else sys.workspace
    qs = np.vstack([box.sample(samples), box.corners(), box.center()[None, :]])
    n, m = sys.n, sys.m

    directions = _unit_directions(n, max(64, 8 * n))

    # decide the row convention up front so the whole sweep uses one of them
    rows = unit_input_rows(np.asarray(sys.input_coupling(box.center()), dtype=float))
    if rows is not None:
        for q in qs:
            if unit_input_rows(np.asarray(sys.input_coupling(q), dtype=float)) is None:
                rows = None
                break
    unit_structure = rows is not None

    c_v = np.zeros(m)
    c_lam = np.zeros(m)
    c_m = np.zeros(m)
    c_md = 0.0
    c_j = 0.0
    g_cap = 0.0
    g_pinv_cap = 0.0
    sigma = np.full(m, np.inf)
    lam_min_md = np.inf
    lam_max_md = -np.inf
    lam_min_r2 = np.inf

    for q in qs:
        g = np.asarray(sys.input_coupling(q), dtype=float)
        md = tgt.mass_d(q)
        lam = md @ np.linalg.inv(sys.mass_matrix(q))
        grad_v = np.asarray(sys.potential_grad(q), dtype=float)
        grad_vd = np.asarray(tgt.potential_d_grad(q), dtype=float)
        pinv_g = np.linalg.pinv(g)

        eigs = np.linalg.eigvalsh(0.5 * (md + md.T))
        lam_min_md = min(lam_min_md, float(eigs[0]))
        lam_max_md = max(lam_max_md, float(eigs[-1]))
        lam_min_r2 = min(
            lam_min_r2, float(np.min(np.linalg.eigvalsh(build_r2(sys, tgt, q))))
        )
        g_cap = max(g_cap, float(np.linalg.norm(g, 2)))
        g_pinv_cap = max(g_pinv_cap, float(np.linalg.norm(pinv_g, 2)))
        sigma_q = pinv_g @ (grad_v - lam @ grad_vd)
        sigma = np.minimum(sigma, sigma_q)

        if unit_structure:
            c_v = np.maximum(c_v, np.abs(grad_v[rows]))
            c_lam = np.maximum(c_lam, np.linalg.norm(lam[rows, :], axis=1))
        else:
            c_v = np.maximum(c_v, np.abs(pinv_g @ grad_v))
            c_lam = np.maximum(c_lam, np.linalg.norm(pinv_g @ lam, axis=1))

        for u in directions:
            gk = kinetic_energy_grad(sys, q, u)
            gkd = kinetic_d_grad(tgt, q, u)
            if unit_structure:
                c_m = np.maximum(c_m, np.abs(gk[rows]))
            else:
                c_m = np.maximum(c_m, np.abs(pinv_g @ gk))
            c_md = max(c_md, float(np.linalg.norm(gkd)))
            c_j = max(c_j, float(np.linalg.norm(tgt.j2(q, u), 2)))

    c_vd = _sup_vd_grad(tgt, vd_grad_region if vd_grad_region is not None else box, samples)

    if lam_min_md <= 0:
        raise NonpositiveEigenvalue("M_d not positive definite on the workspace")

    kv = tgt.damping_gain
    lam_max_kv = float(np.max(np.linalg.eigvalsh(0.5 * (kv + kv.T))))

    return BoundConstants(
        c_V=inflation * c_v,
        c_Vd=inflation * c_vd,
        c_M=inflation * c_m,
        c_Md=inflation * c_md,
        c_J=inflation * c_j,
        c_Lambda=inflation * c_lam,
        lam_min_MdInv=1.0 / lam_max_md,
        lam_max_MdInv=1.0 / lam_min_md,
        lam_min_Md=lam_min_md,
        lam_max_Md=lam_max_md,
        lam_min_R2=float(lam_min_r2),
        lam_max_Kv=lam_max_kv,
        G_M=inflation * g_pinv_cap,
        G_m=inflation * g_cap,
        sigma=sigma,
        mu=mu,
        unit_structure=bool(unit_structure),
        samples=int(qs.shape[0]),
    )


def _unit_directions(dim: int, count: int) -> np.ndarray:
    """Deterministic spread of unit vectors, axes included."""
    rng = np.random.default_rng(20250817)
    raw = rng.standard_normal((count, dim))
    raw /= np.linalg.norm(raw, axis=1, keepdims=True)
    axes = np.vstack([np.eye(dim), -np.eye(dim)])
    return np.vstack([axes, raw])


def _sup_vd_grad(tgt: TargetDynamics, box: Box, samples: int) -> float:
    qs = np.vstack([box.sample(samples, skip=7 * samples), box.corners()])
    best = 0.0
    for q in qs:
        best = max(best, float(np.linalg.norm(tgt.potential_d_grad(q))))
    return best


def validate_constants(
    sys: MechanicalSystem,
    tgt: TargetDynamics,
    constants: BoundConstants,
    momentum_cap: float = 2.0,
    samples: int = 10_000,
    seed: int = 1,
    region: Box | None = None,
) -> int:
    """Brute-force recheck of the bounding inequalities on fresh samples.

    Draws a validation set disjoint from the estimation sweep and counts
    violations of

        |(grad_q K)_i| <= c_M_i ||p||^2,   ||grad_q K_d|| <= c_Md ||p||^2,
        ||J_2(q, ptilde)|| <= c_J ||ptilde||,   row bounds on Lambda,
        |(grad_q V)_i| <= c_V_i,   ||grad_q V_d|| <= c_Vd.

    Returns the number of violating samples (0 means the certificate holds
    on the validation set).
    """
    box = region if region is not None else sys.workspace
    rng = np.random.default_rng(seed)
    qs = box.lower + rng.random((samples, sys.n)) * (box.upper - box.lower)
    ps = rng.standard_normal((samples, sys.n))
    ps *= (momentum_cap * rng.random((samples, 1)) ** (1.0 / sys.n)) / np.linalg.norm(
        ps, axis=1, keepdims=True
    )
    rows = unit_input_rows(np.asarray(sys.input_coupling(box.center()), dtype=float))
    use_rows = constants.unit_structure and rows is not None
    tol = 1e-9
    bad = 0
    for q, p in zip(qs, ps):
        pn2 = float(p @ p)
        pt = mass_d_solve(tgt, q, p)
        gk = kinetic_energy_grad(sys, q, p)
        gkd = kinetic_d_grad(tgt, q, p)
        lam = tgt.mass_d(q) @ np.linalg.inv(sys.mass_matrix(q))
        grad_v = np.asarray(sys.potential_grad(q), dtype=float)
        grad_vd = np.asarray(tgt.potential_d_grad(q), dtype=float)
        if use_rows:
            gk_rows = np.abs(gk[rows])
            lam_rows = np.linalg.norm(lam[rows, :], axis=1)
            v_rows = np.abs(grad_v[rows])
        else:
            pinv_g = np.linalg.pinv(np.asarray(sys.input_coupling(q), dtype=float))
            gk_rows = np.abs(pinv_g @ gk)
            lam_rows = np.linalg.norm(pinv_g @ lam, axis=1)
            v_rows = np.abs(pinv_g @ grad_v)
        ok = (
            np.all(gk_rows <= constants.c_M * pn2 + tol)
            and float(np.linalg.norm(gkd)) <= constants.c_Md * pn2 + tol
            and float(np.linalg.norm(tgt.j2(q, pt), 2))
            <= constants.c_J * float(np.linalg.norm(pt)) + tol
            and np.all(lam_rows <= constants.c_Lambda + tol)
            and np.all(v_rows <= constants.c_V + tol)
            and float(np.linalg.norm(grad_vd)) <= constants.c_Vd + tol
        )
        if not ok:
            bad += 1
    return bad


#: The level-set argument K_d = p^T M_d^-1 p / 2 <= H_d(t0) yields
#: ||p|| <= sqrt(2 H_d(t0) / lam_min{M_d^-1}); the published arithmetic drops
#: the factor 2 and trajectories with a kinetic-heavy start can exceed the
#: factor-free value by up to sqrt(2). `momentum_bounds` reproduces the
#: published form; STRICT_FACTOR restores the complete bound for soundness
#: certification.
STRICT_FACTOR = math.sqrt(2.0)


def empirical_constants(sys: MechanicalSystem, tgt: TargetDynamics, traj) -> dict:
    """Maxima of the defining ratios along a simulated trajectory.

    A diagnostic counterpart to `estimate_constants`: instead of the
    declared workspace box, the supremum region is the set of states the
    closed loop actually visited. Useful for judging how conservative the
    workspace certificate is, and for reproducing constants that were
    quoted for a specific run rather than for a region.
    """
    rows = unit_input_rows(
        np.asarray(sys.input_coupling(tgt.equilibrium), dtype=float)
    )
    m = sys.m
    out = {
        "c_V": np.zeros(m),
        "c_Vd": 0.0,
        "c_M": np.zeros(m),
        "c_Md": 0.0,
        "c_J": 0.0,
        "c_Lambda": np.zeros(m),
        "p_norm_max": float(np.max(traj.p_norm)),
        "ptilde_norm_max": float(np.nanmax(traj.ptilde_norm)),
    }
    for q, p in zip(traj.q, traj.p):
        grad_v = np.asarray(sys.potential_grad(q), dtype=float)
        grad_vd = np.asarray(tgt.potential_d_grad(q), dtype=float)
        lam = tgt.mass_d(q) @ np.linalg.inv(sys.mass_matrix(q))
        if rows is not None:
            out["c_V"] = np.maximum(out["c_V"], np.abs(grad_v[rows]))
            out["c_Lambda"] = np.maximum(
                out["c_Lambda"], np.linalg.norm(lam[rows, :], axis=1)
            )
        else:
            pinv_g = np.linalg.pinv(np.asarray(sys.input_coupling(q), dtype=float))
            out["c_V"] = np.maximum(out["c_V"], np.abs(pinv_g @ grad_v))
            out["c_Lambda"] = np.maximum(
                out["c_Lambda"], np.linalg.norm(pinv_g @ lam, axis=1)
            )
        out["c_Vd"] = max(out["c_Vd"], float(np.linalg.norm(grad_vd)))
        pn2 = float(p @ p)
        if pn2 > 1e-12:
            gk = kinetic_energy_grad(sys, q, p)
            gkd = kinetic_d_grad(tgt, q, p)
            pt = mass_d_solve(tgt, q, p)
            ptn = float(np.linalg.norm(pt))
            if rows is not None:
                out["c_M"] = np.maximum(out["c_M"], np.abs(gk[rows]) / pn2)
            out["c_Md"] = max(out["c_Md"], float(np.linalg.norm(gkd)) / pn2)
            if ptn > 1e-9:
                out["c_J"] = max(
                    out["c_J"], float(np.linalg.norm(tgt.j2(q, pt), 2)) / ptn
                )
    return out


def momentum_bounds(constants: BoundConstants, hd_t0: float) -> Tuple[float, float]:
    """Level-set momentum bounds (c_p1, c_ptilde1) from H_d(t0), as published.

    Raises:
        NonpositiveEigenvalue: a required eigenvalue extreme is <= 0.
    """
    if hd_t0 < 0:
        raise ValueError("hd_t0 must be nonnegative")
    if constants.lam_min_MdInv <= 0 or constants.lam_min_Md <= 0:
        raise NonpositiveEigenvalue("momentum bounds need positive lam_min extremes")
    c_p1 = math.sqrt(hd_t0 / constants.lam_min_MdInv)
    c_pt1 = math.sqrt(hd_t0 / constants.lam_min_Md)
    return c_p1, c_pt1


def ultimate_bounds(constants: BoundConstants) -> Optional[Tuple[float, float]]:
    """Dissipation-driven ultimate bounds (c_p2, c_ptilde2).

    Returns None when lam_min{R_2} <= 0 on the workspace (the positivity
    condition fails and this part of the certificate is not applicable).
    """
    if constants.lam_min_R2 <= 0:
        return None
    li, la = constants.lam_min_MdInv, constants.lam_max_MdInv
    c_p2 = math.sqrt(la / li) * constants.c_Vd * la / (li**2 * constants.lam_min_R2 + constants.mu)
    c_pt2 = (
        math.sqrt(constants.lam_max_Md / constants.lam_min_Md)
        * constants.c_Vd
        / (constants.lam_min_R2 + constants.mu)
    )
    return c_p2, c_pt2


def select_momentum_bounds(
    constants: BoundConstants,
    hd_t0: float,
    p0_norm: float = 0.0,
    ptilde0_norm: float = 0.0,
):
    """Apply the selection rule between level-set and ultimate bounds.

    c_p defaults to c_p1; when the ultimate bound exists and the initial
    momentum already sits inside it, c_p = min(c_p1, c_p2). Likewise for
    ptilde. Returns (c_p1, c_pt1, c_p2, c_pt2, c_p, c_pt) with the ultimate
    entries None when not applicable.
    """
    c_p1, c_pt1 = momentum_bounds(constants, hd_t0)
    ult = ultimate_bounds(constants)
    if ult is None:
        return c_p1, c_pt1, None, None, c_p1, c_pt1
    c_p2, c_pt2 = ult
    c_p = min(c_p1, c_p2) if p0_norm <= c_p2 else c_p1
    c_pt = min(c_pt1, c_pt2) if ptilde0_norm <= c_pt2 else c_pt1
    return c_p1, c_pt1, c_p2, c_pt2, c_p, c_pt


def strict_selection(
    c_p1: float,
    c_pt1: float,
    c_p2: Optional[float],
    c_pt2: Optional[float],
    p0_norm: float = 0.0,
    ptilde0_norm: float = 0.0,
) -> Tuple[float, float]:
    """Selection rule applied to the complete (factor-sqrt(2)) level-set bounds.

    The ultimate bounds are unaffected by the factor (the half cancels in
    the class-K sandwich), so only the level-set branch is scaled.
    """
    c_p1s, c_pt1s = STRICT_FACTOR * c_p1, STRICT_FACTOR * c_pt1
    if c_p2 is None:
        return c_p1s, c_pt1s
    c_p = min(c_p1s, c_p2) if p0_norm <= c_p2 else c_p1s
    c_pt = min(c_pt1s, c_pt2) if ptilde0_norm <= c_pt2 else c_pt1s
    return c_p, c_pt


def control_upper_bound(
    constants: BoundConstants, c_p: float, c_ptilde: float
) -> np.ndarray:
    """Per-actuator effort bound for unit-structure G (the sharp form)."""
    return (
        constants.c_V
        + constants.c_Lambda * constants.c_Vd
        + (constants.c_M + constants.c_Lambda * constants.c_Md) * c_p**2
        + constants.c_J * c_ptilde**2
        + constants.lam_max_Kv * c_ptilde
    )


def control_bound_general_g(
    constants: BoundConstants, c_p: float, c_ptilde: float
) -> Tuple[np.ndarray, np.ndarray]:
    """Conservative (upper, lower) effort bounds for configuration-dependent G.

    upper_i = G_M (c_V_i + c_Lambda_i c_Vd + (c_M_i + c_Lambda_i c_Md) c_p^2
                   + c_J c_ptilde^2) + G_m lam_max{K_v} c_ptilde
    lower_i = sigma_i - G_M ((c_M_i + c_Lambda_i c_Md) c_p^2 + c_J c_ptilde^2)
                   - G_m lam_max{K_v} c_ptilde

    A positive lower bound certifies tension-only feasibility (cable robots).
    """
    kinetic = (constants.c_M + constants.c_Lambda * constants.c_Md) * c_p**2
    damping = constants.G_m * constants.lam_max_Kv * c_ptilde
    upper = (
        constants.G_M
        * (constants.c_V + constants.c_Lambda * constants.c_Vd + kinetic + constants.c_J * c_ptilde**2)
        + damping
    )
    lower = constants.sigma - constants.G_M * (kinetic + constants.c_J * c_ptilde**2) - damping
    return upper, lower


@dataclass(frozen=True)
class BoundReport:
    """Certified momentum and per-actuator control bounds.

    `c_p1` / `c_p` follow the published factor-free arithmetic; the
    `*_strict` fields carry the complete level-set bounds (sqrt(2) larger on
    the level-set branch) that every trajectory provably respects.
    `tau_center` shifts the control certificate: the guarantee is
    |tau_i - tau_center_i| <= tau_upper_i (nonzero for designs that carry a
    constant feedforward such as gravity compensation). `tau_upper_strict`
    is the same certificate evaluated at the strict momentum bounds.
    """

    c_p1: float
    c_ptilde1: float
    c_p2: Optional[float]
    c_ptilde2: Optional[float]
    c_p: float
    c_ptilde: float
    c_p_strict: float
    c_ptilde_strict: float
    tau_upper: np.ndarray
    tau_lower: Optional[np.ndarray]
    tau_center: np.ndarray
    tau_upper_strict: np.ndarray
    hd_t0: float


def bound_report(
    constants: BoundConstants,
    hd_t0: float,
    p0_norm: float = 0.0,
    ptilde0_norm: float = 0.0,
    general_g: Optional[bool] = None,
    tau_center: Optional[np.ndarray] = None,
) -> BoundReport:
    """Assemble the full certificate for a run starting at energy hd_t0.

    `general_g` picks the conservative configuration-dependent-G form;
    by default it follows the structure detected during estimation.
    """
    c_p1, c_pt1, c_p2, c_pt2, c_p, c_pt = select_momentum_bounds(
        constants, hd_t0, p0_norm, ptilde0_norm
    )
    c_p_strict, c_pt_strict = strict_selection(
        c_p1, c_pt1, c_p2, c_pt2, p0_norm, ptilde0_norm
    )
    use_general = (not constants.unit_structure) if general_g is None else general_g
    if use_general:
        upper, lower = control_bound_general_g(constants, c_p, c_pt)
        upper_strict, _ = control_bound_general_g(constants, c_p_strict, c_pt_strict)
    else:
        upper = control_upper_bound(constants, c_p, c_pt)
        upper_strict = control_upper_bound(constants, c_p_strict, c_pt_strict)
        lower = None
    m = upper.size
    center = np.zeros(m) if tau_center is None else np.asarray(tau_center, dtype=float)
    return BoundReport(
        c_p1=c_p1,
        c_ptilde1=c_pt1,
        c_p2=c_p2,
        c_ptilde2=c_pt2,
        c_p=c_p,
        c_ptilde=c_pt,
        c_p_strict=c_p_strict,
        c_ptilde_strict=c_pt_strict,
        tau_upper=upper,
        tau_lower=lower,
        tau_center=center,
        tau_upper_strict=upper_strict,
        hd_t0=hd_t0,
    )


@dataclass(frozen=True)
class ConfinementInterval:
    """Level-set confinement of one coordinate: q_i stays in [lower, upper].

    `clipped_*` flag sides where no level crossing was found inside the
    workspace box (the interval is then clipped to the box edge)."""

    coordinate: int
    lower: float
    upper: float
    clipped_lower: bool
    clipped_upper: bool


def levelset_confinement(
    tgt: TargetDynamics,
    hd_t0: float,
    coordinate: int,
    box: Box,
    tol: float = 1e-10,
) -> ConfinementInterval:
    """Excursion interval of q_i on the level set {V_d <= hd_t0}.

    All other coordinates are pinned at q*; the crossing V_d = hd_t0 is
    located by outward bracketing plus bisection in each direction. Used to
    restrict the supremum of non-smooth grad V_d terms to the region the
    trajectory can actually reach.
    """
    if hd_t0 < 0:
        raise ValueError("hd_t0 must be nonnegative")
    qstar = tgt.equilibrium
    base = float(tgt.potential_d(qstar))

    def excess(x: float) -> float:
        q = qstar.copy()
        q[coordinate] = x
        return float(tgt.potential_d(q)) - base - hd_t0

    if hd_t0 == 0.0:
        x0 = float(qstar[coordinate])
        return ConfinementInterval(coordinate, x0, x0, False, False)

    def solve_direction(limit: float) -> Tuple[float, bool]:
        x0 = float(qstar[coordinate])
        if limit == x0:
            return x0, False
        if excess(limit) < 0:
            return limit, True
        # walk outward with doubling steps until the level set is crossed
        sign = math.copysign(1.0, limit - x0)
        step = max(1e-3 * abs(limit - x0), 1e-9)
        lo = x0
        hi = limit
        x = x0
        while True:
            nxt = x + sign * step
            if (nxt - limit) * sign >= 0:
                lo = x
                break
            if excess(nxt) >= 0:
                lo, hi = x, nxt
                break
            lo = x = nxt
            step *= 2.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if excess(mid) >= 0:
                hi = mid
            else:
                lo = mid
            if abs(hi - lo) < tol * max(1.0, abs(hi)):
                break
        return 0.5 * (lo + hi), False

    upper, clip_hi = solve_direction(float(box.upper[coordinate]))
    lower, clip_lo = solve_direction(float(box.lower[coordinate]))
    return ConfinementInterval(
        coordinate=coordinate,
        lower=min(lower, upper),
        upper=max(lower, upper),
        clipped_lower=clip_lo,
        clipped_upper=clip_hi,
    )


@dataclass(frozen=True)
class KvAdvisory:
    """Guidance on choosing the damping-injection gain K_v.

    `branch` is "small_kv" when R M^-1 M_d + M_d M^-1 R is PD on the
    workspace (natural damping already makes R_2 PD, keep K_v small), else
    "kv_for_r2" (K_v must provide the positivity, if G's range allows it).
    `kappa_for_pd` is the smallest scalar kappa with K_v = kappa I making
    R_2 PD over the workspace, or None when no kappa can (unactuated
    directions stay undamped). `fraction` evaluates the damping-term ratio
    sqrt(lam_max{M_d}/lam_min{M_d}) * c_Vd * lam_max{K_v} / (lam_min{R_2}+mu)
    at sample gains; `kappa_below_one` reports whether some sampled kappa
    brings it under 1.
    """

    branch: str
    sym_min_eig: float
    kappa_for_pd: Optional[float]
    fraction: dict
    fraction_limit_small: float
    fraction_limit_large: float
    kappa_below_one: Optional[float]


def kv_advisory(
    sys: MechanicalSystem,
    tgt: TargetDynamics,
    constants: BoundConstants,
    kappas: Tuple[float, ...] = (0.1, 1.0, 5.0, 50.0),
    samples: int = 200,
) -> KvAdvisory:
    """Classify the design and tabulate the damping-term ratio over kappa."""
    box = sys.workspace
    qs = np.vstack([box.sample(samples), box.corners(), box.center()[None, :]])

    def sym_min() -> float:
        worst = np.inf
        for q in qs:
            md = tgt.mass_d(q)
            r = np.asarray(sys.damping(q), dtype=float)
            s = r @ mass_solve(sys, q, md)
            worst = min(worst, float(np.min(np.linalg.eigvalsh(s + s.T))))
        return worst

    def r2_min_with(kappa: float) -> float:
        worst = np.inf
        kv = kappa * np.eye(sys.m)
        for q in qs:
            md = tgt.mass_d(q)
            r = np.asarray(sys.damping(q), dtype=float)
            g = np.asarray(sys.input_coupling(q), dtype=float)
            s = r @ mass_solve(sys, q, md)
            r2 = 0.5 * (s + s.T) + g @ kv @ g.T
            worst = min(worst, float(np.min(np.linalg.eigvalsh(r2))))
        return worst

    sym = sym_min()
    branch = "small_kv" if sym > 0 else "kv_for_r2"

    kappa_for_pd: Optional[float] = None
    if branch == "kv_for_r2":
        if r2_min_with(1e6) > 0:
            lo, hi = 0.0, 1e6
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if r2_min_with(mid) > 0:
                    hi = mid
                else:
                    lo = mid
            kappa_for_pd = hi

    ratio_prefix = math.sqrt(constants.lam_max_Md / constants.lam_min_Md) * constants.c_Vd

    def fraction_at(kappa: float) -> float:
        return kappa * ratio_prefix / (max(r2_min_with(kappa), 0.0) + constants.mu)

    fraction = {kappa: fraction_at(kappa) for kappa in kappas}
    small = fraction_at(1e-9)
    large = fraction_at(1e9)
    below = None
    for kappa, value in fraction.items():
        if value < 1.0:
            below = kappa
            break
    return KvAdvisory(
        branch=branch,
        sym_min_eig=sym,
        kappa_for_pd=kappa_for_pd,
        fraction=fraction,
        fraction_limit_small=small,
        fraction_limit_large=large,
        kappa_below_one=below,
    )
