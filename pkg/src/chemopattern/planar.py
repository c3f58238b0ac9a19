"""Time integration and phase-portrait analysis of the planar amplitude system.

Beyond plain trajectories this module answers the two global questions about
the supercritical regime: where do rays around the origin end up (basins), and
do the eight nontrivial equilibria with their connecting orbits form a closed
ring (the circle attractor).  Heteroclinic connections are found by shooting
from saddle points along their unstable eigendirections, which is robust for a
planar system with hyperbolic saddles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .reduction import (
    EquilibriumPoint,
    ReducedCoefficients,
    equilibria,
    reduced_vector_field,
    vector_field_jacobian,
    _amplitude_scale,
)

#: Fraction of the amplitude scale used as capture radius around equilibria.
CAPTURE_RADIUS_FACTOR = 1e-5

#: Residual speed below which a captured endpoint counts as converged.
RESIDUAL_SPEED_TOL = 1e-8

#: Trajectories beyond this norm are declared divergent.
DEFAULT_BLOWUP = 1e3

#: Shooting offset along unstable eigendirections.
SHOOT_OFFSET = 1e-6


@dataclass
class Trajectory:
    """A computed orbit: strictly increasing times, states (len(times), 2),
    and the equilibrium reached (None when unresolved or divergent)."""

    times: np.ndarray
    states: np.ndarray
    terminal_equilibrium: EquilibriumPoint | None = None
    diverged: bool = False

    def __post_init__(self) -> None:
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")
        if not np.all(np.isfinite(self.states)):
            raise ValueError("trajectory states must be finite")


def _capture_radius(rc: ReducedCoefficients) -> float:
    return CAPTURE_RADIUS_FACTOR * _amplitude_scale(rc)


def _match_equilibrium(y, rc, eq_list, radius) -> EquilibriumPoint | None:
    speed = float(np.linalg.norm(reduced_vector_field(y, rc)))
    if speed > RESIDUAL_SPEED_TOL * max(rc.scale, 1.0):
        return None
    best, dist = None, math.inf
    for e in eq_list:
        d = math.hypot(y[0] - e.y[0], y[1] - e.y[1])
        if d < dist:
            best, dist = e, d
    return best if dist <= radius else None


def integrate(
    rc: ReducedCoefficients,
    y0,
    dt: float,
    t_end: float,
    equilibria_list: list[EquilibriumPoint] | None = None,
    blowup: float = DEFAULT_BLOWUP,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    fixed_step: bool = False,
) -> Trajectory:
    """Integrate the truncated field from ``y0``, sampling every ``dt``.

    The default integrator is an adaptive embedded 4(5) Runge-Kutta pair with
    local tolerance ~1e-10; ``fixed_step`` switches to classical RK4 at step
    ``dt`` for bitwise reproducibility.  Integration stops early on blow-up
    (norm above ``blowup``) or once the state is inside the capture radius of
    a known equilibrium with residual speed below tolerance.
    """
    if dt <= 0 or t_end <= 0:
        raise ValueError("dt and t_end must be positive")
    y0 = np.asarray(y0, dtype=float)
    if equilibria_list is None:
        equilibria_list = equilibria(rc)
    radius = _capture_radius(rc)

    times = [0.0]
    states = [y0.copy()]
    diverged = False
    terminal: EquilibriumPoint | None = None

    def rhs(_t, y):
        return reduced_vector_field(y, rc)

    n_samples = int(round(t_end / dt))
    if fixed_step:
        y = y0.copy()
        t = 0.0
        for _ in range(n_samples):
            k1 = rhs(t, y)
            k2 = rhs(t + dt / 2, y + dt / 2 * k1)
            k3 = rhs(t + dt / 2, y + dt / 2 * k2)
            k4 = rhs(t + dt, y + dt * k3)
            y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t += dt
            times.append(t)
            states.append(y.copy())
            if np.linalg.norm(y) > blowup:
                diverged = True
                break
            terminal = _match_equilibrium(y, rc, equilibria_list, radius)
            if terminal is not None:
                break
        return Trajectory(np.array(times), np.array(states), terminal, diverged)

    # chunked adaptive integration so capture/blow-up checks stay cheap
    chunk = max(dt, min(t_end / 20.0, 50.0))
    t = 0.0
    y = y0.copy()
    while t < t_end - 1e-12:
        t1 = min(t + chunk, t_end)
        t_eval = np.arange(t + dt, t1 + dt / 2, dt)
        if len(t_eval) == 0:
            t_eval = np.array([t1])
        sol = solve_ivp(rhs, (t, t1), y, method="RK45", rtol=rtol, atol=atol,
                        t_eval=t_eval, dense_output=False)
        if not sol.success:
            # step collapse in a polynomial field means finite-time blow-up;
            # anything else is a real failure worth surfacing
            last = sol.y.T[-1] if sol.y.size else y
            if np.linalg.norm(last) > 10.0 * _amplitude_scale(rc):
                for tk, yk in zip(sol.t, sol.y.T):
                    times.append(float(tk))
                    states.append(yk.copy())
                diverged = True
                break
            raise RuntimeError(f"planar integration failed: {sol.message}")
        for tk, yk in zip(sol.t, sol.y.T):
            times.append(float(tk))
            states.append(yk.copy())
            if np.linalg.norm(yk) > blowup:
                diverged = True
                break
            terminal = _match_equilibrium(yk, rc, equilibria_list, radius)
            if terminal is not None:
                break
        if diverged or terminal is not None:
            break
        t = times[-1]
        y = states[-1]
    return Trajectory(np.array(times), np.array(states), terminal, diverged)


def basin_survey(
    rc: ReducedCoefficients,
    radius: float,
    n_rays: int,
    t_end: float = 5000.0,
    dt: float = 1.0,
) -> dict[float, EquilibriumPoint | None]:
    """Launch ``n_rays`` initial points on a circle and record the limit of
    each ray as an equilibrium reference (None when unresolved).

    Rays are equispaced starting at angle 0, so rays along the invariant axes
    are included exactly when n_rays is a multiple of 4.  Results are keyed by
    angle and filled in ray order, so surveys are deterministic.
    """
    eq_list = equilibria(rc)
    out: dict[float, EquilibriumPoint | None] = {}
    for j in range(n_rays):
        theta = 2.0 * math.pi * j / n_rays
        y0 = (radius * math.cos(theta), radius * math.sin(theta))
        traj = integrate(rc, y0, dt, t_end, equilibria_list=eq_list)
        out[theta] = traj.terminal_equilibrium
    return out


@dataclass
class AttractorDescriptor:
    """Equilibria, saddle-to-sink connections found by shooting, and whether
    they close into a single alternating ring."""

    equilibria: list[EquilibriumPoint]
    connections: list[tuple[int, int]]
    is_circle: bool
    notes: list[str] = field(default_factory=list)


def attractor_graph(rc: ReducedCoefficients, t_end: float = 20000.0) -> AttractorDescriptor:
    """Shoot both unstable separatrices of every saddle and build the ring graph.

    ``is_circle`` is set when the eight nontrivial equilibria alternate
    saddle/sink around the origin and every saddle connects to its two
    angular neighbors, which is the finite-graph content of a circle
    attractor.
    """
    eq_list = equilibria(rc)
    nontrivial = [e for e in eq_list if e.pattern_class != "trivial"]
    notes: list[str] = []
    connections: list[tuple[int, int]] = []

    index = {id(e): i for i, e in enumerate(eq_list)}
    for e in eq_list:
        if e.pattern_class == "trivial" or e.stability != "saddle":
            continue
        J = vector_field_jacobian(e.y, rc)
        eigvals, eigvecs = np.linalg.eig(J)
        unstable = [i for i in range(2) if eigvals[i].real > 0]
        if len(unstable) != 1:
            notes.append(f"saddle at {e.y} without a unique unstable direction")
            continue
        v = eigvecs[:, unstable[0]].real
        v = v / np.linalg.norm(v)
        targets = [q for q in eq_list if q is not e]  # a shoot must leave its source
        for sgn in (+1.0, -1.0):
            y0 = np.array(e.y) + sgn * SHOOT_OFFSET * v
            traj = integrate(rc, y0, 1.0, t_end, equilibria_list=targets)
            tgt = traj.terminal_equilibrium
            if tgt is None or tgt.pattern_class == "trivial":
                notes.append(f"unstable manifold of {e.y} (sign {sgn:+.0f}) unresolved")
                continue
            connections.append((index[id(e)], index[id(tgt)]))

    is_circle = _is_alternating_ring(eq_list, nontrivial, connections, notes)
    return AttractorDescriptor(eq_list, connections, is_circle, notes)


def _is_alternating_ring(eq_list, nontrivial, connections, notes) -> bool:
    if len(nontrivial) != 8:
        notes.append(f"expected 8 nontrivial equilibria, found {len(nontrivial)}")
        return False
    saddles = [e for e in nontrivial if e.stability == "saddle"]
    sinks = [e for e in nontrivial if e.stability == "stable-node"]
    if len(saddles) != 4 or len(sinks) != 4:
        notes.append(f"not 4 saddles + 4 sinks ({len(saddles)} saddles, {len(sinks)} sinks)")
        return False
    if len(set(connections)) != 8:
        notes.append(f"expected 8 distinct connections, found {len(set(connections))}")
        return False
    # around the origin the eight points must alternate saddle/sink, and each
    # saddle must connect to exactly its two angular neighbors
    order = sorted(range(len(eq_list)),
                   key=lambda i: math.atan2(eq_list[i].y[1], eq_list[i].y[0])
                   if eq_list[i].pattern_class != "trivial" else math.inf)
    ring = [i for i in order if eq_list[i].pattern_class != "trivial"]
    for pos in range(8):
        a, b = eq_list[ring[pos]], eq_list[ring[(pos + 1) % 8]]
        if a.stability == b.stability:
            notes.append("equilibria do not alternate saddle/sink around the ring")
            return False
    conn = set(connections)
    for pos in range(8):
        i, j = ring[pos], ring[(pos + 1) % 8]
        si, sj = eq_list[i].stability, eq_list[j].stability
        edge = (i, j) if si == "saddle" else (j, i)
        if edge not in conn:
            notes.append(f"missing heteroclinic edge between ring neighbors {edge}")
            return False
    return True
