"""Imaginary-time Euler-Lagrange boundary-value problems solved by relaxation.

In imaginary time the equation of motion is m x'' = +V'(x): the particle
moves in the inverted potential.  The path is discretized on a uniform time
grid with the fourth-order Numerov stencil

    m (x[i+1] - 2 x[i] + x[i-1]) / dt^2 = (F[i-1] + 10 F[i] + F[i+1]) / 12,

F = V'(x), and the nonlinear system is relaxed by damped Newton iteration
on its tridiagonal Jacobian.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.linalg import solve_banded


class TrajectoryError(RuntimeError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    positions: np.ndarray
    mass: float
    potential_kind: str
    energy_series: np.ndarray
    residual: float
    iterations: int

    @property
    def boundary(self):
        return float(self.positions[0]), float(self.positions[-1])

    @property
    def dt(self):
        return float(self.times[1] - self.times[0])

    @property
    def velocity(self):
        return velocity(self.positions, self.dt)

    def energy_spread(self, trim=2):
        e = self.energy_series[trim:-trim]
        return float(np.std(e))

    def reversed(self):
        return Trajectory(self.times, self.positions[::-1].copy(), self.mass,
                          self.potential_kind, self.energy_series[::-1].copy(),
                          self.residual, self.iterations)


def velocity(x, dt):
    """dx/dt with fourth-order central differences (second order at the ends)."""
    v = np.gradient(x, dt, edge_order=2)
    if len(x) >= 5:
        v[2:-2] = (-x[4:] + 8 * x[3:-1] - 8 * x[1:-3] + x[:-4]) / (12 * dt)
    return v


def _residual(x, m, dt, force):
    f = force(x)
    return m * (x[2:] - 2 * x[1:-1] + x[:-2]) / dt**2 - (f[:-2] + 10 * f[1:-1] + f[2:]) / 12


def _jacobian(fp, k):
    """Sub-, main and super-diagonal of the Numerov residual Jacobian."""
    diag = -2 * k - 10 * fp[1:-1] / 12
    sub = k - fp[1:-2] / 12  # d r[i+1] / d x[i]
    sup = k - fp[2:-1] / 12  # d r[i] / d x[i+1]
    return sub, diag, sup


def _try_step(x, step, mass, dt, force):
    trial = x.copy()
    trial[1:-1] += step
    rt = _residual(trial, mass, dt, force)
    if not np.all(np.isfinite(rt)):
        return trial, None
    return trial, rt


def ramp_guess(times, waypoints, hold=(True, True), ramp=None):
    """Piecewise-linear path that dwells at the waypoints.

    Every interior waypoint gets one plateau; an endpoint flagged in
    ``hold`` gets half a plateau (the path starts or ends in the middle of
    a valley).
    """
    T = times[-1] - times[0]
    wp = np.asarray(waypoints, dtype=float)
    n_ramps = len(wp) - 1
    if n_ramps == 0:
        return np.full_like(times, wp[0])
    n_plateaus = (len(wp) - 2) + 0.5 * (bool(hold[0]) + bool(hold[1]))
    if ramp is None:
        ramp = min(4.0, T / (2 * n_ramps))
    ramp = min(ramp, T / n_ramps)
    if n_plateaus == 0:
        ramp = T / n_ramps
        plateau = 0.0
    else:
        plateau = (T - n_ramps * ramp) / n_plateaus
    knots_t, knots_x = [times[0]], [wp[0]]
    t = times[0]
    if hold[0]:
        t += plateau / 2
        knots_t.append(t)
        knots_x.append(wp[0])
    for k in range(1, len(wp)):
        t += ramp
        knots_t.append(t)
        knots_x.append(wp[k])
        if k < len(wp) - 1:
            t += plateau
            knots_t.append(t)
            knots_x.append(wp[k])
    if hold[1]:
        knots_t.append(times[-1])
        knots_x.append(wp[-1])
    knots_t[-1] = times[-1]
    return np.interp(times, knots_t, knots_x)


def flow_guess(times, waypoints, hold, speed, n_nodes=400):
    """Path through the waypoints moving at the zero-energy speed.

    Between waypoints the path follows |dx/dt| = speed(x); time left over
    is spent dwelling at the held waypoints (interior ones count double),
    and if the flow is too slow overall it is sped up uniformly.
    """
    wp = np.asarray(waypoints, dtype=float)
    tau = times[-1] - times[0]
    if len(wp) == 1:
        return np.full_like(times, wp[0])
    pieces = []
    for a, b in zip(wp[:-1], wp[1:]):
        xs = np.linspace(a, b, n_nodes)
        v = np.maximum(speed(xs), 1e-300)
        inv = 1.0 / v
        dt = 0.5 * (inv[1:] + inv[:-1]) * np.abs(np.diff(xs))
        dt = np.minimum(dt, 1e6)
        pieces.append((xs, np.concatenate([[0.0], np.cumsum(dt)])))
    natural = sum(p[1][-1] for p in pieces)
    dwell_weights = [0.5 * bool(hold[0])] + [1.0] * (len(wp) - 2) + [0.5 * bool(hold[1])]
    spare = tau - natural
    scale = 1.0
    if spare < 0 or sum(dwell_weights) == 0:
        scale = tau / natural
        spare = 0.0
    unit = spare / sum(dwell_weights) if sum(dwell_weights) else 0.0
    kt, kx = [], []
    t = times[0]
    for k, (xs, ts) in enumerate(pieces):
        t += unit * dwell_weights[k]
        kt.append(t + scale * ts)
        kx.append(xs)
        t = kt[-1][-1]
    kt = np.concatenate(kt)
    kx = np.concatenate(kx)
    kt = np.maximum.accumulate(kt)
    return np.interp(times, kt, kx)


def relax_bvp(potential, mass, x_in, x_fi, T, n_steps=2000, guess=None, tol=1e-10,
              max_iter=500, kind="classical", stall_tol=None):
    """Solve m x'' = V'(x) with x(0) = x_in, x(T) = x_fi by Newton relaxation.

    ``potential`` provides ``value``, ``gradient`` and ``curvature``.  The
    residual tolerance is floored at the round-off level of the second
    difference, 64 eps m max|x| / dt^2.  When no step can lower the
    residual any further, or the iteration cap is hit, the solve fails
    unless the residual already sits below ``stall_tol`` times the largest
    force on the path; long dwells next to a hilltop of -V pin the path
    only through exponentially small forces, so some solves saturate
    there.
    """
    if not T > 0:
        raise TrajectoryError("T must be positive")
    if n_steps < 100:
        raise TrajectoryError("need at least 100 time steps")
    times = np.linspace(0.0, T, n_steps + 1)
    dt = T / n_steps
    if guess is None:
        x = ramp_guess(times, [x_in, x_fi])
    else:
        x = np.array(guess, dtype=float)
        if x.shape != times.shape:
            raise TrajectoryError("initial guess does not match the time grid")
    x[0], x[-1] = x_in, x_fi
    stall_tol = tol if stall_tol is None else stall_tol
    force = potential.gradient
    stiff = potential.curvature
    k = mass / dt**2

    def floor_tol(x):
        return max(tol, 64 * np.finfo(float).eps * k * max(1.0, np.max(np.abs(x))))

    r = _residual(x, mass, dt, force)
    norm = np.max(np.abs(r))
    # Levenberg-style shift J - s: the kink position of a long instanton is
    # an almost-free mode, so the bare Newton matrix is close to singular; a
    # small floor on s keeps round-off from sliding the kink along it.
    shift = k
    it = 0
    while norm > floor_tol(x):
        if it >= max_iter:
            if norm <= stall_tol * max(1.0, float(np.max(np.abs(force(x))))):
                break
            raise TrajectoryError(f"relaxation did not converge, residual {norm:.3e}", norm)
        sub, diag, sup = _jacobian(stiff(x), k)
        merit = np.linalg.norm(r)
        while True:
            ab = np.zeros((3, n_steps - 1))
            ab[0, 1:], ab[1], ab[2, :-1] = sup, diag - shift, sub
            step = solve_banded((1, 1), ab, -r)
            for frac in (1.0, 0.5, 0.25, 0.125):
                trial, rt = _try_step(x, frac * step, mass, dt, force)
                if rt is not None and np.linalg.norm(rt) < merit:
                    break
            if rt is not None and np.linalg.norm(rt) < merit:
                shift = max(shift / 4, 1e-9 * k)
                break
            shift = max(4 * shift, 1e-6 * k)
            if shift > 1e12 * k:
                break
        if rt is None or np.linalg.norm(rt) >= merit:
            if norm <= stall_tol * max(1.0, float(np.max(np.abs(force(x))))):
                break
            raise TrajectoryError(f"relaxation stalled, residual {norm:.3e}", norm)
        x, r = trial, rt
        norm = np.max(np.abs(r))
        it += 1
    v = velocity(x, dt)
    energy = -0.5 * mass * v**2 + potential.value(x)
    return Trajectory(times, x, float(mass), kind, energy, float(norm), it)


def path_action(traj, potential, offset=0.0):
    """Euclidean action int (m/2 xdot^2 + V - offset) dt by Simpson's rule."""
    v = traj.velocity
    integrand = 0.5 * traj.mass * v**2 + potential.value(traj.positions) - offset
    return float(simpson(integrand, x=traj.times))


def classical_instanton(lam, mass=1.0, t_c=0.0):
    """x(t) = tanh((t - t_c)/sqrt(4 m)) / sqrt(8 lam) for the symmetric quartic."""
    if not (lam > 0 and mass > 0):
        raise ValueError("lambda and mass must be positive")
    a = 1 / np.sqrt(8 * lam)
    width = np.sqrt(4 * mass)

    def x(t):
        return a * np.tanh((np.asarray(t, dtype=float) - t_c) / width)

    return x


def instanton_center(traj):
    """Time at which the path crosses the midpoint of its two plateaus."""
    x = traj.positions
    mid = 0.5 * (x[0] + x[-1])
    s = np.sign(x - mid)
    idx = np.flatnonzero(s[:-1] * s[1:] <= 0)
    if len(idx) == 0:
        raise TrajectoryError("no transition found in trajectory")
    i = idx[len(idx) // 2]
    if x[i + 1] == x[i]:
        return float(traj.times[i])
    frac = (mid - x[i]) / (x[i + 1] - x[i])
    return float(traj.times[i] + frac * traj.dt)


def instanton_steepness(traj, min_span=1e-6):
    """Largest |dx/dt| along a path that moves between two plateaus."""
    x = traj.positions
    if np.ptp(x) < min_span:
        raise TrajectoryError("flat trajectory has no instanton")
    v = np.gradient(x, traj.dt)
    return float(np.max(np.abs(v)))


def instanton_deviation(traj, lam, mass=1.0):
    """Max |x(t) - x_inst(t)| after aligning the instanton center."""
    tc = instanton_center(traj)
    ref = classical_instanton(lam, mass, tc)(traj.times)
    return float(np.max(np.abs(traj.positions - ref)))


# -- trajectories of the quantum action ----------------------------------------

WELL_OFFSET = 1e-6
LEG_STALL_TOL = 1e-5


@dataclass(frozen=True)
class Leg:
    """One Euler-Lagrange piece of a quantum-action path.

    ``via`` lists valleys the piece passes while dwelling there; ``weight``
    sets its share of the total time.
    """

    start: float
    end: float
    sign: int
    via: tuple = ()
    start_at_well: bool = False
    end_at_well: bool = False

    @property
    def weight(self):
        return 2 + bool(self.start_at_well and self.end_at_well) + len(self.via)


def plan_legs(qpt, x, y):
    """Split the valley decomposition of x -> y into solvable legs.

    Each slide becomes its own leg, cut in the valleys it joins; the rest
    at the anchor is spread over the dwells at the leg ends.  If both
    endpoints climb to the anchor valley, the whole path is one leg that
    turns (or crosses over) there.
    """
    from .action import _is_at_well, anchor_well, decompose_trajectory, uphill_well

    anchor = anchor_well(qpt)
    if uphill_well(qpt, x) == anchor and uphill_well(qpt, y) == anchor:
        ends = [_is_at_well(qpt, p)[0] for p in (x, y)]
        if all(ends):
            return []
        via = () if any(ends) else (anchor,)
        return [Leg(x, y, -1, via, ends[0], ends[1])]
    legs = []
    for s in decompose_trajectory(qpt, x, y, 1.0):
        if s.kind == "slide":
            legs.append(Leg(s.start, s.end, s.sign, (), _is_at_well(qpt, s.start)[0],
                            _is_at_well(qpt, s.end)[0]))
    return legs


def leg_steps(model, mass, span, duration, per_period=0.2, lo=200, hi=40000):
    """Time steps resolving the fastest local frequency of ``model`` on ``span``."""
    xs = np.linspace(span[0], span[1], 400)
    omega = np.sqrt(np.max(np.abs(model.curvature(xs))) / mass)
    n = int(np.clip(np.ceil(duration * omega / per_period), lo, hi))
    # even count: Simpson weights stay mirror-symmetric, so reversed legs agree
    return n + n % 2


def solve_leg(model, mass, leg, duration, n_steps, offset=WELL_OFFSET, kind="quantum-tabulated",
              stall_tol=LEG_STALL_TOL):
    """Relax one leg; endpoints sitting on a valley are moved ``offset`` inward."""
    x0, x1 = leg.start, leg.end
    snap = getattr(model, "refine_well", lambda w: w)
    via = tuple(snap(v) for v in leg.via)
    if leg.start_at_well:
        x0 = snap(x0)
    if leg.end_at_well:
        x1 = snap(x1)
    leg = Leg(x0, x1, leg.sign, via, leg.start_at_well, leg.end_at_well)
    if leg.start_at_well:
        target = leg.via[0] if leg.via else x1
        x0 = x0 + offset * np.sign(target - x0)
    if leg.end_at_well:
        source = leg.via[-1] if leg.via else x0
        x1 = x1 + offset * np.sign(source - x1)
    via = list(leg.via)
    if len(via) == 1 and np.sign(x0 - via[0]) == np.sign(x1 - via[0]):
        # a bounce turns short of the valley instead of dwelling on it
        via[0] += offset * np.sign(x0 - via[0])
    times = np.linspace(0.0, duration, n_steps + 1)
    hold = (leg.start_at_well, leg.end_at_well)

    def speed(x):
        return np.sqrt(2 * np.clip(model.value(x), 0, None) / mass)

    guess = flow_guess(times, [x0, *via, x1], hold, speed)
    return relax_bvp(model, mass, x0, x1, duration, n_steps, guess=guess, kind=kind,
                     stall_tol=stall_tol)


@dataclass(frozen=True, eq=False)
class QuantumPath:
    legs: list
    pieces: list  # Trajectory per leg
    durations: list

    def concatenated(self):
        """Times, positions, signs and energies of the joined path."""
        ts, xs, sg, es = [], [], [], []
        t0 = 0.0
        for k, (leg, tr) in enumerate(zip(self.legs, self.pieces)):
            sl = slice(0 if k == 0 else 1, None)
            ts.append(tr.times[sl] + t0)
            xs.append(tr.positions[sl])
            es.append(tr.energy_series[sl])
            sg.append(np.full(len(tr.times[sl]), leg.sign))
            t0 += tr.times[-1]
        return np.concatenate(ts), np.concatenate(xs), np.concatenate(sg), np.concatenate(es)


def quantum_path(qaction, x, y, T, n_steps=None):
    """Trajectory of the quantum action from ``x`` to ``y`` as joined legs.

    Time is shared among the legs in proportion to their weights: a leg
    gets two units and one more when it runs valley to valley, so every
    valley on the way gets the same dwell.
    """
    if not T > 0:
        raise TrajectoryError("T must be positive")
    qpt = qaction.table
    legs = plan_legs(qpt, x, y)
    model = qaction.model()
    total = sum(leg.weight for leg in legs)
    durations = [T * leg.weight / total for leg in legs]
    pieces = []
    for leg, tau in zip(legs, durations):
        span = (min(leg.start, leg.end, *leg.via), max(leg.start, leg.end, *leg.via))
        n = n_steps or leg_steps(model, qaction.mass, span, tau)
        pieces.append(solve_leg(model, qaction.mass, leg, tau, n))
    return QuantumPath(legs, pieces, durations)
