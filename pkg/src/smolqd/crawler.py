"""Planar mass-spring crawler with a tanh MLP controller.

The robot is a chain of point masses connected by spring-damper links,
laid out along the ground with an arched back.  Each link also carries a
muscle: an actuator that pulls (positive action) or pushes its two endpoint
masses along the link axis with force alpha * gear * action.  Alpha is the
developmental scale — growing or shrinking it changes how strong the same
controller's muscles are.

The ground at y = 0 is a penalty contact: masses below it feel a clipped
spring-damper normal force and a Coulomb-capped viscous friction force.
Integration is semi-implicit Euler (velocity first, then position), which
keeps the stiff contact spring well behaved at the default dt.

Fitness is mean forward velocity of the center of mass; the behaviour
descriptor is the duty factor (fraction of steps in ground contact) of the
first and last mass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from smolqd import kernels
from smolqd.backends import USE_NUMBA
from smolqd.tasks import Task

_UNIT_X = np.array([1.0, 0.0])
_DEGENERATE_LINK = 1e-12

# Initial arch height as a fraction of rest_length (must stay < 1 so the
# link-length geometry below is well defined).  A perfectly flat chain is a
# trap: with every y identical the link forces have no vertical component,
# so the flat configuration is exactly invariant and no controller could
# ever lift a foot — every genome would collapse onto the single descriptor
# (1, 1).  Starting with the back arched gives the controller real link
# angles to push against, which is what makes flight phases (and therefore
# duty-factor diversity) reachable.  The value is mirrored literally in
# kernels._crawler_rollout_loops; keep the two in sync.
ARCH_HEIGHT_FRACTION = 0.5


@dataclass(frozen=True)
class CrawlerParams:
    """Physical constants of the chain, the ground, and the episode."""

    n_masses: int = 4
    mass: float = 1.0  # kg per mass
    rest_length: float = 0.5  # m
    k_s: float = 200.0  # passive spring stiffness, N/m
    c_s: float = 2.0  # passive damping along the link, N*s/m
    gear: float = 30.0  # actuator force scale, N
    gravity: float = 9.81  # m/s^2
    k_g: float = 5000.0  # ground contact stiffness, N/m
    c_g: float = 50.0  # ground contact damping, N*s/m
    mu: float = 0.8  # friction coefficient
    dt: float = 0.01  # s
    episode_steps: int = 500

    def __post_init__(self):
        if self.n_masses < 2:
            raise ValueError(f"n_masses must be >= 2, got {self.n_masses}")
        if self.episode_steps < 1:
            raise ValueError(f"episode_steps must be >= 1, got {self.episode_steps}")
        for name in ("mass", "rest_length", "dt"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ValueError(f"{name} must be finite and positive, got {v}")
        # zero is legal for the remaining constants: it switches the term off,
        # which the diagnostic scenarios (free fall, momentum, energy) rely on
        for name in ("k_s", "c_s", "gear", "gravity", "k_g", "c_g", "mu"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")
        # semi-implicit Euler stability bound for the stiff contact spring
        if not (self.dt * math.sqrt(self.k_g / self.mass) < 2.0):
            raise ValueError(
                "contact spring unstable at this dt: need dt * sqrt(k_g / mass) < 2, "
                f"got {self.dt * math.sqrt(self.k_g / self.mass):.3g}"
            )

    @property
    def n_links(self) -> int:
        return self.n_masses - 1


@dataclass
class SimState:
    """Positions (n, 2), velocities (n, 2), step counter, and contact flags.

    Contact flags mark masses currently below ground (y < 0); they are part
    of the observation and feed the duty-factor descriptor.
    """

    positions: np.ndarray
    velocities: np.ndarray
    step_count: int
    contact: np.ndarray

    @classmethod
    def create(cls, positions: np.ndarray, velocities: np.ndarray, step_count: int = 0):
        positions = np.asarray(positions, dtype=np.float64)
        velocities = np.asarray(velocities, dtype=np.float64)
        if positions.shape != velocities.shape or positions.ndim != 2 or positions.shape[1] != 2:
            raise ValueError("positions and velocities must both be (n, 2) arrays")
        return cls(positions, velocities, step_count, positions[:, 1] < 0.0)


def initial_state(params: CrawlerParams, x_offset: float = 0.0) -> SimState:
    """Arched chain at rest: feet at contact equilibrium depth, back raised.

    The first and last mass (the feet) sit at the depth where the contact
    spring exactly carries one mass's weight; the interior masses are lifted
    on a sine arch of height ``ARCH_HEIGHT_FRACTION * rest_length``, with
    every link at its rest length so the springs start unloaded.  The layout
    is mirror symmetric, so a passive chain sags straight down and its
    center of mass never drifts sideways.

    The chain is centered on x = 0 (plus ``x_offset``).
    """
    n = params.n_masses
    if params.k_g > 0.0:
        rest_y = -(params.mass * params.gravity / params.k_g)
    else:
        rest_y = 0.0
    arch = ARCH_HEIGHT_FRACTION * params.rest_length
    xs = np.empty(n)
    ys = np.empty(n)
    for i in range(n):
        # mirror index keeps the profile exactly palindromic (sin(pi) != 0.0
        # in floats, so evaluating the right half directly would tilt it)
        j = min(i, n - 1 - i)
        ys[i] = rest_y + arch * math.sin(math.pi * j / (n - 1))
    xs[0] = 0.0
    for i in range(1, n):
        dy = ys[i] - ys[i - 1]
        xs[i] = xs[i - 1] + math.sqrt(params.rest_length * params.rest_length - dy * dy)
    total = 0.0
    for i in range(n):
        total += xs[i]
    center = total / n
    positions = np.empty((n, 2))
    for i in range(n):
        positions[i, 0] = xs[i] - center + x_offset
        positions[i, 1] = ys[i]
    return SimState.create(positions, np.zeros((n, 2)))


# ---------------------------------------------------------------------------
# controller
# ---------------------------------------------------------------------------


def mlp_layer_sizes(n_masses: int, hidden_sizes=(16, 16)) -> np.ndarray:
    """[observation dim, hidden..., n_links] as an int64 array."""
    obs_dim = 5 * n_masses  # 2 rel pos + 2 vel + 1 contact flag per mass
    return np.array([obs_dim, *hidden_sizes, n_masses - 1], dtype=np.int64)


def mlp_param_count(layer_sizes) -> int:
    sizes = np.asarray(layer_sizes)
    return int(sum(sizes[l] * sizes[l + 1] + sizes[l + 1] for l in range(len(sizes) - 1)))


def mlp_forward(genome: np.ndarray, observation: np.ndarray, layer_sizes) -> np.ndarray:
    """Feedforward tanh network; weights packed layer by layer (W row-major, then bias).

    tanh on every layer including the output, so actions are bounded in
    (-1, 1) regardless of genome magnitude.
    """
    sizes = np.asarray(layer_sizes, dtype=np.int64)
    g = np.asarray(genome, dtype=np.float64)
    expected = mlp_param_count(sizes)
    if g.ndim != 1 or g.shape[0] != expected:
        raise ValueError(f"expected genome of length {expected}, got shape {g.shape}")
    x = np.asarray(observation, dtype=np.float64)
    if x.shape != (sizes[0],):
        raise ValueError(f"expected observation of length {sizes[0]}, got shape {x.shape}")
    off = 0
    for l in range(1, len(sizes)):
        cur, nxt = int(sizes[l - 1]), int(sizes[l])
        w = g[off : off + cur * nxt].reshape(cur, nxt)
        off += cur * nxt
        b = g[off : off + nxt]
        off += nxt
        x = np.tanh(x @ w + b)
    return x


def build_observation(state: SimState, params: CrawlerParams) -> np.ndarray:
    """COM-relative positions, velocities, contact flags — flattened."""
    com = state.positions.mean(axis=0)
    rel = state.positions - com
    return np.concatenate([rel.ravel(), state.velocities.ravel(), state.contact.astype(np.float64)])


# ---------------------------------------------------------------------------
# physics
# ---------------------------------------------------------------------------


def force_breakdown(
    state: SimState, actions: np.ndarray, alpha: float, params: CrawlerParams
) -> dict[str, np.ndarray]:
    """Per-mass (n, 2) force arrays by source: gravity, spring, actuator, contact.

    Kept separate so tests can probe individual terms (e.g. actuator force
    must scale exactly linearly with alpha).  ``sim_step`` sums them.
    """
    pos, vel = state.positions, state.velocities
    n = params.n_masses
    act = np.asarray(actions, dtype=np.float64)
    if act.shape != (params.n_links,):
        raise ValueError(f"expected {params.n_links} actions, got shape {act.shape}")

    # a diverging sim legitimately passes through inf/nan before the abort
    # check in sim_step fires; don't warn about it
    with np.errstate(over="ignore", invalid="ignore"):
        gravity = np.zeros((n, 2))
        gravity[:, 1] = -params.mass * params.gravity

        d = pos[1:] - pos[:-1]
        length = np.sqrt(np.einsum("ij,ij->i", d, d))
        ok = length > _DEGENERATE_LINK
        safe = np.where(ok, length, 1.0)
        u = np.where(ok[:, None], d / safe[:, None], _UNIT_X)
        rel_v = np.einsum("ij,ij->i", vel[1:] - vel[:-1], u)

        # positive tension pulls the endpoints together (muscle-like)
        spring = np.zeros((n, 2))
        t_passive = params.k_s * (length - params.rest_length) + params.c_s * rel_v
        spring[:-1] += t_passive[:, None] * u
        spring[1:] -= t_passive[:, None] * u

        actuator = np.zeros((n, 2))
        t_active = alpha * params.gear * act
        actuator[:-1] += t_active[:, None] * u
        actuator[1:] -= t_active[:, None] * u

        contact = np.zeros((n, 2))
        below = pos[:, 1] < 0.0
        normal = np.where(
            below, np.maximum(-params.k_g * pos[:, 1] - params.c_g * vel[:, 1], 0.0), 0.0
        )
        lim = params.mu * normal
        tangential = np.clip(np.where(below, -params.c_g * vel[:, 0], 0.0), -lim, lim)
        contact[:, 0] = tangential
        contact[:, 1] = normal

    return {"gravity": gravity, "spring": spring, "actuator": actuator, "contact": contact}


def sim_step(
    state: SimState, actions: np.ndarray, alpha: float, params: CrawlerParams
) -> SimState:
    """One semi-implicit Euler step: v += (F/m)*dt, then p += v*dt.

    Raises RuntimeError if the new state is non-finite (rollout aborts and
    discards the solution).
    """
    if not (math.isfinite(alpha) and alpha >= 0.0):
        raise ValueError(f"alpha must be finite and >= 0, got {alpha}")
    terms = force_breakdown(state, actions, alpha, params)
    with np.errstate(over="ignore", invalid="ignore"):
        total = terms["gravity"] + terms["spring"] + terms["actuator"] + terms["contact"]
        vel = state.velocities + total / params.mass * params.dt
        pos = state.positions + vel * params.dt
    if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(vel))):
        raise RuntimeError(f"non-finite state at step {state.step_count + 1}")
    return SimState.create(pos, vel, state.step_count + 1)


def mechanical_energy(state: SimState, params: CrawlerParams) -> float:
    """Kinetic + gravitational + link-spring + contact-spring energy."""
    kinetic = 0.5 * params.mass * float(np.einsum("ij,ij->", state.velocities, state.velocities))
    grav = params.mass * params.gravity * float(np.sum(state.positions[:, 1]))
    d = state.positions[1:] - state.positions[:-1]
    length = np.sqrt(np.einsum("ij,ij->i", d, d))
    spring = 0.5 * params.k_s * float(np.sum((length - params.rest_length) ** 2))
    y = state.positions[:, 1]
    contact = 0.5 * params.k_g * float(np.sum(np.where(y < 0.0, y, 0.0) ** 2))
    return kinetic + grav + spring + contact


# ---------------------------------------------------------------------------
# rollout
# ---------------------------------------------------------------------------


def _rollout_numpy(
    genome: np.ndarray,
    alpha: float,
    params: CrawlerParams,
    layer_sizes: np.ndarray,
    x_offset: float,
    trajectory_path,
    with_final_state: bool,
):
    # simulate in the canonical centered frame; x_offset only shifts reported
    # coordinates, so fitness and descriptor are bit-identical for any offset
    state = initial_state(params, 0.0)
    frame = float(x_offset)
    com0 = float(state.positions[:, 0].mean())

    n_steps = params.episode_steps
    contact_first = 0
    contact_last = 0
    rows = [] if trajectory_path is not None else None

    for _ in range(n_steps):
        if state.contact[0]:
            contact_first += 1
        if state.contact[-1]:
            contact_last += 1
        if rows is not None:
            cells = [str(state.step_count)]
            for i in range(params.n_masses):
                cells += [
                    repr(float(state.positions[i, 0] + frame)),
                    repr(float(state.positions[i, 1])),
                    str(int(state.contact[i])),
                ]
            rows.append(",".join(cells))
        obs = build_observation(state, params)
        actions = mlp_forward(genome, obs, layer_sizes)
        try:
            state = sim_step(state, actions, alpha, params)
        except RuntimeError:
            result = (-math.inf, np.zeros(2))
            return (*result, state) if with_final_state else result

    if rows is not None:
        header = ["step"]
        for i in range(params.n_masses):
            header += [f"x_{i}", f"y_{i}", f"contact_{i}"]
        Path(trajectory_path).write_text(",".join(header) + "\n" + "\n".join(rows) + "\n")

    com_t = float(state.positions[:, 0].mean())
    fitness = (com_t - com0) / (n_steps * params.dt)
    descriptor = np.array([contact_first / n_steps, contact_last / n_steps])
    if with_final_state:
        reported = state.positions.copy()
        reported[:, 0] += frame
        return fitness, descriptor, SimState.create(reported, state.velocities, state.step_count)
    return fitness, descriptor


def rollout(
    genome: np.ndarray,
    alpha: float,
    params: CrawlerParams = CrawlerParams(),
    hidden_sizes=(16, 16),
    *,
    x_offset: float = 0.0,
    trajectory_path=None,
    with_final_state: bool = False,
):
    """Run one episode; returns (fitness, descriptor).

    Fitness is COM x-velocity averaged over the episode; descriptor is the
    (first mass, last mass) duty factor pair.  A rollout whose state goes
    non-finite reports fitness = -inf so the solution gets discarded.

    ``trajectory_path`` dumps a per-step delimited trace (step, then x, y,
    contact per mass) for debugging; ``with_final_state`` returns the final
    SimState as a third element.  Both force the numpy path.
    """
    if not (math.isfinite(alpha) and alpha > 0.0):
        raise ValueError(f"alpha must be finite and positive, got {alpha}")
    layer_sizes = mlp_layer_sizes(params.n_masses, hidden_sizes)
    g = np.ascontiguousarray(genome, dtype=np.float64)
    expected = mlp_param_count(layer_sizes)
    if g.ndim != 1 or g.shape[0] != expected:
        raise ValueError(f"expected genome of length {expected}, got shape {g.shape}")

    # x_offset never reaches the dynamics (the sim runs in a centered frame),
    # so the kernel path only needs to step aside for the extra outputs
    plain = trajectory_path is None and not with_final_state
    if USE_NUMBA and plain:
        fitness, duty_first, duty_last, ok = kernels.crawler_rollout_numba(
            g,
            layer_sizes,
            float(alpha),
            params.n_masses,
            params.mass,
            params.rest_length,
            params.k_s,
            params.c_s,
            params.gear,
            params.gravity,
            params.k_g,
            params.c_g,
            params.mu,
            params.dt,
            params.episode_steps,
        )
        if not ok:
            return -math.inf, np.zeros(2)
        return float(fitness), np.array([duty_first, duty_last])
    return _rollout_numpy(g, alpha, params, layer_sizes, x_offset, trajectory_path, with_final_state)


class CrawlerTask(Task):
    name = "crawler"
    descriptor_dim = 2

    def __init__(self, params: CrawlerParams = CrawlerParams(), hidden_sizes=(16, 16)):
        self.params = params
        self.hidden_sizes = tuple(int(h) for h in hidden_sizes)
        if any(h < 1 for h in self.hidden_sizes):
            raise ValueError(f"hidden sizes must be >= 1, got {self.hidden_sizes}")
        self.layer_sizes = mlp_layer_sizes(params.n_masses, self.hidden_sizes)
        self.genome_len = mlp_param_count(self.layer_sizes)

    def evaluate_batch(self, genomes: np.ndarray, alpha: float) -> tuple[np.ndarray, np.ndarray]:
        if not (math.isfinite(alpha) and alpha > 0.0):
            raise ValueError(f"alpha must be finite and positive, got {alpha}")
        g = self._check_batch(genomes)
        m = g.shape[0]
        fits = np.empty(m)
        descs = np.empty((m, 2))
        for i in range(m):
            fits[i], descs[i] = rollout(g[i], alpha, self.params, self.hidden_sizes)
        return fits, descs
