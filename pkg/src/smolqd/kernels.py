"""Hot numeric kernels: vectorized numpy references with numba loop twins.

Each kernel is written twice on purpose.  The ``*_numpy`` versions are the
readable reference semantics; the ``*_loops`` versions are numba-friendly
rewrites that get jitted when numba is available.  The module-level names
(``assign_batch``, ``arm_eval_batch``, ``iso_line_batch``, ``crawler_rollout``)
dispatch according to :mod:`smolqd.backends`.

All randomness stays outside these kernels: callers draw every random number
from a single serial generator and pass the draws in, so results do not
depend on how work is batched or parallelized.
"""

from __future__ import annotations

import math

import numpy as np

from smolqd.backends import NUMBA_AVAILABLE, USE_NUMBA

if NUMBA_AVAILABLE:
    from numba import njit


# ---------------------------------------------------------------------------
# nearest-centroid assignment
# ---------------------------------------------------------------------------


def assign_batch_numpy(descriptors: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Index of the nearest centroid (squared Euclidean) for each descriptor row.

    Descriptors are clamped componentwise to [0, 1] first; ties go to the
    lowest centroid index (argmin semantics).
    """
    d = np.clip(descriptors, 0.0, 1.0)
    diff = d[:, None, :] - centroids[None, :, :]
    dist2 = np.einsum("mkd,mkd->mk", diff, diff)
    return np.argmin(dist2, axis=1)


def _assign_batch_loops(descriptors, centroids):
    m = descriptors.shape[0]
    k = centroids.shape[0]
    dim = centroids.shape[1]
    out = np.empty(m, dtype=np.int64)
    buf = np.empty(dim)
    for i in range(m):
        for c in range(dim):
            v = descriptors[i, c]
            if v < 0.0:
                v = 0.0
            elif v > 1.0:
                v = 1.0
            buf[c] = v
        best = np.inf
        best_j = 0
        for j in range(k):
            acc = 0.0
            for c in range(dim):
                t = buf[c] - centroids[j, c]
                acc += t * t
            if acc < best:
                best = acc
                best_j = j
        out[i] = best_j
    return out


# ---------------------------------------------------------------------------
# scaled arm evaluation
# ---------------------------------------------------------------------------


def arm_eval_batch_numpy(
    genomes: np.ndarray, alpha: float, joint_limit: float
) -> tuple[np.ndarray, np.ndarray]:
    """Batch forward kinematics + fitness for the scaled planar arm.

    theta_i = alpha * joint_limit * tanh(g_i); the arm has n equal links of
    length 1/n, angles accumulate along the chain.  Returns (fitness,
    descriptors): fitness is negative population variance of the joint
    angles, descriptor is the end-effector position mapped from [-1, 1]^2
    to [0, 1]^2 and clamped.
    """
    theta = alpha * joint_limit * np.tanh(genomes)
    phi = np.cumsum(theta, axis=1)
    x = np.mean(np.cos(phi), axis=1)
    y = np.mean(np.sin(phi), axis=1)
    desc = np.empty((genomes.shape[0], 2))
    desc[:, 0] = np.clip((x + 1.0) * 0.5, 0.0, 1.0)
    desc[:, 1] = np.clip((y + 1.0) * 0.5, 0.0, 1.0)
    fitness = -np.var(theta, axis=1)
    return fitness, desc


def _arm_eval_loops(genomes, alpha, joint_limit):
    m, n = genomes.shape
    fitness = np.empty(m)
    desc = np.empty((m, 2))
    theta = np.empty(n)
    for i in range(m):
        for j in range(n):
            theta[j] = alpha * joint_limit * math.tanh(genomes[i, j])
        s = 0.0
        for j in range(n):
            s += theta[j]
        mean_t = s / n
        var = 0.0
        for j in range(n):
            dt = theta[j] - mean_t
            var += dt * dt
        var /= n
        phi = 0.0
        sx = 0.0
        sy = 0.0
        for j in range(n):
            phi += theta[j]
            sx += math.cos(phi)
            sy += math.sin(phi)
        dx = (sx / n + 1.0) * 0.5
        dy = (sy / n + 1.0) * 0.5
        if dx < 0.0:
            dx = 0.0
        elif dx > 1.0:
            dx = 1.0
        if dy < 0.0:
            dy = 0.0
        elif dy > 1.0:
            dy = 1.0
        fitness[i] = -var
        desc[i, 0] = dx
        desc[i, 1] = dy
    return fitness, desc


# ---------------------------------------------------------------------------
# iso+line variation
# ---------------------------------------------------------------------------


def iso_line_batch_numpy(
    parents_a: np.ndarray,
    parents_b: np.ndarray,
    sigma_iso: float,
    sigma_line: float,
    eps: np.ndarray,
    lam: np.ndarray,
) -> np.ndarray:
    """child = a + sigma_iso*eps + sigma_line*lam*(b - a), no clamping.

    ``eps`` is (m, n) of unit normals (one per component), ``lam`` is (m,)
    of unit normals (one shared draw per child).
    """
    return parents_a + sigma_iso * eps + (sigma_line * lam)[:, None] * (parents_b - parents_a)


def _iso_line_loops(parents_a, parents_b, sigma_iso, sigma_line, eps, lam):
    m, n = parents_a.shape
    out = np.empty((m, n))
    for i in range(m):
        q = sigma_line * lam[i]
        for j in range(n):
            out[i, j] = parents_a[i, j] + sigma_iso * eps[i, j] + q * (
                parents_b[i, j] - parents_a[i, j]
            )
    return out


# ---------------------------------------------------------------------------
# crawler rollout (numba twin only; the numpy reference lives in crawler.py
# as an explicit sim_step loop so it can expose states and trajectories)
# ---------------------------------------------------------------------------


def _crawler_rollout_loops(
    genome,
    layer_sizes,
    alpha,
    n_masses,
    mass,
    rest_length,
    spring_k,
    spring_c,
    gear,
    gravity,
    contact_k,
    contact_c,
    friction_mu,
    dt,
    n_steps,
):
    """Full crawler episode; returns (fitness, duty_first, duty_last, ok).

    ``ok`` is False when the state went non-finite and the rollout was
    aborted; the caller then reports a non-finite fitness.
    """
    n = n_masses
    n_links = n - 1

    px = np.empty(n)
    py = np.empty(n)
    vx = np.zeros(n)
    vy = np.zeros(n)
    if contact_k > 0.0:
        rest_y = -(mass * gravity / contact_k)
    else:
        rest_y = 0.0
    # arched start, bit-identical to crawler.initial_state: feet at the
    # contact equilibrium depth, interior masses raised on a sine arch,
    # every link at rest length
    arch = 0.5 * rest_length
    for i in range(n):
        j = min(i, n - 1 - i)  # palindromic profile, exactly mirror symmetric
        py[i] = rest_y + arch * math.sin(math.pi * j / (n - 1))
    px[0] = 0.0
    for i in range(1, n):
        dy = py[i] - py[i - 1]
        px[i] = px[i - 1] + math.sqrt(rest_length * rest_length - dy * dy)
    total = 0.0
    for i in range(n):
        total += px[i]
    center = total / n
    for i in range(n):
        px[i] -= center

    com0 = 0.0
    for i in range(n):
        com0 += px[i]
    com0 /= n

    obs_dim = 5 * n
    n_layers = layer_sizes.shape[0]
    width = obs_dim
    for l in range(n_layers):
        if layer_sizes[l] > width:
            width = layer_sizes[l]
    act_in = np.empty(width)
    act_out = np.empty(width)
    actions = np.empty(n_links)
    fx = np.empty(n)
    fy = np.empty(n)

    contact_first = 0
    contact_last = 0

    for _step in range(n_steps):
        if py[0] < 0.0:
            contact_first += 1
        if py[n - 1] < 0.0:
            contact_last += 1

        comx = 0.0
        comy = 0.0
        for i in range(n):
            comx += px[i]
            comy += py[i]
        comx /= n
        comy /= n

        # observation: COM-relative positions, velocities, contact flags
        for i in range(n):
            act_in[2 * i] = px[i] - comx
            act_in[2 * i + 1] = py[i] - comy
        base = 2 * n
        for i in range(n):
            act_in[base + 2 * i] = vx[i]
            act_in[base + 2 * i + 1] = vy[i]
        base = 4 * n
        for i in range(n):
            act_in[base + i] = 1.0 if py[i] < 0.0 else 0.0

        # MLP forward: tanh at every layer; weights row-major (in, out)
        off = 0
        cur = layer_sizes[0]
        for l in range(1, n_layers):
            nxt = layer_sizes[l]
            for j in range(nxt):
                s = 0.0
                for i2 in range(cur):
                    s += act_in[i2] * genome[off + i2 * nxt + j]
                s += genome[off + cur * nxt + j]
                act_out[j] = math.tanh(s)
            off += cur * nxt + nxt
            for j in range(nxt):
                act_in[j] = act_out[j]
            cur = nxt
        for j in range(n_links):
            actions[j] = act_in[j]

        # forces: gravity, passive spring-damper + actuator along links, contact
        for i in range(n):
            fx[i] = 0.0
            fy[i] = -mass * gravity
        for j in range(n_links):
            dx = px[j + 1] - px[j]
            dy = py[j + 1] - py[j]
            length = math.sqrt(dx * dx + dy * dy)
            if length > 1e-12:
                ux = dx / length
                uy = dy / length
            else:
                ux = 1.0
                uy = 0.0
            relv = (vx[j + 1] - vx[j]) * ux + (vy[j + 1] - vy[j]) * uy
            tension = spring_k * (length - rest_length) + spring_c * relv
            tension += alpha * gear * actions[j]
            fx[j] += tension * ux
            fy[j] += tension * uy
            fx[j + 1] -= tension * ux
            fy[j + 1] -= tension * uy
        for i in range(n):
            if py[i] < 0.0:
                normal = -contact_k * py[i] - contact_c * vy[i]
                if normal < 0.0:
                    normal = 0.0
                fy[i] += normal
                lim = friction_mu * normal
                ft = -contact_c * vx[i]
                if ft > lim:
                    ft = lim
                elif ft < -lim:
                    ft = -lim
                fx[i] += ft

        # semi-implicit Euler: velocities first, then positions
        for i in range(n):
            vx[i] += fx[i] / mass * dt
            vy[i] += fy[i] / mass * dt
            px[i] += vx[i] * dt
            py[i] += vy[i] * dt

        for i in range(n):
            if not (
                math.isfinite(px[i])
                and math.isfinite(py[i])
                and math.isfinite(vx[i])
                and math.isfinite(vy[i])
            ):
                return -math.inf, 0.0, 0.0, False

    comx = 0.0
    for i in range(n):
        comx += px[i]
    comx /= n
    fitness = (comx - com0) / (n_steps * dt)
    duty_first = contact_first / n_steps
    duty_last = contact_last / n_steps
    return fitness, duty_first, duty_last, True


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

if NUMBA_AVAILABLE:
    assign_batch_numba = njit(cache=True)(_assign_batch_loops)
    arm_eval_batch_numba = njit(cache=True)(_arm_eval_loops)
    iso_line_batch_numba = njit(cache=True)(_iso_line_loops)
    crawler_rollout_numba = njit(cache=True)(_crawler_rollout_loops)
else:  # pragma: no cover - depends on the environment
    assign_batch_numba = None
    arm_eval_batch_numba = None
    iso_line_batch_numba = None
    crawler_rollout_numba = None

if USE_NUMBA:
    assign_batch = assign_batch_numba
    arm_eval_batch = arm_eval_batch_numba
    iso_line_batch = iso_line_batch_numba
else:
    assign_batch = assign_batch_numpy
    arm_eval_batch = arm_eval_batch_numpy
    iso_line_batch = iso_line_batch_numpy
