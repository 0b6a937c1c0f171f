"""Shared constructions and closed forms used across the test modules."""

import math

import numpy as np

from ctrlscore import build_laplacian_dynamics, generate_random_network, make_system

# Two-node chain: node 1 decays and drives node 2.  Closed forms:
# W1 = [[1/2, 1/4], [1/4, 1/4]], W2 = [[0, 0], [0, 1/2]],
# det W(p) = p1/4 - 3 p1^2/16, VCS = (2/3, 1/3),
# AECS p1 = positive root of 3 p1^2 + 12 p1 - 8 = 0.
CASCADE_A = np.array([[-1.0, 0.0], [1.0, -1.0]])
CASCADE_W1 = np.array([[0.5, 0.25], [0.25, 0.25]])
CASCADE_W2 = np.array([[0.0, 0.0], [0.0, 0.5]])
CASCADE_VCS = np.array([2.0 / 3.0, 1.0 / 3.0])
_AECS_P1 = (-12.0 + math.sqrt(240.0)) / 6.0
CASCADE_AECS = np.array([_AECS_P1, 1.0 - _AECS_P1])
CASCADE_F_OPT = -math.log(1.0 / 12.0)

ROTATION_A = np.array([[0.0, 1.0], [-1.0, 0.0]])


def cascade_system():
    return make_system(CASCADE_A)


def rotation_system():
    return make_system(ROTATION_A)


def rotation_w1(T: float) -> np.ndarray:
    # exp(At) e1 = (cos t, -sin t), so the off-diagonal integral
    # int_0^T -sin t cos t dt = -(1 - cos 2T)/4 is negative.
    s, c = math.sin(2.0 * T), math.cos(2.0 * T)
    return np.array(
        [
            [0.5 * (T + s / 2.0), -0.25 * (1.0 - c)],
            [-0.25 * (1.0 - c), 0.5 * (T - s / 2.0)],
        ]
    )


def rotation_w2(T: float) -> np.ndarray:
    s, c = math.sin(2.0 * T), math.cos(2.0 * T)
    return np.array(
        [
            [0.5 * (T - s / 2.0), 0.25 * (1.0 - c)],
            [0.25 * (1.0 - c), 0.5 * (T + s / 2.0)],
        ]
    )


def path_graph_system(n: int):
    return build_laplacian_dynamics([(i, i + 1, 1.0) for i in range(1, n)], n)


def star_graph_system(n: int):
    return build_laplacian_dynamics([(1, i, 1.0) for i in range(2, n + 1)], n)


def cycle_graph_system(n: int):
    edges = [(i, i + 1, 1.0) for i in range(1, n)] + [(n, 1, 1.0)]
    return build_laplacian_dynamics(edges, n)


def stable_random_system(n: int, seed: int, density: float = 0.5):
    """Dense-ish random network made stable by diagonal dominance."""
    return generate_random_network(n, density, seed, -float(n))


def interior_point(n: int, rng, margin: float = 0.2) -> np.ndarray:
    """A random simplex point bounded away from the boundary."""
    raw = margin + rng.uniform(0.0, 1.0, n)
    return raw / raw.sum()


def random_orthogonal(n: int, rng) -> np.ndarray:
    Q, R = np.linalg.qr(rng.normal(size=(n, n)))
    return Q * np.sign(np.diag(R))
