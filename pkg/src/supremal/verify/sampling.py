"""Random directions, sub-balls and bump test functions for the randomized checks."""

from typing import List, Tuple

import numpy as np
from scipy import ndimage

from supremal.calculus import BumpSpec
from supremal.grid import GridDomain, SubdomainMask, ball_mask
from supremal.utilities.constants import (
    BUMP_CURVATURE,
    MIN_BUMP_CELLS,
    MIN_SUB_BALL_CELLS,
)
from supremal.utilities.errors import ContainmentError


def random_direction(rng: np.random.Generator, N: int) -> np.ndarray:
    """Uniform on the unit sphere of R^N."""
    while True:
        v = rng.standard_normal(N)
        length = np.linalg.norm(v)
        if length > 1e-8:
            return v / length


def depth_map(mask: SubdomainMask, h: float) -> np.ndarray:
    """Distance from each masked point to the nearest unmasked one."""
    return ndimage.distance_transform_edt(mask.flags, sampling=h)


def random_sub_ball(
    rng: np.random.Generator, domain: GridDomain, mask: SubdomainMask, label: str = "sub-ball"
) -> Tuple[SubdomainMask, np.ndarray, float]:
    """``(ball, center, radius)`` compactly inside ``mask``, using at least half the room.

    Raises ContainmentError when no point of the mask has room for one.
    """
    h = domain.h
    depth = depth_map(mask, h)
    eligible = np.argwhere(depth >= (MIN_SUB_BALL_CELLS + 2) * h)
    if eligible.size == 0:
        raise ContainmentError(f"Mask '{mask.label}' has no room for a sub-ball")
    index = tuple(eligible[rng.integers(len(eligible))])
    room = depth[index] - 2 * h
    radius = float(rng.uniform(0.5, 1.0) * room)
    center = domain.point(index)
    ball = ball_mask(domain, center, radius, parent=mask, depth=mask.depth)
    return ball.model_copy(update={"label": f"{label}:{ball.label}"}), center, radius


def random_sub_mask(
    rng: np.random.Generator,
    domain: GridDomain,
    mask: SubdomainMask,
    whole_probability: float = 0.5,
) -> SubdomainMask:
    if rng.random() < whole_probability:
        return mask
    try:
        return random_sub_ball(rng, domain, mask)[0]
    except ContainmentError:
        return mask


def random_bumps(
    rng: np.random.Generator,
    domain: GridDomain,
    host: SubdomainMask,
    max_bumps: int,
    curvature: float = BUMP_CURVATURE,
) -> List[BumpSpec]:
    """Between 1 and ``max_bumps`` bumps supported strictly inside ``host``.

    Centers sit on grid points. Amplitudes are scaled by r^2 so the Hessian of
    the sum stays below ``curvature``. Empty when ``host`` has no room.
    """
    h = domain.h
    depth = depth_map(host, h)
    eligible = np.argwhere(depth >= 2 * (MIN_BUMP_CELLS + 1) * h)
    if eligible.size == 0:
        return []
    count = int(rng.integers(1, max_bumps + 1))
    bumps = []
    for _ in range(count):
        index = tuple(eligible[rng.integers(len(eligible))])
        room = depth[index] - 2 * h
        radius = float(rng.uniform(max(MIN_BUMP_CELLS * h, 0.4 * room), room))
        # the quintic profile has |D^2 phi| <= 6 a / r^2
        amplitude = float(rng.uniform(0.25, 1.0) * curvature * radius**2 / (6.0 * count))
        bumps.append(
            BumpSpec(
                center=domain.point(index).tolist(),
                radius=radius,
                amplitude=amplitude,
                profile="quintic" if rng.random() < 0.5 else "cosine",
                sign=1 if rng.random() < 0.5 else -1,
            )
        )
    return bumps
