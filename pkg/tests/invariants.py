"""Randomised geometry invariants shared by the unit and acceptance tests."""

import numpy as np

from serkit.constellation import reduce
from serkit.geometry import angle_box, decompose

BOUNDARY = 1e-8


def _offsets(red, n_points, rng):
    """Random symbols and offsets spread over the scale of the constellation."""
    sym = red.points.T
    scale = max(np.max(np.linalg.norm(sym[:, None] - sym[None], axis=-1)), 1.0)
    idx = rng.integers(red.size, size=n_points)
    x = rng.standard_normal((n_points, red.reduced_dim)) * scale
    return sym, idx, x


def _edge_coords(cone, x):
    return np.linalg.solve(cone.edges, x.T).T


def cone_coverage(c, n_points, rng):
    """Every offset lies in at least one cone of its symbol's fan.

    Points claimed by two or more cones must sit within ``BOUNDARY`` of a
    cone boundary.  Returns the number of violations.
    """
    red = reduce(c)
    dec = decompose(red)
    _, idx, x = _offsets(red, n_points, rng)
    bad = 0
    for i in range(red.size):
        xi = x[idx == i]
        if xi.size == 0:
            continue
        norm = np.linalg.norm(xi, axis=1)
        count = np.zeros(len(xi), dtype=int)
        near = np.zeros(len(xi), dtype=bool)
        for cone in dec.cones[i]:
            lam = _edge_coords(cone, xi)
            inside = np.all(lam >= -BOUNDARY * norm[:, None], axis=1)
            count += inside
            near |= inside & (np.min(np.abs(lam), axis=1) <= BOUNDARY * norm)
        bad += int(np.sum(count == 0) + np.sum((count >= 2) & ~near))
    return bad


def classification_consistency(c, n_points, rng):
    """Region membership, the radial test ``‖x‖ <= r̄`` and the detector agree.

    Points within ``BOUNDARY`` of a decision boundary are skipped.
    Returns the number of disagreements.
    """
    red = reduce(c)
    dec = decompose(red)
    sym, idx, x = _offsets(red, n_points, rng)
    y = sym[idx] + x
    d2 = np.sum((y[:, None, :] - sym[None]) ** 2, axis=-1)
    order = np.sort(d2, axis=1)
    clear = (np.sqrt(order[:, 1]) - np.sqrt(order[:, 0])) > BOUNDARY
    detected = np.argmin(d2, axis=1) == idx
    bad = 0
    for i in range(red.size):
        sel = (idx == i) & clear
        xi = x[sel]
        if xi.size == 0:
            continue
        in_region = dec.regions[i].contains(xi, tol=0.0)
        ok = in_region == detected[sel]
        if red.reduced_dim >= 2:
            norm = np.linalg.norm(xi, axis=1)
            radial = np.zeros(len(xi), dtype=bool)
            seen = np.zeros(len(xi), dtype=bool)
            for cone in dec.cones[i]:
                lam = _edge_coords(cone, xi)
                inside = np.all(lam >= -BOUNDARY * norm[:, None], axis=1) & ~seen
                h = cone.halfspace
                proj = xi[inside] @ h.a
                rb = np.where(proj > 0, h.b * norm[inside] / np.where(proj > 0, proj, 1.0), np.inf)
                radial[inside] = norm[inside] <= rb
                seen |= inside
            ok &= radial == in_region
        bad += int(np.sum(~ok))
    return bad


def solid_angle_closure(c):
    """Largest deviation of a symbol's total planar cone angle from 2π."""
    dec = decompose(reduce(c))
    if dec.dim != 2:
        raise ValueError("closure is defined for reduced dimension 2")
    return max(abs(sum(angle_box(k).max_angles[0] for k in cones) - 2 * np.pi) for cones in dec.cones)
