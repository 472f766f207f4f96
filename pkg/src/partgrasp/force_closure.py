"""Force-closure quality: largest origin-centered ball in the wrench hull.

Contacts are hard-finger with Coulomb friction. Each friction cone is
discretized into edge forces with a unit inward-normal component (so
growing mu strictly grows the wrench set). Torques are taken about the
contact centroid and scaled by the largest contact-to-centroid distance,
making the score invariant to rigid motion and overall scale.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .collision import Contact

# Hull facet offsets below this are treated as "origin on the boundary".
_INTERIOR_TOL = 1e-9


def _tangent_frame(normal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic orthonormal (t1, t2) spanning the plane normal to n."""
    ref = np.zeros(3)
    ref[int(np.argmin(np.abs(normal)))] = 1.0
    t1 = np.cross(normal, ref)
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(normal, t1)
    return t1, t2


def cone_wrenches(contacts: list[Contact], mu: float, edges: int) -> np.ndarray:
    """Discretized friction-cone primitive wrenches, shape (len(contacts)*edges, 6)."""
    if len(contacts) < 2:
        raise ValueError("need at least 2 contacts")
    if mu <= 0:
        raise ValueError("mu must be positive")
    if edges < 3:
        raise ValueError("need at least 3 cone edges")
    pts = np.array([c.point for c in contacts])
    center = pts.mean(axis=0)
    rho = float(np.linalg.norm(pts - center, axis=1).max())
    if rho < 1e-12:
        rho = 1.0  # coincident contacts: torques vanish anyway
    thetas = 2.0 * np.pi * np.arange(edges) / edges
    wrenches = []
    for c in contacts:
        inward = -c.normal
        t1, t2 = _tangent_frame(c.normal)
        arm = (c.point - center) / rho
        for th in thetas:
            f = inward + mu * (np.cos(th) * t1 + np.sin(th) * t2)
            wrenches.append(np.concatenate([f, np.cross(arm, f)]))
    return np.array(wrenches)


def force_closure_epsilon(contacts: list[Contact], mu: float, edges: int) -> float:
    """Ferrari-Canny style epsilon: min facet distance of the wrench hull.

    Zero when the primitive wrenches do not span 6-d or the origin is not
    strictly inside their convex hull.
    """
    wrenches = cone_wrenches(contacts, mu, edges)
    # Canonical row order makes the result independent of contact labeling.
    order = np.lexsort(wrenches.T[::-1])
    wrenches = wrenches[order]

    centered = wrenches - wrenches.mean(axis=0)
    svals = np.linalg.svd(centered, compute_uv=False)
    if svals[-1] < 1e-9 * max(svals[0], 1.0):
        return 0.0
    try:
        hull = ConvexHull(wrenches)
    except QhullError:
        return 0.0
    # Facet equations A x + b <= 0 hold inside; -b is the origin's distance.
    offsets = -hull.equations[:, -1]
    eps = float(offsets.min())
    return eps if eps > _INTERIOR_TOL else 0.0
