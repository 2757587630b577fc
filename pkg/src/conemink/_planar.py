"""Exact rational geometry for planar pseudo cones.

Half-planes ``<x, g> <= h`` are given by float normals (converted exactly to
fractions) and fraction offsets.  All normals of a planar pseudo cone have
angles in ``[-beta0, beta0]`` so the boundary is a single convex polyline
running from the lower boundary ray to the upper one.
"""

from __future__ import annotations

import math
from fractions import Fraction

Vec = tuple[Fraction, Fraction]


def frac_vec(g) -> Vec:
    return (Fraction(float(g[0])), Fraction(float(g[1])))


def intersect(g1: Vec, h1: Fraction, g2: Vec, h2: Fraction) -> Vec:
    det = g1[0] * g2[1] - g1[1] * g2[0]
    if det == 0:
        raise ZeroDivisionError("parallel lines")
    x = (h1 * g2[1] - h2 * g1[1]) / det
    y = (g1[0] * h2 - g2[0] * h1) / det
    return (x, y)


def dot(a: Vec, b: Vec) -> Fraction:
    return a[0] * b[0] + a[1] * b[1]


def boundary_chain(lines: list[tuple[float, Vec, Fraction, int]]):
    """Reduce half-planes sorted by angle to the ones carrying an edge.

    ``lines`` holds ``(angle, normal, offset, tag)`` sorted by angle with
    distinct angles.  Returns the surviving lines and the vertices between
    consecutive survivors (``len(vertices) == len(survivors) - 1``).
    """
    stack: list[tuple[float, Vec, Fraction, int]] = []
    verts: list[Vec] = []
    for line in lines:
        _, g, h, _ = line
        while len(stack) >= 2 and dot(verts[-1], g) >= h:
            stack.pop()
            verts.pop()
        if stack:
            _, g0, h0, _ = stack[-1]
            verts.append(intersect(g0, h0, g, h))
        stack.append(line)
    return stack, verts


def edge_length(a: Vec, b: Vec) -> float:
    sq = (a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2
    return math.sqrt(float(sq))
