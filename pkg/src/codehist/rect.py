"""Seeded rectangle construction shared by occlusion and fragment swapping.

A rectangle request asks for an exact cell area ``A`` inside a ``width x
height`` box with an aspect ratio drawn uniformly from [0.5, 2.0]. Because
an exact area and an arbitrary aspect cannot always coexist, construction
enumerates divisor pairs ``(w, h = A / w)`` that fit the box and picks the
one whose log-aspect is nearest the draw; when no divisor pair of ``A``
fits, it falls back to the largest-area legal rectangle not exceeding ``A``.
"""

from __future__ import annotations

import math

import numpy as np


def _divisor_shapes(area: int, width: int, height: int) -> list[tuple[int, int]]:
    shapes = []
    for w in range(1, min(width, area) + 1):
        if area % w == 0:
            h = area // w
            if h <= height:
                shapes.append((w, h))
    return shapes


def _fallback_shapes(area: int, width: int, height: int) -> list[tuple[int, int]]:
    """All (w, h) maximizing w*h subject to w*h <= area within the box."""
    best = 0
    shapes: list[tuple[int, int]] = []
    for w in range(1, width + 1):
        h = min(height, area // w)
        if h < 1:
            break
        if w * h > best:
            best = w * h
            shapes = [(w, h)]
        elif w * h == best:
            shapes.append((w, h))
    return shapes


def choose_shape(rng: np.random.Generator, width: int, height: int, area: int,
                 need_two_disjoint: bool = False) -> tuple[int, int]:
    """Pick a rectangle shape of (ideally exact) ``area`` for the given box.

    ``need_two_disjoint`` restricts candidates to shapes that admit two
    non-overlapping placements (2w <= width or 2h <= height), decrementing
    the target area until such a shape exists. The aspect draw consumes one
    uniform variate from ``rng`` regardless of which candidate wins, keeping
    the stream layout stable.
    """
    if area < 1:
        raise ValueError("rectangle area must be >= 1")
    if area > width * height:
        raise ValueError(f"area {area} exceeds the {width}x{height} box")
    aspect = rng.uniform(0.5, 2.0)

    def admissible(shapes):
        if not need_two_disjoint:
            return shapes
        return [(w, h) for w, h in shapes if 2 * w <= width or 2 * h <= height]

    target = area
    while target >= 1:
        shapes = admissible(_divisor_shapes(target, width, height))
        if not shapes:
            shapes = admissible(_fallback_shapes(target, width, height))
        if shapes:
            log_aspect = math.log(aspect)
            shapes.sort(key=lambda wh: (abs(math.log(wh[0] / wh[1]) - log_aspect), wh[0]))
            return shapes[0]
        target -= 1
    raise ValueError(f"no rectangle fits a {width}x{height} box")  # box of < 2 cells


def place(rng: np.random.Generator, width: int, height: int, w: int, h: int) -> tuple[int, int]:
    """Uniform top-left corner for a w x h rectangle inside the box."""
    x = int(rng.integers(0, width - w + 1))
    y = int(rng.integers(0, height - h + 1))
    return x, y
