"""Lozenge tilings of the a x b x c hexagon as interlacing arrays with top row
(b^a 0^c): volume statistic, q^(+-vol) laws, an exhaustive enumeration oracle,
exact push-forwards through the reduced-word swap map, a replica-vectorized
MCMC sampler, and deterministic SVG rendering.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import InterlacingArray, Partition, trunc_geom_array, validate_array
from .markov_maps import SpectralParams, letter_plan, longest_word
from .schur_oracle import DiscreteDistribution, interlacing_below, push_through_letters

__all__ = [
    "HexTiling",
    "hexagon_top_row",
    "packed_hex_array",
    "vol",
    "enumerate_tilings",
    "qvol_distribution",
    "verify_measure_swap",
    "sample_vol_mcmc",
    "plane_partition",
    "render_svg",
]


def hexagon_top_row(a: int, b: int, c: int) -> Partition:
    return Partition((b,) * a)


@dataclass(frozen=True)
class HexTiling:
    """Tiling of the hexagon with sides a, b, c, encoded by its array."""

    a: int
    b: int
    c: int
    array: InterlacingArray

    def __post_init__(self) -> None:
        if min(self.a, self.b, self.c) < 1:
            raise ValueError("hexagon sides must be positive")
        if self.array.depth != self.a + self.c:
            raise ValueError("array depth must equal a + c")
        if self.array.rows[-1] != hexagon_top_row(self.a, self.b, self.c):
            raise ValueError("top row must be b repeated a times")
        ok, msg = validate_array(self.array)
        if not ok:
            raise ValueError(f"invalid array: {msg}")


def packed_hex_array(a: int, b: int, c: int) -> InterlacingArray:
    """The minimal tiling: each row is the top row shifted down as far as
    interlacing allows (row j = b repeated max(0, j - c) times)."""
    n = a + c
    return InterlacingArray(tuple(Partition((b,) * max(0, j - c)) for j in range(1, n + 1)))


def vol(t: HexTiling | InterlacingArray) -> int:
    """Sum of the row sizes below the top row."""
    array = t.array if isinstance(t, HexTiling) else t
    return sum(array.rows[j].size for j in range(array.depth - 1))


def enumerate_tilings(a: int, b: int, c: int, cap: int = 1_000_000) -> list[HexTiling]:
    """All tilings of the a x b x c hexagon by depth-first row filling."""
    n = a + c
    top = hexagon_top_row(a, b, c)
    out: list[HexTiling] = []

    def rec(j: int, above: Partition, rows_above: tuple[Partition, ...]) -> None:
        if j == 0:
            if len(out) >= cap:
                raise ValueError(f"tiling count exceeds cap {cap}")
            out.append(HexTiling(a, b, c, InterlacingArray(rows_above)))
            return
        for kappa in interlacing_below(above, max_len=j):
            rec(j - 1, kappa, (kappa,) + rows_above)

    rec(n - 1, top, (top,))
    return out


def qvol_distribution(tilings: Sequence[HexTiling], q, sign: int = 1) -> DiscreteDistribution:
    """Law proportional to q^(sign * vol) over the given tilings.

    Pass a Fraction q for exact weights; support states are the arrays.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    weights = [q ** (sign * vol(t)) for t in tilings]
    total = sum(weights)
    return DiscreteDistribution(
        tuple(t.array for t in tilings),
        tuple(w / total for w in weights),
    )


def verify_measure_swap(a: int, b: int, c: int, q) -> dict:
    """Exact checks at the hexagon: the full swap map sends q^(-vol) to
    q^(vol), and its square preserves the c-Gibbs law.  Returns a report with
    both total-variation distances and the tiling count.
    """
    if isinstance(q, float):
        q = Fraction(q).limit_denominator(10**6)
    n = a + c
    tilings = enumerate_tilings(a, b, c)
    states = [t.array for t in tilings]
    minus = qvol_distribution(tilings, q, sign=-1)
    plus = qvol_distribution(tilings, q, sign=1)
    params = tuple(q ** i for i in range(n))
    word = longest_word(n)
    plan_fwd, sigma = letter_plan(params, word)
    pushed = push_through_letters(states, minus.weights, plan_fwd)
    tv_swap = float(sum(abs(x - y) for x, y in zip(pushed, plus.weights))) / 2
    plan_back, sigma2 = letter_plan(params, word, sigma)
    back = push_through_letters(states, pushed, plan_back)
    tv_t2 = float(sum(abs(x - y) for x, y in zip(back, minus.weights))) / 2
    assert sigma2 == tuple(range(1, n + 1))
    return {
        "count": len(tilings),
        "tv_swap": tv_swap,
        "tv_t2": tv_t2,
        "sigma_after_t": list(sigma),
    }


def sample_vol_mcmc(
    a: int,
    b: int,
    c: int,
    q: float,
    n_samples: int,
    sweeps: int,
    seed: int,
) -> np.ndarray:
    """Volumes of n_samples independent q^(-vol) MCMC chains after ``sweeps``
    iterations of the squared swap map, replica-vectorized.

    Every chain starts from the packed tiling; one sample is taken per chain,
    so the output is an i.i.d. sample once the burn-in suffices.
    """
    n = a + c
    params = SpectralParams.geometric(n, q)
    word = longest_word(n)
    plan1, sigma = letter_plan(params.c, word)
    plan2, sigma2 = letter_plan(params.c, word, sigma)
    if sigma2 != tuple(range(1, n + 1)):
        raise AssertionError("squared sweep must restore the identity permutation")
    full_plan = list(plan1) + list(plan2)

    start = packed_hex_array(a, b, c)
    rows = [
        np.tile(np.array([start.rows[j - 1].part(k) for k in range(1, j + 1)], dtype=np.int64), (n_samples, 1))
        for j in range(1, n + 1)
    ]
    gen = np.random.Generator(np.random.Philox(key=np.array([seed & (2**64 - 1), 0], dtype=np.uint64)))
    big = b + 1  # acts as +infinity: no entry exceeds b

    def get(lvl: int, k: int) -> np.ndarray:
        if k == 0:
            return np.full(n_samples, big, dtype=np.int64)
        if lvl < 1 or lvl > n or k > lvl:
            return np.zeros(n_samples, dtype=np.int64)
        return rows[lvl - 1][:, k - 1]

    for _ in range(sweeps):
        for row_j, direction, alpha in full_plan:
            alpha = float(alpha)
            for k in range(1, row_j + 1):
                lo = np.maximum(get(row_j - 1, k), get(row_j + 1, k + 1))
                hi = np.minimum(get(row_j - 1, k - 1), get(row_j + 1, k))
                v = rows[row_j - 1][:, k - 1]
                if direction == "L":
                    rows[row_j - 1][:, k - 1] = lo + trunc_geom_array(v - lo, alpha, gen)
                else:
                    rows[row_j - 1][:, k - 1] = hi - trunc_geom_array(hi - v, alpha, gen)
    vols = np.zeros(n_samples, dtype=np.int64)
    for j in range(1, n):
        vols += rows[j - 1].sum(axis=1)
    return vols


def plane_partition(t: HexTiling) -> list[list[int]]:
    """Stacked-box heights over the a x c base: pi[r][s] = lam^(c+r-s)_r.

    Weakly decreasing along rows and columns, entries bounded by b; the box
    volume differs from vol(t) by the constant b*a*(a-1)/2 coming from the
    frozen wall rows.
    """
    return [
        [int(t.array.entry(t.c + r - s, r)) for s in range(1, t.c + 1)]
        for r in range(1, t.a + 1)
    ]


_SQ3 = 3 ** 0.5 / 2.0


def _project(r: float, s: float, h: float, scale: float) -> tuple[float, float]:
    return (s - r) * _SQ3 * scale, ((r + s) / 2.0 - h) * scale


def render_svg(obj, scale: float = 24.0) -> str:
    """Deterministic SVG 1.1 for a tiling (three lozenge classes) or for a
    height profile given as (x, h) pairs (a polyline)."""
    if isinstance(obj, HexTiling):
        return _render_tiling(obj, scale)
    return _render_profile(list(obj), scale)


def _render_tiling(t: HexTiling, scale: float) -> str:
    a, b, c = t.a, t.b, t.c
    pi = plane_partition(t)

    def get(r: int, s: int) -> int:
        if r == 0 or s == 0:
            return b
        if r > a or s > c:
            return 0
        return pi[r - 1][s - 1]

    faces: list[tuple[str, list[tuple[float, float, float]]]] = []
    for r in range(1, a + 1):
        for s in range(1, c + 1):
            h = get(r, s)
            faces.append(("top", [(r - 1, s - 1, h), (r, s - 1, h), (r, s, h), (r - 1, s, h)]))
    for r in range(0, a + 1):
        for s in range(1, c + 1):
            for h in range(get(r + 1, s), get(r, s)):
                faces.append(("side-a", [(r, s - 1, h), (r, s, h), (r, s, h + 1), (r, s - 1, h + 1)]))
    for r in range(1, a + 1):
        for s in range(0, c + 1):
            for h in range(get(r, s + 1), get(r, s)):
                faces.append(("side-b", [(r - 1, s, h), (r, s, h), (r, s, h + 1), (r - 1, s, h + 1)]))
    faces.sort(key=lambda f: (f[0], f[1]))

    pts = [
        _project(r, s, h, scale)
        for _, quad in faces
        for (r, s, h) in quad
    ]
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    dx, dy = -min(xs) + 2, -min(ys) + 2
    width, height = max(xs) - min(xs) + 4, max(ys) - min(ys) + 4
    body = []
    for cls, quad in faces:
        corners = " ".join(
            f"{x + dx:.3f},{y + dy:.3f}" for x, y in (_project(r, s, h, scale) for r, s, h in quad)
        )
        body.append(f'<polygon class="{cls}" points="{corners}"/>')
    style = (
        "polygon{stroke:#333;stroke-width:0.6;stroke-linejoin:round}"
        ".top{fill:#e8d26f}.side-a{fill:#7fb2d9}.side-b{fill:#d98f7f}"
    )
    return (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.0f}" height="{height:.0f}" '
        f'viewBox="0 0 {width:.3f} {height:.3f}">\n'
        f"<style>{style}</style>\n" + "\n".join(body) + "\n</svg>\n"
    )


def _render_profile(points: list[tuple[float, float]], scale: float) -> str:
    if not points:
        raise ValueError("empty profile")
    xs = [p[0] for p in points]
    ys = [-p[1] for p in points]
    dx, dy = -min(xs) + 2, -min(ys) + 2
    width = (max(xs) - min(xs)) + 4
    height = (max(ys) - min(ys)) + 4
    pts = " ".join(f"{x + dx:.3f},{y + dy:.3f}" for x, y in zip(xs, ys))
    return (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.0f}" height="{height:.0f}" '
        f'viewBox="0 0 {width:.3f} {height:.3f}">\n'
        f'<polyline fill="none" stroke="#333" stroke-width="0.05" points="{pts}"/>\n'
        "</svg>\n"
    )
