"""Geometry of the periodic lattice Z_L^d with D fermion modes per site.

Sites are d-tuples of integers in [0, L).  Each site carries 2*D Majorana
flavors, labelled 1..2D.  Linear mode indices are row-major over the site
coordinates with the flavor running fastest, so site (x0, .., x_{d-1}) and
flavor a map to ``site_rank * 2D + (a - 1)``.

Distance is the Chebyshev (max-axis) metric on the torus, so a range-R
neighborhood is a (2R+1)^d cube clipped by wrap-around.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

Coord = tuple[int, ...]


class LatticeError(ValueError):
    """Raised for out-of-range sites, flavors, or malformed specs."""


@dataclass(frozen=True)
class LatticeSpec:
    """Periodic hypercubic lattice with D complex-fermion modes per site.

    Parameters
    ----------
    d : spatial dimension (>= 1)
    L : sites per direction
    D : complex-fermion modes per site (2D Majorana flavors)
    R : interaction range in Chebyshev lattice distance
    """

    d: int
    L: int
    D: int = 1
    R: int = 1

    def __post_init__(self):
        if self.d < 1 or self.L < 1 or self.D < 1 or self.R < 0:
            raise LatticeError(f"invalid lattice spec {self!r}")

    @property
    def n_sites(self) -> int:
        return self.L**self.d

    @property
    def n_modes(self) -> int:
        """Total number of Majorana modes, 2*D*L^d."""
        return 2 * self.D * self.n_sites

    def coerce_site(self, site) -> Coord:
        """Normalize an int (d=1) or a coordinate sequence to a valid tuple."""
        if isinstance(site, int):
            site = (site,)
        site = tuple(int(c) for c in site)
        if len(site) != self.d:
            raise LatticeError(f"site {site} has wrong dimension, expected {self.d}")
        if any(c < 0 or c >= self.L for c in site):
            raise LatticeError(f"site {site} out of range for L={self.L}")
        return site

    def site_rank(self, site) -> int:
        site = self.coerce_site(site)
        rank = 0
        for c in site:
            rank = rank * self.L + c
        return rank

    def site_from_rank(self, rank: int) -> Coord:
        coords = []
        for _ in range(self.d):
            coords.append(rank % self.L)
            rank //= self.L
        return tuple(reversed(coords))

    def mode_index(self, site, flavor: int) -> int:
        """Linear index of Majorana ``flavor`` (1..2D) at ``site``."""
        if not 1 <= flavor <= 2 * self.D:
            raise LatticeError(f"flavor {flavor} out of range 1..{2 * self.D}")
        return self.site_rank(site) * 2 * self.D + (flavor - 1)

    def site_of_mode(self, index: int) -> Coord:
        return self.site_from_rank(index // (2 * self.D))

    def torus_distance(self, x, y) -> int:
        """Chebyshev distance on the torus: max_i min(|xi-yi|, L-|xi-yi|)."""
        x = self.coerce_site(x)
        y = self.coerce_site(y)
        dist = 0
        for a, b in zip(x, y):
            axis = abs(a - b)
            dist = max(dist, min(axis, self.L - axis))
        return dist

    def neighborhood(self, x, R: int | None = None) -> list[Coord]:
        """All sites within torus distance R of x, in lexicographic order."""
        x = self.coerce_site(x)
        R = self.R if R is None else R
        if R < 0:
            raise LatticeError("negative range")
        seen = set()
        for offs in itertools.product(range(-R, R + 1), repeat=self.d):
            seen.add(tuple((c + o) % self.L for c, o in zip(x, offs)))
        return sorted(seen)

    def sites(self) -> list[Coord]:
        """All sites in site_rank order."""
        return [
            tuple(c) for c in itertools.product(range(self.L), repeat=self.d)
        ]

    def translated(self, site, v) -> Coord:
        """Shift a site by vector v modulo the torus."""
        site = self.coerce_site(site)
        if isinstance(v, int):
            v = (v,)
        v = tuple(int(c) for c in v)
        if len(v) != self.d:
            raise LatticeError(f"shift {v} has wrong dimension")
        return tuple((c + w) % self.L for c, w in zip(site, v))
