"""
Core data models for the Coxeter decomposition engine.
"""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property
from math import gcd, pi
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

import numpy as np

from coxtet.errors import StructuralError

# Unordered face pairs in storage order; edge {i,j} is the meet of faces i and j.
PAIRS: Tuple[Tuple[int, int], ...] = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
PAIR_INDEX: Dict[Tuple[int, int], int] = {pair: index for index, pair in enumerate(PAIRS)}


def pair_index(i: int, j: int) -> int:
    """Storage slot of the unordered pair {i, j}."""
    if i == j:
        raise StructuralError(f"no edge between face {i} and itself")
    return PAIR_INDEX[(min(i, j), max(i, j))]


class VertexType(Enum):
    """Classification of a tetrahedron vertex by its link."""
    FINITE = "finite"
    IDEAL = "ideal"
    INVALID = "invalid"


class Geometry(Enum):
    """Geometry of a triangle (vertex link, face, or rank-3 subdiagram)."""
    SPHERICAL = "spherical"
    EUCLIDEAN = "euclidean"
    HYPERBOLIC = "hyperbolic"


class SumKind(Enum):
    """Non-proper results of adding two angles."""
    FLAT = "flat"
    REFLEX = "reflex"


class DecompositionType(Enum):
    """Types of Coxeter decompositions."""
    FIRST = "first"
    SECOND = "second"


@dataclass(frozen=True)
class AngleFrac:
    """An angle num*pi/den, stored exactly."""
    num: int
    den: int

    def __post_init__(self):
        if not isinstance(self.num, int) or not isinstance(self.den, int):
            raise StructuralError("angle numerator and denominator must be integers")
        if self.num < 1 or self.den < 1:
            raise StructuralError(f"angle {self.num}/{self.den} must be positive")
        divisor = gcd(self.num, self.den)
        object.__setattr__(self, "num", self.num // divisor)
        object.__setattr__(self, "den", self.den // divisor)
        if self.den < 2 or self.num >= self.den:
            raise StructuralError(f"angle {self.num}pi/{self.den} is not below pi")

    @classmethod
    def coxeter(cls, m: int) -> "AngleFrac":
        """The angle pi/m."""
        return cls(1, m)

    @classmethod
    def from_fraction(cls, value: Fraction) -> "AngleFrac":
        return cls(value.numerator, value.denominator)

    @property
    def fraction(self) -> Fraction:
        """The angle as a fraction of pi."""
        return Fraction(self.num, self.den)

    @property
    def radians(self) -> float:
        """The angle in radians."""
        return pi * self.num / self.den

    @property
    def is_coxeter(self) -> bool:
        """True for pi/k angles."""
        return self.num == 1

    @property
    def label(self) -> str:
        """Diagram label: "m" for pi/m, "k/q" for k*pi/q."""
        return str(self.den) if self.num == 1 else f"{self.num}/{self.den}"

    def __str__(self) -> str:
        return f"pi/{self.den}" if self.num == 1 else f"{self.num}pi/{self.den}"


RIGHT_ANGLE = AngleFrac.coxeter(2)

AngleLike = Union[AngleFrac, int, Fraction]


def as_angle(value: AngleLike) -> AngleFrac:
    """Coerce an integer label m (pi/m) or a Fraction of pi into an AngleFrac."""
    if isinstance(value, AngleFrac):
        return value
    if isinstance(value, Fraction):
        return AngleFrac.from_fraction(value)
    if isinstance(value, int):
        return AngleFrac.coxeter(value)
    raise StructuralError(f"cannot interpret {value!r} as an angle")


@dataclass(frozen=True)
class TetShape:
    """A generalized tetrahedron given by its six dihedral angles."""
    angles: Tuple[AngleFrac, ...]

    def __post_init__(self):
        angles = tuple(self.angles)
        if len(angles) != 6:
            raise StructuralError(f"a tetrahedron needs 6 angles, got {len(angles)}")
        if not all(isinstance(angle, AngleFrac) for angle in angles):
            raise StructuralError("every angle must be an AngleFrac")
        object.__setattr__(self, "angles", angles)

    @classmethod
    def from_mapping(cls, mapping: Mapping[Tuple[int, int], AngleLike],
                     default: Optional[AngleLike] = None) -> "TetShape":
        """
        Build a shape from a {(i, j): angle} mapping.

        Args:
            mapping: Angles keyed by face pairs in either order
            default: Angle for unlisted pairs; None makes a missing pair an error

        Returns:
            The shape

        Raises:
            StructuralError: if a pair is missing and no default is given
        """
        slots: List[Optional[AngleFrac]] = [None] * 6
        for (i, j), value in mapping.items():
            slots[pair_index(i, j)] = as_angle(value)
        for index, slot in enumerate(slots):
            if slot is None:
                if default is None:
                    raise StructuralError(f"missing angle for edge {PAIRS[index]}")
                slots[index] = as_angle(default)
        return cls(tuple(slots))

    @classmethod
    def from_labels(cls, labels: Mapping[Tuple[int, int], AngleLike]) -> "TetShape":
        """Coxeter-diagram style constructor: unlisted pairs are right angles."""
        return cls.from_mapping(labels, default=RIGHT_ANGLE)

    def angle(self, i: int, j: int) -> AngleFrac:
        return self.angles[pair_index(i, j)]

    def relabel(self, perm: Tuple[int, ...]) -> "TetShape":
        """New face i is old face perm[i]."""
        return TetShape(tuple(self.angle(perm[i], perm[j]) for i, j in PAIRS))

    def link_angles(self, v: int) -> Tuple[AngleFrac, AngleFrac, AngleFrac]:
        """Angles at the three edges through the vertex opposite face v."""
        a, b, c = [face for face in range(4) if face != v]
        return (self.angle(a, b), self.angle(a, c), self.angle(b, c))

    @property
    def is_coxeter(self) -> bool:
        """True when every dihedral angle is pi/k."""
        return all(angle.is_coxeter for angle in self.angles)

    @property
    def encoding(self) -> Tuple[Fraction, ...]:
        return tuple(angle.fraction for angle in self.angles)

    @cached_property
    def gram(self) -> np.ndarray:
        from coxtet.geometry import gram_matrix
        return gram_matrix(self)

    @cached_property
    def vertex_class(self) -> Tuple[VertexType, ...]:
        from coxtet.geometry import vertex_type
        return tuple(vertex_type(self, v) for v in range(4))

    def label_text(self) -> str:
        """Compact text form "01:3,02:2,..." readable by parse_diagram."""
        return ",".join(f"{i}{j}:{self.angle(i, j).label}" for i, j in PAIRS)

    def __str__(self) -> str:
        return self.label_text()


@dataclass(frozen=True)
class VolumeValue:
    """A hyperbolic volume with an absolute error bound."""
    value: Any  # mpmath.mpf
    err: float

    def __post_init__(self):
        if self.err < 0:
            raise ValueError("error bound must be non-negative")

    def __float__(self) -> float:
        return float(self.value)


@dataclass(frozen=True)
class CatalogEntry:
    """A hyperbolic Coxeter tetrahedron H_i."""
    id: str
    diagram: TetShape
    compact: bool
    volume: float
    canonical_key: str
    volume_err: float = 0.0

    def __post_init__(self):
        if not self.diagram.is_coxeter:
            raise ValueError(f"{self.id}: catalog diagrams must have all angles pi/m")
        if self.volume <= 0:
            raise ValueError(f"{self.id}: volume must be positive")

    @property
    def ideal_vertices(self) -> List[int]:
        return [v for v, kind in enumerate(self.diagram.vertex_class) if kind == VertexType.IDEAL]


@dataclass(frozen=True)
class TriangleDecomp:
    """A Coxeter decomposition of a triangle by congruent copies of a fundamental triangle."""
    geometry: Geometry
    outer: Tuple[float, float, float]
    fundamental: Tuple[float, float, float]
    tiles: int
    side_patterns: Tuple[int, int, int]
    corner_tiles: Tuple[int, int, int] = (1, 1, 1)
    provenance: Tuple[Any, ...] = ()

    def __post_init__(self):
        if self.tiles < 1:
            raise ValueError("a triangle decomposition has at least one tile")
        if len(self.outer) != 3 or len(self.fundamental) != 3:
            raise ValueError("triangles have three angles")

    @property
    def second_type(self) -> bool:
        """True when every outer corner is covered by a single tile."""
        return all(count == 1 for count in self.corner_tiles)

    @property
    def trivial(self) -> bool:
        return self.tiles == 1

    @property
    def key(self) -> Tuple[Any, ...]:
        """Invariant of the decomposition up to isometry."""
        corners = list(zip((round(angle / pi, 9) for angle in self.outer), self.corner_tiles))
        sides = list(self.side_patterns)
        # side i is opposite corner i; take the smallest of the six dihedral relabelings
        variants = []
        for shift in range(3):
            order = [(shift + k) % 3 for k in range(3)]
            for seq in (order, order[::-1]):
                variants.append((tuple(corners[k] for k in seq), tuple(sides[k] for k in seq)))
        fundamental = tuple(sorted(round(angle / pi, 9) for angle in self.fundamental))
        return (self.geometry.value, fundamental, self.tiles, min(variants))


@dataclass(frozen=True)
class FaceTrace:
    """A face of a decomposed tetrahedron together with the decomposition it carries."""
    face: int
    triangle: Tuple[float, float, float]
    trace: TriangleDecomp

    def __post_init__(self):
        if any(angle < -1e-12 or angle >= pi for angle in self.triangle):
            raise ValueError(f"face {self.face}: angles must lie in [0, pi)")
        if sum(self.triangle) >= pi:
            raise ValueError(f"face {self.face}: a hyperbolic face has angle sum below pi")


@dataclass(frozen=True)
class Provenance:
    """How a decomposition was produced."""
    kind: str  # "seed", "glue" or "tessellation"
    parents: Tuple[str, ...] = ()
    faces: Tuple[int, ...] = ()
    matching: Tuple[int, ...] = ()
    note: str = ""

    def __post_init__(self):
        if self.kind not in ("seed", "glue", "tessellation"):
            raise ValueError(f"unknown provenance kind {self.kind!r}")
        if self.kind == "glue" and (len(self.parents) != 2 or len(self.faces) != 2 or len(self.matching) != 4):
            raise ValueError("a gluing records two parents, two faces and a face matching")


@dataclass(frozen=True)
class DecomposedTet:
    """A tetrahedron decomposed into copies of a catalog tetrahedron."""
    shape: TetShape
    fundamental: str
    tiles: int
    depth: int
    provenance: Provenance
    key: str
    placements: Tuple[np.ndarray, ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        if self.tiles < 1:
            raise ValueError("tiles must be at least 1")
        if self.provenance.kind == "seed" and (self.tiles != 1 or self.depth != 2):
            raise ValueError("seeds have one tile and depth 2")
        if self.placements and len(self.placements) != self.tiles:
            raise ValueError(f"{self.tiles} tiles but {len(self.placements)} placements")

    @property
    def is_seed(self) -> bool:
        return self.provenance.kind == "seed"


@dataclass
class FilterVerdict:
    """Outcome of one named filter on a candidate pair."""
    name: str
    passed: bool
    reason: str
    details: Dict[str, Any] = field(default_factory=dict)


@dataclass
class CandidatePair:
    """A (fundamental, container) pair examined by the second-type pipeline."""
    F: str
    P: str
    ratio: int
    compact: bool
    filters: List[FilterVerdict] = field(default_factory=list)

    def __post_init__(self):
        if self.ratio < 1:
            raise ValueError("the volume ratio of a candidate pair is a positive integer")

    @property
    def survived(self) -> bool:
        return all(verdict.passed for verdict in self.filters)

    @property
    def eliminated_by(self) -> Optional[FilterVerdict]:
        for verdict in self.filters:
            if not verdict.passed:
                return verdict
        return None


@dataclass
class CertificationReport:
    """Result of realize_and_certify."""
    key: str
    tiles: int
    volume_residual: float
    overlaps: int
    mirror_violations: int
    samples: int
    seed: int
    counterexamples: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.overlaps == 0 and self.mirror_violations == 0 and not self.counterexamples
