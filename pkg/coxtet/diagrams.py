"""
Coxeter diagram text input and DOT/text rendering.
"""

import re
from fractions import Fraction
from typing import Dict, List, Tuple

from coxtet.errors import StructuralError
from coxtet.models import PAIRS, RIGHT_ANGLE, AngleFrac, TetShape

_PAIR_ENTRY = re.compile(r"^([0-3])([0-3])\s*[:=]\s*(\d+(?:/\d+)?)$")
_BRANCHED = re.compile(r"^(\d+),(\d+)\^\{1,1\}$")
_PENDANT = re.compile(r"^(\d+),(\d+)\^\{\[3\]\}$")
_CYCLE = re.compile(r"^(\d+)\^\{\[4\]\}$")


class DiagramParser:
    """
    Reads human-readable tetrahedron diagrams.

    Accepted forms:
      - "[p,q,r]": a linear diagram, angles pi/p, pi/q, pi/r along faces 0-1-2-3;
      - "[p,q^{1,1}]": face 1 branches to faces 2 and 3 with pi/q, face 0 hangs off it with pi/p;
      - "[p,q^{[3]}]": faces 1-2-3 form a pi/q triangle, face 0 hangs off face 1 with pi/p;
      - "[q^{[4]}]": the cycle 0-1-2-3-0 of pi/q angles;
      - "01:3, 12:3, 23:6": explicit face pairs, unlisted pairs are right angles.

    A label k always means the angle pi/k, and "a/b" means a*pi/b. Drawn
    diagrams that use an m-fold line for pi/(m+2) must be converted first; that
    convention is never read.
    """

    @staticmethod
    def parse(text: str) -> TetShape:
        """
        Parse diagram text into a shape.

        Args:
            text: Diagram in bracket or pair-list form

        Returns:
            The shape

        Raises:
            StructuralError: on malformed input, repeated pairs or invalid angles
        """
        stripped = text.strip()
        if not stripped:
            raise StructuralError("empty diagram")
        if stripped.startswith("["):
            return DiagramParser._parse_linear(stripped)
        return DiagramParser._parse_pairs(stripped)

    @staticmethod
    def _parse_label(label: str) -> AngleFrac:
        try:
            if "/" in label:
                return AngleFrac.from_fraction(Fraction(label))
            value = int(label)
        except (ValueError, ZeroDivisionError):
            raise StructuralError(f"invalid angle label: {label!r}")
        if value < 2:
            raise StructuralError(f"a Coxeter label must be at least 2, got {value}")
        return AngleFrac.coxeter(value)

    @staticmethod
    def _parse_linear(text: str) -> TetShape:
        if not text.endswith("]"):
            raise StructuralError(f"unterminated linear diagram: {text!r}")
        body = re.sub(r"\s+", "", text[1:-1])
        label = DiagramParser._parse_label
        match = _BRANCHED.match(body)
        if match:
            p, q = label(match.group(1)), label(match.group(2))
            return TetShape.from_labels({(0, 1): p, (1, 2): q, (1, 3): q})
        match = _PENDANT.match(body)
        if match:
            p, q = label(match.group(1)), label(match.group(2))
            return TetShape.from_labels({(0, 1): p, (1, 2): q, (1, 3): q, (2, 3): q})
        match = _CYCLE.match(body)
        if match:
            q = label(match.group(1))
            return TetShape.from_labels({(0, 1): q, (1, 2): q, (2, 3): q, (0, 3): q})
        labels = body.split(",")
        if len(labels) != 3:
            raise StructuralError(f"a linear diagram has three labels, got {len(labels)}")
        angles = [label(part) for part in labels]
        return TetShape.from_labels({(0, 1): angles[0], (1, 2): angles[1], (2, 3): angles[2]})

    @staticmethod
    def _parse_pairs(text: str) -> TetShape:
        entries: Dict[Tuple[int, int], AngleFrac] = {}
        for chunk in re.split(r"[,;\s]+(?=[0-3][0-3]\s*[:=])", text):
            chunk = chunk.strip().rstrip(",;").strip()
            if not chunk:
                continue
            match = _PAIR_ENTRY.match(chunk)
            if match is None:
                raise StructuralError(f"invalid diagram entry: {chunk!r}")
            i, j = int(match.group(1)), int(match.group(2))
            if i == j:
                raise StructuralError(f"face {i} cannot meet itself")
            pair = (min(i, j), max(i, j))
            if pair in entries:
                raise StructuralError(f"pair {i}{j} given twice")
            entries[pair] = DiagramParser._parse_label(match.group(3))
        return TetShape.from_labels(entries)


def parse_diagram(text: str) -> TetShape:
    """Shorthand for DiagramParser.parse."""
    return DiagramParser.parse(text)


class DiagramRenderer:
    """Renders diagrams as DOT graphs and one-line text."""

    @staticmethod
    def edges(shape: TetShape) -> List[Tuple[int, int, AngleFrac]]:
        """Drawn edges: every pair whose angle is not a right angle."""
        return [(i, j, shape.angle(i, j)) for i, j in PAIRS if shape.angle(i, j) != RIGHT_ANGLE]

    @staticmethod
    def to_dot(shape: TetShape, name: str = "T", ideal: Tuple[int, ...] = ()) -> str:
        """
        DOT source for a diagram.

        Nodes are faces; an edge labelled k stands for pi/k (label 3 is left
        unlabelled, as usual). Faces listed in ideal are drawn doubled.
        """
        graph_name = re.sub(r"\W", "_", name)
        lines = [f"graph {graph_name} {{", "  node [shape=circle, label=\"\"];"]
        for face in range(4):
            style = ", peripheries=2" if face in ideal else ""
            lines.append(f"  f{face} [xlabel=\"{face}\"{style}];")
        for i, j, angle in DiagramRenderer.edges(shape):
            label = "" if angle == AngleFrac.coxeter(3) else f" [label=\"{angle.label}\"]"
            lines.append(f"  f{i} -- f{j}{label};")
        lines.append("}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def to_text(shape: TetShape) -> str:
        """Pair-list text with right angles omitted; parse_diagram reads it back unless it is empty."""
        parts = [f"{i}{j}:{angle.label}" for i, j, angle in DiagramRenderer.edges(shape)]
        return ", ".join(parts) if parts else "(empty)"
