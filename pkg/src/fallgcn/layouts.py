"""Joint layout definitions: which keypoints exist and how they connect.

A layout is the static anatomy of one skeleton convention (COCO-18 from
2D pose extraction, Kinect-20 from depth sensors). Layouts are loaded
from plain-text ``.layout`` files; the two standard ones ship with the
package under ``fallgcn/layouts/``.
"""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path


class LayoutError(ValueError):
    """Raised for malformed layout definitions or files."""


@dataclass(frozen=True)
class JointLayout:
    """Skeleton anatomy: joint count, bone edges, and the centering root.

    Edges are unordered joint-index pairs stored with the smaller index
    first. The edge set must connect every joint into one component.
    """

    name: str
    joint_count: int
    edges: tuple[tuple[int, int], ...]
    root_joint: int

    def __post_init__(self) -> None:
        if self.joint_count < 1:
            raise LayoutError(f"layout '{self.name}': joint_count must be positive")
        if not 0 <= self.root_joint < self.joint_count:
            raise LayoutError(
                f"layout '{self.name}': root joint {self.root_joint} out of range"
            )
        seen: set[tuple[int, int]] = set()
        canonical = []
        for a, b in self.edges:
            if not (0 <= a < self.joint_count and 0 <= b < self.joint_count):
                raise LayoutError(
                    f"layout '{self.name}': edge ({a}, {b}) exceeds joint count "
                    f"{self.joint_count}"
                )
            if a == b:
                raise LayoutError(f"layout '{self.name}': self-edge at joint {a}")
            key = (min(a, b), max(a, b))
            if key in seen:
                raise LayoutError(f"layout '{self.name}': duplicate edge {key}")
            seen.add(key)
            canonical.append(key)
        object.__setattr__(self, "edges", tuple(canonical))
        if self.joint_count > 1 and not self._connected():
            raise LayoutError(f"layout '{self.name}': graph is not connected")

    def _connected(self) -> bool:
        adj: dict[int, list[int]] = {v: [] for v in range(self.joint_count)}
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        seen = {0}
        stack = [0]
        while stack:
            for n in adj[stack.pop()]:
                if n not in seen:
                    seen.add(n)
                    stack.append(n)
        return len(seen) == self.joint_count

    def degree(self, joint: int) -> int:
        return sum(1 for a, b in self.edges if joint in (a, b))


def parse_layout(text: str, source: str = "<string>") -> JointLayout:
    """Parse the plain-text layout format.

    Directives, one per line: ``name <str>``, ``joints <int>``,
    ``root <int>``, ``edge <int> <int>``. ``#`` starts a comment.
    """
    name = None
    joints = None
    root = None
    edges: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "name" and len(parts) == 2:
                name = parts[1]
            elif parts[0] == "joints" and len(parts) == 2:
                joints = int(parts[1])
            elif parts[0] == "root" and len(parts) == 2:
                root = int(parts[1])
            elif parts[0] == "edge" and len(parts) == 3:
                edges.append((int(parts[1]), int(parts[2])))
            else:
                raise LayoutError(
                    f"{source}:{lineno}: unrecognized layout directive {line!r}"
                )
        except ValueError as exc:
            raise LayoutError(f"{source}:{lineno}: {exc}") from exc
    if name is None or joints is None or root is None:
        raise LayoutError(f"{source}: missing one of name/joints/root directives")
    return JointLayout(name=name, joint_count=joints, edges=tuple(edges), root_joint=root)


def format_layout(layout: JointLayout) -> str:
    lines = [f"name {layout.name}", f"joints {layout.joint_count}", f"root {layout.root_joint}"]
    lines += [f"edge {a} {b}" for a, b in layout.edges]
    return "\n".join(lines) + "\n"


def load_layout(path: str | Path) -> JointLayout:
    path = Path(path)
    return parse_layout(path.read_text(), source=str(path))


def save_layout(layout: JointLayout, path: str | Path) -> None:
    Path(path).write_text(format_layout(layout))


def builtin_layout(name: str) -> JointLayout:
    """Load one of the layouts shipped with the package (coco18, kinect20, stick9)."""
    ref = resources.files("fallgcn") / "layouts" / f"{name}.layout"
    if not ref.is_file():
        available = sorted(
            p.name.removesuffix(".layout")
            for p in (resources.files("fallgcn") / "layouts").iterdir()
            if p.name.endswith(".layout")
        )
        raise LayoutError(f"unknown builtin layout '{name}'; available: {available}")
    return parse_layout(ref.read_text(), source=f"builtin:{name}")


def resolve_layout(name_or_path: str) -> JointLayout:
    """Accept either a builtin layout name or a path to a .layout file."""
    p = Path(name_or_path)
    if p.suffix == ".layout" or p.exists():
        return load_layout(p)
    return builtin_layout(name_or_path)
