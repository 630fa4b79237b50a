"""Label generalization hierarchies."""

from __future__ import annotations

from types import MappingProxyType
from typing import Iterable, Mapping, TextIO

from .errors import InvalidGraphError, NetworkFormatError, UnknownLabelError

ROOT = "*"


class LabelHierarchy:
    """A rooted tree over labels; the root ``*`` is the fully suppressed label.

    Generalizing two labels means taking their least common ancestor.
    """

    def __init__(self, parent: Mapping[str, str], root: str = ROOT):
        self.root = root
        par = dict(parent)
        par.pop(root, None)
        nodes = {root} | set(par) | set(par.values())
        for child, p in par.items():
            if p not in nodes:
                raise InvalidGraphError(f"parent {p!r} of {child!r} is undefined")
        # every chain must end at the root without revisiting a node
        for start in par:
            seen = {start}
            cur = start
            while cur != root:
                if cur not in par:
                    raise InvalidGraphError(f"label {cur!r} is not connected to the root")
                cur = par[cur]
                if cur in seen:
                    raise InvalidGraphError(f"cycle through label {cur!r}")
                seen.add(cur)
        self.parent = MappingProxyType(par)
        self.nodes = frozenset(nodes)
        self._depth: dict[str, int] = {}
        self._chains: dict[str, tuple[str, ...]] = {}

    @classmethod
    def flat(cls, labels: Iterable[str], root: str = ROOT) -> "LabelHierarchy":
        """Hierarchy in which every label generalizes straight to the root."""
        return cls({l: root for l in labels if l != root}, root)

    def extended(self, labels: Iterable[str]) -> "LabelHierarchy":
        """Copy with unknown labels hung directly under the root."""
        par = dict(self.parent)
        for l in labels:
            if l not in self.nodes:
                par[l] = self.root
        return LabelHierarchy(par, self.root)

    def __contains__(self, label) -> bool:
        return label in self.nodes

    def ancestors(self, label: str) -> list[str]:
        """Chain from ``label`` (inclusive) up to the root."""
        got = self._chains.get(label)
        if got is None:
            if label not in self.nodes:
                raise UnknownLabelError(label)
            chain = [label]
            while chain[-1] != self.root:
                chain.append(self.parent[chain[-1]])
            got = self._chains[label] = tuple(chain)
        return list(got)

    def depth(self, label: str) -> int:
        d = self._depth.get(label)
        if d is None:
            d = self._depth[label] = len(self.ancestors(label)) - 1
        return d

    def is_ancestor_or_self(self, anc: str, label: str) -> bool:
        self.ancestors(label)
        return anc in self._chains[label]

    def height_between(self, label: str, anc: str) -> int:
        """Number of generalization steps from ``label`` up to ``anc``."""
        chain = self.ancestors(label)
        try:
            return chain.index(anc)
        except ValueError:
            raise InvalidGraphError(f"{anc!r} is not an ancestor of {label!r}") from None

    def lca(self, *labels: str) -> str:
        if not labels:
            raise ValueError("lca of no labels")
        common = None
        for l in labels:
            chain = self.ancestors(l)
            if common is None:
                common = chain
            else:
                keep = set(chain)
                common = [x for x in common if x in keep]
        return common[0]

    def to_text(self) -> str:
        return "".join(f"{c} {p}\n" for c, p in sorted(self.parent.items()))


def generalize_label(h: LabelHierarchy, a: str, b: str) -> str:
    """Least common ancestor of ``a`` and ``b`` in ``h``."""
    return h.lca(a, b)


def parse_hierarchy(text: str | TextIO, source=None) -> LabelHierarchy:
    """Parse ``<child> <parent>`` lines; top-level labels are declared ``<label> *``."""
    if not isinstance(text, str):
        text = text.read()
    parent: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise NetworkFormatError("expected '<child> <parent>'", lineno, source)
        child, par = parts
        if child == ROOT:
            raise NetworkFormatError("the root '*' cannot have a parent", lineno, source)
        if child in parent:
            raise NetworkFormatError(f"label {child!r} has two parents", lineno, source)
        parent[child] = par
    try:
        return LabelHierarchy(parent)
    except InvalidGraphError as exc:
        raise NetworkFormatError(str(exc), None, source) from None


def read_hierarchy(path) -> LabelHierarchy:
    with open(path, encoding="utf-8") as fh:
        return parse_hierarchy(fh, source=str(path))
