"""Deterministic kernel families indexed by n, plus kernel and vector files.

Each family produces a ChaosVector whose cross-group interaction has a
known exact profile, so asymptotic statements can be tested against closed
forms rather than against other numerics:

- ``disjoint``: every element is a normalized average of q-th tensor powers
  of basis vectors from its own coordinate block; all cross contractions
  and squared covariances are exactly zero at every n.
- ``vanishing_overlap``: same block structure plus a shared coordinate
  carrying weight delta_n = theta * n**-0.25 in every element, so each
  cross contraction norm decays like n**-0.5 and each squared covariance
  like 1/n.
- ``persistent_overlap``: a fixed shared coordinate at constant weight
  theta; nothing decays, and the n-indexed family repeats one vector.
- ``mixed_orders``: the vanishing construction with two groups of strictly
  decreasing orders, exercising unequal-order contractions.

The file formats are plain JSON with 1-based sorted multi-indices and
17-significant-digit floats, so a written kernel reloads bit-exactly.
"""

from __future__ import annotations

import json
import math
import os
import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

from .chaos import STANDARDIZED_TOL, ChaosElement, variance
from .exceptions import DegenerateInputError, InvalidKernelError, ValidationError
from .independence import ChaosVector
from .tensor import HilbertSpace, RawTensor, SymmetricTensor

FAMILIES = ("disjoint", "vanishing_overlap", "persistent_overlap", "mixed_orders")


@dataclass(frozen=True)
class FamilySpec:
    """Recipe for one n-indexed family of chaos vectors.

    orders[j] and sizes[j] give the chaos order and element count of group
    j; theta in [0, 1] sets the shared-coordinate weight (ignored by the
    disjoint family).
    """

    family: str
    orders: tuple[int, ...]
    sizes: tuple[int, ...]
    theta: float = 0.5

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValidationError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        orders = tuple(self.orders)
        sizes = tuple(self.sizes)
        object.__setattr__(self, "orders", orders)
        object.__setattr__(self, "sizes", sizes)
        if len(orders) < 2:
            raise ValidationError("a family needs at least two groups")
        if len(sizes) != len(orders):
            raise ValidationError(f"got {len(orders)} orders but {len(sizes)} sizes")
        if any(not isinstance(q, int) or q < 1 for q in orders):
            raise ValidationError(f"orders must be positive integers, got {orders}")
        if any(q1 < q2 for q1, q2 in zip(orders, orders[1:])):
            raise ValidationError(f"orders must be non-increasing, got {orders}")
        if any(not isinstance(m, int) or m < 1 for m in sizes):
            raise ValidationError(f"group sizes must be positive integers, got {sizes}")
        if not (isinstance(self.theta, (int, float)) and 0.0 <= self.theta <= 1.0):
            raise ValidationError(f"theta must lie in [0, 1], got {self.theta!r}")
        if self.family == "mixed_orders":
            if len(orders) != 2 or orders[0] <= orders[1]:
                raise ValidationError(
                    "mixed_orders takes exactly two groups with strictly decreasing orders"
                )


def _blocked_vector(spec: FamilySpec, n: int, delta: float) -> ChaosVector:
    # d blocks of n coordinates plus one shared coordinate at the end.
    d = len(spec.orders)
    space = HilbertSpace(d * n + 1)
    shared = d * n + 1
    groups = []
    for j, (q, m) in enumerate(zip(spec.orders, spec.sizes)):
        if n < m:
            raise ValidationError(f"group {j + 1} needs n >= {m} coordinates per element, got n={n}")
        width = n // m
        base = j * n
        elements = []
        body = math.sqrt((1.0 - delta * delta) / (width * math.factorial(q)))
        tip = delta / math.sqrt(math.factorial(q))
        for k in range(m):
            start = base + k * width + 1
            entries = {(c,) * q: body for c in range(start, start + width)}
            if tip != 0.0:
                entries[(shared,) * q] = tip
            elements.append(ChaosElement(SymmetricTensor(space, q, entries)))
        groups.append(elements)
    return ChaosVector(groups)


def generate(spec: FamilySpec, n: int) -> ChaosVector:
    """Instantiate the family at index n.

    Block families use d*n + 1 coordinates (n per group plus the shared
    one); each element averages its q-th tensor powers over a slice of
    n // m_j block coordinates, so n must be at least max(sizes).  The
    persistent family's dimension is sum(sizes) + 1 independent of n.
    """
    if not isinstance(n, int) or n < 1:
        raise ValidationError(f"family index n must be a positive integer, got {n!r}")
    if spec.family == "disjoint":
        return _blocked_vector(spec, n, 0.0)
    if spec.family in ("vanishing_overlap", "mixed_orders"):
        return _blocked_vector(spec, n, spec.theta * n**-0.25)
    # persistent_overlap: one coordinate per element plus the shared one.
    total = sum(spec.sizes)
    space = HilbertSpace(total + 1)
    shared = total + 1
    groups = []
    position = 0
    for q, m in zip(spec.orders, spec.sizes):
        body = math.sqrt((1.0 - spec.theta**2) / math.factorial(q))
        tip = spec.theta / math.sqrt(math.factorial(q))
        elements = []
        for _ in range(m):
            position += 1
            entries = {(position,) * q: body}
            if tip != 0.0:
                entries[(shared,) * q] = tip
            if not entries:
                raise DegenerateInputError("persistent element has no mass; theta produced a zero kernel")
            elements.append(ChaosElement(SymmetricTensor(space, q, entries)))
        groups.append(elements)
    return ChaosVector(groups)


def _format_float(value: float) -> str:
    # 17 significant digits round-trip IEEE doubles exactly.
    return format(float(value), ".17g")


def kernel_document(tensor: SymmetricTensor) -> str:
    """Canonical JSON text for one kernel (sorted entries, 17-digit floats)."""
    lines = ["{", f'  "dimension": {tensor.space.dimension},', f'  "order": {tensor.order},']
    entry_lines = []
    for index, value in tensor.items():
        index_text = ", ".join(str(i) for i in index)
        entry_lines.append(f'    {{"index": [{index_text}], "value": {_format_float(value)}}}')
    if entry_lines:
        lines.append('  "entries": [')
        lines.append(",\n".join(entry_lines))
        lines.append("  ]")
    else:
        lines.append('  "entries": []')
    lines.append("}")
    return "\n".join(lines) + "\n"


def save_kernel(tensor: SymmetricTensor, path: str) -> None:
    text = kernel_document(tensor)
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as handle:
        handle.write(text)
    os.replace(tmp, path)


def _parse_kernel(document: Mapping, where: str) -> SymmetricTensor:
    if not isinstance(document, Mapping):
        raise InvalidKernelError(f"{where}: kernel document must be a JSON object")
    for key in ("dimension", "order", "entries"):
        if key not in document:
            raise InvalidKernelError(f"{where}: missing required key {key!r}")
    dimension = document["dimension"]
    order = document["order"]
    if not isinstance(dimension, int) or isinstance(dimension, bool) or dimension < 1:
        raise InvalidKernelError(f"{where}: dimension must be a positive integer, got {dimension!r}")
    if not isinstance(order, int) or isinstance(order, bool) or order < 0:
        raise InvalidKernelError(f"{where}: order must be a non-negative integer, got {order!r}")
    raw_entries = document["entries"]
    if not isinstance(raw_entries, list):
        raise InvalidKernelError(f"{where}: entries must be a list")
    space = HilbertSpace(dimension)
    entries: dict[tuple[int, ...], float] = {}
    for position, entry in enumerate(raw_entries):
        label = f"{where}: entry {position + 1}"
        if not isinstance(entry, Mapping) or set(entry) != {"index", "value"}:
            raise InvalidKernelError(f'{label} must be an object with exactly "index" and "value"')
        index = entry["index"]
        value = entry["value"]
        if not isinstance(index, list) or any(
            not isinstance(i, int) or isinstance(i, bool) for i in index
        ):
            raise InvalidKernelError(f"{label}: index must be a list of integers, got {index!r}")
        if len(index) != order:
            raise InvalidKernelError(f"{label}: index {index} has length {len(index)}, expected {order}")
        if any(i < 1 or i > dimension for i in index):
            raise InvalidKernelError(f"{label}: index {index} leaves the range 1..{dimension}")
        if any(a > b for a, b in zip(index, index[1:])):
            raise InvalidKernelError(f"{label}: index {index} is not sorted ascending")
        if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
            raise InvalidKernelError(f"{label}: value {value!r} is not a finite number")
        key = tuple(index)
        if key in entries:
            raise InvalidKernelError(f"{label}: duplicate index {index}")
        entries[key] = float(value)
    return SymmetricTensor(space, order, entries)


def raw_document(raw: RawTensor) -> str:
    """Canonical JSON text for an unsymmetrized contraction result."""
    lines = [
        "{",
        f'  "dimension": {raw.space.dimension},',
        f'  "left_order": {raw.left_order},',
        f'  "right_order": {raw.right_order},',
    ]
    entry_lines = []
    for (left, right), value in sorted(raw.entries.items()):
        left_text = ", ".join(str(i) for i in left)
        right_text = ", ".join(str(i) for i in right)
        entry_lines.append(
            f'    {{"left": [{left_text}], "right": [{right_text}], "value": {_format_float(value)}}}'
        )
    if entry_lines:
        lines.append('  "entries": [')
        lines.append(",\n".join(entry_lines))
        lines.append("  ]")
    else:
        lines.append('  "entries": []')
    lines.append("}")
    return "\n".join(lines) + "\n"


def save_raw(raw: RawTensor, path: str) -> None:
    text = raw_document(raw)
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as handle:
        handle.write(text)
    os.replace(tmp, path)


def _checked_raw_side(entry_label: str, name: str, side, order: int, dimension: int) -> tuple[int, ...]:
    if not isinstance(side, list) or any(not isinstance(i, int) or isinstance(i, bool) for i in side):
        raise InvalidKernelError(f"{entry_label}: {name} must be a list of integers, got {side!r}")
    if len(side) != order:
        raise InvalidKernelError(f"{entry_label}: {name} {side} has length {len(side)}, expected {order}")
    if any(i < 1 or i > dimension for i in side):
        raise InvalidKernelError(f"{entry_label}: {name} {side} leaves the range 1..{dimension}")
    if any(a > b for a, b in zip(side, side[1:])):
        raise InvalidKernelError(f"{entry_label}: {name} {side} is not sorted ascending")
    return tuple(side)


def _parse_raw(document: Mapping, where: str) -> RawTensor:
    if not isinstance(document, Mapping):
        raise InvalidKernelError(f"{where}: raw document must be a JSON object")
    for key in ("dimension", "left_order", "right_order", "entries"):
        if key not in document:
            raise InvalidKernelError(f"{where}: missing required key {key!r}")
    dimension = document["dimension"]
    left_order = document["left_order"]
    right_order = document["right_order"]
    if not isinstance(dimension, int) or isinstance(dimension, bool) or dimension < 1:
        raise InvalidKernelError(f"{where}: dimension must be a positive integer, got {dimension!r}")
    for name, order in (("left_order", left_order), ("right_order", right_order)):
        if not isinstance(order, int) or isinstance(order, bool) or order < 0:
            raise InvalidKernelError(f"{where}: {name} must be a non-negative integer, got {order!r}")
    raw_entries = document["entries"]
    if not isinstance(raw_entries, list):
        raise InvalidKernelError(f"{where}: entries must be a list")
    entries: dict[tuple[tuple[int, ...], tuple[int, ...]], float] = {}
    for position, entry in enumerate(raw_entries):
        label = f"{where}: entry {position + 1}"
        if not isinstance(entry, Mapping) or set(entry) != {"left", "right", "value"}:
            raise InvalidKernelError(
                f'{label} must be an object with exactly "left", "right" and "value"'
            )
        left = _checked_raw_side(label, "left", entry["left"], left_order, dimension)
        right = _checked_raw_side(label, "right", entry["right"], right_order, dimension)
        value = entry["value"]
        if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
            raise InvalidKernelError(f"{label}: value {value!r} is not a finite number")
        if (left, right) in entries:
            raise InvalidKernelError(f"{label}: duplicate index pair {entry['left']}, {entry['right']}")
        entries[(left, right)] = float(value)
    return RawTensor(HilbertSpace(dimension), left_order, right_order, entries)


def load_raw(source: str | Mapping) -> RawTensor:
    """Read an unsymmetrized contraction from a JSON file path or document."""
    if isinstance(source, Mapping):
        return _parse_raw(source, "raw tensor")
    try:
        with open(source, "r", encoding="utf-8") as handle:
            document = json.load(handle)
    except OSError as error:
        raise InvalidKernelError(f"{source}: {error}") from error
    except json.JSONDecodeError as error:
        raise InvalidKernelError(f"{source}: not valid JSON ({error})") from error
    return _parse_raw(document, str(source))


def load_kernel(source: str | Mapping) -> SymmetricTensor:
    """Read a kernel from a JSON file path or an already-parsed document."""
    if isinstance(source, Mapping):
        return _parse_kernel(source, "kernel")
    try:
        with open(source, "r", encoding="utf-8") as handle:
            document = json.load(handle)
    except OSError as error:
        raise InvalidKernelError(f"{source}: {error}") from error
    except json.JSONDecodeError as error:
        raise InvalidKernelError(f"{source}: not valid JSON ({error})") from error
    return _parse_kernel(document, str(source))


def vector_document(vector: ChaosVector) -> str:
    """Canonical JSON text for a chaos vector manifest with inline kernels."""
    lines = ["{", f'  "dimension": {vector.space.dimension},', '  "groups": [']
    group_blocks = []
    for group in vector.groups:
        element_blocks = []
        for element in group:
            kernel = kernel_document(element.kernel).rstrip("\n")
            indented = "\n".join("      " + line for line in kernel.split("\n"))
            element_blocks.append(indented)
        body = ",\n".join(element_blocks)
        group_blocks.append(
            f'    {{"order": {group[0].order}, "elements": [\n{body}\n    ]}}'
        )
    lines.append(",\n".join(group_blocks))
    lines.append("  ]")
    lines.append("}")
    return "\n".join(lines) + "\n"


def save_vector(vector: ChaosVector, path: str) -> None:
    text = vector_document(vector)
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as handle:
        handle.write(text)
    os.replace(tmp, path)


def load_vector(source: str | Mapping) -> ChaosVector:
    """Read a chaos vector manifest, standardizing each element.

    Elements may be inline kernel documents or paths relative to the
    manifest file.  Any element whose variance is not exactly one is
    rescaled; a warning fires when the rescale factor strays from one by
    more than 1e-6, since that usually means the file was edited by hand.
    """
    base_dir = "."
    where = "vector"
    if isinstance(source, Mapping):
        document = source
    else:
        where = str(source)
        base_dir = os.path.dirname(os.path.abspath(source))
        try:
            with open(source, "r", encoding="utf-8") as handle:
                document = json.load(handle)
        except OSError as error:
            raise InvalidKernelError(f"{source}: {error}") from error
        except json.JSONDecodeError as error:
            raise InvalidKernelError(f"{source}: not valid JSON ({error})") from error
    if not isinstance(document, Mapping):
        raise InvalidKernelError(f"{where}: manifest must be a JSON object")
    if "groups" not in document or not isinstance(document["groups"], list) or not document["groups"]:
        raise InvalidKernelError(f"{where}: manifest needs a non-empty groups list")
    dimension = document.get("dimension")
    if dimension is not None and (
        not isinstance(dimension, int) or isinstance(dimension, bool) or dimension < 1
    ):
        raise InvalidKernelError(f"{where}: dimension must be a positive integer, got {dimension!r}")
    groups = []
    for g, group_doc in enumerate(document["groups"]):
        label = f"{where}: group {g + 1}"
        if not isinstance(group_doc, Mapping) or "order" not in group_doc or "elements" not in group_doc:
            raise InvalidKernelError(f'{label} must be an object with "order" and "elements"')
        order = group_doc["order"]
        if not isinstance(order, int) or isinstance(order, bool) or order < 1:
            raise InvalidKernelError(f"{label}: order must be a positive integer, got {order!r}")
        element_docs = group_doc["elements"]
        if not isinstance(element_docs, list) or not element_docs:
            raise InvalidKernelError(f"{label}: elements must be a non-empty list")
        elements = []
        for e, element_doc in enumerate(element_docs):
            spot = f"{label}, element {e + 1}"
            if isinstance(element_doc, str):
                kernel = load_kernel(os.path.join(base_dir, element_doc))
            elif isinstance(element_doc, Mapping):
                kernel = _parse_kernel(element_doc, spot)
            else:
                raise InvalidKernelError(f"{spot}: element must be a path or an inline kernel")
            if kernel.order != order:
                raise InvalidKernelError(
                    f"{spot}: kernel order {kernel.order} does not match group order {order}"
                )
            if dimension is not None and kernel.space.dimension != dimension:
                raise InvalidKernelError(
                    f"{spot}: kernel dimension {kernel.space.dimension} does not match manifest "
                    f"dimension {dimension}"
                )
            element = ChaosElement(kernel)
            var = variance(element)
            if var <= 0.0:
                raise DegenerateInputError(f"{spot}: kernel has zero norm")
            # only touch kernels that actually miss the standardization
            # tolerance; rescaling by 1/sqrt(1 +- eps) would flip last bits
            # and break bit-exact round trips of already-standard files
            if abs(var - 1.0) > STANDARDIZED_TOL:
                scale = 1.0 / math.sqrt(var)
                if abs(scale - 1.0) > 1e-6:
                    warnings.warn(
                        f"{spot}: rescaled by {scale:.6g} to unit variance", stacklevel=2
                    )
                element = ChaosElement(kernel.scaled(scale))
            elements.append(element)
        groups.append(elements)
    return ChaosVector(groups)
