"""Huffman planning trees over index sets.

Leaves are single indices.  The builder repeatedly joins the two live nodes
with the smallest activity probability ``q``; the ``q`` of a joined node is
always taken from the model for the union, never summed from the children.

Every internal node measures one of its two children.  The measured child is
the one with the smaller expected descent cost ``ell`` (ties go left).

Trees are stored as flat arrays (one slot per node, leaves first) and
:class:`TreeNode` is a cheap view onto one slot, so trees over ``2**15``
leaves can be rebuilt every round.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .model import MarginalModel, ModelError, SupportModel


class TreeError(ValueError):
    pass


def ell_costs(q_left: float, size_left: int, q_right: float, size_right: int) -> tuple[float, float]:
    lg_l = math.log2(size_left) + 1
    lg_r = math.log2(size_right) + 1
    return (
        q_left * lg_l + (1 - q_left) * lg_r,
        q_right * lg_r + (1 - q_right) * lg_l,
    )


@dataclass(frozen=True, eq=False)
class TreeNode:
    tree: "HuffmanTree"
    id: int

    def __eq__(self, other):
        return isinstance(other, TreeNode) and other.tree is self.tree and other.id == self.id

    def __hash__(self):
        return hash((id(self.tree), self.id))

    def __repr__(self):
        return f"TreeNode(id={self.id}, size={self.size}, min_index={self.min_index}, q={self.q:.6g})"

    @property
    def q(self) -> float:
        return float(self.tree.q[self.id])

    @property
    def size(self) -> int:
        return int(self.tree.size[self.id])

    @property
    def min_index(self) -> int:
        return int(self.tree.min_index[self.id])

    @property
    def is_leaf(self) -> bool:
        return self.tree.left[self.id] < 0

    @property
    def left(self) -> "TreeNode | None":
        k = self.tree.left[self.id]
        return None if k < 0 else TreeNode(self.tree, int(k))

    @property
    def right(self) -> "TreeNode | None":
        k = self.tree.right[self.id]
        return None if k < 0 else TreeNode(self.tree, int(k))

    @property
    def members(self) -> np.ndarray:
        t = self.tree
        return t.order[t.start[self.id]:t.start[self.id] + t.size[self.id]]

    @property
    def index_set(self) -> frozenset[int]:
        return frozenset(self.members.tolist())

    @property
    def cost_left(self) -> float:
        self._require_internal()
        return self.tree.costs(self.id)[0]

    @property
    def cost_right(self) -> float:
        self._require_internal()
        return self.tree.costs(self.id)[1]

    @property
    def measure_left(self) -> bool:
        self._require_internal()
        return self.tree.measures_left(self.id)

    @property
    def measured(self) -> "TreeNode":
        """Child whose characteristic vector is this node's sampling vector."""
        return self.left if self.measure_left else self.right

    @property
    def sibling(self) -> "TreeNode":
        return self.right if self.measure_left else self.left

    def _require_internal(self):
        if self.is_leaf:
            raise TreeError(f"leaf {{{self.min_index}}} has no children")


class HuffmanTree:
    """Full binary tree; slots ``0..m-1`` are the leaves, the last slot is the root."""

    def __init__(self, n, order, q, size, min_index, left, right, start, leaf_index=None):
        self.n = n
        self.order = order
        self.q = q
        self.size = size
        self.min_index = min_index
        self.left = left
        self.right = right
        self.start = start
        self._leaf_index = leaf_index
        self._costs: dict[int, tuple[float, float]] = {}
        self._cost_arrays = None

    def costs(self, k: int) -> tuple[float, float]:
        """``(ell_left, ell_right)`` of internal slot ``k``."""
        c = self._costs.get(k)
        if c is None and self._cost_arrays is not None:
            c = (float(self._cost_arrays[0][k]), float(self._cost_arrays[1][k]))
        elif c is None:
            a, b = int(self.left[k]), int(self.right[k])
            c = ell_costs(float(self.q[a]), int(self.size[a]), float(self.q[b]), int(self.size[b]))
            self._costs[k] = c
        return c

    def measures_left(self, k: int) -> bool:
        cl, cr = self.costs(k)
        return cl <= cr

    def _all_costs(self):
        if self._cost_arrays is None:
            cl = np.full(len(self.q), np.nan)
            cr = np.full(len(self.q), np.nan)
            for k in np.flatnonzero(self.left >= 0).tolist():
                cl[k], cr[k] = self.costs(k)
            self._cost_arrays = cl, cr
        return self._cost_arrays

    @property
    def cost_left(self) -> np.ndarray:
        return self._all_costs()[0]

    @property
    def cost_right(self) -> np.ndarray:
        return self._all_costs()[1]

    @property
    def leaf_index(self) -> dict[int, int]:
        """Index -> leaf slot."""
        if self._leaf_index is None:
            m = len(self.order)
            self._leaf_index = {int(i): k for k, i in enumerate(self.min_index[:m].tolist())}
        return self._leaf_index

    @property
    def root(self) -> TreeNode:
        return TreeNode(self, len(self.q) - 1)

    def leaf(self, i: int) -> TreeNode:
        return TreeNode(self, self.leaf_index[int(i)])

    def nodes(self) -> Iterator[TreeNode]:
        """Pre-order walk."""
        stack = [len(self.q) - 1]
        while stack:
            k = stack.pop()
            yield TreeNode(self, k)
            if self.left[k] >= 0:
                stack.append(int(self.right[k]))
                stack.append(int(self.left[k]))

    def internal_nodes(self) -> Iterator[TreeNode]:
        return (node for node in self.nodes() if not node.is_leaf)

    @property
    def index_set(self) -> frozenset[int]:
        return frozenset(self.order.tolist())

    def depth(self, i: int) -> int:
        """Number of internal nodes on the path from the root to leaf ``i``."""
        target = self.leaf_index[int(i)]
        pos = self.start[target]
        k, d = len(self.q) - 1, 0
        while self.left[k] >= 0:
            lk = self.left[k]
            k = lk if self.start[lk] <= pos < self.start[lk] + self.size[lk] else self.right[k]
            d += 1
        return d

    def to_dict(self, node: TreeNode | None = None) -> dict:
        """Nested dump: index set, q, ell pair and the measured child per node."""
        node = self.root if node is None else node
        out = {"indexSet": sorted(node.index_set), "q": node.q}
        if not node.is_leaf:
            out["ell"] = [node.cost_left, node.cost_right]
            out["measured"] = "left" if node.measure_left else "right"
            out["children"] = [self.to_dict(node.left), self.to_dict(node.right)]
        return out


def build_tree(model: SupportModel, indices=None, backend: str = "auto") -> HuffmanTree:
    """Huffman tree over ``indices`` (defaults to the model's live index set).

    Ties in ``q`` are broken by the smallest member index; the joined node's
    left child is the one holding the smaller index.  ``backend="python"``
    forces the reference heap; ``"auto"`` uses the compiled kernel for
    marginal models.
    """
    if backend not in ("auto", "python"):
        raise ValueError(f"unknown backend {backend!r}")
    if indices is None and backend == "auto" and isinstance(model, MarginalModel):
        idx = model.index_array()
        if not idx.size:
            raise TreeError("cannot build a tree over an empty index set")
        return _build_compiled(model, idx)
    indices = sorted(model.indices if indices is None else {int(i) for i in indices})
    if not indices:
        raise TreeError("cannot build a tree over an empty index set")
    bad = set(indices) - model.indices
    if bad:
        raise ModelError(f"indices {sorted(bad)} are outside the model's index set")
    if backend == "auto" and isinstance(model, MarginalModel):
        return _build_compiled(model, np.array(indices, dtype=np.int64))

    m = len(indices)
    total = 2 * m - 1
    q = [0.0] * total
    size = [1] * total
    min_index = indices + [0] * (m - 1)
    left = [-1] * total
    right = [-1] * total

    leaf_state, join, state_q = model._leaf_state, model._join_state, model._state_q
    states = [leaf_state(i) for i in indices]
    heap = []
    for k, i in enumerate(indices):
        q[k] = state_q(states[k])
        heap.append((q[k], i, k, states[k]))
    heapq.heapify(heap)

    pop, push = heapq.heappop, heapq.heappush
    nxt = m
    while nxt < total:
        _, ia, a, sa = pop(heap)
        _, ib, b, sb = pop(heap)
        if ib < ia:
            a, b, ia = b, a, ib
        state = join(sa, sb)
        qk = state_q(state)
        q[nxt], size[nxt], min_index[nxt] = qk, size[a] + size[b], ia
        left[nxt], right[nxt] = a, b
        push(heap, (qk, ia, nxt, state))
        nxt += 1

    # pre-order walk lays the leaves out so every subtree is a contiguous slice
    start = [0] * total
    order = [0] * m
    stack = [(total - 1, 0)]
    while stack:
        k, st = stack.pop()
        start[k] = st
        a = left[k]
        if a < 0:
            order[st] = min_index[k]
        else:
            stack.append((right[k], st + size[a]))
            stack.append((a, st))

    return HuffmanTree(
        n=model.n,
        order=np.array(order, dtype=np.int64),
        q=np.array(q),
        size=np.array(size, dtype=np.int64),
        min_index=np.array(min_index, dtype=np.int64),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        start=np.array(start, dtype=np.int64),
        leaf_index={i: k for k, i in enumerate(indices)},
    )


def _build_compiled(model: MarginalModel, idx: np.ndarray) -> HuffmanTree:
    from ._kernels import build_additive

    q, size, min_index, left, right, start, order, cl, cr = build_additive(idx, model._log_off[idx])
    tree = HuffmanTree(
        n=model.n, order=order, q=q, size=size, min_index=min_index,
        left=left, right=right, start=start,
    )
    tree._cost_arrays = cl, cr
    return tree


def node_costs(node: TreeNode, model: SupportModel | None = None) -> tuple[float, float]:
    """``(ell_left, ell_right)`` of an internal node.

    With a model, the children's ``q`` are recomputed from it rather than read
    from the tree.
    """
    node._require_internal()
    if model is None:
        return node.cost_left, node.cost_right
    return ell_costs(
        model.q_of(node.left.index_set), node.left.size,
        model.q_of(node.right.index_set), node.right.size,
    )


def sampling_vector(node: TreeNode, n: int) -> np.ndarray:
    """0/1 vector of length ``n`` marking the measured child's members."""
    vec = np.zeros(n, dtype=np.int8)
    vec[node.measured.members] = 1
    return vec


def special_nodes(tree: HuffmanTree, model: SupportModel | None = None) -> list[TreeNode]:
    """Internal nodes whose children's ``q`` lie strictly on opposite sides of 1/2."""
    out = []
    for node in tree.internal_nodes():
        if model is None:
            ql, qr = node.left.q, node.right.q
        else:
            ql, qr = model.q_of(node.left.index_set), model.q_of(node.right.index_set)
        if (0.5 - ql) * (0.5 - qr) < 0:
            out.append(node)
    return out
