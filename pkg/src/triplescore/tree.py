"""CART regression tree with complexity-gated greedy splitting.

Growth follows the classic anova recipe: at each node, the (feature,
threshold) pair minimizing the children's summed squared error is chosen
among midpoints between consecutive distinct feature values. A split is
kept only when its error reduction exceeds cp times the root node's
squared error, each child holds at least ``min_bucket`` rows, the node
holds at least ``min_split`` rows, and the node sits above ``max_depth``.
Ties go to the lowest feature index, then the lowest threshold.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataFormatError, InvariantError, TrainingError


@dataclass(frozen=True)
class TreeParams:
    cp: float = 0.01
    min_split: int = 20
    min_bucket: int = 7
    max_depth: int = 30


@dataclass
class TreeNode:
    """Internal node (feature/threshold/children set) or leaf (value/count)."""

    value: float
    count: int
    feature: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


@dataclass(frozen=True)
class SplitCandidate:
    feature: int
    threshold: float
    reduction: float


def _node_sse(y: np.ndarray) -> float:
    if y.size == 0:
        return 0.0
    mean = y.mean()
    return float(((y - mean) ** 2).sum())


def best_split(X: np.ndarray, y: np.ndarray, min_bucket: int) -> SplitCandidate | None:
    """Exhaustive best (feature, midpoint-threshold) split of one node.

    Returns None when no candidate satisfies the bucket-size floor.
    """
    n, d = X.shape
    sse_parent = _node_sse(y)
    best: SplitCandidate | None = None
    for j in range(d):
        order = np.argsort(X[:, j], kind="stable")
        xs = X[order, j]
        ys = y[order]
        cum1 = np.cumsum(ys)
        cum2 = np.cumsum(ys * ys)
        total1 = cum1[-1]
        total2 = cum2[-1]
        for i in range(1, n):
            if xs[i - 1] == xs[i]:
                continue
            n_left = i
            n_right = n - i
            if n_left < min_bucket or n_right < min_bucket:
                continue
            sse_left = cum2[i - 1] - cum1[i - 1] ** 2 / n_left
            right1 = total1 - cum1[i - 1]
            sse_right = (total2 - cum2[i - 1]) - right1 ** 2 / n_right
            reduction = sse_parent - (sse_left + sse_right)
            if best is None or reduction > best.reduction:
                threshold = (xs[i - 1] + xs[i]) / 2.0
                best = SplitCandidate(j, float(threshold), float(reduction))
    return best


class RegressionTree:
    def __init__(self, root: TreeNode, params: TreeParams, feature_names: tuple[str, ...]):
        self.root = root
        self.params = params
        self.feature_names = feature_names

    def predict(self, features) -> float:
        """Route a feature vector to its leaf mean (value < threshold goes left)."""
        x = np.asarray(features, dtype=float)
        if np.isnan(x).any():
            raise InvariantError("NaN feature value reached tree prediction")
        node = self.root
        while not node.is_leaf:
            node = node.left if x[node.feature] < node.threshold else node.right
        return node.value

    def leaf_count(self) -> int:
        def walk(node: TreeNode) -> int:
            if node.is_leaf:
                return 1
            return walk(node.left) + walk(node.right)

        return walk(self.root)

    def depth(self) -> int:
        def walk(node: TreeNode) -> int:
            if node.is_leaf:
                return 0
            return 1 + max(walk(node.left), walk(node.right))

        return walk(self.root)


def fit_regression_tree(
    X: np.ndarray,
    y: np.ndarray,
    params: TreeParams = TreeParams(),
    feature_names: tuple[str, ...] | None = None,
) -> RegressionTree:
    """Grow a regression tree on rows of X with targets y."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError("X must be 2-D with one row per target")
    if X.shape[0] == 0:
        raise TrainingError("cannot fit a tree on zero rows")
    if np.isnan(X).any() or np.isnan(y).any():
        raise InvariantError("NaN in tree training data")
    names = feature_names or tuple(f"f{j}" for j in range(X.shape[1]))
    if len(names) != X.shape[1]:
        raise ValueError("feature_names length must match feature count")

    sse_root = _node_sse(y)
    gate = params.cp * sse_root

    def grow(rows: np.ndarray, depth: int) -> TreeNode:
        ys = y[rows]
        node = TreeNode(value=float(ys.mean()), count=int(rows.size))
        if rows.size < params.min_split or depth >= params.max_depth:
            return node
        candidate = best_split(X[rows], ys, params.min_bucket)
        if candidate is None or candidate.reduction <= gate:
            return node
        mask = X[rows, candidate.feature] < candidate.threshold
        node.feature = candidate.feature
        node.threshold = candidate.threshold
        node.left = grow(rows[mask], depth + 1)
        node.right = grow(rows[~mask], depth + 1)
        return node

    root = grow(np.arange(X.shape[0]), 0)
    return RegressionTree(root, params, tuple(names))


# Text serialization: header lines, then the nodes in preorder, each
# internal node followed by its left then right subtree.

_TREE_MAGIC = "regression-tree"
_TREE_VERSION = "1"


def write_tree(tree: RegressionTree, path: str | Path) -> None:
    lines = [
        f"{_TREE_MAGIC}\t{_TREE_VERSION}",
        "params\t{cp!r}\t{ms}\t{mb}\t{md}".format(
            cp=tree.params.cp,
            ms=tree.params.min_split,
            mb=tree.params.min_bucket,
            md=tree.params.max_depth,
        ),
        "features\t" + "\t".join(tree.feature_names),
    ]

    def emit(node: TreeNode) -> None:
        if node.is_leaf:
            lines.append(f"leaf\t{node.value!r}\t{node.count}")
        else:
            lines.append(f"split\t{node.feature}\t{node.threshold!r}\t{node.count}")
            emit(node.left)
            emit(node.right)

    emit(tree.root)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_tree(path: str | Path) -> RegressionTree:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if len(lines) < 4:
        raise DataFormatError(f"{path}: truncated tree file")
    magic = lines[0].split("\t")
    if magic != [_TREE_MAGIC, _TREE_VERSION]:
        raise DataFormatError(f"{path}: not a version-{_TREE_VERSION} tree file")
    p_tag, cp, min_split, min_bucket, max_depth = lines[1].split("\t")
    f_tag, *names = lines[2].split("\t")
    if p_tag != "params" or f_tag != "features":
        raise DataFormatError(f"{path}: malformed tree header")
    params = TreeParams(float(cp), int(min_split), int(min_bucket), int(max_depth))

    pos = 3

    def parse() -> TreeNode:
        nonlocal pos
        if pos >= len(lines):
            raise DataFormatError(f"{path}: truncated node list")
        fields = lines[pos].split("\t")
        pos += 1
        if fields[0] == "leaf" and len(fields) == 3:
            return TreeNode(value=float(fields[1]), count=int(fields[2]))
        if fields[0] == "split" and len(fields) == 4:
            left = parse()
            right = parse()
            node = TreeNode(
                value=0.0,
                count=int(fields[3]),
                feature=int(fields[1]),
                threshold=float(fields[2]),
                left=left,
                right=right,
            )
            node.value = (
                (left.value * left.count + right.value * right.count) / node.count
                if node.count
                else 0.0
            )
            return node
        raise DataFormatError(f"{path}: bad node line {pos}: {lines[pos - 1]!r}")

    root = parse()
    if pos != len(lines):
        raise DataFormatError(f"{path}: trailing content after node list")
    return RegressionTree(root, params, tuple(names))
