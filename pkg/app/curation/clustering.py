"""
K-means Clustering

Seeded k-means++ initialisation followed by Lloyd iterations minimising
the within-cluster sum of squared errors

    J = sum_i sum_{x in C_i} ||x - mu_i||^2

Ties in assignment go to the lowest centroid index; an emptied cluster
keeps its previous centroid. The best of ``n_init`` restarts (lowest J,
earliest on ties) is returned.
"""

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from sklearn.metrics import silhouette_score

from app.core.exceptions import ClusterCountError, DimensionMismatchError
from app.embedding import EmbeddingVector
from app.utils import get_logger

logger = get_logger(__name__)


def as_matrix(points: Sequence[EmbeddingVector] | np.ndarray) -> np.ndarray:
    """
    Stack points into an (n, d) float matrix.

    Raises:
        DimensionMismatchError: If points disagree on dimension
    """
    if isinstance(points, np.ndarray):
        matrix = np.asarray(points, dtype=np.float64)
        if matrix.ndim != 2:
            raise DimensionMismatchError(f"Expected a 2-d point matrix, got {matrix.ndim}-d")
        return matrix
    dimensions = {vector.dimension for vector in points}
    if len(dimensions) > 1:
        raise DimensionMismatchError(
            f"Points have mixed dimensions {sorted(dimensions)}",
            details={"dimensions": sorted(dimensions)},
        )
    if not points:
        return np.zeros((0, 0), dtype=np.float64)
    return np.vstack([vector.as_array() for vector in points])


@dataclass(eq=False)
class ClusteringProblem:
    points: np.ndarray
    k: int
    seed: int = 13
    max_iterations: int = 100
    n_init: int = 10

    def __post_init__(self) -> None:
        self.points = as_matrix(self.points)
        n = self.points.shape[0]
        if self.k < 1 or self.k > n:
            raise ClusterCountError(
                f"k={self.k} outside 1..{n}", details={"k": self.k, "points": n}
            )
        if self.max_iterations < 1 or self.n_init < 1:
            raise ValueError("max_iterations and n_init must be positive")

    @classmethod
    def from_vectors(
        cls, vectors: Sequence[EmbeddingVector], k: int, **kwargs: int
    ) -> "ClusteringProblem":
        return cls(as_matrix(vectors), k, **kwargs)


@dataclass(eq=False)
class ClusteringResult:
    assignments: np.ndarray
    centroids: np.ndarray
    objective: float
    history: list[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False

    def clusters(self) -> list[list[int]]:
        """Point indexes per cluster, in cluster order."""
        return [
            [int(i) for i in np.flatnonzero(self.assignments == c)]
            for c in range(self.centroids.shape[0])
        ]


def squared_distances(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - centroids[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def objective(points: np.ndarray, assignments: np.ndarray, centroids: np.ndarray) -> float:
    diff = points - centroids[assignments]
    return float(np.einsum("ij,ij->", diff, diff))


def kmeans_plus_plus(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    chosen = [int(rng.integers(n))]
    for _ in range(1, k):
        d2 = squared_distances(points, points[chosen]).min(axis=1)
        total = d2.sum()
        if total <= 0.0:
            chosen.append(int(rng.integers(n)))
        else:
            chosen.append(int(rng.choice(n, p=d2 / total)))
    return points[chosen].copy()


def lloyd(
    points: np.ndarray, centroids: np.ndarray, max_iterations: int
) -> ClusteringResult:
    """Lloyd iterations until the assignment is a fixpoint."""
    assignments = squared_distances(points, centroids).argmin(axis=1)
    history = [objective(points, assignments, centroids)]
    converged = False
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        updated = centroids.copy()
        for c in range(centroids.shape[0]):
            members = points[assignments == c]
            if len(members):
                updated[c] = members.mean(axis=0)
        reassigned = squared_distances(points, updated).argmin(axis=1)
        history.append(objective(points, reassigned, updated))
        centroids = updated
        if np.array_equal(reassigned, assignments):
            converged = True
            break
        assignments = reassigned
    return ClusteringResult(
        assignments=assignments,
        centroids=centroids,
        objective=history[-1],
        history=history,
        iterations=iterations,
        converged=converged,
    )


def kmeans(problem: ClusteringProblem) -> ClusteringResult:
    """
    Cluster ``problem.points`` into ``problem.k`` groups.

    Returns:
        ClusteringResult with assignments, centroids, J and the J history of
        the winning restart; fixed seed gives identical output

    Raises:
        DimensionMismatchError, ClusterCountError: On invalid problems
    """
    rng = np.random.default_rng(problem.seed)
    best: ClusteringResult | None = None
    for _ in range(problem.n_init):
        initial = kmeans_plus_plus(problem.points, problem.k, rng)
        result = lloyd(problem.points, initial, problem.max_iterations)
        if best is None or result.objective < best.objective:
            best = result
    assert best is not None
    return best


def select_k(
    points: np.ndarray,
    k_min: int = 2,
    k_max: int = 12,
    seed: int = 13,
    max_iterations: int = 100,
    n_init: int = 10,
) -> int:
    """
    k with the highest mean silhouette over ``k_min..min(k_max, n-1)``.

    Ties prefer the smaller k; n <= 2 returns n. Returns 1 when no k in the
    range yields at least two non-empty clusters.
    """
    n = points.shape[0]
    if n <= 2:
        return n
    best_k, best_score = 1, -np.inf
    for k in range(max(2, k_min), min(k_max, n - 1) + 1):
        result = kmeans(ClusteringProblem(points, k, seed, max_iterations, n_init))
        if len(np.unique(result.assignments)) < 2:
            continue
        score = float(silhouette_score(points, result.assignments, metric="euclidean"))
        if score > best_score:
            best_k, best_score = k, score
    logger.debug("k_selected", points=n, k=best_k, silhouette=best_score)
    return best_k
