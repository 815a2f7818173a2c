"""Dispersion-vector generation, scoring, search and file I/O."""

import logging
from dataclasses import replace
from pathlib import Path
from typing import Callable, Optional

import numpy as np
import yaml
from scipy.linalg import dft
from scipy.special import erfc
from scipy.stats import unitary_group

from ..core.exceptions import ConfigurationError, ContractViolation, OutputError
from ..models import Codebook, Constellation

logger = logging.getLogger(__name__)


def renormalize(vectors: np.ndarray, t: int) -> np.ndarray:
    """Scale every row to sum(|v|^2) = t."""
    energy = np.sum(np.abs(vectors) ** 2, axis=1, keepdims=True)
    if np.any(energy == 0):
        raise ContractViolation("cannot normalize an all-zero dispersion vector")
    return vectors * np.sqrt(t / energy)


def gen_random_codebook(q: int, t: int, rng: np.random.Generator) -> Codebook:
    """
    Random one-hot codebook.

    Each vector has a single non-zero entry at a uniform index, equal to
    sqrt(T) times the phase of a complex Gaussian draw.

    Args:
        q: Number of vectors
        t: Vector length
        rng: Random source

    Returns:
        Codebook with construction "random"
    """
    if q < 1 or t < 1:
        raise ConfigurationError(f"q >= 1 and t >= 1 required, got q={q}, t={t}")
    positions = rng.integers(0, t, q)
    draws = rng.standard_normal(q) + 1j * rng.standard_normal(q)
    magnitude = np.abs(draws)
    phases = np.where(magnitude > 0, draws / np.where(magnitude > 0, magnitude, 1.0), 1.0)

    vectors = np.zeros((q, t), dtype=complex)
    vectors[np.arange(q), positions] = np.sqrt(t) * phases
    return Codebook(vectors=renormalize(vectors, t), construction="random")


def unitary_matrix(size: int, source: str = "dft", rng: Optional[np.random.Generator] = None) -> np.ndarray:
    if source == "dft":
        return dft(size, scale="sqrtn")
    if source == "identity":
        return np.eye(size, dtype=complex)
    if source == "haar":
        if rng is None:
            raise ContractViolation("a Haar-random unitary needs a random source")
        if size == 1:
            return np.exp(2j * np.pi * rng.random((1, 1)))
        return unitary_group.rvs(size, random_state=rng)
    raise ConfigurationError(f"unknown unitary source {source!r}")


def gen_unitary_codebook(
    m: int, t: int, source: str = "dft", rng: Optional[np.random.Generator] = None
) -> Codebook:
    """
    Codebook cut from a unitary matrix.

    For m >= t the first T rows of an m x m unitary are kept (one vector per
    column); for m < t the first M columns of a t x t unitary. Vectors are scaled
    by sqrt(T/M) and then renormalized to sum(|v|^2) = T.

    Args:
        m: Number of vectors
        t: Vector length
        source: "dft", "haar" or "identity"
        rng: Random source (Haar only)

    Returns:
        Codebook with m vectors and construction "unitary"
    """
    if m < 1 or t < 1:
        raise ConfigurationError(f"m >= 1 and t >= 1 required, got m={m}, t={t}")
    if m >= t:
        vectors = unitary_matrix(m, source, rng)[:t, :].T
    else:
        vectors = unitary_matrix(t, source, rng)[:, :m].T
    vectors = np.sqrt(t / m) * vectors
    return Codebook(vectors=renormalize(vectors, t), construction="unitary")


def spread_hypotheses(codebook: Codebook, constellation: Constellation) -> np.ndarray:
    """All spread signals s * v_q, shape (Q * K, T), ordered by vector then symbol."""
    points = np.asarray(constellation.points, dtype=complex)
    return (codebook.vectors[:, None, :] * points[None, :, None]).reshape(-1, codebook.t)


def _pairwise_distances(codebook: Codebook, constellation: Constellation) -> np.ndarray:
    signals = spread_hypotheses(codebook, constellation)
    diff = signals[:, None, :] - signals[None, :, :]
    return np.sqrt(np.sum(np.abs(diff) ** 2, axis=-1))


def min_distance_score(codebook: Codebook, constellation: Constellation, sinr_db: float = 0.0) -> float:
    """Minimum distance between distinct (vector, symbol) hypotheses."""
    distances = _pairwise_distances(codebook, constellation)
    if distances.shape[0] < 2:
        return float("inf")
    np.fill_diagonal(distances, np.inf)
    return float(distances.min())


def error_probability_score(codebook: Codebook, constellation: Constellation, sinr_db: float = 10.0) -> float:
    """Negated pairwise union bound on the hypothesis error probability."""
    snr = 10.0 ** (sinr_db / 10.0)
    distances = _pairwise_distances(codebook, constellation)
    pairwise = 0.5 * erfc(np.sqrt(snr * distances ** 2 / 4.0))
    np.fill_diagonal(pairwise, 0.0)
    return -float(pairwise.sum() / distances.shape[0])


def capacity_score(codebook: Codebook, constellation: Constellation, sinr_db: float = 10.0) -> float:
    """log2 det(I + snr/Q * V^H V), a mutual-information proxy."""
    snr = 10.0 ** (sinr_db / 10.0)
    v = codebook.vectors
    gram = np.eye(codebook.t) + (snr / codebook.q) * (v.conj().T @ v)
    _, logdet = np.linalg.slogdet(gram)
    return float(logdet / np.log(2.0))


CRITERIA = {
    "max_min_distance": min_distance_score,
    "min_error_prob": error_probability_score,
    "max_capacity": capacity_score,
}


def score_codebook(
    codebook: Codebook, criterion: str, constellation: Constellation, sinr_db: float = 10.0
) -> float:
    if criterion not in CRITERIA:
        raise ConfigurationError(f"unknown codebook criterion {criterion!r}")
    return CRITERIA[criterion](codebook, constellation, sinr_db)


def optimize_codebook(
    generator: Callable[[np.random.Generator], Codebook],
    criterion: str,
    budget: int,
    rng: np.random.Generator,
    constellation: Constellation,
    sinr_db: float = 10.0,
) -> Codebook:
    """
    Budgeted random-restart search over candidate codebooks.

    Candidates are drawn in sequence from `rng`; the first candidate with the
    highest score wins, so a larger budget on the same stream never scores lower.

    Args:
        generator: Draws one candidate codebook from a random source
        criterion: Key of CRITERIA
        budget: Number of candidates
        rng: Random source
        constellation: Modulation the spread signals are scored with
        sinr_db: Operating point for the error-probability and capacity criteria

    Returns:
        Best candidate, annotated with criterion and score
    """
    if budget < 1:
        raise ConfigurationError(f"codebook budget must be >= 1, got {budget}")

    best, best_score = None, -np.inf
    for index in range(budget):
        candidate = generator(rng)
        score = score_codebook(candidate, criterion, constellation, sinr_db)
        logger.debug(f"Codebook candidate {index}: {criterion}={score:.6g}")
        if best is None or score > best_score:
            best, best_score = candidate, score

    logger.info(f"Selected codebook with {criterion}={best_score:.6g} out of {budget} candidates")
    return replace(best, criterion=criterion, score=float(best_score))


def save_codebook(codebook: Codebook, path) -> Path:
    """Write the codebook as YAML: header fields then Q rows of (re, im) pairs."""
    path = Path(path)
    document = {
        "q": codebook.q,
        "t": codebook.t,
        "construction": codebook.construction,
        "criterion": codebook.criterion,
        "seed": codebook.seed,
        "score": None if codebook.score is None else float(codebook.score),
        "vectors": [[[float(z.real), float(z.imag)] for z in row] for row in codebook.vectors],
    }
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as f:
            yaml.safe_dump(document, f, sort_keys=False)
    except OSError as e:
        raise OutputError(path, str(e)) from e
    logger.info(f"Wrote codebook ({codebook.q}x{codebook.t}) to {path}")
    return path


def load_codebook(path) -> Codebook:
    with open(path, "r") as f:
        document = yaml.safe_load(f) or {}
    try:
        rows = np.asarray(document["vectors"], dtype=float)
        vectors = rows[..., 0] + 1j * rows[..., 1]
        if vectors.shape != (document["q"], document["t"]):
            raise ConfigurationError(f"codebook {path} declares {document['q']}x{document['t']}, holds {vectors.shape}")
    except (KeyError, IndexError, TypeError, ValueError) as e:
        raise ConfigurationError(f"malformed codebook file {path}: {e}") from e
    return Codebook(
        vectors=vectors,
        construction=document.get("construction", "file"),
        criterion=document.get("criterion"),
        seed=document.get("seed"),
        score=document.get("score"),
    )
