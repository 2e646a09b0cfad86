"""Independent brute-force oracles the tests check the library against."""
from __future__ import annotations

import numpy as np

from lecseg.corpus import normalize_phrase, normalize_word


def weighted_jaccard_oracle(tf1: dict[str, int], tf2: dict[str, int]) -> float:
    """Reference weighted Jaccard: loop over the union, 0 tf when absent."""
    if not set(tf1).intersection(tf2):
        return 0.0
    mins = 0
    maxs = 0
    for v in sorted(set(tf1) | set(tf2)):
        a = tf1[v] if v in tf1 else 0
        b = tf2[v] if v in tf2 else 0
        mins += a if a < b else b
        maxs += a if a > b else b
    return mins / maxs


def pk_oracle(ref_positions: list[int], hyp_positions: list[int], n_units: int, k: int) -> float:
    """Exhaustive probe enumeration over positions (i, i + k)."""

    def same_segment(positions: list[int], i: int, j: int) -> bool:
        return not any(i < p <= j for p in positions)

    disagreements = 0
    probes = n_units - k
    for i in range(probes):
        if same_segment(ref_positions, i, i + k) != same_segment(hyp_positions, i, i + k):
            disagreements += 1
    return disagreements / probes


def window_diff_oracle(
    ref_positions: list[int], hyp_positions: list[int], n_units: int, k: int
) -> float:
    """Exhaustive window enumeration counting boundaries in (i, i + k]."""
    diffs = 0
    windows = n_units - k
    for i in range(windows):
        r = sum(1 for p in ref_positions if i < p <= i + k)
        h = sum(1 for p in hyp_positions if i < p <= i + k)
        if r != h:
            diffs += 1
    return diffs / windows


def positions_to_intervals(positions: list[int], n_units: int) -> list[tuple[float, float]]:
    """Unit-domain boundary positions -> second-domain segment intervals."""
    edges = [0.0] + [float(p) for p in sorted(positions)] + [float(n_units)]
    return list(zip(edges[:-1], edges[1:]))


def all_phrase_matches(tokens: list[str], phrases: list[str]) -> list[tuple[str, int]]:
    """Every normalized substring match of any phrase, ignoring overlap rules."""
    norm = [normalize_word(t) for t in tokens]
    matches = []
    for phrase in sorted(phrases):
        words = list(normalize_phrase(phrase))
        for i in range(len(norm) - len(words) + 1):
            if norm[i : i + len(words)] == words:
                matches.append((phrase, i))
    return sorted(matches, key=lambda m: (m[1], m[0]))


def exact_transport_cost(
    weights_a: np.ndarray, weights_b: np.ndarray, cost: np.ndarray
) -> float:
    """Exact optimal transport via linear programming (test-only oracle)."""
    from scipy.optimize import linprog

    na, nb = cost.shape
    a_eq = []
    b_eq = []
    for i in range(na):
        row = np.zeros(na * nb)
        row[i * nb : (i + 1) * nb] = 1.0
        a_eq.append(row)
        b_eq.append(weights_a[i])
    for j in range(nb):
        row = np.zeros(na * nb)
        row[j::nb] = 1.0
        a_eq.append(row)
        b_eq.append(weights_b[j])
    res = linprog(
        cost.reshape(-1),
        A_eq=np.array(a_eq),
        b_eq=np.array(b_eq),
        bounds=(0, None),
        method="highs",
    )
    assert res.success, res.message
    return float(res.fun)
