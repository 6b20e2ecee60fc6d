"""Small exact bipartite matching utilities (augmenting paths + Koenig)."""

from __future__ import annotations


def max_bipartite_matching(n_left: int, n_right: int, adj) -> tuple:
    """Maximum matching; adj[i] is an iterable of right indices for left i.

    Returns (size, match_left, match_right) with -1 for unmatched.
    """
    match_left = [-1] * n_left
    match_right = [-1] * n_right

    def augment(u, seen):
        for v in adj[u]:
            if v in seen:
                continue
            seen.add(v)
            if match_right[v] == -1 or augment(match_right[v], seen):
                match_left[u] = v
                match_right[v] = u
                return True
        return False

    size = 0
    for u in range(n_left):
        if augment(u, set()):
            size += 1
    return size, match_left, match_right


def koenig_min_vertex_cover(n_left: int, n_right: int, adj) -> tuple:
    """One minimum vertex cover from a maximum matching (Koenig's theorem).

    Returns (left_cover, right_cover) as sorted lists of side-local indices.
    """
    size, match_left, match_right = max_bipartite_matching(n_left, n_right, adj)
    # alternating reachability from unmatched left vertices
    visited_left = [False] * n_left
    visited_right = [False] * n_right
    stack = [u for u in range(n_left) if match_left[u] == -1]
    for u in stack:
        visited_left[u] = True
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if not visited_right[v]:
                visited_right[v] = True
                w = match_right[v]
                if w != -1 and not visited_left[w]:
                    visited_left[w] = True
                    stack.append(w)
    left_cover = [u for u in range(n_left) if not visited_left[u]]
    right_cover = [v for v in range(n_right) if visited_right[v]]
    assert len(left_cover) + len(right_cover) == size
    return left_cover, right_cover
