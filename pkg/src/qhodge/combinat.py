"""Index tables for the exterior algebra on a model fiber R^dim.

Components of a p-form are indexed by sorted p-element subsets of
range(dim), enumerated in lexicographic order.  All tables are cached.
"""

from functools import lru_cache
from itertools import combinations


@lru_cache(maxsize=None)
def subsets(dim: int, p: int) -> tuple:
    """Sorted p-subsets of range(dim) in lexicographic order.

    Out-of-range degrees have no components (zero space).
    """
    if p < 0 or p > dim:
        return ()
    return tuple(combinations(range(dim), p))


@lru_cache(maxsize=None)
def subset_index(dim: int, p: int) -> dict:
    return {s: i for i, s in enumerate(subsets(dim, p))}


def n_components(dim: int, p: int) -> int:
    return len(subsets(dim, p))


def merge_sign(s: tuple, t: tuple) -> int:
    """Sign of the shuffle sorting the concatenation s + t (disjoint)."""
    inv = 0
    for x in t:
        inv += sum(1 for y in s if y > x)
    return -1 if inv % 2 else 1


@lru_cache(maxsize=None)
def wedge_table(dim: int, p: int, q: int) -> tuple:
    """Entries (i, j, out, sign) with dx_{S_i} ^ dx_{T_j} = sign * dx_{U_out}."""
    out_index = subset_index(dim, p + q)
    table = []
    for i, s in enumerate(subsets(dim, p)):
        for j, t in enumerate(subsets(dim, q)):
            if set(s) & set(t):
                continue
            u = tuple(sorted(s + t))
            table.append((i, j, out_index[u], merge_sign(s, t)))
    return tuple(table)


@lru_cache(maxsize=None)
def insert_table(dim: int, p: int) -> tuple:
    """Entries (comp_in, axis, comp_out, sign): dx_axis ^ dx_S = sign * dx_out."""
    out_index = subset_index(dim, p + 1)
    table = []
    for i, s in enumerate(subsets(dim, p)):
        for axis in range(dim):
            if axis in s:
                continue
            u = tuple(sorted((axis,) + s))
            sign = -1 if sum(1 for y in s if y < axis) % 2 else 1
            table.append((i, axis, out_index[u], sign))
    return tuple(table)
