"""Slow, obviously-correct reference computations used to cross-check the library."""

import itertools


def all_group_isomorphisms(ta, tb):
    n = len(ta)
    if n != len(tb):
        return []
    out = []
    for f in itertools.permutations(range(n)):
        if all(f[ta[x][y]] == tb[f[x]][f[y]] for x in range(n) for y in range(n)):
            out.append(f)
    return out


def closure_by_intersection(table, gens):
    """Smallest subgroup containing gens, as the intersection of all subgroups containing them."""
    n = len(table)
    e = next(i for i in range(n) if all(table[i][x] == x for x in range(n)))
    best = set(range(n))
    for mask in range(1 << n):
        s = {x for x in range(n) if mask >> x & 1}
        if e not in s or not set(gens) <= s:
            continue
        if all(table[a][b] in s for a in s for b in s):
            if len(s) < len(best):
                best = s
    return best


def graph_automorphisms(n, edges):
    es = {frozenset(e) for e in edges}
    return [
        p for p in itertools.permutations(range(n)) if {frozenset((p[a], p[b])) for a, b in map(tuple, es)} == es
    ]


def relsys_automorphisms(system):
    verts = list(system.vertices)
    out = []
    for p in itertools.permutations(range(len(verts))):
        m = {verts[i]: verts[p[i]] for i in range(len(verts))}
        if all({(m[v], m[w]) for v, w in system.edges[l]} == set(system.edges[l]) for l in system.labels):
            out.append(p)
    return out


def digraph_homs(va, ea, vb, eb):
    eb = set(eb)
    out = []
    for img in itertools.product(vb, repeat=len(va)):
        m = dict(zip(va, img))
        if all((m[v], m[w]) in eb for v, w in ea):
            out.append(m)
    return out
