"""Reference computations that share no code with the package.

Everything here works on plain lists of Fractions so a bug in the package's
LP engine or game classes cannot leak into the expected values.
"""

from __future__ import annotations

import itertools
from fractions import Fraction


def _dot(a, b):
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def simplex_vertices(halfspaces):
    """Vertices of ``{x in simplex : a . x >= b for (a, b) in halfspaces}``.

    Double-description method: the polytope is the cone ``x >= 0`` cut by the
    homogenized rows ``(a - b) . x >= 0`` and then normalized to sum 1. The
    cone starts from the unit vectors; each new row keeps the rays on its
    nonnegative side and adds the combination of every adjacent pair on
    opposite sides. Adjacency is decided combinatorially from zero sets.
    """
    if not halfspaces:
        raise ValueError("need the dimension from at least one row")
    n = len(halfspaces[0][0])
    rows = [[Fraction(a_i) - Fraction(b) for a_i in a] for a, b in halfspaces]
    # constraint ids: 0..n-1 are x_i >= 0, n + k is the k-th row
    rays = [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)]

    def zero_set(r, upto):
        z = {i for i in range(n) if r[i] == 0}
        z.update(n + k for k in range(upto) if _dot(rows[k], r) == 0)
        return frozenset(z)

    for k, h in enumerate(rows):
        zs = {r: zero_set(r, k) for r in rays}
        plus = [r for r in rays if _dot(h, r) > 0]
        minus = [r for r in rays if _dot(h, r) < 0]
        zero = [r for r in rays if _dot(h, r) == 0]
        fresh = []
        for u in plus:
            for v in minus:
                common = zs[u] & zs[v]
                if any(common <= zs[w] for w in rays if w != u and w != v):
                    continue
                hu, hv = _dot(h, u), _dot(h, v)
                w = tuple(hu * vi - hv * ui for ui, vi in zip(u, v))
                total = sum(w)
                fresh.append(tuple(c / total for c in w))
        rays = list(dict.fromkeys(plus + zero + fresh))
        if not rays:
            return []
    return [tuple(c / sum(r) for c in r) for r in rays]


def simplex_lp_max(objective, halfspaces):
    """Max of ``objective . x`` over the polytope, or None if it is empty."""
    verts = simplex_vertices(halfspaces)
    if not verts:
        return None
    return max(_dot(objective, v) for v in verts)


def _solve_square(matrix, rhs):
    """Gauss-Jordan over Fractions; None when singular."""
    m = len(matrix)
    a = [list(row) + [b] for row, b in zip(matrix, rhs)]
    for col in range(m):
        piv = next((r for r in range(col, m) if a[r][col] != 0), None)
        if piv is None:
            return None
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [v * inv for v in a[col]]
        for r in range(m):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [a[r][m] for r in range(m)]


def _independent_rows(matrix, rhs):
    """Indices of a maximal independent row set; None if the system is inconsistent."""
    kept, reduced = [], []
    for i, (row, b) in enumerate(zip(matrix, rhs)):
        r = list(row) + [b]
        for piv_col, base in reduced:
            if r[piv_col] != 0:
                f = r[piv_col] / base[piv_col]
                r = [x - f * y for x, y in zip(r, base)]
        lead = next((j for j, v in enumerate(r[:-1]) if v != 0), None)
        if lead is None:
            if r[-1] != 0:
                return None
            continue
        kept.append(i)
        reduced.append((lead, r))
    return kept


def basis_enumeration_max(objective, constraints):
    """Max of ``objective . x`` over ``x >= 0`` and ``constraints`` by trying every basis.

    ``constraints`` holds ``(coeffs, rel, rhs)`` with ``rel`` one of
    ``">=", "<=", "=="``. Slack columns turn inequalities into equalities, and
    every square column subset is solved directly. Returns None if no basic
    feasible solution exists; callers make sure the feasible set is bounded.
    """
    n = len(objective)
    m = len(constraints)
    cols = [[Fraction(c[0][j]) for c in constraints] for j in range(n)]
    for i, (_, rel, _) in enumerate(constraints):
        if rel != "==":
            sign = Fraction(-1) if rel == ">=" else Fraction(1)
            cols.append([sign if k == i else Fraction(0) for k in range(m)])
    rhs = [Fraction(c[2]) for c in constraints]
    rows = _independent_rows([[col[i] for col in cols] for i in range(m)], rhs)
    if rows is None:
        return None
    cols = [[col[i] for i in rows] for col in cols]
    rhs = [rhs[i] for i in rows]
    m = len(rows)
    best = None
    for basis in itertools.combinations(range(len(cols)), m):
        matrix = [[cols[j][i] for j in basis] for i in range(m)]
        sol = _solve_square(matrix, rhs)
        if sol is None or any(v < 0 for v in sol):
            continue
        x = [Fraction(0)] * len(cols)
        for j, v in zip(basis, sol):
            x[j] = v
        value = _dot(objective, x[:n])
        if best is None or value > best:
            best = value
    return best


# -- games as raw tables --------------------------------------------------------


def profiles(counts):
    return list(itertools.product(*(range(c) for c in counts)))


def ce_rows(counts, table, players):
    """CE incentive rows ``(coeffs, 0)`` for ``players`` over a raw payoff table."""
    profs = profiles(counts)
    rows = []
    for p in players:
        for a in range(counts[p]):
            for b in range(counts[p]):
                if a == b:
                    continue
                coeffs = []
                for s in profs:
                    if s[p] != a:
                        coeffs.append(Fraction(0))
                        continue
                    t = s[:p] + (b,) + s[p + 1:]
                    coeffs.append(Fraction(table[s][p]) - Fraction(table[t][p]))
                rows.append((coeffs, Fraction(0)))
    return rows


def utility_row(counts, table, p):
    return [Fraction(table[s][p]) for s in profiles(counts)]


def reduction_payoff(clauses, variables, lead, named, v):
    """Leader ``v``'s payoff in the tautology gadget, written from the case table.

    ``lead[i]`` is True when variable ``i``'s leader plays true.
    """
    k = len(variables)
    assignment = dict(zip(variables, lead))
    sat = any(all(assignment[x] != neg for x, neg in c) for c in clauses)
    num_false = lead.count(False)
    mine_true = lead[v]
    if sat:
        if named == v:
            return 0 if mine_true else num_false - 1
        return num_false if mine_true else k
    if all(lead):
        return -1 if mine_true else 0
    return k
