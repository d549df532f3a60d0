"""Encoding polynomials for the symmetric-group block diagonalization.

A degree-n homogeneous polynomial in the d^2 entries of a single-copy grid
encodes all matrix elements of an operator between Young-symmetrized
vectors: the coefficient of the monomial labelled by a count matrix E is
the matrix element against the orbit matrix of E.  Two independent
constructions are implemented:

* the count-function expansion over column-type assignments (used for
  validation), and
* a product of column determinants for the constant tableau, transported to
  arbitrary tableau pairs by polynomial differential operators (the
  production path; lower constant factors).

Polynomials are sparse dicts from exponent tuples (row-major over the d x d
grid) to exact integer coefficients; the differential operators act by
exponent shifts.
"""

from __future__ import annotations

from itertools import permutations
from math import factorial

from .orbits import CountMatrix
from .tableaux import (
    Partition,
    Tableau,
    conjugate,
    row_count_matrix,
    shape_of,
)

Poly = dict[tuple[int, ...], int]


def poly_mul(p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for e1, c1 in p.items():
        for e2, c2 in q.items():
            key = tuple(a + b for a, b in zip(e1, e2))
            val = out.get(key, 0) + c1 * c2
            if val:
                out[key] = val
            elif key in out:
                del out[key]
    return out


def poly_pow(p: Poly, k: int, d: int) -> Poly:
    out: Poly = {(0,) * (d * d): 1}
    for _ in range(k):
        out = poly_mul(out, p)
    return out


def poly_add_into(acc: Poly, p: Poly, scale: int = 1):
    for e, c in p.items():
        val = acc.get(e, 0) + scale * c
        if val:
            acc[e] = val
        elif e in acc:
            del acc[e]


def q_poly(k: int, d: int) -> Poly:
    """k! times the determinant of the leading k x k block of the grid."""
    if k == 0:
        return {(0,) * (d * d): 1}
    out: Poly = {}
    fact = factorial(k)
    for sigma in permutations(range(k)):
        sgn = perm_sign(sigma)
        exp = [0] * (d * d)
        for a in range(k):
            exp[a * d + sigma[a]] += 1
        key = tuple(exp)
        val = out.get(key, 0) + sgn * fact
        if val:
            out[key] = val
        elif key in out:
            del out[key]
    return out


def perm_sign(sigma) -> int:
    sgn = 1
    seen = [False] * len(sigma)
    for i in range(len(sigma)):
        if seen[i]:
            continue
        j = i
        clen = 0
        while not seen[j]:
            seen[j] = True
            j = sigma[j]
            clen += 1
        if clen % 2 == 0:
            sgn = -sgn
    return sgn


def p_lambda(lam: Partition, d: int) -> Poly:
    """Encoding polynomial of the constant tableau against itself: the
    product of column-determinant polynomials, one factor per column."""
    out: Poly = {(0,) * (d * d): 1}
    padded = tuple(lam) + (0,) * (d + 1 - len(lam))
    for k in range(1, d + 1):
        reps = padded[k - 1] - padded[k]
        if reps > 0:
            out = poly_mul(out, poly_pow(q_poly(k, d), reps, d))
    return out


def diff_lower(p: Poly, a: int, b: int, d: int) -> Poly:
    """sum_c x_{c,a} d/dx_{c,b}, acting by exponent shifts."""
    out: Poly = {}
    for e, coef in p.items():
        for c in range(d):
            src = c * d + b
            if e[src] == 0:
                continue
            dst = c * d + a
            exp = list(e)
            exp[src] -= 1
            exp[dst] += 1
            key = tuple(exp)
            val = out.get(key, 0) + coef * e[src]
            if val:
                out[key] = val
            elif key in out:
                del out[key]
    return out


def diff_raise(p: Poly, a: int, b: int, d: int) -> Poly:
    """sum_c x_{a,c} d/dx_{b,c}, the left-action counterpart."""
    out: Poly = {}
    for e, coef in p.items():
        for c in range(d):
            src = b * d + c
            if e[src] == 0:
                continue
            dst = a * d + c
            exp = list(e)
            exp[src] -= 1
            exp[dst] += 1
            key = tuple(exp)
            val = out.get(key, 0) + coef * e[src]
            if val:
                out[key] = val
            elif key in out:
                del out[key]
    return out


def encoding_poly_m2(tau: Tableau, gamma: Tableau, d: int) -> Poly:
    """Determinant-product construction transported by differential
    operators; exact integer coefficients.

    The two operator families commute with each other; within a family the
    operators are applied in strictly descending (a, b) order, largest pair
    first, matching the validated convention.
    """
    lam = shape_of(tau)
    if shape_of(gamma) != lam:
        raise ValueError("tableaux must share a shape")
    E_tau = row_count_matrix(tau, d)
    E_gamma = row_count_matrix(gamma, d)
    poly = p_lambda(lam, d)
    pairs = [(a, b) for a in range(d) for b in range(d) if a > b]
    pairs.sort(reverse=True)
    denom = 1
    for a, b in pairs:
        for _ in range(E_tau.get(a, b)):
            poly = diff_raise(poly, a, b, d)
        denom *= factorial(E_tau.get(a, b))
    for a, b in pairs:
        for _ in range(E_gamma.get(a, b)):
            poly = diff_lower(poly, a, b, d)
        denom *= factorial(E_gamma.get(a, b))
    if denom != 1:
        out: Poly = {}
        for e, c in poly.items():
            q, r = divmod(c, denom)
            if r != 0:
                raise ArithmeticError("factorial prefactor does not divide exactly")
            if q:
                out[e] = q
        poly = out
    return poly


def _injective_tuples(d: int, t: int):
    return [v for v in permutations(range(d), t)]


def _det_poly(v, w, d: int) -> Poly:
    """det((x_{v_i, w_j})) as an exponent dict."""
    t = len(v)
    out: Poly = {}
    for sigma in permutations(range(t)):
        sgn = perm_sign(sigma)
        exp = [0] * (d * d)
        for i in range(t):
            exp[v[i] * d + w[sigma[i]]] += 1
        key = tuple(exp)
        val = out.get(key, 0) + sgn
        if val:
            out[key] = val
        elif key in out:
            del out[key]
    return out


def encoding_poly_m1(tau: Tableau, gamma: Tableau, d: int) -> Poly:
    """Count-function expansion: group the row-equivalent rearrangements of
    both tableaux by the multiset of (column of tau', column of gamma')
    vector pairs at every column height, weigh each group by the multinomial
    of its assignment count, and multiply column determinants.

    Column vectors with repeated symbols contribute vanishing determinants
    and are skipped.  Exact integer arithmetic.
    """
    lam = shape_of(tau)
    if shape_of(gamma) != lam:
        raise ValueError("tableaux must share a shape")
    h = len(lam)
    padded = tuple(lam) + (0,)
    c_lambda = 1
    for height in conjugate(lam):
        c_lambda *= factorial(height)
    target_tau = [_symbol_counts(tau[i], d) for i in range(h)]
    target_gamma = [_symbol_counts(gamma[i], d) for i in range(h)]

    per_height = []
    for t in range(1, h + 1):
        cols = padded[t - 1] - padded[t]
        if cols == 0:
            continue
        types = [
            (v, w)
            for v in _injective_tuples(d, t)
            for w in _injective_tuples(d, t)
        ]
        per_height.append((t, cols, types))

    out: Poly = {}
    zero_used = tuple(tuple([0] * d) for _ in range(h))

    def bumped(used, target, vec, count):
        """Row-content trackers after adding a column type `count` times,
        or None when some row budget is exceeded."""
        rows = [list(r) for r in used]
        for i, sym in enumerate(vec):
            rows[i][sym] += count
            if rows[i][sym] > target[i][sym]:
                return None
        return tuple(tuple(r) for r in rows)

    def rec(level: int, used_tau, used_gamma, weight_num: int, poly: Poly):
        if level == len(per_height):
            poly_add_into(out, poly, weight_num)
            return
        t, cols, types = per_height[level]

        def assign(idx: int, left: int, ut, ug, mult_den: int, partial: Poly):
            if idx == len(types):
                if left == 0:
                    rec(level + 1, ut, ug, weight_num * (factorial(cols) // mult_den), partial)
                return
            v, w = types[idx]
            assign(idx + 1, left, ut, ug, mult_den, partial)
            det = _det_poly(v, w, d)
            powered = partial
            ut2, ug2 = ut, ug
            for count in range(1, left + 1):
                ut2 = bumped(ut2, target_tau, v, 1)
                ug2 = bumped(ug2, target_gamma, w, 1) if ut2 is not None else None
                if ut2 is None or ug2 is None:
                    break
                powered = poly_mul(powered, det)
                assign(idx + 1, left - count, ut2, ug2, mult_den * factorial(count), powered)

        assign(0, cols, used_tau, used_gamma, 1, poly)

    rec(0, zero_used, zero_used, c_lambda, {(0,) * (d * d): 1})
    return out


def _symbol_counts(row, d: int):
    c = [0] * d
    for v in row:
        c[v] += 1
    return tuple(c)


def transition_action(E: CountMatrix, a: int, b: int, side: str) -> list[tuple[CountMatrix, int]]:
    """Expansion of an orbit matrix times an elementary transition operator.

    side='right' multiplies by the operator on the right, side='left' on the
    left; the result is a short list of (count matrix, integer weight).
    """
    if a == b:
        raise ValueError("transition needs a != b")
    d = E.d
    out = []
    if side == "right":
        for c in range(d):
            if E.get(c, a) > 0:
                arr = E.to_array()
                arr[c, a] -= 1
                arr[c, b] += 1
                out.append((CountMatrix.from_array(arr), E.get(c, b) + 1))
    elif side == "left":
        for c in range(d):
            if E.get(b, c) > 0:
                arr = E.to_array()
                arr[b, c] -= 1
                arr[a, c] += 1
                out.append((CountMatrix.from_array(arr), E.get(a, c) + 1))
    else:
        raise ValueError("side must be 'left' or 'right'")
    return out


def eval_at_identity(p: Poly, d: int) -> int:
    """Evaluate at the identity grid: only all-diagonal exponents survive."""
    total = 0
    for e, c in p.items():
        if all(e[a * d + b] == 0 for a in range(d) for b in range(d) if a != b):
            total += c
    return total
