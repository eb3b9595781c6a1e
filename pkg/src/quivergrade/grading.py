"""Gradability of modules over a positively graded based algebra.

The decision procedure: pick a unit alpha whose multiplicative order exceeds
dim M (extending the base field if needed); M is gradable iff M is isomorphic
to its twist M_alpha, in which case a grading is extracted from the
generalized eigenspace structure of the twist isomorphism.  The eigenspace
decomposition is computed rationally over the working field by grouping the
irreducible factors of the minimal polynomial into orbits under multiplication
of roots by alpha; each orbit position is one grading layer.  Over a
non-closed field two Galois-conjugate eigenvalues can collide into one factor
orbit; this is detected and handled by escalating to a larger extension.

The exhaustive oracle used in tests searches over all direct-sum
decompositions of the vertex fibers into layered subspaces compatible with the
generator actions; any grading can be shifted into the window [0, dim M), so
the search is complete.
"""

from __future__ import annotations

import numpy as np

from . import gf
from . import modules as md
from .gf import FieldTooLarge
from .homology import FormalMat, ext_dim
from .tilde import GradedAlgebraError, GradedModule


class GradingError(Exception):
    pass


class OrbitCollision(GradingError):
    """Galois-conjugate eigenvalues fell into one multiply-by-alpha orbit."""


class SplittingFieldTooLarge(GradingError):
    """Escalation past the configured word-size bound."""


def twist(M, alpha):
    """The module with the action of every homogeneous element r rescaled by
    alpha^(deg r).  Scaling the generators suffices: derived actions of the
    basis elements then scale by alpha^deg automatically."""
    A = M.algebra
    F = A.field
    alpha = int(alpha)
    if alpha == 0:
        raise GradingError("twist by zero")
    mats = {}
    for g in A.gens:
        scale = int(F.pow(alpha, A.basis_deg[g]))
        mats[g] = np.asarray(F.mul(scale, M.mats[g]), dtype=np.int64)
    return md.Module(A, M.dims, mats)


class GradabilityVerdict:
    def __init__(self, gradable, witness=None, alpha=None, alpha_order=None,
                 refutation=None, field=None, module=None):
        self.gradable = gradable
        self.witness = witness          # GradedModule + pushdown iso, when gradable
        self.pushdown_iso = None
        self.alpha = alpha
        self.alpha_order = alpha_order
        self.refutation = refutation
        self.field = field
        self.module = module            # the module over the field of computation

    def __bool__(self):
        return bool(self.gradable)


def _lift_to_extension(M, bound):
    """(T2, M2, F2, alpha): the module and its graded algebra over the smallest
    extension containing a unit of order > bound."""
    A = M.algebra
    F = A.field
    F2, alpha, emb = gf.element_of_order_exceeding(F, bound)
    if F2 == F:
        return A, M, F2, alpha
    A2 = A.change_field(F2, emb)
    M2 = md.embed_module(M, A2, emb)
    return A2, M2, F2, alpha


def is_gradable(M, rng, _escalate=0):
    """The executable dichotomy: a verified graded lift, or a verified
    refutation M not iso M_alpha with ord(alpha) > dim M."""
    n = max(M.total_dim, 1)
    bound = n
    for _ in range(_escalate):
        bound = bound * bound + 1
    try:
        A2, M2, F2, alpha = _lift_to_extension(M, bound)
    except FieldTooLarge as e:
        raise SplittingFieldTooLarge(str(e))
    Ma = twist(M2, alpha)
    verdict = md.is_isomorphic(M2, Ma, rng)
    order = gf.element_order(F2, alpha)
    if not verdict.isomorphic:
        return GradabilityVerdict(False, alpha=alpha, alpha_order=order,
                                  refutation=verdict.reason, field=F2, module=M2)
    try:
        graded = extract_grading(M2, verdict.witness, alpha)
    except OrbitCollision:
        if _escalate >= 3:
            raise SplittingFieldTooLarge(
                "factor-orbit collisions persisted through escalation")
        return is_gradable(M, rng, _escalate=_escalate + 1)
    out = GradabilityVerdict(True, witness=graded[0], alpha=alpha,
                             alpha_order=order, field=F2, module=M2)
    out.pushdown_iso = graded[1]
    # re-verify: the witness pushes down isomorphically onto M2
    phi = graded[1]
    if not (phi.is_hom() and phi.is_invertible()):
        raise GradingError("extracted grading failed re-verification")
    graded[0].check()
    return out


def extract_grading(M, psi, alpha):
    """Turn an isomorphism psi: M -> M_alpha into a grading of M.

    Returns (GradedModule N, iso N.push_down() -> M).  The generalized
    eigenspace of the eigenvalue lambda sits in layer j when lambda =
    lambda_0 alpha^j within its orbit; all kernels are computed over the
    working field from the irreducible factors of the minimal polynomial.
    """
    A = M.algebra
    F = A.field
    n = M.total_dim
    minpoly = np.array([1], dtype=np.int64)
    for v in range(A.nvert):
        if M.dims[v]:
            minpoly = gf._poly_lcm(F, minpoly, gf.min_poly_of_matrix(F, psi.mats[v]))
    _, factors = gf.factor_poly(F, minpoly)
    factor_keys = {tuple(int(c) for c in f): (f, mult) for f, mult in factors}

    def step(fkey, j):
        """The factor whose roots are alpha^j times the roots of fkey."""
        f = np.array(fkey, dtype=np.int64)
        deg = len(fkey) - 1
        ainv_j = F.inv(int(F.pow(alpha, j))) if j >= 0 else int(F.pow(alpha, -j))
        # g(x) = monic(f(alpha^{-j} x)): substitute and normalize
        coeffs = []
        for k, c in enumerate(f):
            coeffs.append(int(F.mul(int(c), int(F.pow(ainv_j, k)))))
        return tuple(int(c) for c in gf.poly_monic(F, np.array(coeffs, dtype=np.int64)))

    layer_of = {}
    unassigned = set(factor_keys)
    while unassigned:
        f0 = min(unassigned)
        hits = {}
        for j in range(-n, n + 1):
            g = step(f0, j)
            if g in factor_keys:
                if g in hits.values() or g in layer_of:
                    raise OrbitCollision("factor orbit self-intersects")
                hits[j] = g
        jmin = min(hits)
        seen = set()
        for j, g in hits.items():
            if g in seen:
                raise OrbitCollision("two shifts hit the same factor")
            seen.add(g)
            if g not in unassigned:
                raise OrbitCollision("factor reached from two orbits")
            layer_of[g] = j - jmin
            unassigned.discard(g)
    # compute layers per vertex
    C = []
    degrees = []
    for v in range(A.nvert):
        nv = M.dims[v]
        if nv == 0:
            C.append(F.zeros(0, 0))
            degrees.append([])
            continue
        rows = []
        degs = []
        for fkey in sorted(factor_keys, key=lambda k: layer_of[k]):
            f, _ = factor_keys[fkey]
            mat = _eval_poly_matrix(F, f, psi.mats[v])
            power = mat
            for _ in range(nv - 1):
                power = F.matmul(power, mat)
            ker = F.nullspace(np.asarray(power, dtype=np.int64).T)
            for r in ker:
                rows.append(r)
                degs.append(layer_of[fkey])
        stacked = (np.stack(rows) if rows else np.zeros((0, nv), dtype=np.int64))
        if stacked.shape[0] != nv or not F.is_invertible(stacked):
            raise OrbitCollision("eigenspace layers do not fill the fiber")
        C.append(stacked)
        degrees.append(degs)
    shift0 = min((d for dd in degrees for d in dd), default=0)
    degrees = [[d - shift0 for d in dd] for dd in degrees]
    N = md.conjugate(M, C)
    graded = GradedModule(N, degrees)
    iso = md.ModuleMap(N, M, C)
    return graded, iso


def _eval_poly_matrix(F, poly, mat):
    n = mat.shape[0]
    acc = F.zeros(n, n)
    for c in reversed(gf.poly_trim(poly)):
        acc = F.add(F.matmul(acc, mat), F.mul(int(c), F.eye(n)))
    return np.asarray(acc, dtype=np.int64)


def verify_not_gradable(M, rng, seed_shift=1):
    """Re-run the refutation with a fresh generator; used by certificate
    verification."""
    fresh = np.random.default_rng(rng.integers(0, 2**63) + seed_shift)
    return not is_gradable(M, fresh).gradable


def is_rigid(M):
    return ext_dim(M, M, 1) == 0


def rigid_implies_gradable_check(M, rng):
    """Report (rigid, gradable) for a module; rigidity must imply gradability."""
    rigid = is_rigid(M)
    verdict = is_gradable(M, rng)
    return {"rigid": rigid, "gradable": bool(verdict), "verdict": verdict,
            "consistent": (not rigid) or bool(verdict)}


# ---------------------------------------------------------------------------
# exhaustive grading search (test oracle)
# ---------------------------------------------------------------------------

def _all_subspaces(F, n, k):
    """All k-dimensional subspaces of F^n as RREF row bases."""
    if k == 0:
        yield np.zeros((0, n), dtype=np.int64)
        return
    if k > n:
        return
    from itertools import combinations, product
    for pivots in combinations(range(n), k):
        free_positions = []
        for r, p in enumerate(pivots):
            for c in range(p + 1, n):
                if c not in pivots:
                    free_positions.append((r, c))
        for values in product(range(F.q), repeat=len(free_positions)):
            mat = np.zeros((k, n), dtype=np.int64)
            for r, p in enumerate(pivots):
                mat[r, p] = 1
            for (r, c), val in zip(free_positions, values):
                mat[r, c] = val
            yield mat


def _compositions(n, slots):
    if slots == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in _compositions(n - first, slots - 1):
            yield (first,) + rest


def brute_force_gradable(M, window=None):
    """Complete search for a grading: enumerate layered direct-sum
    decompositions of every vertex fiber and check generator compatibility.

    Exponential in the fiber dimensions; intended for small modules over small
    fields as an independent oracle."""
    A = M.algebra
    F = A.field
    n = M.total_dim
    if n == 0:
        return True
    W = window or n
    order = sorted(range(A.nvert), key=lambda v: -M.dims[v])
    gens_by_pair = {}
    for g in A.gens:
        gens_by_pair.setdefault((A.basis_src[g], A.basis_tgt[g]), []).append(g)

    def layer_ok(assign, u, v, g):
        dg = A.basis_deg[g]
        mat = M.mats[g]
        for j in range(W):
            U = assign[u][j]
            if U.shape[0] == 0:
                continue
            img = np.asarray(F.matmul(U, mat), dtype=np.int64)
            if not img.any():
                continue
            jt = j + dg
            if jt >= W:
                return False
            V = assign[v][jt]
            if V.shape[0] == 0:
                return False
            stacked = np.concatenate([V, img])
            if F.rank(stacked) > V.shape[0]:
                return False
        return True

    def check_pairs(assign, newly):
        for (u, v), gs in gens_by_pair.items():
            if newly not in (u, v):
                continue
            if assign.get(u) is None or assign.get(v) is None:
                continue
            for g in gs:
                if not layer_ok(assign, u, v, g):
                    return False
        return True

    def decompositions(nv):
        """All ordered direct-sum decompositions of F^nv into W layers."""
        for comp in _compositions(nv, W):
            yield from _decomp_rec(nv, comp, 0,
                                   np.zeros((0, nv), dtype=np.int64), [])

    def _decomp_rec(nv, comp, idx, span, acc):
        if idx == W:
            yield list(acc)
            return
        k = comp[idx]
        if k == 0:
            acc.append(np.zeros((0, nv), dtype=np.int64))
            yield from _decomp_rec(nv, comp, idx + 1, span, acc)
            acc.pop()
            return
        for U in _all_subspaces(F, nv, k):
            test = np.concatenate([span, U]) if span.shape[0] else U
            if F.rank(test) != span.shape[0] + k:
                continue
            acc.append(U)
            yield from _decomp_rec(nv, comp, idx + 1, test, acc)
            acc.pop()

    def dfs(pos, assign):
        if pos == len(order):
            return True
        v = order[pos]
        if M.dims[v] == 0:
            assign[v] = [np.zeros((0, 0), dtype=np.int64)] * W
            if check_pairs(assign, v) and dfs(pos + 1, assign):
                return True
            assign[v] = None
            return False
        for dec in decompositions(M.dims[v]):
            assign[v] = dec
            if check_pairs(assign, v) and dfs(pos + 1, assign):
                return True
        assign[v] = None
        return False

    return dfs(0, {v: None for v in range(A.nvert)})


# ---------------------------------------------------------------------------
# homogenization of maps between graded projectives
# ---------------------------------------------------------------------------

class GradedMap:
    """Formal matrix between sums of shifted graded projectives.

    src/tgt are lists of (vertex, shift); the morphism degree of the
    degree-d component of entry (i, j) is d + tgt_shift[i] - src_shift[j].
    """

    def __init__(self, algebra, src, tgt, fm):
        self.algebra = algebra
        self.src = list(src)
        self.tgt = list(tgt)
        self.fm = fm

    def degree_components(self):
        A = self.algebra
        comps = {}
        for (i, j), x in self.fm.entries.items():
            for b in np.nonzero(x)[0]:
                e = A.basis_deg[int(b)] + self.tgt[i][1] - self.src[j][1]
                ent = comps.setdefault(e, {})
                vec = ent.setdefault((i, j), A.zero())
                vec[int(b)] = x[int(b)]
        out = {}
        for e, entries in sorted(comps.items()):
            out[e] = FormalMat(A, [v for v, _ in self.src], [v for v, _ in self.tgt],
                               entries)
        return out


class StuckReport:
    def __init__(self, degree_pair, degree_history, residual):
        self.degree_pair = degree_pair
        self.degree_history = degree_history
        self.residual = residual

    def __repr__(self):
        return (f"StuckReport(degree_pair={self.degree_pair}, "
                f"history={self.degree_history})")


def _end_basis_of_degree(A, summands, delta):
    """Coordinate basis of morphism-degree-delta endomorphisms of a sum of
    shifted graded projectives: [(i, k, basis_index)] with an element in
    e_{w_i} A e_{w_k} of the right internal degree."""
    out = []
    for i, (wi, ti) in enumerate(summands):
        for k, (wk, tk) in enumerate(summands):
            d_needed = delta - ti + tk
            for b in A.pair_basis(wi, wk):
                if A.basis_deg[b] == d_needed:
                    out.append((i, k, b))
    return out


def homogenize_map(gm, max_steps=256):
    """Greedy homogenization: repeatedly kill the second-lowest degree part by
    solving f_d2 = f_d1 . r + s . f_d1 and replacing f by (1-s) f (1-r).

    Returns a homogeneous GradedMap or a StuckReport.  A stuck report is not a
    certificate of non-homogenizability."""
    A = gm.algebra
    F = A.field
    history = []
    cur = gm
    for _ in range(max_steps):
        comps = cur.degree_components()
        degs = sorted(comps)
        if len(degs) <= 1:
            return cur
        d1, d2 = degs[0], degs[1]
        history.append((d1, d2))
        delta = d2 - d1
        f1 = comps[d1]
        f2 = comps[d2]
        rbasis = _end_basis_of_degree(A, cur.tgt, delta)
        sbasis = _end_basis_of_degree(A, cur.src, delta)
        cols = []
        mats = []
        for (i, k, b) in rbasis:
            r = FormalMat(A, [v for v, _ in cur.tgt], [v for v, _ in cur.tgt],
                          {(i, k): A.unit_vector(b)})
            prod = f1.compose(r)     # f1 then r
            cols.append(_fm_flat(A, prod, cur.fm.src, cur.fm.tgt))
            mats.append(("r", r))
        for (i, k, b) in sbasis:
            s = FormalMat(A, [v for v, _ in cur.src], [v for v, _ in cur.src],
                          {(i, k): A.unit_vector(b)})
            prod = s.compose(f1)     # s then f1
            cols.append(_fm_flat(A, prod, cur.fm.src, cur.fm.tgt))
            mats.append(("s", s))
        target = _fm_flat(A, f2, cur.fm.src, cur.fm.tgt)
        if not cols:
            return StuckReport((d1, d2), history, f2)
        sol = F.solve(np.stack(cols, axis=1), target)
        if sol is None:
            return StuckReport((d1, d2), history, f2)
        r_total = FormalMat(A, [v for v, _ in cur.tgt], [v for v, _ in cur.tgt])
        s_total = FormalMat(A, [v for v, _ in cur.src], [v for v, _ in cur.src])
        for c, (kind, mat) in zip(sol[0], mats):
            if not c:
                continue
            scaled = mat.scale(int(c))
            if kind == "r":
                r_total = r_total.add(scaled)
            else:
                s_total = s_total.add(scaled)
        f = cur.fm
        new = f.add(f.compose(r_total).neg()).add(s_total.compose(f).neg()) \
               .add(s_total.compose(f.compose(r_total)))
        cur = GradedMap(A, cur.src, cur.tgt, new)
    raise GradingError("homogenization failed to terminate")


def _fm_flat(A, fm, src, tgt):
    out = np.zeros(len(tgt) * len(src) * A.dim, dtype=np.int64)
    for (i, j), x in fm.entries.items():
        off = (i * len(src) + j) * A.dim
        out[off: off + A.dim] = x
    return out


def graded_map_cokernel(gm):
    """Cokernel of a homogeneous graded map, as a GradedModule."""
    from .tilde import graded_cokernel
    comps = gm.degree_components()
    if len(comps) > 1:
        raise GradingError("cokernel grading needs a homogeneous map")
    return graded_cokernel(gm.algebra, gm.src, gm.tgt, gm.fm.entries)
