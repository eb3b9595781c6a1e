"""Finite-dimensional right modules over a based algebra.

A module is a vector space per vertex plus a matrix per algebra generator,
with rows indexing the source fiber: the right action of a generator g: u -> v
sends a row vector m in M_u to m @ mats[g] in M_v.  Actions of composite basis
elements are derived from the stored product expressions and memoized.

Decomposition into indecomposables works by exact idempotent splitting: the
minimal polynomial of an endomorphism with at least two coprime irreducible
factors yields an idempotent by CRT, which splits the module.  Over large
enough characteristic a Dickson trace-form radical plus a Frobenius
fixed-point count gives a deterministic indecomposability certificate; in
small characteristic (needed for the GF(5) test oracles) we fall back to
bounded sampling, which can never split a module with local endomorphism ring.
"""

from __future__ import annotations

import numpy as np
import sympy

from . import gf


class ModuleError(Exception):
    pass


class CharacteristicTooSmall(ModuleError):
    def __init__(self, needed):
        self.suggested_prime = int(sympy.nextprime(needed))
        super().__init__(
            f"field characteristic too small for the trace-form radical; "
            f"use a prime > {needed} (e.g. {self.suggested_prime})")


class Module:
    def __init__(self, algebra, dims, mats, check=False):
        self.algebra = algebra
        self.dims = [int(d) for d in dims]
        self.mats = {int(g): np.asarray(m, dtype=np.int64) for g, m in mats.items()}
        for g in algebra.gens:
            u, v = algebra.basis_src[g], algebra.basis_tgt[g]
            m = self.mats.get(g)
            if m is None:
                self.mats[g] = algebra.field.zeros(self.dims[u], self.dims[v])
            elif m.shape != (self.dims[u], self.dims[v]):
                raise ModuleError(
                    f"matrix for generator {algebra.labels[g]} has shape {m.shape}, "
                    f"expected {(self.dims[u], self.dims[v])}")
        self._action = {}
        if check:
            self.validate()

    @property
    def field(self):
        return self.algebra.field

    @property
    def total_dim(self):
        return sum(self.dims)

    def __repr__(self):
        return f"Module(dims={self.dims})"

    def action(self, idx):
        """Matrix of the basis element idx, M_src -> M_tgt."""
        idx = int(idx)
        if idx in self._action:
            return self._action[idx]
        A = self.algebra
        F = self.field
        u, v = A.basis_src[idx], A.basis_tgt[idx]
        if idx < A.nvert:
            out = F.eye(self.dims[idx])
        elif idx in self.mats:
            out = self.mats[idx]
        else:
            out = F.zeros(self.dims[u], self.dims[v])
            for coeff, i, j in A.expr[idx]:
                out = F.add(out, F.mul(coeff, F.matmul(self.action(i), self.action(j))))
            out = np.asarray(out, dtype=np.int64)
        self._action[idx] = out
        return out

    def act_element(self, x, a, b):
        """Matrix M_a -> M_b of an algebra element restricted to e_a . e_b."""
        F = self.field
        out = F.zeros(self.dims[a], self.dims[b])
        for i in np.nonzero(x)[0]:
            i = int(i)
            if self.algebra.basis_src[i] == a and self.algebra.basis_tgt[i] == b:
                out = F.add(out, F.mul(int(x[i]), self.action(i)))
        return np.asarray(out, dtype=np.int64)

    def validate(self):
        """Check the action respects the multiplication table exactly."""
        A, F = self.algebra, self.field
        pres = A.presentation
        if pres is not None:
            # quiver algebra: checking the defining relations suffices
            for rel in pres.relations:
                u = pres.quiver.arrow_src[rel[0][1][0]]
                v = pres.quiver.arrow_tgt[rel[0][1][-1]]
                acc = F.zeros(self.dims[u], self.dims[v])
                for coeff, mono in rel:
                    m = F.eye(self.dims[u])
                    for arrow in mono:
                        m = F.matmul(m, self.mats[self._arrow_gen(arrow)])
                    acc = F.add(acc, F.mul(coeff, m))
                if np.asarray(acc).any():
                    raise ModuleError("module does not satisfy the algebra relations")
            return
        for i in range(A.dim):
            for j in range(A.dim):
                if A.basis_tgt[i] != A.basis_src[j]:
                    continue
                lhs = F.matmul(self.action(i), self.action(j))
                rhs = F.zeros(self.dims[A.basis_src[i]], self.dims[A.basis_tgt[j]])
                for k, c in A.mult.get((i, j), {}).items():
                    rhs = F.add(rhs, F.mul(c, self.action(k)))
                if not np.array_equal(np.asarray(lhs), np.asarray(rhs)):
                    raise ModuleError(
                        f"action incompatible with product {A.labels[i]} * {A.labels[j]}")

    def _arrow_gen(self, arrow):
        # generator basis index of a quiver arrow (labels match arrow names)
        name = self.algebra.presentation.quiver.arrow_names[arrow]
        for g in self.algebra.gens:
            if self.algebra.labels[g] == name:
                return g
        raise ModuleError(f"arrow {name} is not a generator")


def zero_module(A):
    return Module(A, [0] * A.nvert, {})


def projective_module(A, v):
    """P_v = e_v A, basis the algebra basis elements with source v."""
    fibers = [[b for b in A.pair_basis(v, w)] for w in range(A.nvert)]
    index = [{b: k for k, b in enumerate(f)} for f in fibers]
    dims = [len(f) for f in fibers]
    F = A.field
    mats = {}
    for g in A.gens:
        u, w = A.basis_src[g], A.basis_tgt[g]
        m = F.zeros(dims[u], dims[w])
        for k, b in enumerate(fibers[u]):
            for t, c in A.mult.get((b, g), {}).items():
                m[k, index[w][t]] = c
        mats[g] = m
    return Module(A, dims, mats)


def simple_module(A, v):
    dims = [1 if w == v else 0 for w in range(A.nvert)]
    return Module(A, dims, {})


def dual_module(M, A2=None):
    """D(M): right module over the opposite algebra, on the dual spaces.

    Fibers keep their dimensions (dual bases in the same order); the action of
    a generator is the transpose of its action on M.  Applying twice gives
    back M on the nose.
    """
    A2 = A2 or M.algebra.op_algebra()
    return Module(A2, M.dims, {g: m.T.copy() for g, m in M.mats.items()})


def dual_module_map(phi, DM=None, DN=None):
    """D of a module map: D(N) -> D(M), matrices transposed."""
    DM = DM or dual_module(phi.src)
    DN = DN or dual_module(phi.tgt)
    return ModuleMap(DN, DM, [m.T.copy() for m in phi.mats])


def injective_module(A, v):
    """I_v = D(A e_v), realized as the dual of the opposite projective."""
    return dual_module(projective_module(A.op_algebra(), v), A)


def regular_module(A):
    return direct_sum([projective_module(A, v) for v in range(A.nvert)])


def direct_sum(mods):
    if not mods:
        raise ModuleError("empty direct sum needs an algebra")
    A = mods[0].algebra
    F = A.field
    dims = [sum(m.dims[v] for m in mods) for v in range(A.nvert)]
    mats = {}
    for g in A.gens:
        u, v = A.basis_src[g], A.basis_tgt[g]
        blocks = [m.mats[g] for m in mods]
        out = F.zeros(dims[u], dims[v])
        r = c = 0
        for m, blk in zip(mods, blocks):
            out[r:r + m.dims[u], c:c + m.dims[v]] = blk
            r += m.dims[u]
            c += m.dims[v]
        mats[g] = out
    return Module(A, dims, mats)


def conjugate(M, C):
    """The module with action C_u A_g C_v^{-1}; C: result -> M is an iso."""
    F = M.field
    Cinv = [F.inv_matrix(C[v]) if M.dims[v] else F.zeros(0, 0) for v in range(len(C))]
    mats = {}
    for g in M.algebra.gens:
        u, v = M.algebra.basis_src[g], M.algebra.basis_tgt[g]
        mats[g] = F.matmul(F.matmul(C[u], M.mats[g]), Cinv[v])
    return Module(M.algebra, M.dims, mats)


# -- module maps ------------------------------------------------------------

class ModuleMap:
    """A per-vertex family of matrices M_v -> N_v (need not intertwine; use
    is_hom to check)."""

    def __init__(self, src, tgt, mats):
        self.src = src
        self.tgt = tgt
        self.mats = [np.asarray(m, dtype=np.int64) for m in mats]

    def is_hom(self):
        A, F = self.src.algebra, self.src.field
        for g in A.gens:
            u, v = A.basis_src[g], A.basis_tgt[g]
            lhs = F.matmul(self.src.mats[g], self.mats[v])
            rhs = F.matmul(self.mats[u], self.tgt.mats[g])
            if not np.array_equal(np.asarray(lhs), np.asarray(rhs)):
                return False
        return True

    def is_invertible(self):
        F = self.src.field
        return all(self.src.dims[v] == self.tgt.dims[v]
                   and (self.src.dims[v] == 0 or F.is_invertible(self.mats[v]))
                   for v in range(len(self.mats)))

    def compose(self, other):
        """self then other."""
        F = self.src.field
        return ModuleMap(self.src, other.tgt,
                         [F.matmul(a, b) for a, b in zip(self.mats, other.mats)])

    def inverse(self):
        F = self.src.field
        return ModuleMap(self.tgt, self.src,
                         [F.inv_matrix(m) if m.shape[0] else m.T.copy() for m in self.mats])


def hom(M, N):
    """Basis of intertwiners M -> N as a list of ModuleMap.

    Commuting with the generators implies commuting with every basis element
    (products and the stored expressions), so only generator constraints enter
    the linear system.
    """
    if M.algebra is not N.algebra and M.algebra != N.algebra:
        raise ModuleError("hom over different algebras")
    A, F = M.algebra, M.field
    nv = A.nvert
    sizes = [M.dims[v] * N.dims[v] for v in range(nv)]
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    total = int(offsets[-1])
    rows = []
    for g in A.gens:
        u, v = A.basis_src[g], A.basis_tgt[g]
        neq = M.dims[u] * N.dims[v]
        if neq == 0:
            continue
        block = np.zeros((neq, total), dtype=np.int64)
        if sizes[v]:
            block[:, offsets[v]:offsets[v + 1]] = np.kron(M.mats[g], F.eye(N.dims[v]))
        if sizes[u]:
            block[:, offsets[u]:offsets[u + 1]] = F.sub(
                block[:, offsets[u]:offsets[u + 1]],
                np.kron(F.eye(M.dims[u]), N.mats[g].T))
        rows.append(block % F.p if F.m == 1 else block)
    if rows:
        system = np.concatenate(rows, axis=0)
        basis = F.nullspace(system)
    else:
        basis = F.eye(total)
    out = []
    for row in basis:
        mats = [row[offsets[v]:offsets[v + 1]].reshape(M.dims[v], N.dims[v])
                for v in range(nv)]
        out.append(ModuleMap(M, N, mats))
    return out


def hom_dim(M, N):
    return len(hom(M, N))


def _trace_pairing(F, homs):
    n = len(homs)
    G = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(i, n):
            t = 0
            for mv, nv in zip(homs[i].mats, homs[j].mats):
                if mv.shape[0] and mv.shape[1]:
                    t = F.add(t, np.trace(F.matmul(mv, nv)) % F.p if F.m == 1
                              else _tr(F, F.matmul(mv, nv)))
            G[i, j] = G[j, i] = t
    return G


def _tr(F, A):
    t = 0
    for k in range(min(A.shape)):
        t = F.add(t, int(A[k, k]))
    return int(t)


def end_radical(M):
    """Basis of Rad End(M) via the Dickson trace form.

    Requires p > max(dim End M, dim M); raises CharacteristicTooSmall with the
    minimal admissible prime otherwise.
    """
    E = hom(M, M)
    F = M.field
    needed = max(len(E), M.total_dim)
    if F.p <= needed:
        raise CharacteristicTooSmall(needed)
    G = _trace_pairing(F, E)
    rad_rows = F.nullspace(G)
    out = []
    for row in rad_rows:
        mats = [F.zeros(M.dims[v], M.dims[v]) for v in range(M.algebra.nvert)]
        for c, e in zip(row, E):
            if c:
                for v in range(len(mats)):
                    mats[v] = F.add(mats[v], F.mul(int(c), e.mats[v]))
        out.append(ModuleMap(M, M, [np.asarray(m, dtype=np.int64) for m in mats]))
    return out


# -- decomposition -----------------------------------------------------------

class Decomposition:
    """M = direct sum of indecomposables, with the change of basis realizing it.

    transform C satisfies: conjugate(M, C) is block diagonal with the summands
    in order; slices[k][v] is the row range of summand k in vertex fiber v.
    """

    def __init__(self, module, summands, transform, slices):
        self.module = module
        self.summands = summands
        self.transform = transform
        self.slices = slices

    def grouped(self, rng=None):
        """[(representative, multiplicity)] up to isomorphism."""
        groups = []
        for S in self.summands:
            for g in groups:
                if S.dims == g[0].dims and iso_indecomposable(S, g[0]) is not None:
                    g[1] += 1
                    break
            else:
                groups.append([S, 1])
        return [(g[0], g[1]) for g in groups]


def _min_poly_of_endo(F, e):
    polys = []
    for m in e.mats:
        if m.shape[0]:
            polys.append(gf.min_poly_of_matrix(F, m))
    out = np.array([1], dtype=np.int64)
    for f in polys:
        out = gf._poly_lcm(F, out, f)
    return out


def _crt_idempotent(F, minpoly, factors):
    """Polynomial P with P = 1 mod f1^m1 and P = 0 mod the rest."""
    f1 = gf.poly_trim(factors[0][0])
    for _ in range(factors[0][1] - 1):
        f1 = gf.poly_mul(F, f1, factors[0][0])
    rest = gf.poly_divmod(F, minpoly, f1)[0]
    # extended euclid: u*f1 + v*rest = 1
    r0, r1 = f1, rest
    s0, s1 = np.array([1], dtype=np.int64), np.array([0], dtype=np.int64)
    t0, t1 = np.array([0], dtype=np.int64), np.array([1], dtype=np.int64)
    while not gf.poly_is_zero(r1):
        q, r = gf.poly_divmod(F, r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, gf.poly_sub(F, s0, gf.poly_mul(F, q, s1))
        t0, t1 = t1, gf.poly_sub(F, t0, gf.poly_mul(F, q, t1))
    lead = F.inv(int(r0[-1]))
    v = gf.poly_scale(F, t0, lead)
    return gf.poly_divmod(F, gf.poly_mul(F, v, rest), minpoly)[1]


def _eval_poly_endo(F, M, poly, e):
    mats = []
    for v in range(M.algebra.nvert):
        n = M.dims[v]
        acc = F.zeros(n, n)
        for c in reversed(gf.poly_trim(poly)):
            acc = F.add(F.matmul(acc, e.mats[v]), F.mul(int(c), F.eye(n)))
        mats.append(np.asarray(acc, dtype=np.int64))
    return ModuleMap(M, M, mats)


def _split_by_idempotent(M, e):
    """Split M along an exact idempotent endomorphism e (not 0 or 1).

    Returns (summod_pair, transform) where transform stacks an image basis over
    a kernel basis per vertex.
    """
    F = M.field
    C = []
    imdims = []
    for v in range(M.algebra.nvert):
        ev = e.mats[v]
        n = M.dims[v]
        if n == 0:
            C.append(F.zeros(0, 0))
            imdims.append(0)
            continue
        R, piv = F.rref(ev)
        im = R[: len(piv)]
        ker = F.nullspace(ev.T)
        C.append(np.concatenate([im, ker], axis=0) if len(piv) + ker.shape[0] else F.zeros(0, 0))
        if C[-1].shape[0] != n or not F.is_invertible(C[-1]):
            raise ModuleError("idempotent split produced a singular basis")
        imdims.append(len(piv))
    conj = conjugate(M, C)
    top = {}
    bot = {}
    for g, mat in conj.mats.items():
        u, v = M.algebra.basis_src[g], M.algebra.basis_tgt[g]
        top[g] = mat[: imdims[u], : imdims[v]]
        bot[g] = mat[imdims[u]:, imdims[v]:]
    M1 = Module(M.algebra, imdims, top)
    M2 = Module(M.algebra, [M.dims[v] - imdims[v] for v in range(len(imdims))], bot)
    return (M1, M2, imdims, C)


def _find_split(M, rng, tries=64):
    """An exact nontrivial idempotent endomorphism, or None."""
    E = hom(M, M)
    F = M.field
    if len(E) <= 1:
        return None
    candidates = list(E)
    for a in range(min(len(E), 6)):
        for b in range(min(len(E), 6)):
            candidates.append(E[a].compose(E[b]))
    tried = 0
    while tried < tries:
        if tried < len(candidates):
            z = candidates[tried]
        else:
            coeffs = rng.integers(0, F.q, size=len(E))
            mats = [F.zeros(M.dims[v], M.dims[v]) for v in range(M.algebra.nvert)]
            for c, e in zip(coeffs, E):
                if c:
                    for v in range(len(mats)):
                        mats[v] = F.add(mats[v], F.mul(int(c), e.mats[v]))
            z = ModuleMap(M, M, [np.asarray(m, dtype=np.int64) for m in mats])
        tried += 1
        mp = _min_poly_of_endo(F, z)
        if gf.poly_deg(mp) < 1:
            continue
        _, factors = gf.factor_poly(F, mp)
        if len(factors) < 2:
            continue
        P = _crt_idempotent(F, mp, factors)
        e = _eval_poly_endo(F, M, P, z)
        ee = ModuleMap(M, M, [F.matmul(m, m) for m in e.mats])
        if not all(np.array_equal(a, b) for a, b in zip(e.mats, ee.mats)):
            continue
        rankim = sum(F.rank(m) for m in e.mats if m.shape[0])
        if rankim == 0 or rankim == M.total_dim:
            continue
        return e
    return None


def _flatten_endo(h):
    return np.concatenate([m.reshape(-1) for m in h.mats] or
                          [np.zeros(0, dtype=np.int64)])


def _is_local_deterministic(M):
    """End(M) local?  Deterministic via the Dickson radical.

    True/False, or None when the characteristic is too small to decide this way.
    """
    F = M.field
    try:
        rad = end_radical(M)
    except CharacteristicTooSmall:
        return None
    E = hom(M, M)
    if len(E) - len(rad) == 1:
        return True
    comp = _quotient_structure(F, E, rad)
    if comp is None:
        return False  # non-commutative semisimple quotient: not a division ring
    k, mulmat, one = comp
    # Frobenius x -> x^q on the commutative semisimple quotient; its fixed
    # space has dimension = number of simple (field) factors
    frob = np.zeros((k, k), dtype=np.int64)
    for i in range(k):
        x = np.zeros(k, dtype=np.int64)
        x[i] = 1
        frob[i] = _quotient_pow(F, mulmat, one, x, F.q)
    fixed = F.nullspace(np.asarray(F.sub(frob.T, F.eye(k)), dtype=np.int64))
    return fixed.shape[0] == 1


def _quotient_structure(F, E, rad):
    """Structure constants of End/Rad; None if it is not commutative.

    Returns (dim, mulmat, identity_coords).
    """
    width = _flatten_endo(E[0]).shape[0]
    radflat = (np.stack([_flatten_endo(h) for h in rad]) if rad
               else np.zeros((0, width), dtype=np.int64))
    reps = []
    span = radflat
    rank = F.rank(span)
    for i, h in enumerate(E):
        row = _flatten_endo(h)
        test = np.concatenate([span, row[None, :]])
        r = F.rank(test)
        if r > rank:
            reps.append(i)
            span, rank = test, r
    basis_maps = [E[i] for i in reps]
    k = len(basis_maps)
    allrows = np.concatenate([radflat, np.stack([_flatten_endo(h) for h in basis_maps])])

    def coords_mod_rad(h):
        sol = F.solve(allrows.T, _flatten_endo(h))
        if sol is None:
            raise ModuleError("endomorphism outside its own span")
        return sol[0][radflat.shape[0]:]

    mulmat = np.zeros((k, k, k), dtype=np.int64)
    for i in range(k):
        for j in range(k):
            mulmat[i, j] = coords_mod_rad(basis_maps[i].compose(basis_maps[j]))
    for i in range(k):
        for j in range(i + 1, k):
            if not np.array_equal(mulmat[i, j], mulmat[j, i]):
                return None
    M = E[0].src
    identity = ModuleMap(M, M, [F.eye(d) for d in M.dims])
    return k, mulmat, coords_mod_rad(identity)


def _quotient_pow(F, mulmat, one, x, e):
    k = mulmat.shape[0]

    def qmul(a, b):
        out = np.zeros(k, dtype=np.int64)
        for i in np.nonzero(a)[0]:
            for j in np.nonzero(b)[0]:
                out = F.add(out, F.mul(F.mul(int(a[i]), int(b[j])), mulmat[i, j]))
        return np.asarray(out, dtype=np.int64)

    result = one.copy()
    base = x
    e = int(e)
    while e:
        if e & 1:
            result = qmul(result, base)
        base = qmul(base, base)
        e >>= 1
    return result


def decompose(M, rng):
    """Direct-sum decomposition into indecomposables, with explicit transform."""
    A = M.algebra
    F = M.field
    if M.total_dim == 0:
        return Decomposition(M, [], [F.eye(0) for _ in range(A.nvert)], [])

    def rec(mod):
        local = _is_local_deterministic(mod)
        if local is True:
            return None
        e = _find_split(mod, rng)
        if e is None:
            if local is False:
                raise ModuleError("decomposable module resisted idempotent sampling")
            return None
        return _split_by_idempotent(mod, e)

    summands = []
    slices = []
    transforms = [F.eye(M.dims[v]) for v in range(A.nvert)]

    stack = [(M, [(v, 0, M.dims[v]) for v in range(A.nvert)])]
    # process as a tree, accumulating the global change of basis
    def work(mod, ranges):
        split = rec(mod)
        if split is None:
            summands.append(mod)
            slices.append(ranges)
            return
        M1, M2, imdims, C = split
        # apply C into the global transform at the given ranges
        for v, (vv, lo, hi) in enumerate(ranges):
            if hi > lo:
                transforms[vv][lo:hi] = F.matmul(C[v], transforms[vv][lo:hi])
        r1 = [(vv, lo, lo + imdims[v]) for v, (vv, lo, hi) in enumerate(ranges)]
        r2 = [(vv, lo + imdims[v], hi) for v, (vv, lo, hi) in enumerate(ranges)]
        work(M1, r1)
        work(M2, r2)

    work(M, [(v, 0, M.dims[v]) for v in range(A.nvert)])
    slice_out = [[(lo, hi) for (_, lo, hi) in rng_] for rng_ in slices]
    return Decomposition(M, summands, transforms, slice_out)


def iso_indecomposable(M, N):
    """Isomorphism witness between indecomposables, or None.

    Two indecomposables are isomorphic iff some basis element of their hom
    space is invertible: non-invertible homs form a proper subspace, and a
    proper subspace cannot contain a full basis.
    """
    if M.dims != N.dims:
        return None
    for h in hom(M, N):
        if h.is_invertible():
            return h
    return None


class IsoVerdict:
    def __init__(self, isomorphic, witness=None, reason=None, field=None):
        self.isomorphic = isomorphic
        self.witness = witness
        self.reason = reason
        self.field = field

    def __bool__(self):
        return self.isomorphic


def is_isomorphic(M, N, rng):
    """Krull-Schmidt isomorphism test with a re-verified invertible witness."""
    F = M.field
    if M.dims != N.dims:
        return IsoVerdict(False, reason="dimension vectors differ", field=F)
    if M.total_dim == 0:
        return IsoVerdict(True, witness=ModuleMap(M, N, [F.zeros(0, 0)] * M.algebra.nvert),
                          field=F)
    DM = decompose(M, rng)
    DN = decompose(N, rng)
    if len(DM.summands) != len(DN.summands):
        return IsoVerdict(False, reason="number of indecomposable summands differs",
                          field=F)
    unused = list(range(len(DN.summands)))
    pairing = []
    for i, S in enumerate(DM.summands):
        found = None
        for j in unused:
            w = iso_indecomposable(S, DN.summands[j])
            if w is not None:
                found = (j, w)
                break
        if found is None:
            return IsoVerdict(False,
                              reason=f"summand {i} (dims {S.dims}) has no partner",
                              field=F)
        unused.remove(found[0])
        pairing.append((i, found[0], found[1]))
    # assemble the global witness: C_M^{-1} . (block maps) . C_N
    nv = M.algebra.nvert
    block = [F.zeros(M.dims[v], N.dims[v]) for v in range(nv)]
    for i, j, w in pairing:
        for v in range(nv):
            lo_m, hi_m = DM.slices[i][v]
            lo_n, hi_n = DN.slices[j][v]
            if hi_m > lo_m:
                block[v][lo_m:hi_m, lo_n:hi_n] = w.mats[v]
    mats = []
    for v in range(nv):
        if M.dims[v] == 0:
            mats.append(F.zeros(0, 0))
            continue
        cm_inv = F.inv_matrix(DM.transform[v])
        mats.append(F.matmul(F.matmul(cm_inv, block[v]), DN.transform[v]))
    witness = ModuleMap(M, N, mats)
    if not (witness.is_hom() and witness.is_invertible()):
        raise ModuleError("assembled isomorphism witness failed re-verification")
    return IsoVerdict(True, witness=witness, field=F)


# -- submodules, quotients, kernels ------------------------------------------

def radical_rows(M):
    """Per-vertex row bases of M rad(A) (the radical of the module)."""
    A, F = M.algebra, M.field
    rows = [np.zeros((0, M.dims[v]), dtype=np.int64) for v in range(A.nvert)]
    for g in A.gens:
        v = A.basis_tgt[g]
        if M.dims[v] == 0 or M.dims[A.basis_src[g]] == 0:
            continue
        rows[v] = np.concatenate([rows[v], M.mats[g]])
    out = []
    for v in range(A.nvert):
        R, piv = F.rref(rows[v])
        out.append(R[: len(piv)])
    return out


def top_dims(M):
    rad = radical_rows(M)
    return [M.dims[v] - rad[v].shape[0] for v in range(M.algebra.nvert)]


def kernel_module(phi):
    """Kernel of a module map, with the inclusion back into the source."""
    M = phi.src
    A, F = M.algebra, M.field
    kbasis = []
    for v in range(A.nvert):
        if M.dims[v] == 0:
            kbasis.append(np.zeros((0, 0), dtype=np.int64))
        else:
            kbasis.append(F.nullspace(phi.mats[v].T))
    dims = [k.shape[0] for k in kbasis]
    mats = {}
    for g in A.gens:
        u, v = A.basis_src[g], A.basis_tgt[g]
        if dims[u] == 0 or dims[v] == 0:
            mats[g] = F.zeros(dims[u], dims[v])
            continue
        img = F.matmul(kbasis[u], M.mats[g])
        sol = F.solve(kbasis[v].T, img.T)
        if sol is None:
            raise ModuleError("kernel is not action-stable (map is not a hom?)")
        mats[g] = sol[0].T
    K = Module(A, dims, mats)
    incl_mats = []
    for v, k in enumerate(kbasis):
        incl_mats.append(k if k.shape[1] == M.dims[v]
                         else np.zeros((dims[v], M.dims[v]), dtype=np.int64))
    return K, ModuleMap(K, M, incl_mats)


def image_rows(phi):
    F = phi.src.field
    out = []
    for v, m in enumerate(phi.mats):
        R, piv = F.rref(m)
        out.append(R[: len(piv)])
    return out


def quotient_module(M, subrows):
    """M / (submodule spanned per vertex by subrows); returns (Q, projection)."""
    A, F = M.algebra, M.field
    C = []
    subdims = []
    for v in range(A.nvert):
        rows = subrows[v]
        n = M.dims[v]
        R, piv = F.rref(rows) if rows.shape[0] else (rows, [])
        sub = R[: len(piv)]
        comp_idx = [c for c in range(n) if c not in piv]
        comp = np.zeros((len(comp_idx), n), dtype=np.int64)
        for k, c in enumerate(comp_idx):
            comp[k, c] = 1
        C.append(np.concatenate([sub, comp]) if n else F.zeros(0, 0))
        subdims.append(sub.shape[0])
    for v in range(A.nvert):
        if M.dims[v] and not F.is_invertible(C[v]):
            raise ModuleError("submodule basis completion failed")
    conj = conjugate(M, C)
    qdims = [M.dims[v] - subdims[v] for v in range(A.nvert)]
    mats = {}
    for g in A.gens:
        u, v = A.basis_src[g], A.basis_tgt[g]
        if conj.mats[g][: subdims[u], subdims[v]:].any():
            raise ModuleError("quotient by rows that do not span a submodule")
        mats[g] = conj.mats[g][subdims[u]:, subdims[v]:]
    Q = Module(A, qdims, mats)
    proj_mats = []
    for v in range(A.nvert):
        if M.dims[v] == 0:
            proj_mats.append(F.zeros(0, qdims[v]))
            continue
        cinv = F.inv_matrix(C[v])
        proj_mats.append(cinv[:, subdims[v]:])
    return Q, ModuleMap(M, Q, proj_mats)


def cokernel(phi):
    return quotient_module(phi.tgt, image_rows(phi))


def embed_module(M, A2, embed):
    """The same module over the field-changed algebra A2."""
    mats = {g: embed(m) for g, m in M.mats.items()}
    return Module(A2, M.dims, mats)
