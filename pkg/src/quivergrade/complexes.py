"""Bounded complexes of projectives, Nakayama and Serre functors, derived Hom.

A :class:`Complex` is formal: each term is a list of vertex ids (a direct sum
of indecomposable projectives or injectives) and each differential a
:class:`~quivergrade.homology.FormalMat`.  The Nakayama functor and its
inverse just flip the kind flag; duality flips the kind, negates degrees and
passes to the opposite algebra.  The one genuinely computational step is
replacing a complex of modules by a quasi-isomorphic complex of projectives,
done by a mapping-cone recursion whose lifts are null-homotopies against
acyclic cones, solved degree by degree (the obstruction always lands in an
exact spot, so no backtracking is needed).

Complex isomorphism is decided by encoding bounded complexes as modules over
an auxiliary algebra (the base algebra tensored with a linear quiver modulo
paths of length two) and reusing the Krull-Schmidt module machinery.
"""

from __future__ import annotations

import numpy as np

from . import modules as md
from .algebra import (AlgebraError, AlgebraPresentation, GlobalDimensionTooLarge,
                      Quiver)
from .homology import (FormalMat, _formal_from_map_into_projectives,
                       min_proj_resolution, structure_module)


class ComplexError(Exception):
    pass


class Complex:
    """Formal bounded complex of projectives (kind='proj') or injectives."""

    def __init__(self, algebra, kind, terms, diffs):
        self.algebra = algebra
        self.kind = kind
        self.terms = {int(s): list(v) for s, v in terms.items() if v}
        self.diffs = {int(s): d for s, d in diffs.items()
                      if s in self.terms and (s + 1) in self.terms and not d.is_zero()}
        self._terms_cache = {}

    def degrees(self):
        return sorted(self.terms)

    def is_zero(self):
        return not self.terms

    def term_verts(self, s):
        return self.terms.get(s, [])

    def diff(self, s):
        src = self.term_verts(s)
        tgt = self.term_verts(s + 1)
        if s in self.diffs:
            return self.diffs[s]
        return FormalMat(self.algebra, src, tgt)

    def term_module(self, s):
        if s not in self._terms_cache:
            verts = self.term_verts(s)
            mods = [structure_module(self.algebra, v, self.kind) for v in verts]
            self._terms_cache[s] = (md.direct_sum(mods) if mods
                                    else md.zero_module(self.algebra))
        return self._terms_cache[s]

    def dims_signature(self):
        """Per-degree sorted summand lists; an iso invariant for prefiltering."""
        return {s: sorted(v) for s, v in self.terms.items()}

    def total_dim(self):
        return sum(self.term_module(s).total_dim for s in self.terms)

    def check(self):
        for s in self.degrees():
            d1 = self.diffs.get(s)
            d2 = self.diffs.get(s + 1)
            if d1 is not None and d2 is not None:
                if not d1.compose(d2).is_zero():
                    raise ComplexError(f"d^2 != 0 at degree {s}")

    def shift(self, n):
        """C[n]^s = C^{n+s}; differentials pick up the sign (-1)^n."""
        n = int(n)
        terms = {s - n: v for s, v in self.terms.items()}
        sign_flip = n % 2 == 1
        diffs = {}
        for s, dmat in self.diffs.items():
            diffs[s - n] = dmat.neg() if sign_flip else dmat.copy()
        return Complex(self.algebra, self.kind, terms, diffs)

    def nakayama_flip(self):
        """Apply the Nakayama functor (or its inverse) termwise: P_i <-> I_i,
        same formal differentials."""
        kind = "inj" if self.kind == "proj" else "proj"
        return Complex(self.algebra, kind, dict(self.terms),
                       {s: d.copy() for s, d in self.diffs.items()})

    def dual(self):
        """D(C) over the opposite algebra: degrees negated, kind flipped,
        formal entries reindexed (contravariance)."""
        Aop = self.algebra.op_algebra()
        kind = "inj" if self.kind == "proj" else "proj"
        terms = {-s: list(v) for s, v in self.terms.items()}
        diffs = {}
        for s, dmat in self.diffs.items():
            # dual of d^s: C^s -> C^{s+1} is D(C)^{-s-1} -> D(C)^{-s}
            entries = {(j, i): x.copy() for (i, j), x in dmat.entries.items()}
            diffs[-s - 1] = FormalMat(Aop, dmat.tgt, dmat.src, entries)
        return Complex(Aop, kind, terms, diffs)

    def direct_sum(self, other):
        terms = {}
        diffs = {}
        for s in set(self.terms) | set(other.terms):
            terms[s] = self.term_verts(s) + other.term_verts(s)
        for s in sorted(terms):
            if (s + 1) not in terms:
                continue
            a, b = self.diff(s), other.diff(s)
            n1, m1 = len(self.term_verts(s)), len(self.term_verts(s + 1))
            entries = {k: v.copy() for k, v in a.entries.items()}
            for (i, j), x in b.entries.items():
                entries[(i + m1, j + n1)] = x.copy()
            diffs[s] = FormalMat(self.algebra, terms[s], terms[s + 1], entries)
        return Complex(self.algebra, self.kind, terms, diffs)

    def copy(self):
        return Complex(self.algebra, self.kind, dict(self.terms),
                       {s: d.copy() for s, d in self.diffs.items()})


def stalk_complex(algebra, verts, degree=0, kind="proj"):
    return Complex(algebra, kind, {degree: list(verts)}, {})


def algebra_complex(A):
    """The regular module as a stalk complex of projectives in degree 0."""
    return stalk_complex(A, list(range(A.nvert)))


class ChainMap:
    """Chain map between formal complexes, stored degreewise as explicit
    module maps between the term modules."""

    def __init__(self, src, tgt, comps):
        self.src = src
        self.tgt = tgt
        self.comps = {int(s): m for s, m in comps.items()}

    def comp(self, s):
        if s in self.comps:
            return self.comps[s]
        Ms, Mt = self.src.term_module(s), self.tgt.term_module(s)
        return md.ModuleMap(Ms, Mt, [np.zeros((Ms.dims[v], Mt.dims[v]), dtype=np.int64)
                                     for v in range(self.src.algebra.nvert)])

    def check(self):
        F = self.src.algebra.field
        for s in set(self.src.terms) | set(self.tgt.terms):
            lhs = _compose_mm(self.comp(s), _fm_to_mm(self.tgt, s))
            rhs = _compose_mm(_fm_to_mm(self.src, s), self.comp(s + 1))
            for a, b in zip(lhs.mats, rhs.mats):
                if not np.array_equal(a, b):
                    raise ComplexError(f"chain square fails at degree {s}")

    def compose(self, other):
        """self then other."""
        comps = {}
        for s in set(self.comps) | set(other.comps):
            comps[s] = _compose_mm(self.comp(s), other.comp(s))
        return ChainMap(self.src, other.tgt, comps)


def _fm_to_mm(C, s):
    """Differential of C at s as an explicit ModuleMap (cached)."""
    cache = getattr(C, "_dmm_cache", None)
    if cache is None:
        cache = C._dmm_cache = {}
    if s not in cache:
        fm = C.diff(s)
        mm = fm.to_module_map(kind=C.kind)
        # align with the cached term modules
        cache[s] = md.ModuleMap(C.term_module(s), C.term_module(s + 1), mm.mats)
    return cache[s]


def _compose_mm(f, g):
    F = f.src.field
    return md.ModuleMap(f.src, g.tgt, [F.matmul(a, b) for a, b in zip(f.mats, g.mats)])


def formal_chain_map(src, tgt, fms):
    """ChainMap from degreewise formal matrices, keeping the formal data."""
    comps = {}
    for s, fm in fms.items():
        mm = fm.to_module_map(kind=src.kind)
        comps[s] = md.ModuleMap(src.term_module(s), tgt.term_module(s), mm.mats)
    cm = ChainMap(src, tgt, comps)
    cm.formal = {s: fm for s, fm in fms.items()}
    return cm


# ---------------------------------------------------------------------------
# explicit complexes of modules
# ---------------------------------------------------------------------------

class ModComplex:
    """Bounded complex of explicit modules and module maps."""

    def __init__(self, algebra, terms, diffs):
        self.algebra = algebra
        self.terms = {int(s): m for s, m in terms.items() if m.total_dim}
        self.diffs = {int(s): d for s, d in diffs.items()
                      if s in self.terms and s + 1 in self.terms}

    def degrees(self):
        return sorted(self.terms)

    def term(self, s):
        return self.terms.get(s)

    def diff_map(self, s):
        if s in self.diffs:
            return self.diffs[s]
        Ms = self.terms.get(s) or md.zero_module(self.algebra)
        Mt = self.terms.get(s + 1) or md.zero_module(self.algebra)
        F = self.algebra.field
        return md.ModuleMap(Ms, Mt, [F.zeros(Ms.dims[v], Mt.dims[v])
                                     for v in range(self.algebra.nvert)])

    def homology_dims(self):
        F = self.algebra.field
        out = {}
        degs = self.degrees()
        if not degs:
            return out
        for s in range(min(degs), max(degs) + 1):
            n = self.terms[s].total_dim if s in self.terms else 0
            rk_out = _map_rank(F, self.diffs.get(s))
            rk_in = _map_rank(F, self.diffs.get(s - 1))
            h = n - rk_out - rk_in
            if h:
                out[s] = h
        return out


def _map_rank(F, phi):
    if phi is None:
        return 0
    return sum(F.rank(m) for m in phi.mats if m.shape[0] and m.shape[1])


def to_mod_complex(C):
    """Explicit form of a formal complex."""
    terms = {s: C.term_module(s) for s in C.terms}
    diffs = {s: _fm_to_mm(C, s) for s in C.diffs}
    return ModComplex(C.algebra, terms, diffs)


def dual_mod_complex(X):
    """D of an explicit complex, over the opposite algebra."""
    Aop = X.algebra.op_algebra()
    terms = {-s: md.dual_module(m, Aop) for s, m in X.terms.items()}
    diffs = {}
    for s, phi in X.diffs.items():
        diffs[-s - 1] = md.ModuleMap(terms[-s - 1], terms[-s],
                                     [m.T.copy() for m in phi.mats])
    return ModComplex(Aop, terms, diffs)


# ---------------------------------------------------------------------------
# hom spaces with projective source, and the degreewise lift solver
# ---------------------------------------------------------------------------

def yoneda_hom_basis(A, src_verts, N):
    """Basis of Hom(sum_j P_{v_j}, N) by Yoneda: one map per summand and basis
    vector of the corresponding fiber of N."""
    F = A.field
    mods = [structure_module(A, v, "proj") for v in src_verts]
    P = md.direct_sum(mods) if mods else md.zero_module(A)
    from .homology import _offsets
    offs = _offsets(mods, A.nvert)
    out = []
    for j, v in enumerate(src_verts):
        for k in range(N.dims[v]):
            mats = [F.zeros(P.dims[z], N.dims[z]) for z in range(A.nvert)]
            for z in range(A.nvert):
                fib = A.pair_basis(v, z)
                for r, b in enumerate(fib):
                    row = N.action(b)[k] if N.dims[z] else None
                    if row is not None:
                        mats[z][offs[j][z] + r] = row
            out.append(md.ModuleMap(P, N, [np.asarray(m, dtype=np.int64) for m in mats]))
    return out


def _null_homotopy(Q, u_comps, Z):
    """Null-homotopy of a chain map u: Q -> Z, where Q is a formal complex of
    projectives and Z an acyclic ModComplex.

    Returns {s: h^s in Hom(Q^s, Z^{s-1})} with u = dh + hd; raises if Z is not
    acyclic enough for some step (cannot happen when Z is acyclic).
    """
    A = Q.algebra
    F = A.field
    h = {}
    for s in sorted(set(Q.terms), reverse=True):
        Qs = Q.term_module(s)
        Zprev = Z.term(s - 1) or md.zero_module(A)
        rhs = [m.copy() for m in u_comps[s].mats] if s in u_comps else \
            [F.zeros(Qs.dims[v], (Z.term(s) or md.zero_module(A)).dims[v])
             for v in range(A.nvert)]
        # rhs <- u^s - h^{s+1} . d_Q^s
        if (s + 1) in h:
            dq = _fm_to_mm(Q, s)
            corr = _compose_mm(dq, h[s + 1])
            rhs = [np.asarray(F.sub(a, b), dtype=np.int64)
                   for a, b in zip(rhs, corr.mats)]
        # solve d_Z^{s-1} . h^s = rhs, i.e. h^s then d
        dz = Z.diff_map(s - 1)
        basis = yoneda_hom_basis(A, Q.term_verts(s), Zprev)
        Zs = Z.term(s) or md.zero_module(A)
        if not basis:
            if any(np.asarray(m).any() for m in rhs):
                raise ComplexError("null-homotopy obstruction at an empty degree")
            h[s] = md.ModuleMap(Qs, Zprev, [F.zeros(Qs.dims[v], Zprev.dims[v])
                                            for v in range(A.nvert)])
            continue
        cols = []
        for hb in basis:
            comp = _compose_mm(hb, dz)
            cols.append(np.concatenate([m.reshape(-1) for m in comp.mats]))
        system = np.stack(cols, axis=1)
        rhsv = np.concatenate([np.asarray(m, dtype=np.int64).reshape(-1) for m in rhs])
        sol = F.solve(system, rhsv)
        if sol is None:
            raise ComplexError("null-homotopy system unsolvable (complex not acyclic?)")
        coeffs = sol[0]
        mats = [F.zeros(Qs.dims[v], Zprev.dims[v]) for v in range(A.nvert)]
        for c, hb in zip(coeffs, basis):
            if c:
                for v in range(A.nvert):
                    mats[v] = F.add(mats[v], F.mul(int(c), hb.mats[v]))
        h[s] = md.ModuleMap(Qs, Zprev, [np.asarray(m, dtype=np.int64) for m in mats])
    return h


def _cone_mod(phi_comps, P, X):
    """Mapping cone of a quasi-iso phi: P -> X (P formal proj, X ModComplex),
    as an explicit complex: cone^s = P^{s+1} (+) X^s.  Acyclic when phi is a
    quasi-isomorphism."""
    A = P.algebra
    F = A.field
    degs = set()
    for s in P.terms:
        degs.add(s - 1)
    degs |= set(X.terms)
    terms = {}
    pparts = {}
    for s in degs:
        Pm = P.term_module(s + 1)
        Xm = X.term(s) or md.zero_module(A)
        pparts[s] = Pm.dims
        if Pm.total_dim or Xm.total_dim:
            terms[s] = md.direct_sum([Pm, Xm])
    diffs = {}
    for s in terms:
        if (s + 1) not in terms:
            continue
        Pm, Xm = P.term_module(s + 1), X.term(s) or md.zero_module(A)
        Pm2, Xm2 = P.term_module(s + 2), X.term(s + 1) or md.zero_module(A)
        dP = _fm_to_mm(P, s + 1)
        dX = X.diff_map(s)
        phi = phi_comps.get(s + 1)
        mats = []
        for v in range(A.nvert):
            m = F.zeros(Pm.dims[v] + Xm.dims[v], Pm2.dims[v] + Xm2.dims[v])
            if Pm.dims[v] and Pm2.dims[v]:
                m[: Pm.dims[v], : Pm2.dims[v]] = F.neg(dP.mats[v])
            if Pm.dims[v] and Xm2.dims[v] and phi is not None:
                m[: Pm.dims[v], Pm2.dims[v]:] = phi.mats[v]
            if Xm.dims[v] and Xm2.dims[v]:
                m[Pm.dims[v]:, Pm2.dims[v]:] = dX.mats[v]
            mats.append(m)
        diffs[s] = md.ModuleMap(terms[s], terms[s + 1], mats)
    return ModComplex(A, terms, diffs)


def lift_through_qis(g_comps, Q, phi_comps, P, X):
    """Chain map what: Q -> P with phi . what ~ g, plus the homotopy.

    Q, P are formal complexes of projectives; X a ModComplex; phi: P -> X a
    quasi-iso given by components; g: Q -> X by components.  Returns
    (what: {s: FormalMat}, h: {s: ModuleMap Q^s -> X^{s-1}}).
    """
    A = Q.algebra
    Z = _cone_mod(phi_comps, P, X)
    # u = (0, g): Q -> cone
    u = {}
    F = A.field
    for s in Q.terms:
        Qs = Q.term_module(s)
        Pm = P.term_module(s + 1)
        Xm = X.term(s) or md.zero_module(A)
        mats = []
        for v in range(A.nvert):
            m = F.zeros(Qs.dims[v], Pm.dims[v] + Xm.dims[v])
            gs = g_comps.get(s)
            if gs is not None and Qs.dims[v] and Xm.dims[v]:
                m[:, Pm.dims[v]:] = gs.mats[v]
            mats.append(m)
        u[s] = md.ModuleMap(Qs, Z.term(s) or md.zero_module(A), mats)
    H = _null_homotopy(Q, u, Z)
    what = {}
    h = {}
    for s, Hs in H.items():
        Qs = Q.term_module(s)
        Pm = P.term_module(s)
        Xm = X.term(s - 1) or md.zero_module(A)
        wmats = []
        hmats = []
        for v in range(A.nvert):
            wmats.append(Hs.mats[v][:, : Pm.dims[v]].copy())
            hmats.append(Hs.mats[v][:, Pm.dims[v]:].copy())
        wmap = md.ModuleMap(Qs, Pm, wmats)
        if any(m.any() for m in wmats) or Pm.total_dim:
            what[s] = _formal_from_map_into_projectives(
                A, Q.term_verts(s), P.term_verts(s), wmap)
        h[s] = md.ModuleMap(Qs, Xm, hmats)
    return what, h


# ---------------------------------------------------------------------------
# resolving complexes by projectives
# ---------------------------------------------------------------------------

def resolve_module(M, cap=16, at_degree=0):
    """(formal proj complex quasi-iso to the stalk M[at -at_degree], qis comps)."""
    res = min_proj_resolution(M, cap)
    if not res.complete:
        raise GlobalDimensionTooLarge(f"resolution exceeds cap {cap}")
    terms = {}
    diffs = {}
    for t, verts in enumerate(res.terms):
        terms[at_degree - t] = verts
    for t, fm in res.diffs.items():
        # fm: P_t -> P_{t-1} is the differential at degree (at_degree - t)
        diffs[at_degree - t] = fm
    C = Complex(M.algebra, "proj", terms, diffs)
    qis = {at_degree: md.ModuleMap(C.term_module(at_degree), M, res.augmentation.mats)}
    return C, qis


def resolve_complex(X, cap=16):
    """Replace a bounded ModComplex by a quasi-isomorphic formal complex of
    projectives; returns (P, qis_components)."""
    A = X.algebra
    degs = X.degrees()
    if not degs:
        return Complex(A, "proj", {}, {}), {}
    a = degs[0]
    if len(degs) == 1:
        return resolve_module(X.term(a), cap=cap, at_degree=a)
    Xp = ModComplex(A, {s: m for s, m in X.terms.items() if s > a},
                    {s: d for s, d in X.diffs.items() if s > a})
    Pp, phi_p = resolve_complex(Xp, cap=cap)
    Q0, alpha = resolve_module(X.term(a), cap=cap, at_degree=a)
    Qshift = Q0.shift(-1)      # ends at degree a + 1
    # g: Qshift -> Xp is (d_X^a . alpha) placed at degree a + 1
    d_a = X.diffs.get(a)
    g = {}
    if d_a is not None:
        aug = alpha[a]
        g[a + 1] = md.ModuleMap(Qshift.term_module(a + 1), Xp.term(a + 1),
                                [A.field.matmul(m1, m2)
                                 for m1, m2 in zip(aug.mats, d_a.mats)])
    what, h = lift_through_qis(g, Qshift, phi_p, Pp, Xp)
    # P = cone(what): P^s = Qshift^{s+1} (+) Pp^s = Q0^s (+) Pp^s
    terms = {}
    for s in set(Q0.terms) | set(Pp.terms):
        terms[s] = Q0.term_verts(s) + Pp.term_verts(s)
    diffs = {}
    for s in terms:
        if (s + 1) not in terms:
            continue
        nq, np_ = len(Q0.term_verts(s)), len(Pp.term_verts(s))
        nq2 = len(Q0.term_verts(s + 1))
        entries = {}
        dq = Qshift.diff(s + 1)    # = Q0 differential with sign flipped
        for (i, j), x in dq.entries.items():
            entries[(i, j)] = np.asarray(A.field.neg(x), dtype=np.int64)
        wfm = what.get(s + 1)
        if wfm is not None:
            for (i, j), x in wfm.entries.items():
                entries[(i + nq2, j)] = x.copy()
        dp = Pp.diff(s)
        for (i, j), x in dp.entries.items():
            entries[(i + nq2, j + nq)] = x.copy()
        diffs[s] = FormalMat(A, terms[s], terms[s + 1], entries)
    P = Complex(A, "proj", terms, diffs)
    # quasi-iso components psi: P -> X: (q, p) -> (alpha q at degree a,
    # phi p + h q elsewhere)
    psi = {}
    F = A.field
    for s in P.terms:
        Ps = P.term_module(s)
        Xs = X.term(s) or md.zero_module(A)
        nqdims = Q0.term_module(s).dims
        mats = []
        for v in range(A.nvert):
            m = F.zeros(Ps.dims[v], Xs.dims[v])
            nq = nqdims[v]
            if s == a and nq and Xs.dims[v]:
                m[:nq] = alpha[a].mats[v]
            if s > a:
                hs = h.get(s + 1)
                if hs is not None and nq and Xs.dims[v]:
                    m[:nq] = F.add(m[:nq], hs.mats[v])
                ps = phi_p.get(s)
                if ps is not None and Ps.dims[v] - nq and Xs.dims[v]:
                    m[nq:] = ps.mats[v]
            mats.append(np.asarray(m, dtype=np.int64))
        psi[s] = md.ModuleMap(Ps, Xs, mats)
    return P, psi


# ---------------------------------------------------------------------------
# minimization (Gaussian elimination on complexes)
# ---------------------------------------------------------------------------

def minimize(C, want_maps=False):
    """Split off contractible summands until no differential entry is
    invertible.  Returns M, or (M, iota, pi) chain maps M -> C -> M with
    pi . iota = id when want_maps."""
    cur = C.copy()
    steps = []
    while True:
        found = None
        for s in sorted(cur.diffs):
            fm = cur.diffs[s]
            for (i, j), x in fm.entries.items():
                v = fm.src[j]
                if fm.tgt[i] == v and cur.algebra.local_unit(x, v):
                    found = (s, i, j)
                    break
            if found:
                break
        if not found:
            break
        s, i, j = found
        cur, step = _eliminate(cur, s, i, j)
        if want_maps:
            steps.append(step)
    if not want_maps:
        return cur
    iota = _identity_chain_map(cur)
    pi = None
    for inc, prj in reversed(steps):
        iota = iota.compose(inc)
        pi = prj if pi is None else prj.compose(pi)
    if pi is None:
        iota = ChainMap(cur, C, iota.comps)
        pi = ChainMap(C, cur, _identity_chain_map(cur).comps)
    return cur, iota, pi


def _mm_identity(C, s):
    M = C.term_module(s)
    return md.ModuleMap(M, M, [C.algebra.field.eye(d) for d in M.dims])


def _identity_chain_map(C):
    return ChainMap(C, C, {s: _mm_identity(C, s) for s in C.terms})


def _eliminate(C, s, i, j):
    """One Gaussian elimination step at diffs[s], pivot entry (i, j).

    Returns (C', (inc, prj, C)) where inc: C'-> C and prj: C -> C' are the
    degreewise module maps of the homotopy equivalence.
    """
    A = C.algebra
    F = A.field
    fm = C.diffs[s]
    v = fm.src[j]
    u = fm.entries[(i, j)]
    uinv = A.invert_local(u, v)
    src_keep = [jj for jj in range(len(fm.src)) if jj != j]
    tgt_keep = [ii for ii in range(len(fm.tgt)) if ii != i]
    # d' = D - c u^{-1} b
    entries = {}
    for (ii, jj), x in fm.entries.items():
        if ii != i and jj != j:
            entries[(tgt_keep.index(ii), src_keep.index(jj))] = x.copy()
    b_row = {jj: x for (ii, jj), x in fm.entries.items() if ii == i and jj != j}
    c_col = {ii: x for (ii, jj), x in fm.entries.items() if jj == j and ii != i}
    for ii, cx in c_col.items():
        for jj, bx in b_row.items():
            corr = A.multiply(A.multiply(cx, uinv), bx)
            if corr.any():
                key = (tgt_keep.index(ii), src_keep.index(jj))
                cur = entries.get(key)
                val = np.asarray(F.sub(cur, corr), dtype=np.int64) if cur is not None \
                    else np.asarray(F.neg(corr), dtype=np.int64)
                if val.any():
                    entries[key] = val
                elif key in entries:
                    del entries[key]
    new_terms = dict(C.terms)
    new_terms[s] = [C.terms[s][jj] for jj in src_keep]
    new_terms[s + 1] = [C.terms[s + 1][ii] for ii in tgt_keep]
    new_diffs = {}
    for t, dmat in C.diffs.items():
        if t == s:
            continue
        if t == s - 1:
            ent = {(src_keep.index(ii), jj): x.copy()
                   for (ii, jj), x in dmat.entries.items() if ii != j}
            new_diffs[t] = FormalMat(A, new_terms.get(t, dmat.src), new_terms[s], ent)
        elif t == s + 1:
            ent = {(ii, tgt_keep.index(jj)): x.copy()
                   for (ii, jj), x in dmat.entries.items() if jj != i}
            new_diffs[t] = FormalMat(A, new_terms[s + 1], new_terms.get(t + 1, dmat.tgt), ent)
        else:
            new_diffs[t] = dmat.copy()
    new_diffs[s] = FormalMat(A, new_terms[s], new_terms[s + 1], entries)
    C2 = Complex(A, C.kind, new_terms, new_diffs)
    # homotopy equivalence components (identity off degrees s, s+1):
    # prj at s: drop summand j;            inc at s: q -> (-u^{-1} b q, q)
    # prj at s+1: (c1, c2) -> c2 - c u^{-1} c1;  inc at s+1: include off i
    inc = {}
    prj = {}
    for t in set(C.terms) | set(C2.terms):
        M2 = C2.term_module(t)
        M1 = C.term_module(t)
        if t == s:
            mats = _inclusion_mats(A, C, C2, t, j, uinv, b_row, src_keep)
            inc[t] = md.ModuleMap(M2, M1, mats)
            prj[t] = md.ModuleMap(M1, M2, _keep_mats(A, C, C2, t, j, project=True))
        elif t == s + 1:
            inc[t] = md.ModuleMap(M2, M1, _keep_mats(A, C, C2, t, i, project=False))
            prj[t] = md.ModuleMap(M1, M2,
                                  _projection_mats_corr(A, C, C2, t, i, uinv, c_col, tgt_keep))
        else:
            eye = [F.eye(d) for d in M2.dims]
            inc[t] = md.ModuleMap(M2, M1, eye)
            prj[t] = md.ModuleMap(M1, M2, [F.eye(d) for d in M1.dims])
    return C2, (ChainMap(C2, C, inc), ChainMap(C, C2, prj))


def _summand_offsets(A, verts):
    mods = [structure_module(A, v, "proj") for v in verts]
    from .homology import _offsets
    return mods, _offsets(mods, A.nvert)


def _block_mats(A, verts_src, verts_tgt, fm_entries, kind):
    fm = FormalMat(A, verts_src, verts_tgt, fm_entries)
    return fm.to_module_map(kind=kind).mats


def _keep_mats(A, C, C2, t, removed, project):
    """Matrices of the map dropping (project=True) or including past the
    removed summand index at degree t."""
    keep = [k for k in range(len(C.terms[t])) if k != removed]
    ent = {}
    for new_ix, old_ix in enumerate(keep):
        x = A.unit_vector(A.idem(C.terms[t][old_ix]))
        ent[(new_ix, old_ix) if project else (old_ix, new_ix)] = x
    if project:
        return _block_mats(A, C.terms[t], C2.terms.get(t, []), ent, C.kind)
    return _block_mats(A, C2.terms.get(t, []), C.terms[t], ent, C.kind)


def _inclusion_mats(A, C, C2, t, removed, uinv, b_row, src_keep):
    F = A.field
    ent = {}
    for new_ix, old_ix in enumerate(src_keep):
        ent[(old_ix, new_ix)] = A.unit_vector(A.idem(C.terms[t][old_ix]))
        # component into the removed summand: -u^{-1} b
        bx = b_row.get(old_ix)
        if bx is not None:
            val = np.asarray(F.neg(A.multiply(uinv, bx)), dtype=np.int64)
            if val.any():
                ent[(removed, new_ix)] = val
    return _block_mats(A, C2.terms.get(t, []), C.terms[t], ent, C.kind)


def _projection_mats_corr(A, C, C2, t, removed, uinv, c_col, tgt_keep):
    F = A.field
    ent = {}
    for new_ix, old_ix in enumerate(tgt_keep):
        ent[(new_ix, old_ix)] = A.unit_vector(A.idem(C.terms[t][old_ix]))
        cx = c_col.get(old_ix)
        if cx is not None:
            val = np.asarray(F.neg(A.multiply(cx, uinv)), dtype=np.int64)
            if val.any():
                ent[(new_ix, removed)] = val
    return _block_mats(A, C.terms[t], C2.terms.get(t, []), ent, C.kind)


# ---------------------------------------------------------------------------
# Nakayama / Serre functors
# ---------------------------------------------------------------------------

def proj_resolve(M, cap=16):
    """Quasi-isomorphic minimal complex of projectives for a module (stalk in
    degree 0)."""
    C, _ = resolve_module(M, cap=cap)
    return minimize(C)


def serre(C, cap=16):
    """Serre functor on a complex of projectives: Nakayama termwise, then
    replace the injective complex by projectives and minimize."""
    J = C.nakayama_flip()
    R, _ = resolve_complex(to_mod_complex(J), cap=cap)
    return minimize(R)


def serre_inverse(C, cap=16):
    """Inverse Serre functor: injective coresolution (computed by duality over
    the opposite algebra), then inverse Nakayama termwise."""
    R, _ = resolve_complex(to_mod_complex(C.dual()), cap=cap)
    return minimize(R.dual().nakayama_flip())


def s2(C, cap=16):
    return serre(C, cap=cap).shift(-2)


def s2_inverse(C, cap=16):
    return serre_inverse(C, cap=cap).shift(2)


# ---------------------------------------------------------------------------
# derived Hom
# ---------------------------------------------------------------------------

def derived_hom_dim(C, D, shift_by=0):
    """dim Hom_D(C, D[shift]) for C a bounded complex of projectives: chain
    maps C -> D[shift] modulo homotopy."""
    return len(chain_maps_mod_homotopy(C, D.shift(shift_by))[0])


def chain_maps_mod_homotopy(C, D):
    """(basis of chain maps C -> D modulo homotopy, coordinate data).

    C must be a complex of projectives, so this computes Hom in the derived
    category.  The basis elements are ChainMaps; the second return value
    allows expanding an arbitrary chain map in this basis (used by callers
    building multiplication tables).
    """
    A = C.algebra
    F = A.field
    degs = sorted(set(C.terms) | set(D.terms))
    hom_bases = {}
    offsets = {}
    total = 0
    for s in degs:
        if s in C.terms and s in D.terms:
            basis = yoneda_hom_basis(A, C.term_verts(s), D.term_module(s))
        else:
            basis = []
        hom_bases[s] = basis
        offsets[s] = total
        total += len(basis)
    # homotopies: maps C^s -> D^{s-1}
    h_bases = {}
    h_offsets = {}
    h_total = 0
    for s in degs:
        if s in C.terms and (s - 1) in D.terms:
            hb = yoneda_hom_basis(A, C.term_verts(s), D.term_module(s - 1))
        else:
            hb = []
        h_bases[s] = hb
        h_offsets[s] = h_total
        h_total += len(hb)

    def flat_of_comps(comps):
        parts = []
        for s in degs:
            if s in C.terms and (s + 1) in D.terms:
                m = comps.get(s)
                parts.append(np.concatenate([x.reshape(-1) for x in m]) if m is not None
                             else np.zeros(sum(C.term_module(s).dims[v] * D.term_module(s + 1).dims[v]
                                               for v in range(A.nvert)), dtype=np.int64))
        return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)

    # cocycle condition: f^s . d_D - d_C . f^{s+1} = 0 for all s
    def delta_of(fdict):
        out = {}
        for s in degs:
            if s in C.terms and (s + 1) in D.terms:
                Cs = C.term_module(s)
                Dt = D.term_module(s + 1)
                acc = [F.zeros(Cs.dims[v], Dt.dims[v]) for v in range(A.nvert)]
                fs = fdict.get(s)
                if fs is not None:
                    dd = _fm_to_mm(D, s)
                    for v in range(A.nvert):
                        acc[v] = F.add(acc[v], F.matmul(fs.mats[v], dd.mats[v]))
                fs1 = fdict.get(s + 1)
                if fs1 is not None:
                    dc = _fm_to_mm(C, s)
                    for v in range(A.nvert):
                        acc[v] = F.sub(acc[v], F.matmul(dc.mats[v], fs1.mats[v]))
                out[s] = [np.asarray(a, dtype=np.int64) for a in acc]
        return out

    cols = []
    for s in degs:
        for b in hom_bases[s]:
            cols.append(flat_of_comps(delta_of({s: b})))
    if cols:
        system = np.stack(cols, axis=1)
        cocycle_coords = F.nullspace(system)
    else:
        cocycle_coords = F.eye(0)
    # coboundaries: h -> dh + hd
    cob_rows = []
    for s in degs:
        for hb in h_bases[s]:
            comps = {}
            dd = _fm_to_mm(D, s - 1)
            m1 = _compose_mm(hb, dd)
            comps[s] = [x.copy() for x in m1.mats]
            if (s - 1) in C.terms and s in D.terms:
                dc = _fm_to_mm(C, s - 1)
                m2 = _compose_mm(dc, hb)
                prev = comps.get(s - 1)
                comps[s - 1] = ([np.asarray(F.add(a, b_), dtype=np.int64)
                                 for a, b_ in zip(prev, m2.mats)] if prev
                                else [x.copy() for x in m2.mats])
            cob_rows.append(_coords_flat(F, comps, hom_bases, degs, C, D))
    cob = (np.stack(cob_rows) if cob_rows
           else np.zeros((0, total), dtype=np.int64))
    # pick representatives of cocycles modulo coboundaries
    reps = []
    Rc, piv = F.rref(cob) if cob.shape[0] else (cob, [])
    span = Rc[: len(piv)]
    rank = len(piv)
    for row in cocycle_coords:
        test = np.concatenate([span, row[None, :]]) if span.shape[0] else row[None, :]
        r = F.rank(test)
        if r > rank:
            reps.append(row)
            span, rank = test, r
    basis_maps = []
    for row in reps:
        comps = {}
        for s in degs:
            if not hom_bases[s]:
                continue
            chunk = row[offsets[s]: offsets[s] + len(hom_bases[s])]
            if not chunk.any():
                continue
            Cs = C.term_module(s)
            Ds = D.term_module(s)
            mats = [F.zeros(Cs.dims[v], Ds.dims[v]) for v in range(A.nvert)]
            for c, b in zip(chunk, hom_bases[s]):
                if c:
                    for v in range(A.nvert):
                        mats[v] = F.add(mats[v], F.mul(int(c), b.mats[v]))
            comps[s] = md.ModuleMap(Cs, Ds, [np.asarray(m, dtype=np.int64) for m in mats])
        basis_maps.append(ChainMap(C, D, comps))
    coord_data = (degs, hom_bases, offsets, total, cob, [r for r in reps])
    return basis_maps, coord_data


def _coords_flat(F, comps, hom_bases, degs, C, D):
    """Coordinates of a componentwise map in the Yoneda bases (valid because
    each basis spans the full hom space from a projective sum)."""
    A = C.algebra
    out = []
    for s in degs:
        basis = hom_bases[s]
        if not basis:
            continue
        m = comps.get(s)
        if m is None:
            out.append(np.zeros(len(basis), dtype=np.int64))
            continue
        flat = np.concatenate([np.asarray(x, dtype=np.int64).reshape(-1)
                               for x in (m.mats if hasattr(m, "mats") else m)])
        cols = np.stack([np.concatenate([y.reshape(-1) for y in b.mats])
                         for b in basis], axis=1)
        sol = F.solve(cols, flat)
        if sol is None:
            raise ComplexError("map not in the hom space span")
        out.append(sol[0])
    return np.concatenate(out) if out else np.zeros(0, dtype=np.int64)


def chain_map_coords(coord_data, F, cmap):
    """Coordinates of a chain map modulo homotopy in the basis returned by
    chain_maps_mod_homotopy.  Returns None if it is not a cocycle combination
    (cannot happen for genuine chain maps)."""
    degs, hom_bases, offsets, total, cob, reps = coord_data
    comps = {s: cmap.comps[s] for s in cmap.comps}
    vec = _coords_flat(F, comps, hom_bases, degs, cmap.src, cmap.tgt)
    reps_mat = (np.stack(reps) if reps else np.zeros((0, total), dtype=np.int64))
    stacked = np.concatenate([cob, reps_mat]) if cob.shape[0] else reps_mat
    if stacked.shape[0] == 0:
        return np.zeros(0, dtype=np.int64) if not vec.any() else None
    sol = F.solve(stacked.T, vec)
    if sol is None:
        return None
    return sol[0][cob.shape[0]:]


# ---------------------------------------------------------------------------
# complex isomorphism via module encoding
# ---------------------------------------------------------------------------

def _encoding_algebra(A, window):
    """The base algebra tensored with a linear A_window quiver modulo paths of
    length two: its modules are exactly complexes supported on the window."""
    cache = getattr(A, "_encoding_cache", None)
    if cache is None:
        cache = A._encoding_cache = {}
    if window in cache:
        return cache[window]
    pres0 = A.presentation
    if pres0 is None:
        raise ComplexError("complex encoding needs a quiver presentation")
    q = pres0.quiver
    verts = [f"{v}~{s}" for s in range(window) for v in q.vertices]

    def vid(v, s):
        return s * q.n + v

    arrows = []
    arrow_ids = {}
    for s in range(window):
        for a, (nm, u, w) in enumerate(zip(q.arrow_names, q.arrow_src, q.arrow_tgt)):
            arrow_ids[("a", a, s)] = len(arrows)
            arrows.append((f"{nm}~{s}", f"{q.vertices[u]}~{s}", f"{q.vertices[w]}~{s}"))
    for s in range(window - 1):
        for v in range(q.n):
            arrow_ids[("d", v, s)] = len(arrows)
            arrows.append((f"@{q.vertices[v]}~{s}", f"{q.vertices[v]}~{s}",
                           f"{q.vertices[v]}~{s+1}"))
    Q2 = Quiver(verts, arrows)
    rels = []
    for rel in pres0.relations:
        for s in range(window):
            rels.append([(c, tuple(arrow_ids[("a", a, s)] for a in mono))
                         for c, mono in rel])
    for s in range(window - 1):
        for a, (nm, u, w) in enumerate(zip(q.arrow_names, q.arrow_src, q.arrow_tgt)):
            rels.append([(1, (arrow_ids[("a", a, s)], arrow_ids[("d", w, s)])),
                         (-1, (arrow_ids[("d", u, s)], arrow_ids[("a", a, s + 1)]))])
    for s in range(window - 2):
        for v in range(q.n):
            rels.append([(1, (arrow_ids[("d", v, s)], arrow_ids[("d", v, s + 1)]))])
    from .algebra import build_algebra
    pres = AlgebraPresentation(Q2, rels, A.field)
    G = build_algebra(pres, check=False)
    cache[window] = (G, arrow_ids, vid)
    return cache[window]


def encode_complex(C, window=None, base=None):
    """A module over the encoding algebra whose isomorphism class is the
    isomorphism class of the complex."""
    A = C.algebra
    degs = C.degrees()
    if base is None:
        base = degs[0] if degs else 0
    if window is None:
        window = (degs[-1] - base + 1) if degs else 1
    G, arrow_ids, vid = _encoding_algebra(A, window)
    q = A.presentation.quiver
    dims = [0] * G.nvert
    for s in range(window):
        M = C.term_module(base + s)
        for v in range(q.n):
            dims[vid(v, s)] = M.dims[v]
    mats = {}
    gname = {G.labels[g]: g for g in G.gens}
    for s in range(window):
        M = C.term_module(base + s)
        for a, nm in enumerate(q.arrow_names):
            g = gname[f"{nm}~{s}"]
            u, w = q.arrow_src[a], q.arrow_tgt[a]
            arrow_gen = None
            for gg in A.gens:
                if A.labels[gg] == nm:
                    arrow_gen = gg
                    break
            mats[g] = M.mats[arrow_gen]
        if s < window - 1:
            dmap = _fm_to_mm(C, base + s)
            for v in range(q.n):
                g = gname[f"@{q.vertices[v]}~{s}"]
                mats[g] = dmap.mats[v]
    return md.Module(G, dims, mats)


def complexes_isomorphic(C, D, rng):
    """Are two minimal complexes of projectives isomorphic?  Decided by module
    isomorphism over the encoding algebra."""
    if C.dims_signature() != D.dims_signature():
        return False
    if C.is_zero():
        return True
    base = C.degrees()[0]
    window = C.degrees()[-1] - base + 1
    MC = encode_complex(C, window=window, base=base)
    MD = encode_complex(D, window=window, base=base)
    return bool(md.is_isomorphic(MC, MD, rng))


def complex_indecomposable(C, rng):
    if C.is_zero():
        return False
    M = encode_complex(C)
    return len(md.decompose(M, rng).summands) == 1


# ---------------------------------------------------------------------------
# fractional Calabi-Yau search
# ---------------------------------------------------------------------------

def fractional_cy_search(C, a_max, b_max, rng, cap=16, progress=None):
    """All pairs (a, b), 1 <= b <= b_max, |a| <= a_max, with C[a] isomorphic to
    serre^b(C).  C must be an indecomposable minimal complex of projectives."""
    C = minimize(C)
    if not complex_indecomposable(C, rng):
        raise ComplexError("fractional CY search needs an indecomposable complex")
    hits = []
    cur = C
    grew = False
    for b in range(1, b_max + 1):
        cur = serre(cur, cap=cap)
        if progress:
            progress(b, cur)
        if cur.total_dim() > 64 * max(1, C.total_dim()):
            grew = True
            break
        sig = cur.dims_signature()
        for a in range(-a_max, a_max + 1):
            shifted = C.shift(a)
            if shifted.dims_signature() != sig:
                continue
            if complexes_isomorphic(shifted, cur, rng):
                hits.append((a, b))
    return {"hits": hits, "growth_detected": grew,
            "caps": {"a_max": a_max, "b_max": b_max}}


def default_cy_caps(A):
    return 4 * A.nvert + 8, 3 * A.nvert + 6
