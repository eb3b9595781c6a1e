"""Minimal projective resolutions, Ext groups, global dimension, rigidity.

Maps between sums of projectives are stored as *formal matrices* of algebra
elements: the entry for (target summand P_w, source summand P_v) lies in
e_w A e_v and acts by left multiplication P_v -> P_w.  Composition of formal
matrices is matrix multiplication over the algebra, and a formal matrix
converts to an explicit per-vertex module map by expanding products over the
basis.
"""

from __future__ import annotations

import numpy as np

from . import modules as md
from .algebra import GlobalDimensionTooLarge


class FormalMat:
    """Matrix of algebra elements: maps direct sums of projectives (or
    injectives, same coefficient spaces) indexed by vertex lists.

    entries[(i, j)] is the coefficient vector of the element of
    e_{tgt_summands[i]} A e_{src_summands[j]} giving the component
    X_{src[j]} -> X_{tgt[i]}.
    """

    def __init__(self, algebra, src_summands, tgt_summands, entries=None):
        self.algebra = algebra
        self.src = list(src_summands)
        self.tgt = list(tgt_summands)
        self.entries = {}
        if entries:
            for (i, j), x in entries.items():
                x = np.asarray(x, dtype=np.int64)
                if x.any():
                    self._check_entry(i, j, x)
                    self.entries[(i, j)] = x

    def _check_entry(self, i, j, x):
        A = self.algebra
        for b in np.nonzero(x)[0]:
            if (A.basis_src[int(b)] != self.tgt[i]
                    or A.basis_tgt[int(b)] != self.src[j]):
                raise ValueError(
                    f"entry ({i},{j}) not in e_{self.tgt[i]} A e_{self.src[j]}")

    def is_zero(self):
        return not self.entries

    def compose(self, other):
        """self then other: other @ self as formal matrices."""
        A = self.algebra
        assert other.src == self.tgt
        out = {}
        for (i, j), x in other.entries.items():
            for (i2, j2), y in self.entries.items():
                if j == i2:
                    prod = A.multiply(x, y)
                    if prod.any():
                        key = (i, j2)
                        out[key] = A.field.add(out[key], prod) if key in out else prod
        return FormalMat(A, self.src, other.tgt,
                         {k: np.asarray(v, dtype=np.int64) for k, v in out.items()})

    def add(self, other):
        A = self.algebra
        out = {k: v.copy() for k, v in self.entries.items()}
        for k, v in other.entries.items():
            out[k] = np.asarray(A.field.add(out[k], v), dtype=np.int64) if k in out else v.copy()
        return FormalMat(A, self.src, self.tgt, out)

    def scale(self, c):
        A = self.algebra
        return FormalMat(A, self.src, self.tgt,
                         {k: np.asarray(A.field.mul(c, v), dtype=np.int64)
                          for k, v in self.entries.items()})

    def neg(self):
        return self.scale(self.algebra.field.p - 1 if self.algebra.field.m == 1
                          else int(self.algebra.field.neg(1)))

    def transpose_op(self):
        """The same data read as a formal matrix over the opposite algebra
        (dual complex): entry (i, j) becomes entry (j, i)."""
        return FormalMat(self.algebra.op_algebra(), self.tgt, self.src,
                         {(j, i): x for (i, j), x in self.entries.items()})

    def to_module_map(self, kind="proj"):
        """Explicit per-vertex matrices between the corresponding sums of
        projective (kind='proj') or injective (kind='inj') modules."""
        A = self.algebra
        F = A.field
        srcs = [structure_module(A, v, kind) for v in self.src]
        tgts = [structure_module(A, v, kind) for v in self.tgt]
        Msrc = md.direct_sum(srcs) if srcs else md.zero_module(A)
        Mtgt = md.direct_sum(tgts) if tgts else md.zero_module(A)
        mats = [F.zeros(Msrc.dims[v], Mtgt.dims[v]) for v in range(A.nvert)]
        soff = _offsets(srcs, A.nvert)
        toff = _offsets(tgts, A.nvert)
        for (i, j), x in self.entries.items():
            blocks = element_block(A, x, self.tgt[i], self.src[j], kind)
            for v in range(A.nvert):
                blk = blocks[v]
                if blk.shape[0] and blk.shape[1]:
                    mats[v][soff[j][v]:soff[j][v] + blk.shape[0],
                            toff[i][v]:toff[i][v] + blk.shape[1]] = blk
        return md.ModuleMap(Msrc, Mtgt, mats)

    def copy(self):
        return FormalMat(self.algebra, self.src, self.tgt,
                         {k: v.copy() for k, v in self.entries.items()})


def _offsets(mods, nvert):
    offs = []
    acc = [0] * nvert
    for m in mods:
        offs.append(list(acc))
        for v in range(nvert):
            acc[v] += m.dims[v]
    return offs


def structure_module(A, v, kind):
    cache = getattr(A, "_structure_cache", None)
    if cache is None:
        cache = A._structure_cache = {}
    key = (v, kind)
    if key not in cache:
        cache[key] = (md.projective_module(A, v) if kind == "proj"
                      else md.injective_module(A, v))
    return cache[key]


def element_block(A, x, wtgt, vsrc, kind):
    """Per-vertex matrices of the map X_vsrc -> X_wtgt given by the element
    x in e_wtgt A e_vsrc.

    For projectives this is left multiplication on e_vsrc A; for injectives the
    dual of right multiplication, with the same coefficient space.
    """
    F = A.field
    out = []
    if kind == "proj":
        # fiber of P_v at z: basis e_v A e_z; row for b = expansion of x * b
        for z in range(A.nvert):
            rows = A.pair_basis(vsrc, z)
            cols = A.pair_basis(wtgt, z)
            colindex = {b: k for k, b in enumerate(cols)}
            m = F.zeros(len(rows), len(cols))
            for r, b in enumerate(rows):
                for bi in np.nonzero(x)[0]:
                    for t, c in A.mult.get((int(bi), b), {}).items():
                        m[r, colindex[t]] = F.add(int(m[r, colindex[t]]),
                                                  F.mul(int(x[bi]), c))
            out.append(np.asarray(m, dtype=np.int64))
    else:
        # the dual of right multiplication: I_vsrc -> I_wtgt sends dual_q to
        # the functional r -> coeff of q in r * x, for r: z -> wtgt
        for z in range(A.nvert):
            rows = A.pair_basis(z, vsrc)   # source fiber: duals of z -> vsrc
            cols = A.pair_basis(z, wtgt)
            rowindex = {b: k for k, b in enumerate(rows)}
            m = F.zeros(len(rows), len(cols))
            for cix, r in enumerate(cols):
                for bi in np.nonzero(x)[0]:
                    for t, c in A.mult.get((r, int(bi)), {}).items():
                        if t in rowindex:
                            m[rowindex[t], cix] = F.add(int(m[rowindex[t], cix]),
                                                        F.mul(int(x[bi]), c))
            out.append(np.asarray(m, dtype=np.int64))
    return out


class Resolution:
    """Minimal projective resolution data.

    terms[t] is the vertex list of P_t (t = 0 .. length); diffs[t] is the
    formal matrix P_t -> P_{t-1} (t >= 1); augmentation maps P_0 onto M.
    complete is True when the resolution reached a zero syzygy.
    """

    def __init__(self, module, terms, diffs, augmentation, complete):
        self.module = module
        self.terms = terms
        self.diffs = diffs
        self.augmentation = augmentation
        self.complete = complete

    @property
    def length(self):
        return len(self.terms) - 1


def projective_cover_data(M):
    """(vertex list, cover map) of the projective cover of M."""
    A, F = M.algebra, M.field
    rad = md.radical_rows(M)
    verts = []
    gens_rows = []
    for v in range(A.nvert):
        n = M.dims[v]
        if n == 0:
            continue
        R, piv = F.rref(rad[v]) if rad[v].shape[0] else (rad[v], [])
        comp = [c for c in range(n) if c not in piv]
        for c in comp:
            row = np.zeros(n, dtype=np.int64)
            row[c] = 1
            verts.append(v)
            gens_rows.append((v, row))
    summands = [structure_module(A, v, "proj") for v in verts]
    P = md.direct_sum(summands) if summands else md.zero_module(A)
    offs = _offsets(summands, A.nvert)
    mats = [F.zeros(P.dims[z], M.dims[z]) for z in range(A.nvert)]
    for k, (v, row) in enumerate(gens_rows):
        for z in range(A.nvert):
            fib = A.pair_basis(v, z)
            for r, b in enumerate(fib):
                img = F.matmul(row, M.action(b))
                mats[z][offs[k][z] + r] = img
    return verts, md.ModuleMap(P, M, mats)


def min_proj_resolution(M, length):
    """Minimal projective resolution of M up to the requested length.

    Stops early (complete=True) once a syzygy vanishes.
    """
    A, F = M.algebra, M.field
    verts0, aug = projective_cover_data(M)
    terms = [verts0]
    diffs = {}
    cur_map = aug          # P_t -> (current target module)
    cur_verts = verts0
    complete = False
    for t in range(1, length + 1):
        K, incl = md.kernel_module(cur_map)
        if K.total_dim == 0:
            complete = True
            break
        verts, cover = projective_cover_data(K)
        # formal matrix of P_t -> P_{t-1}: the composite cover-then-include,
        # read off on the generators (fiber coordinates are algebra elements)
        comp = cover.compose(incl)
        diffs[t] = _formal_from_map_into_projectives(A, verts, cur_verts, comp)
        terms.append(verts)
        cur_map = comp
        cur_verts = verts
    else:
        complete = (md.kernel_module(cur_map)[0].total_dim == 0)
    return Resolution(M, terms, diffs, aug, complete)


def _formal_from_map_into_projectives(A, src_verts, tgt_verts, phi):
    """Recover the formal matrix of a module map (sum of P_src) -> (sum of
    P_tgt) from its explicit matrices, by reading generator images."""
    F = A.field
    src_mods = [structure_module(A, v, "proj") for v in src_verts]
    tgt_mods = [structure_module(A, v, "proj") for v in tgt_verts]
    soff = _offsets(src_mods, A.nvert)
    toff = _offsets(tgt_mods, A.nvert)
    entries = {}
    for j, v in enumerate(src_verts):
        # generator of P_v sits in fiber v at offset of basis element e_v
        fib = A.pair_basis(v, v)
        gen_row = soff[j][v] + fib.index(A.idem(v))
        img = phi.mats[v][gen_row]
        for i, w in enumerate(tgt_verts):
            x = A.zero()
            fibw = A.pair_basis(w, v)
            for r, b in enumerate(fibw):
                c = int(img[toff[i][v] + r])
                if c:
                    x[b] = c
            if x.any():
                entries[(i, j)] = x
    return FormalMat(A, src_verts, tgt_verts, entries)


class ExtSpace:
    def __init__(self, dim, cocycles, resolution, degree, target):
        self.dim = dim
        self.cocycles = cocycles    # list of tuples of fiber vectors, one per P_d summand
        self.resolution = resolution
        self.degree = degree
        self.target = target


def _hom_complex_diff(A, N, formal):
    """Matrix of Hom(P_{t-1}, N) -> Hom(P_t, N), phi -> phi . d_t, in the
    Yoneda coordinates Hom(sum P_w, N) = sum N_w."""
    F = A.field
    src_dim = sum(N.dims[w] for w in formal.tgt)
    tgt_dim = sum(N.dims[v] for v in formal.src)
    mat = F.zeros(src_dim, tgt_dim)
    soff = np.concatenate([[0], np.cumsum([N.dims[w] for w in formal.tgt])])
    toff = np.concatenate([[0], np.cumsum([N.dims[v] for v in formal.src])])
    for (i, j), x in formal.entries.items():
        w, v = formal.tgt[i], formal.src[j]
        blk = N.act_element(x, w, v)
        mat[soff[i]:soff[i] + N.dims[w], toff[j]:toff[j] + N.dims[v]] = \
            F.add(mat[soff[i]:soff[i] + N.dims[w], toff[j]:toff[j] + N.dims[v]], blk)
    return mat


def ext(M, N, d, resolution=None):
    """Ext^d(M, N) with an explicit cocycle basis."""
    if d < 0:
        raise ValueError("ext degree must be >= 0")
    A, F = M.algebra, M.field
    res = resolution or min_proj_resolution(M, d + 1)
    if res.length < d:
        # resolution stopped early: Ext vanishes
        return ExtSpace(0, [], res, d, N)
    dims = [sum(N.dims[w] for w in res.terms[t]) for t in range(res.length + 1)]
    din = (_hom_complex_diff(A, N, res.diffs[d]) if d >= 1
           else F.zeros(0, dims[0]))
    dout = (_hom_complex_diff(A, N, res.diffs[d + 1]) if d + 1 <= res.length
            else F.zeros(dims[d], 0))
    # cocycles: kernel of dout applied to Hom(P_d, N)
    if dout.shape[1]:
        cocycle_rows = F.nullspace(dout.T)
    else:
        cocycle_rows = F.eye(dims[d])
    # coboundaries: row space of din
    if din.shape[0]:
        R, piv = F.rref(din)
        cob = R[: len(piv)]
    else:
        cob = F.zeros(0, dims[d])
    stacked = np.concatenate([cob, cocycle_rows]) if cocycle_rows.shape[0] else cob
    R, piv = F.rref(stacked) if stacked.shape[0] else (stacked, [])
    dim_ext = len(piv) - cob.shape[0]
    reps = []
    rank = cob.shape[0]
    span = cob
    for row in cocycle_rows:
        test = np.concatenate([span, row[None, :]])
        r = F.rank(test)
        if r > rank:
            reps.append(row)
            span, rank = test, r
        if len(reps) == dim_ext:
            break
    cocycles = []
    for row in reps:
        splits = []
        off = 0
        for w in res.terms[d]:
            splits.append(row[off:off + N.dims[w]])
            off += N.dims[w]
        cocycles.append(splits)
    return ExtSpace(dim_ext, cocycles, res, d, N)


def ext_dim(M, N, d, resolution=None):
    return ext(M, N, d, resolution=resolution).dim


def projective_dimension(M, cap=16):
    res = min_proj_resolution(M, cap)
    if not res.complete:
        raise GlobalDimensionTooLarge(f"projective dimension exceeds cap {cap}")
    return res.length


def global_dimension(A, cap=16):
    """Max projective dimension of the simples; raises GlobalDimensionTooLarge
    past the cap."""
    best = 0
    for v in range(A.nvert):
        best = max(best, projective_dimension(md.simple_module(A, v), cap))
    return best


def is_rigid(M):
    """Ext^1(M, M) = 0."""
    return ext_dim(M, M, 1) == 0
