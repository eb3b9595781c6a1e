"""Quivers and finite-dimensional based algebras.

A :class:`BasedAlgebra` is an associative algebra with a distinguished basis
adapted to a complete set of orthogonal idempotents ("vertices"): every basis
element b has a source and target vertex with ``b = e_src * b * e_tgt``, plus a
nonnegative degree.  Quotients of path algebras are the degree-0 case (basis =
normal-form paths); the graded algebras built downstream reuse the same
container with positive degrees.

Path convention: paths compose left to right, ``p * q`` means "p then q", and a
path from vertex a to vertex b lies in ``e_a A e_b``.  Modules are right
modules throughout the package.
"""

from __future__ import annotations

import numpy as np

from . import gf


class AlgebraError(Exception):
    pass


class NotFiniteDimensional(AlgebraError):
    """Nonzero normal forms persist at the length cap."""


class GlobalDimensionTooLarge(AlgebraError):
    pass


class Quiver:
    """A finite directed graph with named vertices and arrows."""

    def __init__(self, vertices, arrows):
        self.vertices = list(vertices)
        if len(set(self.vertices)) != len(self.vertices):
            raise AlgebraError("duplicate vertex names")
        self.vindex = {v: i for i, v in enumerate(self.vertices)}
        self.arrow_names = []
        self.arrow_src = []
        self.arrow_tgt = []
        names = set(self.vertices)
        for name, s, t in arrows:
            if name in names:
                raise AlgebraError(f"duplicate name {name!r}")
            names.add(name)
            if s not in self.vindex or t not in self.vindex:
                raise AlgebraError(f"arrow {name!r} references undeclared vertex")
            self.arrow_names.append(name)
            self.arrow_src.append(self.vindex[s])
            self.arrow_tgt.append(self.vindex[t])
        self.aindex = {a: i for i, a in enumerate(self.arrow_names)}

    @property
    def n(self):
        return len(self.vertices)

    def arrows_from(self, v):
        return [i for i, s in enumerate(self.arrow_src) if s == v]

    def as_dict(self):
        return {
            "vertices": list(self.vertices),
            "arrows": [[n, self.vertices[s], self.vertices[t]]
                       for n, s, t in zip(self.arrow_names, self.arrow_src, self.arrow_tgt)],
        }


class AlgebraPresentation:
    """Quiver with admissible relations over a field.

    A relation is a list of (coefficient, path) terms, each path a tuple of
    arrow indices of length >= 2, all parallel (same source and target).
    """

    def __init__(self, quiver, relations, field):
        self.quiver = quiver
        self.field = field
        self.relations = []
        for rel in relations:
            terms = [(field.scalar(c), tuple(path)) for c, path in rel if field.scalar(c) != 0]
            if not terms:
                continue
            ends = set()
            for _, path in terms:
                if len(path) < 2:
                    raise AlgebraError("relation paths must have length >= 2 (admissibility)")
                for a, b in zip(path, path[1:]):
                    if quiver.arrow_tgt[a] != quiver.arrow_src[b]:
                        raise AlgebraError("relation path is not composable")
                ends.add((quiver.arrow_src[path[0]], quiver.arrow_tgt[path[-1]]))
            if len(ends) != 1:
                raise AlgebraError("relation terms are not parallel")
            self.relations.append(terms)


class BasedAlgebra:
    """Finite-dimensional algebra with an idempotent-adapted homogeneous basis.

    Attributes
    ----------
    basis_src, basis_tgt, basis_deg : per-basis-index vertex/degree data
    gens : basis indices generating the algebra over the idempotents
    mult : dict (i, j) -> {k: coeff} for composable pairs with nonzero product
    expr : dict basis index -> [(coeff, i, j)] writing it as sum of products of
           lower-rank basis elements (idempotents and generators have no expr)
    """

    def __init__(self, field, vertex_names, basis_src, basis_tgt, basis_deg,
                 labels, gens, mult, expr, presentation=None):
        self.field = field
        self.vertex_names = list(vertex_names)
        self.nvert = len(vertex_names)
        self.basis_src = list(basis_src)
        self.basis_tgt = list(basis_tgt)
        self.basis_deg = list(basis_deg)
        self.labels = list(labels)
        self.gens = list(gens)
        self.mult = mult
        self.expr = expr
        self.presentation = presentation
        self.dim = len(self.basis_src)
        self.by_pair = {}
        for idx in range(self.dim):
            self.by_pair.setdefault((self.basis_src[idx], self.basis_tgt[idx]), []).append(idx)
        self.top_degree = max(self.basis_deg) if self.basis_deg else 0
        self._op = None

    # idempotent for vertex v is basis index v by construction
    def idem(self, v):
        return v

    def pair_basis(self, a, b):
        return self.by_pair.get((a, b), [])

    def zero(self):
        return np.zeros(self.dim, dtype=np.int64)

    def unit_vector(self, idx, coeff=1):
        x = self.zero()
        x[idx] = self.field.scalar(coeff)
        return x

    def one(self):
        x = self.zero()
        for v in range(self.nvert):
            x[v] = 1
        return x

    def multiply(self, x, y):
        """Product of two coefficient vectors."""
        F = self.field
        out = self.zero()
        for i in np.nonzero(x)[0]:
            xi = int(x[i])
            for j in np.nonzero(y)[0]:
                entry = self.mult.get((int(i), int(j)))
                if not entry:
                    continue
                c = F.mul(xi, int(y[j]))
                for k, ck in entry.items():
                    out[k] = F.add(int(out[k]), F.mul(c, ck))
        return out

    def element_degrees(self, x):
        return sorted({self.basis_deg[int(i)] for i in np.nonzero(x)[0]})

    def degree_component(self, x, d):
        out = x.copy()
        for i in np.nonzero(out)[0]:
            if self.basis_deg[int(i)] != d:
                out[i] = 0
        return out

    def describe_element(self, x):
        terms = []
        for i in np.nonzero(x)[0]:
            c = int(x[i])
            terms.append(self.labels[int(i)] if c == 1 else f"{c}*{self.labels[int(i)]}")
        return " + ".join(terms) if terms else "0"

    def radical_indices(self):
        return [i for i in range(self.dim) if i >= self.nvert]

    def local_unit(self, x, v):
        """Is x in e_v A e_v invertible there?  (Local ring: unit iff the
        idempotent coefficient is nonzero.)"""
        return int(x[self.idem(v)]) != 0

    def invert_local(self, x, v):
        """Inverse of a unit in the local ring e_v A e_v, via geometric series."""
        F = self.field
        c = int(x[self.idem(v)])
        if c == 0:
            raise AlgebraError("not a unit in the local ring")
        cinv = F.inv(c)
        n = gf.np.asarray(F.mul(x, cinv), dtype=np.int64)
        n[self.idem(v)] = 0
        n = np.asarray(F.neg(n), dtype=np.int64)  # x/c = e_v - n
        acc = self.unit_vector(self.idem(v))
        power = self.unit_vector(self.idem(v))
        while True:
            power = self.multiply(power, n)
            if not power.any():
                break
            acc = np.asarray(F.add(acc, power), dtype=np.int64)
        return np.asarray(F.mul(acc, cinv), dtype=np.int64)

    def check_associative(self):
        """Verify associativity on all composable basis triples."""
        for i in range(self.dim):
            for j in range(self.dim):
                if self.basis_tgt[i] != self.basis_src[j]:
                    continue
                ij = self.mult.get((i, j), {})
                for k in range(self.dim):
                    if self.basis_tgt[j] != self.basis_src[k]:
                        continue
                    left = self.zero()
                    for t, c in ij.items():
                        e = self.mult.get((t, k))
                        if e:
                            for s, cs in e.items():
                                left[s] = self.field.add(int(left[s]), self.field.mul(c, cs))
                    jk = self.mult.get((j, k), {})
                    right = self.zero()
                    for t, c in jk.items():
                        e = self.mult.get((i, t))
                        if e:
                            for s, cs in e.items():
                                right[s] = self.field.add(int(right[s]), self.field.mul(c, cs))
                    if not np.array_equal(left, right):
                        raise AlgebraError(
                            f"associativity fails on ({self.labels[i]},{self.labels[j]},{self.labels[k]})")

    def op_algebra(self):
        """The opposite algebra, sharing basis labels with sources/targets and
        products reversed."""
        if self._op is None:
            mult = {(j, i): dict(v) for (i, j), v in self.mult.items()}
            expr = {b: [(c, j, i) for (c, i, j) in terms] for b, terms in self.expr.items()}
            self._op = BasedAlgebra(
                self.field, self.vertex_names, self.basis_tgt, self.basis_src,
                self.basis_deg, [lab + "^op" for lab in self.labels],
                self.gens, mult, expr)
            self._op._op = self
        return self._op

    def change_field(self, field2, embed):
        """The same algebra with structure constants pushed through a field
        embedding."""
        mult = {ij: {k: int(embed(c)) for k, c in entry.items()}
                for ij, entry in self.mult.items()}
        expr = {b: [(int(embed(c)), i, j) for (c, i, j) in terms]
                for b, terms in self.expr.items()}
        return BasedAlgebra(field2, self.vertex_names, self.basis_src, self.basis_tgt,
                            self.basis_deg, self.labels, self.gens, mult, expr)


# ---------------------------------------------------------------------------
# path algebra quotients
# ---------------------------------------------------------------------------

def _path_src(quiver, path):
    return quiver.arrow_src[path[0]]


def _path_tgt(quiver, path):
    return quiver.arrow_tgt[path[-1]]


def path_label(quiver, path):
    if not path:
        return "e"
    return "*".join(quiver.arrow_names[a] for a in path)


def build_algebra(pres, length_cap=64, check=True):
    """Quotient of the path algebra by the relation ideal, as a BasedAlgebra.

    The basis is computed length by length: candidates of length l are
    (basis path of length l-1) * arrow, reduced against the span of
    x * relation * y rows with basis-path cofactors.  Construction terminates
    when an entire length stratum reduces to zero; associativity of the
    resulting table is verified when ``check`` (guards the simple filtered
    elimination on non-length-homogeneous inputs).
    """
    quiver = pres.quiver
    F = pres.field
    late_rules = []

    for _restart in range(64):
        result = _build_once(pres, length_cap, late_rules)
        if result is not None:
            break
    else:
        raise AlgebraError("basis construction did not stabilize")
    basis_paths, red = result

    # basis_paths from _build_once: per-vertex empty paths encoded as
    # ("e", v); real paths are tuples of arrow ids.
    verts = [p for p in basis_paths if p[0] == "e"]
    real = sorted([p for p in basis_paths if p[0] != "e"], key=lambda p: (len(p), p))
    assert len(verts) == quiver.n
    ordered = [("e", v) for v in range(quiver.n)] + real
    index = {p: i for i, p in enumerate(ordered)}

    def psrc(p):
        return p[1] if p[0] == "e" else quiver.arrow_src[p[0]]

    def ptgt(p):
        return p[1] if p[0] == "e" else quiver.arrow_tgt[p[-1]]

    n = len(ordered)
    mult = {}
    # products via the reduction map: fold arrows of the second path
    def product_vector(p, q):
        vec = {p: 1}
        arrows = [] if q[0] == "e" else list(q)
        for a in arrows:
            nxt = {}
            for base, c in vec.items():
                if ptgt(base) != quiver.arrow_src[a]:
                    continue
                ext = (a,) if base[0] == "e" else base + (a,)
                target = red.get(ext, {ext: 1} if ext in index else None)
                if target is None:
                    continue  # reduced to zero stratum
                for b2, c2 in target.items():
                    nxt[b2] = F.add(nxt.get(b2, 0), F.mul(c, c2))
            vec = {k: int(v) for k, v in nxt.items() if int(v) != 0}
        return vec

    for i, p in enumerate(ordered):
        for j, q in enumerate(ordered):
            if ptgt(p) != psrc(q):
                continue
            if p[0] == "e":
                entry = {j: 1}
            elif q[0] == "e":
                entry = {i: 1}
            else:
                vec = product_vector(p, q)
                entry = {index[b]: int(c) for b, c in vec.items() if int(c) != 0}
            if entry:
                mult[(i, j)] = entry

    gens = [index[(a,)] for a in range(len(quiver.arrow_names)) if (a,) in index]
    expr = {}
    for i, p in enumerate(ordered):
        if p[0] == "e" or len(p) == 1:
            continue
        expr[i] = [(1, index[p[:-1]], index[(p[-1],)])]

    labels = [quiver.vertices[v] if p[0] == "e" else path_label(quiver, p)
              for p, v in [(pp, pp[1] if pp[0] == "e" else None) for pp in ordered]]

    A = BasedAlgebra(F, quiver.vertices, [psrc(p) for p in ordered],
                     [ptgt(p) for p in ordered], [0] * n, labels, gens, mult, expr,
                     presentation=pres)
    if check:
        A.check_associative()
    return A


def _build_once(pres, length_cap, late_rules):
    """One pass of the stratified construction.

    Returns (basis_paths, red) or None when a late rule was discovered (a
    shorter path newly found in the ideal), in which case ``late_rules`` has
    been extended and the caller restarts.
    """
    quiver = pres.quiver
    F = pres.field
    by_len = {0: [("e", v) for v in range(quiver.n)]}
    basis = set(by_len[0])
    red = {}

    def ptgt(p):
        return p[1] if p[0] == "e" else quiver.arrow_tgt[p[-1]]

    def fold(vec, a):
        """Multiply a {path: coeff} vector by an arrow, reducing known paths."""
        out = {}
        for base, c in vec.items():
            if ptgt(base) != quiver.arrow_src[a]:
                continue
            ext = (a,) if base[0] == "e" else base + (a,)
            if ext in basis:
                target = {ext: 1}
            elif ext in red:
                target = red[ext]
            else:
                target = {ext: 1}  # current-length candidate, kept symbolic
            for b2, c2 in target.items():
                out[b2] = F.add(out.get(b2, 0), F.mul(c, c2))
        return {k: int(v) for k, v in out.items() if int(v) != 0}

    def expand(x_path, rel, y_path):
        total = {}
        for coeff, mono in rel:
            v = {x_path: coeff}
            for a in mono:
                v = fold(v, a)
            for a in ([] if y_path[0] == "e" else y_path):
                v = fold(v, a)
            for k, c in v.items():
                total[k] = F.add(total.get(k, 0), c)
        return {k: int(v) for k, v in total.items() if int(v) != 0}

    relmax = [max(len(m) for _, m in rel) for rel in pres.relations]
    relsrc = [quiver.arrow_src[rel[0][1][0]] for rel in pres.relations]
    reltgt = [quiver.arrow_tgt[rel[0][1][-1]] for rel in pres.relations]
    max_rel = max(relmax, default=0)

    ell = 0
    dead_since = None
    while True:
        ell += 1
        if ell > length_cap:
            raise NotFiniteDimensional(
                f"nonzero normal forms persist at length cap {length_cap}")
        prev = by_len.get(ell - 1, [])
        candidates = []
        for p in prev:
            v = ptgt(p)
            for a in quiver.arrows_from(v):
                candidates.append((a,) if p[0] == "e" else p + (a,))
        candidates = sorted(set(candidates))
        if not candidates and dead_since is None:
            dead_since = ell
        # ideal rows whose longest monomials have length ell
        rows = []
        for r, rel in enumerate(pres.relations):
            budget = ell - relmax[r]
            if budget < 0:
                continue
            for lx in range(budget + 1):
                ly = budget - lx
                for x_path in by_len.get(lx, []):
                    if ptgt(x_path) != relsrc[r]:
                        continue
                    for y_path in by_len.get(ly, []):
                        ysrc = y_path[1] if y_path[0] == "e" else quiver.arrow_src[y_path[0]]
                        if ysrc != reltgt[r]:
                            continue
                        vec = expand(x_path, rel, y_path)
                        if vec:
                            rows.append(vec)
        new_basis = list(candidates)
        if rows:
            cols = candidates + sorted(
                {k for vec in rows for k in vec if k not in candidates},
                key=lambda p: (-(0 if p[0] == "e" else len(p)), p))
            colindex = {c: i for i, c in enumerate(cols)}
            mat = np.zeros((len(rows), len(cols)), dtype=np.int64)
            for rix, vec in enumerate(rows):
                for k, c in vec.items():
                    mat[rix, colindex[k]] = c
            R, pivots = F.rref(mat)
            ncand = len(candidates)
            new_basis = [candidates[c] for c in range(ncand) if c not in pivots]
            for rix, c in enumerate(pivots):
                if c >= ncand:
                    # a shorter basis path turned out to lie in the ideal
                    lead = cols[c]
                    combo = {cols[k]: int(F.neg(int(R[rix, k])))
                             for k in range(len(cols)) if k != c and R[rix, k]}
                    late_rules.append((lead, combo))
                    return None
                combo = {cols[k]: int(F.neg(int(R[rix, k])))
                         for k in range(len(cols)) if R[rix, k] and k != c}
                red[candidates[c]] = combo
        # apply accumulated late rules at this length
        for lead, combo in late_rules:
            if lead in new_basis:
                new_basis.remove(lead)
                red[lead] = combo
        if new_basis:
            by_len[ell] = new_basis
            basis.update(new_basis)
            dead_since = None
        else:
            # whole stratum reduced to zero: run a slack window for
            # non-homogeneous stragglers, then stop
            if dead_since is None:
                dead_since = ell
            if ell >= dead_since + max_rel - 2 or not candidates:
                break
    all_paths = [p for paths in by_len.values() for p in paths]
    # normalize reductions transitively so red maps into the final basis
    changed = True
    while changed:
        changed = False
        for lead, combo in list(red.items()):
            if any(k not in basis and k[0] != "e" for k in combo):
                newc = {}
                for k, c in combo.items():
                    if k in basis or k[0] == "e":
                        newc[k] = F.add(newc.get(k, 0), c)
                    elif k in red:
                        for k2, c2 in red[k].items():
                            newc[k2] = F.add(newc.get(k2, 0), F.mul(c, c2))
                    # else: reduced to zero
                red[lead] = {k: int(v) for k, v in newc.items() if int(v) != 0}
                changed = True
    return all_paths, red


def cartan_matrix(A):
    """C[i, j] = dim e_i A e_j."""
    C = np.zeros((A.nvert, A.nvert), dtype=np.int64)
    for (a, b), items in A.by_pair.items():
        C[a, b] = len(items)
    return C
