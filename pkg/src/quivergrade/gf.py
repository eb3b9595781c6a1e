"""Exact linear algebra over finite fields GF(p^m), plus univariate polynomial
factorization.

Field elements are *packed* integers: ``a = sum a_i p^i`` stands for the residue
class of ``sum a_i x^i`` modulo a fixed irreducible polynomial of degree m over
GF(p).  For m = 1 the packing is the identity and all array arithmetic is plain
vectorized modular arithmetic.  Matrices are ordinary ``numpy`` int64 arrays of
packed values; a :class:`Field` instance supplies every operation, so matrix
code never branches on the extension degree.

Everything here is deterministic.  The one internally randomized routine
(equal-degree splitting in :func:`factor_poly`) derives its seed from the
polynomial itself.
"""

from __future__ import annotations

import hashlib

import numpy as np
import sympy

from ._moduli import IRREDUCIBLE_MODULI

# Packed field size must stay below this so products of two packed digits plus
# matmul accumulation fit into int64.
WORD_BOUND = 2**62


class LinalgError(Exception):
    pass


class DimensionMismatch(LinalgError):
    pass


class FieldTooLarge(LinalgError):
    """Requested field or extension exceeds the machine-word bound."""


def find_irreducible(p, m):
    """Smallest monic irreducible of degree m over GF(p), by packed value.

    Deterministic; this is the rule that generated the shipped moduli table.
    Returns the coefficient tuple (c_0, ..., c_m) with c_m = 1.
    """
    if m == 1:
        return (0, 1)
    base = Field(p)
    for packed in range(p**m):
        coeffs = []
        v = packed
        for _ in range(m):
            coeffs.append(v % p)
            v //= p
        f = np.array(coeffs + [1], dtype=np.int64)
        if poly_is_irreducible(base, f):
            return tuple(int(c) for c in f)
    raise LinalgError(f"no irreducible of degree {m} over GF({p})")  # unreachable


class Field:
    """GF(p^m) with packed-integer elements and vectorized matrix arithmetic."""

    def __init__(self, p, m=1, modulus=None):
        p, m = int(p), int(m)
        if not sympy.isprime(p):
            raise LinalgError(f"characteristic {p} is not prime")
        if m < 1:
            raise LinalgError("extension degree must be >= 1")
        if p**m >= WORD_BOUND:
            raise FieldTooLarge(f"GF({p}^{m}) exceeds the word-size bound")
        self.p = p
        self.m = m
        self.q = p**m
        if m == 1:
            self.modulus = (0, 1)
        else:
            if modulus is None:
                modulus = IRREDUCIBLE_MODULI.get((p, m)) or find_irreducible(p, m)
            modulus = tuple(int(c) % p for c in modulus)
            if len(modulus) != m + 1 or modulus[-1] != 1:
                raise LinalgError("modulus must be monic of degree m")
            self.modulus = modulus
            base = Field(p)
            if not poly_is_irreducible(base, np.array(modulus, dtype=np.int64)):
                raise LinalgError(f"modulus {modulus} is reducible over GF({p})")
            # reduction rows: x^(m+k) mod modulus, k = 0..m-2, as coeff vectors
            red = np.zeros((max(m - 1, 1), m), dtype=np.int64)
            cur = np.array([(-c) % p for c in modulus[:m]], dtype=np.int64)
            for k in range(m - 1):
                red[k] = cur
                top = cur[m - 1]
                cur = np.roll(cur, 1)
                cur[0] = 0
                cur = (cur + top * red[0]) % p
            self._red = red
            self._powers = p ** np.arange(m, dtype=np.int64)

    def __repr__(self):
        if self.m == 1:
            return f"GF({self.p})"
        return f"GF({self.p}^{self.m})"

    def __eq__(self, other):
        return (isinstance(other, Field)
                and (self.p, self.m, self.modulus) == (other.p, other.m, other.modulus))

    def __hash__(self):
        return hash((self.p, self.m, self.modulus))

    # -- packed digit planes (m > 1) ------------------------------------

    def _unpack(self, a):
        a = np.asarray(a, dtype=np.int64)
        return (a[..., None] // self._powers) % self.p

    def _pack(self, digits):
        return (digits % self.p) @ self._powers

    def _reduce_planes(self, conv):
        # conv has shape (..., 2m-1); fold degrees >= m down with the table
        m = self.m
        low = conv[..., :m] % self.p
        if conv.shape[-1] > m:
            high = conv[..., m:] % self.p
            low = (low + high @ self._red[: conv.shape[-1] - m]) % self.p
        return low

    # -- elementwise arithmetic on packed ints / arrays ------------------

    def add(self, a, b):
        if self.m == 1:
            return (np.asarray(a, dtype=np.int64) + np.asarray(b, dtype=np.int64)) % self.p
        return self._pack(self._unpack(a) + self._unpack(b))

    def sub(self, a, b):
        if self.m == 1:
            return (np.asarray(a, dtype=np.int64) - np.asarray(b, dtype=np.int64)) % self.p
        return self._pack(self._unpack(a) - self._unpack(b))

    def neg(self, a):
        if self.m == 1:
            return (-np.asarray(a, dtype=np.int64)) % self.p
        return self._pack(-self._unpack(a))

    def mul(self, a, b):
        if self.m == 1:
            return (np.asarray(a, dtype=np.int64) * np.asarray(b, dtype=np.int64)) % self.p
        da, db = self._unpack(a), self._unpack(b)
        da, db = np.broadcast_arrays(da, db)
        m = self.m
        conv = np.zeros(da.shape[:-1] + (2 * m - 1,), dtype=np.int64)
        for i in range(m):
            conv[..., i:i + m] += da[..., i:i + 1] * db
            if i % 8 == 7:
                conv %= self.p
        return self._pack(self._reduce_planes(conv))

    def pow(self, a, e):
        """Elementwise a**e for packed a (int or array), e >= 0 a Python int."""
        e = int(e)
        result = np.ones_like(np.asarray(a, dtype=np.int64))
        base = np.asarray(a, dtype=np.int64)
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def inv(self, a):
        if np.any(np.asarray(a) == 0):
            raise ZeroDivisionError("inverse of zero field element")
        if self.m == 1 and np.isscalar(a):
            return pow(int(a), self.p - 2, self.p)
        return self.pow(a, self.q - 2)

    def scalar(self, c):
        """Embed an integer as a field element (constant polynomial)."""
        return int(c) % self.p

    # -- matrices ---------------------------------------------------------

    def zeros(self, r, c):
        return np.zeros((r, c), dtype=np.int64)

    def eye(self, n):
        return np.eye(n, dtype=np.int64)

    def matmul(self, A, B):
        A = np.asarray(A, dtype=np.int64)
        B = np.asarray(B, dtype=np.int64)
        if A.shape[-1] != B.shape[0]:
            raise DimensionMismatch(f"matmul {A.shape} x {B.shape}")
        if self.m == 1:
            n = A.shape[-1]
            if n and n * (self.p - 1) ** 2 >= WORD_BOUND:
                # chunk the inner dimension to avoid int64 overflow
                step = max(1, int(WORD_BOUND // (self.p - 1) ** 2))
                out = np.zeros(A.shape[:-1] + B.shape[1:], dtype=np.int64)
                for s in range(0, n, step):
                    out = (out + A[..., s:s + step] @ B[s:s + step]) % self.p
                return out
            return (A @ B) % self.p
        da, db = self._unpack(A), self._unpack(B)
        m = self.m
        conv = np.zeros(A.shape[:-1] + B.shape[1:] + (2 * m - 1,), dtype=np.int64)
        for i in range(m):
            for j in range(m):
                conv[..., i + j] += (da[..., i] @ db[..., j]) % self.p
        return self._pack(self._reduce_planes(conv))

    def rref(self, A):
        """Reduced row echelon form. Returns (R, pivot_columns)."""
        A = np.array(A, dtype=np.int64)
        rows, cols = A.shape
        pivots = []
        r = 0
        for c in range(cols):
            if r >= rows:
                break
            nz = np.nonzero(A[r:, c])[0]
            if nz.size == 0:
                continue
            pr = r + int(nz[0])
            if pr != r:
                A[[r, pr]] = A[[pr, r]]
            A[r] = self.mul(A[r], self.inv(int(A[r, c])))
            mask = A[:, c] != 0
            mask[r] = False
            if mask.any():
                A[mask] = self.sub(A[mask], self.mul(A[mask, c][:, None], A[r][None, :]))
            pivots.append(c)
            r += 1
        return A, pivots

    def rank(self, A):
        if A.size == 0:
            return 0
        return len(self.rref(A)[1])

    def nullspace(self, A):
        """Basis of the right kernel {x : A x = 0}, as rows of the result."""
        A = np.asarray(A, dtype=np.int64)
        rows, cols = A.shape
        if cols == 0:
            return np.zeros((0, 0), dtype=np.int64)
        if rows == 0:
            return self.eye(cols)
        R, pivots = self.rref(A)
        free = [c for c in range(cols) if c not in pivots]
        basis = np.zeros((len(free), cols), dtype=np.int64)
        for k, fc in enumerate(free):
            basis[k, fc] = 1
            for i, pc in enumerate(pivots):
                basis[k, pc] = self.neg(R[i, fc])
        return basis

    def solve(self, A, b):
        """Solve A x = b.  Returns (particular, nullspace_rows) or None.

        b may be a vector or a matrix of stacked column right-hand sides; the
        particular solution has matching shape.
        """
        A = np.asarray(A, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        vec = b.ndim == 1
        B = b[:, None] if vec else b
        if A.shape[0] != B.shape[0]:
            raise DimensionMismatch(f"solve {A.shape} vs rhs {B.shape}")
        aug = np.concatenate([A, B], axis=1)
        R, pivots = self.rref(aug)
        ncols = A.shape[1]
        if any(pc >= ncols for pc in pivots):
            return None
        x = np.zeros((ncols, B.shape[1]), dtype=np.int64)
        for i, pc in enumerate(pivots):
            x[pc] = R[i, ncols:]
        return (x[:, 0] if vec else x), self.nullspace(A)

    def inv_matrix(self, A):
        A = np.asarray(A, dtype=np.int64)
        n = A.shape[0]
        if A.shape != (n, n):
            raise DimensionMismatch("inverse of non-square matrix")
        R, pivots = self.rref(np.concatenate([A, self.eye(n)], axis=1))
        if len(pivots) < n or pivots[:n] != list(range(n)):
            return None
        return R[:, n:]

    def is_invertible(self, A):
        A = np.asarray(A)
        return A.shape[0] == A.shape[1] and self.rank(A) == A.shape[0]

    def random_matrix(self, rng, r, c):
        return np.asarray(rng.integers(0, self.q, size=(r, c)), dtype=np.int64)

    def random_invertible(self, rng, n):
        while True:
            A = self.random_matrix(rng, n, n)
            if self.is_invertible(A):
                return A


# ---------------------------------------------------------------------------
# univariate polynomials: 1-D int64 arrays of packed coefficients, index = degree
# ---------------------------------------------------------------------------

def poly_trim(f):
    f = np.asarray(f, dtype=np.int64)
    nz = np.nonzero(f)[0]
    if nz.size == 0:
        return np.zeros(1, dtype=np.int64)
    return f[: int(nz[-1]) + 1]


def poly_deg(f):
    f = poly_trim(f)
    return -1 if (len(f) == 1 and f[0] == 0) else len(f) - 1


def poly_is_zero(f):
    return poly_deg(f) == -1


def poly_add(F, f, g):
    n = max(len(f), len(g))
    a = np.zeros(n, dtype=np.int64)
    b = np.zeros(n, dtype=np.int64)
    a[: len(f)] = f
    b[: len(g)] = g
    return poly_trim(F.add(a, b))


def poly_sub(F, f, g):
    n = max(len(f), len(g))
    a = np.zeros(n, dtype=np.int64)
    b = np.zeros(n, dtype=np.int64)
    a[: len(f)] = f
    b[: len(g)] = g
    return poly_trim(F.sub(a, b))


def poly_scale(F, f, c):
    return poly_trim(F.mul(np.asarray(f, dtype=np.int64), c))


def poly_mul(F, f, g):
    f, g = poly_trim(f), poly_trim(g)
    if poly_is_zero(f) or poly_is_zero(g):
        return np.zeros(1, dtype=np.int64)
    out = np.zeros(len(f) + len(g) - 1, dtype=np.int64)
    for i, c in enumerate(f):
        if c:
            out[i:i + len(g)] = F.add(out[i:i + len(g)], F.mul(int(c), g))
    return poly_trim(out)


def poly_divmod(F, f, g):
    f, g = poly_trim(f), poly_trim(g)
    if poly_is_zero(g):
        raise ZeroDivisionError("polynomial division by zero")
    r = f.copy()
    dg = poly_deg(g)
    lead_inv = F.inv(int(g[dg]))
    q = np.zeros(max(len(f) - dg, 1), dtype=np.int64)
    while poly_deg(r) >= dg:
        dr = poly_deg(r)
        c = F.mul(int(r[dr]), lead_inv)
        q[dr - dg] = c
        r[dr - dg: dr + 1] = F.sub(r[dr - dg: dr + 1], F.mul(c, g))
        r = poly_trim(r)
    return poly_trim(q), poly_trim(r)


def poly_monic(F, f):
    f = poly_trim(f)
    if poly_is_zero(f):
        return f
    return poly_scale(F, f, F.inv(int(f[-1])))


def poly_gcd(F, f, g):
    f, g = poly_trim(f), poly_trim(g)
    while not poly_is_zero(g):
        f, g = g, poly_divmod(F, f, g)[1]
    return poly_monic(F, f)


def poly_pow_mod(F, f, e, mod):
    result = np.array([1], dtype=np.int64)
    base = poly_divmod(F, f, mod)[1]
    e = int(e)
    while e:
        if e & 1:
            result = poly_divmod(F, poly_mul(F, result, base), mod)[1]
        base = poly_divmod(F, poly_mul(F, base, base), mod)[1]
        e >>= 1
    return result


def poly_eval(F, f, a):
    acc = 0
    for c in reversed(poly_trim(f)):
        acc = F.add(F.mul(acc, a), int(c))
    return int(acc)


def poly_deriv(F, f):
    f = poly_trim(f)
    if len(f) == 1:
        return np.zeros(1, dtype=np.int64)
    ks = np.arange(1, len(f), dtype=np.int64) % F.p
    return poly_trim(F.mul(f[1:], ks))


def poly_is_irreducible(F, f):
    """Rabin test: x^(q^m) = x mod f and gcd(x^(q^(m/l)) - x, f) = 1."""
    f = poly_monic(F, f)
    m = poly_deg(f)
    if m <= 0:
        return False
    if m == 1:
        return True
    x = np.array([0, 1], dtype=np.int64)
    for ell in sorted({int(e) for e in sympy.primefactors(m)}):
        h = poly_pow_mod(F, x, F.q ** (m // ell), f)
        g = poly_gcd(F, poly_sub(F, h, x), f)
        if poly_deg(g) != 0:
            return False
    h = poly_pow_mod(F, x, F.q ** m, f)
    return poly_is_zero(poly_sub(F, h, x))


def _frobenius_root(F, c):
    # c^(p^(m-1)) is the p-th root of c in GF(p^m)
    return int(F.pow(c, F.p ** (F.m - 1))) if F.m > 1 else int(c)


def _squarefree_parts(F, f):
    """Yield (squarefree factor, multiplicity) pairs covering f (monic)."""
    f = poly_monic(F, f)
    out = []

    def rec(g, mult):
        if poly_deg(g) <= 0:
            return
        d = poly_deriv(F, g)
        if poly_is_zero(d):
            # g = h(x^p); take p-th roots of coefficients
            coeffs = [int(_frobenius_root(F, int(g[i]))) for i in range(0, len(g), F.p)]
            rec(np.array(coeffs, dtype=np.int64), mult * F.p)
            return
        w = poly_gcd(F, g, d)
        sqfree = poly_divmod(F, g, w)[0]
        i = 1
        while poly_deg(sqfree) > 0:
            y = poly_gcd(F, sqfree, w)
            part = poly_divmod(F, sqfree, y)[0]
            if poly_deg(part) > 0:
                out.append((part, mult * i))
            sqfree = y
            w = poly_divmod(F, w, y)[0]
            i += 1
        if poly_deg(w) > 0:
            rec(w, mult)

    rec(f, 1)
    return out


def _distinct_degree(F, f):
    """Split squarefree monic f into products of irreducibles of equal degree."""
    out = []
    x = np.array([0, 1], dtype=np.int64)
    h = x.copy()
    d = 0
    rest = f
    while poly_deg(rest) > 2 * (d + 1) - 1 and poly_deg(rest) > 0:
        d += 1
        h = poly_pow_mod(F, h, F.q, rest)
        g = poly_gcd(F, poly_sub(F, h, x), rest)
        if poly_deg(g) > 0:
            out.append((g, d))
            rest = poly_divmod(F, rest, g)[0]
            h = poly_divmod(F, h, rest)[1]
    if poly_deg(rest) > 0:
        out.append((rest, poly_deg(rest)))
    return out


def _equal_degree_split(F, f, d, rng):
    """Cantor-Zassenhaus: split monic squarefree f, all factors of degree d."""
    n = poly_deg(f)
    if n == d:
        return [f]
    while True:
        coeffs = np.asarray(rng.integers(0, F.q, size=n), dtype=np.int64)
        h = poly_trim(coeffs)
        if poly_deg(h) < 1:
            continue
        g = poly_gcd(F, h, f)
        if 0 < poly_deg(g) < n:
            pass
        elif F.p == 2:
            # trace map h + h^2 + h^4 + ... over GF(2^(m*d))
            t = h
            acc = h
            for _ in range(F.m * d - 1):
                t = poly_pow_mod(F, t, 2, f)
                acc = poly_divmod(F, poly_add(F, acc, t), f)[1]
            g = poly_gcd(F, acc, f)
        else:
            e = (F.q ** d - 1) // 2
            t = poly_pow_mod(F, h, e, f)
            g = poly_gcd(F, poly_sub(F, t, np.array([1], dtype=np.int64)), f)
        if 0 < poly_deg(g) < n:
            left = _equal_degree_split(F, poly_monic(F, g), d, rng)
            right = _equal_degree_split(F, poly_monic(F, poly_divmod(F, f, g)[0]), d, rng)
            return left + right


def factor_poly(F, f):
    """Factor f into monic irreducibles.

    Returns (leading_coefficient, [(factor, multiplicity), ...]) with factors
    sorted by (degree, packed coefficients).  Deterministic: the equal-degree
    stage is seeded from the polynomial bytes.
    """
    f = poly_trim(f)
    if poly_is_zero(f):
        raise LinalgError("cannot factor the zero polynomial")
    lead = int(f[-1])
    f = poly_monic(F, f)
    if poly_deg(f) == 0:
        return lead, []
    seed = int.from_bytes(
        hashlib.sha256(bytes(str((F.p, F.m, f.tolist())), "utf8")).digest()[:8], "big")
    rng = np.random.default_rng(seed)
    factors = {}
    for sqf, mult in _squarefree_parts(F, f):
        for block, d in _distinct_degree(F, sqf):
            for irr in _equal_degree_split(F, block, d, rng):
                key = tuple(int(c) for c in irr)
                factors[key] = factors.get(key, 0) + mult
    items = sorted(factors.items(), key=lambda kv: (len(kv[0]), kv[0][::-1]))
    return lead, [(np.array(k, dtype=np.int64), m) for k, m in items]


def poly_roots(F, f):
    """Roots of f in F (with multiplicity ignored), sorted."""
    _, factors = factor_poly(F, f)
    return sorted(int(F.neg(int(g[0]))) for g, _ in factors if poly_deg(g) == 1)


def min_poly_of_matrix(F, A):
    """Minimal polynomial of a square matrix over F, monic."""
    A = np.asarray(A, dtype=np.int64)
    n = A.shape[0]
    if n == 0:
        return np.array([1], dtype=np.int64)
    result = np.array([1], dtype=np.int64)
    seen = np.zeros((0, n), dtype=np.int64)
    for start in range(n):
        v = np.zeros(n, dtype=np.int64)
        v[start] = 1
        # skip vectors already inside the accumulated Krylov span
        if seen.shape[0]:
            R, piv = F.rref(np.concatenate([seen, v[None, :]]))
            if len(piv) == F.rank(seen):
                continue
        krylov = [v]
        while True:
            w = F.matmul(krylov[-1], A)
            M = np.stack(krylov + [w])
            R, piv = F.rref(M.T)
            if len(piv) < len(krylov) + 1:
                sol = F.solve(np.stack(krylov).T, w)
                rel = np.zeros(len(krylov) + 1, dtype=np.int64)
                rel[: len(krylov)] = F.neg(sol[0])
                rel[len(krylov)] = 1
                result = _poly_lcm(F, result, poly_trim(rel))
                break
            krylov.append(w)
        seen = np.concatenate([seen, np.stack(krylov)])
        seen = seen[: F.rank(seen) + len(krylov)]
        if poly_deg(result) == n:
            break
    return result


def _poly_lcm(F, f, g):
    d = poly_gcd(F, f, g)
    return poly_monic(F, poly_mul(F, poly_divmod(F, f, d)[0], g))


# ---------------------------------------------------------------------------
# multiplicative structure, extensions, embeddings
# ---------------------------------------------------------------------------

def element_order(F, a):
    a = int(a)
    if a == 0:
        raise LinalgError("zero has no multiplicative order")
    order = F.q - 1
    for ell in sympy.factorint(F.q - 1):
        ell = int(ell)
        while order % ell == 0 and int(F.pow(a, order // ell)) == 1:
            order //= ell
    return order


def multiplicative_generator(F):
    """Smallest generator of F^x by packed value. Deterministic."""
    if F.q == 2:
        return 1
    primes = [int(ell) for ell in sympy.factorint(F.q - 1)]
    for a in range(2, F.q):
        if all(int(F.pow(a, (F.q - 1) // ell)) != 1 for ell in primes):
            return a
    raise LinalgError("no generator found")  # unreachable


def field_embedding(src, dst):
    """An embedding GF(p^m) -> GF(p^m') for m | m', as a vectorized callable.

    Computed by sending the source generator-of-arithmetic (the residue of x)
    to the smallest root of the source modulus in dst.
    """
    if src.p != dst.p or dst.m % src.m != 0:
        raise LinalgError(f"no embedding {src} -> {dst}")
    if src == dst:
        return lambda a: np.asarray(a, dtype=np.int64)
    if src.m == 1:
        return lambda a: np.asarray(a, dtype=np.int64)
    roots = poly_roots(dst, np.array(src.modulus, dtype=np.int64))
    if not roots:
        raise LinalgError(f"source modulus has no root in {dst}")
    rho = roots[0]
    powers = np.array([int(dst.pow(rho, i)) for i in range(src.m)], dtype=np.int64)

    def embed(a):
        a = np.asarray(a, dtype=np.int64)
        digits = (a[..., None] // src._powers) % src.p
        out = np.zeros(a.shape, dtype=np.int64)
        for i in range(src.m):
            out = dst.add(out, dst.mul(digits[..., i], int(powers[i])))
        return out

    return embed


def element_of_order_exceeding(F, n):
    """(F', alpha, embed) with ord(alpha) > n in F', the smallest extension of F
    with q' - 1 > n.  embed maps F into F'."""
    n = int(n)
    mprime = F.m
    while F.p ** mprime - 1 <= n:
        mprime += F.m
        if F.p ** mprime >= WORD_BOUND:
            raise FieldTooLarge(
                f"extension with more than {n} units exceeds the word-size bound")
    F2 = F if mprime == F.m else Field(F.p, mprime)
    alpha = multiplicative_generator(F2)
    return F2, alpha, field_embedding(F, F2)
