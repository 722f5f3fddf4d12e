"""Eynard-Orantin topological recursion on a uniformized genus-zero curve.

Stable correlation forms are stored in a finite pole basis at the branch
z-points: an n-variable differential

    sum_idx  c_idx * prod_i dz_i / (z_i - s_i)^(k_i)

becomes the sparse table {((s_1,k_1),...,(s_n,k_n)): c_idx}.  Branch
z-points are always 0 (one ramification point) or +-1 (two), so the s
entries are plain ints.  omega_{0,1} = y dx and the Bergman kernel
omega_{0,2} = dz1 dz2/(z1-z2)^2 stay implicit; they enter the recursion
through closed-form local expansions, never through the table.

The residue at a branch point s is taken on exact Laurent windows in
w = z - s.  Writing wt = sigma(z) - s, the recursion kernel numerator
expands as

    1/(z0-z) - 1/(z0-sigma(z)) = sum_{m>=1} (w^m - wt^m) / (z0-s)^(m+1),

so every residue lands directly on basis elements in the z0 slot.  Poles of
order one never arise (m starts at 1): computed forms are residue-free by
construction, and the invariant checks verify symmetry and involution
anti-invariance on top of that.
"""

import itertools

from .errors import (NonSimpleBranchpoint, InvalidPoleStructure,
                     UnexpectedPole)
from .exactmath import (FunctionField, LocalSeries, RatFn, local_expand,
                        partial_fractions)
from .spectralcurve import ONE_BRANCH


def _binom(n, k):
    out = 1
    for i in range(k):
        out = out * (n - i) // (i + 1)
    return out


def sigma_slot_image(kind, s, k):
    """Expansion of dz/(z-s)^k composed with the involution.

    Returns [(k', c), ...] meaning xi_{s,k}(sigma(z)) = sum c * xi_{s,k'}(z).
    The image stays at the same branch point (branch points are fixed), and
    never contains k' = 1, so the basis is closed under the involution.
    """
    if k < 2:
        raise InvalidPoleStructure("basis order %d has a residue" % k)
    if kind == ONE_BRANCH:
        # sigma(z) = -z:  xi_{0,k}(-z) = (-1)^(k+1) xi_{0,k}(z)
        return [(k, -1 if k % 2 == 0 else 1)]
    # sigma(z) = 1/z:  xi_{s,k}(sigma z) = -(-s)^k z^(k-2) dz/(z-s)^k
    sign = -((-s) ** k)
    out = []
    for j in range(k - 1):
        c = sign * _binom(k - 2, j) * s ** (k - 2 - j)
        out.append((k - j, c))
    return out


class PoleBasisForm:
    """Sparse n-variable differential over the branch-point pole basis."""

    __slots__ = ("field", "n", "table")

    def __init__(self, field, n, table=None):
        self.field = field
        self.n = n
        self.table = {}
        for key, c in (table or {}).items():
            self.add_term(key, c)

    def add_term(self, key, c):
        if len(key) != self.n:
            raise InvalidPoleStructure(
                "index %r has %d slots, form has %d" % (key, len(key), self.n))
        cur = self.table.get(key)
        c = c if cur is None else cur + c
        if c:
            self.table[key] = c
        elif cur is not None:
            del self.table[key]

    def __bool__(self):
        return bool(self.table)

    def __eq__(self, other):
        return (isinstance(other, PoleBasisForm) and self.n == other.n
                and self.table == other.table)

    def scaled(self, c):
        out = PoleBasisForm(self.field, self.n)
        for key, v in self.table.items():
            out.add_term(key, v * c)
        return out

    def __add__(self, other):
        out = PoleBasisForm(self.field, self.n, self.table)
        for key, v in other.table.items():
            out.add_term(key, v)
        return out

    def __sub__(self, other):
        return self + other.scaled(-self.field.one())

    def permuted(self, perm):
        """Relabel variables: slot i of the result is slot perm[i]."""
        out = PoleBasisForm(self.field, self.n)
        for key, v in self.table.items():
            out.add_term(tuple(key[p] for p in perm), v)
        return out

    def is_symmetric(self):
        for perm in itertools.permutations(range(self.n)):
            if self.permuted(perm).table != self.table:
                return False
        return True

    def involution_image(self, kind, i):
        """Substitute z_i -> sigma(z_i), staying inside the basis."""
        out = PoleBasisForm(self.field, self.n)
        one = self.field.one()
        for key, v in self.table.items():
            s, k = key[i]
            for k2, c in sigma_slot_image(kind, s, k):
                out.add_term(key[:i] + ((s, k2),) + key[i + 1:], v * (c * one))
        return out

    def max_order(self):
        return max((k for key in self.table for _, k in key), default=0)

    def has_residue_term(self):
        return any(k == 1 for key in self.table for _, k in key)

    def evaluate(self, args, one):
        """Plug in field elements for the z_i (the dz factors are dropped)."""
        if len(args) != self.n:
            raise InvalidPoleStructure("expected %d arguments" % self.n)
        total = one - one
        for key, v in self.table.items():
            term = v * one
            for a, (s, k) in zip(args, key):
                den = a - one * s
                for _ in range(k):
                    term = term / den
            total = total + term
        return total

    def to_json(self):
        field = self.field
        items = []
        for key, v in self.table.items():
            items.append({"idx": [[s, k] for s, k in key],
                          "coef": field.to_str(v)})
        items.sort(key=lambda e: e["idx"])
        return items

    @classmethod
    def from_ratfn(cls, f, points):
        """Convert a one-variable rational function into the pole basis.

        `points` lists the admissible pole locations (ints).  Any polynomial
        part or pole elsewhere is a hard error: differentials produced by the
        recursion and by the determinantal correlators must decompose with
        zero remainder.
        """
        field = f.field
        allowed = [(field.coerce(s), s) for s in points]
        polypart, terms = partial_fractions(f, hints=[p for p, _ in allowed])
        if polypart:
            raise UnexpectedPole(
                "polynomial remainder %s outside the pole basis"
                % polypart.to_str())
        out = cls(field, 1)
        for pole, k, c in terms:
            hit = next((s for p, s in allowed if p == pole), None)
            if hit is None:
                raise UnexpectedPole(
                    "pole at %s is not a branch z-point" % field.to_str(pole))
            out.add_term(((hit, k),), c)
        return out


def xi_ratfn(field, var, s, k):
    """The basis element dz/(z-s)^k as a rational function (dz dropped)."""
    zg = RatFn.gen(field, var)
    one = RatFn.one(field, var)
    return one / (zg - s * one) ** k


class BranchWindow:
    """Exact Laurent windows at one branch z-point.

    Caches the local data the recursion needs: wt = sigma(z)-s and its
    derivative, the inverse of 4 y x' (whose double zero at the branch point
    is the simplicity requirement), and the basis expansions xi_{s',k} seen
    from this point on either sheet.
    """

    __slots__ = ("kind", "field", "s", "point", "prec", "sig", "sig_prime",
                 "dinv", "phi", "_xi_cache", "_sig_pows")

    def __init__(self, U, s, prec):
        E = U.field
        self.kind = U.kind
        self.field = E
        self.s = s
        self.point = E.coerce(s)
        self.prec = prec
        one = E.one()
        if U.kind == ONE_BRANCH:
            # sigma(z) = -z: wt = -w exactly
            self.sig = LocalSeries(E, self.point, 1, [-one], prec + 2)
        else:
            # sigma(z) = 1/z: wt = -s w/(s+w)
            base = LocalSeries(E, self.point, 0, [self.point, one], prec + 1)
            self.sig = (base.inverse() * (-self.point)).shift(1)
        self.sig_prime = self.sig.deriv()
        dd = local_expand((U.y * U.x.deriv()) * 4, self.point, prec)
        if (not dd) or dd.valuation() != 2:
            raise NonSimpleBranchpoint(
                "omega01(z) - omega01(sigma z) vanishes to order %s at z=%s "
                "(order 2 required)" % (dd.valuation() if dd else "all", s))
        self.dinv = dd.inverse()
        self.phi = None  # filled lazily by symplectic_invariants
        self._xi_cache = {}
        self._sig_pows = {1: self.sig}

    def sig_pow(self, m):
        out = self._sig_pows.get(m)
        if out is None:
            out = self.sig_pow(m - 1) * self.sig
            self._sig_pows[m] = out
        return out

    def monomial(self, k, c=None):
        one = self.field.one() if c is None else c
        return LocalSeries(self.field, self.point, k, [one], k + 3 * self.prec)

    def xi(self, s2, k, sheet):
        """Window of dz/(z-s2)^k at z = s+w (sheet 0) or sigma(z) (sheet 1).

        Sheet 1 includes the Jacobian d(sigma z)/dw.
        """
        got = self._xi_cache.get((s2, k, sheet))
        if got is not None:
            return got
        E, one = self.field, self.field.one()
        if sheet == 0:
            if s2 == self.s:
                out = self.monomial(-k)
            else:
                base = LocalSeries(E, self.point, 0,
                                   [self.point - E.coerce(s2), one], self.prec)
                out = base.inverse() ** k
        else:
            if s2 == self.s:
                out = self.sig.inverse() ** k
            else:
                shifted = self.sig + (self.point - E.coerce(s2))
                out = shifted.inverse() ** k
            out = out * self.sig_prime
        self._xi_cache[(s2, k, sheet)] = out
        return out

    def bergman_diag(self):
        """omega_{0,2}(z, sigma z) / dz^2 as a window: wt'/(w - wt)^2."""
        gap = self.monomial(1) - self.sig
        return self.sig_prime * gap.inverse() ** 2


def recursion_kernel(U, z0name="z0"):
    """K(z0,z) as a rational function: the coefficient of dz0/dz.

    K = (1/(z0-z) - 1/(z0-sigma z)) / (2 (omega01(z) - omega01(sigma z)))
      = (1/(z0-z) - 1/(z0-sigma z)) / (4 y(z) x'(z)).
    """
    E = U.field
    Fz = FunctionField(E, U.zvar)
    F0 = FunctionField(Fz, z0name)
    one = RatFn.one(Fz, z0name)
    z0 = RatFn.gen(Fz, z0name)
    z = RatFn.gen(E, U.zvar)
    sz = U.apply_sigma(RatFn.one(E, U.zvar) * z)
    den = (U.y * U.x.deriv()) * 4
    num = one / (z0 - one * z) - one / (z0 - one * sz)
    return num * (one / (one * den))


class RecursionResult:
    """All omega_{g,n} with 2g-2+n <= 2*gmax-2+nmax and g <= gmax."""

    __slots__ = ("U", "gmax", "nmax", "prec", "omegas", "F")

    def __init__(self, U, gmax, nmax, prec, omegas):
        self.U = U
        self.gmax = gmax
        self.nmax = nmax
        self.prec = prec
        self.omegas = omegas
        self.F = {}

    def omega(self, g, n):
        return self.omegas[(g, n)]

    def to_json(self):
        out = {"omegas": {}, "F": {}}
        for (g, n) in sorted(self.omegas):
            out["omegas"]["%d,%d" % (g, n)] = self.omegas[(g, n)].to_json()
        for g in sorted(self.F):
            out["F"][str(g)] = self.U.field.to_str(self.F[g])
        return out


def _factor_terms(win, omegas, g, positions, sheet, prec):
    """Series terms of omega_{g,1+len(positions)} with its first slot on the
    given sheet and the remaining slots at free outer variables.

    Yields (series, {position: (s, k)}) pairs; omega_{0,2} with one free
    variable expands through its pole at the branch point, contributing basis
    orders m+2 at the free slot.
    """
    if g == 0 and len(positions) == 1:
        j = positions[0]
        out = []
        for m in range(prec):
            if sheet == 0:
                ser = win.monomial(m, win.field.coerce(m + 1))
            else:
                if m == 0:
                    ser = win.sig_prime * (m + 1)
                else:
                    ser = win.sig_pow(m) * win.sig_prime * (m + 1)
            out.append((ser, {j: (win.s, m + 2)}))
        return out
    stored = omegas.get((g, 1 + len(positions)))
    if stored is None or not stored:
        return []
    out = []
    for key, c in stored.table.items():
        ser = win.xi(key[0][0], key[0][1], sheet) * c
        jkeys = {p: key[1 + i] for i, p in enumerate(positions)}
        out.append((ser, jkeys))
    return out


def _residue_contributions(win, omegas, g, n, table, prec):
    """Add Res_{z->s} K(z0,z) [ ... ] to the coefficient table of omega_{g,n}."""
    positions = list(range(1, n))
    terms = []
    if g >= 1:
        if (g - 1, n + 1) == (0, 2):
            terms.append((win.bergman_diag(), {}))
        else:
            stored = omegas.get((g - 1, n + 1))
            if stored:
                for key, c in stored.table.items():
                    ser = win.xi(key[0][0], key[0][1], 0) \
                        * win.xi(key[1][0], key[1][1], 1) * c
                    jkeys = {p: key[2 + i] for i, p in enumerate(positions)}
                    terms.append((ser, jkeys))
    for g1 in range(g + 1):
        g2 = g - g1
        for r in range(len(positions) + 1):
            for I1 in itertools.combinations(positions, r):
                I2 = tuple(p for p in positions if p not in I1)
                if (g1 == 0 and not I1) or (g2 == 0 and not I2):
                    continue  # omega_{0,1} factors are excluded
                for s1, j1 in _factor_terms(win, omegas, g1, list(I1), 0, prec):
                    for s2, j2 in _factor_terms(win, omegas, g2, list(I2), 1, prec):
                        merged = dict(j1)
                        merged.update(j2)
                        terms.append((s1 * s2, merged))
    for ser, jkeys in terms:
        S = ser * win.dinv
        if not S:
            continue
        rest = tuple(jkeys[p] for p in positions)
        top = -1 - S.valuation()
        for m in range(1, top + 1):
            r = S.coeff(-1 - m) - (win.sig_pow(m) * S).coeff(-1)
            if r:
                key = ((win.s, m + 1),) + rest
                cur = table.get(key)
                r = r if cur is None else cur + r
                if r:
                    table[key] = r
                else:
                    del table[key]


def eo_differentials(U, gmax, nmax, check=True):
    """Run the recursion; returns a RecursionResult holding every stable
    omega_{g,n} with 2g-2+n <= 2*gmax-2+nmax and g <= gmax.

    With check=True each computed form is verified to be symmetric,
    residue-free, and anti-invariant under the involution in each slot.
    """
    if gmax < 0 or nmax < 1:
        raise ValueError("need gmax >= 0 and nmax >= 1")
    chi_max = 2 * gmax - 2 + nmax
    prec = 2 * (3 * gmax - 2 + nmax) + 4
    E = U.field
    wins = [BranchWindow(U, s, prec) for s in _branch_ints(U)]
    omegas = {}
    for chi in range(1, chi_max + 1):
        for g in range(gmax + 1):
            n = chi + 2 - 2 * g
            if n < 1:
                continue
            table = {}
            for win in wins:
                _residue_contributions(win, omegas, g, n, table, prec)
            form = PoleBasisForm(E, n, table)
            if check:
                _verify_form(form, U.kind, g, n)
            omegas[(g, n)] = form
    return RecursionResult(U, gmax, nmax, prec, omegas)


def _branch_ints(U):
    if U.kind == ONE_BRANCH:
        return [0]
    return [1, -1]


def _verify_form(form, kind, g, n):
    if form.has_residue_term():
        raise InvalidPoleStructure(
            "omega_{%d,%d} acquired a first-order pole" % (g, n))
    if not form.is_symmetric():
        raise InvalidPoleStructure("omega_{%d,%d} is not symmetric" % (g, n))
    minus = form.scaled(-form.field.one())
    for i in range(n):
        if form.involution_image(kind, i) != minus:
            raise InvalidPoleStructure(
                "omega_{%d,%d} is not anti-invariant in slot %d" % (g, n, i))


def symplectic_invariants(result):
    """F_g = (1/(2-2g)) sum_s Res_{z->s} Phi(z) omega_{g,1}(z) for g >= 2.

    Phi is a local antiderivative of omega_{0,1}; computed forms are
    residue-free, so the choice of integration constant drops out and the
    expansion point contributes nothing at order -1.
    """
    U = result.U
    E = U.field
    out = {}
    phi = {}
    for s in _branch_ints(U):
        point = E.coerce(s)
        ydx = local_expand(U.y * U.x.deriv(), point, result.prec)
        terms = {}
        for j, c in ydx.known_items():
            terms[j + 1] = c / (j + 1)
        phi[s] = terms  # Phi = sum terms[j] w^j, constant term irrelevant
    for (g, n), form in sorted(result.omegas.items()):
        if n != 1 or g < 2:
            continue
        total = E.zero()
        for key, c in form.table.items():
            (s, k), = key
            t = phi[s].get(k - 1)
            if t is not None:
                total = total + c * t
        scale = E.one() / E.coerce(2 - 2 * g)
        out[g] = scale * total
    result.F.update(out)
    return out
