"""Exception hierarchy.

Every failure mode of the pipeline gets its own class so callers (and the
command-line front end, which maps them to exit codes) can react precisely.
All of them derive from IsorecError.
"""


class IsorecError(Exception):
    """Base class for all package errors."""


# --- exact arithmetic ------------------------------------------------------

class IrreducibleDenominator(IsorecError):
    """A denominator factor has no root in the working field tower."""


class TruncationTooShort(IsorecError):
    """A series was queried (or needed) beyond its guaranteed order."""


class UnsolvableInTower(IsorecError):
    """An algebraic condition has no solution in Q(t) or the declared
    quadratic extension."""


# --- Lax-matrix layer ------------------------------------------------------

class PoleCollision(IsorecError):
    """Two declared finite poles coincide."""


class IndexOutOfRange(IsorecError):
    """A (nu, i) Hamiltonian/auxiliary index outside the declared ranges."""


class DegenerateOrbit(IsorecError):
    """The (2,1) entry of L vanishes identically; no spectral coordinates."""


class NonGenericOrbit(IsorecError):
    """The orbit normal form needs an entry that vanishes for this input."""


class InvalidPoleStructure(IsorecError):
    """A rational function does not define a valid pole layout."""


# --- deformation layer -----------------------------------------------------

class NoDeformation(IsorecError):
    """Pole layouts with no isomonodromic time (the Airy/Hermite-Weber
    exclusions)."""


class CasePreconditionViolated(IsorecError):
    """The selected de-autonomization case does not apply to this layout."""


class PlanMismatch(IsorecError):
    """A scaling plan is inconsistent with the system it is applied to."""


class OrderMismatch(IsorecError):
    """Series truncation orders of two inputs disagree."""


# --- spectral curve layer --------------------------------------------------

class NilpotentLeading(IsorecError):
    """det and trace of the leading matrix both vanish."""


class NotProportional(IsorecError):
    """The leading Lax and auxiliary matrices fail to be proportional."""


class HigherGenus(IsorecError):
    """More than two odd-order points: the curve is not rational."""


class NoBranchpoints(IsorecError):
    """y is already rational; there is nothing for the recursion to do."""


class NotHolomorphicAtBranch(IsorecError):
    """The candidate one-form has a pole at a branch point."""


class ConfluentBranchpoints(IsorecError):
    """The two branchpoints coincide; the double cover degenerates."""


class NonSimpleBranchpoint(IsorecError):
    """The recursion kernel denominator vanishes to order > 2."""


# --- recursion / correlator layer ------------------------------------------

class DegenerateAZero(IsorecError):
    """det of the leading auxiliary matrix vanishes identically."""


class UnexpectedPole(IsorecError):
    """A quantity proved to be regular somewhere has a pole there."""


class SingularHessian(IsorecError):
    """The critical point of the Hamiltonian is degenerate."""


class IdentityFailed(IsorecError):
    """An exact identity that must hold for admissible input does not."""
