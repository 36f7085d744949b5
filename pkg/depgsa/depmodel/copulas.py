# Copyright (c) 2023-2024 DepGSA developers
# MIT License

"""
Dependency models of the Gaussian and Student elliptical copulas.

Gaussian copula with correlation ``R`` and a permutation
``(j, w_1, ..., w_{d-1})``; let ``L`` be the lower Cholesky factor of
``R`` with the rows/columns reordered as the permutation.  Then

    y_0 = Phi^{-1}(tau_j(X_j, lambda)),
    Y   = L [y_0, Z_1, ..., Z_{d-1}]^T,        Z_i ~ N(0, 1)
    X_{w_i} = F_{w_i}^{<-}(Phi(Y_i)).

Student copula with ``nu`` degrees of freedom: same with
``y_0 = T_nu^{-1}(tau_j)``, ``Z_i ~ t(nu + i)`` scaled by

    s_i = sqrt( (nu + y_0^2) prod_{k<i} (nu + k + Z_k^2)
                / prod_{k<=i} (nu + k) ),

and ``X_{w_i} = F_{w_i}^{<-}(T_nu(Y_i))``.

Normal margins (Gaussian copula) and Student margins with the same
``nu`` (Student copula) are mapped affinely, which avoids the loss of
precision of the ``Phi`` / ``Phi^{-1}`` round trip in the tails.
"""

import logging

import numpy as np
import scipy.linalg
from scipy import special

from .base import DependencyModel, LatentLaw
from ..margins import Normal, StudentT, make_margin
from ..errors import DependencyModelError, ParameterError
from ..utils.stats import clip_open_unit


logger = logging.getLogger(__name__)

# Tolerance on the symmetry of the correlation matrix
SYMMETRY_TOL = 1e-12
# Smallest eigenvalue accepted for a positive definite correlation
EIGEN_MIN = 1e-10


class CopulaSpec:
    """
    Elliptical copula of a block of inputs.

    Parameters
    ----------
    family : str
        ``"gaussian"`` or ``"student"``.
    indices : list[int]
        Input indices of the block; the rows/columns of ``correlation``
        follow this order.
    correlation : 2D array_like
        Correlation matrix; a flat row-major list is also accepted.
    nu : float, optional
        Degrees of freedom of the Student copula.

    Raises
    ------
    DependencyModelError :
        The correlation is not a symmetric positive definite matrix with
        unit diagonal.
    """

    def __init__(self, family, indices, correlation, nu=None):
        if family not in ("gaussian", "student"):
            raise ParameterError("unknown copula family: %s" % family)
        self.family = family
        self.indices = tuple(int(i) for i in indices)
        d = len(self.indices)
        if d < 2 or len(set(self.indices)) != d:
            raise ParameterError("copula requires >= 2 distinct indices")
        R = np.asarray(correlation, dtype=np.float64)
        if R.ndim == 1 and R.size == d*d:
            R = R.reshape(d, d)
        if R.shape != (d, d):
            raise DependencyModelError("correlation must be %dx%d" % (d, d))
        if np.max(np.abs(R - R.T)) > SYMMETRY_TOL:
            raise DependencyModelError("correlation not symmetric")
        if np.max(np.abs(np.diag(R) - 1.0)) > SYMMETRY_TOL:
            raise DependencyModelError("correlation diagonal must be 1")
        eigmin = np.linalg.eigvalsh(R).min()
        if eigmin < EIGEN_MIN:
            raise DependencyModelError("copula not positive definite "
                                       "(min eigenvalue %.3g)" % eigmin)
        self.correlation = 0.5 * (R + R.T)
        if family == "student":
            if nu is None or not nu > 0:
                raise ParameterError("student copula requires nu > 0")
            self.nu = float(nu)
        else:
            self.nu = None
        self._cholesky = {}

    @property
    def dim(self):
        return len(self.indices)

    def submatrix(self, perm):
        """The correlation with rows/columns in the order of ``perm``."""
        pos = [self.indices.index(i) for i in perm]
        return self.correlation[np.ix_(pos, pos)]

    def cholesky(self, perm):
        """
        Lower Cholesky factor of the permuted correlation (cached).
        """
        perm = tuple(perm)
        if sorted(perm) != sorted(self.indices):
            raise ParameterError("%s is not a permutation of %s" %
                                 (perm, self.indices))
        if perm not in self._cholesky:
            L = scipy.linalg.cholesky(self.submatrix(perm), lower=True)
            self._cholesky[perm] = L
        return self._cholesky[perm]

    def rho(self, i, j):
        return self.correlation[self.indices.index(i), self.indices.index(j)]


class _EllipticalDM(DependencyModel):
    """
    Common part of the Gaussian and Student copula DMs.
    """

    def __init__(self, copula, margins, perm, latent_laws):
        perm = tuple(perm)
        margins = {int(k): make_margin(v) for k, v in dict(margins).items()}
        missing = set(perm) - set(margins)
        if missing:
            raise ParameterError("missing margins of inputs %s" %
                                 sorted(missing))
        aux = []
        if not margins[perm[0]].continuous:
            aux.append(("lambda%d" % perm[0], 0))
        super().__init__(perm[0], perm[1:], margins=margins,
                         latent_laws=latent_laws, aux=aux)
        self.copula = copula
        self.L = copula.cholesky(perm)

    def _lead_uniform(self, x_lead, aux):
        margin = self.margins[self.lead]
        if margin.continuous:
            return margin.cdf(x_lead)
        lam = self.aux_column(aux, "lambda%d" % self.lead)
        return margin.distributional_transform(x_lead, lam)

    def _correlate(self, y0, z):
        """``Y = L [y_0, z]^T`` restricted to the first ``q`` outputs."""
        q = z.shape[1]
        L = self.L
        return (y0[:, np.newaxis] * L[1:q+1, 0] +
                z @ L[1:q+1, 1:q+1].T)


class GaussianDM(_EllipticalDM):
    kind = "gaussian"

    def __init__(self, copula, margins, perm):
        if copula.family != "gaussian":
            raise ParameterError("GaussianDM requires a gaussian copula")
        latent_laws = [LatentLaw.normal()] * (len(perm) - 1)
        super().__init__(copula, margins, perm, latent_laws)

    def _evaluate(self, x_lead, z, aux):
        margin = self.margins[self.lead]
        if isinstance(margin, Normal):
            y0 = (x_lead - margin.mu) / margin.sigma
        else:
            u = clip_open_unit(self._lead_uniform(x_lead, aux))
            y0 = special.ndtri(u)
        Y = self._correlate(y0, z)
        x = np.empty_like(Y)
        for i in range(Y.shape[1]):
            m = self.margins[self.order[i]]
            if isinstance(m, Normal):
                x[:, i] = m.mu + m.sigma * Y[:, i]
            else:
                x[:, i] = m.inverse_cdf(clip_open_unit(special.ndtr(Y[:, i])))
        return x


class StudentDM(_EllipticalDM):
    kind = "student"

    def __init__(self, copula, margins, perm):
        if copula.family != "student":
            raise ParameterError("StudentDM requires a student copula")
        nu = copula.nu
        latent_laws = [LatentLaw.student(nu + i)
                       for i in range(1, len(perm))]
        super().__init__(copula, margins, perm, latent_laws)
        self.nu = nu

    def _affine(self, margin):
        return isinstance(margin, StudentT) and margin.nu == self.nu

    def latent_scales(self, y0, z):
        """
        Scales ``s_i`` of the latent inputs given the lead and the
        previous latents.
        """
        nu = self.nu
        q = z.shape[1]
        scales = np.empty((y0.shape[0], q))
        s2 = (nu + y0**2) / (nu + 1)
        for i in range(q):
            if i > 0:
                s2 = s2 * (nu + i + z[:, i-1]**2) / (nu + i + 1)
            scales[:, i] = np.sqrt(s2)
        return scales

    def _evaluate(self, x_lead, z, aux):
        nu = self.nu
        margin = self.margins[self.lead]
        if self._affine(margin):
            y0 = (x_lead - margin.loc) / margin.scale
        else:
            u = clip_open_unit(self._lead_uniform(x_lead, aux))
            y0 = special.stdtrit(nu, u)
        Y = self._correlate(y0, z * self.latent_scales(y0, z))
        x = np.empty_like(Y)
        for i in range(Y.shape[1]):
            m = self.margins[self.order[i]]
            if self._affine(m):
                x[:, i] = m.loc + m.scale * Y[:, i]
            else:
                x[:, i] = m.inverse_cdf(
                    clip_open_unit(special.stdtr(nu, Y[:, i])))
        return x


def gaussian_dm(copula, margins, perm):
    """
    Build the DM of a Gaussian copula block for the given permutation.
    """
    return GaussianDM(copula, margins, perm)


def student_dm(copula, margins, perm):
    """
    Build the DM of a Student copula block for the given permutation.
    """
    return StudentDM(copula, margins, perm)
