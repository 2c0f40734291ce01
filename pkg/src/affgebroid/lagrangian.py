"""Lagrangian dynamics: Cartan forms, the dynamics section, regularity.

Prolongation vectors and covectors use the fixed basis order
(reference direction, n fibre directions, n vertical directions); index 0 is
the reference slot, 1..n the fibre block, n+1..2n the vertical block.
"""

from dataclasses import dataclass

import numpy as np

from .errors import SingularLagrangian
from .expressions import ScalarField, parse


class LagrangianSystem:
    """A model together with a Lagrangian over (base, velocity) coordinates."""

    def __init__(self, model, lagrangian):
        self.model = model
        names = model.chart.base_names + model.chart.fibre_names
        if isinstance(lagrangian, str):
            lagrangian = parse(lagrangian, names)
        if not isinstance(lagrangian, ScalarField):
            raise TypeError("lagrangian must be a ScalarField or source string")
        if lagrangian.variables != names:
            raise ValueError(
                "lagrangian bound to %r, chart wants %r" % (lagrangian.variables, names)
            )
        self.lagrangian = lagrangian

    def derivs(self, x, y):
        """Value, base gradient, fibre gradient, mixed block and fibre Hessian
        of L at (x, y)."""
        m = self.model.chart.dim_base
        point = np.concatenate([np.asarray(x, float), np.asarray(y, float)])
        d = self.lagrangian.eval_dual2(point)
        return d.val, d.grad[:m], d.grad[m:], d.hess[:m, m:], d.hess[m:, m:]

    def fibre_hessian(self, x, y):
        m = self.model.chart.dim_base
        point = np.concatenate([np.asarray(x, float), np.asarray(y, float)])
        names = self.lagrangian.variables[m:]
        return self.lagrangian.eval_dual2(point, active=names).hess


def solve_fibre_hessian(w, rhs, n):
    """LU solve guarded by the singularity threshold
    |det W| < 1e-12 * max(1, ||W||_inf^n)."""
    det = float(np.linalg.det(w))
    norm = float(np.linalg.norm(w, np.inf))
    if abs(det) < 1e-12 * max(1.0, norm ** n):
        raise SingularLagrangian(
            "fibre Hessian singular: |det| = %.3e against norm %.3e" % (abs(det), norm)
        )
    return np.linalg.solve(w, rhs)


def vertical_endomorphism(point, vec):
    """Vertical endomorphism on prolongation vectors at a point of A:
    (z0, z, v) -> (0, 0, z - y z0).  Squares to zero."""
    y = point.y
    n = y.shape[0]
    vec = np.asarray(vec, dtype=float)
    out = np.zeros(2 * n + 1)
    out[1 + n :] = vec[1 : 1 + n] - y * vec[0]
    return out


@dataclass
class CartanData:
    """Cartan 1-form coefficients (theta0 on the reference covector, theta on
    the fibre covectors), the Cartan 2-form matrix, and the fibre Hessian."""

    theta0: float
    theta: np.ndarray
    omega: np.ndarray
    hessian: np.ndarray


def _wedge(a, b):
    return np.outer(a, b) - np.outer(b, a)


def momentum_equation_rhs(sys, x, y):
    """Right side of the momentum form of the dynamics:
    d/dt (dL/dy^a) = rho_a^i dL/dx^i + (C_0a^g + C_ba^g y^b) dL/dy^g."""
    s = sys.model.structure_at(x)
    _, dldx, dldy, _, _ = sys.derivs(x, y)
    coupling = s.c0 + np.einsum("b,bag->ag", np.asarray(y, float), s.c)
    return s.rho @ dldx + coupling @ dldy


def _dynamics_pieces(sys, x, y):
    s = sys.model.structure_at(x)
    lval, dldx, dldy, d2xy, w = sys.derivs(x, y)
    y = np.asarray(y, dtype=float)
    vel = s.rho0 + y @ s.rho
    coupling = s.c0 + np.einsum("b,bag->ag", y, s.c)
    rhs = s.rho @ dldx + coupling @ dldy
    return s, lval, dldx, dldy, d2xy, w, vel, rhs


def cartan_data(sys, point, xi0=None):
    """Cartan forms at a point of A.

    xi0 is the acceleration part of an arbitrary reference section used in the
    vertical covectors; the assembled 2-form does not depend on it (the
    dependence cancels against the symmetric Hessian), which tests check by
    assembling with several choices.
    """
    x, y = point.x, point.y
    n = sys.model.chart.fibre_dim
    s, lval, dldx, dldy, d2xy, w, vel, rhs = _dynamics_pieces(sys, x, y)
    if xi0 is None:
        xi0 = np.zeros(n)
    xi0 = np.asarray(xi0, dtype=float)

    dim = 2 * n + 1
    e0 = np.zeros(dim)
    e0[0] = 1.0
    theta = []
    psi = []
    for a in range(n):
        ta = np.zeros(dim)
        ta[1 + a] = 1.0
        ta -= y[a] * e0
        theta.append(ta)
        pa = np.zeros(dim)
        pa[1 + n + a] = 1.0
        pa -= xi0[a] * e0
        psi.append(pa)

    # coefficient of theta^a wedge e^0; equals W (xi0 - xi) on solutions
    a_coeff = vel @ d2xy + w @ xi0 - rhs
    # coefficient of theta^a wedge theta^b
    p = s.rho @ d2xy
    b_coeff = p.T - p + np.einsum("abg,g->ab", s.c, dldy)

    omega = np.zeros((dim, dim))
    for a in range(n):
        omega += a_coeff[a] * _wedge(theta[a], e0)
        for b in range(n):
            omega += w[a, b] * _wedge(theta[a], psi[b])
            omega += 0.5 * b_coeff[a, b] * _wedge(theta[a], theta[b])
    return CartanData(
        theta0=lval - float(y @ dldy),
        theta=dldy,
        omega=omega,
        hessian=w,
    )


def is_regular(sys, point):
    """Regularity of L at a point: nonsingular fibre Hessian.  Returns
    (flag, condition number)."""
    w = sys.fibre_hessian(point.x, point.y)
    n = sys.model.chart.fibre_dim
    det = float(np.linalg.det(w))
    norm = float(np.linalg.norm(w, np.inf))
    singular = abs(det) < 1e-12 * max(1.0, norm ** n)
    cond = float(np.linalg.cond(w)) if not singular else float("inf")
    return (not singular, cond)


def el_section(sys, point):
    """Dynamics section at a point: components (1, y^a, xi^a) on the
    prolongation basis.  Requires a regular Lagrangian."""
    x, y = point.x, point.y
    n = sys.model.chart.fibre_dim
    _, _, _, d2xy, w, vel, rhs = _dynamics_pieces(sys, x, y)[1:]
    xi = solve_fibre_hessian(w, rhs - vel @ d2xy, n)
    return np.concatenate([[1.0], y, xi])


def el_vector_field(sys):
    """Autonomous field on (x, y) space integrating the dynamics:
    xdot = anchor drift, ydot = xi from the momentum equation."""
    m = sys.model.chart.dim_base
    n = sys.model.chart.fibre_dim

    def field(state):
        x, y = state[:m], state[m:]
        s, _, _, _, d2xy, w, vel, rhs = _dynamics_pieces(sys, x, y)
        xi = solve_fibre_hessian(w, rhs - vel @ d2xy, n)
        return np.concatenate([vel, xi])

    return field


def energy(sys, point):
    """y^a dL/dy^a - L, the energy-like function conserved when nothing in
    the model depends on the reference base coordinate."""
    lval, _, dldy, _, _ = sys.derivs(point.x, point.y)
    return float(point.y @ dldy) - lval


def cosymplectic_check_L(sys, point):
    """(sup-norm of the Cartan 2-form contracted with the dynamics section,
    |reference covector on the section - 1|).  Both vanish for a regular L."""
    data = cartan_data(sys, point)
    r = el_section(sys, point)
    return float(np.max(np.abs(data.omega.T @ r))), abs(float(r[0]) - 1.0)


def bordered_volume_det(omega, eta):
    """Determinant of [[Omega, eta], [-eta^T, 0]]; nonzero exactly when
    eta wedge Omega^n is a volume form."""
    dim = omega.shape[0]
    m = np.zeros((dim + 1, dim + 1))
    m[:dim, :dim] = omega
    m[:dim, dim] = eta
    m[dim, :dim] = -eta
    return float(np.linalg.det(m))
