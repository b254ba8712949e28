"""Crank-Nicolson tridiagonal step via twisted Thomas elimination.

One CN step solves (1 + i dt H / 2 hbar) psi' = (1 - i dt H / 2 hbar) psi
with hard-wall boundaries.  After scaling, the interior system has
constant off-diagonals -i*beta and diagonal 1 + i*dim_j where

    beta  = hbar dt / (4 m dx^2)
    dim_j = 2 beta + (dt / 2 hbar) V_j.

The elimination is "twisted": it runs from both ends toward a twist node
in the middle and back-substitutes outward.  This has two payoffs over a
plain Thomas sweep:

* the two halves are independent dependency chains, so the CPU can
  overlap them (about 2x faster per step), and
* the elimination coefficients depend only on the matrix, and a change
  confined to the well nodes (the oscillating floor) only invalidates
  coefficients between the well and the twist node, so refreshing them
  per step costs O(well nodes) instead of O(n).

The same step is also available through scipy's banded LAPACK solver,
used as a fallback when numba is unavailable and as a cross-check in the
test suite.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        if args and callable(args[0]):
            return args[0]
        return wrap

from scipy.linalg import solve_banded


@njit(cache=True, fastmath=True)
def _refresh_inv_left(dim, inv_left, beta, j0, j1):
    # inv_left[j] = 1 / u_j with u_j = d_j - e^2 * inv_left[j-1], e = -i beta
    b2 = beta * beta
    for j in range(j0, j1):
        u = complex(1.0, dim[j]) + b2 * inv_left[j - 1]
        inv_left[j] = 1.0 / u


@njit(cache=True, fastmath=True)
def _refresh_inv_right(dim, inv_right, beta, j0, j1):
    # mirror recursion, descending from j1 - 1 to j0
    b2 = beta * beta
    for j in range(j1 - 1, j0 - 1, -1):
        u = complex(1.0, dim[j]) + b2 * inv_right[j + 1]
        inv_right[j] = 1.0 / u


@njit(cache=True, fastmath=True)
def _cn_step_twisted(psi, dim, inv_left, inv_right, mt, beta, out, phi_l, phi_r):
    n = psi.shape[0]
    e = -1j * beta   # off-diagonal of the implicit matrix
    ib = 1j * beta   # off-diagonal of the explicit matrix
    # rhs_j = conj(d_j) psi_j + i beta (psi_{j-1} + psi_{j+1}), folded into
    # the two inward elimination chains (interleaved for ILP)
    phi_l[1] = complex(1.0, -dim[1]) * psi[1] + ib * (psi[0] + psi[2])
    phi_r[n - 2] = complex(1.0, -dim[n - 2]) * psi[n - 2] + ib * (
        psi[n - 3] + psi[n - 1]
    )
    len_l = mt - 2
    len_r = n - 3 - mt
    kmax = min(len_l, len_r)
    for k in range(kmax):
        jl = 2 + k
        jr = n - 3 - k
        rl = complex(1.0, -dim[jl]) * psi[jl] + ib * (psi[jl - 1] + psi[jl + 1])
        phi_l[jl] = rl - e * inv_left[jl - 1] * phi_l[jl - 1]
        rr = complex(1.0, -dim[jr]) * psi[jr] + ib * (psi[jr - 1] + psi[jr + 1])
        phi_r[jr] = rr - e * inv_right[jr + 1] * phi_r[jr + 1]
    for k in range(kmax, len_l):
        jl = 2 + k
        rl = complex(1.0, -dim[jl]) * psi[jl] + ib * (psi[jl - 1] + psi[jl + 1])
        phi_l[jl] = rl - e * inv_left[jl - 1] * phi_l[jl - 1]
    for k in range(kmax, len_r):
        jr = n - 3 - k
        rr = complex(1.0, -dim[jr]) * psi[jr] + ib * (psi[jr - 1] + psi[jr + 1])
        phi_r[jr] = rr - e * inv_right[jr + 1] * phi_r[jr + 1]
    # twist row couples the two chains
    rm = complex(1.0, -dim[mt]) * psi[mt] + ib * (psi[mt - 1] + psi[mt + 1])
    um = complex(1.0, dim[mt]) + beta * beta * (inv_left[mt - 1] + inv_right[mt + 1])
    out[mt] = (
        rm - e * inv_left[mt - 1] * phi_l[mt - 1] - e * inv_right[mt + 1] * phi_r[mt + 1]
    ) / um
    # outward back-substitution, again interleaved
    kmax2 = min(mt - 1, n - 2 - mt)
    for k in range(1, kmax2 + 1):
        jl = mt - k
        jr = mt + k
        out[jl] = inv_left[jl] * (phi_l[jl] - e * out[jl + 1])
        out[jr] = inv_right[jr] * (phi_r[jr] - e * out[jr - 1])
    for j in range(mt - kmax2 - 1, 0, -1):
        out[j] = inv_left[j] * (phi_l[j] - e * out[j + 1])
    for j in range(mt + kmax2 + 1, n - 1):
        out[j] = inv_right[j] * (phi_r[j] - e * out[j - 1])
    out[0] = 0.0
    out[n - 1] = 0.0


class CNStepper:
    """Reusable Crank-Nicolson stepper for one grid and potential shape.

    Owns the elimination coefficients and scratch arrays.  The potential
    is split into a static part and a well slice whose (spatially
    constant) floor may change every step; only the affected coefficient
    ranges are recomputed.
    """

    def __init__(self, v_static, well_idx, beta, gamma, well_frac=None, backend=None):
        self.n = len(v_static)
        if self.n < 5:
            raise ValueError("grid too small for a CN step")
        self.beta = float(beta)
        self.gamma = float(gamma)
        self.dim = 2.0 * self.beta + self.gamma * np.asarray(v_static, dtype=float)
        well_idx = np.asarray(well_idx, dtype=np.intp)
        if well_idx.size:
            w0, w1 = int(well_idx[0]), int(well_idx[-1]) + 1
            if w1 - w0 != well_idx.size:
                raise ValueError("well nodes must be contiguous")
            if w0 < 1 or w1 > self.n - 1:
                raise ValueError("well nodes must be interior")
            self.w0, self.w1 = w0, w1
            self.mt = (w0 + w1) // 2
            if well_frac is None:
                well_frac = np.ones(well_idx.size)
            self._well_base = self.dim[w0:w1].copy()
            self._well_gfrac = self.gamma * np.asarray(well_frac, dtype=float)
            if self._well_gfrac.shape != (w1 - w0,):
                raise ValueError("well_frac must match well_idx")
        else:
            self.w0 = self.w1 = -1
            self.mt = self.n // 2
        self.mt = min(max(self.mt, 2), self.n - 3)
        if backend is None:
            backend = "numba" if HAVE_NUMBA else "scipy"
        if backend not in ("numba", "scipy"):
            raise ValueError(f"unknown backend {backend!r}")
        if backend == "numba" and not HAVE_NUMBA:
            raise ValueError("numba backend requested but numba is unavailable")
        self.backend = backend
        self._last_floor = 0.0
        if backend == "numba":
            self._inv_l = np.zeros(self.n, dtype=np.complex128)
            self._inv_r = np.zeros(self.n, dtype=np.complex128)
            self._phi_l = np.zeros(self.n, dtype=np.complex128)
            self._phi_r = np.zeros(self.n, dtype=np.complex128)
            _refresh_inv_left(self.dim, self._inv_l, self.beta, 1, self.mt)
            _refresh_inv_right(self.dim, self._inv_r, self.beta, self.mt + 1, self.n - 1)
        else:
            self._ab = np.zeros((3, self.n - 2), dtype=np.complex128)
            self._ab[0, 1:] = -1j * self.beta
            self._ab[2, :-1] = -1j * self.beta
            self._ab[1, :] = 1.0 + 1j * self.dim[1:-1]

    def set_well_floor(self, u_w: float):
        """Update the well-floor energy (no-op if unchanged)."""
        if self.w0 < 0 or u_w == self._last_floor:
            return
        self._last_floor = u_w
        self.dim[self.w0 : self.w1] = self._well_base + self._well_gfrac * u_w
        if self.backend == "numba":
            _refresh_inv_left(self.dim, self._inv_l, self.beta, self.w0, self.mt)
            _refresh_inv_right(
                self.dim, self._inv_r, self.beta, self.mt + 1, self.w1
            )
        else:
            self._ab[1, self.w0 - 1 : self.w1 - 1] = (
                1.0 + 1j * self.dim[self.w0 : self.w1]
            )

    def step(self, psi: np.ndarray, out: np.ndarray):
        """Advance psi by one CN step into out (both length-n complex)."""
        if self.backend == "numba":
            _cn_step_twisted(
                psi,
                self.dim,
                self._inv_l,
                self._inv_r,
                self.mt,
                self.beta,
                out,
                self._phi_l,
                self._phi_r,
            )
        else:
            ib = 1j * self.beta
            rhs = (1.0 - 1j * self.dim[1:-1]) * psi[1:-1]
            rhs[1:] += ib * psi[1:-2]
            rhs[:-1] += ib * psi[2:-1]
            rhs[0] += ib * psi[0]
            rhs[-1] += ib * psi[-1]
            out[1:-1] = solve_banded((1, 1), self._ab, rhs, check_finite=False)
            out[0] = 0.0
            out[-1] = 0.0
