"""Static transfer-matrix oracle and analytic resonance-ridge predictions.

The transfer matrix gives the exact plane-wave transmission of the
piecewise-constant double barrier, grid-free, and is the independent
reference for the time-dependent propagator.  The ridge formulas map the
oscillation of the well floor into the drift of the resonant energy with
drive frequency: a packet arriving at time t_b sees the well frozen at
U_w(t_b), so

    E_r(w)   = E_r0 + (V_b / 2) sin(w t_b)            (quasi-static shift)
    t_b(E)   = |x0| m* / sqrt(2 m* E)                 (ballistic arrival)
    w(E_r)   = sqrt(2 m* E_r)/(|x0| m*) * arcsin(2 (E_r - E_r0)/V_b)

with the two expressions mutually inverse on the principal arcsin
branch.  Negative frequencies describe the sign-flipped drive and bend
the ridge toward energies below E_r0.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import ArcsinDomainError, NoResonanceError
from .model import PhysicalModel, PotentialSpec, WavePacketSpec

GOLDEN_RATIO = (math.sqrt(5.0) - 1.0) / 2.0


def transfer_matrix_transmission(
    spec: PotentialSpec, energy: float, model: PhysicalModel, t: float = 0.0
) -> float:
    """Plane-wave transmission through the structure frozen at time t.

    Exact piecewise plane-wave/evanescent matching across the five
    regions (lead, barrier, well, barrier, lead).  If the energy
    coincides exactly with a region potential the matching degenerates;
    the energy is then perturbed by 1e-12 eV internally and a warning is
    emitted.
    """
    if not (energy > 0):
        raise ValueError(f"energy must be positive, got {energy}")
    u_w = spec.well_floor(t)
    potentials = (0.0, spec.barrier_height, u_w, spec.barrier_height, 0.0)
    widths = (0.0, spec.barrier_width, spec.well_width, spec.barrier_width, 0.0)
    if any(abs(energy - v) < 1e-14 for v in potentials):
        warnings.warn(
            f"energy {energy} degenerate with a region potential; "
            "perturbing by 1e-12 eV",
            stacklevel=2,
        )
        energy = energy + 1e-12
    two_m = 2.0 * model.effective_mass
    ks = [np.sqrt(two_m * (energy - v) + 0j) / model.hbar for v in potentials]
    m11 = 1.0 + 0j
    m12 = 0.0 + 0j
    m21 = 0.0 + 0j
    m22 = 1.0 + 0j
    for i in range(4):
        ratio = ks[i + 1] / ks[i]
        ap = 0.5 * (1.0 + ratio)
        am = 0.5 * (1.0 - ratio)
        n11 = ap * m11 + am * m21
        n12 = ap * m12 + am * m22
        n21 = am * m11 + ap * m21
        n22 = am * m12 + ap * m22
        if i < 3 and widths[i + 1] > 0:
            ph = np.exp(1j * ks[i + 1] * widths[i + 1])
            n11 *= ph
            n12 *= ph
            n21 /= ph
            n22 /= ph
        m11, m12, m21, m22 = n11, n12, n21, n22
    d = abs(m22)
    if d == 0.0:
        return 1.0
    t_val = 1.0 / (d * d)
    return min(max(t_val, 0.0), 1.0)


def packet_averaged_transmission(
    spec: PotentialSpec,
    packet: WavePacketSpec,
    model: PhysicalModel,
    t: float = 0.0,
    n_k: int = 1201,
    k_span: float = 8.0,
) -> float:
    """Transfer-matrix transmission averaged over the packet's momenta.

    Convolves the plane-wave spectrum with the packet's Gaussian
    momentum density |phi(k)|^2 ~ exp(-sigma^2 (k - k0)^2 / 2); this is
    what a wide detector sees for a localized packet and the reference
    value for the time-dependent runs.
    """
    k0 = abs(packet.k0(model))
    sk = 1.0 / packet.sigma
    kk = np.linspace(max(1e-9, k0 - k_span * sk), k0 + k_span * sk, n_k)
    weight = np.exp(-packet.sigma**2 * (kk - k0) ** 2 / 2.0)
    e_of_k = (model.hbar * kk) ** 2 / (2.0 * model.effective_mass)
    t_of_k = np.array(
        [transfer_matrix_transmission(spec, e, model, t) for e in e_of_k]
    )
    return float(np.trapezoid(t_of_k * weight, kk) / np.trapezoid(weight, kk))


def _golden_max(f, lo, hi, tol):
    """Golden-section search for the maximum of f on [lo, hi]."""
    a, b = lo, hi
    c = b - GOLDEN_RATIO * (b - a)
    d = a + GOLDEN_RATIO * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN_RATIO * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN_RATIO * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


@dataclass(frozen=True)
class StaticSpectrum:
    """Sampled T(E) with the located resonances (E_r, full width at T/2)."""

    energies: np.ndarray = dc_field(repr=False)
    transmissions: np.ndarray = dc_field(repr=False)
    resonances: tuple


def find_resonances(
    spec: PotentialSpec,
    model: PhysicalModel,
    e_bounds=(0.005, 0.25),
    scan_step: float = 1e-4,
    tol: float = 1e-6,
    t: float = 0.0,
):
    """Locate transmission maxima with T > 0.5 and their widths.

    Scans T(E) on a regular grid, refines each local maximum by
    golden-section search to ``tol`` (eV) and measures the full width at
    half the peak transmission.

    Returns a list of (E_r, width) pairs ordered by energy; raises
    ``NoResonanceError`` when the range contains none.
    """
    e_lo, e_hi = e_bounds
    if not (0 < e_lo < e_hi):
        raise ValueError(f"bad scan bounds {e_bounds}")
    energies = np.arange(e_lo, e_hi + 0.5 * scan_step, scan_step)
    trans = np.array(
        [transfer_matrix_transmission(spec, e, model, t) for e in energies]
    )
    out = []
    for i in range(1, len(energies) - 1):
        if trans[i] > 0.5 and trans[i] >= trans[i - 1] and trans[i] > trans[i + 1]:
            e_r = _golden_max(
                lambda e: transfer_matrix_transmission(spec, e, model, t),
                energies[i - 1],
                energies[i + 1],
                tol,
            )
            t_peak = transfer_matrix_transmission(spec, e_r, model, t)
            half = t_peak / 2.0

            def height(e):
                return transfer_matrix_transmission(spec, e, model, t) - half

            j = i
            while j > 0 and height(energies[j]) > 0:
                j -= 1
            lo_cross = brentq(height, energies[j], e_r) if height(energies[j]) < 0 else energies[j]
            j = i
            while j < len(energies) - 1 and height(energies[j]) > 0:
                j += 1
            hi_cross = (
                brentq(height, e_r, energies[j]) if height(energies[j]) < 0 else energies[j]
            )
            out.append((e_r, hi_cross - lo_cross))
    if not out:
        raise NoResonanceError(
            f"no transmission maximum with T > 0.5 in [{e_lo}, {e_hi}] eV"
        )
    return out


def scan_spectrum(
    spec: PotentialSpec,
    model: PhysicalModel,
    e_bounds=(0.005, 0.25),
    scan_step: float = 1e-4,
    t: float = 0.0,
) -> StaticSpectrum:
    """Sample T(E) over a range and attach the located resonances."""
    e_lo, e_hi = e_bounds
    energies = np.arange(e_lo, e_hi + 0.5 * scan_step, scan_step)
    trans = np.array(
        [transfer_matrix_transmission(spec, e, model, t) for e in energies]
    )
    try:
        resonances = tuple(find_resonances(spec, model, e_bounds, scan_step, t=t))
    except NoResonanceError:
        resonances = ()
    return StaticSpectrum(energies=energies, transmissions=trans, resonances=resonances)


def electron_velocity(energy: float, model: PhysicalModel) -> float:
    """Ballistic speed sqrt(2 E / m*) in nm/fs."""
    if not (energy > 0):
        raise ValueError(f"energy must be positive, got {energy}")
    return math.sqrt(2.0 * energy / model.effective_mass)


def arrival_time(energy: float, x0: float, model: PhysicalModel) -> float:
    """Ballistic flight time from the injection point to the structure.

    t_b = |x0| m* / sqrt(2 m* E), i.e. distance over group velocity.
    """
    if x0 == 0:
        raise ValueError("x0 must be nonzero")
    return abs(x0) / electron_velocity(energy, model)


def transit_time(spec: PotentialSpec, energy: float, model: PhysicalModel) -> float:
    """Flight time across the structure (2 barriers + well) at energy E.

    This is the time scale against which the drive must be slow for the
    frozen-well picture to hold; it is reported as a diagnostic next to
    every ridge prediction.
    """
    length = 2.0 * spec.barrier_width + spec.well_width
    return length / electron_velocity(energy, model)


def shifted_resonance(
    t_b: float, e_r0: float, v_b: float, w: float, osc_sign: int = 1
) -> float:
    """Resonant energy seen by a packet arriving at t_b (frozen well)."""
    return e_r0 + osc_sign * (v_b / 2.0) * math.sin(w * t_b)


def ridge_frequency(
    e_r: float, e_r0: float, v_b: float, x0: float, model: PhysicalModel
) -> float:
    """Drive frequency whose noise maximum sits at resonant energy e_r.

    Inverts the frozen-well shift on the principal arcsin branch.
    Energies below e_r0 give negative frequencies (equivalently the
    sign-flipped drive).  Raises ``ArcsinDomainError`` outside
    |2 (e_r - e_r0) / v_b| <= 1.
    """
    arg = 2.0 * (e_r - e_r0) / v_b
    if abs(arg) > 1.0:
        raise ArcsinDomainError(
            f"2(E_r - E_r0)/V_b = {arg:.4f} lies outside [-1, 1]"
        )
    return electron_velocity(e_r, model) / abs(x0) * math.asin(arg)


def invert_ridge(
    w_target: float, e_r0: float, v_b: float, x0: float, model: PhysicalModel
) -> float | None:
    """Resonant energy whose ridge frequency equals ``w_target``.

    Solves w(E) = w_target on the branch connected to (E_r0, w=0).  On
    the negative side w(E) is not monotone: it reaches a minimum (the
    "knee") before creeping back toward zero as E -> 0, so frequencies
    below the knee have no solution and None is returned.
    """

    def w_of(e):
        return ridge_frequency(e, e_r0, v_b, x0, model)

    if w_target == 0.0:
        return e_r0
    if w_target > 0.0:
        hi = e_r0 + v_b / 2.0
        eps = 1e-12 * max(1.0, hi)
        if w_target > w_of(hi - eps):
            return None
        return float(brentq(lambda e: w_of(e) - w_target, e_r0, hi - eps, xtol=1e-12))
    lo_dom = max(1e-9, e_r0 - v_b / 2.0 + 1e-12)
    knee = minimize_scalar(
        w_of, bounds=(lo_dom, e_r0), method="bounded", options={"xatol": 1e-10}
    )
    if w_target < knee.fun:
        return None
    return float(
        brentq(lambda e: w_of(e) - w_target, knee.x, e_r0, xtol=1e-12)
    )


@dataclass(frozen=True)
class RidgePrediction:
    """Analytic ridge samples (e_r, w, t_b, tau_t) plus their context.

    ``in_regime`` flags samples with |w| <= 1/tau_t, the stated validity
    regime of the frozen-well approximation.
    """

    e_r0: float
    v_b: float
    x0: float
    m_star: float
    samples: np.ndarray = dc_field(repr=False)
    in_regime: np.ndarray = dc_field(repr=False)

    def __post_init__(self):
        if self.samples.size:
            arg = 2.0 * (self.samples[:, 0] - self.e_r0) / self.v_b
            if np.any(np.abs(arg) > 1.0 + 1e-12):
                raise ArcsinDomainError("ridge sample outside the arcsin domain")
            if np.any(self.samples[:, 2] <= 0):
                raise ValueError("nonpositive arrival time in ridge samples")


def build_ridge_prediction(
    energies,
    spec: PotentialSpec,
    model: PhysicalModel,
    x0: float,
    e_r0: float | None = None,
) -> RidgePrediction:
    """Tabulate the ridge formula over the given resonant energies.

    ``e_r0`` defaults to the first transfer-matrix resonance of the
    static structure.  Samples outside the arcsin domain are dropped
    with a warning.
    """
    if e_r0 is None:
        e_r0 = find_resonances(spec, model)[0][0]
    rows = []
    flags = []
    for e_r in np.asarray(energies, dtype=float):
        try:
            w = ridge_frequency(e_r, e_r0, spec.barrier_height, x0, model)
        except ArcsinDomainError:
            warnings.warn(f"dropping E_r = {e_r} (outside arcsin domain)", stacklevel=2)
            continue
        tb = arrival_time(e_r, x0, model)
        tt = transit_time(spec, e_r, model)
        rows.append((e_r, w, tb, tt))
        flags.append(abs(w) <= 1.0 / tt)
    samples = np.array(rows) if rows else np.empty((0, 4))
    return RidgePrediction(
        e_r0=e_r0,
        v_b=spec.barrier_height,
        x0=x0,
        m_star=model.effective_mass,
        samples=samples,
        in_regime=np.array(flags, dtype=bool),
    )
