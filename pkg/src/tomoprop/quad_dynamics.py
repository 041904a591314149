"""Affine tomogram propagation for forced parametric oscillators.

The Hamiltonian family is H = p^2/2 + omega_sq(t) q^2/2 - f(t) q.  Its
classical complex solution eps(t) (eps'' + omega_sq eps = 0, eps(0) = 1,
eps'(0) = i) and the forcing quadrature beta(t) assemble into linear
integrals of motion: a symplectic matrix Lambda(t) and a drift vector
Delta(t) satisfying Lambda(t) (p, q)(t) + Delta(t) = (p, q)(0) along every
classical trajectory.  The tomogram then evolves by a deterministic affine
reference-frame map with weight 1/r, the delta form of the propagator.

Sign convention: Delta = (sqrt(2) Im beta, sqrt(2) Re beta).  The sign of
the first component is pinned by requiring the integrals of motion to
annihilate classical trajectories launched from the origin (equivalently,
by the Ehrenfest law q' = p, p' = -omega_sq q + f for first moments of
evolved tomograms); see the repository README for the derivation sketch.
"""

import numpy as np
from dataclasses import dataclass, field

from .errors import RangeError, StepError, SupportError, TimeError
from .transforms import Tomogram

# Interpolating the trajectory between RK4 nodes breaks det Lambda = 1 at
# O(dt^2); the matrix is projected back onto the symplectic constraint and
# the raw defect recorded.  Node values themselves hold det to ~1e-12.
DET_TOL = 1e-8
WRONSKIAN_TOL = 1e-8


@dataclass(frozen=True)
class ConstantSampler:
    """Time-independent coefficient."""

    value: float

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, float(self.value))
        return float(out) if out.shape == () else out

    def upper_bound(self):
        return float(self.value)

    def shifted(self, dt):
        return self


@dataclass(frozen=True)
class CosineSampler:
    """a + b * cos(freq * t + phase); phase supports time-origin shifts."""

    a: float
    b: float
    freq: float
    phase: float = 0.0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = self.a + self.b * np.cos(self.freq * t + self.phase)
        return float(out) if out.shape == () else out

    def upper_bound(self):
        return float(self.a + abs(self.b))

    def shifted(self, dt):
        return CosineSampler(self.a, self.b, self.freq, self.phase + self.freq * dt)


@dataclass(frozen=True)
class TableSampler:
    """Linear interpolation of tabulated samples; defined only on the table range."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if times.ndim != 1 or times.size < 2 or values.shape != times.shape:
            raise ValueError("table sampler needs matching 1-d times and values, length >= 2")
        if np.any(np.diff(times) <= 0):
            raise ValueError("table sampler times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        lo, hi = self.times[0], self.times[-1]
        if np.any(t < lo - 1e-12) or np.any(t > hi + 1e-12):
            raise RangeError(
                f"sampler evaluated at t outside its table range [{lo:g}, {hi:g}]"
            )
        out = np.interp(t, self.times, self.values)
        return float(out) if out.shape == () else out

    def upper_bound(self):
        return float(self.values.max())

    def shifted(self, dt):
        return TableSampler(self.times - dt, self.values)


@dataclass(frozen=True)
class QuadraticHamiltonian:
    """H = p^2/2 + omega_sq(t) q^2/2 - f(t) q."""

    omega_sq: object
    force: object

    @classmethod
    def free(cls):
        return cls(ConstantSampler(0.0), ConstantSampler(0.0))

    @classmethod
    def harmonic(cls):
        return cls(ConstantSampler(1.0), ConstantSampler(0.0))

    def shifted(self, dt):
        """Same physics with the time origin moved to dt."""
        return QuadraticHamiltonian(self.omega_sq.shifted(dt), self.force.shifted(dt))


@dataclass(frozen=True)
class EpsilonTrajectory:
    """Stored RK4 nodes of eps, eps', beta on [0, T]."""

    times: np.ndarray
    eps: np.ndarray
    eps_dot: np.ndarray
    beta: np.ndarray
    hamiltonian: QuadraticHamiltonian = field(repr=False, compare=False, default=None)

    @property
    def final_time(self):
        return float(self.times[-1])


def _rhs(t, eps, eps_dot, beta, H):
    om = H.omega_sq(t)
    f = H.force(t)
    return eps_dot, -om * eps, (-1j / np.sqrt(2.0)) * eps * f


def solve_epsilon(H, T, dt=1e-3):
    """Integrate eps'' + omega_sq(t) eps = 0 with eps(0)=1, eps'(0)=i,
    accumulating beta' = -(i/sqrt(2)) eps f(t), by classic RK4.

    The Wronskian 2 Im(eps' eps*) = 2 is checked at every node; drift beyond
    1e-8 (or an oversized step) raises StepError.
    """
    T = float(T)
    if T < 0.0:
        raise TimeError("causal evolution requires T >= 0")
    dt = float(dt)
    if dt <= 0.0:
        raise StepError("dt must be positive")
    sup = max(1.0, H.omega_sq.upper_bound())
    if dt > 1e-2 / sup * (1.0 + 1e-12):
        raise StepError(
            f"dt = {dt:g} exceeds 1e-2/max(1, sup omega_sq) = {1e-2 / sup:g}"
        )

    if T == 0.0:
        return EpsilonTrajectory(
            np.array([0.0]), np.array([1.0 + 0.0j]), np.array([0.0 + 1.0j]),
            np.array([0.0 + 0.0j]), H,
        )

    n = int(np.ceil(T / dt - 1e-9))
    h = T / n
    times = np.linspace(0.0, T, n + 1)
    eps = np.empty(n + 1, dtype=complex)
    eps_dot = np.empty(n + 1, dtype=complex)
    beta = np.empty(n + 1, dtype=complex)
    eps[0], eps_dot[0], beta[0] = 1.0, 1.0j, 0.0

    e, ed, b = eps[0], eps_dot[0], beta[0]
    for i in range(n):
        t = times[i]
        k1 = _rhs(t, e, ed, b, H)
        k2 = _rhs(t + 0.5 * h, e + 0.5 * h * k1[0], ed + 0.5 * h * k1[1], b + 0.5 * h * k1[2], H)
        k3 = _rhs(t + 0.5 * h, e + 0.5 * h * k2[0], ed + 0.5 * h * k2[1], b + 0.5 * h * k2[2], H)
        k4 = _rhs(t + h, e + h * k3[0], ed + h * k3[1], b + h * k3[2], H)
        e = e + (h / 6.0) * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        ed = ed + (h / 6.0) * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        b = b + (h / 6.0) * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
        eps[i + 1], eps_dot[i + 1], beta[i + 1] = e, ed, b

    drift = np.abs(2.0 * np.imag(eps_dot * np.conj(eps)) - 2.0).max()
    if drift > WRONSKIAN_TOL:
        raise StepError(
            f"Wronskian drift {drift:.3e} exceeds {WRONSKIAN_TOL:g}; reduce dt"
        )
    return EpsilonTrajectory(times, eps, eps_dot, beta, H)


@dataclass(frozen=True)
class MotionIntegrals:
    """Lambda(t), Delta(t) with Lambda (p,q)(t) + Delta = (p,q)(0)."""

    time: float
    lambda_mat: np.ndarray
    delta: np.ndarray
    det_defect: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "lambda_mat", np.asarray(self.lambda_mat, dtype=float))
        object.__setattr__(self, "delta", np.asarray(self.delta, dtype=float))


def motion_integrals(traj, t):
    """Integrals of motion at time t, linearly interpolated between nodes.

    Lambda = [[Re eps, -Re eps'], [-Im eps, Im eps']] acting on (p, q);
    Delta = (sqrt(2) Im beta, sqrt(2) Re beta).  Interpolation breaks
    det Lambda = 1 at O(dt^2), so the matrix is rescaled by 1/sqrt(det)
    and the raw defect recorded.
    """
    t = float(t)
    times = traj.times
    if t < times[0] - 1e-9 or t > times[-1] + 1e-9:
        raise RangeError(
            f"t = {t:g} outside the solved trajectory [{times[0]:g}, {times[-1]:g}]"
        )
    t = min(max(t, float(times[0])), float(times[-1]))
    i = int(np.searchsorted(times, t, side="right")) - 1
    i = min(max(i, 0), times.size - 2) if times.size > 1 else 0
    if times.size == 1 or abs(t - times[i]) < 1e-12:
        e, ed, b = traj.eps[i], traj.eps_dot[i], traj.beta[i]
    elif abs(t - times[i + 1]) < 1e-12:
        e, ed, b = traj.eps[i + 1], traj.eps_dot[i + 1], traj.beta[i + 1]
    else:
        a = (t - times[i]) / (times[i + 1] - times[i])
        e = (1.0 - a) * traj.eps[i] + a * traj.eps[i + 1]
        ed = (1.0 - a) * traj.eps_dot[i] + a * traj.eps_dot[i + 1]
        b = (1.0 - a) * traj.beta[i] + a * traj.beta[i + 1]

    lam = np.array([[np.real(e), -np.real(ed)], [-np.imag(e), np.imag(ed)]])
    det = lam[0, 0] * lam[1, 1] - lam[0, 1] * lam[1, 0]
    if det <= 0.0:
        raise StepError(f"interpolated Lambda degenerate (det = {det:g}); reduce dt")
    defect = abs(det - 1.0)
    lam = lam / np.sqrt(det)
    delta = np.array([np.sqrt(2.0) * np.imag(b), np.sqrt(2.0) * np.real(b)])
    return MotionIntegrals(time=t, lambda_mat=lam, delta=delta, det_defect=defect)


@dataclass(frozen=True)
class OpticalAffineMap:
    """Reference-frame map (X, theta) -> (X0, theta0, weight) over [t_from, t_to].

    With the row vector N = (sin theta, cos theta) and N' = N Lambda^-1:
    r = |N'|, theta0 = atan2(N'_1, N'_2) folded into [0, pi) with the X-parity
    flip of the twisted extension, X0 = (X + N' . Delta)/r, weight = 1/r.
    """

    lambda_mat: np.ndarray
    delta: np.ndarray
    t_from: float
    t_to: float

    def __post_init__(self):
        object.__setattr__(self, "lambda_mat", np.asarray(self.lambda_mat, dtype=float))
        object.__setattr__(self, "delta", np.asarray(self.delta, dtype=float))
        if self.t_to < self.t_from - 1e-12:
            raise TimeError(
                f"map runs backward: t_to = {self.t_to:g} < t_from = {self.t_from:g}"
            )

    def map_points(self, X, theta):
        """Source coordinates and weight for target points (X, theta)."""
        X = np.asarray(X, dtype=float)
        theta = np.asarray(theta, dtype=float)
        X, theta = np.broadcast_arrays(X, theta)
        lam = self.lambda_mat
        # det Lambda = 1, so the inverse is the adjugate.
        inv = np.array([[lam[1, 1], -lam[0, 1]], [-lam[1, 0], lam[0, 0]]])
        s, c = np.sin(theta), np.cos(theta)
        n1 = s * inv[0, 0] + c * inv[1, 0]
        n2 = s * inv[0, 1] + c * inv[1, 1]
        r = np.hypot(n1, n2)
        theta0 = np.arctan2(n1, n2)
        X0 = (X + n1 * self.delta[0] + n2 * self.delta[1]) / r
        neg = theta0 < 0.0
        theta0 = np.where(neg, theta0 + np.pi, theta0)
        wrap = theta0 >= np.pi
        theta0 = np.where(wrap, theta0 - np.pi, theta0)
        X0 = np.where(neg ^ wrap, -X0, X0)
        return X0, theta0, 1.0 / r

    @property
    def elapsed(self):
        return self.t_to - self.t_from


def optical_map(mi, t_from=0.0):
    """Affine tomogram map over [t_from, t_from + mi.time]."""
    lam = mi.lambda_mat
    det = lam[0, 0] * lam[1, 1] - lam[0, 1] * lam[1, 0]
    if abs(det - 1.0) > DET_TOL:
        raise StepError(f"det Lambda = {det:.10f} is not symplectic within {DET_TOL:g}")
    return OpticalAffineMap(
        lambda_mat=mi.lambda_mat,
        delta=mi.delta,
        t_from=float(t_from),
        t_to=float(t_from) + float(mi.time),
    )


def compose(outer, inner):
    """Map over [inner.t_from, outer.t_to] from maps meeting at inner.t_to.

    The integrals of motion substitute: Lambda_20 = Lambda_10 Lambda_21 and
    Delta_20 = Lambda_10 Delta_21 + Delta_10, where 1 labels the shared
    intermediate time.  This ordering is the one under which evolving by the
    composite equals evolving step by step.
    """
    if abs(inner.t_to - outer.t_from) > 1e-9:
        raise TimeError(
            f"maps do not chain: inner ends at t = {inner.t_to:g}, "
            f"outer starts at t = {outer.t_from:g}"
        )
    lam = inner.lambda_mat @ outer.lambda_mat
    delta = inner.lambda_mat @ outer.delta + inner.delta
    return OpticalAffineMap(
        lambda_mat=lam, delta=delta, t_from=inner.t_from, t_to=outer.t_to
    )


def evolve_tomogram(w0, m, interp="linear"):
    """Pull back a tomogram through an affine map: w(X,theta) = weight * w0(X0, theta0).

    Bilinear sampling on the twisted extension preserves nonnegativity and
    per-row normalization within grid tolerances; cubic sampling is sharper
    but can undershoot, so its negativity allowance is relaxed.
    """
    tg = w0.grid
    rows = np.empty_like(w0.values)
    out_of_range = False
    max_weight = 0.0
    for j, theta in enumerate(tg.thetas):
        X0, theta0, weight = m.map_points(tg.xs, theta)
        out_of_range = out_of_range or bool(np.any(np.abs(X0) > tg.x_max))
        max_weight = max(max_weight, float(np.max(weight)))
        rows[j] = weight * w0.sample_twisted(X0, theta0, interp=interp)
    if out_of_range:
        edge = max(np.abs(w0.values[:, 0]).max(), np.abs(w0.values[:, -1]).max())
        if edge > 1e-8:
            raise SupportError(
                "mapped source points leave the X window while the tomogram "
                f"still carries {edge:.3e} at its edge; enlarge x_max"
            )
    w = Tomogram(tg, rows)
    floor = min(0.0, float(w0.values.min()))
    base_tol = 1e-12 if interp == "linear" else 1e-6
    w.validate(neg_tol=base_tol + 1.01 * abs(floor) * max(1.0, max_weight), norm_tol=1e-3)
    return w
