"""Driven three-level Lambda system under relaxation plus dephasing.

Levels |1> and |2> are stable ground states, |3> the excited state.  A
resonant drive couples both ground states to |3>, Markovian relaxations
return population from |3>, and a separate reservoir dephases the ground
manifold through sigma_z = |2><2| - |1><1|.  Drive and relaxation pump the
system toward the dark state |D> = (|1> - |2>)/sqrt(2); dephasing converts
it to the bright state |B> = (|1> + |2>)/sqrt(2).

Four solvers compare treatments of that competition:

``quantum_darkstate_solution``
    Second order in the dephasing coupling, all orders in drive and
    relaxation: the two-time dephasing correlator is evaluated with the
    regression rule under the drive+relaxation semigroup.
``additive_me_solve``
    Memory dephasing term added to the drive/relaxation generator as an
    independent dissipator (no cross-dressing).
``me2_solve``
    Like the additive equation, but the dephasing history is dressed by the
    drive propagator; known to oscillate without damping and to leave the
    physical state space.
``markovian_dephasing_solve``
    Zero-memory dephasing as a plain Lindblad term of rate gamma_perp/2.

All solvers share the convention D[O]rho = {O^dag O, rho} - 2 O rho O^dag,
entering master equations as -(rate/2) * D[O] rho.  Density matrices are
plain 3x3 complex arrays; superoperators act on column-stacked 9-vectors.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .baths import ConstantUnit, KernelSpec, MarkovianDelta, Tabulated, kernel_values
from .errors import SolverError
from .two_bath import _validate_uniform_grid

__all__ = [
    "LambdaParams",
    "SIGMA_Z",
    "dark_state",
    "bright_state",
    "dark_projector",
    "transition",
    "drive_hamiltonian",
    "vec",
    "unvec",
    "commutator_superop",
    "dissipator_superop",
    "dressed_liouvillian",
    "Propagator",
    "propagate",
    "regression_correlator",
    "double_commutator_correlator",
    "quantum_darkstate_solution",
    "quantum_darkstate_states",
    "additive_me_solve",
    "me2_solve",
    "markovian_dephasing_solve",
    "dark_state_population",
    "min_eigenvalue",
]

#: Hermiticity drift (max-norm) above which a propagation step is rejected.
HERMITICITY_TOL = 1e-8

#: sigma_z on the ground doublet in the {|1>, |2>, |3>} basis.
SIGMA_Z = np.diag([-1.0, 1.0, 0.0]).astype(complex)


def transition(i: int, j: int) -> np.ndarray:
    """Operator |i><j| with 1-based level labels."""
    out = np.zeros((3, 3), dtype=complex)
    out[i - 1, j - 1] = 1.0
    return out


def dark_state() -> np.ndarray:
    """|D> = (|1> - |2>)/sqrt(2)."""
    return np.array([1.0, -1.0, 0.0], dtype=complex) / math.sqrt(2.0)


def bright_state() -> np.ndarray:
    """|B> = (|1> + |2>)/sqrt(2)."""
    return np.array([1.0, 1.0, 0.0], dtype=complex) / math.sqrt(2.0)


def dark_projector() -> np.ndarray:
    d = dark_state()
    return np.outer(d, d.conj())


def drive_hamiltonian(omega: float) -> np.ndarray:
    """Resonant drive (omega/2)(|1><3| + |2><3| + h.c.)."""
    h = (transition(1, 3) + transition(2, 3)) * (0.5 * omega)
    return h + h.conj().T


@dataclass(frozen=True)
class LambdaParams:
    """Drive, relaxation, and dephasing parameters of the Lambda system.

    ``kernel`` is the dephasing memory function K(tau): the flat
    ``ConstantUnit`` (long memory), ``MarkovianDelta(1/gamma_perp)``
    (zero memory), or a ``Tabulated`` sample.
    """

    omega: float
    gamma1: float
    gamma2: float
    gamma_perp: float
    kernel: KernelSpec = field(default_factory=ConstantUnit)

    def __post_init__(self):
        for name in ("omega", "gamma1", "gamma2", "gamma_perp"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0.0):
                raise ValueError(f"{name} must be finite and >= 0, got {value!r}")
        if not isinstance(self.kernel, (ConstantUnit, MarkovianDelta, Tabulated)):
            raise ValueError(
                "dephasing kernel must be ConstantUnit, MarkovianDelta, or Tabulated; "
                f"got {self.kernel!r}"
            )


def vec(rho: np.ndarray) -> np.ndarray:
    """Column-stack a 3x3 matrix into a 9-vector."""
    return np.asarray(rho, dtype=complex).reshape(9, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    """Inverse of :func:`vec`."""
    return np.asarray(v, dtype=complex).reshape((3, 3), order="F")


_I3 = np.eye(3, dtype=complex)


def _spre(a: np.ndarray) -> np.ndarray:
    return np.kron(_I3, a)


def _spost(a: np.ndarray) -> np.ndarray:
    return np.kron(a.T, _I3)


def commutator_superop(a: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> [a, rho]."""
    return _spre(a) - _spost(a)


def dissipator_superop(o: np.ndarray) -> np.ndarray:
    """Superoperator of D[o]rho = {o^dag o, rho} - 2 o rho o^dag."""
    odo = o.conj().T @ o
    return _spre(odo) + _spost(odo) - 2.0 * np.kron(o.conj(), o)


def dressed_liouvillian(p: LambdaParams) -> np.ndarray:
    """Generator of the drive + relaxation semigroup (no dephasing term).

    L0 rho = -i[H, rho] - sum_i (Gamma_i/2) D[|i><3|] rho.  Trace-preserving
    by construction; for positive drive and relaxation its unique stationary
    state is the dark projector.
    """
    gen = -1j * commutator_superop(drive_hamiltonian(p.omega))
    gen -= 0.5 * p.gamma1 * dissipator_superop(transition(1, 3))
    gen -= 0.5 * p.gamma2 * dissipator_superop(transition(2, 3))
    return gen


class Propagator:
    """Cached matrix exponentials e^{G t} of one generator.

    Exponentials are cached per time value, and uniform-grid families are
    built by repeated multiplication with the single-step exponential so
    correlator sweeps reuse each matrix instead of re-exponentiating.
    """

    def __init__(self, generator: np.ndarray):
        self.generator = np.asarray(generator, dtype=complex)
        if self.generator.ndim != 2 or self.generator.shape[0] != self.generator.shape[1]:
            raise ValueError("generator must be a square matrix")
        self._cache: dict[float, np.ndarray] = {}

    def matrix(self, t: float) -> np.ndarray:
        if t < 0:
            raise ValueError("t must be >= 0")
        key = float(t)
        out = self._cache.get(key)
        if out is None:
            out = expm(self.generator * key)
            self._cache[key] = out
        return out

    def grid_matrices(self, h: float, count: int) -> np.ndarray:
        """Array of e^{G j h} for j = 0 .. count-1."""
        out = np.empty((count, *self.generator.shape), dtype=complex)
        out[0] = np.eye(self.generator.shape[0])
        if count > 1:
            step = self.matrix(h)
            for j in range(1, count):
                out[j] = step @ out[j - 1]
        return out

    def apply(self, rho: np.ndarray, t: float) -> np.ndarray:
        return unvec(self.matrix(t) @ vec(rho))


def _check_hermiticity(rho: np.ndarray, where: str) -> None:
    drift = float(np.max(np.abs(rho - np.conj(np.swapaxes(rho, -1, -2)))))
    if drift > HERMITICITY_TOL:
        raise SolverError(f"hermiticity drift {drift:.3e} exceeds {HERMITICITY_TOL} in {where}")


def propagate(generator: np.ndarray, rho0: np.ndarray, t: float) -> np.ndarray:
    """Evolve rho0 to time t under e^{generator * t}.

    For many times under one generator, build a :class:`Propagator` once
    instead; this convenience wrapper exponentiates per call.
    """
    rho = Propagator(generator).apply(rho0, t)
    _check_hermiticity(rho, "propagate")
    return rho


def _default_rho0(rho0: np.ndarray | None) -> np.ndarray:
    if rho0 is None:
        return dark_projector()
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (3, 3):
        raise ValueError("rho0 must be a 3x3 matrix")
    return rho0


def regression_correlator(
    p: LambdaParams,
    t1: float,
    t2: float,
    t: float,
    a_op: np.ndarray,
    b_op: np.ndarray,
    observable: np.ndarray,
    *,
    a_position: str = "left",
    b_position: str = "left",
    rho0: np.ndarray | None = None,
) -> complex:
    """Multi-time average of A(t1), B(t2) and an observable O(t), 0<=t1<=t2<=t.

    Evaluated with the regression rule under the dressed (drive +
    relaxation) semigroup: propagate to t1, attach A, propagate to t2,
    attach B, propagate to t, trace against the observable.  ``a_position``
    / ``b_position`` give the operator's place relative to O(t) in the
    written product: operators standing to the *left* of the observable act
    on the evolving density operator from the right, and vice versa.  The
    four combinations supply every ordering a double commutator needs.
    """
    if not (0.0 <= t1 <= t2 <= t):
        raise ValueError(f"need 0 <= t1 <= t2 <= t, got t1={t1}, t2={t2}, t={t}")
    for name, position in (("a_position", a_position), ("b_position", b_position)):
        if position not in ("left", "right"):
            raise ValueError(f"{name} must be 'left' or 'right', got {position!r}")
    prop = Propagator(dressed_liouvillian(p))
    rho = prop.apply(_default_rho0(rho0), t1)
    rho = rho @ a_op if a_position == "left" else a_op @ rho
    rho = prop.apply(rho, t2 - t1)
    rho = rho @ b_op if b_position == "left" else b_op @ rho
    rho = prop.apply(rho, t - t2)
    return complex(np.trace(np.asarray(observable, dtype=complex) @ rho))


def double_commutator_correlator(
    p: LambdaParams,
    t1: float,
    t2: float,
    t: float,
    op: np.ndarray,
    observable: np.ndarray,
    rho0: np.ndarray | None = None,
) -> complex:
    """<[op(t1), [op(t2), observable(t)]]> under the dressed semigroup."""
    terms = (
        (+1, "left", "left"),   # <A(t1) B(t2) O(t)>
        (-1, "left", "right"),  # <A(t1) O(t) B(t2)>
        (-1, "right", "left"),  # <B(t2) O(t) A(t1)>
        (+1, "right", "right"),  # <O(t) B(t2) A(t1)>
    )
    return sum(
        sign
        * regression_correlator(
            p, t1, t2, t, op, op, observable,
            a_position=a_pos, b_position=b_pos, rho0=rho0,
        )
        for sign, a_pos, b_pos in terms
    )


def _require_memory_kernel(p: LambdaParams, op_name: str) -> None:
    if not isinstance(p.kernel, (ConstantUnit, Tabulated)):
        raise ValueError(f"{op_name} requires a ConstantUnit or Tabulated kernel, got {p.kernel!r}")


def _warn_perturbative_range(p: LambdaParams, t_max: float) -> None:
    if p.gamma_perp * t_max > 1.0 + 1e-12:
        warnings.warn(
            f"gamma_perp * t_max = {p.gamma_perp * t_max:.3g} > 1: the second-order "
            "dephasing expansion is outside its validity range",
            stacklevel=3,
        )


def _propagate_recording(gen: np.ndarray, w0: np.ndarray, n: int, h: float) -> np.ndarray:
    """Rows e^{gen j h} w0 for j = 0 .. n-1 (single expm, then stepping)."""
    out = np.empty((n, w0.size), dtype=complex)
    out[0] = w0
    if n > 1:
        step = expm(gen * h)
        w = w0.astype(complex)
        for j in range(1, n):
            w = step @ w
            out[j] = w
    return out


def _dephasing_once_augmented(p: LambdaParams, times: np.ndarray, rho0: np.ndarray):
    """Exact zeroth-order states and second-order dephasing correction.

    For K = 1 the nested memory integral of the second-order expansion is
    itself the top block of a matrix exponential: stack the generator as

        [[L, Cz, 0], [0, L, Cz], [0, 0, L]],         Cz = [sigma_z, .],

    and e^{G t} applied to (0, 0, vec(rho0)) carries
    iint_{0<=t1<=t2<=t} e^{L(t-t2)} Cz e^{L(t2-t1)} Cz e^{L t1} vec(rho0)
    in its top block.  No quadrature error enters.
    """
    n = times.size
    h = float(times[1] - times[0])
    gen0 = dressed_liouvillian(p)
    cz = commutator_superop(SIGMA_Z)
    zero = np.zeros((9, 9), dtype=complex)
    big = np.block([
        [gen0, cz, zero],
        [zero, gen0, cz],
        [zero, zero, gen0],
    ])
    w0 = np.concatenate([np.zeros(18, dtype=complex), vec(rho0)])
    rows = _propagate_recording(big, w0, n, h)
    correction_vecs = rows[:, 0:9]
    zeroth_vecs = rows[:, 18:27]
    return zeroth_vecs, correction_vecs


def _dephasing_once_trapezoid(
    p: LambdaParams,
    times: np.ndarray,
    rho0: np.ndarray,
    observable: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Zeroth-order <O>(t) and its second-order dephasing correction.

    Triangular trapezoidal quadrature of the double-time integral on the
    trajectory grid, with every multi-time average given by the regression
    composition  l(t-t2) . P(t2-t1) . Cz . P(t1) vec(rho0),  where
    l(d) = vec(O)^H e^{L d} Cz.  All propagators are powers of the one-step
    exponential, so the cost is O(n^2) small matrix products.
    """
    from scipy.signal import fftconvolve

    n = times.size
    h = float(times[1] - times[0])
    gen0 = dressed_liouvillian(p)
    cz = commutator_superop(SIGMA_Z)
    prop = Propagator(gen0)
    mats = prop.grid_matrices(h, n)

    v0 = vec(rho0)
    states = np.empty((n, 9), dtype=complex)
    states[0] = v0
    for j in range(1, n):
        states[j] = mats[1] @ states[j - 1]

    w_obs = vec(observable).conj()
    zeroth = states @ w_obs

    if isinstance(p.kernel, ConstantUnit):
        kv = np.ones(n)
    else:
        kv = kernel_values(p.kernel, times - times[0])
        if np.all(kv.imag == 0.0):
            kv = kv.real

    right = (cz @ states.T)  # r_i = Cz P(t_i) v0, shape (9, n)
    # l_d = w^H P(d h) Cz, built by repeated single-step multiplication.
    left = np.empty((n, 9), dtype=complex)
    u = w_obs.copy()
    left[0] = u @ cz
    for d in range(1, n):
        u = u @ mats[1]
        left[d] = u @ cz

    # Inner sums over t1 with unit weights; trapezoid edges fixed after.
    inner = np.zeros((9, n), dtype=complex)
    for s in range(n):
        inner[:, s:] += kv[s] * (mats[s] @ right[:, : n - s])
    p_r0 = np.empty((9, n), dtype=complex)
    for j in range(n):
        p_r0[:, j] = mats[j] @ right[:, 0]
    inner -= 0.5 * kv[np.newaxis, :] * p_r0
    inner -= 0.5 * kv[0] * right

    # Outer sum over t2 is a correlation of the l and inner sequences.
    conv = fftconvolve(left.T, inner, axes=1)[:, :n]
    total = conv.sum(axis=0)
    total -= 0.5 * np.einsum("nk,k->n", left, inner[:, 0])
    total -= 0.5 * left[0] @ inner
    return zeroth, h * h * total


def quantum_darkstate_states(
    p: LambdaParams,
    times: np.ndarray,
    rho0: np.ndarray | None = None,
) -> np.ndarray:
    """Full density-matrix trajectory of the second-order quantum solution.

    Available for the flat unit kernel only, where the correction is carried
    exactly by an augmented generator.  Returns an (n, 3, 3) array; being a
    truncated expansion the states are Hermitian and unit-trace but not
    guaranteed positive beyond the expansion's accuracy.
    """
    times = np.asarray(times, dtype=float)
    _validate_uniform_grid(times)
    if not isinstance(p.kernel, ConstantUnit):
        raise ValueError("full-state quantum output requires the ConstantUnit kernel")
    _warn_perturbative_range(p, float(times[-1]))
    rho0 = _default_rho0(rho0)
    zeroth_vecs, correction_vecs = _dephasing_once_augmented(p, times, rho0)
    vecs = zeroth_vecs - (0.5 * p.gamma_perp**2) * correction_vecs
    states = vecs.reshape(-1, 3, 3).transpose(0, 2, 1)  # unvec row-wise
    _check_hermiticity(states, "quantum_darkstate_states")
    return states


def quantum_darkstate_solution(
    p: LambdaParams,
    times: np.ndarray,
    rho0: np.ndarray | None = None,
    *,
    method: str = "auto",
) -> np.ndarray:
    """Dark-state population P_D(t) of the perturbative quantum solution.

    Second order in the dephasing coupling, all orders in drive and
    relaxation.  ``method`` selects how the double-time dephasing integral
    is evaluated: ``"exact"`` (augmented generator; ConstantUnit kernel
    only), ``"trapezoid"`` (triangular trapezoidal rule on the trajectory
    grid; any supported kernel), or ``"auto"`` (exact when available).
    Emits a warning when gamma_perp * t_max exceeds 1, outside the
    expansion's validity.
    """
    times = np.asarray(times, dtype=float)
    _validate_uniform_grid(times)
    _require_memory_kernel(p, "quantum_darkstate_solution")
    if method not in ("auto", "exact", "trapezoid"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto":
        method = "exact" if isinstance(p.kernel, ConstantUnit) else "trapezoid"
    if method == "exact":
        states = quantum_darkstate_states(p, times, rho0)
        return dark_state_population(states)
    _warn_perturbative_range(p, float(times[-1]))
    rho0 = _default_rho0(rho0)
    zeroth, correction = _dephasing_once_trapezoid(p, times, rho0, dark_projector())
    return (zeroth - (0.5 * p.gamma_perp**2) * correction).real


def _finalize_states(vecs: np.ndarray, where: str) -> np.ndarray:
    states = vecs.reshape(-1, 3, 3).transpose(0, 2, 1)
    _check_hermiticity(states, where)
    traces = np.einsum("nii->n", states).real
    drift = float(np.max(np.abs(traces - 1.0)))
    if drift > HERMITICITY_TOL:
        raise SolverError(f"trace drift {drift:.3e} exceeds {HERMITICITY_TOL} in {where}")
    return states


def additive_me_solve(
    p: LambdaParams,
    times: np.ndarray,
    rho0: np.ndarray | None = None,
) -> np.ndarray:
    """Trajectory of the additive master equation with memory dephasing.

    d(rho)/dt = L0 rho - (gamma_perp^2/2) int_0^t K(t-s) D[sigma_z] rho(s) ds.
    For K = 1 the history integral is replaced exactly by one auxiliary
    matrix M with dM/dt = rho (an augmented linear system, no quadrature);
    a MarkovianDelta kernel reduces to the Lindblad dephasing generator; a
    Tabulated kernel is integrated with the same predictor-corrector
    trapezoidal scheme as the amplitude solver.  Returns (n, 3, 3) states.
    """
    times = np.asarray(times, dtype=float)
    h = _validate_uniform_grid(times)
    rho0 = _default_rho0(rho0)
    gen0 = dressed_liouvillian(p)
    dz = dissipator_superop(SIGMA_Z)
    coupling = 0.5 * p.gamma_perp**2

    if isinstance(p.kernel, ConstantUnit):
        zero = np.zeros((9, 9), dtype=complex)
        big = np.block([
            [gen0, -coupling * dz],
            [np.eye(9, dtype=complex), zero],
        ])
        w0 = np.concatenate([vec(rho0), np.zeros(9, dtype=complex)])
        vecs = _propagate_recording(big, w0, times.size, h)[:, :9]
        return _finalize_states(vecs, "additive_me_solve")
    if isinstance(p.kernel, MarkovianDelta):
        gen = gen0 - coupling * p.kernel.rate * dz
        vecs = _propagate_recording(gen, vec(rho0), times.size, h)
        return _finalize_states(vecs, "additive_me_solve")

    kv = kernel_values(p.kernel, times - times[0])
    vecs = _history_trapezoid_solve(gen0, -coupling * dz, kv, vec(rho0), h)
    return _finalize_states(vecs, "additive_me_solve")


def _history_trapezoid_solve(
    gen: np.ndarray,
    memory_op: np.ndarray,
    kv: np.ndarray,
    v0: np.ndarray,
    h: float,
) -> np.ndarray:
    """Predictor-corrector trapezoidal integration of
    dv/dt = gen v + memory_op * int_0^t K(t-s) v(s) ds."""
    n = kv.size
    out = np.empty((n, v0.size), dtype=complex)
    out[0] = v0
    f_prev = gen @ v0  # memory integral empty at t = 0
    for j in range(1, n):
        hist = 0.5 * kv[j] * out[0]
        if j > 1:
            hist = hist + out[1:j].T @ kv[j - 1 : 0 : -1]
        base = h * hist
        v_pred = out[j - 1] + h * f_prev
        mem_pred = base + 0.5 * h * kv[0] * v_pred
        f_pred = gen @ v_pred + memory_op @ mem_pred
        out[j] = out[j - 1] + 0.5 * h * (f_prev + f_pred)
        mem = base + 0.5 * h * kv[0] * out[j]
        f_prev = gen @ out[j] + memory_op @ mem
    return out


def me2_solve(
    p: LambdaParams,
    times: np.ndarray,
    rho0: np.ndarray | None = None,
) -> np.ndarray:
    """Trajectory of the drive-dressed additive master equation.

    The dephasing history enters through U(t-s) = e^{-iHt'} sandwiches; the
    four memory terms (two written plus Hermitian conjugates) collapse to
    [sigma_z, W(t)] with a single auxiliary matrix

        W(t) = int_0^t U(t-s) [sigma_z, rho(s)] U(s-t) ds,
        dW/dt = [sigma_z, rho(t)] - i [H, W],

    so for K = 1 the pair (rho, W) again evolves under one augmented linear
    generator.  Tabulated kernels use direct history quadrature with the
    dressing applied per sample.  Returns (n, 3, 3) states.
    """
    times = np.asarray(times, dtype=float)
    h = _validate_uniform_grid(times)
    rho0 = _default_rho0(rho0)
    gen0 = dressed_liouvillian(p)
    cz = commutator_superop(SIGMA_Z)
    coupling = 0.5 * p.gamma_perp**2

    if isinstance(p.kernel, ConstantUnit):
        ch = commutator_superop(drive_hamiltonian(p.omega))
        big = np.block([
            [gen0, -coupling * cz],
            [cz, -1j * ch],
        ])
        w0 = np.concatenate([vec(rho0), np.zeros(9, dtype=complex)])
        vecs = _propagate_recording(big, w0, times.size, h)[:, :9]
        return _finalize_states(vecs, "me2_solve")
    if isinstance(p.kernel, MarkovianDelta):
        # Zero-memory dressing is the identity; identical to the additive form.
        gen = gen0 - coupling * p.kernel.rate * dissipator_superop(SIGMA_Z)
        vecs = _propagate_recording(gen, vec(rho0), times.size, h)
        return _finalize_states(vecs, "me2_solve")

    kv = kernel_values(p.kernel, times - times[0])
    if np.all(kv.imag == 0.0):
        kv = kv.real
    n = times.size
    u_h = expm(-1j * drive_hamiltonian(p.omega) * h)
    u_pow = np.empty((n, 3, 3), dtype=complex)
    u_pow[0] = np.eye(3)
    for j in range(1, n):
        u_pow[j] = u_h @ u_pow[j - 1]

    states = np.empty((n, 3, 3), dtype=complex)
    states[0] = rho0
    comm_hist = np.empty((n, 3, 3), dtype=complex)  # [sigma_z, rho(t_m)]
    sz = SIGMA_Z

    def comm(x):
        return sz @ x - x @ sz

    def rhs(rho, mem):
        drho = unvec(gen0 @ vec(rho))
        return drho - coupling * comm(mem)

    comm_hist[0] = comm(states[0])
    f_prev = rhs(states[0], np.zeros((3, 3), dtype=complex))
    for j in range(1, n):
        # Dressed history sum_m K(t_j - t_m) U^{j-m} [sz, rho_m] U^{-(j-m)}.
        idx = np.arange(j, 0, -1)
        sandwich = np.einsum(
            "m,mab,mbc,mcd->ad",
            kv[idx],
            u_pow[idx],
            comm_hist[:j],
            np.conj(np.swapaxes(u_pow[idx], 1, 2)),
        )
        sandwich -= 0.5 * kv[j] * (u_pow[j] @ comm_hist[0] @ u_pow[j].conj().T)
        base = h * sandwich
        rho_pred = states[j - 1] + h * f_prev
        mem_pred = base + 0.5 * h * kv[0] * comm(rho_pred)
        f_pred = rhs(rho_pred, mem_pred)
        states[j] = states[j - 1] + 0.5 * h * (f_prev + f_pred)
        comm_hist[j] = comm(states[j])
        mem = base + 0.5 * h * kv[0] * comm_hist[j]
        f_prev = rhs(states[j], mem)

    _check_hermiticity(states, "me2_solve")
    return states


def markovian_dephasing_solve(
    p: LambdaParams,
    times: np.ndarray,
    rho0: np.ndarray | None = None,
) -> np.ndarray:
    """Zero-memory dephasing: Lindblad term -(gamma_perp/2) D[sigma_z] rho."""
    times = np.asarray(times, dtype=float)
    h = _validate_uniform_grid(times)
    rho0 = _default_rho0(rho0)
    gen = dressed_liouvillian(p) - 0.5 * p.gamma_perp * dissipator_superop(SIGMA_Z)
    vecs = _propagate_recording(gen, vec(rho0), times.size, h)
    return _finalize_states(vecs, "markovian_dephasing_solve")


def dark_state_population(rho: np.ndarray) -> np.ndarray | float:
    """<D|rho|D> = (rho_11 + rho_22 - 2 Re rho_12)/2; works on trajectories."""
    rho = np.asarray(rho)
    out = 0.5 * (rho[..., 0, 0].real + rho[..., 1, 1].real - 2.0 * rho[..., 0, 1].real)
    return out if out.ndim else float(out)


def min_eigenvalue(rho: np.ndarray) -> np.ndarray | float:
    """Smallest eigenvalue of the Hermitian part; negative values flag
    unphysical states.  Works on single matrices or trajectories."""
    rho = np.asarray(rho, dtype=complex)
    herm = 0.5 * (rho + np.conj(np.swapaxes(rho, -1, -2)))
    vals = np.linalg.eigvalsh(herm)
    out = vals[..., 0].real
    return out if np.ndim(out) else float(out)
