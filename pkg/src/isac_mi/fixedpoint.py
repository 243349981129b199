"""Coupled deterministic-equivalent fixed points for the two Gram matrices.

The sensing branch characterizes the limiting spectrum of
B1 = Ghat S S' Ghat' (Ghat stacking the beamformed scatter channels) through
a coupled system in (g_c_tilde, g_c, scalar chain); the communication branch
does the same for B2 = H W W' H' through (g_e_tilde, g_e).  Both systems are
evaluated at a negative real spectral argument w = -sigma^2, where the
resolvent (wI - B)^-1 of a PSD matrix is well defined, and solved by damped
Picard iteration from the exact zero-channel solution.

Sign structure at w < 0 (enforced on return): g_c_tilde and g_e_tilde are
negative definite resolvent-type blocks, g_c and g_e are positive definite
E[SS']-type blocks, and the scalar chain satisfies phi >= 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._linalg import herm, inv_herm, min_eigval, rel_residual
from .correlation import CorrelationOps
from .model import Beamformer, ScenarioStats, effective_los

SIGN_EIG_FLOOR = -1e-8


class ConvergenceError(RuntimeError):
    """The damped Picard iteration did not reach a valid converged state."""

    def __init__(self, branch: str, iterations: int, residual: float, reason: str = "did not converge"):
        super().__init__(
            f"{branch} fixed point {reason} after {iterations} iterations "
            f"(final residual {residual:.3e})"
        )
        self.branch = branch
        self.iterations = iterations
        self.residual = residual


@dataclass(frozen=True)
class SpectralPoint:
    """Negative real spectral argument w = -sigma^2."""

    w: float

    def __post_init__(self):
        if not self.w < 0.0:
            raise ValueError(f"spectral argument must be negative, got {self.w}")

    @classmethod
    def from_noise_power(cls, sigma2: float) -> "SpectralPoint":
        return cls(-float(sigma2))


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-10
    max_iter: int = 5000
    damping: float = 0.5
    trace_path: str | None = None

    def __post_init__(self):
        if self.tol <= 0.0:
            raise ValueError("tol must be positive")
        if not (0.0 < self.damping <= 1.0):
            raise ValueError("damping must be in (0, 1]")


@dataclass(frozen=True)
class SensingFixedPoint:
    """Converged sensing system.  Scalar-multiple-of-identity blocks are stored
    as scalars: g_d_tilde = g_d_scalar * I_{n_s}, phi_tilde = phi_tilde_scalar * I_m,
    phi = phi_scalar * I_{n_s}."""

    g_c_tilde: np.ndarray  # (L n_r, L n_r) Hermitian, negative definite
    g_c: np.ndarray  # (m, m) Hermitian, positive definite
    g_d_scalar: float
    g_dd: np.ndarray  # (m, m) Hermitian
    psi_tilde_blocks: tuple[np.ndarray, ...]  # L blocks (n_r, n_r)
    psi: np.ndarray  # (m, m)
    phi_tilde_scalar: float
    phi_scalar: float
    pi: np.ndarray  # (m, m)
    residual: float
    iterations: int


@dataclass(frozen=True)
class CommFixedPoint:
    g_e_tilde: np.ndarray  # (n_u, n_u) Hermitian, negative definite
    g_e: np.ndarray  # (m, m) Hermitian, positive definite
    omega_tilde: np.ndarray  # (n_u, n_u)
    omega: np.ndarray  # (m, m)
    residual: float
    iterations: int


def _diag_block(a: np.ndarray, l: int, n: int) -> np.ndarray:
    return a[l * n : (l + 1) * n, l * n : (l + 1) * n]


def _block_diag(blocks) -> np.ndarray:
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n), dtype=complex)
    i = 0
    for b in blocks:
        out[i : i + b.shape[0], i : i + b.shape[0]] = b
        i += b.shape[0]
    return out


def _write_trace(path: str | None, rows: list[tuple[int, float]]) -> None:
    if path is None:
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("iteration,residual\n")
        for it, res in rows:
            fh.write(f"{it},{res:.6e}\n")


class _SensingSystem:
    """Right-hand sides of the sensing equations at fixed (stats, W, w)."""

    def __init__(self, stats: ScenarioStats, w_bf: Beamformer, w: float):
        self.ops = CorrelationOps(stats)
        self.w_bf = w_bf
        self.w = w
        self.dims = stats.dims
        self.g_eff, _, _ = effective_los(stats, w_bf)

    def psi_tilde_blocks(self, g_c: np.ndarray) -> list[np.ndarray]:
        eye = np.eye(self.dims.n_r)
        return [
            self.w * eye - self.ops.eta_tilde_w(l, g_c, self.w_bf)
            for l in range(self.dims.num_scatter)
        ]

    def psi(self, g_c_tilde: np.ndarray) -> np.ndarray:
        out = np.zeros((self.dims.m, self.dims.m), dtype=complex)
        for l in range(self.dims.num_scatter):
            out -= self.ops.eta_w(l, _diag_block(g_c_tilde, l, self.dims.n_r), self.w_bf)
        return herm(out)

    def delta(self, psi: np.ndarray, psi_t_blocks) -> np.ndarray:
        """psi - g_eff' psi_tilde^-1 g_eff, accumulated blockwise."""
        out = psi.astype(complex).copy()
        n_r = self.dims.n_r
        for l, block in enumerate(psi_t_blocks):
            g_l = self.g_eff[l * n_r : (l + 1) * n_r, :]
            out -= g_l.conj().T @ inv_herm(block, "sensing psi_tilde block inverse") @ g_l
        return herm(out)

    def rhs(self, g_c, g_c_tilde, phi):
        """One Picard evaluation: returns (rhs_g_c_tilde, rhs_g_c, rhs_phi, derived)."""
        m = self.dims.m
        psi_t = self.psi_tilde_blocks(g_c)
        psi = self.psi(g_c_tilde)
        pi = psi + phi * np.eye(m)  # psi - phi_tilde^-1 with phi_tilde = -(1/phi) I
        pi_inv = inv_herm(pi, "sensing pi inverse")
        full = _block_diag(psi_t) - self.g_eff @ pi_inv @ self.g_eff.conj().T
        rhs_g_c_tilde = herm(inv_herm(full, "sensing g_c_tilde equation"))
        delta = self.delta(psi, psi_t)
        rhs_g_c = herm(inv_herm(delta + phi * np.eye(m), "sensing g_c equation"))
        # g_d = (phi_tilde - delta^-1)^-1 via phi_tilde^-1 + phi_tilde^-1 (delta - phi_tilde^-1)^-1 phi_tilde^-1
        g_dd = herm(-phi * np.eye(m) + phi**2 * rhs_g_c)
        rhs_phi = 1.0 - float(np.trace(g_dd).real) / self.dims.n_s
        return rhs_g_c_tilde, rhs_g_c, rhs_phi, (psi_t, psi, pi, delta, g_dd)


def solve_sensing(
    stats: ScenarioStats,
    w_bf: Beamformer,
    point: SpectralPoint,
    opts: SolverOptions = SolverOptions(),
    initial: SensingFixedPoint | None = None,
) -> SensingFixedPoint:
    """Solve the sensing deterministic-equivalent system at w = point.w < 0.

    Starts from the exact zero-channel solution, or warm-starts from the
    state of a previous solve when `initial` is given.
    """
    dims = stats.dims
    system = _SensingSystem(stats, w_bf, point.w)
    ln_r = dims.num_scatter * dims.n_r

    if initial is not None:
        g_c = initial.g_c.astype(complex)
        g_c_tilde = initial.g_c_tilde.astype(complex)
        phi = float(initial.phi_scalar)
    else:
        # Zero-channel solution as the starting point.
        g_c = np.eye(dims.m, dtype=complex)
        g_c_tilde = np.eye(ln_r, dtype=complex) / point.w
        phi = 1.0

    alpha = opts.damping
    trace_rows: list[tuple[int, float]] = []
    residual = np.inf
    for it in range(opts.max_iter + 1):
        rhs_gct, rhs_gc, rhs_phi, _ = system.rhs(g_c, g_c_tilde, phi)
        residual = max(
            rel_residual(g_c_tilde, rhs_gct),
            rel_residual(g_c, rhs_gc),
            rel_residual(phi, rhs_phi),
        )
        trace_rows.append((it, residual))
        if residual <= opts.tol:
            # Polish: take the undamped step, then restate the residual at it.
            g_c_tilde, g_c, phi = rhs_gct, rhs_gc, rhs_phi
            rhs_gct, rhs_gc, rhs_phi, derived = system.rhs(g_c, g_c_tilde, phi)
            residual = max(
                rel_residual(g_c_tilde, rhs_gct),
                rel_residual(g_c, rhs_gc),
                rel_residual(phi, rhs_phi),
            )
            _write_trace(opts.trace_path, trace_rows)
            psi_t, psi, pi, delta, g_dd = derived
            fp = SensingFixedPoint(
                g_c_tilde=g_c_tilde,
                g_c=g_c,
                g_d_scalar=1.0 / phi,
                g_dd=g_dd,
                psi_tilde_blocks=tuple(psi_t),
                psi=psi,
                phi_tilde_scalar=-1.0 / phi,
                phi_scalar=phi,
                pi=pi,
                residual=residual,
                iterations=it,
            )
            _check_sensing_signs(fp)
            return fp
        if it == opts.max_iter:
            break
        g_c = herm((1.0 - alpha) * g_c + alpha * rhs_gc)
        g_c_tilde = herm((1.0 - alpha) * g_c_tilde + alpha * rhs_gct)
        phi = (1.0 - alpha) * phi + alpha * rhs_phi

    _write_trace(opts.trace_path, trace_rows)
    raise ConvergenceError("sensing", opts.max_iter, residual)


def _check_sensing_signs(fp: SensingFixedPoint) -> None:
    if min_eigval(-fp.g_c_tilde) < SIGN_EIG_FLOOR or min_eigval(fp.g_c) < SIGN_EIG_FLOOR:
        raise ConvergenceError(
            "sensing", fp.iterations, fp.residual, reason="violated the resolvent sign structure"
        )


def residual_sensing(
    fp: SensingFixedPoint, stats: ScenarioStats, w_bf: Beamformer, point: SpectralPoint
) -> float:
    """Max relative residual of every stored sensing equation at the stored state."""
    system = _SensingSystem(stats, w_bf, point.w)
    dims = stats.dims
    m_eye = np.eye(dims.m)

    psi_t_rhs = system.psi_tilde_blocks(fp.g_c)
    psi_rhs = system.psi(fp.g_c_tilde)
    phi_tilde_inv = 1.0 / fp.phi_tilde_scalar
    pi_rhs = fp.psi - phi_tilde_inv * m_eye
    full = _block_diag(fp.psi_tilde_blocks) - system.g_eff @ inv_herm(
        fp.pi, "sensing pi inverse"
    ) @ system.g_eff.conj().T
    gct_rhs = inv_herm(full, "sensing g_c_tilde equation")
    delta = system.delta(fp.psi, fp.psi_tilde_blocks)
    gc_rhs = inv_herm(delta - phi_tilde_inv * m_eye, "sensing g_c equation")
    gdd_rhs = phi_tilde_inv * m_eye + phi_tilde_inv**2 * inv_herm(
        delta - phi_tilde_inv * m_eye, "sensing g_d equation"
    )

    residuals = [
        max(rel_residual(fp.psi_tilde_blocks[l], psi_t_rhs[l]) for l in range(dims.num_scatter)),
        rel_residual(fp.psi, psi_rhs),
        rel_residual(fp.phi_tilde_scalar, -fp.g_d_scalar),
        rel_residual(fp.phi_scalar, 1.0 - float(np.trace(fp.g_dd).real) / dims.n_s),
        rel_residual(fp.pi, pi_rhs),
        rel_residual(fp.g_c_tilde, gct_rhs),
        rel_residual(fp.g_c, gc_rhs),
        rel_residual(fp.g_d_scalar, 1.0 / fp.phi_scalar),
        rel_residual(fp.g_dd, gdd_rhs),
    ]
    return float(max(residuals))


class _CommSystem:
    def __init__(self, stats: ScenarioStats, w_bf: Beamformer, w: float):
        self.ops = CorrelationOps(stats)
        self.w_bf = w_bf
        self.w = w
        self.dims = stats.dims
        _, self.h_eff, _ = effective_los(stats, w_bf)

    def omega_tilde(self, g_e: np.ndarray) -> np.ndarray:
        return self.w * np.eye(self.dims.n_u) - self.ops.tau_tilde_w(g_e, self.w_bf)

    def omega(self, g_e_tilde: np.ndarray) -> np.ndarray:
        return np.eye(self.dims.m) - self.ops.tau_w(g_e_tilde, self.w_bf)

    def rhs(self, g_e, g_e_tilde):
        om_t = self.omega_tilde(g_e)
        om = self.omega(g_e_tilde)
        rhs_get = herm(
            inv_herm(
                om_t
                - self.h_eff @ inv_herm(om, "comm omega inverse") @ self.h_eff.conj().T,
                "comm g_e_tilde equation",
            )
        )
        rhs_ge = herm(
            inv_herm(
                om
                - self.h_eff.conj().T
                @ inv_herm(om_t, "comm omega_tilde inverse")
                @ self.h_eff,
                "comm g_e equation",
            )
        )
        return rhs_get, rhs_ge, (om_t, om)


def solve_comm(
    stats: ScenarioStats,
    w_bf: Beamformer,
    point: SpectralPoint,
    opts: SolverOptions = SolverOptions(),
    initial: CommFixedPoint | None = None,
) -> CommFixedPoint:
    """Solve the communication deterministic-equivalent system at w = point.w < 0."""
    dims = stats.dims
    system = _CommSystem(stats, w_bf, point.w)

    if initial is not None:
        g_e = initial.g_e.astype(complex)
        g_e_tilde = initial.g_e_tilde.astype(complex)
    else:
        g_e = np.eye(dims.m, dtype=complex)
        g_e_tilde = np.eye(dims.n_u, dtype=complex) / point.w

    alpha = opts.damping
    trace_rows: list[tuple[int, float]] = []
    residual = np.inf
    for it in range(opts.max_iter + 1):
        rhs_get, rhs_ge, _ = system.rhs(g_e, g_e_tilde)
        residual = max(rel_residual(g_e_tilde, rhs_get), rel_residual(g_e, rhs_ge))
        trace_rows.append((it, residual))
        if residual <= opts.tol:
            g_e_tilde, g_e = rhs_get, rhs_ge
            rhs_get, rhs_ge, derived = system.rhs(g_e, g_e_tilde)
            residual = max(rel_residual(g_e_tilde, rhs_get), rel_residual(g_e, rhs_ge))
            _write_trace(opts.trace_path, trace_rows)
            om_t, om = derived
            fp = CommFixedPoint(
                g_e_tilde=g_e_tilde,
                g_e=g_e,
                omega_tilde=om_t,
                omega=om,
                residual=residual,
                iterations=it,
            )
            if min_eigval(-fp.g_e_tilde) < SIGN_EIG_FLOOR or min_eigval(fp.g_e) < SIGN_EIG_FLOOR:
                raise ConvergenceError(
                    "comm", it, residual, reason="violated the resolvent sign structure"
                )
            return fp
        if it == opts.max_iter:
            break
        g_e = herm((1.0 - alpha) * g_e + alpha * rhs_ge)
        g_e_tilde = herm((1.0 - alpha) * g_e_tilde + alpha * rhs_get)

    _write_trace(opts.trace_path, trace_rows)
    raise ConvergenceError("comm", opts.max_iter, residual)


def residual_comm(
    fp: CommFixedPoint, stats: ScenarioStats, w_bf: Beamformer, point: SpectralPoint
) -> float:
    """Max relative residual of the four stored communication equations."""
    system = _CommSystem(stats, w_bf, point.w)
    om_t_rhs = system.omega_tilde(fp.g_e)
    om_rhs = system.omega(fp.g_e_tilde)
    get_rhs = inv_herm(
        fp.omega_tilde
        - system.h_eff @ inv_herm(fp.omega, "comm omega inverse") @ system.h_eff.conj().T,
        "comm g_e_tilde equation",
    )
    ge_rhs = inv_herm(
        fp.omega
        - system.h_eff.conj().T
        @ inv_herm(fp.omega_tilde, "comm omega_tilde inverse")
        @ system.h_eff,
        "comm g_e equation",
    )
    return float(
        max(
            rel_residual(fp.omega_tilde, om_t_rhs),
            rel_residual(fp.omega, om_rhs),
            rel_residual(fp.g_e_tilde, get_rhs),
            rel_residual(fp.g_e, ge_rhs),
        )
    )
