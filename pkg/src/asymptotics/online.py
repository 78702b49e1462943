"""Streaming normalization objects for the Monte Carlo harness.

OnlineDecomposition follows a block of replications step by step and keeps
Γ, ⟨L⟩, L, the averaging weights and the averages without storing paths. The
recursions are the ones used by asymptotic_decomposition and the averaging
helpers, so a single run gives the same terminal values either way.
"""
import logging
from typing import Dict, Optional, Sequence

import numpy as np

from src.asymptotics.averaging import WeightKind
from src.config import settings
from src.core.grid import TimeGrid
from src.models.spec import ModelSpec, like

logger = logging.getLogger(__name__)


class OnlineDecomposition:
    def __init__(self, grid: TimeGrid, weight_kind: WeightKind = WeightKind.ALPHA_WEIGHT,
                 alpha: float = 1.0, deltas: Sequence[float] = (),
                 checkpoints: Sequence[int] = ()):
        self._grid = grid
        self._kind = WeightKind(weight_kind)
        self._alpha = float(alpha)
        self._deltas = tuple(float(d) for d in deltas)
        self._checkpoints = sorted(set(int(c) for c in checkpoints) | {grid.n_steps})
        self.snapshots: Dict[int, Dict[str, np.ndarray]] = {}

    def start(self, model: ModelSpec, n_reps: int) -> None:
        self._model = model
        self._gamma_path = model.gamma_path()
        ones = np.ones(n_reps)
        self.z = np.full(n_reps, model.z0, dtype=float)
        self.Gamma = ones.copy()
        self.bracket = ones.copy()
        self.martingale = np.zeros(n_reps)
        self.eps_alpha = ones.copy()
        self.zbar_alpha = self.z.copy()
        self.log_eps = np.zeros(n_reps)
        self.zbar = self.z.copy()
        self.snapshots = {}
        if 0 in self._checkpoints:
            self._snapshot(0)

    def observe(self, i, u, z, dm, d_qc, active):
        spec = self._model
        dK = self._grid.dK[i - 1]
        jump = self._grid.jump_flag[i - 1]
        zeros = np.zeros_like(u)

        beta = like(spec.beta(i), u)
        excised = np.abs(beta * dK - 1.0) <= settings.numerics.excision_tol
        x = np.where(excised, 0.0, beta) * dK
        factor = 1.0 - x if jump else np.exp(-x)
        self.Gamma = self.Gamma / factor

        ell0 = like(spec.noise_coeff_field(i, zeros), u)
        h00 = like(spec.qc_density(i, zeros, zeros), u)
        self.martingale = self.martingale + self.Gamma * ell0 * dm
        self.bracket = self.bracket + self.Gamma ** 2 * h00 * dK

        # ε^(α) with α = 1 always runs for the self-normalized averaged statistic
        eps_prev = self.eps_alpha
        self.eps_alpha = eps_prev + beta * self.Gamma ** 2 / self.bracket * dK
        rho = eps_prev / self.eps_alpha
        self.zbar_alpha = rho * self.zbar_alpha + (1.0 - rho) * u

        log_step = self._log_weight_step(i, beta, dK, jump)
        rho = np.exp(-log_step)
        self.log_eps = self.log_eps + log_step
        self.zbar = rho * self.zbar + (1.0 - rho) * u

        self.z = z
        if i in self._checkpoints:
            self._snapshot(i)

    def _log_weight_step(self, i, beta, dK, jump) -> np.ndarray:
        if self._kind == WeightKind.PLAIN_K:
            K = self._grid.K
            return np.full_like(beta, np.log1p(dK / (1.0 + K[i - 1])))
        if self._kind == WeightKind.ALPHA_WEIGHT:
            eps = np.exp(self.log_eps)
            increment = self._alpha * beta * self.Gamma ** 2 / self.bracket * dK
            return np.log1p(increment / eps)
        g = like(self._model.weight_g(i), beta) * dK
        return np.log1p(g) if jump else g

    def _snapshot(self, i: int) -> None:
        root = np.sqrt(self.bracket)
        chi = self.Gamma / root
        snap = {
            "z": self.z.copy(),
            "zbar": self.zbar.copy(),
            "zbar_alpha": self.zbar_alpha.copy(),
            "eps_alpha": self.eps_alpha.copy(),
            "chi": chi,
            "remainder": chi * self.z - self.martingale / root,
        }
        gamma = self._gamma_path[i]
        for delta in self._deltas:
            snap[f"rate_{delta:g}"] = gamma ** delta * self.z ** 2
        self.snapshots[i] = snap

    def at(self, i: Optional[int] = None) -> Dict[str, np.ndarray]:
        return self.snapshots[self._grid.n_steps if i is None else i]
