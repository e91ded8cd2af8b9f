from dataclasses import dataclass, field

import numpy as np


@dataclass(eq=False)
class Trajectory:
    """Recorded states of one run with the energies of every monitor.

    ``energies`` holds ``H_bar`` per monitor; ``dx_volumes`` the factor that
    turns it into the reported ``H_bar * dx``. ``solver_stats`` has one entry
    per step taken (not per recorded sample).
    """

    times: np.ndarray
    states: np.ndarray
    steps: np.ndarray
    energies: dict
    dx_volumes: dict
    solver_stats: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        self.steps = np.asarray(self.steps, dtype=int)
        n = len(self.times)
        if self.states.shape[0] != n or len(self.steps) != n:
            raise ValueError("times, states and steps must have equal length")
        for name, series in self.energies.items():
            if len(series) != n:
                raise ValueError(f"energy series {name!r} has length {len(series)}, expected {n}")
        if n > 1 and np.any(np.diff(self.times) * np.sign(self.times[-1] - self.times[0]) <= 0):
            raise ValueError("times must be strictly monotone")

    def energy_dx(self, name):
        return np.asarray(self.energies[name]) * self.dx_volumes[name]

    @property
    def final_state(self):
        return self.states[-1]


def record(system, times, states, steps, solver_stats=(), metadata=None):
    """Build a trajectory, evaluating every monitor once per recorded state."""
    states = np.asarray(states, dtype=float)
    energies = {m.name: np.array([m.energy(u) for u in states]) for m in system.monitors}
    dx = {m.name: m.dx_volume for m in system.monitors}
    md = {"system": system.name, "dx_volume": system.driver.dx_volume}
    md.update(metadata or {})
    return Trajectory(times, states, steps, energies, dx, list(solver_stats), md)
