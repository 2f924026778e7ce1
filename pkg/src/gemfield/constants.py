"""Physical constants (SI) and numerical limits shared by both backends."""

from scipy import constants as _sc

EPS0 = _sc.epsilon_0
MU0 = _sc.mu_0
C0 = _sc.speed_of_light

# Any |field| above this (or non-finite) aborts a run.
DIVERGENCE_LIMIT = 1e30
