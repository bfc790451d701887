"""Hybrid-action RL with a learned latent action space.

The package bundles four layers: a numpy autodiff kernel (hyar.numkit), five
parameterized-action benchmark environments (hyar.envs), the action
representation model (hyar.representation), latent-space TD3/DDPG agents
(hyar.agents), and a reproducible training/evaluation harness (hyar.harness)
with a small CLI (hyar.cli).
"""

__version__ = "0.1.0"
