"""Leg odometry + VIO fusion: simulator, error-state EKF and RPE evaluation."""

from ._legvio import (
    Config,
    ConfigError,
    Estimate,
    SimRun,
    default_config,
    estimate,
    fk_foot,
    jac_foot,
    load_config,
    parse_config,
    preintegrate,
    rpe,
    simulate,
    so3_exp,
    so3_log,
    variants,
    yaw_gravity_decompose,
)

__all__ = [
    "Config",
    "ConfigError",
    "Estimate",
    "SimRun",
    "default_config",
    "estimate",
    "fk_foot",
    "jac_foot",
    "load_config",
    "parse_config",
    "preintegrate",
    "rpe",
    "simulate",
    "so3_exp",
    "so3_log",
    "variants",
    "yaw_gravity_decompose",
]
