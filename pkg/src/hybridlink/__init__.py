"""Discrete-event simulator for a hybrid BLE / Wi-Fi capsule endoscopy link."""
from .engine import LinkSimulation, RunResult, simulate
from .handover import SwitchEvent, predict_latency
from .kernels import BACKEND as KERNEL_BACKEND
from .links import Protocol
from .scenario import ConfigError, Scenario

__all__ = ["LinkSimulation", "RunResult", "simulate", "SwitchEvent", "predict_latency",
           "KERNEL_BACKEND", "Protocol", "ConfigError", "Scenario"]
__version__ = "0.1.0"
