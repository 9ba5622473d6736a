# -*- coding: utf-8 -*-
from .dot_env import load_env
from .settings import Settings, settings

__all__ = (
    "load_env",
    "Settings",
    "settings",
)

__version__ = "0.1.1"
