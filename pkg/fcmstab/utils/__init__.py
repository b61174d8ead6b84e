"""
Utilities for fcmstab
"""

from .common import *
from .constants import *
from .logging import *
