"""
Primary interface for the fcmstab package

Finite cell method toolkit with a data-driven estimate of the
stabilization parameter in Nitsche's method.
"""

from fcmstab._version import __version__
