"""
Biphoton SFWM Toolkit

Narrowband biphoton wave packets from spontaneous four-wave mixing in an EIT
medium: exact model evaluation, closed-form checks, detector-chain Monte
Carlo and coincidence-histogram analysis.
"""

__version__ = "1.0"
__author__ = "Biphoton Toolkit Team"
__description__ = "Simulation and analysis of narrowband SFWM biphotons"
