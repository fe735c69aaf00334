"""
coalspec - coalitional spectrum sensing and access simulator
"""

__version__ = "0.1.0"
