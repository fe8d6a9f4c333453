"""dmrsense - DMRS-based OFDM sensing simulator"""

__version__ = "0.1.0"
