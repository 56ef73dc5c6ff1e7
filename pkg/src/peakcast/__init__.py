"""Daily-peak solar energy forecasting under weather-forecast uncertainty."""

__version__ = "0.1.0"
