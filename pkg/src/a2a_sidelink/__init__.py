"""Long-range air-to-air NR sidelink Mode-2: link analysis and slot-level simulation."""

__version__ = "0.1.0"
