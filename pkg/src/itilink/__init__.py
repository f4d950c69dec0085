"""itilink: reuse-1 OFDMA downlink simulation and interference-aware receivers.

Synthesizes multi-tower CFO-distorted downlinks, estimates all tower channels
jointly (JmLS) or per tower (OmLS), derotates by the mean carrier offset, and
detects the desired signal with the offset-corrected joint LLR over the full
interference super-constellation, feeding a Max-Log turbo decoder.
"""

__version__ = "0.1.0"

from . import (cfo, channel, detection, estimation, fec, harness, numerics,
               ofdm, pilots)

__all__ = ["cfo", "channel", "detection", "estimation", "fec", "harness",
           "numerics", "ofdm", "pilots", "__version__"]
