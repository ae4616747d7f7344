from pydantic import Field

from .base import StrictModel


class ChannelParams(StrictModel):
    """mmWave V2X channel model parameters; defaults are the urban calibration at 60 GHz."""

    alpha:float = 38.77                 # Path loss constant, dB
    beta:float = 16.7                   # Frequency-dependent path loss exponent
    gamma:float = 18.2                  # Distance-dependent path loss exponent
    sigma_sf:float = Field(default=3.0, ge=0)      # Shadow fading std, dB
    mu_offset:float = 9.0               # Blocking loss mean offset, dB
    xi:float = 15.0                     # Blocking loss exponent
    bl_thresh:float = 41.0              # Blocking loss threshold, dB
    sigma_bl:float = Field(default=4.5, ge=0)      # Blocking loss std, dB
    f_mmwave:float = Field(default=60.0, gt=0)     # Center frequency, GHz


class LinkBudget(StrictModel):
    """Feasibility threshold and the SNR reference used for throughput.

    The defaults put the feasibility edge at SNR = 0 dB, a mean LOS range of about 200 m at 60 GHz.
    """

    max_total_loss:float = Field(default=110.0, gt=0)              # dB
    bandwidth:float = Field(default=2.16e9, gt=0)                  # Hz
    reference_rx_power_offset:float = 110.0                        # dB, loss at which SNR = 0 dB
