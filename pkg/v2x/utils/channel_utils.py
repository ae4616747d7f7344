import math
import numpy as np

from schemas import ChannelParams, LinkBudget


MIN_DISTANCE:float = 1.0    # meters, lower edge of the path loss model


def effective_distance(d:float|np.ndarray) -> float|np.ndarray:
    """Clamps distances below 1 m (bumper-to-bumper antennas) up to the model's 1 m anchor."""
    return np.maximum(d, MIN_DISTANCE)


def path_loss(d:float, params:ChannelParams, shadow:float=0.0) -> float:
    """LOS path loss in dB.

        Parameters:
            d (float): link distance in meters, >= 1.
            params (ChannelParams): channel model parameters.
            shadow (float, optional): shadow fading sample in dB (0 for planning). Defaults to 0.

        Returns:
            float: alpha + beta * log10(f) + gamma * log10(d) + shadow
    """
    if not d >= MIN_DISTANCE:
        raise ValueError(f'Path loss is only defined for d >= {MIN_DISTANCE} m, got {d}.')

    return params.alpha + params.beta * math.log10(params.f_mmwave) + params.gamma * math.log10(d) + shadow


def path_loss_array(d:np.ndarray, params:ChannelParams) -> np.ndarray:
    """Vectorized mean path loss (shadow = 0) for distances already clamped to >= 1 m."""
    d = np.asarray(d, dtype=np.float64)
    if np.any(d < MIN_DISTANCE):
        raise ValueError(f'Path loss is only defined for d >= {MIN_DISTANCE} m, got min {d.min()}.')
    return params.alpha + params.beta * math.log10(params.f_mmwave) + params.gamma * np.log10(d)


def blocking_loss_mean(d:float|np.ndarray, params:ChannelParams) -> float|np.ndarray:
    """Mean vehicle blocking loss in dB: mu_offset + max(0, xi * log10(d) - bl_thresh)."""
    if np.any(np.asarray(d) < MIN_DISTANCE):
        raise ValueError(f'Blocking loss is only defined for d >= {MIN_DISTANCE} m, got {d}.')

    mean = params.mu_offset + np.maximum(0.0, params.xi * np.log10(d) - params.bl_thresh)
    return float(mean) if np.ndim(mean) == 0 else mean


def sample_blocking_loss(d:float, params:ChannelParams, rng:np.random.Generator) -> float:
    """Draws one blocking loss realization (dB) from Normal(blocking_loss_mean(d), sigma_bl)."""
    return float(rng.normal(blocking_loss_mean(d, params), params.sigma_bl))


def sample_shadow_fading(params:ChannelParams, rng:np.random.Generator) -> float:
    """Draws one shadow fading realization (dB) from Normal(0, sigma_sf)."""
    return float(rng.normal(0.0, params.sigma_sf))


def link_feasible(total_loss:float, budget:LinkBudget) -> bool:
    """Checks if the link closes: total loss within the budget (boundary inclusive)."""
    return total_loss <= budget.max_total_loss


def shannon_throughput(total_loss:float, budget:LinkBudget) -> float:
    """Shannon capacity (bits/second) of a link with the given total loss.

        The SNR is referenced so that total_loss == reference_rx_power_offset gives 0 dB.
    """
    if math.isinf(total_loss) and total_loss > 0: return 0.0

    snr_db:float = budget.reference_rx_power_offset - total_loss
    return budget.bandwidth * math.log2(1.0 + 10.0 ** (snr_db / 10.0))


def route_throughput(hop_throughputs:list[float]) -> float:
    """End-to-end throughput of a route: its weakest hop."""
    return min(hop_throughputs) if hop_throughputs else 0.0


def diversity_throughput(route_throughputs:list[float]) -> float:
    """Throughput of a vehicle served by repetition over several routes: its best alive route."""
    return max(route_throughputs) if route_throughputs else 0.0
