from .ErrorHeatmap import ErrorHeatmap
from .LinkSampler import LinkSampler
from .TopologySchedule import TopologySchedule
from .MetricsAccumulator import MetricsAccumulator
from .MetricsTimeline import MetricsTimeline
from .SimulationEngine import SimulationEngine
from .SweepRunner import SweepRunner
