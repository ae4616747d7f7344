from schemas import VehicleOutcome


class MetricsAccumulator:

    t:list[int]                         # Timesteps in recording order
    cv_successful:list[int]             # Connected vehicles with an alive route, per timestep
    cv_total:list[int]                  # Connected vehicles present, per timestep
    mean_throughput:list[float|None]    # Mean over connected vehicles (bits/s), None when none present
    cv_successful_sum:int
    cv_total_sum:int
    throughput_sum:float                # Over all connected vehicle timesteps (failures count as 0)


    def __init__(self):
        self.t = []
        self.cv_successful = []
        self.cv_total = []
        self.mean_throughput = []
        self.cv_successful_sum = 0
        self.cv_total_sum = 0
        self.throughput_sum = 0.0


    def record(self, t:int, outcomes:list[VehicleOutcome]) -> None:
        """Adds the outcomes of one timestep."""
        successful:int = sum(1 for o in outcomes if o.success)
        total:int = len(outcomes)
        throughput:float = sum(o.throughput for o in outcomes)

        self.t.append(t)
        self.cv_successful.append(successful)
        self.cv_total.append(total)
        self.mean_throughput.append(throughput / total if total else None)

        self.cv_successful_sum += successful
        self.cv_total_sum += total
        self.throughput_sum += throughput


    def connectivity(self) -> float|None:
        """Overall connectivity, or None when no connected vehicle was ever present."""
        return self.cv_successful_sum / self.cv_total_sum if self.cv_total_sum else None


    def overall_throughput(self) -> float|None:
        return self.throughput_sum / self.cv_total_sum if self.cv_total_sum else None
