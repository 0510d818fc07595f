class ScpoError(Exception): ...


class ConfigError(ScpoError): ...


class DimensionError(ScpoError, ValueError): ...


class UnsafeReferenceError(ScpoError): ...


class InfeasibleStartError(ScpoError): ...


class ConvergenceError(ScpoError): ...


class MetricError(ScpoError): ...


class SamplingError(ScpoError): ...


class CheckpointError(ScpoError): ...
