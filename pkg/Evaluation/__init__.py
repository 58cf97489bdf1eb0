"""恢复质量指标、多种子基准测试与运行时间剖析"""

from .benchmark import BenchmarkEnv, BenchmarkResult, run_benchmark
from .recovery import RecoveryReport, recovery_report
from .timing import TimingProfile, timing_profile

__all__ = [
    "BenchmarkEnv",
    "BenchmarkResult",
    "RecoveryReport",
    "TimingProfile",
    "recovery_report",
    "run_benchmark",
    "timing_profile",
]
