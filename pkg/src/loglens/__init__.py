"""loglens: a log analytics engine.

Unified log record model, template mining (drain / iplom / ael),
representations, clustering, statistical and sequence anomaly detection,
an evaluation harness, and a config-driven application layer with CLI
and HTTP service.
"""

__version__ = "0.1.0"
