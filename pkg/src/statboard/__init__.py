"""statboard: survey collection with live statistical reports.

Collects questionnaire responses and datasets over HTTP or the CLI,
stores them durably, and serves role-filtered reports (descriptive
statistics, X-bar/R control charts, principal components) that are
recomputed the moment new data arrives.
"""

__version__ = "0.1.0"
