"""taubench: exact workbench for ribbon-graph intersection numbers and
integrable-hierarchy / Virasoro verification suites."""

__version__ = "0.1.0"
