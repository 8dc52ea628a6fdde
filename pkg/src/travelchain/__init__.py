"""A self-contained permissioned ledger for travel-document workflows."""

__version__ = "0.1.0"
