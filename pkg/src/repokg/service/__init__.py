"""HTTP service: configuration, audit logging, graph registry, endpoints."""

from .app import create_app
from .audit import AuditLog, AuditRecord
from .config import ServiceConfig
from .registry import GraphRegistry, Job, JobRunner

__all__ = ["create_app", "ServiceConfig", "AuditLog", "AuditRecord", "GraphRegistry", "Job", "JobRunner"]
