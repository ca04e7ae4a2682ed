"""Services layer for pq-eigen."""

from . import repository
from . import orchestration

__all__ = ['repository', 'orchestration']
