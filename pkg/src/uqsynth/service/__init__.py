from .api import ApiError, QueryService, ServiceConfig

__all__ = ["QueryService", "ServiceConfig", "ApiError"]
