from .app import CanonicalJSONResponse, create_app, serve
from .state import StoreState

__all__ = ["CanonicalJSONResponse", "create_app", "serve", "StoreState"]
