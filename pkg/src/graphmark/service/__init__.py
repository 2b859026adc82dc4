from . import models, ops
from .app import app, create_app

__all__ = ["models", "ops", "app", "create_app"]
