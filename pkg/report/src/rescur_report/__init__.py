from .render import SchemaError, render, main

__all__ = ["SchemaError", "render", "main"]
