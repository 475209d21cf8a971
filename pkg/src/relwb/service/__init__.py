from .session import FocusEntry, Session, SessionConfig, Workbench

__all__ = ["FocusEntry", "Session", "SessionConfig", "Workbench"]
