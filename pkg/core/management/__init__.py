"""Core management commands"""