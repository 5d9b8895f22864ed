"""Core app initialization"""