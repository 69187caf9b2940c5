# Logging utilities
