import logging
import os

from dotenv import load_dotenv

logger = logging.getLogger("syncscope")

class RuntimeSettings:
    """Process-level settings read from the environment (and a .env file if present)."""

    def __init__(self):
        load_dotenv()

        # Worker cap for per-mode criterion evaluation; 1 gives the deterministic CI mode
        self.threads = self._read_threads(os.getenv("SYNCSCOPE_THREADS"))

        self.log_level = self._read_log_level(os.getenv("SYNCSCOPE_LOG_LEVEL", "INFO"))

    def _read_log_level(self, raw: str) -> int:
        # logging also exports non-level attributes such as BASIC_FORMAT
        level = logging.getLevelName(raw.strip().upper())
        if not isinstance(level, int):
            logger.warning(f"Ignoring SYNCSCOPE_LOG_LEVEL={raw!r}: not a logging level")
            return logging.INFO
        return level

    def _read_threads(self, raw) -> int:
        default = os.cpu_count() or 1
        if raw is None or raw.strip() == "":
            return default
        try:
            value = int(raw)
        except ValueError:
            logger.warning(f"Ignoring SYNCSCOPE_THREADS={raw!r}: not an integer")
            return default
        return max(1, value)
