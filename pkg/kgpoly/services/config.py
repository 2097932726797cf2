import os

DEFAULT_MEMO_CAP = 1_000_000


class Settings:
    def __init__(self) -> None:
        self.log_level = os.getenv("KGD_LOG_LEVEL", "WARNING").upper()

    @property
    def memo_cap(self) -> int:
        """Upper bound on diagrams visited by one migration search (KGD_MEMO_CAP)."""
        return self.positive_int("KGD_MEMO_CAP", DEFAULT_MEMO_CAP)

    def positive_int(self, name: str, default: int) -> int:
        raw = os.getenv(name, "").strip()
        if not raw:
            return default
        try:
            value = int(raw)
        except ValueError:
            raise RuntimeError(f"Invalid value for env var {name}: {raw!r}") from None
        if value < 1:
            raise RuntimeError(f"Env var {name} must be a positive integer, got {value}")
        return value


settings = Settings()
