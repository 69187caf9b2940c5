"""Configuration loader for environment variables and pipeline settings."""

import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, Optional

from dotenv import load_dotenv
from pydantic import ValidationError as PydanticValidationError

from .models import PipelineConfig

# Load environment variables from .env file
load_dotenv()


class Config:
    """Runtime settings for the MENET pipeline."""

    # Logging Configuration
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")
    LOG_FILE: str = os.getenv("LOG_FILE", "menet.log")
    LOG_MAX_SIZE: int = 10 * 1024 * 1024  # 10MB
    LOG_BACKUP_COUNT: int = 30

    # Parallelism for stochastic stages when not deterministic
    WORKERS: int = int(os.getenv("MENET_WORKERS", "1"))

    # Workdir artifact names
    DOCUMENTS_FILE: str = "documents.bin"
    SPLIT_MANIFEST: str = "splits.json"
    REJECTS_FILE: str = "rejects.json"
    FEATURES_DIR: str = "features"
    FEATURE_SUFFIX: str = ".mfs"
    VOCABULARY_FILE: str = "vocabulary.json"
    GRAPH_FILE: str = "mention_graph.tsv"
    CLASS_TABLE_FILE: str = "class_table.csv"
    CHECKPOINT_FILE: str = "model.ckpt"
    HISTORY_FILE: str = "history.csv"
    REPORT_FILE: str = "eval_report.json"
    PREDICTIONS_FILE: str = "predictions.csv"

    # Mention handles, matched case-insensitively
    MENTION_PATTERN: str = r"@\w+"

    @classmethod
    def workers(cls, deterministic: bool) -> int:
        """Worker count for stochastic stages."""
        return 1 if deterministic else max(1, cls.WORKERS)


def load_pipeline_config(
    path: Optional[str] = None,
    overrides: Optional[Dict[str, Any]] = None
) -> PipelineConfig:
    """
    Load the pipeline configuration from a TOML file.

    Args:
        path: TOML file; shipped defaults when None
        overrides: Top-level or dotted keys (``"paths.workdir"``) taking
            precedence over file values

    Returns:
        PipelineConfig: Validated configuration

    Raises:
        ValidationError: If the file is missing, unparsable or invalid
    """
    from .validators import ValidationError

    data: Dict[str, Any] = {}
    if path is not None:
        config_path = Path(path)
        if not config_path.is_file():
            raise ValidationError(f"Config file not found: {config_path}")
        try:
            with open(config_path, "rb") as f:
                data = tomllib.load(f)
        except tomllib.TOMLDecodeError as e:
            raise ValidationError(f"Invalid config file {config_path}: {e}")

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        section, _, leaf = key.rpartition(".")
        target = data
        if section:
            target = data.setdefault(section, {})
        target[leaf] = value

    try:
        return PipelineConfig.model_validate(data)
    except PydanticValidationError as e:
        raise ValidationError(f"Invalid configuration: {e}")


# Global config instance
config = Config()
