import os
from dotenv import load_dotenv

load_dotenv()

__version__ = "0.3.0"

# Largest symmetric-power space the library will build
HK_MAX_DIM = int(os.getenv("HK_MAX_DIM", "100000"))

# Run manifests
HK_LOG_DIR = os.getenv("HK_LOG_DIR", "certificate_runs")
HK_LOG_LEVEL = os.getenv("HK_LOG_LEVEL", "INFO").upper()
HK_RECORD_RUNS = os.getenv("HK_RECORD_RUNS", "false").strip().lower() in ("1", "true", "yes")

# Process fan-out for isotropic search
HK_WORKERS = int(os.getenv("HK_WORKERS", "1"))

HK_SETTINGS_FILE = os.getenv("HK_SETTINGS_FILE", "saved_settings.json")
