"""
Configuração do sistema
Lê variáveis de ambiente (e um arquivo .env, se existir)
"""

import os
from functools import lru_cache

from dotenv import load_dotenv
from pydantic import BaseModel, Field

from ..models.signal import NoiseMode


class Settings(BaseModel):
    """Configurações padrão do benchmark"""
    seed: int = Field(default=0, ge=0)
    data_dir: str = "data"
    log_level: str = "INFO"
    log_file: str = "benchmark.log"
    workers: int = Field(default=1, ge=1)
    noise_mode: NoiseMode = NoiseMode.BOUNDARY


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Carrega as configurações a partir do ambiente"""
    load_dotenv()
    return Settings(
        seed=int(os.getenv("DPM_SEED", "0")),
        data_dir=os.getenv("DPM_DATA_DIR", "data"),
        log_level=os.getenv("DPM_LOG_LEVEL", "INFO"),
        log_file=os.getenv("DPM_LOG_FILE", "benchmark.log"),
        workers=int(os.getenv("DPM_WORKERS", "1")),
        noise_mode=NoiseMode(os.getenv("DPM_NOISE_MODE", NoiseMode.BOUNDARY.value)),
    )
