"""
Script para executar o benchmark do Método de Prony Decimado
Exemplo: python run_benchmark.py sweep-delta --trials 200 --out data/sweep.csv
"""

import logging
import sys
from pathlib import Path

# Adiciona o diretório src ao path
sys.path.append(str(Path(__file__).parent / "src"))

from src.cli import main
from src.utils.config import get_settings

settings = get_settings()

# Configuração de logging
logging.basicConfig(
    level=getattr(logging, settings.log_level.upper(), logging.INFO),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    handlers=[
        logging.FileHandler(settings.log_file),
        logging.StreamHandler()
    ]
)

if __name__ == "__main__":
    sys.exit(main(settings=settings))
