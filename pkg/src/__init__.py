"""
Benchmark de super-resolução - Método de Prony Decimado
Recuperação de spikes agrupados a partir de amostras espectrais ruidosas
"""

__version__ = "0.1.0"
