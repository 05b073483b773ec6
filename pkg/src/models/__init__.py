"""
Modelos de dados: sinais, resultados de recuperação e experimentos
"""
